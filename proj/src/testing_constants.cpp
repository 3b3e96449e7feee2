#include "twl/testing_constants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "twl/parallel.hpp"
#include "twl/rng.hpp"

namespace twl {

namespace {

// Inner maximization state for a single outer cube: one variable per
// (covered cell of Q, covering family member) pair, constrained to the
// per-cell l^{q'} sphere.
class InnerProblem {
 public:
  InnerProblem(const Instance& inst, const CubeId& q)
      : inst_(&inst), q_(q), cells_(inst.grid().cells_in(q)) {
    const Exponents& e = inst.exponents();
    rc_ = e.r_conj;
    qc_ = e.q_conj;
    q_exp_ = e.q;
    vcell_ = inst.grid().cell_measure();
    w_factor_ = std::pow(integrate_cube(inst.w().fn(), q), -rc_ / e.p_conj);
    offset_.resize(cells_.size() + 1, 0);
    max_cover_ = 0;
    for (std::size_t pos = 0; pos < cells_.size(); ++pos) {
      const std::size_t m = inst.cover(cells_[pos]).size();
      offset_[pos + 1] = offset_[pos] + m;
      max_cover_ = std::max(max_cover_, m);
    }
    inv_measure_.resize(inst.family_size());
    for (std::size_t i = 0; i < inst.family_size(); ++i) {
      inv_measure_[i] = inst.tau(i) / inst.cube_measure(i);
    }
  }

  std::size_t nvars() const { return offset_.back(); }
  std::size_t ncells() const { return cells_.size(); }
  std::size_t max_cover() const { return max_cover_; }
  const std::vector<std::size_t>& cells() const { return cells_; }
  std::size_t offset(std::size_t pos) const { return offset_[pos]; }

  double eval(const std::vector<double>& a, std::vector<double>& masses) const {
    masses.assign(inst_->family_size(), 0.0);
    for (std::size_t pos = 0; pos < cells_.size(); ++pos) {
      const std::size_t x = cells_[pos];
      const auto& cov = inst_->cover(x);
      const double wx = inst_->w()[x];
      for (std::size_t s = 0; s < cov.size(); ++s) {
        masses[cov[s]] += a[offset_[pos] + s] * wx;
      }
    }
    for (std::size_t i = 0; i < masses.size(); ++i) {
      masses[i] *= vcell_ * inv_measure_[i];
    }
    double obj = 0.0;
    for (std::size_t pos = 0; pos < cells_.size(); ++pos) {
      const std::size_t y = cells_[pos];
      double sum = 0.0;
      for (std::uint32_t i : inst_->cover(y)) sum += masses[i];
      obj += inst_->sigma()[y] * std::pow(sum, rc_);
    }
    return obj * vcell_ * w_factor_;
  }

  void gradient(const std::vector<double>& a, std::vector<double>& masses,
                std::vector<double>& d, std::vector<double>& g) const {
    eval(a, masses);
    d.assign(inst_->family_size(), 0.0);
    for (std::size_t pos = 0; pos < cells_.size(); ++pos) {
      const std::size_t y = cells_[pos];
      double sum = 0.0;
      for (std::uint32_t i : inst_->cover(y)) sum += masses[i];
      const double t = inst_->sigma()[y] * std::pow(sum, rc_ - 1.0);
      for (std::uint32_t i : inst_->cover(y)) d[i] += t;
    }
    g.assign(nvars(), 0.0);
    const double scale = rc_ * w_factor_ * vcell_ * vcell_;
    for (std::size_t pos = 0; pos < cells_.size(); ++pos) {
      const std::size_t x = cells_[pos];
      const auto& cov = inst_->cover(x);
      const double wx = inst_->w()[x];
      for (std::size_t s = 0; s < cov.size(); ++s) {
        g[offset_[pos] + s] = scale * d[cov[s]] * inv_measure_[cov[s]] * wx;
      }
    }
  }

  void project(std::vector<double>& a) const {
    for (std::size_t pos = 0; pos < cells_.size(); ++pos) {
      const std::size_t base = offset_[pos];
      const std::size_t m = offset_[pos + 1] - base;
      if (m == 0) continue;
      double sum = 0.0;
      for (std::size_t s = 0; s < m; ++s) {
        const double v = std::max(a[base + s], 0.0);
        a[base + s] = v;
        sum += std::pow(v, qc_);
      }
      if (sum > 0.0) {
        const double scale = std::pow(sum, -1.0 / qc_);
        for (std::size_t s = 0; s < m; ++s) a[base + s] *= scale;
      } else {
        const double uniform = std::pow(1.0 / static_cast<double>(m), 1.0 / qc_);
        for (std::size_t s = 0; s < m; ++s) a[base + s] = uniform;
      }
    }
  }

  ComponentFamily to_family(const std::vector<double>& a) const {
    ComponentFamily family(*inst_);
    for (std::size_t pos = 0; pos < cells_.size(); ++pos) {
      const std::size_t x = cells_[pos];
      const auto& cov = inst_->cover(x);
      for (std::size_t s = 0; s < cov.size(); ++s) {
        family.set_value(cov[s], x, a[offset_[pos] + s]);
      }
    }
    return family;
  }

  CellSet covered_cells() const {
    CellSet support(inst_->grid().cell_count());
    for (std::size_t pos = 0; pos < cells_.size(); ++pos) {
      if (!inst_->cover(cells_[pos]).empty()) support.insert(cells_[pos]);
    }
    return support;
  }

  double qc() const { return qc_; }
  double maximizer_exponent() const { return q_exp_ - 1.0; }

 private:
  const Instance* inst_;
  CubeId q_;
  std::vector<std::size_t> cells_;
  std::vector<std::size_t> offset_;
  std::vector<double> inv_measure_;
  std::size_t max_cover_ = 0;
  double rc_ = 2.0;
  double qc_ = 2.0;
  double q_exp_ = 2.0;
  double vcell_ = 1.0;
  double w_factor_ = 1.0;
};

struct AscentOutcome {
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
};

// Nonlinear power iteration on the product of per-cell spheres: the
// linearization maximizer has the closed form a_s ∝ grad_s^{q-1} per cell,
// and convexity of the objective makes the value sequence monotone.
AscentOutcome sphere_ascent(const InnerProblem& prob, std::vector<double>& a,
                            const OptimizerConfig& config) {
  std::vector<double> masses;
  std::vector<double> d;
  std::vector<double> g;
  std::vector<double> trial(a.size());
  prob.project(a);
  AscentOutcome out;
  out.objective = prob.eval(a, masses);
  out.converged = false;
  const double expo = prob.maximizer_exponent();  // q - 1
  for (int it = 0; it < config.max_iters; ++it) {
    ++out.iterations;
    prob.gradient(a, masses, d, g);
    trial = a;
    bool moved = false;
    for (std::size_t pos = 0; pos < prob.ncells(); ++pos) {
      const std::size_t base = prob.offset(pos);
      const std::size_t m = prob.offset(pos + 1) - base;
      if (m == 0) continue;
      double cell_max = 0.0;
      for (std::size_t s = 0; s < m; ++s) cell_max = std::max(cell_max, g[base + s]);
      if (!(cell_max > 0.0)) continue;  // flat cell, keep its current point
      for (std::size_t s = 0; s < m; ++s) {
        const double t = std::max(g[base + s], 0.0) / cell_max;
        trial[base + s] = t > 0.0 ? std::pow(t, expo) : 0.0;
      }
      moved = true;
    }
    if (!moved) {
      out.converged = true;
      return out;
    }
    prob.project(trial);
    const double next = prob.eval(trial, masses);
    if (!(next > out.objective)) {
      out.converged = true;
      return out;
    }
    const double gain = (next - out.objective) / next;
    a.swap(trial);
    out.objective = next;
    if (gain < config.tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

void compositions(int total, int parts, std::vector<int>& scratch,
                  std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    scratch.push_back(total);
    out.push_back(scratch);
    scratch.pop_back();
    return;
  }
  for (int v = 0; v <= total; ++v) {
    scratch.push_back(v);
    compositions(total - v, parts - 1, scratch, out);
    scratch.pop_back();
  }
}

// Cyclic per-cell exhaustive sweep over the simplex grid u with a = u^{1/q'}.
double oracle_sweeps(const InnerProblem& prob, std::vector<double>& a, int resolution) {
  std::vector<double> masses;
  double best = prob.eval(a, masses);
  std::vector<std::vector<std::vector<int>>> grids(prob.max_cover() + 1);
  for (std::size_t m = 1; m <= prob.max_cover(); ++m) {
    std::vector<int> scratch;
    compositions(resolution, static_cast<int>(m), scratch, grids[m]);
  }
  const double qc = prob.qc();
  std::vector<double> saved;
  for (int sweep = 0; sweep < 8; ++sweep) {
    bool improved = false;
    for (std::size_t pos = 0; pos < prob.ncells(); ++pos) {
      const std::size_t base = prob.offset(pos);
      const std::size_t m = prob.offset(pos + 1) - base;
      if (m == 0) continue;
      saved.assign(a.begin() + base, a.begin() + base + m);
      double local_best = best;
      std::vector<double> winner = saved;
      for (const auto& comp : grids[m]) {
        for (std::size_t s = 0; s < m; ++s) {
          a[base + s] = std::pow(static_cast<double>(comp[s]) / resolution, 1.0 / qc);
        }
        const double val = prob.eval(a, masses);
        if (val > local_best) {
          local_best = val;
          winner.assign(a.begin() + base, a.begin() + base + m);
        }
      }
      std::copy(winner.begin(), winner.end(), a.begin() + base);
      if (local_best > best * (1.0 + 1e-14)) improved = true;
      best = std::max(best, local_best);
    }
    if (!improved) break;
  }
  return best;
}

}  // namespace

TestingReport compute_L_star(const Instance& instance) {
  const DyadicGrid& grid = instance.grid();
  const Exponents& e = instance.exponents();
  const double vcell = grid.cell_measure();
  const auto cubes = grid.unit_cubes();
  std::vector<double> values(cubes.size(), 0.0);
  parallel_for(cubes.size(), [&](std::size_t n) {
    const CubeId& q = cubes[n];
    const StepFunction tbar = apply_Tbar(instance, indicator(grid, q));
    double integral = 0.0;
    for (std::size_t c : grid.cells_in(q)) {
      integral += std::pow(tbar[c], e.p) * instance.w()[c] * vcell;
    }
    const double sigma_q = integrate_cube(instance.sigma().fn(), q);
    values[n] = std::pow(sigma_q, -e.p / e.r) * integral;
  });
  TestingReport report;
  report.witness_cube = cubes.front();
  for (std::size_t n = 0; n < cubes.size(); ++n) {
    if (values[n] > report.value) {
      report.value = values[n];
      report.witness_cube = cubes[n];
    }
  }
  report.trace.converged = true;
  report.lower_bound_only = false;
  return report;
}

InnerLResult optimize_inner_L(const Instance& instance, const CubeId& q,
                              const OptimizerConfig& config) {
  InnerProblem prob(instance, q);
  InnerLResult result{0.0, ComponentFamily(instance), {}, false};
  if (prob.nvars() == 0) {
    result.trace.start_values.push_back(0.0);
    return result;
  }

  std::vector<std::vector<double>> starts;
  // Canonical sequence of the indicator of Q.
  {
    const BSequence canon = canonical_sequence(instance, indicator(instance.grid(), q));
    std::vector<double> a(prob.nvars(), 0.0);
    for (std::size_t pos = 0; pos < prob.ncells(); ++pos) {
      const std::size_t x = prob.cells()[pos];
      const auto& cov = instance.cover(x);
      for (std::size_t s = 0; s < cov.size(); ++s) {
        a[prob.offset(pos) + s] = canon.family().value(cov[s], x);
      }
    }
    starts.push_back(std::move(a));
  }
  starts.emplace_back(prob.nvars(), 1.0);  // uniform after projection
  {
    // Everything on the member with the largest τ/|R| at each cell.
    std::vector<double> a(prob.nvars(), 0.0);
    for (std::size_t pos = 0; pos < prob.ncells(); ++pos) {
      const std::size_t x = prob.cells()[pos];
      const auto& cov = instance.cover(x);
      if (cov.empty()) continue;
      std::size_t best = 0;
      double best_rate = -1.0;
      for (std::size_t s = 0; s < cov.size(); ++s) {
        const double rate = instance.tau(cov[s]) / instance.cube_measure(cov[s]);
        if (rate > best_rate) {
          best_rate = rate;
          best = s;
        }
      }
      a[prob.offset(pos) + best] = 1.0;
    }
    starts.push_back(std::move(a));
  }
  Rng rng(config.seed, static_cast<std::uint64_t>(q.level) * 0x100000001b3ull +
                           q.index[0] * 1315423911ull + q.index[1]);
  for (int s = 0; s < config.restarts; ++s) {
    std::vector<double> a(prob.nvars());
    for (auto& v : a) v = -std::log(std::max(rng.uniform(), 1e-300));
    starts.push_back(std::move(a));
  }

  std::vector<double> best_a;
  bool all_converged = true;
  for (auto& a : starts) {
    AscentOutcome outcome = sphere_ascent(prob, a, config);
    result.trace.start_values.push_back(outcome.objective);
    result.trace.iterations += outcome.iterations;
    all_converged = all_converged && outcome.converged;
    if (outcome.objective > result.objective || best_a.empty()) {
      result.objective = outcome.objective;
      best_a = std::move(a);
    }
  }
  result.trace.converged = all_converged;

  if (config.use_oracle && prob.ncells() <= 16 && prob.max_cover() <= 4) {
    const double refined = oracle_sweeps(prob, best_a, config.oracle_resolution);
    if (refined > result.objective) result.objective = refined;
    // Polish the oracle point back through ascent.
    AscentOutcome polish = sphere_ascent(prob, best_a, config);
    result.objective = std::max(result.objective, polish.objective);
    result.oracle_used = true;
  }

  result.a = prob.to_family(best_a);
  return result;
}

double testing_objective_L(const Instance& instance, const CubeId& q,
                           const ComponentFamily& a) {
  const DyadicGrid& grid = instance.grid();
  const Exponents& e = instance.exponents();
  const CubeRegion whole{q, CellSet(grid.cell_count(), true)};
  const StepFunction u = u_from_masses(instance, u_masses_restricted(instance, a, whole));
  double integral = 0.0;
  const double vcell = grid.cell_measure();
  for (std::size_t c : grid.cells_in(q)) {
    integral += std::pow(std::abs(u[c]), e.r_conj) * instance.sigma()[c] * vcell;
  }
  return std::pow(integrate_cube(instance.w().fn(), q), -e.r_conj / e.p_conj) * integral;
}

TestingReport compute_L(const Instance& instance, const OptimizerConfig& config) {
  const DyadicGrid& grid = instance.grid();
  const auto cubes = grid.unit_cubes();
  std::vector<InnerLResult> results(cubes.size(), InnerLResult{0.0, ComponentFamily(instance), {}, false});
  parallel_for(cubes.size(), [&](std::size_t n) {
    results[n] = optimize_inner_L(instance, cubes[n], config);
  });
  TestingReport report;
  report.witness_cube = cubes.front();
  std::size_t winner = 0;
  bool oracle_everywhere = true;
  for (std::size_t n = 0; n < cubes.size(); ++n) {
    oracle_everywhere = oracle_everywhere && results[n].oracle_used;
    report.trace.iterations += results[n].trace.iterations;
    report.trace.converged = report.trace.converged && results[n].trace.converged;
    if (results[n].objective > report.value) {
      report.value = results[n].objective;
      report.witness_cube = cubes[n];
      winner = n;
    }
  }
  report.trace.start_values = results[winner].trace.start_values;
  {
    InnerProblem prob(instance, cubes[winner]);
    report.witness_sequence.emplace(std::move(results[winner].a), prob.covered_cells());
  }
  report.lower_bound_only = !oracle_everywhere;
  return report;
}

LsuConstants lsu_constants(const Instance& instance) {
  const DyadicGrid& grid = instance.grid();
  const Exponents& e = instance.exponents();
  LsuConstants out;
  const auto cubes = grid.unit_cubes();
  out.direct_witness = cubes.front();
  out.dual_witness = cubes.front();
  for (const CubeId& k : cubes) {
    const StepFunction one_k = indicator(grid, k);
    const StepFunction r_sigma =
        u_from_masses(instance, operator_masses(instance, one_k, instance.sigma().fn()));
    const double direct = lp_norm(restrict_inside(r_sigma, k), instance.w(), e.p) /
                          std::pow(integrate_cube(instance.sigma().fn(), k), 1.0 / e.r);
    if (direct > out.direct) {
      out.direct = direct;
      out.direct_witness = k;
    }
    const StepFunction r_w =
        u_from_masses(instance, operator_masses(instance, one_k, instance.w().fn()));
    const double dual = lp_norm(restrict_inside(r_w, k), instance.sigma(), e.r_conj) /
                        std::pow(integrate_cube(instance.w().fn(), k), 1.0 / e.p_conj);
    if (dual > out.dual) {
      out.dual = dual;
      out.dual_witness = k;
    }
  }
  return out;
}

double carleson_constant(const Instance& instance) {
  const Exponents& e = instance.exponents();
  if (std::abs(e.r - e.q) > 1e-12 || std::abs(e.p - e.q) > 1e-12) {
    throw std::invalid_argument(
        "carleson_constant requires r = q = p; got r=" + std::to_string(e.r) +
        " q=" + std::to_string(e.q) + " p=" + std::to_string(e.p));
  }
  const DyadicGrid& grid = instance.grid();
  std::vector<double> member_terms(instance.family_size());
  for (std::size_t i = 0; i < instance.family_size(); ++i) {
    const CubeId& r_cube = instance.family_cube(i);
    const double w_r = integrate_cube(instance.w().fn(), r_cube);
    const double sigma_r = integrate_cube(instance.sigma().fn(), r_cube);
    member_terms[i] =
        w_r * std::pow(sigma_r * instance.tau(i) / grid.measure(r_cube), e.p);
  }
  double best = 0.0;
  for (const CubeId& q : grid.unit_cubes()) {
    double sum = 0.0;
    for (std::size_t i = 0; i < instance.family_size(); ++i) {
      if (grid.contains(q, instance.family_cube(i))) sum += member_terms[i];
    }
    best = std::max(best, sum / integrate_cube(instance.sigma().fn(), q));
  }
  return best;
}

}  // namespace twl
