#pragma once

#include <limits>
#include <map>
#include <optional>

#include "twl/operators.hpp"

namespace twl {

// Disjoint cubes covering an open (cell-aligned) set, each with its parent
// inside the set and its grandparent reaching outside.
struct WhitneyFamily {
  int k = 0;
  CellSet omega;
  std::vector<CubeId> cubes;  // sorted

  bool member(const CubeId& cube) const;
};

WhitneyFamily whitney(const DyadicGrid& grid, const CellSet& omega);

// Families of the superlevel sets Ω_k = {Tbar(fσ) > 2^k} over the window of
// k where Ω_k changes. Below the window Ω_k equals the full support, above it
// Ω_k is empty.
class LevelScan {
 public:
  LevelScan() = default;
  LevelScan(const DyadicGrid& grid, int k_min, std::vector<WhitneyFamily> levels);

  bool empty() const noexcept { return levels_.empty(); }
  int k_min() const noexcept { return k_min_; }
  int k_max() const noexcept { return k_min_ + static_cast<int>(levels_.size()) - 1; }

  const WhitneyFamily& at(int k) const;
  CellSet omega(int k) const;
  const std::vector<WhitneyFamily>& levels() const noexcept { return levels_; }
  const DyadicGrid& grid() const { return *grid_; }

 private:
  const DyadicGrid* grid_ = nullptr;
  int k_min_ = 0;
  std::vector<WhitneyFamily> levels_;
  WhitneyFamily empty_family_;
};

LevelScan level_sets(const Instance& instance, const StepFunction& f);

// E_k(Q) = Q ∩ (Ω_{k+2} − Ω_{k+3}) for each Q in the Whitney family of Ω_k.
std::map<CubeId, CubeRegion> ek_sets(const Instance& instance, const StepFunction& f,
                                     int k, const WhitneyFamily& family);

struct MaxPrincipleResult {
  double out_val_max = 0.0;  // sup over Q of the outer part fed by 1_{Q^{(2)}} f
  double far_val_max = 0.0;  // sup over Q of the full operator fed by 1_{(Q^{(2)})^c} f
  double bound = 0.0;        // 2^k
  bool pass = false;
};

MaxPrincipleResult max_principle_check(const Instance& instance, const StepFunction& f,
                                       int k, const CubeId& q);

// Smallest ratio Tbar^in_{Q^{(1)}}(1_{Q^{(1)}} fσ)(x) / 2^k over x ∈ E_k(Q)
// and Q in the family; the lower bound holds when min_ratio >= 1.
struct EkBoundCheck {
  double min_ratio = std::numeric_limits<double>::infinity();
  bool pass = true;
};
EkBoundCheck ek_inner_bound_check(const Instance& instance, const StepFunction& f,
                                  int k, const WhitneyFamily& family);

// Principal cubes of the σ-averages of f over a set of input cubes.
struct CoronaFamily {
  std::vector<CubeId> principal;      // sorted
  std::map<CubeId, CubeId> gamma;     // input cube -> minimal principal cube

  bool is_principal(const CubeId& cube) const;
};

CoronaFamily corona(const Instance& instance, const StepFunction& f,
                    const std::vector<CubeId>& input_cubes);

struct CoronaCarleson {
  double lhs = 0.0;  // Σ_G σ(G) (E_G^σ f)^r
  double rhs = 0.0;  // ∫ f^r σ
};
CoronaCarleson corona_carleson_sum(const Instance& instance, const StepFunction& f,
                                   const CoronaFamily& family);

struct NeighborFamilies {
  std::vector<CubeId> n_cubes;  // members of Q_k meeting Q^{(1)}
  std::vector<CubeId> r_cubes;  // members of Q_{k+3} meeting Q^{(1)}
  bool union_identity = false;  // Q^{(1)} ∩ Ω_{k+3} equals the union of r_cubes
  std::size_t crowd = 0;        // |n_cubes|
};

NeighborFamilies neighbor_families(const LevelScan& scan, int k, const CubeId& q);

struct ConstancyCheck {
  std::vector<double> values;
  bool constant = false;
};

// Values of U({a_P 1_{E_k(Q) ∩ P} w}) on the cells of R for R in R_k(Q),
// with a the canonical sequence of f.
ConstancyCheck dual_constancy_check(const Instance& instance, const StepFunction& f,
                                    int k, const CubeId& q, const CubeId& r);

// Whitney cubes of Ω_k split into the small-E_k class, the class dominated by
// the off-Ω_{k+3} integral, and the remainder.
struct ClassifiedLevel {
  int k = 0;
  double eta = 0.0;
  std::vector<CubeId> class1;
  std::vector<CubeId> class2;
  std::vector<CubeId> class3;
  std::map<CubeId, double> alpha;
  std::map<CubeId, double> beta;
  std::map<CubeId, CubeRegion> ek;
};

ClassifiedLevel classify_cubes(const Instance& instance, const StepFunction& f,
                               int k, double eta);

// c(R) = number of levels k at which R collects a class-3 cube Q with
// R ∈ R_k(Q).
std::map<CubeId, int> occurrence_count(const Instance& instance, const StepFunction& f,
                                       double eta);

}  // namespace twl
