#pragma once

#include "twl/instance.hpp"

namespace twl {

// Cube-indexed family {g_Q} of step functions with supp g_Q ⊆ Q. Stored dense
// over cells; cells outside the cube are pinned to zero. A family views its
// instance, which must outlive it (this extends to BSequence and to any
// report carrying a witness family).
class ComponentFamily {
 public:
  explicit ComponentFamily(const Instance& instance);

  const Instance& instance() const noexcept { return *inst_; }
  std::size_t size() const noexcept { return vals_.size(); }

  double value(std::size_t comp, std::size_t cell) const { return vals_[comp][cell]; }
  void set_value(std::size_t comp, std::size_t cell, double v);
  const std::vector<double>& component(std::size_t comp) const { return vals_[comp]; }

  // (Σ_Q |g_Q(x)|^s)^{1/s} per cell.
  StepFunction pointwise_norm(double s) const;
  bool is_zero() const;

 private:
  const Instance* inst_;
  std::vector<std::vector<double>> vals_;
};

// Family with pointwise l^{q'} norm 1 on a designated support set and at most
// 1 elsewhere.
class BSequence {
 public:
  BSequence(ComponentFamily family, CellSet support);

  const ComponentFamily& family() const noexcept { return family_; }
  const CellSet& support() const noexcept { return support_; }

  // Largest violation of the normalization: |Σ|a|^{q'} - 1| on the support,
  // max(Σ|a|^{q'} - 1, 0) off it.
  double normalization_defect() const;

 private:
  ComponentFamily family_;
  CellSet support_;
};

// m_R = τ_R E_R(f·density), one entry per family member.
std::vector<double> operator_masses(const Instance& instance, const StepFunction& f,
                                    const StepFunction& density);

// m_R = τ_R E_R(fσ), one entry per family member.
std::vector<double> tbar_masses(const Instance& instance, const StepFunction& f);

// (Σ_R |m_R 1_R(x)|^s)^{1/s}; a null keep mask sums the whole family.
StepFunction tbar_from_masses(const Instance& instance, const std::vector<double>& masses,
                              double s, const std::vector<char>* keep = nullptr);

// Σ_R m_R 1_R(x).
StepFunction u_from_masses(const Instance& instance, const std::vector<double>& masses);

// m_R = τ_R E_R(g_R w); the weight enters here, inputs are raw components.
std::vector<double> u_masses(const Instance& instance, const ComponentFamily& g);

// m_R = τ_R |R|^{-1} ∫_{R ∩ E} a_R w for a cube-meets-cells region E.
std::vector<double> u_masses_restricted(const Instance& instance, const ComponentFamily& a,
                                        const CubeRegion& region);

ComponentFamily apply_T(const Instance& instance, const StepFunction& f);
StepFunction apply_Tbar(const Instance& instance, const StepFunction& f);
// Same lattice sums with an explicit exponent; s = 1 gives the scalar linear
// positive operator.
StepFunction apply_Tbar_q(const Instance& instance, const StepFunction& f, double s);
StepFunction apply_U(const Instance& instance, const ComponentFamily& g);

struct TbarSplit {
  StepFunction inside;   // members R ⊆ Q
  StepFunction outside;  // members R ⊋ Q
};
TbarSplit apply_Tbar_split(const Instance& instance, const StepFunction& f, const CubeId& q);

// Membership masks for the in/out split around a cube.
struct SplitMasks {
  std::vector<char> inside;
  std::vector<char> outside;
};
SplitMasks split_masks(const Instance& instance, const CubeId& q);

// a_f: components (τ_Q E_Q(fσ))^{q-1} 1_Q · Tbar(fσ)^{-q/q'} on {Tbar > 0},
// zero elsewhere. Requires f ≥ 0.
BSequence canonical_sequence(const Instance& instance, const StepFunction& f);

// Dyadic maximal function over the cubes of levels 0..depth.
StepFunction maximal_function(const StepFunction& g, const Weight& omega);

struct DualityPair {
  double lhs = 0.0;  // ∫ <T(fσ), g> w
  double rhs = 0.0;  // ∫ U({g_Q w}) f σ
};
DualityPair duality_pair(const Instance& instance, const StepFunction& f,
                         const ComponentFamily& g);

}  // namespace twl
