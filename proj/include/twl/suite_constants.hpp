#pragma once

#include <cmath>

// Fixed comparison constants used by the verification suites. The absolute
// constants were measured once with the small-grid oracle sweep
// (tools/calibrate, 500 instances per weight profile, depth <= 3) and frozen
// with margin; regressions show up as ratio violations rather than silent
// drift.
namespace twl::suite {

// ||Tbar|| / max{L^{1/r'}, L_*^{1/p}} observed <= 1.12 on the calibration
// corpus; frozen at 8, far under the initial working bound of 64.
inline constexpr double kEquivalenceCap = 8.0;

// Carleson case r=q=p: ||Tbar||^p <= C * carleson_constant. The embedding
// argument gives (p')^p (= 4 at p=2); observed <= 1.47.
inline constexpr double kCarlesonCap = 4.0;

// Linear (exponent-1) specialization: ||R|| <= C * max{direct, dual};
// observed <= 1.16.
inline constexpr double kLsuCap = 4.0;

// Weak-type comparisons: ||Tbar(fσ)||_{L^{p,∞}(w)} <= C L^{1/r'} ||f|| and
// ||U({gw})||_{L^{r',∞}(σ)} <= C L_*^{1/p} ||g||; observed <= 1.02 and 1.06.
inline constexpr double kWeakTypeT = 2.0;
inline constexpr double kWeakTypeU = 2.0;

// Strengthened testing with global integrals; observed <= 1.25 and 1.04.
inline constexpr double kStrengthenedDirect = 2.5;
inline constexpr double kStrengthenedDual = 2.5;

// Σ_G σ(G) (E_G^σ f)^r <= 2^r (r')^r ∫ f^r σ over the principal cubes
// (observed ratio at most 0.07 of this cap).
inline double corona_cap(double r) {
  const double rc = r / (r - 1.0);
  return std::pow(2.0, r) * std::pow(rc, r);
}

// max c(R) <= 6 + ceil(1/η): six strict-nesting levels plus the packing
// bound at a fixed cube; observed maximum 3 at η = 0.01.
inline int occurrence_cap(double eta) {
  return 6 + static_cast<int>(std::ceil(1.0 / eta));
}

// Whitney parents overlap exactly 2^d times by construction; cap doubled.
inline int whitney_overlap_cap(int dimension) { return 1 << (dimension + 1); }

// Neighbor count within a family equals the sibling count.
inline int whitney_crowd_cap(int dimension) { return 1 << dimension; }

// ||M_ω g||_{L^s(ω)} <= s' ||g||_{L^s(ω)}.
inline double maximal_function_cap(double s) { return s / (s - 1.0); }

}  // namespace twl::suite
