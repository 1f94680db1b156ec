#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "foelner/operator.hpp"
#include "foelner/projection.hpp"

namespace foelner {

enum class NormKind { hs, trace, op };

struct DefectReport {
  double value = 0.0;
  // Certified bound on the numerical error of `value`; 0 when the
  // computation is exact up to floating point rounding.
  double error_bound = 0.0;
  bool exact = true;
  NormKind norm_kind = NormKind::hs;
  std::size_t rank = 0;
  // Number of basis indices the computation actually touched.
  std::size_t ambient_size = 0;
};

// ||T P - P T|| / ||P||_2 in the Hilbert-Schmidt norm (trace norm uses
// rank as the normalizer, operator norm uses no normalizer).
// Coordinate projections stream over the boundary of the index set and are
// exact; frame projections compress to a support-closed window, which is
// exact as well because supports are exact.
DefectReport hs_defect(const Operator& op, const Projection& p);
DefectReport trace_defect(const Operator& op, const Projection& p);
DefectReport opnorm_defect(const Operator& op, const Projection& p);
DefectReport defect(const Operator& op, const Projection& p, NormKind kind);

std::vector<DefectReport> defect_batch(const Operator& op, std::span<const Projection> ps,
                                       NormKind kind);

// Worst-case defect shift under an operator perturbation in norm:
// |phi(T, P) - phi(T', P)| <= 2 ||T - T'||.
double operator_perturbation_bound(double op_distance);

}  // namespace foelner
