#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "foelner/operator.hpp"

namespace foelner {

struct SuiteReport {
  std::string suite;
  int trials = 0;
  int violations = 0;
  // Smallest slack (bound minus measured) seen across trials; negative
  // means a violation of that magnitude.
  double worst_margin = 0.0;
  std::uint64_t seed = 0;
};

std::string suite_report_json(const SuiteReport& r);

// |phi(L,P) - phi(L,Q)| <= 4 ||L|| ||P-Q||_2 / max(||P||_2, ||Q||_2)
// on random dense contractions of dimension `dim` with random frame pairs.
SuiteReport check_perturbation_bound(int trials, int dim, std::uint64_t seed);

// Families of s projections in dimension `dim` with pairwise overlap below
// 1/(3 s^3): ranks add under the join and the sum stays >= 1/2 on the join.
// Families are constructed near-orthogonal and shrunk until admissible;
// candidates that stay inadmissible are rejected and do not count as trials.
SuiteReport check_sum_projections(int trials, int dim, int s, std::uint64_t seed);

// phi(A (x) B, P (x) Q) <= phi(A,P) ||B|| + ||A|| phi(B,Q) on random dense
// factors of the given dimensions with true operator norms.
SuiteReport check_tensor_bound(int trials, int dim_a, int dim_b, std::uint64_t seed);

struct TraceHsRow {
  std::size_t rank = 0;
  double hs = 0.0;
  double trace = 0.0;
};

struct TraceHsReport {
  SuiteReport report;
  std::vector<TraceHsRow> rows;
};

// Trace-normalized and Hilbert-Schmidt defects along canonical windows:
// both columns are emitted, and the final values must vanish together
// (each below 0.05 whenever the other is below 0.01).
TraceHsReport check_trace_hs_equivalence(const Operator& op, const std::vector<std::size_t>& ranks);

// Support-function sampling of the numerical range: for each angle the top
// eigenvector of Re(e^{i theta} M) contributes one boundary point.
std::vector<std::complex<double>> numerical_range(const Eigen::MatrixXcd& m, int angles = 256);

// Distance from 0 to the sampled numerical range of the commutator [M, X].
// A commutator has trace zero, so this is zero up to sampling error; the
// routine exists to witness that fact numerically.
double commutator_range_distance(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& x,
                                 int angles = 256);

}  // namespace foelner
