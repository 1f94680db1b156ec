#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "foelner/operator.hpp"
#include "foelner/projection.hpp"

namespace foelner {

struct Budget {
  int restarts = 16;
  int iters = 60;
};

struct ProbeResult {
  std::size_t rank = 0;
  // Smallest max-defect found across all candidates; always a true defect
  // value of `best`, hence an upper bound for the infimum.
  double best_value = 0.0;
  // Defect of the seeded coordinate candidate before descent; best_value
  // never exceeds it.
  double seed_value = 0.0;
  int restarts = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  Projection best = Projection::coordinate({BasisIndex::nat(0)});
};

// Minimizes max_i phi(T_i, P) over rank-`rank` projections supported on the
// `ambient` window: a greedy coordinate search seeds one candidate, and
// `budget.restarts` random orthonormal frames each descend by projected
// gradient steps with a backtracking line search (halving from 1.0, stop at
// relative improvement < 1e-10).  Restarts are independent tasks; results
// reduce by (value, restart index), so thread count does not affect output.
ProbeResult minimize_defect(const std::vector<Operator>& ops, std::size_t rank,
                            const std::vector<BasisIndex>& ambient, Budget budget,
                            std::uint64_t seed);

std::vector<ProbeResult> epsilon_curve(const std::vector<Operator>& ops,
                                       const std::vector<std::size_t>& ranks,
                                       const std::vector<BasisIndex>& ambient, Budget budget,
                                       std::uint64_t seed);

// Running minimum of best_value along the curve.
std::vector<double> lower_envelope(const std::vector<ProbeResult>& curve);

struct ReducingReport {
  bool found = false;
  std::size_t rank = 0;
  double residual = 0.0;
  std::string method;  // "component", "coordinate" or "frame"
  Projection projection = Projection::coordinate({BasisIndex::nat(0)});
};

// Searches for a joint reducing subspace of rank <= max_rank inside the
// ambient window: exact interaction components first, then optimizer runs
// per rank.  `found` requires residual < tol.
ReducingReport find_reducing_subspace(const std::vector<Operator>& ops, std::size_t max_rank,
                                      double tol, const std::vector<BasisIndex>& ambient,
                                      Budget budget, std::uint64_t seed);

enum class Cell { W0plus, W0minus, W1plus, S, Undetermined };
const char* cell_name(Cell c);

struct ClassifyParams {
  std::size_t max_rank = 16;
  std::size_t ambient_size = 256;
  double reducing_tol = 1e-8;
  Budget budget{4, 40};
  std::uint64_t seed = 1;
};

struct ClassificationReport {
  Cell cell = Cell::Undetermined;
  ReducingReport reducing;
  // (rank, best_value) of the optimizer curve used for the decay test; runs
  // on the complement of the reducing block when one was found.
  std::vector<std::pair<std::size_t, double>> curve;
  double scale = 0.0;  // covariant reference value for the floor test
  std::string evidence;
};

// Places the operator family in one of four cells by (a) hunting for a
// finite joint reducing subspace and (b) testing whether the optimizer
// curve on the (complemented) ambient window decays or stays bounded away
// from zero.  Scale covariance of the decision makes the answer invariant
// under lambda T + mu with lambda != 0.
ClassificationReport classify(const std::vector<Operator>& ops, const ClassifyParams& params);

}  // namespace foelner
