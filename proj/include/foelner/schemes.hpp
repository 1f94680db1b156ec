#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "foelner/defect.hpp"
#include "foelner/operator.hpp"
#include "foelner/projection.hpp"

namespace foelner {

struct SequenceRecord {
  int step = 0;
  std::size_t rank = 0;
  double hs_defect = 0.0;
  std::optional<double> op_defect;
  std::optional<double> certified_bound;
  std::string scheme;
  std::string descriptor;
  Projection projection = Projection::coordinate({BasisIndex::nat(0)});
};

// Nested coordinate windows shaped for the operator's index sort (intervals,
// boxes, word balls).  Requested ranks are sorted ascending; the realized
// rank may round up to the next full shape.  Where the structure yields an
// a-priori defect bound (shifts, translation kernels, word isometries) it is
// emitted as certified_bound and the measured value is checked against it.
std::vector<SequenceRecord> interval_sequence(const Operator& op, std::vector<std::size_t> ranks,
                                              bool with_op = false);

// Product windows P (x) Q for a tensor product operator, one record per
// aligned pair of factor records.  certified_bound is the majorant
//   phi(A,P) ||B|| + ||A|| phi(B,Q)
// with the factors' certified norm bounds; exceeding it raises
// CertifiedBoundError.
std::vector<SequenceRecord> tensor_sequence(const Operator& tensor_op,
                                            const std::vector<SequenceRecord>& left,
                                            const std::vector<SequenceRecord>& right);

// Lifts records of a summand to the direct sum as P (+) 0.  The defect is
// invariant under the lift; the lifted value is recomputed from scratch and
// verified to agree with the base record.
std::vector<SequenceRecord> lift_direct_sum(const Operator& sum_op,
                                            const std::vector<SequenceRecord>& base, int side);

// Proposes a projection dominating `base` (null on the first step) with
// defect at most `eps` for every operator of the run, or nullopt if it
// cannot.
using ExtensionOracle =
    std::function<std::optional<Projection>(const Projection* base, double eps)>;

struct GreedyResult {
  std::vector<SequenceRecord> records;
  bool failed = false;
  int failed_step = -1;     // step whose target the oracle could not meet
  std::string failure_reason;
};

// Greedy proper sequence: step n targets eps_n = 1/(n+1).  Every accepted
// projection must dominate its predecessor; a violating or failing oracle
// stops the run and marks the result, with all accepted records kept.
GreedyResult greedy_proper_sequence(const std::vector<Operator>& ops,
                                    const ExtensionOracle& oracle, int steps);

// Extender that proposes canonical coordinate windows of growing rank,
// doubling until the target is met or `rank_cap` is hit.
ExtensionOracle interval_extender(const Operator& op, std::size_t rank_cap = 1u << 20);

// Extender that runs an external command; the child receives
// {"base": <projection or null>, "eps": x} on stdin and must answer with a
// projection document on stdout.
ExtensionOracle script_extender(const std::vector<Operator>& ops, const std::string& command);

struct MergeResult {
  Projection merged = Projection::coordinate({BasisIndex::nat(0)});
  double measured = 0.0;
  double certified_bound = 0.0;
};

// Joins a family of equal-rank projections with small pairwise overlap into
// one projection with a certified defect bound of 4 * N * delta.
// Hypotheses checked: phi(T, P_j) <= delta for every j, and
// ||P_j P_k|| <= min(delta, 1/(3 N^3)) for every pair.
MergeResult merge_constant_rank(const Operator& op, const std::vector<Projection>& family,
                                double delta);

}  // namespace foelner
