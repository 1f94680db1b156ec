#include "foelner/schemes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "foelner/errors.hpp"
#include "foelner/operator_spec.hpp"
#include "json.hpp"

namespace foelner {

namespace {

void check_certified(double measured, double bound, const std::string& what) {
  if (measured > bound + 1e-9)
    throw CertifiedBoundError(what + ": measured " + std::to_string(measured) +
                              " exceeds certified bound " + std::to_string(bound));
}

// A-priori Hilbert-Schmidt defect bound for a canonical window of the given
// realized rank, where the structure supplies one.
std::optional<double> structural_bound(const Operator& op, std::size_t rank) {
  const SpecNode& node = op.spec().node;
  const double r = static_cast<double>(rank);
  if (std::holds_alternative<UnilateralShiftSpec>(node)) return 1.0 / std::sqrt(r);
  if (std::holds_alternative<BilateralShiftSpec>(node)) return std::sqrt(2.0 / r);
  if (const auto* t = std::get_if<ToeplitzSpec>(&node)) {
    if (t->dim == 1) {
      // ||[T, P_N]||_2^2 = sum_k min(|k|, N) |a_k|^2 <= sum_k |k| |a_k|^2.
      double s = 0.0;
      for (const auto& [k, v] : t->coeffs) s += static_cast<double>(std::llabs(k[0])) * std::norm(v);
      return std::sqrt(s / r);
    }
    // Square window of side N: split the boundary mass at b = ceil(sqrt(N)).
    const auto side = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(rank))));
    if (side * side != static_cast<std::int64_t>(rank)) return std::nullopt;
    const double n = static_cast<double>(side);
    const double b = std::ceil(std::sqrt(n));
    double tail1 = 0.0, tail2 = 0.0, total = 0.0;
    for (const auto& [k, v] : t->coeffs) {
      const double w = std::norm(v);
      total += w;
      if (static_cast<double>(std::llabs(k[0])) > b) tail1 += w;
      if (static_cast<double>(std::llabs(k[1])) > b) tail2 += w;
    }
    const double a1 = tail1 + b / n * total;
    const double a2 = tail2 + b / n * total;
    return std::sqrt(a1 + a2);
  }
  if (const auto* c = std::get_if<CuntzSpec>(&node)) {
    // Full word ball of depth D: the boundary is exactly the n^D words of
    // top length prepended out of the ball.
    double ball = 1.0, level = 1.0;
    int depth = 0;
    while (ball < r - 0.5) {
      level *= c->n;
      ball += level;
      ++depth;
    }
    if (std::llround(ball) != static_cast<std::int64_t>(rank)) return std::nullopt;
    (void)depth;
    return std::sqrt(level / r);
  }
  return std::nullopt;
}

}  // namespace

std::vector<SequenceRecord> interval_sequence(const Operator& op, std::vector<std::size_t> ranks,
                                              bool with_op) {
  if (ranks.empty()) throw ValidationError("interval_sequence: empty rank list");
  std::sort(ranks.begin(), ranks.end());
  ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
  if (ranks.front() == 0) throw ValidationError("interval_sequence: rank 0 requested");
  if (const std::size_t dim = op.finite_dimension(); dim && ranks.back() > dim)
    throw ValidationError("interval_sequence: rank " + std::to_string(ranks.back()) +
                          " exceeds the operator dimension " + std::to_string(dim));

  std::vector<SequenceRecord> out;
  int step = 1;
  for (std::size_t rank : ranks) {
    auto [indices, descriptor] = op.canonical_interval(rank);
    SequenceRecord rec;
    rec.step = step++;
    rec.scheme = "interval";
    rec.descriptor = std::move(descriptor);
    rec.projection = Projection::coordinate(std::move(indices));
    rec.rank = rec.projection.rank();
    rec.hs_defect = hs_defect(op, rec.projection).value;
    if (with_op) rec.op_defect = opnorm_defect(op, rec.projection).value;
    rec.certified_bound = structural_bound(op, rec.rank);
    if (rec.certified_bound)
      check_certified(rec.hs_defect, *rec.certified_bound,
                      "interval_sequence step " + std::to_string(rec.step));
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<SequenceRecord> tensor_sequence(const Operator& tensor_op,
                                            const std::vector<SequenceRecord>& left,
                                            const std::vector<SequenceRecord>& right) {
  const auto* ts = std::get_if<TensorSpec>(&tensor_op.spec().node);
  if (!ts) throw ValidationError("tensor_sequence: operator is not a tensor product");
  if (left.size() != right.size())
    throw ValidationError("tensor_sequence: factor sequences have different lengths (" +
                          std::to_string(left.size()) + " vs " + std::to_string(right.size()) +
                          ")");
  const Operator a = build_operator(ts->left);
  const Operator b = build_operator(ts->right);

  std::vector<SequenceRecord> out;
  for (std::size_t t = 0; t < left.size(); ++t) {
    const auto& lp = left[t].projection;
    const auto& rp = right[t].projection;
    if (lp.kind() != Projection::Kind::Coordinate || rp.kind() != Projection::Kind::Coordinate)
      throw ValidationError("tensor_sequence: factor projections must be coordinate");
    std::vector<BasisIndex> prod;
    prod.reserve(lp.rank() * rp.rank());
    for (const auto& x : lp.indices())
      for (const auto& y : rp.indices()) prod.push_back(BasisIndex::tensor(x, y));

    SequenceRecord rec;
    rec.step = static_cast<int>(t) + 1;
    rec.scheme = "tensor";
    rec.descriptor = "product(" + left[t].descriptor + "," + right[t].descriptor + ")";
    rec.projection = Projection::coordinate(std::move(prod));
    rec.rank = rec.projection.rank();
    rec.hs_defect = hs_defect(tensor_op, rec.projection).value;
    rec.certified_bound =
        left[t].hs_defect * b.norm_bound() + a.norm_bound() * right[t].hs_defect;
    check_certified(rec.hs_defect, *rec.certified_bound,
                    "tensor_sequence step " + std::to_string(rec.step));
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<SequenceRecord> lift_direct_sum(const Operator& sum_op,
                                            const std::vector<SequenceRecord>& base, int side) {
  const auto* ds = std::get_if<DirectSumSpec>(&sum_op.spec().node);
  if (!ds) throw ValidationError("lift_direct_sum: operator is not a direct sum");
  if (side != 0 && side != 1) throw ValidationError("lift_direct_sum: side must be 0 or 1");

  std::vector<SequenceRecord> out;
  for (const auto& rec : base) {
    if (rec.projection.kind() != Projection::Kind::Coordinate)
      throw ValidationError("lift_direct_sum: base projections must be coordinate");
    std::vector<BasisIndex> lifted;
    lifted.reserve(rec.rank);
    for (const auto& b : rec.projection.indices())
      lifted.push_back(BasisIndex::summand(side, b));

    SequenceRecord lrec;
    lrec.step = rec.step;
    lrec.scheme = "direct_sum_lift";
    lrec.descriptor = (side == 0 ? "left(" : "right(") + rec.descriptor + ")";
    lrec.projection = Projection::coordinate(std::move(lifted));
    lrec.rank = lrec.projection.rank();
    lrec.hs_defect = hs_defect(sum_op, lrec.projection).value;
    if (rec.op_defect) lrec.op_defect = opnorm_defect(sum_op, lrec.projection).value;
    // The lift changes nothing about the commutator, so the base value is a
    // certified value, not merely a bound.
    lrec.certified_bound = rec.hs_defect;
    if (std::abs(lrec.hs_defect - rec.hs_defect) > 1e-12 * std::max(1.0, rec.hs_defect))
      throw CertifiedBoundError("lift_direct_sum step " + std::to_string(rec.step) +
                                ": lifted defect " + std::to_string(lrec.hs_defect) +
                                " deviates from the base value " +
                                std::to_string(rec.hs_defect));
    out.push_back(std::move(lrec));
  }
  return out;
}

namespace {

double family_defect(const std::vector<Operator>& ops, const Projection& p) {
  double worst = 0.0;
  for (const auto& op : ops) worst = std::max(worst, hs_defect(op, p).value);
  return worst;
}

// P dominates Q when (1-P) V_Q vanishes.
bool dominates(const Projection& p, const Projection& q, double tol) {
  if (p.kind() == Projection::Kind::Coordinate && q.kind() == Projection::Kind::Coordinate) {
    for (const auto& b : q.indices())
      if (!p.contains(b)) return false;
    return true;
  }
  std::vector<BasisIndex> w = p.window();
  const auto& qw = q.window();
  w.insert(w.end(), qw.begin(), qw.end());
  canonicalize(w);
  const Projection pf = p.as_frame();
  const Projection qf = q.as_frame();
  Eigen::MatrixXcd vp = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(w.size()),
                                               static_cast<Eigen::Index>(pf.rank()));
  Eigen::MatrixXcd vq = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(w.size()),
                                               static_cast<Eigen::Index>(qf.rank()));
  std::size_t t = 0;
  for (std::size_t r = 0; r < pf.window().size(); ++r) {
    while (w[t] < pf.window()[r]) ++t;
    vp.row(static_cast<Eigen::Index>(t)) = pf.columns().row(static_cast<Eigen::Index>(r));
  }
  t = 0;
  for (std::size_t r = 0; r < qf.window().size(); ++r) {
    while (w[t] < qf.window()[r]) ++t;
    vq.row(static_cast<Eigen::Index>(t)) = qf.columns().row(static_cast<Eigen::Index>(r));
  }
  const double dev = (vq - vp * (vp.adjoint() * vq)).norm();
  return dev <= tol * std::sqrt(static_cast<double>(qf.rank()));
}

}  // namespace

GreedyResult greedy_proper_sequence(const std::vector<Operator>& ops,
                                    const ExtensionOracle& oracle, int steps) {
  if (ops.empty()) throw ValidationError("greedy_proper_sequence: empty operator list");
  if (steps < 1) throw ValidationError("greedy_proper_sequence: steps must be >= 1");

  GreedyResult res;
  const Projection* base = nullptr;
  Projection current = Projection::coordinate({BasisIndex::nat(0)});  // replaced on first accept
  for (int n = 1; n <= steps; ++n) {
    const double eps = 1.0 / static_cast<double>(n + 1);
    std::optional<Projection> next = oracle(base, eps);
    if (!next) {
      res.failed = true;
      res.failed_step = n;
      res.failure_reason = "oracle gave up at target " + std::to_string(eps);
      return res;
    }
    if (base && !dominates(*next, *base, 1e-8)) {
      res.failed = true;
      res.failed_step = n;
      res.failure_reason = "oracle proposal does not dominate the previous projection";
      return res;
    }
    const double measured = family_defect(ops, *next);
    if (measured > eps + 1e-12) {
      res.failed = true;
      res.failed_step = n;
      res.failure_reason = "proposal misses target " + std::to_string(eps) + " (measured " +
                           std::to_string(measured) + ")";
      return res;
    }
    SequenceRecord rec;
    rec.step = n;
    rec.scheme = "greedy";
    rec.descriptor = "eps=" + std::to_string(eps);
    rec.projection = *next;
    rec.rank = next->rank();
    rec.hs_defect = measured;
    rec.certified_bound = eps;
    res.records.push_back(std::move(rec));
    current = *next;
    base = &current;
  }
  return res;
}

ExtensionOracle interval_extender(const Operator& op, std::size_t rank_cap) {
  return [op, rank_cap](const Projection* base, double eps) -> std::optional<Projection> {
    std::size_t rank = base ? std::max<std::size_t>(base->rank() * 2, base->rank() + 1) : 1;
    const std::size_t dim = op.finite_dimension();
    while (true) {
      if (dim && rank > dim) rank = dim;
      auto [indices, descriptor] = op.canonical_interval(rank);
      Projection p = Projection::coordinate(std::move(indices));
      if (hs_defect(op, p).value <= eps) {
        if (base && !dominates(p, *base, 1e-8)) return std::nullopt;
        return p;
      }
      if (dim && rank == dim) return std::nullopt;  // exhausted a finite space
      if (rank >= rank_cap) return std::nullopt;
      rank *= 2;
    }
  };
}


ExtensionOracle script_extender(const std::vector<Operator>& ops, const std::string& command) {
  std::optional<IndexSort> sort;
  if (!ops.empty()) sort = ops.front().sort();
  return [command, sort](const Projection* base, double eps) -> std::optional<Projection> {
    nlohmann::json req{{"eps", eps}};
    req["base"] = base ? nlohmann::json::parse(projection_to_json_text(*base))
                       : nlohmann::json(nullptr);
    const std::string payload = req.dump();

    const std::string shell = command + " <<'FOELNER_EOF'\n" + payload + "\nFOELNER_EOF";
    FILE* pipe = popen(shell.c_str(), "r");
    if (!pipe) return std::nullopt;
    std::string reply;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) reply.append(buf, got);
    const int status = pclose(pipe);
    if (status != 0) return std::nullopt;
    try {
      return projection_from_json_text(reply, sort ? &*sort : nullptr);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
}

MergeResult merge_constant_rank(const Operator& op, const std::vector<Projection>& family,
                                double delta) {
  if (family.size() < 2) throw ValidationError("merge_constant_rank: need at least 2 projections");
  if (!(delta > 0.0)) throw ValidationError("merge_constant_rank: delta must be > 0");
  const std::size_t m = family.front().rank();
  for (std::size_t j = 1; j < family.size(); ++j)
    if (family[j].rank() != m)
      throw ValidationError("merge_constant_rank: projection " + std::to_string(j) + " has rank " +
                            std::to_string(family[j].rank()) + ", expected " + std::to_string(m));

  const double n = static_cast<double>(family.size());
  const double overlap_cap = std::min(delta, 1.0 / (3.0 * n * n * n));
  for (std::size_t j = 0; j < family.size(); ++j) {
    const double d = hs_defect(op, family[j]).value;
    if (d > delta)
      throw ValidationError("merge_constant_rank: projection " + std::to_string(j) +
                            " has defect " + std::to_string(d) + " > delta " +
                            std::to_string(delta));
    for (std::size_t k = j + 1; k < family.size(); ++k) {
      const double o = overlap_norm(family[j], family[k]);
      if (o > overlap_cap)
        throw ValidationError("merge_constant_rank: overlap of projections " + std::to_string(j) +
                              " and " + std::to_string(k) + " is " + std::to_string(o) +
                              " > cap " + std::to_string(overlap_cap));
    }
  }

  MergeResult res;
  res.merged = join_all(family);
  if (res.merged.rank() != family.size() * m)
    throw CertifiedBoundError("merge_constant_rank: join rank " +
                              std::to_string(res.merged.rank()) +
                              " is not the sum of ranks " + std::to_string(family.size() * m));
  res.certified_bound = 4.0 * n * delta;
  res.measured = hs_defect(op, res.merged).value;
  check_certified(res.measured, res.certified_bound, "merge_constant_rank");
  return res;
}

}  // namespace foelner
