#include "foelner/probe.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "foelner/defect.hpp"
#include "foelner/errors.hpp"
#include "foelner/rng.hpp"

namespace foelner {

namespace {

int thread_budget(std::size_t tasks) {
  int n = 0;
  if (const char* env = std::getenv("FOELNER_LAB_THREADS")) {
    n = std::atoi(env);
    if (n < 1) n = 1;
  } else {
    n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
  }
  return static_cast<int>(std::min<std::size_t>(n, tasks));
}

// Runs fn(0..tasks-1); the mapping from task to thread never influences
// results because every task writes only its own slot.
void parallel_for(std::size_t tasks, const std::function<void(std::size_t)>& fn) {
  const int threads = thread_budget(tasks);
  if (threads <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) fn(t);
    });
  }
  for (auto& th : pool) th.join();
}

// The optimization problem over one closed window: the ambient indices
// occupy positions [0, na), the boundary closure fills up to ne.  Each
// operator is stored as sparse columns over the window, once plain and once
// for the adjoint; entries leading outside the window are irrelevant for
// the ambient-masked gradient and are dropped.
struct FrameProblem {
  std::vector<BasisIndex> window;
  Eigen::Index na = 0;
  Eigen::Index ne = 0;
  struct Sparse {
    std::vector<std::vector<std::pair<Eigen::Index, cplx>>> cols;
  };
  std::vector<Sparse> plain, adjoint;

  // out = T x (or T* x), using only the first `col_limit` columns of x's
  // support; pass ne for a full application.
  void apply(std::size_t op, bool adj, const Eigen::MatrixXcd& x, Eigen::Index col_limit,
             Eigen::MatrixXcd& out) const {
    out.setZero();
    const auto& s = adj ? adjoint[op] : plain[op];
    for (Eigen::Index e = 0; e < col_limit; ++e)
      for (const auto& [row, val] : s.cols[static_cast<std::size_t>(e)])
        out.row(row) += val * x.row(e);
  }
};

FrameProblem build_problem(const std::vector<Operator>& ops,
                           const std::vector<BasisIndex>& ambient) {
  FrameProblem fp;
  fp.window = ambient;
  canonicalize(fp.window);
  if (fp.window.size() != ambient.size())
    throw ValidationError("probe: ambient window has repeated indices");
  fp.na = static_cast<Eigen::Index>(fp.window.size());

  std::unordered_set<BasisIndex, BasisIndexHash> inside(fp.window.begin(), fp.window.end());
  std::vector<BasisIndex> extra;
  std::vector<BasisIndex> support;
  for (const auto& op : ops) {
    for (const auto& b : ambient) {
      if (!op.in_domain(b))
        throw ValidationError("probe: ambient index " + b.str() +
                              " is outside the operator domain (sort " + op.sort().str() + ")");
      support.clear();
      op.column_support(b, support);
      op.row_support(b, support);
      for (const auto& s : support)
        if (!inside.count(s)) {
          inside.insert(s);
          extra.push_back(s);
        }
    }
  }
  canonicalize(extra);
  fp.window.insert(fp.window.end(), extra.begin(), extra.end());
  fp.ne = static_cast<Eigen::Index>(fp.window.size());
  if (fp.window.size() > kMaxDenseWindow)
    throw ResourceError("probe window of size " + std::to_string(fp.window.size()) +
                        " exceeds the dense cap " + std::to_string(kMaxDenseWindow));

  std::unordered_map<BasisIndex, Eigen::Index, BasisIndexHash> pos;
  for (std::size_t t = 0; t < fp.window.size(); ++t)
    pos[fp.window[t]] = static_cast<Eigen::Index>(t);

  for (const auto& op : ops) {
    FrameProblem::Sparse tp, ta;
    tp.cols.resize(fp.window.size());
    ta.cols.resize(fp.window.size());
    for (std::size_t e = 0; e < fp.window.size(); ++e) {
      const BasisIndex& b = fp.window[e];
      if (!op.in_domain(b)) continue;  // closure of one op may exit another's domain
      support.clear();
      op.column_support(b, support);
      for (const auto& i : support) {
        const auto it = pos.find(i);
        if (it == pos.end()) continue;
        const cplx v = op.entry(i, b);
        if (v != cplx(0.0, 0.0)) tp.cols[e].push_back({it->second, v});
      }
      support.clear();
      op.row_support(b, support);
      for (const auto& i : support) {
        const auto it = pos.find(i);
        if (it == pos.end()) continue;
        const cplx v = op.entry(b, i);
        if (v != cplx(0.0, 0.0)) ta.cols[e].push_back({it->second, std::conj(v)});
      }
    }
    fp.plain.push_back(std::move(tp));
    fp.adjoint.push_back(std::move(ta));
  }
  return fp;
}

// Objective F(V) = max_i || [T_i, V V*] ||_F^2 (unnormalized) and its
// Euclidean gradient, both through the factored form
//   ||C||^2 = ||A||^2 + ||B||^2 - 2 Re tr(M N),
//   A = T V, B = T* V, M = V* A, N = V* B,
// which never materializes an ne x ne matrix.
class Evaluator {
public:
  Evaluator(const FrameProblem& fp, Eigen::Index rank)
      : fp_(fp),
        r_(rank),
        vp_(Eigen::MatrixXcd::Zero(fp.ne, rank)),
        a_(fp.ne, rank),
        b_(fp.ne, rank),
        u_(fp.ne, rank),
        w_(fp.ne, rank) {}

  double objective(const Eigen::MatrixXcd& v) {
    pad(v);
    double worst = 0.0;
    for (std::size_t op = 0; op < fp_.plain.size(); ++op)
      worst = std::max(worst, term(op, v));
    return worst;
  }

  double objective_gradient(const Eigen::MatrixXcd& v, Eigen::MatrixXcd& grad) {
    pad(v);
    double worst = 0.0;
    std::size_t arg = 0;
    for (std::size_t op = 0; op < fp_.plain.size(); ++op) {
      const double f = term(op, v);
      if (f > worst) {
        worst = f;
        arg = op;
      }
    }
    // Recompute the factored pieces of the active operator.
    fp_.apply(arg, false, vp_, fp_.na, a_);
    fp_.apply(arg, true, vp_, fp_.na, b_);
    const Eigen::MatrixXcd m = v.adjoint() * a_.topRows(fp_.na);
    const Eigen::MatrixXcd n = v.adjoint() * b_.topRows(fp_.na);

    u_ = a_;
    u_.topRows(fp_.na).noalias() -= v * n;          // C V
    fp_.apply(arg, true, u_, fp_.ne, w_);           // T* (C V)
    Eigen::MatrixXcd g = w_;
    g.noalias() -= a_ * n;                          // - C B  (part 1)
    g.topRows(fp_.na).noalias() += v * (b_.adjoint() * b_);
    g.topRows(fp_.na).noalias() += v * (a_.adjoint() * a_);  // + C* A (part 1)
    g.noalias() -= b_ * m;
    u_ = -b_;
    u_.topRows(fp_.na).noalias() += v * m.adjoint();  // C* V
    fp_.apply(arg, false, u_, fp_.ne, w_);            // T (C* V)
    g.noalias() -= w_;

    grad = 2.0 * g.topRows(fp_.na);
    return worst;
  }

private:
  void pad(const Eigen::MatrixXcd& v) { vp_.topRows(fp_.na) = v; }

  double term(std::size_t op, const Eigen::MatrixXcd& v) {
    fp_.apply(op, false, vp_, fp_.na, a_);
    fp_.apply(op, true, vp_, fp_.na, b_);
    const Eigen::MatrixXcd m = v.adjoint() * a_.topRows(fp_.na);
    const Eigen::MatrixXcd n = v.adjoint() * b_.topRows(fp_.na);
    const double cross = (m.transpose().array() * n.array()).sum().real();
    return std::max(0.0, a_.squaredNorm() + b_.squaredNorm() - 2.0 * cross);
  }

  const FrameProblem& fp_;
  Eigen::Index r_;
  Eigen::MatrixXcd vp_, a_, b_, u_, w_;
};

Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& v) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(v);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(v.rows(), v.cols());
}

struct DescentOutcome {
  double value = 0.0;  // final unnormalized objective
  bool converged = false;
  Eigen::MatrixXcd v;
};

DescentOutcome descend(const FrameProblem& fp, Eigen::MatrixXcd v0, int iters) {
  Evaluator eval(fp, v0.cols());
  DescentOutcome out;
  out.v = std::move(v0);
  double f = eval.objective(out.v);
  Eigen::MatrixXcd grad, trial;
  double alpha_start = 1.0;  // warm start across iterations
  for (int it = 0; it < iters; ++it) {
    if (f <= 1e-20) {
      out.converged = true;  // defect numerically zero, nothing to minimize
      break;
    }
    eval.objective_gradient(out.v, grad);
    const double gn = grad.norm();
    if (gn <= 1e-14 * std::max(1.0, f)) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXcd dir = grad / gn;
    double alpha = alpha_start;
    double ft = f;
    bool accepted = false;
    while (alpha >= 1e-10) {
      trial = orthonormalize(out.v - alpha * dir);
      ft = eval.objective(trial);
      if (ft <= f - 1e-4 * alpha * gn) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.converged = true;  // no descent along the gradient at any step size
      break;
    }
    alpha_start = std::min(1.0, 2.0 * alpha);
    const double rel = (f - ft) / std::max(f, 1e-300);
    out.v = trial;
    f = ft;
    if (rel < 1e-10) {
      out.converged = true;
      break;
    }
  }
  out.value = f;
  return out;
}

// Exact unnormalized objective of a coordinate candidate, streamed over the
// boundary like the defect module does.
double coordinate_value(const std::vector<Operator>& ops, const std::vector<BasisIndex>& set) {
  const Projection p = Projection::coordinate(set);
  double worst = 0.0;
  for (const auto& op : ops) {
    const double d = hs_defect(op, p).value;
    worst = std::max(worst, d * d * static_cast<double>(set.size()));
  }
  return worst;
}

std::vector<BasisIndex> greedy_coordinate(const std::vector<Operator>& ops,
                                          const std::vector<BasisIndex>& ambient,
                                          std::size_t rank, double* value_out) {
  std::vector<BasisIndex> current(ambient.begin(), ambient.begin() + rank);
  double f = coordinate_value(ops, current);
  const int max_rounds = 25;
  for (int round = 0; round < max_rounds; ++round) {
    std::vector<BasisIndex> best_set = current;
    double best_f = f;
    std::unordered_set<BasisIndex, BasisIndexHash> in(current.begin(), current.end());
    for (std::size_t out_pos = 0; out_pos < current.size(); ++out_pos) {
      for (const auto& cand : ambient) {
        if (in.count(cand)) continue;
        std::vector<BasisIndex> trial = current;
        trial[out_pos] = cand;
        canonicalize(trial);
        const double ft = coordinate_value(ops, trial);
        if (ft < best_f || (ft == best_f && trial < best_set)) {
          best_f = ft;
          best_set = trial;
        }
      }
    }
    if (best_set == current) break;
    current = std::move(best_set);
    f = best_f;
  }
  if (value_out) *value_out = f;
  return current;
}

}  // namespace

ProbeResult minimize_defect(const std::vector<Operator>& ops, std::size_t rank,
                            const std::vector<BasisIndex>& ambient, Budget budget,
                            std::uint64_t seed) {
  if (ops.empty()) throw ValidationError("probe: empty operator list");
  if (rank == 0) throw ValidationError("probe: rank must be >= 1");
  if (ambient.size() < 4 * rank)
    throw ValidationError("probe: the ambient window (" + std::to_string(ambient.size()) +
                          " indices) must hold at least four times the rank " +
                          std::to_string(rank));
  if (budget.restarts < 0 || budget.iters < 0)
    throw ValidationError("probe: negative budget");

  const FrameProblem fp = build_problem(ops, ambient);
  const auto r = static_cast<Eigen::Index>(rank);

  const std::vector<BasisIndex> amb_sorted(fp.window.begin(), fp.window.begin() + fp.na);
  double seed_f = 0.0;
  const std::vector<BasisIndex> seed_set = greedy_coordinate(ops, amb_sorted, rank, &seed_f);

  const std::size_t tasks = static_cast<std::size_t>(budget.restarts) + 1;
  std::vector<DescentOutcome> outcomes(tasks);
  parallel_for(tasks, [&](std::size_t task) {
    Eigen::MatrixXcd v0;
    if (task == 0) {
      // Seeded start: indicator columns of the greedy coordinate set.
      v0 = Eigen::MatrixXcd::Zero(fp.na, r);
      std::size_t c = 0;
      std::size_t t = 0;
      for (const auto& b : seed_set) {
        while (fp.window[t] < b) ++t;
        v0(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c++)) = 1.0;
      }
    } else {
      SplitMix64 rng = SplitMix64::stream(seed, (static_cast<std::uint64_t>(rank) << 20) + task);
      v0.resize(fp.na, r);
      for (Eigen::Index c = 0; c < r; ++c)
        for (Eigen::Index i = 0; i < fp.na; ++i)
          v0(i, c) = cplx(rng.gaussian(), rng.gaussian());
      v0 = orthonormalize(v0);
    }
    outcomes[task] = descend(fp, std::move(v0), budget.iters);
  });

  std::size_t win = 0;
  for (std::size_t t = 1; t < tasks; ++t)
    if (outcomes[t].value < outcomes[win].value) win = t;

  ProbeResult res;
  res.rank = rank;
  res.best_value = std::sqrt(std::max(0.0, outcomes[win].value) / static_cast<double>(rank));
  res.seed_value = std::sqrt(std::max(0.0, seed_f) / static_cast<double>(rank));
  res.restarts = budget.restarts;
  res.converged = outcomes[win].converged;
  res.seed = seed;
  std::vector<BasisIndex> amb(fp.window.begin(), fp.window.begin() + fp.na);
  res.best = Projection::frame(std::move(amb), std::move(outcomes[win].v), 1e-8);
  return res;
}

std::vector<ProbeResult> epsilon_curve(const std::vector<Operator>& ops,
                                       const std::vector<std::size_t>& ranks,
                                       const std::vector<BasisIndex>& ambient, Budget budget,
                                       std::uint64_t seed) {
  std::vector<ProbeResult> out;
  out.reserve(ranks.size());
  for (std::size_t rank : ranks) out.push_back(minimize_defect(ops, rank, ambient, budget, seed));
  return out;
}

std::vector<double> lower_envelope(const std::vector<ProbeResult>& curve) {
  std::vector<double> env;
  env.reserve(curve.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : curve) {
    best = std::min(best, p.best_value);
    env.push_back(best);
  }
  return env;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

ReducingReport find_reducing_subspace(const std::vector<Operator>& ops, std::size_t max_rank,
                                      double tol, const std::vector<BasisIndex>& ambient,
                                      Budget budget, std::uint64_t seed) {
  if (ops.empty()) throw ValidationError("find_reducing_subspace: empty operator list");
  if (max_rank == 0) throw ValidationError("find_reducing_subspace: max_rank must be >= 1");
  std::vector<BasisIndex> amb = ambient;
  canonicalize(amb);

  // Stage 1: connected components of the interaction graph restricted to
  // the window.  A component with no nonzero entry leaving the window spans
  // an exactly reducing coordinate subspace.
  std::unordered_map<BasisIndex, std::size_t, BasisIndexHash> pos;
  for (std::size_t t = 0; t < amb.size(); ++t) pos[amb[t]] = t;
  UnionFind uf(amb.size());
  std::vector<char> escapes(amb.size(), 0);
  std::vector<BasisIndex> support;
  for (const auto& op : ops) {
    for (std::size_t t = 0; t < amb.size(); ++t) {
      const BasisIndex& b = amb[t];
      if (!op.in_domain(b))
        throw ValidationError("find_reducing_subspace: ambient index " + b.str() +
                              " is outside the operator domain");
      support.clear();
      op.column_support(b, support);
      for (const auto& i : support) {
        if (op.entry(i, b) == cplx(0.0, 0.0)) continue;
        const auto it = pos.find(i);
        if (it == pos.end())
          escapes[t] = 1;
        else
          uf.unite(t, it->second);
      }
      support.clear();
      op.row_support(b, support);
      for (const auto& j : support) {
        if (op.entry(b, j) == cplx(0.0, 0.0)) continue;
        const auto it = pos.find(j);
        if (it == pos.end())
          escapes[t] = 1;
        else
          uf.unite(t, it->second);
      }
    }
  }
  std::unordered_map<std::size_t, std::vector<std::size_t>> comps;
  for (std::size_t t = 0; t < amb.size(); ++t) comps[uf.find(t)].push_back(t);
  std::vector<std::vector<std::size_t>> closed;
  for (auto& [root, members] : comps) {
    bool esc = false;
    for (std::size_t m : members) esc = esc || escapes[m];
    if (!esc && members.size() <= max_rank) closed.push_back(std::move(members));
  }
  std::sort(closed.begin(), closed.end(), [&](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return amb[a.front()] < amb[b.front()];
  });
  for (const auto& members : closed) {
    std::vector<BasisIndex> idx;
    for (std::size_t m : members) idx.push_back(amb[m]);
    const Projection p = Projection::coordinate(std::move(idx));
    double worst = 0.0;
    for (const auto& op : ops) worst = std::max(worst, hs_defect(op, p).value);
    if (worst < tol) return {true, p.rank(), worst, "component", p};
  }

  // Stage 2: optimizer per rank.
  ReducingReport best;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::size_t rank = 1; rank <= std::min(max_rank, amb.size() / 4); ++rank) {
    const ProbeResult pr = minimize_defect(ops, rank, amb, budget, seed);
    if (pr.best_value < best.residual) {
      best.residual = pr.best_value;
      best.rank = rank;
      best.projection = pr.best;
      best.method = "frame";
    }
    if (pr.best_value < tol) {
      best.found = true;
      return best;
    }
  }
  return best;
}

const char* cell_name(Cell c) {
  switch (c) {
    case Cell::W0plus:
      return "W0plus";
    case Cell::W0minus:
      return "W0minus";
    case Cell::W1plus:
      return "W1plus";
    case Cell::S:
      return "S";
    case Cell::Undetermined:
      return "undetermined";
  }
  return "undetermined";
}

ClassificationReport classify(const std::vector<Operator>& ops, const ClassifyParams& params) {
  if (ops.empty()) throw ValidationError("classify: empty operator list");
  const std::vector<BasisIndex> ambient = ops.front().canonical_window(params.ambient_size);
  if (ambient.empty()) throw ValidationError("classify: empty ambient window");

  ClassificationReport rep;
  // The reducing hunt only needs to detect near-zero residuals, not polish
  // them, so it runs on a trimmed budget.
  const Budget hunt{std::min(params.budget.restarts, 2), std::min(params.budget.iters, 30)};
  rep.reducing = find_reducing_subspace(ops, params.max_rank, params.reducing_tol, ambient, hunt,
                                        params.seed);

  // Curve window: complement of a coordinate reducing block, else the full
  // window (frame blocks are reported but not complemented).
  std::vector<BasisIndex> curve_amb = ambient;
  bool complemented = false;
  if (rep.reducing.found && rep.reducing.projection.kind() == Projection::Kind::Coordinate) {
    std::vector<BasisIndex> rest;
    for (const auto& b : ambient)
      if (!rep.reducing.projection.contains(b)) rest.push_back(b);
    if (!rest.empty()) {
      curve_amb = std::move(rest);
      complemented = true;
    }
  }

  std::vector<std::size_t> ranks;
  for (std::size_t r = 1; 4 * r <= curve_amb.size() && r <= 32; r *= 2) ranks.push_back(r);
  if (ranks.empty()) {
    rep.cell = Cell::Undetermined;
    rep.evidence = "curve window too small for any probe rank";
    return rep;
  }
  const std::vector<ProbeResult> curve =
      epsilon_curve(ops, ranks, curve_amb, params.budget, params.seed);
  double scale = 0.0;
  for (const auto& p : curve) scale = std::max(scale, p.seed_value);
  rep.scale = scale;
  const std::vector<double> env = lower_envelope(curve);
  for (std::size_t t = 0; t < curve.size(); ++t) rep.curve.push_back({curve[t].rank, env[t]});

  // Two complementary signals.  Decay is witnessed either by the optimizer
  // envelope genuinely reaching a small fraction of the scale, or by the
  // exact coordinate seed values trending down in the log-log sense (those
  // are deterministic values of honest projections, immune to optimizer
  // under-convergence).  A floor needs the envelope itself to stay a large
  // fraction of the scale.  Everything else is mixed evidence.
  enum class Trend { Decays, Floor, Gray } trend = Trend::Gray;
  std::ostringstream ev;
  if (scale <= 0.0) {
    trend = Trend::Decays;
    ev << "all optimizer values vanish; ";
  } else {
    const double ratio = env.back() / scale;
    double seed_min = std::numeric_limits<double>::infinity();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t t = 0; t < curve.size(); ++t) {
      seed_min = std::min(seed_min, curve[t].seed_value);
      if (seed_min <= 0.0) continue;
      const double x = std::log(static_cast<double>(curve[t].rank));
      const double y = std::log(seed_min);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
    const double denom = cnt * sxx - sx * sx;
    const double seed_slope = std::abs(denom) > 1e-12 ? (cnt * sxy - sx * sy) / denom : 0.0;
    if (ratio <= 0.15 || seed_slope <= -0.2)
      trend = Trend::Decays;
    else if (ratio >= 0.4)
      trend = Trend::Floor;
    ev << "envelope " << env.back() << " vs scale " << scale << ", seed slope " << seed_slope
       << "; ";
  }

  if (rep.reducing.found) {
    ev << "reducing block of rank " << rep.reducing.rank << " (" << rep.reducing.method << ")";
    if (!complemented) ev << ", complement not separated";
    ev << "; ";
    if (trend == Trend::Decays)
      rep.cell = Cell::W0plus;
    else if (trend == Trend::Floor)
      rep.cell = Cell::W0minus;
  } else {
    ev << "no reducing block up to rank " << params.max_rank << " (best residual "
       << rep.reducing.residual << " at rank " << rep.reducing.rank << "); ";
    if (trend == Trend::Decays)
      rep.cell = Cell::W1plus;
    else if (trend == Trend::Floor)
      rep.cell = Cell::S;
  }
  rep.evidence = ev.str();
  return rep;
}

}  // namespace foelner
