#include "foelner/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "foelner/defect.hpp"
#include "foelner/errors.hpp"
#include "foelner/projection.hpp"
#include "foelner/rng.hpp"

namespace foelner {

namespace {

Eigen::MatrixXcd gaussian_matrix(SplitMix64& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = cplx(rng.gaussian(), rng.gaussian());
  return m;
}

Eigen::MatrixXcd thin_q(const Eigen::MatrixXcd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), m.cols());
}

double operator_norm(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

// phi on explicit matrices: ||MP - PM||_F / sqrt(rank).
double dense_defect(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& proj, std::size_t rank) {
  return (m * proj - proj * m).norm() / std::sqrt(static_cast<double>(rank));
}

}  // namespace

std::string suite_report_json(const SuiteReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"suite\":\"%s\",\"trials\":%d,\"violations\":%d,"
                "\"worst_margin\":%.17g,\"seed\":%llu}",
                r.suite.c_str(), r.trials, r.violations, r.worst_margin,
                static_cast<unsigned long long>(r.seed));
  return buf;
}

SuiteReport check_perturbation_bound(int trials, int dim, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("perturbation suite needs at least one trial");
  if (dim < 4) throw ValidationError("perturbation suite needs dim >= 4");
  const Eigen::Index n = dim;
  const std::uint64_t rank_span = static_cast<std::uint64_t>(n / 2);
  SuiteReport rep{"perturbation", trials, 0, std::numeric_limits<double>::infinity(), seed};
  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng = SplitMix64::stream(seed, static_cast<std::uint64_t>(t));
    Eigen::MatrixXcd l = gaussian_matrix(rng, n, n);
    l /= operator_norm(l);

    const auto rp = static_cast<Eigen::Index>(1 + rng.below(rank_span));
    const Eigen::MatrixXcd vp = thin_q(gaussian_matrix(rng, n, rp));
    Eigen::Index rq = rp;
    Eigen::MatrixXcd vq;
    if (rng.below(10) < 7) {
      // Nearby frame: same rank, perturbation spanning eight decades.
      const double eps = std::pow(10.0, -4.0 * rng.uniform());
      vq = thin_q(vp + eps * gaussian_matrix(rng, n, rp));
    } else {
      rq = static_cast<Eigen::Index>(1 + rng.below(rank_span));
      vq = thin_q(gaussian_matrix(rng, n, rq));
    }

    const Eigen::MatrixXcd p = vp * vp.adjoint();
    const Eigen::MatrixXcd q = vq * vq.adjoint();
    const double phi_p = dense_defect(l, p, static_cast<std::size_t>(rp));
    const double phi_q = dense_defect(l, q, static_cast<std::size_t>(rq));
    const double dist = (p - q).norm();
    const double denom = std::sqrt(static_cast<double>(std::max(rp, rq)));
    const double bound = 4.0 * dist / denom;
    const double margin = bound - std::abs(phi_p - phi_q);
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -1e-9) ++rep.violations;
  }
  return rep;
}

SuiteReport check_sum_projections(int trials, int dim, int s, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("sum-projections suite needs at least one trial");
  if (s < 2) throw ValidationError("sum-projections suite needs s >= 2");
  if (dim < 4 * s) throw ValidationError("sum-projections suite needs dim >= 4 s");
  const Eigen::Index n = dim;
  const std::uint64_t rank_span = std::min<std::uint64_t>(5, static_cast<std::uint64_t>(dim / (2 * s)));
  SuiteReport rep{"sum_projections", 0, 0, std::numeric_limits<double>::infinity(), seed};
  std::uint64_t candidate = 0;
  const std::uint64_t candidate_cap = static_cast<std::uint64_t>(trials) * 50;
  while (rep.trials < trials && candidate < candidate_cap) {
    SplitMix64 rng = SplitMix64::stream(seed, candidate++);
    const double delta = 1.0 / (3.0 * s * s * s);

    std::vector<Eigen::Index> ranks(s);
    Eigen::Index total = 0;
    for (auto& r : ranks) {
      r = static_cast<Eigen::Index>(1 + rng.below(rank_span));
      total += r;
    }
    const Eigen::MatrixXcd base = thin_q(gaussian_matrix(rng, n, total));

    // Shrink the perturbation until every pairwise overlap is admissible.
    std::vector<Eigen::MatrixXcd> noise;
    noise.reserve(ranks.size());
    for (const auto& r : ranks)
      noise.push_back(gaussian_matrix(rng, n, r) / std::sqrt(static_cast<double>(n)));
    double eta = 0.25;
    bool admissible = false;
    std::vector<Eigen::MatrixXcd> frames(ranks.size());
    for (int attempt = 0; attempt < 12 && !admissible; ++attempt, eta *= 0.5) {
      Eigen::Index off = 0;
      for (std::size_t j = 0; j < ranks.size(); ++j) {
        frames[j] = thin_q(base.middleCols(off, ranks[j]) + eta * noise[j]);
        off += ranks[j];
      }
      admissible = true;
      for (std::size_t i = 0; i + 1 < frames.size() && admissible; ++i)
        for (std::size_t j = i + 1; j < frames.size() && admissible; ++j)
          admissible = operator_norm(frames[i].adjoint() * frames[j]) <= delta;
    }
    if (!admissible) continue;  // rejected candidate, not a trial

    ++rep.trials;
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& v : frames) sum.noalias() += v * v.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sum);
    Eigen::Index positive = 0;
    double min_positive = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
      const double ev = eig.eigenvalues()(k);
      if (ev > 1e-6) {
        ++positive;
        min_positive = std::min(min_positive, ev);
      }
    }
    double margin = min_positive - 0.5;
    if (positive != total) margin = -1.0;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -1e-9) ++rep.violations;
  }
  return rep;
}

SuiteReport check_tensor_bound(int trials, int dim_a, int dim_b, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("tensor suite needs at least one trial");
  if (dim_a < 2 || dim_b < 2) throw ValidationError("tensor suite needs dims >= 2");
  const Eigen::Index na = dim_a;
  const Eigen::Index nb = dim_b;
  SuiteReport rep{"tensor", trials, 0, std::numeric_limits<double>::infinity(), seed};
  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng = SplitMix64::stream(seed, static_cast<std::uint64_t>(t));
    const Eigen::MatrixXcd a = gaussian_matrix(rng, na, na);
    const Eigen::MatrixXcd b = gaussian_matrix(rng, nb, nb);
    const auto rp = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(na / 2)));
    const auto rq = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(nb / 2)));
    const Eigen::MatrixXcd vp = thin_q(gaussian_matrix(rng, na, rp));
    const Eigen::MatrixXcd vq = thin_q(gaussian_matrix(rng, nb, rq));
    const Eigen::MatrixXcd p = vp * vp.adjoint();
    const Eigen::MatrixXcd q = vq * vq.adjoint();

    Eigen::MatrixXcd big_op(na * nb, na * nb), big_proj(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
      for (Eigen::Index j = 0; j < na; ++j) {
        big_op.block(i * nb, j * nb, nb, nb) = a(i, j) * b;
        big_proj.block(i * nb, j * nb, nb, nb) = p(i, j) * q;
      }
    const double lhs = dense_defect(big_op, big_proj, static_cast<std::size_t>(rp * rq));
    const double rhs = dense_defect(a, p, static_cast<std::size_t>(rp)) * operator_norm(b) +
                       operator_norm(a) * dense_defect(b, q, static_cast<std::size_t>(rq));
    const double margin = rhs - lhs;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -1e-9) ++rep.violations;
  }
  return rep;
}

TraceHsReport check_trace_hs_equivalence(const Operator& op,
                                         const std::vector<std::size_t>& ranks) {
  if (ranks.empty()) throw ValidationError("trace-hs suite needs at least one rank");
  TraceHsReport out;
  out.report.suite = "trace_hs";
  out.report.trials = static_cast<int>(ranks.size());
  for (std::size_t rank : ranks) {
    const auto [indices, descriptor] = op.canonical_interval(rank);
    (void)descriptor;
    const Projection p = Projection::coordinate(indices);
    TraceHsRow row;
    row.rank = p.rank();
    row.hs = hs_defect(op, p).value;
    row.trace = trace_defect(op, p).value;
    out.rows.push_back(row);
  }
  const TraceHsRow& last = out.rows.back();
  double margin = 1.0;
  if (last.hs < 0.01) margin = std::min(margin, 0.05 - last.trace);
  if (last.trace < 0.01) margin = std::min(margin, 0.05 - last.hs);
  out.report.worst_margin = margin;
  if (margin < 0.0) out.report.violations = 1;
  return out;
}

std::vector<std::complex<double>> numerical_range(const Eigen::MatrixXcd& m, int angles) {
  if (m.rows() != m.cols()) throw ValidationError("numerical_range needs a square matrix");
  if (angles < 1) throw ValidationError("numerical_range needs at least one angle");
  std::vector<std::complex<double>> pts;
  pts.reserve(angles);
  for (int k = 0; k < angles; ++k) {
    const double theta = 2.0 * M_PI * k / angles;
    const Eigen::MatrixXcd rot = std::polar(1.0, theta) * m;
    const Eigen::MatrixXcd herm = 0.5 * (rot + rot.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(herm);
    const Eigen::Index top = herm.rows() - 1;  // eigenvalues ascend
    const Eigen::VectorXcd v = eig.eigenvectors().col(top);
    pts.push_back((v.adjoint() * m * v)(0, 0));
  }
  return pts;
}

double commutator_range_distance(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& x,
                                 int angles) {
  if (m.rows() != m.cols() || x.rows() != x.cols() || m.rows() != x.rows())
    throw ValidationError("commutator_range_distance needs square matrices of equal size");
  if (angles < 1) throw ValidationError("commutator_range_distance needs at least one angle");
  const Eigen::MatrixXcd c = m * x - x * m;
  // Support function sampling: the range lies in every halfplane
  // { Re(e^{-i theta} z) <= h(theta) }, so a negative support value bounds
  // the distance from the origin from below.
  double best = 0.0;
  for (int k = 0; k < angles; ++k) {
    const double theta = 2.0 * M_PI * k / angles;
    const Eigen::MatrixXcd rot = std::polar(1.0, -theta) * c;
    const Eigen::MatrixXcd herm = 0.5 * (rot + rot.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(herm, Eigen::EigenvaluesOnly);
    const double support = eig.eigenvalues()(herm.rows() - 1);
    best = std::max(best, -support);
  }
  return best;
}

}  // namespace foelner
