#include "foelner/defect.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "foelner/errors.hpp"

namespace foelner {

namespace {

// Relative floor below which a singular value of the boundary block counts
// as numerically zero in the trace norm.
constexpr double kSingularFloor = 1e-12;

struct BoundaryEntry {
  BasisIndex outside;
  BasisIndex inside;
  cplx value;
};

// Nonzero entries of (1-P) T P for a coordinate P: column j inside, row i
// outside.  `flip` = true instead walks P T (1-P) via row supports.
void collect_boundary(const Operator& op, const Projection& p, bool flip,
                      std::vector<BoundaryEntry>& out,
                      std::unordered_set<BasisIndex, BasisIndexHash>& touched) {
  std::vector<BasisIndex> support;
  for (const auto& inside : p.indices()) {
    support.clear();
    if (flip)
      op.row_support(inside, support);
    else
      op.column_support(inside, support);
    for (const auto& other : support) {
      touched.insert(other);
      if (p.contains(other)) continue;
      const cplx v = flip ? op.entry(inside, other) : op.entry(other, inside);
      if (v != cplx(0.0, 0.0)) out.push_back({other, inside, v});
    }
  }
}

double singular_value_mass(const std::vector<BoundaryEntry>& entries, NormKind kind) {
  if (entries.empty()) return 0.0;
  // Compress onto the distinct indices actually present.
  std::vector<BasisIndex> rows, cols;
  for (const auto& e : entries) {
    rows.push_back(e.outside);
    cols.push_back(e.inside);
  }
  canonicalize(rows);
  canonicalize(cols);
  std::unordered_map<BasisIndex, Eigen::Index, BasisIndexHash> rpos, cpos;
  for (std::size_t t = 0; t < rows.size(); ++t) rpos[rows[t]] = static_cast<Eigen::Index>(t);
  for (std::size_t t = 0; t < cols.size(); ++t) cpos[cols[t]] = static_cast<Eigen::Index>(t);
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()),
                                                  static_cast<Eigen::Index>(cols.size()));
  for (const auto& e : entries) block(rpos[e.outside], cpos[e.inside]) = e.value;

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0.0;
  if (kind == NormKind::op) return sv(0);
  double total = 0.0;
  const double floor = kSingularFloor * sv(0);
  for (Eigen::Index t = sv.size(); t-- > 0;)
    if (sv(t) > floor) total += sv(t);
  return total;
}

DefectReport coordinate_defect(const Operator& op, const Projection& p, NormKind kind) {
  std::vector<BoundaryEntry> lower, upper;
  std::unordered_set<BasisIndex, BasisIndexHash> touched;
  collect_boundary(op, p, false, lower, touched);
  collect_boundary(op, p, true, upper, touched);

  DefectReport rep;
  rep.norm_kind = kind;
  rep.rank = p.rank();
  std::size_t outside_touched = 0;
  for (const auto& b : touched)
    if (!p.contains(b)) ++outside_touched;
  rep.ambient_size = p.rank() + outside_touched;

  switch (kind) {
    case NormKind::hs: {
      // ||[T,P]||_2^2 splits exactly into the two boundary blocks; summation
      // order is fixed by the canonical index order of the walk.
      double s = 0.0;
      for (const auto& e : lower) s += std::norm(e.value);
      for (const auto& e : upper) s += std::norm(e.value);
      rep.value = std::sqrt(s) / p.hs_norm();
      break;
    }
    case NormKind::trace:
      rep.value = (singular_value_mass(lower, NormKind::trace) +
                   singular_value_mass(upper, NormKind::trace)) /
                  static_cast<double>(p.rank());
      break;
    case NormKind::op:
      rep.value = std::max(singular_value_mass(lower, NormKind::op),
                           singular_value_mass(upper, NormKind::op));
      break;
  }
  return rep;
}

// The commutator of T with a frame projection splits into two blocks,
//   [T,P] = (1-P) T P - P T (1-P),
// whose row and column spaces are mutually orthogonal, so its singular
// values are the union of the blocks' singular values and its squared
// Hilbert-Schmidt norm is the sum of theirs.  Both blocks are thin
// (rank(P) columns or rows), which keeps the SVDs cheap.
DefectReport frame_defect(const Operator& op, const Projection& p, NormKind kind) {
  const Projection f = p.as_frame();
  const std::vector<BasisIndex>& base = f.window();

  // Close the window under one application of T and T*.
  std::vector<BasisIndex> window = base;
  for (const auto& b : base) {
    op.column_support(b, window);
    op.row_support(b, window);
  }
  canonicalize(window);
  if (window.size() > kMaxDenseWindow)
    throw ResourceError("frame defect window of size " + std::to_string(window.size()) +
                        " exceeds the dense cap " + std::to_string(kMaxDenseWindow));

  std::unordered_map<BasisIndex, Eigen::Index, BasisIndexHash> pos;
  for (std::size_t t = 0; t < window.size(); ++t) pos[window[t]] = static_cast<Eigen::Index>(t);
  const auto nw = static_cast<Eigen::Index>(window.size());
  const auto r = static_cast<Eigen::Index>(f.rank());

  // Frame columns padded onto the closed window.
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(nw, r);
  std::vector<Eigen::Index> base_pos(base.size());
  for (std::size_t t = 0; t < base.size(); ++t) {
    base_pos[t] = pos.at(base[t]);
    v.row(base_pos[t]) = f.columns().row(static_cast<Eigen::Index>(t));
  }

  // tp = T v and w = v^* T, using only the entries that can be nonzero.
  Eigen::MatrixXcd tp = Eigen::MatrixXcd::Zero(nw, r);
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(r, nw);
  std::vector<BasisIndex> support;
  for (std::size_t t = 0; t < base.size(); ++t) {
    const BasisIndex& b = base[t];
    support.clear();
    op.column_support(b, support);
    for (const auto& i : support) {
      const cplx val = op.entry(i, b);
      if (val != cplx(0.0, 0.0)) tp.row(pos.at(i)) += val * v.row(base_pos[t]);
    }
    support.clear();
    op.row_support(b, support);
    for (const auto& j : support) {
      const cplx val = op.entry(b, j);
      if (val != cplx(0.0, 0.0)) w.col(pos.at(j)) += val * v.row(base_pos[t]).adjoint();
    }
  }

  const Eigen::MatrixXcd x = tp - v * (v.adjoint() * tp);  // (1-P) T P frame
  const Eigen::MatrixXcd z = w - (w * v) * v.adjoint();    // P T (1-P) rows

  DefectReport rep;
  rep.norm_kind = kind;
  rep.rank = f.rank();
  rep.ambient_size = window.size();
  switch (kind) {
    case NormKind::hs:
      rep.value = std::sqrt(x.squaredNorm() + z.squaredNorm()) / p.hs_norm();
      break;
    case NormKind::trace:
    case NormKind::op: {
      Eigen::JacobiSVD<Eigen::MatrixXcd> sx(x);
      Eigen::JacobiSVD<Eigen::MatrixXcd> sz(z);
      const auto& vx = sx.singularValues();
      const auto& vz = sz.singularValues();
      const double top = std::max(vx.size() ? vx(0) : 0.0, vz.size() ? vz(0) : 0.0);
      if (kind == NormKind::op) {
        rep.value = top;
      } else {
        double total = 0.0;
        const double floor = kSingularFloor * top;
        for (Eigen::Index t = 0; t < vx.size(); ++t)
          if (vx(t) > floor) total += vx(t);
        for (Eigen::Index t = 0; t < vz.size(); ++t)
          if (vz(t) > floor) total += vz(t);
        rep.value = total / static_cast<double>(f.rank());
      }
      break;
    }
  }
  return rep;
}

void check_domain(const Operator& op, const Projection& p) {
  const auto& idx = p.kind() == Projection::Kind::Coordinate ? p.indices() : p.window();
  for (const auto& b : idx)
    if (!op.in_domain(b))
      throw ValidationError("defect: projection index " + b.str() +
                            " is outside the operator domain (sort " + op.sort().str() + ")");
}

}  // namespace

DefectReport defect(const Operator& op, const Projection& p, NormKind kind) {
  check_domain(op, p);
  if (p.kind() == Projection::Kind::Coordinate) return coordinate_defect(op, p, kind);
  return frame_defect(op, p, kind);
}

DefectReport hs_defect(const Operator& op, const Projection& p) {
  return defect(op, p, NormKind::hs);
}

DefectReport trace_defect(const Operator& op, const Projection& p) {
  return defect(op, p, NormKind::trace);
}

DefectReport opnorm_defect(const Operator& op, const Projection& p) {
  return defect(op, p, NormKind::op);
}

std::vector<DefectReport> defect_batch(const Operator& op, std::span<const Projection> ps,
                                       NormKind kind) {
  std::vector<DefectReport> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(defect(op, p, kind));
  return out;
}

double operator_perturbation_bound(double op_distance) { return 2.0 * op_distance; }

}  // namespace foelner
