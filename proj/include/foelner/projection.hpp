#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <unordered_set>
#include <vector>

#include "foelner/basis.hpp"

namespace foelner {

// Finite-rank orthogonal projection.  Two storage forms:
//  - Coordinate: a set of basis indices (diagonal 0/1 projection).
//  - Frame: an orthonormal family of columns over an explicit window of
//    indices; the projection is V V*.
// Coordinate projections stay symbolic; nothing is materialized until a
// frame computation genuinely needs a matrix.
class Projection {
public:
  enum class Kind { Coordinate, Frame };

  static Projection coordinate(std::vector<BasisIndex> indices);
  // `columns` is window.size() x rank with orthonormal columns
  // (V* V = I within `ortho_tol`).
  static Projection frame(std::vector<BasisIndex> window, Eigen::MatrixXcd columns,
                          double ortho_tol = 1e-10);

  Kind kind() const { return kind_; }
  std::size_t rank() const { return rank_; }
  double hs_norm() const;  // sqrt(rank)

  // Coordinate access.
  const std::vector<BasisIndex>& indices() const;
  bool contains(const BasisIndex& b) const;

  // Frame access (a coordinate projection can also be viewed as a frame).
  const std::vector<BasisIndex>& window() const;
  const Eigen::MatrixXcd& columns() const;
  Projection as_frame() const;

  // Set when a join had singular values too close to the rank cutoff for
  // the reported rank to be trusted.
  bool rank_ambiguous() const { return rank_ambiguous_; }

private:
  friend Projection join_all(const std::vector<Projection>&, double);
  Projection() = default;
  Kind kind_ = Kind::Coordinate;
  std::size_t rank_ = 0;
  bool rank_ambiguous_ = false;
  std::vector<BasisIndex> indices_;  // doubles as the frame window
  std::unordered_set<BasisIndex, BasisIndexHash> member_;
  Eigen::MatrixXcd columns_;
};

// Smallest projection dominating both arguments.  Coordinate joins stay
// coordinate (set union, exact); any frame argument routes through an SVD of
// the stacked columns with singular value cutoff `tol`.
Projection join(const Projection& p, const Projection& q, double tol = 1e-10);
Projection join_all(const std::vector<Projection>& ps, double tol = 1e-10);

// JSON interchange.  Accepted documents:
//   {"type":"coordinate","indices":[[...],...]}      raw basis codes
//   {"type":"frame","window":[[...],...],"columns":[[...],...]}
//   {"type":"interval","from":a,"to":b}              inclusive, linear sorts
//   {"type":"box","n":m}                             pair sort, [0,m) x [0,m)
// interval and box need `sort` to resolve concrete indices; the writer only
// ever emits the first two forms.
std::string projection_to_json_text(const Projection& p);
Projection projection_from_json_text(const std::string& text, const IndexSort* sort = nullptr);
// Same parser on an already-parsed nlohmann object (avoids re-serializing).
Projection projection_from_json_ptr(const void* json_object, const IndexSort* sort = nullptr);

// Operator norm of P Q (largest singular value of V_P* V_Q).
double overlap_norm(const Projection& p, const Projection& q);

// Hilbert-Schmidt distance ||P - Q||_2.
double hs_distance(const Projection& p, const Projection& q);

}  // namespace foelner
