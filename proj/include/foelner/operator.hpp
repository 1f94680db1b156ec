#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "foelner/basis.hpp"
#include "foelner/operator_spec.hpp"

namespace foelner {

namespace detail {
class OpImpl;
}

// Hard cap on materialized window sizes; larger requests raise ResourceError.
inline constexpr std::size_t kMaxDenseWindow = 4096;

struct DenseWindow {
  std::vector<BasisIndex> window;  // canonical order
  Eigen::MatrixXcd matrix;         // compression of the operator to the window
};

// Immutable handle over a structured operator.  Entry access, support
// queries and the norm bound are exact for every variant; supports may
// include positions whose entry is zero but never miss a nonzero one.
class Operator {
public:
  Operator() = default;

  const IndexSort& sort() const;
  cplx entry(const BasisIndex& i, const BasisIndex& j) const;
  // Certified upper bound for the operator norm.
  double norm_bound() const;
  bool in_domain(const BasisIndex& b) const;

  // Appends the candidate row indices of column j (respectively column
  // indices of row i), restricted to the domain, in canonical order.
  void column_support(const BasisIndex& j, std::vector<BasisIndex>& out) const;
  void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const;

  // First `size` domain indices in the canonical enumeration for the sort.
  std::vector<BasisIndex> canonical_window(std::size_t size) const;
  // Coordinate window adapted to the sort so its rank is >= `rank` while
  // staying shaped (interval, box, word ball); the actual rank may exceed
  // the request.  Returns the indices plus a short shape descriptor.
  std::pair<std::vector<BasisIndex>, std::string> canonical_interval(std::size_t rank) const;

  // Number of domain points if finite, 0 otherwise.
  std::size_t finite_dimension() const;

  const OperatorSpec& spec() const;

  bool valid() const { return impl_ != nullptr; }

private:
  friend Operator build_operator(const SpecPtr&);
  explicit Operator(std::shared_ptr<const detail::OpImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const detail::OpImpl> impl_;
};

Operator build_operator(const SpecPtr& spec);

// Compression P_W T P_W as a concrete matrix.  Throws ResourceError if the
// window exceeds `max_size` and ValidationError if any index is outside the
// operator's domain.
DenseWindow truncate(const Operator& op, std::span<const BasisIndex> window,
                     std::size_t max_size = kMaxDenseWindow);

}  // namespace foelner
