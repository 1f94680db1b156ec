#include "foelner/projection.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "foelner/errors.hpp"
#include "json.hpp"

namespace foelner {

namespace {

// Positions of `sub` inside the canonical `all` (both sorted ascending).
std::vector<Eigen::Index> positions_in(const std::vector<BasisIndex>& all,
                                       const std::vector<BasisIndex>& sub) {
  std::vector<Eigen::Index> pos;
  pos.reserve(sub.size());
  std::size_t t = 0;
  for (const auto& b : sub) {
    while (t < all.size() && all[t] < b) ++t;
    pos.push_back(static_cast<Eigen::Index>(t));
  }
  return pos;
}

// Columns of `p` re-rowed onto the window `target` (sorted superset).
Eigen::MatrixXcd embed_columns(const Projection& p, const std::vector<BasisIndex>& target) {
  const Projection f = p.as_frame();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(target.size()),
                                                static_cast<Eigen::Index>(f.rank()));
  const auto pos = positions_in(target, f.window());
  for (std::size_t r = 0; r < f.window().size(); ++r)
    out.row(pos[r]) = f.columns().row(static_cast<Eigen::Index>(r));
  return out;
}

std::vector<BasisIndex> union_windows(const std::vector<const Projection*>& ps) {
  std::vector<BasisIndex> w;
  for (const auto* p : ps) {
    const auto& src = p->kind() == Projection::Kind::Coordinate ? p->indices() : p->window();
    w.insert(w.end(), src.begin(), src.end());
  }
  canonicalize(w);
  return w;
}

}  // namespace

Projection Projection::coordinate(std::vector<BasisIndex> indices) {
  if (indices.empty()) throw ValidationError("projection: empty index set (rank 0)");
  canonicalize(indices);
  if (!indices.empty()) {
    const IndexKind k = indices.front().kind();
    for (const auto& b : indices)
      if (b.kind() != k)
        throw ValidationError("projection: mixed index kinds (" + indices.front().str() +
                              " vs " + b.str() + ")");
  }
  Projection p;
  p.kind_ = Kind::Coordinate;
  p.indices_ = std::move(indices);
  p.rank_ = p.indices_.size();
  p.member_.insert(p.indices_.begin(), p.indices_.end());
  return p;
}

Projection Projection::frame(std::vector<BasisIndex> window, Eigen::MatrixXcd columns,
                             double ortho_tol) {
  if (window.empty()) throw ValidationError("projection: empty frame window");
  std::vector<BasisIndex> sorted = window;
  canonicalize(sorted);
  if (sorted.size() != window.size())
    throw ValidationError("projection: frame window has repeated indices");
  if (columns.rows() != static_cast<Eigen::Index>(window.size()))
    throw ValidationError("projection: frame has " + std::to_string(columns.rows()) +
                          " rows for a window of size " + std::to_string(window.size()));
  if (columns.cols() < 1) throw ValidationError("projection: frame has no columns (rank 0)");
  if (!columns.allFinite()) throw ValidationError("projection: frame has non-finite entries");
  const Eigen::MatrixXcd gram = columns.adjoint() * columns;
  const double dev = (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).norm();
  if (dev > ortho_tol * std::sqrt(static_cast<double>(gram.rows())) + ortho_tol)
    throw ValidationError("projection: frame columns are not orthonormal (deviation " +
                          std::to_string(dev) + ")");

  // Rows must follow the canonical window order so later alignment is cheap.
  if (sorted != window) {
    Eigen::MatrixXcd reordered(columns.rows(), columns.cols());
    for (std::size_t r = 0; r < window.size(); ++r) {
      const auto it = std::lower_bound(sorted.begin(), sorted.end(), window[r]);
      reordered.row(static_cast<Eigen::Index>(it - sorted.begin())) =
          columns.row(static_cast<Eigen::Index>(r));
    }
    columns = std::move(reordered);
  }
  Projection p;
  p.kind_ = Kind::Frame;
  p.indices_ = std::move(sorted);
  p.columns_ = std::move(columns);
  p.rank_ = static_cast<std::size_t>(p.columns_.cols());
  return p;
}

double Projection::hs_norm() const { return std::sqrt(static_cast<double>(rank_)); }

const std::vector<BasisIndex>& Projection::indices() const {
  if (kind_ != Kind::Coordinate)
    throw ValidationError("projection: indices() on a frame projection");
  return indices_;
}

bool Projection::contains(const BasisIndex& b) const {
  if (kind_ != Kind::Coordinate)
    throw ValidationError("projection: contains() on a frame projection");
  return member_.count(b) > 0;
}

const std::vector<BasisIndex>& Projection::window() const { return indices_; }

const Eigen::MatrixXcd& Projection::columns() const {
  if (kind_ != Kind::Frame) throw ValidationError("projection: columns() on a coordinate projection");
  return columns_;
}

Projection Projection::as_frame() const {
  if (kind_ == Kind::Frame) return *this;
  const auto n = static_cast<Eigen::Index>(indices_.size());
  Projection p;
  p.kind_ = Kind::Frame;
  p.indices_ = indices_;
  p.columns_ = Eigen::MatrixXcd::Identity(n, n);
  p.rank_ = rank_;
  p.rank_ambiguous_ = rank_ambiguous_;
  return p;
}

Projection join(const Projection& p, const Projection& q, double tol) {
  return join_all({p, q}, tol);
}

Projection join_all(const std::vector<Projection>& ps, double tol) {
  if (ps.empty()) throw ValidationError("join: empty family");
  if (ps.size() == 1) return ps.front();

  const bool all_coordinate =
      std::all_of(ps.begin(), ps.end(),
                  [](const Projection& p) { return p.kind() == Projection::Kind::Coordinate; });
  if (all_coordinate) {
    std::vector<BasisIndex> u;
    for (const auto& p : ps) u.insert(u.end(), p.indices().begin(), p.indices().end());
    return Projection::coordinate(std::move(u));
  }

  std::vector<const Projection*> ptrs;
  for (const auto& p : ps) ptrs.push_back(&p);
  const std::vector<BasisIndex> w = union_windows(ptrs);

  Eigen::Index total = 0;
  for (const auto& p : ps) total += static_cast<Eigen::Index>(p.rank());
  Eigen::MatrixXcd stacked(static_cast<Eigen::Index>(w.size()), total);
  Eigen::Index at = 0;
  for (const auto& p : ps) {
    stacked.middleCols(at, static_cast<Eigen::Index>(p.rank())) = embed_columns(p, w);
    at += static_cast<Eigen::Index>(p.rank());
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  bool ambiguous = false;
  for (Eigen::Index t = 0; t < sv.size(); ++t) {
    if (sv(t) > tol) ++rank;
    if (std::abs(sv(t) - tol) < tol) ambiguous = true;
  }
  if (rank == 0) throw ValidationError("join: numerically zero result");

  Projection out = Projection::frame(w, svd.matrixU().leftCols(rank), 1e-8);
  out.rank_ambiguous_ = ambiguous;
  return out;
}

double overlap_norm(const Projection& p, const Projection& q) {
  if (p.kind() == Projection::Kind::Coordinate && q.kind() == Projection::Kind::Coordinate) {
    for (const auto& b : p.indices())
      if (q.contains(b)) return 1.0;
    return 0.0;
  }
  std::vector<const Projection*> ptrs{&p, &q};
  const std::vector<BasisIndex> w = union_windows(ptrs);
  const Eigen::MatrixXcd vp = embed_columns(p, w);
  const Eigen::MatrixXcd vq = embed_columns(q, w);
  const Eigen::MatrixXcd m = vp.adjoint() * vq;
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double hs_distance(const Projection& p, const Projection& q) {
  if (p.kind() == Projection::Kind::Coordinate && q.kind() == Projection::Kind::Coordinate) {
    std::size_t common = 0;
    const auto& small = p.rank() <= q.rank() ? p : q;
    const auto& big = p.rank() <= q.rank() ? q : p;
    for (const auto& b : small.indices())
      if (big.contains(b)) ++common;
    return std::sqrt(static_cast<double>(p.rank() + q.rank() - 2 * common));
  }
  std::vector<const Projection*> ptrs{&p, &q};
  const std::vector<BasisIndex> w = union_windows(ptrs);
  const Eigen::MatrixXcd vp = embed_columns(p, w);
  const Eigen::MatrixXcd vq = embed_columns(q, w);
  return (vp * vp.adjoint() - vq * vq.adjoint()).norm();
}

namespace {

std::complex<double> complex_from_json(const nlohmann::json& v, const char* where) {
  using C = std::complex<double>;
  if (v.is_number()) return C(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return C(v[0].get<double>(), v[1].get<double>());
  if (v.is_object() && v.contains("re") && v.contains("im"))
    return C(v.at("re").get<double>(), v.at("im").get<double>());
  throw ValidationError(std::string("projection: malformed complex value in ") + where);
}

std::vector<BasisIndex> indices_from_json(const nlohmann::json& arr, const char* field) {
  if (!arr.is_array())
    throw ValidationError(std::string("projection: field '") + field + "' must be an array");
  std::vector<BasisIndex> out;
  out.reserve(arr.size());
  for (const auto& c : arr) {
    if (!c.is_array())
      throw ValidationError(std::string("projection: entries of '") + field +
                            "' must be basis code arrays");
    out.push_back(BasisIndex::from_code(c.get<std::vector<std::int64_t>>()));
  }
  return out;
}

}  // namespace

std::string projection_to_json_text(const Projection& p) {
  using nlohmann::json;
  if (p.kind() == Projection::Kind::Coordinate) {
    json idx = json::array();
    for (const auto& b : p.indices()) idx.push_back(b.code());
    return json{{"type", "coordinate"}, {"indices", idx}}.dump();
  }
  json win = json::array();
  for (const auto& b : p.window()) win.push_back(b.code());
  json cols = json::array();
  for (Eigen::Index c = 0; c < p.columns().cols(); ++c) {
    json col = json::array();
    for (Eigen::Index r = 0; r < p.columns().rows(); ++r)
      col.push_back(json::array({p.columns()(r, c).real(), p.columns()(r, c).imag()}));
    cols.push_back(col);
  }
  return json{{"type", "frame"}, {"window", win}, {"columns", cols}}.dump();
}

Projection projection_from_json_ptr(const void* json_object, const IndexSort* sort) {
  const auto& j = *static_cast<const nlohmann::json*>(json_object);
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ValidationError("projection: document must be an object with a 'type' field");
  const std::string type = j.at("type").get<std::string>();
  if (type == "coordinate") {
    if (!j.contains("indices")) throw ValidationError("projection: coordinate needs 'indices'");
    return Projection::coordinate(indices_from_json(j.at("indices"), "indices"));
  }
  if (type == "frame") {
    if (!j.contains("window") || !j.contains("columns"))
      throw ValidationError("projection: frame needs 'window' and 'columns'");
    std::vector<BasisIndex> win = indices_from_json(j.at("window"), "window");
    const auto& cols = j.at("columns");
    if (!cols.is_array() || cols.empty())
      throw ValidationError("projection: 'columns' must be a nonempty array");
    Eigen::MatrixXcd v(static_cast<Eigen::Index>(win.size()),
                       static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (!cols[c].is_array() || cols[c].size() != win.size())
        throw ValidationError("projection: column " + std::to_string(c) +
                              " does not match the window length");
      for (std::size_t r = 0; r < win.size(); ++r)
        v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            complex_from_json(cols[c][r], "columns");
    }
    return Projection::frame(std::move(win), std::move(v));
  }
  if (type == "interval") {
    if (!j.contains("from") || !j.contains("to"))
      throw ValidationError("projection: interval needs 'from' and 'to'");
    const auto from = j.at("from").get<std::int64_t>();
    const auto to = j.at("to").get<std::int64_t>();
    if (from > to) throw ValidationError("projection: interval has from > to");
    if (!sort) throw ValidationError("projection: interval needs an operator index sort");
    std::vector<BasisIndex> idx;
    idx.reserve(static_cast<std::size_t>(to - from + 1));
    if (sort->kind() == IndexKind::Nat) {
      if (from < 0) throw ValidationError("projection: interval 'from' must be >= 0 here");
      for (std::int64_t k = from; k <= to; ++k) idx.push_back(BasisIndex::nat(k));
    } else if (sort->kind() == IndexKind::Int) {
      for (std::int64_t k = from; k <= to; ++k) idx.push_back(BasisIndex::integer(k));
    } else {
      throw ValidationError("projection: interval requires a linear index sort, got " +
                            sort->str());
    }
    return Projection::coordinate(std::move(idx));
  }
  if (type == "box") {
    if (!j.contains("n")) throw ValidationError("projection: box needs 'n'");
    const auto n = j.at("n").get<std::int64_t>();
    if (n < 1) throw ValidationError("projection: box needs n >= 1");
    if (sort && sort->kind() != IndexKind::Pair)
      throw ValidationError("projection: box requires a pair index sort, got " + sort->str());
    std::vector<BasisIndex> idx;
    idx.reserve(static_cast<std::size_t>(n * n));
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t k = 0; k < n; ++k) idx.push_back(BasisIndex::pair(i, k));
    return Projection::coordinate(std::move(idx));
  }
  throw ValidationError("projection: unknown type '" + type + "'");
}

Projection projection_from_json_text(const std::string& text, const IndexSort* sort) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("projection: malformed JSON: ") + e.what());
  }
  return projection_from_json_ptr(&j, sort);
}

}  // namespace foelner
