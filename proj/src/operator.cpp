#include "foelner/operator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "foelner/errors.hpp"

namespace foelner {

namespace detail {

class OpImpl {
public:
  virtual ~OpImpl() = default;

  const IndexSort& sort() const { return sort_; }
  double norm_bound() const { return norm_bound_; }
  const SpecPtr& spec() const { return spec_; }

  virtual cplx entry(const BasisIndex& i, const BasisIndex& j) const = 0;
  virtual bool in_domain(const BasisIndex& b) const = 0;
  virtual void col_support(const BasisIndex& j, std::vector<BasisIndex>& out) const = 0;
  virtual void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const = 0;
  // 0 means infinite.
  virtual std::size_t finite_dimension() const { return 0; }

  virtual void canonical_window(std::size_t size, std::vector<BasisIndex>& out) const = 0;
  virtual void canonical_interval(std::size_t rank, std::vector<BasisIndex>& out,
                                  std::string& descriptor) const = 0;

protected:
  IndexSort sort_;
  SpecPtr spec_;
  double norm_bound_ = 0.0;
};

namespace {

void append_nat_interval(std::size_t size, std::vector<BasisIndex>& out) {
  for (std::size_t t = 0; t < size; ++t) out.push_back(BasisIndex::nat(t));
}

void append_int_interval(std::size_t size, std::vector<BasisIndex>& out) {
  const std::int64_t lo = -static_cast<std::int64_t>(size / 2);
  for (std::size_t t = 0; t < size; ++t) out.push_back(BasisIndex::integer(lo + t));
}

void append_word_shortlex(int alphabet, std::size_t size, std::vector<BasisIndex>& out) {
  std::vector<BasisIndex> level{BasisIndex::empty_word()};
  while (out.size() < size) {
    for (const auto& w : level) {
      out.push_back(w);
      if (out.size() == size) return;
    }
    std::vector<BasisIndex> next;
    next.reserve(level.size() * alphabet);
    for (const auto& w : level) {
      std::vector<int> letters(w.word_length());
      for (int p = 0; p < w.word_length(); ++p) letters[p] = w.word_letter(p);
      letters.push_back(0);
      for (int l = 1; l <= alphabet; ++l) {
        letters.back() = l;
        next.push_back(BasisIndex::word(letters));
      }
    }
    level = std::move(next);
  }
}

std::size_t word_ball_count(int alphabet, int depth) {
  std::size_t total = 0, level = 1;
  for (int d = 0; d <= depth; ++d) {
    total += level;
    level *= alphabet;
  }
  return total;
}

}  // namespace

class UnilateralShiftImpl : public OpImpl {
public:
  explicit UnilateralShiftImpl(SpecPtr sp) {
    sort_ = IndexSort::nat();
    spec_ = std::move(sp);
    norm_bound_ = 1.0;
  }
  cplx entry(const BasisIndex& i, const BasisIndex& j) const override {
    return i.scalar() == j.scalar() + 1 ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
  }
  bool in_domain(const BasisIndex& b) const override {
    return b.kind() == IndexKind::Nat && b.scalar() >= 0;
  }
  void col_support(const BasisIndex& j, std::vector<BasisIndex>& out) const override {
    out.push_back(BasisIndex::nat(j.scalar() + 1));
  }
  void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const override {
    if (i.scalar() >= 1) out.push_back(BasisIndex::nat(i.scalar() - 1));
  }
  void canonical_window(std::size_t size, std::vector<BasisIndex>& out) const override {
    append_nat_interval(size, out);
  }
  void canonical_interval(std::size_t rank, std::vector<BasisIndex>& out,
                          std::string& descriptor) const override {
    append_nat_interval(rank, out);
    descriptor = "interval[0," + std::to_string(rank) + ")";
  }
};

class BilateralShiftImpl : public OpImpl {
public:
  explicit BilateralShiftImpl(SpecPtr sp) {
    sort_ = IndexSort::integer();
    spec_ = std::move(sp);
    norm_bound_ = 1.0;
  }
  cplx entry(const BasisIndex& i, const BasisIndex& j) const override {
    return i.scalar() == j.scalar() + 1 ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
  }
  bool in_domain(const BasisIndex& b) const override { return b.kind() == IndexKind::Int; }
  void col_support(const BasisIndex& j, std::vector<BasisIndex>& out) const override {
    out.push_back(BasisIndex::integer(j.scalar() + 1));
  }
  void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const override {
    out.push_back(BasisIndex::integer(i.scalar() - 1));
  }
  void canonical_window(std::size_t size, std::vector<BasisIndex>& out) const override {
    append_int_interval(size, out);
  }
  void canonical_interval(std::size_t rank, std::vector<BasisIndex>& out,
                          std::string& descriptor) const override {
    append_int_interval(rank, out);
    if (rank) {
      descriptor = "interval[" + std::to_string(out[out.size() - rank].scalar()) + "," +
                   std::to_string(out.back().scalar() + 1) + ")";
    } else {
      descriptor = "interval[0,0)";
    }
  }
};

class WeightedShiftImpl : public OpImpl {
public:
  explicit WeightedShiftImpl(SpecPtr sp) : ws_(std::get<WeightedShiftSpec>(sp->node)) {
    sort_ = IndexSort::nat();
    spec_ = std::move(sp);
    double m = 0.0;
    for (const auto& w : ws_.weights) m = std::max(m, std::abs(w));
    norm_bound_ = m;
  }
  cplx weight(std::int64_t j) const {
    const auto p = static_cast<std::int64_t>(ws_.weights.size());
    if (ws_.periodic) return ws_.weights[static_cast<std::size_t>(j % p)];
    return j < p ? ws_.weights[static_cast<std::size_t>(j)] : cplx(0.0, 0.0);
  }
  cplx entry(const BasisIndex& i, const BasisIndex& j) const override {
    return i.scalar() == j.scalar() + 1 ? weight(j.scalar()) : cplx(0.0, 0.0);
  }
  bool in_domain(const BasisIndex& b) const override {
    return b.kind() == IndexKind::Nat && b.scalar() >= 0;
  }
  void col_support(const BasisIndex& j, std::vector<BasisIndex>& out) const override {
    if (weight(j.scalar()) != cplx(0.0, 0.0)) out.push_back(BasisIndex::nat(j.scalar() + 1));
  }
  void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const override {
    if (i.scalar() >= 1 && weight(i.scalar() - 1) != cplx(0.0, 0.0))
      out.push_back(BasisIndex::nat(i.scalar() - 1));
  }
  void canonical_window(std::size_t size, std::vector<BasisIndex>& out) const override {
    append_nat_interval(size, out);
  }
  void canonical_interval(std::size_t rank, std::vector<BasisIndex>& out,
                          std::string& descriptor) const override {
    append_nat_interval(rank, out);
    descriptor = "interval[0," + std::to_string(rank) + ")";
  }

private:
  const WeightedShiftSpec& ws_;
};

class ToeplitzImpl : public OpImpl {
public:
  explicit ToeplitzImpl(SpecPtr sp) : ts_(std::get<ToeplitzSpec>(sp->node)) {
    sort_ = ts_.dim == 1 ? IndexSort::nat() : IndexSort::pair();
    spec_ = std::move(sp);
    double s = 0.0;
    for (const auto& [k, v] : ts_.coeffs) s += std::abs(v);
    norm_bound_ = s;
  }
  cplx entry(const BasisIndex& i, const BasisIndex& j) const override {
    std::array<std::int64_t, 2> d{0, 0};
    if (ts_.dim == 1) {
      d[0] = i.scalar() - j.scalar();
    } else {
      auto [i1, i2] = i.coords();
      auto [j1, j2] = j.coords();
      d = {i1 - j1, i2 - j2};
    }
    const auto it = ts_.coeffs.find(d);
    return it == ts_.coeffs.end() ? cplx(0.0, 0.0) : it->second;
  }
  bool in_domain(const BasisIndex& b) const override {
    if (ts_.dim == 1) return b.kind() == IndexKind::Nat && b.scalar() >= 0;
    return b.kind() == IndexKind::Pair;
  }
  void col_support(const BasisIndex& j, std::vector<BasisIndex>& out) const override {
    if (ts_.dim == 1) {
      for (const auto& [k, v] : ts_.coeffs) {
        const std::int64_t i = j.scalar() + k[0];
        if (i >= 0) out.push_back(BasisIndex::nat(i));
      }
    } else {
      auto [j1, j2] = j.coords();
      for (const auto& [k, v] : ts_.coeffs) {
        const std::int64_t a = j1 + k[0], b = j2 + k[1];
        if (a >= 0 && b >= 0) out.push_back(BasisIndex::pair(a, b));
      }
    }
    canonicalize(out);
  }
  void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const override {
    if (ts_.dim == 1) {
      for (const auto& [k, v] : ts_.coeffs) {
        const std::int64_t j = i.scalar() - k[0];
        if (j >= 0) out.push_back(BasisIndex::nat(j));
      }
    } else {
      auto [i1, i2] = i.coords();
      for (const auto& [k, v] : ts_.coeffs) {
        const std::int64_t a = i1 - k[0], b = i2 - k[1];
        if (a >= 0 && b >= 0) out.push_back(BasisIndex::pair(a, b));
      }
    }
    canonicalize(out);
  }
  void canonical_window(std::size_t size, std::vector<BasisIndex>& out) const override {
    if (ts_.dim == 1) {
      append_nat_interval(size, out);
      return;
    }
    const auto a = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(size))));
    const std::size_t b = a ? (size + a - 1) / a : 0;
    for (std::size_t r = 0; r < a && out.size() < size; ++r)
      for (std::size_t c = 0; c < b && out.size() < size; ++c)
        out.push_back(BasisIndex::pair(r, c));
  }
  void canonical_interval(std::size_t rank, std::vector<BasisIndex>& out,
                          std::string& descriptor) const override {
    if (ts_.dim == 1) {
      append_nat_interval(rank, out);
      descriptor = "interval[0," + std::to_string(rank) + ")";
      return;
    }
    const auto n = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(rank))));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) out.push_back(BasisIndex::pair(r, c));
    descriptor = "box[0," + std::to_string(n) + ")^2";
  }

private:
  const ToeplitzSpec& ts_;
};

// Shared implementation for the two tabulated variants (band limited and
// acute wedge): a finite entry table, zero elsewhere.
class TableImpl : public OpImpl {
public:
  TableImpl(SpecPtr sp, const std::map<std::pair<std::int64_t, std::int64_t>, cplx>& entries,
            bool bilateral) {
    sort_ = bilateral ? IndexSort::integer() : IndexSort::nat();
    spec_ = std::move(sp);
    bilateral_ = bilateral;
    std::map<std::int64_t, double> row_sum, col_sum;
    for (const auto& [pos, v] : entries) {
      table_[pos] = v;
      by_col_[pos.second].push_back(pos.first);
      by_row_[pos.first].push_back(pos.second);
      row_sum[pos.first] += std::abs(v);
      col_sum[pos.second] += std::abs(v);
    }
    for (auto& [c, rows] : by_col_) std::sort(rows.begin(), rows.end());
    for (auto& [r, cols] : by_row_) std::sort(cols.begin(), cols.end());
    double mr = 0.0, mc = 0.0;
    for (const auto& [r, s] : row_sum) mr = std::max(mr, s);
    for (const auto& [c, s] : col_sum) mc = std::max(mc, s);
    norm_bound_ = std::sqrt(mr * mc);
  }
  cplx entry(const BasisIndex& i, const BasisIndex& j) const override {
    const auto it = table_.find({i.scalar(), j.scalar()});
    return it == table_.end() ? cplx(0.0, 0.0) : it->second;
  }
  bool in_domain(const BasisIndex& b) const override {
    if (bilateral_) return b.kind() == IndexKind::Int;
    return b.kind() == IndexKind::Nat && b.scalar() >= 0;
  }
  void col_support(const BasisIndex& j, std::vector<BasisIndex>& out) const override {
    const auto it = by_col_.find(j.scalar());
    if (it == by_col_.end()) return;
    for (std::int64_t r : it->second)
      out.push_back(bilateral_ ? BasisIndex::integer(r) : BasisIndex::nat(r));
  }
  void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const override {
    const auto it = by_row_.find(i.scalar());
    if (it == by_row_.end()) return;
    for (std::int64_t c : it->second)
      out.push_back(bilateral_ ? BasisIndex::integer(c) : BasisIndex::nat(c));
  }
  void canonical_window(std::size_t size, std::vector<BasisIndex>& out) const override {
    if (bilateral_)
      append_int_interval(size, out);
    else
      append_nat_interval(size, out);
  }
  void canonical_interval(std::size_t rank, std::vector<BasisIndex>& out,
                          std::string& descriptor) const override {
    canonical_window(rank, out);
    descriptor = bilateral_ && rank
                     ? "interval[" + std::to_string(out[out.size() - rank].scalar()) + "," +
                           std::to_string(out.back().scalar() + 1) + ")"
                     : "interval[0," + std::to_string(rank) + ")";
  }

private:
  bool bilateral_ = false;
  std::map<std::pair<std::int64_t, std::int64_t>, cplx> table_;
  std::map<std::int64_t, std::vector<std::int64_t>> by_col_, by_row_;
};

class CuntzImpl : public OpImpl {
public:
  explicit CuntzImpl(SpecPtr sp) : cs_(std::get<CuntzSpec>(sp->node)) {
    sort_ = IndexSort::word(cs_.n);
    spec_ = std::move(sp);
    norm_bound_ = 1.0;
  }
  cplx entry(const BasisIndex& i, const BasisIndex& j) const override {
    if (i.word_length() != j.word_length() + 1) return {0.0, 0.0};
    if (i.word_letter(0) != cs_.k) return {0.0, 0.0};
    return i.word_tail() == j ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
  }
  bool in_domain(const BasisIndex& b) const override {
    if (b.kind() != IndexKind::Word) return false;
    for (int p = 0; p < b.word_length(); ++p)
      if (b.word_letter(p) > cs_.n) return false;
    return true;
  }
  void col_support(const BasisIndex& j, std::vector<BasisIndex>& out) const override {
    out.push_back(j.word_prepend(cs_.k));
  }
  void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const override {
    if (i.word_length() >= 1 && i.word_letter(0) == cs_.k) out.push_back(i.word_tail());
  }
  void canonical_window(std::size_t size, std::vector<BasisIndex>& out) const override {
    append_word_shortlex(cs_.n, size, out);
  }
  void canonical_interval(std::size_t rank, std::vector<BasisIndex>& out,
                          std::string& descriptor) const override {
    int depth = 0;
    while (word_ball_count(cs_.n, depth) < rank) ++depth;
    append_word_shortlex(cs_.n, word_ball_count(cs_.n, depth), out);
    descriptor = "wordball(" + std::to_string(depth) + ")";
  }

private:
  const CuntzSpec& cs_;
};

class TensorImpl : public OpImpl {
public:
  TensorImpl(SpecPtr sp, std::shared_ptr<const OpImpl> l, std::shared_ptr<const OpImpl> r)
      : left_(std::move(l)), right_(std::move(r)) {
    sort_ = IndexSort::tensor(left_->sort(), right_->sort());
    spec_ = std::move(sp);
    norm_bound_ = left_->norm_bound() * right_->norm_bound();
  }
  cplx entry(const BasisIndex& i, const BasisIndex& j) const override {
    auto [il, ir] = i.tensor_parts();
    auto [jl, jr] = j.tensor_parts();
    const cplx a = left_->entry(il, jl);
    if (a == cplx(0.0, 0.0)) return a;
    return a * right_->entry(ir, jr);
  }
  bool in_domain(const BasisIndex& b) const override {
    if (b.kind() != IndexKind::Tensor) return false;
    auto [l, r] = b.tensor_parts();
    return left_->in_domain(l) && right_->in_domain(r);
  }
  void col_support(const BasisIndex& j, std::vector<BasisIndex>& out) const override {
    auto [jl, jr] = j.tensor_parts();
    std::vector<BasisIndex> ls, rs;
    left_->col_support(jl, ls);
    right_->col_support(jr, rs);
    for (const auto& a : ls)
      for (const auto& b : rs) out.push_back(BasisIndex::tensor(a, b));
    canonicalize(out);
  }
  void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const override {
    auto [il, ir] = i.tensor_parts();
    std::vector<BasisIndex> ls, rs;
    left_->row_support(il, ls);
    right_->row_support(ir, rs);
    for (const auto& a : ls)
      for (const auto& b : rs) out.push_back(BasisIndex::tensor(a, b));
    canonicalize(out);
  }
  std::size_t finite_dimension() const override {
    const std::size_t l = left_->finite_dimension(), r = right_->finite_dimension();
    return l && r ? l * r : 0;
  }
  void canonical_window(std::size_t size, std::vector<BasisIndex>& out) const override {
    auto a = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(size))));
    if (const std::size_t dl = left_->finite_dimension(); dl && a > dl) a = dl;
    std::size_t b = a ? (size + a - 1) / a : 0;
    if (const std::size_t dr = right_->finite_dimension(); dr && b > dr) b = dr;
    std::vector<BasisIndex> ls, rs;
    left_->canonical_window(a, ls);
    right_->canonical_window(b, rs);
    for (const auto& x : ls) {
      for (const auto& y : rs) {
        if (out.size() == size) return;
        out.push_back(BasisIndex::tensor(x, y));
      }
    }
  }
  void canonical_interval(std::size_t rank, std::vector<BasisIndex>& out,
                          std::string& descriptor) const override {
    const auto n = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(rank))));
    std::vector<BasisIndex> ls, rs;
    std::string dl, dr;
    left_->canonical_interval(n, ls, dl);
    right_->canonical_interval(n, rs, dr);
    for (const auto& x : ls)
      for (const auto& y : rs) out.push_back(BasisIndex::tensor(x, y));
    descriptor = "product(" + dl + "," + dr + ")";
  }

  const OpImpl& left() const { return *left_; }
  const OpImpl& right() const { return *right_; }

private:
  std::shared_ptr<const OpImpl> left_, right_;
};

class DirectSumImpl : public OpImpl {
public:
  DirectSumImpl(SpecPtr sp, std::shared_ptr<const OpImpl> l, std::shared_ptr<const OpImpl> r)
      : left_(std::move(l)), right_(std::move(r)) {
    sort_ = IndexSort::sum(left_->sort(), right_->sort());
    spec_ = std::move(sp);
    norm_bound_ = std::max(left_->norm_bound(), right_->norm_bound());
  }
  cplx entry(const BasisIndex& i, const BasisIndex& j) const override {
    if (i.side() != j.side()) return {0.0, 0.0};
    const auto& part = i.side() == 0 ? left_ : right_;
    return part->entry(i.summand_inner(), j.summand_inner());
  }
  bool in_domain(const BasisIndex& b) const override {
    if (b.kind() != IndexKind::Sum) return false;
    return (b.side() == 0 ? left_ : right_)->in_domain(b.summand_inner());
  }
  void col_support(const BasisIndex& j, std::vector<BasisIndex>& out) const override {
    std::vector<BasisIndex> inner;
    (j.side() == 0 ? left_ : right_)->col_support(j.summand_inner(), inner);
    for (const auto& x : inner) out.push_back(BasisIndex::summand(j.side(), x));
  }
  void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const override {
    std::vector<BasisIndex> inner;
    (i.side() == 0 ? left_ : right_)->row_support(i.summand_inner(), inner);
    for (const auto& x : inner) out.push_back(BasisIndex::summand(i.side(), x));
  }
  std::size_t finite_dimension() const override {
    const std::size_t l = left_->finite_dimension(), r = right_->finite_dimension();
    return l && r ? l + r : 0;
  }
  void canonical_window(std::size_t size, std::vector<BasisIndex>& out) const override {
    auto [l, r] = split(size);
    std::vector<BasisIndex> ls, rs;
    left_->canonical_window(l, ls);
    right_->canonical_window(r, rs);
    for (const auto& x : ls) out.push_back(BasisIndex::summand(0, x));
    for (const auto& x : rs) out.push_back(BasisIndex::summand(1, x));
  }
  void canonical_interval(std::size_t rank, std::vector<BasisIndex>& out,
                          std::string& descriptor) const override {
    auto [l, r] = split(rank);
    std::vector<BasisIndex> ls, rs;
    std::string dl, dr;
    left_->canonical_interval(l, ls, dl);
    right_->canonical_interval(r, rs, dr);
    for (const auto& x : ls) out.push_back(BasisIndex::summand(0, x));
    for (const auto& x : rs) out.push_back(BasisIndex::summand(1, x));
    descriptor = "sum(" + dl + "," + dr + ")";
  }

  const OpImpl& left() const { return *left_; }
  const OpImpl& right() const { return *right_; }

private:
  // Prefers finite sides in full; remaining mass goes half and half.
  std::pair<std::size_t, std::size_t> split(std::size_t size) const {
    const std::size_t dl = left_->finite_dimension(), dr = right_->finite_dimension();
    std::size_t l = (size + 1) / 2;
    if (dl && dl <= l) l = dl;
    std::size_t r = size - std::min(size, l);
    if (dr && r > dr) {
      r = dr;
      l = size - r;
      if (dl && l > dl) l = dl;  // both sides exhausted; window is the whole space
    }
    return {l, r};
  }

  std::shared_ptr<const OpImpl> left_, right_;
};

class AffineImpl : public OpImpl {
public:
  AffineImpl(SpecPtr sp, std::shared_ptr<const OpImpl> inner)
      : as_(std::get<AffineSpec>(sp->node)), inner_(std::move(inner)) {
    sort_ = inner_->sort();
    spec_ = std::move(sp);
    norm_bound_ = std::abs(as_.lambda) * inner_->norm_bound() + std::abs(as_.mu);
  }
  cplx entry(const BasisIndex& i, const BasisIndex& j) const override {
    cplx v = as_.lambda == cplx(0.0, 0.0) ? cplx(0.0, 0.0) : as_.lambda * inner_->entry(i, j);
    if (i == j) v += as_.mu;
    return v;
  }
  bool in_domain(const BasisIndex& b) const override { return inner_->in_domain(b); }
  void col_support(const BasisIndex& j, std::vector<BasisIndex>& out) const override {
    if (as_.lambda != cplx(0.0, 0.0)) inner_->col_support(j, out);
    if (as_.mu != cplx(0.0, 0.0)) out.push_back(j);
    canonicalize(out);
  }
  void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const override {
    if (as_.lambda != cplx(0.0, 0.0)) inner_->row_support(i, out);
    if (as_.mu != cplx(0.0, 0.0)) out.push_back(i);
    canonicalize(out);
  }
  std::size_t finite_dimension() const override { return inner_->finite_dimension(); }
  void canonical_window(std::size_t size, std::vector<BasisIndex>& out) const override {
    inner_->canonical_window(size, out);
  }
  void canonical_interval(std::size_t rank, std::vector<BasisIndex>& out,
                          std::string& descriptor) const override {
    inner_->canonical_interval(rank, out, descriptor);
  }

private:
  const AffineSpec& as_;
  std::shared_ptr<const OpImpl> inner_;
};

class AdjointImpl : public OpImpl {
public:
  AdjointImpl(SpecPtr sp, std::shared_ptr<const OpImpl> inner) : inner_(std::move(inner)) {
    sort_ = inner_->sort();
    spec_ = std::move(sp);
    norm_bound_ = inner_->norm_bound();
  }
  cplx entry(const BasisIndex& i, const BasisIndex& j) const override {
    return std::conj(inner_->entry(j, i));
  }
  bool in_domain(const BasisIndex& b) const override { return inner_->in_domain(b); }
  void col_support(const BasisIndex& j, std::vector<BasisIndex>& out) const override {
    inner_->row_support(j, out);
  }
  void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const override {
    inner_->col_support(i, out);
  }
  std::size_t finite_dimension() const override { return inner_->finite_dimension(); }
  void canonical_window(std::size_t size, std::vector<BasisIndex>& out) const override {
    inner_->canonical_window(size, out);
  }
  void canonical_interval(std::size_t rank, std::vector<BasisIndex>& out,
                          std::string& descriptor) const override {
    inner_->canonical_interval(rank, out, descriptor);
  }

private:
  std::shared_ptr<const OpImpl> inner_;
};

class DenseImpl : public OpImpl {
public:
  explicit DenseImpl(SpecPtr sp) : ds_(std::get<DenseSpec>(sp->node)) {
    sort_ = IndexSort::nat();
    spec_ = std::move(sp);
    const std::size_t m = ds_.matrix.size();
    // Certified bounds only: min of the Schur test and the Frobenius norm.
    double mr = 0.0, mc = 0.0, fro2 = 0.0;
    std::vector<double> col_sum(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      double rs = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        const double a = std::abs(ds_.matrix[r][c]);
        rs += a;
        col_sum[c] += a;
        fro2 += a * a;
      }
      mr = std::max(mr, rs);
    }
    for (double s : col_sum) mc = std::max(mc, s);
    norm_bound_ = std::min(std::sqrt(mr * mc), std::sqrt(fro2));
  }
  cplx entry(const BasisIndex& i, const BasisIndex& j) const override {
    return ds_.matrix[static_cast<std::size_t>(i.scalar())][static_cast<std::size_t>(j.scalar())];
  }
  bool in_domain(const BasisIndex& b) const override {
    return b.kind() == IndexKind::Nat && b.scalar() >= 0 &&
           b.scalar() < static_cast<std::int64_t>(ds_.matrix.size());
  }
  void col_support(const BasisIndex& j, std::vector<BasisIndex>& out) const override {
    const auto c = static_cast<std::size_t>(j.scalar());
    for (std::size_t r = 0; r < ds_.matrix.size(); ++r)
      if (ds_.matrix[r][c] != cplx(0.0, 0.0)) out.push_back(BasisIndex::nat(r));
  }
  void row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const override {
    const auto r = static_cast<std::size_t>(i.scalar());
    for (std::size_t c = 0; c < ds_.matrix.size(); ++c)
      if (ds_.matrix[r][c] != cplx(0.0, 0.0)) out.push_back(BasisIndex::nat(c));
  }
  std::size_t finite_dimension() const override { return ds_.matrix.size(); }
  void canonical_window(std::size_t size, std::vector<BasisIndex>& out) const override {
    append_nat_interval(std::min(size, ds_.matrix.size()), out);
  }
  void canonical_interval(std::size_t rank, std::vector<BasisIndex>& out,
                          std::string& descriptor) const override {
    const std::size_t n = std::min(rank, ds_.matrix.size());
    append_nat_interval(n, out);
    descriptor = "interval[0," + std::to_string(n) + ")";
  }

private:
  const DenseSpec& ds_;
};

std::shared_ptr<const OpImpl> build_impl(const SpecPtr& spec) {
  return std::visit(
      [&](const auto& s) -> std::shared_ptr<const OpImpl> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, UnilateralShiftSpec>)
          return std::make_shared<UnilateralShiftImpl>(spec);
        else if constexpr (std::is_same_v<T, BilateralShiftSpec>)
          return std::make_shared<BilateralShiftImpl>(spec);
        else if constexpr (std::is_same_v<T, WeightedShiftSpec>)
          return std::make_shared<WeightedShiftImpl>(spec);
        else if constexpr (std::is_same_v<T, ToeplitzSpec>)
          return std::make_shared<ToeplitzImpl>(spec);
        else if constexpr (std::is_same_v<T, BandLimitedSpec>)
          return std::make_shared<TableImpl>(spec, s.entries, s.bilateral);
        else if constexpr (std::is_same_v<T, AcuteWedgeSpec>)
          return std::make_shared<TableImpl>(spec, s.entries, false);
        else if constexpr (std::is_same_v<T, CuntzSpec>)
          return std::make_shared<CuntzImpl>(spec);
        else if constexpr (std::is_same_v<T, TensorSpec>)
          return std::make_shared<TensorImpl>(spec, build_impl(s.left), build_impl(s.right));
        else if constexpr (std::is_same_v<T, DirectSumSpec>)
          return std::make_shared<DirectSumImpl>(spec, build_impl(s.left), build_impl(s.right));
        else if constexpr (std::is_same_v<T, AffineSpec>)
          return std::make_shared<AffineImpl>(spec, build_impl(s.inner));
        else if constexpr (std::is_same_v<T, AdjointSpec>)
          return std::make_shared<AdjointImpl>(spec, build_impl(s.inner));
        else
          return std::make_shared<DenseImpl>(spec);
      },
      spec->node);
}

}  // namespace detail

const IndexSort& Operator::sort() const { return impl_->sort(); }

cplx Operator::entry(const BasisIndex& i, const BasisIndex& j) const {
  return impl_->entry(i, j);
}

double Operator::norm_bound() const { return impl_->norm_bound(); }

bool Operator::in_domain(const BasisIndex& b) const { return impl_->in_domain(b); }

void Operator::column_support(const BasisIndex& j, std::vector<BasisIndex>& out) const {
  impl_->col_support(j, out);
}

void Operator::row_support(const BasisIndex& i, std::vector<BasisIndex>& out) const {
  impl_->row_support(i, out);
}

std::vector<BasisIndex> Operator::canonical_window(std::size_t size) const {
  std::vector<BasisIndex> out;
  out.reserve(size);
  impl_->canonical_window(size, out);
  return out;
}

std::pair<std::vector<BasisIndex>, std::string> Operator::canonical_interval(
    std::size_t rank) const {
  std::vector<BasisIndex> out;
  std::string descriptor;
  impl_->canonical_interval(rank, out, descriptor);
  return {std::move(out), std::move(descriptor)};
}

std::size_t Operator::finite_dimension() const { return impl_->finite_dimension(); }

const OperatorSpec& Operator::spec() const { return *impl_->spec(); }

Operator build_operator(const SpecPtr& spec) {
  if (!spec) throw ValidationError("operator: null spec");
  return Operator(detail::build_impl(spec));
}

DenseWindow truncate(const Operator& op, std::span<const BasisIndex> window,
                     std::size_t max_size) {
  if (window.size() > max_size)
    throw ResourceError("window of size " + std::to_string(window.size()) +
                        " exceeds the dense cap " + std::to_string(max_size));
  DenseWindow dw;
  dw.window.assign(window.begin(), window.end());
  canonicalize(dw.window);
  for (const auto& b : dw.window)
    if (!op.in_domain(b))
      throw ValidationError("window index " + b.str() + " is outside the operator domain (sort " +
                            op.sort().str() + ")");
  const auto n = static_cast<Eigen::Index>(dw.window.size());
  dw.matrix.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r)
      dw.matrix(r, c) = op.entry(dw.window[static_cast<std::size_t>(r)],
                                 dw.window[static_cast<std::size_t>(c)]);
  return dw;
}

}  // namespace foelner
