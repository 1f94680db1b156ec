#include "foelner/basis.hpp"

#include <algorithm>
#include <sstream>

#include "foelner/errors.hpp"

namespace foelner {

namespace {

constexpr std::int64_t kNat = 0, kInt = 1, kPair = 2, kWord = 3, kTensor = 4, kSum = 5;

// Length of the code starting at `pos`, or -1 on malformed input.
std::ptrdiff_t code_span(const std::vector<std::int64_t>& c, std::size_t pos) {
  if (pos >= c.size()) return -1;
  switch (c[pos]) {
    case kNat:
    case kInt:
      return pos + 1 < c.size() ? 2 : -1;
    case kPair:
      return pos + 2 < c.size() ? 3 : -1;
    case kWord: {
      if (pos + 1 >= c.size()) return -1;
      const std::int64_t len = c[pos + 1];
      if (len < 0 || pos + 2 + static_cast<std::size_t>(len) > c.size()) return -1;
      return 2 + len;
    }
    case kTensor: {
      const auto l = code_span(c, pos + 1);
      if (l < 0) return -1;
      const auto r = code_span(c, pos + 1 + l);
      if (r < 0) return -1;
      return 1 + l + r;
    }
    case kSum: {
      if (pos + 1 >= c.size() || (c[pos + 1] != 0 && c[pos + 1] != 1)) return -1;
      const auto i = code_span(c, pos + 2);
      if (i < 0) return -1;
      return 2 + i;
    }
    default:
      return -1;
  }
}

}  // namespace

BasisIndex BasisIndex::nat(std::int64_t n) {
  if (n < 0) throw ValidationError("nat index must be >= 0, got " + std::to_string(n));
  return BasisIndex({kNat, n});
}

BasisIndex BasisIndex::integer(std::int64_t k) { return BasisIndex({kInt, k}); }

BasisIndex BasisIndex::pair(std::int64_t a, std::int64_t b) {
  if (a < 0 || b < 0)
    throw ValidationError("pair index coordinates must be >= 0, got (" + std::to_string(a) +
                          ", " + std::to_string(b) + ")");
  return BasisIndex({kPair, a, b});
}

BasisIndex BasisIndex::word(const std::vector<int>& letters) {
  std::vector<std::int64_t> code{kWord, static_cast<std::int64_t>(letters.size())};
  code.reserve(2 + letters.size());
  for (int l : letters) {
    if (l < 1) throw ValidationError("word letters are 1-based, got " + std::to_string(l));
    code.push_back(l);
  }
  return BasisIndex(std::move(code));
}

BasisIndex BasisIndex::tensor(const BasisIndex& l, const BasisIndex& r) {
  std::vector<std::int64_t> code{kTensor};
  code.reserve(1 + l.code_.size() + r.code_.size());
  code.insert(code.end(), l.code_.begin(), l.code_.end());
  code.insert(code.end(), r.code_.begin(), r.code_.end());
  return BasisIndex(std::move(code));
}

BasisIndex BasisIndex::summand(int side, const BasisIndex& inner) {
  if (side != 0 && side != 1)
    throw ValidationError("summand side must be 0 or 1, got " + std::to_string(side));
  std::vector<std::int64_t> code{kSum, side};
  code.insert(code.end(), inner.code_.begin(), inner.code_.end());
  return BasisIndex(std::move(code));
}

BasisIndex BasisIndex::from_code(std::vector<std::int64_t> code) {
  if (code_span(code, 0) != static_cast<std::ptrdiff_t>(code.size()))
    throw ValidationError("malformed basis index code");
  return BasisIndex(std::move(code));
}

std::int64_t BasisIndex::scalar() const {
  if (kind() != IndexKind::Nat && kind() != IndexKind::Int)
    throw ValidationError("scalar() on non-scalar index " + str());
  return code_[1];
}

std::pair<std::int64_t, std::int64_t> BasisIndex::coords() const {
  if (kind() != IndexKind::Pair) throw ValidationError("coords() on non-pair index " + str());
  return {code_[1], code_[2]};
}

int BasisIndex::word_length() const {
  if (kind() != IndexKind::Word) throw ValidationError("word_length() on non-word index " + str());
  return static_cast<int>(code_[1]);
}

int BasisIndex::word_letter(int pos) const {
  if (pos < 0 || pos >= word_length())
    throw ValidationError("word letter position out of range");
  return static_cast<int>(code_[2 + pos]);
}

BasisIndex BasisIndex::word_prepend(int letter) const {
  if (letter < 1) throw ValidationError("word letters are 1-based");
  const int len = word_length();
  std::vector<std::int64_t> code{kWord, len + 1, letter};
  code.insert(code.end(), code_.begin() + 2, code_.end());
  return BasisIndex(std::move(code));
}

BasisIndex BasisIndex::word_tail() const {
  const int len = word_length();
  if (len == 0) throw ValidationError("word_tail() on the empty word");
  std::vector<std::int64_t> code{kWord, len - 1};
  code.insert(code.end(), code_.begin() + 3, code_.end());
  return BasisIndex(std::move(code));
}

std::pair<BasisIndex, BasisIndex> BasisIndex::tensor_parts() const {
  if (kind() != IndexKind::Tensor)
    throw ValidationError("tensor_parts() on non-tensor index " + str());
  const auto l = code_span(code_, 1);
  std::vector<std::int64_t> lc(code_.begin() + 1, code_.begin() + 1 + l);
  std::vector<std::int64_t> rc(code_.begin() + 1 + l, code_.end());
  return {BasisIndex(std::move(lc)), BasisIndex(std::move(rc))};
}

int BasisIndex::side() const {
  if (kind() != IndexKind::Sum) throw ValidationError("side() on non-summand index " + str());
  return static_cast<int>(code_[1]);
}

BasisIndex BasisIndex::summand_inner() const {
  if (kind() != IndexKind::Sum)
    throw ValidationError("summand_inner() on non-summand index " + str());
  return BasisIndex(std::vector<std::int64_t>(code_.begin() + 2, code_.end()));
}

std::size_t BasisIndex::hash() const {
  // FNV-1a over the code words; stable across runs by construction.
  std::uint64_t h = 1469598103934665603ull;
  for (std::int64_t v : code_) {
    std::uint64_t x = static_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  }
  return static_cast<std::size_t>(h);
}

std::string BasisIndex::str() const {
  std::ostringstream os;
  switch (kind()) {
    case IndexKind::Nat:
    case IndexKind::Int:
      os << code_[1];
      break;
    case IndexKind::Pair:
      os << "(" << code_[1] << "," << code_[2] << ")";
      break;
    case IndexKind::Word: {
      os << "w[";
      for (int i = 0; i < word_length(); ++i) {
        if (i) os << ".";
        os << code_[2 + i];
      }
      os << "]";
      break;
    }
    case IndexKind::Tensor: {
      auto [l, r] = tensor_parts();
      os << l.str() << "(x)" << r.str();
      break;
    }
    case IndexKind::Sum:
      os << (side() == 0 ? "L:" : "R:") << summand_inner().str();
      break;
  }
  return os.str();
}

IndexSort IndexSort::nat() { return IndexSort({kNat}); }
IndexSort IndexSort::integer() { return IndexSort({kInt}); }
IndexSort IndexSort::pair() { return IndexSort({kPair}); }

IndexSort IndexSort::word(int alphabet) {
  if (alphabet < 0) throw ValidationError("word alphabet must be >= 0");
  return IndexSort({kWord, alphabet});
}

IndexSort IndexSort::tensor(const IndexSort& l, const IndexSort& r) {
  std::vector<std::int64_t> code{kTensor};
  code.insert(code.end(), l.code_.begin(), l.code_.end());
  code.insert(code.end(), r.code_.begin(), r.code_.end());
  return IndexSort(std::move(code));
}

IndexSort IndexSort::sum(const IndexSort& l, const IndexSort& r) {
  std::vector<std::int64_t> code{kSum};
  code.insert(code.end(), l.code_.begin(), l.code_.end());
  code.insert(code.end(), r.code_.begin(), r.code_.end());
  return IndexSort(std::move(code));
}

namespace {

// Length of the sort code starting at pos.
std::ptrdiff_t sort_span(const std::vector<std::int64_t>& c, std::size_t pos) {
  switch (c[pos]) {
    case kNat:
    case kInt:
    case kPair:
      return 1;
    case kWord:
      return 2;
    case kTensor:
    case kSum: {
      const auto l = sort_span(c, pos + 1);
      return 1 + l + sort_span(c, pos + 1 + l);
    }
    default:
      return 1;
  }
}

}  // namespace

int IndexSort::word_alphabet() const {
  if (kind() != IndexKind::Word) throw ValidationError("word_alphabet() on non-word sort");
  return static_cast<int>(code_[1]);
}

std::pair<IndexSort, IndexSort> IndexSort::parts() const {
  if (kind() != IndexKind::Tensor && kind() != IndexKind::Sum)
    throw ValidationError("parts() on a leaf sort");
  const auto l = sort_span(code_, 1);
  std::vector<std::int64_t> lc(code_.begin() + 1, code_.begin() + 1 + l);
  std::vector<std::int64_t> rc(code_.begin() + 1 + l, code_.end());
  return {IndexSort(std::move(lc)), IndexSort(std::move(rc))};
}

bool IndexSort::admits(const BasisIndex& b) const {
  if (kind() != b.kind()) return false;
  switch (kind()) {
    case IndexKind::Nat:
      return b.scalar() >= 0;
    case IndexKind::Int:
      return true;
    case IndexKind::Pair:
      return true;
    case IndexKind::Word: {
      const int n = word_alphabet();
      if (n == 0) return true;
      for (int i = 0; i < b.word_length(); ++i)
        if (b.word_letter(i) > n) return false;
      return true;
    }
    case IndexKind::Tensor: {
      auto [ls, rs] = parts();
      auto [lb, rb] = b.tensor_parts();
      return ls.admits(lb) && rs.admits(rb);
    }
    case IndexKind::Sum: {
      auto [ls, rs] = parts();
      return b.side() == 0 ? ls.admits(b.summand_inner()) : rs.admits(b.summand_inner());
    }
  }
  return false;
}

std::string IndexSort::str() const {
  switch (kind()) {
    case IndexKind::Nat:
      return "nat";
    case IndexKind::Int:
      return "int";
    case IndexKind::Pair:
      return "pair";
    case IndexKind::Word:
      return "word(" + std::to_string(word_alphabet()) + ")";
    case IndexKind::Tensor: {
      auto [l, r] = parts();
      return "tensor(" + l.str() + "," + r.str() + ")";
    }
    case IndexKind::Sum: {
      auto [l, r] = parts();
      return "sum(" + l.str() + "," + r.str() + ")";
    }
  }
  return "?";
}

void canonicalize(std::vector<BasisIndex>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace foelner
