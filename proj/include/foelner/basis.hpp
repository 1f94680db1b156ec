#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace foelner {

enum class IndexKind : std::int8_t { Nat, Int, Pair, Word, Tensor, Sum };

// One basis vector label.  Encoded as a flat, self-delimiting prefix code in
// a vector<int64_t> so that equality, ordering and hashing are cheap and
// allocation-light:
//   Nat n        -> [0, n]
//   Int k        -> [1, k]
//   Pair (a,b)   -> [2, a, b]
//   Word w       -> [3, len, letters...]      (letters are 1-based)
//   Tensor (l,r) -> [4] ++ code(l) ++ code(r)
//   Sum (s,i)    -> [5, s] ++ code(i)         (s = 0 left, 1 right)
// The induced lexicographic order on codes is a total order; for words it is
// shortlex, which is the enumeration order used everywhere.
class BasisIndex {
public:
  BasisIndex() : code_{0, 0} {}

  static BasisIndex nat(std::int64_t n);
  static BasisIndex integer(std::int64_t k);
  static BasisIndex pair(std::int64_t a, std::int64_t b);
  static BasisIndex word(const std::vector<int>& letters);
  static BasisIndex empty_word() { return word({}); }
  static BasisIndex tensor(const BasisIndex& l, const BasisIndex& r);
  static BasisIndex summand(int side, const BasisIndex& inner);

  IndexKind kind() const { return static_cast<IndexKind>(code_[0]); }

  // Nat / Int payload.
  std::int64_t scalar() const;
  // Pair payload.
  std::pair<std::int64_t, std::int64_t> coords() const;
  // Word payload.
  int word_length() const;
  int word_letter(int pos) const;
  BasisIndex word_prepend(int letter) const;
  // Drops the first letter; word must be nonempty.
  BasisIndex word_tail() const;
  // Tensor payload.
  std::pair<BasisIndex, BasisIndex> tensor_parts() const;
  // Sum payload.
  int side() const;
  BasisIndex summand_inner() const;

  bool operator==(const BasisIndex& o) const { return code_ == o.code_; }
  bool operator!=(const BasisIndex& o) const { return code_ != o.code_; }
  bool operator<(const BasisIndex& o) const { return code_ < o.code_; }
  bool operator<=(const BasisIndex& o) const { return code_ <= o.code_; }
  bool operator>(const BasisIndex& o) const { return code_ > o.code_; }
  bool operator>=(const BasisIndex& o) const { return code_ >= o.code_; }

  std::size_t hash() const;
  std::string str() const;

  const std::vector<std::int64_t>& code() const { return code_; }
  static BasisIndex from_code(std::vector<std::int64_t> code);

private:
  explicit BasisIndex(std::vector<std::int64_t> code) : code_(std::move(code)) {}
  std::vector<std::int64_t> code_;
};

struct BasisIndexHash {
  std::size_t operator()(const BasisIndex& b) const { return b.hash(); }
};

// Shape of an index space.  Same flat encoding trick:
//   Nat -> [0], Int -> [1], Pair -> [2], Word(n) -> [3, n],
//   Tensor -> [4] ++ l ++ r, Sum -> [5] ++ l ++ r.
// Word carries the alphabet size; alphabet 0 acts as a wildcard when
// comparing shapes (a word index alone does not reveal its alphabet).
class IndexSort {
public:
  IndexSort() : code_{0} {}

  static IndexSort nat();
  static IndexSort integer();
  static IndexSort pair();
  static IndexSort word(int alphabet);
  static IndexSort tensor(const IndexSort& l, const IndexSort& r);
  static IndexSort sum(const IndexSort& l, const IndexSort& r);

  IndexKind kind() const { return static_cast<IndexKind>(code_[0]); }
  int word_alphabet() const;
  std::pair<IndexSort, IndexSort> parts() const;  // Tensor or Sum

  // Structural agreement of an index with this sort.  Word letters must lie
  // in [1, alphabet] unless the alphabet is the wildcard 0.
  bool admits(const BasisIndex& b) const;

  bool operator==(const IndexSort& o) const { return code_ == o.code_; }
  bool operator!=(const IndexSort& o) const { return code_ != o.code_; }

  std::string str() const;

private:
  explicit IndexSort(std::vector<std::int64_t> code) : code_(std::move(code)) {}
  std::vector<std::int64_t> code_;
};

// In-place canonical form: sort ascending, drop duplicates.
void canonicalize(std::vector<BasisIndex>& v);

}  // namespace foelner
