#include <complex>
#include <vector>

#include "doctest.h"
#include "foelner/errors.hpp"
#include "foelner/operator.hpp"
#include "foelner/operator_spec.hpp"

using namespace foelner;

namespace {

Operator from_json(const std::string& text) { return build_operator(parse_operator_spec(text)); }

}  // namespace

TEST_CASE("spec parser rejects malformed documents") {
  CHECK_THROWS_AS(parse_operator_spec("{"), ValidationError);
  CHECK_THROWS_AS(parse_operator_spec("[1,2]"), ValidationError);
  CHECK_THROWS_AS(parse_operator_spec(R"({"type":"no_such_operator"})"), ValidationError);
  CHECK_THROWS_AS(parse_operator_spec(R"({"type":"weighted_shift"})"), ValidationError);
  CHECK_THROWS_AS(parse_operator_spec(R"({"type":"weighted_shift","weights":[]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_operator_spec(R"({"type":"toeplitz","dim":3,"coeffs":[{"k":[1],"re":1}]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_operator_spec(R"({"type":"cuntz","n":1,"k":1,"depth":4})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_operator_spec(R"({"type":"cuntz","n":2,"k":3,"depth":4})"),
                  ValidationError);
  // Entries outside the declared band are a contract violation, not a zero.
  CHECK_THROWS_AS(
      parse_operator_spec(
          R"({"type":"band_limited","band":1,"entries":[{"i":0,"j":5,"re":1.0}]})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse_operator_spec(R"({"type":"dense","matrix":[[1,2],[3]]})"), ValidationError);
}

TEST_CASE("spec serialization round-trips through the parser") {
  const char* docs[] = {
      R"({"type":"unilateral_shift"})",
      R"({"type":"weighted_shift","weights":[1.0,[0.0,2.0]],"periodic":true})",
      R"({"type":"toeplitz","dim":2,"coeffs":[{"k":[1,0],"re":1.0},{"k":[0,1],"re":1.0}]})",
      R"({"type":"affine","lambda":[0.0,1.0],"mu":2.0,"inner":{"type":"bilateral_shift"}})",
      R"({"type":"tensor","left":{"type":"unilateral_shift"},"right":{"type":"unilateral_shift"}})",
  };
  for (const char* doc : docs) {
    const SpecPtr a = parse_operator_spec(doc);
    const SpecPtr b = parse_operator_spec(spec_to_json(*a));
    CHECK(spec_to_json(*a) == spec_to_json(*b));
  }
}

TEST_CASE("unilateral shift entries, domain and norm bound") {
  const Operator s = from_json(R"({"type":"unilateral_shift"})");
  CHECK(s.sort() == IndexSort::nat());
  CHECK(s.entry(BasisIndex::nat(5), BasisIndex::nat(4)) == cplx(1.0, 0.0));
  CHECK(s.entry(BasisIndex::nat(4), BasisIndex::nat(5)) == cplx(0.0, 0.0));
  CHECK(s.entry(BasisIndex::nat(0), BasisIndex::nat(0)) == cplx(0.0, 0.0));
  CHECK(s.norm_bound() == doctest::Approx(1.0));
  CHECK(s.in_domain(BasisIndex::nat(0)));
  CHECK_FALSE(s.in_domain(BasisIndex::integer(0)));
  CHECK(s.finite_dimension() == 0);

  std::vector<BasisIndex> sup;
  s.column_support(BasisIndex::nat(3), sup);
  REQUIRE(sup.size() == 1);
  CHECK(sup[0] == BasisIndex::nat(4));
  sup.clear();
  s.row_support(BasisIndex::nat(3), sup);
  REQUIRE(sup.size() == 1);
  CHECK(sup[0] == BasisIndex::nat(2));
  sup.clear();
  s.row_support(BasisIndex::nat(0), sup);
  CHECK(sup.empty());
}

TEST_CASE("weighted shift honors the weight table and periodicity") {
  const Operator w =
      from_json(R"({"type":"weighted_shift","weights":[2.0,[0.0,3.0]],"periodic":true})");
  CHECK(w.entry(BasisIndex::nat(1), BasisIndex::nat(0)) == cplx(2.0, 0.0));
  CHECK(w.entry(BasisIndex::nat(2), BasisIndex::nat(1)) == cplx(0.0, 3.0));
  CHECK(w.entry(BasisIndex::nat(3), BasisIndex::nat(2)) == cplx(2.0, 0.0));
  CHECK(w.norm_bound() == doctest::Approx(3.0));

  const Operator f = from_json(R"({"type":"weighted_shift","weights":[2.0,[0.0,3.0]]})");
  // Off the table the weight is zero when not periodic.
  CHECK(f.entry(BasisIndex::nat(3), BasisIndex::nat(2)) == cplx(0.0, 0.0));
}

TEST_CASE("toeplitz entries depend only on the index difference") {
  const Operator t = from_json(
      R"({"type":"toeplitz","dim":1,"coeffs":[{"k":[1],"re":1.0},{"k":[-1],"re":1.0}]})");
  CHECK(t.entry(BasisIndex::nat(8), BasisIndex::nat(7)) == cplx(1.0, 0.0));
  CHECK(t.entry(BasisIndex::nat(7), BasisIndex::nat(8)) == cplx(1.0, 0.0));
  CHECK(t.entry(BasisIndex::nat(9), BasisIndex::nat(7)) == cplx(0.0, 0.0));
  CHECK(t.norm_bound() >= 2.0 - 1e-12);

  const Operator t2 = from_json(
      R"({"type":"toeplitz","dim":2,"coeffs":[{"k":[1,0],"re":1.0},{"k":[0,1],"re":1.0}]})");
  CHECK(t2.sort() == IndexSort::pair());
  CHECK(t2.entry(BasisIndex::pair(4, 2), BasisIndex::pair(3, 2)) == cplx(1.0, 0.0));
  CHECK(t2.entry(BasisIndex::pair(4, 3), BasisIndex::pair(4, 2)) == cplx(1.0, 0.0));
  CHECK(t2.entry(BasisIndex::pair(4, 3), BasisIndex::pair(3, 2)) == cplx(0.0, 0.0));
}

TEST_CASE("band limited tables live on nat or int depending on their support") {
  const Operator b = from_json(
      R"({"type":"band_limited","band":2,"entries":[{"i":0,"j":2,"re":0.5},{"i":3,"j":1,"re":0.0,"im":1.0}]})");
  CHECK(b.sort() == IndexSort::nat());
  CHECK(b.entry(BasisIndex::nat(0), BasisIndex::nat(2)) == cplx(0.5, 0.0));
  CHECK(b.entry(BasisIndex::nat(3), BasisIndex::nat(1)) == cplx(0.0, 1.0));
  CHECK(b.entry(BasisIndex::nat(1), BasisIndex::nat(1)) == cplx(0.0, 0.0));

  const Operator bb = from_json(
      R"({"type":"band_limited","band":1,"entries":[{"i":-1,"j":0,"re":1.0}]})");
  CHECK(bb.sort() == IndexSort::integer());
  CHECK(bb.entry(BasisIndex::integer(-1), BasisIndex::integer(0)) == cplx(1.0, 0.0));
}

TEST_CASE("acute wedge accepts entries within its reach profile only") {
  const Operator a = from_json(
      R"({"type":"acute_wedge","reach":[1,1,3],"entries":[{"i":4,"j":2,"re":1.0}]})");
  CHECK(a.entry(BasisIndex::nat(4), BasisIndex::nat(2)) == cplx(1.0, 0.0));
  // Reach at min(i,j)=0 is 1, so offset 2 there is rejected at parse time.
  CHECK_THROWS_AS(
      from_json(R"({"type":"acute_wedge","reach":[1,1,3],"entries":[{"i":2,"j":0,"re":1.0}]})"),
      ValidationError);
}

TEST_CASE("word isometries prepend their letter") {
  const Operator s1 = from_json(R"({"type":"cuntz","n":2,"k":1,"depth":6})");
  const BasisIndex w = BasisIndex::word({2, 1});
  CHECK(s1.entry(w.word_prepend(1), w) == cplx(1.0, 0.0));
  CHECK(s1.entry(w.word_prepend(2), w) == cplx(0.0, 0.0));
  CHECK(s1.norm_bound() == doctest::Approx(1.0));
  CHECK(s1.sort() == IndexSort::word(2));
}

TEST_CASE("tensor, direct sum, affine, adjoint and dense combine entries correctly") {
  const Operator ts = from_json(
      R"({"type":"tensor","left":{"type":"unilateral_shift"},"right":{"type":"unilateral_shift"}})");
  const BasisIndex i = BasisIndex::tensor(BasisIndex::nat(3), BasisIndex::nat(5));
  const BasisIndex j = BasisIndex::tensor(BasisIndex::nat(2), BasisIndex::nat(4));
  CHECK(ts.entry(i, j) == cplx(1.0, 0.0));
  CHECK(ts.entry(j, i) == cplx(0.0, 0.0));
  CHECK(ts.norm_bound() == doctest::Approx(1.0));

  const Operator ds = from_json(
      R"({"type":"direct_sum","left":{"type":"unilateral_shift"},"right":{"type":"dense","matrix":[[0,1],[1,0]]}})");
  CHECK(ds.entry(BasisIndex::summand(0, BasisIndex::nat(1)),
                 BasisIndex::summand(0, BasisIndex::nat(0))) == cplx(1.0, 0.0));
  CHECK(ds.entry(BasisIndex::summand(1, BasisIndex::nat(0)),
                 BasisIndex::summand(1, BasisIndex::nat(1))) == cplx(1.0, 0.0));
  CHECK(ds.entry(BasisIndex::summand(0, BasisIndex::nat(1)),
                 BasisIndex::summand(1, BasisIndex::nat(0))) == cplx(0.0, 0.0));

  const Operator af = from_json(
      R"({"type":"affine","lambda":2.0,"mu":[0.0,1.0],"inner":{"type":"unilateral_shift"}})");
  CHECK(af.entry(BasisIndex::nat(1), BasisIndex::nat(0)) == cplx(2.0, 0.0));
  CHECK(af.entry(BasisIndex::nat(4), BasisIndex::nat(4)) == cplx(0.0, 1.0));
  CHECK(af.norm_bound() <= 2.0 + 1.0 + 1e-12);

  const Operator ad = from_json(R"({"type":"adjoint","inner":{"type":"weighted_shift","weights":[[0.0,2.0]],"periodic":true}})");
  // The adjoint transposes and conjugates.
  CHECK(ad.entry(BasisIndex::nat(0), BasisIndex::nat(1)) == cplx(0.0, -2.0));
  CHECK(ad.entry(BasisIndex::nat(1), BasisIndex::nat(0)) == cplx(0.0, 0.0));

  const Operator de = from_json(R"({"type":"dense","matrix":[[1,[0,1]],[0,2]]})");
  CHECK(de.finite_dimension() == 2);
  CHECK(de.entry(BasisIndex::nat(0), BasisIndex::nat(1)) == cplx(0.0, 1.0));
  CHECK_FALSE(de.in_domain(BasisIndex::nat(2)));
}

TEST_CASE("canonical windows enumerate the sort in canonical order") {
  const Operator s = from_json(R"({"type":"unilateral_shift"})");
  const auto w = s.canonical_window(5);
  REQUIRE(w.size() == 5);
  for (int t = 0; t < 5; ++t) CHECK(w[t] == BasisIndex::nat(t));

  const Operator c = from_json(R"({"type":"cuntz","n":2,"k":1,"depth":6})");
  const auto cw = c.canonical_window(4);
  REQUIRE(cw.size() == 4);
  CHECK(cw[0] == BasisIndex::empty_word());
  CHECK(cw[1] == BasisIndex::word({1}));
  CHECK(cw[2] == BasisIndex::word({2}));
  CHECK(cw[3] == BasisIndex::word({1, 1}));
}

TEST_CASE("canonical intervals round the rank up to the next full shape") {
  const Operator s = from_json(R"({"type":"unilateral_shift"})");
  const auto [iw, idesc] = s.canonical_interval(6);
  CHECK(iw.size() == 6);
  CHECK(idesc == "interval[0,6)");

  const Operator t2 = from_json(
      R"({"type":"toeplitz","dim":2,"coeffs":[{"k":[1,0],"re":1.0}]})");
  const auto [bw, bdesc] = t2.canonical_interval(5);
  CHECK(bw.size() == 9);  // 3 x 3 box
  CHECK(bdesc == "box[0,3)^2");

  const Operator c = from_json(R"({"type":"cuntz","n":2,"k":1,"depth":6})");
  const auto [ww, wdesc] = c.canonical_interval(4);
  CHECK(ww.size() == 7);  // words of length <= 2
  CHECK(wdesc == "wordball(2)");
}

TEST_CASE("truncate produces the exact window compression") {
  const Operator s = from_json(R"({"type":"unilateral_shift"})");
  std::vector<BasisIndex> w;
  for (int t = 0; t < 4; ++t) w.push_back(BasisIndex::nat(t));
  const DenseWindow dw = truncate(s, w);
  REQUIRE(dw.matrix.rows() == 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      CHECK(dw.matrix(r, c) == (r == c + 1 ? cplx(1.0, 0.0) : cplx(0.0, 0.0)));

  // Out-of-domain indices are a contract violation.
  std::vector<BasisIndex> bad{BasisIndex::integer(0)};
  CHECK_THROWS_AS(truncate(s, bad), ValidationError);

  // Oversized windows trip the resource cap.
  std::vector<BasisIndex> huge;
  for (std::size_t t = 0; t < kMaxDenseWindow + 1; ++t) huge.push_back(BasisIndex::nat(t));
  CHECK_THROWS_AS(truncate(s, huge), ResourceError);
}
