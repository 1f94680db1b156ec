#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "foelner/defect.hpp"
#include "foelner/operator.hpp"
#include "foelner/operator_spec.hpp"
#include "foelner/projection.hpp"

using namespace foelner;

namespace {

Operator from_json(const std::string& text) { return build_operator(parse_operator_spec(text)); }

Projection nat_interval(int from, int count) {
  std::vector<BasisIndex> v;
  for (int t = 0; t < count; ++t) v.push_back(BasisIndex::nat(from + t));
  return Projection::coordinate(std::move(v));
}

}  // namespace

TEST_CASE("shift against initial intervals hits the closed forms in all three norms") {
  const Operator s = from_json(R"({"type":"unilateral_shift"})");
  for (int n : {2, 5, 16, 100}) {
    const Projection p = nat_interval(0, n);
    const DefectReport hs = hs_defect(s, p);
    CHECK(hs.value == doctest::Approx(1.0 / std::sqrt(double(n))).epsilon(1e-14));
    CHECK(hs.exact);
    CHECK(hs.rank == std::size_t(n));

    const DefectReport tr = trace_defect(s, p);
    CHECK(tr.value == doctest::Approx(1.0 / double(n)).epsilon(1e-14));

    const DefectReport op = opnorm_defect(s, p);
    CHECK(op.value == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("interior intervals feel both boundary crossings") {
  const Operator s = from_json(R"({"type":"unilateral_shift"})");
  const Projection p = nat_interval(3, 5);
  // One entry leaves at the top and one enters from below.
  CHECK(hs_defect(s, p).value == doctest::Approx(std::sqrt(2.0 / 5.0)).epsilon(1e-14));
  CHECK(trace_defect(s, p).value == doctest::Approx(2.0 / 5.0).epsilon(1e-14));
  CHECK(opnorm_defect(s, p).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weighted shift boundary terms scale with the crossing weights") {
  const Operator w =
      from_json(R"({"type":"weighted_shift","weights":[2.0,[0.0,3.0]],"periodic":true})");
  // Interval [0,3): the only escaping entry is w_2 = 2 at position (3,2).
  const Projection p = nat_interval(0, 3);
  CHECK(hs_defect(w, p).value == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-14));
  // Interval [0,2): the escaping weight is w_1 = 3i.
  const Projection q = nat_interval(0, 2);
  CHECK(hs_defect(w, q).value == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("toeplitz band corners count once per band offset") {
  const Operator t = from_json(
      R"({"type":"toeplitz","dim":1,"coeffs":[{"k":[1],"re":1.0},{"k":[-1],"re":1.0}]})");
  for (int n : {4, 9, 50}) {
    const Projection p = nat_interval(0, n);
    CHECK(hs_defect(t, p).value == doctest::Approx(std::sqrt(2.0 / n)).epsilon(1e-13));
    CHECK(trace_defect(t, p).value == doctest::Approx(2.0 / n).epsilon(1e-13));
  }
}

TEST_CASE("word isometries on word balls have exact boundary counts") {
  const Operator s1 = from_json(R"({"type":"cuntz","n":2,"k":1,"depth":8})");
  const Operator s2 = from_json(R"({"type":"cuntz","n":2,"k":2,"depth":8})");
  // Ball of words of length <= 3 has 15 elements; 8 boundary words escape
  // under each isometry and nothing enters.
  const auto [ball, desc] = s1.canonical_interval(15);
  REQUIRE(ball.size() == 15);
  const Projection p = Projection::coordinate(ball);
  const double expected = std::sqrt(8.0 / 15.0);
  CHECK(hs_defect(s1, p).value == doctest::Approx(expected).epsilon(1e-14));
  CHECK(hs_defect(s2, p).value == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("frame and coordinate paths agree on the same projection") {
  const Operator s = from_json(R"({"type":"unilateral_shift"})");
  const Projection p = nat_interval(2, 6);
  const DefectReport a = hs_defect(s, p);
  const DefectReport b = hs_defect(s, p.as_frame());
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-13));
  CHECK(opnorm_defect(s, p).value ==
        doctest::Approx(opnorm_defect(s, p.as_frame()).value).epsilon(1e-12));
}

TEST_CASE("frame defects match a dense reference computation") {
  const Operator s = from_json(R"({"type":"unilateral_shift"})");
  std::vector<BasisIndex> win;
  for (int t = 0; t < 12; ++t) win.push_back(BasisIndex::nat(t));
  // A smooth rank-2 frame supported well inside [0,12).
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(12, 2);
  for (int t = 0; t < 8; ++t) {
    v(t, 0) = std::sin(0.3 * (t + 1.0));
    v(t, 1) = cplx(std::cos(0.2 * t), 0.1 * t);
  }
  const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(v).householderQ() *
                             Eigen::MatrixXcd::Identity(12, 2);
  const Projection p = Projection::frame(win, q);

  // Dense reference on a window that contains the support plus one step.
  std::vector<BasisIndex> big;
  for (int t = 0; t < 13; ++t) big.push_back(BasisIndex::nat(t));
  const DenseWindow dw = truncate(s, big);
  Eigen::MatrixXcd vp = Eigen::MatrixXcd::Zero(13, 2);
  vp.topRows(12) = q;
  const Eigen::MatrixXcd proj = vp * vp.adjoint();
  const Eigen::MatrixXcd comm = dw.matrix * proj - proj * dw.matrix;
  const double expected = comm.norm() / std::sqrt(2.0);

  CHECK(hs_defect(s, p).value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("batch evaluation matches one-at-a-time evaluation") {
  const Operator s = from_json(R"({"type":"unilateral_shift"})");
  std::vector<Projection> ps;
  for (int n : {2, 3, 7}) ps.push_back(nat_interval(0, n));
  const auto batch = defect_batch(s, ps, NormKind::hs);
  REQUIRE(batch.size() == 3);
  for (std::size_t t = 0; t < ps.size(); ++t)
    CHECK(batch[t].value == doctest::Approx(hs_defect(s, ps[t]).value).epsilon(1e-15));
}

TEST_CASE("defect dispatcher routes by norm kind") {
  const Operator s = from_json(R"({"type":"unilateral_shift"})");
  const Projection p = nat_interval(0, 4);
  CHECK(defect(s, p, NormKind::hs).value == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(defect(s, p, NormKind::trace).value == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(defect(s, p, NormKind::op).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(defect(s, p, NormKind::hs).norm_kind == NormKind::hs);
}

TEST_CASE("tensor product defect matches its closed form on boxes") {
  const Operator ss = from_json(
      R"({"type":"tensor","left":{"type":"unilateral_shift"},"right":{"type":"unilateral_shift"}})");
  for (int n : {2, 3, 5}) {
    std::vector<BasisIndex> box;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        box.push_back(BasisIndex::tensor(BasisIndex::nat(a), BasisIndex::nat(b)));
    const Projection p = Projection::coordinate(std::move(box));
    CHECK(hs_defect(ss, p).value ==
          doctest::Approx(std::sqrt(2.0 * n - 1.0) / double(n)).epsilon(1e-13));
  }
}

TEST_CASE("perturbing the operator moves the defect by at most twice the distance") {
  CHECK(operator_perturbation_bound(0.25) == doctest::Approx(0.5));
  const Operator a = from_json(R"({"type":"weighted_shift","weights":[1.0],"periodic":true})");
  const Operator b = from_json(R"({"type":"weighted_shift","weights":[1.1],"periodic":true})");
  for (int n : {3, 6}) {
    const Projection p = nat_interval(0, n);
    const double gap = std::abs(hs_defect(a, p).value - hs_defect(b, p).value);
    CHECK(gap <= operator_perturbation_bound(0.1) + 1e-12);
  }
}
