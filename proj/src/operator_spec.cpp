#include "foelner/operator_spec.hpp"

#include <cmath>
#include <sstream>

#include "foelner/errors.hpp"
#include "json.hpp"

namespace foelner {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

double finite_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "non-finite number");
  return v;
}

std::int64_t int_field(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail(where, "missing field '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

// Complex values appear either as a bare number, as [re, im], or as
// {"re": ..., "im": ...}.
cplx complex_value(const json& j, const std::string& where) {
  if (j.is_number()) return cplx(finite_number(j, where), 0.0);
  if (j.is_array()) {
    if (j.size() != 2) fail(where, "complex array form needs exactly [re, im]");
    return cplx(finite_number(j[0], where + "[0]"), finite_number(j[1], where + "[1]"));
  }
  if (j.is_object()) {
    if (!j.contains("re")) fail(where, "missing field 're'");
    const double re = finite_number(j.at("re"), where + ".re");
    const double im = j.contains("im") ? finite_number(j.at("im"), where + ".im") : 0.0;
    return cplx(re, im);
  }
  fail(where, "expected number, [re, im] or {re, im}");
}

constexpr int kMaxNesting = 64;

SpecPtr parse_node(const json& j, const std::string& where, int depth);

SpecPtr parse_child(const json& j, const std::string& key, const std::string& where, int depth) {
  if (!j.contains(key)) fail(where, "missing field '" + key + "'");
  return parse_node(j.at(key), where + "." + key, depth + 1);
}

SpecPtr parse_node(const json& j, const std::string& where, int depth) {
  if (depth > kMaxNesting) fail(where, "nesting exceeds depth " + std::to_string(kMaxNesting));
  if (!j.is_object()) fail(where, "expected an object");
  if (!j.contains("type")) fail(where, "missing field 'type'");
  const json& tj = j.at("type");
  if (!tj.is_string()) fail(where + ".type", "expected a string");
  const std::string type = tj.get<std::string>();

  if (type == "unilateral_shift") return make_spec(UnilateralShiftSpec{});
  if (type == "bilateral_shift") return make_spec(BilateralShiftSpec{});

  if (type == "weighted_shift") {
    WeightedShiftSpec s;
    if (!j.contains("weights")) fail(where, "missing field 'weights'");
    const json& w = j.at("weights");
    if (!w.is_array() || w.empty()) fail(where + ".weights", "expected a nonempty array");
    for (std::size_t i = 0; i < w.size(); ++i)
      s.weights.push_back(complex_value(w[i], where + ".weights[" + std::to_string(i) + "]"));
    if (j.contains("periodic")) {
      if (!j.at("periodic").is_boolean()) fail(where + ".periodic", "expected a boolean");
      s.periodic = j.at("periodic").get<bool>();
    }
    return make_spec(std::move(s));
  }

  if (type == "toeplitz") {
    ToeplitzSpec s;
    s.dim = static_cast<int>(int_field(j, "dim", where));
    if (s.dim != 1 && s.dim != 2) fail(where + ".dim", "must be 1 or 2");
    if (!j.contains("coeffs")) fail(where, "missing field 'coeffs'");
    const json& cs = j.at("coeffs");
    if (!cs.is_array() || cs.empty()) fail(where + ".coeffs", "expected a nonempty array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string cw = where + ".coeffs[" + std::to_string(i) + "]";
      const json& c = cs[i];
      if (!c.is_object() || !c.contains("k")) fail(cw, "expected {k, re, im}");
      const json& k = c.at("k");
      if (!k.is_array() || k.size() != static_cast<std::size_t>(s.dim))
        fail(cw + ".k", "expected an array of length " + std::to_string(s.dim));
      std::array<std::int64_t, 2> key{0, 0};
      for (int d = 0; d < s.dim; ++d) {
        if (!k[d].is_number_integer()) fail(cw + ".k", "expected integers");
        key[d] = k[d].get<std::int64_t>();
      }
      const cplx v = complex_value(c, cw);
      if (s.coeffs.count(key)) fail(cw + ".k", "duplicate offset");
      if (v != cplx(0.0, 0.0)) s.coeffs[key] = v;
    }
    if (s.coeffs.empty()) fail(where + ".coeffs", "all coefficients are zero");
    return make_spec(std::move(s));
  }

  if (type == "band_limited") {
    BandLimitedSpec s;
    s.band = int_field(j, "band", where);
    if (s.band < 0) fail(where + ".band", "must be >= 0");
    if (!j.contains("entries")) fail(where, "missing field 'entries'");
    const json& es = j.at("entries");
    if (!es.is_array()) fail(where + ".entries", "expected an array");
    for (std::size_t t = 0; t < es.size(); ++t) {
      const std::string ew = where + ".entries[" + std::to_string(t) + "]";
      const json& e = es[t];
      if (!e.is_object()) fail(ew, "expected {i, j, re, im}");
      const std::int64_t i = int_field(e, "i", ew);
      const std::int64_t jj = int_field(e, "j", ew);
      if (std::llabs(i - jj) > s.band)
        fail(ew, "entry (" + std::to_string(i) + "," + std::to_string(jj) +
                     ") outside declared band " + std::to_string(s.band));
      if (i < 0 || jj < 0) s.bilateral = true;
      const cplx v = complex_value(e, ew);
      const auto key = std::make_pair(i, jj);
      if (s.entries.count(key)) fail(ew, "duplicate entry position");
      if (v != cplx(0.0, 0.0)) s.entries[key] = v;
    }
    return make_spec(std::move(s));
  }

  if (type == "acute_wedge") {
    AcuteWedgeSpec s;
    if (!j.contains("reach")) fail(where, "missing field 'reach'");
    const json& g = j.at("reach");
    if (!g.is_array() || g.empty()) fail(where + ".reach", "expected a nonempty array");
    for (std::size_t t = 0; t < g.size(); ++t) {
      if (!g[t].is_number_integer() || g[t].get<std::int64_t>() < 0)
        fail(where + ".reach[" + std::to_string(t) + "]", "expected an integer >= 0");
      s.reach.push_back(g[t].get<std::int64_t>());
    }
    if (!j.contains("entries")) fail(where, "missing field 'entries'");
    const json& es = j.at("entries");
    if (!es.is_array()) fail(where + ".entries", "expected an array");
    for (std::size_t t = 0; t < es.size(); ++t) {
      const std::string ew = where + ".entries[" + std::to_string(t) + "]";
      const json& e = es[t];
      if (!e.is_object()) fail(ew, "expected {i, j, re, im}");
      const std::int64_t i = int_field(e, "i", ew);
      const std::int64_t jj = int_field(e, "j", ew);
      if (i < 0 || jj < 0) fail(ew, "indices must be >= 0");
      const std::int64_t lo = std::min(i, jj);
      const std::int64_t allowed =
          lo < static_cast<std::int64_t>(s.reach.size()) ? s.reach[lo] : s.reach.back();
      if (std::llabs(i - jj) > allowed)
        fail(ew, "entry exceeds reach " + std::to_string(allowed) + " at offset " +
                     std::to_string(lo));
      const cplx v = complex_value(e, ew);
      const auto key = std::make_pair(i, jj);
      if (s.entries.count(key)) fail(ew, "duplicate entry position");
      if (v != cplx(0.0, 0.0)) s.entries[key] = v;
    }
    return make_spec(std::move(s));
  }

  if (type == "cuntz") {
    CuntzSpec s;
    s.n = static_cast<int>(int_field(j, "n", where));
    if (s.n < 2) fail(where + ".n", "must be >= 2");
    s.k = static_cast<int>(int_field(j, "k", where));
    if (s.k < 1 || s.k > s.n) fail(where + ".k", "must lie in [1, n]");
    s.depth = static_cast<int>(int_field(j, "depth", where));
    if (s.depth < 1 || s.depth > 24) fail(where + ".depth", "must lie in [1, 24]");
    return make_spec(std::move(s));
  }

  if (type == "tensor") {
    TensorSpec s;
    s.left = parse_child(j, "left", where, depth);
    s.right = parse_child(j, "right", where, depth);
    return make_spec(std::move(s));
  }

  if (type == "direct_sum") {
    DirectSumSpec s;
    s.left = parse_child(j, "left", where, depth);
    s.right = parse_child(j, "right", where, depth);
    return make_spec(std::move(s));
  }

  if (type == "affine") {
    AffineSpec s;
    if (!j.contains("lambda")) fail(where, "missing field 'lambda'");
    s.lambda = complex_value(j.at("lambda"), where + ".lambda");
    if (!j.contains("mu")) fail(where, "missing field 'mu'");
    s.mu = complex_value(j.at("mu"), where + ".mu");
    s.inner = parse_child(j, "inner", where, depth);
    return make_spec(std::move(s));
  }

  if (type == "adjoint") {
    AdjointSpec s;
    s.inner = parse_child(j, "inner", where, depth);
    return make_spec(std::move(s));
  }

  if (type == "dense") {
    DenseSpec s;
    if (!j.contains("matrix")) fail(where, "missing field 'matrix'");
    const json& m = j.at("matrix");
    if (!m.is_array() || m.empty()) fail(where + ".matrix", "expected a nonempty array of rows");
    const std::size_t n = m.size();
    for (std::size_t r = 0; r < n; ++r) {
      const std::string rw = where + ".matrix[" + std::to_string(r) + "]";
      if (!m[r].is_array() || m[r].size() != n) fail(rw, "matrix must be square");
      std::vector<cplx> row;
      for (std::size_t c = 0; c < n; ++c)
        row.push_back(complex_value(m[r][c], rw + "[" + std::to_string(c) + "]"));
      s.matrix.push_back(std::move(row));
    }
    return make_spec(std::move(s));
  }

  fail(where + ".type", "unknown operator type '" + type + "'");
}

json complex_json(const cplx& v) { return json{{"re", v.real()}, {"im", v.imag()}}; }

json node_to_json(const OperatorSpec& spec);

json child_json(const SpecPtr& p) { return node_to_json(*p); }

json node_to_json(const OperatorSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, UnilateralShiftSpec>)
          return json{{"type", "unilateral_shift"}};
        else if constexpr (std::is_same_v<T, BilateralShiftSpec>)
          return json{{"type", "bilateral_shift"}};
        else if constexpr (std::is_same_v<T, WeightedShiftSpec>) {
          json w = json::array();
          for (const auto& v : s.weights) w.push_back(complex_json(v));
          return json{{"type", "weighted_shift"}, {"weights", w}, {"periodic", s.periodic}};
        } else if constexpr (std::is_same_v<T, ToeplitzSpec>) {
          json cs = json::array();
          for (const auto& [k, v] : s.coeffs) {
            json kk = json::array();
            for (int d = 0; d < s.dim; ++d) kk.push_back(k[d]);
            cs.push_back(json{{"k", kk}, {"re", v.real()}, {"im", v.imag()}});
          }
          return json{{"type", "toeplitz"}, {"dim", s.dim}, {"coeffs", cs}};
        } else if constexpr (std::is_same_v<T, BandLimitedSpec>) {
          json es = json::array();
          for (const auto& [k, v] : s.entries)
            es.push_back(json{
                {"i", k.first}, {"j", k.second}, {"re", v.real()}, {"im", v.imag()}});
          return json{{"type", "band_limited"}, {"band", s.band}, {"entries", es}};
        } else if constexpr (std::is_same_v<T, AcuteWedgeSpec>) {
          json es = json::array();
          for (const auto& [k, v] : s.entries)
            es.push_back(json{
                {"i", k.first}, {"j", k.second}, {"re", v.real()}, {"im", v.imag()}});
          return json{{"type", "acute_wedge"}, {"reach", s.reach}, {"entries", es}};
        } else if constexpr (std::is_same_v<T, CuntzSpec>)
          return json{{"type", "cuntz"}, {"n", s.n}, {"k", s.k}, {"depth", s.depth}};
        else if constexpr (std::is_same_v<T, TensorSpec>)
          return json{{"type", "tensor"}, {"left", child_json(s.left)},
                      {"right", child_json(s.right)}};
        else if constexpr (std::is_same_v<T, DirectSumSpec>)
          return json{{"type", "direct_sum"}, {"left", child_json(s.left)},
                      {"right", child_json(s.right)}};
        else if constexpr (std::is_same_v<T, AffineSpec>)
          return json{{"type", "affine"}, {"lambda", complex_json(s.lambda)},
                      {"mu", complex_json(s.mu)}, {"inner", child_json(s.inner)}};
        else if constexpr (std::is_same_v<T, AdjointSpec>)
          return json{{"type", "adjoint"}, {"inner", child_json(s.inner)}};
        else if constexpr (std::is_same_v<T, DenseSpec>) {
          json m = json::array();
          for (const auto& row : s.matrix) {
            json r = json::array();
            for (const auto& v : row) r.push_back(json::array({v.real(), v.imag()}));
            m.push_back(r);
          }
          return json{{"type", "dense"}, {"matrix", m}};
        }
      },
      spec.node);
}

}  // namespace

SpecPtr make_spec(SpecNode node) {
  auto p = std::make_shared<OperatorSpec>();
  p->node = std::move(node);
  return p;
}

SpecPtr parse_operator_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("operator spec: invalid JSON: ") + e.what());
  }
  return parse_node(j, "operator", 0);
}

SpecPtr parse_operator_spec_json(const void* json_value) {
  return parse_node(*static_cast<const json*>(json_value), "operator", 0);
}

std::string spec_to_json(const OperatorSpec& spec) { return node_to_json(spec).dump(); }

}  // namespace foelner
