#include "foelner/cli.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "foelner/defect.hpp"
#include "foelner/errors.hpp"
#include "foelner/operator.hpp"
#include "foelner/operator_spec.hpp"
#include "foelner/probe.hpp"
#include "foelner/projection.hpp"
#include "foelner/schemes.hpp"
#include "foelner/verify.hpp"
#include "json.hpp"

namespace foelner::cli {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* bool_str(bool b) { return b ? "true" : "false"; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in '" + path + "': " + e.what());
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output path '" + path + "'");
  out << text;
  if (!out) throw ResourceError("failed writing output to '" + path + "'");
}

// Operator files hold either one spec document or an array of them (an
// operator family sharing one index sort).
std::vector<Operator> load_operator_file(const std::string& path) {
  const json doc = parse_json_file(path);
  std::vector<Operator> ops;
  if (doc.is_array()) {
    if (doc.empty()) throw ValidationError("operator file '" + path + "' holds an empty array");
    for (const auto& el : doc) ops.push_back(build_operator(parse_operator_spec_json(&el)));
  } else {
    ops.push_back(build_operator(parse_operator_spec_json(&doc)));
  }
  for (std::size_t i = 1; i < ops.size(); ++i)
    if (ops[i].sort() != ops[0].sort())
      throw ValidationError("operator file '" + path +
                            "': family members use different index sorts (" + ops[0].sort().str() +
                            " vs " + ops[i].sort().str() + ")");
  return ops;
}

std::uint64_t parse_u64_token(const std::string& tok, const std::string& what) {
  std::uint64_t v = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ValidationError("cannot parse " + what + " '" + tok + "' as a nonnegative integer");
  return v;
}

// Rank list syntax: comma-separated entries, each a number or an inclusive
// range a..b.
std::vector<std::size_t> parse_ranks(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const auto dots = tok.find("..");
    if (dots == std::string::npos) {
      out.push_back(static_cast<std::size_t>(parse_u64_token(tok, "rank")));
    } else {
      const std::uint64_t a = parse_u64_token(tok.substr(0, dots), "rank range start");
      const std::uint64_t b = parse_u64_token(tok.substr(dots + 2), "rank range end");
      if (a > b) throw ValidationError("rank range '" + tok + "' runs backwards");
      if (b - a >= 100000) throw ValidationError("rank range '" + tok + "' is unreasonably long");
      for (std::uint64_t r = a; r <= b; ++r) out.push_back(static_cast<std::size_t>(r));
    }
  }
  if (out.empty()) throw ValidationError("empty rank list '" + text + "'");
  for (std::size_t r : out)
    if (r == 0) throw ValidationError("ranks must be >= 1");
  return out;
}

// Ambient window resolution: --ambient N takes the first N canonical
// indices; --ambient-depth D covers all words shorter than D so that the
// one-step closure stays exact.
std::vector<BasisIndex> resolve_ambient(const Operator& op, std::size_t ambient,
                                        std::size_t ambient_depth) {
  if ((ambient > 0) == (ambient_depth > 0))
    throw ValidationError("exactly one of --ambient and --ambient-depth is required");
  if (ambient > 0) return op.canonical_window(ambient);
  if (op.sort().kind() != IndexKind::Word)
    throw ValidationError("--ambient-depth applies only to word-indexed operators (sort is " +
                          op.sort().str() + ")");
  const auto n = static_cast<std::uint64_t>(op.sort().word_alphabet());
  std::uint64_t count = 0;
  std::uint64_t level = 1;
  for (std::size_t d = 0; d < ambient_depth; ++d) {
    count += level;
    if (count > kMaxDenseWindow)
      throw ValidationError("--ambient-depth " + std::to_string(ambient_depth) +
                            " exceeds the dense window cap");
    level *= n;
  }
  return op.canonical_window(static_cast<std::size_t>(count));
}

// JSON config files: {"schema_version":1, "<long-option>":value, ...}.
// Values apply only where the command line stayed silent.
class ConfigSink {
 public:
  void attach(CLI::App* sub) { sub_ = sub; }

  template <class T>
  void bind(const std::string& key, T& var) {
    appliers_.push_back([this, key, &var](const json& j) {
      if (!j.contains(key)) return;
      if (sub_->count("--" + key) > 0) return;
      try {
        var = j.at(key).get<T>();
      } catch (const json::exception&) {
        throw ValidationError("config key '" + key + "' has the wrong type");
      }
    });
    known_.push_back(key);
  }

  void apply(const std::string& path) const {
    if (path.empty()) return;
    const json j = parse_json_file(path);
    if (!j.is_object()) throw ValidationError("config file '" + path + "' must hold an object");
    if (!j.contains("schema_version") || j.at("schema_version") != 1)
      throw ValidationError("config file '" + path + "' needs \"schema_version\": 1");
    for (const auto& [key, value] : j.items()) {
      (void)value;
      if (key == "schema_version" || key == "subcommand") continue;
      if (std::find(known_.begin(), known_.end(), key) == known_.end())
        throw ValidationError("config file '" + path + "' has unknown key '" + key + "'");
    }
    if (j.contains("subcommand") && j.at("subcommand") != sub_->get_name())
      throw ValidationError("config file '" + path + "' targets subcommand '" +
                            j.at("subcommand").get<std::string>() + "', not '" +
                            sub_->get_name() + "'");
    for (const auto& fn : appliers_) fn(j);
  }

 private:
  CLI::App* sub_ = nullptr;
  std::vector<std::function<void(const json&)>> appliers_;
  std::vector<std::string> known_;
};

std::string header_comment(const json& cfg) {
  return std::string("# ") + kToolName + " " + kVersion + "\n# config: " + cfg.dump() + "\n";
}

json output_skeleton(const json& cfg) {
  return json{{"schema_version", 1}, {"tool", kToolName}, {"version", kVersion}, {"config", cfg}};
}

void check_format(const std::string& format) {
  if (format != "csv" && format != "json")
    throw ValidationError("unknown format '" + format + "' (expected csv or json)");
}

// Required settings may arrive through a flag or a config file, so the
// presence check runs after the config has been applied.
void require_option(const std::string& value, const char* flag) {
  if (value.empty())
    throw ValidationError(std::string(flag) + " is required (flag or config key)");
}

struct CommonOut {
  std::string output;
  std::string format = "csv";
  std::string config_path;
};

void add_common(CLI::App* sub, CommonOut& c, ConfigSink& sink, const char* default_format) {
  c.format = default_format;
  sub->add_option("-o,--output", c.output, "Output path (stdout when omitted)");
  sub->add_option("--format", c.format, "Output format: csv or json");
  sub->add_option("--config", c.config_path, "JSON config file mirroring the long options");
  sink.attach(sub);
  sink.bind("output", c.output);
  sink.bind("format", c.format);
}

// ---------------------------------------------------------------- defect --

struct DefectArgs {
  std::string operator_path;
  std::string projection_path;
  std::string norm = "hs";
  CommonOut out;
};

int run_defect(const DefectArgs& a, const json& cfg) {
  const std::vector<Operator> ops = load_operator_file(a.operator_path);
  if (ops.size() != 1)
    throw ValidationError("the defect subcommand takes a single operator, not a family");
  const Operator& op = ops.front();
  const IndexSort sort = op.sort();
  const json pj = parse_json_file(a.projection_path);
  const Projection p = projection_from_json_ptr(&pj, &sort);

  NormKind kind;
  if (a.norm == "hs")
    kind = NormKind::hs;
  else if (a.norm == "trace")
    kind = NormKind::trace;
  else if (a.norm == "op")
    kind = NormKind::op;
  else
    throw ValidationError("unknown norm '" + a.norm + "' (expected hs, trace, or op)");

  const DefectReport rep = defect(op, p, kind);
  if (a.out.format == "csv") {
    std::ostringstream os;
    os << header_comment(cfg);
    os << "value,error_bound,exact,norm_kind,rank,ambient_size\n";
    os << fmt(rep.value) << ',' << fmt(rep.error_bound) << ',' << bool_str(rep.exact) << ','
       << a.norm << ',' << rep.rank << ',' << rep.ambient_size << '\n';
    emit(a.out.output, os.str());
  } else {
    json doc = output_skeleton(cfg);
    doc["rows"] = json::array({json{{"value", rep.value},
                                    {"error_bound", rep.error_bound},
                                    {"exact", rep.exact},
                                    {"norm_kind", a.norm},
                                    {"rank", rep.rank},
                                    {"ambient_size", rep.ambient_size}}});
    emit(a.out.output, doc.dump() + "\n");
  }
  return 0;
}

// -------------------------------------------------------------- sequence --

struct SequenceArgs {
  std::string operator_path;
  std::string scheme = "interval";
  std::string ranks_text;
  std::string side = "left";
  bool with_op = true;
  CommonOut out;
};

int run_sequence(const SequenceArgs& a, const json& cfg) {
  const std::vector<Operator> ops = load_operator_file(a.operator_path);
  if (ops.size() != 1)
    throw ValidationError("the sequence subcommand takes a single operator, not a family");
  const Operator& op = ops.front();
  const std::vector<std::size_t> ranks = parse_ranks(a.ranks_text);

  std::vector<SequenceRecord> records;
  if (a.scheme == "interval") {
    records = interval_sequence(op, ranks, a.with_op);
  } else if (a.scheme == "tensor") {
    const auto* ts = std::get_if<TensorSpec>(&op.spec().node);
    if (!ts) throw ValidationError("scheme 'tensor' needs a tensor-product operator");
    const Operator left = build_operator(ts->left);
    const Operator right = build_operator(ts->right);
    records = tensor_sequence(op, interval_sequence(left, ranks, a.with_op),
                              interval_sequence(right, ranks, a.with_op));
  } else if (a.scheme == "lift") {
    const auto* ds = std::get_if<DirectSumSpec>(&op.spec().node);
    if (!ds) throw ValidationError("scheme 'lift' needs a direct-sum operator");
    int side = 0;
    if (a.side == "left")
      side = 0;
    else if (a.side == "right")
      side = 1;
    else
      throw ValidationError("unknown side '" + a.side + "' (expected left or right)");
    const Operator inner = build_operator(side == 0 ? ds->left : ds->right);
    records = lift_direct_sum(op, interval_sequence(inner, ranks, a.with_op), side);
  } else {
    throw ValidationError("unknown scheme '" + a.scheme +
                          "' (expected interval, tensor, or lift)");
  }

  if (a.out.format == "csv") {
    std::ostringstream os;
    os << header_comment(cfg);
    os << "step,rank,hs_defect,op_defect,certified_bound,scheme\n";
    for (const auto& r : records) {
      os << r.step << ',' << r.rank << ',' << fmt(r.hs_defect) << ',';
      if (r.op_defect) os << fmt(*r.op_defect);
      os << ',';
      if (r.certified_bound) os << fmt(*r.certified_bound);
      os << ',' << r.scheme << '\n';
    }
    emit(a.out.output, os.str());
  } else {
    json doc = output_skeleton(cfg);
    json rows = json::array();
    for (const auto& r : records) {
      json row{{"step", r.step}, {"rank", r.rank}, {"hs_defect", r.hs_defect},
               {"scheme", r.scheme}};
      row["op_defect"] = r.op_defect ? json(*r.op_defect) : json(nullptr);
      row["certified_bound"] = r.certified_bound ? json(*r.certified_bound) : json(nullptr);
      rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    emit(a.out.output, doc.dump() + "\n");
  }
  return 0;
}

// ----------------------------------------------------------------- probe --

struct ProbeArgs {
  std::string operators_path;
  std::string ranks_text;
  std::size_t ambient = 0;
  std::size_t ambient_depth = 0;
  int restarts = 16;
  int iters = 60;
  std::uint64_t seed = 0;
  bool emit_projections = false;
  CommonOut out;
};

int run_probe(const ProbeArgs& a, const json& cfg) {
  if (a.emit_projections && a.out.format != "json")
    throw ValidationError("--emit-projections requires --format json");
  const std::vector<Operator> ops = load_operator_file(a.operators_path);
  const std::vector<std::size_t> ranks = parse_ranks(a.ranks_text);
  const std::vector<BasisIndex> ambient = resolve_ambient(ops.front(), a.ambient, a.ambient_depth);
  const Budget budget{a.restarts, a.iters};

  std::vector<ProbeResult> curve;
  curve.reserve(ranks.size());
  for (std::size_t rank : ranks) {
    curve.push_back(minimize_defect(ops, rank, ambient, budget, a.seed));
    std::fprintf(stderr, "probe rank %zu: best %.6g\n", rank, curve.back().best_value);
  }

  if (a.out.format == "csv") {
    std::ostringstream os;
    os << header_comment(cfg);
    os << "rank,best_value,restarts,converged,seed\n";
    for (const auto& r : curve)
      os << r.rank << ',' << fmt(r.best_value) << ',' << r.restarts << ','
         << bool_str(r.converged) << ',' << r.seed << '\n';
    emit(a.out.output, os.str());
  } else {
    json doc = output_skeleton(cfg);
    json rows = json::array();
    for (const auto& r : curve) {
      json row{{"rank", r.rank},
               {"best_value", r.best_value},
               {"restarts", r.restarts},
               {"converged", r.converged},
               {"seed", r.seed}};
      if (a.emit_projections) row["best_projection"] = json::parse(projection_to_json_text(r.best));
      rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    emit(a.out.output, doc.dump() + "\n");
  }
  return 0;
}

// -------------------------------------------------------------- classify --

struct ClassifyArgs {
  std::string operators_path;
  std::size_t max_rank = 16;
  std::size_t ambient = 256;
  double tol = 1e-8;
  int restarts = 4;
  int iters = 40;
  std::uint64_t seed = 1;
  CommonOut out;
};

int run_classify(const ClassifyArgs& a, const json& cfg) {
  const std::vector<Operator> ops = load_operator_file(a.operators_path);
  ClassifyParams params;
  params.max_rank = a.max_rank;
  params.ambient_size = a.ambient;
  params.reducing_tol = a.tol;
  params.budget = Budget{a.restarts, a.iters};
  params.seed = a.seed;
  const ClassificationReport rep = classify(ops, params);
  std::fprintf(stderr, "classify: cell %s\n", cell_name(rep.cell));

  const std::size_t ell = rep.reducing.found ? rep.reducing.rank : 0;
  if (a.out.format == "csv") {
    std::ostringstream os;
    os << header_comment(cfg);
    os << "# cell: " << cell_name(rep.cell) << "\n";
    os << "# ell_estimate: " << ell << "\n";
    os << "# scale: " << fmt(rep.scale) << "\n";
    os << "# evidence: " << rep.evidence << "\n";
    os << "rank,best_value\n";
    for (const auto& [rank, value] : rep.curve) os << rank << ',' << fmt(value) << '\n';
    emit(a.out.output, os.str());
  } else {
    json doc = output_skeleton(cfg);
    doc["cell"] = cell_name(rep.cell);
    doc["ell_estimate"] = ell;
    doc["scale"] = rep.scale;
    doc["evidence"] = rep.evidence;
    json curve = json::array();
    for (const auto& [rank, value] : rep.curve) curve.push_back(json::array({rank, value}));
    doc["epsilon_curve"] = std::move(curve);
    json red{{"found", rep.reducing.found},
             {"rank", rep.reducing.rank},
             {"method", rep.reducing.method}};
    red["residual"] = std::isfinite(rep.reducing.residual) ? json(rep.reducing.residual)
                                                           : json(nullptr);
    doc["reducing"] = std::move(red);
    emit(a.out.output, doc.dump() + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------- verify --

struct VerifyArgs {
  std::string suite;
  int trials = 100;
  int dim = 0;      // 0 = per-suite default
  int dim_b = 0;    // tensor only; 0 = same as dim
  int s = 2;
  std::uint64_t seed = 0;
  std::string operator_path;  // trace_hs only
  std::string ranks_text;     // trace_hs only
  CommonOut out;
};

int run_verify(const VerifyArgs& a, const json& cfg) {
  SuiteReport rep;
  std::vector<TraceHsRow> rows;
  bool trace_suite = false;
  if (a.suite == "perturbation") {
    rep = check_perturbation_bound(a.trials, a.dim ? a.dim : 24, a.seed);
  } else if (a.suite == "sum_projections") {
    rep = check_sum_projections(a.trials, a.dim ? a.dim : 32, a.s, a.seed);
  } else if (a.suite == "tensor") {
    const int da = a.dim ? a.dim : 8;
    rep = check_tensor_bound(a.trials, da, a.dim_b ? a.dim_b : da, a.seed);
  } else if (a.suite == "trace_hs") {
    if (a.operator_path.empty() || a.ranks_text.empty())
      throw ValidationError("suite trace_hs needs --operator and --ranks");
    const std::vector<Operator> ops = load_operator_file(a.operator_path);
    if (ops.size() != 1) throw ValidationError("suite trace_hs takes a single operator");
    TraceHsReport tr = check_trace_hs_equivalence(ops.front(), parse_ranks(a.ranks_text));
    rep = tr.report;
    rep.seed = a.seed;
    rows = std::move(tr.rows);
    trace_suite = true;
  } else {
    throw ValidationError("unknown suite '" + a.suite +
                          "' (expected perturbation, sum_projections, tensor, or trace_hs)");
  }
  std::fprintf(stderr, "verify %s: %d trials, %d violations\n", rep.suite.c_str(), rep.trials,
               rep.violations);

  if (a.out.format == "csv") {
    std::ostringstream os;
    os << header_comment(cfg);
    if (trace_suite) {
      os << "# " << suite_report_json(rep) << "\n";
      os << "rank,hs_defect,trace_defect\n";
      for (const auto& r : rows)
        os << r.rank << ',' << fmt(r.hs) << ',' << fmt(r.trace) << '\n';
    } else {
      os << "suite,trials,violations,worst_margin,seed\n";
      os << rep.suite << ',' << rep.trials << ',' << rep.violations << ','
         << fmt(rep.worst_margin) << ',' << rep.seed << '\n';
    }
    emit(a.out.output, os.str());
  } else {
    json doc = output_skeleton(cfg);
    doc["report"] = json{{"suite", rep.suite},
                         {"trials", rep.trials},
                         {"violations", rep.violations},
                         {"worst_margin", rep.worst_margin},
                         {"seed", rep.seed}};
    if (trace_suite) {
      json jr = json::array();
      for (const auto& r : rows)
        jr.push_back(json{{"rank", r.rank}, {"hs_defect", r.hs}, {"trace_defect", r.trace}});
      doc["rows"] = std::move(jr);
    }
    emit(a.out.output, doc.dump() + "\n");
  }
  return rep.violations > 0 ? 3 : 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Numerical laboratory for commutator defects of structured operators",
               kToolName};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);

  DefectArgs defect_args;
  ConfigSink defect_sink;
  auto* defect_sub = app.add_subcommand("defect", "Defect of one operator against one projection");
  defect_sub->add_option("--operator", defect_args.operator_path, "Operator spec JSON file");
  defect_sub->add_option("--projection", defect_args.projection_path, "Projection JSON file");
  defect_sub->add_option("--norm", defect_args.norm, "Norm: hs, trace, or op");
  add_common(defect_sub, defect_args.out, defect_sink, "csv");
  defect_sink.bind("operator", defect_args.operator_path);
  defect_sink.bind("projection", defect_args.projection_path);
  defect_sink.bind("norm", defect_args.norm);

  SequenceArgs seq_args;
  ConfigSink seq_sink;
  auto* seq_sub = app.add_subcommand("sequence", "Structured projection sequences and defects");
  seq_sub->add_option("--operator", seq_args.operator_path, "Operator spec JSON file");
  seq_sub->add_option("--scheme", seq_args.scheme, "Scheme: interval, tensor, or lift");
  seq_sub->add_option("--ranks", seq_args.ranks_text, "Ranks, e.g. 4,16,64 or 1..32");
  seq_sub->add_option("--side", seq_args.side, "Direct-sum side for lift: left or right");
  seq_sub->add_flag("--with-op,!--no-with-op", seq_args.with_op,
                    "Also compute operator-norm defects");
  add_common(seq_sub, seq_args.out, seq_sink, "csv");
  seq_sink.bind("operator", seq_args.operator_path);
  seq_sink.bind("scheme", seq_args.scheme);
  seq_sink.bind("ranks", seq_args.ranks_text);
  seq_sink.bind("side", seq_args.side);
  seq_sink.bind("with-op", seq_args.with_op);

  ProbeArgs probe_args;
  ConfigSink probe_sink;
  auto* probe_sub = app.add_subcommand("probe", "Minimize defects over frames of given ranks");
  probe_sub->add_option("--operators", probe_args.operators_path,
                        "Operator spec JSON file (single or family array)");
  probe_sub->add_option("--ranks", probe_args.ranks_text, "Ranks, e.g. 1..32");
  probe_sub->add_option("--ambient", probe_args.ambient, "Ambient window size");
  probe_sub->add_option("--ambient-depth", probe_args.ambient_depth,
                        "Ambient word depth (word-indexed operators)");
  probe_sub->add_option("--restarts", probe_args.restarts, "Random restarts per rank");
  probe_sub->add_option("--iters", probe_args.iters, "Descent iterations per restart");
  probe_sub->add_option("--seed", probe_args.seed, "Random seed");
  probe_sub->add_flag("--emit-projections", probe_args.emit_projections,
                      "Include best projections in JSON output");
  add_common(probe_sub, probe_args.out, probe_sink, "csv");
  probe_sink.bind("operators", probe_args.operators_path);
  probe_sink.bind("ranks", probe_args.ranks_text);
  probe_sink.bind("ambient", probe_args.ambient);
  probe_sink.bind("ambient-depth", probe_args.ambient_depth);
  probe_sink.bind("restarts", probe_args.restarts);
  probe_sink.bind("iters", probe_args.iters);
  probe_sink.bind("seed", probe_args.seed);

  ClassifyArgs classify_args;
  ConfigSink classify_sink;
  auto* classify_sub = app.add_subcommand("classify", "Heuristic cell classification");
  classify_sub->add_option("--operators", classify_args.operators_path,
                           "Operator spec JSON file (single or family array)");
  classify_sub->add_option("--max-rank", classify_args.max_rank, "Reducing-subspace rank cap");
  classify_sub->add_option("--ambient", classify_args.ambient, "Ambient window size");
  classify_sub->add_option("--tol", classify_args.tol, "Reducing residual tolerance");
  classify_sub->add_option("--restarts", classify_args.restarts, "Random restarts per rank");
  classify_sub->add_option("--iters", classify_args.iters, "Descent iterations per restart");
  classify_sub->add_option("--seed", classify_args.seed, "Random seed");
  add_common(classify_sub, classify_args.out, classify_sink, "json");
  classify_sink.bind("operators", classify_args.operators_path);
  classify_sink.bind("max-rank", classify_args.max_rank);
  classify_sink.bind("ambient", classify_args.ambient);
  classify_sink.bind("tol", classify_args.tol);
  classify_sink.bind("restarts", classify_args.restarts);
  classify_sink.bind("iters", classify_args.iters);
  classify_sink.bind("seed", classify_args.seed);

  VerifyArgs verify_args;
  ConfigSink verify_sink;
  auto* verify_sub = app.add_subcommand("verify", "Randomized property suites");
  verify_sub->add_option("--suite", verify_args.suite,
                         "Suite: perturbation, sum_projections, tensor, or trace_hs");
  verify_sub->add_option("--trials", verify_args.trials, "Trial count");
  verify_sub->add_option("--dim", verify_args.dim, "Matrix dimension (suite default if omitted)");
  verify_sub->add_option("--dim-b", verify_args.dim_b, "Second tensor factor dimension");
  verify_sub->add_option("--s", verify_args.s, "Family size for sum_projections");
  verify_sub->add_option("--seed", verify_args.seed, "Random seed");
  verify_sub->add_option("--operator", verify_args.operator_path,
                         "Operator spec JSON file (trace_hs)");
  verify_sub->add_option("--ranks", verify_args.ranks_text, "Ranks for trace_hs");
  add_common(verify_sub, verify_args.out, verify_sink, "csv");
  verify_sink.bind("suite", verify_args.suite);
  verify_sink.bind("trials", verify_args.trials);
  verify_sink.bind("dim", verify_args.dim);
  verify_sink.bind("dim-b", verify_args.dim_b);
  verify_sink.bind("s", verify_args.s);
  verify_sink.bind("seed", verify_args.seed);
  verify_sink.bind("operator", verify_args.operator_path);
  verify_sink.bind("ranks", verify_args.ranks_text);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (defect_sub->parsed()) {
      defect_sink.apply(defect_args.out.config_path);
      require_option(defect_args.operator_path, "--operator");
      require_option(defect_args.projection_path, "--projection");
      check_format(defect_args.out.format);
      const json cfg{{"schema_version", 1},          {"subcommand", "defect"},
                     {"operator", defect_args.operator_path},
                     {"projection", defect_args.projection_path},
                     {"norm", defect_args.norm},     {"format", defect_args.out.format}};
      return run_defect(defect_args, cfg);
    }
    if (seq_sub->parsed()) {
      seq_sink.apply(seq_args.out.config_path);
      require_option(seq_args.operator_path, "--operator");
      require_option(seq_args.ranks_text, "--ranks");
      check_format(seq_args.out.format);
      const json cfg{{"schema_version", 1},
                     {"subcommand", "sequence"},
                     {"operator", seq_args.operator_path},
                     {"scheme", seq_args.scheme},
                     {"ranks", parse_ranks(seq_args.ranks_text)},
                     {"side", seq_args.side},
                     {"with_op", seq_args.with_op},
                     {"format", seq_args.out.format}};
      return run_sequence(seq_args, cfg);
    }
    if (probe_sub->parsed()) {
      probe_sink.apply(probe_args.out.config_path);
      require_option(probe_args.operators_path, "--operators");
      require_option(probe_args.ranks_text, "--ranks");
      check_format(probe_args.out.format);
      const json cfg{{"schema_version", 1},
                     {"subcommand", "probe"},
                     {"operators", probe_args.operators_path},
                     {"ranks", parse_ranks(probe_args.ranks_text)},
                     {"ambient", probe_args.ambient},
                     {"ambient_depth", probe_args.ambient_depth},
                     {"restarts", probe_args.restarts},
                     {"iters", probe_args.iters},
                     {"seed", probe_args.seed},
                     {"format", probe_args.out.format}};
      return run_probe(probe_args, cfg);
    }
    if (classify_sub->parsed()) {
      classify_sink.apply(classify_args.out.config_path);
      require_option(classify_args.operators_path, "--operators");
      check_format(classify_args.out.format);
      const json cfg{{"schema_version", 1},
                     {"subcommand", "classify"},
                     {"operators", classify_args.operators_path},
                     {"max_rank", classify_args.max_rank},
                     {"ambient", classify_args.ambient},
                     {"tol", classify_args.tol},
                     {"restarts", classify_args.restarts},
                     {"iters", classify_args.iters},
                     {"seed", classify_args.seed},
                     {"format", classify_args.out.format}};
      return run_classify(classify_args, cfg);
    }
    if (verify_sub->parsed()) {
      verify_sink.apply(verify_args.out.config_path);
      require_option(verify_args.suite, "--suite");
      check_format(verify_args.out.format);
      json cfg{{"schema_version", 1}, {"subcommand", "verify"},
               {"suite", verify_args.suite},
               {"trials", verify_args.trials},
               {"seed", verify_args.seed},
               {"format", verify_args.out.format}};
      if (verify_args.dim) cfg["dim"] = verify_args.dim;
      if (verify_args.dim_b) cfg["dim_b"] = verify_args.dim_b;
      if (verify_args.suite == "sum_projections") cfg["s"] = verify_args.s;
      if (verify_args.suite == "trace_hs") {
        cfg["operator"] = verify_args.operator_path;
        cfg["ranks"] = verify_args.ranks_text.empty() ? json(nullptr)
                                                      : json(parse_ranks(verify_args.ranks_text));
      }
      return run_verify(verify_args, cfg);
    }
    throw ValidationError("no subcommand selected");
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "%s: %s\n", kToolName, e.what());
    return 2;
  } catch (const CertifiedBoundError& e) {
    std::fprintf(stderr, "%s: certified bound violated: %s\n", kToolName, e.what());
    return 3;
  } catch (const ResourceError& e) {
    std::fprintf(stderr, "%s: resource limit: %s\n", kToolName, e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: error: %s\n", kToolName, e.what());
    return 1;
  }
}

}  // namespace foelner::cli
