#include "jcindex/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <istream>
#include <sstream>

#include "jcindex/censoring.hpp"
#include "jcindex/csv.hpp"
#include "jcindex/error.hpp"
#include "jcindex/parallel.hpp"
#include "jcindex/rng.hpp"

namespace jcindex {

// --- RunConfig ---------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw Error(ErrorCode::InvalidArgument, key + ": not a number: '" + text + "'");
  return v;
}

}  // namespace

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + ": empty key");
    cfg.set(key, trim(t.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path);
  return parse(in);
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::InvalidArgument, "missing setting '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const { return parse_double(key, get(key)); }

std::uint64_t RunConfig::get_uint(const std::string& key) const {
  const std::string& text = get(key);
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::InvalidArgument, key + ": not a nonnegative integer: '" + text + "'");
  }
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::InvalidArgument, key + ": not a boolean: '" + v + "'");
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split(get(key), ',')) out.push_back(parse_double(key, item));
  return out;
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const { return split(get(key), ','); }

// --- command schema ----------------------------------------------------------

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"evaluate",        "fit",        "simulate", "simulate-table1",
                                                 "simulate-table2", "rank-variables"};
  return names;
}

const std::vector<std::pair<std::string, std::string>>& command_defaults(const std::string& command) {
  using Defaults = std::vector<std::pair<std::string, std::string>>;
  static const std::map<std::string, Defaults> table = {
      {"evaluate",
       {{"data", ""},
        {"model", "exp"},
        {"model_file", ""},
        {"quantile", "0.75"},
        {"horizon", ""},
        {"estimator", "auto"},
        {"tie_credit", "false"},
        {"censored_comparators", "false"},
        {"bootstrap", "0"},
        {"level", "0.95"},
        {"seed", "1"},
        {"max_iter", "100"},
        {"tol", "1e-8"}}},
      {"fit", {{"data", ""}, {"max_iter", "100"}, {"tol", "1e-8"}}},
      {"simulate",
       {{"design", "exp"},
        {"n", "1000"},
        {"seed", "1"},
        {"censoring", "0"},
        {"lambda0", ""},
        {"beta0", "0"},
        {"lambda1", "1"},
        {"lambda2", "2"},
        {"beta1", "1"},
        {"beta2", "1"}}},
      {"simulate-table1",
       {{"censoring", "0.5,0.75"},
        {"sizes", "1000,5000"},
        {"replicates", "100"},
        {"beta0", "0"},
        {"quantile", "0.75"},
        {"seed", "1"}}},
      {"simulate-table2", {{"n", "100000"}, {"quantile", "0.75"}, {"seed", "1"}, {"max_iter", "100"}, {"tol", "1e-8"}}},
      {"rank-variables",
       {{"data", ""},
        {"methods", "stepwise_cr,stepwise_lumped"},
        {"quantile", "0.75"},
        {"horizon", ""},
        {"folds", "0"},
        {"seed", "1"},
        {"max_iter", "100"},
        {"tol", "1e-8"}}},
  };
  const auto it = table.find(command);
  if (it == table.end()) throw Error(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
  return it->second;
}

namespace {
const std::vector<std::pair<std::string, std::string>> kCommon = {{"threads", "0"}, {"output", ""}, {"format", "json"}};
}

RunConfig resolve_config(const std::string& command, const RunConfig& given) {
  const auto& defaults = command_defaults(command);
  RunConfig out;
  for (const auto& [k, v] : defaults) out.set(k, v);
  for (const auto& [k, v] : kCommon) out.set(k, v);
  for (const auto& [k, v] : given.values()) {
    if (!out.has(k)) throw Error(ErrorCode::InvalidArgument, "unknown setting '" + k + "' for " + command);
    out.set(k, v);
  }
  if (out.has("data") && out.get("data").empty()) {
    throw Error(ErrorCode::InvalidArgument, command + " needs a data file (data=...)");
  }
  const std::string& format = out.get("format");
  if (format != "json" && format != "table") throw Error(ErrorCode::InvalidArgument, "format must be json or table");
  return out;
}

// --- studies -----------------------------------------------------------------

EfficiencyReport efficiency_study(const EfficiencyOptions& options) {
  if (options.replicates < 2) throw Error(ErrorCode::InvalidArgument, "the study needs at least 2 replicates");
  EfficiencyReport report;
  const ExpModel model;
  std::uint64_t config_index = 0;
  for (double censoring : options.censoring) {
    SynthConfig base;
    base.beta0 = options.beta0;
    if (censoring < 0.0 || censoring >= 1.0) throw Error(ErrorCode::InvalidArgument, "censoring must lie in [0, 1)");
    base.lambda0 = censoring > 0.0 ? calibrate_censoring_rate(censoring, base) : 0.0;
    const double horizon = population_time_quantile(base, options.quantile);
    const double truth = true_jc_integral(model, base, horizon).joint_concordance;

    for (std::size_t n : options.sizes) {
      const std::uint64_t config_seed = derive_seed(options.seed, config_index++);
      std::vector<std::optional<double>> estimates(options.replicates);
      std::vector<std::string> failure(options.replicates);
      parallel_chunks(options.replicates, 1, [&](std::size_t r, std::size_t, std::size_t) {
        SynthConfig cfg = base;
        cfg.n = n;
        cfg.seed = derive_seed(config_seed, r);
        try {
          const Dataset ds = generate(cfg);
          const ScoreTable scores(ds, model, horizon);
          estimates[r] = evaluate_weighted(ds, scores, fit_km_censoring(ds), options.metric).joint_concordance;
        } catch (const Error& e) {
          failure[r] = e.name();
        }
      });

      EfficiencyRow row;
      row.censoring = censoring;
      row.beta0 = options.beta0;
      row.n = n;
      row.lambda0 = base.lambda0;
      row.horizon = horizon;
      row.true_jc = truth;
      row.replicates = options.replicates;
      std::map<std::string, std::size_t> reasons;
      for (std::size_t r = 0; r < options.replicates; ++r) {
        if (estimates[r]) {
          row.estimates.push_back(*estimates[r]);
        } else {
          ++reasons[failure[r]];
        }
      }
      row.failures.assign(reasons.begin(), reasons.end());
      row.used = row.estimates.size();
      if (row.used > 0) {
        const auto m = static_cast<double>(row.used);
        double sum = 0.0;
        for (double e : row.estimates) sum += e;
        row.mean_estimate = sum / m;
        double ss = 0.0, sq = 0.0;
        std::vector<double> abs_err;
        for (double e : row.estimates) {
          ss += (e - row.mean_estimate) * (e - row.mean_estimate);
          sq += (e - truth) * (e - truth);
          abs_err.push_back(std::fabs(e - truth));
        }
        row.bias = row.mean_estimate - truth;
        row.se = std::sqrt(ss / m);
        row.rmse = std::sqrt(sq / m);
        row.median_abs_error = empirical_quantile(abs_err, 0.5);
      } else {
        row.mean_estimate = row.bias = row.se = row.rmse = row.median_abs_error =
            std::numeric_limits<double>::quiet_NaN();
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

ComparisonTable model_comparison(const ComparisonOptions& options) {
  SynthConfig cfg;
  cfg.n = options.n;
  cfg.seed = options.seed;
  const Dataset ds = generate(cfg);
  ComparisonTable table;
  table.horizon = evaluation_horizon(ds, options.quantile);
  const ExpModel exp_model;
  table.rows.push_back({"EXP", evaluate_uncensored(ds, ScoreTable(ds, exp_model, table.horizon))});
  table.csc.emplace(fit_cause_specific(ds, options.fit));
  table.rows.push_back({"CSC", evaluate_uncensored(ds, ScoreTable(ds, *table.csc, table.horizon))});
  return table;
}

json to_json(const EfficiencyReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j;
    j["model"] = row.model;
    j["censoring"] = row.censoring;
    j["beta0"] = row.beta0;
    j["n"] = row.n;
    j["lambda0"] = row.lambda0;
    j["horizon"] = row.horizon;
    j["true_jc"] = row.true_jc;
    j["replicates"] = row.replicates;
    j["used"] = row.used;
    j["failures"] = json::object();
    for (const auto& [name, count] : row.failures) j["failures"][name] = count;
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    j["mean_estimate"] = num(row.mean_estimate);
    j["rmse"] = num(row.rmse);
    j["se"] = num(row.se);
    j["bias"] = num(row.bias);
    j["median_abs_error"] = num(row.median_abs_error);
    j["estimates"] = row.estimates;
    rows.push_back(std::move(j));
  }
  return json{{"rows", std::move(rows)}};
}

json to_json(const ComparisonTable& t) {
  json j;
  j["horizon"] = t.horizon;
  j["rows"] = json::array();
  for (const auto& row : t.rows) {
    json r;
    r["model"] = row.model;
    r["concordance_per_event"] = to_json(row.report)["concordance_per_event"];
    r["accuracy"] = to_json(row.report)["accuracy"];
    r["joint_concordance"] = row.report.joint_concordance;
    r["conditional_concordance"] = to_json(row.report)["conditional_concordance"];
    r["accuracy_star"] = row.report.accuracy_star;
    r["report"] = to_json(row.report);
    j["rows"].push_back(std::move(r));
  }
  if (t.csc) {
    json coef = json::array();
    for (const auto& c : t.csc->causes()) coef.push_back(c.coefficients);
    j["csc_coefficients"] = std::move(coef);
  }
  return j;
}

// --- commands ----------------------------------------------------------------

namespace {

FitOptions fit_options(const RunConfig& c) {
  FitOptions f;
  f.max_iter = static_cast<int>(c.get_uint("max_iter"));
  f.tol = c.get_double("tol");
  return f;
}

double horizon_of(const RunConfig& c, const Dataset& ds) {
  if (!c.get("horizon").empty()) return c.get_double("horizon");
  return evaluation_horizon(ds, c.get_double("quantile"));
}

json config_json(const RunConfig& c) {
  json j = json::object();
  for (const auto& [k, v] : c.values()) j[k] = v;
  return j;
}

json cmd_evaluate(const RunConfig& c) {
  const Dataset ds = read_csv_file(c.get("data"));
  const double t = horizon_of(c, ds);
  MetricOptions mo;
  mo.tie_credit = c.get_bool("tie_credit");
  mo.censored_comparators = c.get_bool("censored_comparators");

  std::unique_ptr<RiskModel> model;
  const std::string& name = c.get("model");
  if (name == "exp") {
    model = std::make_unique<ExpModel>();
  } else if (name == "csc") {
    if (!c.get("model_file").empty()) {
      std::ifstream in(c.get("model_file"));
      if (!in) throw Error(ErrorCode::IoError, "cannot open model file " + c.get("model_file"));
      json doc;
      try {
        in >> doc;
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("model file: ") + e.what());
      }
      // Either the model document itself or a whole `fit` artifact.
      if (doc.is_object() && doc.contains("result") && doc.contains("command")) doc = doc["result"];
      model = std::make_unique<CauseSpecificPH>(cause_specific_from_json(doc));
    } else {
      model = std::make_unique<CauseSpecificPH>(fit_cause_specific(ds, fit_options(c)));
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "model must be exp or csc");
  }
  if (model->n_event_types() != ds.n_event_types()) {
    throw Error(ErrorCode::DimensionMismatch, "model has " + std::to_string(model->n_event_types()) +
                                                  " event types, data has " + std::to_string(ds.n_event_types()));
  }

  const std::string& est = c.get("estimator");
  bool weighted = false;
  if (est == "auto") {
    weighted = ds.has_censoring();
  } else if (est == "weighted") {
    weighted = true;
  } else if (est != "uncensored") {
    throw Error(ErrorCode::InvalidArgument, "estimator must be auto, weighted or uncensored");
  }

  const ScoreTable scores(ds, *model, t);
  MetricReport report = weighted ? evaluate_weighted(ds, scores, fit_km_censoring(ds), mo)
                                 : evaluate_uncensored(ds, scores, mo);
  const auto b = c.get_uint("bootstrap");
  if (b > 0) {
    BootstrapOptions bo;
    bo.replicates = b;
    bo.level = c.get_double("level");
    bo.seed = c.get_uint("seed");
    bo.weighted = weighted;
    bo.metric = mo;
    report.bootstrap_ci = bootstrap_all(ds, scores, bo);
  }
  json r;
  r["model"] = name;
  r["estimator"] = weighted ? "weighted" : "uncensored";
  r["n"] = ds.size();
  r["n_censored"] = ds.n_censored();
  r["report"] = to_json(report);
  return r;
}

json cmd_fit(const RunConfig& c) {
  const Dataset ds = read_csv_file(c.get("data"));
  return to_json(fit_cause_specific(ds, fit_options(c)));
}

json cmd_simulate(const RunConfig& c) {
  if (c.get("output").empty()) throw Error(ErrorCode::InvalidArgument, "simulate needs output=<csv path>");
  const std::string& design = c.get("design");
  const auto n = static_cast<std::size_t>(c.get_uint("n"));
  const std::uint64_t seed = c.get_uint("seed");
  json r;
  r["design"] = design;
  Dataset ds = [&] {
    if (design == "exp") {
      SynthConfig cfg;
      cfg.lambda1 = c.get_double("lambda1");
      cfg.lambda2 = c.get_double("lambda2");
      cfg.beta1 = c.get_double("beta1");
      cfg.beta2 = c.get_double("beta2");
      cfg.beta0 = c.get_double("beta0");
      cfg.n = n;
      cfg.seed = seed;
      if (!c.get("lambda0").empty()) {
        cfg.lambda0 = c.get_double("lambda0");
      } else if (c.get_double("censoring") > 0.0) {
        cfg.lambda0 = calibrate_censoring_rate(c.get_double("censoring"), cfg);
      }
      r["lambda0"] = cfg.lambda0;
      r["expected_censoring"] = censoring_fraction(cfg);
      return generate(cfg);
    }
    if (design == "event_specific") {
      LinearDesign d = event_specific_design();
      if (!c.get("lambda0").empty()) d.censoring_rate = c.get_double("lambda0");
      r["lambda0"] = d.censoring_rate;
      return generate_linear(d, n, seed);
    }
    if (design == "random_risk") return generate_random_risk_cohort(n, seed);
    throw Error(ErrorCode::InvalidArgument, "design must be exp, event_specific or random_risk");
  }();
  write_csv_file(c.get("output"), ds);
  r["n"] = ds.size();
  r["n_censored"] = ds.n_censored();
  r["path"] = c.get("output");
  return r;
}

json cmd_table1(const RunConfig& c) {
  EfficiencyOptions o;
  o.censoring = c.get_doubles("censoring");
  o.sizes.clear();
  for (double s : c.get_doubles("sizes")) {
    if (!(s >= 2.0) || s != std::floor(s)) throw Error(ErrorCode::InvalidArgument, "sizes must be integers >= 2");
    o.sizes.push_back(static_cast<std::size_t>(s));
  }
  o.replicates = c.get_uint("replicates");
  o.beta0 = c.get_double("beta0");
  o.quantile = c.get_double("quantile");
  o.seed = c.get_uint("seed");
  return to_json(efficiency_study(o));
}

json cmd_table2(const RunConfig& c) {
  ComparisonOptions o;
  o.n = c.get_uint("n");
  o.quantile = c.get_double("quantile");
  o.seed = c.get_uint("seed");
  o.fit = fit_options(c);
  return to_json(model_comparison(o));
}

json cmd_rank(const RunConfig& c) {
  const Dataset ds = read_csv_file(c.get("data"));
  const double t = horizon_of(c, ds);
  RankOptions o;
  o.fit = fit_options(c);
  o.folds = c.get_uint("folds");
  o.seed = c.get_uint("seed");
  json r;
  r["horizon"] = t;
  r["rankings"] = json::array();
  const auto methods = c.get_list("methods");
  if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "methods list is empty");
  for (const auto& m : methods) r["rankings"].push_back(to_json(rank_variables(parse_method(m), ds, t, o)));
  return r;
}

std::string fmt(const json& v, int width = 9) {
  char buf[64];
  if (v.is_number()) {
    std::snprintf(buf, sizeof buf, "%*.4f", width, v.get<double>());
  } else {
    std::snprintf(buf, sizeof buf, "%*s", width, v.is_string() ? v.get<std::string>().c_str() : "-");
  }
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

json run_command(const std::string& command, const RunConfig& resolved) {
  const auto threads = resolved.get_uint("threads");
  if (threads > 0) set_worker_count(static_cast<unsigned>(threads));
  json result;
  if (command == "evaluate") {
    result = cmd_evaluate(resolved);
  } else if (command == "fit") {
    result = cmd_fit(resolved);
  } else if (command == "simulate") {
    result = cmd_simulate(resolved);
  } else if (command == "simulate-table1") {
    result = cmd_table1(resolved);
  } else if (command == "simulate-table2") {
    result = cmd_table2(resolved);
  } else if (command == "rank-variables") {
    result = cmd_rank(resolved);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
  }
  json artifact;
  artifact["command"] = command;
  artifact["config"] = config_json(resolved);
  artifact["result"] = std::move(result);
  return artifact;
}

std::string render_table(const json& artifact) {
  const std::string command = artifact.at("command");
  const json& r = artifact.at("result");
  std::ostringstream out;
  if (command == "simulate-table2") {
    out << "horizon " << fmt(r.at("horizon"), 0) << "\n";
    out << pad("model", 6) << fmt("C1") << fmt("C2") << fmt("A") << fmt("JC") << fmt("CC") << fmt("ACC*") << "\n";
    for (const auto& row : r.at("rows")) {
      out << pad(row.at("model"), 6) << fmt(row.at("concordance_per_event")[0]) << fmt(row.at("concordance_per_event")[1])
          << fmt(row.at("accuracy")) << fmt(row.at("joint_concordance")) << fmt(row.at("conditional_concordance"))
          << fmt(row.at("accuracy_star")) << "\n";
    }
  } else if (command == "simulate-table1") {
    out << pad("model", 6) << fmt("cens", 6) << fmt("n", 7) << fmt("true_jc") << fmt("mean") << fmt("RMSE")
        << fmt("SE") << fmt("Bias") << fmt("used", 6) << "\n";
    for (const auto& row : r.at("rows")) {
      char nbuf[32], ubuf[32];
      std::snprintf(nbuf, sizeof nbuf, "%7zu", row.at("n").get<std::size_t>());
      std::snprintf(ubuf, sizeof ubuf, "%6zu", row.at("used").get<std::size_t>());
      out << pad(row.at("model"), 6) << fmt(row.at("censoring"), 6) << nbuf << fmt(row.at("true_jc"))
          << fmt(row.at("mean_estimate")) << fmt(row.at("rmse")) << fmt(row.at("se")) << fmt(row.at("bias")) << ubuf
          << "\n";
    }
  } else if (command == "rank-variables") {
    const auto& rankings = r.at("rankings");
    std::vector<std::vector<std::string>> columns;
    std::size_t width = 8;
    for (const auto& ranking : rankings) {
      std::vector<std::pair<int, std::string>> by_rank;
      for (const auto& e : ranking.at("entries")) by_rank.emplace_back(e.at("rank").get<int>(), e.at("covariate"));
      std::sort(by_rank.begin(), by_rank.end());
      std::vector<std::string> col{ranking.at("method")};
      for (const auto& [rank, name] : by_rank) col.push_back(name);
      for (const auto& s : col) width = std::max(width, s.size() + 2);
      columns.push_back(std::move(col));
    }
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t i = 0; i < rows; ++i) {
      out << pad(i == 0 ? "rank" : std::to_string(i), 6);
      for (const auto& col : columns) out << pad(i < col.size() ? col[i] : "", width);
      out << "\n";
    }
  } else if (command == "evaluate") {
    const json& rep = r.at("report");
    out << "horizon " << fmt(rep.at("horizon"), 0) << "  estimator " << r.at("estimator").get<std::string>() << "\n";
    const auto& c = rep.at("concordance_per_event");
    for (std::size_t k = 0; k < c.size(); ++k) out << pad("C(t," + std::to_string(k + 1) + ")", 26) << fmt(c[k]) << "\n";
    out << pad("accuracy", 26) << fmt(rep.at("accuracy")) << "\n";
    out << pad("joint_concordance", 26) << fmt(rep.at("joint_concordance")) << "\n";
    out << pad("conditional_concordance", 26) << fmt(rep.at("conditional_concordance")) << "\n";
    out << pad("accuracy_star", 26) << fmt(rep.at("accuracy_star")) << "\n";
  }
  return out.str();
}

}  // namespace jcindex
