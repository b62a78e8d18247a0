#include "jcindex/serialize.hpp"

#include <cmath>

#include "jcindex/error.hpp"

namespace jcindex {
namespace {

json optional_number(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

json to_json(const Tally& t) {
  json j;
  j["numerator"] = t.numerator;
  j["denominator"] = t.denominator;
  return j;
}

json to_json(const PairCounts& c) {
  json j;
  j["concordance"] = json::array();
  for (const auto& t : c.concordance) j["concordance"].push_back(to_json(t));
  j["accuracy"] = to_json(c.accuracy);
  j["joint_concordance"] = to_json(c.joint_concordance);
  j["conditional_concordance"] = to_json(c.conditional_concordance);
  j["accuracy_star"] = to_json(c.accuracy_star);
  return j;
}

json to_json(const Interval& iv) {
  json j;
  j["estimate"] = number(iv.estimate);
  j["lower"] = number(iv.lower);
  j["upper"] = number(iv.upper);
  j["level"] = iv.level;
  j["replicates"] = iv.replicates;
  j["used"] = iv.used;
  j["skipped"] = iv.skipped;
  j["skip_reasons"] = json::object();
  for (const auto& [reason, count] : iv.skip_reasons) j["skip_reasons"][reason] = count;
  return j;
}

json to_json(const MetricReport& r) {
  json j;
  j["horizon"] = r.horizon;
  j["concordance_per_event"] = json::array();
  for (const auto& c : r.concordance_per_event) j["concordance_per_event"].push_back(optional_number(c));
  j["accuracy"] = optional_number(r.accuracy);
  j["joint_concordance"] = r.joint_concordance;
  j["conditional_concordance"] = optional_number(r.conditional_concordance);
  j["accuracy_star"] = r.accuracy_star;
  j["pair_counts"] = to_json(r.pair_counts);
  if (r.bootstrap_ci) {
    json ci = json::object();
    for (const auto& [name, iv] : *r.bootstrap_ci) ci[name] = to_json(iv);
    j["bootstrap_ci"] = std::move(ci);
  } else {
    j["bootstrap_ci"] = nullptr;
  }
  return j;
}

json to_json(const PopulationMetrics& m) {
  json j;
  j["horizon"] = m.horizon;
  j["concordance_per_event"] = m.concordance_per_event;
  j["accuracy"] = m.accuracy;
  j["joint_concordance"] = m.joint_concordance;
  j["conditional_concordance"] = number(m.conditional_concordance);
  j["accuracy_star"] = m.accuracy_star;
  j["error_bound"] = m.error_bound;
  return j;
}

json to_json(const RankingResult& r) {
  json j;
  j["method"] = method_name(r.method);
  j["horizon"] = r.horizon;
  j["baseline_metric"] = optional_number(r.baseline_metric);
  j["entries"] = json::array();
  for (const auto& e : r.entries) {
    json row;
    row["covariate"] = e.covariate;
    row["round"] = e.round;
    row["rank"] = e.rank;
    row["metric"] = optional_number(e.metric);
    row["delta"] = optional_number(e.delta);
    j["entries"].push_back(std::move(row));
  }
  j["failures"] = json::array();
  for (const auto& f : r.failures) {
    j["failures"].push_back({{"round", f.round}, {"covariate", f.covariate}, {"error", f.error}, {"message", f.message}});
  }
  j["warnings"] = r.warnings;
  return j;
}

json to_json(const CauseSpecificPH& m) {
  json j;
  j["model"] = "csc";
  j["covariate_names"] = m.covariate_names();
  j["means"] = m.means();
  j["causes"] = json::array();
  for (const auto& c : m.causes()) {
    json cj;
    cj["event"] = c.event;
    cj["coefficients"] = c.coefficients;
    cj["log_likelihood"] = c.log_likelihood;
    cj["iterations"] = c.iterations;
    cj["baseline"] = {{"time", c.baseline_times}, {"cumulative_hazard", c.baseline_cumhaz}};
    j["causes"].push_back(std::move(cj));
  }
  return j;
}

CauseSpecificPH cause_specific_from_json(const json& j) {
  try {
    if (j.value("model", "") != "csc") throw Error(ErrorCode::ParseError, "not a cause-specific model document");
    std::vector<CauseFit> causes;
    for (const auto& cj : j.at("causes")) {
      CauseFit c;
      c.event = cj.at("event").get<EventCode>();
      c.coefficients = cj.at("coefficients").get<std::vector<double>>();
      c.log_likelihood = cj.value("log_likelihood", 0.0);
      c.iterations = cj.value("iterations", 0);
      c.baseline_times = cj.at("baseline").at("time").get<std::vector<double>>();
      c.baseline_cumhaz = cj.at("baseline").at("cumulative_hazard").get<std::vector<double>>();
      causes.push_back(std::move(c));
    }
    for (std::size_t k = 0; k < causes.size(); ++k) {
      if (causes[k].event != static_cast<EventCode>(k + 1)) {
        throw Error(ErrorCode::ParseError, "causes must be listed as events 1..K");
      }
    }
    return CauseSpecificPH(j.at("covariate_names").get<std::vector<std::string>>(),
                           j.at("means").get<std::vector<double>>(), std::move(causes));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model document: ") + e.what());
  }
}

json error_json(const std::exception& e) {
  json j;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["error"] = err->name();
    switch (error_category(err->code())) {
      case ErrorCategory::usage:
        j["category"] = "usage";
        break;
      case ErrorCategory::data:
        j["category"] = "data";
        break;
      case ErrorCategory::numerical:
        j["category"] = "numerical";
        break;
    }
  } else {
    j["error"] = "InternalError";
    j["category"] = "numerical";
  }
  j["message"] = e.what();
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace jcindex
