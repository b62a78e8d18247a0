#pragma once

#include <json.hpp>
#include <string>

#include "jcindex/metrics.hpp"
#include "jcindex/models.hpp"
#include "jcindex/synth.hpp"
#include "jcindex/varimp.hpp"

namespace jcindex {

using json = nlohmann::ordered_json;

// Field order follows the struct declarations; undefined values are null.
json to_json(const Tally& t);
json to_json(const PairCounts& c);
json to_json(const Interval& iv);
json to_json(const MetricReport& r);
json to_json(const PopulationMetrics& m);
json to_json(const RankingResult& r);

// Coefficients, centring means and the Breslow step function per cause.
json to_json(const CauseSpecificPH& m);
CauseSpecificPH cause_specific_from_json(const json& j);

json error_json(const std::exception& e);

// Two-space indent plus trailing newline.
std::string dump(const json& j);

}  // namespace jcindex
