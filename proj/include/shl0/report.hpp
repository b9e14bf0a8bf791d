#pragma once

#include <string>

#include <json.hpp>

#include "shl0/dataset.hpp"
#include "shl0/screen.hpp"
#include "shl0/search.hpp"
#include "shl0/sim.hpp"

namespace shl0 {

nlohmann::json model_to_json(const ModelAlpha& alpha);

/// Selection report body: coefficients by name, fit statistics, per-round
/// screen sets and per-restart objectives.  `kappa_value` is what produced
/// lambda (or lambda * n when lambda was given directly).
nlohmann::json selection_to_json(const SelectionResult<double>& sel, const Dataset<double>& data,
                                 double null_deviance, double kappa_value);

nlohmann::json screen_to_json(const ScreenResult<double>& sr, const Dataset<double>& data,
                              int top = 0);

/// JSON report for a simulation run.  Timing is deliberately excluded so
/// that equal seeds give byte-identical files; it lives in the text table.
nlohmann::json sim_report_to_json(const SimReport& report);

/// Aligned text table with the aggregate rates plus timing.
std::string sim_report_table(const SimReport& report);

void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace shl0
