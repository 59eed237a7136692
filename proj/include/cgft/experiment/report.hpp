#pragma once

#include "cgft/experiment/experiment.hpp"

#include <string>

namespace cgft::experiment {

/// Row label as printed in the results table.
std::string method_label(recognizer::FusionMethod method);

/// Fixed-width text table: one row per method with Avg. Pre., Avg. Rec.,
/// Avg. F-Score and Acc. as percentages with two decimals, the validation
/// fitness and the weights, followed by the per-model rows.
std::string format_report_table(const ExperimentReport& report);

/// The same content as JSON with full-precision values.
std::string format_report_json(const ExperimentReport& report);

} // namespace cgft::experiment
