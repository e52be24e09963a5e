#pragma once

#include <string>
#include <vector>

#include "subq/contact_center.hpp"
#include "subq/factorial.hpp"
#include "subq/stats.hpp"
#include "subq/synthetic.hpp"
#include "subq/tree.hpp"
#include "subq/twin.hpp"

namespace subq {

// JSON (pretty-printed, stable key order) and CSV builders for everything the
// CLI emits. All CSV uses ',' separators, '.' decimals, LF endings; floats are
// printed with %.17g so files round-trip and are byte-stable across runs.

std::string format_double(double v);

std::string importance_to_json(const ImportanceReport& report,
                               const std::vector<std::string>& names);
std::string quantile_ci_to_json(const QuantileCI& ci);
std::string interval_to_json(const Interval& ci);
std::string bias_to_json(const StateAverageBias& bias);

/// One row per scenario: scenario,coverage,mean_width,width_se.
std::string table1_csv(const std::vector<std::string>& scenarios,
                       const std::vector<CoverageResult>& results);

/// mask bits + bias/variance/mc_se per factorial cell.
std::string factorial_csv(const FactorialStudyResult& result,
                          const std::vector<std::string>& names);

/// submodel,vrf,var_single,var_bagged.
std::string vrf_csv(const VrfResult& result,
                    const std::vector<std::string>& names);

/// Mean single/bagged importance scores across macro-reps, as JSON.
std::string importance_summary_json(const ImportanceExperimentResult& result,
                                    const std::vector<std::string>& names);

/// epoch,observed,truth_mean,truth_se,nosu_lower,nosu_upper,su_lower,su_upper.
std::string epoch_ci_csv(const std::vector<EpochSummary>& epochs);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace subq
