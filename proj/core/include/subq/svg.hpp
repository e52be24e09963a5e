#pragma once

#include <string>
#include <vector>

#include "subq/contact_center.hpp"

namespace subq {

/// Horizontal bar chart of per-submodel importance scores.
std::string bar_chart_svg(const std::vector<std::string>& labels,
                          const std::vector<double>& values,
                          const std::string& title);

/// Per-epoch whisker plot: SU and no-SU intervals with the observed and
/// ground-truth means overlaid.
std::string epoch_whisker_svg(const std::vector<EpochSummary>& epochs,
                              const std::string& title);

}  // namespace subq
