#pragma once

#include <string>
#include <vector>

#include "ccbf/result_io.hpp"

namespace ccbf {

struct PlotOptions {
  /// Dotted line per node in the state panel; omitted when empty.
  std::vector<double> thresholds;
  /// Dashed line per distinct value in the control panel; omitted when empty.
  std::vector<double> control_limits;
  std::string title;
};

/// Two stacked 960x480 panels: states over time, controls over time.
/// A single-row table is drawn as points. Throws ResultFormatError when
/// the table has no rows.
std::string plot_svg(const ResultTable& table, const PlotOptions& opts = {});

}  // namespace ccbf
