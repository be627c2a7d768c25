#pragma once

#include <string>
#include <vector>

#include "uavrl/env.hpp"

namespace uavrl {

/// Top-down (x, y) view of a flight log: the flown path as a polyline
/// and one reference chord per segment (class "ref"). Deterministic
/// bytes for identical input. Throws std::invalid_argument on an empty
/// log.
std::string svg_flight(const std::vector<TickRow>& log);

/// Simple line plot of (x, y) series. Throws on empty input.
std::string svg_curve(const std::vector<double>& x, const std::vector<double>& y,
                      const std::string& x_label, const std::string& y_label);

}  // namespace uavrl
