#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "smallgain/smallgain.hpp"

namespace smallgain::cli {

using Json = nlohmann::ordered_json;

/// Gain in the config grammar, e.g. {"linear": 0.75}.
Json gain_json(const GainFunction& gain);
Json interval_json(const Interval& iv);
Json certificate_json(const Certificate& cert);
Json validation_json(const ValidationReport& report, double spread_limit);
Json decrease_json(const VerificationReport& report, const Interval& target, const Interval& inputs);
Json stage_gain_json(std::size_t stage, const Interval& inputs, const StageGain& sg);

/// `t,x1,...,xn,omega` with `#` echo lines before the header.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& echo);

/// Shortest text that round-trips the double.
std::string format_number(double v);

/// Writes through a sibling temporary and renames on success.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace smallgain::cli
