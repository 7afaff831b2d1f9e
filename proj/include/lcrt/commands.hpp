#pragma once

#include <string>

#include "lcrt/config.hpp"

namespace lcrt {

// single source of truth for cli and http: same config in, same json out
json cmd_variance(const RunConfig& c);
json cmd_power(const RunConfig& c);
json cmd_lod(const RunConfig& c);
json cmd_mmd(const RunConfig& c);
json cmd_sweep(const RunConfig& c);

// body: {rho | box, J, K}; result carries "ok" and the per-constraint report
json validate_icc_report(const json& body);

json run_command(const std::string& name, const RunConfig& c);

// rendering of a command result
std::string render(const json& result, const std::string& format);

// apply one sweep value to a copy of the config
RunConfig sweep_point(const RunConfig& c, SweepAxis axis, double value);

}  // namespace lcrt
