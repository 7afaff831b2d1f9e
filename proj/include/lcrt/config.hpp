#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "lcrt/maximin.hpp"

namespace lcrt {

using json = nlohmann::json;

enum class SweepAxis { cac, lambda_r, rho1E_max };

std::string axis_name(SweepAxis a);
SweepAxis parse_axis(const std::string& s);

struct SweepSpec {
  SweepAxis axis = SweepAxis::cac;
  std::vector<double> grid;
};

// everything a command needs; serializes back to the same json it was read from
struct RunConfig {
  TrialLayout layout;
  std::optional<IccVector> rho;
  std::optional<IccBox> box;
  EconModel econ;
  BudgetModel budget;
  std::optional<int> I;
  std::optional<int> K;
  std::optional<std::pair<int, int>> search_J;
  std::vector<IccVector> seeds;
  bool verbose = false;
  double deadline_s = 120;
  std::optional<SweepSpec> sweep;

  void validate() const;
  const IccVector& point() const;  // throws when rho is missing
  const IccBox& range() const;     // box, or the point as a singleton box
};

json to_json(const IccVector& r);
IccVector icc_from_json(const json& j, const std::string& path);
json to_json(const IccBox& b);
IccBox box_from_json(const json& j, const std::string& path);
json to_json(const TrialLayout& l);
TrialLayout layout_from_json(const json& j);
json to_json(const EconModel& e);
json to_json(const BudgetModel& b);

json to_json(const RunConfig& c);
RunConfig config_from_json(const json& j);
// merge `over` into `base` key by key, used for config file + flags
void merge_into(json& base, const json& over);

json to_json(const DesignSolution& s);
json to_json(const MaximinSolution& s, bool with_trace);
json to_json(const VarianceReport& r);
json to_json(const EigenSpectrum& s);

json error_json(const std::string& code, const std::string& message, const std::string& field);

// "0.1,0.2" or "lo:hi:step"
std::vector<double> parse_grid(const std::string& s);
// "4..9" or "4"
std::pair<int, int> parse_range(const std::string& s);

}  // namespace lcrt
