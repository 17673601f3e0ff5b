#pragma once

// Scenario files: YAML with plant, pattern, gains, sim and outputs sections.

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "declq/declq.hpp"

namespace declq::cli {

/// Malformed scenario text or a scenario invariant violation.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GainMode { None, Given, Synthesize };

struct GainSpec {
  GainMode mode = GainMode::None;
  std::vector<Matrix> L;  ///< Given
  std::uint64_t seed = 0; ///< Synthesize
  double margin = 0.02;
};

enum class Output { TraceCsv, ReportText, MatricesDump };

struct Scenario {
  std::string name;
  PlantModel plant;
  InformationPattern pattern = InformationPattern::Private;
  GainSpec gains;
  std::vector<Vector> xhat0;  ///< empty means zeros
  int horizon = 60;
  double epsilon = 1e-3;
  std::set<Output> outputs{Output::TraceCsv, Output::ReportText};
};

Scenario parse_scenario(const std::string& text, const std::string& name = "scenario");
Scenario load_scenario(const std::string& path);

/// Throws ScenarioError if the pattern, gains and dimensions disagree.
void check_scenario(const Scenario& s);

}  // namespace declq::cli
