#pragma once

// Scenario pipeline: validate, DARE, gains, simulation, cost certificate.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "declq/declq.hpp"
#include "scenario.hpp"

namespace declq::cli {

enum ExitCode : int { Success = 0, ValidationFailure = 1, CertificationFailure = 2, IoOrParseError = 3 };

/// Command-line values that replace the scenario's own.
struct Overrides {
  std::optional<int> horizon;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<InformationPattern> pattern;
};

struct RunReport {
  std::string scenario;
  InformationPattern pattern = InformationPattern::StateFeedback;
  std::vector<Diagnostic> diagnostics;
  Matrix K;
  Matrix P;
  double closed_loop_radius = 0.0;
  std::optional<SynthesisResult> gains;
  double error_radius = 0.0;
  double augmented_radius = 0.0;
  std::optional<ObserverScheme> scheme;
  std::optional<CostReport> cost;  ///< decentralized patterns with a stable augmented loop
  double J_opt = 0.0;              ///< x0' P x0
  double J_trace = 0.0;            ///< simulated cost over the horizon
  int horizon = 0;
  ExitCode status = Success;
  std::string message;
  std::vector<std::string> files;
};

/// 12 significant digits, '.' decimal separator, independent of locale.
std::string format_number(double v);

void write_trace_csv(const SimTrace& trace, std::ostream& out);
void write_report(const RunReport& rep, std::ostream& out);
void write_matrices(const Scenario& s, const RunReport& rep, std::ostream& out);

Scenario apply_overrides(Scenario s, const Overrides& o);

/// Runs a parsed scenario and writes the requested outputs into out_dir.
RunReport run(const Scenario& s, const std::string& out_dir);

/// Loads, overrides and runs; parse and I/O failures come back as status 3.
RunReport run_scenario(const std::string& path, const std::string& out_dir, const Overrides& o = {});

}  // namespace declq::cli
