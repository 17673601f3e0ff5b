#include <iostream>

#include <CLI11.hpp>

#include "run.hpp"

int main(int argc, char** argv) {
  using namespace declq;
  CLI::App app{"Decentralized LQ control under partial information"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Run a scenario file");
  std::string path;
  std::string out_dir = ".";
  cli::Overrides o;
  std::string pattern;
  run->add_option("scenario", path, "Scenario YAML file")->required();
  run->add_option("--out-dir", out_dir, "Directory for output files");
  run->add_option("--horizon", o.horizon, "Simulation horizon")->check(CLI::PositiveNumber);
  run->add_option("--epsilon", o.epsilon, "Tail-gap tolerance")->check(CLI::PositiveNumber);
  run->add_option("--seed", o.seed, "Seed for gain synthesis");
  run->add_option("--pattern", pattern, "state_feedback, input_sharing or private")
      ->check(CLI::IsMember({"state_feedback", "input_sharing", "private"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::IoOrParseError;
  }
  if (!pattern.empty()) o.pattern = parse_pattern(pattern);

  const cli::RunReport rep = cli::run_scenario(path, out_dir, o);
  if (rep.status == cli::IoOrParseError) {
    std::cerr << "declq: " << rep.message << "\n";
    return rep.status;
  }
  cli::write_report(rep, std::cout);
  for (const auto& f : rep.files) std::cout << "wrote " << f << "\n";
  if (rep.status != cli::Success) std::cerr << "declq: " << rep.message << "\n";
  return rep.status;
}
