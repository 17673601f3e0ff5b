#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "run.hpp"
#include "scenario.hpp"
#include "test_support.hpp"

namespace declq::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kSource = DECLQ_SOURCE_DIR;
const std::string kTool = DECLQ_TOOL_PATH;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("declq_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_scenario(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / (name + ".yaml");
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

int run_tool(const std::string& args) {
  const int rc = std::system((kTool + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  EXPECT_EQ(res.ec, std::errc()) << s;
  return v;
}

const std::string kPlant = R"(
plant:
  A: [[1, 1], [2, -1]]
  Q: [[1, 0], [0, 1]]
  x0: [1, -1]
  agents:
    - B: [[0.6], [0.5]]
      H: [[1, 0]]
      R: [[1]]
    - B: [[0], [1]]
      H: [[0, 1]]
      R: [[1]]
)";

TEST(Scenario, ParsesShippedTwoAgentScenario) {
  const Scenario s = load_scenario((kSource / "scenarios/two_agent.yaml").string());
  EXPECT_EQ(s.name, "two_agent");
  EXPECT_EQ(s.pattern, InformationPattern::Private);
  EXPECT_EQ(s.gains.mode, GainMode::Given);
  const PlantModel ref = fixtures::reference_plant();
  EXPECT_EQ(s.plant.A, ref.A);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(s.plant.B[i], ref.B[i]);
    EXPECT_EQ(s.plant.H[i], ref.H[i]);
    EXPECT_EQ(s.gains.L[i], fixtures::reference_gains()[i]);
  }
  EXPECT_EQ(s.plant.x0, ref.x0);
  EXPECT_EQ(s.horizon, 60);
  EXPECT_EQ(s.epsilon, 1e-3);
}

TEST(Scenario, Defaults) {
  const Scenario s = parse_scenario(kPlant + "pattern: private\ngains: {mode: synthesize}\n");
  EXPECT_EQ(s.gains.seed, 0u);
  EXPECT_EQ(s.gains.margin, 0.02);
  EXPECT_EQ(s.horizon, 60);
  EXPECT_EQ(s.epsilon, 1e-3);
  EXPECT_TRUE(s.xhat0.empty());
}

TEST(Scenario, StateFeedbackWithGivenGainsRejected) {
  const std::string text = kPlant +
                           "pattern: state_feedback\n"
                           "gains:\n  mode: given\n  L: [[[0.3], [0.5]], [[0.8], [-0.6]]]\n";
  try {
    (void)parse_scenario(text);
    FAIL() << "expected ScenarioError";
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("state_feedback"), std::string::npos) << e.what();
  }
}

TEST(Scenario, ErrorsCarryFieldAndLine) {
  auto message = [](const std::string& text) {
    try {
      (void)parse_scenario(text);
    } catch (const ScenarioError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string bad_number = "plant:\n  A: [[1, x]]\n  Q: [[1]]\n  x0: [1]\n  agents: []\n";
  const std::string m1 = message(bad_number);
  EXPECT_NE(m1.find("plant.A[0][1]"), std::string::npos) << m1;
  EXPECT_NE(m1.find("line 2"), std::string::npos) << m1;

  const std::string m2 = message("plant:\n  A: [[1, 1], [2]]\n");
  EXPECT_NE(m2.find("plant.A[1]"), std::string::npos) << m2;

  const std::string m3 = message(kPlant + "pattern: shared\n");
  EXPECT_NE(m3.find("pattern"), std::string::npos) << m3;

  const std::string m4 = message(kPlant + "pattern: private\ngains: {mode: given, L: [[[1], [2]]]}\n");
  EXPECT_NE(m4.find("gains.L"), std::string::npos) << m4;

  const std::string m5 = message(kPlant + "pattern: private\n");
  EXPECT_NE(m5.find("gains"), std::string::npos) << m5;

  const std::string m6 = message(kPlant + "pattern: private\ngains: {mode: synthesize}\nsim: {horizon: 0}\n");
  EXPECT_NE(m6.find("sim.horizon"), std::string::npos) << m6;

  const std::string m7 = message(kPlant + "pattern: private\ngains: {mode: synthesize}\nsim: {horzon: 5}\n");
  EXPECT_NE(m7.find("unknown key"), std::string::npos) << m7;

  const std::string m8 = message("plant: [unclosed\n");
  EXPECT_FALSE(m8.empty());

  const std::string m9 = message(kPlant + "pattern: private\ngains: {mode: synthesize}\nsim: {xhat0: [[0, 0]]}\n");
  EXPECT_NE(m9.find("sim.xhat0"), std::string::npos) << m9;
}

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(-123456.7890123456), "-123456.789012");
  EXPECT_EQ(format_number(1.5e-20), "1.5e-20");
  EXPECT_EQ(parse_double(format_number(M_PI)), 3.14159265359);
}

TEST(TraceCsv, ZeroTraceHorizonOne) {
  const auto loop = fixtures::reference_loop();
  const SimTrace t = simulate(loop.plant, loop.sol, loop.scheme, Vector::Zero(2), {}, 1);
  std::ostringstream out;
  write_trace_csv(t, out);
  const auto rows = parse_csv(out.str());
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& row : rows) EXPECT_EQ(row.size(), 12u);
  for (std::size_t c = 1; c < rows[1].size(); ++c) EXPECT_EQ(rows[1][c], "0");
  EXPECT_EQ(rows[1][0], "0");
  EXPECT_EQ(rows[2][0], "1");
  EXPECT_EQ(out.str().back(), '\n');
}

TEST(TraceCsv, ColumnCountAndRoundTrip) {
  std::mt19937_64 rng(12);
  fixtures::PlantShape shape;
  shape.n = 3;
  shape.inputs = {2, 1, 1};
  shape.outputs = {1, 1, 1};
  const PlantModel p = fixtures::random_plant(rng, shape, 0.8);
  const RiccatiSolution sol = solve_dare(p);
  const SynthesisResult g = synthesize(p, sol, InformationPattern::Private, 4);
  const ObserverScheme scheme = build_scheme(p, sol, g.L, InformationPattern::Private);
  const SimTrace t = simulate(p, sol, scheme, p.x0, {}, 25);
  std::ostringstream out;
  write_trace_csv(t, out);
  const auto rows = parse_csv(out.str());
  ASSERT_EQ(rows.size(), 27u);
  const std::size_t expected = 1 + 3 + 3 * 3 + 3 + 4 + 1;
  for (const auto& row : rows) ASSERT_EQ(row.size(), expected);
  EXPECT_EQ(rows[0].front(), "k");
  EXPECT_EQ(rows[0].back(), "stage_cost");

  auto close = [](double parsed, double v) { return std::abs(parsed - v) <= 1e-11 * std::abs(v) + 1e-300; };
  for (std::size_t k = 0; k <= 25; ++k) {
    const auto& row = rows[k + 1];
    std::size_t c = 1;
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_TRUE(close(parse_double(row[c++]), t.x[k](j)));
    for (std::size_t i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) EXPECT_TRUE(close(parse_double(row[c++]), t.xhat[k][i](j)));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(close(parse_double(row[c++]), t.xtilde_norms[k][i]));
    if (k < 25) {
      for (std::size_t i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < t.u[k][i].size(); ++j) EXPECT_TRUE(close(parse_double(row[c++]), t.u[k][i](j)));
      EXPECT_TRUE(close(parse_double(row[c++]), t.stage_cost[k]));
    } else {
      for (; c < row.size(); ++c) EXPECT_EQ(row[c], "");
    }
  }
}

TEST(Run, TwoAgentScenarioMatchesLibrary) {
  const fs::path dir = scratch("reference");
  const RunReport rep = run_scenario((kSource / "scenarios/two_agent.yaml").string(), dir.string());
  EXPECT_EQ(rep.status, Success) << rep.message;
  EXPECT_LE(fixtures::max_abs_diff(rep.K, fixtures::reference_K()), 1e-3);
  ASSERT_TRUE(rep.gains && rep.cost && rep.scheme);

  const auto loop = fixtures::reference_loop();
  EXPECT_EQ(rep.K, loop.sol.K);
  EXPECT_EQ(rep.P, loop.sol.P);
  EXPECT_EQ(rep.error_radius, spectral_radius(loop.scheme.error_matrix));
  const CostReport direct =
      optimality_certificate(loop.plant, loop.sol, loop.scheme, loop.plant.x0, loop.xhat0, 1e-3);
  EXPECT_EQ(rep.cost->J_dec, direct.J_dec);
  EXPECT_EQ(rep.cost->c_bar, direct.c_bar);
  EXPECT_EQ(rep.cost->N_eps, direct.N_eps);
  EXPECT_EQ(rep.files.size(), 3u);
}

TEST(Run, GoldenTrace) {
  const fs::path dir = scratch("golden");
  const RunReport rep = run_scenario((kSource / "scenarios/two_agent.yaml").string(), dir.string());
  ASSERT_EQ(rep.status, Success);
  EXPECT_EQ(read_file(dir / "two_agent_trace.csv"), read_file(kSource / "tests/golden/two_agent_trace.csv"));
}

TEST(Run, SynthesizedRunsAreByteIdentical) {
  const std::string path = (kSource / "scenarios/two_agent_synthesized.yaml").string();
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  ASSERT_EQ(run_scenario(path, a.string()).status, Success);
  ASSERT_EQ(run_scenario(path, b.string()).status, Success);
  const std::string ta = read_file(a / "two_agent_synthesized_trace.csv");
  EXPECT_FALSE(ta.empty());
  EXPECT_EQ(ta, read_file(b / "two_agent_synthesized_trace.csv"));
  EXPECT_EQ(read_file(a / "two_agent_synthesized_report.txt"), read_file(b / "two_agent_synthesized_report.txt"));
}

TEST(Run, Overrides) {
  const std::string path = (kSource / "scenarios/two_agent_synthesized.yaml").string();
  Overrides o;
  o.horizon = 10;
  o.epsilon = 0.5;
  o.seed = 3;
  const fs::path dir = scratch("overrides");
  const RunReport rep = run_scenario(path, dir.string(), o);
  EXPECT_EQ(rep.horizon, 10);
  ASSERT_TRUE(rep.cost);
  EXPECT_EQ(rep.cost->epsilon, 0.5);
  const auto loop = fixtures::reference_loop();
  const SynthesisResult direct = synthesize(loop.plant, loop.sol, InformationPattern::Private, 3);
  EXPECT_EQ(rep.gains->L, direct.L);

  Overrides sf;
  sf.pattern = InformationPattern::StateFeedback;
  const RunReport central = run_scenario(path, dir.string(), sf);
  EXPECT_EQ(central.status, Success);
  EXPECT_FALSE(central.gains);

  // Given gains cannot be combined with state feedback.
  EXPECT_EQ(run_scenario((kSource / "scenarios/two_agent.yaml").string(), dir.string(), sf).status,
            IoOrParseError);
}

TEST(Run, ExitCodesFromLibrary) {
  const fs::path dir = scratch("codes");
  const fs::path unstabilizable = write_scenario(dir, "unstab", R"(
plant:
  A: [[1.5, 0], [0, 0.5]]
  Q: [[1, 0], [0, 1]]
  x0: [1, 1]
  agents:
    - B: [[0], [1]]
      H: [[1, 1]]
      R: [[1]]
pattern: private
gains: {mode: synthesize}
)");
  const RunReport r1 = run_scenario(unstabilizable.string(), dir.string());
  EXPECT_EQ(r1.status, ValidationFailure);
  EXPECT_TRUE(has_errors(r1.diagnostics));

  const fs::path bad_gains = write_scenario(dir, "badgains", kPlant + R"(
pattern: private
gains:
  mode: given
  L: [[[0], [0]], [[0], [0]]]
)");
  const RunReport r2 = run_scenario(bad_gains.string(), dir.string());
  EXPECT_EQ(r2.status, CertificationFailure);
  EXPECT_FALSE(r2.cost);
  EXPECT_TRUE(fs::exists(dir / "badgains_trace.csv"));

  const fs::path tight = write_scenario(dir, "tight", kPlant + R"(
pattern: private
gains:
  mode: given
  L: [[[0.3], [0.5]], [[0.8], [-0.6]]]
sim: {horizon: 5, epsilon: 1.0e-300}
)");
  // The bound is sound, so even a tiny epsilon certifies at a longer horizon.
  const RunReport r3 = run_scenario(tight.string(), dir.string());
  EXPECT_EQ(r3.status, Success);
  ASSERT_TRUE(r3.cost);
  EXPECT_TRUE(r3.cost->certified);
  EXPECT_GT(r3.cost->N_eps, 1000);

  EXPECT_EQ(run_scenario((dir / "missing.yaml").string(), dir.string()).status, IoOrParseError);

  // Agent observability does not matter without observers.
  const fs::path blind = write_scenario(dir, "blind", R"(
plant:
  A: [[1, 1], [2, -1]]
  Q: [[1, 0], [0, 1]]
  x0: [1, -1]
  agents:
    - B: [[0.6], [0.5]]
      H: [[0, 0]]
      R: [[1]]
pattern: state_feedback
)");
  EXPECT_EQ(run_scenario(blind.string(), dir.string()).status, Success);
}

TEST(Tool, ExitCodes) {
  const fs::path dir = scratch("tool");
  const std::string out = " --out-dir " + dir.string();
  EXPECT_EQ(run_tool("run " + (kSource / "scenarios/two_agent.yaml").string() + out), 0);
  const fs::path bad_gains = write_scenario(dir, "badgains", kPlant + R"(
pattern: private
gains:
  mode: given
  L: [[[0], [0]], [[0], [0]]]
)");
  EXPECT_EQ(run_tool("run " + bad_gains.string() + out), 2);
  EXPECT_EQ(run_tool("run " + (dir / "nope.yaml").string() + out), 3);
  EXPECT_EQ(run_tool("run " + (kSource / "scenarios/state_feedback.yaml").string() + out + " --pattern bogus"), 3);
  EXPECT_EQ(run_tool("run " + (kSource / "scenarios/state_feedback.yaml").string() + out + " --horizon 20"), 0);
  EXPECT_EQ(run_tool("frobnicate"), 3);

  const fs::path unstab = write_scenario(dir, "unstab", R"(
plant:
  A: [[2]]
  Q: [[1]]
  x0: [1]
  agents:
    - B: [[0]]
      H: [[1]]
      R: [[1]]
pattern: state_feedback
)");
  EXPECT_EQ(run_tool("run " + unstab.string() + out), 1);
}

}  // namespace
}  // namespace declq::cli
