#include "scenario.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace declq::cli {
namespace {

std::string where(const YAML::Node& node, const std::string& field) {
  const YAML::Mark m = node.Mark();
  if (m.is_null()) return field;
  return field + " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& what) {
  throw ScenarioError(where(node, field) + ": " + what);
}

void expect_keys(const YAML::Node& map, const std::string& field,
                 std::initializer_list<const char*> allowed) {
  if (!map.IsMap()) fail(map, field, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(kv.first, field.empty() ? key : field + "." + key, "unknown key");
  }
}

YAML::Node required(const YAML::Node& map, const char* key, const std::string& field) {
  YAML::Node n = map[key];
  if (!n) fail(map, field, std::string("missing required key '") + key + "'");
  return n;
}

double scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, "expected a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail(node, field, "'" + node.Scalar() + "' is not a number");
  }
}

template <typename T>
T integer(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, "expected an integer");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, field, "'" + node.Scalar() + "' is not a valid integer");
  }
}

Vector vector_of(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence() || node.size() == 0) fail(node, field, "expected a non-empty list of numbers");
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = scalar(node[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

/// Row arrays: [[a, b], [c, d]].
Matrix matrix_of(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence() || node.size() == 0) fail(node, field, "expected a non-empty list of rows");
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string rf = field + "[" + std::to_string(i) + "]";
    rows.push_back(vector_of(node[i], rf));
    if (rows.back().size() != rows.front().size()) fail(node[i], rf, "row length differs from row 0");
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

PlantModel plant_of(const YAML::Node& node) {
  expect_keys(node, "plant", {"A", "Q", "x0", "agents"});
  PlantModel p;
  p.A = matrix_of(required(node, "A", "plant"), "plant.A");
  p.Q = matrix_of(required(node, "Q", "plant"), "plant.Q");
  p.x0 = vector_of(required(node, "x0", "plant"), "plant.x0");
  const YAML::Node agents = required(node, "agents", "plant");
  if (!agents.IsSequence() || agents.size() == 0) fail(agents, "plant.agents", "expected a non-empty list");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string f = "plant.agents[" + std::to_string(i) + "]";
    expect_keys(agents[i], f, {"B", "H", "R"});
    p.B.push_back(matrix_of(required(agents[i], "B", f), f + ".B"));
    p.H.push_back(matrix_of(required(agents[i], "H", f), f + ".H"));
    p.R.push_back(matrix_of(required(agents[i], "R", f), f + ".R"));
  }
  return p;
}

GainSpec gains_of(const YAML::Node& node) {
  expect_keys(node, "gains", {"mode", "L", "seed", "margin"});
  GainSpec g;
  const YAML::Node mode = required(node, "mode", "gains");
  const auto m = mode.as<std::string>();
  if (m == "given") {
    g.mode = GainMode::Given;
    const YAML::Node ls = required(node, "L", "gains");
    if (!ls.IsSequence()) fail(ls, "gains.L", "expected a list of gain matrices");
    for (std::size_t i = 0; i < ls.size(); ++i) {
      g.L.push_back(matrix_of(ls[i], "gains.L[" + std::to_string(i) + "]"));
    }
    if (node["seed"] || node["margin"]) fail(node, "gains", "seed and margin apply only to mode synthesize");
  } else if (m == "synthesize") {
    g.mode = GainMode::Synthesize;
    if (node["L"]) fail(node["L"], "gains.L", "L applies only to mode given");
    if (node["seed"]) g.seed = integer<std::uint64_t>(node["seed"], "gains.seed");
    if (node["margin"]) {
      g.margin = scalar(node["margin"], "gains.margin");
      if (!(g.margin >= 0.0 && g.margin < 1.0)) fail(node["margin"], "gains.margin", "must lie in [0, 1)");
    }
  } else {
    fail(mode, "gains.mode", "expected 'given' or 'synthesize', got '" + m + "'");
  }
  return g;
}

void sim_of(const YAML::Node& node, Scenario& s) {
  expect_keys(node, "sim", {"horizon", "epsilon", "xhat0"});
  if (node["horizon"]) {
    s.horizon = integer<int>(node["horizon"], "sim.horizon");
    if (s.horizon < 1) fail(node["horizon"], "sim.horizon", "must be at least 1");
  }
  if (node["epsilon"]) {
    s.epsilon = scalar(node["epsilon"], "sim.epsilon");
    if (!(s.epsilon > 0.0)) fail(node["epsilon"], "sim.epsilon", "must be positive");
  }
  if (node["xhat0"]) {
    const YAML::Node xs = node["xhat0"];
    if (!xs.IsSequence()) fail(xs, "sim.xhat0", "expected a list of vectors");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      s.xhat0.push_back(vector_of(xs[i], "sim.xhat0[" + std::to_string(i) + "]"));
    }
  }
}

std::set<Output> outputs_of(const YAML::Node& node) {
  if (!node.IsSequence()) fail(node, "outputs", "expected a list");
  std::set<Output> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const auto v = node[i].as<std::string>();
    if (v == "trace_csv") {
      out.insert(Output::TraceCsv);
    } else if (v == "report_text") {
      out.insert(Output::ReportText);
    } else if (v == "matrices_dump") {
      out.insert(Output::MatricesDump);
    } else {
      fail(node[i], "outputs[" + std::to_string(i) + "]", "unknown output '" + v + "'");
    }
  }
  return out;
}

}  // namespace

void check_scenario(const Scenario& s) {
  const auto dims = detail::dimension_diagnostics(s.plant);
  if (!dims.empty()) throw ScenarioError("plant: " + dims.front().message);

  const std::size_t r = s.plant.agents();
  const Eigen::Index n = s.plant.states();
  if (s.pattern == InformationPattern::StateFeedback) {
    if (s.gains.mode == GainMode::Given) {
      throw ScenarioError("gains: observer gains given with pattern state_feedback, which uses no observers");
    }
  } else if (s.gains.mode == GainMode::None) {
    throw ScenarioError("gains: pattern " + std::string(to_string(s.pattern)) +
                        " needs a gains section (mode given or synthesize)");
  }
  if (s.gains.mode == GainMode::Given) {
    if (s.gains.L.size() != r) {
      throw ScenarioError("gains.L: expected " + std::to_string(r) + " gains, got " +
                          std::to_string(s.gains.L.size()));
    }
    for (std::size_t i = 0; i < r; ++i) {
      if (s.gains.L[i].rows() != n || s.gains.L[i].cols() != s.plant.output_dim(i)) {
        throw ScenarioError("gains.L[" + std::to_string(i) + "]: expected " + std::to_string(n) + "x" +
                            std::to_string(s.plant.output_dim(i)) + " rows");
      }
    }
  }
  if (!s.xhat0.empty()) {
    if (s.xhat0.size() != r) {
      throw ScenarioError("sim.xhat0: expected " + std::to_string(r) + " estimates");
    }
    for (std::size_t i = 0; i < r; ++i) {
      if (s.xhat0[i].size() != n) {
        throw ScenarioError("sim.xhat0[" + std::to_string(i) + "]: expected length " + std::to_string(n));
      }
    }
  }
  if (s.horizon < 1) throw ScenarioError("sim.horizon: must be at least 1");
  if (!(s.epsilon > 0.0)) throw ScenarioError("sim.epsilon: must be positive");
}

Scenario parse_scenario(const std::string& text, const std::string& name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(name + ": " + e.what());
  }
  if (!root.IsMap()) throw ScenarioError(name + ": top level must be a mapping");

  Scenario s;
  s.name = name;
  try {
    expect_keys(root, "", {"name", "plant", "pattern", "gains", "sim", "outputs"});
    if (root["name"]) s.name = root["name"].as<std::string>();
    s.plant = plant_of(required(root, "plant", "top level"));

    const YAML::Node pat = required(root, "pattern", "top level");
    const auto parsed = parse_pattern(pat.as<std::string>());
    if (!parsed) fail(pat, "pattern", "expected state_feedback, input_sharing or private");
    s.pattern = *parsed;

    if (root["gains"]) s.gains = gains_of(root["gains"]);
    if (root["sim"]) sim_of(root["sim"], s);
    if (root["outputs"]) s.outputs = outputs_of(root["outputs"]);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(name + ": " + e.what());
  }
  check_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str(), std::filesystem::path(path).stem().string());
  return s;
}

}  // namespace declq::cli
