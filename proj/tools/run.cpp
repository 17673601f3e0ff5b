#include "run.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <system_error>

namespace declq::cli {
namespace {

void write_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
  out << name << " " << m.rows() << "x" << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << " ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << " " << format_number(m(i, j));
    out << "\n";
  }
}

void write_field(std::ostream& out, const char* key, const std::string& value) {
  out << key << ": " << value << "\n";
}

std::string agent_suffix(std::size_t i) { return std::to_string(i + 1); }

/// Opens out_dir/<name>, writes through fn, records the path.
template <typename Fn>
void emit(RunReport& rep, const std::filesystem::path& dir, const std::string& name, Fn&& fn) {
  const std::filesystem::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path.string() + "'");
  fn(out);
  out.flush();
  if (!out) throw std::ios_base::failure("write failed for '" + path.string() + "'");
  rep.files.push_back(path.string());
}

void fail(RunReport& rep, ExitCode code, std::string msg) {
  if (rep.status == Success) {
    rep.status = code;
    rep.message = std::move(msg);
  }
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

void write_trace_csv(const SimTrace& t, std::ostream& out) {
  if (t.x.empty()) return;
  const Eigen::Index n = t.x.front().size();
  const std::size_t r = t.xhat.front().size();
  std::vector<Eigen::Index> m;
  for (std::size_t i = 0; i < r; ++i) m.push_back(t.u.empty() ? 0 : t.u.front()[i].size());

  out << "k";
  for (Eigen::Index j = 0; j < n; ++j) out << ",x" << j + 1;
  for (std::size_t i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out << ",xhat" << agent_suffix(i) << "_" << j + 1;
  for (std::size_t i = 0; i < r; ++i) out << ",xtilde_norm" << agent_suffix(i);
  for (std::size_t i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < m[i]; ++j) out << ",u" << agent_suffix(i) << "_" << j + 1;
  out << ",stage_cost\n";

  for (std::size_t k = 0; k < t.x.size(); ++k) {
    out << k;
    for (Eigen::Index j = 0; j < n; ++j) out << "," << format_number(t.x[k](j));
    for (std::size_t i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < n; ++j) out << "," << format_number(t.xhat[k][i](j));
    for (std::size_t i = 0; i < r; ++i) out << "," << format_number(t.xtilde_norms[k][i]);
    const bool has_input = k < t.u.size();
    for (std::size_t i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < m[i]; ++j) {
        out << ",";
        if (has_input) out << format_number(t.u[k][i](j));
      }
    }
    out << ",";
    if (has_input) out << format_number(t.stage_cost[k]);
    out << "\n";
  }
}

void write_report(const RunReport& rep, std::ostream& out) {
  write_field(out, "scenario", rep.scenario);
  write_field(out, "pattern", std::string(to_string(rep.pattern)));
  for (const auto& d : rep.diagnostics) {
    out << (d.severity == Severity::Error ? "error: " : "warning: ") << d.message << "\n";
  }
  if (rep.K.size() > 0) {
    write_matrix(out, "K", rep.K);
    write_matrix(out, "P", rep.P);
    write_field(out, "rho(A+BK)", format_number(rep.closed_loop_radius));
    write_field(out, "J_opt", format_number(rep.J_opt));
  }
  if (rep.gains) {
    const auto& g = *rep.gains;
    write_field(out, "gains", std::string(to_string(g.method)));
    for (std::size_t i = 0; i < g.L.size(); ++i) write_matrix(out, "L" + agent_suffix(i), g.L[i]);
    write_field(out, "gain_evaluations", std::to_string(g.evaluations));
    write_field(out, "rho(error)", format_number(rep.error_radius));
    write_field(out, "rho(augmented)", format_number(rep.augmented_radius));
    write_field(out, "gains_certified", g.certified ? "yes" : "no");
  }
  if (rep.cost) {
    const auto& c = *rep.cost;
    write_field(out, "J_dec", format_number(c.J_dec));
    write_field(out, "gap", format_number(c.gap));
    write_field(out, "lambda", format_number(c.lambda));
    write_field(out, "c", format_number(c.c));
    write_field(out, "W_norm", format_number(c.W_norm));
    write_field(out, "c_bar", format_number(c.c_bar));
    write_field(out, "epsilon", format_number(c.epsilon));
    write_field(out, "N_eps", std::to_string(c.N_eps));
    write_field(out, "bound_at_N", format_number(c.bound_at_N));
    write_field(out, "gap_at_N", format_number(c.gap_at_N));
    write_field(out, "cost_certified", c.certified ? "yes" : "no");
  }
  if (rep.horizon > 0) {
    write_field(out, "horizon", std::to_string(rep.horizon));
    write_field(out, "J_trace", format_number(rep.J_trace));
  }
  write_field(out, "status", std::to_string(static_cast<int>(rep.status)) +
                                 (rep.message.empty() ? "" : " (" + rep.message + ")"));
}

void write_matrices(const Scenario& s, const RunReport& rep, std::ostream& out) {
  const PlantModel& p = s.plant;
  write_matrix(out, "A", p.A);
  for (std::size_t i = 0; i < p.agents(); ++i) {
    write_matrix(out, "B" + agent_suffix(i), p.B[i]);
    write_matrix(out, "H" + agent_suffix(i), p.H[i]);
    write_matrix(out, "R" + agent_suffix(i), p.R[i]);
  }
  write_matrix(out, "Q", p.Q);
  if (rep.K.size() > 0) {
    write_matrix(out, "K", rep.K);
    write_matrix(out, "P", rep.P);
  }
  if (rep.scheme) {
    for (std::size_t i = 0; i < rep.scheme->L.size(); ++i) {
      write_matrix(out, "L" + agent_suffix(i), rep.scheme->L[i]);
    }
    write_matrix(out, "error_matrix", rep.scheme->error_matrix);
    write_matrix(out, "coupling_B", rep.scheme->coupling_B);
    write_matrix(out, "augmented_matrix", rep.scheme->augmented_matrix);
  }
}

Scenario apply_overrides(Scenario s, const Overrides& o) {
  if (o.horizon) s.horizon = *o.horizon;
  if (o.epsilon) s.epsilon = *o.epsilon;
  if (o.pattern) {
    s.pattern = *o.pattern;
    if (is_decentralized(s.pattern) && s.gains.mode == GainMode::None) s.gains.mode = GainMode::Synthesize;
  }
  if (o.seed && s.gains.mode == GainMode::Synthesize) s.gains.seed = *o.seed;
  check_scenario(s);
  return s;
}

RunReport run(const Scenario& s, const std::string& out_dir) {
  RunReport rep;
  rep.scenario = s.name;
  rep.pattern = s.pattern;
  const PlantModel& plant = s.plant;

  for (auto& d : validate(plant)) {
    if (d.check == Check::AgentObservability && !is_decentralized(s.pattern)) continue;
    rep.diagnostics.push_back(std::move(d));
  }
  std::optional<SimTrace> trace;
  if (has_errors(rep.diagnostics)) {
    fail(rep, ValidationFailure, "plant validation failed");
  } else {
    try {
      const RiccatiSolution sol = solve_dare(plant);
      rep.K = sol.K;
      rep.P = sol.P;
      rep.closed_loop_radius = spectral_radius(closed_loop_matrix(plant, sol));
      rep.J_opt = optimal_cost(sol, plant.x0);

      if (is_decentralized(s.pattern)) {
        rep.gains = s.gains.mode == GainMode::Given
                        ? certify_given(plant, sol, s.gains.L, s.pattern)
                        : synthesize(plant, sol, s.pattern, s.gains.seed, s.gains.margin);
        rep.scheme = build_scheme(plant, sol, rep.gains->L, s.pattern);
        rep.error_radius = rep.gains->achieved_radius;
        rep.augmented_radius = spectral_radius(rep.scheme->augmented_matrix);
        if (!rep.gains->certified) fail(rep, CertificationFailure, "observer gains not certified");

        std::vector<Vector> xhat0 = s.xhat0;
        if (xhat0.empty()) xhat0.assign(plant.agents(), Vector::Zero(plant.states()));
        if (rep.augmented_radius < 1.0) {
          rep.cost = optimality_certificate(plant, sol, *rep.scheme, plant.x0, xhat0, s.epsilon);
          if (!rep.cost->certified) fail(rep, CertificationFailure, "tail gap not below epsilon");
        }
        trace = simulate(plant, sol, *rep.scheme, plant.x0, xhat0, s.horizon);
      } else {
        trace = simulate_state_feedback(plant, sol, plant.x0, s.horizon);
      }
      rep.horizon = s.horizon;
      rep.J_trace = trajectory_cost(*trace, 0, s.horizon - 1);
    } catch (const ConvergenceError& e) {
      fail(rep, ValidationFailure, e.what());
    } catch (const PreconditionError& e) {
      fail(rep, ValidationFailure, e.what());
    }
  }

  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::ios_base::failure("cannot create output directory '" + out_dir + "'");
  if (trace && s.outputs.count(Output::TraceCsv)) {
    emit(rep, dir, s.name + "_trace.csv", [&](std::ostream& o) { write_trace_csv(*trace, o); });
  }
  if (s.outputs.count(Output::MatricesDump)) {
    emit(rep, dir, s.name + "_matrices.txt", [&](std::ostream& o) { write_matrices(s, rep, o); });
  }
  if (s.outputs.count(Output::ReportText)) {
    emit(rep, dir, s.name + "_report.txt", [&](std::ostream& o) { write_report(rep, o); });
  }
  return rep;
}

RunReport run_scenario(const std::string& path, const std::string& out_dir, const Overrides& o) {
  RunReport rep;
  rep.scenario = path;
  try {
    const Scenario s = apply_overrides(load_scenario(path), o);
    return run(s, out_dir);
  } catch (const ScenarioError& e) {
    fail(rep, IoOrParseError, e.what());
  } catch (const std::ios_base::failure& e) {
    fail(rep, IoOrParseError, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    fail(rep, IoOrParseError, e.what());
  }
  return rep;
}

}  // namespace declq::cli
