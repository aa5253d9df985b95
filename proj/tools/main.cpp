// quasiherm: analyze / evolve / sweep front end for the quasi-Hermitian
// matrix toolkit. Reads JSON operator files, writes deterministic text,
// JSON, or CSV reports.
//
// Exit codes: 0 = certified unbroken run, 2 = broken spectrum (still a
// valid outcome), 1 = any failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quasiherm/quasiherm.hpp"

namespace qh = quasiherm;
using nlohmann::ordered_json;

namespace {

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(out_path);
  fs::path tmp(target);
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw qh::ParseError("cli", "cannot write '" + out_path + "'");
    f << content;
  }
  fs::rename(tmp, target);
}

ordered_json input_entry(const std::string& path, Eigen::Index dim, const std::string& label) {
  ordered_json j;
  j["path"] = path;
  j["digest"] = qh::file_digest(path);
  j["dim"] = dim;
  if (!label.empty()) j["label"] = label;
  return j;
}

struct TolFlags {
  double tol_eig = 0.0;
  double tol_reality = qh::tol::reality;
  double tol_cert = qh::tol::certification;

  qh::AnalyzeOptions options() const { return {tol_eig, tol_reality, tol_cert}; }

  void attach(CLI::App* cmd) {
    cmd->add_option("--tol-eig", tol_eig, "eigen-residual tolerance (0 = dim/norm scaled default)");
    cmd->add_option("--tol-reality", tol_reality, "relative |Im E| threshold for a real eigenvalue");
    cmd->add_option("--tol-cert", tol_cert, "certification gate for all residuals");
  }
};

int cmd_analyze(const std::string& h_path, const std::string& p_path, const TolFlags& tols,
                bool as_json, const std::string& out_path) {
  const qh::OperatorFile hf = qh::read_operator_file(h_path);
  std::optional<qh::Pseudometric> P;
  if (!p_path.empty()) P = qh::Pseudometric::from_matrix(qh::read_operator_file(p_path).matrix);

  const qh::AnalysisOutcome outcome = qh::run_analysis(hf.matrix, P ? &*P : nullptr, tols.options());

  ordered_json inputs;
  inputs["hamiltonian"] = input_entry(h_path, hf.dim, hf.label);
  if (!p_path.empty()) inputs["pseudometric"] = input_entry(p_path, P->dim(), "");

  ordered_json tolerances;
  tolerances["tol_eig"] =
      tols.tol_eig > 0.0 ? tols.tol_eig : qh::default_tol_eig(hf.matrix);
  tolerances["tol_reality"] = tols.tol_reality;
  tolerances["tol_cert"] = tols.tol_cert;

  if (as_json) {
    ordered_json body = qh::analysis_to_json(outcome);
    ordered_json report;
    report["tool"] = "quasiherm analyze";
    report["input"] = std::move(inputs);
    report["tolerances"] = std::move(tolerances);
    for (auto& [key, value] : body.items())
      if (key != "tool") report[key] = std::move(value);
    write_output(out_path, report.dump(2) + "\n");
  } else {
    std::ostringstream text;
    text << "quasiherm analyze\n";
    text << "hamiltonian: " << h_path << " (digest=" << qh::file_digest(h_path)
         << ", dim=" << hf.dim << (hf.label.empty() ? "" : ", label=" + hf.label) << ")\n";
    if (!p_path.empty())
      text << "pseudometric: " << p_path << " (digest=" << qh::file_digest(p_path)
           << ", signature=+" << P->plus_count << "/-" << P->minus_count << ")\n";
    else
      text << "pseudometric: none (classification by spectral reality only)\n";
    text << qh::analysis_to_text(outcome);
    write_output(out_path, text.str());
  }
  return outcome.exit_code;
}

std::vector<double> time_grid(double t_max, long steps) {
  if (!(t_max > 0.0) || steps < 1)
    throw qh::InvalidGrid("cli", "evolve: requires --t-max > 0 and --steps >= 1");
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (long k = 0; k <= steps; ++k)
    grid[static_cast<std::size_t>(k)] = t_max * static_cast<double>(k) / static_cast<double>(steps);
  return grid;
}

int cmd_evolve(const std::string& h_path, const std::string& state_path,
               const std::string& p_path, const std::string& obs_path, double t_max, long steps,
               const std::string& picture, bool force, const TolFlags& tols,
               const std::string& out_path) {
  const qh::OperatorFile hf = qh::read_operator_file(h_path);
  const qh::StateFile sf = qh::read_state_file(state_path);
  if (sf.dim != hf.dim)
    throw qh::DimensionMismatch("cli", "state dim " + std::to_string(sf.dim) +
                                           " does not match hamiltonian dim " +
                                           std::to_string(hf.dim));
  std::optional<qh::Pseudometric> P;
  if (!p_path.empty()) P = qh::Pseudometric::from_matrix(qh::read_operator_file(p_path).matrix);
  std::optional<qh::ComplexMatrix> X;
  if (!obs_path.empty()) {
    X = qh::read_operator_file(obs_path).matrix;
    if (X->rows() != hf.dim)
      throw qh::DimensionMismatch("cli", "observable dim does not match hamiltonian dim");
  }
  if (picture == "heisenberg" && !X)
    throw qh::InvalidGrid("cli", "evolve: --picture heisenberg requires --observable");

  const qh::AnalysisOutcome outcome = qh::run_analysis(hf.matrix, P ? &*P : nullptr, tols.options());

  std::vector<std::string> comments;
  comments.push_back("quasiherm evolve");
  comments.push_back("hamiltonian: " + h_path + " (digest=" + qh::file_digest(h_path) + ")");
  comments.push_back("state: " + state_path + " (digest=" + qh::file_digest(state_path) + ")");
  if (!p_path.empty())
    comments.push_back("pseudometric: " + p_path + " (digest=" + qh::file_digest(p_path) + ")");
  if (!obs_path.empty())
    comments.push_back("observable: " + obs_path + " (digest=" + qh::file_digest(obs_path) + ")");
  comments.push_back("picture: " + picture);

  bool forced = false;
  qh::MetricOperator theta;
  if (outcome.verdict == qh::Verdict::Broken) {
    if (!force) {
      std::cerr << "broken spectrum: no positive metric exists; rerun with --force for "
                   "F-norm bookkeeping\n";
      return 2;
    }
    forced = true;
    theta = qh::identity_metric(hf.dim);
    comments.push_back("theta: identity (broken phase under --force; F-norm bookkeeping only, "
                       "not a certified metric)");
  } else {
    if (!outcome.certified()) {
      std::cerr << "certification failed:\n";
      for (const auto& c : outcome.certificates)
        if (!c.passed) std::cerr << "  " << c.name << " = " << qh::format_g17(c.value) << "\n";
      return 1;
    }
    theta = *outcome.metric;
    const std::string kind = outcome.pc ? "pc-normalized spectral metric" : "spectral metric, unit scales";
    comments.push_back("theta: " + kind +
                       " (min_eigenvalue=" + qh::format_g17(theta.min_eigenvalue) +
                       ", quasi_h_residual=" + qh::format_g17(*theta.quasi_h_residual) + ")");
  }
  comments.push_back("t_max=" + qh::format_g17(t_max) + ", steps=" + std::to_string(steps));

  const std::vector<double> grid = time_grid(t_max, steps);
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  if (picture == "schrodinger") {
    const qh::StateTrajectory traj = qh::evolve_schrodinger(hf.matrix, sf.vector, grid, theta);
    if (forced) {
      const double max_im = outcome.sys.eigenvalues.imag().cwiseAbs().maxCoeff();
      comments.push_back("WARNING: broken spectrum, max |Im E| = " + qh::format_g17(max_im) +
                         "; f_norm growth rate = " + qh::format_g17(qh::f_norm_growth_rate(traj)));
    }
    header = {"t", "s_norm", "f_norm"};
    if (X) {
      header.push_back("exp_re");
      header.push_back("exp_im");
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::vector<std::string> row = {qh::format_g17(grid[k]),
                                      qh::format_g17(traj.s_norms[static_cast<Eigen::Index>(k)]),
                                      qh::format_g17(traj.f_norms[static_cast<Eigen::Index>(k)])};
      if (X) {
        const qh::Complex e = traj.states[k].dot(theta.theta * (*X * traj.states[k]));
        row.push_back(qh::format_g17(e.real()));
        row.push_back(qh::format_g17(e.imag()));
      }
      rows.push_back(std::move(row));
    }
  } else if (picture == "heisenberg") {
    const qh::OperatorTrajectory traj = qh::evolve_heisenberg(hf.matrix, *X, grid);
    header = {"t", "exp_re", "exp_im"};
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const qh::Complex e = sf.vector.dot(theta.theta * (traj.operators[k] * sf.vector));
      rows.push_back({qh::format_g17(grid[k]), qh::format_g17(e.real()), qh::format_g17(e.imag())});
    }
  } else {
    throw qh::InvalidGrid("cli", "evolve: --picture must be schrodinger or heisenberg");
  }

  write_output(out_path, qh::render_csv(comments, header, rows));
  return forced ? 2 : 0;
}

std::vector<double> build_axis(const std::string& name, double vmin, double vmax, double step,
                               bool has_min, bool has_max) {
  if (!has_min) throw qh::InvalidGrid("cli", "sweep: --" + name + "-min is required");
  if (!has_max || vmax == vmin) return {vmin};
  if (vmax < vmin) throw qh::InvalidGrid("cli", "sweep: --" + name + "-max below --" + name + "-min");
  if (!(step > 0.0)) throw qh::InvalidGrid("cli", "sweep: --" + name + "-step must be positive");
  std::vector<double> values;
  for (long k = 0;; ++k) {
    const double x = vmin + step * static_cast<double>(k);
    if (x > vmax + 1e-12 * std::max(1.0, std::abs(vmax))) break;
    values.push_back(x);
  }
  return values;
}

int cmd_sweep(const std::string& family, const qh::ParamGrid& grid, double tol_reality,
              const std::string& out_path) {
  qh::ModelFamily fam;
  if (family == "pt2cell")
    fam = qh::ModelFamily::PT2Cell;
  else if (family == "chain")
    fam = qh::ModelFamily::GainLossChain;
  else
    throw qh::InvalidGrid("cli", "sweep: --family must be pt2cell or chain");

  const qh::SweepTable table = qh::sweep_phase_diagram(fam, grid, tol_reality);

  std::vector<std::string> comments = {"quasiherm sweep", std::string("family: ") + family,
                                       "tol_reality: " + qh::format_g17(tol_reality)};
  std::vector<std::string> header = table.param_names;
  header.insert(header.end(), {"verdict", "max_im_e", "min_theta_eig"});
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : table.rows) {
    std::vector<std::string> cells;
    for (double p : row.params) cells.push_back(qh::format_g17(p));
    cells.push_back(qh::to_string(row.verdict));
    cells.push_back(qh::format_g17(row.max_im_e));
    cells.push_back(qh::format_g17(row.min_theta_eig));
    rows.push_back(std::move(cells));
  }
  write_output(out_path, qh::render_csv(comments, header, rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-Hermitian matrix toolkit"};
  app.require_subcommand(1);

  // analyze
  std::string an_h, an_p, an_out;
  bool an_json = false;
  TolFlags an_tols;
  CLI::App* analyze = app.add_subcommand("analyze", "classify H, build the metric and certificates");
  analyze->add_option("hamiltonian", an_h, "Hamiltonian operator file (JSON)")->required();
  analyze->add_option("pseudometric", an_p, "involutive pseudometric operator file (JSON)");
  analyze->add_flag("--json", an_json, "emit the machine-readable JSON report");
  analyze->add_option("--out", an_out, "write the report to this path (default: stdout)");
  an_tols.attach(analyze);

  // evolve
  std::string ev_h, ev_state, ev_p, ev_obs, ev_out, ev_picture = "schrodinger";
  double ev_tmax = 0.0;
  long ev_steps = 0;
  bool ev_force = false;
  TolFlags ev_tols;
  CLI::App* evolve = app.add_subcommand("evolve", "propagate a state or an observable");
  evolve->add_option("hamiltonian", ev_h, "Hamiltonian operator file (JSON)")->required();
  evolve->add_option("state", ev_state, "initial state file (JSON)")->required();
  evolve->add_option("--t-max", ev_tmax, "time horizon")->required();
  evolve->add_option("--steps", ev_steps, "number of steps (grid has steps+1 nodes)")->required();
  evolve->add_option("--picture", ev_picture, "schrodinger | heisenberg");
  evolve->add_option("--pseudometric", ev_p, "pseudometric operator file (JSON)");
  evolve->add_option("--observable", ev_obs, "observable operator file (JSON)");
  evolve->add_flag("--force", ev_force, "evolve a broken-phase model under F-norm bookkeeping");
  evolve->add_option("--out", ev_out, "write the CSV to this path (default: stdout)");
  ev_tols.attach(evolve);

  // sweep
  std::string sw_family, sw_out;
  double sw_tol_reality = qh::tol::reality;
  double a_min = 0, a_max = 0, a_step = 0, b_min = 0, b_max = 0, b_step = 0;
  double g_min = 0, g_max = 0, g_step = 0, c_min = 0, c_max = 0, c_step = 0;
  long n_min = 0, n_max = 0, n_step = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "phase diagram over a parameter grid");
  sweep->add_option("--family", sw_family, "pt2cell | chain")->required();
  auto* oa_min = sweep->add_option("--a-min", a_min);
  auto* oa_max = sweep->add_option("--a-max", a_max);
  sweep->add_option("--a-step", a_step);
  auto* ob_min = sweep->add_option("--b-min", b_min);
  auto* ob_max = sweep->add_option("--b-max", b_max);
  sweep->add_option("--b-step", b_step);
  auto* on_min = sweep->add_option("--n-min", n_min);
  auto* on_max = sweep->add_option("--n-max", n_max);
  sweep->add_option("--n-step", n_step);
  auto* og_min = sweep->add_option("--gamma-min", g_min);
  auto* og_max = sweep->add_option("--gamma-max", g_max);
  sweep->add_option("--gamma-step", g_step);
  auto* oc_min = sweep->add_option("--coupling-min", c_min);
  auto* oc_max = sweep->add_option("--coupling-max", c_max);
  sweep->add_option("--coupling-step", c_step);
  sweep->add_option("--tol-reality", sw_tol_reality, "relative |Im E| threshold");
  sweep->add_option("--out", sw_out, "write the CSV to this path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) return cmd_analyze(an_h, an_p, an_tols, an_json, an_out);
    if (*evolve)
      return cmd_evolve(ev_h, ev_state, ev_p, ev_obs, ev_tmax, ev_steps, ev_picture, ev_force,
                        ev_tols, ev_out);
    if (*sweep) {
      qh::ParamGrid grid;
      if (sw_family == "pt2cell") {
        grid.axes.push_back({"a", build_axis("a", a_min, a_max, a_step, oa_min->count() > 0,
                                             oa_max->count() > 0)});
        grid.axes.push_back({"b", build_axis("b", b_min, b_max, b_step, ob_min->count() > 0,
                                             ob_max->count() > 0)});
      } else {
        grid.axes.push_back({"n", build_axis("n", static_cast<double>(n_min),
                                             static_cast<double>(n_max),
                                             static_cast<double>(n_step), on_min->count() > 0,
                                             on_max->count() > 0)});
        grid.axes.push_back({"gamma", build_axis("gamma", g_min, g_max, g_step,
                                                 og_min->count() > 0, og_max->count() > 0)});
        grid.axes.push_back({"coupling", build_axis("coupling", c_min, c_max, c_step,
                                                    oc_min->count() > 0, oc_max->count() > 0)});
      }
      return cmd_sweep(sw_family, grid, sw_tol_reality, sw_out);
    }
  } catch (const qh::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
