#include "delaylattice/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "delaylattice/fundamental.hpp"
#include "delaylattice/representation.hpp"
#include "delaylattice/solver.hpp"
#include "delaylattice/stability.hpp"
#include "delaylattice/volterra.hpp"

namespace dlat {

namespace {

using nlohmann::json;

int log_level() {
  const char* env = std::getenv("DELAY_LATTICE_LOG");
  if (env == nullptr) return 0;
  const std::string v(env);
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

void log_line(int level, const std::string& msg) {
  if (log_level() >= level) std::cerr << "[delay-lattice] " << msg << "\n";
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Complex parse_entry(const json& j, const std::string& where) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return Complex(j[0].get<double>(), j[1].get<double>());
  }
  throw std::invalid_argument(where + ": entry must be a number or [re, im]");
}

Mat parse_matrix(const json& j, Eigen::Index dim, const std::string& where) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    throw std::invalid_argument(where + ": expected " + std::to_string(dim) + " rows");
  }
  Mat m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      throw std::invalid_argument(where + ": row " + std::to_string(r) + " has wrong length");
    }
    for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = parse_entry(row[c], where);
  }
  return m;
}

Vec parse_vector(const json& j, Eigen::Index dim, const std::string& where) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    throw std::invalid_argument(where + ": expected " + std::to_string(dim) + " entries");
  }
  Vec v(dim);
  for (Eigen::Index r = 0; r < dim; ++r) v(r) = parse_entry(j[r], where);
  return v;
}

MatrixSignal parse_matrix_signal(const json& j, Eigen::Index dim, const std::string& where) {
  const std::string type = j.value("type", "");
  if (type == "constant") {
    return MatrixSignal::constant(parse_matrix(j.at("matrix"), dim, where + ".matrix"));
  }
  if (type == "trig") {
    std::vector<TrigTerm<Mat>> terms;
    for (std::size_t i = 0; i < j.at("terms").size(); ++i) {
      const json& term = j["terms"][i];
      const std::string w = where + ".terms[" + std::to_string(i) + "]";
      TrigTerm<Mat> t;
      t.frequency = term.at("frequency").get<double>();
      t.cos_coef = term.contains("cos") ? parse_matrix(term["cos"], dim, w + ".cos")
                                        : Mat(Mat::Zero(dim, dim));
      t.sin_coef = term.contains("sin") ? parse_matrix(term["sin"], dim, w + ".sin")
                                        : Mat(Mat::Zero(dim, dim));
      terms.push_back(std::move(t));
    }
    return MatrixSignal::trig_polynomial(std::move(terms), j.value("period", 1.0));
  }
  if (type == "pwlinear") {
    std::vector<double> times = j.at("times").get<std::vector<double>>();
    std::vector<Mat> values;
    for (std::size_t i = 0; i < j.at("values").size(); ++i) {
      values.push_back(parse_matrix(j["values"][i], dim, where + ".values[" + std::to_string(i) + "]"));
    }
    return MatrixSignal::piecewise_linear(std::move(times), std::move(values));
  }
  throw std::invalid_argument(where + ": unknown signal type '" + type + "'");
}

VectorSignal parse_vector_signal(const json& j, Eigen::Index dim, const std::string& where) {
  const std::string type = j.value("type", "");
  if (type == "constant") {
    const json& v = j.contains("vector") ? j["vector"] : j.at("value");
    return VectorSignal::constant(parse_vector(v, dim, where));
  }
  if (type == "pwlinear") {
    std::vector<double> times = j.at("times").get<std::vector<double>>();
    std::vector<Vec> values;
    for (std::size_t i = 0; i < j.at("values").size(); ++i) {
      values.push_back(parse_vector(j["values"][i], dim, where + ".values[" + std::to_string(i) + "]"));
    }
    return VectorSignal::piecewise_linear(std::move(times), std::move(values));
  }
  throw std::invalid_argument(where + ": unknown signal type '" + type + "'");
}

ToolConfig parse_config(const json& j) {
  const Eigen::Index dim = j.at("dim").get<Eigen::Index>();
  std::vector<double> delays = j.at("delays").get<std::vector<double>>();
  std::vector<MatrixSignal> coefficients;
  if (j.at("coefficients").size() != delays.size()) {
    throw std::invalid_argument("coefficients: expected one signal per delay");
  }
  for (std::size_t i = 0; i < delays.size(); ++i) {
    coefficients.push_back(
        parse_matrix_signal(j["coefficients"][i], dim, "coefficients[" + std::to_string(i) + "]"));
  }
  DelaySystem sys(dim, std::move(delays), std::move(coefficients));
  const double start = j.value("start", 0.0);
  VectorSignal phi = parse_vector_signal(j.at("phi"), dim, "phi");
  ToolConfig cfg{InitialProblem(std::move(sys), start, std::move(phi))};
  cfg.horizon = j.value("horizon", start + cfg.problem.system().max_delay() * 2.0);
  if (j.contains("tolerances")) {
    const json& tol = j["tolerances"];
    cfg.compat_tol = tol.value("compat", cfg.compat_tol);
    cfg.resolvent_tol = tol.value("resolvent", cfg.resolvent_tol);
    cfg.certify_tol = tol.value("certify", cfg.certify_tol);
  }
  cfg.seed = j.value("seed", std::uint64_t{0});
  return cfg;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Eigen::Index d = traj.values.empty() ? 0 : traj.values[0].size();
  out << "t";
  for (Eigen::Index i = 1; i <= d; ++i) out << ",re(y_" << i << "),im(y_" << i << ")";
  out << "\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << fmt(traj.times[k]);
    for (Eigen::Index i = 0; i < d; ++i) {
      out << "," << fmt(traj.values[k](i).real()) << "," << fmt(traj.values[k](i).imag());
    }
    out << "\n";
  }
}

void write_slice_atoms_csv(std::ostream& out, const std::vector<FundamentalSlice>& slices) {
  const Eigen::Index d = slices.empty() ? 0 : slices[0].plateaus[0].rows();
  out << "t,alpha,f_value,n_indices";
  for (Eigen::Index r = 1; r <= d; ++r) {
    for (Eigen::Index c = 1; c <= d; ++c) {
      out << ",re(jump_" << r << c << "),im(jump_" << r << c << ")";
    }
  }
  out << "\n";
  for (const FundamentalSlice& sl : slices) {
    for (const SliceAtom& a : sl.atoms) {
      out << fmt(sl.t) << "," << fmt(a.alpha) << "," << fmt(a.point.value) << ","
          << a.point.indices.size();
      for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
          out << "," << fmt(a.jump(r, c).real()) << "," << fmt(a.jump(r, c).imag());
        }
      }
      out << "\n";
    }
  }
}

int cmd_check(const ToolConfig& cfg) {
  const CompatibilityReport compat = check_compatibility(cfg.problem, cfg.compat_tol);
  std::cout << "compatibility residual = " << fmt(compat.residual) << " ("
            << (compat.compatible ? "compatible" : "NOT compatible") << ")\n";
  const AtomicKernel kernel = kernel_from_system(cfg.problem);
  const BInfinityReport b = validate_b_infinity(kernel);
  std::cout << "B-infinity norm = " << fmt(b.norm) << "\n";
  std::cout << "kernel sup value = " << fmt(b.sup_value)
            << (b.sup_value <= b.norm + 1e-12 ? " (<= norm)" : " (EXCEEDS norm)") << "\n";
  std::cout << "near-diagonal variation (t - tau < tau_1) = " << fmt(b.near_diagonal_variation)
            << "\n";
  const bool ok = compat.compatible && b.kernel_type_ok && b.sup_value <= b.norm + 1e-12 &&
                  b.near_diagonal_variation <= 1e-12;
  std::cout << (ok ? "check passed" : "check FAILED") << "\n";
  return ok ? 0 : 1;
}

int cmd_simulate(const ToolConfig& cfg, double t_end, double step,
                 const std::optional<std::string>& out_path) {
  const CompatibilityReport compat = check_compatibility(cfg.problem, cfg.compat_tol);
  if (!compat.compatible) {
    std::cout << "warning: compatibility residual = " << fmt(compat.residual) << "\n";
  }
  const Trajectory traj = sample_trajectory(cfg.problem, t_end, step, cfg.compat_tol);
  if (out_path) {
    auto out = open_out(*out_path);
    write_trajectory_csv(out, traj);
  } else {
    write_trajectory_csv(std::cout, traj);
  }
  log_line(1, "simulate: " + std::to_string(traj.times.size()) + " samples");
  return 0;
}

int cmd_fundamental(const ToolConfig& cfg, double t_end, double step,
                    const std::optional<std::string>& out_path) {
  const DelaySystem& sys = cfg.problem.system();
  const double s = cfg.problem.start();
  Lattice lat = enumerate_lattice(sys.delays(), (t_end - s) + sys.min_delay());
  std::vector<FundamentalSlice> slices;
  std::cout << "t,norm(X(t,s))\n";
  for (double t = s; t <= t_end + 1e-12 * std::max(1.0, step); t += step) {
    std::cout << fmt(t) << "," << fmt(operator_norm(eval_fundamental(sys, t, s))) << "\n";
    slices.push_back(build_slice(sys, t, s, lat));
  }
  if (out_path) {
    auto out = open_out(*out_path);
    write_slice_atoms_csv(out, slices);
  }
  return 0;
}

int cmd_represent(const ToolConfig& cfg, bool certify, int samples, double t_end,
                  const std::optional<std::string>& out_path) {
  const CompatibilityReport compat = check_compatibility(cfg.problem, cfg.compat_tol);
  if (!compat.compatible) {
    std::cout << "validation failure: compatibility residual = " << fmt(compat.residual) << "\n";
    return 1;
  }
  const double horizon = t_end > cfg.problem.start() ? t_end : cfg.horizon;
  if (out_path) {
    Trajectory traj;
    traj.start = cfg.problem.start();
    const int n = std::max(samples, 2);
    Lattice lat = enumerate_lattice(cfg.problem.system().delays(),
                                    (horizon - cfg.problem.start()) + cfg.problem.system().min_delay());
    for (int i = 0; i < n; ++i) {
      const double t = cfg.problem.start() + (horizon - cfg.problem.start()) * i / (n - 1);
      traj.times.push_back(t);
      traj.values.push_back(represent_solution(cfg.problem, t, &lat));
    }
    auto out = open_out(*out_path);
    write_trajectory_csv(out, traj);
  }
  if (certify) {
    const CertificationReport report =
        certify_equivalence(cfg.problem, horizon, samples, cfg.seed);
    std::cout << "max error = " << fmt(report.max_error) << " at t = " << fmt(report.worst_t)
              << " over " << report.n_evaluations << " samples\n";
    return report.max_error <= cfg.certify_tol ? 0 : 1;
  }
  return 0;
}

int cmd_resolvent(const ToolConfig& cfg, int samples) {
  const AtomicKernel kernel = kernel_from_system(cfg.problem);
  ResolventConfig rc;
  rc.tol = cfg.resolvent_tol;
  const AtomicResolvent rho = build_resolvent(kernel, rc);
  std::cout << "atomic resolvent residual = " << fmt(rho.stats().residual_estimate) << "\n";

  const GridKernel grid = GridKernel::sample(kernel, 8);
  const GridResolvent grid_rho = build_resolvent(grid, rc, cfg.seed + 1);
  std::cout << "grid resolvent residual = " << fmt(grid_rho.stats().residual_estimate)
            << " (r = " << fmt(grid_rho.stats().r) << ", lambda = " << fmt(grid_rho.stats().lambda)
            << ", iterations = " << grid_rho.stats().iterations << ")\n";

  double worst = 0.0;
  const int n = std::max(samples, 4);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const double t = kernel.lower() + (kernel.upper() - kernel.lower()) * (i + 0.5) / n;
      const double beta = kernel.lower() + (kernel.upper() - kernel.lower()) * (k + 0.5) / n;
      worst = std::max(worst, operator_norm(rho.value(t, beta) -
                                            Mat(eval_fundamental(cfg.problem.system(), t, beta) -
                                                (t >= beta ? 1.0 : 0.0) *
                                                    Mat::Identity(kernel.dim(), kernel.dim()))));
    }
  }
  std::cout << "max deviation from X - H I = " << fmt(worst) << "\n";
  return 0;
}

int cmd_stability(const ToolConfig& cfg, double t_end, int samples,
                  const std::optional<std::string>& out_path) {
  const auto profile = variation_profile(cfg.problem.system(), cfg.problem.start(), t_end, samples);
  if (out_path) {
    auto out = open_out(*out_path);
    out << "t_minus_s,V\n";
    for (const auto& p : profile) out << fmt(p.t_minus_s) << "," << fmt(p.variation) << "\n";
  }
  const DecayEstimate est = fit_decay(profile);
  std::cout << "verdict: " << to_string(est.verdict) << "\n";
  if (est.verdict != DecayVerdict::FiniteTimeExtinction) {
    std::cout << "fit: c = " << fmt(est.c) << ", alpha = " << fmt(est.alpha)
              << ", rms residual = " << fmt(est.fit_residual) << "\n";
    std::cout << "envelope fit: c = " << fmt(est.envelope_c)
              << ", alpha = " << fmt(est.envelope_alpha) << "\n";
  }
  return 0;
}

}  // namespace

ToolConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"difference-delay systems: simulation, fundamental solution, "
               "representation formula, resolvents and stability"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  double t_end = 0.0;
  double step = 0.1;
  int samples = 24;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double tol = -1.0;
  bool certify = false;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--config", config_path, "problem config (JSON)")->required();
    if (needs_out) cmd->add_option("--out", out_path, "output CSV path");
    cmd->add_option("--seed", seed, "RNG seed override")->each([&](const std::string&) {
      seed_given = true;
    });
    cmd->add_option("--tol", tol, "tolerance override");
  };

  CLI::App* check = app.add_subcommand("check", "compatibility and B-infinity validation");
  add_common(check, false);

  CLI::App* simulate = app.add_subcommand("simulate", "trajectory CSV");
  add_common(simulate, true);
  simulate->add_option("--t-end", t_end, "end time")->required();
  simulate->add_option("--step", step, "grid step");

  CLI::App* fundamental = app.add_subcommand("fundamental", "X(t,s) table and slice atom CSV");
  add_common(fundamental, true);
  fundamental->add_option("--t-end", t_end, "end time")->required();
  fundamental->add_option("--step", step, "grid step");

  CLI::App* represent = app.add_subcommand("represent", "representation values and certification");
  add_common(represent, true);
  represent->add_option("--t-end", t_end, "certification horizon");
  represent->add_option("--samples", samples, "number of random sample times");
  represent->add_flag("--certify", certify, "compare against the direct solver");

  CLI::App* resolvent = app.add_subcommand("resolvent", "resolvent residual report");
  add_common(resolvent, false);
  resolvent->add_option("--samples", samples, "sample grid per axis");

  CLI::App* stability = app.add_subcommand("stability", "variation profile and decay fit");
  add_common(stability, true);
  stability->add_option("--t-end", t_end, "profile end time")->required();
  stability->add_option("--samples", samples, "number of profile points");

  std::vector<const char*> argv;
  argv.push_back("delay-lattice");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    ToolConfig cfg = load_config(config_path);
    if (seed_given) cfg.seed = seed;
    if (tol > 0.0) {
      cfg.compat_tol = tol;
      cfg.certify_tol = tol;
    }
    std::optional<std::string> out =
        out_path.empty() ? std::nullopt : std::optional<std::string>(out_path);

    if (check->parsed()) return cmd_check(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg, t_end, step, out);
    if (fundamental->parsed()) return cmd_fundamental(cfg, t_end, step, out);
    if (represent->parsed()) return cmd_represent(cfg, certify, samples, t_end, out);
    if (resolvent->parsed()) return cmd_resolvent(cfg, samples);
    if (stability->parsed()) return cmd_stability(cfg, t_end, samples, out);
    return 1;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical non-convergence: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dlat
