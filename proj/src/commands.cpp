#include "krot/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "krot/csv.hpp"
#include "krot/pencil.hpp"
#include "krot/psd_projection.hpp"
#include "krot/rng.hpp"

namespace krot {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << body;
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> angle_grid(const AngleSearchConfig& cfg) {
  std::vector<double> thetas;
  thetas.reserve(cfg.grid_points);
  const double step = (cfg.hi - cfg.lo) / static_cast<double>(cfg.grid_points);
  for (int k = 0; k < cfg.grid_points; ++k)
    thetas.push_back(cfg.lo + step * static_cast<double>(k));
  return thetas;
}

std::string spectrum_scan_body(const PencilXcd& pencil,
                               const std::vector<double>& thetas) {
  const auto rows = scan_overlap_spectrum(pencil, thetas);
  std::vector<std::string> header{"theta"};
  for (Eigen::Index i = 0; i < pencil.dim(); ++i)
    header.push_back("eig_" + std::to_string(i + 1));
  std::string body = csv::join_row(header);
  for (const auto& [theta, eigs] : rows) {
    std::vector<std::string> fields{csv::format_double(theta)};
    for (Eigen::Index i = 0; i < eigs.size(); ++i)
      fields.push_back(csv::format_double(eigs(i)));
    body += csv::join_row(fields);
  }
  return body;
}

}  // namespace

int cmd_toy(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ToyParams params =
      (cfg.model.kind == ModelSpec::Kind::kToy) ? cfg.model.toy : ToyParams{};
  const PencilXcd pencil = build_toy_pencil(params);
  const double reference = params.reference_energy();
  const double tau = 1.05;
  const std::vector<double> thetas = angle_grid(cfg.angle);
  fs::create_directories(out_dir);

  write_file(fs::path(out_dir) / "toy_spectrum_scan.csv",
             spectrum_scan_body(pencil, thetas));

  std::string noiseless = csv::join_row({"theta", "kept_dim", "estimate", "abs_error"});
  for (double theta : thetas) {
    std::vector<std::string> fields{csv::format_double(theta)};
    try {
      const RitzXcd sol = solve_rotated(pencil, theta, tau);
      fields.push_back(csv::format_index(sol.kept_dim));
      fields.push_back(csv::format_double(sol.values(0)));
      fields.push_back(csv::format_double(std::abs(sol.values(0) - reference)));
    } catch (const Error&) {
      fields.push_back("0");
      fields.push_back("nan");
      fields.push_back("nan");
    }
    noiseless += csv::join_row(fields);
  }
  write_file(fs::path(out_dir) / "toy_noiseless.csv", noiseless);

  // Per-seed noisy optima: one noisy draw of the pencil at element std 0.1,
  // overlap projected back to physical, then the reference-guided angle
  // search on that single-batch set.
  const int n_seeds = 200;
  const double variance = 0.01;
  std::string noisy = csv::join_row({"seed", "theta", "kept_dim", "estimate", "abs_error"});
  for (int k = 0; k < n_seeds; ++k) {
    rng::Stream stream(cfg.master_seed, {rng::kTagToySeed, static_cast<std::uint64_t>(k)});
    const PencilXcd drawn = sample_noisy_pencil(pencil, variance, stream);
    const auto projected = nearest_physical_overlap(drawn.s);
    BatchSet bs;
    bs.batch_pencils.emplace_back(drawn.h, projected.projected);
    bs.weights.push_back(1.0);
    bs.projection_warning.push_back(0);
    bs.noise.level = variance;
    bs.noise.seed = cfg.master_seed;
    bs.dim = pencil.dim();
    std::vector<std::string> fields{csv::format_int(k)};
    try {
      const AngleResult ar = optimize_theta_oracle(bs, tau, reference, cfg.angle);
      fields.push_back(csv::format_double(ar.theta));
      fields.push_back(csv::format_index(ar.kept_dims.at(0)));
      fields.push_back(csv::format_double(ar.estimate));
      fields.push_back(csv::format_double(std::abs(ar.estimate - reference)));
    } catch (const Error&) {
      fields.push_back("nan");
      fields.push_back("0");
      fields.push_back("nan");
      fields.push_back("nan");
    }
    noisy += csv::join_row(fields);
  }
  write_file(fs::path(out_dir) / "toy_noisy.csv", noisy);
  return 0;
}

int cmd_grid(const ExperimentConfig& cfg, const std::string& out_dir, int threads) {
  const ExperimentGrid grid = run_grid(cfg, threads);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "grid.csv", grid_csv(grid));
  write_file(fs::path(out_dir) / "ratios.csv", ratios_csv(grid));
  write_file(fs::path(out_dir) / "best_by_noise.csv", best_by_noise_csv(grid));
  write_file(fs::path(out_dir) / "failures.csv", failures_csv(grid));

  nlohmann::json manifest;
  manifest["timestamp"] = utc_timestamp();
  manifest["master_seed"] = cfg.master_seed;
  manifest["records"] = grid.records.size();
  manifest["failures"] = grid.failures.size();
  manifest["threads"] = threads;
  write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "grid: " << grid.records.size() << " records, " << grid.failures.size()
            << " failures -> " << out_dir << "\n";
  return grid.failures.empty() ? 0 : 3;
}

int cmd_krylov(const ExperimentConfig& cfg, const std::string& out_dir,
               const std::string& theta_mode) {
  const ResolvedModel resolved = resolve_model(cfg);
  const double noise_level = cfg.noise_levels.front();
  const double tau = cfg.taus.front();

  NoiseConfig ncfg = cfg.noise;
  ncfg.level = noise_level;
  ncfg.seed = cfg.master_seed;
  const PipelineResult pipe =
      iterative_basis_construction(*resolved.truth, ncfg, cfg.convergence, tau);

  fs::create_directories(out_dir);
  std::string history = csv::join_row({"dim", "mu0_bar", "sigma", "epsilon", "delta"});
  for (const PipelineIteration& it : pipe.history) {
    history += csv::join_row({csv::format_index(it.dim), csv::format_double(it.mu0_bar),
                              csv::format_double(it.sigma),
                              csv::format_double(it.epsilon),
                              csv::format_double(it.delta)});
  }
  write_file(fs::path(out_dir) / "krylov_history.csv", history);

  double theta = 0.0;
  double estimate = 0.0;
  if (theta_mode == "none") {
    estimate = solve_gevp_thresholded(pipe.aggregate, tau).values(0);
  } else if (theta_mode == "oracle") {
    const AngleResult ar =
        optimize_theta_oracle(pipe.batches, tau, resolved.reference, cfg.angle);
    theta = ar.theta;
    estimate = ar.estimate;
  } else if (theta_mode == "heuristic") {
    const AngleResult ar = optimize_theta_heuristic(pipe.batches, tau, cfg.angle);
    theta = ar.theta;
    estimate = solve_rotated(pipe.aggregate, theta, tau).values(0);
  } else if (theta_mode.rfind("fixed:", 0) == 0) {
    try {
      theta = std::stod(theta_mode.substr(6));
    } catch (const std::exception&) {
      throw ParseError("theta-mode fixed:<radians> needs a numeric angle, got '" +
                       theta_mode + "'");
    }
    estimate = solve_rotated(pipe.aggregate, theta, tau).values(0);
  } else {
    throw ParseError("theta-mode must be none, oracle, heuristic, or fixed:<radians>");
  }

  nlohmann::json summary;
  summary["noise_level"] = noise_level;
  summary["tau"] = tau;
  summary["converged"] = pipe.converged;
  summary["stop_reason"] = pipe.stop_reason;
  summary["converged_dim"] = pipe.converged_dim;
  summary["mu0_bar"] = pipe.mu0_bar;
  summary["sigma"] = pipe.sigma;
  summary["theta_mode"] = theta_mode;
  summary["theta"] = theta;
  summary["estimate"] = estimate;
  summary["reference"] = resolved.reference;
  summary["abs_error"] = std::abs(estimate - resolved.reference);
  write_file(fs::path(out_dir) / "krylov_summary.json", summary.dump(2) + "\n");

  std::cout << "krylov: dim " << pipe.converged_dim << " (" << pipe.stop_reason
            << "), estimate " << csv::format_double(estimate) << ", reference "
            << csv::format_double(resolved.reference) << "\n";
  return 0;
}

int cmd_scan(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ResolvedModel resolved = resolve_model(cfg);
  const PencilXcd pencil = resolved.truth->pencil_at(resolved.truth->max_dim());
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "spectrum_scan.csv",
             spectrum_scan_body(pencil, angle_grid(cfg.angle)));
  return 0;
}

int cmd_project(const std::string& in_path, const std::string& out_path) {
  const HamiltonianModel model = load_hamiltonian(in_path);
  const auto report = nearest_physical_overlap(model.matrix);
  save_hamiltonian(report.projected, out_path);

  nlohmann::json summary;
  summary["frobenius_distance"] = report.frobenius_distance;
  summary["iterations"] = report.iterations;
  summary["converged"] = report.converged;
  std::cout << summary.dump() << "\n";
  return report.converged ? 0 : 3;
}

}  // namespace krot
