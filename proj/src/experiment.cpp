#include "krot/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "krot/csv.hpp"
#include "krot/pencil.hpp"
#include "krot/rng.hpp"

namespace krot {

namespace {

using nlohmann::json;

std::pair<std::size_t, std::size_t> locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_with_context(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("line " + std::to_string(line) + ", column " +
                     std::to_string(col) + ": " + e.what());
  }
}

void require_keys(const json& obj, const char* where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw ParseError(std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

double get_number(const json& obj, const char* where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw ParseError(std::string(where) + "." + key + " must be a number");
  return obj[key].get<double>();
}

long long get_integer(const json& obj, const char* where, const char* key,
                      long long fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw ParseError(std::string(where) + "." + key + " must be an integer");
  return obj[key].get<long long>();
}

bool get_flag(const json& obj, const char* where, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean())
    throw ParseError(std::string(where) + "." + key + " must be a boolean");
  return obj[key].get<bool>();
}

std::vector<double> get_real_list(const json& obj, const char* key,
                                  std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_array())
    throw ParseError(std::string(key) + " must be an array of numbers");
  std::vector<double> out;
  for (const json& v : obj[key]) {
    if (!v.is_number())
      throw ParseError(std::string(key) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

ModelSpec parse_model(const json& obj) {
  ModelSpec spec;
  if (!obj.is_object()) throw ParseError("model must be an object");
  if (!obj.contains("type") || !obj["type"].is_string())
    throw ParseError("model.type must be one of \"toy\", \"random\", \"file\"");
  const std::string type = obj["type"].get<std::string>();
  if (type == "toy") {
    spec.kind = ModelSpec::Kind::kToy;
    require_keys(obj, "model", {"type", "xi", "delta", "big_delta", "s"});
    spec.toy.xi = get_number(obj, "model", "xi", spec.toy.xi);
    spec.toy.delta = get_number(obj, "model", "delta", spec.toy.delta);
    spec.toy.big_delta = get_number(obj, "model", "big_delta", spec.toy.big_delta);
    spec.toy.s = get_number(obj, "model", "s", spec.toy.s);
  } else if (type == "random") {
    spec.kind = ModelSpec::Kind::kRandom;
    require_keys(obj, "model", {"type", "dim", "seed", "gap_scale"});
    spec.random_dim = static_cast<Eigen::Index>(
        get_integer(obj, "model", "dim", spec.random_dim));
    spec.random_seed = static_cast<std::uint64_t>(
        get_integer(obj, "model", "seed", static_cast<long long>(spec.random_seed)));
    spec.random_gap_scale = get_number(obj, "model", "gap_scale", spec.random_gap_scale);
  } else if (type == "file") {
    spec.kind = ModelSpec::Kind::kFile;
    require_keys(obj, "model", {"type", "path"});
    if (!obj.contains("path") || !obj["path"].is_string())
      throw ParseError("model.path must be a string");
    spec.file_path = obj["path"].get<std::string>();
  } else {
    throw ParseError("model.type must be one of \"toy\", \"random\", \"file\"");
  }
  return spec;
}

// Canonical sort key: noise level, then threshold, then method enum order.
bool record_before(const GridCellRecord& a, const GridCellRecord& b) {
  if (a.noise_level != b.noise_level) return a.noise_level < b.noise_level;
  if (a.tau != b.tau) return a.tau < b.tau;
  return static_cast<int>(a.method) < static_cast<int>(b.method);
}

bool failure_before(const CellFailure& a, const CellFailure& b) {
  if (a.noise_level != b.noise_level) return a.noise_level < b.noise_level;
  if (a.tau != b.tau) return a.tau < b.tau;
  return static_cast<int>(a.method) < static_cast<int>(b.method);
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::kNaive:
      return "naive";
    case Method::kRotatedOracle:
      return "rotated_oracle";
    case Method::kRotatedHeuristic:
      return "rotated_heuristic";
    case Method::kTikhonov:
      return "tikhonov";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "naive") return Method::kNaive;
  if (name == "rotated_oracle") return Method::kRotatedOracle;
  if (name == "rotated_heuristic") return Method::kRotatedHeuristic;
  if (name == "tikhonov") return Method::kTikhonov;
  throw ParseError("unknown method '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (model.kind == ModelSpec::Kind::kToy) model.toy.validate();
  if (model.kind == ModelSpec::Kind::kRandom) {
    if (model.random_dim < 2)
      throw ParseError("model.dim must be at least 2");
    if (!(model.random_gap_scale > 0.0))
      throw ParseError("model.gap_scale must be positive");
  }
  if (model.kind == ModelSpec::Kind::kFile && model.file_path.empty())
    throw ParseError("model.path must not be empty");
  if (max_dim < 2) throw ParseError("krylov.max_dim must be at least 2");
  if (noise.n_batches < 2) throw ParseError("noise.n_batches must be at least 2");
  if (noise.per_batch < 1) throw ParseError("noise.per_batch must be at least 1");
  if (noise_levels.empty()) throw ParseError("noise_levels must not be empty");
  for (double v : noise_levels)
    if (!(v >= 0.0)) throw ParseError("noise_levels must be nonnegative");
  if (taus.empty()) throw ParseError("taus must not be empty");
  for (double t : taus)
    if (!(t >= 0.0)) throw ParseError("taus must be nonnegative");
  if (methods.empty()) throw ParseError("methods must not be empty");
  for (std::size_t i = 0; i < methods.size(); ++i)
    for (std::size_t j = i + 1; j < methods.size(); ++j)
      if (methods[i] == methods[j])
        throw ParseError("methods contains '" + method_name(methods[i]) + "' twice");
  if (!(convergence.gamma > 0.0)) throw ParseError("convergence.gamma must be positive");
  if (!(convergence.hard_floor >= 0.0))
    throw ParseError("convergence.hard_floor must be nonnegative");
  if (convergence.max_iterations < 1)
    throw ParseError("convergence.max_iterations must be at least 1");
  if (!(chemical_accuracy > 0.0))
    throw ParseError("chemical_accuracy must be positive");
  try {
    angle.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("angle: ") + e.what());
  }
}

ExperimentConfig config_from_json(const std::string& text) {
  ExperimentConfig cfg;
  const json doc = parse_with_context(text);
  if (!doc.is_object()) throw ParseError("config root must be an object");
  require_keys(doc, "config",
               {"model", "krylov", "noise", "noise_levels", "taus", "methods",
                "convergence", "angle", "master_seed", "chemical_accuracy"});

  if (doc.contains("model")) cfg.model = parse_model(doc["model"]);
  if (doc.contains("krylov")) {
    const json& k = doc["krylov"];
    if (!k.is_object()) throw ParseError("krylov must be an object");
    require_keys(k, "krylov", {"max_dim", "dt"});
    cfg.max_dim = static_cast<Eigen::Index>(
        get_integer(k, "krylov", "max_dim", cfg.max_dim));
    cfg.dt = get_number(k, "krylov", "dt", cfg.dt);
  }
  if (doc.contains("noise")) {
    const json& n = doc["noise"];
    if (!n.is_object()) throw ParseError("noise must be an object");
    require_keys(n, "noise", {"n_batches", "per_batch", "literal"});
    cfg.noise.n_batches = static_cast<int>(
        get_integer(n, "noise", "n_batches", cfg.noise.n_batches));
    cfg.noise.per_batch = static_cast<int>(
        get_integer(n, "noise", "per_batch", cfg.noise.per_batch));
    cfg.noise.literal = get_flag(n, "noise", "literal", cfg.noise.literal);
  }
  cfg.noise_levels = get_real_list(doc, "noise_levels", cfg.noise_levels);
  cfg.taus = get_real_list(doc, "taus", cfg.taus);
  if (doc.contains("methods")) {
    if (!doc["methods"].is_array())
      throw ParseError("methods must be an array of strings");
    cfg.methods.clear();
    for (const json& v : doc["methods"]) {
      if (!v.is_string()) throw ParseError("methods must be an array of strings");
      cfg.methods.push_back(method_from_name(v.get<std::string>()));
    }
  }
  if (doc.contains("convergence")) {
    const json& c = doc["convergence"];
    if (!c.is_object()) throw ParseError("convergence must be an object");
    require_keys(c, "convergence", {"gamma", "hard_floor", "max_iterations"});
    cfg.convergence.gamma = get_number(c, "convergence", "gamma", cfg.convergence.gamma);
    cfg.convergence.hard_floor =
        get_number(c, "convergence", "hard_floor", cfg.convergence.hard_floor);
    cfg.convergence.max_iterations = static_cast<int>(get_integer(
        c, "convergence", "max_iterations", cfg.convergence.max_iterations));
  }
  if (doc.contains("angle")) {
    const json& a = doc["angle"];
    if (!a.is_object()) throw ParseError("angle must be an object");
    require_keys(a, "angle", {"grid_points", "refine_iters", "lo", "hi"});
    cfg.angle.grid_points =
        static_cast<int>(get_integer(a, "angle", "grid_points", cfg.angle.grid_points));
    cfg.angle.refine_iters =
        static_cast<int>(get_integer(a, "angle", "refine_iters", cfg.angle.refine_iters));
    cfg.angle.lo = get_number(a, "angle", "lo", cfg.angle.lo);
    cfg.angle.hi = get_number(a, "angle", "hi", cfg.angle.hi);
  }
  if (doc.contains("master_seed")) {
    if (!doc["master_seed"].is_number_unsigned() &&
        !doc["master_seed"].is_number_integer())
      throw ParseError("master_seed must be a nonnegative integer");
    if (doc["master_seed"].is_number_integer() && doc["master_seed"].get<long long>() < 0)
      throw ParseError("master_seed must be a nonnegative integer");
    cfg.master_seed = doc["master_seed"].get<std::uint64_t>();
  }
  cfg.chemical_accuracy =
      get_number(doc, "config", "chemical_accuracy", cfg.chemical_accuracy);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

std::string config_schema() {
  return R"schema({
  "model": {
    "type": "\"toy\" | \"random\" | \"file\" (default \"toy\")",
    "xi": "toy: coupling scale, > 0 (default 1.1)",
    "delta": "toy: ground offset, > 0 (default 0.1)",
    "big_delta": "toy: excited offset, > 0 (default 2.0)",
    "s": "toy: overlap coupling in [0, 1) (default 0.9)",
    "dim": "random: matrix dimension >= 2 (default 20)",
    "seed": "random: draw seed (default 97)",
    "gap_scale": "random: spectral range rescale, > 0 (default 4.0)",
    "path": "file: dense-matrix JSON path"
  },
  "krylov": {
    "max_dim": "largest basis dimension to grow, >= 2 (default 33)",
    "dt": "time step; <= 0 selects pi / spectral_range (default 0)"
  },
  "noise": {
    "n_batches": "batches per measurement, >= 2 (default 100)",
    "per_batch": "noise instances averaged per batch, >= 1 (default 1250)",
    "literal": "materialize every instance instead of the variance/p shortcut (default false)"
  },
  "noise_levels": "array of per-element noise variances (default 1e-7 .. 1e-2 decades)",
  "taus": "array of threshold values (default 1e-7 .. 1e-1 decades)",
  "methods": "subset of [\"naive\", \"rotated_oracle\", \"rotated_heuristic\", \"tikhonov\"] (default all)",
  "convergence": {
    "gamma": "epsilon multiplier, > 0 (default 1.0)",
    "hard_floor": "absolute stop threshold (default 1e-4)",
    "max_iterations": "dimension-growth budget, >= 1 (default 34)"
  },
  "angle": {
    "grid_points": "coarse scan resolution, >= 8 (default 181)",
    "refine_iters": "golden-section steps, >= 0 (default 40)",
    "lo": "domain start in radians (default 0)",
    "hi": "domain end, exclusive (default pi)"
  },
  "master_seed": "64-bit seed; every stream derives from it (default 42)",
  "chemical_accuracy": "abs_error flag threshold in Hartree, > 0 (default 1.6e-3)"
}
)schema";
}

ResolvedModel resolve_model(const ExperimentConfig& cfg) {
  ResolvedModel out;
  switch (cfg.model.kind) {
    case ModelSpec::Kind::kToy:
      out.truth = std::make_unique<ToyTruth>(cfg.model.toy);
      out.reference = cfg.model.toy.reference_energy();
      return out;
    case ModelSpec::Kind::kRandom:
      out.model = std::make_unique<HamiltonianModel>(random_hamiltonian(
          cfg.model.random_dim, cfg.model.random_seed, cfg.model.random_gap_scale));
      break;
    case ModelSpec::Kind::kFile:
      out.model = std::make_unique<HamiltonianModel>(load_hamiltonian(cfg.model.file_path));
      break;
  }
  out.krylov.max_dim = cfg.max_dim;
  out.krylov.dt = (cfg.dt > 0.0) ? cfg.dt : select_dt(*out.model);
  out.krylov.psi0 = default_psi0(*out.model, cfg.master_seed);
  out.truth = std::make_unique<KrylovTruth>(*out.model, out.krylov);
  out.reference = out.model->spectrum(0);
  return out;
}

namespace {

// Construction seed for one grid cell. Keyed on the cell's values rather
// than list positions, so a record is reproducible from (master_seed,
// noise_level, tau) alone; the method never enters, which hands every
// method the same batches.
std::uint64_t cell_seed(std::uint64_t master, double noise_level, double tau) {
  std::uint64_t s = rng::fold(master, rng::kTagCell);
  s = rng::fold(s, std::bit_cast<std::uint64_t>(noise_level));
  return rng::fold(s, std::bit_cast<std::uint64_t>(tau));
}

}  // namespace

GridCellRecord run_cell(const ExperimentConfig& cfg, double noise_level, double tau,
                        Method method) {
  if (!(noise_level <= tau))
    throw Error("inadmissible cell: noise " + std::to_string(noise_level) +
                " exceeds tau " + std::to_string(tau));
  const ResolvedModel resolved = resolve_model(cfg);

  NoiseConfig ncfg = cfg.noise;
  ncfg.level = noise_level;
  ncfg.seed = cell_seed(cfg.master_seed, noise_level, tau);
  const PipelineResult pipe =
      iterative_basis_construction(*resolved.truth, ncfg, cfg.convergence, tau);
  if (pipe.stop_reason == "max_iterations")
    throw Error("MaxIterations: no convergence by dimension " +
                std::to_string(pipe.converged_dim));

  const PencilXcd& aggregate = pipe.aggregate;
  Eigen::Index naive_kept = 0;
  try {
    naive_kept = solve_gevp_thresholded(aggregate, tau).kept_dim;
  } catch (const Error&) {
    naive_kept = 0;
  }

  double estimate = 0.0;
  double theta = 0.0;
  Eigen::Index kept = 0;
  switch (method) {
    case Method::kNaive: {
      const RitzXcd sol = solve_gevp_thresholded(aggregate, tau);
      estimate = sol.values(0);
      kept = sol.kept_dim;
      break;
    }
    case Method::kRotatedOracle: {
      const AngleResult ar =
          optimize_theta_oracle(pipe.batches, tau, resolved.reference, cfg.angle);
      const RitzXcd sol = solve_rotated(aggregate, ar.theta, tau);
      estimate = ar.estimate;
      theta = ar.theta;
      kept = sol.kept_dim;
      break;
    }
    case Method::kRotatedHeuristic: {
      const AngleResult ar = optimize_theta_heuristic(pipe.batches, tau, cfg.angle);
      const RitzXcd sol = solve_rotated(aggregate, ar.theta, tau);
      estimate = sol.values(0);
      theta = ar.theta;
      kept = sol.kept_dim;
      break;
    }
    case Method::kTikhonov: {
      const RitzXcd sol = tikhonov_solve(aggregate, tau);
      estimate = sol.values(0);
      kept = sol.kept_dim;
      break;
    }
  }

  GridCellRecord rec;
  rec.noise_level = noise_level;
  rec.tau = tau;
  rec.method = method;
  rec.abs_error = std::abs(estimate - resolved.reference);
  rec.kept_dim_delta = kept - naive_kept;
  rec.theta = theta;
  rec.sigma = pipe.sigma;
  rec.converged_dim = pipe.converged_dim;
  rec.within_chemical_accuracy = rec.abs_error <= cfg.chemical_accuracy;
  return rec;
}

ExperimentGrid run_grid(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  if (threads < 1) threads = 1;

  std::vector<double> levels = cfg.noise_levels;
  std::vector<double> taus = cfg.taus;
  std::vector<Method> methods = cfg.methods;
  std::sort(levels.begin(), levels.end());
  std::sort(taus.begin(), taus.end());
  std::sort(methods.begin(), methods.end(),
            [](Method a, Method b) { return static_cast<int>(a) < static_cast<int>(b); });

  struct Job {
    double noise_level;
    double tau;
    Method method;
  };
  std::vector<Job> jobs;
  for (double v : levels)
    for (double t : taus) {
      if (!(v <= t)) continue;
      for (Method m : methods) jobs.push_back({v, t, m});
    }

  std::vector<std::optional<GridCellRecord>> results(jobs.size());
  std::vector<std::optional<CellFailure>> errors(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const Job& job = jobs[k];
      try {
        results[k] = run_cell(cfg, job.noise_level, job.tau, job.method);
      } catch (const std::exception& e) {
        errors[k] = CellFailure{job.noise_level, job.tau, job.method, e.what()};
      }
    }
  };

  if (threads == 1 || jobs.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int n = std::min<int>(threads, static_cast<int>(jobs.size()));
    pool.reserve(n);
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  ExperimentGrid grid;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (results[k]) grid.records.push_back(*results[k]);
    if (errors[k]) grid.failures.push_back(*errors[k]);
  }
  std::sort(grid.records.begin(), grid.records.end(), record_before);
  std::sort(grid.failures.begin(), grid.failures.end(), failure_before);
  return grid;
}

std::string grid_csv(const ExperimentGrid& grid) {
  std::string out = std::string(kGridHeader) + "\n";
  for (const GridCellRecord& r : grid.records) {
    out += csv::join_row({csv::format_double(r.noise_level), csv::format_double(r.tau),
                          method_name(r.method), csv::format_double(r.abs_error),
                          csv::format_index(r.kept_dim_delta),
                          csv::format_double(r.theta), csv::format_double(r.sigma),
                          csv::format_index(r.converged_dim),
                          csv::format_bool(r.within_chemical_accuracy)});
  }
  return out;
}

std::string ratios_csv(const ExperimentGrid& grid) {
  std::string out = std::string(kRatiosHeader) + "\n";
  std::map<std::pair<double, double>, double> naive_error;
  for (const GridCellRecord& r : grid.records)
    if (r.method == Method::kNaive) naive_error[{r.noise_level, r.tau}] = r.abs_error;
  for (const GridCellRecord& r : grid.records) {
    if (r.method == Method::kNaive) continue;
    const auto it = naive_error.find({r.noise_level, r.tau});
    if (it == naive_error.end()) continue;
    out += csv::join_row({csv::format_double(r.noise_level), csv::format_double(r.tau),
                          method_name(r.method),
                          csv::format_double(r.abs_error / it->second),
                          csv::format_index(r.kept_dim_delta)});
  }
  return out;
}

std::string best_by_noise_csv(const ExperimentGrid& grid) {
  std::string out = std::string(kBestByNoiseHeader) + "\n";
  // records are canonically sorted, so a linear pass visits each
  // (noise, method) group's taus in ascending order and strict < keeps the
  // smallest tau among ties.
  std::map<std::pair<double, int>, std::pair<double, double>> best;
  for (const GridCellRecord& r : grid.records) {
    const std::pair<double, int> key{r.noise_level, static_cast<int>(r.method)};
    const auto it = best.find(key);
    if (it == best.end() || r.abs_error < it->second.second)
      best[key] = {r.tau, r.abs_error};
  }
  for (const auto& [key, value] : best) {
    out += csv::join_row({csv::format_double(key.first),
                          method_name(static_cast<Method>(key.second)),
                          csv::format_double(value.first),
                          csv::format_double(value.second)});
  }
  return out;
}

std::string failures_csv(const ExperimentGrid& grid) {
  std::string out = std::string(kFailuresHeader) + "\n";
  for (const CellFailure& f : grid.failures) {
    out += csv::join_row({csv::format_double(f.noise_level), csv::format_double(f.tau),
                          method_name(f.method), csv::escape(f.reason)});
  }
  return out;
}

}  // namespace krot
