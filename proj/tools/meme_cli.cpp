// meme_cli: log-determinants, mixture entropies and a small BO demo from the
// command line. Every command resolves defaults < --config file < flags and
// echoes the resolved configuration with its output.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "meme/bo.hpp"
#include "meme/gmm.hpp"
#include "meme/json_io.hpp"
#include "meme/logdet.hpp"
#include "meme/matrix_market.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

constexpr Eigen::Index kMaxExactN = 4000;

/// Flags applied on top of the file configuration, only when given.
using Overrides = std::vector<std::function<void(json&)>>;

template <class T>
CLI::Option* add_override(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key,
                          const std::string& help) {
  auto value = std::make_shared<T>();
  CLI::Option* opt = app->add_option(flag, *value, help);
  ov.push_back([opt, value, key](json& cfg) {
    if (opt->count() > 0) cfg[key] = *value;
  });
  return opt;
}

CLI::Option* add_switch(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, bool set_to,
                        const std::string& help) {
  CLI::Option* opt = app->add_flag(flag, help);
  ov.push_back([opt, key, set_to](json& cfg) {
    if (opt->count() > 0) cfg[key] = set_to;
  });
  return opt;
}

bool same_kind(const json& def, const json& v) {
  if (def.is_number_float()) return v.is_number();
  if (def.is_number_integer()) return v.is_number_integer();
  return def.type() == v.type();
}

void merge_checked(json& target, const json& source, const std::string& where) {
  if (!source.is_object()) throw meme::Error(where + " must be a JSON object");
  for (const auto& [key, value] : source.items()) {
    if (!target.contains(key)) throw meme::Error("unknown config key '" + where + key + "'");
    json& slot = target[key];
    if (slot.is_object()) {
      merge_checked(slot, value, key + ".");
      continue;
    }
    if (!same_kind(slot, value)) throw meme::Error("config key '" + where + key + "' has the wrong type");
    if (slot.is_array())
      for (const auto& item : value)
        if (!item.is_number() && !item.is_string())
          throw meme::Error("config key '" + where + key + "' must hold numbers or strings");
    slot = value;
  }
}

json resolve_config(json defaults, const std::string& config_path, const Overrides& ov) {
  if (!config_path.empty()) merge_checked(defaults, meme::read_json_file(config_path), "");
  for (const auto& apply : ov) apply(defaults);
  return defaults;
}

/// Flags shared by the commands that run the MaxEnt solver.
void add_solver_flags(CLI::App* app, Overrides& ov) {
  add_override<double>(app, ov, "--tol", "tol", "Newton stopping tolerance on max |gradient|");
  add_override<double>(app, ov, "--jitter", "jitter", "Hessian diagonal jitter");
  add_override<double>(app, ov, "--grid", "grid", "quadrature grid spacing on [0,1]");
}

json solver_defaults() {
  const meme::SolverConfig s;
  return {{"tol", s.tolerance}, {"jitter", s.hessian_jitter}, {"grid", s.grid_spacing}};
}

meme::SolverConfig solver_from(const json& cfg) {
  meme::SolverConfig s;
  s.tolerance = cfg["tol"].get<double>();
  s.hessian_jitter = cfg["jitter"].get<double>();
  s.grid_spacing = cfg["grid"].get<double>();
  s.validate();
  return s;
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

/// Runs jobs on a bounded pool and hands results to `emit` in job order as
/// soon as each prefix is complete.
template <class Result>
void run_ordered(std::size_t jobs, unsigned workers, const std::function<Result(std::size_t)>& job,
                 const std::function<void(Result&)>& emit) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs)));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs; ++i) {
      Result r = job(i);
      emit(r);
    }
    return;
  }
  std::vector<std::optional<Result>> done(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<bool> finished(jobs, false);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        std::optional<Result> r;
        std::exception_ptr err;
        try {
          r = job(i);
        } catch (...) {
          err = std::current_exception();
        }
        std::lock_guard lock(mu);
        done[i] = std::move(r);
        errors[i] = err;
        finished[i] = true;
        cv.notify_all();
      }
    });
  for (std::size_t i = 0; i < jobs; ++i) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return finished[i]; });
    if (errors[i]) {
      next = jobs;
      lock.unlock();
      pool.clear();
      std::rethrow_exception(errors[i]);
    }
    Result r = std::move(*done[i]);
    lock.unlock();
    emit(r);
  }
}

std::string csv_field(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// ---------------------------------------------------------------- logdet

json logdet_defaults() {
  const meme::KernelSpec k;
  const meme::ProbeConfig p;
  json cfg = {{"matrix", ""},
              {"kernel",
               {{"n", k.n}, {"dim", k.input_dim}, {"l", k.lengthscale}, {"noise", k.noise}, {"input_scale", k.input_scale}}},
              {"sweep_l", json::array()},
              {"repeats", 1},
              {"methods", json::array({"meme"})},
              {"moments", p.num_moments},
              {"probes", p.num_probes},
              {"probe", "gaussian"},
              {"basis", "legendre"},
              {"delta", 0.5e-4},
              {"seed", 0},
              {"exact", false},
              {"format", "jsonl"},
              {"timing", true}};
  cfg.update(solver_defaults());
  return cfg;
}

meme::KernelSpec kernel_from(const json& k, double l, std::uint64_t seed) {
  meme::KernelSpec spec;
  spec.n = k["n"].get<Eigen::Index>();
  spec.input_dim = k["dim"].get<int>();
  spec.lengthscale = l;
  spec.noise = k["noise"].get<double>();
  spec.input_scale = k["input_scale"].get<double>();
  spec.seed = seed;
  spec.validate();
  return spec;
}

struct LogDetJob {
  std::optional<double> l;
  std::uint64_t seed;
};

int cmd_logdet(const json& cfg, std::ostream& out) {
  const auto methods = cfg["methods"].get<std::vector<std::string>>();
  if (methods.empty()) throw meme::Error("no methods requested");
  for (const auto& m : methods)
    if (m != "meme" && m != "taylor" && m != "chebyshev") throw meme::Error("unknown logdet method '" + m + "'");
  const std::string format = cfg["format"].get<std::string>();
  if (format != "jsonl" && format != "csv") throw meme::Error("format must be jsonl or csv");
  const int repeats = cfg["repeats"].get<int>();
  if (repeats < 1) throw meme::Error("repeats must be >= 1");
  const bool timing = cfg["timing"].get<bool>();
  const bool exact = cfg["exact"].get<bool>();
  const double delta = cfg["delta"].get<double>();
  const auto seed0 = cfg["seed"].get<std::uint64_t>();

  meme::LogDetConfig base;
  base.probes.num_moments = cfg["moments"].get<int>();
  base.probes.num_probes = cfg["probes"].get<int>();
  const std::string probe = cfg["probe"].get<std::string>();
  if (probe == "gaussian")
    base.probes.distribution = meme::ProbeDistribution::gaussian;
  else if (probe == "rademacher")
    base.probes.distribution = meme::ProbeDistribution::rademacher;
  else
    throw meme::Error("probe must be gaussian or rademacher");
  base.basis = meme::parse_basis(cfg["basis"].get<std::string>());
  base.solver = solver_from(cfg);
  base.validate();
  if (!(delta > 0.0 && delta < 1.0)) throw meme::Error("delta must lie in (0,1)");

  const std::string path = cfg["matrix"].get<std::string>();
  std::optional<meme::SymmetricOperator> matrix;
  std::vector<LogDetJob> jobs;
  const auto sweep = cfg["sweep_l"].get<std::vector<double>>();
  if (!path.empty()) {
    if (!sweep.empty()) throw meme::Error("sweep_l applies to kernel input only");
    matrix = meme::read_matrix_market(path);
    for (int r = 0; r < repeats; ++r) jobs.push_back({std::nullopt, seed0 + r});
  } else {
    const std::vector<double> ls = sweep.empty() ? std::vector<double>{cfg["kernel"]["l"].get<double>()} : sweep;
    for (double l : ls)
      for (int r = 0; r < repeats; ++r) jobs.push_back({l, seed0 + r});
    kernel_from(cfg["kernel"], ls.front(), seed0);  // validate before starting
  }

  const unsigned workers = meme::resolve_threads();
  const int inner_threads = jobs.size() > 1 && workers > 1 ? 1 : 0;
  bool all_converged = true;

  const std::vector<std::string> columns = {"method", "n",          "l",       "kappa",    "logdet_est", "logdet_true",
                                            "abs_err", "rel_err", "seconds",   "seed",    "lambda_u", "converged"};
  if (format == "csv") {
    out << "# config " << cfg.dump() << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << '\n';
  }

  const std::function<std::vector<json>(std::size_t)> job = [&](std::size_t i) {
    const LogDetJob& jb = jobs[i];
    const meme::SymmetricOperator op =
        matrix ? *matrix : meme::make_se_kernel(kernel_from(cfg["kernel"], *jb.l, jb.seed));
    const Eigen::Index n = op.size();
    json truth = nullptr, kappa = nullptr;
    if (exact) {
      if (n <= kMaxExactN) {
        truth = meme::cholesky_logdet(op);
        kappa = meme::condition_number(op);
      } else {
        std::cerr << "warning: --exact skipped for n = " << n << " > " << kMaxExactN << '\n';
      }
    }
    meme::LogDetConfig lc = base;
    lc.probes.master_seed = jb.seed;
    lc.probes.threads = inner_threads;
    const double lambda_u = meme::gershgorin_upper_bound(op);
    std::vector<json> records;
    for (const auto& method : methods) {
      const Stopwatch clock(timing);
      double value = 0.0;
      bool converged = true;
      if (method == "meme") {
        try {
          value = meme::meme_logdet(op, lc).value;
        } catch (const meme::NotConverged<meme::LogDetEstimate>& e) {
          value = e.result().value;
          converged = false;
        }
      } else if (method == "taylor") {
        value = meme::taylor_logdet(op, lc.probes);
      } else {
        value = meme::chebyshev_logdet(op, lc.probes, delta);
      }
      const double seconds = clock.seconds();
      json rec;
      rec["method"] = method;
      rec["n"] = n;
      rec["l"] = jb.l ? json(*jb.l) : json(nullptr);
      rec["kappa"] = kappa;
      rec["logdet_est"] = value;
      rec["logdet_true"] = truth;
      rec["abs_err"] = truth.is_null() ? json(nullptr) : json(std::abs(value - truth.get<double>()));
      rec["rel_err"] = truth.is_null() || truth.get<double>() == 0.0
                           ? json(nullptr)
                           : json(meme::relative_error(value, truth.get<double>()));
      rec["seconds"] = seconds;
      rec["seed"] = jb.seed;
      rec["lambda_u"] = lambda_u;
      rec["converged"] = converged;
      records.push_back(std::move(rec));
    }
    return records;
  };
  const std::function<void(std::vector<json>&)> emit = [&](std::vector<json>& records) {
    for (auto& rec : records) {
      all_converged = all_converged && rec["converged"].get<bool>();
      if (format == "csv") {
        for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << csv_field(rec[columns[c]]);
        out << '\n';
      } else {
        rec["config"] = cfg;
        out << rec.dump() << '\n';
      }
    }
    out.flush();
  };
  run_ordered(jobs.size(), workers, job, emit);
  if (!all_converged) {
    std::cerr << "warning: maxent solver did not converge for at least one estimate\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

// ----------------------------------------------------------- gmm-entropy

json gmm_defaults() {
  json cfg = {{"mixture", ""},
              {"random", 0},
              {"components", 10},
              {"methods", json::array({"quad", "mm", "meme"})},
              {"moments", 10},
              {"basis", "legendre"},
              {"samples", 10000},
              {"seed", 0},
              {"timing", true}};
  cfg.update(solver_defaults());
  return cfg;
}

int cmd_gmm_entropy(const json& cfg, std::ostream& out) {
  const auto methods = cfg["methods"].get<std::vector<std::string>>();
  if (methods.empty()) throw meme::Error("no methods requested");
  for (const auto& m : methods)
    if (m != "quad" && m != "mm" && m != "meme" && m != "mc") throw meme::Error("unknown entropy method '" + m + "'");
  const int moments = cfg["moments"].get<int>();
  if (moments < 2) throw meme::Error("moments must be >= 2");
  const auto basis = meme::parse_basis(cfg["basis"].get<std::string>());
  const meme::SolverConfig solver = solver_from(cfg);
  const int samples = cfg["samples"].get<int>();
  if (samples < 1) throw meme::Error("samples must be >= 1");
  const auto seed = cfg["seed"].get<std::uint64_t>();
  const bool timing = cfg["timing"].get<bool>();

  std::vector<meme::GaussianMixture1D> mixtures;
  const std::string path = cfg["mixture"].get<std::string>();
  const int random = cfg["random"].get<int>();
  if (!path.empty() && random > 0) throw meme::Error("give either a mixture file or --random, not both");
  if (!path.empty()) {
    mixtures = meme::read_mixtures(path);
  } else if (random > 0) {
    const int components = cfg["components"].get<int>();
    meme::Engine rng = meme::make_engine(seed, 0x434c'4d58ULL);
    for (int i = 0; i < random; ++i) mixtures.push_back(meme::random_mixture(rng, components));
  } else {
    throw meme::Error("no mixture given (pass a JSON file or --random N)");
  }

  struct Totals {
    double value = 0.0, seconds = 0.0, frac_err = 0.0;
  };
  std::vector<Totals> totals(methods.size());
  bool all_converged = true;
  const bool have_quad = std::find(methods.begin(), methods.end(), "quad") != methods.end();

  for (std::size_t i = 0; i < mixtures.size(); ++i) {
    const auto& g = mixtures[i];
    json results = json::object();
    for (const auto& method : methods) {
      const Stopwatch clock(timing);
      json r;
      if (method == "quad") {
        r["value"] = meme::entropy_quad(g);
      } else if (method == "mm") {
        r["value"] = meme::entropy_mm(g);
      } else if (method == "mc") {
        r["value"] = meme::entropy_mc(g, static_cast<std::size_t>(samples), seed + i);
      } else {
        const auto e = meme::entropy_meme_detailed(g, moments, basis, solver);
        r["value"] = e.value;
        r["converged"] = e.solution.converged;
        r["iterations"] = e.solution.iterations;
        all_converged = all_converged && e.solution.converged;
      }
      r["seconds"] = clock.seconds();
      results[method] = r;
    }
    for (std::size_t k = 0; k < methods.size(); ++k) {
      const json& r = results[methods[k]];
      totals[k].value += r["value"].get<double>();
      totals[k].seconds += r["seconds"].get<double>();
      if (have_quad)
        totals[k].frac_err += meme::fractional_error(r["value"].get<double>(), results["quad"]["value"].get<double>());
    }
    json rec;
    rec["index"] = i;
    rec["components"] = g.size();
    rec["results"] = results;
    rec["config"] = cfg;
    out << rec.dump() << '\n';
  }
  if (mixtures.size() > 1) {
    const double count = static_cast<double>(mixtures.size());
    json summary = json::object();
    for (std::size_t k = 0; k < methods.size(); ++k) {
      json s;
      s["mean_value"] = totals[k].value / count;
      s["mean_seconds"] = totals[k].seconds / count;
      s["mean_fractional_error"] = have_quad ? json(totals[k].frac_err / count) : json(nullptr);
      summary[methods[k]] = s;
    }
    json rec;
    rec["summary"] = summary;
    rec["count"] = mixtures.size();
    rec["config"] = cfg;
    out << rec.dump() << '\n';
  }
  if (!all_converged) {
    std::cerr << "warning: maxent solver did not converge for at least one mixture\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

// --------------------------------------------------------------- bo-demo

json bo_defaults() {
  const meme::BOConfig b;
  json cfg = {{"objective", "sinusoid"},
              {"acquisition", meme::to_string(meme::parse_acquisition("meme-legendre-10"))},
              {"iterations", b.iterations},
              {"points", b.points_per_dim},
              {"init", b.initial_points},
              {"hyper_lengthscales", 4},
              {"hyper_signal_vars", 2},
              {"seed", 0},
              {"timing", true}};
  cfg.update(solver_defaults());
  return cfg;
}

int cmd_bo_demo(const json& cfg, std::ostream& out) {
  const meme::Objective obj = meme::objective_by_name(cfg["objective"].get<std::string>());
  meme::BOConfig bc;
  bc.acquisition = meme::parse_acquisition(cfg["acquisition"].get<std::string>());
  bc.acquisition.solver = solver_from(cfg);
  bc.iterations = cfg["iterations"].get<int>();
  bc.points_per_dim = cfg["points"].get<int>();
  bc.initial_points = cfg["init"].get<int>();
  bc.seed = cfg["seed"].get<std::uint64_t>();
  bc.hypers = meme::hyper_grid(cfg["hyper_lengthscales"].get<int>(), cfg["hyper_signal_vars"].get<int>());
  bc.validate();
  meme::BOTrace trace = meme::bo_run(obj, bc);
  int fallbacks = 0;
  for (auto& s : trace.steps) {
    fallbacks += s.fallbacks;
    if (!cfg["timing"].get<bool>()) s.seconds = 0.0;
  }
  out << "# config " << cfg.dump() << '\n';
  meme::write_trace_csv(out, trace);
  if (fallbacks > 0) {
    std::cerr << "warning: " << fallbacks << " acquisition values fell back to quadrature\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MaxEnt spectral and mixture-entropy estimators"};
  app.require_subcommand(1);

  std::string config_path, output_path;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    sub->add_option("--output", output_path, "write results here instead of stdout");
  };

  Overrides logdet_ov;
  CLI::App* logdet = app.add_subcommand("logdet", "log-determinant of a Matrix Market file or an SE kernel");
  add_common(logdet);
  add_override<std::string>(logdet, logdet_ov, "matrix", "matrix", "Matrix Market file");
  std::vector<std::string> kernel_tokens;
  CLI::Option* kernel_opt =
      logdet->add_option("--kernel", kernel_tokens, "SE kernel spec as key=value (n, dim, l, noise, input_scale)")
          ->expected(1, 5);
  add_override<std::vector<double>>(logdet, logdet_ov, "--sweep-l", "sweep_l", "kernel lengthscales to sweep")
      ->delimiter(',');
  add_override<int>(logdet, logdet_ov, "--repeats", "repeats", "seeds seed..seed+repeats-1 per input");
  add_override<std::vector<std::string>>(logdet, logdet_ov, "--methods", "methods", "meme,taylor,chebyshev")
      ->delimiter(',');
  add_override<int>(logdet, logdet_ov, "--moments", "moments", "number of moments m");
  add_override<int>(logdet, logdet_ov, "--probes", "probes", "number of probe vectors d");
  add_override<std::string>(logdet, logdet_ov, "--probe", "probe", "gaussian or rademacher");
  add_override<std::string>(logdet, logdet_ov, "--basis", "basis", "power, chebyshev or legendre");
  add_override<double>(logdet, logdet_ov, "--delta", "delta", "Chebyshev baseline lower cutoff");
  add_override<std::uint64_t>(logdet, logdet_ov, "--seed", "seed", "master seed");
  add_override<std::string>(logdet, logdet_ov, "--format", "format", "jsonl or csv");
  add_switch(logdet, logdet_ov, "--exact", "exact", true, "add the Cholesky reference (n <= 4000)");
  add_switch(logdet, logdet_ov, "--no-timing", "timing", false, "report seconds as 0");
  add_solver_flags(logdet, logdet_ov);
  logdet_ov.push_back([&](json& cfg) {
    for (const auto& tok : kernel_tokens) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw meme::Error("kernel spec entries must be key=value, got '" + tok + "'");
      const std::string key = tok.substr(0, eq);
      if (!cfg["kernel"].contains(key)) throw meme::Error("unknown kernel key '" + key + "'");
      const std::string text = tok.substr(eq + 1);
      std::size_t used = 0;
      try {
        if (cfg["kernel"][key].is_number_integer())
          cfg["kernel"][key] = std::stoll(text, &used);
        else
          cfg["kernel"][key] = std::stod(text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != text.size()) throw meme::Error("bad value for kernel key '" + key + "'");
    }
  });

  Overrides gmm_ov;
  CLI::App* gmm = app.add_subcommand("gmm-entropy", "entropy of univariate Gaussian mixtures");
  add_common(gmm);
  add_override<std::string>(gmm, gmm_ov, "mixture", "mixture", "JSON mixture or {\"mixtures\":[...]} batch");
  add_override<int>(gmm, gmm_ov, "--random", "random", "generate this many random mixtures instead");
  add_override<int>(gmm, gmm_ov, "--components", "components", "components per random mixture");
  add_override<std::vector<std::string>>(gmm, gmm_ov, "--methods", "methods", "quad,mm,meme,mc")->delimiter(',');
  add_override<int>(gmm, gmm_ov, "--moments", "moments", "number of moments m for meme");
  add_override<std::string>(gmm, gmm_ov, "--basis", "basis", "power, chebyshev or legendre");
  add_override<int>(gmm, gmm_ov, "--samples", "samples", "Monte Carlo sample count");
  add_override<std::uint64_t>(gmm, gmm_ov, "--seed", "seed", "seed for --random and mc");
  add_switch(gmm, gmm_ov, "--no-timing", "timing", false, "report seconds as 0");
  add_solver_flags(gmm, gmm_ov);

  Overrides bo_ov;
  CLI::App* bo = app.add_subcommand("bo-demo", "grid Bayesian optimization trace as CSV");
  add_common(bo);
  add_override<std::string>(bo, bo_ov, "objective", "objective", "sinusoid, branin or constant");
  add_override<std::string>(bo, bo_ov, "--acquisition", "acquisition", "quad, mm or meme-<basis>-<m>");
  add_override<int>(bo, bo_ov, "--iterations", "iterations", "BO iterations after the initial design");
  add_override<int>(bo, bo_ov, "--points", "points", "candidate grid points per dimension");
  add_override<int>(bo, bo_ov, "--init", "init", "initial design size");
  add_override<int>(bo, bo_ov, "--hyper-lengthscales", "hyper_lengthscales", "lengthscales in the hyper grid");
  add_override<int>(bo, bo_ov, "--hyper-signal-vars", "hyper_signal_vars", "signal variances in the hyper grid");
  add_override<std::uint64_t>(bo, bo_ov, "--seed", "seed", "seed for the initial design");
  add_switch(bo, bo_ov, "--no-timing", "timing", false, "report seconds as 0");
  add_solver_flags(bo, bo_ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    std::ofstream file;
    if (!output_path.empty()) {
      file.open(output_path);
      if (!file) throw meme::Error("cannot write '" + output_path + "'");
    }
    std::ostream& out = output_path.empty() ? std::cout : file;
    if (logdet->parsed()) {
      const json cfg = resolve_config(logdet_defaults(), config_path, logdet_ov);
      if (kernel_opt->count() > 0 && !cfg["matrix"].get<std::string>().empty())
        throw meme::Error("give either a matrix file or --kernel, not both");
      return cmd_logdet(cfg, out);
    }
    if (gmm->parsed()) return cmd_gmm_entropy(resolve_config(gmm_defaults(), config_path, gmm_ov), out);
    return cmd_bo_demo(resolve_config(bo_defaults(), config_path, bo_ov), out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
