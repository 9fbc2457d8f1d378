#include "gsign/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace gsign {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Seed-space salts; run indices stay far below these.
constexpr std::uint64_t kSignalSalt = 0x51600AA100000000ull;
constexpr std::uint64_t kFlomSalt = 0xF10B000000000000ull;
constexpr std::uint64_t kSynthSalt = 0xD07A000000000000ull;
constexpr std::uint64_t kDumpSalt = 0xD0D0000000000000ull;

NoiseModel noise_from_json(const json& j, std::vector<std::string>& errors) {
  const std::string kind = j.value("kind", "");
  try {
    if (kind == "sas") return NoiseModel::sas(j.at("alpha").get<double>(), j.at("gamma").get<double>());
    if (kind == "cauchy") return NoiseModel::cauchy(j.value("mu", 0.0), j.at("gamma").get<double>());
    if (kind == "student_t") return NoiseModel::student_t(j.at("nu").get<double>());
    if (kind == "laplace") return NoiseModel::laplace(j.value("mu", 0.0), j.at("b").get<double>());
    errors.push_back("noise.kind '" + kind + "' unknown (valid: sas, cauchy, student_t, laplace)");
  } catch (const std::exception& e) {
    errors.push_back(std::string("noise: ") + e.what());
  }
  return NoiseModel::laplace(0.0, 1.0);
}

json noise_to_json(const NoiseModel& m) {
  switch (m.kind) {
    case NoiseKind::SaS: return {{"kind", "sas"}, {"alpha", m.alpha}, {"gamma", m.gamma}};
    case NoiseKind::Cauchy: return {{"kind", "cauchy"}, {"mu", m.location}, {"gamma", m.gamma}};
    case NoiseKind::StudentT: return {{"kind", "student_t"}, {"nu", m.nu}};
    case NoiseKind::Laplace: return {{"kind", "laplace"}, {"mu", m.location}, {"b", m.scale_b}};
  }
  return {};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string estimator_label(const EstimatorConfig& cfg) {
  std::string label = to_string(cfg.kind);
  if (cfg.kind == EstimatorKind::Glmp) label += "_p" + format_double(cfg.p);
  return label;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }

  std::vector<std::string> errors;
  ExperimentConfig cfg;
  cfg.experiment = j.value("experiment", "");
  static const std::vector<std::string> kinds = {
      "steady_state", "step_size_sweep", "time_varying", "noise_dump", "theory"};
  if (std::find(kinds.begin(), kinds.end(), cfg.experiment) == kinds.end())
    errors.push_back("experiment '" + cfg.experiment +
                     "' unknown (valid: steady_state, step_size_sweep, time_varying, "
                     "noise_dump, theory)");

  if (j.contains("graph")) {
    const json& g = j["graph"];
    cfg.graph.kind = g.value("kind", "sensor");
    cfg.graph.n = g.value("n", 50);
    cfg.graph.seed = g.value("seed", std::uint64_t{1});
    cfg.graph.k = g.value("k", 8);
    cfg.graph.coords_path = g.value("coords", "");
    cfg.graph.edge_list_path = g.value("edge_list", "");
    if (cfg.graph.kind != "sensor" && cfg.graph.kind != "knn_coords" &&
        cfg.graph.kind != "edge_list")
      errors.push_back("graph.kind '" + cfg.graph.kind +
                       "' unknown (valid: sensor, knn_coords, edge_list)");
    if (cfg.graph.kind == "sensor" && cfg.graph.n < 2)
      errors.push_back("graph.n must be >= 2");
    if (cfg.graph.kind == "knn_coords" && cfg.graph.coords_path.empty())
      errors.push_back("graph.coords required for knn_coords");
    if (cfg.graph.kind == "edge_list" && cfg.graph.edge_list_path.empty())
      errors.push_back("graph.edge_list required for edge_list");
  }

  cfg.band_size = j.value("band_size", 20);
  cfg.sample_size = j.value("sample_size", 30);
  if (cfg.band_size < 1) errors.push_back("band_size must be >= 1");
  if (cfg.sample_size < cfg.band_size)
    errors.push_back("sample_size must be >= band_size (|F| <= |S|)");
  if (cfg.graph.kind == "sensor" && cfg.sample_size > cfg.graph.n)
    errors.push_back("sample_size must be <= graph.n (|S| <= N)");

  if (j.contains("noise")) cfg.noise = noise_from_json(j["noise"], errors);

  cfg.estimators.clear();
  for (const json& e : j.value("estimators", json::array())) {
    EstimatorConfig ec;
    try {
      ec.kind = estimator_kind_from_string(e.value("kind", ""));
      ec.mu = e.value("mu", 0.0);
      if (ec.kind == EstimatorKind::Glmp) ec.p = e.at("p").get<double>();
      ec.validate();
      cfg.estimators.push_back(ec);
    } catch (const std::exception& ex) {
      errors.push_back(std::string("estimators: ") + ex.what());
    }
  }

  cfg.step_sizes = j.value("step_sizes", std::vector<double>{});
  cfg.n_runs = j.value("n_runs", 100);
  cfg.n_iters = j.value("n_iters", long{2400});
  cfg.convergence_window = j.value("convergence_window", long{0});
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.threads = j.value("threads", 1);
  cfg.outdir = j.value("outdir", "out");
  cfg.tracked_node = j.value("tracked_node", 0);
  cfg.signal_scale = j.value("signal_scale", 1.0);
  cfg.noise_dump_count = j.value("noise_dump_count", long{1000000});
  cfg.basis_cache = j.value("basis_cache", "");

  if (j.contains("signal")) {
    const json& s = j["signal"];
    cfg.signal.source = s.value("source", "synthetic");
    cfg.signal.t = s.value("t", 95);
    cfg.signal.amplitude = s.value("amplitude", 10.0);
    cfg.signal.readings_path = s.value("readings", "");
    cfg.signal.coords_path = s.value("coords", "");
    if (cfg.signal.source != "synthetic" && cfg.signal.source != "files")
      errors.push_back("signal.source '" + cfg.signal.source +
                       "' unknown (valid: synthetic, files)");
    if (cfg.signal.source == "files" && cfg.signal.readings_path.empty())
      errors.push_back("signal.readings required when signal.source = files");
    if (cfg.signal.t < 1) errors.push_back("signal.t must be >= 1");
  }

  if (cfg.n_runs < 1) errors.push_back("n_runs must be >= 1");
  if (cfg.n_iters < 1) errors.push_back("n_iters must be >= 1");
  if (cfg.threads < 1) errors.push_back("threads must be >= 1");

  const bool needs_estimators = cfg.experiment == "steady_state" ||
                                cfg.experiment == "time_varying" ||
                                cfg.experiment == "theory";
  if (needs_estimators && cfg.estimators.empty())
    errors.push_back("estimators must not be empty for experiment '" + cfg.experiment + "'");
  if (cfg.experiment == "step_size_sweep") {
    std::vector<double> dedup = cfg.step_sizes;
    std::sort(dedup.begin(), dedup.end());
    dedup.erase(std::unique(dedup.begin(), dedup.end()), dedup.end());
    if (dedup.size() < 2) errors.push_back("step_size_sweep needs >= 2 distinct step_sizes");
    for (double mu : cfg.step_sizes)
      if (!(mu > 0.0)) errors.push_back("step_sizes must be positive");
  }

  if (!errors.empty()) {
    std::string msg = origin + ": invalid config:";
    for (const std::string& e : errors) msg += "\n  - " + e;
    throw std::runtime_error(msg);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["graph"] = {{"kind", cfg.graph.kind}};
  if (cfg.graph.kind == "sensor") {
    j["graph"]["n"] = cfg.graph.n;
    j["graph"]["seed"] = cfg.graph.seed;
  } else if (cfg.graph.kind == "knn_coords") {
    j["graph"]["coords"] = cfg.graph.coords_path;
    j["graph"]["k"] = cfg.graph.k;
  } else {
    j["graph"]["edge_list"] = cfg.graph.edge_list_path;
  }
  j["band_size"] = cfg.band_size;
  j["sample_size"] = cfg.sample_size;
  j["noise"] = noise_to_json(cfg.noise);
  j["estimators"] = json::array();
  for (const EstimatorConfig& e : cfg.estimators) {
    json je = {{"kind", to_string(e.kind)}, {"mu", e.mu}};
    if (e.kind == EstimatorKind::Glmp) je["p"] = e.p;
    j["estimators"].push_back(je);
  }
  if (!cfg.step_sizes.empty()) j["step_sizes"] = cfg.step_sizes;
  j["n_runs"] = cfg.n_runs;
  j["n_iters"] = cfg.n_iters;
  j["convergence_window"] = cfg.window();
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["outdir"] = cfg.outdir;
  j["tracked_node"] = cfg.tracked_node;
  j["signal_scale"] = cfg.signal_scale;
  j["signal"] = {{"source", cfg.signal.source},
                 {"t", cfg.signal.t},
                 {"amplitude", cfg.signal.amplitude}};
  if (!cfg.signal.readings_path.empty()) j["signal"]["readings"] = cfg.signal.readings_path;
  if (!cfg.signal.coords_path.empty()) j["signal"]["coords"] = cfg.signal.coords_path;
  j["noise_dump_count"] = cfg.noise_dump_count;
  if (!cfg.basis_cache.empty()) j["basis_cache"] = cfg.basis_cache;
  return j.dump(2);
}

ExperimentContext build_context(const ExperimentConfig& cfg) {
  ExperimentContext ctx;
  if (cfg.graph.kind == "sensor") {
    ctx.graph = random_sensor_graph(cfg.graph.n, cfg.graph.seed);
  } else if (cfg.graph.kind == "knn_coords") {
    const auto coords = load_coords_csv(cfg.graph.coords_path);
    ctx.graph = knn_geographic_graph(coords, cfg.graph.k);
  } else if (cfg.graph.kind == "edge_list") {
    ctx.graph = load_edge_list(cfg.graph.edge_list_path);
  } else {
    throw std::invalid_argument("unknown graph kind: " + cfg.graph.kind);
  }

  const int n = ctx.graph.n_nodes;
  if (cfg.band_size > n || cfg.sample_size > n)
    throw std::runtime_error("config: need |F| <= |S| <= N = " + std::to_string(n));

  ctx.laplacian = build_laplacian(ctx.graph);
  bool cached = false;
  if (!cfg.basis_cache.empty())
    cached = load_basis_cache(cfg.basis_cache, ctx.laplacian, ctx.basis);
  if (!cached) {
    ctx.basis = eigendecompose(ctx.laplacian);
    if (!cfg.basis_cache.empty())
      save_basis_cache(cfg.basis_cache, ctx.laplacian, ctx.basis);
  }
  ctx.band = make_lowpass(ctx.basis, cfg.band_size);
  ctx.sampling = greedy_sampling(ctx.band.u_f, cfg.sample_size);
  return ctx;
}

Vector make_steady_signal(const BandlimitOperator& band, std::uint64_t master_seed,
                          double scale) {
  RngStream rng(derive_stream_seed(master_seed, kSignalSalt));
  const std::size_t nf = band.u_f.cols();
  Vector s(nf);
  for (double& v : s) v = scale * (2.0 * rng.uniform() - 1.0);
  return band.u_f * s;
}

TimeVaryingSignal synthetic_time_varying(const BandlimitOperator& band, int t,
                                         std::uint64_t seed, double amplitude) {
  if (t < 1) throw std::invalid_argument("synthetic signal: t >= 1");
  RngStream rng(derive_stream_seed(seed, kSynthSalt));
  const std::size_t nf = band.u_f.cols();
  const std::size_t n = band.u_f.rows();
  Vector s_base(nf), s_cos(nf), s_sin(nf);
  for (std::size_t jx = 0; jx < nf; ++jx) {
    const double decay = 1.0 / (1.0 + static_cast<double>(jx));
    s_base[jx] = decay * (2.0 * rng.uniform() - 1.0);
    s_cos[jx] = 0.3 * decay * (2.0 * rng.uniform() - 1.0);
    s_sin[jx] = 0.3 * decay * (2.0 * rng.uniform() - 1.0);
  }
  const Vector x_base = band.u_f * s_base;
  const Vector x_cos = band.u_f * s_cos;
  const Vector x_sin = band.u_f * s_sin;

  TimeVaryingSignal sig;
  sig.values = Matrix(static_cast<std::size_t>(t), n);
  for (int k = 0; k < t; ++k) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) / 24.0;
    const double c = std::cos(phase), s = std::sin(phase);
    double* row = sig.values.row(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i)
      row[i] = x_base[i] + c * x_cos[i] + s * x_sin[i];
  }
  const double m = sig.values.max_abs();
  if (m > 0.0) sig.values *= amplitude / m;
  return sig;
}

TimeVaryingSignal ingest_station_dataset(
    const std::string& readings_csv, const std::string& coords_csv,
    std::vector<std::array<double, 2>>& coords_out) {
  coords_out = load_coords_csv(coords_csv);
  std::ifstream in(readings_csv);
  if (!in) throw std::runtime_error("cannot open readings: " + readings_csv);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("readings empty: " + readings_csv);
  const std::size_t n_stations =
      static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (n_stations != coords_out.size())
    throw std::runtime_error("station count mismatch: readings has " +
                             std::to_string(n_stations) + ", coords has " +
                             std::to_string(coords_out.size()));

  std::vector<std::vector<double>> rows;  // NaN marks a gap
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(n_stations);
    // split on commas by hand so a trailing empty field still counts as a gap
    std::size_t start = line.find(',');
    if (start == std::string::npos)
      throw std::runtime_error(readings_csv + ": row without data fields");
    ++start;
    for (;;) {
      const std::size_t end = line.find(',', start);
      const std::string cell = line.substr(
          start, end == std::string::npos ? std::string::npos : end - start);
      if (cell.empty() || cell == "nan" || cell == "NaN")
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      else
        row.push_back(std::stod(cell));
      if (end == std::string::npos) break;
      start = end + 1;
    }
    if (row.size() != n_stations)
      throw std::runtime_error(readings_csv + ": row with " +
                               std::to_string(row.size()) + " values, expected " +
                               std::to_string(n_stations));
    rows.push_back(std::move(row));
  }
  const std::size_t t = rows.size();
  if (t < 1) throw std::runtime_error(readings_csv + ": no data rows");

  TimeVaryingSignal sig;
  sig.values = Matrix(t, n_stations);
  for (std::size_t j = 0; j < n_stations; ++j) {
    // indices of known values for this station
    std::vector<std::size_t> known;
    for (std::size_t k = 0; k < t; ++k)
      if (std::isfinite(rows[k][j])) known.push_back(k);
    if (known.empty())
      throw std::runtime_error(readings_csv + ": station " + std::to_string(j) +
                               " has no data");
    for (std::size_t k = 0; k < t; ++k) {
      double v;
      if (std::isfinite(rows[k][j])) {
        v = rows[k][j];
      } else if (k < known.front()) {
        v = rows[known.front()][j];  // nearest fill at the leading edge
      } else if (k > known.back()) {
        v = rows[known.back()][j];
      } else {
        const auto hi = std::lower_bound(known.begin(), known.end(), k);
        const std::size_t k1 = *hi;
        const std::size_t k0 = *(hi - 1);
        const double w = static_cast<double>(k - k0) / static_cast<double>(k1 - k0);
        v = (1.0 - w) * rows[k0][j] + w * rows[k1][j];
      }
      sig.values(k, j) = v;
    }
  }
  return sig;
}

namespace {

struct McOutcome {
  Vector msd_avg, mad_avg, tracked_avg, maxdev_max;
  std::vector<char> run_diverged, run_converged;
  std::vector<double> run_max_msd;
  double total_step_seconds = 0.0;
  double median_step_us = 0.0;
};

McOutcome monte_carlo(const EstimatorConfig& cfg, const SignalSource& signal,
                      const NoiseModel& noise, const SamplingSet& sampling,
                      const BandlimitOperator& band, long n_iters, int n_runs,
                      int threads, std::uint64_t master_seed, long window,
                      int tracked_node, bool time_steps) {
  std::vector<RunTrace> traces(static_cast<std::size_t>(n_runs));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int run = next.fetch_add(1);
      if (run >= n_runs) return;
      RunOptions opts;
      opts.n_iters = n_iters;
      opts.stream_seed = derive_stream_seed(master_seed, static_cast<std::uint64_t>(run));
      opts.tracked_node = tracked_node;
      opts.time_steps = time_steps;
      traces[static_cast<std::size_t>(run)] =
          run_estimation(cfg, signal, noise, sampling, band, opts);
    }
  };
  const int n_threads = std::clamp(threads, 1, n_runs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  // Reduction order is fixed by run index, independent of thread count.
  const auto len = static_cast<std::size_t>(n_iters);
  McOutcome out;
  out.msd_avg.assign(len, 0.0);
  out.mad_avg.assign(len, 0.0);
  out.maxdev_max.assign(len, 0.0);
  if (tracked_node >= 0) out.tracked_avg.assign(len, 0.0);
  std::vector<double> all_step_ns;
  for (const RunTrace& trace : traces) {
    for (std::size_t k = 0; k < len; ++k) {
      out.msd_avg[k] += trace.msd[k];
      out.mad_avg[k] += trace.mad[k];
      out.maxdev_max[k] = std::max(out.maxdev_max[k], trace.max_abs_dev[k]);
    }
    if (tracked_node >= 0)
      for (std::size_t k = 0; k < len; ++k)
        out.tracked_avg[k] += trace.tracked_estimate[k];
    out.run_diverged.push_back(trace.diverged ? 1 : 0);
    const ConvergenceReport rep =
        detect_convergence(trace.msd, std::min(window, n_iters - 1), trace.diverged);
    out.run_converged.push_back(rep.converged ? 1 : 0);
    double max_msd = 0.0;
    for (double v : trace.msd)
      max_msd = std::isfinite(v) ? std::max(max_msd, v)
                                 : std::numeric_limits<double>::infinity();
    out.run_max_msd.push_back(max_msd);
    for (double ns : trace.step_ns) {
      out.total_step_seconds += ns * 1e-9;
      all_step_ns.push_back(ns);
    }
  }
  const double inv_runs = 1.0 / static_cast<double>(n_runs);
  for (double& v : out.msd_avg) v *= inv_runs;
  for (double& v : out.mad_avg) v *= inv_runs;
  for (double& v : out.tracked_avg) v *= inv_runs;
  if (!all_step_ns.empty()) {
    auto mid = all_step_ns.begin() + static_cast<long>(all_step_ns.size() / 2);
    std::nth_element(all_step_ns.begin(), mid, all_step_ns.end());
    out.median_step_us = *mid * 1e-3;
  }
  return out;
}

EstimatorResult make_estimator_result(const std::string& label,
                                      const EstimatorConfig& cfg, McOutcome&& mc,
                                      long window, long n_iters) {
  EstimatorResult res;
  res.label = label;
  res.cfg = cfg;
  res.msd_avg = std::move(mc.msd_avg);
  res.mad_avg = std::move(mc.mad_avg);
  res.tracked_avg = std::move(mc.tracked_avg);
  res.maxdev_max = std::move(mc.maxdev_max);
  res.run_diverged = std::move(mc.run_diverged);
  res.run_converged = std::move(mc.run_converged);
  res.run_max_msd = std::move(mc.run_max_msd);
  const bool any_diverged =
      std::find(res.run_diverged.begin(), res.run_diverged.end(), 1) !=
      res.run_diverged.end();
  res.convergence =
      detect_convergence(res.msd_avg, std::min(window, n_iters - 1), any_diverged);
  res.total_step_seconds = mc.total_step_seconds;
  res.median_step_us = mc.median_step_us;
  return res;
}

}  // namespace

ExperimentResults run_steady_state(const ExperimentConfig& cfg) {
  ExperimentResults results;
  results.config = cfg;
  const ExperimentContext ctx = build_context(cfg);
  const Vector x0 = make_steady_signal(ctx.band, cfg.seed, cfg.signal_scale);
  const SignalSource signal(x0);

  results.flom_r = flom_inverse_moment(cfg.noise, 0.99, 1000000,
                                       derive_stream_seed(cfg.seed, kFlomSalt));
  const StabilityContext stab =
      StabilityContext::make(ctx.band.u_f, ctx.sampling, results.flom_r);
  results.mu_bound = step_size_bound(stab);

  for (const EstimatorConfig& est : cfg.estimators) {
    McOutcome mc = monte_carlo(est, signal, cfg.noise, ctx.sampling, ctx.band,
                               cfg.n_iters, cfg.n_runs, cfg.threads, cfg.seed,
                               cfg.window(), -1, true);
    EstimatorResult res = make_estimator_result(estimator_label(est), est,
                                                std::move(mc), cfg.window(), cfg.n_iters);
    if (est.kind == EstimatorKind::GSign) {
      if (est.mu < results.mu_bound) {
        // per-node, matching the empirical MSD normalization
        res.theory_msd =
            theoretical_msd(stab, est.mu) / static_cast<double>(ctx.graph.n_nodes);
      } else {
        results.warnings.push_back("gsign step size " + format_double(est.mu) +
                                   " at/over stability bound " +
                                   format_double(results.mu_bound));
      }
    }
    results.estimators.push_back(std::move(res));
  }
  return results;
}

ExperimentResults run_step_size_sweep(const ExperimentConfig& cfg) {
  ExperimentResults results;
  results.config = cfg;
  const ExperimentContext ctx = build_context(cfg);
  const Vector x0 = make_steady_signal(ctx.band, cfg.seed, cfg.signal_scale);
  const SignalSource signal(x0);

  results.flom_r = flom_inverse_moment(cfg.noise, 0.99, 1000000,
                                       derive_stream_seed(cfg.seed, kFlomSalt));
  const StabilityContext stab =
      StabilityContext::make(ctx.band.u_f, ctx.sampling, results.flom_r);
  results.mu_bound = step_size_bound(stab);

  std::vector<double> mus;
  for (double mu : cfg.step_sizes) {
    if (std::find(mus.begin(), mus.end(), mu) != mus.end()) {
      results.warnings.push_back("duplicate step size " + format_double(mu) +
                                 " removed");
      continue;
    }
    mus.push_back(mu);
  }
  for (double mu : mus) {
    if (mu >= results.mu_bound)
      results.warnings.push_back("step size " + format_double(mu) +
                                 " at/over stability bound " +
                                 format_double(results.mu_bound) +
                                 "; run executed anyway");
    EstimatorConfig est;
    est.kind = EstimatorKind::GSign;
    est.mu = mu;
    McOutcome mc = monte_carlo(est, signal, cfg.noise, ctx.sampling, ctx.band,
                               cfg.n_iters, cfg.n_runs, cfg.threads, cfg.seed,
                               cfg.window(), -1, false);
    EstimatorResult res =
        make_estimator_result("gsign_mu" + format_double(mu), est, std::move(mc),
                              cfg.window(), cfg.n_iters);
    if (mu < results.mu_bound)
      res.theory_msd =
          theoretical_msd(stab, mu) / static_cast<double>(ctx.graph.n_nodes);
    results.estimators.push_back(std::move(res));
  }
  return results;
}

ExperimentResults run_time_varying(const ExperimentConfig& cfg) {
  ExperimentResults results;
  results.config = cfg;
  const ExperimentContext ctx = build_context(cfg);

  TimeVaryingSignal sig;
  if (cfg.signal.source == "synthetic") {
    sig = synthetic_time_varying(ctx.band, cfg.signal.t, cfg.seed,
                                 cfg.signal.amplitude);
  } else {
    std::vector<std::array<double, 2>> coords;
    sig = ingest_station_dataset(cfg.signal.readings_path, cfg.signal.coords_path,
                                 coords);
    if (static_cast<int>(sig.values.cols()) != ctx.graph.n_nodes)
      throw std::runtime_error("station count " + std::to_string(sig.values.cols()) +
                               " does not match graph size " +
                               std::to_string(ctx.graph.n_nodes));
  }
  const long t_steps = static_cast<long>(sig.values.rows());
  if (t_steps < 2) throw std::runtime_error("time_varying: need T >= 2");
  if (cfg.tracked_node < 0 || cfg.tracked_node >= ctx.graph.n_nodes)
    throw std::runtime_error("tracked_node out of range");

  double lo = sig.values(0, 0), hi = lo;
  for (std::size_t k = 0; k < sig.values.rows(); ++k)
    for (std::size_t i = 0; i < sig.values.cols(); ++i) {
      lo = std::min(lo, sig.values(k, i));
      hi = std::max(hi, sig.values(k, i));
    }
  results.signal_dynamic_range = hi - lo;

  const SignalSource signal(sig.values);
  results.tracked_truth.resize(static_cast<std::size_t>(t_steps));
  for (long k = 0; k < t_steps; ++k)
    results.tracked_truth[static_cast<std::size_t>(k)] =
        sig.values(static_cast<std::size_t>(k), static_cast<std::size_t>(cfg.tracked_node));

  for (const EstimatorConfig& est : cfg.estimators) {
    McOutcome mc = monte_carlo(est, signal, cfg.noise, ctx.sampling, ctx.band,
                               t_steps, cfg.n_runs, cfg.threads, cfg.seed,
                               std::max(2L, t_steps / 10), cfg.tracked_node, true);
    results.estimators.push_back(make_estimator_result(
        estimator_label(est), est, std::move(mc), std::max(2L, t_steps / 10), t_steps));
  }
  return results;
}

namespace {

void write_trace_csv(const std::string& path, const std::string& index_name,
                     const std::vector<std::pair<std::string, const Vector*>>& cols) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << index_name;
  for (const auto& [name, vec] : cols) out << ',' << name;
  out << '\n';
  const std::size_t len = cols.empty() ? 0 : cols.front().second->size();
  for (std::size_t k = 0; k < len; ++k) {
    out << k;
    for (const auto& [name, vec] : cols) out << ',' << format_double((*vec)[k]);
    out << '\n';
  }
}

}  // namespace

void emit_results(const ExperimentResults& results, const std::string& outdir) {
  fs::create_directories(outdir);
  const fs::path dir(outdir);

  {
    std::ofstream out(dir / "config_resolved.json");
    if (!out) throw std::runtime_error("cannot write config echo in " + outdir);
    out << config_to_json(results.config) << '\n';
  }

  // one estimator may carry the theory line; suffix labels if several do
  std::vector<std::pair<std::string, const Vector*>> msd_cols, mad_cols;
  std::vector<Vector> theory_lines;
  theory_lines.reserve(results.estimators.size());
  const std::size_t n_theory = static_cast<std::size_t>(
      std::count_if(results.estimators.begin(), results.estimators.end(),
                    [](const EstimatorResult& r) { return std::isfinite(r.theory_msd); }));
  for (const EstimatorResult& res : results.estimators) {
    msd_cols.emplace_back(res.label, &res.msd_avg);
    mad_cols.emplace_back(res.label, &res.mad_avg);
  }
  for (const EstimatorResult& res : results.estimators) {
    if (!std::isfinite(res.theory_msd)) continue;
    theory_lines.emplace_back(res.msd_avg.size(), res.theory_msd);
    msd_cols.emplace_back(n_theory == 1 ? "theory" : "theory_" + res.label,
                          &theory_lines.back());
  }
  write_trace_csv((dir / "msd.csv").string(), "iteration", msd_cols);
  write_trace_csv((dir / "mad.csv").string(), "iteration", mad_cols);

  {
    std::ofstream out(dir / "timing.csv");
    out << "estimator,total_s,per_iter_us,n_iters\n";
    for (const EstimatorResult& res : results.estimators)
      out << res.label << ',' << format_double(res.total_step_seconds) << ','
          << format_double(res.median_step_us) << ','
          << res.msd_avg.size() << '\n';
  }

  if (!results.tracked_truth.empty()) {
    std::vector<std::pair<std::string, const Vector*>> cols;
    cols.emplace_back("truth", &results.tracked_truth);
    for (const EstimatorResult& res : results.estimators)
      cols.emplace_back(res.label, &res.tracked_avg);
    write_trace_csv((dir / "tracked.csv").string(), "step", cols);

    std::vector<std::pair<std::string, const Vector*>> dev_cols;
    for (const EstimatorResult& res : results.estimators)
      dev_cols.emplace_back(res.label, &res.maxdev_max);
    write_trace_csv((dir / "maxdev.csv").string(), "step", dev_cols);
  }

  json summary;
  summary["config"] = json::parse(config_to_json(results.config));
  summary["seed"] = results.config.seed;
  if (std::isfinite(results.flom_r)) summary["flom_r"] = results.flom_r;
  if (std::isfinite(results.mu_bound)) summary["mu_bound"] = results.mu_bound;
  if (!results.tracked_truth.empty())
    summary["signal_dynamic_range"] = results.signal_dynamic_range;
  summary["warnings"] = results.warnings;
  summary["estimators"] = json::array();
  for (const EstimatorResult& res : results.estimators) {
    json je;
    je["label"] = res.label;
    je["mu"] = res.cfg.mu;
    if (res.cfg.kind == EstimatorKind::Glmp) je["p"] = res.cfg.p;
    je["converged"] = res.convergence.converged;
    je["steady_msd"] = res.convergence.steady_value;
    je["iterations_to_converge"] = res.convergence.iterations_to_converge;
    je["n_diverged_runs"] = static_cast<int>(
        std::count(res.run_diverged.begin(), res.run_diverged.end(), 1));
    je["n_converged_runs"] = static_cast<int>(
        std::count(res.run_converged.begin(), res.run_converged.end(), 1));
    je["n_runs"] = static_cast<int>(res.run_diverged.size());
    if (std::isfinite(res.theory_msd)) je["theory_msd"] = res.theory_msd;
    je["total_step_seconds"] = res.total_step_seconds;
    je["median_step_us"] = res.median_step_us;
    summary["estimators"].push_back(je);
  }
  std::ofstream out(dir / "summary.json");
  if (!out) throw std::runtime_error("cannot write summary in " + outdir);
  out << summary.dump(2) << '\n';
}

void dump_noise_csv(const ExperimentConfig& cfg, const std::string& outdir) {
  fs::create_directories(outdir);
  RngStream rng(derive_stream_seed(cfg.seed, kDumpSalt));
  std::ofstream out(fs::path(outdir) / "samples.csv");
  if (!out) throw std::runtime_error("cannot write samples.csv in " + outdir);
  out << "sample\n";
  for (long i = 0; i < cfg.noise_dump_count; ++i)
    out << format_double(sample_one(cfg.noise, rng)) << '\n';
}

void write_synthetic_dataset(int n, int t, std::uint64_t seed, int band_size,
                             double amplitude, const std::string& outdir) {
  fs::create_directories(outdir);
  RngStream rng(derive_stream_seed(seed, kSynthSalt + 1));
  std::vector<std::array<double, 2>> coords(static_cast<std::size_t>(n));
  for (auto& c : coords) {
    c[0] = rng.uniform();
    c[1] = rng.uniform();
  }
  const Graph graph = knn_geographic_graph(coords, std::min(8, n - 1));
  const SpectralBasis basis = eigendecompose(build_laplacian(graph));
  const BandlimitOperator band = make_lowpass(basis, std::min(band_size, n));
  const TimeVaryingSignal sig = synthetic_time_varying(band, t, seed, amplitude);

  save_coords_csv(coords, (fs::path(outdir) / "coords.csv").string());
  std::ofstream out(fs::path(outdir) / "readings.csv");
  if (!out) throw std::runtime_error("cannot write readings.csv in " + outdir);
  out << "timestamp";
  for (int i = 0; i < n; ++i) out << ",station_" << i;
  out << '\n';
  for (int k = 0; k < t; ++k) {
    out << "h" << k;
    for (int i = 0; i < n; ++i)
      out << ',' << format_double(sig.values(static_cast<std::size_t>(k),
                                             static_cast<std::size_t>(i)));
    out << '\n';
  }
}

}  // namespace gsign
