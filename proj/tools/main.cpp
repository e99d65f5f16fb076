// qising command-line harness: channel verification, exact and trajectory
// evolution runs, Hamming classification, and scaling fits. Every run writes
// a manifest sufficient to reproduce its outputs byte for byte.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "qising/channels.hpp"
#include "qising/common.hpp"
#include "qising/ensemble.hpp"
#include "qising/exact.hpp"
#include "qising/io.hpp"
#include "qising/observables.hpp"
#include "qising/scaling.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace qising;

namespace {

struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("QISING_OUT")) return env;
  return ".";
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void set_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int effective_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string tok;
  std::stringstream ss(s);
  while (std::getline(ss, tok, sep))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

// ---------------------------------------------------------------- verify --

int cmd_verify(const std::string& variant_name, const std::string& x_file,
               const std::string& export_dir) {
  XMatrix x;
  if (!x_file.empty()) {
    x = custom_x_matrix(read_x_matrix_csv(x_file));
    std::cout << "x-matrix custom (" << x_file << ")\n";
  } else {
    x = build_x_matrix(x_variant_from_string(variant_name));
    std::cout << "x-matrix " << variant_name << "\n";
  }
  const KrausPair k = build_kraus(x);
  const TransitionMatrix3S t = build_classical_transition();

  bool all_ok = true;
  const CheckResult cptp = verify_cptp(k);
  std::cout << "cptp_deviation " << format_double(cptp.max_deviation) << " "
            << (cptp.ok ? "PASS" : "FAIL") << "\n";
  all_ok &= cptp.ok;

  if (cptp.ok) {
    const CheckResult ext = verify_extension(k, t);
    std::cout << "extension_deviation " << format_double(ext.max_deviation)
              << " " << (ext.ok ? "PASS" : "FAIL") << "\n";
    all_ok &= ext.ok;
  } else {
    std::cout << "extension_deviation skipped (not CPTP) FAIL\n";
    all_ok = false;
  }

  const auto residuals = extension_relation_residuals(x);
  double max_res = 0.0;
  std::cout << "relation_residuals";
  for (double r : residuals) {
    std::cout << " " << format_double(r);
    max_res = std::max(max_res, std::abs(r));
  }
  const bool rel_ok = max_res <= kChannelTol;
  std::cout << "\nrelation_max " << format_double(max_res) << " "
            << (rel_ok ? "PASS" : "FAIL") << "\n";
  all_ok &= rel_ok;

  if (!export_dir.empty()) {
    const fs::path dir = export_dir;
    fs::create_directories(dir);
    write_matrix_csv(dir / "transition.csv", t.entries.a.data(), 8, 8);
    write_matrix_csv(dir / "x_matrix.csv", x.entries.a.data(), 4, 4);
    write_matrix_csv(dir / "kraus1.csv", k.k1.a.data(), 8, 8);
    write_matrix_csv(dir / "kraus2.csv", k.k2.a.data(), 8, 8);
    std::cout << "exported channel matrices to " << dir.string() << "\n";
  }

  std::cout << "overall " << (all_ok ? "PASS" : "FAIL") << "\n";
  return all_ok ? 0 : 1;
}

// ---------------------------------------------------------------- evolve --

struct EvolveArgs {
  std::string mode = "exact";  // exact | traj | classical
  std::string variant = "S0";
  int n_sites = 10;
  int n_mcs = 10;
  std::string obs = "coherence,purity,domains,peq";
  std::string snapshots = "all";
  int n_traj = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double prune_epsilon = 1e-16;
  std::string out;
  int threads = 0;
  bool dump_rho = false;
  std::string state_repr = "auto";  // auto | sparse | dense
};

std::vector<double> parse_snapshots(const std::string& spec, int n_mcs,
                                    bool integer_only) {
  std::vector<double> times;
  if (spec == "all") {
    for (int t = 0; t <= n_mcs; ++t) times.push_back(t);
    return times;
  }
  for (const std::string& tok : split(spec, ',')) {
    const double t = std::stod(tok);
    if (integer_only && t != std::floor(t))
      throw UsageError("exact mode snapshots must be integer MCS");
    times.push_back(t);
  }
  if (!std::is_sorted(times.begin(), times.end()))
    throw UsageError("snapshot times must be sorted");
  return times;
}

ordered_json manifest_skeleton(const std::string& command) {
  ordered_json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["command"] = command;
  return m;
}

void finish_manifest(ordered_json& m, const fs::path& dir,
                     const std::vector<fs::path>& outputs) {
  ordered_json digests = ordered_json::object();
  for (const fs::path& p : outputs)
    digests[p.filename().string()] = fnv1a64_hex(fnv1a64_file(p));
  m["outputs"] = digests;
  m["threads"] = effective_threads();
  m["timestamp"] = timestamp_utc();
  std::ofstream f(dir / "manifest.json", std::ios::binary);
  f << m.dump(2) << "\n";
}

int run_evolve(const EvolveArgs& a) {
  set_threads(a.threads);
  const fs::path dir = output_dir(a.out);
  fs::create_directories(dir);

  const XVariant variant = x_variant_from_string(a.variant);
  const bool exact = (a.mode == "exact" || a.mode == "classical");
  if (!exact && a.mode != "traj")
    throw UsageError("mode must be exact, traj, or classical");
  const EvolutionMode emode = (a.mode == "classical")
                                  ? EvolutionMode::ClassicalBaseline
                                  : EvolutionMode::Quantum;

  std::vector<std::string> requested = split(a.obs, ',');
  if (requested.empty()) throw UsageError("no observables requested");
  for (const std::string& o : requested)
    if (o != "coherence" && o != "purity" && o != "domains" && o != "peq")
      throw UsageError("unknown observable '" + o + "'");
  auto wants = [&](const char* name) {
    return std::find(requested.begin(), requested.end(), name) != requested.end();
  };

  const ChainGeometry g(a.n_sites);
  std::vector<fs::path> written;
  ordered_json m = manifest_skeleton("evolve");
  m["mode"] = a.mode;
  m["variant"] = a.variant;
  m["n_sites"] = a.n_sites;
  m["n_mcs"] = a.n_mcs;

  if (exact) {
    const std::vector<double> times = parse_snapshots(a.snapshots, a.n_mcs, true);
    std::vector<int> schedule;
    for (double t : times) schedule.push_back(static_cast<int>(t));
    m["snapshot_times_mcs"] = times;
    m["n_traj"] = nullptr;
    m["seed"] = nullptr;
    m["prune_epsilon"] = nullptr;

    EvolutionConfig cfg;
    cfg.n_sites = a.n_sites;
    cfg.variant = variant;
    cfg.mode = emode;
    cfg.n_mcs = a.n_mcs;
    cfg.snapshot_schedule = schedule;
    cfg.validate();
    if (a.dump_rho && a.n_sites > 8)
      throw UsageError("state dumps are limited to N <= 8");

    TimeSeries coh, pur, dom, peq;
    for (TimeSeries* s : {&coh, &pur, &dom, &peq}) {
      s->variant = a.variant;
      s->n_sites = a.n_sites;
      s->mode = a.mode;
    }
    coh.observable = "coherence";
    pur.observable = "purity";
    dom.observable = "domains";
    peq.observable = "peq";

    const KrausPair k = build_kraus(build_x_matrix(variant));
    const DensityMatrix rho0 = DensityMatrix::initial_zero_magnetization(g);
    run_mcs(rho0, k, a.n_mcs, schedule, emode,
            [&](int t, const DensityMatrix& rho) {
              if (wants("coherence")) coh.push(t, coherence(rho));
              if (wants("purity")) pur.push(t, purity(rho));
              if (wants("domains")) dom.push(t, domain_wall_expectation(rho, g));
              if (wants("peq")) peq.push(t, equilibrium_probability(rho));
              if (a.dump_rho) {
                const fs::path p =
                    dir / ("rho_t" + std::to_string(t) + ".csv");
                std::ofstream f(p, std::ios::binary);
                f << "i,j,re,im\n";
                for (std::size_t i = 0; i < rho.dim(); ++i)
                  for (std::size_t j = 0; j < rho.dim(); ++j)
                    f << i << ',' << j << ',' << format_double(rho(i, j).real())
                      << ',' << format_double(rho(i, j).imag()) << '\n';
                written.push_back(p);
              }
            });
    for (auto& [name, series] :
         std::initializer_list<std::pair<const char*, TimeSeries*>>{
             {"coherence", &coh}, {"purity", &pur}, {"domains", &dom}, {"peq", &peq}}) {
      if (!wants(name)) continue;
      const fs::path p = dir / (std::string(name) + ".csv");
      write_series_csv(p, *series);
      written.push_back(p);
    }
  } else {
    if (a.n_traj < 1) throw UsageError("traj mode requires --traj M");
    if (!a.seed_given) throw UsageError("traj mode requires --seed");
    const std::vector<double> times = parse_snapshots(a.snapshots, a.n_mcs, false);
    m["snapshot_times_mcs"] = times;
    m["n_traj"] = a.n_traj;
    m["seed"] = a.seed;
    m["prune_epsilon"] = a.prune_epsilon;
    m["state_repr"] = a.state_repr;

    EnsembleConfig cfg;
    cfg.n_traj = a.n_traj;
    cfg.seed = a.seed;
    cfg.n_mcs = a.n_mcs;
    cfg.snapshot_times_mcs = times;
    cfg.prune_epsilon = a.prune_epsilon;
    if (a.state_repr == "sparse")
      cfg.repr = StateRepr::Sparse;
    else if (a.state_repr == "dense")
      cfg.repr = StateRepr::Dense;
    else
      cfg.repr = (a.n_sites <= kMaxDenseTrajectorySites) ? StateRepr::Dense
                                                         : StateRepr::Sparse;
    cfg.validate(g);

    EnsembleSeriesRequest req;
    req.equilibrium_probability = wants("peq");
    req.domain_walls = wants("domains");
    req.coherence = wants("coherence");
    req.purity = wants("purity");
    const EnsembleSeries series = run_ensemble_series(cfg, variant, g, req);

    m["prune_events"] = series.counters.prune_events;
    m["max_support"] = series.counters.max_support;

    for (auto& [name, s] :
         std::initializer_list<std::pair<const char*, const TimeSeries*>>{
             {"coherence", &series.coherence},
             {"purity", &series.purity},
             {"domains", &series.domain_walls},
             {"peq", &series.peq}}) {
      if (!wants(name)) continue;
      const fs::path p = dir / (std::string(name) + ".csv");
      write_series_csv(p, *s);
      written.push_back(p);
    }
  }

  m["observables"] = requested;
  finish_manifest(m, dir, written);
  std::cout << "wrote " << written.size() << " series file(s) + manifest to "
            << dir.string() << "\n";
  return 0;
}

int run_evolve_from_manifest(const std::string& path, int threads_override) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read manifest " + path);
  ordered_json m;
  f >> m;
  if (m.value("command", "") != "evolve")
    throw UsageError("manifest does not describe an evolve run");
  EvolveArgs a;
  a.mode = m.at("mode").get<std::string>();
  a.variant = m.at("variant").get<std::string>();
  a.n_sites = m.at("n_sites").get<int>();
  a.n_mcs = m.at("n_mcs").get<int>();
  const auto& times = m.at("snapshot_times_mcs");
  std::string snap;
  for (const auto& t : times) {
    if (!snap.empty()) snap += ",";
    snap += format_double(t.get<double>());
  }
  a.snapshots = snap;
  if (!m.at("n_traj").is_null()) {
    a.n_traj = m.at("n_traj").get<int>();
    a.seed = m.at("seed").get<std::uint64_t>();
    a.seed_given = true;
    a.prune_epsilon = m.at("prune_epsilon").get<double>();
    a.state_repr = m.value("state_repr", "auto");
  }
  std::string obs;
  for (const auto& o : m.at("observables")) {
    if (!obs.empty()) obs += ",";
    obs += o.get<std::string>();
  }
  a.obs = obs;
  a.threads = threads_override;
  a.out = fs::path(path).parent_path().string();
  return run_evolve(a);
}

// -------------------------------------------------------------- classify --

int run_classify(const std::string& variant_name, int n_sites, int c_max,
                 int max_mcs, const std::string& out, int threads) {
  set_threads(threads);
  const fs::path dir = output_dir(out);
  fs::create_directories(dir);
  const XVariant variant = x_variant_from_string(variant_name);
  const ChainGeometry g(n_sites);
  const KrausPair k = build_kraus(build_x_matrix(variant));

  EvolutionConfig cfg;
  cfg.n_sites = n_sites;
  cfg.variant = variant;
  cfg.n_mcs = max_mcs;
  cfg.validate();

  DensityMatrix rho = DensityMatrix::initial_zero_magnetization(g);
  TimeSeries peq;
  peq.observable = "peq";
  peq.variant = variant_name;
  peq.n_sites = n_sites;
  peq.mode = "exact";
  peq.push(0, equilibrium_probability(rho));

  std::vector<fs::path> written;
  std::optional<double> t_half;
  for (int t = 1; t <= max_mcs; ++t) {
    auto snaps = run_mcs(rho, k, 1, {1});
    rho = std::move(snaps.back().second);
    peq.push(t, equilibrium_probability(rho));
    if (t == 1) {
      const fs::path p = dir / "hamming_t1mcs.csv";
      write_grid_csv(p, hamming_classify(rho, c_max));
      written.push_back(p);
    }
    if (peq.values.back() >= 0.5) {
      t_half = half_time(peq);
      const fs::path p = dir / "hamming_thalf.csv";
      write_grid_csv(p, hamming_classify(rho, c_max));
      written.push_back(p);
      break;
    }
  }

  ordered_json m = manifest_skeleton("classify");
  m["variant"] = variant_name;
  m["n_sites"] = n_sites;
  m["c_max"] = c_max;
  m["max_mcs"] = max_mcs;
  if (t_half) {
    m["t_half_mcs"] = *t_half;
    m["t_half_grid_mcs"] = peq.times.back();
  } else {
    m["t_half_mcs"] = nullptr;
    std::cerr << "[qising] warning: P_eq never reached 1/2 within " << max_mcs
              << " MCS; emitting the 1-MCS grid only\n";
  }
  const fs::path pp = dir / "peq.csv";
  write_series_csv(pp, peq);
  written.push_back(pp);
  finish_manifest(m, dir, written);
  std::cout << "wrote " << written.size() << " file(s) + manifest to "
            << dir.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------- fit --

std::map<int, Window> parse_windows(const std::string& spec,
                                    const std::string& spec_all,
                                    const std::vector<SizedSeries>& data) {
  std::map<int, Window> windows;
  auto parse_range = [](const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() != 2) throw UsageError("window must be t_min:t_max");
    return Window{std::stod(parts[0]), std::stod(parts[1])};
  };
  if (!spec_all.empty()) {
    const Window w = parse_range(spec_all);
    for (const SizedSeries& s : data) windows[s.n_sites] = w;
  }
  for (const std::string& tok : split(spec, ';')) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw UsageError("window must be N=t_min:t_max");
    windows[std::stoi(tok.substr(0, eq))] = parse_range(tok.substr(eq + 1));
  }
  return windows;
}

int run_fit(const std::string& inputs, const std::string& regime,
            const std::string& window_spec, const std::string& window_all,
            const std::string& crossover_n, const std::string& out) {
  const fs::path dir = output_dir(out);
  fs::create_directories(dir);

  std::vector<SizedSeries> data;
  std::vector<std::string> names;
  std::vector<std::uint64_t> digests;
  for (const std::string& file : split(inputs, ',')) {
    SizedSeries s;
    s.series = read_series_csv(file);
    s.n_sites = s.series.n_sites;
    data.push_back(s);
    names.push_back(fs::path(file).filename().string());
    digests.push_back(fnv1a64_file(file));
  }
  if (data.size() < 3) throw UsageError("fit needs at least 3 input series");
  const std::map<int, Window> windows = parse_windows(window_spec, window_all, data);

  const bool do_short = (regime == "short" || regime == "both");
  const bool do_long = (regime == "long" || regime == "both");
  if (!do_short && !do_long)
    throw UsageError("regime must be short, long, or both");

  std::optional<ScalingFit> short_fit, long_fit;
  std::vector<fs::path> written;
  auto emit = [&](const ScalingFit& fit, const std::string& tag) {
    const fs::path report = dir / ("fit_" + tag + ".json");
    std::ofstream f(report, std::ios::binary);
    f << scaling_fit_report_json(fit, names, digests);
    written.push_back(report);
    // collapsed coordinates for plotting
    const double power = (fit.regime == Regime::Short) ? 1.0 : fit.exponent;
    const fs::path coords = dir / ("collapse_" + tag + ".csv");
    std::ofstream c(coords, std::ios::binary);
    c << "x,y,n_sites\n";
    for (const SizedSeries& s : data) {
      const Window w = windows.at(s.n_sites);
      const double nd = static_cast<double>(s.n_sites);
      for (std::size_t i = 0; i < s.series.times.size(); ++i) {
        const double t = s.series.times[i], v = s.series.values[i];
        if (t < w.t_min || t > w.t_max || v <= 0.0) continue;
        c << format_double(t / std::pow(nd, power)) << ','
          << format_double(std::log(v) - fit.exponent * std::log(nd)) << ','
          << s.n_sites << '\n';
      }
    }
    written.push_back(coords);
    std::cout << tag << ": exponent " << format_double(fit.exponent) << " +- "
              << format_double(fit.exponent_se) << ", rate "
              << format_double(fit.rate) << " +- " << format_double(fit.rate_se)
              << ", collapse " << format_double(fit.collapse_score) << "\n";
  };

  if (do_short) {
    short_fit = fit_regime(data, Regime::Short, windows);
    emit(*short_fit, "short");
  }
  if (do_long) {
    long_fit = fit_regime(data, Regime::Long, windows);
    emit(*long_fit, "long");
  }

  if (!crossover_n.empty()) {
    if (!short_fit || !long_fit)
      throw UsageError("--crossover-n needs --regime both");
    const fs::path p = dir / "crossover.csv";
    std::ofstream f(p, std::ios::binary);
    f << "n_sites,t_c,t_c_asymptotic\n";
    for (const std::string& tok : split(crossover_n, ',')) {
      const double n = std::stod(tok);
      const auto r = crossover_time(*short_fit, *long_fit, n);
      if (r)
        f << format_double(n) << ',' << format_double(r->t_c) << ','
          << format_double(r->t_c_asymptotic) << '\n';
      else
        f << format_double(n) << ",," << '\n';
    }
    written.push_back(p);
  }

  ordered_json m = manifest_skeleton("fit");
  m["regime"] = regime;
  ordered_json inputs_json = ordered_json::array();
  for (std::size_t i = 0; i < names.size(); ++i)
    inputs_json.push_back(
        {{"file", names[i]}, {"fnv1a64", fnv1a64_hex(digests[i])}});
  m["inputs"] = inputs_json;
  finish_manifest(m, dir, written);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum extensions of Glauber dynamics on a spin chain"};
  app.require_subcommand(1);

  // verify
  auto* verify = app.add_subcommand("verify", "check CPTP + extension conditions");
  std::string v_variant = "S0", v_xfile, v_export;
  verify->add_option("--variant", v_variant, "one of H0,H1,H2,S2,S1,S0");
  verify->add_option("--x-file", v_xfile, "custom 4x4 X matrix as CSV");
  verify->add_option("--export", v_export, "directory for channel matrix CSVs");

  // evolve
  auto* evolve = app.add_subcommand("evolve", "run a simulation");
  EvolveArgs ea;
  std::string manifest_path;
  evolve->add_option("--mode", ea.mode, "exact | traj | classical");
  evolve->add_option("--variant", ea.variant, "quantum extension variant");
  evolve->add_option("--n", ea.n_sites, "chain length (even)");
  evolve->add_option("--mcs", ea.n_mcs, "number of Monte Carlo steps");
  evolve->add_option("--obs", ea.obs, "comma list: coherence,purity,domains,peq");
  evolve->add_option("--snap", ea.snapshots, "'all' or comma list of MCS times");
  evolve->add_option("--traj", ea.n_traj, "number of trajectories (traj mode)");
  auto* seed_opt = evolve->add_option("--seed", ea.seed, "master seed (traj mode)");
  evolve->add_option("--prune", ea.prune_epsilon, "squared-amplitude prune threshold");
  evolve->add_option("--state-repr", ea.state_repr, "auto | sparse | dense");
  evolve->add_option("--out", ea.out, "output directory");
  evolve->add_option("--threads", ea.threads, "worker cap (0 = default)");
  evolve->add_flag("--dump-rho", ea.dump_rho, "dump density matrices (N <= 8)");
  evolve->add_option("--manifest", manifest_path, "replay a recorded manifest");

  // classify
  auto* classify = app.add_subcommand("classify", "Hamming-triple grids");
  std::string c_variant = "S0", c_out;
  int c_n = 10, c_cmax = 3, c_maxmcs = 200, c_threads = 0;
  classify->add_option("--variant", c_variant);
  classify->add_option("--n", c_n);
  classify->add_option("--cmax", c_cmax);
  classify->add_option("--max-mcs", c_maxmcs, "give up on t_1/2 after this");
  classify->add_option("--out", c_out);
  classify->add_option("--threads", c_threads);

  // fit
  auto* fit = app.add_subcommand("fit", "finite-size scaling fits");
  std::string f_inputs, f_regime = "short", f_windows, f_window_all, f_cross, f_out;
  fit->add_option("--inputs", f_inputs, "comma list of coherence CSVs")->required();
  fit->add_option("--regime", f_regime, "short | long | both");
  fit->add_option("--windows", f_windows, "per-size windows: N=t0:t1;N=t0:t1");
  fit->add_option("--window-all", f_window_all, "same window for every size");
  fit->add_option("--crossover-n", f_cross, "emit t_c table for these sizes");
  fit->add_option("--out", f_out);

  try {
    app.parse(argc, argv);
    if (verify->parsed())
      return cmd_verify(v_variant, v_xfile, v_export);
    if (evolve->parsed()) {
      ea.seed_given = seed_opt->count() > 0;
      if (!manifest_path.empty())
        return run_evolve_from_manifest(manifest_path, ea.threads);
      return run_evolve(ea);
    }
    if (classify->parsed())
      return run_classify(c_variant, c_n, c_cmax, c_maxmcs, c_out, c_threads);
    if (fit->parsed())
      return run_fit(f_inputs, f_regime, f_windows, f_window_all, f_cross, f_out);
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
