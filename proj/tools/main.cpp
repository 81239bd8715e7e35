#include <CLI11.hpp>
#include <json.hpp>

#include <impactkit/accel_log.hpp>
#include <impactkit/energy.hpp>
#include <impactkit/estimate.hpp>
#include <impactkit/model.hpp>
#include <impactkit/run_config.hpp>
#include <impactkit/signal.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace impactkit;

namespace {

std::string fmt(double v) { return detail::to_string_g(v); }

// Common flags shared by every subcommand. Values land in the RunConfig only
// when the flag was actually given, so the config file keeps its say.
struct CommonFlags {
  std::string config_path;
  std::string out;
  double mass = 0, damping = 0, stiffness = 0, gravity = 0;
  double cutoff = 0, rate = 0, x_limit_mm = 0;
  unsigned long long seed = 0;
  CLI::Option *o_config = nullptr, *o_out = nullptr, *o_seed = nullptr;
  CLI::Option *o_mass = nullptr, *o_damping = nullptr, *o_stiffness = nullptr;
  CLI::Option *o_gravity = nullptr, *o_cutoff = nullptr, *o_rate = nullptr;
  CLI::Option *o_xlim = nullptr;

  void attach(CLI::App* cmd) {
    o_config = cmd->add_option("--config", config_path, "key=value config file");
    o_out = cmd->add_option("--out", out, "output path (default: stdout)");
    o_seed = cmd->add_option("--seed", seed, "base random seed");
    o_mass = cmd->add_option("--mass", mass, "frame mass [kg]");
    o_damping = cmd->add_option("--damping", damping, "damping coefficient [N*s/m]");
    o_stiffness = cmd->add_option("--stiffness", stiffness, "spring stiffness [N/m]");
    o_gravity = cmd->add_option("--gravity", gravity, "gravitational acceleration [m/s^2]");
    o_cutoff = cmd->add_option("--cutoff-hz", cutoff, "low-pass filter cutoff [Hz]");
    o_rate = cmd->add_option("--sample-rate-hz", rate, "sample rate [Hz]");
    o_xlim = cmd->add_option("--x-limit-mm", x_limit_mm, "payload clearance [mm]");
  }

  void apply(RunConfig& cfg) const {
    if (o_config->count()) load_config_file(config_path, cfg);
    if (o_mass->count()) cfg.params.m = mass;
    if (o_damping->count()) cfg.params.c = damping;
    if (o_stiffness->count()) cfg.params.k = stiffness;
    if (o_gravity->count()) cfg.params.g = gravity;
    if (o_cutoff->count()) cfg.filter.cutoff_hz = cutoff;
    if (o_rate->count()) cfg.filter.sample_rate_hz = rate;
    if (o_xlim->count()) cfg.clearance.x_limit = x_limit_mm / 1000.0;
    if (o_seed->count()) cfg.seed = seed;
    if (o_out->count()) cfg.out = out;
  }
};

struct SegmentationFlags {
  double ff_threshold = 0, ff_min_duration = 0, impact_threshold = 0, peak_window = 0;
  CLI::Option *o_ff = nullptr, *o_dur = nullptr, *o_imp = nullptr, *o_win = nullptr;

  void attach(CLI::App* cmd) {
    o_ff = cmd->add_option("--ff-threshold", ff_threshold,
                           "free-fall detection threshold [m/s^2]");
    o_dur = cmd->add_option("--ff-min-duration", ff_min_duration,
                            "minimum free-fall duration [s]");
    o_imp = cmd->add_option("--impact-threshold", impact_threshold,
                            "impact detection threshold [m/s^2]");
    o_win = cmd->add_option("--peak-window", peak_window,
                            "peak search window after impact [s]");
  }

  void apply(RunConfig& cfg) const {
    if (o_ff->count()) cfg.segmentation.ff_threshold = ff_threshold;
    if (o_dur->count()) cfg.segmentation.ff_min_duration = ff_min_duration;
    if (o_imp->count()) cfg.segmentation.impact_threshold = impact_threshold;
    if (o_win->count()) cfg.segmentation.peak_window = peak_window;
  }
};

RunConfig resolve_config(const CommonFlags& common,
                         const SegmentationFlags* seg = nullptr) {
  RunConfig cfg;
  common.apply(cfg);
  if (seg) seg->apply(cfg);
  cfg.validate();
  return cfg;
}

// Writes either to cfg.out or to stdout; the human-readable summary then goes
// to whichever of stdout/stderr is not carrying the artifact.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (path.empty()) {
      os_ = &std::cout;
    } else {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file: " + path);
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }
  std::ostream& summary() { return os_ == &std::cout ? std::cerr : std::cout; }
  void finish() {
    os_->flush();
    if (!*os_) throw std::runtime_error("error while writing output");
  }

 private:
  std::ofstream file_;
  std::ostream* os_ = nullptr;
};

json config_json(const RunConfig& cfg) {
  return json{{"mass", cfg.params.m},
              {"damping", cfg.params.c},
              {"stiffness", cfg.params.k},
              {"gravity", cfg.params.g},
              {"cutoff_hz", cfg.filter.cutoff_hz},
              {"sample_rate_hz", cfg.filter.sample_rate_hz},
              {"x_limit", cfg.clearance.x_limit},
              {"ff_threshold", cfg.segmentation.ff_threshold},
              {"ff_min_duration", cfg.segmentation.ff_min_duration},
              {"impact_threshold", cfg.segmentation.impact_threshold},
              {"peak_window", cfg.segmentation.peak_window},
              {"seed", cfg.seed}};
}

std::vector<int> parse_counts(std::string_view text) {
  std::vector<int> out;
  std::string_view rest = detail::trim(text);
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string_view tok =
        detail::trim(comma == std::string_view::npos ? rest : rest.substr(0, comma));
    int n = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), n);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || n <= 0) {
      throw std::invalid_argument("invalid trial count: \"" + std::string(tok) + "\"");
    }
    out.push_back(n);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (out.empty()) throw std::invalid_argument("empty trial count list");
  return out;
}

// Expands directories to their .csv files (sorted) and keeps plain paths.
std::vector<std::string> collect_log_paths(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const std::string& p : inputs) {
    if (fs::is_directory(p)) {
      std::vector<std::string> batch;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
          batch.push_back(entry.path().string());
      }
      std::sort(batch.begin(), batch.end());
      files.insert(files.end(), batch.begin(), batch.end());
    } else {
      files.push_back(p);
    }
  }
  if (files.empty()) throw std::runtime_error("no input log files found");
  return files;
}

// Parses and segments every log, grouping by drop altitude. All failures are
// reported together so one bad file does not hide the rest.
std::vector<TrialGroup> load_groups(const std::vector<std::string>& files,
                                    const RunConfig& cfg) {
  std::map<double, std::vector<TrialRecord>> by_altitude;
  std::vector<std::string> failures;
  for (const std::string& path : files) {
    try {
      AccelLog log = parse_log_file(path);
      const ImpactSegment segment = segment_impact(log, cfg.segmentation);
      by_altitude[log.altitude].push_back({std::move(log), segment});
    } catch (const std::exception& e) {
      failures.push_back(path + ": " + e.what());
    }
  }
  if (!failures.empty()) {
    std::string msg = "failed to load " + std::to_string(failures.size()) + " input file(s):";
    for (const std::string& f : failures) msg += "\n  " + f;
    throw std::runtime_error(msg);
  }
  std::vector<TrialGroup> groups;
  groups.reserve(by_altitude.size());
  for (auto& [altitude, trials] : by_altitude) groups.push_back({altitude, std::move(trials)});
  return groups;
}

int cmd_simulate(const CommonFlags& common, const std::string& altitude_text,
                 double t_max) {
  const RunConfig cfg = resolve_config(common);
  const double h = parse_altitude(altitude_text);
  if (!(t_max > 0.0)) throw std::invalid_argument("t-max must be positive");

  const ImpactInit init = init_from_altitude(cfg.params, h);
  const double dt = 1.0 / cfg.filter.sample_rate_hz;
  const ImpactTrace trace = simulate(cfg.params, init, dt, t_max);
  const Series filtered =
      apply_filter(design_lowpass(cfg.filter), Series{trace.dt, trace.sensor});

  OutputTarget out(cfg.out);
  std::ostream& os = out.stream();
  os << "# generated-by: impactkit simulate\n";
  os << config_echo(cfg) << " altitude=" << fmt(h) << " t_max=" << fmt(t_max) << '\n';
  os << "t_s,x_m,v_mps,a_mps2,sensor_mps2,sensor_filtered_mps2\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const ImpactState& st = trace.states[i];
    os << fmt(st.t) << ',' << fmt(st.x) << ',' << fmt(st.v) << ',' << fmt(st.a) << ','
       << fmt(trace.sensor[i]) << ',' << fmt(filtered.values[i]) << '\n';
  }
  out.finish();
  return 0;
}

int cmd_synth(const CommonFlags& common, const std::string& altitudes_text,
              const std::string& counts_text, double noise_sigma) {
  const RunConfig cfg = resolve_config(common);
  if (cfg.out.empty()) {
    throw std::invalid_argument("synth writes one file per trial; --out must name a directory");
  }
  const std::vector<double> altitudes = parse_altitude_list(altitudes_text);
  std::vector<int> counts = parse_counts(counts_text);
  if (counts.size() == 1 && altitudes.size() > 1) {
    counts.assign(altitudes.size(), counts.front());
  }
  if (counts.size() != altitudes.size()) {
    throw std::invalid_argument("need one trial count per altitude (or a single shared count)");
  }

  fs::create_directories(cfg.out);
  unsigned long long next_seed = cfg.seed;
  for (std::size_t i = 0; i < altitudes.size(); ++i) {
    for (int trial = 0; trial < counts[i]; ++trial) {
      const unsigned long long trial_seed = next_seed++;
      const SyntheticTrial synth = generate_synthetic_log(cfg.params, altitudes[i],
                                                          cfg.filter, noise_sigma, trial_seed);
      const fs::path path = fs::path(cfg.out) / (synth.log.trial_id + ".csv");
      std::ofstream os(path);
      if (!os) throw std::runtime_error("cannot open output file: " + path.string());
      os << "# generated-by: impactkit synth\n";
      os << config_echo(cfg) << " altitude=" << fmt(altitudes[i]) << " noise_sigma="
         << fmt(noise_sigma) << " trial_seed=" << trial_seed << '\n';
      write_log(synth.log, os);
      os.flush();
      if (!os) throw std::runtime_error("error while writing " + path.string());
      std::cout << path.string() << '\n';
    }
  }
  return 0;
}

int cmd_segment(const CommonFlags& common, const SegmentationFlags& seg,
                const std::vector<std::string>& inputs) {
  const RunConfig cfg = resolve_config(common, &seg);
  const std::vector<std::string> files = collect_log_paths(inputs);

  struct Row {
    std::string trial_id;
    double altitude;
    ImpactSegment segment;
  };
  std::vector<Row> rows;
  for (const std::string& path : files) {
    try {
      const AccelLog log = parse_log_file(path);
      rows.push_back({log.trial_id, log.altitude, segment_impact(log, cfg.segmentation)});
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
  }

  OutputTarget out(cfg.out);
  std::ostream& os = out.stream();
  os << "# generated-by: impactkit segment\n" << config_echo(cfg) << '\n';
  os << "trial_id,altitude_cm,freefall_start,impact_start,peak\n";
  for (const Row& row : rows) {
    os << row.trial_id << ',' << fmt(row.altitude * 100.0) << ','
       << row.segment.freefall_start << ',' << row.segment.impact_start << ','
       << row.segment.peak << '\n';
  }
  out.finish();
  return 0;
}

int cmd_fit_stiffness(const CommonFlags& common, const std::string& input,
                      const CLI::Option* o_weight, double weight) {
  const RunConfig cfg = resolve_config(common);
  const std::vector<StaticMeasurement> points = parse_static_csv_file(input);
  const double W = o_weight->count() ? weight : cfg.params.m * cfg.params.g;
  const StiffnessFit fit = fit_stiffness(points, W);

  json report{{"mode", "stiffness"},
              {"parameters", {{"k", fit.k}, {"intercept", fit.intercept}}},
              {"loss", fit.rmse},
              {"iterations", 0},
              {"converged", true},
              {"config", config_json(cfg)}};

  OutputTarget out(cfg.out);
  out.stream() << report.dump(2) << '\n';
  out.finish();
  out.summary() << "stiffness fit over " << points.size() << " points (W = " << fmt(W)
                << " N): k = " << fmt(fit.k) << " N/m, intercept = " << fmt(fit.intercept)
                << " N, rmse = " << fmt(fit.rmse) << " N\n";
  return 0;
}

int cmd_fit_damping(const CommonFlags& common, const SegmentationFlags& seg,
                    const std::vector<std::string>& inputs, bool joint, double c0,
                    const CLI::Option* o_k0, double k0, int max_iters, double x_tol,
                    double f_tol) {
  const RunConfig cfg = resolve_config(common, &seg);
  const std::vector<TrialGroup> groups = load_groups(collect_log_paths(inputs), cfg);

  NelderMeadOptions options;
  options.x_tol = x_tol;
  options.f_tol = f_tol;
  options.max_iterations = max_iters;
  const double k_start = o_k0->count() ? k0 : cfg.params.k;
  const DampingFitMode mode =
      joint ? DampingFitMode::kJointStiffness : DampingFitMode::kFixedStiffness;

  const FitResult fit = fit_damping(groups, cfg.filter, cfg.params.m, mode, c0, k_start,
                                    cfg.params.g, options);

  json report{{"mode", joint ? "damping-joint" : "damping-fixed-k"},
              {"parameters", {{"c", fit.c}, {"k", fit.k}}},
              {"loss", fit.loss},
              {"iterations", fit.iterations},
              {"converged", fit.converged}};

  FitResult fixed;
  bool adopt_fixed = false;
  if (joint) {
    // The loss near its minimum is shallow in k; when fixing the statically
    // measured stiffness costs less than 1e-4 in relative loss, prefer it.
    fixed = fit_damping(groups, cfg.filter, cfg.params.m, DampingFitMode::kFixedStiffness,
                        c0, k_start, cfg.params.g, options);
    adopt_fixed = fixed.converged && (fixed.loss <= fit.loss * (1.0 + 1e-4) ||
                                      fixed.loss <= fit.loss + 1e-12);
    report["fixed_k"] = json{{"parameters", {{"c", fixed.c}, {"k", fixed.k}}},
                             {"loss", fixed.loss},
                             {"iterations", fixed.iterations},
                             {"converged", fixed.converged}};
    report["adopted"] = json{{"c", adopt_fixed ? fixed.c : fit.c},
                             {"k", adopt_fixed ? fixed.k : fit.k},
                             {"source", adopt_fixed ? "fixed-k" : "joint"}};
  }
  report["config"] = config_json(cfg);

  OutputTarget out(cfg.out);
  out.stream() << report.dump(2) << '\n';
  out.finish();

  std::ostream& sum = out.summary();
  const char* label = joint ? "joint fit:   " : "fixed-k fit: ";
  sum << label << "c = " << fmt(fit.c) << " N*s/m, k = " << fmt(fit.k)
      << " N/m, loss = " << fmt(fit.loss) << " (" << fit.iterations << " iterations)\n";
  if (joint) {
    sum << "fixed-k fit: c = " << fmt(fixed.c) << " N*s/m, k = " << fmt(fixed.k)
        << " N/m, loss = " << fmt(fixed.loss) << " (" << fixed.iterations
        << " iterations)\n";
    if (adopt_fixed) {
      sum << "adopted: c = " << fmt(fixed.c) << ", k = " << fmt(fixed.k)
          << " (static stiffness; the joint fit improves the loss by less than 1e-4 "
             "relative)\n";
    } else {
      sum << "adopted: c = " << fmt(fit.c) << ", k = " << fmt(fit.k) << " (joint fit)\n";
    }
  }
  if (!fit.converged) {
    std::cerr << "error: fit did not converge within " << max_iters << " iterations\n";
    return 3;
  }
  return 0;
}

int cmd_loss_surface(const CommonFlags& common, const SegmentationFlags& seg,
                     const std::vector<std::string>& inputs, const AxisRange& c_axis,
                     const AxisRange& k_axis) {
  const RunConfig cfg = resolve_config(common, &seg);
  const std::vector<TrialGroup> groups = load_groups(collect_log_paths(inputs), cfg);

  const LossSurface surface =
      loss_surface(groups, cfg.filter, cfg.params.m, c_axis, k_axis, cfg.params.g);

  OutputTarget out(cfg.out);
  std::ostream& os = out.stream();
  os << "# generated-by: impactkit loss-surface\n";
  os << config_echo(cfg) << " c_min=" << fmt(c_axis.min) << " c_max=" << fmt(c_axis.max)
     << " c_count=" << c_axis.count << " k_min=" << fmt(k_axis.min) << " k_max="
     << fmt(k_axis.max) << " k_count=" << k_axis.count << '\n';
  write_loss_surface_csv(surface, os);
  out.finish();

  const SurfaceArgmin argmin = surface_argmin(surface);
  const json j{{"argmin",
                {{"c", argmin.c},
                 {"k", argmin.k},
                 {"loss", argmin.loss},
                 {"c_index", argmin.c_index},
                 {"k_index", argmin.k_index}}}};
  out.summary() << j.dump() << '\n';
  return 0;
}

int cmd_energy(const CommonFlags& common, const std::string& altitudes_text) {
  const RunConfig cfg = resolve_config(common);
  const std::vector<double> altitudes = parse_altitude_list(altitudes_text);
  const std::vector<EnergyPartition> rows = extrapolate(cfg.params, altitudes, cfg.clearance);

  OutputTarget out(cfg.out);
  std::ostream& os = out.stream();
  os << "# generated-by: impactkit energy\n";
  os << config_echo(cfg) << " altitudes=" << detail::trim(altitudes_text) << '\n';
  write_partition_csv(rows, os);
  out.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mass-spring-damper impact toolkit: simulate drop impacts, build and "
               "segment accelerometer logs, fit model parameters, and partition the "
               "impact energy."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "impactkit 1.0.0");

  int rc = 0;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Integrate one impact and write the trace CSV");
  CommonFlags sim_common;
  sim_common.attach(sim);
  std::string sim_altitude;
  double sim_t_max = 0.3;
  sim->add_option("--altitude", sim_altitude, "drop altitude (m, or with cm suffix)")
      ->required();
  sim->add_option("--t-max", sim_t_max, "trace duration [s]")->capture_default_str();
  sim->callback([&] { rc = cmd_simulate(sim_common, sim_altitude, sim_t_max); });

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic drop-test logs");
  CommonFlags synth_common;
  synth_common.attach(synth);
  std::string synth_altitudes, synth_counts = "1";
  double synth_sigma = 0.0;
  synth->add_option("--altitudes", synth_altitudes,
                    "comma-separated drop altitudes (m, or with cm suffix)")
      ->required();
  synth->add_option("--counts", synth_counts,
                    "trials per altitude, one value or one per altitude")
      ->capture_default_str();
  synth->add_option("--noise-sigma", synth_sigma, "accelerometer noise sigma [m/s^2]")
      ->capture_default_str();
  synth->callback([&] { rc = cmd_synth(synth_common, synth_altitudes, synth_counts, synth_sigma); });

  // segment
  auto* seg = app.add_subcommand("segment", "Detect free fall, impact and peak in logs");
  CommonFlags seg_common;
  SegmentationFlags seg_seg;
  seg_common.attach(seg);
  seg_seg.attach(seg);
  std::vector<std::string> seg_inputs;
  seg->add_option("inputs", seg_inputs, "log files or directories of .csv logs")->required();
  seg->callback([&] { rc = cmd_segment(seg_common, seg_seg, seg_inputs); });

  // fit-stiffness
  auto* fits = app.add_subcommand("fit-stiffness", "Least-squares stiffness from static loading");
  CommonFlags fits_common;
  fits_common.attach(fits);
  std::string fits_input;
  double fits_weight = 0.0;
  fits->add_option("input", fits_input, "static measurement CSV (displacement_mm,force_N)")
      ->required();
  auto* fits_o_weight =
      fits->add_option("--weight", fits_weight, "frame weight [N] (default: mass*gravity)");
  fits->callback([&] { rc = cmd_fit_stiffness(fits_common, fits_input, fits_o_weight, fits_weight); });

  // fit-damping
  auto* fitd = app.add_subcommand("fit-damping", "Fit damping (and optionally stiffness) to logs");
  CommonFlags fitd_common;
  SegmentationFlags fitd_seg;
  fitd_common.attach(fitd);
  fitd_seg.attach(fitd);
  std::vector<std::string> fitd_inputs;
  bool fitd_joint = false;
  double fitd_c0 = 50.0, fitd_k0 = 0.0, fitd_x_tol = 1e-4, fitd_f_tol = 1e-4;
  int fitd_max_iters = 2000;
  fitd->add_option("inputs", fitd_inputs, "log files or directories of .csv logs")->required();
  fitd->add_flag("--joint", fitd_joint, "fit stiffness jointly instead of holding it fixed");
  fitd->add_option("--c0", fitd_c0, "initial damping [N*s/m]")->capture_default_str();
  auto* fitd_o_k0 =
      fitd->add_option("--k0", fitd_k0, "initial/fixed stiffness [N/m] (default: config stiffness)");
  fitd->add_option("--max-iters", fitd_max_iters, "simplex iteration budget")
      ->capture_default_str();
  fitd->add_option("--x-tol", fitd_x_tol, "simplex spread tolerance")->capture_default_str();
  fitd->add_option("--f-tol", fitd_f_tol, "loss spread tolerance")->capture_default_str();
  fitd->callback([&] {
    rc = cmd_fit_damping(fitd_common, fitd_seg, fitd_inputs, fitd_joint, fitd_c0, fitd_o_k0,
                         fitd_k0, fitd_max_iters, fitd_x_tol, fitd_f_tol);
  });

  // loss-surface
  auto* surf = app.add_subcommand("loss-surface", "Evaluate the fit loss over a (c, k) grid");
  CommonFlags surf_common;
  SegmentationFlags surf_seg;
  surf_common.attach(surf);
  surf_seg.attach(surf);
  std::vector<std::string> surf_inputs;
  AxisRange surf_c{30.0, 60.0, 16};
  AxisRange surf_k{5500.0, 8500.0, 16};
  surf->add_option("inputs", surf_inputs, "log files or directories of .csv logs")->required();
  surf->add_option("--c-min", surf_c.min, "damping axis start")->capture_default_str();
  surf->add_option("--c-max", surf_c.max, "damping axis end")->capture_default_str();
  surf->add_option("--c-count", surf_c.count, "damping axis resolution")->capture_default_str();
  surf->add_option("--k-min", surf_k.min, "stiffness axis start")->capture_default_str();
  surf->add_option("--k-max", surf_k.max, "stiffness axis end")->capture_default_str();
  surf->add_option("--k-count", surf_k.count, "stiffness axis resolution")->capture_default_str();
  surf->callback([&] { rc = cmd_loss_surface(surf_common, surf_seg, surf_inputs, surf_c, surf_k); });

  // energy
  auto* energy = app.add_subcommand("energy", "Partition impact energy across drop altitudes");
  CommonFlags energy_common;
  energy_common.attach(energy);
  std::string energy_altitudes;
  energy->add_option("--altitudes", energy_altitudes,
                     "comma-separated ascending drop altitudes (m, or with cm suffix)")
      ->required();
  energy->callback([&] { rc = cmd_energy(energy_common, energy_altitudes); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rc;
}
