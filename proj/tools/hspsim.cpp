// hspsim: simulate heralded single-photon source runs, analyze event files,
// fit power sweeps, and emit plot-ready curve data.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hsps/hsps.hpp"

namespace fs = std::filesystem;
using namespace hsps;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  return parse_config(in);
}

// derived per-point seed for sweep simulations
uint64_t child_seed(uint64_t seed, uint64_t index) {
  return seed + 0x9E3779B97F4A7C15ull * (index + 1);
}

struct TallyRates {
  CoincidenceTally tally;
  double sc_signal_hz = 0, sc_idler_hz = 0, cc_excess_hz = 0, ac_hz = 0;
};

TallyRates run_and_tally(const RunConfig& cfg, int window) {
  TallyBuilder builder(window);
  simulate_blocks(cfg, [&](std::span<const EventRecord> block) { builder.add(block); });
  TallyRates r;
  r.tally = builder.finish(cfg.n_pulses, cfg.model.rep_rate_hz);
  const double per_pulse_to_hz = cfg.model.rep_rate_hz / double(cfg.n_pulses);
  r.sc_signal_hz = double(r.tally.c1) * per_pulse_to_hz;
  r.sc_idler_hz = double(r.tally.c2) * per_pulse_to_hz;
  r.ac_hz = r.tally.accidental_mean() * per_pulse_to_hz;
  r.cc_excess_hz = std::max(0.0, double(r.tally.zero_delay()) - r.tally.accidental_mean()) *
                   per_pulse_to_hz;
  return r;
}

void print_tally_report(std::ostream& os, const CoincidenceTally& t, const std::string& topology,
                        const std::string& digest) {
  const double to_hz = t.n_pulses ? t.rep_rate_hz / double(t.n_pulses) : 0.0;
  os << "n_pulses=" << t.n_pulses << "\n";
  os << "rep_rate_hz=" << fmt(t.rep_rate_hz) << "\n";
  os << "window=" << t.window << "\n";
  if (!digest.empty()) os << "config_digest=" << digest << "\n";
  os << "c1=" << t.c1 << "\nc2=" << t.c2 << "\nc3=" << t.c3 << "\n";
  os << "c12=" << t.c12 << "\nc13=" << t.c13 << "\nc23=" << t.c23 << "\nc123=" << t.c123 << "\n";
  os << "sc_signal_hz=" << fmt(double(t.c1) * to_hz) << "\n";
  os << "sc_idler_hz=" << fmt(double(t.c2) * to_hz) << "\n";
  const double acc = t.accidental_mean();
  const double excess = double(t.zero_delay()) - acc;
  os << "cc_hz=" << fmt(excess * to_hz) << "\n";
  os << "ac_hz=" << fmt(acc * to_hz) << "\n";

  auto car = estimate_car(t);
  os << "car=" << fmt(car.value) << "\ncar_err=" << fmt(car.std_error) << "\n";
  if (car.bound == EstimateWithError::Bound::lower)
    os << "car_note=lower bound only (all accidental bins empty)\n";

  if (t.c1 > 0) {
    auto eh = estimate_heralding(t, ChannelSide::idler);
    os << "eta_h_idler=" << fmt(eh.value) << "\neta_h_idler_err=" << fmt(eh.std_error) << "\n";
  }
  if (t.c2 > 0) {
    auto eh = estimate_heralding(t, ChannelSide::signal);
    os << "eta_h_signal=" << fmt(eh.value) << "\neta_h_signal_err=" << fmt(eh.std_error) << "\n";
  }

  if (topology == "three_detector" || t.c3 > 0) {
    if (t.c12 > 0 && t.c13 > 0) {
      auto g2 = estimate_g2h(t);
      os << "g2h=" << fmt(g2.value) << "\ng2h_err=" << fmt(g2.std_error) << "\n";
      if (g2.bound == EstimateWithError::Bound::upper)
        os << "g2h_note=no three-fold events; value is an upper bound "
           << fmt(g2.bound_value) << "\n";
    } else {
      os << "g2h_note=undefined (zero two-fold counts)\n";
    }
  } else {
    os << "g2h_note=omitted: two_detector data carries no heralded-arm split (needs three_detector topology)\n";
  }
}

void write_histogram_csv(std::ostream& os, const CoincidenceTally& t) {
  os << "delta,counts\n";
  for (int d = -t.window; d <= t.window; ++d)
    os << d << "," << t.hist_at(d) << "\n";
}

int cmd_simulate(const std::string& config_path, const std::string& output_path,
                 const std::string& format, std::optional<uint64_t> seed_override,
                 unsigned threads) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed_override) cfg.seed = *seed_override;
  RunConfig run = cfg.to_run_config();
  run.threads = threads;

  EventStream stream = simulate(run);
  std::ofstream out(output_path, std::ios::binary);
  if (!out) throw io_error("cannot open output file: " + output_path);
  emit_events(stream, out, format == "binary" ? EventFileFormat::binary : EventFileFormat::text);
  out.close();
  if (!out) throw io_error("write failure: " + output_path);

  CoincidenceTally t = tally(stream, cfg.window);
  print_tally_report(std::cout, t, stream.info.topology, stream.info.config_digest);
  std::cout << "events_written=" << stream.records.size() << "\noutput=" << output_path << "\n";
  return 0;
}

int cmd_analyze(const std::vector<std::string>& event_paths, int window,
                const std::string& format, const std::string& output_path,
                const std::string& histogram_path) {
  CoincidenceTally merged;
  bool first = true;
  std::string topology, digest;
  for (const auto& path : event_paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open event file: " + path);
    EventStream stream;
    if (format == "text") stream = ingest(in, EventFileFormat::text);
    else if (format == "binary") stream = ingest(in, EventFileFormat::binary);
    else stream = ingest_auto(in);
    CoincidenceTally t = tally(stream, window);
    if (first) {
      merged = t;
      topology = stream.info.topology;
      digest = stream.info.config_digest;
      first = false;
    } else {
      merged.merge(t);
      if (stream.info.topology != topology) topology = "mixed";
      if (stream.info.config_digest != digest) digest = "";
    }
  }

  std::ostringstream report;
  print_tally_report(report, merged, topology, digest);
  std::cout << report.str();
  if (!output_path.empty()) {
    std::ofstream out(output_path);
    if (!out) throw io_error("cannot open output file: " + output_path);
    out << report.str();
  }
  if (!histogram_path.empty()) {
    std::ofstream out(histogram_path);
    if (!out) throw io_error("cannot open histogram file: " + histogram_path);
    write_histogram_csv(out, merged);
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& powers,
              const std::string& output_path, std::optional<uint64_t> seed_override,
              unsigned threads) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed_override) cfg.seed = *seed_override;
  if (!cfg.pump_law_enabled)
    throw parameter_domain_error("sweep: config must enable pump_law");
  if (powers.empty()) throw parameter_domain_error("sweep: need at least one power");
  SourceModel base = cfg.to_model();

  std::vector<PowerSweepPoint> points;
  for (size_t i = 0; i < powers.size(); ++i) {
    if (!(powers[i] > 0.0))
      throw parameter_domain_error("sweep: powers must be > 0, got " + fmt(powers[i]));
    RunConfig run;
    run.model = model_at_power(base, powers[i]);
    run.n_pulses = cfg.n_pulses;
    run.seed = child_seed(cfg.seed, i);
    run.topology = cfg.topology;
    run.block_size = cfg.block_size;
    run.dead_time_slots = cfg.dead_time_slots;
    run.threads = threads;
    TallyRates r = run_and_tally(run, cfg.window);
    PowerSweepPoint p;
    p.peak_power_w = powers[i];
    p.sc_signal_hz = r.sc_signal_hz;
    p.sc_idler_hz = r.sc_idler_hz;
    p.cc_hz = r.cc_excess_hz;
    points.push_back(p);
    std::cout << "power_w=" << fmt(powers[i]) << " mu=" << fmt(run.model.pair_dist.mu())
              << " sc_signal_hz=" << fmt(p.sc_signal_hz) << " sc_idler_hz=" << fmt(p.sc_idler_hz)
              << " cc_hz=" << fmt(p.cc_hz) << "\n";
    if (base.pulse_width_s > 0.0)
      std::cout << "  avg_power_w=" << fmt(average_power(powers[i], base.pulse_width_s,
                                                         base.rep_rate_hz)) << "\n";
  }

  std::ofstream out(output_path);
  if (!out) throw io_error("cannot open output file: " + output_path);
  write_sweep_csv(out, points, cfg.digest(), base.rep_rate_hz);
  std::cout << "output=" << output_path << "\n";
  return 0;
}

// Saturation cutoff for the default fit domain: keep points up to and
// including the first one whose heralding-efficiency gain over the previous
// point drops below 1%.
double auto_max_power(std::vector<PowerSweepPoint> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a.peak_power_w < b.peak_power_w; });
  double prev = -1.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].sc_signal_hz > 0.0)) continue;
    double eta = pts[i].cc_hz / pts[i].sc_signal_hz;
    if (prev > 0.0 && eta > 0.0 && (eta - prev) / eta < 0.01 && i >= 4)
      return pts[i].peak_power_w;
    prev = eta;
  }
  return pts.empty() ? 0.0 : pts.back().peak_power_w;
}

void print_fit(std::ostream& os, const char* name, const FitResult& f) {
  os << name << "_a_hz_per_w2=" << fmt(f.a) << "\n";
  os << name << "_a_err=" << fmt(std::sqrt(std::max(0.0, f.covariance[0][0]))) << "\n";
  os << name << "_b_hz_per_w=" << fmt(f.b) << "\n";
  os << name << "_b_err=" << fmt(std::sqrt(std::max(0.0, f.covariance[1][1]))) << "\n";
  os << name << "_c_hz=" << fmt(f.c) << "\n";
  os << name << "_c_err=" << fmt(std::sqrt(std::max(0.0, f.covariance[2][2]))) << "\n";
  os << name << "_residual_norm=" << fmt(f.residual_norm) << "\n";
  os << name << "_domain_w=" << fmt(f.domain_min) << ".." << fmt(f.domain_max) << "\n";
}

int cmd_fit(const std::string& sweep_path, double max_power, const std::string& cc_form,
            bool unweighted, const std::string& output_path, const std::string& curve_path,
            int curve_points, double rep_rate_hz) {
  std::ifstream in(sweep_path);
  if (!in) throw io_error("cannot open sweep csv: " + sweep_path);
  std::string digest;
  double csv_rep_rate = 0.0;
  std::vector<PowerSweepPoint> points = read_sweep_csv(in, &digest, &csv_rep_rate);
  if (points.empty()) throw format_error("fit: sweep csv has no data rows");
  if (rep_rate_hz <= 0.0) rep_rate_hz = csv_rep_rate;

  if (max_power <= 0.0) {
    max_power = auto_max_power(points);
    std::cout << "fit_domain_auto_max_power_w=" << fmt(max_power) << "\n";
  }

  FitForm cc = cc_form == "full" ? FitForm::full_quadratic : FitForm::quadratic_plus_constant;
  FitResult fit_s = fit_quadratic(points, FitChannel::signal, max_power, std::nullopt, unweighted);
  FitResult fit_i = fit_quadratic(points, FitChannel::idler, max_power, std::nullopt, unweighted);
  FitResult fit_c = fit_quadratic(points, FitChannel::coincidence, max_power, cc, unweighted);

  std::ostringstream report;
  if (!digest.empty()) report << "config_digest=" << digest << "\n";
  print_fit(report, "signal", fit_s);
  print_fit(report, "idler", fit_i);
  print_fit(report, "coincidence", fit_c);
  report << "noise_fraction_table=power_w:signal:idler\n";
  for (const auto& p : points) {
    if (!fit_s.in_domain(p.peak_power_w)) continue;
    report << "noise_fraction_at_" << fmt(p.peak_power_w) << "="
           << fmt(noise_fraction(fit_s, p.peak_power_w)) << ":"
           << fmt(noise_fraction(fit_i, p.peak_power_w)) << "\n";
  }
  std::cout << report.str();
  if (!output_path.empty()) {
    std::ofstream out(output_path);
    if (!out) throw io_error("cannot open output file: " + output_path);
    out << report.str();
  }

  if (!curve_path.empty()) {
    if (!(rep_rate_hz > 0.0))
      throw parameter_domain_error(
          "fit: CAR curve needs the repetition rate (csv header or --rep-rate)");
    double lo = std::max({fit_s.domain_min, fit_i.domain_min, fit_c.domain_min});
    double hi = std::min({fit_s.domain_max, fit_i.domain_max, fit_c.domain_max});
    std::vector<double> grid;
    for (int i = 0; i < curve_points; ++i)
      grid.push_back(lo * std::pow(hi / lo, double(i) / double(curve_points - 1)));
    auto curve = car_curve(fit_s, fit_i, fit_c, rep_rate_hz, grid);
    std::ofstream out(curve_path);
    if (!out) throw io_error("cannot open curve file: " + curve_path);
    out << "power_w,cc_hz,car\n";
    for (const auto& c : curve)
      out << fmt(c.power_w) << "," << fmt(c.cc_hz) << "," << fmt(c.car) << "\n";
    std::cout << "curve_output=" << curve_path << "\n";
  }
  return 0;
}

int cmd_curves(double mu_min, double mu_max, int mu_points, double car_min, double car_max,
               int car_points, const std::vector<double>& car_list, const std::string& out_dir) {
  if (!(mu_min > 0.0) || !(mu_max > mu_min) || mu_points < 2)
    throw parameter_domain_error("curves: invalid mu range");
  if (!(car_min > 1.0) || !(car_max > car_min) || car_points < 2)
    throw parameter_domain_error("curves: invalid CAR range (CAR must be > 1)");
  for (double c : car_list)
    if (!(c > 1.0)) throw parameter_domain_error("curves: CAR values must be > 1, got " + fmt(c));

  fs::create_directories(out_dir);
  std::string params;
  params += "mu:" + fmt(mu_min) + "," + fmt(mu_max) + "," + std::to_string(mu_points);
  params += ";car:" + fmt(car_min) + "," + fmt(car_max) + "," + std::to_string(car_points);
  for (double c : car_list) params += ";" + fmt(c);
  std::string digest = digest_hex(params);

  {
    std::ofstream out(out_dir + "/g2_vs_mu.csv");
    if (!out) throw io_error("cannot write g2_vs_mu.csv");
    out << "# params_digest=" << digest << "\n";
    out << "mu,g2_poissonian,g2_thermal\n";
    for (int i = 0; i < mu_points; ++i) {
      double mu = mu_min * std::pow(mu_max / mu_min, double(i) / double(mu_points - 1));
      out << fmt(mu) << "," << fmt(g2_heralded_poissonian(mu)) << ","
          << fmt(g2_heralded_thermal(mu)) << "\n";
    }
  }
  {
    std::ofstream out(out_dir + "/g2_vs_car.csv");
    if (!out) throw io_error("cannot write g2_vs_car.csv");
    out << "# params_digest=" << digest << "\n";
    out << "car,g2_poissonian,g2_thermal\n";
    auto row = [&](double car) {
      out << fmt(car) << "," << fmt(g2_from_car(car, PairLaw::poissonian)) << ","
          << fmt(g2_from_car(car, PairLaw::thermal_like)) << "\n";
    };
    for (int i = 0; i < car_points; ++i)
      row(car_min * std::pow(car_max / car_min, double(i) / double(car_points - 1)));
    for (double c : car_list) row(c);
  }
  {
    std::ofstream out(out_dir + "/car_vs_mu.csv");
    if (!out) throw io_error("cannot write car_vs_mu.csv");
    out << "# params_digest=" << digest << "\n";
    out << "mu,car_ideal\n";
    for (int i = 0; i < mu_points; ++i) {
      double mu = mu_min * std::pow(mu_max / mu_min, double(i) / double(mu_points - 1));
      out << fmt(mu) << "," << fmt(car_ideal(mu)) << "\n";
    }
  }
  std::cout << "output_dir=" << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heralded single-photon source simulator and analysis toolkit"};
  app.require_subcommand(1);

  std::string config_path, output_path, format = "text", histogram_path, curve_path;
  std::string cc_form = "quadconst";
  std::vector<std::string> event_paths;
  std::vector<double> powers, car_list;
  std::optional<uint64_t> seed_override;
  unsigned threads = 0;
  int window = 10;
  double max_power = 0.0;
  double mu_min = 0.01, mu_max = 1.0, car_min = 2.0, car_max = 10000.0;
  int mu_points = 100, car_points = 100, curve_points = 100;

  auto* sim = app.add_subcommand("simulate", "run the Monte Carlo and write an event file");
  sim->add_option("--config", config_path, "experiment config file")->required();
  sim->add_option("--output", output_path, "event file path")->required();
  sim->add_option("--format", format, "event file format: text|binary")
      ->check(CLI::IsMember({"text", "binary"}));
  sim->add_option("--seed", seed_override, "override config seed");
  sim->add_option("--threads", threads, "worker threads (0 = hardware)");

  auto* ana = app.add_subcommand("analyze", "tally event files and report measured quantities");
  ana->add_option("events", event_paths, "event file(s)")->required()->expected(-1);
  ana->add_option("--window", window, "delay histogram half-width in pulse slots");
  ana->add_option("--format", format, "input format: auto|text|binary")
      ->check(CLI::IsMember({"auto", "text", "binary"}));
  ana->add_option("--output", output_path, "also write the report here");
  ana->add_option("--histogram", histogram_path, "write delay histogram CSV here");

  auto* swp = app.add_subcommand("sweep", "simulate a pump-power sweep and write the sweep CSV");
  swp->add_option("--config", config_path, "experiment config file (pump_law=on)")->required();
  swp->add_option("--powers", powers, "peak powers in W")->required()->delimiter(',');
  swp->add_option("--output", output_path, "sweep CSV path")->required();
  swp->add_option("--seed", seed_override, "override config seed");
  swp->add_option("--threads", threads, "worker threads (0 = hardware)");

  auto* fit = app.add_subcommand("fit", "fit a sweep CSV with the quadratic power law");
  fit->add_option("sweep", config_path, "sweep CSV path")->required();
  fit->add_option("--max-power", max_power, "fit domain upper bound in W (0 = auto)");
  fit->add_option("--cc-form", cc_form, "coincidence fit form: quadconst|full")
      ->check(CLI::IsMember({"quadconst", "full"}));
  fit->add_flag("--unweighted", "disable Poisson weighting");
  fit->add_option("--output", output_path, "write the fit report here");
  fit->add_option("--curve", curve_path, "write CAR-vs-coincidence curve CSV here");
  fit->add_option("--curve-points", curve_points, "points in the curve grid");
  double fit_rep_rate = 0.0;
  fit->add_option("--rep-rate", fit_rep_rate, "repetition rate in Hz (default: csv header)");

  auto* crv = app.add_subcommand("curves", "emit analytic g2/CAR curve CSVs");
  crv->add_option("--mu-min", mu_min);
  crv->add_option("--mu-max", mu_max);
  crv->add_option("--mu-points", mu_points);
  crv->add_option("--car-min", car_min);
  crv->add_option("--car-max", car_max);
  crv->add_option("--car-points", car_points);
  crv->add_option("--car-list", car_list, "extra CAR rows")->delimiter(',');
  crv->add_option("--output", output_path, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, output_path, format, seed_override, threads);
    if (ana->parsed())
      return cmd_analyze(event_paths, window, format == "text" || format == "binary" ? format : "auto",
                         output_path, histogram_path);
    if (swp->parsed()) return cmd_sweep(config_path, powers, output_path, seed_override, threads);
    if (fit->parsed())
      return cmd_fit(config_path, max_power, cc_form, fit->count("--unweighted") > 0, output_path,
                     curve_path, curve_points, fit_rep_rate);
    if (crv->parsed())
      return cmd_curves(mu_min, mu_max, mu_points, car_min, car_max, car_points, car_list,
                        output_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
