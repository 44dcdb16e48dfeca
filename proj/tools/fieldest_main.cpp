// Command-line front end: simulate one network realization, estimate from a
// stored realization, or run a Monte Carlo sweep over sensor counts.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fieldest/config.hpp"
#include "fieldest/csv.hpp"
#include "fieldest/estimator.hpp"
#include "fieldest/harness.hpp"
#include "fieldest/manifest.hpp"
#include "fieldest/version.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out;
  std::string in;
  std::string profile;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  bool trials_set = false;
  int threads = -1;
  int k = 0;
  bool k_set = false;
};

fieldest::ExperimentConfig load_with_overrides(const CliOptions& opt) {
  fieldest::ExperimentConfig cfg = fieldest::load_experiment_config(opt.config_path);
  if (!opt.profile.empty()) {
    fieldest::apply_profile(cfg, opt.profile);
  }
  if (opt.seed_set) {
    cfg.master_seed = opt.seed;
  }
  if (opt.trials_set) {
    cfg.trials = opt.trials;
  }
  if (opt.threads >= 0) {
    cfg.threads = opt.threads;
  }
  if (opt.k_set) {
    cfg.single_k = opt.k;
  }
  fieldest::validate(cfg);
  return cfg;
}

void print_params(const char* label, const fieldest::FieldParams& p) {
  std::printf("%s: mu=%s xc=%s yc=%s\n", label, fieldest::format_double(p.mu).c_str(),
              fieldest::format_double(p.xc).c_str(), fieldest::format_double(p.yc).c_str());
}

int cmd_simulate(const CliOptions& opt) {
  const fieldest::ExperimentConfig cfg = load_with_overrides(opt);
  const fieldest::NoiseConfig noise = fieldest::calibrate_noise(cfg);
  const auto streams = fieldest::trial_streams(
      cfg.master_seed, static_cast<std::uint64_t>(cfg.single_k), 0);
  fieldest::RandomStream placement = streams.stream(fieldest::StreamRole::placement);
  const fieldest::SensorGrid grid =
      fieldest::place_sensors(static_cast<std::size_t>(cfg.single_k), cfg.region, placement);
  const fieldest::NetworkRealization net =
      fieldest::simulate(fieldest::true_field(cfg), grid, fieldest::make_quantizer(cfg), noise,
                         streams);
  fieldest::write_realization_csv(opt.out, net);
  fieldest::write_manifest(opt.out + ".manifest.json", {"simulate", cfg, {opt.out}});
  std::printf("simulated %d sensors (seed %llu) -> %s\n", cfg.single_k,
              static_cast<unsigned long long>(cfg.master_seed), opt.out.c_str());
  std::printf("noise: sigma2=%s eta2=%s\n", fieldest::format_double(noise.sigma2).c_str(),
              fieldest::format_double(noise.eta2).c_str());
  return 0;
}

int cmd_estimate(const CliOptions& opt) {
  const fieldest::ExperimentConfig cfg = load_with_overrides(opt);
  const fieldest::NetworkRealization net = fieldest::read_realization_csv(opt.in, cfg.region);
  const fieldest::NoiseConfig noise = fieldest::calibrate_noise(cfg);
  const fieldest::EmResult em =
      fieldest::run_em(net.received, net.grid, fieldest::make_quantizer(cfg), noise,
                       {cfg.init, cfg.spread_sq}, cfg.em);
  fieldest::write_trace_csv(opt.out, em.trace);
  nlohmann::json summary;
  summary["theta_hat"] = {{"mu", em.theta_hat.mu}, {"xc", em.theta_hat.xc}, {"yc", em.theta_hat.yc}};
  summary["converged"] = em.converged;
  summary["iterations"] = em.iterations;
  summary["loglik"] = em.trace.back().loglik;
  if (!em.failure_reason.empty()) {
    summary["failure_reason"] = em.failure_reason;
  }
  const std::string summary_path = opt.out + ".summary.json";
  fieldest::detail::write_text_file(summary_path, summary.dump(2) + "\n");
  fieldest::write_manifest(opt.out + ".manifest.json", {"estimate", cfg, {opt.out, summary_path}});
  print_params("estimate", em.theta_hat);
  std::printf("converged=%s iterations=%d loglik=%s\n", em.converged ? "true" : "false",
              em.iterations, fieldest::format_double(em.trace.back().loglik).c_str());
  if (!em.failure_reason.empty()) {
    std::printf("failure: %s\n", em.failure_reason.c_str());
  }
  return 0;
}

const char kBoxplotSeGp[] = R"(# Box plot of squared location error vs sensor count.
# Usage: gnuplot -persist boxplot_se.gp
set datafile separator ','
set xlabel 'number of sensors K'
set ylabel 'squared location error'
set key off
set style fill empty
plot 'sweep.csv' skip 1 using 1:3:5:6:4 with candlesticks lt -1 whiskerbars, \
     'sweep.csv' skip 1 using 1:2:2:2:2 with candlesticks lt -1, \
     'se_box_outliers.csv' skip 1 using 1:2 with points pt 1 lc -1
)";

const char kBoxplotIseGp[] = R"(# Box plot of normalized integrated square error vs sensor count.
# Usage: gnuplot -persist boxplot_ise.gp
set datafile separator ','
set xlabel 'number of sensors K'
set ylabel 'integrated square error'
set key off
set style fill empty
plot 'sweep.csv' skip 1 using 1:9:11:12:10 with candlesticks lt -1 whiskerbars, \
     'sweep.csv' skip 1 using 1:8:8:8:8 with candlesticks lt -1, \
     'ise_box_outliers.csv' skip 1 using 1:2 with points pt 1 lc -1
)";

const char kOutlierCurveGp[] = R"(# Exceedance curves P[SE > tau], one per sensor count.
# Usage: gnuplot -persist outlier_curve.gp
set datafile separator ','
set xlabel 'threshold tau'
set ylabel 'P[SE > tau] (percent)'
set key outside
plot for [i=2:*] 'outlier_curve.csv' using 1:i with lines title columnheader(i)
)";

int cmd_sweep(const CliOptions& opt) {
  const fieldest::ExperimentConfig cfg = load_with_overrides(opt);
  std::error_code ec;
  std::filesystem::create_directories(opt.out, ec);
  if (ec) {
    throw fieldest::IoError("cannot create output directory '" + opt.out + "': " + ec.message());
  }
  const fieldest::SweepResult sweep = fieldest::run_sweep(cfg);
  std::vector<double> thresholds;
  for (int i = 0; i <= 120; ++i) {
    thresholds.push_back(0.1 * i);
  }
  const std::filesystem::path dir(opt.out);
  const auto at = [&](const char* f) { return (dir / f).string(); };
  fieldest::write_sweep_csv(at("sweep.csv"), sweep.rows);
  fieldest::detail::write_text_file(at("se_box_outliers.csv"),
                                    fieldest::box_outliers_csv_string(sweep.rows, true));
  fieldest::detail::write_text_file(at("ise_box_outliers.csv"),
                                    fieldest::box_outliers_csv_string(sweep.rows, false));
  fieldest::detail::write_text_file(at("outlier_curve.csv"),
                                    fieldest::outlier_curve_csv_string(sweep, thresholds));
  fieldest::detail::write_text_file(at("boxplot_se.gp"), kBoxplotSeGp);
  fieldest::detail::write_text_file(at("boxplot_ise.gp"), kBoxplotIseGp);
  fieldest::detail::write_text_file(at("outlier_curve.gp"), kOutlierCurveGp);
  fieldest::write_manifest(at("manifest.json"),
                           {"sweep",
                            cfg,
                            {at("sweep.csv"), at("se_box_outliers.csv"), at("ise_box_outliers.csv"),
                             at("outlier_curve.csv"), at("boxplot_se.gp"), at("boxplot_ise.gp"),
                             at("outlier_curve.gp")}});
  for (const fieldest::SweepRow& r : sweep.rows) {
    std::printf("K=%-4d se_median=%-12s outlier_frac=%-8s diverged=%d\n", r.k,
                fieldest::format_double(r.se.median).c_str(),
                fieldest::format_double(r.outlier_frac).c_str(), r.diverged);
  }
  std::printf("sweep results in %s\n", opt.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parametric field estimation from a quantized sensor network"};
  app.set_version_flag("--version", fieldest::kVersion);
  app.require_subcommand(1);
  CliOptions opt;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "experiment config file")->required();
    sub->add_option("--seed", opt.seed, "master seed override")
        ->each([&](const std::string&) { opt.seed_set = true; });
    sub->add_option("--profile", opt.profile, "sweep profile: desk or paper");
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate one network realization");
  add_common(sim);
  sim->add_option("--out", opt.out, "output realization CSV")->required();
  sim->add_option("--k", opt.k, "sensor count override")
      ->each([&](const std::string&) { opt.k_set = true; });

  CLI::App* est = app.add_subcommand("estimate", "run EM on a stored realization");
  add_common(est);
  est->add_option("--in", opt.in, "input realization CSV")->required();
  est->add_option("--out", opt.out, "output trace CSV")->required();

  CLI::App* swp = app.add_subcommand("sweep", "Monte Carlo sweep over sensor counts");
  add_common(swp);
  swp->add_option("--out", opt.out, "output directory")->required();
  swp->add_option("--trials", opt.trials, "trials per sensor count override")
      ->each([&](const std::string&) { opt.trials_set = true; });
  swp->add_option("--threads", opt.threads, "worker threads (0 = hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(opt);
    }
    if (est->parsed()) {
      return cmd_estimate(opt);
    }
    return cmd_sweep(opt);
  } catch (const fieldest::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fieldest::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
