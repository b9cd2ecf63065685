// Command-line front end: ROC sweeps, engine cross-checks, channel fits,
// curve ratios, threshold inversion, Monte Carlo runs.
//
// Exit codes: 0 success, 2 usage/config error, 3 accuracy/fit failure,
// 4 cross-check failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mgsense/json_io.hpp"
#include "mgsense/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitAccuracy = 3;
constexpr int kExitCrossCheck = 4;

struct CommonOpts {
  std::vector<std::string> configs;
  std::string out;
  std::string engines;
  std::optional<long long> trials;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool echo_config = false;
};

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mgsense::usage_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw mgsense::usage_error("config parse error in " + path + ": " + e.what());
  }
  return j;
}

void apply_overrides(mgsense::RunConfig& cfg, const CommonOpts& opts) {
  if (!opts.engines.empty()) {
    mgsense::EngineSet set;
    std::size_t pos = 0;
    const std::string& s = opts.engines;
    while (pos <= s.size()) {
      const std::size_t comma = s.find(',', pos);
      const std::string name = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
      if (name == "closed")
        set.closed = true;
      else if (name == "numeric")
        set.numeric = true;
      else if (name == "mc")
        set.mc = true;
      else if (!name.empty())
        throw mgsense::usage_error("unknown engine '" + name + "'");
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    cfg.engines = set;
  }
  if (opts.trials) cfg.mc_trials = *opts.trials;
  if (opts.seed) cfg.mc_seed = *opts.seed;
  if (opts.threads > 0) cfg.threads = opts.threads;
  if (!opts.out.empty()) cfg.output = opts.out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mgsense::usage_error("cannot write output file: " + path);
  out << text;
}

int cmd_roc(const CommonOpts& opts) {
  mgsense::RunConfig cfg = mgsense::parse_run_config(load_json(opts.configs.at(0)));
  apply_overrides(cfg, opts);
  if (opts.echo_config) {
    std::cout << mgsense::normalized_config(cfg).dump(2) << "\n";
    return kExitOk;
  }
  const mgsense::RocTable table = mgsense::compute_roc(cfg);
  const std::string csv = mgsense::to_csv(table);
  if (!cfg.output.empty()) {
    write_text(cfg.output, csv);
    std::cout << "roc: " << table.rows.size() << " points -> " << cfg.output << "\n";
  } else {
    std::cout << csv;
    std::cerr << "roc: " << table.rows.size() << " points\n";
  }
  if (table.capability_failure) {
    std::cerr << "roc: closed engine not applicable to some rows (NA cells)\n";
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_compare(const CommonOpts& opts) {
  mgsense::RunConfig cfg = mgsense::parse_run_config(load_json(opts.configs.at(0)));
  apply_overrides(cfg, opts);
  if (opts.echo_config) {
    std::cout << mgsense::normalized_config(cfg).dump(2) << "\n";
    return kExitOk;
  }
  const mgsense::CompareVerdict verdict = mgsense::compare_engines(cfg);
  const std::string text = verdict.report.dump(2) + "\n";
  if (!cfg.output.empty()) {
    write_text(cfg.output, text);
    std::cout << "compare: report -> " << cfg.output << "\n";
  } else {
    std::cout << text;
  }
  if (verdict.closed_numeric_failure || verdict.mc_coverage_failure) {
    std::cerr << "compare: cross-check failure (closed/numeric gap or MC coverage)\n";
    return kExitCrossCheck;
  }
  return kExitOk;
}

int cmd_fit(int m, double sigma_db, double mu_db, int components, double gamma0_db,
            const std::string& out) {
  mgsense::NakagamiLognormalSpec spec;
  spec.m = m;
  spec.shadow_sigma_db = sigma_db;
  spec.shadow_mu_db = mu_db;
  spec.n_components = components;
  const mgsense::NLFit fit =
      mgsense::fit_nakagami_lognormal(spec, mgsense::db_to_linear(gamma0_db));
  nlohmann::json report{{"spec", mgsense::to_json(spec)},
                        {"gamma0_db", gamma0_db},
                        {"ise", fit.ise},
                        {"ok", fit.ise <= 1e-4},
                        {"mg", mgsense::to_json(fit.dist)}};
  if (!out.empty()) {
    write_text(out, mgsense::to_json(fit.dist).dump(2) + "\n");
    report.erase("mg");
    report["output"] = out;
  }
  std::cout << report.dump(2) << "\n";
  if (!(fit.ise <= 1e-4)) {
    std::cerr << "fit: ISE " << fit.ise << " exceeds 1e-4; increase --components\n";
    return kExitAccuracy;
  }
  return kExitOk;
}

int cmd_ratios(const CommonOpts& opts) {
  if (opts.configs.size() < 2)
    throw mgsense::usage_error("ratios: pass --config at least twice");
  std::vector<mgsense::RunConfig> configs;
  for (const auto& path : opts.configs) {
    mgsense::RunConfig cfg = mgsense::parse_run_config(load_json(path));
    apply_overrides(cfg, opts);
    configs.push_back(std::move(cfg));
  }
  const nlohmann::json report = mgsense::ratio_report(configs);
  const std::string text = report.dump(2) + "\n";
  if (!opts.out.empty()) {
    write_text(opts.out, text);
    std::cout << "ratios: report -> " << opts.out << "\n";
  } else {
    std::cout << text;
  }
  return kExitOk;
}

int cmd_threshold(int u, double pf, const std::string& scheme, int L) {
  mgsense::DiversitySpec div;
  div.scheme = mgsense::scheme_from_string(scheme);
  div.branches = L;
  div.check();
  const double lambda = mgsense::detail::threshold_for_scheme(u, div, pf);
  nlohmann::json j{{"u", u}, {"pf", pf},      {"scheme", scheme},
                   {"L", L}, {"lambda_n", lambda}};
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_simulate(const CommonOpts& opts, const std::string& hypothesis) {
  mgsense::RunConfig cfg = mgsense::parse_run_config(load_json(opts.configs.at(0)));
  apply_overrides(cfg, opts);
  if (opts.echo_config) {
    std::cout << mgsense::normalized_config(cfg).dump(2) << "\n";
    return kExitOk;
  }
  if (cfg.sweep_pf.size() + cfg.sweep_lambda.size() != 1)
    throw mgsense::usage_error("simulate: config sweep must contain exactly one point");
  const double lambda = cfg.sweep_pf.empty()
                            ? cfg.sweep_lambda.front()
                            : mgsense::detail::threshold_for_scheme(cfg.u, cfg.diversity,
                                                                    cfg.sweep_pf.front());
  mgsense::TrialPlan plan;
  plan.n_trials = cfg.mc_trials;
  plan.seed = cfg.mc_seed;
  plan.cfg = {cfg.u, lambda};
  plan.diversity = cfg.diversity;
  if (cfg.mc_physical_nl)
    plan.channel =
        mgsense::NLChannel{cfg.channel.nl, mgsense::db_to_linear(cfg.channel.gamma0_db)};
  else
    plan.channel = cfg.channel.build();
  plan.threads = cfg.threads;
  const mgsense::Hypothesis hyp =
      (hypothesis == "h0") ? mgsense::Hypothesis::h0 : mgsense::Hypothesis::h1;
  const mgsense::TrialReport rep = mgsense::run_trials(plan, hyp);
  nlohmann::json j = mgsense::to_json(rep);
  j["lambda_n"] = lambda;
  j["hypothesis"] = hypothesis;
  const std::string text = j.dump(2) + "\n";
  if (!cfg.output.empty()) {
    write_text(cfg.output, text);
    std::cout << "simulate: report -> " << cfg.output << "\n";
  } else {
    std::cout << text;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-detection spectrum-sensing performance over mixture-gamma fading"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string hypothesis = "h1";
  int fit_m = 1, fit_components = 15, thr_u = 1, thr_L = 1;
  double fit_sigma = 1.0, fit_mu = 0.0, fit_gamma0 = 10.0, thr_pf = 0.1;
  std::string thr_scheme = "none";

  auto add_common = [&](CLI::App* sub, bool config_required) {
    sub->add_option("--config", opts.configs, "JSON run configuration")
        ->required(config_required);
    sub->add_option("--out", opts.out, "output path (overrides config)");
    sub->add_option("--engines", opts.engines, "comma list: closed,numeric,mc");
    sub->add_option("--trials", opts.trials, "Monte Carlo trials (overrides config)");
    sub->add_option("--seed", opts.seed, "Monte Carlo seed (overrides config)");
    sub->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
    sub->add_flag("--echo-config", opts.echo_config,
                  "print the normalized config and exit");
  };

  CLI::App* roc = app.add_subcommand("roc", "sweep thresholds and emit a ROC CSV");
  add_common(roc, true);
  CLI::App* compare =
      app.add_subcommand("compare", "cross-check engines; nonzero exit on mismatch");
  add_common(compare, true);
  CLI::App* fit = app.add_subcommand("fit", "fit a Nakagami-lognormal channel as MG");
  fit->add_option("--m", fit_m, "Nakagami m")->required();
  fit->add_option("--sigma-db", fit_sigma, "shadow standard deviation, dB")->required();
  fit->add_option("--mu-db", fit_mu, "shadow mean offset, dB");
  fit->add_option("--components", fit_components, "number of mixture components");
  fit->add_option("--gamma0-db", fit_gamma0, "mean SNR, dB")->required();
  fit->add_option("--out", opts.out, "write the MG JSON here");
  CLI::App* ratios =
      app.add_subcommand("ratios", "missed-detection ratios between configs");
  add_common(ratios, true);
  CLI::App* threshold = app.add_subcommand("threshold", "invert Pf to lambda_n");
  threshold->add_option("--u", thr_u, "time-bandwidth product")->required();
  threshold->add_option("--pf", thr_pf, "target false-alarm probability")->required();
  threshold->add_option("--scheme", thr_scheme, "none|slc|sls");
  threshold->add_option("--L", thr_L, "branches");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo trial run");
  add_common(simulate, true);
  simulate->add_option("--hypothesis", hypothesis, "h0|h1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (roc->parsed()) return cmd_roc(opts);
    if (compare->parsed()) return cmd_compare(opts);
    if (fit->parsed())
      return cmd_fit(fit_m, fit_sigma, fit_mu, fit_components, fit_gamma0, opts.out);
    if (ratios->parsed()) return cmd_ratios(opts);
    if (threshold->parsed()) return cmd_threshold(thr_u, thr_pf, thr_scheme, thr_L);
    if (simulate->parsed()) {
      if (hypothesis != "h0" && hypothesis != "h1")
        throw mgsense::usage_error("simulate: --hypothesis must be h0 or h1");
      return cmd_simulate(opts, hypothesis);
    }
  } catch (const mgsense::usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mgsense::fit_quality_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAccuracy;
  } catch (const mgsense::accuracy_error& e) {
    std::cerr << "error: " << e.what() << " (estimate " << e.estimate << ", error bound "
              << e.achieved << ")\n";
    return kExitAccuracy;
  } catch (const mgsense::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mgsense::unsupported_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAccuracy;
  }
  return kExitUsage;
}
