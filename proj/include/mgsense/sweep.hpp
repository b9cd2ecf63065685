#pragma once

// ROC sweeps, engine dispatch, CSV/report assembly: the library side of the
// command-line tool. Thresholds are defined on target Pf by default (matching
// complementary-ROC axes); all SNR inputs are dB and converted once at parse.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgsense/detector.hpp"
#include "mgsense/diversity.hpp"
#include "mgsense/json_io.hpp"
#include "mgsense/mixture_gamma.hpp"
#include "mgsense/simkit.hpp"

namespace mgsense {

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChannelSpec {
  enum class Kind { mg, rayleigh, nakagami, nakagami_lognormal };
  Kind kind = Kind::rayleigh;
  double gamma0_db = 10.0;
  NakagamiLognormalSpec nl;           // nakagami_lognormal
  int m = 1;                          // nakagami
  std::vector<MGComponent> inline_mg; // mg

  MGDistribution build() const {
    switch (kind) {
      case Kind::mg:
        return MGDistribution::from_db(inline_mg, gamma0_db);
      case Kind::rayleigh:
        return from_rayleigh(db_to_linear(gamma0_db));
      case Kind::nakagami:
        return from_nakagami(m, db_to_linear(gamma0_db));
      default:
        return from_nakagami_lognormal(nl, db_to_linear(gamma0_db));
    }
  }
};

struct EngineSet {
  bool closed = false;
  bool numeric = false;
  bool mc = false;
  int count() const { return int(closed) + int(numeric) + int(mc); }
};

struct RunConfig {
  ChannelSpec channel;
  int u = 1;
  DiversitySpec diversity;
  std::vector<double> sweep_pf;      // exactly one of the sweeps is nonempty
  std::vector<double> sweep_lambda;
  EngineSet engines;
  long long mc_trials = 1000000;
  std::uint64_t mc_seed = 1;
  bool mc_physical_nl = false;  // simulate the physical NL channel, not the fit
  int threads = 0;
  std::string output;

  void check() const {
    if (u < 1) throw usage_error("config: detector.u >= 1 required");
    diversity.check();
    if (sweep_pf.empty() == sweep_lambda.empty())
      throw usage_error("config: exactly one of sweep.pf / sweep.lambda_n required");
    for (double pf : sweep_pf)
      if (!(pf > 0.0) || pf > 1.0) throw usage_error("config: sweep pf values must lie in (0,1]");
    for (double lam : sweep_lambda)
      if (!(lam >= 0.0)) throw usage_error("config: sweep lambda_n values must be >= 0");
    if (engines.count() == 0) throw usage_error("config: at least one engine required");
    if (mc_trials < 1) throw usage_error("config: montecarlo.trials >= 1 required");
    if (mc_physical_nl && channel.kind != ChannelSpec::Kind::nakagami_lognormal)
      throw usage_error("config: montecarlo.physical_nl needs a nakagami_lognormal channel");
  }
};

struct RocRow {
  double pf = 0.0;        // scheme-level false-alarm target
  double lambda_n = 0.0;
  Scheme scheme = Scheme::none;
  int L = 1;
  std::optional<double> pd_closed, pd_numeric, pd_mc, mc_ci_lo, mc_ci_hi;
  bool closed_unsupported = false;  // engine requested but not applicable
};

struct RocTable {
  std::vector<RocRow> rows;
  bool capability_failure = false;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + (salt + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Scheme-level Pf target -> per-detector normalized threshold.
inline double threshold_for_scheme(int u, const DiversitySpec& div, double pf) {
  switch (div.scheme) {
    case Scheme::slc:
      return threshold_for_pfa(div.branches * u, pf);
    case Scheme::sls: {
      const double pf_branch = -std::expm1(std::log1p(-pf) / div.branches);
      return threshold_for_pfa(u, pf_branch);
    }
    default:
      return threshold_for_pfa(u, pf);
  }
}

inline double pfa_for_scheme(int u, const DiversitySpec& div, double lambda_n) {
  switch (div.scheme) {
    case Scheme::slc:
      return slc_pfa(u, div.branches, lambda_n);
    case Scheme::sls:
      return sls_pfa(u, div.branches, lambda_n);
    default:
      return prob_false_alarm({u, lambda_n});
  }
}

inline double pd_closed_engine(const DetectorConfig& cfg, const DiversitySpec& div,
                               const MGDistribution& dist) {
  switch (div.scheme) {
    case Scheme::slc:
      if (div.branches == 1) return avg_pd_closed(cfg, dist);
      if (div.branches == 2) return slc_avg_pd_closed_l2(cfg, dist);
      throw unsupported_error("closed engine: SLC closed form covers L in {1,2}");
    case Scheme::sls:
      return sls_avg_pd(cfg, dist, div.branches, PdEngine::closed);
    default:
      return avg_pd_closed(cfg, dist);
  }
}

inline double pd_numeric_engine(const DetectorConfig& cfg, const DiversitySpec& div,
                                const MGDistribution& dist) {
  switch (div.scheme) {
    case Scheme::slc:
      return slc_avg_pd_numeric(cfg, dist, div.branches);
    case Scheme::sls:
      return sls_avg_pd(cfg, dist, div.branches, PdEngine::numeric);
    default:
      return avg_pd_numeric(cfg, dist);
  }
}

inline std::string g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string g12_opt(const std::optional<double>& v) {
  return v ? g12(*v) : std::string("NA");
}

}  // namespace detail

/// Sweeps the configured thresholds and evaluates every requested engine.
/// Rows come out sorted by Pf ascending; a requested-but-inapplicable closed
/// engine leaves NA cells and flags the table.
inline RocTable compute_roc(const RunConfig& config) {
  config.check();
  const MGDistribution dist = config.channel.build();
  RocTable table;

  std::vector<std::pair<double, double>> points;  // (pf, lambda_n)
  if (!config.sweep_pf.empty()) {
    for (double pf : config.sweep_pf)
      points.emplace_back(pf, detail::threshold_for_scheme(config.u, config.diversity, pf));
  } else {
    for (double lam : config.sweep_lambda)
      points.emplace_back(detail::pfa_for_scheme(config.u, config.diversity, lam), lam);
  }
  std::sort(points.begin(), points.end());

  for (std::size_t i = 0; i < points.size(); ++i) {
    RocRow row;
    row.pf = points[i].first;
    row.lambda_n = points[i].second;
    row.scheme = config.diversity.scheme;
    row.L = config.diversity.branches;
    const DetectorConfig cfg{config.u, row.lambda_n};

    if (config.engines.closed) {
      try {
        row.pd_closed = detail::pd_closed_engine(cfg, config.diversity, dist);
      } catch (const unsupported_error&) {
        row.closed_unsupported = true;
        table.capability_failure = true;
      }
    }
    if (config.engines.numeric)
      row.pd_numeric = detail::pd_numeric_engine(cfg, config.diversity, dist);
    if (config.engines.mc) {
      TrialPlan plan;
      plan.n_trials = config.mc_trials;
      plan.seed = detail::mix_seed(config.mc_seed, i);
      plan.cfg = cfg;
      plan.diversity = config.diversity;
      if (config.mc_physical_nl)
        plan.channel = NLChannel{config.channel.nl, db_to_linear(config.channel.gamma0_db)};
      else
        plan.channel = dist;
      plan.threads = config.threads;
      const TrialReport rep = run_trials(plan, Hypothesis::h1);
      row.pd_mc = rep.empirical_rate;
      row.mc_ci_lo = rep.ci_low;
      row.mc_ci_hi = rep.ci_high;
    }
    table.rows.push_back(row);
  }
  return table;
}

/// Fixed CSV schema; numbers at 12 significant digits, missing engines as NA.
inline std::string to_csv(const RocTable& table) {
  std::string out =
      "pf,lambda_n,scheme,L,pd_closed,pd_numeric,pd_mc,pd_mc_ci_lo,pd_mc_ci_hi,"
      "md_closed,md_numeric,md_mc\n";
  auto md = [](const std::optional<double>& pd) -> std::optional<double> {
    if (!pd) return std::nullopt;
    return 1.0 - *pd;
  };
  for (const auto& r : table.rows) {
    out += detail::g12(r.pf) + ',' + detail::g12(r.lambda_n) + ',' + scheme_name(r.scheme) +
           ',' + std::to_string(r.L) + ',' + detail::g12_opt(r.pd_closed) + ',' +
           detail::g12_opt(r.pd_numeric) + ',' + detail::g12_opt(r.pd_mc) + ',' +
           detail::g12_opt(r.mc_ci_lo) + ',' + detail::g12_opt(r.mc_ci_hi) + ',' +
           detail::g12_opt(md(r.pd_closed)) + ',' + detail::g12_opt(md(r.pd_numeric)) + ',' +
           detail::g12_opt(md(r.pd_mc)) + '\n';
  }
  return out;
}

struct CompareVerdict {
  nlohmann::json report;
  bool closed_numeric_failure = false;  // gap > 1e-6 somewhere
  bool mc_coverage_failure = false;     // misses in > 10% of cells
};

/// Pairwise engine discrepancies per sweep point, with CI coverage verdicts.
inline CompareVerdict compare_engines(const RunConfig& config) {
  if (config.engines.count() < 2)
    throw usage_error("compare: at least two engines required");
  const RocTable table = compute_roc(config);
  CompareVerdict verdict;
  double max_gap = 0.0;
  int mc_cells = 0, mc_misses = 0;
  nlohmann::json points = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json p{{"pf", r.pf}, {"lambda_n", r.lambda_n}};
    if (r.pd_closed) p["pd_closed"] = *r.pd_closed;
    if (r.pd_numeric) p["pd_numeric"] = *r.pd_numeric;
    if (r.pd_mc) {
      p["pd_mc"] = *r.pd_mc;
      p["ci99"] = {*r.mc_ci_lo, *r.mc_ci_hi};
    }
    if (r.pd_closed && r.pd_numeric) {
      const double gap = std::fabs(*r.pd_closed - *r.pd_numeric);
      p["closed_numeric_gap"] = gap;
      max_gap = std::max(max_gap, gap);
    }
    if (r.pd_mc && (r.pd_closed || r.pd_numeric)) {
      const double ref = r.pd_closed ? *r.pd_closed : *r.pd_numeric;
      const bool covered = (*r.mc_ci_lo <= ref && ref <= *r.mc_ci_hi);
      p["mc_covers_analytic"] = covered;
      ++mc_cells;
      if (!covered) ++mc_misses;
    }
    points.push_back(std::move(p));
  }
  verdict.closed_numeric_failure = max_gap > 1e-6;
  verdict.mc_coverage_failure = mc_cells > 0 && mc_misses > 0.10 * mc_cells;
  verdict.report = {{"points", std::move(points)},
                    {"max_closed_numeric_gap", max_gap},
                    {"mc_cells", mc_cells},
                    {"mc_misses", mc_misses},
                    {"closed_numeric_ok", !verdict.closed_numeric_failure},
                    {"mc_coverage_ok", !verdict.mc_coverage_failure}};
  return verdict;
}

/// Missed-detection ratio oriented so the better curve sits in the denominator.
inline double oriented_md_ratio(double pd_a, double pd_b) {
  const double md_a = 1.0 - pd_a, md_b = 1.0 - pd_b;
  if (md_a == 0.0 && md_b == 0.0) return 1.0;
  if (md_a == 0.0 || md_b == 0.0) return HUGE_VAL;
  const double r = md_a / md_b;
  return r >= 1.0 ? r : 1.0 / r;
}

/// (1-Pd) ratios between configs sharing u, gamma0 and the sweep, at each
/// shared Pf, for every config pair.
inline nlohmann::json ratio_report(const std::vector<RunConfig>& configs) {
  if (configs.size() < 2) throw usage_error("ratios: at least two configs required");
  for (const auto& c : configs) {
    if (c.u != configs[0].u) throw usage_error("ratios: configs must share detector.u");
    if (c.channel.gamma0_db != configs[0].channel.gamma0_db)
      throw usage_error("ratios: configs must share gamma0_db");
    if (c.sweep_pf != configs[0].sweep_pf || c.sweep_lambda != configs[0].sweep_lambda)
      throw usage_error("ratios: configs must share the sweep");
  }
  std::vector<RocTable> tables;
  tables.reserve(configs.size());
  for (const auto& c : configs) tables.push_back(compute_roc(c));

  auto best_pd = [](const RocRow& r) -> std::optional<double> {
    if (r.pd_closed) return r.pd_closed;
    if (r.pd_numeric) return r.pd_numeric;
    return r.pd_mc;
  };

  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t a = 0; a < tables.size(); ++a) {
    for (std::size_t b = a + 1; b < tables.size(); ++b) {
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t i = 0; i < tables[a].rows.size(); ++i) {
        const auto pa = best_pd(tables[a].rows[i]);
        const auto pb = best_pd(tables[b].rows[i]);
        if (!pa || !pb) continue;
        const double md_a = 1.0 - *pa, md_b = 1.0 - *pb;
        rows.push_back({{"pf", tables[a].rows[i].pf},
                        {"md_a", md_a},
                        {"md_b", md_b},
                        {"ratio", oriented_md_ratio(*pa, *pb)},
                        {"better", md_a <= md_b ? "a" : "b"}});
      }
      pairs.push_back({{"a", a}, {"b", b}, {"rows", std::move(rows)}});
    }
  }
  return {{"pairs", std::move(pairs)}};
}

// ---------------------------------------------------------------------------
// Config document parsing.

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "none") return Scheme::none;
  if (s == "slc") return Scheme::slc;
  if (s == "sls") return Scheme::sls;
  throw usage_error("config: unknown diversity scheme '" + s + "'");
}

inline ChannelSpec parse_channel(const nlohmann::json& j) {
  ChannelSpec spec;
  const std::string type = j.value("type", std::string("rayleigh"));
  if (!j.contains("gamma0_db")) throw usage_error("config: channel.gamma0_db required");
  spec.gamma0_db = j.at("gamma0_db").get<double>();
  if (type == "rayleigh") {
    spec.kind = ChannelSpec::Kind::rayleigh;
  } else if (type == "nakagami") {
    spec.kind = ChannelSpec::Kind::nakagami;
    spec.m = j.at("m").get<int>();
  } else if (type == "nakagami_lognormal") {
    spec.kind = ChannelSpec::Kind::nakagami_lognormal;
    spec.nl = nl_spec_from_json(j);
  } else if (type == "mg") {
    spec.kind = ChannelSpec::Kind::mg;
    for (const auto& c : j.at("components"))
      spec.inline_mg.push_back({c.at("alpha").get<double>(), c.at("beta").get<double>(),
                                c.at("zeta").get<double>()});
    if (spec.inline_mg.empty()) throw usage_error("config: mg channel needs components");
  } else {
    throw usage_error("config: unknown channel type '" + type + "'");
  }
  return spec;
}

inline nlohmann::json channel_to_json(const ChannelSpec& spec) {
  switch (spec.kind) {
    case ChannelSpec::Kind::rayleigh:
      return {{"type", "rayleigh"}, {"gamma0_db", spec.gamma0_db}};
    case ChannelSpec::Kind::nakagami:
      return {{"type", "nakagami"}, {"m", spec.m}, {"gamma0_db", spec.gamma0_db}};
    case ChannelSpec::Kind::nakagami_lognormal: {
      nlohmann::json j = to_json(spec.nl);
      j["type"] = "nakagami_lognormal";
      j["gamma0_db"] = spec.gamma0_db;
      return j;
    }
    default: {
      nlohmann::json comps = nlohmann::json::array();
      for (const auto& c : spec.inline_mg)
        comps.push_back({{"alpha", c.weight}, {"beta", c.shape}, {"zeta", c.rate}});
      return {{"type", "mg"}, {"gamma0_db", spec.gamma0_db}, {"components", std::move(comps)}};
    }
  }
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig cfg;
  try {
    cfg.channel = parse_channel(j.at("channel"));
    cfg.u = j.at("detector").at("u").get<int>();
    if (j.contains("diversity")) {
      cfg.diversity.scheme = scheme_from_string(j.at("diversity").value("scheme", "none"));
      cfg.diversity.branches = j.at("diversity").value("L", 1);
    }
    const auto& sweep = j.at("sweep");
    if (sweep.contains("pf")) cfg.sweep_pf = sweep.at("pf").get<std::vector<double>>();
    if (sweep.contains("lambda_n"))
      cfg.sweep_lambda = sweep.at("lambda_n").get<std::vector<double>>();
    if (j.contains("engines")) {
      for (const auto& e : j.at("engines")) {
        const std::string name = e.get<std::string>();
        if (name == "closed")
          cfg.engines.closed = true;
        else if (name == "numeric")
          cfg.engines.numeric = true;
        else if (name == "mc")
          cfg.engines.mc = true;
        else
          throw usage_error("config: unknown engine '" + name + "'");
      }
    }
    if (j.contains("montecarlo")) {
      const auto& mc = j.at("montecarlo");
      cfg.mc_trials = mc.value("trials", cfg.mc_trials);
      cfg.mc_seed = mc.value("seed", cfg.mc_seed);
      cfg.mc_physical_nl = mc.value("physical_nl", false);
    }
    cfg.output = j.value("output", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("config: ") + e.what());
  }
  cfg.check();
  return cfg;
}

inline nlohmann::json normalized_config(const RunConfig& cfg) {
  nlohmann::json engines = nlohmann::json::array();
  if (cfg.engines.closed) engines.push_back("closed");
  if (cfg.engines.numeric) engines.push_back("numeric");
  if (cfg.engines.mc) engines.push_back("mc");
  nlohmann::json sweep;
  if (!cfg.sweep_pf.empty()) sweep["pf"] = cfg.sweep_pf;
  if (!cfg.sweep_lambda.empty()) sweep["lambda_n"] = cfg.sweep_lambda;
  nlohmann::json j{{"channel", channel_to_json(cfg.channel)},
                   {"detector", {{"u", cfg.u}}},
                   {"diversity",
                    {{"scheme", scheme_name(cfg.diversity.scheme)},
                     {"L", cfg.diversity.branches}}},
                   {"sweep", std::move(sweep)},
                   {"engines", std::move(engines)},
                   {"montecarlo",
                    {{"trials", cfg.mc_trials},
                     {"seed", cfg.mc_seed},
                     {"physical_nl", cfg.mc_physical_nl}}}};
  if (!cfg.output.empty()) j["output"] = cfg.output;
  return j;
}

}  // namespace mgsense
