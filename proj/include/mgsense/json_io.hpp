#pragma once

// JSON bindings for the serialized value types.
// MGDistribution document: {"gamma0_db": number,
//                           "components": [{"alpha","beta","zeta"}, ...]}

#include <json.hpp>

#include "mgsense/errors.hpp"
#include "mgsense/mixture_gamma.hpp"
#include "mgsense/simkit.hpp"

namespace mgsense {

inline nlohmann::json to_json(const MGDistribution& dist) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : dist.components())
    comps.push_back({{"alpha", c.weight}, {"beta", c.shape}, {"zeta", c.rate}});
  return {{"gamma0_db", dist.gamma0_db()}, {"components", std::move(comps)}};
}

inline MGDistribution mg_from_json(const nlohmann::json& j) {
  if (!j.contains("gamma0_db") || !j.contains("components"))
    throw domain_error("MGDistribution JSON requires gamma0_db and components");
  std::vector<MGComponent> comps;
  for (const auto& c : j.at("components"))
    comps.push_back({c.at("alpha").get<double>(), c.at("beta").get<double>(),
                     c.at("zeta").get<double>()});
  return MGDistribution::from_db(std::move(comps), j.at("gamma0_db").get<double>());
}

inline nlohmann::json to_json(const TrialReport& rep) {
  return {{"trials", rep.trials},
          {"detections", rep.detections},
          {"rate", rep.empirical_rate},
          {"ci99", {rep.ci_low, rep.ci_high}},
          {"seed", rep.seed}};
}

inline nlohmann::json to_json(const NakagamiLognormalSpec& spec) {
  return {{"m", spec.m},
          {"sigma_db", spec.shadow_sigma_db},
          {"mu_db", spec.shadow_mu_db},
          {"components", spec.n_components}};
}

inline NakagamiLognormalSpec nl_spec_from_json(const nlohmann::json& j) {
  NakagamiLognormalSpec spec;
  spec.m = j.at("m").get<int>();
  spec.shadow_sigma_db = j.at("sigma_db").get<double>();
  spec.shadow_mu_db = j.value("mu_db", 0.0);
  spec.n_components = j.value("components", 15);
  spec.check();
  return spec;
}

}  // namespace mgsense
