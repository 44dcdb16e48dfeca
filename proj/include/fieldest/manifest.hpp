#pragma once

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldest/error.hpp"
#include "fieldest/harness.hpp"
#include "fieldest/version.hpp"

namespace fieldest {

// Effective (post-defaults) config snapshot; enough to reproduce a run.
inline nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["field"] = {{"mu", c.theta_true.mu},
                {"xc", c.theta_true.xc},
                {"yc", c.theta_true.yc},
                {"spread_sq", c.spread_sq}};
  j["region"] = {{"x_min", c.region.x_min},
                 {"x_max", c.region.x_max},
                 {"y_min", c.region.y_min},
                 {"y_max", c.region.y_max}};
  j["quantizer"] = {{"levels", c.levels}, {"step", c.step}, {"offset", c.offset}};
  j["noise"] = {{"snr_obs_db", c.snr_obs_db}, {"snr_ch_db", c.snr_ch_db}};
  j["em"] = {{"max_em_iters", c.em.max_em_iters},
             {"em_tol", c.em.em_tol},
             {"max_newton_iters", c.em.max_newton_iters},
             {"newton_tol", c.em.newton_tol},
             {"damping", c.em.damping},
             {"jacobian_ridge", c.em.jacobian_ridge},
             {"max_condition", c.em.max_condition}};
  j["experiment"] = {{"k", c.single_k},
                     {"k_values", c.k_values},
                     {"trials", c.trials},
                     {"master_seed", c.master_seed},
                     {"init_mu", c.init.mu},
                     {"init_xc", c.init.xc},
                     {"init_yc", c.init.yc},
                     {"quadrature_nodes", c.quadrature_nodes},
                     {"outlier_tau", c.outlier_tau},
                     {"resample_grid", c.resample_grid},
                     {"threads", c.threads}};
  return j;
}

struct RunManifest {
  std::string command;
  ExperimentConfig config;
  std::vector<std::string> outputs;
};

inline std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Writes the run manifest atomically: the JSON goes to a temporary file in
// the target directory first and is renamed into place, so a crash never
// leaves a half-written manifest at the final path.
inline void write_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["version"] = kVersion;
  j["master_seed"] = m.config.master_seed;
  j["config"] = config_json(m.config);
  j["outputs"] = m.outputs;
  j["timestamp"] = iso8601_utc_now();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) {
      throw IoError("cannot open '" + tmp + "' for writing");
    }
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) {
      throw IoError("write to '" + tmp + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot move manifest into place at '" + path + "': " + ec.message());
  }
}

}  // namespace fieldest
