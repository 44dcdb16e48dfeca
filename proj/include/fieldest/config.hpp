#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fieldest/error.hpp"
#include "fieldest/harness.hpp"

namespace fieldest {
namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

struct ConfigEntry {
  int line;
  std::string section;
  std::string key;
  std::string value;
};

[[noreturn]] inline void config_fail(std::string_view name, int line, const std::string& what) {
  throw ConfigError(std::string(name) + ":" + std::to_string(line) + ": " + what);
}

inline double parse_double(std::string_view name, const ConfigEntry& e) {
  const std::string v(e.value);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty()) {
    config_fail(name, e.line, "'" + e.key + "' expects a number, got '" + e.value + "'");
  }
  return d;
}

inline long long parse_int(std::string_view name, const ConfigEntry& e, std::string_view raw) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
  if (ec != std::errc{} || ptr != raw.data() + raw.size()) {
    config_fail(name, e.line, "'" + e.key + "' expects an integer, got '" + std::string(raw) + "'");
  }
  return out;
}

inline long long parse_int(std::string_view name, const ConfigEntry& e) {
  return parse_int(name, e, e.value);
}

inline std::uint64_t parse_uint64(std::string_view name, const ConfigEntry& e) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), out);
  if (ec != std::errc{} || ptr != e.value.data() + e.value.size()) {
    config_fail(name, e.line,
                "'" + e.key + "' expects an unsigned integer, got '" + e.value + "'");
  }
  return out;
}

inline bool parse_bool(std::string_view name, const ConfigEntry& e) {
  if (e.value == "true" || e.value == "1") {
    return true;
  }
  if (e.value == "false" || e.value == "0") {
    return false;
  }
  config_fail(name, e.line, "'" + e.key + "' expects true or false, got '" + e.value + "'");
}

inline std::vector<int> parse_int_list(std::string_view name, const ConfigEntry& e) {
  std::vector<int> out;
  std::string_view rest = e.value;
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    if (item.empty()) {
      config_fail(name, e.line, "'" + e.key + "' has an empty list element");
    }
    out.push_back(static_cast<int>(parse_int(name, e, item)));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  if (out.empty()) {
    config_fail(name, e.line, "'" + e.key + "' expects a comma-separated integer list");
  }
  return out;
}

}  // namespace detail

// Parses the INI-style experiment config. Sections and keys are a closed
// set: anything unrecognized is an error naming the file, line, and key.
// '#' and ';' start comments. A 'profile' key is applied before the other
// keys so explicit settings always win over profile defaults.
inline ExperimentConfig parse_experiment_config(std::string_view text, std::string_view name) {
  using detail::ConfigEntry;
  std::vector<ConfigEntry> entries;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) {
      line = line.substr(0, comment);
    }
    line = detail::trim(line);
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        detail::config_fail(name, line_no, "malformed section header");
      }
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (section != "field" && section != "region" && section != "quantizer" &&
          section != "noise" && section != "em" && section != "experiment") {
        detail::config_fail(name, line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      detail::config_fail(name, line_no, "expected 'key = value'");
    }
    if (section.empty()) {
      detail::config_fail(name, line_no, "key outside any section");
    }
    ConfigEntry e;
    e.line = line_no;
    e.section = section;
    e.key = std::string(detail::trim(line.substr(0, eq)));
    e.value = std::string(detail::trim(line.substr(eq + 1)));
    if (e.key.empty()) {
      detail::config_fail(name, line_no, "empty key");
    }
    if (e.value.empty()) {
      detail::config_fail(name, e.line, "empty value for '" + e.key + "'");
    }
    entries.push_back(std::move(e));
  }

  ExperimentConfig cfg;
  bool init_mu_set = false, init_xc_set = false, init_yc_set = false;
  // Profile first, then everything else in file order.
  for (const ConfigEntry& e : entries) {
    if (e.section == "experiment" && e.key == "profile") {
      try {
        apply_profile(cfg, e.value);
      } catch (const ConfigError& err) {
        detail::config_fail(name, e.line, err.what());
      }
    }
  }
  for (const ConfigEntry& e : entries) {
    const std::string& k = e.key;
    if (e.section == "field") {
      if (k == "mu") {
        cfg.theta_true.mu = detail::parse_double(name, e);
      } else if (k == "xc") {
        cfg.theta_true.xc = detail::parse_double(name, e);
      } else if (k == "yc") {
        cfg.theta_true.yc = detail::parse_double(name, e);
      } else if (k == "spread_sq") {
        cfg.spread_sq = detail::parse_double(name, e);
      } else {
        detail::config_fail(name, e.line, "unknown key '" + k + "' in [field]");
      }
    } else if (e.section == "region") {
      if (k == "x_min") {
        cfg.region.x_min = detail::parse_double(name, e);
      } else if (k == "x_max") {
        cfg.region.x_max = detail::parse_double(name, e);
      } else if (k == "y_min") {
        cfg.region.y_min = detail::parse_double(name, e);
      } else if (k == "y_max") {
        cfg.region.y_max = detail::parse_double(name, e);
      } else {
        detail::config_fail(name, e.line, "unknown key '" + k + "' in [region]");
      }
    } else if (e.section == "quantizer") {
      if (k == "levels") {
        cfg.levels = static_cast<int>(detail::parse_int(name, e));
      } else if (k == "step") {
        cfg.step = detail::parse_double(name, e);
      } else if (k == "offset") {
        cfg.offset = detail::parse_double(name, e);
      } else {
        detail::config_fail(name, e.line, "unknown key '" + k + "' in [quantizer]");
      }
    } else if (e.section == "noise") {
      if (k == "snr_obs_db") {
        cfg.snr_obs_db = detail::parse_double(name, e);
      } else if (k == "snr_ch_db") {
        cfg.snr_ch_db = detail::parse_double(name, e);
      } else {
        detail::config_fail(name, e.line, "unknown key '" + k + "' in [noise]");
      }
    } else if (e.section == "em") {
      if (k == "max_em_iters") {
        cfg.em.max_em_iters = static_cast<int>(detail::parse_int(name, e));
      } else if (k == "em_tol") {
        cfg.em.em_tol = detail::parse_double(name, e);
      } else if (k == "max_newton_iters") {
        cfg.em.max_newton_iters = static_cast<int>(detail::parse_int(name, e));
      } else if (k == "newton_tol") {
        cfg.em.newton_tol = detail::parse_double(name, e);
      } else if (k == "damping") {
        cfg.em.damping = static_cast<int>(detail::parse_int(name, e));
      } else if (k == "jacobian_ridge") {
        cfg.em.jacobian_ridge = detail::parse_double(name, e);
      } else if (k == "max_condition") {
        cfg.em.max_condition = detail::parse_double(name, e);
      } else {
        detail::config_fail(name, e.line, "unknown key '" + k + "' in [em]");
      }
    } else if (e.section == "experiment") {
      if (k == "profile") {
        // applied above
      } else if (k == "k") {
        cfg.single_k = static_cast<int>(detail::parse_int(name, e));
      } else if (k == "k_values") {
        cfg.k_values = detail::parse_int_list(name, e);
      } else if (k == "trials") {
        cfg.trials = static_cast<int>(detail::parse_int(name, e));
      } else if (k == "master_seed") {
        cfg.master_seed = detail::parse_uint64(name, e);
      } else if (k == "init_mu") {
        cfg.init.mu = detail::parse_double(name, e);
        init_mu_set = true;
      } else if (k == "init_xc") {
        cfg.init.xc = detail::parse_double(name, e);
        init_xc_set = true;
      } else if (k == "init_yc") {
        cfg.init.yc = detail::parse_double(name, e);
        init_yc_set = true;
      } else if (k == "quadrature_nodes") {
        cfg.quadrature_nodes = static_cast<int>(detail::parse_int(name, e));
      } else if (k == "outlier_tau") {
        cfg.outlier_tau = detail::parse_double(name, e);
      } else if (k == "resample_grid") {
        cfg.resample_grid = detail::parse_bool(name, e);
      } else if (k == "threads") {
        cfg.threads = static_cast<int>(detail::parse_int(name, e));
      } else {
        detail::config_fail(name, e.line, "unknown key '" + k + "' in [experiment]");
      }
    }
  }
  // Unset init components default to the true parameters shifted by
  // (+1, -1, -1).
  if (!init_mu_set) {
    cfg.init.mu = cfg.theta_true.mu + 1.0;
  }
  if (!init_xc_set) {
    cfg.init.xc = cfg.theta_true.xc - 1.0;
  }
  if (!init_yc_set) {
    cfg.init.yc = cfg.theta_true.yc - 1.0;
  }
  validate(cfg);
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open config file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), path);
}

}  // namespace fieldest
