#pragma once

// CSV writers/readers for realizations, EM traces, and sweep summaries.
// Doubles are printed with std::to_chars shortest round-trip formatting,
// so written files re-read to bit-identical values and repeated runs with
// identical inputs produce byte-identical files.

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fieldest/error.hpp"
#include "fieldest/estimator.hpp"
#include "fieldest/harness.hpp"
#include "fieldest/netsim.hpp"

namespace fieldest {

inline std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0.0 ? "inf" : "-inf";
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_csv_double(std::string_view field, const std::string& where) {
  if (field == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (field == "-inf") {
    return -std::numeric_limits<double>::infinity();
  }
  if (field == "nan") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const std::string s(field);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw IoError(where + ": malformed number '" + s + "'");
  }
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << text;
  out.flush();
  if (!out) {
    throw IoError("write to '" + path + "' failed");
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace detail

inline std::string realization_csv_string(const NetworkRealization& net) {
  std::string s = "k,x,y,G,R,q,Z\n";
  for (std::size_t i = 0; i < net.grid.size(); ++i) {
    s += std::to_string(i);
    s += ',';
    s += format_double(net.grid.x[i]);
    s += ',';
    s += format_double(net.grid.y[i]);
    s += ',';
    s += format_double(net.true_field[i]);
    s += ',';
    s += format_double(net.raw[i]);
    s += ',';
    s += format_double(net.quantized[i]);
    s += ',';
    s += format_double(net.received[i]);
    s += '\n';
  }
  return s;
}

inline void write_realization_csv(const std::string& path, const NetworkRealization& net) {
  detail::write_text_file(path, realization_csv_string(net));
}

// Reads a realization back. The CSV does not carry the deployment region,
// so the caller supplies it (normally from the same config that produced
// the file). Columns are located by header name.
inline NetworkRealization read_realization_csv(const std::string& path, const Region& region) {
  const std::string text = detail::read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError(path + ": empty realization file");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  const auto header = detail::split_csv_line(line);
  int col_x = -1, col_y = -1, col_g = -1, col_r = -1, col_q = -1, col_z = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "x") {
      col_x = static_cast<int>(c);
    } else if (header[c] == "y") {
      col_y = static_cast<int>(c);
    } else if (header[c] == "G") {
      col_g = static_cast<int>(c);
    } else if (header[c] == "R") {
      col_r = static_cast<int>(c);
    } else if (header[c] == "q") {
      col_q = static_cast<int>(c);
    } else if (header[c] == "Z") {
      col_z = static_cast<int>(c);
    }
  }
  if (col_x < 0 || col_y < 0 || col_g < 0 || col_r < 0 || col_q < 0 || col_z < 0) {
    throw IoError(path + ": header must contain columns x,y,G,R,q,Z");
  }
  NetworkRealization net;
  net.grid.region = region;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw IoError(path + ":" + std::to_string(line_no) + ": wrong field count");
    }
    const std::string where = path + ":" + std::to_string(line_no);
    net.grid.x.push_back(detail::parse_csv_double(fields[col_x], where));
    net.grid.y.push_back(detail::parse_csv_double(fields[col_y], where));
    net.true_field.push_back(detail::parse_csv_double(fields[col_g], where));
    net.raw.push_back(detail::parse_csv_double(fields[col_r], where));
    net.quantized.push_back(detail::parse_csv_double(fields[col_q], where));
    net.received.push_back(detail::parse_csv_double(fields[col_z], where));
  }
  if (net.grid.size() == 0) {
    throw IoError(path + ": no data rows");
  }
  return net;
}

inline std::string trace_csv_string(const EmTrace& trace) {
  std::string s = "iteration,mu,xc,yc,loglik,newton_residual,inner_iters\n";
  for (const EmTracePoint& p : trace) {
    s += std::to_string(p.iteration);
    s += ',';
    s += format_double(p.theta.mu);
    s += ',';
    s += format_double(p.theta.xc);
    s += ',';
    s += format_double(p.theta.yc);
    s += ',';
    s += format_double(p.loglik);
    s += ',';
    s += format_double(p.newton_residual);
    s += ',';
    s += std::to_string(p.inner_iters);
    s += '\n';
  }
  return s;
}

inline void write_trace_csv(const std::string& path, const EmTrace& trace) {
  detail::write_text_file(path, trace_csv_string(trace));
}

inline constexpr const char* kSweepCsvHeader =
    "K,se_median,se_q25,se_q75,se_whisk_lo,se_whisk_hi,se_outlier_count,"
    "ise_median,ise_q25,ise_q75,ise_whisk_lo,ise_whisk_hi,ise_outlier_count,"
    "outlier_frac,mean_iters,diverged";

inline std::string sweep_csv_string(const std::vector<SweepRow>& rows) {
  std::string s = std::string(kSweepCsvHeader) + "\n";
  for (const SweepRow& r : rows) {
    s += std::to_string(r.k);
    for (const BoxStats* b : {&r.se, &r.ise}) {
      s += ',';
      s += format_double(b->median);
      s += ',';
      s += format_double(b->q25);
      s += ',';
      s += format_double(b->q75);
      s += ',';
      s += format_double(b->whisker_low);
      s += ',';
      s += format_double(b->whisker_high);
      s += ',';
      s += std::to_string(b->outliers.size());
    }
    s += ',';
    s += format_double(r.outlier_frac);
    s += ',';
    s += format_double(r.mean_iters);
    s += ',';
    s += std::to_string(r.diverged);
    s += '\n';
  }
  return s;
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  detail::write_text_file(path, sweep_csv_string(rows));
}

// Box outliers listed individually, one row per (K, value), for the plot
// scripts' point overlays.
inline std::string box_outliers_csv_string(const std::vector<SweepRow>& rows, bool use_se) {
  std::string s = use_se ? "K,se\n" : "K,ise\n";
  for (const SweepRow& r : rows) {
    for (double v : (use_se ? r.se : r.ise).outliers) {
      s += std::to_string(r.k);
      s += ',';
      s += format_double(v);
      s += '\n';
    }
  }
  return s;
}

// Exceedance curves P[SE > tau] (in percent) in wide format: one tau
// column, one data column per sensor count.
inline std::string outlier_curve_csv_string(const SweepResult& sweep,
                                            const std::vector<double>& thresholds) {
  std::string s = "tau";
  for (const SweepRow& r : sweep.rows) {
    s += ",k" + std::to_string(r.k);
  }
  s += '\n';
  std::vector<std::vector<std::pair<double, double>>> curves;
  curves.reserve(sweep.trials.size());
  for (const auto& trials : sweep.trials) {
    std::vector<double> se;
    se.reserve(trials.size());
    for (const TrialResult& t : trials) {
      se.push_back(t.se);
    }
    curves.push_back(outlier_curve(se, thresholds));
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    s += format_double(thresholds[i]);
    for (const auto& curve : curves) {
      s += ',';
      s += format_double(curve[i].second);
    }
    s += '\n';
  }
  return s;
}

}  // namespace fieldest
