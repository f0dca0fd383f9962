#pragma once

// Trace and table serialization. Doubles are written in their shortest
// round-trip form, so write-then-read reproduces every value bit-exactly.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "memsim/error.hpp"
#include "memsim/trace.hpp"

namespace memsim {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ValidationError("csv: cannot parse number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> trace_columns(int devices) {
  if (devices == 2) return {"t", "v_applied", "v_device_a", "v_device_b", "i", "x_a", "x_b"};
  return {"t", "v_applied", "v_device_a", "i", "x_a"};
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& body) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << body;
  out.close();
  if (!out) throw IoError(path.string() + ": write failed");
}

inline std::string join_row(const std::vector<double>& row) {
  std::string line;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (k) line += ',';
    line += format_double(row[k]);
  }
  return line;
}

}  // namespace detail

inline std::vector<double> trace_row(const Trace& tr, std::size_t r) {
  if (tr.devices() == 2) return {tr.t[r], tr.v_applied[r], tr.v_device[0][r], tr.v_device[1][r], tr.i[r], tr.x[0][r], tr.x[1][r]};
  return {tr.t[r], tr.v_applied[r], tr.v_device[0][r], tr.i[r], tr.x[0][r]};
}

inline std::string trace_csv(const Trace& tr) {
  std::string out;
  const auto cols = trace_columns(tr.devices());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (k) out += ',';
    out += cols[k];
  }
  out += '\n';
  for (std::size_t r = 0; r < tr.size(); ++r) {
    out += detail::join_row(trace_row(tr, r));
    out += '\n';
  }
  out += "# config_hash=" + tr.meta.config_hash + '\n';
  return out;
}

/// Header plus numeric rows, with the provenance comment last.
inline std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                             const std::string& config_hash) {
  std::string out;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k) out += ',';
    out += header[k];
  }
  out += '\n';
  for (const auto& row : rows) out += detail::join_row(row) + '\n';
  out += "# config_hash=" + config_hash + '\n';
  return out;
}

inline nlohmann::json trace_json(const Trace& tr) {
  nlohmann::json j;
  const auto& m = tr.meta;
  j["metadata"] = {
      {"model_id", m.model_id},
      {"waveform", m.waveform_label},
      {"period", m.period},
      {"devices", m.devices},
      {"lower", {m.lower[0], m.lower[1]}},
      {"upper", {m.upper[0], m.upper[1]}},
      {"r_ext", m.r_ext},
      {"solver_hash", m.solver_hash},
      {"config_hash", m.config_hash},
      {"stats",
       {{"accepted", m.stats.accepted},
        {"rejected", m.stats.rejected},
        {"rhs_evals", m.stats.rhs_evals},
        {"max_error_ratio", m.stats.max_error_ratio},
        {"max_clamp_ratio", m.stats.max_clamp_ratio},
        {"frozen_drive_steps", m.stats.frozen_drive_steps},
        {"snapped_to_bound", m.stats.snapped_to_bound}}},
  };
  const auto cols = trace_columns(tr.devices());
  nlohmann::json data = nlohmann::json::object();
  std::vector<std::vector<double>> by_col(cols.size());
  for (std::size_t r = 0; r < tr.size(); ++r) {
    const auto row = trace_row(tr, r);
    for (std::size_t k = 0; k < cols.size(); ++k) by_col[k].push_back(row[k]);
  }
  for (std::size_t k = 0; k < cols.size(); ++k) data[cols[k]] = by_col[k];
  j["columns"] = data;
  return j;
}

inline void write_trace(const Trace& tr, const std::filesystem::path& path, std::string_view format = "csv") {
  if (format == "csv") detail::write_file(path, trace_csv(tr));
  else if (format == "json") detail::write_file(path, trace_json(tr).dump(1) + "\n");
  else throw ValidationError("write_trace: unknown format '" + std::string(format) + "'");
}

/// Read a trace CSV written by write_trace; metadata beyond the column
/// layout and the config hash is not stored in CSV.
inline Trace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  Trace tr;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
  int devices = 0;
  for (int d : {1, 2}) {
    const auto cols = trace_columns(d);
    std::string header;
    for (std::size_t k = 0; k < cols.size(); ++k) header += (k ? "," : "") + cols[k];
    if (line == header) devices = d;
  }
  if (!devices) throw ValidationError(path.string() + ": unrecognized header '" + line + "'");
  tr.meta.devices = devices;
  const std::size_t ncol = trace_columns(devices).size();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      constexpr std::string_view key = "# config_hash=";
      if (line.rfind(key, 0) == 0) tr.meta.config_hash = line.substr(key.size());
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      row.push_back(parse_double(std::string_view(line).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (row.size() != ncol)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(ncol) + " values");
    if (devices == 2) tr.push(row[0], row[1], row[2], row[3], row[4], row[5], row[6]);
    else tr.push(row[0], row[1], row[2], 0.0, row[3], row[4], 0.0);
  }
  return tr;
}

}  // namespace memsim
