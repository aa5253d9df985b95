#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quasiherm/errors.hpp"
#include "quasiherm/types.hpp"

namespace quasiherm {

/// On-disk operator: a square matrix of [re, im] pairs. No complex-literal
/// dialects; the format round-trips IEEE doubles exactly.
struct OperatorFile {
  Eigen::Index dim = 0;
  ComplexMatrix matrix;
  std::string label;
};

struct StateFile {
  Eigen::Index dim = 0;
  ComplexVector vector;
  std::string label;
};

namespace detail {

inline std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cli", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline nlohmann::json parse_json(const std::string& path) {
  const std::string bytes = read_bytes(path);
  try {
    return nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    // e.what() carries the byte offset of the failure.
    throw ParseError("cli", std::string("'") + path + "': " + e.what());
  }
}

inline Complex parse_entry(const nlohmann::json& cell, const std::string& path,
                           const std::string& where) {
  if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() || !cell[1].is_number())
    throw ParseError("cli", "'" + path + "': " + where + " must be a [re, im] number pair");
  const double re = cell[0].get<double>();
  const double im = cell[1].get<double>();
  if (!std::isfinite(re) || !std::isfinite(im))
    throw ParseError("cli", "'" + path + "': " + where + " has a non-finite entry");
  return {re, im};
}

}  // namespace detail

inline OperatorFile read_operator_file(const std::string& path) {
  const nlohmann::json j = detail::parse_json(path);
  if (!j.is_object() || !j.contains("dim") || !j.contains("matrix"))
    throw ParseError("cli", "'" + path + "': expected an object with 'dim' and 'matrix'");
  if (!j["dim"].is_number_integer() || j["dim"].get<long long>() < 1)
    throw ParseError("cli", "'" + path + "': 'dim' must be a positive integer");
  const Eigen::Index dim = j["dim"].get<Eigen::Index>();
  const auto& rows = j["matrix"];
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != dim)
    throw DimensionMismatch("cli", "'" + path + "': matrix has " + std::to_string(rows.size()) +
                                       " rows, dim is " + std::to_string(dim));
  OperatorFile out;
  out.dim = dim;
  out.matrix.resize(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim)
      throw DimensionMismatch("cli", "'" + path + "': row " + std::to_string(r) + " has " +
                                         std::to_string(row.size()) + " entries, dim is " +
                                         std::to_string(dim));
    for (Eigen::Index c = 0; c < dim; ++c)
      out.matrix(r, c) = detail::parse_entry(row[static_cast<std::size_t>(c)], path,
                                             "matrix[" + std::to_string(r) + "][" +
                                                 std::to_string(c) + "]");
  }
  if (j.contains("label")) {
    if (!j["label"].is_string()) throw ParseError("cli", "'" + path + "': 'label' must be a string");
    out.label = j["label"].get<std::string>();
  }
  return out;
}

inline StateFile read_state_file(const std::string& path) {
  const nlohmann::json j = detail::parse_json(path);
  if (!j.is_object() || !j.contains("dim") || !j.contains("vector"))
    throw ParseError("cli", "'" + path + "': expected an object with 'dim' and 'vector'");
  if (!j["dim"].is_number_integer() || j["dim"].get<long long>() < 1)
    throw ParseError("cli", "'" + path + "': 'dim' must be a positive integer");
  const Eigen::Index dim = j["dim"].get<Eigen::Index>();
  const auto& entries = j["vector"];
  if (!entries.is_array() || static_cast<Eigen::Index>(entries.size()) != dim)
    throw DimensionMismatch("cli", "'" + path + "': vector has " + std::to_string(entries.size()) +
                                       " entries, dim is " + std::to_string(dim));
  StateFile out;
  out.dim = dim;
  out.vector.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    out.vector[i] = detail::parse_entry(entries[static_cast<std::size_t>(i)], path,
                                        "vector[" + std::to_string(i) + "]");
  if (j.contains("label") && j["label"].is_string()) out.label = j["label"].get<std::string>();
  return out;
}

inline nlohmann::ordered_json operator_to_json(const ComplexMatrix& m,
                                               const std::string& label = "") {
  nlohmann::ordered_json j;
  j["dim"] = m.rows();
  if (!label.empty()) j["label"] = label;
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  return j;
}

inline void write_operator_file(const std::string& path, const ComplexMatrix& m,
                                const std::string& label = "") {
  require_square_finite(m, "cli", "write_operator_file");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cli", "cannot write '" + path + "'");
  out << operator_to_json(m, label).dump(2) << "\n";
}

inline void write_state_file(const std::string& path, const ComplexVector& v,
                             const std::string& label = "") {
  nlohmann::ordered_json j;
  j["dim"] = v.size();
  if (!label.empty()) j["label"] = label;
  auto entries = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) entries.push_back({v[i].real(), v[i].imag()});
  j["vector"] = std::move(entries);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cli", "cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

/// FNV-1a 64-bit content digest, used to tie reports to their inputs.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string file_digest(const std::string& path) {
  return fnv1a_hex(detail::read_bytes(path));
}

/// 17 significant digits: enough to reproduce any double exactly.
inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Minimal CSV emitter: optional '#' comment lines, one header row, then
/// preformatted cells.
inline std::string render_csv(const std::vector<std::string>& comments,
                              const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (const auto& c : comments) out << "# " << c << "\n";
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

}  // namespace quasiherm
