#pragma once

// File formats. Every file starts with the version line "# netid-format v1".
//
// Network spec (kind "network"): dimension lines, the noise covariance, and
// sparse filter entries with ascending q^-1 coefficient lists:
//
//   # netid-format v1
//   network
//   L = 6
//   K = 6
//   p = 4
//   Lambda = diag 0.1 0.2 0.3 0.4
//   G[1][4] = 0 0.38 0.24 / 1 -1.35 0.54
//
// Dataset exchange is CSV with header t,w1..wL,r1..rK[,e1..ep].

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "netid/network.hpp"

namespace netid {

constexpr const char* kFormatLine = "# netid-format v1";

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

inline double parse_double(const std::string& tok, const std::string& file, int line) {
  double v = 0.0;
  const char* b = tok.data();
  const char* e = tok.data() + tok.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw ParseError(file, line, "bad number '" + tok + "'");
  return v;
}

inline int parse_int(const std::string& tok, const std::string& file, int line) {
  int v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError(file, line, "bad integer '" + tok + "'");
  return v;
}

inline std::string format_double(double v) {
  std::ostringstream oss;
  oss << std::setprecision(17) << v;
  return oss.str();
}

// "G[1][4]" -> (G, 0, 3)
inline bool parse_entry_key(const std::string& key, char& mat, int& i, int& j) {
  if (key.size() < 7) return false;
  mat = key[0];
  if (mat != 'G' && mat != 'H' && mat != 'R') return false;
  std::size_t a1 = key.find('['), b1 = key.find(']');
  if (a1 == std::string::npos || b1 == std::string::npos) return false;
  std::size_t a2 = key.find('[', b1), b2 = key.find(']', b1 + 1);
  if (a2 == std::string::npos || b2 == std::string::npos || b2 + 1 != key.size()) return false;
  try {
    i = std::stoi(key.substr(a1 + 1, b1 - a1 - 1)) - 1;
    j = std::stoi(key.substr(a2 + 1, b2 - a2 - 1)) - 1;
  } catch (...) {
    return false;
  }
  return true;
}

inline void expect_format_line(std::istream& in, const std::string& file, int& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(file, 1, "empty file");
  ++line_no;
  if (trim(line) != kFormatLine) throw ParseError(file, 1, std::string("expected '") + kFormatLine + "'");
}

}  // namespace detail

inline NetworkModel read_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  int line_no = 0;
  detail::expect_format_line(in, path, line_no);

  NetworkModel model;
  bool kind_seen = false, dims_done = false;
  std::vector<std::string> pending;  // entry lines held until L/K/p are known
  std::vector<int> pending_lines;
  std::string lambda_spec;
  int lambda_line = 0;

  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (!kind_seen) {
      if (line != "network") throw ParseError(path, line_no, "expected document kind 'network'");
      kind_seen = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, line_no, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key == "L")
      model.L = detail::parse_int(val, path, line_no);
    else if (key == "K")
      model.K = detail::parse_int(val, path, line_no);
    else if (key == "p")
      model.p = detail::parse_int(val, path, line_no);
    else if (key == "Lambda") {
      lambda_spec = val;
      lambda_line = line_no;
    } else {
      pending.push_back(line);
      pending_lines.push_back(line_no);
    }
    if (!dims_done && model.L > 0 && model.p >= 0 && model.K >= 0) dims_done = true;
  }
  if (model.L <= 0) throw ParseError(path, line_no, "missing L");
  model.G = TfMatrix(model.L, model.L);
  model.H = TfMatrix(model.L, model.p);
  model.R = TfMatrix(model.L, model.K);

  // Lambda: "diag v1 .. vp" or p rows of p values separated by ';'.
  model.lambda = Eigen::MatrixXd::Zero(model.p, model.p);
  if (model.p > 0) {
    if (lambda_spec.empty()) throw ParseError(path, line_no, "missing Lambda");
    auto toks = detail::split_ws(lambda_spec);
    if (!toks.empty() && toks[0] == "diag") {
      if (static_cast<int>(toks.size()) != model.p + 1)
        throw ParseError(path, lambda_line, "Lambda diag needs p values");
      for (int i = 0; i < model.p; ++i) model.lambda(i, i) = detail::parse_double(toks[static_cast<std::size_t>(i) + 1], path, lambda_line);
    } else {
      std::vector<std::vector<double>> rows;
      std::string row;
      std::istringstream iss(lambda_spec);
      while (std::getline(iss, row, ';')) {
        std::vector<double> vals;
        for (const auto& t : detail::split_ws(row)) vals.push_back(detail::parse_double(t, path, lambda_line));
        if (!vals.empty()) rows.push_back(vals);
      }
      if (static_cast<int>(rows.size()) != model.p) throw ParseError(path, lambda_line, "Lambda needs p rows");
      for (int i = 0; i < model.p; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != model.p)
          throw ParseError(path, lambda_line, "Lambda row has wrong length");
        for (int j = 0; j < model.p; ++j) model.lambda(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    }
  }

  for (std::size_t idx = 0; idx < pending.size(); ++idx) {
    const std::string& line = pending[idx];
    const int ln = pending_lines[idx];
    const auto eq = line.find('=');
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    char mat = 0;
    int i = -1, j = -1;
    if (!detail::parse_entry_key(key, mat, i, j)) throw ParseError(path, ln, "unknown key '" + key + "'");
    const auto slash = val.find('/');
    if (slash == std::string::npos) throw ParseError(path, ln, "entry needs 'num / den'");
    RationalTf tf;
    tf.num.coeffs.clear();
    tf.den.coeffs.clear();
    for (const auto& t : detail::split_ws(val.substr(0, slash))) tf.num.coeffs.push_back(detail::parse_double(t, path, ln));
    for (const auto& t : detail::split_ws(val.substr(slash + 1))) tf.den.coeffs.push_back(detail::parse_double(t, path, ln));
    if (tf.num.coeffs.empty() || tf.den.coeffs.empty()) throw ParseError(path, ln, "empty coefficient list");
    TfMatrix* target = (mat == 'G') ? &model.G : (mat == 'H') ? &model.H : &model.R;
    if (i < 0 || i >= target->rows() || j < 0 || j >= target->cols())
      throw ParseError(path, ln, std::string(1, mat) + " index out of range");
    target->set(i, j, std::move(tf));
  }

  try {
    validate(model);
  } catch (const StructuralError& err) {
    throw ParseError(path, 0, err.what());
  }
  return model;
}

inline void write_network_file(const NetworkModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << kFormatLine << "\n"
      << "network\n"
      << "L = " << model.L << "\n"
      << "K = " << model.K << "\n"
      << "p = " << model.p << "\n";
  if (model.p > 0) {
    bool diag = model.lambda.isDiagonal(0.0);
    out << "Lambda =";
    if (diag) {
      out << " diag";
      for (int i = 0; i < model.p; ++i) out << " " << detail::format_double(model.lambda(i, i));
    } else {
      for (int i = 0; i < model.p; ++i) {
        for (int j = 0; j < model.p; ++j) out << " " << detail::format_double(model.lambda(i, j));
        if (i + 1 < model.p) out << " ;";
      }
    }
    out << "\n";
  }
  auto dump = [&](const char* name, const TfMatrix& m) {
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j)
        if (m.present(i, j)) {
          out << name << "[" << i + 1 << "][" << j + 1 << "] =";
          for (double c : m.at(i, j).num.coeffs) out << " " << detail::format_double(c);
          out << " /";
          for (double c : m.at(i, j).den.coeffs) out << " " << detail::format_double(c);
          out << "\n";
        }
  };
  dump("G", model.G);
  dump("H", model.H);
  dump("R", model.R);
}

inline void write_dataset_csv(const Dataset& data, const std::string& path, bool export_noise = false) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << kFormatLine << "\n";
  out << "t";
  for (int j = 0; j < data.L(); ++j) out << ",w" << j + 1;
  for (int k = 0; k < data.K(); ++k) out << ",r" << k + 1;
  const bool with_e = export_noise && data.e_true.has_value();
  if (with_e)
    for (int s = 0; s < data.e_true->cols(); ++s) out << ",e" << s + 1;
  out << "\n";
  for (long t = 0; t < data.N(); ++t) {
    out << t;
    for (int j = 0; j < data.L(); ++j) out << "," << detail::format_double(data.w(t, j));
    for (int k = 0; k < data.K(); ++k) out << "," << detail::format_double(data.r(t, k));
    if (with_e)
      for (int s = 0; s < data.e_true->cols(); ++s) out << "," << detail::format_double((*data.e_true)(t, s));
    out << "\n";
  }
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  int line_no = 0;
  detail::expect_format_line(in, path, line_no);

  std::string header;
  if (!std::getline(in, header)) throw ParseError(path, line_no, "missing CSV header");
  ++line_no;
  std::vector<std::string> names;
  {
    std::istringstream iss(header);
    std::string tok;
    while (std::getline(iss, tok, ',')) names.push_back(detail::trim(tok));
  }
  if (names.empty() || names[0] != "t") throw ParseError(path, line_no, "header must start with 't'");
  int L = 0, K = 0, p = 0;
  for (std::size_t i = 1; i < names.size(); ++i) {
    if (names[i].rfind("w", 0) == 0)
      ++L;
    else if (names[i].rfind("r", 0) == 0)
      ++K;
    else if (names[i].rfind("e", 0) == 0)
      ++p;
    else
      throw ParseError(path, line_no, "unknown column '" + names[i] + "'");
  }

  std::vector<double> values;
  long rows = 0;
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    std::istringstream iss(line);
    std::string tok;
    std::size_t col = 0;
    while (std::getline(iss, tok, ',')) {
      if (col > 0) values.push_back(detail::parse_double(detail::trim(tok), path, line_no));
      ++col;
    }
    if (col != names.size()) throw ParseError(path, line_no, "row has wrong number of fields");
    ++rows;
  }
  if (rows == 0) throw ParseError(path, line_no, "no data rows");

  Dataset data;
  data.w.resize(rows, L);
  data.r.resize(rows, K);
  if (p > 0) data.e_true = Eigen::MatrixXd(rows, p);
  const int stride = L + K + p;
  for (long t = 0; t < rows; ++t) {
    const double* row = values.data() + static_cast<std::size_t>(t) * stride;
    for (int j = 0; j < L; ++j) data.w(t, j) = row[j];
    for (int k = 0; k < K; ++k) data.r(t, k) = row[L + k];
    if (p > 0)
      for (int s = 0; s < p; ++s) (*data.e_true)(t, s) = row[L + K + s];
  }
  data.node_order.resize(static_cast<std::size_t>(L));
  for (int j = 0; j < L; ++j) data.node_order[static_cast<std::size_t>(j)] = j;
  return data;
}

}  // namespace netid
