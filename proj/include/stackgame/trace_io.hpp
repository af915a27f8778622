#pragma once

#include "stackgame/outer_loop.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace stackgame {

struct TraceMeta {
  std::string problem;
  double alpha = 0.0;
  double rho = 0.0;
  double eps_prime = 0.0;
  double eta = 0.0;
  std::string timestamp;  // omitted from the file when empty; never parsed back
};

namespace detail {

// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const std::to_chars_result r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string format_opt(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

inline double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  const char* b = s.data();
  const std::from_chars_result r = std::from_chars(b, b + s.size(), v);
  if (r.ec != std::errc() || r.ptr != b + s.size())
    throw std::runtime_error(std::string("trace parse: bad ") + what + " '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

inline constexpr const char* kTraceColumns =
    "t,lambda,delta,eta,M_y,M_z,grad_evals_cum,surrogate_grad_norm,true_grad_norm,"
    "follower_gap_max,E1,E2,E3,err_sq,F_value";

}  // namespace detail

inline void write_trace(std::ostream& os, const std::vector<IterationRecord>& trace,
                        const TraceMeta& meta) {
  const int n0 = trace.empty() ? 0 : static_cast<int>(trace.front().x.size());
  os << "# stackgame trace\n";
  os << "# problem=" << meta.problem << " alpha=" << detail::format_double(meta.alpha)
     << " rho=" << detail::format_double(meta.rho)
     << " eps_prime=" << detail::format_double(meta.eps_prime)
     << " eta=" << detail::format_double(meta.eta) << "\n";
  if (!meta.timestamp.empty()) os << "# generated=" << meta.timestamp << "\n";
  os << detail::kTraceColumns;
  for (int j = 0; j < n0; ++j) os << ",x_" << j;
  os << "\n";
  for (const IterationRecord& r : trace) {
    os << r.t << ',' << detail::format_double(r.lambda) << ',' << detail::format_double(r.delta)
       << ',' << detail::format_double(r.eta) << ',' << r.m_y << ',' << r.m_z << ','
       << r.grad_evals_cum << ',' << detail::format_double(r.surrogate_grad_norm) << ','
       << detail::format_opt(r.true_grad_norm) << ','
       << detail::format_double(r.follower_gap_max) << ',' << detail::format_opt(r.e1) << ','
       << detail::format_opt(r.e2) << ',' << detail::format_opt(r.e3) << ','
       << detail::format_opt(r.err_sq) << ',' << detail::format_opt(r.f_value);
    for (int j = 0; j < n0; ++j) os << ',' << detail::format_double(r.x[j]);
    os << "\n";
  }
}

inline void write_trace_file(const std::string& path, const std::vector<IterationRecord>& trace,
                             const TraceMeta& meta) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open trace file for writing: " + path);
  write_trace(f, trace, meta);
}

struct ParsedTrace {
  TraceMeta meta;
  std::vector<IterationRecord> records;
};

inline ParsedTrace parse_trace(std::istream& is) {
  ParsedTrace out;
  std::string line;
  bool header_seen = false;
  int n0 = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string tok;
      while (ls >> tok) {
        const size_t eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "problem") out.meta.problem = val;
        else if (key == "alpha") out.meta.alpha = detail::parse_double(val, "alpha");
        else if (key == "rho") out.meta.rho = detail::parse_double(val, "rho");
        else if (key == "eps_prime") out.meta.eps_prime = detail::parse_double(val, "eps_prime");
        else if (key == "eta") out.meta.eta = detail::parse_double(val, "eta");
      }
      continue;
    }
    if (!header_seen) {
      if (line.rfind(detail::kTraceColumns, 0) != 0)
        throw std::runtime_error("trace parse: unexpected column header");
      const std::string rest = line.substr(std::string(detail::kTraceColumns).size());
      n0 = rest.empty() ? 0 : static_cast<int>(detail::split_csv_line(rest).size()) - 1;
      header_seen = true;
      continue;
    }
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (static_cast<int>(cells.size()) != 15 + n0)
      throw std::runtime_error("trace parse: wrong cell count in row '" + line + "'");
    IterationRecord r;
    auto opt = [](const std::string& s, const char* what) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return detail::parse_double(s, what);
    };
    r.t = static_cast<long>(detail::parse_double(cells[0], "t"));
    r.lambda = detail::parse_double(cells[1], "lambda");
    r.delta = detail::parse_double(cells[2], "delta");
    r.eta = detail::parse_double(cells[3], "eta");
    r.m_y = static_cast<long>(detail::parse_double(cells[4], "M_y"));
    r.m_z = static_cast<long>(detail::parse_double(cells[5], "M_z"));
    r.grad_evals_cum = static_cast<long>(detail::parse_double(cells[6], "grad_evals_cum"));
    r.surrogate_grad_norm = detail::parse_double(cells[7], "surrogate_grad_norm");
    r.true_grad_norm = opt(cells[8], "true_grad_norm");
    r.follower_gap_max = detail::parse_double(cells[9], "follower_gap_max");
    r.e1 = opt(cells[10], "E1");
    r.e2 = opt(cells[11], "E2");
    r.e3 = opt(cells[12], "E3");
    r.err_sq = opt(cells[13], "err_sq");
    r.f_value = opt(cells[14], "F_value");
    r.x = Vec(n0);
    for (int j = 0; j < n0; ++j) r.x[j] = detail::parse_double(cells[15 + j], "x");
    out.records.push_back(std::move(r));
  }
  if (!header_seen) throw std::runtime_error("trace parse: no column header found");
  return out;
}

inline ParsedTrace parse_trace_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trace file: " + path);
  return parse_trace(f);
}

}  // namespace stackgame
