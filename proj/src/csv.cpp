#include "ifesim/csv.hpp"

#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ifesim/units.hpp"

namespace ifesim {

std::string format_csv(const Series& s) {
  std::string out = "t_fs";
  for (const auto& n : s.names) out += "," + n;
  out += "\n";
  char buf[32];
  for (std::size_t k = 0; k < s.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.16e", units::au_to_fs(s.t[k]));
    out += buf;
    for (const auto& c : s.cols) {
      std::snprintf(buf, sizeof buf, ",%.16e", c[k]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void write_csv(const std::string& path, const Series& s) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << format_csv(s);
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

Series parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(source + ": empty file");
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) head.push_back(item);
  }
  if (head.empty() || head[0] != "t_fs") throw std::runtime_error(source + ": first column must be t_fs");
  Series s(std::vector<std::string>(head.begin() + 1, head.end()));
  int lineno = 1;
  std::vector<double> row(head.size() - 1);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string item;
    std::size_t i = 0;
    double t = 0;
    while (std::getline(ss, item, ',')) {
      // strtod rather than stod: subnormal values are valid samples, not range errors
      char* end = nullptr;
      const double v = std::strtod(item.c_str(), &end);
      if (item.empty() || end != item.c_str() + item.size() || !std::isfinite(v))
        throw std::runtime_error(source + ":" + std::to_string(lineno) + ": bad number '" + item + "'");
      if (i == 0)
        t = units::fs_to_au(v);
      else if (i <= row.size())
        row[i - 1] = v;
      ++i;
    }
    if (i != head.size())
      throw std::runtime_error(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(head.size()) +
                               " fields");
    s.push(t, row);
  }
  return s;
}

Series read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str(), path);
}

Series thin(const Series& s, double dt_min) {
  if (!(dt_min > 0) || s.size() < 3) return s;
  Series out(s.names);
  double last = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const bool keep = k == 0 || k + 1 == s.size() || s.t[k] >= last + dt_min * (1 - 1e-9);
    if (!keep) continue;
    last = s.t[k];
    out.t.push_back(s.t[k]);
    for (std::size_t i = 0; i < s.cols.size(); ++i) out.cols[i].push_back(s.cols[i][k]);
  }
  return out;
}

}  // namespace ifesim
