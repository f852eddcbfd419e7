#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ifesim {

// Named real columns sampled at common times (a.u.).
struct Series {
  std::vector<double> t;
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;

  Series() = default;
  explicit Series(std::vector<std::string> n) : names(std::move(n)), cols(names.size()) {}

  std::size_t size() const { return t.size(); }
  int index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }
  bool has(const std::string& name) const { return index(name) >= 0; }
  const std::vector<double>& col(const std::string& name) const {
    const int i = index(name);
    if (i < 0) throw std::out_of_range("no column '" + name + "'");
    return cols[static_cast<std::size_t>(i)];
  }
  void add_column(const std::string& name, std::vector<double> v) {
    names.push_back(name);
    cols.push_back(std::move(v));
  }
  void push(double time, const std::vector<double>& row) {
    if (row.size() != cols.size()) throw std::invalid_argument("Series::push: row width mismatch");
    t.push_back(time);
    for (std::size_t i = 0; i < row.size(); ++i) cols[i].push_back(row[i]);
  }
  // keeps every stride-th sample plus the last one
  Series decimate(std::size_t stride) const;
};

inline Series Series::decimate(std::size_t stride) const {
  if (stride <= 1) return *this;
  Series out(names);
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k % stride != 0 && k + 1 != t.size()) continue;
    out.t.push_back(t[k]);
    for (std::size_t i = 0; i < cols.size(); ++i) out.cols[i].push_back(cols[i][k]);
  }
  return out;
}

}  // namespace ifesim
