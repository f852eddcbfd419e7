#pragma once

#include <string>

#include "ifesim/series.hpp"

namespace ifesim {

// Header "t_fs,<names...>", values in %.16e. Times are converted from a.u. to fs.
std::string format_csv(const Series& s);
void write_csv(const std::string& path, const Series& s);

// Reads a file written by write_csv; times are converted back to a.u.
Series read_csv(const std::string& path);
Series parse_csv(const std::string& text, const std::string& source = "<csv>");

// Keeps the first sample and every later one at least dt_min (a.u.) after the last kept, plus the last.
Series thin(const Series& s, double dt_min);

}  // namespace ifesim
