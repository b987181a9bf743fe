#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lab {

/// FNV-1a 64-bit over a string; used as the config fingerprint.
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Minimal line-plot writer. Each series is a list of (x, y) points drawn
/// as a polyline; log-log mode takes log10 of both coordinates (points with
/// nonpositive entries are dropped).
struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

void write_svg_lineplot(const std::string& path, const std::string& title,
                        const std::string& xlabel, const std::string& ylabel,
                        const std::vector<PlotSeries>& series, bool loglog);

}  // namespace lab
