#include "lab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lab/errors.hpp"

namespace lab {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LabError("write_text_file: cannot open " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LabError("read_text_file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_svg_lineplot(const std::string& path, const std::string& title,
                        const std::string& xlabel, const std::string& ylabel,
                        const std::vector<PlotSeries>& series, bool loglog) {
  const int W = 640, H = 480;
  const int ml = 70, mr = 20, mt = 40, mb = 50;

  auto tx = [&](double v) { return loglog ? std::log10(v) : v; };

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (loglog && (x <= 0.0 || y <= 0.0)) continue;
      xmin = std::min(xmin, tx(x));
      xmax = std::max(xmax, tx(x));
      ymin = std::min(ymin, tx(y));
      ymax = std::max(ymax, tx(y));
    }
  }
  if (xmin > xmax) {
    xmin = 0.0;
    xmax = 1.0;
  }
  if (ymin > ymax) {
    ymin = 0.0;
    ymax = 1.0;
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;

  auto px = [&](double v) {
    return ml + (tx(v) - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  auto py = [&](double v) {
    return H - mb - (tx(v) - ymin) / (ymax - ymin) * (H - mt - mb);
  };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' viewBox='0 0 " << W << " " << H << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>"
      << title << (loglog ? " (log-log)" : "") << "</text>\n";
  svg << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='"
      << H - mb << "' stroke='black'/>\n";
  svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  svg << "<text x='" << W / 2 << "' y='" << H - 12
      << "' text-anchor='middle' font-size='12'>" << xlabel << "</text>\n";
  svg << "<text x='16' y='" << H / 2 << "' text-anchor='middle' font-size='12' "
      << "transform='rotate(-90 16 " << H / 2 << ")'>" << ylabel << "</text>\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", loglog ? std::pow(10, xmin) : xmin);
  svg << "<text x='" << ml << "' y='" << H - mb + 16 << "' font-size='10'>" << buf
      << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", loglog ? std::pow(10, xmax) : xmax);
  svg << "<text x='" << W - mr - 30 << "' y='" << H - mb + 16 << "' font-size='10'>"
      << buf << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", loglog ? std::pow(10, ymin) : ymin);
  svg << "<text x='6' y='" << H - mb << "' font-size='10'>" << buf << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", loglog ? std::pow(10, ymax) : ymax);
  svg << "<text x='6' y='" << mt + 8 << "' font-size='10'>" << buf << "</text>\n";

  int ci = 0;
  for (const auto& s : series) {
    const char* color = colors[ci % 4];
    svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (const auto& [x, y] : s.points) {
      if (loglog && (x <= 0.0 || y <= 0.0)) continue;
      svg << px(x) << "," << py(y) << " ";
    }
    svg << "'/>\n";
    for (const auto& [x, y] : s.points) {
      if (loglog && (x <= 0.0 || y <= 0.0)) continue;
      svg << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='3' fill='" << color
          << "'/>\n";
    }
    svg << "<text x='" << W - mr - 150 << "' y='" << mt + 14 + 14 * ci
        << "' font-size='11' fill='" << color << "'>" << s.name << "</text>\n";
    ++ci;
  }
  svg << "</svg>\n";
  write_text_file(path, svg.str());
}

}  // namespace lab
