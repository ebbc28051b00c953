#include "xmv/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "xmv/error.hpp"
#include "xmv/text_format.hpp"

namespace xmv::cli {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

// Fixed two-decimal coordinates keep output stable across platforms.
std::string num(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << (std::abs(v) < 0.005 ? 0.0 : v);
  return os.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

void open(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
     << num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, bool x_ticks, const std::string& x_label,
          const std::string& y_label) {
  const double xl = f.px(f.x0), xr = f.px(f.x1), yb = f.py(f.y0), yt = f.py(f.y1);
  os << "<line x1=\"" << num(xl) << "\" y1=\"" << num(yb) << "\" x2=\"" << num(xr) << "\" y2=\""
     << num(yb) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << num(xl) << "\" y1=\"" << num(yb) << "\" x2=\"" << num(xl) << "\" y2=\""
     << num(yt) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = f.y0 + (f.y1 - f.y0) * k / 4.0;
    os << "<text x=\"" << num(xl - 6) << "\" y=\"" << num(f.py(v) + 4)
       << "\" text-anchor=\"end\">" << format_double(std::round(v * 1000) / 1000) << "</text>\n";
    if (x_ticks) {
      const double u = f.x0 + (f.x1 - f.x0) * k / 4.0;
      os << "<text x=\"" << num(f.px(u)) << "\" y=\"" << num(yb + 16)
         << "\" text-anchor=\"middle\">" << format_double(std::round(u * 1000) / 1000)
         << "</text>\n";
    }
  }
  if (!x_label.empty()) {
    os << "<text x=\"" << num((xl + xr) / 2) << "\" y=\"" << num(kHeight - 16)
       << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  }
  if (!y_label.empty()) {
    os << "<text x=\"14\" y=\"" << num((yb + yt) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
       << num((yb + yt) / 2) << ")\">" << escape(y_label) << "</text>\n";
  }
}

void legend(std::ostringstream& os, const std::vector<Series>& series) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(i);
    os << "<rect x=\"" << num(kWidth - kRight + 16) << "\" y=\"" << num(y - 9)
       << "\" width=\"12\" height=\"12\" fill=\"" << color(i) << "\"/>\n";
    os << "<text x=\"" << num(kWidth - kRight + 34) << "\" y=\"" << num(y + 1) << "\">"
       << escape(series[i].name) << "</text>\n";
  }
}

}  // namespace

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<Series>& series) {
  if (categories.empty() || series.empty()) throw EmptyInputError("bar chart needs data");
  for (const auto& s : series) {
    if (s.y.size() != categories.size()) throw DimensionError("bar series length mismatch");
  }
  std::ostringstream os;
  open(os, title);
  const Frame f{0.0, static_cast<double>(categories.size()), 0.0, 1.0};
  axes(os, f, false, "", "TAR");
  const double slot = f.px(1.0) - f.px(0.0);
  const double bar = slot * 0.8 / static_cast<double>(series.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double base = f.px(static_cast<double>(c)) + slot * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = std::clamp(series[s].y[c], 0.0, 1.0);
      os << "<rect x=\"" << num(base + bar * static_cast<double>(s)) << "\" y=\"" << num(f.py(v))
         << "\" width=\"" << num(bar) << "\" height=\"" << num(f.py(0.0) - f.py(v))
         << "\" fill=\"" << color(s) << "\"><title>" << escape(series[s].name) << ' '
         << escape(categories[c]) << ": " << format_double(series[s].y[c]) << "</title></rect>\n";
    }
    os << "<text x=\"" << num(base + slot * 0.4) << "\" y=\"" << num(f.py(0.0) + 16)
       << "\" text-anchor=\"middle\">" << escape(categories[c]) << "</text>\n";
  }
  legend(os, series);
  os << "</svg>\n";
  return os.str();
}

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw DimensionError("line series x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) throw EmptyInputError("line chart has no finite points");
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  std::ostringstream os;
  open(os, title);
  const Frame f{x0, x1, y0, y1};
  axes(os, f, true, x_label, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << color(k) << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < series[k].x.size(); ++i) {
      if (!std::isfinite(series[k].x[i]) || !std::isfinite(series[k].y[i])) continue;
      os << (first ? "" : " ") << num(f.px(series[k].x[i])) << ',' << num(f.py(series[k].y[i]));
      first = false;
    }
    os << "\"/>\n";
  }
  legend(os, series);
  os << "</svg>\n";
  return os.str();
}

std::string histogram_svg(const std::string& title, const std::vector<double>& edges,
                          const std::vector<Series>& series) {
  if (edges.size() < 2 || series.empty()) throw EmptyInputError("histogram needs data");
  std::vector<Series> density;
  double top = 0.0;
  for (const auto& s : series) {
    if (s.y.size() + 1 != edges.size()) throw DimensionError("histogram counts do not match edges");
    const double total = std::accumulate(s.y.begin(), s.y.end(), 0.0);
    Series d{s.name, {}, {}};
    for (std::size_t b = 0; b < s.y.size(); ++b) {
      const double h = total > 0 ? s.y[b] / total / (edges[b + 1] - edges[b]) : 0.0;
      d.x.push_back(edges[b]);
      d.y.push_back(h);
      d.x.push_back(edges[b + 1]);
      d.y.push_back(h);
      top = std::max(top, h);
    }
    density.push_back(std::move(d));
  }
  std::ostringstream os;
  open(os, title);
  const Frame f{edges.front(), edges.back(), 0.0, top > 0 ? top : 1.0};
  axes(os, f, true, "score", "density");
  for (std::size_t k = 0; k < density.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << color(k) << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < density[k].x.size(); ++i) {
      os << (i ? " " : "") << num(f.px(density[k].x[i])) << ',' << num(f.py(density[k].y[i]));
    }
    os << "\"/>\n";
  }
  legend(os, series);
  os << "</svg>\n";
  return os.str();
}

}  // namespace xmv::cli
