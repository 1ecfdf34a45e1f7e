#include "esig/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace esig {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Histogram histogram(const std::vector<double>& x, double lo, double hi, std::size_t bins) {
  Histogram h;
  if (bins == 0 || !(hi > lo)) return h;
  h.width = (hi - lo) / static_cast<double>(bins);
  std::vector<double> counts(bins, 0.0);
  for (double v : x) {
    if (v < lo || v > hi) continue;
    auto b = static_cast<std::size_t>((v - lo) / h.width);
    counts[std::min(b, bins - 1)] += 1.0;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    h.centers.push_back(lo + (static_cast<double>(b) + 0.5) * h.width);
    h.density.push_back(x.empty() ? 0.0 : counts[b] / (static_cast<double>(x.size()) * h.width));
  }
  return h;
}

std::string svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  const double W = 640, H = 420, L = 70, R = 150, Tm = 40, B = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.log_y && !(s.y[i] > 0.0)) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - ymin) / (ymax - ymin) * (H - Tm - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  if (!spec.comment.empty()) o << "<!-- " << escape(spec.comment) << " -->\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
    << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + k * (xmax - xmin) / 4, yv = ymin + k * (ymax - ymin) / 4;
    const double yl = spec.log_y ? std::pow(10.0, yv) : yv;
    o << "<text x=\"" << num(px(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << num(xv) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << num(H - B - k * (H - Tm - B) / 4 + 4)
      << "\" text-anchor=\"end\" font-size=\"11\">" << num(yl) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << escape(spec.xlabel) << "</text>\n";
  o << "<text x=\"16\" y=\"" << (Tm + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << (Tm + H - B) / 2 << ")\">" << escape(spec.ylabel) << (spec.log_y ? " (log)" : "") << "</text>\n";
  int legend = 0;
  for (const auto& s : series) {
    std::ostringstream pts;
    const double half = s.x.size() > 1 ? 0.5 * (s.x[1] - s.x[0]) : 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.log_y && !(s.y[i] > 0.0)) continue;
      if (s.steps) {
        pts << num(px(s.x[i] - half)) << "," << num(py(s.y[i])) << " " << num(px(s.x[i] + half)) << ","
            << num(py(s.y[i])) << " ";
      } else {
        pts << num(px(s.x[i])) << "," << num(py(s.y[i])) << " ";
      }
    }
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"" << pts.str()
      << "\"/>\n";
    const double ly = Tm + 14 + 18 * legend++;
    o << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - R + 35 << "\" y=\"" << ly << "\" font-size=\"11\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace esig
