#pragma once

#include <string>
#include <vector>

namespace esig {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool steps = false;  // draw as a histogram outline
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_y = false;
  std::string comment;  // embedded as an XML comment (config hash, version)
};

std::string svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

/// Bin edges spanning [lo, hi] and per-bin density of x.
struct Histogram {
  std::vector<double> centers;
  std::vector<double> density;
  double width = 0.0;
};
Histogram histogram(const std::vector<double>& x, double lo, double hi, std::size_t bins);

}  // namespace esig
