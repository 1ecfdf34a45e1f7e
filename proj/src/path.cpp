#include "esig/path.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace esig {

Partition::Partition(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw std::invalid_argument("partition needs at least one time");
  for (double t : times_)
    if (!std::isfinite(t)) throw std::invalid_argument("partition times must be finite");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw std::invalid_argument("partition times must be strictly increasing (index " + std::to_string(i) + ")");
}

Partition Partition::dyadic(double horizon, int level) {
  if (!(horizon > 0.0)) throw std::invalid_argument("dyadic partition needs a positive horizon");
  if (level < 0 || level > 30) throw std::invalid_argument("dyadic level out of range");
  return uniform(horizon, std::size_t{1} << level);
}

Partition Partition::uniform(double horizon, std::size_t steps) {
  if (!(horizon > 0.0) || steps == 0) throw std::invalid_argument("uniform partition needs horizon > 0 and steps >= 1");
  std::vector<double> t(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) t[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
  t.back() = horizon;
  return Partition(std::move(t));
}

double Partition::mesh() const {
  double m = 0.0;
  for (std::size_t i = 1; i < times_.size(); ++i) m = std::max(m, times_[i] - times_[i - 1]);
  return m;
}

PiecewiseLinearPath::PiecewiseLinearPath(Partition partition, int dim, std::vector<double> samples)
    : partition_(std::move(partition)), dim_(dim), samples_(std::move(samples)) {
  if (dim_ < 1) throw std::invalid_argument("path dimension must be >= 1");
  if (samples_.size() != partition_.times().size() * static_cast<std::size_t>(dim_))
    throw std::invalid_argument("path has " + std::to_string(samples_.size()) + " values, expected " +
                                std::to_string(partition_.times().size()) + " x " + std::to_string(dim_));
}

void PiecewiseLinearPath::increment(std::size_t m, std::span<double> out) const {
  const std::size_t d = static_cast<std::size_t>(dim_);
  const double* a = samples_.data() + m * d;
  for (std::size_t i = 0; i < d; ++i) out[i] = a[d + i] - a[i];
}

PiecewiseLinearPath PiecewiseLinearPath::slice(std::size_t first, std::size_t last) const {
  if (first > last || last >= vertices()) throw std::out_of_range("path slice out of range");
  const auto& t = partition_.times();
  const std::size_t d = static_cast<std::size_t>(dim_);
  return PiecewiseLinearPath(Partition(std::vector<double>(t.begin() + first, t.begin() + last + 1)), dim_,
                             std::vector<double>(samples_.begin() + first * d, samples_.begin() + (last + 1) * d));
}

PiecewiseLinearPath PiecewiseLinearPath::subsample(std::size_t stride) const {
  if (stride == 0 || steps() % stride != 0) throw std::invalid_argument("subsample stride must divide the step count");
  const std::size_t d = static_cast<std::size_t>(dim_);
  std::vector<double> t, x;
  for (std::size_t m = 0; m < vertices(); m += stride) {
    t.push_back(partition_.times()[m]);
    x.insert(x.end(), samples_.begin() + m * d, samples_.begin() + (m + 1) * d);
  }
  return PiecewiseLinearPath(Partition(std::move(t)), dim_, std::move(x));
}

PiecewiseLinearPath PiecewiseLinearPath::reversed() const {
  const std::size_t d = static_cast<std::size_t>(dim_), n = vertices();
  std::vector<double> x(samples_.size());
  for (std::size_t m = 0; m < n; ++m)
    std::copy_n(samples_.begin() + (n - 1 - m) * d, d, x.begin() + m * d);
  return PiecewiseLinearPath(partition_, dim_, std::move(x));
}

PiecewiseLinearPath PiecewiseLinearPath::retimed(Partition partition) const {
  if (partition.times().size() != vertices()) throw std::invalid_argument("retimed: vertex count mismatch");
  return PiecewiseLinearPath(std::move(partition), dim_, samples_);
}

PiecewiseLinearPath PiecewiseLinearPath::coordinate(int coord) const {
  if (coord < 0 || coord >= dim_) throw std::out_of_range("coordinate out of range");
  std::vector<double> x(vertices());
  for (std::size_t m = 0; m < vertices(); ++m) x[m] = at(m, coord);
  return PiecewiseLinearPath(partition_, 1, std::move(x));
}

PiecewiseLinearPath PiecewiseLinearPath::leading(int n) const {
  if (n < 1 || n > dim_) throw std::out_of_range("leading: bad coordinate count");
  std::vector<double> x;
  x.reserve(vertices() * static_cast<std::size_t>(n));
  for (std::size_t m = 0; m < vertices(); ++m)
    for (int i = 0; i < n; ++i) x.push_back(at(m, i));
  return PiecewiseLinearPath(partition_, n, std::move(x));
}

PiecewiseLinearPath add_time(const PiecewiseLinearPath& p) {
  const int d = p.dim();
  std::vector<double> x;
  x.reserve(p.vertices() * static_cast<std::size_t>(d + 1));
  for (std::size_t m = 0; m < p.vertices(); ++m) {
    x.push_back(p.partition().times()[m]);
    for (int i = 0; i < d; ++i) x.push_back(p.at(m, i));
  }
  return PiecewiseLinearPath(p.partition(), d + 1, std::move(x));
}

PiecewiseLinearPath lead_lag(const PiecewiseLinearPath& p) {
  if (p.steps() < 1) throw std::invalid_argument("lead_lag needs at least one step");
  const std::size_t d = static_cast<std::size_t>(p.dim()), M = p.steps();
  const auto& t = p.partition().times();
  std::vector<double> times, x;
  times.reserve(2 * M + 1);
  x.reserve((2 * M + 1) * 2 * d);
  auto push = [&](std::size_t lead, std::size_t lag) {
    auto a = p.point(lead), b = p.point(lag);
    x.insert(x.end(), a.begin(), a.end());
    x.insert(x.end(), b.begin(), b.end());
  };
  for (std::size_t m = 0; m < M; ++m) {
    times.push_back(t[m]);
    push(m, m);
    times.push_back(0.5 * (t[m] + t[m + 1]));
    push(m + 1, m);
  }
  times.push_back(t[M]);
  push(M, M);
  return PiecewiseLinearPath(Partition(std::move(times)), static_cast<int>(2 * d), std::move(x));
}

PiecewiseLinearPath qv_augment(const PiecewiseLinearPath& p) {
  const std::size_t d = static_cast<std::size_t>(p.dim()), out_dim = d + d * d;
  std::vector<double> x(p.vertices() * out_dim, 0.0);
  std::vector<double> qv(d * d, 0.0), inc(d);
  for (std::size_t m = 0; m < p.vertices(); ++m) {
    if (m > 0) {
      p.increment(m - 1, inc);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) qv[i * d + j] += inc[i] * inc[j];
    }
    auto pt = p.point(m);
    double* row = x.data() + m * out_dim;
    std::copy(pt.begin(), pt.end(), row);
    std::copy(qv.begin(), qv.end(), row + d);
  }
  return PiecewiseLinearPath(p.partition(), static_cast<int>(out_dim), std::move(x));
}

std::vector<PiecewiseLinearPath> chop(const PiecewiseLinearPath& long_path, double segment_length,
                                      std::size_t count) {
  if (!(segment_length > 0.0) || count == 0) throw std::invalid_argument("chop needs T > 0 and N >= 1");
  const auto& t = long_path.partition().times();
  const double t0 = t.front();
  const double tol = 1e-9 * std::max(1.0, segment_length * static_cast<double>(count));
  if (t.back() - t0 < segment_length * static_cast<double>(count) - tol)
    throw std::invalid_argument("chop: path horizon shorter than N*T");
  std::vector<std::size_t> cuts{0};
  std::size_t pos = 0;
  for (std::size_t n = 1; n <= count; ++n) {
    const double target = t0 + segment_length * static_cast<double>(n);
    while (pos < t.size() && t[pos] < target - tol) ++pos;
    if (pos == t.size() || std::abs(t[pos] - target) > tol)
      throw std::invalid_argument("chop: segment boundary " + std::to_string(target) + " is not on the partition");
    cuts.push_back(pos);
  }
  std::vector<PiecewiseLinearPath> out;
  out.reserve(count);
  const std::size_t d = static_cast<std::size_t>(long_path.dim());
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t a = cuts[n], b = cuts[n + 1];
    std::vector<double> times(b - a + 1), x((b - a + 1) * d);
    const double ta = t[a];
    auto base = long_path.point(a);
    for (std::size_t m = a; m <= b; ++m) {
      times[m - a] = t[m] - ta;
      for (std::size_t i = 0; i < d; ++i) x[(m - a) * d + i] = long_path.at(m, static_cast<int>(i)) - base[i];
    }
    times.front() = 0.0;
    out.emplace_back(Partition(std::move(times)), static_cast<int>(d), std::move(x));
  }
  return out;
}

PiecewiseLinearPath read_path_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open path file " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("path csv: missing header");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "t") throw std::invalid_argument("path csv: header must be t,x1,...,xd");
  for (std::size_t i = 1; i < header.size(); ++i)
    if (header[i] != "x" + std::to_string(i)) throw std::invalid_argument("path csv: bad column name '" + header[i] + "'");
  const int d = static_cast<int>(header.size() - 1);
  std::vector<double> times, x;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument("path csv: non-numeric value on row " + std::to_string(row));
      }
    }
    if (vals.size() != header.size()) throw std::invalid_argument("path csv: wrong column count on row " + std::to_string(row));
    if (!times.empty() && !(vals[0] > times.back()))
      throw std::invalid_argument("path csv: time not strictly increasing on row " + std::to_string(row));
    times.push_back(vals[0]);
    x.insert(x.end(), vals.begin() + 1, vals.end());
  }
  return PiecewiseLinearPath(Partition(std::move(times)), d, std::move(x));
}

void write_path_csv(const std::filesystem::path& file, const PiecewiseLinearPath& p) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "t";
  for (int i = 1; i <= p.dim(); ++i) out << ",x" << i;
  out << '\n' << std::setprecision(17);
  for (std::size_t m = 0; m < p.vertices(); ++m) {
    out << p.partition().times()[m];
    for (int i = 0; i < p.dim(); ++i) out << ',' << p.at(m, i);
    out << '\n';
  }
}

}  // namespace esig
