#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace esig {

/// Strictly increasing observation times t_0 < ... < t_M.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<double> times);

  static Partition dyadic(double horizon, int level);
  static Partition uniform(double horizon, std::size_t steps);

  const std::vector<double>& times() const { return times_; }
  std::size_t steps() const { return times_.empty() ? 0 : times_.size() - 1; }
  double start() const { return times_.front(); }
  double end() const { return times_.back(); }
  double horizon() const { return end() - start(); }
  double mesh() const;

 private:
  std::vector<double> times_;
};

inline Partition dyadic_partition(double horizon, int level) { return Partition::dyadic(horizon, level); }

/// Vertices of a piecewise-linear path in R^d; samples are stored row-major, one row per time.
class PiecewiseLinearPath {
 public:
  PiecewiseLinearPath() = default;
  PiecewiseLinearPath(Partition partition, int dim, std::vector<double> samples);

  const Partition& partition() const { return partition_; }
  int dim() const { return dim_; }
  std::size_t vertices() const { return partition_.times().size(); }
  std::size_t steps() const { return partition_.steps(); }
  std::span<const double> point(std::size_t m) const {
    return std::span<const double>(samples_).subspan(m * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_));
  }
  double at(std::size_t m, int coord) const { return samples_[m * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(coord)]; }
  const std::vector<double>& samples() const { return samples_; }

  /// Increment over step m, i.e. X_{t_{m+1}} - X_{t_m}; writes dim() values.
  void increment(std::size_t m, std::span<double> out) const;

  /// Vertices first..last inclusive, timestamps unchanged.
  PiecewiseLinearPath slice(std::size_t first, std::size_t last) const;
  /// Keeps every `stride`-th vertex (plus the last); stride must divide steps().
  PiecewiseLinearPath subsample(std::size_t stride) const;
  /// Same vertices traversed backwards.
  PiecewiseLinearPath reversed() const;
  /// Same vertex sequence on new timestamps.
  PiecewiseLinearPath retimed(Partition partition) const;
  /// One coordinate as a 1-d path.
  PiecewiseLinearPath coordinate(int coord) const;
  /// First `n` coordinates.
  PiecewiseLinearPath leading(int n) const;

 private:
  Partition partition_;
  int dim_ = 1;
  std::vector<double> samples_;
};

/// (t, X_t) with time as the first coordinate.
PiecewiseLinearPath add_time(const PiecewiseLinearPath& p);

/// 2d-dimensional lead-lag embedding with 2M+1 vertices
/// (X_0,X_0), (X_1,X_0), (X_1,X_1), ..., (X_M,X_M); the leading block comes first.
/// Vertex 2m sits at t_m and vertex 2m+1 at the midpoint of [t_m, t_{m+1}].
PiecewiseLinearPath lead_lag(const PiecewiseLinearPath& p);

/// Appends d*d coordinates with the running sums of X^i_{u,v} X^j_{u,v}; pair (i,j), 1-based,
/// lands in coordinate d + (i-1)d + j (1-based).
PiecewiseLinearPath qv_augment(const PiecewiseLinearPath& p);

/// Splits [t_0, t_0 + N*T] into N segments, each re-based to time 0 and value 0.
std::vector<PiecewiseLinearPath> chop(const PiecewiseLinearPath& long_path, double segment_length, std::size_t count);

/// CSV with header "t,x1,...,xd".
PiecewiseLinearPath read_path_csv(const std::filesystem::path& file);
void write_path_csv(const std::filesystem::path& file, const PiecewiseLinearPath& p);

}  // namespace esig
