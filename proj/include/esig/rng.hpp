#pragma once

#include <array>
#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <string_view>

namespace esig {

/// Identifies one independent random stream: a master seed and a stream index (e.g. a path number).
/// Streams are a pure function of the pair, so serial and parallel runs draw identical numbers.
struct StreamSeed {
  std::uint64_t master = 0;
  std::uint64_t index = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for an independent sub-experiment (e.g. the reference run) derived from a master seed and a tag.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

/// Philox4x32-10 block: 10 rounds of the Salmon et al. (2011) bijection of `ctr` under `key`.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// Counter-based engine. Output n of stream (key, stream) is a pure function of (key, stream, n),
/// so creating an engine costs nothing and streams never overlap.
class Philox {
 public:
  using result_type = std::uint64_t;
  Philox(std::uint64_t key, std::uint64_t stream) : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
                                                   stream_(stream) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int used_ = 2;  // 64-bit words consumed from buf_
};

/// Standard normal draws from one stream.
class NormalStream {
 public:
  explicit NormalStream(StreamSeed seed);
  double operator()() { return dist_(engine_); }
  Philox& engine() { return engine_; }

 private:
  Philox engine_;
  boost::random::normal_distribution<double> dist_{0.0, 1.0};  // ziggurat, same output on every platform
};

}  // namespace esig
