#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace cmvno {

using Engine = std::mt19937_64;

/// Stochastic processes that each own an independent random stream.
enum class Stream : std::uint32_t {
  kOccupancy = 0,
  kGains = 1,
  kLeasingPrice = 2,
  kMarket = 3,
  kArrivals = 4,
  kSensing = 5,
};

/// One named engine per stochastic process, so switching a process on or off
/// never shifts the draws seen by the others. Market and arrival streams are
/// additionally keyed by queue.
class RngStreams {
 public:
  RngStreams(std::uint64_t seed, std::uint64_t replication, std::size_t queues = 1);

  Engine& get(Stream stream, std::size_t queue = 0);

  std::size_t queues() const { return market_.size(); }

 private:
  static Engine make(std::uint64_t seed, std::uint64_t replication, Stream stream,
                     std::size_t queue);

  Engine occupancy_;
  Engine gains_;
  Engine price_;
  Engine sensing_;
  std::vector<Engine> market_;
  std::vector<Engine> arrivals_;
};

}  // namespace cmvno
