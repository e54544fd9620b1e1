#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace mocp {

//! Well-known branches of the stream tree. Using the same phase for the same
//! purpose everywhere keeps calibration, test and volume draws independent.
enum class Phase : std::uint64_t
{
  split = 1,
  model = 2,
  calibration = 3,
  test = 4,
  volume = 5,
  wsc = 6,
  cec = 7,
  probe = 8,
  data = 9,
  replication = 10,
};

//! Hierarchical, immutable random stream.
//!
//! A stream is identified by a seed and a path of child indices. Identical
//! (seed, path) pairs always produce the same draws, whatever the order in
//! which streams are created or consumed, so per-point streams keep results
//! independent of evaluation order.
class RngStream
{
public:
  using Engine = std::mt19937_64;

  explicit RngStream(std::uint64_t seed = 0, std::vector<std::uint64_t> path = {});

  RngStream derive(std::uint64_t child) const;
  RngStream derive(Phase phase) const { return derive(static_cast<std::uint64_t>(phase)); }
  RngStream derive(std::initializer_list<std::uint64_t> children) const;

  //! Fresh engine positioned at the start of this stream.
  Engine engine() const { return Engine(key_); }

  std::uint64_t seed() const { return seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }
  std::uint64_t key() const { return key_; }

private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace mocp
