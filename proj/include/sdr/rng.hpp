#pragma once

#include <cstdint>
#include <string_view>

#include <boost/random/mersenne_twister.hpp>

namespace sdr {

// All sampling goes through Boost's mt19937_64 and its ziggurat normal
// distribution. Both are fully specified by the Boost sources, so a seed
// reproduces the same stream on every platform built against the same Boost.
using Engine = boost::random::mt19937_64;

inline constexpr std::string_view kGeneratorName = "boost::random::mt19937_64+ziggurat_normal/v1";

Engine make_engine(std::uint64_t seed);

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Deterministic child seed for (master, a, b). Used to give every replicate of
// a sweep its own independent stream regardless of execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept;

double standard_normal(Engine& engine);
double uniform(Engine& engine, double lo, double hi);

}  // namespace sdr
