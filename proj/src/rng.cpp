#include "sdr/rng.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace sdr {

Engine make_engine(std::uint64_t seed)
{
    return Engine(mix64(seed));
}

std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept
{
    return mix64(mix64(mix64(master) ^ (a + 0x632BE59BD9B4E019ULL)) ^ (b + 0x8CB92BA72F3D8DD7ULL));
}

double standard_normal(Engine& engine)
{
    boost::random::normal_distribution<double> dist(0.0, 1.0);
    return dist(engine);
}

double uniform(Engine& engine, double lo, double hi)
{
    boost::random::uniform_real_distribution<double> dist(lo, hi);
    return dist(engine);
}

}  // namespace sdr
