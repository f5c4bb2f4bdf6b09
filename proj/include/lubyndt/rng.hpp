#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lubyndt {

// Random streams.
//
// Every stochastic component draws from its own named stream. A stream seed is
// derived from a parent seed and a tag with SplitMix64 mixing, so adding or
// removing draws in one stream never shifts another:
//
//   topology seed  --"placement"/attempt-->  node positions
//   realization    --"flows"-------------->  flow count, endpoints, a_f
//                  --"rates"-------------->  long-term link rates
//                  --"simulation"--------->  simulation seed
//   simulation     --"arrivals"----------->  Poisson arrivals (sequential engine)
//                  --"fading"------------->  realized link rates (counter based)
//                  --"contention"--------->  Luby draws (sequential engine)
//
// Sequential streams use std::mt19937_64. The fading stream is counter based:
// the realized rate of link e in slot t is a pure function of (key, e, t), which
// keeps it identical across scheduling policies no matter which links transmit.

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t index);

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Counter-based uniform in (0, 1) keyed by (key, a, b, lane).
double counter_uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b, std::uint64_t lane);

// Counter-based standard normal (Box-Muller on two counter uniforms).
double counter_normal(std::uint64_t key, std::uint64_t a, std::uint64_t b);

}  // namespace lubyndt
