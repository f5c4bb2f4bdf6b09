#include "lubyndt/rng.hpp"

#include <cmath>
#include <numbers>

namespace lubyndt {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

// FNV-1a, only used to turn a stream tag into 64 bits.
std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag) {
  return splitmix64(splitmix64(parent) ^ hash_tag(tag));
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t index) {
  return splitmix64(derive_seed(parent, tag) + splitmix64(index));
}

double counter_uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b, std::uint64_t lane) {
  std::uint64_t h = splitmix64(key ^ splitmix64(a));
  h = splitmix64(h ^ splitmix64(b + 0x632be59bd9b4e019ULL));
  h = splitmix64(h + lane);
  // (k + 0.5) / 2^53 lies strictly inside (0, 1)
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double counter_normal(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
  const double u1 = counter_uniform(key, a, b, 0);
  const double u2 = counter_uniform(key, a, b, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace lubyndt
