#include "wedgescope/random.hpp"

#include <cmath>

namespace wedge {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
  return splitmix64(splitmix64(master ^ fnv1a(label)) + index);
}

ParamVector standard_normal(Rng& rng, std::size_t n, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ParamVector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * normal(rng);
  return v;
}

ParamVector standard_normal(std::uint64_t seed, std::size_t n, double scale) {
  Rng rng(seed);
  return standard_normal(rng, n, scale);
}

ParamVector random_unit_vector(Rng& rng, std::size_t n) {
  for (;;) {
    ParamVector v = standard_normal(rng, n);
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

}  // namespace wedge
