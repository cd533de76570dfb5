#pragma once

#include "wedgescope/common.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace wedge {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a master seed, a label and an index.
/// Pure function of its inputs, so results never depend on execution order.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

ParamVector standard_normal(Rng& rng, std::size_t n, double scale = 1.0);
ParamVector standard_normal(std::uint64_t seed, std::size_t n, double scale = 1.0);

/// Uniform direction on the unit sphere in R^n.
ParamVector random_unit_vector(Rng& rng, std::size_t n);

}  // namespace wedge
