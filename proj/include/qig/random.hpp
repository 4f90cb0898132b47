#pragma once

#include "qig/linalg.hpp"

#include <cstdint>
#include <random>

namespace qig {

using Rng = std::mt19937_64;

/// SplitMix64 mix of (seed, stream); used to derive independent per-instance
/// seeds so ensembles do not depend on evaluation order.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

/// Symmetric Gaussian matrix (GOE scaling: diagonal N(0,1), off-diagonal
/// N(0,1/2)). Entries are drawn row by row over the lower triangle, so the
/// leading k x k block of an n x n draw equals a k x k draw from the same seed.
Matrix gaussian_symmetric(Index n, Rng& rng);

/// Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix).
Matrix haar_orthogonal(Index n, Rng& rng);

Vector random_unit_vector(Index n, Rng& rng);

}  // namespace qig
