// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstddef>
#include <initializer_list>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace sdoh {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Derives an independent stream seed from a base seed and a list of tags.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::string_view> tags);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Unbiased draw from [0, n). The standard distributions are not
/// reproducible across library implementations, engines are.
std::size_t uniform_index(Rng& rng, std::size_t n);
double uniform_unit(Rng& rng);

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[uniform_index(rng, v.size())];
}

}  // namespace sdoh
