#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace acorn {

using Rng = std::mt19937_64;

// Independent, named random stream derived from a run seed. Streams with
// different names (or indices) do not share state, so switching off one
// component never perturbs the randomness seen by another.
Rng make_stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

// Seed value for APIs that take a plain integer seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

std::string save_rng(const Rng& rng);
Rng load_rng(const std::string& state);

}  // namespace acorn
