#pragma once

#include <filesystem>

#include "npaft/gibbs/engine.hpp"

namespace npaft::gibbs {

inline constexpr int kDrawFormatVersion = 1;

// Line 1: JSON header (config echo, seed, transform, column map). Then one
// CSV row per draw: chain, iteration, M, sigma, pi[H], tau[H], m0[n], m1[n].
// Last line: "# sha256 <hex>" over everything before it.
void write_draws(const std::filesystem::path& path, const PosteriorDraws& draws);
PosteriorDraws read_draws(const std::filesystem::path& path);

// Per-draw sampler diagnostics as CSV.
void write_diagnostics(const std::filesystem::path& path, const PosteriorDraws& draws);

// Retained forests, one line per draw, same checksum trailer.
void write_forests(const std::filesystem::path& path, const PosteriorDraws& draws);
void read_forests(const std::filesystem::path& path, PosteriorDraws& draws);

}  // namespace npaft::gibbs
