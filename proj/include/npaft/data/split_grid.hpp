#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "npaft/data/dataset.hpp"

namespace npaft::data {

inline constexpr std::size_t kDefaultMaxCuts = 100;

// Cut values at evenly spaced empirical quantiles of `column`. Each cut is
// the midpoint between two adjacent distinct observed values, so it always
// separates observed data. 0/1 columns yield {0.5}; constant columns yield
// an empty grid.
std::vector<double> split_point_grid(std::span<const double> column,
                                     std::size_t max_points = kDefaultMaxCuts);

// Per-column candidate cut values for the predictor u = (trt, x).
struct SplitGrid {
  std::vector<std::vector<double>> cuts;

  std::size_t columns() const { return cuts.size(); }
  std::size_t cut_count(std::size_t column) const { return cuts[column].size(); }
  // Number of cuts strictly below `value`; a row goes left at cut c iff
  // bin(value) <= c.
  std::uint16_t bin(std::size_t column, double value) const;
};

// Predictor layout shared by the tree code: column 0 is the treatment arm,
// columns 1..p are the encoded covariates.
inline constexpr std::size_t kTreatmentColumn = 0;

SplitGrid build_split_grid(const EncodedDataset& data, std::size_t max_points = kDefaultMaxCuts);

// Row-major predictor matrix pre-binned against a SplitGrid.
struct BinnedDesign {
  std::size_t n = 0;
  std::size_t width = 0;
  std::vector<std::uint16_t> bins;

  const std::uint16_t* row(std::size_t i) const { return bins.data() + i * width; }
};

BinnedDesign bin_design(const EncodedDataset& data, const SplitGrid& grid);
BinnedDesign bin_design(const EncodedDataset& data, const SplitGrid& grid,
                        std::span<const int> arms);

// Predictor vector (arm, x...) in the tree layout.
std::vector<double> predictor(int arm, std::span<const double> x);

}  // namespace npaft::data
