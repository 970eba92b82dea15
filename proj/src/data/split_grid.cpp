#include "npaft/data/split_grid.hpp"

#include <algorithm>
#include <limits>

#include "npaft/error.hpp"

namespace npaft::data {

std::vector<double> split_point_grid(std::span<const double> column, std::size_t max_points) {
  if (max_points < 1) throw ConfigError("data-model", "max split points must be >= 1");
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) return {};
  if (distinct.size() == 2 && distinct[0] == 0.0 && distinct[1] == 1.0) return {0.5};

  std::vector<double> cuts;
  if (distinct.size() - 1 <= max_points) {
    for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
      cuts.push_back(0.5 * (distinct[k] + distinct[k + 1]));
    }
    return cuts;
  }

  // Evenly spaced quantile levels k / (max_points + 1); snap each to the gap
  // above the order statistic it lands on.
  const std::size_t n = sorted.size();
  for (std::size_t k = 1; k <= max_points; ++k) {
    std::size_t rank = (k * n) / (max_points + 1);
    if (rank == 0) rank = 1;
    const double v = sorted[rank - 1];
    auto next = std::upper_bound(distinct.begin(), distinct.end(), v);
    if (next == distinct.end()) continue;
    const double cut = 0.5 * (v + *next);
    if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
  }
  return cuts;
}

std::uint16_t SplitGrid::bin(std::size_t column, double value) const {
  const auto& c = cuts[column];
  return static_cast<std::uint16_t>(std::lower_bound(c.begin(), c.end(), value) - c.begin());
}

SplitGrid build_split_grid(const EncodedDataset& data, std::size_t max_points) {
  if (max_points >= std::numeric_limits<std::uint16_t>::max()) {
    throw ConfigError("data-model", "max split points too large");
  }
  SplitGrid grid;
  std::vector<double> arms(data.arm.begin(), data.arm.end());
  grid.cuts.push_back(split_point_grid(arms, max_points));
  for (std::size_t k = 0; k < data.p; ++k) {
    grid.cuts.push_back(split_point_grid(data.column(k), max_points));
  }
  return grid;
}

BinnedDesign bin_design(const EncodedDataset& data, const SplitGrid& grid) {
  return bin_design(data, grid, data.arm);
}

BinnedDesign bin_design(const EncodedDataset& data, const SplitGrid& grid,
                        std::span<const int> arms) {
  BinnedDesign d;
  d.n = data.size();
  d.width = data.p + 1;
  d.bins.resize(d.n * d.width);
  for (std::size_t i = 0; i < d.n; ++i) {
    std::uint16_t* r = d.bins.data() + i * d.width;
    r[kTreatmentColumn] = grid.bin(kTreatmentColumn, arms[i]);
    for (std::size_t k = 0; k < data.p; ++k) r[k + 1] = grid.bin(k + 1, data.covariate(i, k));
  }
  return d;
}

std::vector<double> predictor(int arm, std::span<const double> x) {
  std::vector<double> u;
  u.reserve(x.size() + 1);
  u.push_back(arm);
  u.insert(u.end(), x.begin(), x.end());
  return u;
}

}  // namespace npaft::data
