#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "npaft/data/schema.hpp"

namespace npaft::data {

// Right-censored survival data with encoded covariates. The design is
// stored row-major, n x p, with p = schema encoded width.
struct EncodedDataset {
  std::vector<double> y;      // follow-up time, > 0
  std::vector<int> delta;     // 1 = event observed, 0 = censored
  std::vector<int> arm;       // treatment arm in {0, 1}
  std::vector<double> x;      // n * p covariates
  std::size_t p = 0;
  std::vector<std::string> column_names;
  std::shared_ptr<const CovariateSchema> schema;

  std::size_t size() const { return y.size(); }
  double covariate(std::size_t i, std::size_t k) const { return x[i * p + k]; }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * p, p}; }
  std::vector<double> column(std::size_t k) const;
  std::size_t event_count() const;

  // Throws InputError on any broken invariant.
  void validate() const;
};

EncodedDataset load_dataset(const std::filesystem::path& path, const CovariateSchema& schema);

// Parses in-memory text with the same rules as load_dataset.
EncodedDataset parse_dataset(const std::string& text, const CovariateSchema& schema,
                             const std::string& source = "<memory>");

EncodedDataset subset(const EncodedDataset& data, std::span<const std::size_t> rows);

// Builds a dataset from raw arrays; columns are treated as continuous.
EncodedDataset make_dataset(std::vector<double> y, std::vector<int> delta,
                            std::vector<int> arm, std::vector<double> x, std::size_t p);

}  // namespace npaft::data
