#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace npaft::data {

enum class ColumnKind { kContinuous, kBinary, kCategorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  std::vector<std::string> levels;  // categorical only
};

// Declares the covariate columns that follow `time,status,trt` in a data
// file. Categorical columns expand to one indicator per level.
class CovariateSchema {
 public:
  CovariateSchema() = default;
  explicit CovariateSchema(std::vector<ColumnSpec> columns, char delimiter = ',');

  static CovariateSchema from_json(const nlohmann::json& doc);
  static CovariateSchema load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  char delimiter() const { return delimiter_; }
  std::size_t encoded_width() const;
  std::vector<std::string> encoded_names() const;
  // Half-open ranges [begin, end) of encoded columns per categorical column.
  std::vector<std::pair<std::size_t, std::size_t>> indicator_groups() const;

 private:
  void validate() const;

  std::vector<ColumnSpec> columns_;
  char delimiter_ = ',';
};

}  // namespace npaft::data
