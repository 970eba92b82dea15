#include "npaft/data/schema.hpp"

#include <fstream>
#include <set>

#include "npaft/error.hpp"

namespace npaft::data {

namespace {
constexpr const char* kModule = "data-model";

ColumnKind parse_kind(const std::string& s) {
  if (s == "continuous") return ColumnKind::kContinuous;
  if (s == "binary") return ColumnKind::kBinary;
  if (s == "categorical") return ColumnKind::kCategorical;
  throw ConfigError(kModule, "unknown column kind '" + s + "'");
}

std::string kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::kContinuous: return "continuous";
    case ColumnKind::kBinary: return "binary";
    case ColumnKind::kCategorical: return "categorical";
  }
  return "continuous";
}
}  // namespace

CovariateSchema::CovariateSchema(std::vector<ColumnSpec> columns, char delimiter)
    : columns_(std::move(columns)), delimiter_(delimiter) {
  validate();
}

void CovariateSchema::validate() const {
  std::set<std::string> names;
  for (const auto& c : columns_) {
    if (c.name.empty()) throw ConfigError(kModule, "schema column with empty name");
    if (!names.insert(c.name).second) {
      throw ConfigError(kModule, "duplicate schema column '" + c.name + "'");
    }
    if (c.kind == ColumnKind::kCategorical) {
      if (c.levels.empty()) {
        throw ConfigError(kModule, "categorical column '" + c.name + "' has no levels");
      }
      std::set<std::string> seen;
      for (const auto& level : c.levels) {
        if (level.empty()) {
          throw ConfigError(kModule, "categorical column '" + c.name + "' has an empty level");
        }
        if (!seen.insert(level).second) {
          throw ConfigError(kModule, "categorical column '" + c.name +
                                         "' repeats level '" + level + "'");
        }
      }
    } else if (!c.levels.empty()) {
      throw ConfigError(kModule, "levels given for non-categorical column '" + c.name + "'");
    }
  }
}

CovariateSchema CovariateSchema::from_json(const nlohmann::json& doc) {
  try {
    std::vector<ColumnSpec> cols;
    for (const auto& item : doc.at("columns")) {
      ColumnSpec spec;
      spec.name = item.at("name").get<std::string>();
      spec.kind = parse_kind(item.value("kind", std::string("continuous")));
      if (item.contains("levels")) {
        spec.levels = item.at("levels").get<std::vector<std::string>>();
      }
      cols.push_back(std::move(spec));
    }
    const std::string delim = doc.value("delimiter", std::string(","));
    if (delim.size() != 1) throw ConfigError(kModule, "delimiter must be one character");
    return CovariateSchema(std::move(cols), delim[0]);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(kModule, std::string("malformed schema: ") + e.what());
  }
}

CovariateSchema CovariateSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(kModule, "input not found: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(kModule, "schema " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

nlohmann::json CovariateSchema::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : columns_) {
    nlohmann::json item{{"name", c.name}, {"kind", kind_name(c.kind)}};
    if (c.kind == ColumnKind::kCategorical) item["levels"] = c.levels;
    cols.push_back(std::move(item));
  }
  return {{"delimiter", std::string(1, delimiter_)}, {"columns", cols}};
}

std::size_t CovariateSchema::encoded_width() const {
  std::size_t w = 0;
  for (const auto& c : columns_) {
    w += c.kind == ColumnKind::kCategorical ? c.levels.size() : 1;
  }
  return w;
}

std::vector<std::string> CovariateSchema::encoded_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns_) {
    if (c.kind == ColumnKind::kCategorical) {
      for (const auto& level : c.levels) names.push_back(c.name + "=" + level);
    } else {
      names.push_back(c.name);
    }
  }
  return names;
}

std::vector<std::pair<std::size_t, std::size_t>> CovariateSchema::indicator_groups() const {
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  std::size_t offset = 0;
  for (const auto& c : columns_) {
    if (c.kind == ColumnKind::kCategorical) {
      groups.emplace_back(offset, offset + c.levels.size());
      offset += c.levels.size();
    } else {
      ++offset;
    }
  }
  return groups;
}

}  // namespace npaft::data
