#include "npaft/data/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "npaft/error.hpp"

namespace npaft::data {

namespace {
constexpr const char* kModule = "data-model";

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delim)) fields.push_back(field);
  if (!line.empty() && line.back() == delim) fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::string where(const std::string& source, std::size_t row, const std::string& column) {
  return source + " row " + std::to_string(row) + " column '" + column + "'";
}

double parse_number(const std::string& field, const std::string& source, std::size_t row,
                    const std::string& column) {
  if (field.empty() || field == "NA" || field == "NaN" || field == "nan") {
    throw InputError(kModule, "missing value at " + where(source, row, column));
  }
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw InputError(kModule, "non-numeric value '" + field + "' at " + where(source, row, column));
  }
  return value;
}

int parse_flag(const std::string& field, const std::string& source, std::size_t row,
               const std::string& column) {
  const double v = parse_number(field, source, row, column);
  if (v != 0.0 && v != 1.0) {
    throw InputError(kModule, "expected 0 or 1 at " + where(source, row, column));
  }
  return static_cast<int>(v);
}
}  // namespace

std::vector<double> EncodedDataset::column(std::size_t k) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = covariate(i, k);
  return out;
}

std::size_t EncodedDataset::event_count() const {
  std::size_t events = 0;
  for (int d : delta) events += d == 1;
  return events;
}

void EncodedDataset::validate() const {
  const std::size_t n = size();
  if (n < 2) throw InputError(kModule, "dataset needs at least 2 rows");
  if (delta.size() != n || arm.size() != n || x.size() != n * p) {
    throw InputError(kModule, "dataset arrays have inconsistent lengths");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
      throw InputError(kModule, "nonpositive time at row " + std::to_string(i + 1));
    }
    if (delta[i] != 0 && delta[i] != 1) throw InputError(kModule, "status must be 0 or 1");
    if (arm[i] != 0 && arm[i] != 1) throw InputError(kModule, "trt must be 0 or 1");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw InputError(kModule, "non-finite covariate value");
  }
  if (schema) {
    for (auto [b, e] : schema->indicator_groups()) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = b; k < e; ++k) s += covariate(i, k);
        if (s != 1.0) throw InputError(kModule, "indicator group does not sum to 1");
      }
    }
  }
}

EncodedDataset parse_dataset(const std::string& text, const CovariateSchema& schema,
                             const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError(kModule, source + " is empty");
  const char delim = schema.delimiter();

  std::vector<std::string> header = split(line, delim);
  for (auto& h : header) h = trim(h);
  std::vector<std::string> expected{"time", "status", "trt"};
  for (const auto& c : schema.columns()) expected.push_back(c.name);
  if (header != expected) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    throw InputError(kModule, source + " header does not match schema; expected " + want);
  }

  EncodedDataset data;
  data.p = schema.encoded_width();
  data.column_names = schema.encoded_names();
  data.schema = std::make_shared<const CovariateSchema>(schema);

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    std::vector<std::string> fields = split(line, delim);
    for (auto& f : fields) f = trim(f);
    if (fields.size() != expected.size()) {
      throw InputError(kModule, source + " row " + std::to_string(row) + " has " +
                                    std::to_string(fields.size()) + " fields, expected " +
                                    std::to_string(expected.size()));
    }
    const double t = parse_number(fields[0], source, row, "time");
    if (!(t > 0.0)) {
      throw InputError(kModule, "nonpositive time at " + where(source, row, "time"));
    }
    data.y.push_back(t);
    data.delta.push_back(parse_flag(fields[1], source, row, "status"));
    data.arm.push_back(parse_flag(fields[2], source, row, "trt"));

    for (std::size_t c = 0; c < schema.columns().size(); ++c) {
      const ColumnSpec& spec = schema.columns()[c];
      const std::string& f = fields[3 + c];
      switch (spec.kind) {
        case ColumnKind::kContinuous:
          data.x.push_back(parse_number(f, source, row, spec.name));
          break;
        case ColumnKind::kBinary:
          data.x.push_back(parse_flag(f, source, row, spec.name));
          break;
        case ColumnKind::kCategorical: {
          if (f.empty()) throw InputError(kModule, "missing value at " + where(source, row, spec.name));
          bool found = false;
          for (const auto& level : spec.levels) {
            const bool hit = level == f;
            found = found || hit;
            data.x.push_back(hit ? 1.0 : 0.0);
          }
          if (!found) {
            throw InputError(kModule, "unknown categorical level '" + f + "' at " +
                                          where(source, row, spec.name));
          }
          break;
        }
      }
    }
  }
  data.validate();
  return data;
}

EncodedDataset load_dataset(const std::filesystem::path& path, const CovariateSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(kModule, "input not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), schema, path.string());
}

EncodedDataset subset(const EncodedDataset& data, std::span<const std::size_t> rows) {
  EncodedDataset out;
  out.p = data.p;
  out.column_names = data.column_names;
  out.schema = data.schema;
  out.y.reserve(rows.size());
  out.x.reserve(rows.size() * data.p);
  for (std::size_t i : rows) {
    out.y.push_back(data.y[i]);
    out.delta.push_back(data.delta[i]);
    out.arm.push_back(data.arm[i]);
    auto r = data.row(i);
    out.x.insert(out.x.end(), r.begin(), r.end());
  }
  return out;
}

EncodedDataset make_dataset(std::vector<double> y, std::vector<int> delta, std::vector<int> arm,
                            std::vector<double> x, std::size_t p) {
  EncodedDataset data;
  data.y = std::move(y);
  data.delta = std::move(delta);
  data.arm = std::move(arm);
  data.x = std::move(x);
  data.p = p;
  for (std::size_t k = 0; k < p; ++k) data.column_names.push_back("x" + std::to_string(k + 1));
  data.validate();
  return data;
}

}  // namespace npaft::data
