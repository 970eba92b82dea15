#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>

namespace npaft {

class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;
  void update(std::string_view bytes);
  std::string hex();  // finalizes

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Output file that hashes everything written through it.
class HashedWriter {
 public:
  explicit HashedWriter(const std::filesystem::path& path);
  void write(std::string_view s);
  void write_double(double v);  // %.17g
  // Appends "# sha256 <hex>\n" covering all previous bytes, then closes.
  void finish();

 private:
  void flush();
  std::ofstream os_;
  std::filesystem::path path_;
  Sha256 sha_;
  std::string buf_;
};

// Reads a file written by HashedWriter, verifies the trailer and returns the
// body. Throws InputError on mismatch.
std::string read_verified(const std::filesystem::path& path, const std::string& module);

}  // namespace npaft
