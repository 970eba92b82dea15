#include "npaft/digest.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <sstream>

#include "npaft/error.hpp"

namespace npaft {

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (!impl_->ctx || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1)
    throw NumericError("digest", "cannot initialise SHA-256");
}

Sha256::~Sha256() { EVP_MD_CTX_free(impl_->ctx); }

void Sha256::update(std::string_view bytes) {
  EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size());
}

std::string Sha256::hex() {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, md, &len);
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(digits[md[k] >> 4]);
    out.push_back(digits[md[k] & 15]);
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("io", "input not found: " + path.string());
  Sha256 h;
  std::string chunk(1 << 16, '\0');
  while (is) {
    is.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    h.update(std::string_view(chunk.data(), static_cast<std::size_t>(is.gcount())));
  }
  return h.hex();
}

HashedWriter::HashedWriter(const std::filesystem::path& path) : os_(path, std::ios::binary), path_(path) {
  if (!os_) throw InputError("io", "cannot write " + path.string());
}

void HashedWriter::write(std::string_view s) {
  buf_.append(s);
  if (buf_.size() > (1u << 20)) flush();
}

void HashedWriter::write_double(double v) {
  char b[32];
  const int len = std::snprintf(b, sizeof b, "%.17g", v);
  write(std::string_view(b, static_cast<std::size_t>(len)));
}

void HashedWriter::flush() {
  sha_.update(buf_);
  os_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
  buf_.clear();
}

void HashedWriter::finish() {
  flush();
  const std::string trailer = "# sha256 " + sha_.hex() + "\n";
  os_.write(trailer.data(), static_cast<std::streamsize>(trailer.size()));
  os_.close();
  if (!os_) throw InputError("io", "failed writing " + path_.string());
}

std::string read_verified(const std::filesystem::path& path, const std::string& module) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError(module, "input not found: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  std::string text = ss.str();
  const std::string tag = "# sha256 ";
  if (text.empty() || text.back() != '\n') throw InputError(module, "checksum error: missing trailer in " + path.string());
  const std::size_t start = text.rfind('\n', text.size() - 2);
  const std::size_t body_end = start == std::string::npos ? 0 : start + 1;
  const std::string last = text.substr(body_end, text.size() - body_end - 1);
  if (last.rfind(tag, 0) != 0) throw InputError(module, "checksum error: missing trailer in " + path.string());
  text.resize(body_end);
  if (sha256_hex(text) != last.substr(tag.size()))
    throw InputError(module, "checksum error: " + path.string() + " is corrupt");
  return text;
}

}  // namespace npaft
