#include "cameo/digest.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <memory>

#include "cameo/errors.hpp"

namespace cameo {

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

class Sha256Stream {
 public:
  Sha256Stream() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw Error("sha256: digest init failed");
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw Error("sha256: update failed");
  }
  Digest256 finish() {
    Digest256 d;
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), d.bytes.data(), &len) != 1 || len != d.bytes.size())
      throw Error("sha256: final failed");
    return d;
  }

 private:
  MdCtx ctx_;
};

void check_canonical(const json& v, const std::string& path) {
  switch (v.type()) {
    case json::value_t::number_float:
      if (!std::isfinite(v.get<double>()))
        throw SerializationError("non-finite number at " + (path.empty() ? "/" : path));
      break;
    case json::value_t::binary:
    case json::value_t::discarded:
      throw SerializationError("value without canonical form at " + (path.empty() ? "/" : path));
    case json::value_t::array:
      for (std::size_t i = 0; i < v.size(); ++i) check_canonical(v[i], path + "/" + std::to_string(i));
      break;
    case json::value_t::object:
      for (const auto& [k, child] : v.items()) check_canonical(child, path + "/" + k);
      break;
    default:
      break;
  }
}

void put_le64(unsigned char* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint64_t get_le64(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | in[i];
  return v;
}

}  // namespace

std::string Digest256::hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out(64, '0');
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    out[2 * i] = digits[bytes[i] >> 4];
    out[2 * i + 1] = digits[bytes[i] & 0xf];
  }
  return out;
}

Digest256 Digest256::from_hex(std::string_view hex) {
  if (hex.size() != 64) throw ParseError("digest", 0, 0, "expected 64 hex digits");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ParseError("digest", 0, 0, std::string("bad hex digit '") + c + "'");
  };
  Digest256 d;
  for (std::size_t i = 0; i < 32; ++i)
    d.bytes[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return d;
}

Digest256 sha256(std::string_view data) {
  Sha256Stream s;
  s.update(data.data(), data.size());
  return s.finish();
}

Digest256 sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Sha256Stream s;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    s.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return s.finish();
}

std::string canonical_dump(const json& value) {
  check_canonical(value, "");
  // nlohmann::json objects are std::map-backed (sorted keys) and dump() with no
  // indent emits no whitespace; doubles are printed shortest round-trip.
  return value.dump(-1, ' ', false, json::error_handler_t::strict);
}

json make_file_ref(const std::filesystem::path& path) {
  const auto abs = std::filesystem::absolute(path).lexically_normal();
  return json{{"path", abs.string()}, {"digest", sha256_file(abs).hex()}};
}

bool is_file_ref(const json& value) {
  return value.is_object() && value.size() == 2 && value.contains("path") && value.contains("digest") &&
         value["path"].is_string() && value["digest"].is_string();
}

bool file_ref_intact(const json& ref) {
  if (!is_file_ref(ref)) return false;
  const std::filesystem::path path = ref["path"].get<std::string>();
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return false;
  try {
    return sha256_file(path).hex() == ref["digest"].get<std::string>();
  } catch (const std::exception&) {
    return false;
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  unsigned char buf[16];
  put_le64(buf, seed);
  put_le64(buf + 8, index);
  auto d = sha256(std::string_view(reinterpret_cast<const char*>(buf), sizeof buf));
  return get_le64(d.bytes.data());
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  std::string buf(8, '\0');
  put_le64(reinterpret_cast<unsigned char*>(buf.data()), seed);
  buf.append(label);
  auto d = sha256(buf);
  return get_le64(d.bytes.data());
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection on the top of the range keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    std::uint64_t v = engine_();
    if (v < limit) return v % n;
  }
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0;
  do u1 = uniform();
  while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace cameo
