#include "choquard/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace chq {

namespace {

constexpr char magic[8] = {'C', 'H', 'Q', 'F', 'L', 'D', '0', '1'};
constexpr std::size_t header_bytes = 24;

void put_u64(unsigned char* dst, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) dst[b] = static_cast<unsigned char>(v >> (8 * b));
}

std::uint64_t get_u64(const unsigned char* src) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(src[b]) << (8 * b);
  return v;
}

void put_f64(unsigned char* dst, double x) { put_u64(dst, std::bit_cast<std::uint64_t>(x)); }
double get_f64(const unsigned char* src) { return std::bit_cast<double>(get_u64(src)); }

}  // namespace

void write_field(const std::string& path, const ComplexField& field) {
  const std::uint64_t n = static_cast<std::uint64_t>(field.grid().n());
  std::vector<unsigned char> buf(header_bytes + 16 * field.size());
  std::memcpy(buf.data(), magic, 8);
  put_u64(buf.data() + 8, n);
  put_f64(buf.data() + 16, field.grid().half_width());
  unsigned char* p = buf.data() + header_bytes;
  for (const cplx& z : field.values()) {
    put_f64(p, z.real());
    put_f64(p + 8, z.imag());
    p += 16;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  require(static_cast<bool>(out), ErrorCode::io, "write failed: " + path);
}

ComplexField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(buf.size() >= 8 && std::memcmp(buf.data(), magic, 8) == 0, ErrorCode::format,
          path + ": bad magic, expected CHQFLD01");
  require(buf.size() >= header_bytes, ErrorCode::io,
          path + ": truncated header: expected " + std::to_string(header_bytes) + " bytes, got " +
              std::to_string(buf.size()));
  const std::uint64_t n = get_u64(buf.data() + 8);
  const double L = get_f64(buf.data() + 16);
  require(n >= 8 && n <= 1024 && (n & (n - 1)) == 0, ErrorCode::format,
          path + ": n = " + std::to_string(n) + " is not a power of two in [8, 1024]");
  require(std::isfinite(L) && L > 0.0, ErrorCode::format, path + ": box half width must be positive");
  const std::size_t expected = header_bytes + 16 * n * n * n;
  require(buf.size() == expected, ErrorCode::io,
          path + ": payload length mismatch: expected " + std::to_string(expected) + " bytes, got " +
              std::to_string(buf.size()));
  ComplexField f(make_grid(static_cast<int>(n), L));
  const unsigned char* p = buf.data() + header_bytes;
  for (cplx& z : f.values()) {
    z = cplx(get_f64(p), get_f64(p + 8));
    p += 16;
  }
  return f;
}

}  // namespace chq
