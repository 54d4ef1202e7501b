#pragma once

#include <string>

#include "choquard/field.hpp"

namespace chq {

// Binary field file: 8-byte magic "CHQFLD01", little-endian u64 n, f64 L
// (half width), then n^3 (re, im) f64 pairs, x fastest.
void write_field(const std::string& path, const ComplexField& field);
// Throws ErrorCode::format on a bad magic or n, ErrorCode::io on a short file.
ComplexField read_field(const std::string& path);

}  // namespace chq
