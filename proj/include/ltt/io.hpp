#pragma once

#include <iosfwd>
#include <string>

#include "ltt/tensor.hpp"

namespace ltt {

// Binary tensor container (".ltt"):
//   bytes 0..3   magic "LWLT"
//   u32 LE       rank
//   rank x u32   dimension sizes
//   payload      row-major IEEE-754 little-endian doubles
// Readers reject a wrong magic, truncated payloads and trailing bytes.

void write_tensor(std::ostream& out, const Tensor& t);
void write_tensor(const std::string& path, const Tensor& t);

Tensor read_tensor(std::istream& in, const std::string& origin = "<stream>");
Tensor read_tensor(const std::string& path);

}  // namespace ltt
