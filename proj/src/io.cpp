#include "ltt/io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <limits>

#include "ltt/errors.hpp"

namespace ltt {

namespace {

constexpr char kMagic[4] = {'L', 'W', 'L', 'T'};

// Largest element count a reader will accept; guards against corrupt headers
// requesting absurd allocations.
constexpr std::uint64_t kMaxElements = std::uint64_t(1) << 32;

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put_f64(std::ostream& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(b, 8);
}

bool get_u32(std::istream& in, std::uint32_t& v) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  v = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
      (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
  return true;
}

bool get_f64(std::istream& in, double& v) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) return false;
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
  v = std::bit_cast<double>(bits);
  return true;
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) {
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape) {
    if (d > std::numeric_limits<std::uint32_t>::max()) {
      throw io_error("tensor dimension too large for container");
    }
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (double v : t.data) put_f64(out, v);
  if (!out) throw io_error("short write while serializing tensor");
}

void write_tensor(const std::string& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path + " for writing");
  write_tensor(out, t);
  out.flush();
  if (!out) throw io_error("short write to " + path);
}

Tensor read_tensor(std::istream& in, const std::string& origin) {
  char magic[4];
  if (!in.read(magic, 4)) {
    throw io_error(origin + ": truncated header");
  }
  if (magic[0] != kMagic[0] || magic[1] != kMagic[1] || magic[2] != kMagic[2] ||
      magic[3] != kMagic[3]) {
    throw io_error(origin + ": bad magic, not a tensor container");
  }
  std::uint32_t rank = 0;
  if (!get_u32(in, rank)) throw io_error(origin + ": truncated header");
  if (rank > 16) throw io_error(origin + ": implausible rank " + std::to_string(rank));

  std::vector<std::size_t> shape(rank);
  std::uint64_t n = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    std::uint32_t d = 0;
    if (!get_u32(in, d)) throw io_error(origin + ": truncated header");
    if (d == 0) throw io_error(origin + ": zero-sized dimension");
    shape[i] = d;
    n *= d;
    if (n > kMaxElements) {
      throw io_error(origin + ": implausible element count");
    }
  }

  std::vector<double> values(static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!get_f64(in, values[static_cast<std::size_t>(i)])) {
      throw io_error(origin + ": truncated payload (" + std::to_string(i) +
                     " of " + std::to_string(n) + " values)");
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw io_error(origin + ": trailing bytes after payload");
  }
  return Tensor(std::move(shape), std::move(values));
}

Tensor read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  return read_tensor(in, path);
}

}  // namespace ltt
