#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cst/errors.hpp"

namespace cst {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

/// Little-endian binary writer over an ofstream.
class BinWriter {
 public:
  explicit BinWriter(const std::string& path)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open for writing: " + path);
  }

  void bytes(const void* data, std::size_t len) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
  }
  void magic(const char tag[4]) { bytes(tag, 4); }
  void u16(std::uint16_t v) { bytes(&v, 2); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void f32(float v) { bytes(&v, 4); }
  void f64(double v) { bytes(&v, 8); }
  void f64_array(const double* p, std::size_t n) { bytes(p, 8 * n); }
  void f32_array(const float* p, std::size_t n) { bytes(p, 4 * n); }

  void close() {
    out_.close();
    if (!out_) throw IoError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

/// Little-endian binary reader with hard EOF checks.
class BinReader {
 public:
  explicit BinReader(const std::string& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open for reading: " + path);
  }

  void bytes(void* data, std::size_t len) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in_.gcount()) != len)
      throw IoError("unexpected end of file: " + path_);
  }
  void expect_magic(const char tag[4]) {
    char got[4];
    bytes(got, 4);
    if (std::memcmp(got, tag, 4) != 0)
      throw IoError("bad magic in " + path_ + " (expected " +
                    std::string(tag, 4) + ")");
  }
  std::uint16_t u16() { std::uint16_t v; bytes(&v, 2); return v; }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
  float f32() { float v; bytes(&v, 4); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  void f64_array(double* p, std::size_t n) { bytes(p, 8 * n); }
  void f32_array(float* p, std::size_t n) { bytes(p, 4 * n); }

  bool at_eof() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::string path_;
  std::ifstream in_;
};

}  // namespace cst
