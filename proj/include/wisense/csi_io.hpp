#ifndef WISENSE_CSI_IO_HPP
#define WISENSE_CSI_IO_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wisense/chansim.hpp"

// Tagged little-endian binary dumps.
//
// "CSIS": u32 version, u32 T, N_r, N_t, N_sub, f64 sample_rate, then
// T*N_r*N_t*N_sub complex samples as interleaved f32 (re, im), time-major
// then (n, m, subcarrier) row-major.
//
// "CSID": u32 version, u32 T, C, R, N_sub, f64 sample_rate, then
// T*C*R*N_sub f32 values (per packet: amplitude plane then phase plane).

namespace wisense {
namespace io {

inline constexpr std::uint32_t kFormatVersion = 1;

namespace detail {

// Little-endian on every platform this targets; asserted at compile time
// via the byte-order check below on first use.
inline void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  for (int i = 0; i < 8; ++i)
    os.put(static_cast<char>((u >> (8 * i)) & 0xff));
}

inline double read_f64(std::istream& is) {
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) {
    const int c = is.get();
    u |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

inline void write_f32(std::ostream& os, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  write_u32(os, u);
}

inline float read_f32(std::istream& is) {
  const std::uint32_t u = read_u32(is);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

inline void expect_magic(std::istream& is, const char* magic,
                         const std::string& path) {
  char got[4];
  is.read(got, 4);
  if (!is || std::memcmp(got, magic, 4) != 0)
    throw std::runtime_error(path + ": bad magic, expected " + magic);
}

}  // namespace detail

inline void write_csis(const std::string& path, const CsiSequence& seq) {
  if (seq.frames.empty())
    throw std::invalid_argument("write_csis: empty sequence");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_csis: cannot open " + path);
  const auto& f0 = seq.frames.front();
  os.write("CSIS", 4);
  detail::write_u32(os, kFormatVersion);
  detail::write_u32(os, static_cast<std::uint32_t>(seq.frames.size()));
  detail::write_u32(os, static_cast<std::uint32_t>(f0.n_rx));
  detail::write_u32(os, static_cast<std::uint32_t>(f0.n_tx));
  detail::write_u32(os, static_cast<std::uint32_t>(f0.n_sub));
  detail::write_f64(os, seq.sample_rate);
  for (const auto& frame : seq.frames) {
    for (const auto& v : frame.values) {
      detail::write_f32(os, static_cast<float>(v.real()));
      detail::write_f32(os, static_cast<float>(v.imag()));
    }
  }
  if (!os) throw std::runtime_error("write_csis: write failed on " + path);
}

inline CsiSequence read_csis(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_csis: cannot open " + path);
  detail::expect_magic(is, "CSIS", path);
  const std::uint32_t version = detail::read_u32(is);
  if (version != kFormatVersion)
    throw std::runtime_error("read_csis: unsupported version in " + path);
  const std::uint32_t T = detail::read_u32(is);
  const std::uint32_t nr = detail::read_u32(is);
  const std::uint32_t nt = detail::read_u32(is);
  const std::uint32_t ns = detail::read_u32(is);
  CsiSequence seq;
  seq.sample_rate = detail::read_f64(is);
  seq.frames.reserve(T);
  for (std::uint32_t i = 0; i < T; ++i) {
    CsiFrame frame(static_cast<int>(nr), static_cast<int>(nt),
                   static_cast<int>(ns),
                   seq.sample_rate > 0 ? i / seq.sample_rate : 0.0);
    for (auto& v : frame.values) {
      const float re = detail::read_f32(is);
      const float im = detail::read_f32(is);
      v = cplx{re, im};
    }
    seq.frames.push_back(std::move(frame));
  }
  if (!is) throw std::runtime_error("read_csis: truncated file " + path);
  return seq;
}

// Per-packet real tensor C x R x N_sub, stored time-major.
struct DynamicTensorSeries {
  int channels = 2;
  int rows = 0;    // N_t * N_r
  int n_sub = 0;
  double sample_rate = 0.0;
  std::vector<float> values;  // T * channels * rows * n_sub

  std::size_t packet_stride() const {
    return static_cast<std::size_t>(channels) * rows * n_sub;
  }
  std::size_t n_packets() const {
    return packet_stride() == 0 ? 0 : values.size() / packet_stride();
  }
  float& at(std::size_t t, int c, int r, int k) {
    return values[t * packet_stride() +
                  (static_cast<std::size_t>(c) * rows + r) * n_sub + k];
  }
  const float& at(std::size_t t, int c, int r, int k) const {
    return values[t * packet_stride() +
                  (static_cast<std::size_t>(c) * rows + r) * n_sub + k];
  }
};

inline void write_csid(const std::string& path, const DynamicTensorSeries& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_csid: cannot open " + path);
  os.write("CSID", 4);
  detail::write_u32(os, kFormatVersion);
  detail::write_u32(os, static_cast<std::uint32_t>(s.n_packets()));
  detail::write_u32(os, static_cast<std::uint32_t>(s.channels));
  detail::write_u32(os, static_cast<std::uint32_t>(s.rows));
  detail::write_u32(os, static_cast<std::uint32_t>(s.n_sub));
  detail::write_f64(os, s.sample_rate);
  for (const float v : s.values) detail::write_f32(os, v);
  if (!os) throw std::runtime_error("write_csid: write failed on " + path);
}

inline DynamicTensorSeries read_csid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_csid: cannot open " + path);
  detail::expect_magic(is, "CSID", path);
  const std::uint32_t version = detail::read_u32(is);
  if (version != kFormatVersion)
    throw std::runtime_error("read_csid: unsupported version in " + path);
  const std::uint32_t T = detail::read_u32(is);
  DynamicTensorSeries s;
  s.channels = static_cast<int>(detail::read_u32(is));
  s.rows = static_cast<int>(detail::read_u32(is));
  s.n_sub = static_cast<int>(detail::read_u32(is));
  s.sample_rate = detail::read_f64(is);
  s.values.resize(static_cast<std::size_t>(T) * s.packet_stride());
  for (auto& v : s.values) v = detail::read_f32(is);
  if (!is) throw std::runtime_error("read_csid: truncated file " + path);
  return s;
}

}  // namespace io
}  // namespace wisense

#endif  // WISENSE_CSI_IO_HPP
