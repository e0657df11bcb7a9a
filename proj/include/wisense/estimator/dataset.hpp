#ifndef WISENSE_ESTIMATOR_DATASET_HPP
#define WISENSE_ESTIMATOR_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wisense/csi_io.hpp"
#include "wisense/estimator/heatmap.hpp"

namespace wisense {
namespace estimator {

inline constexpr int kWindowLen = 32;
inline constexpr int kDefaultBlockLen = 17;
inline constexpr int kDefaultKeypoints = 4;

// Ground-truth record at one truth-rate instant: target centroid, scalar
// depth, and keypoint offsets relative to the centroid.
struct TruthRecord {
  double timestamp = 0.0;
  Point2 location;
  double depth = 0.0;
  std::vector<Point2> keypoints;  // offsets from location
};

struct ToySample {
  int rows = 0;
  int n_sub = 0;
  std::vector<float> csi_window;  // kWindowLen x 2 x rows x n_sub
  Point2 truth_location;
  std::vector<Point2> truth_pose;
  double truth_depth = 0.0;
  int timestamp_index = 0;
  int sequence_id = 0;
  double timestamp = 0.0;

  float window_at(int w, int ch, int r, int k) const {
    return csi_window[((static_cast<std::size_t>(w) * 2 + ch) * rows + r) *
                          n_sub +
                      k];
  }
};

struct Block {
  int sequence_id = 0;
  std::vector<ToySample> samples;
};

// For each truth instant, pick the kWindowLen temporally nearest CSI packets
// (ties resolved towards the earlier packet); samples follow truth order.
// Truth instants that cannot collect a full window are skipped with a warning.
inline std::vector<ToySample> window_csi(const io::DynamicTensorSeries& tensors,
                                         const std::vector<TruthRecord>& truths,
                                         int sequence_id = 0) {
  const std::size_t n = tensors.n_packets();
  std::vector<ToySample> out;
  int index = 0;
  for (const TruthRecord& tr : truths) {
    if (n < static_cast<std::size_t>(kWindowLen)) {
      std::cerr << "window_csi: skipping truth at t=" << tr.timestamp
                << " (only " << n << " CSI packets)\n";
      ++index;
      continue;
    }
    // closest packet, then greedy two-sided expansion
    auto stamp = [&](std::size_t i) {
      return static_cast<double>(i) / tensors.sample_rate;
    };
    std::size_t center = static_cast<std::size_t>(std::llround(
        std::clamp(tr.timestamp * tensors.sample_rate, 0.0,
                   static_cast<double>(n - 1))));
    std::size_t lo = center, hi = center + 1;  // [lo, hi) selected
    while (hi - lo < static_cast<std::size_t>(kWindowLen)) {
      const double d_lo =
          lo > 0 ? std::fabs(stamp(lo - 1) - tr.timestamp) : 1e300;
      const double d_hi = hi < n ? std::fabs(stamp(hi) - tr.timestamp) : 1e300;
      if (d_lo <= d_hi)  // tie -> earlier packet
        --lo;
      else
        ++hi;
    }

    ToySample s;
    s.rows = tensors.rows;
    s.n_sub = tensors.n_sub;
    s.csi_window.reserve(static_cast<std::size_t>(kWindowLen) * 2 *
                         tensors.rows * tensors.n_sub);
    for (std::size_t i = lo; i < hi; ++i)
      for (int ch = 0; ch < 2; ++ch)
        for (int r = 0; r < tensors.rows; ++r)
          for (int k = 0; k < tensors.n_sub; ++k)
            s.csi_window.push_back(
                tensors.at(i, ch, r, k));
    s.truth_location = tr.location;
    s.truth_pose = tr.keypoints;
    s.truth_depth = tr.depth;
    s.timestamp_index = index++;
    s.sequence_id = sequence_id;
    s.timestamp = tr.timestamp;
    out.push_back(std::move(s));
  }
  return out;
}

// Chronological non-overlapping blocks of exactly block_len per sequence;
// trailing remainders are discarded.
inline std::vector<Block> segment_blocks(const std::vector<ToySample>& samples,
                                         int block_len = kDefaultBlockLen) {
  if (block_len < 1)
    throw std::invalid_argument("segment_blocks: block_len must be >= 1");
  std::vector<Block> blocks;
  std::size_t i = 0;
  while (i < samples.size()) {
    const int seq = samples[i].sequence_id;
    std::size_t j = i;
    while (j < samples.size() && samples[j].sequence_id == seq) ++j;
    for (std::size_t b = i; b + block_len <= j; b += block_len) {
      Block blk;
      blk.sequence_id = seq;
      blk.samples.assign(samples.begin() + b, samples.begin() + b + block_len);
      blocks.push_back(std::move(blk));
    }
    i = j;
  }
  return blocks;
}

// ---- truth CSV sidecar ----

inline void write_truth_csv(const std::string& path,
                            const std::vector<TruthRecord>& truths) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_truth_csv: cannot open " + path);
  const std::size_t k = truths.empty() ? 0 : truths.front().keypoints.size();
  os << "timestamp,x,y,depth";
  for (std::size_t i = 0; i < k; ++i) os << ",k" << i << "x,k" << i << "y";
  os << "\n";
  os.precision(17);
  for (const auto& t : truths) {
    os << t.timestamp << ',' << t.location.x << ',' << t.location.y << ','
       << t.depth;
    for (const auto& p : t.keypoints) os << ',' << p.x << ',' << p.y;
    os << "\n";
  }
}

inline std::vector<TruthRecord> read_truth_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_truth_csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("read_truth_csv: empty file " + path);
  std::vector<TruthRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> f;
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(std::stod(cell));
    if (f.size() < 4 || (f.size() - 4) % 2 != 0)
      throw std::runtime_error("read_truth_csv: malformed row in " + path);
    TruthRecord t;
    t.timestamp = f[0];
    t.location = {f[1], f[2]};
    t.depth = f[3];
    for (std::size_t i = 4; i + 1 < f.size(); i += 2)
      t.keypoints.push_back({f[i], f[i + 1]});
    out.push_back(std::move(t));
  }
  return out;
}

// ---- dataset binary ("TOYD") ----

inline void write_dataset(const std::string& path,
                          const std::vector<ToySample>& samples) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_dataset: cannot open " + path);
  os.write("TOYD", 4);
  io::detail::write_u32(os, io::kFormatVersion);
  io::detail::write_u32(os, static_cast<std::uint32_t>(samples.size()));
  const int rows = samples.empty() ? 0 : samples.front().rows;
  const int n_sub = samples.empty() ? 0 : samples.front().n_sub;
  const int n_kp =
      samples.empty() ? 0 : static_cast<int>(samples.front().truth_pose.size());
  io::detail::write_u32(os, static_cast<std::uint32_t>(rows));
  io::detail::write_u32(os, static_cast<std::uint32_t>(n_sub));
  io::detail::write_u32(os, static_cast<std::uint32_t>(n_kp));
  for (const auto& s : samples) {
    io::detail::write_u32(os, static_cast<std::uint32_t>(s.sequence_id));
    io::detail::write_u32(os, static_cast<std::uint32_t>(s.timestamp_index));
    io::detail::write_f64(os, s.timestamp);
    io::detail::write_f64(os, s.truth_location.x);
    io::detail::write_f64(os, s.truth_location.y);
    io::detail::write_f64(os, s.truth_depth);
    for (const auto& p : s.truth_pose) {
      io::detail::write_f64(os, p.x);
      io::detail::write_f64(os, p.y);
    }
    for (const float v : s.csi_window) io::detail::write_f32(os, v);
  }
  if (!os) throw std::runtime_error("write_dataset: write failed " + path);
}

inline std::vector<ToySample> read_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_dataset: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "TOYD")
    throw std::runtime_error("read_dataset: bad magic in " + path);
  if (io::detail::read_u32(is) != io::kFormatVersion)
    throw std::runtime_error("read_dataset: unsupported version in " + path);
  const std::uint32_t count = io::detail::read_u32(is);
  const int rows = static_cast<int>(io::detail::read_u32(is));
  const int n_sub = static_cast<int>(io::detail::read_u32(is));
  const int n_kp = static_cast<int>(io::detail::read_u32(is));
  std::vector<ToySample> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    ToySample s;
    s.rows = rows;
    s.n_sub = n_sub;
    s.sequence_id = static_cast<int>(io::detail::read_u32(is));
    s.timestamp_index = static_cast<int>(io::detail::read_u32(is));
    s.timestamp = io::detail::read_f64(is);
    s.truth_location.x = io::detail::read_f64(is);
    s.truth_location.y = io::detail::read_f64(is);
    s.truth_depth = io::detail::read_f64(is);
    s.truth_pose.resize(n_kp);
    for (auto& p : s.truth_pose) {
      p.x = io::detail::read_f64(is);
      p.y = io::detail::read_f64(is);
    }
    s.csi_window.resize(static_cast<std::size_t>(kWindowLen) * 2 * rows * n_sub);
    for (auto& v : s.csi_window) v = io::detail::read_f32(is);
    if (!is) throw std::runtime_error("read_dataset: truncated file " + path);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace estimator
}  // namespace wisense

#endif  // WISENSE_ESTIMATOR_DATASET_HPP
