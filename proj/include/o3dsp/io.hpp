#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "o3dsp/filter.hpp"
#include "o3dsp/simulator.hpp"

namespace o3dsp {

/// Header of a "PEV1" sparse event stream. All multi-byte fields are
/// little-endian on disk.
struct EventStreamHeader {
  std::uint32_t version = 1;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint64_t frame_count = 0;
  double rep_period = 0.0;
  double irf_variance = 0.0;
};

/// Sequential writer for PEV1 streams. Frames are positional: the k-th
/// write_frame call stores the k-th frame (0-based scene order).
class EventWriter {
 public:
  EventWriter(const std::string& path, const EventStreamHeader& header);
  ~EventWriter();

  void write_frame(const FrameEvents& events);
  /// Flushes and verifies that exactly frame_count frames were written.
  void finish();

  EventWriter(const EventWriter&) = delete;
  EventWriter& operator=(const EventWriter&) = delete;

 private:
  std::ofstream out_;
  std::string path_;
  EventStreamHeader header_;
  std::uint64_t frames_written_ = 0;
  bool finished_ = false;
};

/// Streaming reader for PEV1 files; holds one frame of events at a time.
/// Returned events carry frame_index = (frames read so far), 1-based, the
/// convention step_frame expects.
class EventReader {
 public:
  explicit EventReader(const std::string& path);

  const EventStreamHeader& header() const { return header_; }

  /// Reads the next frame into `events`; returns false at a clean end of
  /// stream. Throws ParseError on malformed content.
  bool next_frame(FrameEvents& events);

 private:
  std::ifstream in_;
  std::string path_;
  EventStreamHeader header_;
  std::uint64_t frames_read_ = 0;
};

/// Header of a "GTV1" ground-truth file. mode 0 holds one d/w/pi block
/// (static scene); mode 1 holds one block per frame.
struct GroundTruthHeader {
  std::uint32_t version = 1;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint64_t frame_count = 0;
  std::uint8_t mode = 0;
};

class GroundTruthWriter {
 public:
  GroundTruthWriter(const std::string& path, const GroundTruthHeader& header);

  /// mode 0: call exactly once; mode 1: once per frame, in order.
  void write_frame(const GroundTruthFrame& frame);
  void finish();

 private:
  std::ofstream out_;
  std::string path_;
  GroundTruthHeader header_;
  std::uint64_t blocks_written_ = 0;
  bool finished_ = false;
};

/// Random-access ground truth reader. Validates that the file length
/// matches the header arithmetic exactly at open.
class GroundTruthReader {
 public:
  explicit GroundTruthReader(const std::string& path);

  const GroundTruthHeader& header() const { return header_; }

  /// Truth for 0-based scene frame n (mode 0 returns the single block
  /// for every n < frame_count).
  GroundTruthFrame read_frame(std::int64_t n);

 private:
  std::ifstream in_;
  std::string path_;
  GroundTruthHeader header_;
};

/// Raw little-endian float64 row-major raster with a text sidecar
/// (`path` + ".meta") recording height, width and the frame index.
void write_raster(const std::string& path, const Eigen::ArrayXd& values,
                  int height, int width, std::int64_t frame);
Eigen::ArrayXd read_raster(const std::string& path, int& height, int& width);

}  // namespace o3dsp
