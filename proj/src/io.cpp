#include "o3dsp/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <filesystem>
#include <sstream>

namespace o3dsp {

namespace {

constexpr char kEventMagic[4] = {'P', 'E', 'V', '1'};
constexpr char kTruthMagic[4] = {'G', 'T', 'V', '1'};
constexpr std::size_t kEventHeaderSize = 4 + 4 + 4 + 4 + 8 + 8 + 8;
constexpr std::size_t kTruthHeaderSize = 4 + 4 + 4 + 4 + 8 + 1;

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& buf, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(buf, bits);
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

double get_f64(const unsigned char* p) {
  const std::uint64_t bits = get_u64(p);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

void read_exact(std::ifstream& in, const std::string& path, void* dst,
                std::size_t n, const std::string& context) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    fail(path, "truncated file while reading " + context);
}

std::uint64_t file_size(const std::string& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw ParseError(path + ": cannot stat file");
  return size;
}

}  // namespace

// ---------------------------------------------------------------------------
// PEV1 event streams

EventWriter::EventWriter(const std::string& path,
                         const EventStreamHeader& header)
    : out_(path, std::ios::binary), path_(path), header_(header) {
  if (!out_) throw ParseError(path + ": cannot open for writing");
  if (header.height == 0 || header.width == 0)
    throw InvalidInputError("EventWriter: dims must be positive");
  std::string buf;
  buf.append(kEventMagic, 4);
  put_u32(buf, header.version);
  put_u32(buf, header.height);
  put_u32(buf, header.width);
  put_u64(buf, header.frame_count);
  put_f64(buf, header.rep_period);
  put_f64(buf, header.irf_variance);
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

EventWriter::~EventWriter() = default;

void EventWriter::write_frame(const FrameEvents& events) {
  if (frames_written_ >= header_.frame_count)
    throw InvalidInputError("EventWriter: more frames than the header declares");
  validate_events(events, static_cast<int>(header_.height),
                  static_cast<int>(header_.width), header_.rep_period);
  std::string buf;
  buf.reserve(4 + events.detections.size() * 12);
  put_u32(buf, static_cast<std::uint32_t>(events.detections.size()));
  for (const Detection& d : events.detections) {
    put_u32(buf, d.pixel);
    put_f64(buf, d.toa);
  }
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  ++frames_written_;
}

void EventWriter::finish() {
  if (finished_) return;
  if (frames_written_ != header_.frame_count)
    throw InvalidInputError("EventWriter: frame count mismatch at finish");
  out_.flush();
  if (!out_) throw ParseError(path_ + ": write failure");
  finished_ = true;
}

EventReader::EventReader(const std::string& path)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw ParseError(path + ": cannot open");
  std::array<unsigned char, kEventHeaderSize> raw;
  read_exact(in_, path_, raw.data(), raw.size(), "header");
  if (std::memcmp(raw.data(), kEventMagic, 4) != 0)
    fail(path_, "bad magic '" + std::string(reinterpret_cast<char*>(raw.data()), 4) +
                    "', expected 'PEV1'");
  header_.version = get_u32(raw.data() + 4);
  if (header_.version != 1)
    fail(path_, "unsupported version " + std::to_string(header_.version));
  header_.height = get_u32(raw.data() + 8);
  header_.width = get_u32(raw.data() + 12);
  header_.frame_count = get_u64(raw.data() + 16);
  header_.rep_period = get_f64(raw.data() + 24);
  header_.irf_variance = get_f64(raw.data() + 32);
  if (header_.height == 0 || header_.width == 0)
    fail(path_, "zero image dimension in header");
  if (!(header_.rep_period > 0.0) || !(header_.irf_variance > 0.0))
    fail(path_, "non-positive rep_period or irf_variance in header");
}

bool EventReader::next_frame(FrameEvents& events) {
  if (frames_read_ == header_.frame_count) return false;
  const std::string frame_ctx = "frame " + std::to_string(frames_read_);

  std::array<unsigned char, 4> raw_count;
  read_exact(in_, path_, raw_count.data(), raw_count.size(),
             frame_ctx + " detection count");
  const std::uint32_t count = get_u32(raw_count.data());
  const std::uint64_t pixels =
      static_cast<std::uint64_t>(header_.height) * header_.width;
  if (count > pixels)
    fail(path_, frame_ctx + ": detection count " + std::to_string(count) +
                    " exceeds pixel count");

  events.frame_index = static_cast<std::int64_t>(frames_read_) + 1;
  events.detections.clear();
  events.detections.reserve(count);

  std::vector<unsigned char> raw(static_cast<std::size_t>(count) * 12);
  read_exact(in_, path_, raw.data(), raw.size(), frame_ctx + " records");
  std::int64_t last = -1;
  for (std::uint32_t i = 0; i < count; ++i) {
    const unsigned char* rec = raw.data() + i * 12;
    Detection d;
    d.pixel = get_u32(rec);
    d.toa = get_f64(rec + 4);
    if (d.pixel >= pixels)
      fail(path_, frame_ctx + " record " + std::to_string(i) +
                      ": pixel index out of range");
    if (static_cast<std::int64_t>(d.pixel) <= last)
      fail(path_, frame_ctx + " record " + std::to_string(i) +
                      ": pixel indices not strictly ascending");
    if (!(d.toa >= 0.0) || !(d.toa < header_.rep_period))
      fail(path_, frame_ctx + " record " + std::to_string(i) +
                      ": toa outside [0, rep_period)");
    last = d.pixel;
    events.detections.push_back(d);
  }
  ++frames_read_;
  return true;
}

// ---------------------------------------------------------------------------
// GTV1 ground truth

GroundTruthWriter::GroundTruthWriter(const std::string& path,
                                     const GroundTruthHeader& header)
    : out_(path, std::ios::binary), path_(path), header_(header) {
  if (!out_) throw ParseError(path + ": cannot open for writing");
  if (header.mode > 1) throw InvalidInputError("GroundTruthWriter: bad mode");
  std::string buf;
  buf.append(kTruthMagic, 4);
  put_u32(buf, header.version);
  put_u32(buf, header.height);
  put_u32(buf, header.width);
  put_u64(buf, header.frame_count);
  buf.push_back(static_cast<char>(header.mode));
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void GroundTruthWriter::write_frame(const GroundTruthFrame& frame) {
  const std::uint64_t expected = header_.mode == 0 ? 1 : header_.frame_count;
  if (blocks_written_ >= expected)
    throw InvalidInputError("GroundTruthWriter: too many blocks");
  if (frame.height != static_cast<int>(header_.height) ||
      frame.width != static_cast<int>(header_.width))
    throw InvalidInputError("GroundTruthWriter: frame dims mismatch");
  std::string buf;
  const auto put_map = [&buf](const Eigen::ArrayXd& map) {
    for (Eigen::Index i = 0; i < map.size(); ++i) put_f64(buf, map[i]);
  };
  buf.reserve(frame.range.size() * 24);
  put_map(frame.range);
  put_map(frame.signal_frac);
  put_map(frame.detect_prob);
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  ++blocks_written_;
}

void GroundTruthWriter::finish() {
  if (finished_) return;
  const std::uint64_t expected = header_.mode == 0 ? 1 : header_.frame_count;
  if (blocks_written_ != expected)
    throw InvalidInputError("GroundTruthWriter: block count mismatch at finish");
  out_.flush();
  if (!out_) throw ParseError(path_ + ": write failure");
  finished_ = true;
}

GroundTruthReader::GroundTruthReader(const std::string& path)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw ParseError(path + ": cannot open");
  std::array<unsigned char, kTruthHeaderSize> raw;
  read_exact(in_, path_, raw.data(), raw.size(), "header");
  if (std::memcmp(raw.data(), kTruthMagic, 4) != 0)
    fail(path_, "bad magic '" + std::string(reinterpret_cast<char*>(raw.data()), 4) +
                    "', expected 'GTV1'");
  header_.version = get_u32(raw.data() + 4);
  if (header_.version != 1)
    fail(path_, "unsupported version " + std::to_string(header_.version));
  header_.height = get_u32(raw.data() + 8);
  header_.width = get_u32(raw.data() + 12);
  header_.frame_count = get_u64(raw.data() + 16);
  header_.mode = raw[24];
  if (header_.height == 0 || header_.width == 0)
    fail(path_, "zero image dimension in header");
  if (header_.mode > 1)
    fail(path_, "unknown mode byte " + std::to_string(header_.mode));

  const std::uint64_t blocks = header_.mode == 0 ? 1 : header_.frame_count;
  const std::uint64_t expected_size =
      kTruthHeaderSize + blocks * 3ULL * header_.height * header_.width * 8ULL;
  const std::uint64_t actual = file_size(path_);
  if (actual != expected_size)
    fail(path_, "file length " + std::to_string(actual) +
                    " does not match header arithmetic (" +
                    std::to_string(expected_size) + ")");
}

GroundTruthFrame GroundTruthReader::read_frame(std::int64_t n) {
  if (n < 0 || static_cast<std::uint64_t>(n) >= header_.frame_count)
    throw InvalidInputError("GroundTruthReader: frame index out of range");
  const std::uint64_t block = header_.mode == 0 ? 0 : static_cast<std::uint64_t>(n);
  const std::uint64_t map_bytes =
      static_cast<std::uint64_t>(header_.height) * header_.width * 8ULL;
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(kTruthHeaderSize + block * 3 * map_bytes));

  GroundTruthFrame frame;
  frame.height = static_cast<int>(header_.height);
  frame.width = static_cast<int>(header_.width);
  const Eigen::Index count = static_cast<Eigen::Index>(header_.height) * header_.width;
  std::vector<unsigned char> raw(map_bytes);
  const auto get_map = [&](Eigen::ArrayXd& map, const char* name) {
    read_exact(in_, path_, raw.data(), raw.size(),
               std::string(name) + " block of frame " + std::to_string(n));
    map.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) map[i] = get_f64(raw.data() + i * 8);
  };
  get_map(frame.range, "range");
  get_map(frame.signal_frac, "signal_frac");
  get_map(frame.detect_prob, "detect_prob");
  return frame;
}

// ---------------------------------------------------------------------------
// Rasters

void write_raster(const std::string& path, const Eigen::ArrayXd& values,
                  int height, int width, std::int64_t frame) {
  if (values.size() != static_cast<Eigen::Index>(height) * width)
    throw InvalidInputError("write_raster: shape mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  std::string buf;
  buf.reserve(values.size() * 8);
  for (Eigen::Index i = 0; i < values.size(); ++i) put_f64(buf, values[i]);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw ParseError(path + ": write failure");

  std::ofstream meta(path + ".meta");
  if (!meta) throw ParseError(path + ".meta: cannot open for writing");
  meta << "height = " << height << "\n"
       << "width = " << width << "\n"
       << "frame = " << frame << "\n"
       << "dtype = float64-le\n";
}

Eigen::ArrayXd read_raster(const std::string& path, int& height, int& width) {
  std::ifstream meta(path + ".meta");
  if (!meta) throw ParseError(path + ".meta: cannot open");
  height = width = 0;
  std::string line;
  while (std::getline(meta, line)) {
    std::istringstream ls(line);
    std::string key, eq;
    long long value = 0;
    if (ls >> key >> eq >> value && eq == "=") {
      if (key == "height") height = static_cast<int>(value);
      if (key == "width") width = static_cast<int>(value);
    }
  }
  if (height <= 0 || width <= 0)
    throw ParseError(path + ".meta: missing or invalid height/width");

  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  const std::uint64_t expected = static_cast<std::uint64_t>(height) * width * 8ULL;
  if (file_size(path) != expected)
    throw ParseError(path + ": length does not match sidecar dims");
  std::vector<unsigned char> raw(expected);
  read_exact(in, path, raw.data(), raw.size(), "raster body");
  Eigen::ArrayXd values(static_cast<Eigen::Index>(height) * width);
  for (Eigen::Index i = 0; i < values.size(); ++i)
    values[i] = get_f64(raw.data() + i * 8);
  return values;
}

}  // namespace o3dsp
