#include "wnet/codec.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include <json.hpp>

#include "wnet/error.hpp"

namespace wnet {
namespace {

struct PnmHeader {
  int channels = 0;  // 1 for P5, 3 for P6
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

[[noreturn]] void fail_at(std::size_t offset, const std::string& what) {
  throw Error(ErrorKind::format, "malformed raster at byte offset " + std::to_string(offset) +
                                     ": " + what);
}

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  int read_uint(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) fail_at(start, std::string(field) + " too large");
      ++pos_;
    }
    if (pos_ == start) fail_at(start, std::string("expected ") + field);
    return static_cast<int>(value);
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

PnmHeader parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') fail_at(0, "missing P5/P6 magic");
  PnmHeader h;
  switch (bytes[1]) {
    case '5': h.channels = 1; break;
    case '6': h.channels = 3; break;
    default: fail_at(1, "unsupported portable-map variant 'P" + std::string(1, static_cast<char>(bytes[1])) + "'");
  }
  HeaderReader reader(bytes);
  reader.advance(2);
  h.width = reader.read_uint("width");
  h.height = reader.read_uint("height");
  h.maxval = reader.read_uint("maxval");
  if (h.width <= 0 || h.height <= 0) fail_at(reader.pos(), "zero raster dimension");
  if (h.maxval <= 0 || h.maxval > 65535) fail_at(reader.pos(), "maxval out of range");
  if (reader.pos() >= bytes.size() || !is_space(bytes[reader.pos()])) {
    fail_at(reader.pos(), "expected single whitespace before sample data");
  }
  h.data_offset = reader.pos() + 1;
  const std::size_t bytes_per_sample = h.maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(h.width) * h.height * h.channels * bytes_per_sample;
  if (bytes.size() - h.data_offset < need) {
    fail_at(bytes.size(), "truncated sample data, expected " + std::to_string(need) + " bytes after offset " +
                              std::to_string(h.data_offset));
  }
  return h;
}

void require_channels(const PnmHeader& h, int expected) {
  if (h.channels != expected) {
    throw Error(ErrorKind::channel, "expected " + std::to_string(expected) + "-channel raster, got " +
                                        std::to_string(h.channels) + " channel(s)");
  }
}

Bytes header_bytes(const char* magic, int width, int height, int maxval) {
  const std::string header = std::string(magic) + "\n" + std::to_string(width) + " " +
                             std::to_string(height) + "\n" + std::to_string(maxval) + "\n";
  return Bytes(header.begin(), header.end());
}

std::uint8_t quantize8(double v) { return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5)); }

}  // namespace

Bytes encode_tile(const ImageTile& tile) {
  Bytes out = header_bytes("P6", tile.width(), tile.height(), 255);
  out.reserve(out.size() + tile.data().size());
  for (double v : tile.data()) out.push_back(quantize8(v));
  return out;
}

ImageTile decode_tile(std::span<const std::uint8_t> bytes, std::string id) {
  const PnmHeader h = parse_header(bytes);
  require_channels(h, 3);
  if (h.maxval != 255) fail_at(h.data_offset - 1, "tile containers must use maxval 255");
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height * 3;
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = bytes[h.data_offset + i] / 255.0;
  return ImageTile(std::move(id), h.height, h.width, std::move(data));
}

Bytes encode_binary(const BinaryMask& mask) {
  Bytes out = header_bytes("P5", mask.width(), mask.height(), 255);
  for (double v : mask.data()) out.push_back(v != 0.0 ? 255 : 0);
  return out;
}

BinaryMask decode_binary(std::span<const std::uint8_t> bytes, std::string image_id) {
  const PnmHeader h = parse_header(bytes);
  require_channels(h, 1);
  if (h.maxval != 255) fail_at(h.data_offset - 1, "binary masks must use maxval 255");
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t b = bytes[h.data_offset + i];
    if (b != 0 && b != 255) fail_at(h.data_offset + i, "binary mask sample must be 0 or 255");
    data[i] = b == 255 ? 1.0 : 0.0;
  }
  return BinaryMask(std::move(image_id), h.height, h.width, std::move(data));
}

Bytes encode_density(const DensityMask& mask) {
  Bytes out = header_bytes("P5", mask.width(), mask.height(), 65535);
  out.reserve(out.size() + mask.size() * 2);
  for (double v : mask.data()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::range, "density value outside [0,1] cannot be encoded");
    }
    const auto q = static_cast<std::uint16_t>(std::floor(v * 65535.0 + 0.5));
    out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  return out;
}

DensityMask decode_density(std::span<const std::uint8_t> bytes, std::string image_id) {
  const PnmHeader h = parse_header(bytes);
  require_channels(h, 1);
  if (h.maxval != 65535) fail_at(h.data_offset - 1, "density masks must use maxval 65535");
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = h.data_offset + 2 * i;
    const unsigned q = (static_cast<unsigned>(bytes[at]) << 8) | bytes[at + 1];
    data[i] = q / 65535.0;
  }
  return DensityMask(std::move(image_id), h.height, h.width, std::move(data));
}

PointSet read_points(std::string_view text, std::optional<std::pair<int, int>> bounds) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::format, std::string("points document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("image_id") || !doc["image_id"].is_string() ||
      !doc.contains("points") || !doc["points"].is_array()) {
    throw Error(ErrorKind::format,
                "points document must be {\"image_id\": string, \"points\": [[x, y], ...]}");
  }
  std::vector<Point> points;
  points.reserve(doc["points"].size());
  for (std::size_t i = 0; i < doc["points"].size(); ++i) {
    const auto& p = doc["points"][i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw Error(ErrorKind::format, "points[" + std::to_string(i) + "] must be [x, y]");
    }
    points.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  PointSet set(doc["image_id"].get<std::string>(), std::move(points));
  if (bounds) set.check_bounds(bounds->first, bounds->second);
  return set;
}

std::string write_points(const PointSet& points) {
  nlohmann::json doc;
  doc["image_id"] = points.image_id();
  doc["points"] = nlohmann::json::array();
  for (const Point& p : points.points()) doc["points"].push_back({p.x, p.y});
  return doc.dump();
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_text_file(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  return std::string(b.begin(), b.end());
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  thread_local std::mt19937_64 rng{std::random_device{}()};
  auto tmp = path;
  tmp += ".tmp" + std::to_string(rng() & 0xffffff);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorKind::io, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ImageTile load_tile(const std::filesystem::path& path) {
  return decode_tile(read_file(path), path.stem().string());
}

void save_tile(const std::filesystem::path& path, const ImageTile& tile) {
  write_file_atomic(path, encode_tile(tile));
}

}  // namespace wnet
