#include "wnet/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wnet/error.hpp"

namespace wnet {
namespace {

void check_dims(int height, int width, std::size_t channels, std::size_t size) {
  if (height <= 0 || width <= 0) {
    throw Error(ErrorKind::shape, "raster dimensions must be positive, got " +
                                      std::to_string(height) + "x" + std::to_string(width));
  }
  const auto expected = static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * channels;
  if (size != expected) {
    throw Error(ErrorKind::shape, "raster data has " + std::to_string(size) + " samples, expected " +
                                      std::to_string(expected));
  }
}

void check_unit_interval(std::span<const double> data, const char* what) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(data[i] >= 0.0 && data[i] <= 1.0)) {
      std::ostringstream os;
      os << what << " sample " << i << " = " << data[i] << " outside [0,1]";
      throw Error(ErrorKind::range, os.str());
    }
  }
}

}  // namespace

ImageTile::ImageTile(std::string id, int height, int width, std::vector<double> data)
    : id_(std::move(id)), height_(height), width_(width), data_(std::move(data)) {
  check_dims(height_, width_, 3, data_.size());
  check_unit_interval(data_, "tile");
}

ImageTile ImageTile::filled(std::string id, int height, int width, double r, double g, double b) {
  std::vector<double> data(static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0) * 3);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    data[i] = r;
    data[i + 1] = g;
    data[i + 2] = b;
  }
  return ImageTile(std::move(id), height, width, std::move(data));
}

ImageTile ImageTile::with_id(std::string id) const {
  ImageTile copy = *this;
  copy.id_ = std::move(id);
  return copy;
}

GrayRaster::GrayRaster(std::string image_id, int height, int width, std::vector<double> data)
    : image_id_(std::move(image_id)), height_(height), width_(width), data_(std::move(data)) {
  check_dims(height_, width_, 1, data_.size());
}

BinaryMask::BinaryMask(std::string image_id, int height, int width, std::vector<double> data)
    : GrayRaster(std::move(image_id), height, width, std::move(data)) {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] != 0.0 && data_[i] != 1.0) {
      throw Error(ErrorKind::range,
                  "binary mask sample " + std::to_string(i) + " is neither 0 nor 1");
    }
  }
}

std::size_t BinaryMask::count_lit() const noexcept {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 1.0));
}

DensityMask::DensityMask(std::string image_id, int height, int width, std::vector<double> data)
    : GrayRaster(std::move(image_id), height, width, std::move(data)) {
  check_unit_interval(data_, "density mask");
}

DensityMask DensityMask::zeros(std::string image_id, int height, int width) {
  return DensityMask(std::move(image_id), height, width,
                     std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                         std::max(width, 0)));
}

std::vector<std::pair<std::size_t, std::size_t>> find_duplicates(std::span<const Point> points) {
  // Sweep over x-sorted order; only neighbours within the tolerance band in x
  // can collide.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a].x < points[b].x || (points[a].x == points[b].x && a < b);
  });
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Point& p = points[order[i]];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Point& q = points[order[j]];
      if (q.x - p.x >= kDuplicateTolerance) break;
      if (std::hypot(q.x - p.x, q.y - p.y) < kDuplicateTolerance) {
        out.emplace_back(std::min(order[i], order[j]), std::max(order[i], order[j]));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

PointSet::PointSet(std::string image_id, std::vector<Point> points)
    : image_id_(std::move(image_id)), points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].x) || !std::isfinite(points_[i].y)) {
      throw Error(ErrorKind::range, "point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
  const auto dups = find_duplicates(points_);
  if (!dups.empty()) {
    std::ostringstream os;
    os << "duplicate points at indices";
    for (const auto& [a, b] : dups) os << " (" << a << "," << b << ")";
    throw Error(ErrorKind::duplicate, os.str());
  }
}

void PointSet::check_bounds(int height, int width) const {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Point& p = points_[i];
    if (!(p.x >= 0.0 && p.x < width && p.y >= 0.0 && p.y < height)) {
      std::ostringstream os;
      os << "point " << i << " (" << p.x << "," << p.y << ") outside " << width << "x" << height
         << " raster";
      throw Error(ErrorKind::out_of_bounds, os.str());
    }
  }
}

int raster_index(double coordinate) { return static_cast<int>(std::floor(coordinate + 0.5)); }

}  // namespace wnet
