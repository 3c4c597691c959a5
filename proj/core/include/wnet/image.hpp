#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wnet {

// Raster convention used throughout: origin at the top-left pixel, x is the
// column and y is the row. Pixel (row, col) has its center at (x=col, y=row).

/// H x W x 3 RGB tile, interleaved row-major, every sample in [0,1].
class ImageTile {
 public:
  ImageTile(std::string id, int height, int width, std::vector<double> data);

  /// Tile filled with a constant color.
  static ImageTile filled(std::string id, int height, int width, double r, double g, double b);

  const std::string& id() const noexcept { return id_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  static constexpr int channels() noexcept { return 3; }

  double at(int row, int col, int channel) const {
    return data_[(static_cast<std::size_t>(row) * width_ + col) * 3 + channel];
  }
  std::span<const double> data() const noexcept { return data_; }

  ImageTile with_id(std::string id) const;

 private:
  std::string id_;
  int height_;
  int width_;
  std::vector<double> data_;
};

/// Single-channel raster shared by the binary and density masks.
class GrayRaster {
 public:
  GrayRaster(std::string image_id, int height, int width, std::vector<double> data);

  const std::string& image_id() const noexcept { return image_id_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }

  double at(int row, int col) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }
  std::span<const double> data() const noexcept { return data_; }

 protected:
  std::string image_id_;
  int height_;
  int width_;
  std::vector<double> data_;
};

/// Values exactly 0 or 1.
class BinaryMask : public GrayRaster {
 public:
  BinaryMask(std::string image_id, int height, int width, std::vector<double> data);
  std::size_t count_lit() const noexcept;
};

/// Values in [0,1]; peaks of 1 at nucleus centers.
class DensityMask : public GrayRaster {
 public:
  DensityMask(std::string image_id, int height, int width, std::vector<double> data);
  static DensityMask zeros(std::string image_id, int height, int width);
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Points closer than this are the same point.
inline constexpr double kDuplicateTolerance = 1e-6;

/// Nucleus centers annotated on one image. Construction rejects duplicates.
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::string image_id, std::vector<Point> points);

  const std::string& image_id() const noexcept { return image_id_; }
  const std::vector<Point>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  /// Throws out_of_bounds unless every point satisfies 0 <= x < width, 0 <= y < height.
  void check_bounds(int height, int width) const;

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::string image_id_;
  std::vector<Point> points_;
};

/// Indices (i, j), i < j, of point pairs closer than kDuplicateTolerance.
std::vector<std::pair<std::size_t, std::size_t>> find_duplicates(std::span<const Point> points);

/// Raster index of a continuous coordinate: round half up.
int raster_index(double coordinate);

}  // namespace wnet
