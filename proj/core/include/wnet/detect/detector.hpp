#pragma once

#include <memory>

#include "wnet/detect/peaks.hpp"
#include "wnet/nn/model.hpp"

namespace wnet::detect {

/// Inference pipeline: pad, run the cascade, crop, extract peaks.
class Detector {
 public:
  Detector(std::shared_ptr<const nn::WNetModel> model, PeakConfig peaks,
           nn::Precision precision = nn::Precision::f32);

  Detection detect(const ImageTile& tile) const;
  DensityMask predict_density(const ImageTile& tile) const;

  const nn::WNetModel& model() const noexcept { return *model_; }
  const PeakConfig& peak_config() const noexcept { return peaks_; }

 private:
  std::shared_ptr<const nn::WNetModel> model_;
  PeakConfig peaks_;
  nn::Precision precision_;
};

}  // namespace wnet::detect
