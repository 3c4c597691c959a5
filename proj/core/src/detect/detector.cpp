#include "wnet/detect/detector.hpp"

#include "wnet/detect/padding.hpp"
#include "wnet/error.hpp"

namespace wnet::detect {

Detector::Detector(std::shared_ptr<const nn::WNetModel> model, PeakConfig peaks, nn::Precision precision)
    : model_(std::move(model)), peaks_(peaks), precision_(precision) {
  if (!model_) throw Error(ErrorKind::unavailable, "detector needs a model");
  peaks_.validate();
}

DensityMask Detector::predict_density(const ImageTile& tile) const {
  const auto [padded, record] = pad_to_multiple(tile, model_->input_multiple());
  return crop_back(nn::forward(*model_, padded, precision_).stage2, record);
}

Detection Detector::detect(const ImageTile& tile) const { return extract_peaks(predict_density(tile), peaks_); }

}  // namespace wnet::detect
