#pragma once

#include <array>

#include "mindx/image.hpp"
#include "mindx/noise.hpp"

namespace mindx {

/// Mirror index into [0, n) without repeating the edge sample
/// (-1 -> 1, n -> n-2); folds repeatedly for windows larger than the image.
int reflect_index(int i, int n);

struct AmfParams {
  int initial_window = 3;
  int max_window = 19;

  void validate() const;
};

struct AcwmfParams {
  int window = 3;
  // Center weights are 2k+1 for k = 0..3.
  std::array<double, 4> thresholds{40.0, 25.0, 10.0, 5.0};  // intensity units at peak 255
  double s = 0.6;                                          // MAD multiplier

  /// Default thresholds rescaled by peak/255.
  static AcwmfParams for_peak(double peak);
  void validate() const;
};

/// Classical adaptive median filter with reflective borders.
Image amf(const Image& img, const AmfParams& params = {});

/// Adaptive center-weighted median filter: a pixel is replaced by the plain
/// window median when any center-weighted median departs from it by more
/// than s * MAD + threshold[k].
Image acwmf(const Image& img, const AcwmfParams& params);

/// |filter(img) - img|: AMF for salt-and-pepper, ACWMF (thresholds scaled
/// to img.peak()) for random-valued impulses.
Image init_outlier_field(const Image& img, ImpulseType impulse_type);

/// The filter used by init_outlier_field.
Image impulse_filter(const Image& img, ImpulseType impulse_type);

}  // namespace mindx
