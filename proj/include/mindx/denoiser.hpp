#pragma once

#include <string_view>

#include "mindx/image.hpp"

namespace mindx {

enum class DenoiserKind { Identity, GaussianBlur, PatchTransform };

std::string_view to_string(DenoiserKind k);
DenoiserKind parse_denoiser_kind(std::string_view s);

/// Gaussian denoiser used as the prox of the implicit image prior.
struct DenoiserSpec {
  DenoiserKind kind = DenoiserKind::Identity;
  double strength = 1.0;  // assumed noise std; blur width in pixels for GaussianBlur
  int patch_size = 7;
  int search_radius = 7;
  int max_matches = 16;
  int ref_stride = 3;
  double threshold_factor = 2.7;  // hard threshold = threshold_factor * strength

  void validate() const;
};

/// Throws std::invalid_argument for an invalid spec or an image smaller
/// than the patch (PatchTransform).
Image denoise(const Image& img, const DenoiserSpec& spec);

}  // namespace mindx
