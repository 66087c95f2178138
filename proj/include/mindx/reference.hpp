#pragma once

// Serial, straightforward versions of the data-parallel kernels. They share
// no code with the OpenMP kernels and exist to check them (tests) and to
// measure them (bench).

#include "mindx/median.hpp"
#include "mindx/operators.hpp"

namespace mindx::reference {

GradField grad(const Image& img);
Image div(const GradField& field);
GradField prox_tv_dual_shrink(const GradField& t, double lambda1, double rho);
Image prox_data(const Image& t, const Image& y_tilde, const PixelMask& mask, double tau);
Image amf(const Image& img, const AmfParams& params);
Image acwmf(const Image& img, const AcwmfParams& params);
Image gat_forward(const Image& img, double sigma);

}  // namespace mindx::reference
