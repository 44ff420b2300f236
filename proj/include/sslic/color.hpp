// sRGB -> CIE-Lab conversion and the gradient magnitude used for
// cluster-center perturbation. All functions are pure.
#pragma once

#include <cmath>
#include <cstdint>

#include "sslic/image.hpp"

namespace sslic {

struct LabTriple {
  double L;
  double a;
  double b;
};

namespace detail {

// IEC 61966-2-1 transfer function, input in [0, 1].
inline double srgb_linearize(double u) {
  return u <= 0.04045 ? u / 12.92 : std::pow((u + 0.055) / 1.055, 2.4);
}

// CIE 1976 pivot with the standard rational constants.
inline double lab_pivot(double t) {
  constexpr double eps = 216.0 / 24389.0;
  constexpr double kappa = 24389.0 / 27.0;
  return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
}

}  // namespace detail

/// 8-bit sRGB (D65) to CIE-Lab. Components are expected in [0, 255].
inline LabTriple srgb_to_cielab(double r8, double g8, double b8) {
  const double r = detail::srgb_linearize(r8 / 255.0);
  const double g = detail::srgb_linearize(g8 / 255.0);
  const double b = detail::srgb_linearize(b8 / 255.0);

  // Linear sRGB -> XYZ, D65 white, 2 degree observer.
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

  const double fx = detail::lab_pivot(x / 0.95047);
  const double fy = detail::lab_pivot(y / 1.0);
  const double fz = detail::lab_pivot(z / 1.08883);

  return LabTriple{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

/// Pixelwise sRGB -> Lab for a 3-channel image with values in [0, 255].
inline NDImage convert_image_to_lab(const NDImage& img) {
  if (img.channels() != 3)
    throw std::invalid_argument("convert_image_to_lab: image must have 3 channels");
  NDImage out = img;
  double* p = out.data().data();
  const std::int64_t n = img.pixel_count();
  for (std::int64_t i = 0; i < n; ++i, p += 3) {
    const LabTriple lab = srgb_to_cielab(p[0], p[1], p[2]);
    p[0] = lab.L;
    p[1] = lab.a;
    p[2] = lab.b;
  }
  return out;
}

/// Squared Frobenius norm of the c x n central-difference Jacobian at a
/// coordinate; one-sided differences at image borders. For c = 1 this is
/// the squared 2-norm of the gradient. Axes of extent 1 contribute zero.
inline double gradient_magnitude_sq(const NDImage& img, const Coord& coord) {
  const Shape& dims = img.dims();
  const Shape strides = strides_of(dims);
  const int c = img.channels();
  const std::int64_t base = linear_index(coord, dims);
  const double* data = img.data().data();

  double g = 0.0;
  for (int axis = 0; axis < dims.size(); ++axis) {
    if (dims[axis] == 1) continue;
    std::int64_t lo = base;
    std::int64_t hi = base;
    double h = 2.0;
    if (coord[axis] == 0) {
      hi += strides[axis];
      h = 1.0;
    } else if (coord[axis] == dims[axis] - 1) {
      lo -= strides[axis];
      h = 1.0;
    } else {
      hi += strides[axis];
      lo -= strides[axis];
    }
    const double* ph = data + hi * c;
    const double* pl = data + lo * c;
    for (int ch = 0; ch < c; ++ch) {
      const double d = (ph[ch] - pl[ch]) / h;
      g += d * d;
    }
  }
  return g;
}

}  // namespace sslic
