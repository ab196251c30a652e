#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "projmap/detail/text.hpp"
#include "projmap/detail/yaml.hpp"
#include "projmap/errors.hpp"
#include "projmap/transforms.hpp"

namespace projmap {

/// Physical calibration jig readings. The projector is mounted perpendicular
/// to a flat surface at distance Z; the projected image measures W x H on the
/// surface, and (X, Y) locate the optical-axis intersection relative to the
/// top-left projected corner. Lengths in meters, w/h in pixels.
struct CalibrationMeasurement {
  double Z = 0;
  double W = 0;
  double H = 0;
  double X = 0;
  double Y = 0;
  int w = 0;
  int h = 0;

  void validate() const {
    auto fail = [](const std::string& what) { throw InvalidMeasurement(what); };
    if (!(Z > 0) || !std::isfinite(Z)) fail("Z must be positive");
    if (!(W > 0) || !std::isfinite(W)) fail("W must be positive");
    if (!(H > 0) || !std::isfinite(H)) fail("H must be positive");
    if (w <= 0) fail("w must be positive");
    if (h <= 0) fail("h must be positive");
    if (!(X >= 0 && X <= W)) fail("X must lie in [0, W]");
    if (!(Y >= 0 && Y <= H)) fail("Y must lie in [0, H]");
  }
};

/// Pinhole intrinsics in pixels. Pixel (0,0) is the center of the top-left
/// pixel; u grows rightward, v downward.
struct Intrinsics {
  double fx = 0;
  double fy = 0;
  double cx = 0;
  double cy = 0;
  int width = 0;
  int height = 0;

  bool valid() const {
    return fx > 0 && fy > 0 && std::isfinite(fx) && std::isfinite(fy) &&
           width > 0 && height > 0 && cx > 0 && cx < width && cy > 0 &&
           cy < height;
  }

  void validate() const {
    if (!valid()) {
      throw InvalidIntrinsics("intrinsics require fx, fy > 0, 0 < cx < width, "
                              "0 < cy < height");
    }
  }

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

struct FocalLengths {
  double fx;
  double fy;
};

struct PrincipalPoint {
  double cx;
  double cy;
};

/// Focal length from the projective relation f = w·Z/W, applied per axis.
inline FocalLengths calibrate_focal(const CalibrationMeasurement& m) {
  m.validate();
  return {m.w * m.Z / m.W, m.h * m.Z / m.H};
}

inline PrincipalPoint calibrate_principal(const CalibrationMeasurement& m) {
  m.validate();
  return {m.w * m.X / m.W, m.h * m.Y / m.H};
}

/// Full calibration; the result must also satisfy the Intrinsics invariants.
inline Intrinsics calibrate(const CalibrationMeasurement& m) {
  const auto f = calibrate_focal(m);
  const auto c = calibrate_principal(m);
  Intrinsics i{f.fx, f.fy, c.cx, c.cy, m.w, m.h};
  if (!i.valid()) {
    throw InvalidMeasurement("principal point falls on the image border");
  }
  return i;
}

using Matrix3 = Eigen::Matrix<double, 3, 3, Eigen::RowMajor>;

inline Matrix3 assemble_K(const Intrinsics& i) {
  Matrix3 K;
  K << i.fx, 0.0, i.cx,
       0.0, i.fy, i.cy,
       0.0, 0.0, 1.0;
  return K;
}

struct Pixel {
  double u;
  double v;
};

/// Continuous pixel coordinates of an optical-frame point.
inline Pixel project_point(const Vec3& p, const Intrinsics& i) {
  if (!(p.z() > 0)) throw BehindCamera("point is not in front of the camera");
  return {i.fx * p.x() / p.z() + i.cx, i.fy * p.y() / p.z() + i.cy};
}

inline Vec3 unproject_pixel(double u, double v, double depth, const Intrinsics& i) {
  if (!(depth > 0)) throw InvalidDepth("depth must be positive");
  return {(u - i.cx) * depth / i.fx, (v - i.cy) * depth / i.fy, depth};
}

/// Serializes intrinsics in the CameraInfo layout. Distortion is not modeled,
/// so D is always five zeros under "plumb_bob".
inline std::string write_camera_info(const Intrinsics& i) {
  using detail::shortest;
  const Matrix3 K = assemble_K(i);
  std::string out;
  out += "image_width: " + std::to_string(i.width) + "\n";
  out += "image_height: " + std::to_string(i.height) + "\n";
  out += "distortion_model: plumb_bob\n";
  out += "D: [0, 0, 0, 0, 0]\n";
  out += "K: [";
  for (int k = 0; k < 9; ++k) {
    if (k) out += ", ";
    out += shortest(K(k / 3, k % 3));
  }
  out += "]\n";
  return out;
}

inline Intrinsics parse_camera_info(std::string_view bytes) {
  const YAML::Node doc = detail::load_yaml(bytes);
  if (!doc || !doc.IsMap()) throw ParseError("camera info must be a mapping", 1);

  Intrinsics i;
  i.width = detail::as_number<int>(detail::require(doc, "image_width"), "image_width");
  i.height = detail::as_number<int>(detail::require(doc, "image_height"), "image_height");
  if (i.width <= 0 || i.height <= 0) {
    throw ParseError("image size must be positive", detail::line_of(doc["image_width"]),
                     0, i.width <= 0 ? "image_width" : "image_height");
  }
  if (const YAML::Node model = doc["distortion_model"]) {
    detail::as_string(model, "distortion_model");
  }
  if (const YAML::Node d = doc["D"]) {
    if (!d.IsSequence()) throw ParseError("expected a list", detail::line_of(d), 0, "D");
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (detail::as_number<double>(d[k], "D[" + std::to_string(k) + "]") != 0.0) {
        throw ParseError("lens distortion is not supported; D must be zero",
                         detail::line_of(d), 0, "D");
      }
    }
  }

  const YAML::Node k_node = detail::require(doc, "K");
  const auto K = detail::as_numbers<double>(k_node, "K", 9);
  if (K[1] != 0.0 || K[3] != 0.0) {
    throw InconsistentK("K has nonzero skew or off-diagonal terms (line " +
                        std::to_string(detail::line_of(k_node)) + ")");
  }
  if (K[6] != 0.0 || K[7] != 0.0 || K[8] != 1.0) {
    throw InconsistentK("K bottom row must be [0, 0, 1] (line " +
                        std::to_string(detail::line_of(k_node)) + ")");
  }
  i.fx = K[0];
  i.cx = K[2];
  i.fy = K[4];
  i.cy = K[5];
  if (!i.valid()) {
    throw ParseError("K does not describe valid intrinsics for the image size",
                     detail::line_of(k_node), 0, "K");
  }
  return i;
}

}  // namespace projmap
