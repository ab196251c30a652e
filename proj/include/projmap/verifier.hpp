#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "projmap/camera_model.hpp"
#include "projmap/pointcloud_io.hpp"
#include "projmap/renderer.hpp"
#include "projmap/transforms.hpp"

namespace projmap {

/// Half-line from the projector's optical center.
struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length

  /// Perpendicular distance from `p` to the supporting line.
  double distance_to(const Vec3& p) const { return (p - origin).cross(direction).norm(); }
};

struct AlignmentReport {
  std::size_t samples = 0;
  double max_error = 0;
  double rms_error = 0;
  double mean_error = 0;
  double predicted_bound = 0;

  /// Matched intrinsics and extrinsics keep every sample within the
  /// pixel-quantization bound.
  bool within_bound(double slack = 1e-9) const { return max_error <= predicted_bound + slack; }
};

/// Synthesizes the jig readings a perfect measurement of `i` at distance Z
/// would produce. Exact algebraic inverse of `calibrate`.
inline CalibrationMeasurement simulate_measurement(const Intrinsics& i, double Z) {
  i.validate();
  if (!(Z > 0) || !std::isfinite(Z)) throw InvalidIntrinsics("distance Z must be positive");
  CalibrationMeasurement m;
  m.Z = Z;
  m.w = i.width;
  m.h = i.height;
  m.W = i.width * Z / i.fx;
  m.H = i.height * Z / i.fy;
  m.X = i.cx * m.W / i.width;
  m.Y = i.cy * m.H / i.height;
  return m;
}

/// World ray leaving the projector through pixel (u, v).
/// `world_from_optical` is the projector's optical-frame pose.
inline Ray raycast_pixel(double u, double v, const Intrinsics& i,
                         const RigidTransform& world_from_optical) {
  i.validate();
  const Vec3 dir_optical = unproject_pixel(u, v, 1.0, i).normalized();
  return {world_from_optical.translation(),
          (world_from_optical.rotation() * dir_optical).normalized()};
}

/// Renders at radius 0 and measures, for each lit pixel's source point, the
/// distance from that point to the ray cast back through the pixel center.
/// `raycast_intrinsics` overrides the intrinsics used for the back-cast only.
inline AlignmentReport verify_alignment(const Scene& scene, const FrameTree& tree,
                                        std::string_view projector_frame,
                                        const Intrinsics& i,
                                        const std::optional<Intrinsics>& raycast_intrinsics = {}) {
  const Intrinsics& back = raycast_intrinsics ? *raycast_intrinsics : i;
  back.validate();
  std::vector<std::int64_t> owners;
  detail::splat_scene(scene, tree, projector_frame, i, RenderOptions{0}, &owners);

  // Flattened index -> (cluster, point).
  std::vector<std::pair<std::size_t, std::size_t>> where;
  where.reserve(scene.point_count());
  for (std::size_t c = 0; c < scene.clusters.size(); ++c) {
    for (std::size_t k = 0; k < scene.clusters[c].cloud.points.size(); ++k) where.emplace_back(c, k);
  }

  const std::string& world = tree.root();
  const RigidTransform world_from_proj = tree.lookup(projector_frame, world);
  std::vector<RigidTransform> proj_from_cloud, world_from_cloud;
  for (const auto& cluster : scene.clusters) {
    proj_from_cloud.push_back(tree.lookup(cluster.cloud.frame, projector_frame));
    world_from_cloud.push_back(tree.lookup(cluster.cloud.frame, world));
  }
  const double pixel_diag = std::hypot(1.0 / i.fx, 1.0 / i.fy);

  AlignmentReport report;
  double sum = 0, sum_sq = 0;
  for (std::size_t pix = 0; pix < owners.size(); ++pix) {
    if (owners[pix] < 0) continue;
    const auto [c, k] = where[static_cast<std::size_t>(owners[pix])];
    const Vec3 p = scene.clusters[c].cloud.points[k].cast<double>();
    const Vec3 p_proj = transform_point(proj_from_cloud[c], p);
    const Vec3 p_world = transform_point(world_from_cloud[c], p);

    const Pixel uv = project_point(p_proj, i);
    const Ray ray = raycast_pixel(pixel_index(uv.u), pixel_index(uv.v), back, world_from_proj);
    const double err = ray.distance_to(p_world);

    ++report.samples;
    sum += err;
    sum_sq += err * err;
    report.max_error = std::max(report.max_error, err);
    report.predicted_bound = std::max(report.predicted_bound, p_proj.z() / 2 * pixel_diag);
  }
  if (report.samples > 0) {
    const auto n = static_cast<double>(report.samples);
    report.mean_error = sum / n;
    report.rms_error = std::min(std::sqrt(sum_sq / n), report.max_error);
  }
  return report;
}

inline nlohmann::json to_json(const AlignmentReport& r) {
  nlohmann::json j;
  j["samples"] = r.samples;
  j["max_error_m"] = r.max_error;
  j["rms_error_m"] = r.rms_error;
  j["predicted_bound_m"] = r.predicted_bound;
  return j;
}

inline AlignmentReport report_from_json(const nlohmann::json& j) {
  AlignmentReport r;
  r.samples = j.at("samples").get<std::size_t>();
  r.max_error = j.at("max_error_m").get<double>();
  r.rms_error = j.at("rms_error_m").get<double>();
  r.predicted_bound = j.at("predicted_bound_m").get<double>();
  return r;
}

}  // namespace projmap
