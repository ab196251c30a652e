#pragma once

// File-in/file-out commands behind the `projmap` executable. Each returns
// the process exit code and writes diagnostics to `err`.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "projmap/camera_model.hpp"
#include "projmap/errors.hpp"
#include "projmap/pointcloud_io.hpp"
#include "projmap/renderer.hpp"
#include "projmap/transforms.hpp"
#include "projmap/verifier.hpp"

namespace projmap::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kUnknownFrame = 3,
  kBoundViolated = 4,
};

struct CalibrateArgs {
  std::filesystem::path measurements;
  std::filesystem::path out;
};

struct RenderArgs {
  std::filesystem::path scene;
  std::filesystem::path frames;
  std::filesystem::path camera_info;
  std::string projector_frame;
  int splat_radius = 2;
  std::filesystem::path out;
};

struct PathArgs {
  std::filesystem::path path;
  std::optional<double> band_width;
  std::optional<std::string> ground_frame;
  std::filesystem::path frames;
  std::filesystem::path camera_info;
  std::string projector_frame;
  int splat_radius = 2;
  std::filesystem::path out;
};

struct VerifyArgs {
  std::filesystem::path scene;
  std::filesystem::path frames;
  std::filesystem::path camera_info;
  std::optional<std::filesystem::path> raycast_camera_info;
  std::string projector_frame;
  std::filesystem::path report;
};

/// Corner of the projected image that the X/Y jig readings are measured from.
enum class MeasurementOrigin { top_left, top_right, bottom_left, bottom_right };

/// Reads measurement YAML (keys Z, W, H, X, Y, w, h; optional `origin`)
/// and converts X/Y to the top-left convention.
inline CalibrationMeasurement parse_measurements(std::string_view bytes) {
  const YAML::Node doc = detail::load_yaml(bytes);
  if (!doc || !doc.IsMap()) throw ParseError("measurements must be a mapping", 1);
  CalibrationMeasurement m;
  for (const char* key : {"Z", "W", "H", "X", "Y", "w", "h"}) detail::require(doc, key);
  m.Z = detail::as_number<double>(doc["Z"], "Z");
  m.W = detail::as_number<double>(doc["W"], "W");
  m.H = detail::as_number<double>(doc["H"], "H");
  m.X = detail::as_number<double>(doc["X"], "X");
  m.Y = detail::as_number<double>(doc["Y"], "Y");
  m.w = detail::as_number<int>(doc["w"], "w");
  m.h = detail::as_number<int>(doc["h"], "h");

  MeasurementOrigin origin = MeasurementOrigin::top_left;
  if (const YAML::Node o = doc["origin"]) {
    const std::string name = detail::as_string(o, "origin");
    if (name == "top_left") origin = MeasurementOrigin::top_left;
    else if (name == "top_right") origin = MeasurementOrigin::top_right;
    else if (name == "bottom_left") origin = MeasurementOrigin::bottom_left;
    else if (name == "bottom_right") origin = MeasurementOrigin::bottom_right;
    else throw ParseError("unknown origin '" + name + "'", detail::line_of(o), 0, "origin");
  }
  if (origin == MeasurementOrigin::top_right || origin == MeasurementOrigin::bottom_right) {
    m.X = m.W - m.X;
  }
  if (origin == MeasurementOrigin::bottom_left || origin == MeasurementOrigin::bottom_right) {
    m.Y = m.H - m.Y;
  }
  return m;
}

/// Ground-plane path: `{frame, band_width_m, points: [[x, y], ...]}` with
/// an optional `color: [r, g, b]` (default green).
struct PathSpec {
  std::string frame;
  std::optional<double> band_width;
  std::vector<Point2> points;
  Rgb color{0, 255, 0};
};

inline PathSpec parse_path(std::string_view bytes) {
  const YAML::Node doc = detail::load_yaml(bytes);
  if (!doc || !doc.IsMap()) throw ParseError("path file must be a mapping", 1);
  PathSpec spec;
  if (const YAML::Node f = doc["frame"]) spec.frame = detail::as_string(f, "frame");
  if (const YAML::Node b = doc["band_width_m"]) {
    spec.band_width = detail::as_number<double>(b, "band_width_m");
  }
  const YAML::Node pts = detail::require(doc, "points");
  if (!pts.IsSequence() && !pts.IsNull()) {
    throw ParseError("expected a list", detail::line_of(pts), 0, "points");
  }
  for (std::size_t k = 0; pts.IsSequence() && k < pts.size(); ++k) {
    const auto xy = detail::as_numbers<double>(pts[k], "points[" + std::to_string(k) + "]", 2);
    spec.points.emplace_back(xy[0], xy[1]);
  }
  if (const YAML::Node c = doc["color"]) {
    const auto rgb = detail::as_numbers<int>(c, "color", 3);
    for (int v : rgb) {
      if (v < 0 || v > 255) throw ValidationError("path color components must lie in [0, 255]");
    }
    spec.color = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                  static_cast<std::uint8_t>(rgb[2])};
  }
  return spec;
}

namespace impl {

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const UnknownFrame& e) {
    err << "error: " << e.what() << "\n";
    return kUnknownFrame;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

inline ImageFormat format_for(const std::filesystem::path& out) {
  const std::string ext = out.extension().string();
  if (ext == ".ppm") return ImageFormat::ppm;
  if (ext == ".png") return ImageFormat::png;
  throw ValidationError("output must end in .ppm or .png: '" + out.string() + "'");
}

inline Intrinsics load_camera_info(const std::filesystem::path& path) {
  return parse_camera_info(projmap::detail::read_file(path));
}

inline FrameTree load_frames(const std::filesystem::path& path) {
  return parse_frame_tree(projmap::detail::read_file(path));
}

inline Scene load_scene_file(const std::filesystem::path& path) {
  return load_scene(projmap::detail::read_file(path), path.parent_path());
}

}  // namespace impl

inline int cmd_calibrate(const CalibrateArgs& args, std::ostream& err) {
  return impl::guarded(err, [&] {
    const auto m = parse_measurements(projmap::detail::read_file(args.measurements));
    const Intrinsics i = calibrate(m);
    projmap::detail::write_file(args.out, write_camera_info(i));
    return kOk;
  });
}

inline int cmd_render(const RenderArgs& args, std::ostream& err) {
  return impl::guarded(err, [&] {
    const ImageFormat fmt = impl::format_for(args.out);
    const Intrinsics i = impl::load_camera_info(args.camera_info);
    const FrameTree tree = impl::load_frames(args.frames);
    const Scene scene = impl::load_scene_file(args.scene);
    const ImageBuffer buf =
        render_scene(scene, tree, args.projector_frame, i, RenderOptions{args.splat_radius});
    projmap::detail::write_file(args.out, write_image(buf, fmt));
    return kOk;
  });
}

inline int cmd_path(const PathArgs& args, std::ostream& err) {
  return impl::guarded(err, [&] {
    const ImageFormat fmt = impl::format_for(args.out);
    const PathSpec spec = parse_path(projmap::detail::read_file(args.path));
    const std::optional<double> band = args.band_width ? args.band_width : spec.band_width;
    if (!band) throw ValidationError("band width not given (--band-width or band_width_m)");
    if (!(*band > 0)) throw ValidationError("band width must be positive");
    const std::string ground = args.ground_frame ? *args.ground_frame : spec.frame;
    if (ground.empty()) throw ValidationError("ground frame not given (--ground-frame or frame)");
    const Intrinsics i = impl::load_camera_info(args.camera_info);
    const FrameTree tree = impl::load_frames(args.frames);
    PathRenderStats stats;
    const ImageBuffer buf = render_path(spec.points, *band, spec.color, tree, ground,
                                        args.projector_frame, i,
                                        RenderOptions{args.splat_radius}, &stats);
    if (stats.degenerate_segments > 0) {
      err << "warning: skipped " << stats.degenerate_segments << " zero-length segment(s)\n";
    }
    projmap::detail::write_file(args.out, write_image(buf, fmt));
    return kOk;
  });
}

inline int cmd_verify(const VerifyArgs& args, std::ostream& err) {
  return impl::guarded(err, [&] {
    const Intrinsics i = impl::load_camera_info(args.camera_info);
    std::optional<Intrinsics> back;
    if (args.raycast_camera_info) back = impl::load_camera_info(*args.raycast_camera_info);
    const FrameTree tree = impl::load_frames(args.frames);
    const Scene scene = impl::load_scene_file(args.scene);
    const AlignmentReport report = verify_alignment(scene, tree, args.projector_frame, i, back);
    projmap::detail::write_file(args.report, to_json(report).dump(2) + "\n");
    if (!report.within_bound()) {
      err << "alignment error " << report.max_error << " m exceeds bound "
          << report.predicted_bound << " m\n";
      return kBoundViolated;
    }
    return kOk;
  });
}

}  // namespace projmap::cli
