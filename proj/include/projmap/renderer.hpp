#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "projmap/camera_model.hpp"
#include "projmap/errors.hpp"
#include "projmap/pointcloud_io.hpp"
#include "projmap/transforms.hpp"

namespace projmap {

/// Points closer than this (projector-frame z, meters) are never drawn.
inline constexpr double kNearPlane = 0.01;
inline constexpr int kMaxSplatRadius = 32;

/// Framebuffer sent to the projector. Black pixels emit no light; every
/// black background pixel carries +infinity depth.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height)
      : width_(width),
        height_(height),
        rgb_(static_cast<std::size_t>(width) * height * 3, 0),
        depth_(static_cast<std::size_t>(width) * height,
               std::numeric_limits<double>::infinity()) {
    if (width <= 0 || height <= 0) throw DimensionMismatch("image size must be positive");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  Rgb color(int x, int y) const {
    const std::size_t k = index(x, y) * 3;
    return {rgb_[k], rgb_[k + 1], rgb_[k + 2]};
  }
  double depth(int x, int y) const { return depth_[index(x, y)]; }

  void set(int x, int y, Rgb c, double depth) {
    const std::size_t k = index(x, y);
    rgb_[3 * k] = c.r;
    rgb_[3 * k + 1] = c.g;
    rgb_[3 * k + 2] = c.b;
    depth_[k] = depth;
  }

  /// Row-major RGB bytes.
  const std::vector<std::uint8_t>& rgb() const noexcept { return rgb_; }
  const std::vector<double>& depths() const noexcept { return depth_; }

  std::size_t lit_pixels() const {
    return static_cast<std::size_t>(std::count_if(
        depth_.begin(), depth_.end(), [](double d) { return std::isfinite(d); }));
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> rgb_;
  std::vector<double> depth_;
};

struct RenderOptions {
  int splat_radius = 2;

  void validate() const {
    if (splat_radius < 0 || splat_radius > kMaxSplatRadius) {
      throw ValidationError("splat radius must lie in [0, " +
                            std::to_string(kMaxSplatRadius) + "]");
    }
  }
};

/// Pixel index lit by a continuous coordinate (pixel centers sit on integers).
inline double pixel_index(double coord) { return std::floor(coord + 0.5); }

namespace detail {

inline void check_target(const Intrinsics& i) {
  if (i.width <= 0 || i.height <= 0) {
    throw DimensionMismatch("intrinsics image size must be nonzero");
  }
  i.validate();
}

// Z-buffered point splatting. `owners`, when given, receives for each pixel
// the flattened scene index (cluster-major) of the winning point, or -1.
inline ImageBuffer splat_scene(const Scene& scene, const FrameTree& tree,
                               std::string_view projector_frame, const Intrinsics& i,
                               const RenderOptions& opts,
                               std::vector<std::int64_t>* owners = nullptr) {
  check_target(i);
  opts.validate();
  if (!tree.contains(projector_frame)) throw UnknownFrame(std::string(projector_frame));

  ImageBuffer buf(i.width, i.height);
  if (owners) owners->assign(static_cast<std::size_t>(i.width) * i.height, -1);
  const int r = opts.splat_radius;
  std::int64_t flat = 0;

  for (const auto& cluster : scene.clusters) {
    const RigidTransform proj_from_cloud = tree.lookup(cluster.cloud.frame, projector_frame);
    for (const auto& pf : cluster.cloud.points) {
      const std::int64_t id = flat++;
      const Vec3 p = transform_point(proj_from_cloud, pf.cast<double>());
      if (!(p.z() > kNearPlane)) continue;
      const Pixel uv = project_point(p, i);
      const double px = pixel_index(uv.u), py = pixel_index(uv.v);
      if (!(px >= 0 && px < i.width && py >= 0 && py < i.height)) continue;
      const int cx = static_cast<int>(px), cy = static_cast<int>(py);
      const int x0 = std::max(cx - r, 0), x1 = std::min(cx + r, i.width - 1);
      const int y0 = std::max(cy - r, 0), y1 = std::min(cy + r, i.height - 1);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          // Strict test: on equal depth the earlier point keeps the pixel.
          if (p.z() < buf.depth(x, y)) {
            buf.set(x, y, cluster.color, p.z());
            if (owners) (*owners)[static_cast<std::size_t>(y) * i.width + x] = id;
          }
        }
      }
    }
  }
  return buf;
}

struct ScreenVertex {
  std::int64_t x;  // subpixel fixed point
  std::int64_t y;
  double inv_z;
};

inline constexpr int kSubpixelBits = 8;
inline constexpr double kSubpixelScale = 1 << kSubpixelBits;
// Lateral clip planes sit this many pixels outside the image.
inline constexpr double kGuardBand = 2.0;

inline std::int64_t edge(const ScreenVertex& a, const ScreenVertex& b,
                         std::int64_t px, std::int64_t py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

// Edge classification for positive-area triangles (clockwise on screen, y down).
inline bool top_left(const ScreenVertex& a, const ScreenVertex& b) {
  const std::int64_t dx = b.x - a.x, dy = b.y - a.y;
  return dy < 0 || (dy == 0 && dx > 0);
}

// Clips an optical-frame polygon to the near plane and the guard-banded
// lateral frustum.
inline std::vector<Vec3> clip_polygon(std::vector<Vec3> poly, const Intrinsics& i) {
  const double g = kGuardBand;
  const std::array<Eigen::Vector4d, 5> planes = {
      Eigen::Vector4d(0, 0, 1, -kNearPlane),
      Eigen::Vector4d(i.fx, 0, i.cx + g, 0),
      Eigen::Vector4d(-i.fx, 0, (i.width - 1) + g - i.cx, 0),
      Eigen::Vector4d(0, i.fy, i.cy + g, 0),
      Eigen::Vector4d(0, -i.fy, (i.height - 1) + g - i.cy, 0),
  };
  for (const auto& pl : planes) {
    if (poly.empty()) break;
    std::vector<Vec3> out;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Vec3& a = poly[k];
      const Vec3& b = poly[(k + 1) % poly.size()];
      const double sa = pl.head<3>().dot(a) + pl[3];
      const double sb = pl.head<3>().dot(b) + pl[3];
      if (sa >= 0) out.push_back(a);
      if ((sa >= 0) != (sb >= 0)) {
        const double t = sa / (sa - sb);
        out.push_back(a + t * (b - a));
      }
    }
    poly = std::move(out);
  }
  return poly;
}

// Fills pixels whose centers lie strictly inside the triangle; centers on an
// edge belong to the triangle only for top and left edges.
inline void fill_triangle(ImageBuffer& buf, ScreenVertex a, ScreenVertex b, ScreenVertex c,
                          Rgb color) {
  std::int64_t area = edge(a, b, c.x, c.y);
  if (area == 0) return;
  if (area < 0) {
    std::swap(b, c);
    area = -area;
  }
  const auto S = static_cast<std::int64_t>(kSubpixelScale);
  auto ceil_div = [S](std::int64_t v) { return v >= 0 ? (v + S - 1) / S : -((-v) / S); };
  auto floor_div = [S](std::int64_t v) { return v >= 0 ? v / S : -((-v + S - 1) / S); };
  const std::int64_t xmin = std::max<std::int64_t>(ceil_div(std::min({a.x, b.x, c.x})), 0);
  const std::int64_t xmax = std::min<std::int64_t>(floor_div(std::max({a.x, b.x, c.x})), buf.width() - 1);
  const std::int64_t ymin = std::max<std::int64_t>(ceil_div(std::min({a.y, b.y, c.y})), 0);
  const std::int64_t ymax = std::min<std::int64_t>(floor_div(std::max({a.y, b.y, c.y})), buf.height() - 1);

  const bool tl_bc = top_left(b, c), tl_ca = top_left(c, a), tl_ab = top_left(a, b);
  const double inv_area = 1.0 / static_cast<double>(area);
  for (std::int64_t y = ymin; y <= ymax; ++y) {
    for (std::int64_t x = xmin; x <= xmax; ++x) {
      const std::int64_t sx = x * S, sy = y * S;
      const std::int64_t w0 = edge(b, c, sx, sy);
      const std::int64_t w1 = edge(c, a, sx, sy);
      const std::int64_t w2 = edge(a, b, sx, sy);
      if (w0 < 0 || w1 < 0 || w2 < 0) continue;
      if ((w0 == 0 && !tl_bc) || (w1 == 0 && !tl_ca) || (w2 == 0 && !tl_ab)) continue;
      // 1/z is affine in screen space.
      const double inv_z = (static_cast<double>(w0) * a.inv_z + static_cast<double>(w1) * b.inv_z +
                            static_cast<double>(w2) * c.inv_z) * inv_area;
      const double z = 1.0 / inv_z;
      const int ix = static_cast<int>(x), iy = static_cast<int>(y);
      if (z < buf.depth(ix, iy)) buf.set(ix, iy, color, z);
    }
  }
}

inline ScreenVertex to_screen(const Vec3& p, const Intrinsics& i) {
  const Pixel uv = project_point(p, i);
  return {std::llround(uv.u * kSubpixelScale), std::llround(uv.v * kSubpixelScale), 1.0 / p.z()};
}

/// Rasterizes an optical-frame triangle into `buf` with the shared z-buffer.
inline void draw_triangle(ImageBuffer& buf, const Vec3& a, const Vec3& b, const Vec3& c,
                          const Intrinsics& i, Rgb color) {
  const auto poly = clip_polygon({a, b, c}, i);
  if (poly.size() < 3) return;
  const ScreenVertex s0 = to_screen(poly[0], i);
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    fill_triangle(buf, s0, to_screen(poly[k], i), to_screen(poly[k + 1], i), color);
  }
}

}  // namespace detail

/// Renders the scene as seen from `projector_frame` with intrinsics `i`.
/// Each point becomes a square splat centered on its rounded pixel; nearest
/// depth wins, ties keep the earlier cluster and lower point index.
inline ImageBuffer render_scene(const Scene& scene, const FrameTree& tree,
                                std::string_view projector_frame, const Intrinsics& i,
                                const RenderOptions& opts = {}) {
  return detail::splat_scene(scene, tree, projector_frame, i, opts);
}

using Point2 = Eigen::Vector2d;

struct PathRenderStats {
  std::size_t segments = 0;
  std::size_t degenerate_segments = 0;
};

/// Renders a ground-plane polyline as a band of `band_width` meters. The
/// polyline lives in the z = 0 plane of `ground_frame`.
inline ImageBuffer render_path(const std::vector<Point2>& path, double band_width, Rgb color,
                               const FrameTree& tree, std::string_view ground_frame,
                               std::string_view projector_frame, const Intrinsics& i,
                               const RenderOptions& opts = {},
                               PathRenderStats* stats = nullptr) {
  detail::check_target(i);
  opts.validate();
  if (!(band_width > 0) || !std::isfinite(band_width)) {
    throw ValidationError("band width must be positive");
  }
  const RigidTransform proj_from_ground = tree.lookup(ground_frame, projector_frame);

  ImageBuffer buf(i.width, i.height);
  PathRenderStats local;
  const double half = band_width / 2;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const Point2 a = path[k], b = path[k + 1];
    const double len = (b - a).norm();
    if (!(len > 0)) {
      ++local.degenerate_segments;
      continue;
    }
    ++local.segments;
    const Point2 d = (b - a) / len;
    const Point2 n(-d.y(), d.x());
    auto lift = [&](const Point2& q) {
      return transform_point(proj_from_ground, Vec3(q.x(), q.y(), 0.0));
    };
    const Vec3 a_l = lift(a + half * n), a_r = lift(a - half * n);
    const Vec3 b_l = lift(b + half * n), b_r = lift(b - half * n);
    detail::draw_triangle(buf, a_l, a_r, b_r, i, color);
    detail::draw_triangle(buf, a_l, b_r, b_l, i, color);
  }
  if (stats) *stats = local;
  return buf;
}

enum class ImageFormat { ppm, png };

inline std::string write_ppm(const ImageBuffer& buf) {
  std::string out = "P6\n" + std::to_string(buf.width()) + " " +
                    std::to_string(buf.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(buf.rgb().data()), buf.rgb().size());
  return out;
}

inline std::string write_png(const ImageBuffer& buf) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(buf.width());
  image.height = static_cast<png_uint_32>(buf.height());
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, buf.rgb().data(), 0, nullptr)) {
    throw Error(std::string("PNG encoding failed: ") + image.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, buf.rgb().data(), 0, nullptr)) {
    throw Error(std::string("PNG encoding failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

inline std::string write_image(const ImageBuffer& buf, ImageFormat format) {
  return format == ImageFormat::ppm ? write_ppm(buf) : write_png(buf);
}

/// Decoded color planes; depth is not stored in image files.
struct DecodedImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};

/// Reads the canonical P6 layout produced by `write_ppm`.
inline DecodedImage decode_ppm(std::string_view bytes) {
  auto tokens_end = [&](std::size_t pos, int count, std::vector<std::string_view>& out) {
    for (int k = 0; k < count; ++k) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      const std::size_t start = pos;
      while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      out.push_back(bytes.substr(start, pos - start));
    }
    return pos;
  };
  std::vector<std::string_view> header;
  std::size_t pos = tokens_end(0, 4, header);
  if (header[0] != "P6") throw ParseError("not a P6 image", 1);
  const auto w = detail::parse_number<int>(header[1]);
  const auto h = detail::parse_number<int>(header[2]);
  if (!w || !h || *w <= 0 || *h <= 0 || header[3] != "255") {
    throw ParseError("invalid PPM header", 1);
  }
  ++pos;  // single whitespace byte before the raster
  const std::size_t n = static_cast<std::size_t>(*w) * *h * 3;
  if (pos > bytes.size() || bytes.size() - pos != n) {
    throw ParseError("PPM raster size mismatch", 0, pos);
  }
  DecodedImage img{*w, *h, std::vector<std::uint8_t>(bytes.begin() + pos, bytes.end())};
  return img;
}

inline DecodedImage decode_png(std::string_view bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw ParseError(std::string("invalid PNG: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  DecodedImage img{static_cast<int>(image.width), static_cast<int>(image.height), {}};
  img.rgb.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, img.rgb.data(), 0, nullptr)) {
    png_image_free(&image);
    throw ParseError(std::string("invalid PNG: ") + image.message);
  }
  return img;
}

}  // namespace projmap
