#pragma once

#include <Eigen/Core>

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "projmap/detail/text.hpp"
#include "projmap/detail/yaml.hpp"
#include "projmap/errors.hpp"

namespace projmap {

using Point3f = Eigen::Vector3f;

/// Points in meters, stored as float32 exactly as they appear in PCD files.
struct PointCloud {
  std::vector<Point3f> points;
  std::string frame;

  void validate() const {
    if (frame.empty()) throw ValidationError("point cloud frame must be non-empty");
    for (const auto& p : points) {
      if (!p.allFinite()) throw ValidationError("point cloud has non-finite coordinates");
    }
  }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Cluster {
  PointCloud cloud;
  Rgb color;
  std::string label;
};

/// Perception output to externalize; clusters render in list order.
struct Scene {
  std::vector<Cluster> clusters;

  void validate() const {
    std::set<std::string> labels;
    for (const auto& c : clusters) {
      c.cloud.validate();
      if (!labels.insert(c.label).second) {
        throw ValidationError("duplicate cluster label '" + c.label + "'");
      }
    }
  }

  std::size_t point_count() const {
    std::size_t n = 0;
    for (const auto& c : clusters) n += c.cloud.points.size();
    return n;
  }
};

enum class PcdEncoding { ascii, binary };

struct PcdStats {
  std::size_t declared_points = 0;
  std::size_t dropped_nan = 0;
};

namespace detail {

struct PcdField {
  std::string name;
  int size = 4;
  char type = 'F';
  int count = 1;
  std::size_t offset = 0;  // bytes, binary layout
  std::size_t column = 0;  // token index, ascii layout
};

inline float read_f32_le(const char* p) {
  std::uint32_t bits = 0;
  for (int k = 3; k >= 0; --k) {
    bits = (bits << 8) | static_cast<unsigned char>(p[k]);
  }
  return std::bit_cast<float>(bits);
}

inline void append_f32_le(std::string& out, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
}

}  // namespace detail

/// Parses a PCD v0.7 document (ascii or binary). Only the float32 x/y/z
/// fields are read; any other fields are skipped. Points with a NaN
/// coordinate are dropped and counted in `stats`.
inline PointCloud parse_pcd(std::string_view bytes, std::string frame,
                            PcdStats* stats = nullptr) {
  using detail::parse_number;
  using detail::split_ws;

  std::vector<detail::PcdField> fields;
  bool have_size = false, have_type = false, have_count = false;
  long long width = -1, height = -1, points = -1;
  std::string data_kind;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  auto header_error = [&](const std::string& why) -> ParseError {
    return ParseError(why, line_no);
  };
  auto parse_int = [&](std::string_view tok, const char* key) {
    auto v = parse_number<long long>(tok);
    if (!v || *v < 0) throw header_error(std::string("invalid ") + key + " value '" + std::string(tok) + "'");
    return *v;
  };

  while (data_kind.empty()) {
    if (pos >= bytes.size()) {
      ++line_no;
      throw header_error("header ended without a DATA line");
    }
    const std::size_t eol = bytes.find('\n', pos);
    const std::string_view line =
        bytes.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? bytes.size() : eol + 1;
    ++line_no;

    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    const std::string_view key = tokens.front();
    const std::vector<std::string_view> values(tokens.begin() + 1, tokens.end());

    if (key == "VERSION") {
      if (values.size() != 1 || (values[0] != "0.7" && values[0] != ".7")) {
        throw header_error("unsupported PCD version");
      }
    } else if (key == "FIELDS") {
      if (values.empty()) throw header_error("FIELDS is empty");
      fields.clear();
      for (auto v : values) fields.push_back({std::string(v)});
    } else if (key == "SIZE" || key == "TYPE" || key == "COUNT") {
      if (values.size() != fields.size()) {
        throw header_error(std::string(key) + " must list one entry per field (FIELDS first)");
      }
      for (std::size_t k = 0; k < values.size(); ++k) {
        if (key == "TYPE") {
          if (values[k].size() != 1 || std::string_view("FIU").find(values[k][0]) == std::string_view::npos) {
            throw header_error("invalid TYPE '" + std::string(values[k]) + "'");
          }
          fields[k].type = values[k][0];
        } else {
          const long long n = parse_int(values[k], key == "SIZE" ? "SIZE" : "COUNT");
          if (key == "SIZE") {
            if (n != 1 && n != 2 && n != 4 && n != 8) throw header_error("invalid SIZE");
            fields[k].size = static_cast<int>(n);
          } else {
            if (n < 1) throw header_error("COUNT must be positive");
            fields[k].count = static_cast<int>(n);
          }
        }
      }
      (key == "SIZE" ? have_size : key == "TYPE" ? have_type : have_count) = true;
    } else if (key == "WIDTH" || key == "HEIGHT" || key == "POINTS") {
      if (values.size() != 1) throw header_error(std::string(key) + " takes one value");
      const long long n = parse_int(values[0], std::string(key).c_str());
      (key == "WIDTH" ? width : key == "HEIGHT" ? height : points) = n;
    } else if (key == "VIEWPOINT") {
      if (values.size() != 7) throw header_error("VIEWPOINT takes seven values");
      for (auto v : values) {
        if (!parse_number<double>(v)) throw header_error("invalid VIEWPOINT value");
      }
    } else if (key == "DATA") {
      if (values.size() != 1) throw header_error("DATA takes one value");
      if (values[0] == "binary_compressed") {
        throw UnsupportedEncoding("binary_compressed PCD data is not supported");
      }
      if (values[0] != "ascii" && values[0] != "binary") {
        throw header_error("unknown DATA encoding '" + std::string(values[0]) + "'");
      }
      data_kind = std::string(values[0]);
    } else {
      throw header_error("unknown header key '" + std::string(key) + "'");
    }
  }

  if (fields.empty()) throw header_error("missing FIELDS");
  if (!have_size) throw header_error("missing SIZE");
  if (!have_type) throw header_error("missing TYPE");
  if (width < 0 || height < 0) throw header_error("missing WIDTH or HEIGHT");
  if (points < 0) points = width * height;
  if (width * height != points) throw header_error("WIDTH * HEIGHT does not match POINTS");
  (void)have_count;

  std::size_t point_bytes = 0, columns = 0;
  for (auto& f : fields) {
    f.offset = point_bytes;
    f.column = columns;
    point_bytes += static_cast<std::size_t>(f.size) * f.count;
    columns += f.count;
  }
  const detail::PcdField* xyz[3] = {nullptr, nullptr, nullptr};
  for (const auto& f : fields) {
    for (int a = 0; a < 3; ++a) {
      if (f.name == std::string(1, "xyz"[a])) {
        if (f.type != 'F' || f.size != 4 || f.count != 1) {
          throw header_error("field '" + f.name + "' must be a single float32");
        }
        xyz[a] = &f;
      }
    }
  }
  for (int a = 0; a < 3; ++a) {
    if (!xyz[a]) throw header_error(std::string("FIELDS lacks '") + "xyz"[a] + "'");
  }

  PointCloud cloud;
  cloud.frame = std::move(frame);
  cloud.points.reserve(static_cast<std::size_t>(points));
  PcdStats local;
  local.declared_points = static_cast<std::size_t>(points);

  auto accept = [&](float x, float y, float z, std::size_t line, std::size_t offset) {
    if (std::isnan(x) || std::isnan(y) || std::isnan(z)) {
      ++local.dropped_nan;
      return;
    }
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw ParseError("infinite coordinate", line, offset);
    }
    cloud.points.emplace_back(x, y, z);
  };

  if (data_kind == "ascii") {
    long long rows = 0;
    while (pos < bytes.size()) {
      const std::size_t eol = bytes.find('\n', pos);
      const std::string_view line =
          bytes.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
      pos = eol == std::string_view::npos ? bytes.size() : eol + 1;
      ++line_no;
      const auto tokens = split_ws(line);
      if (tokens.empty()) continue;
      if (rows == points) throw ParseError("more data rows than POINTS declares", line_no);
      if (tokens.size() != columns) {
        throw ParseError("expected " + std::to_string(columns) + " values, got " +
                             std::to_string(tokens.size()),
                         line_no);
      }
      float v[3];
      for (int a = 0; a < 3; ++a) {
        auto parsed = parse_number<float>(tokens[xyz[a]->column]);
        if (!parsed) {
          throw ParseError("invalid float '" + std::string(tokens[xyz[a]->column]) + "'", line_no);
        }
        v[a] = *parsed;
      }
      accept(v[0], v[1], v[2], line_no, 0);
      ++rows;
    }
    if (rows != points) {
      throw ParseError("POINTS declares " + std::to_string(points) + " but found " +
                           std::to_string(rows) + " data rows",
                       line_no);
    }
  } else {
    const std::size_t needed = static_cast<std::size_t>(points) * point_bytes;
    if (bytes.size() - pos < needed) {
      throw ParseError("binary payload truncated: need " + std::to_string(needed) +
                           " bytes, have " + std::to_string(bytes.size() - pos),
                       0, bytes.size());
    }
    for (long long n = 0; n < points; ++n) {
      const std::size_t base = pos + static_cast<std::size_t>(n) * point_bytes;
      accept(detail::read_f32_le(bytes.data() + base + xyz[0]->offset),
             detail::read_f32_le(bytes.data() + base + xyz[1]->offset),
             detail::read_f32_le(bytes.data() + base + xyz[2]->offset), 0, base);
    }
  }

  if (stats) *stats = local;
  return cloud;
}

/// Writes a PCD v0.7 document with x/y/z float32 fields.
inline std::string write_pcd(const PointCloud& pc, PcdEncoding encoding) {
  const std::string n = std::to_string(pc.points.size());
  std::string out =
      "# .PCD v0.7 - Point Cloud Data file format\n"
      "VERSION 0.7\n"
      "FIELDS x y z\n"
      "SIZE 4 4 4\n"
      "TYPE F F F\n"
      "COUNT 1 1 1\n"
      "WIDTH " + n + "\n"
      "HEIGHT 1\n"
      "VIEWPOINT 0 0 0 1 0 0 0\n"
      "POINTS " + n + "\n";
  if (encoding == PcdEncoding::ascii) {
    out += "DATA ascii\n";
    for (const auto& p : pc.points) {
      out += detail::shortest(p.x()) + ' ' + detail::shortest(p.y()) + ' ' +
             detail::shortest(p.z()) + '\n';
    }
  } else {
    out += "DATA binary\n";
    out.reserve(out.size() + 12 * pc.points.size());
    for (const auto& p : pc.points) {
      detail::append_f32_le(out, p.x());
      detail::append_f32_le(out, p.y());
      detail::append_f32_le(out, p.z());
    }
  }
  return out;
}

/// Loads a scene config: either a list of cluster entries or a mapping with
/// a `clusters` list. Entries are `{pcd, frame, color: [r,g,b], label}`;
/// relative `pcd` paths resolve against `base_dir`.
inline Scene load_scene(std::string_view config, const std::filesystem::path& base_dir) {
  const YAML::Node doc = detail::load_yaml(config);
  YAML::Node list;
  if (!doc || doc.IsNull()) {
    return Scene{};
  } else if (doc.IsSequence()) {
    list = doc;
  } else if (doc.IsMap()) {
    list = detail::require(doc, "clusters");
    if (list.IsNull()) return Scene{};
    if (!list.IsSequence()) throw ParseError("expected a list", detail::line_of(list), 0, "clusters");
  } else {
    throw ParseError("scene config must be a list or a mapping", detail::line_of(doc));
  }

  Scene scene;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const YAML::Node entry = list[i];
    const std::string where = "clusters[" + std::to_string(i) + "].";
    Cluster c;
    c.label = detail::as_string(detail::require(entry, "label"), where + "label");
    const std::string frame = detail::as_string(detail::require(entry, "frame"), where + "frame");
    if (frame.empty()) throw ValidationError(where + "frame must be non-empty");
    const auto rgb = detail::as_numbers<int>(detail::require(entry, "color"), where + "color", 3);
    for (int v : rgb) {
      if (v < 0 || v > 255) {
        throw ValidationError(where + "color components must lie in [0, 255]");
      }
    }
    c.color = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
               static_cast<std::uint8_t>(rgb[2])};
    std::filesystem::path pcd = detail::as_string(detail::require(entry, "pcd"), where + "pcd");
    if (pcd.is_relative()) pcd = base_dir / pcd;
    c.cloud = parse_pcd(detail::read_file(pcd), frame);
    scene.clusters.push_back(std::move(c));
  }
  scene.validate();
  return scene;
}

}  // namespace projmap
