#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "projmap/detail/yaml.hpp"
#include "projmap/errors.hpp"

namespace projmap {

using Vec3 = Eigen::Vector3d;

/// Rigid motion: rotation (unit quaternion) followed by translation.
/// Camera and projector frames use the optical convention: z forward along
/// the projection axis, x right, y down.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Eigen::Quaterniond::Identity()), translation_(Vec3::Zero()) {}

  /// The quaternion is normalized; a zero quaternion is rejected.
  RigidTransform(const Eigen::Quaterniond& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {
    const double n = rotation_.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw ValidationError("rotation quaternion must be finite and nonzero");
    }
    if (!translation_.allFinite()) {
      throw ValidationError("translation must be finite");
    }
    rotation_.coeffs() /= n;
  }

  static RigidTransform identity() { return {}; }

  static RigidTransform from_translation(const Vec3& t) {
    return {Eigen::Quaterniond::Identity(), t};
  }

  /// Rotation by `angle` radians about `axis` (need not be unit length).
  static RigidTransform from_axis_angle(const Vec3& axis, double angle,
                                        const Vec3& t = Vec3::Zero()) {
    return {Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())), t};
  }

  const Eigen::Quaterniond& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  Eigen::Matrix3d rotation_matrix() const { return rotation_.toRotationMatrix(); }

 private:
  Eigen::Quaterniond rotation_;
  Vec3 translation_;
};

/// `a ∘ b`: applies `b` first, then `a`.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation() * b.rotation(),
          a.rotation() * b.translation() + a.translation()};
}

inline RigidTransform invert(const RigidTransform& t) {
  const Eigen::Quaterniond inv = t.rotation().conjugate();
  return {inv, -(inv * t.translation())};
}

inline Vec3 transform_point(const RigidTransform& t, const Vec3& p) {
  return t.rotation() * p + t.translation();
}

/// Component-wise comparison; `q` and `-q` are treated as the same rotation.
inline bool approx_equal(const RigidTransform& a, const RigidTransform& b,
                         double tol) {
  const auto& qa = a.rotation().coeffs();
  const auto& qb = b.rotation().coeffs();
  const bool same = ((qa - qb).cwiseAbs().maxCoeff() <= tol) ||
                    ((qa + qb).cwiseAbs().maxCoeff() <= tol);
  return same &&
         (a.translation() - b.translation()).cwiseAbs().maxCoeff() <= tol;
}

/// One edge of a frame tree: pose of `child` expressed in `parent`.
struct FrameEdge {
  std::string child;
  std::string parent;
  RigidTransform parent_from_child;
};

/// Static tree of named frames. Immutable after construction.
class FrameTree {
 public:
  FrameTree() = default;

  /// Validates edges in input order; the first violation is reported.
  explicit FrameTree(std::vector<FrameEdge> edges) {
    if (edges.empty()) return;
    for (const auto& e : edges) {
      if (e.child.empty() || e.parent.empty()) {
        throw InvalidFrameTree("frame names must be non-empty");
      }
      if (e.child == e.parent) {
        throw InvalidFrameTree("frame '" + e.child + "' is its own parent");
      }
      if (!nodes_.emplace(e.child, Node{e.parent, e.parent_from_child, 0}).second) {
        throw InvalidFrameTree("duplicate frame '" + e.child + "'");
      }
    }
    std::vector<std::string> roots;
    for (const auto& e : edges) {
      if (!nodes_.count(e.parent) &&
          std::find(roots.begin(), roots.end(), e.parent) == roots.end()) {
        roots.push_back(e.parent);
      }
    }
    if (roots.empty()) {
      throw InvalidFrameTree("cycle detected: no root frame");
    }
    if (roots.size() > 1) {
      throw InvalidFrameTree("frames are not connected: roots '" + roots[0] +
                             "' and '" + roots[1] + "'");
    }
    root_ = roots.front();
    // Depth assignment doubles as cycle detection: a frame whose parent chain
    // never reaches the root is on (or hangs off) a cycle.
    for (const auto& e : edges) {
      std::vector<std::string> chain;
      std::string cur = e.child;
      while (cur != root_ && nodes_.at(cur).depth == 0) {
        if (std::find(chain.begin(), chain.end(), cur) != chain.end()) {
          throw InvalidFrameTree("cycle detected through frame '" + cur + "'");
        }
        chain.push_back(cur);
        cur = nodes_.at(cur).parent;
      }
      std::size_t depth = cur == root_ ? 0 : nodes_.at(cur).depth;
      for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        nodes_.at(*it).depth = ++depth;
      }
    }
  }

  const std::string& root() const noexcept { return root_; }

  bool contains(std::string_view name) const {
    return !root_.empty() && (name == root_ || nodes_.count(std::string(name)) > 0);
  }

  /// All frame names, root first, the rest sorted.
  std::vector<std::string> frames() const {
    std::vector<std::string> out;
    if (root_.empty()) return out;
    out.push_back(root_);
    for (const auto& [name, node] : nodes_) out.push_back(name);
    return out;
  }

  /// Parent of `name`; empty for the root.
  std::string parent(std::string_view name) const {
    require(name);
    if (name == root_) return {};
    return nodes_.at(std::string(name)).parent;
  }

  /// `target ← source`: maps coordinates expressed in `source` into `target`.
  ///
  /// Only the edges below the lowest common ancestor are composed, so edits
  /// above it leave the result bit-identical.
  RigidTransform lookup(std::string_view source, std::string_view target) const {
    require(source);
    require(target);
    std::string a(source), b(target);
    RigidTransform anc_from_a, anc_from_b;
    while (depth(a) > depth(b)) anc_from_a = climb(a, anc_from_a);
    while (depth(b) > depth(a)) anc_from_b = climb(b, anc_from_b);
    while (a != b) {
      anc_from_a = climb(a, anc_from_a);
      anc_from_b = climb(b, anc_from_b);
    }
    return compose(invert(anc_from_b), anc_from_a);
  }

 private:
  struct Node {
    std::string parent;
    RigidTransform parent_from_child;
    std::size_t depth;
  };

  void require(std::string_view name) const {
    if (!contains(name)) throw UnknownFrame(std::string(name));
  }

  std::size_t depth(const std::string& name) const {
    return name == root_ ? 0 : nodes_.at(name).depth;
  }

  // Moves `frame` one level up, extending `anc_from_frame` accordingly.
  RigidTransform climb(std::string& frame, const RigidTransform& anc_from_frame) const {
    const Node& n = nodes_.at(frame);
    frame = n.parent;
    return compose(n.parent_from_child, anc_from_frame);
  }

  std::string root_;
  std::map<std::string, Node> nodes_;
};

inline RigidTransform lookup(const FrameTree& tree, std::string_view source,
                             std::string_view target) {
  return tree.lookup(source, target);
}

/// Loads a frame tree from YAML: a list of
/// `{child, parent, translation: [x,y,z], rotation_wxyz: [w,x,y,z]}`.
inline FrameTree parse_frame_tree(std::string_view bytes) {
  const YAML::Node doc = detail::load_yaml(bytes);
  if (!doc || doc.IsNull()) return FrameTree{};
  if (!doc.IsSequence()) {
    throw ParseError("frame tree must be a list of entries", detail::line_of(doc));
  }
  std::vector<FrameEdge> edges;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const YAML::Node entry = doc[i];
    const std::string where = "[" + std::to_string(i) + "].";
    FrameEdge e;
    e.child = detail::as_string(detail::require(entry, "child"), where + "child");
    e.parent = detail::as_string(detail::require(entry, "parent"), where + "parent");
    const auto t = detail::as_numbers<double>(detail::require(entry, "translation"),
                                              where + "translation", 3);
    const auto q = detail::as_numbers<double>(detail::require(entry, "rotation_wxyz"),
                                              where + "rotation_wxyz", 4);
    try {
      e.parent_from_child =
          RigidTransform(Eigen::Quaterniond(q[0], q[1], q[2], q[3]), Vec3(t[0], t[1], t[2]));
    } catch (const ValidationError& err) {
      throw ParseError(err.what(), detail::line_of(entry), 0, where + "rotation_wxyz");
    }
    edges.push_back(std::move(e));
  }
  return FrameTree(std::move(edges));
}

}  // namespace projmap
