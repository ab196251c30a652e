#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "projmap/transforms.hpp"
#include "test_support.hpp"

namespace projmap {
namespace {

constexpr double kTol = 1e-9;

// Plain 3x3 multiply, independent of Eigen's quaternion algebra.
using Mat = std::array<std::array<double, 3>, 3>;
Mat multiply(const Mat& a, const Mat& b) {
  Mat c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}
Mat rot_z(double angle) {
  return {{{std::cos(angle), -std::sin(angle), 0}, {std::sin(angle), std::cos(angle), 0}, {0, 0, 1}}};
}

void expect_matrix_near(const Eigen::Matrix3d& got, const Mat& want) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(got(i, j), want[i][j], kTol) << i << "," << j;
}

TEST(RigidTransform, QuaternionIsNormalized) {
  RigidTransform t(Eigen::Quaterniond(2, 0, 0, 2), Vec3(1, 2, 3));
  EXPECT_NEAR(t.rotation().norm(), 1.0, kTol);
  EXPECT_THROW(RigidTransform(Eigen::Quaterniond(0, 0, 0, 0), Vec3::Zero()), ValidationError);
}

TEST(Compose, IdentityIsNeutral) {
  const auto t = RigidTransform::from_axis_angle(Vec3(1, 2, 3), 0.7, Vec3(0.5, -1, 2));
  EXPECT_TRUE(approx_equal(compose(RigidTransform::identity(), t), t, kTol));
  EXPECT_TRUE(approx_equal(compose(t, RigidTransform::identity()), t, kTol));
}

TEST(Compose, WithInverseIsIdentity) {
  const auto t = RigidTransform::from_axis_angle(Vec3(-1, 0.2, 3), 2.1, Vec3(4, 5, -6));
  EXPECT_TRUE(approx_equal(compose(t, invert(t)), RigidTransform::identity(), kTol));
  EXPECT_TRUE(approx_equal(compose(invert(t), t), RigidTransform::identity(), kTol));
}

TEST(Compose, TwoQuarterTurnsMakeHalfTurn) {
  const auto quarter = RigidTransform::from_axis_angle(Vec3::UnitZ(), M_PI / 2);
  const Mat want = multiply(rot_z(M_PI / 2), rot_z(M_PI / 2));
  expect_matrix_near(compose(quarter, quarter).rotation_matrix(), want);
  expect_matrix_near(RigidTransform::from_axis_angle(Vec3::UnitZ(), M_PI).rotation_matrix(), want);
}

TEST(Compose, AppliesRightOperandFirst) {
  const auto rot = RigidTransform::from_axis_angle(Vec3::UnitZ(), M_PI / 2);
  const auto shift = RigidTransform::from_translation(Vec3(1, 0, 0));
  // Shift then rotate: (0,0,0) -> (1,0,0) -> (0,1,0).
  const Vec3 p = transform_point(compose(rot, shift), Vec3::Zero());
  EXPECT_NEAR(p.x(), 0, kTol);
  EXPECT_NEAR(p.y(), 1, kTol);
}

TEST(TransformPoint, Examples) {
  const Vec3 p = transform_point(RigidTransform::identity(), Vec3(1, 2, 3));
  EXPECT_EQ(p, Vec3(1, 2, 3));
  EXPECT_EQ(transform_point(RigidTransform::from_translation(Vec3(0, 0, 1)), Vec3::Zero()),
            Vec3(0, 0, 1));
  const Vec3 r = transform_point(RigidTransform::from_axis_angle(Vec3::UnitZ(), M_PI / 2),
                                 Vec3(1, 0, 0));
  const Mat m = rot_z(M_PI / 2);
  EXPECT_NEAR(r.x(), m[0][0], kTol);
  EXPECT_NEAR(r.y(), m[1][0], kTol);
  EXPECT_NEAR(r.z(), m[2][0], kTol);
  EXPECT_NEAR(r.y(), 1.0, kTol);
}

FrameTree chain_tree(const std::vector<RigidTransform>& edges) {
  // root -> p1 -> p2 -> ...
  std::vector<FrameEdge> list;
  std::string parent = "root";
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string child = "p" + std::to_string(k + 1);
    list.push_back({child, parent, edges[k]});
    parent = child;
  }
  return FrameTree(list);
}

TEST(Lookup, SelfIsIdentity) {
  const auto tree = chain_tree({RigidTransform::from_translation(Vec3(1, 2, 3))});
  EXPECT_TRUE(approx_equal(tree.lookup("p1", "p1"), RigidTransform::identity(), kTol));
  EXPECT_TRUE(approx_equal(tree.lookup("root", "root"), RigidTransform::identity(), kTol));
}

TEST(Lookup, ChainMatchesPathComposition) {
  std::mt19937_64 rng(7);
  const auto e1 = test::random_transform(rng);
  const auto e2 = test::random_transform(rng);
  const auto e3 = test::random_transform(rng);
  const auto tree = chain_tree({e1, e2, e3});

  // Oracle: root <- p2 is the product of the edge matrices along the path.
  const Eigen::Matrix4d want = test::to_matrix(e1) * test::to_matrix(e2);
  const Eigen::Matrix4d got = test::to_matrix(tree.lookup("p2", "root"));
  EXPECT_LT((got - want).cwiseAbs().maxCoeff(), kTol);

  const Eigen::Matrix4d want3 = test::to_matrix(e1) * test::to_matrix(e2) * test::to_matrix(e3);
  EXPECT_LT((test::to_matrix(tree.lookup("p3", "root")) - want3).cwiseAbs().maxCoeff(), kTol);
}

TEST(Lookup, InverseSymmetry) {
  std::mt19937_64 rng(11);
  const auto tree = chain_tree({test::random_transform(rng), test::random_transform(rng)});
  EXPECT_TRUE(approx_equal(tree.lookup("root", "p2"), invert(tree.lookup("p2", "root")), kTol));
}

TEST(Lookup, UnknownFrame) {
  const auto tree = chain_tree({RigidTransform::identity()});
  try {
    tree.lookup("p1", "ghost");
    FAIL() << "expected UnknownFrame";
  } catch (const UnknownFrame& e) {
    EXPECT_EQ(e.name(), "ghost");
  }
  EXPECT_THROW(FrameTree{}.lookup("a", "a"), UnknownFrame);
}

// Branching tree used by the property tests: world has children a and b,
// a has c and d, b has e.
FrameTree branching_tree(std::mt19937_64& rng) {
  return FrameTree({{"a", "world", test::random_transform(rng)},
                    {"b", "world", test::random_transform(rng)},
                    {"c", "a", test::random_transform(rng)},
                    {"d", "a", test::random_transform(rng)},
                    {"e", "b", test::random_transform(rng)}});
}

TEST(LookupProperty, ChainingThroughAnyIntermediateFrame) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto tree = branching_tree(rng);
    const auto names = tree.frames();
    for (const auto& a : names)
      for (const auto& b : names)
        for (const auto& c : names) {
          const auto direct = tree.lookup(a, c);
          const auto via = compose(tree.lookup(b, c), tree.lookup(a, b));
          EXPECT_TRUE(approx_equal(direct, via, kTol)) << a << " " << b << " " << c;
        }
  }
}

TEST(LookupProperty, PointRoundTrip) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coord(-5, 5);
  const auto tree = branching_tree(rng);
  const auto names = tree.frames();
  for (const auto& a : names)
    for (const auto& b : names) {
      const Vec3 p(coord(rng), coord(rng), coord(rng));
      const Vec3 back = transform_point(tree.lookup(b, a), transform_point(tree.lookup(a, b), p));
      EXPECT_LT((back - p).cwiseAbs().maxCoeff(), kTol);
    }
}

TEST(FrameTreeValidation, RejectsBadTrees) {
  const auto I = RigidTransform::identity();
  EXPECT_THROW(FrameTree({{"a", "root", I}, {"a", "root", I}}), InvalidFrameTree);
  EXPECT_THROW(FrameTree({{"", "root", I}}), InvalidFrameTree);
  EXPECT_THROW(FrameTree({{"a", "a", I}}), InvalidFrameTree);
  EXPECT_THROW(FrameTree({{"a", "b", I}, {"b", "a", I}}), InvalidFrameTree);
  EXPECT_THROW(FrameTree({{"a", "root", I}, {"b", "c", I}, {"c", "b", I}}), InvalidFrameTree);
  EXPECT_THROW(FrameTree({{"a", "root1", I}, {"b", "root2", I}}), InvalidFrameTree);
}

TEST(FrameTreeValidation, ErrorsAreDeterministic) {
  const auto I = RigidTransform::identity();
  const std::vector<FrameEdge> bad = {{"x", "root", I}, {"y", "z", I}, {"z", "y", I}};
  std::string first;
  for (int k = 0; k < 3; ++k) {
    try {
      FrameTree{bad};
      FAIL();
    } catch (const InvalidFrameTree& e) {
      if (k == 0) first = e.what();
      EXPECT_EQ(first, e.what());
    }
  }
}

TEST(FrameTreeYaml, ParsesAndNormalizes) {
  const auto tree = parse_frame_tree(R"(
- child: base
  parent: world
  translation: [1, 0, 0]
  rotation_wxyz: [2, 0, 0, 0]
- child: lens
  parent: base
  translation: [0, 0, 0.5]
  rotation_wxyz: [0.7071067811865476, 0, 0, 0.7071067811865476]
)");
  EXPECT_EQ(tree.root(), "world");
  EXPECT_EQ(tree.parent("lens"), "base");
  const auto t = tree.lookup("base", "world");
  EXPECT_NEAR(t.rotation().w(), 1.0, kTol);
  const Vec3 p = transform_point(tree.lookup("lens", "world"), Vec3(1, 0, 0));
  EXPECT_NEAR(p.x(), 1.0, kTol);
  EXPECT_NEAR(p.y(), 1.0, kTol);
  EXPECT_NEAR(p.z(), 0.5, kTol);
}

TEST(FrameTreeYaml, Errors) {
  EXPECT_THROW(parse_frame_tree("- child: a\n  parent: w\n  translation: [1, 2]\n  rotation_wxyz: [1,0,0,0]\n"),
               ParseError);
  EXPECT_THROW(parse_frame_tree("- child: a\n  translation: [1, 2, 3]\n  rotation_wxyz: [1,0,0,0]\n"),
               ParseError);
  EXPECT_THROW(parse_frame_tree("- child: a\n  parent: w\n  translation: [1, 2, 3]\n  rotation_wxyz: [0,0,0,0]\n"),
               ParseError);
  EXPECT_THROW(parse_frame_tree("- child: a\n  parent: a\n  translation: [1, 2, 3]\n  rotation_wxyz: [1,0,0,0]\n"),
               InvalidFrameTree);
  try {
    parse_frame_tree("- child: a\n  parent: w\n  translation: [1, x, 3]\n  rotation_wxyz: [1,0,0,0]\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.field(), "[0].translation[1]");
  }
}

}  // namespace
}  // namespace projmap
