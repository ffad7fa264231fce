#include "../oracles.hpp"
#include "har/embedding.hpp"
#include "har/errors.hpp"

#include <doctest.h>

#include <numbers>

using namespace har;

namespace
{
std::size_t slot(const std::vector<std::string>& names, const std::string& name)
{
   const auto it = std::find(names.begin(), names.end(), name);
   REQUIRE(it != names.end());
   return static_cast<std::size_t>(it - names.begin());
}

Vec3 read3(const Eigen::VectorXd& v, std::size_t at)
{
   return {v(static_cast<Eigen::Index>(at)), v(static_cast<Eigen::Index>(at + 1)), v(static_cast<Eigen::Index>(at + 2))};
}

PoseSequence constant_sequence(int n)
{
   std::mt19937_64 rng(1);
   const auto p = oracle::random_pose(rng);
   PoseSequence s;
   for(int i = 0; i < n; ++i) {
      auto f      = p;
      f.timestamp = i / 30.0;
      s.frames.push_back(f);
   }
   return s;
}
} // namespace

TEST_CASE("embedding: default layout length")
{
   const auto cfg = EmbeddingConfig::defaults();
   // independent count: 13 landmarks x 7 kinds, C(13,2) pairs x 6 kinds, 8 chains x 3 kinds, 3 values each
   std::size_t pairs = 0;
   for(int i = 0; i < 13; ++i)
      for(int j = i + 1; j < 13; ++j) ++pairs;
   const std::size_t expected = 13 * 7 * 3 + pairs * 6 * 3 + 8 * 3 * 3;
   CHECK(expected == 1749);
   CHECK(cfg.feature_length() == expected);
   CHECK(cfg.layout_names().size() == expected);
   CHECK(cfg.layout_names()[0] == "single.Nose.position.x");

   auto only_singles      = cfg;
   only_singles.use_pairs = only_singles.use_triples = false;
   CHECK(only_singles.feature_length() == 273);
   CHECK(only_singles.layout_version() != cfg.layout_version());
   CHECK(cfg.layout_version() == EmbeddingConfig::defaults().layout_version());
}

TEST_CASE("embedding: tri-joint right angle")
{
   const auto t = tri_joint_angle({0, 0, 0}, {1, 0, 0}, {1, 1, 0});
   CHECK(std::abs(t.theta - std::numbers::pi / 2) < 1e-9);
   CHECK((t.unit_normal - Vec3(0, 0, 1)).norm() < 1e-9);
   CHECK((t.theta_normal - Vec3(0, 0, std::numbers::pi / 2)).norm() < 1e-9);

   const auto line = tri_joint_angle({0, 0, 0}, {1, 0, 0}, {2, 0, 0});
   CHECK(line.theta_normal.norm() == 0.0);
   CHECK(std::isfinite(line.theta));
}

TEST_CASE("embedding: axis angles")
{
   const double h = std::numbers::pi / 2;
   CHECK((axis_angles({0, 1, 0}) - Vec3(h, 0, h)).norm() < 1e-9);
   CHECK((axis_angles({1, 0, 0}) - Vec3(0, h, h)).norm() < 1e-9);
   CHECK((axis_angles({0, 0, 2}) - Vec3(h, h, 0)).norm() < 1e-9);
   CHECK((axis_angles({-1, 0, 0}) - Vec3(std::numbers::pi, h, h)).norm() < 1e-9);
   CHECK(axis_angles(Vec3::Zero()).norm() == 0.0);
}

TEST_CASE("embedding: velocity arithmetic")
{
   const auto cfg   = EmbeddingConfig::defaults();
   const auto names = cfg.layout_names();
   Skeleton3D a;
   a.visibility.fill(1);
   for(std::size_t i = 0; i < k_landmark_count; ++i) a.points[i] = Vec3(0.1 * double(i), 1, 0);
   auto b      = a;
   b.timestamp = 0.1;
   b[LandmarkId::LWrist] += Vec3(0.3, 0, 0);
   const auto r0 = embed_frame(a, FrameHistory{}, cfg);
   const auto r1 = embed_frame(b, r0.history, cfg);
   const auto v  = read3(r1.frame.values, slot(names, "single.LWrist.velocity.x"));
   CHECK((v - Vec3(3, 0, 0)).norm() < 1e-9);
   const auto d = read3(r1.frame.values, slot(names, "single.LWrist.displacement.x"));
   CHECK((d - Vec3(0.3, 0, 0)).norm() < 1e-9);
   // first frame derivatives are zero
   CHECK(read3(r0.frame.values, slot(names, "single.LWrist.velocity.x")).norm() == 0.0);
   // acceleration still zero on the second frame
   CHECK(read3(r1.frame.values, slot(names, "single.LWrist.acceleration.x")).norm() == 0.0);

   auto stale = b;
   stale.timestamp = 0.0;
   try {
      embed_frame(stale, r0.history, cfg);
      FAIL("expected throw");
   } catch(const Error& e) {
      CHECK(e.kind() == ErrorKind::NonMonotonicTime);
   }
}

TEST_CASE("embedding: constant pose has zero derivative features")
{
   const auto cfg   = EmbeddingConfig::defaults();
   const auto names = cfg.layout_names();
   const auto seq   = embed_sequence(constant_sequence(6), cfg);
   REQUIRE(seq.frames() == 6);
   for(std::size_t i = 0; i < names.size(); ++i) {
      const bool derivative = names[i].find("velocity") != std::string::npos ||
                              names[i].find("acceleration") != std::string::npos ||
                              names[i].find("displacement") != std::string::npos;
      if(!derivative) continue;
      for(Eigen::Index f = 0; f < seq.frames(); ++f) CHECK(seq.values(static_cast<Eigen::Index>(i), f) == 0.0);
   }
}

TEST_CASE("embedding: circular motion recovers speed and centripetal acceleration")
{
   const double radius = 0.4, omega = 2 * std::numbers::pi * 0.5, rate = 30.0;
   const auto cfg   = EmbeddingConfig::defaults();
   const auto names = cfg.layout_names();
   auto seq         = constant_sequence(60);
   for(std::size_t i = 0; i < seq.frames.size(); ++i) {
      const double t               = seq.frames[i].timestamp = static_cast<double>(i) / rate;
      seq.frames[i][LandmarkId::RWrist] = Vec3(radius * std::cos(omega * t), radius * std::sin(omega * t), 0.5);
   }
   const auto f  = embed_sequence(seq, cfg);
   const auto vi = slot(names, "single.RWrist.velocity.x");
   const auto ai = slot(names, "single.RWrist.acceleration.x");
   for(Eigen::Index k = 2; k < f.frames(); ++k) {
      const Eigen::VectorXd col = f.values.col(k);
      CHECK(std::abs(read3(col, vi).norm() / (radius * omega) - 1) < 0.05);
      CHECK(std::abs(read3(col, ai).norm() / (radius * omega * omega) - 1) < 0.05);
   }
}

TEST_CASE("embedding: scaling")
{
   std::mt19937_64 rng(2);
   std::normal_distribution<double> nd(0, 3);
   std::vector<FeatureFrame> frames(100);
   for(auto& f : frames) {
      f.values.resize(5);
      for(auto& v : f.values) v = nd(rng);
      f.layout = "L";
   }
   const auto stats = fit_scaling(frames);
   for(Eigen::Index d = 0; d < 5; ++d) {
      double lo = 1e300, hi = -1e300;
      for(const auto& f : frames) {
         lo = std::min(lo, f.values(d));
         hi = std::max(hi, f.values(d));
      }
      CHECK(stats.min(d) == lo);
      CHECK(stats.max(d) == hi);
   }
   for(const auto& f : frames) {
      const auto s = apply_scaling(f, stats);
      CHECK(s.values.cwiseAbs().maxCoeff() <= 1.0);
   }

   ScalingStats st;
   st.min    = Eigen::Vector3d(-2, -3, 0);
   st.max    = Eigen::Vector3d(4, 3, 0);
   st.layout = "L";
   FeatureFrame x;
   x.layout = "L";
   x.values = Eigen::Vector3d(2, 3, 0);
   const auto y = apply_scaling(x, st);
   CHECK(y.values(0) == doctest::Approx(0.5));
   CHECK(y.values(1) == doctest::Approx(1.0));
   CHECK(y.values(2) == 0.0);
   x.values = Eigen::Vector3d(100, -100, 0);
   CHECK(apply_scaling(x, st).values(0) == 1.5);
   CHECK(apply_scaling(x, st).values(1) == -1.5);
   x.layout = "M";
   CHECK_THROWS_AS(apply_scaling(x, st), Error);
   CHECK_THROWS_AS(fit_scaling(std::span<const FeatureFrame>{}), Error);
}
