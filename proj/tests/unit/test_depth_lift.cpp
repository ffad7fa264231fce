#include "../oracles.hpp"
#include "har/depth_lift.hpp"
#include "har/errors.hpp"

#include <doctest.h>

#include <sstream>

using namespace har;

namespace
{
DepthPatch uniform_patch(int size, std::uint16_t mm)
{
   return {size, std::vector<std::uint16_t>(static_cast<std::size_t>(size * size), mm)};
}

RawFrame flat_frame(std::uint16_t mm)
{
   RawFrame f;
   f.timestamp         = 0.5;
   f.pixel_pitch_at_1m = 1.5;
   f.cx                = 320;
   f.cy                = 240;
   for(std::size_t i = 0; i < k_landmark_count; ++i) {
      f.landmarks[i] = {320.0 + 10.0 * double(i), 240.0 - 5.0 * double(i), 0.9};
      f.patches[i]   = uniform_patch(21, mm);
   }
   f.torso_samples.assign(40, mm);
   return f;
}
} // namespace

TEST_CASE("depth: subject distance from the torso")
{
   LiftConfig cfg;
   const std::vector<std::uint16_t> s{800, 820, 840, 900, 2500, 2600, 0, 0};
   CHECK(estimate_subject_distance(s, cfg) == doctest::Approx(0.810));
   CHECK(estimate_subject_distance(s, cfg) == doctest::Approx(oracle::quartile_mean(s, 0.25) / 1000));
   CHECK(estimate_subject_distance(std::vector<std::uint16_t>(10, 1000), cfg) == doctest::Approx(1.0));
   try {
      estimate_subject_distance(std::vector<std::uint16_t>{500, 0, 0}, cfg);
      FAIL("expected throw");
   } catch(const Error& e) {
      CHECK(e.kind() == ErrorKind::InsufficientDepth);
   }
   std::mt19937_64 rng(3);
   std::uniform_int_distribution<int> d(0, 5000);
   for(int t = 0; t < 50; ++t) {
      std::vector<std::uint16_t> v(20 + t);
      for(auto& x : v) x = static_cast<std::uint16_t>(d(rng) < 500 ? 0 : d(rng));
      CHECK(estimate_subject_distance(v, cfg) * 1000 == doctest::Approx(oracle::quartile_mean(v, 0.25)));
   }
}

TEST_CASE("depth: window size")
{
   LiftConfig cfg;
   CHECK(window_size_px(1.0, 1.5, 61, cfg) == 61);
   CHECK(window_size_px(1.0, 1.5, 21, cfg) == 21);
   CHECK(window_size_px(6.0, 1.5, 21, cfg) == 11);
   CHECK(window_size_px(100.0, 1.5, 21, cfg) == 3);
   int prev = 1 << 20;
   for(double d = 0.3; d < 20; d += 0.1) {
      const int w = window_size_px(d, 1.5, 61, cfg);
      CHECK(w % 2 == 1);
      CHECK(w <= prev);
      prev = w;
   }
}

TEST_CASE("depth: landmark depth rules")
{
   LiftConfig cfg;
   CHECK(landmark_depth(uniform_patch(21, 2000), 11, 2.0, cfg).z_m == doctest::Approx(2.0));

   // left half subject, right half background
   auto p = uniform_patch(21, 1000);
   for(int r = 0; r < 21; ++r)
      for(int c = 11; c < 21; ++c) p.depth_mm[static_cast<std::size_t>(r * 21 + c)] = 4000;
   const auto z = landmark_depth(p, 21, 1.0, cfg);
   CHECK(z.z_m == doctest::Approx(1.0));
   CHECK_FALSE(z.missing);

   const auto none = landmark_depth(uniform_patch(21, 0), 11, 1.7, cfg);
   CHECK(none.missing);
   CHECK(none.z_m == doctest::Approx(1.7));

   // adding background never moves z; z never exceeds the in-window mean
   std::mt19937_64 rng(2);
   std::uniform_int_distribution<int> near(900, 1300);
   for(int t = 0; t < 20; ++t) {
      auto q = uniform_patch(21, 0);
      for(auto& x : q.depth_mm) x = static_cast<std::uint16_t>(near(rng));
      std::vector<std::size_t> holes;
      for(int k = 0; k < 30; ++k) holes.push_back(static_cast<std::size_t>(rng() % q.depth_mm.size()));
      for(auto h : holes) q.depth_mm[h] = 0;
      const double base = landmark_depth(q, 11, 1.0, cfg).z_m;
      double mean       = 0;
      int n             = 0;
      for(int r = 5; r < 16; ++r)
         for(int c = 5; c < 16; ++c)
            if(q.at(r, c) > 0) {
               mean += q.at(r, c);
               ++n;
            }
      CHECK(base <= mean / n / 1000 + 1e-12);
      for(auto h : holes) q.depth_mm[h] = 9000;
      CHECK(landmark_depth(q, 11, 1.0, cfg).z_m == base);
   }
}

TEST_CASE("depth: lift a frame")
{
   const auto f = flat_frame(2000);
   const auto s = lift_frame(f, LiftConfig{});
   CHECK(s.timestamp == 0.5);
   for(std::size_t i = 0; i < k_landmark_count; ++i) {
      CHECK(s.points[i].z() == doctest::Approx(2.0));
      // 1.5 mm per px at 1 m -> 3 mm per px at 2 m; image y grows downward
      CHECK(s.points[i].x() == doctest::Approx(10.0 * double(i) * 0.003));
      CHECK(s.points[i].y() == doctest::Approx(5.0 * double(i) * 0.003));
      CHECK(s.visibility[i] == 0.9);
   }
   auto g       = flat_frame(2000);
   g.patches[3] = uniform_patch(21, 0);
   const auto t = lift_frame(g, LiftConfig{});
   CHECK(t.visibility[3] == 0.0);
   CHECK(t.points[3].z() == doctest::Approx(2.0));
}

TEST_CASE("depth: RawFrame stream round trip")
{
   StreamHeader h;
   h.pixel_pitch_at_1m = 1.5;
   h.cx                = 320;
   h.cy                = 240;
   h.patch_size        = 21;
   auto f              = flat_frame(1500);
   f.torso_samples     = {1400, 1500, 0, 1600, 1550};
   std::stringstream ss;
   ss << header_to_json_line(h) << '\n' << raw_frame_to_json_line(f) << '\n' << raw_frame_to_json_line(f) << '\n';
   RawFrameReader reader(ss);
   CHECK(reader.header().cx == 320);
   RawFrame g;
   int n = 0;
   while(reader.next(g)) {
      ++n;
      CHECK(g.timestamp == f.timestamp);
      CHECK(g.torso_samples == f.torso_samples);
      CHECK(g.patches[5].depth_mm == f.patches[5].depth_mm);
      CHECK(g.landmarks[7].x_px == f.landmarks[7].x_px);
      CHECK(g.pixel_pitch_at_1m == 1.5);
      CHECK(g.cy == 240);
   }
   CHECK(n == 2);

   std::stringstream no_header;
   no_header << raw_frame_to_json_line(f) << '\n';
   CHECK_THROWS_AS(RawFrameReader{no_header}, Error);
}
