#include "har/synth.hpp"

#include "har/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace har
{
namespace
{
using L = LandmarkId;

// Standing rest pose, meters; x toward the subject's left, y up, z forward.
std::array<Vec3, k_landmark_count> rest_pose()
{
   std::array<Vec3, k_landmark_count> p;
   p[index(L::Nose)]      = {0.00, 1.60, 0.05};
   p[index(L::LShoulder)] = {0.18, 1.42, 0.0};
   p[index(L::RShoulder)] = {-0.18, 1.42, 0.0};
   p[index(L::LElbow)]    = {0.22, 1.15, 0.0};
   p[index(L::RElbow)]    = {-0.22, 1.15, 0.0};
   p[index(L::LWrist)]    = {0.24, 0.90, 0.02};
   p[index(L::RWrist)]    = {-0.24, 0.90, 0.02};
   p[index(L::LHip)]      = {0.10, 0.95, 0.0};
   p[index(L::RHip)]      = {-0.10, 0.95, 0.0};
   p[index(L::LKnee)]     = {0.11, 0.50, 0.02};
   p[index(L::RKnee)]     = {-0.11, 0.50, 0.02};
   p[index(L::LHeel)]     = {0.11, 0.05, -0.05};
   p[index(L::RHeel)]     = {-0.11, 0.05, -0.05};
   return p;
}

double smooth(double s) { return s * s * (3.0 - 2.0 * s); }

Vec3 lerp(const Vec3& a, const Vec3& b, double s) { return a + (b - a) * s; }

// rise over [0, 0.5], return over [0.5, 1]
double there_and_back(double s) { return smooth(s < 0.5 ? 2.0 * s : 2.0 - 2.0 * s); }

// Elbow between shoulder and wrist, bent outward/down by `bend`.
Vec3 elbow_for(const Vec3& shoulder, const Vec3& wrist, double side, double bend = 0.06)
{
   return 0.5 * (shoulder + wrist) + Vec3(side * bend, -bend, 0.0);
}

void place_arm(std::array<Vec3, k_landmark_count>& p, bool left, const Vec3& wrist)
{
   const L s = left ? L::LShoulder : L::RShoulder;
   const L e = left ? L::LElbow : L::RElbow;
   const L w = left ? L::LWrist : L::RWrist;
   p[index(w)] = wrist;
   p[index(e)] = elbow_for(p[index(s)], wrist, left ? 1.0 : -1.0);
}

void shift_upper_body(std::array<Vec3, k_landmark_count>& p, const Vec3& d)
{
   for(L id : {L::Nose, L::LShoulder, L::RShoulder, L::LElbow, L::RElbow, L::LWrist, L::RWrist, L::LHip, L::RHip})
      p[index(id)] += d;
}

std::array<Vec3, k_landmark_count> pose_at(const std::string& label, double s, double amp)
{
   auto p = rest_pose();
   if(label == "a1") { // right hand swipes right-to-left in front of the chest
      const double a  = smooth(s);
      const Vec3 from = {-0.55, 1.25, 0.30};
      const Vec3 to   = {0.40, 1.25, 0.30};
      place_arm(p, false, lerp(from, to, a) + Vec3(0.0, 0.08 * std::sin(std::numbers::pi * a), 0.1 * std::sin(std::numbers::pi * a)) * amp);
   } else if(label == "a6") { // both forearms fold across the chest
      const double a = smooth(std::min(1.0, 1.6 * s));
      place_arm(p, true, lerp(p[index(L::LWrist)], Vec3(-0.12, 1.28, 0.18), a));
      place_arm(p, false, lerp(p[index(L::RWrist)], Vec3(0.12, 1.24, 0.20), a));
   } else if(label == "a7") { // dip, then both hands push overhead
      const double dip  = there_and_back(std::min(1.0, 2.0 * s)) * 0.12 * amp;
      const double push = smooth(std::clamp(2.0 * s - 0.6, 0.0, 1.0));
      shift_upper_body(p, Vec3(0.0, -dip, 0.0));
      p[index(L::LKnee)] += Vec3(0.0, -0.5 * dip, 0.6 * dip);
      p[index(L::RKnee)] += Vec3(0.0, -0.5 * dip, 0.6 * dip);
      const Vec3 chest_l = {0.08, 1.20 - dip, 0.25}, chest_r = {-0.08, 1.20 - dip, 0.25};
      const Vec3 top_l = {0.08, 2.05, 0.20}, top_r = {-0.08, 2.05, 0.20};
      const double lift = smooth(std::min(1.0, 3.0 * s));
      place_arm(p, true, lerp(lerp(p[index(L::LWrist)], chest_l, lift), top_l, push));
      place_arm(p, false, lerp(lerp(p[index(L::RWrist)], chest_r, lift), top_r, push));
   } else if(label == "a9") { // right hand draws a clockwise circle facing the camera
      const double raise = smooth(std::min(1.0, 4.0 * s));
      const double phi   = 2.0 * std::numbers::pi * std::clamp((s - 0.2) / 0.8, 0.0, 1.0);
      const double r     = 0.22 * amp;
      const Vec3 center  = {-0.25, 1.30, 0.35};
      const Vec3 on_circle = center + Vec3(r * std::sin(phi), r * std::cos(phi), 0.0);
      place_arm(p, false, lerp(p[index(L::RWrist)], on_circle, raise));
   } else if(label == "a24") { // seated to standing
      const double a  = smooth(s);
      const double up = 1.0 - a;
      shift_upper_body(p, Vec3(0.0, -0.42 * up, 0.25 * up));
      p[index(L::LKnee)] += Vec3(0.0, -0.02 * up, 0.40 * up);
      p[index(L::RKnee)] += Vec3(0.0, -0.02 * up, 0.40 * up);
      // hands rest on the thighs, then swing down to the sides
      place_arm(p, true, lerp(Vec3(0.16, 0.62, 0.40), rest_pose()[index(L::LWrist)], a));
      place_arm(p, false, lerp(Vec3(-0.16, 0.62, 0.40), rest_pose()[index(L::RWrist)], a));
      p[index(L::Nose)] += Vec3(0.0, 0.0, 0.15 * std::sin(std::numbers::pi * a));
   } else if(label == "a27") { // right leg lunges forward and returns
      const double a = there_and_back(s) * amp;
      p[index(L::RHeel)] += Vec3(0.0, 0.0, 0.75 * a);
      p[index(L::RKnee)] += Vec3(0.0, -0.10 * a, 0.80 * a);
      p[index(L::LKnee)] += Vec3(0.0, -0.25 * a, -0.15 * a);
      shift_upper_body(p, Vec3(0.0, -0.32 * a, 0.30 * a));
      place_arm(p, true, p[index(L::LWrist)]);
      place_arm(p, false, p[index(L::RWrist)]);
   } else {
      fail(ErrorKind::Validation, "unknown synthetic class '" + label + "'");
   }
   return p;
}

} // namespace

const std::vector<std::string>& synth_classes()
{
   static const std::vector<std::string> classes = {"a1", "a6", "a7", "a9", "a24", "a27"};
   return classes;
}

PoseSequence synth_sequence(const std::string& label, std::mt19937_64& rng, const SynthConfig& cfg)
{
   std::uniform_real_distribution<double> u01(0.0, 1.0);
   std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
   auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

   const int frames   = cfg.min_frames + static_cast<int>(u01(rng) * (cfg.max_frames - cfg.min_frames + 1));
   const double scale = uniform(0.88, 1.12);
   const double amp   = uniform(0.85, 1.15);
   const double yaw   = uniform(-0.2, 0.2);
   const double lead  = uniform(0.0, 0.08); // idle fraction before the motion starts
   const Vec3 offset(uniform(-0.5, 0.5), 0.0, uniform(2.5, 4.0));
   const Eigen::Matrix3d rot = Eigen::AngleAxisd(std::numbers::pi + yaw, Vec3::UnitY()).toRotationMatrix();

   PoseSequence seq;
   seq.label = label;
   for(int f = 0; f < frames; ++f) {
      const double s = std::clamp((static_cast<double>(f) / (frames - 1) - lead) / (1.0 - lead), 0.0, 1.0);
      const auto p   = pose_at(label, s, amp);
      Skeleton3D sk;
      sk.timestamp = f / cfg.rate_hz;
      for(std::size_t i = 0; i < k_landmark_count; ++i) {
         // subject faces the camera: rotate about vertical, then place in front of it
         sk.points[i] = rot * (scale * p[i]) + offset;
         for(int c = 0; c < 3; ++c) sk.points[i][c] += noise(rng);
      }
      seq.frames.push_back(sk);
   }
   return seq;
}

std::vector<PoseSequence> generate_dataset(const SynthConfig& cfg)
{
   std::mt19937_64 rng(cfg.seed);
   std::vector<PoseSequence> out;
   for(const auto& label : synth_classes())
      for(int i = 0; i < cfg.sequences_per_class; ++i) {
         auto seq    = synth_sequence(label, rng, cfg);
         seq.subject = "s" + std::to_string(i % 8 + 1);
         seq.trial   = "t" + std::to_string(i / 8 + 1);
         out.push_back(std::move(seq));
      }
   return out;
}

PoseSequence noise_sequence(std::mt19937_64& rng, int frames, double rate_hz)
{
   std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(0.0, 1.8), uz(2.5, 3.5);
   PoseSequence seq;
   for(int f = 0; f < frames; ++f) {
      Skeleton3D sk;
      sk.timestamp = f / rate_hz;
      for(auto& p : sk.points) p = Vec3(ux(rng), uy(rng), uz(rng));
      seq.frames.push_back(sk);
   }
   return seq;
}

DatasetManifest write_dataset(const std::filesystem::path& dir, const std::vector<PoseSequence>& sequences)
{
   std::filesystem::create_directories(dir);
   std::vector<ManifestEntry> entries;
   for(std::size_t i = 0; i < sequences.size(); ++i) {
      const auto& s = sequences[i];
      if(!s.label) fail(ErrorKind::Validation, "synthetic sequence without label");
      const auto name = *s.label + "_" + s.subject.value_or("s0") + "_" + s.trial.value_or("t0") + "_"
                        + std::to_string(i) + ".ndjson";
      save_sequence(dir / name, s);
      entries.push_back({dir / name, *s.label, s.subject.value_or(""), s.trial.value_or("")});
   }
   auto manifest = make_manifest(std::move(entries));
   write_manifest(dir / "manifest.csv", manifest);
   return manifest;
}

} // namespace har
