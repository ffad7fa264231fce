#include "har/embedding.hpp"

#include "har/errors.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <set>

namespace har
{
namespace
{
constexpr std::array<const char*, 3> k_axes = {"x", "y", "z"};

Vec3 zero() { return Vec3::Zero(); }

std::uint64_t fnv1a(const std::string& s)
{
   std::uint64_t h = 1469598103934665603ull;
   for(unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
   }
   return h;
}

std::string describe(const EmbeddingConfig& cfg)
{
   std::string d = "s" + std::to_string(cfg.use_singles) + "p" + std::to_string(cfg.use_pairs) + "t"
                   + std::to_string(cfg.use_triples) + "|";
   if(cfg.use_pairs)
      for(const auto& [a, b] : cfg.pairs) d += std::to_string(index(a)) + "-" + std::to_string(index(b)) + ";";
   d += "|";
   if(cfg.use_triples)
      for(const auto& t : cfg.triples)
         d += std::to_string(index(t[0])) + "-" + std::to_string(index(t[1])) + "-" + std::to_string(index(t[2])) + ";";
   return d;
}

void put(Eigen::VectorXd& out, Eigen::Index& pos, const Vec3& v)
{
   out.segment<3>(pos) = v;
   pos += 3;
}

} // namespace

// -- Config -------------------------------------------------------------------

std::vector<LandmarkPair> EmbeddingConfig::all_pairs()
{
   std::vector<LandmarkPair> pairs;
   for(std::size_t j = 0; j < k_landmark_count; ++j)
      for(std::size_t k = j + 1; k < k_landmark_count; ++k)
         pairs.emplace_back(static_cast<LandmarkId>(j), static_cast<LandmarkId>(k));
   return pairs;
}

std::vector<LandmarkTriple> EmbeddingConfig::default_triples()
{
   using L = LandmarkId;
   return {
       {L::LShoulder, L::LElbow, L::LWrist}, {L::RShoulder, L::RElbow, L::RWrist},
       {L::LHip, L::LKnee, L::LHeel},        {L::RHip, L::RKnee, L::RHeel},
       {L::LElbow, L::LShoulder, L::LHip},   {L::RElbow, L::RShoulder, L::RHip},
       {L::LShoulder, L::LHip, L::LKnee},    {L::RShoulder, L::RHip, L::RKnee},
   };
}

EmbeddingConfig EmbeddingConfig::defaults()
{
   EmbeddingConfig cfg;
   cfg.pairs   = all_pairs();
   cfg.triples = default_triples();
   return cfg;
}

void EmbeddingConfig::validate() const
{
   std::set<std::pair<std::size_t, std::size_t>> seen;
   for(const auto& [a, b] : pairs) {
      if(a == b) fail(ErrorKind::Config, "pair repeats a landmark");
      const std::pair key{std::min(index(a), index(b)), std::max(index(a), index(b))};
      if(!seen.insert(key).second) fail(ErrorKind::Config, "pair listed twice");
   }
   for(const auto& t : triples)
      if(t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) fail(ErrorKind::Config, "triple repeats a landmark");
   if(feature_length() == 0) fail(ErrorKind::Config, "embedding has no features enabled");
}

std::size_t EmbeddingConfig::feature_length() const
{
   return (use_singles ? k_landmark_count * k_single_width : 0) + (use_pairs ? pairs.size() * k_pair_width : 0)
          + (use_triples ? triples.size() * k_triple_width : 0);
}

std::string EmbeddingConfig::layout_version() const
{
   char buf[32];
   std::snprintf(buf, sizeof(buf), "emb1-%016llx", static_cast<unsigned long long>(fnv1a(describe(*this))));
   return buf;
}

std::vector<std::string> EmbeddingConfig::layout_names() const
{
   std::vector<std::string> names;
   names.reserve(feature_length());
   auto add_group = [&](const std::string& prefix, std::initializer_list<const char*> kinds) {
      for(const char* kind : kinds)
         for(const char* axis : k_axes) names.push_back(prefix + "." + kind + "." + axis);
   };
   if(use_singles)
      for(std::size_t i = 0; i < k_landmark_count; ++i)
         add_group("single." + std::string(landmark_name(static_cast<LandmarkId>(i))),
                   {"position", "velocity", "acceleration", "axis_angle", "angular_velocity", "angular_acceleration",
                    "displacement"});
   if(use_pairs)
      for(const auto& [a, b] : pairs)
         add_group("pair." + std::string(landmark_name(a)) + "-" + std::string(landmark_name(b)),
                   {"vector", "velocity", "acceleration", "axis_angle", "angular_velocity", "angular_acceleration"});
   if(use_triples)
      for(const auto& t : triples)
         add_group("triple." + std::string(landmark_name(t[0])) + "-" + std::string(landmark_name(t[1])) + "-"
                       + std::string(landmark_name(t[2])),
                   {"theta_normal", "angular_velocity", "angular_acceleration"});
   return names;
}

// -- Geometry -----------------------------------------------------------------

Vec3 axis_angles(const Vec3& v) noexcept
{
   const double n = v.norm();
   if(n == 0.0) return Vec3::Zero();
   Vec3 out;
   for(int k = 0; k < 3; ++k) out[k] = std::acos(std::clamp(v[k] / n, -1.0, 1.0));
   return out;
}

TriJointAngle tri_joint_angle(const Vec3& a, const Vec3& b, const Vec3& c) noexcept
{
   const Vec3 ab     = b - a;
   const Vec3 bc     = c - b;
   const double nab  = ab.norm();
   const double nbc  = bc.norm();
   TriJointAngle out;
   if(nab == 0.0 || nbc == 0.0) return out;
   out.theta      = std::acos(std::clamp(ab.dot(bc) / (nab * nbc), -1.0, 1.0));
   const Vec3 n   = ab.cross(bc);
   const double nn = n.norm();
   if(nn <= 1e-12 * nab * nbc) return out; // collinear: plane undefined
   out.unit_normal  = n / nn;
   out.theta_normal = out.unit_normal * out.theta;
   return out;
}

// -- Embedding ----------------------------------------------------------------

EmbedResult embed_frame(const Skeleton3D& pose, const FrameHistory& history, const EmbeddingConfig& cfg)
{
   const bool first  = history.frames_seen == 0;
   const bool second = history.frames_seen == 1;
   double dt         = 0.0;
   if(!first) {
      dt = pose.timestamp - history.prev_timestamp;
      if(!(dt > 0.0)) fail(ErrorKind::NonMonotonicTime, "frame time does not advance");
   }

   // Tracked vectors: the 13 joints, then each pair difference.
   std::vector<Vec3> vectors;
   if(cfg.use_singles)
      for(const auto& p : pose.points) vectors.push_back(p);
   if(cfg.use_pairs)
      for(const auto& [j, k] : cfg.pairs) vectors.push_back(pose[j] - pose[k]);

   const std::size_t n_tracks = vectors.size();
   if(!first && history.vectors.size() != n_tracks)
      fail(ErrorKind::LayoutMismatch, "history does not match the embedding config");

   EmbedResult res;
   auto& h = res.history;
   h.frames_seen    = history.frames_seen + 1;
   h.prev_timestamp = pose.timestamp;
   h.vectors        = vectors;
   h.velocities.resize(n_tracks);
   h.angles.resize(n_tracks);
   h.angular_velocities.resize(n_tracks);

   FeatureFrame& frame = res.frame;
   frame.timestamp     = pose.timestamp;
   frame.layout        = cfg.layout_version();
   frame.values.resize(static_cast<Eigen::Index>(cfg.feature_length()));
   Eigen::Index pos = 0;

   for(std::size_t t = 0; t < n_tracks; ++t) {
      const Vec3& x     = vectors[t];
      const Vec3 angles = axis_angles(x);
      Vec3 vel = zero(), acc = zero(), ang_vel = zero(), ang_acc = zero(), disp = zero();
      if(!first) {
         disp    = x - history.vectors[t];
         vel     = disp / dt;
         ang_vel = (angles - history.angles[t]) / dt;
         if(!second) {
            acc     = (vel - history.velocities[t]) / dt;
            ang_acc = (ang_vel - history.angular_velocities[t]) / dt;
         }
      }
      h.velocities[t]         = vel;
      h.angles[t]             = angles;
      h.angular_velocities[t] = ang_vel;

      put(frame.values, pos, x);
      put(frame.values, pos, vel);
      put(frame.values, pos, acc);
      put(frame.values, pos, angles);
      put(frame.values, pos, ang_vel);
      put(frame.values, pos, ang_acc);
      if(cfg.use_singles && t < k_landmark_count) put(frame.values, pos, disp);
   }

   if(cfg.use_triples) {
      const std::size_t n_triples = cfg.triples.size();
      if(!first && history.theta_normals.size() != n_triples)
         fail(ErrorKind::LayoutMismatch, "history does not match the embedding config");
      h.theta_normals.resize(n_triples);
      h.triple_omegas.resize(n_triples);
      for(std::size_t t = 0; t < n_triples; ++t) {
         const auto& tri   = cfg.triples[t];
         const Vec3 theta  = tri_joint_angle(pose[tri[0]], pose[tri[1]], pose[tri[2]]).theta_normal;
         Vec3 omega = zero(), alpha = zero();
         if(!first) {
            omega = (theta - history.theta_normals[t]) / dt;
            if(!second) alpha = (omega - history.triple_omegas[t]) / dt;
         }
         h.theta_normals[t] = theta;
         h.triple_omegas[t] = omega;
         put(frame.values, pos, theta);
         put(frame.values, pos, omega);
         put(frame.values, pos, alpha);
      }
   }
   return res;
}

FeatureSequence embed_sequence(const PoseSequence& seq, const EmbeddingConfig& cfg)
{
   FeatureSequence out;
   out.layout = cfg.layout_version();
   out.label  = seq.label;
   out.values.resize(static_cast<Eigen::Index>(cfg.feature_length()), static_cast<Eigen::Index>(seq.size()));
   out.timestamps.reserve(seq.size());
   FrameHistory history;
   for(std::size_t f = 0; f < seq.size(); ++f) {
      auto res = embed_frame(seq.frames[f], history, cfg);
      out.values.col(static_cast<Eigen::Index>(f)) = res.frame.values;
      out.timestamps.push_back(res.frame.timestamp);
      history = std::move(res.history);
   }
   return out;
}

// -- Scaling ------------------------------------------------------------------

ScalingStats fit_scaling(std::span<const FeatureFrame> frames)
{
   if(frames.empty()) fail(ErrorKind::EmptyInput, "no frames to fit scaling on");
   ScalingStats s;
   s.layout = frames.front().layout;
   s.min    = frames.front().values;
   s.max    = frames.front().values;
   for(const auto& f : frames) {
      if(f.values.size() != s.min.size() || f.layout != s.layout)
         fail(ErrorKind::LayoutMismatch, "frames have different layouts");
      s.min = s.min.cwiseMin(f.values);
      s.max = s.max.cwiseMax(f.values);
   }
   return s;
}

ScalingStats fit_scaling(std::span<const FeatureSequence> sequences)
{
   ScalingStats s;
   bool any = false;
   for(const auto& seq : sequences) {
      if(seq.frames() == 0) continue;
      if(!any) {
         s.layout = seq.layout;
         s.min    = seq.values.rowwise().minCoeff();
         s.max    = seq.values.rowwise().maxCoeff();
         any      = true;
         continue;
      }
      if(seq.layout != s.layout || seq.dim() != s.min.size())
         fail(ErrorKind::LayoutMismatch, "sequences have different layouts");
      s.min = s.min.cwiseMin(seq.values.rowwise().minCoeff());
      s.max = s.max.cwiseMax(seq.values.rowwise().maxCoeff());
   }
   if(!any) fail(ErrorKind::EmptyInput, "no frames to fit scaling on");
   return s;
}

namespace
{
Eigen::VectorXd divisors(const ScalingStats& stats)
{
   return stats.min.cwiseAbs().cwiseMax(stats.max.cwiseAbs()).cwiseMax(k_scaling_eps);
}

void check_layout(const std::string& layout, Eigen::Index dim, const ScalingStats& stats)
{
   if(layout != stats.layout || dim != stats.min.size())
      fail(ErrorKind::LayoutMismatch, "scaling stats were fitted for layout " + stats.layout + ", got " + layout);
}
} // namespace

FeatureFrame apply_scaling(const FeatureFrame& frame, const ScalingStats& stats)
{
   check_layout(frame.layout, frame.values.size(), stats);
   FeatureFrame out = frame;
   out.values = frame.values.cwiseQuotient(divisors(stats)).cwiseMax(-k_scaling_clamp).cwiseMin(k_scaling_clamp);
   return out;
}

FeatureSequence apply_scaling(const FeatureSequence& seq, const ScalingStats& stats)
{
   check_layout(seq.layout, seq.dim(), stats);
   FeatureSequence out = seq;
   const Eigen::ArrayXd d = divisors(stats).array();
   out.values = (seq.values.array().colwise() / d).cwiseMax(-k_scaling_clamp).cwiseMin(k_scaling_clamp).matrix();
   return out;
}

} // namespace har
