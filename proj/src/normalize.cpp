#include "har/normalize.hpp"

#include "har/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace har
{
namespace
{
constexpr double k_degenerate_eps = 1e-12;
}

void NormalizeConfig::validate() const
{
   if(!(torso_multiplier > 0.0)) fail(ErrorKind::Config, "torso_multiplier must be positive");
   if(!target_direction.allFinite() || std::abs(target_direction.norm() - 1.0) > 1e-9)
      fail(ErrorKind::Config, "target_direction must be a unit vector");
}

Skeleton3D normalize_pose(const Skeleton3D& pose, const NormalizeConfig& cfg)
{
   const Vec3 hip      = pose.hip_center();
   const Vec3 shoulder = pose.shoulder_center();
   if(!hip.allFinite() || !shoulder.allFinite())
      fail(ErrorKind::Validation, "hip and shoulder landmarks must be finite");
   const Vec3 torso        = shoulder - hip;
   const double torso_size = torso.norm();
   if(torso_size <= k_degenerate_eps) fail(ErrorKind::DegeneratePose, "hip and shoulder midpoints coincide");

   Skeleton3D out = pose;
   double max_dist = 0.0;
   for(auto& p : out.points) {
      p -= hip;
      max_dist = std::max(max_dist, p.norm());
   }
   const double scale = std::max(cfg.torso_multiplier * torso_size, max_dist);
   for(auto& p : out.points) p /= scale;

   if(cfg.orient) {
      const Eigen::Matrix3d rot
          = Eigen::Quaterniond::FromTwoVectors(torso / torso_size, cfg.target_direction).toRotationMatrix();
      for(auto& p : out.points) p = rot * p;
   }
   return out;
}

PoseSequence normalize_sequence(const PoseSequence& seq, const NormalizeConfig& cfg)
{
   PoseSequence out;
   out.label   = seq.label;
   out.subject = seq.subject;
   out.trial   = seq.trial;
   out.frames.reserve(seq.frames.size());
   for(const auto& fr : seq.frames) {
      try {
         out.frames.push_back(normalize_pose(fr, cfg));
      } catch(const Error& e) {
         if(e.kind() != ErrorKind::DegeneratePose) throw;
         log_warning("dropping degenerate frame at t=" + std::to_string(fr.timestamp));
      }
   }
   return out;
}

} // namespace har
