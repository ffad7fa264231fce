#pragma once

#include "har/skeleton.hpp"

namespace har
{
struct NormalizeConfig
{
   double torso_multiplier = 2.5;
   bool orient             = true;
   Vec3 target_direction   = Vec3::UnitY();

   void validate() const;
};

// Translate the hip midpoint to the origin, divide by
// max(torso_multiplier * torso length, farthest landmark distance), then
// optionally rotate hip->shoulder onto target_direction. Body yaw about the
// target axis is preserved. Throws DegeneratePose when hip and shoulder
// midpoints coincide.
Skeleton3D normalize_pose(const Skeleton3D& pose, const NormalizeConfig& cfg);

// Drops degenerate frames with a warning instead of failing.
PoseSequence normalize_sequence(const PoseSequence& seq, const NormalizeConfig& cfg);

} // namespace har
