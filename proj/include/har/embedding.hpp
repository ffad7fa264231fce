#pragma once

#include "har/skeleton.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace har
{
using LandmarkPair   = std::pair<LandmarkId, LandmarkId>;
using LandmarkTriple = std::array<LandmarkId, 3>;

// Per-landmark block: position, velocity, acceleration, axis angles,
// angular velocity, angular acceleration, displacement (3 values each).
inline constexpr std::size_t k_single_width = 21;
// Per-pair block: the same minus displacement.
inline constexpr std::size_t k_pair_width = 18;
// Per-triple block: angle-scaled plane normal, its first and second differences.
inline constexpr std::size_t k_triple_width = 9;

struct EmbeddingConfig
{
   std::vector<LandmarkPair> pairs;
   std::vector<LandmarkTriple> triples;
   bool use_singles = true;
   bool use_pairs   = true;
   bool use_triples = true;

   // All 78 unordered pairs and the 8 limb/torso chains.
   static EmbeddingConfig defaults();
   static std::vector<LandmarkPair> all_pairs();
   static std::vector<LandmarkTriple> default_triples();

   void validate() const;
   std::size_t feature_length() const;
   // Stable identifier of the vector layout, stamped into fitted artifacts.
   std::string layout_version() const;
   // dimension index -> semantic name
   std::vector<std::string> layout_names() const;
};

struct FeatureFrame
{
   double timestamp = 0.0;
   Eigen::VectorXd values;
   std::string layout;
};

// Columns are frames.
struct FeatureSequence
{
   std::vector<double> timestamps;
   Eigen::MatrixXd values;
   std::string layout;
   std::optional<std::string> label;

   Eigen::Index frames() const noexcept { return values.cols(); }
   Eigen::Index dim() const noexcept { return values.rows(); }
};

// Everything first-difference features need from the previous frame.
struct FrameHistory
{
   std::size_t frames_seen = 0;
   double prev_timestamp   = 0.0;

   // one entry per tracked vector: singles then pairs
   std::vector<Vec3> vectors;
   std::vector<Vec3> velocities;
   std::vector<Vec3> angles;
   std::vector<Vec3> angular_velocities;

   std::vector<Vec3> theta_normals; // per triple
   std::vector<Vec3> triple_omegas;

   bool empty() const noexcept { return frames_seen == 0; }
   void clear() { *this = FrameHistory{}; }
};

struct EmbedResult
{
   FeatureFrame frame;
   FrameHistory history;
};

// Angle between `v` and each coordinate axis; all zero for a zero vector.
Vec3 axis_angles(const Vec3& v) noexcept;

struct TriJointAngle
{
   double theta = 0.0; // angle between AB and BC, [0, pi]
   Vec3 unit_normal = Vec3::Zero();
   Vec3 theta_normal = Vec3::Zero(); // unit_normal * theta; zero when collinear
};
TriJointAngle tri_joint_angle(const Vec3& a, const Vec3& b, const Vec3& c) noexcept;

// Throws NonMonotonicTime when the pose is not later than the history.
EmbedResult embed_frame(const Skeleton3D& pose, const FrameHistory& history, const EmbeddingConfig& cfg);

FeatureSequence embed_sequence(const PoseSequence& seq, const EmbeddingConfig& cfg);

// -- Sign-preserving scaling --------------------------------------------------

struct ScalingStats
{
   Eigen::VectorXd min;
   Eigen::VectorXd max;
   std::string layout;
};

inline constexpr double k_scaling_eps   = 1e-9;
inline constexpr double k_scaling_clamp = 1.5;

ScalingStats fit_scaling(std::span<const FeatureFrame> frames);
ScalingStats fit_scaling(std::span<const FeatureSequence> sequences);

// x / max(|min|, |max|, eps), clamped to +-1.5. Throws LayoutMismatch.
FeatureFrame apply_scaling(const FeatureFrame& frame, const ScalingStats& stats);
FeatureSequence apply_scaling(const FeatureSequence& seq, const ScalingStats& stats);

} // namespace har
