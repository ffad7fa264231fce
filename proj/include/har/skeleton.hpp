#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace har
{
using Vec3 = Eigen::Vector3d;

// Stable indices: serialization order and embedding layout depend on them.
enum class LandmarkId : int
{
   Nose = 0,
   LShoulder,
   RShoulder,
   LElbow,
   RElbow,
   LWrist,
   RWrist,
   LHip,
   RHip,
   LKnee,
   RKnee,
   LHeel,
   RHeel,
};

inline constexpr std::size_t k_landmark_count = 13;

constexpr std::size_t index(LandmarkId id) noexcept { return static_cast<std::size_t>(id); }

std::string_view landmark_name(LandmarkId id) noexcept;
std::optional<LandmarkId> landmark_from_name(std::string_view name) noexcept;

struct Skeleton3D
{
   double timestamp = 0.0; // seconds
   std::array<Vec3, k_landmark_count> points{};
   std::array<double, k_landmark_count> visibility{};

   Skeleton3D();

   Vec3& operator[](LandmarkId id) noexcept { return points[index(id)]; }
   const Vec3& operator[](LandmarkId id) const noexcept { return points[index(id)]; }

   Vec3 hip_center() const noexcept;
   Vec3 shoulder_center() const noexcept;
   bool is_finite() const noexcept;
};

struct PoseSequence
{
   std::vector<Skeleton3D> frames;
   std::optional<std::string> label;
   std::optional<std::string> subject;
   std::optional<std::string> trial;

   std::size_t size() const noexcept { return frames.size(); }
   bool empty() const noexcept { return frames.empty(); }
};

// Throws ValidationError on non-finite coordinates, negative or
// non-increasing timestamps, or visibility outside [0, 1].
void validate(const PoseSequence& seq);

} // namespace har
