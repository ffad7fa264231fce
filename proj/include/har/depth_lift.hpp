#pragma once

#include "har/skeleton.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace har
{
struct LiftConfig
{
   double target_area_mm      = 90.0;
   int min_window_px          = 3;
   double background_margin_m = 1.5;
   double quartile            = 0.25;

   void validate() const;
};

// Square depth window centered on a landmark, row-major, millimeters (0 = invalid).
struct DepthPatch
{
   int size = 0;
   std::vector<std::uint16_t> depth_mm;

   std::uint16_t at(int row, int col) const { return depth_mm[static_cast<std::size_t>(row * size + col)]; }
};

struct RawLandmark
{
   double x_px       = 0.0;
   double y_px       = 0.0;
   double visibility = 0.0;
};

// Stream header written by the capture adapter before any frame.
struct StreamHeader
{
   double pixel_pitch_at_1m = 1.5; // mm per pixel at 1 m range
   double cx                = 0.0; // principal point, pixels
   double cy                = 0.0;
   int patch_size           = 21;

   void validate() const;
};

struct RawFrame
{
   double timestamp = 0.0;
   std::array<RawLandmark, k_landmark_count> landmarks{};
   std::array<DepthPatch, k_landmark_count> patches{};
   std::vector<std::uint16_t> torso_samples; // at most k_max_torso_samples
   double pixel_pitch_at_1m = 1.5;
   double cx                = 0.0;
   double cy                = 0.0;

   void validate() const;
};

inline constexpr std::size_t k_max_torso_samples = 512;
inline constexpr int k_min_patch_size            = 15;

// Mean of the lowest ceil(quartile * n) non-zero samples, in meters.
// Throws InsufficientDepth when fewer than 4 valid samples remain.
double estimate_subject_distance(std::span<const std::uint16_t> torso_samples_mm, const LiftConfig& cfg);

// Odd window side covering target_area_mm at `distance_m`, clamped to
// [min_window_px, patch_size].
int window_size_px(double distance_m, double pixel_pitch_at_1m, int patch_size, const LiftConfig& cfg);

struct LiftedLandmarkDepth
{
   double z_m;
   bool missing; // no valid depth in window: z fell back to the subject distance
};

// First-quartile depth of the centered window, ignoring invalid and
// background samples.
LiftedLandmarkDepth landmark_depth(const DepthPatch& patch, int window, double subject_distance_m,
                                   const LiftConfig& cfg);

// Metric camera frame: x right, y up, z away from the camera.
Skeleton3D lift_frame(const RawFrame& frame, const LiftConfig& cfg);

// -- NDJSON stream ------------------------------------------------------------

// Reads a RawFrame stream: one header record, then frame records.
// Throws ParseError when the header is missing or a record is malformed.
class RawFrameReader
{
 public:
   explicit RawFrameReader(std::istream& in);

   const StreamHeader& header() const noexcept { return header_; }

   // false at end of stream
   bool next(RawFrame& frame);

 private:
   std::istream& in_;
   StreamHeader header_;
   std::size_t line_no_ = 0;
};

std::string header_to_json_line(const StreamHeader& header);
std::string raw_frame_to_json_line(const RawFrame& frame);

} // namespace har
