#pragma once

#include "har/skeleton.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace har
{
enum class SequenceFormat
{
   NeutralNdjson,
   MhadSkeleton,
};

SequenceFormat format_from_string(std::string_view name);

// Neutral format: one JSON object per line, {"t":..,"pts":[[x,y,z]x13],"vis":[..x13]}.
// Sequence metadata may precede frames as {"type":"sequence","label":..}.
PoseSequence read_neutral(std::istream& in);
void write_neutral(std::ostream& out, const PoseSequence& seq);

std::string frame_to_json_line(const Skeleton3D& frame);
Skeleton3D frame_from_json_line(std::string_view line);

PoseSequence load_sequence(const std::filesystem::path& path, SequenceFormat format);
void save_sequence(const std::filesystem::path& path, const PoseSequence& seq);

// -- UTD-MHAD ----------------------------------------------------------------

inline constexpr std::size_t k_mhad_joint_count = 20;

// Kinect v1 joint order used by the dataset's skeleton files.
enum class MhadJoint : int
{
   Head = 0,
   ShoulderCenter,
   Spine,
   HipCenter,
   LeftShoulder,
   LeftElbow,
   LeftWrist,
   LeftHand,
   RightShoulder,
   RightElbow,
   RightWrist,
   RightHand,
   LeftHip,
   LeftKnee,
   LeftAnkle,
   LeftFoot,
   RightHip,
   RightKnee,
   RightAnkle,
   RightFoot,
};

// Source joint for each LandmarkId.
const std::array<MhadJoint, k_landmark_count>& mhad_landmark_map() noexcept;

std::array<Vec3, k_landmark_count> convert_mhad_joints(std::span<const Vec3> joints20);

// Accepts MATLAB v5 `.mat` skeleton files (variable d_skel, 20x3xN) and a
// whitespace-separated text export with 60 numbers per frame.
PoseSequence load_mhad(const std::filesystem::path& path);

// Parses "a12_s3_t4_skeleton.mat" style names. Returns false when not matching.
struct MhadFileInfo
{
   int action  = 0;
   int subject = 0;
   int trial   = 0;
};
bool parse_mhad_filename(const std::string& filename, MhadFileInfo& info);

// -- Manifest ----------------------------------------------------------------

struct ManifestEntry
{
   std::filesystem::path path;
   std::string label;
   std::string subject;
   std::string trial;
};

struct DatasetManifest
{
   std::vector<ManifestEntry> entries;
   std::vector<std::string> classes;
   int version = 1;

   std::size_t size() const noexcept { return entries.size(); }
};

// Labels like "a2" < "a10": compares the numeric suffix when prefixes match.
bool natural_less(const std::string& a, const std::string& b);

// Builds the class list (natural order) from the entries and checks the
// invariants: every label in the list, paths unique.
DatasetManifest make_manifest(std::vector<ManifestEntry> entries);
void validate(const DatasetManifest& manifest);

// "path,label,subject,trial" per line; '#' lines are comments. Relative paths
// are resolved against the manifest's directory.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

DatasetManifest filter_classes(const DatasetManifest& manifest,
                               const std::vector<std::string>& classes);

struct SplitResult
{
   DatasetManifest train;
   DatasetManifest test;
};

std::size_t test_count(std::size_t total, double test_ratio);

// Seeded uniform shuffle; the first ceil(ratio * total) indices go to test.
// Both halves are returned in ascending order.
struct IndexSplit
{
   std::vector<std::size_t> train;
   std::vector<std::size_t> test;
};
IndexSplit split_indices(std::size_t total, double test_ratio, std::uint64_t seed);
SplitResult split(const DatasetManifest& manifest, double test_ratio, std::uint64_t seed);

} // namespace har
