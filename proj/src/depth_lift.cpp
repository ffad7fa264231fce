#include "har/depth_lift.hpp"

#include "har/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>

namespace har
{
namespace
{
using json = nlohmann::json;

constexpr std::size_t k_min_torso_valid = 4;

// Mean of the lowest ceil(quartile * n) values; `values` is consumed.
double first_quartile_mean(std::vector<double>& values, double quartile)
{
   const auto n     = values.size();
   const auto count = std::clamp<std::size_t>(
       static_cast<std::size_t>(std::ceil(quartile * static_cast<double>(n) - 1e-12)), 1, n);
   std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(count - 1), values.end());
   std::sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(count));
   return std::accumulate(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(count), 0.0)
          / static_cast<double>(count);
}

} // namespace

void LiftConfig::validate() const
{
   if(!(target_area_mm > 0.0) || min_window_px <= 0 || !(background_margin_m > 0.0))
      fail(ErrorKind::Config, "lift parameters must be positive");
   if(!(quartile > 0.0 && quartile <= 1.0)) fail(ErrorKind::Config, "lift quartile must lie in (0, 1]");
}

void StreamHeader::validate() const
{
   if(!(pixel_pitch_at_1m > 0.0)) fail(ErrorKind::Validation, "pixel_pitch_at_1m must be positive");
   if(patch_size < k_min_patch_size || patch_size % 2 == 0)
      fail(ErrorKind::Validation, "patch size must be odd and >= 15");
   if(!std::isfinite(cx) || !std::isfinite(cy)) fail(ErrorKind::Validation, "principal point must be finite");
}

void RawFrame::validate() const
{
   if(!(pixel_pitch_at_1m > 0.0)) fail(ErrorKind::Validation, "pixel_pitch_at_1m must be positive");
   if(!std::isfinite(timestamp) || timestamp < 0.0) fail(ErrorKind::Validation, "bad frame timestamp");
   if(torso_samples.size() > k_max_torso_samples) fail(ErrorKind::Validation, "more than 512 torso samples");
   for(const auto& p : patches) {
      if(p.size < k_min_patch_size || p.size % 2 == 0)
         fail(ErrorKind::Validation, "patch size must be odd and >= 15");
      if(p.depth_mm.size() != static_cast<std::size_t>(p.size * p.size))
         fail(ErrorKind::Validation, "patch data does not match its size");
   }
   for(const auto& l : landmarks)
      if(!std::isfinite(l.x_px) || !std::isfinite(l.y_px) || !(l.visibility >= 0.0 && l.visibility <= 1.0))
         fail(ErrorKind::Validation, "bad 2D landmark");
}

double estimate_subject_distance(std::span<const std::uint16_t> torso_samples_mm, const LiftConfig& cfg)
{
   std::vector<double> valid;
   valid.reserve(torso_samples_mm.size());
   for(auto d : torso_samples_mm)
      if(d > 0) valid.push_back(static_cast<double>(d));
   if(valid.size() < k_min_torso_valid)
      fail(ErrorKind::InsufficientDepth, std::to_string(valid.size()) + " valid torso depth samples (need 4)");
   return first_quartile_mean(valid, cfg.quartile) / 1000.0;
}

int window_size_px(double distance_m, double pixel_pitch_at_1m, int patch_size, const LiftConfig& cfg)
{
   const double pitch_mm = pixel_pitch_at_1m * distance_m;
   const double raw      = std::round(cfg.target_area_mm / pitch_mm);
   // cap before converting so huge ratios at tiny distances can't overflow
   int side = static_cast<int>(std::min(raw, static_cast<double>(patch_size) + 1.0));
   if(side % 2 == 0) ++side;
   return std::clamp(side, cfg.min_window_px, patch_size);
}

LiftedLandmarkDepth landmark_depth(const DepthPatch& patch, int window, double subject_distance_m,
                                   const LiftConfig& cfg)
{
   const int half   = window / 2;
   const int center = patch.size / 2;
   const double max_mm = (subject_distance_m + cfg.background_margin_m) * 1000.0;

   std::vector<double> valid;
   valid.reserve(static_cast<std::size_t>(window * window));
   for(int r = center - half; r <= center + half; ++r)
      for(int c = center - half; c <= center + half; ++c) {
         const double d = patch.at(r, c);
         if(d > 0.0 && d <= max_mm) valid.push_back(d);
      }
   if(valid.empty()) return {subject_distance_m, true};
   return {first_quartile_mean(valid, cfg.quartile) / 1000.0, false};
}

Skeleton3D lift_frame(const RawFrame& frame, const LiftConfig& cfg)
{
   frame.validate();
   const double subject = estimate_subject_distance(frame.torso_samples, cfg);

   Skeleton3D out;
   out.timestamp = frame.timestamp;
   for(std::size_t i = 0; i < k_landmark_count; ++i) {
      const auto& patch = frame.patches[i];
      const auto& lm    = frame.landmarks[i];
      const int window  = window_size_px(subject, frame.pixel_pitch_at_1m, patch.size, cfg);
      const auto depth  = landmark_depth(patch, window, subject, cfg);
      const double m_per_px = frame.pixel_pitch_at_1m * depth.z_m / 1000.0;
      out.points[i]         = Vec3((lm.x_px - frame.cx) * m_per_px, (frame.cy - lm.y_px) * m_per_px, depth.z_m);
      out.visibility[i]     = depth.missing ? 0.0 : lm.visibility;
   }
   return out;
}

// -- NDJSON stream ------------------------------------------------------------

RawFrameReader::RawFrameReader(std::istream& in)
    : in_(in)
{
   std::string line;
   while(std::getline(in_, line)) {
      ++line_no_;
      if(line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const json j = json::parse(line, nullptr, false);
      if(j.is_discarded() || !j.is_object() || j.value("type", "") != "header")
         fail(ErrorKind::Parse, "stream must begin with a header record");
      try {
         header_.pixel_pitch_at_1m = j.at("pixel_pitch_at_1m").get<double>();
         const auto& pp            = j.at("principal_point");
         if(!pp.is_array() || pp.size() != 2) fail(ErrorKind::Parse, "principal_point must be [cx, cy]");
         header_.cx         = pp[0].get<double>();
         header_.cy         = pp[1].get<double>();
         header_.patch_size = j.at("patch_size").get<int>();
      } catch(const json::exception& e) {
         fail(ErrorKind::Parse, std::string("bad header: ") + e.what());
      }
      header_.validate();
      return;
   }
   fail(ErrorKind::Parse, "empty RawFrame stream");
}

bool RawFrameReader::next(RawFrame& frame)
{
   std::string line;
   while(std::getline(in_, line)) {
      ++line_no_;
      if(line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const json j = json::parse(line, nullptr, false);
      const auto where = "line " + std::to_string(line_no_) + ": ";
      if(j.is_discarded() || !j.is_object()) fail(ErrorKind::Parse, where + "malformed record");
      if(j.value("type", "") != "frame") fail(ErrorKind::Parse, where + "expected a frame record");
      try {
         frame                   = RawFrame{};
         frame.pixel_pitch_at_1m = header_.pixel_pitch_at_1m;
         frame.cx                = header_.cx;
         frame.cy                = header_.cy;
         frame.timestamp         = j.at("t").get<double>();
         const auto& lms         = j.at("landmarks2d");
         const auto& patches     = j.at("patches");
         if(lms.size() != k_landmark_count || patches.size() != k_landmark_count)
            fail(ErrorKind::Parse, where + "need 13 landmarks and 13 patches");
         const auto cells = static_cast<std::size_t>(header_.patch_size * header_.patch_size);
         for(std::size_t i = 0; i < k_landmark_count; ++i) {
            const auto& l = lms[i];
            if(l.size() != 3) fail(ErrorKind::Parse, where + "landmark must be [x_px, y_px, visibility]");
            frame.landmarks[i] = {l[0].get<double>(), l[1].get<double>(), l[2].get<double>()};
            const auto& p      = patches[i];
            if(p.size() != cells) fail(ErrorKind::Parse, where + "patch must hold P*P depth values");
            frame.patches[i].size = header_.patch_size;
            frame.patches[i].depth_mm.reserve(cells);
            for(const auto& d : p) {
               const auto v = d.get<long long>();
               if(v < 0 || v > 65535) fail(ErrorKind::Parse, where + "depth out of range");
               frame.patches[i].depth_mm.push_back(static_cast<std::uint16_t>(v));
            }
         }
         for(const auto& d : j.at("torso_samples")) {
            const auto v = d.get<long long>();
            if(v < 0 || v > 65535) fail(ErrorKind::Parse, where + "depth out of range");
            frame.torso_samples.push_back(static_cast<std::uint16_t>(v));
         }
      } catch(const json::exception& e) {
         fail(ErrorKind::Parse, where + e.what());
      }
      return true;
   }
   return false;
}

std::string header_to_json_line(const StreamHeader& header)
{
   nlohmann::ordered_json j;
   j["type"]              = "header";
   j["version"]           = 1;
   j["pixel_pitch_at_1m"] = header.pixel_pitch_at_1m;
   j["principal_point"]   = {header.cx, header.cy};
   j["patch_size"]        = header.patch_size;
   return j.dump();
}

std::string raw_frame_to_json_line(const RawFrame& frame)
{
   nlohmann::ordered_json j;
   j["type"] = "frame";
   j["t"]    = frame.timestamp;
   auto lms  = nlohmann::ordered_json::array();
   for(const auto& l : frame.landmarks) lms.push_back({l.x_px, l.y_px, l.visibility});
   j["landmarks2d"] = std::move(lms);
   auto patches     = nlohmann::ordered_json::array();
   for(const auto& p : frame.patches) patches.push_back(p.depth_mm);
   j["patches"]       = std::move(patches);
   j["torso_samples"] = frame.torso_samples;
   return j.dump();
}

} // namespace har
