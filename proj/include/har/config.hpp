#pragma once

#include "har/classifier.hpp"
#include "har/codec.hpp"
#include "har/depth_lift.hpp"
#include "har/embedding.hpp"
#include "har/normalize.hpp"
#include "har/uav_bridge.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace har
{
struct StreamConfig
{
   double idle_gap_s       = 0.5;  // sub-threshold motion this long closes a segment
   double motion_threshold = 0.2;  // speed of the fastest landmark, m/s
   std::size_t queue_capacity = 4096;
   std::size_t min_frames  = 2;

   void validate() const;
};

enum class PipelineMode
{
   Heavy,   // scaled features, no prefilter, unconstrained DTW
   Encoded, // autoencoder latents, mean-frame prefilter, banded DTW
};

// Every module configuration plus the seed. Loaded from `key = value` lines;
// unknown keys are rejected. Later assignments override earlier ones, and
// setting `mode` applies that mode's classifier preset.
struct PipelineConfig
{
   PipelineMode mode = PipelineMode::Encoded;
   std::uint64_t seed = 1;
   double test_ratio  = 0.2;

   LiftConfig lift;
   NormalizeConfig normalize;
   EmbeddingConfig embedding = EmbeddingConfig::defaults();
   TrainConfig codec;
   ClassifierConfig classifier;
   bool calibrate_reject    = false; // classifier.reject_threshold = auto
   double reject_percentile = 0.99;
   std::vector<int> k_candidates; // empty: keep classifier.k
   int cv_folds = 5;

   StreamConfig stream;
   UavConfig uav;
   std::string lunge_label = "a27";
   std::map<std::string, std::string> command_overrides; // label -> command name

   static PipelineConfig preset(PipelineMode mode);
   static PipelineConfig preset(const std::string& name);

   void set(const std::string& key, const std::string& value);
   void apply_file(const std::filesystem::path& path);
   void apply_text(const std::string& text, const std::string& origin = "<config>");
   void validate() const;

   ActionCommandMap command_map() const;

   // Flat key -> value snapshot; feeding it back through set() reproduces the config.
   std::vector<std::pair<std::string, std::string>> entries() const;
   nlohmann::ordered_json to_json() const;
   static PipelineConfig from_json(const nlohmann::json& j);
};

std::string to_string(PipelineMode mode);

} // namespace har
