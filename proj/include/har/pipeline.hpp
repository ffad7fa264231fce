#pragma once

#include "har/classifier.hpp"
#include "har/codec.hpp"
#include "har/config.hpp"
#include "har/eval.hpp"
#include "har/skeleton_io.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace har
{
// normalize -> embed. Throws Validation when fewer than 2 frames survive.
FeatureSequence featurize(const PoseSequence& seq, const PipelineConfig& cfg);

// Everything needed to classify a raw pose sequence.
struct TrainedPipeline
{
   PipelineConfig config;
   ScalingStats scaling;
   std::optional<MLPModel> model; // Encoded mode only
   ReferenceSet refs;

   // scaled (and encoded) representation used for matching
   FeatureSequence represent(const FeatureSequence& features) const;
   FeatureSequence represent(const PoseSequence& seq) const;

   ClassificationResult classify(const PoseSequence& seq, double* end_to_end_ms = nullptr) const;
};

struct TrainingInfo
{
   std::vector<EpochStats> codec_curve;
   int codec_best_epoch       = 0;
   double codec_best_val_loss = 0.0;
   std::optional<CrossValidation> cv;
   std::optional<double> reject_threshold;
};

// Fits scaling, trains the codec (Encoded), builds references, optionally
// picks k by cross-validation and calibrates the reject threshold.
TrainedPipeline build_pipeline(const std::vector<PoseSequence>& train, const std::vector<std::string>& classes,
                               const PipelineConfig& cfg, TrainingInfo* info = nullptr);

// Same, reusing an already trained model (and its scaling stats).
TrainedPipeline build_pipeline_with_model(const std::vector<PoseSequence>& train,
                                          const std::vector<std::string>& classes, const PipelineConfig& cfg,
                                          const ModelFile& model, TrainingInfo* info = nullptr);

struct BenchmarkResult
{
   EvalReport report;
   TrainingInfo training;
   std::vector<Prediction> predictions;
   std::size_t train_count = 0;
   std::size_t test_count  = 0;
};

// Split (seeded, ceil rule) -> build pipeline on train -> classify test.
BenchmarkResult run_benchmark(const std::vector<PoseSequence>& sequences, const std::vector<std::string>& classes,
                              const PipelineConfig& cfg);

// Loads the manifest entries for `classes` (all classes when nullopt; an
// empty subset is an error) and runs the benchmark; writes reports and
// artifacts to `out_dir` when given.
BenchmarkResult run_benchmark(const DatasetManifest& manifest, const std::optional<std::vector<std::string>>& classes,
                              const PipelineConfig& cfg, const std::optional<std::filesystem::path>& out_dir);

std::vector<PoseSequence> load_manifest_sequences(const DatasetManifest& manifest);

// -- Reference bundle ---------------------------------------------------------------
// Single file: config snapshot, class registry, scaling stats, optional
// model, and the reference sequences.

void write_bundle(std::ostream& out, const TrainedPipeline& pipeline);
TrainedPipeline read_bundle(std::istream& in);
void save_bundle(const std::filesystem::path& path, const TrainedPipeline& pipeline);
TrainedPipeline load_bundle(const std::filesystem::path& path);

} // namespace har
