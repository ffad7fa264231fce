#include "har/pipeline.hpp"

#include "har/errors.hpp"
#include "har/normalize.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

namespace har
{
namespace
{
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start)
{
   return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

TrainedPipeline finish_pipeline(const std::vector<FeatureSequence>& scaled, const std::vector<std::string>& classes,
                                PipelineConfig cfg, ScalingStats scaling, std::optional<MLPModel> model,
                                TrainingInfo* info)
{
   TrainedPipeline p;
   p.scaling = std::move(scaling);
   p.model   = std::move(model);
   p.refs    = ReferenceSet(classes, cfg.classifier);
   for(const auto& s : scaled) {
      if(!s.label) fail(ErrorKind::Validation, "training sequence without label");
      p.refs.add(p.model ? encode_sequence(s, *p.model) : s, *s.label);
   }

   if(!cfg.k_candidates.empty()) {
      auto cv = cross_validate_k(p.refs, cfg.k_candidates, cfg.cv_folds, cfg.seed);
      cfg.classifier.k = cv.best_k;
      cfg.classifier.shortlist = std::max(cfg.classifier.shortlist, cv.best_k);
      cfg.k_candidates.clear();
      if(info) info->cv = std::move(cv);
   }
   if(cfg.calibrate_reject) {
      ClassifierConfig c = cfg.classifier;
      p.refs             = ReferenceSet(classes, c);
      for(const auto& s : scaled) p.refs.add(p.model ? encode_sequence(s, *p.model) : s, *s.label);
      cfg.classifier.reject_threshold = calibrate_reject_threshold(p.refs, cfg.reject_percentile);
      cfg.calibrate_reject            = false;
      if(info) info->reject_threshold = cfg.classifier.reject_threshold;
   }
   p.refs.config() = cfg.classifier;
   p.refs.validate();
   p.config = std::move(cfg);
   return p;
}

std::vector<FeatureSequence> featurize_all(const std::vector<PoseSequence>& seqs, const PipelineConfig& cfg)
{
   std::vector<FeatureSequence> out;
   out.reserve(seqs.size());
   for(const auto& s : seqs) out.push_back(featurize(s, cfg));
   return out;
}

} // namespace

FeatureSequence featurize(const PoseSequence& seq, const PipelineConfig& cfg)
{
   const auto normalized = normalize_sequence(seq, cfg.normalize);
   if(normalized.size() < 2) fail(ErrorKind::Validation, "sequence has fewer than 2 usable frames");
   return embed_sequence(normalized, cfg.embedding);
}

FeatureSequence TrainedPipeline::represent(const FeatureSequence& features) const
{
   auto scaled = apply_scaling(features, scaling);
   return model ? encode_sequence(scaled, *model) : scaled;
}

FeatureSequence TrainedPipeline::represent(const PoseSequence& seq) const
{
   return represent(featurize(seq, config));
}

ClassificationResult TrainedPipeline::classify(const PoseSequence& seq, double* end_to_end_ms) const
{
   const auto start = Clock::now();
   const auto rep   = represent(seq);
   auto result      = har::classify(rep, refs);
   if(end_to_end_ms) *end_to_end_ms = ms_since(start);
   return result;
}

TrainedPipeline build_pipeline(const std::vector<PoseSequence>& train, const std::vector<std::string>& classes,
                               const PipelineConfig& cfg, TrainingInfo* info)
{
   cfg.validate();
   if(train.empty()) fail(ErrorKind::EmptyDataset, "no training sequences");
   const auto features = featurize_all(train, cfg);
   ScalingStats scaling = fit_scaling(features);
   std::vector<FeatureSequence> scaled;
   scaled.reserve(features.size());
   for(const auto& f : features) scaled.push_back(apply_scaling(f, scaling));

   std::optional<MLPModel> model;
   if(cfg.mode == PipelineMode::Encoded) {
      Eigen::Index total = 0;
      for(const auto& s : scaled) total += s.frames();
      Eigen::MatrixXd frames(scaling.min.size(), total);
      Eigen::Index col = 0;
      for(const auto& s : scaled) {
         frames.middleCols(col, s.frames()) = s.values;
         col += s.frames();
      }
      TrainConfig tc = cfg.codec;
      tc.seed        = cfg.seed;
      auto trained   = train_codec(frames, scaling.layout, tc);
      if(info) {
         info->codec_curve         = trained.curve;
         info->codec_best_epoch    = trained.best_epoch;
         info->codec_best_val_loss = trained.best_val_loss;
      }
      model = std::move(trained.model);
   }
   return finish_pipeline(scaled, classes, cfg, std::move(scaling), std::move(model), info);
}

TrainedPipeline build_pipeline_with_model(const std::vector<PoseSequence>& train,
                                          const std::vector<std::string>& classes, const PipelineConfig& cfg,
                                          const ModelFile& model, TrainingInfo* info)
{
   cfg.validate();
   if(train.empty()) fail(ErrorKind::EmptyDataset, "no training sequences");
   const auto features = featurize_all(train, cfg);
   ScalingStats scaling = model.scaling ? *model.scaling : fit_scaling(features);
   if(scaling.layout != cfg.embedding.layout_version() || model.model.layout != scaling.layout)
      fail(ErrorKind::LayoutMismatch, "model was trained on a different feature layout");
   std::vector<FeatureSequence> scaled;
   for(const auto& f : features) scaled.push_back(apply_scaling(f, scaling));
   PipelineConfig c = cfg;
   c.mode           = PipelineMode::Encoded;
   return finish_pipeline(scaled, classes, c, std::move(scaling), model.model, info);
}

BenchmarkResult run_benchmark(const std::vector<PoseSequence>& sequences, const std::vector<std::string>& classes,
                              const PipelineConfig& cfg)
{
   if(classes.empty()) fail(ErrorKind::EmptyDataset, "empty class subset");
   std::vector<PoseSequence> selected;
   for(const auto& s : sequences)
      if(s.label && std::find(classes.begin(), classes.end(), *s.label) != classes.end()) selected.push_back(s);
   if(selected.empty()) fail(ErrorKind::EmptyDataset, "no sequences for the requested classes");

   const auto idx = split_indices(selected.size(), cfg.test_ratio, cfg.seed);
   std::vector<PoseSequence> train, test;
   for(auto i : idx.train) train.push_back(selected[i]);
   for(auto i : idx.test) test.push_back(selected[i]);

   BenchmarkResult res;
   res.train_count = train.size();
   res.test_count  = test.size();
   const auto pipeline = build_pipeline(train, classes, cfg, &res.training);

   for(const auto& q : test) {
      Prediction p;
      p.truth  = *q.label;
      p.result = pipeline.classify(q, &p.end_to_end_ms);
      res.predictions.push_back(std::move(p));
   }
   res.report = score(res.predictions, classes);

   nlohmann::ordered_json run;
   run["classes"]        = classes;
   run["train_cases"]    = res.train_count;
   run["test_cases"]     = res.test_count;
   run["layout_version"] = cfg.embedding.layout_version();
   run["feature_dim"]    = cfg.embedding.feature_length();
   run["reference_dim"]  = pipeline.refs.dim();
   if(pipeline.model) {
      run["codec_best_epoch"]    = res.training.codec_best_epoch;
      run["codec_best_val_loss"] = res.training.codec_best_val_loss;
   }
   if(res.training.cv) {
      nlohmann::ordered_json acc;
      for(const auto& [k, a] : res.training.cv->accuracy) acc[std::to_string(k)] = a;
      run["cv_accuracy"] = std::move(acc);
   }
   res.report.config["pipeline"] = pipeline.config.to_json();
   res.report.config["run"]      = std::move(run);
   res.report.config["mode"]     = to_string(cfg.mode);
   return res;
}

std::vector<PoseSequence> load_manifest_sequences(const DatasetManifest& manifest)
{
   std::vector<PoseSequence> out;
   out.reserve(manifest.size());
   for(const auto& e : manifest.entries) {
      const auto ext = e.path.extension().string();
      const auto fmt = (ext == ".mat" || ext == ".txt") ? SequenceFormat::MhadSkeleton : SequenceFormat::NeutralNdjson;
      auto seq       = load_sequence(e.path, fmt);
      seq.label = e.label;
      if(!e.subject.empty()) seq.subject = e.subject;
      if(!e.trial.empty()) seq.trial = e.trial;
      out.push_back(std::move(seq));
   }
   return out;
}

BenchmarkResult run_benchmark(const DatasetManifest& manifest, const std::optional<std::vector<std::string>>& classes,
                              const PipelineConfig& cfg, const std::optional<std::filesystem::path>& out_dir)
{
   const auto selected  = classes ? filter_classes(manifest, *classes) : manifest;
   const auto sequences = load_manifest_sequences(selected);
   auto res             = run_benchmark(sequences, selected.classes, cfg);

   if(out_dir) {
      write_report(*out_dir, res.report);
      std::ofstream layout(*out_dir / "layout.csv");
      if(!layout) fail(ErrorKind::Io, "cannot write layout.csv");
      const auto names = cfg.embedding.layout_names();
      layout << "index,name\n";
      for(std::size_t i = 0; i < names.size(); ++i) layout << i << ',' << names[i] << '\n';
      if(!res.training.codec_curve.empty()) write_training_curve(*out_dir / "training_curve.csv", res.training.codec_curve);
      std::ofstream preds(*out_dir / "predictions.csv");
      if(!preds) fail(ErrorKind::Io, "cannot write predictions.csv");
      preds << "truth,predicted,nearest_distance\n";
      preds.precision(17);
      for(const auto& p : res.predictions)
         preds << p.truth << ',' << p.result.label.value_or("NullAction") << ','
               << (p.result.nearest.empty() ? 0.0 : p.result.nearest.front().distance) << '\n';
   }
   return res;
}

} // namespace har
