#pragma once

#include "har/embedding.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace har
{
struct ClassifierConfig
{
   int k                     = 5;
   int shortlist             = 30;  // m; >= reference count disables the prefilter
   double band               = 0.2; // Sakoe-Chiba width as a fraction; 1.0 = unconstrained
   std::optional<double> reject_threshold; // tau; nearest DTW distance above it -> NullAction
   bool vote_over_shortlist = false;       // vote over all m instead of the k nearest
   int threads              = 1;

   void validate() const;
};

struct Reference
{
   Eigen::MatrixXd frames; // dim x length
   std::string label;
   Eigen::VectorXd summary; // mean frame
};

class ReferenceSet
{
 public:
   ReferenceSet() = default;
   // `classes` fixes the label registry order used for tie-breaking.
   ReferenceSet(std::vector<std::string> classes, ClassifierConfig cfg);

   void add(const FeatureSequence& seq, const std::string& label);
   void add(Eigen::MatrixXd frames, const std::string& label);

   const std::vector<Reference>& references() const noexcept { return refs_; }
   const std::vector<std::string>& classes() const noexcept { return classes_; }
   const ClassifierConfig& config() const noexcept { return cfg_; }
   ClassifierConfig& config() noexcept { return cfg_; }
   Eigen::Index dim() const noexcept { return refs_.empty() ? 0 : refs_.front().frames.rows(); }
   std::size_t size() const noexcept { return refs_.size(); }
   std::size_t class_rank(const std::string& label) const;

   // Checks k <= m <= count (m clamped to count) and label registry membership.
   void validate() const;

 private:
   std::vector<std::string> classes_;
   ClassifierConfig cfg_;
   std::vector<Reference> refs_;
};

struct Neighbor
{
   std::size_t reference = 0;
   std::string label;
   double distance = 0.0;
};

struct ClassificationResult
{
   std::optional<std::string> label; // empty = NullAction
   std::vector<Neighbor> nearest;    // ascending distance
   std::map<std::string, int> votes;
   double elapsed_ms = 0.0;

   bool null_action() const noexcept { return !label.has_value(); }
};

std::vector<std::size_t> shortlist(const Eigen::MatrixXd& query, const ReferenceSet& refs);

// All shortlisted references with their DTW distance, sorted ascending by
// (distance, reference index).
std::vector<Neighbor> ranked_neighbors(const Eigen::MatrixXd& query, const ReferenceSet& refs);

// Majority label among the first `k` neighbors; ties go to the smallest mean
// distance, then registry order.
std::string vote(std::span<const Neighbor> neighbors, const ReferenceSet& refs, std::map<std::string, int>* counts);

ClassificationResult classify(const Eigen::MatrixXd& query, const ReferenceSet& refs);
ClassificationResult classify(const FeatureSequence& query, const ReferenceSet& refs);

// tau as the given percentile of all pairwise within-class reference DTW distances.
double calibrate_reject_threshold(const ReferenceSet& refs, double percentile = 0.99);

struct CrossValidation
{
   int best_k = 0;
   std::map<int, double> accuracy; // per candidate k
};

// Stratified f-fold cross-validation over the references. Throws
// ClassTooSmall when a class has fewer members than folds.
CrossValidation cross_validate_k(const ReferenceSet& refs, const std::vector<int>& k_candidates, int folds,
                                 std::uint64_t seed);

} // namespace har
