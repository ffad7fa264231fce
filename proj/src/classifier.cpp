#include "har/classifier.hpp"

#include "har/dtw.hpp"
#include "har/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace har
{
namespace
{
bool neighbor_less(const Neighbor& a, const Neighbor& b)
{
   if(a.distance != b.distance) return a.distance < b.distance;
   return a.reference < b.reference;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; results must be
// written to per-index slots so the outcome is independent of scheduling.
template<typename Fn> void parallel_for(std::size_t n, int threads, Fn&& fn)
{
   const auto workers = static_cast<std::size_t>(std::max(1, threads));
   if(workers == 1 || n < 2) {
      for(std::size_t i = 0; i < n; ++i) fn(i);
      return;
   }
   std::vector<std::jthread> pool;
   for(std::size_t w = 0; w < std::min(workers, n); ++w)
      pool.emplace_back([&, w] {
         for(std::size_t i = w; i < n; i += workers) fn(i);
      });
}

} // namespace

void ClassifierConfig::validate() const
{
   if(k <= 0 || shortlist <= 0) fail(ErrorKind::Config, "k and shortlist size must be positive");
   if(k > shortlist) fail(ErrorKind::Config, "k must not exceed the shortlist size");
   if(!(band > 0.0)) fail(ErrorKind::Config, "DTW band must be positive");
   if(reject_threshold && !(*reject_threshold >= 0.0)) fail(ErrorKind::Config, "reject threshold must be >= 0");
   if(threads <= 0) fail(ErrorKind::Config, "threads must be positive");
}

// -- ReferenceSet -------------------------------------------------------------------

ReferenceSet::ReferenceSet(std::vector<std::string> classes, ClassifierConfig cfg)
    : classes_(std::move(classes))
    , cfg_(cfg)
{
   cfg_.validate();
}

void ReferenceSet::add(const FeatureSequence& seq, const std::string& label)
{
   add(seq.values, label);
}

void ReferenceSet::add(Eigen::MatrixXd frames, const std::string& label)
{
   if(frames.cols() == 0) fail(ErrorKind::EmptySequence, "reference sequence is empty");
   if(!refs_.empty() && frames.rows() != dim()) fail(ErrorKind::DimMismatch, "reference dims differ");
   if(std::find(classes_.begin(), classes_.end(), label) == classes_.end())
      fail(ErrorKind::Validation, "label '" + label + "' is not in the class registry");
   Reference r;
   r.summary = frames.rowwise().mean();
   r.frames  = std::move(frames);
   r.label   = label;
   refs_.push_back(std::move(r));
}

std::size_t ReferenceSet::class_rank(const std::string& label) const
{
   const auto it = std::find(classes_.begin(), classes_.end(), label);
   return static_cast<std::size_t>(it - classes_.begin());
}

void ReferenceSet::validate() const
{
   cfg_.validate();
   if(refs_.empty()) fail(ErrorKind::EmptyInput, "reference set is empty");
   if(static_cast<std::size_t>(cfg_.k) > refs_.size())
      fail(ErrorKind::Config, "k exceeds the number of references");
}

// -- Two-stage search -----------------------------------------------------------------

std::vector<std::size_t> shortlist(const Eigen::MatrixXd& query, const ReferenceSet& refs)
{
   const auto& all     = refs.references();
   const std::size_t m = std::min(all.size(), static_cast<std::size_t>(refs.config().shortlist));
   std::vector<std::size_t> idx(all.size());
   std::iota(idx.begin(), idx.end(), std::size_t{0});
   if(m == all.size()) return idx;

   const Eigen::VectorXd q = query.rowwise().mean();
   std::vector<double> dist(all.size());
   for(std::size_t i = 0; i < all.size(); ++i) dist[i] = (all[i].summary - q).norm();
   std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] != dist[b] ? dist[a] < dist[b] : a < b; });
   idx.resize(m);
   return idx;
}

std::vector<Neighbor> ranked_neighbors(const Eigen::MatrixXd& query, const ReferenceSet& refs)
{
   if(query.cols() == 0) fail(ErrorKind::EmptySequence, "query is empty");
   if(query.rows() != refs.dim()) fail(ErrorKind::DimMismatch, "query dim does not match the references");
   const auto candidates = shortlist(query, refs);
   const auto& all       = refs.references();
   std::vector<Neighbor> out(candidates.size());
   parallel_for(candidates.size(), refs.config().threads, [&](std::size_t i) {
      const auto r = candidates[i];
      out[i]       = {r, all[r].label, dtw_distance(query, all[r].frames, refs.config().band)};
   });
   std::sort(out.begin(), out.end(), neighbor_less);
   return out;
}

std::string vote(std::span<const Neighbor> neighbors, const ReferenceSet& refs, std::map<std::string, int>* counts)
{
   if(neighbors.empty()) fail(ErrorKind::EmptyInput, "no neighbors to vote over");
   std::map<std::string, int> votes;
   std::map<std::string, double> dist_sum;
   for(const auto& n : neighbors) {
      ++votes[n.label];
      dist_sum[n.label] += n.distance;
   }
   const std::string* best = nullptr;
   for(const auto& [label, count] : votes) {
      if(!best) {
         best = &label;
         continue;
      }
      const int bc = votes[*best];
      if(count != bc) {
         if(count > bc) best = &label;
         continue;
      }
      const double mean  = dist_sum[label] / count;
      const double bmean = dist_sum[*best] / bc;
      if(mean < bmean || (mean == bmean && refs.class_rank(label) < refs.class_rank(*best))) best = &label;
   }
   std::string winner = *best;
   if(counts) *counts = std::move(votes);
   return winner;
}

ClassificationResult classify(const Eigen::MatrixXd& query, const ReferenceSet& refs)
{
   const auto start = std::chrono::steady_clock::now();
   refs.validate();
   if(query.cols() < 2) fail(ErrorKind::Validation, "query needs at least 2 frames");

   auto ranked         = ranked_neighbors(query, refs);
   const auto& cfg     = refs.config();
   const std::size_t k = std::min(ranked.size(), static_cast<std::size_t>(cfg.k));
   if(!cfg.vote_over_shortlist) ranked.resize(k);

   ClassificationResult res;
   res.label   = vote(ranked, refs, &res.votes);
   res.nearest = std::move(ranked);
   if(cfg.reject_threshold && res.nearest.front().distance > *cfg.reject_threshold) res.label.reset();
   res.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
   return res;
}

ClassificationResult classify(const FeatureSequence& query, const ReferenceSet& refs)
{
   return classify(query.values, refs);
}

double calibrate_reject_threshold(const ReferenceSet& refs, double percentile)
{
   if(!(percentile > 0.0 && percentile <= 1.0)) fail(ErrorKind::Config, "percentile must lie in (0, 1]");
   const auto& all = refs.references();
   std::vector<std::pair<std::size_t, std::size_t>> pairs;
   for(std::size_t i = 0; i < all.size(); ++i)
      for(std::size_t j = i + 1; j < all.size(); ++j)
         if(all[i].label == all[j].label) pairs.emplace_back(i, j);
   if(pairs.empty()) fail(ErrorKind::InsufficientData, "no within-class reference pairs");

   std::vector<double> d(pairs.size());
   parallel_for(pairs.size(), refs.config().threads, [&](std::size_t p) {
      d[p] = dtw_distance(all[pairs[p].first].frames, all[pairs[p].second].frames, refs.config().band);
   });
   std::sort(d.begin(), d.end());
   // nearest-rank percentile
   const auto rank = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(d.size()) - 1e-9));
   return d[std::clamp<std::size_t>(rank, 1, d.size()) - 1];
}

CrossValidation cross_validate_k(const ReferenceSet& refs, const std::vector<int>& k_candidates, int folds,
                                 std::uint64_t seed)
{
   if(folds < 2) fail(ErrorKind::Config, "cross-validation needs at least 2 folds");
   if(k_candidates.empty()) fail(ErrorKind::Config, "no k candidates");
   for(int k : k_candidates)
      if(k <= 0) fail(ErrorKind::Config, "k candidates must be positive");

   const auto& all = refs.references();
   std::vector<int> fold_of(all.size(), 0);
   std::mt19937_64 rng(seed);
   for(const auto& cls : refs.classes()) {
      std::vector<std::size_t> members;
      for(std::size_t i = 0; i < all.size(); ++i)
         if(all[i].label == cls) members.push_back(i);
      if(members.empty()) continue;
      if(members.size() < static_cast<std::size_t>(folds))
         fail(ErrorKind::ClassTooSmall, "class '" + cls + "' has fewer members than folds");
      std::shuffle(members.begin(), members.end(), rng);
      for(std::size_t p = 0; p < members.size(); ++p) fold_of[members[p]] = static_cast<int>(p % static_cast<std::size_t>(folds));
   }

   std::vector<int> ks = k_candidates;
   std::sort(ks.begin(), ks.end());
   ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
   std::map<int, int> correct;
   std::size_t total = 0;

   for(int f = 0; f < folds; ++f) {
      ClassifierConfig cfg = refs.config();
      cfg.k                = 1;
      cfg.shortlist        = std::max(cfg.shortlist, ks.back());
      ReferenceSet train(refs.classes(), cfg);
      std::vector<std::size_t> held;
      for(std::size_t i = 0; i < all.size(); ++i) {
         if(fold_of[i] == f) held.push_back(i);
         else train.add(all[i].frames, all[i].label);
      }
      for(auto q : held) {
         const auto ranked = ranked_neighbors(all[q].frames, train);
         for(int k : ks) {
            const auto n = std::min(ranked.size(), static_cast<std::size_t>(k));
            if(vote(std::span(ranked).first(n), train, nullptr) == all[q].label) ++correct[k];
         }
         ++total;
      }
   }

   CrossValidation cv;
   double best = -1.0;
   for(int k : ks) {
      const double acc = total ? static_cast<double>(correct[k]) / static_cast<double>(total) : 0.0;
      cv.accuracy[k]   = acc;
      if(acc > best) {
         best      = acc;
         cv.best_k = k;
      }
   }
   return cv;
}

} // namespace har
