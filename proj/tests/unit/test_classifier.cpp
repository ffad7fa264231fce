#include "../oracles.hpp"
#include "har/classifier.hpp"
#include "har/dtw.hpp"
#include "har/errors.hpp"

#include <doctest.h>

#include <numeric>

using namespace har;

namespace
{
Eigen::MatrixXd random_seq(std::mt19937_64& rng, int dim, int len, double center, double spread = 0.1)
{
   std::normal_distribution<double> nd(0, spread);
   Eigen::MatrixXd m(dim, len);
   for(Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = center + nd(rng);
   return m;
}

ReferenceSet clustered_refs(std::uint64_t seed, ClassifierConfig cfg, int per_class = 6)
{
   std::mt19937_64 rng(seed);
   ReferenceSet refs({"a", "b", "c"}, cfg);
   for(int i = 0; i < per_class; ++i) {
      refs.add(random_seq(rng, 3, 8 + i % 3, 0.0), "a");
      refs.add(random_seq(rng, 3, 8 + i % 4, 3.0), "b");
      refs.add(random_seq(rng, 3, 7 + i % 2, -3.0), "c");
   }
   return refs;
}

std::vector<Neighbor> neighbors(std::initializer_list<std::pair<const char*, double>> list)
{
   std::vector<Neighbor> out;
   std::size_t i = 0;
   for(auto [l, d] : list) out.push_back({i++, l, d});
   return out;
}
} // namespace

TEST_CASE("classifier: shortlist matches a full sort")
{
   std::mt19937_64 rng(1);
   ClassifierConfig cfg;
   cfg.k         = 1;
   cfg.shortlist = 5;
   ReferenceSet refs({"x"}, cfg);
   for(int i = 0; i < 20; ++i) refs.add(random_seq(rng, 4, 5 + i % 4, 0.0, 1.0), "x");
   const auto q = random_seq(rng, 4, 6, 0.0, 1.0);
   std::vector<std::size_t> order(20);
   std::iota(order.begin(), order.end(), std::size_t{0});
   std::vector<double> d(20);
   for(std::size_t i = 0; i < 20; ++i)
      d[i] = (refs.references()[i].frames.rowwise().mean() - q.rowwise().mean()).norm();
   std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return d[a] < d[b]; });
   order.resize(5);
   CHECK(shortlist(q, refs) == order);

   refs.config().shortlist = 20;
   CHECK(shortlist(q, refs).size() == 20);
   refs.config().shortlist = 5;
   CHECK(shortlist(refs.references()[7].frames, refs).front() == 7);
}

TEST_CASE("classifier: vote rules")
{
   ClassifierConfig cfg;
   cfg.k = 3;
   ReferenceSet refs({"a1", "a6", "a9"}, cfg);
   std::map<std::string, int> counts;
   CHECK(vote(neighbors({{"a1", 1}, {"a1", 2}, {"a6", 3}}), refs, &counts) == "a1");
   CHECK(counts["a1"] == 2);
   // tie on count: smaller mean distance wins
   CHECK(vote(neighbors({{"a6", 1}, {"a1", 2}, {"a1", 2.5}, {"a6", 4}}), refs, nullptr) == "a1");
   // tie on count and mean: registry order
   CHECK(vote(neighbors({{"a9", 1}, {"a6", 1}}), refs, nullptr) == "a6");
}

TEST_CASE("classifier: exact match, rejection and invariances")
{
   ClassifierConfig cfg;
   cfg.k         = 3;
   cfg.shortlist = 1 << 30;
   cfg.band      = 1.0;
   auto refs     = clustered_refs(2, cfg);
   const auto& r = refs.references()[4];
   const auto res = classify(r.frames, refs);
   CHECK(res.label == r.label);
   CHECK(res.nearest.front().distance == 0.0);
   for(std::size_t i = 1; i < res.nearest.size(); ++i) CHECK(res.nearest[i - 1].distance <= res.nearest[i].distance);

   // reference order does not matter in the unconstrained configuration
   std::mt19937_64 rng(9);
   const auto q = random_seq(rng, 3, 9, 2.6, 0.5);
   auto shuffled = ReferenceSet(refs.classes(), cfg);
   std::vector<std::size_t> order(refs.size());
   std::iota(order.begin(), order.end(), std::size_t{0});
   std::shuffle(order.begin(), order.end(), rng);
   for(auto i : order) shuffled.add(refs.references()[i].frames, refs.references()[i].label);
   CHECK(classify(q, refs).label == classify(q, shuffled).label);
   CHECK(classify(q, refs).label == "b");

   // duplicating the nearest true-label reference keeps the prediction
   const auto before = classify(q, refs);
   auto dup          = refs;
   dup.add(refs.references()[before.nearest.front().reference].frames, *before.label);
   CHECK(classify(q, dup).label == before.label);

   const double tau = calibrate_reject_threshold(refs, 0.99);
   CHECK(tau > 0.0);
   refs.config().reject_threshold = tau;
   const auto far = random_seq(rng, 3, 9, 40.0);
   const auto rej = classify(far, refs);
   CHECK(rej.null_action());
   CHECK_FALSE(rej.nearest.empty());

   Eigen::MatrixXd one(3, 1);
   one.setZero();
   CHECK_THROWS_AS(classify(one, refs), Error);
}

TEST_CASE("classifier: cross-validation picks k")
{
   ClassifierConfig cfg;
   cfg.k     = 1;
   auto refs = clustered_refs(3, cfg);
   const auto single = cross_validate_k(refs, {3}, 3, 1);
   CHECK(single.best_k == 3);
   const auto cv = cross_validate_k(refs, {5, 1, 3}, 3, 1);
   CHECK(cv.accuracy.at(cv.best_k) == 1.0);
   CHECK(cv.best_k == 1); // all perfect, smallest wins
   CHECK(cross_validate_k(refs, {1, 3}, 3, 1).best_k == cross_validate_k(refs, {1, 3}, 3, 1).best_k);
   try {
      cross_validate_k(refs, {1}, 7, 1);
      FAIL("expected throw");
   } catch(const Error& e) {
      CHECK(e.kind() == ErrorKind::ClassTooSmall);
   }
}

TEST_CASE("classifier: reference set validation")
{
   ClassifierConfig cfg;
   ReferenceSet refs({"a"}, cfg);
   CHECK_THROWS_AS(refs.validate(), Error);
   CHECK_THROWS_AS(refs.add(Eigen::MatrixXd::Zero(2, 3), "unknown"), Error);
   refs.add(Eigen::MatrixXd::Zero(2, 3), "a");
   CHECK_THROWS_AS(refs.add(Eigen::MatrixXd::Zero(3, 3), "a"), Error);
   CHECK_THROWS_AS(refs.validate(), Error); // k = 5 > 1 reference
}
