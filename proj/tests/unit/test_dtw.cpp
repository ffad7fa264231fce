#include "../oracles.hpp"
#include "har/dtw.hpp"
#include "har/errors.hpp"

#include <doctest.h>

using har::dtw_distance;

TEST_CASE("dtw: worked single-dimension example")
{
   Eigen::MatrixXd a(1, 1), b(1, 2);
   a << 0;
   b << 1, 2;
   CHECK(dtw_distance(a, b) == doctest::Approx(3.0));
   CHECK(dtw_distance(b, a) == doctest::Approx(3.0));
}

TEST_CASE("dtw: identity, symmetry, non-negativity")
{
   std::mt19937_64 rng(11);
   std::normal_distribution<double> nd;
   for(int t = 0; t < 30; ++t) {
      Eigen::MatrixXd a(3, 3 + t % 7), b(3, 2 + t % 5);
      for(Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
      for(Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = nd(rng);
      CHECK(dtw_distance(a, a) == 0.0);
      CHECK(dtw_distance(a, b) >= 0.0);
      for(double band : {0.1, 0.3, 1.0}) CHECK(dtw_distance(a, b, band) == doctest::Approx(dtw_distance(b, a, band)));
   }
}

TEST_CASE("dtw: unbanded matches path enumeration")
{
   std::mt19937_64 rng(5);
   std::uniform_int_distribution<int> len(1, 6), dim(1, 4);
   std::normal_distribution<double> nd;
   for(int t = 0; t < 60; ++t) {
      const int d = dim(rng);
      Eigen::MatrixXd a(d, len(rng)), b(d, len(rng));
      for(Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
      for(Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = nd(rng);
      CHECK(std::abs(dtw_distance(a, b, 1.0) - oracle::dtw_by_enumeration(a, b)) < 1e-9);
   }
}

TEST_CASE("dtw: band never lowers the distance")
{
   std::mt19937_64 rng(8);
   std::normal_distribution<double> nd;
   for(int t = 0; t < 40; ++t) {
      Eigen::MatrixXd a(2, 10 + t % 13), b(2, 7 + t % 17);
      for(Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
      for(Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = nd(rng);
      const double full = dtw_distance(a, b, 1.0);
      CHECK(dtw_distance(a, b, 0.05) >= full - 1e-12);
      CHECK(dtw_distance(a, b, 0.2) >= full - 1e-12);
      CHECK(std::isfinite(dtw_distance(a, b, 0.0)));
   }
}

TEST_CASE("dtw: errors")
{
   Eigen::MatrixXd a(2, 3), b(3, 3), e(2, 0);
   a.setZero();
   b.setZero();
   CHECK_THROWS_AS(dtw_distance(a, b), har::Error);
   try {
      dtw_distance(a, e);
      FAIL("expected throw");
   } catch(const har::Error& err) {
      CHECK(err.kind() == har::ErrorKind::EmptySequence);
   }
}
