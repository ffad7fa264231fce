#include "har/dtw.hpp"

#include "har/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace har
{
double dtw_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double band)
{
   if(a.cols() == 0 || b.cols() == 0) fail(ErrorKind::EmptySequence, "DTW needs non-empty sequences");
   if(a.rows() != b.rows()) fail(ErrorKind::DimMismatch, "DTW sequences have different frame dims");

   // rows of the cost grid run over the longer sequence
   const bool swap           = b.cols() > a.cols();
   const Eigen::MatrixXd& s  = swap ? b : a;
   const Eigen::MatrixXd& s2 = swap ? a : b;
   const Eigen::Index n      = s.cols();
   const Eigen::Index m      = s2.cols();

   const bool banded   = band < 1.0;
   const double window = std::max(1.0, band * static_cast<double>(n));
   const double slope  = n > 1 ? static_cast<double>(m - 1) / static_cast<double>(n - 1) : 0.0;

   constexpr double inf = std::numeric_limits<double>::infinity();
   std::vector<double> prev(static_cast<std::size_t>(m), inf), cur(static_cast<std::size_t>(m), inf);

   for(Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index lo = 0, hi = m - 1;
      if(banded) {
         const double center = static_cast<double>(i) * slope;
         lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil(center - window - 1e-9)));
         hi = std::min<Eigen::Index>(m - 1, static_cast<Eigen::Index>(std::floor(center + window + 1e-9)));
      }
      std::fill(cur.begin(), cur.end(), inf);
      for(Eigen::Index j = lo; j <= hi; ++j) {
         const double d = (s.col(i) - s2.col(j)).norm();
         double best;
         if(i == 0 && j == 0) best = 0.0;
         else {
            best = inf;
            if(i > 0) best = std::min(best, prev[static_cast<std::size_t>(j)]);
            if(j > 0) best = std::min(best, cur[static_cast<std::size_t>(j - 1)]);
            if(i > 0 && j > 0) best = std::min(best, prev[static_cast<std::size_t>(j - 1)]);
         }
         cur[static_cast<std::size_t>(j)] = best + d;
      }
      std::swap(prev, cur);
   }
   return prev[static_cast<std::size_t>(m - 1)];
}

} // namespace har
