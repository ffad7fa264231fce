#pragma once

#include <Eigen/Core>

namespace har
{
// Dynamic time warping over column-per-frame sequences with Euclidean frame
// distance, steps (1,0), (0,1), (1,1) and fixed endpoints.
//
// `band` < 1 restricts alignments to a Sakoe-Chiba corridor around the
// diagonal from (0,0) to (n-1,m-1): |i*(m-1)/(n-1) - j| <= max(1, band*max(n,m)),
// with i running over the longer sequence so the result is symmetric.
// band >= 1 is unconstrained.
double dtw_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double band = 1.0);

} // namespace har
