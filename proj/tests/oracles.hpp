#pragma once

// Independent reference implementations used to check the library. They
// favour obviousness over speed and share no code with src/.

#include "har/codec.hpp"
#include "har/skeleton.hpp"

#include <Eigen/Core>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace oracle
{
// Every monotone path from (0,0) to (n-1,m-1) with unit steps, summed directly.
inline double dtw_by_enumeration(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
   const auto n = a.cols(), m = b.cols();
   double best  = std::numeric_limits<double>::infinity();
   std::function<void(Eigen::Index, Eigen::Index, double)> walk = [&](Eigen::Index i, Eigen::Index j, double acc) {
      acc += (a.col(i) - b.col(j)).norm();
      if(i == n - 1 && j == m - 1) {
         best = std::min(best, acc);
         return;
      }
      if(i + 1 < n) walk(i + 1, j, acc);
      if(j + 1 < m) walk(i, j + 1, acc);
      if(i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
   };
   walk(0, 0, 0.0);
   return best;
}

// Central differences of the reconstruction loss with respect to every
// weight and bias, in layer order (encoder then decoder).
inline std::vector<double> numeric_gradient(har::MLPModel model, const Eigen::MatrixXd& batch, double h)
{
   auto loss = [&] {
      Eigen::MatrixXd x = batch;
      for(auto* layers : {&model.encoder, &model.decoder})
         for(const auto& l : *layers) {
            x = (l.weight * x).colwise() + l.bias;
            if(l.activation == har::Activation::Tanh) x = x.array().tanh().matrix();
         }
      return (x - batch).squaredNorm() / static_cast<double>(batch.size());
   };
   std::vector<double> g;
   auto probe = [&](double& w) {
      const double keep = w;
      w                 = keep + h;
      const double up   = loss();
      w                 = keep - h;
      const double down = loss();
      w                 = keep;
      g.push_back((up - down) / (2 * h));
   };
   for(auto* layers : {&model.encoder, &model.decoder})
      for(auto& l : *layers) {
         for(Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for(Eigen::Index c = 0; c < l.weight.cols(); ++c) probe(l.weight(r, c));
         for(Eigen::Index r = 0; r < l.bias.size(); ++r) probe(l.bias(r));
      }
   return g;
}

inline std::vector<double> flatten(const har::LossAndGradient& g)
{
   std::vector<double> out;
   for(const auto& l : g.layers) {
      for(Eigen::Index r = 0; r < l.weight.rows(); ++r)
         for(Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
      for(Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
   }
   return out;
}

// ||a - b|| / max(||a||, ||b||, floor)
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-12)
{
   double diff = 0, na = 0, nb = 0;
   for(std::size_t i = 0; i < a.size(); ++i) {
      diff += (a[i] - b[i]) * (a[i] - b[i]);
      na += a[i] * a[i];
      nb += b[i] * b[i];
   }
   return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

inline std::size_t ceil_test_count(std::size_t total, double ratio)
{
   // integer arithmetic for ratio = p / q with small q
   for(std::size_t q = 1; q <= 1000; ++q) {
      const double p = ratio * static_cast<double>(q);
      if(std::abs(p - std::round(p)) < 1e-12) {
         const auto pn = static_cast<std::size_t>(std::llround(p));
         return (total * pn + q - 1) / q;
      }
   }
   return static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(total)));
}

// Sort, drop zeros, average the lowest ceil(q * n).
inline double quartile_mean(std::vector<std::uint16_t> v, double q)
{
   v.erase(std::remove(v.begin(), v.end(), 0), v.end());
   std::sort(v.begin(), v.end());
   const auto take = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()) - 1e-12));
   double s        = 0;
   for(std::size_t i = 0; i < take; ++i) s += v[i];
   return s / static_cast<double>(take);
}

// Weighted F1 straight from a confusion matrix (rows truth, cols predicted;
// an extra trailing column holds rejections).
inline double weighted_f1(const std::vector<std::vector<int>>& cm)
{
   const std::size_t k = cm.size();
   double total        = 0;
   for(const auto& row : cm)
      for(int v : row) total += v;
   double out = 0;
   for(std::size_t c = 0; c < k; ++c) {
      double tp = cm[c][c], row = 0, col = 0;
      for(std::size_t j = 0; j < cm[c].size(); ++j) row += cm[c][j];
      for(std::size_t i = 0; i < k; ++i) col += cm[i][c];
      const double p  = col > 0 ? tp / col : 0;
      const double r  = row > 0 ? tp / row : 0;
      const double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0;
      out += row / total * f1;
   }
   return out;
}

inline har::Skeleton3D random_pose(std::mt19937_64& rng, double t = 0.0)
{
   std::uniform_real_distribution<double> u(-1.0, 1.0);
   har::Skeleton3D s;
   s.timestamp = t;
   for(auto& p : s.points) p = har::Vec3(u(rng), u(rng), u(rng));
   // keep hips below shoulders by a healthy margin
   s[har::LandmarkId::LShoulder].y() += 2.0;
   s[har::LandmarkId::RShoulder].y() += 2.0;
   s.visibility.fill(1.0);
   return s;
}

// -- MAT v5 fixture writer ------------------------------------------------------

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v)
{
   for(int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void pad8(std::vector<unsigned char>& out)
{
   while(out.size() % 8) out.push_back(0);
}

// One miMATRIX element holding a double array.
inline std::vector<unsigned char> mat_matrix_element(const std::string& name, const std::vector<std::uint32_t>& dims,
                                                      const std::vector<double>& data)
{
   std::vector<unsigned char> body;
   // array flags: miUINT32, 8 bytes, class mxDOUBLE_CLASS = 6
   put_u32(body, 6);
   put_u32(body, 8);
   put_u32(body, 6);
   put_u32(body, 0);
   // dimensions: miINT32
   put_u32(body, 5);
   put_u32(body, static_cast<std::uint32_t>(4 * dims.size()));
   for(auto d : dims) put_u32(body, d);
   pad8(body);
   // name: miINT8
   put_u32(body, 1);
   put_u32(body, static_cast<std::uint32_t>(name.size()));
   body.insert(body.end(), name.begin(), name.end());
   pad8(body);
   // real part: miDOUBLE
   put_u32(body, 9);
   put_u32(body, static_cast<std::uint32_t>(8 * data.size()));
   for(double d : data) {
      unsigned char b[8];
      std::memcpy(b, &d, 8);
      body.insert(body.end(), b, b + 8);
   }
   pad8(body);

   std::vector<unsigned char> el;
   put_u32(el, 14);
   put_u32(el, static_cast<std::uint32_t>(body.size()));
   el.insert(el.end(), body.begin(), body.end());
   return el;
}

inline std::vector<unsigned char> mat_file(const std::string& name, const std::vector<std::uint32_t>& dims,
                                           const std::vector<double>& data, bool compressed)
{
   std::vector<unsigned char> out(128, ' ');
   const char* text = "MATLAB 5.0 MAT-file, fixture";
   std::memcpy(out.data(), text, std::strlen(text));
   for(int i = 116; i < 124; ++i) out[static_cast<std::size_t>(i)] = 0;
   out[124] = 0x00;
   out[125] = 0x01;
   out[126] = 'I';
   out[127] = 'M';
   auto el  = mat_matrix_element(name, dims, data);
   if(!compressed) {
      out.insert(out.end(), el.begin(), el.end());
      return out;
   }
   uLongf len = compressBound(static_cast<uLong>(el.size()));
   std::vector<unsigned char> z(len);
   compress(z.data(), &len, el.data(), static_cast<uLong>(el.size()));
   z.resize(len);
   put_u32(out, 15);
   put_u32(out, static_cast<std::uint32_t>(z.size()));
   out.insert(out.end(), z.begin(), z.end());
   return out;
}

} // namespace oracle
