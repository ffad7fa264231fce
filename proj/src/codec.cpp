#include "har/codec.hpp"

#include "binary_io.hpp"
#include "har/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

namespace har
{
namespace
{
using json = nlohmann::ordered_json;

const std::string k_model_magic = "HARMLP1\n";

std::vector<const DenseLayer*> all_layers(const MLPModel& m)
{
   std::vector<const DenseLayer*> out;
   for(const auto& l : m.encoder) out.push_back(&l);
   for(const auto& l : m.decoder) out.push_back(&l);
   return out;
}

std::vector<DenseLayer*> all_layers(MLPModel& m)
{
   std::vector<DenseLayer*> out;
   for(auto& l : m.encoder) out.push_back(&l);
   for(auto& l : m.decoder) out.push_back(&l);
   return out;
}

Eigen::MatrixXd forward(const DenseLayer& layer, const Eigen::MatrixXd& x)
{
   Eigen::MatrixXd y = layer.weight * x;
   y.colwise() += layer.bias;
   if(layer.activation == Activation::Tanh) y = y.array().tanh().matrix();
   return y;
}

DenseLayer xavier_layer(Eigen::Index in, Eigen::Index out, Activation act, std::mt19937_64& rng)
{
   DenseLayer l;
   l.activation       = act;
   const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
   std::uniform_real_distribution<double> dist(-limit, limit);
   l.weight.resize(out, in);
   for(Eigen::Index r = 0; r < out; ++r)
      for(Eigen::Index c = 0; c < in; ++c) l.weight(r, c) = dist(rng);
   l.bias = Eigen::VectorXd::Zero(out);
   return l;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& src, const std::vector<Eigen::Index>& idx, std::size_t begin,
                               std::size_t end)
{
   Eigen::MatrixXd out(src.rows(), static_cast<Eigen::Index>(end - begin));
   for(std::size_t i = begin; i < end; ++i) out.col(static_cast<Eigen::Index>(i - begin)) = src.col(idx[i]);
   return out;
}

struct AdamState
{
   std::vector<LayerGradient> m;
   std::vector<LayerGradient> v;
   long step = 0;
};

AdamState make_adam(const MLPModel& model)
{
   AdamState s;
   for(const auto* l : all_layers(model)) {
      LayerGradient z{Eigen::MatrixXd::Zero(l->out(), l->in()), Eigen::VectorXd::Zero(l->out())};
      s.m.push_back(z);
      s.v.push_back(z);
   }
   return s;
}

void adam_update(MLPModel& model, const LossAndGradient& g, AdamState& s, double lr)
{
   constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
   ++s.step;
   const double c1 = 1.0 - std::pow(b1, static_cast<double>(s.step));
   const double c2 = 1.0 - std::pow(b2, static_cast<double>(s.step));
   auto layers     = all_layers(model);
   for(std::size_t i = 0; i < layers.size(); ++i) {
      auto step = [&](auto& param, const auto& grad, auto& m, auto& v) {
         m = b1 * m + (1.0 - b1) * grad;
         v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
         param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
      };
      step(layers[i]->weight, g.layers[i].weight, s.m[i].weight, s.v[i].weight);
      step(layers[i]->bias, g.layers[i].bias, s.m[i].bias, s.v[i].bias);
   }
}

} // namespace

// -- Model ----------------------------------------------------------------------

Eigen::Index MLPModel::input_dim() const noexcept
{
   return encoder.empty() ? 0 : encoder.front().in();
}

Eigen::Index MLPModel::latent_dim() const noexcept
{
   return encoder.empty() ? 0 : encoder.back().out();
}

void MLPModel::validate() const
{
   if(encoder.empty() || decoder.size() != encoder.size())
      fail(ErrorKind::Validation, "encoder and decoder must have the same non-zero depth");
   auto chain_ok = [](const std::vector<DenseLayer>& layers) {
      for(std::size_t i = 0; i < layers.size(); ++i) {
         if(layers[i].bias.size() != layers[i].out()) return false;
         if(i > 0 && layers[i].in() != layers[i - 1].out()) return false;
      }
      return true;
   };
   if(!chain_ok(encoder) || !chain_ok(decoder) || decoder.front().in() != latent_dim())
      fail(ErrorKind::Validation, "layer shapes do not chain");
   if(decoder.back().out() != input_dim()) fail(ErrorKind::Validation, "decoder output must match the input dim");
   for(std::size_t i = 0; i < encoder.size(); ++i)
      if(encoder[i].in() != decoder[decoder.size() - 1 - i].out())
         fail(ErrorKind::Validation, "encoder and decoder are not mirror-symmetric");
   if(latent_dim() > input_dim()) fail(ErrorKind::Validation, "latent dim exceeds the input dim");
}

Eigen::MatrixXd MLPModel::encode(const Eigen::MatrixXd& x) const
{
   if(x.rows() != input_dim()) fail(ErrorKind::DimMismatch, "input rows do not match the encoder");
   Eigen::MatrixXd h = x;
   for(const auto& l : encoder) h = forward(l, h);
   return h;
}

Eigen::MatrixXd MLPModel::decode(const Eigen::MatrixXd& z) const
{
   if(z.rows() != latent_dim()) fail(ErrorKind::DimMismatch, "latent rows do not match the decoder");
   Eigen::MatrixXd h = z;
   for(const auto& l : decoder) h = forward(l, h);
   return h;
}

MLPModel MLPModel::identity(Eigen::Index dim, std::string layout)
{
   MLPModel m;
   m.layout = std::move(layout);
   DenseLayer l{Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim), Activation::Linear};
   m.encoder.push_back(l);
   m.decoder.push_back(l);
   return m;
}

void TrainConfig::validate() const
{
   if(latent_dim <= 0 || !(learning_rate > 0.0) || epochs <= 0 || batch_size <= 0 || patience <= 0)
      fail(ErrorKind::Config, "codec training parameters must be positive");
   for(int h : hidden)
      if(h <= 0) fail(ErrorKind::Config, "hidden sizes must be positive");
   if(!(validation_fraction > 0.0 && validation_fraction < 1.0))
      fail(ErrorKind::Config, "validation fraction must lie in (0, 1)");
}

MLPModel make_autoencoder(Eigen::Index input_dim, const TrainConfig& cfg, std::uint64_t seed)
{
   std::vector<Eigen::Index> sizes{input_dim};
   for(int h : cfg.hidden) sizes.push_back(h);
   sizes.push_back(cfg.latent_dim);

   std::mt19937_64 rng(seed);
   MLPModel m;
   for(std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      const bool last = i + 2 == sizes.size();
      m.encoder.push_back(xavier_layer(sizes[i], sizes[i + 1], last ? Activation::Linear : Activation::Tanh, rng));
   }
   for(std::size_t i = sizes.size() - 1; i > 0; --i) {
      const bool last = i == 1;
      m.decoder.push_back(xavier_layer(sizes[i], sizes[i - 1], last ? Activation::Linear : Activation::Tanh, rng));
   }
   return m;
}

// -- Loss and gradient ------------------------------------------------------------

double reconstruction_loss(const MLPModel& model, const Eigen::MatrixXd& batch)
{
   return (model.reconstruct(batch) - batch).squaredNorm() / static_cast<double>(batch.size());
}

LossAndGradient loss_and_gradient(const MLPModel& model, const Eigen::MatrixXd& batch)
{
   const auto layers = all_layers(model);
   // activations[i] is the input to layer i; activations.back() the output
   std::vector<Eigen::MatrixXd> activations{batch};
   activations.reserve(layers.size() + 1);
   for(const auto* l : layers) activations.push_back(forward(*l, activations.back()));

   const Eigen::MatrixXd diff = activations.back() - batch;
   const double n             = static_cast<double>(batch.size());

   LossAndGradient out;
   out.loss = diff.squaredNorm() / n;
   out.layers.resize(layers.size());

   Eigen::MatrixXd delta = (2.0 / n) * diff; // dL/d(output)
   for(std::size_t i = layers.size(); i-- > 0;) {
      const auto& l = *layers[i];
      if(l.activation == Activation::Tanh)
         delta = delta.cwiseProduct((1.0 - activations[i + 1].array().square()).matrix());
      out.layers[i].weight = delta * activations[i].transpose();
      out.layers[i].bias   = delta.rowwise().sum();
      if(i > 0) delta = l.weight.transpose() * delta;
   }
   return out;
}

// -- Training -------------------------------------------------------------------

TrainResult train_codec(const Eigen::MatrixXd& frames, const std::string& layout, const TrainConfig& cfg)
{
   cfg.validate();
   const auto n = static_cast<std::size_t>(frames.cols());
   if(n < static_cast<std::size_t>(cfg.batch_size))
      fail(ErrorKind::InsufficientData, std::to_string(n) + " frames is fewer than one batch");
   if(cfg.latent_dim >= frames.rows())
      fail(ErrorKind::Config, "latent dim must be smaller than the input dim");

   std::mt19937_64 rng(cfg.seed);
   std::vector<Eigen::Index> order(n);
   std::iota(order.begin(), order.end(), Eigen::Index{0});
   std::shuffle(order.begin(), order.end(), rng);

   const std::size_t n_val = std::max<std::size_t>(
       1, static_cast<std::size_t>(std::round(cfg.validation_fraction * static_cast<double>(n))));
   const Eigen::MatrixXd val = gather_columns(frames, order, 0, n_val);
   std::vector<Eigen::Index> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

   TrainResult res;
   MLPModel model = make_autoencoder(frames.rows(), cfg, rng());
   model.layout   = layout;
   AdamState adam = make_adam(model);

   res.model         = model;
   res.best_val_loss = std::numeric_limits<double>::infinity();
   int since_best    = 0;
   const auto batch  = static_cast<std::size_t>(cfg.batch_size);

   for(int epoch = 1; epoch <= cfg.epochs; ++epoch) {
      std::shuffle(train_idx.begin(), train_idx.end(), rng);
      double loss_sum    = 0.0;
      std::size_t weight = 0;
      for(std::size_t b = 0; b < train_idx.size(); b += batch) {
         const std::size_t e = std::min(train_idx.size(), b + batch);
         const auto x        = gather_columns(frames, train_idx, b, e);
         const auto g        = loss_and_gradient(model, x);
         if(!std::isfinite(g.loss)) fail(ErrorKind::Diverged, "loss became non-finite at epoch " + std::to_string(epoch));
         adam_update(model, g, adam, cfg.learning_rate);
         loss_sum += g.loss * static_cast<double>(e - b);
         weight += e - b;
      }
      const double val_loss = reconstruction_loss(model, val);
      if(!std::isfinite(val_loss)) fail(ErrorKind::Diverged, "validation loss became non-finite");
      res.curve.push_back({epoch, weight ? loss_sum / static_cast<double>(weight) : 0.0, val_loss});

      if(val_loss < res.best_val_loss) {
         res.best_val_loss = val_loss;
         res.best_epoch    = epoch;
         res.model         = model;
         since_best        = 0;
      } else if(++since_best >= cfg.patience) {
         break;
      }
   }
   return res;
}

FeatureSequence encode_sequence(const FeatureSequence& seq, const MLPModel& model)
{
   if(seq.layout != model.layout || seq.dim() != model.input_dim())
      fail(ErrorKind::LayoutMismatch, "sequence layout " + seq.layout + " does not match model layout " + model.layout);
   FeatureSequence out;
   out.timestamps = seq.timestamps;
   out.label      = seq.label;
   out.layout     = "latent" + std::to_string(model.latent_dim()) + ":" + model.layout;
   out.values     = model.encode(seq.values);
   return out;
}

double encoder_lipschitz_bound(const MLPModel& model)
{
   double bound = 1.0;
   for(const auto& l : model.encoder) {
      Eigen::VectorXd v = Eigen::VectorXd::Ones(l.in()).normalized();
      double sigma      = 0.0;
      for(int it = 0; it < 100; ++it) {
         const Eigen::VectorXd w = l.weight.transpose() * (l.weight * v);
         const double nw         = w.norm();
         if(nw == 0.0) break;
         v     = w / nw;
         sigma = std::sqrt(nw);
      }
      bound *= sigma;
   }
   return bound;
}

// -- Serialization ----------------------------------------------------------------

void write_model(std::ostream& out, const MLPModel& model, const ScalingStats* scaling)
{
   model.validate();
   json h;
   h["format"]     = "har-mlp";
   h["version"]    = 1;
   h["layout"]     = model.layout;
   h["input_dim"]  = model.input_dim();
   h["latent_dim"] = model.latent_dim();
   h["encoder_layers"] = model.encoder.size();
   auto layers     = json::array();
   for(const auto* l : all_layers(model))
      layers.push_back({{"in", l->in()}, {"out", l->out()}, {"activation", l->activation == Activation::Tanh ? "tanh" : "linear"}});
   h["layers"] = std::move(layers);
   if(scaling) h["scaling"] = {{"layout", scaling->layout}, {"dim", scaling->min.size()}};

   detail::write_block(out, k_model_magic, h.dump());
   for(const auto* l : all_layers(model)) {
      detail::write_matrix_rowmajor(out, l->weight);
      detail::write_doubles(out, l->bias.data(), static_cast<std::size_t>(l->bias.size()));
   }
   if(scaling) {
      detail::write_doubles(out, scaling->min.data(), static_cast<std::size_t>(scaling->min.size()));
      detail::write_doubles(out, scaling->max.data(), static_cast<std::size_t>(scaling->max.size()));
   }
}

ModelFile read_model(std::istream& in)
{
   const std::string header = detail::read_block(in, k_model_magic);
   ModelFile f;
   try {
      const auto h = nlohmann::json::parse(header);
      if(h.at("format") != "har-mlp" || h.at("version") != 1) fail(ErrorKind::Parse, "unsupported model version");
      f.model.layout        = h.at("layout").get<std::string>();
      const auto n_encoder  = h.at("encoder_layers").get<std::size_t>();
      const auto& layers    = h.at("layers");
      for(std::size_t i = 0; i < layers.size(); ++i) {
         const auto& lh = layers[i];
         DenseLayer l;
         const auto rows = lh.at("out").get<Eigen::Index>();
         const auto cols = lh.at("in").get<Eigen::Index>();
         if(rows <= 0 || cols <= 0 || rows * cols > (1 << 28)) fail(ErrorKind::Parse, "implausible layer shape");
         l.weight.resize(rows, cols);
         l.bias.resize(rows);
         const auto act = lh.at("activation").get<std::string>();
         if(act == "tanh") l.activation = Activation::Tanh;
         else if(act == "linear") l.activation = Activation::Linear;
         else fail(ErrorKind::Parse, "unknown activation " + act);
         (i < n_encoder ? f.model.encoder : f.model.decoder).push_back(std::move(l));
      }
      for(auto* l : all_layers(f.model)) {
         detail::read_matrix_rowmajor(in, l->weight);
         detail::read_doubles(in, l->bias.data(), static_cast<std::size_t>(l->bias.size()));
      }
      if(auto s = h.find("scaling"); s != h.end()) {
         ScalingStats stats;
         stats.layout   = s->at("layout").get<std::string>();
         const auto dim = s->at("dim").get<Eigen::Index>();
         stats.min.resize(dim);
         stats.max.resize(dim);
         detail::read_doubles(in, stats.min.data(), static_cast<std::size_t>(dim));
         detail::read_doubles(in, stats.max.data(), static_cast<std::size_t>(dim));
         f.scaling = std::move(stats);
      }
   } catch(const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, std::string("bad model header: ") + e.what());
   }
   f.model.validate();
   return f;
}

void save_model(const std::filesystem::path& path, const MLPModel& model, const ScalingStats* scaling)
{
   std::ofstream out(path, std::ios::binary);
   if(!out) fail(ErrorKind::Io, "cannot write " + path.string());
   write_model(out, model, scaling);
   if(!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

ModelFile load_model(const std::filesystem::path& path)
{
   std::ifstream in(path, std::ios::binary);
   if(!in) fail(ErrorKind::Io, "cannot open " + path.string());
   return read_model(in);
}

void write_training_curve(const std::filesystem::path& path, const std::vector<EpochStats>& curve)
{
   std::ofstream out(path);
   if(!out) fail(ErrorKind::Io, "cannot write " + path.string());
   out.precision(10);
   out << "epoch,train_loss,val_loss\n";
   for(const auto& e : curve) out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
}

} // namespace har
