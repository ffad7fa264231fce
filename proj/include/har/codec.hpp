#pragma once

#include "har/embedding.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace har
{
enum class Activation
{
   Linear,
   Tanh,
};

struct DenseLayer
{
   Eigen::MatrixXd weight; // out x in
   Eigen::VectorXd bias;
   Activation activation = Activation::Linear;

   Eigen::Index in() const noexcept { return weight.cols(); }
   Eigen::Index out() const noexcept { return weight.rows(); }
};

// Dense autoencoder. Inputs and outputs are column-per-sample matrices.
struct MLPModel
{
   std::vector<DenseLayer> encoder;
   std::vector<DenseLayer> decoder;
   std::string layout; // feature layout the model was trained on

   Eigen::Index input_dim() const noexcept;
   Eigen::Index latent_dim() const noexcept;

   void validate() const;

   Eigen::MatrixXd encode(const Eigen::MatrixXd& x) const;
   Eigen::MatrixXd decode(const Eigen::MatrixXd& z) const;
   Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& x) const { return decode(encode(x)); }

   // Linear encoder/decoder with identity weights; latent == input.
   static MLPModel identity(Eigen::Index dim, std::string layout);
};

struct TrainConfig
{
   std::vector<int> hidden = {256, 64};
   int latent_dim          = 16;
   double learning_rate    = 1e-3;
   int epochs              = 200;
   int batch_size          = 64;
   std::uint64_t seed      = 0;
   int patience            = 20;
   double validation_fraction = 0.1;

   void validate() const;
};

// Builds a mirror-symmetric model with Xavier-uniform weights and zero biases.
MLPModel make_autoencoder(Eigen::Index input_dim, const TrainConfig& cfg, std::uint64_t seed);

// Mean squared reconstruction error over all entries of the batch.
double reconstruction_loss(const MLPModel& model, const Eigen::MatrixXd& batch);

struct LayerGradient
{
   Eigen::MatrixXd weight;
   Eigen::VectorXd bias;
};

struct LossAndGradient
{
   double loss = 0.0;
   std::vector<LayerGradient> layers; // encoder layers, then decoder layers
};

LossAndGradient loss_and_gradient(const MLPModel& model, const Eigen::MatrixXd& batch);

struct EpochStats
{
   int epoch         = 0;
   double train_loss = 0.0;
   double val_loss   = 0.0;
};

struct TrainResult
{
   MLPModel model; // the epoch with the best validation loss
   std::vector<EpochStats> curve;
   int best_epoch       = 0;
   double best_val_loss = 0.0;
};

// `frames` holds one scaled feature frame per column.
TrainResult train_codec(const Eigen::MatrixXd& frames, const std::string& layout, const TrainConfig& cfg);

// Per-frame encoding; timestamps and label carry over. Throws LayoutMismatch.
FeatureSequence encode_sequence(const FeatureSequence& seq, const MLPModel& model);

// Product of per-layer spectral norms (power iteration); a Lipschitz bound
// for the encoder since tanh is 1-Lipschitz.
double encoder_lipschitz_bound(const MLPModel& model);

// -- Serialization --------------------------------------------------------------

struct ModelFile
{
   MLPModel model;
   std::optional<ScalingStats> scaling;
};

void write_model(std::ostream& out, const MLPModel& model, const ScalingStats* scaling = nullptr);
ModelFile read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const MLPModel& model, const ScalingStats* scaling = nullptr);
ModelFile load_model(const std::filesystem::path& path);

void write_training_curve(const std::filesystem::path& path, const std::vector<EpochStats>& curve);

} // namespace har
