#include "../oracles.hpp"
#include "har/codec.hpp"
#include "har/errors.hpp"

#include <doctest.h>

#include <sstream>

using namespace har;

namespace
{
TrainConfig small_config()
{
   TrainConfig c;
   c.hidden     = {4};
   c.latent_dim = 2;
   return c;
}
} // namespace

TEST_CASE("codec: model shape is mirror symmetric")
{
   TrainConfig c;
   const auto m = make_autoencoder(40, c, 1);
   CHECK(m.input_dim() == 40);
   CHECK(m.latent_dim() == 16);
   REQUIRE(m.encoder.size() == 3);
   REQUIRE(m.decoder.size() == 3);
   CHECK(m.encoder[0].out() == 256);
   CHECK(m.decoder[0].out() == 64);
   CHECK(m.decoder[2].out() == 40);
   CHECK(m.decoder.back().activation == Activation::Linear);
   CHECK(m.encoder.back().activation == Activation::Linear);
   CHECK(m.encoder[0].activation == Activation::Tanh);
}

TEST_CASE("codec: backprop agrees with finite differences")
{
   std::mt19937_64 rng(3);
   std::normal_distribution<double> nd;
   for(int t = 0; t < 10; ++t) {
      auto model = make_autoencoder(5, small_config(), rng());
      Eigen::MatrixXd batch(5, 7);
      for(Eigen::Index i = 0; i < batch.size(); ++i) batch.data()[i] = nd(rng);
      const auto g  = loss_and_gradient(model, batch);
      const auto fd = oracle::numeric_gradient(model, batch, 1e-5);
      CHECK(g.loss == doctest::Approx(reconstruction_loss(model, batch)));
      CHECK(oracle::relative_error(oracle::flatten(g), fd) < 1e-6);
   }
}

TEST_CASE("codec: identity model passes inputs through")
{
   const auto m = MLPModel::identity(6, "x");
   Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 4);
   CHECK((m.encode(x) - x).norm() == 0.0);
   CHECK((m.reconstruct(x) - x).norm() == 0.0);
}

TEST_CASE("codec: training lowers the loss and is deterministic")
{
   std::mt19937_64 rng(9);
   std::normal_distribution<double> nd;
   // 500 frames on a 3-dim manifold inside 12 dims
   Eigen::MatrixXd basis(12, 3), coeff(3, 500);
   for(Eigen::Index i = 0; i < basis.size(); ++i) basis.data()[i] = nd(rng) * 0.3;
   for(Eigen::Index i = 0; i < coeff.size(); ++i) coeff.data()[i] = nd(rng);
   const Eigen::MatrixXd frames = (basis * coeff).array().tanh().matrix();

   TrainConfig c;
   c.hidden     = {16};
   c.latent_dim = 4;
   c.epochs     = 40;
   c.batch_size = 32;
   c.seed       = 4;
   const auto r1 = train_codec(frames, "test", c);
   const auto r2 = train_codec(frames, "test", c);
   REQUIRE(r1.curve.size() >= 2);
   CHECK(r1.curve.front().train_loss > r1.curve.back().train_loss);
   CHECK(r1.best_val_loss <= r1.curve.front().val_loss);
   CHECK(r1.curve.size() == r2.curve.size());
   CHECK(r1.best_val_loss == r2.best_val_loss);
   CHECK((r1.model.encoder[0].weight - r2.model.encoder[0].weight).norm() == 0.0);
   CHECK(r1.model.layout == "test");
   CHECK(std::isfinite(encoder_lipschitz_bound(r1.model)));
}

TEST_CASE("codec: too few frames")
{
   TrainConfig c;
   Eigen::MatrixXd frames = Eigen::MatrixXd::Zero(20, 10);
   try {
      train_codec(frames, "x", c);
      FAIL("expected throw");
   } catch(const Error& e) {
      CHECK(e.kind() == ErrorKind::InsufficientData);
   }
}

TEST_CASE("codec: model file round trip")
{
   auto m   = make_autoencoder(7, small_config(), 12);
   m.layout = "layout-a";
   ScalingStats s;
   s.min    = Eigen::VectorXd::LinSpaced(7, -3, 3);
   s.max    = s.min.array() + 1.0;
   s.layout = "layout-a";
   std::stringstream buf;
   write_model(buf, m, &s);
   const auto f = read_model(buf);
   CHECK(f.model.layout == "layout-a");
   REQUIRE(f.scaling.has_value());
   CHECK(f.scaling->min == s.min);
   CHECK(f.scaling->max == s.max);
   Eigen::MatrixXd x = Eigen::MatrixXd::Random(7, 3);
   CHECK((f.model.reconstruct(x) - m.reconstruct(x)).norm() == 0.0);

   std::stringstream bad("NOTAMODEL");
   CHECK_THROWS_AS(read_model(bad), Error);
}

TEST_CASE("codec: encode_sequence keeps timestamps and checks layout")
{
   auto m   = make_autoencoder(5, small_config(), 2);
   m.layout = "L";
   FeatureSequence s;
   s.values     = Eigen::MatrixXd::Random(5, 4);
   s.timestamps = {0, 0.1, 0.2, 0.3};
   s.layout     = "L";
   s.label      = "a1";
   const auto z = encode_sequence(s, m);
   CHECK(z.dim() == 2);
   CHECK(z.frames() == 4);
   CHECK(z.timestamps == s.timestamps);
   CHECK(z.label == s.label);
   s.layout = "other";
   CHECK_THROWS_AS(encode_sequence(s, m), Error);
}
