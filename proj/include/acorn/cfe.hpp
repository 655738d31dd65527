#pragma once

// Continual feature extractor: an MLP autoencoder whose encoder output is the
// latent feature h. Training minimizes
//
//   L = L_metric + L_recon
//   L_metric = mean over mined triplets of max(d(a,p) - d(a,n) + margin, 0)
//   L_recon  = mean over all entries of (decoder(h) - x)^2
//
// with d the Euclidean distance between latent rows. Gradients are computed by
// hand-written backpropagation and applied with Adam.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "acorn/matrix.hpp"
#include "acorn/rng.hpp"

namespace acorn {

enum class Activation { relu, identity };

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::relu;
};

struct DenseLayer {
  Matrix weights;  // in_dim x out_dim
  RowVector bias;
  Activation activation = Activation::relu;

  std::size_t in_dim() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weights.cols()); }
};

struct MlpCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre_activations;
};

struct Mlp {
  std::vector<DenseLayer> layers;

  // Glorot-uniform weights and zero biases; all-zero parameters when rng is null.
  static Mlp from_specs(std::span<const LayerSpec> specs, Rng* rng);

  std::size_t input_dim() const { return layers.front().in_dim(); }
  std::size_t output_dim() const { return layers.back().out_dim(); }

  Matrix forward(const Matrix& x, MlpCache* cache = nullptr) const;
  // Adds parameter gradients into `grad` and returns dL/dx (empty when
  // need_input_grad is false).
  Matrix backward(const MlpCache& cache, Matrix d_out, Mlp& grad, bool need_input_grad = true) const;

  Mlp zeros_like() const;
};

struct EncoderDecoderParams {
  Mlp encoder;
  Mlp decoder;

  std::size_t input_dim() const { return encoder.input_dim(); }
  std::size_t latent_dim() const { return encoder.output_dim(); }
  std::size_t parameter_count() const;

  EncoderDecoderParams zeros_like() const;
  bool all_finite() const;

  nlohmann::ordered_json to_json() const;
  static EncoderDecoderParams from_json(const nlohmann::json& j);
};

// Encoder input_dim -> hidden[0] -> ... -> hidden.back() (latent); the decoder
// mirrors it back to input_dim. Hidden layers use relu, the latent and the
// reconstruction layers are linear.
std::vector<LayerSpec> encoder_specs(std::size_t input_dim, std::span<const std::size_t> hidden);
std::vector<LayerSpec> decoder_specs(std::size_t input_dim, std::span<const std::size_t> hidden);
EncoderDecoderParams make_autoencoder(std::size_t input_dim, std::span<const std::size_t> hidden, Rng& rng);

Matrix encode(const EncoderDecoderParams& p, const Matrix& x);
Matrix decode(const EncoderDecoderParams& p, const Matrix& h);

double recon_loss(const Matrix& x, const Matrix& x_hat);
double triplet_loss(const RowVector& anchor, const RowVector& positive, const RowVector& negative,
                    double margin);

struct Triplet {
  std::size_t anchor;
  std::size_t positive;
  std::size_t negative;
};

struct TripletBatch {
  std::vector<Triplet> triplets;
  double margin = 0.2;

  bool empty() const { return triplets.empty(); }
};

// One triplet per eligible anchor (every row that has another row with its
// label and at least one row with the other label), positive and negative
// drawn uniformly from the batch.
TripletBatch mine_triplets(std::span<const int> labels, Rng& rng, double margin);

struct LossConfig {
  bool use_metric = true;
  bool use_recon = true;
  bool squared_distance = false;
};

struct LossTerms {
  double metric = 0.0;
  double recon = 0.0;
  double total = 0.0;
};

// Loss on one batch; when `grad` is non-null it is overwritten with dL/dparams.
LossTerms cfe_loss(const EncoderDecoderParams& p, const Matrix& x, const TripletBatch& triplets,
                   const LossConfig& cfg, EncoderDecoderParams* grad);

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamOptions options;
  EncoderDecoderParams first_moment;
  EncoderDecoderParams second_moment;
  std::int64_t step = 0;

  static AdamState zeros_for(const EncoderDecoderParams& p, AdamOptions options = {});
};

void adam_step(EncoderDecoderParams& p, const EncoderDecoderParams& grads, AdamState& state);

struct TrainOptions {
  std::size_t epochs = 20;
  std::size_t batch_size = 256;
  double margin = 0.2;
  LossConfig loss;
};

struct LossRecord {
  std::size_t step = 0;
  double metric = 0.0;
  double recon = 0.0;
  double total = 0.0;
};

// Mini-batch training; throws NumericError on a non-finite loss.
std::vector<LossRecord> train_epochs(EncoderDecoderParams& p, AdamState& opt, const Matrix& x,
                                     std::span<const int> labels, const TrainOptions& options,
                                     Rng& shuffle_rng, Rng& mining_rng);

}  // namespace acorn
