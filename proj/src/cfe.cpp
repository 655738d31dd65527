#include "acorn/cfe.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "acorn/errors.hpp"
#include "acorn/kernels.hpp"

namespace acorn {
namespace {

const char* activation_name(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw DataError("unknown activation '" + s + "'");
}

void apply_activation(Activation a, Matrix& z) {
  if (a == Activation::relu) z = z.cwiseMax(0.0);
}

nlohmann::ordered_json mlp_to_json(const Mlp& mlp) {
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& l : mlp.layers) {
    nlohmann::ordered_json j;
    j["in"] = l.in_dim();
    j["out"] = l.out_dim();
    j["activation"] = activation_name(l.activation);
    j["weights"] = std::vector<double>(l.weights.data(), l.weights.data() + l.weights.size());
    j["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back(std::move(j));
  }
  return layers;
}

Mlp mlp_from_json(const nlohmann::json& arr) {
  Mlp mlp;
  for (const auto& j : arr) {
    const auto in = j.at("in").get<Eigen::Index>();
    const auto out = j.at("out").get<Eigen::Index>();
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto b = j.at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != in * out || static_cast<Eigen::Index>(b.size()) != out) {
      throw DataError("checkpoint layer shape does not match its manifest");
    }
    DenseLayer l;
    l.weights = Eigen::Map<const Matrix>(w.data(), in, out);
    l.bias = Eigen::Map<const RowVector>(b.data(), out);
    l.activation = activation_from(j.at("activation").get<std::string>());
    mlp.layers.push_back(std::move(l));
  }
  return mlp;
}

template <class F>
void zip_layers(Mlp& a, const Mlp& b, Mlp& c, Mlp& d, F&& f) {
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    f(a.layers[i].weights, b.layers[i].weights, c.layers[i].weights, d.layers[i].weights);
    f(a.layers[i].bias, b.layers[i].bias, c.layers[i].bias, d.layers[i].bias);
  }
}

}  // namespace

Mlp Mlp::from_specs(std::span<const LayerSpec> specs, Rng* rng) {
  if (specs.empty()) throw ConfigError("an MLP needs at least one layer");
  Mlp mlp;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    if (s.in_dim == 0 || s.out_dim == 0) throw ConfigError("layer dimensions must be positive");
    if (i > 0 && specs[i - 1].out_dim != s.in_dim) throw ConfigError("consecutive layer dimensions differ");
    DenseLayer l;
    l.activation = s.activation;
    l.weights = Matrix::Zero(static_cast<Eigen::Index>(s.in_dim), static_cast<Eigen::Index>(s.out_dim));
    l.bias = RowVector::Zero(static_cast<Eigen::Index>(s.out_dim));
    if (rng != nullptr) {
      const double limit = std::sqrt(6.0 / static_cast<double>(s.in_dim + s.out_dim));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (Eigen::Index k = 0; k < l.weights.size(); ++k) l.weights.data()[k] = u(*rng);
    }
    mlp.layers.push_back(std::move(l));
  }
  return mlp;
}

Matrix Mlp::forward(const Matrix& x, MlpCache* cache) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim()) {
    throw DataError("MLP expects " + std::to_string(input_dim()) + " input columns, got " +
                    std::to_string(x.cols()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  Matrix a = x;
  for (const auto& l : layers) {
    Matrix z;
    kernels::affine(a, l.weights, l.bias, z);
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre_activations.push_back(z);
    }
    apply_activation(l.activation, z);
    a = std::move(z);
  }
  return a;
}

Matrix Mlp::backward(const MlpCache& cache, Matrix d_out, Mlp& grad, bool need_input_grad) const {
  for (std::size_t i = layers.size(); i-- > 0;) {
    const auto& l = layers[i];
    if (l.activation == Activation::relu) {
      d_out = d_out.cwiseProduct((cache.pre_activations[i].array() > 0.0).cast<double>().matrix());
    }
    grad.layers[i].weights.noalias() += cache.inputs[i].transpose() * d_out;
    grad.layers[i].bias += d_out.colwise().sum();
    if (i > 0 || need_input_grad) {
      Matrix d_in = d_out * l.weights.transpose();
      d_out = std::move(d_in);
    } else {
      d_out.resize(0, 0);
    }
  }
  return d_out;
}

Mlp Mlp::zeros_like() const {
  Mlp out = *this;
  for (auto& l : out.layers) {
    l.weights.setZero();
    l.bias.setZero();
  }
  return out;
}

std::size_t EncoderDecoderParams::parameter_count() const {
  std::size_t n = 0;
  for (const Mlp* m : {&encoder, &decoder}) {
    for (const auto& l : m->layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  }
  return n;
}

EncoderDecoderParams EncoderDecoderParams::zeros_like() const {
  return {encoder.zeros_like(), decoder.zeros_like()};
}

bool EncoderDecoderParams::all_finite() const {
  for (const Mlp* m : {&encoder, &decoder}) {
    for (const auto& l : m->layers) {
      if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    }
  }
  return true;
}

nlohmann::ordered_json EncoderDecoderParams::to_json() const {
  nlohmann::ordered_json j;
  j["encoder"] = mlp_to_json(encoder);
  j["decoder"] = mlp_to_json(decoder);
  return j;
}

EncoderDecoderParams EncoderDecoderParams::from_json(const nlohmann::json& j) {
  try {
    EncoderDecoderParams p{mlp_from_json(j.at("encoder")), mlp_from_json(j.at("decoder"))};
    if (p.encoder.layers.empty() || p.decoder.layers.empty() ||
        p.decoder.input_dim() != p.encoder.output_dim() || p.decoder.output_dim() != p.encoder.input_dim()) {
      throw DataError("checkpoint encoder/decoder dimensions do not mirror");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

std::vector<LayerSpec> encoder_specs(std::size_t input_dim, std::span<const std::size_t> hidden) {
  if (hidden.empty()) throw ConfigError("the autoencoder needs at least one hidden width");
  std::vector<LayerSpec> specs;
  std::size_t in = input_dim;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    const bool latent = i + 1 == hidden.size();
    specs.push_back({in, hidden[i], latent ? Activation::identity : Activation::relu});
    in = hidden[i];
  }
  return specs;
}

std::vector<LayerSpec> decoder_specs(std::size_t input_dim, std::span<const std::size_t> hidden) {
  if (hidden.empty()) throw ConfigError("the autoencoder needs at least one hidden width");
  std::vector<LayerSpec> specs;
  for (std::size_t i = hidden.size(); i-- > 1;) specs.push_back({hidden[i], hidden[i - 1], Activation::relu});
  specs.push_back({hidden.front(), input_dim, Activation::identity});
  return specs;
}

EncoderDecoderParams make_autoencoder(std::size_t input_dim, std::span<const std::size_t> hidden, Rng& rng) {
  const auto enc = encoder_specs(input_dim, hidden);
  const auto dec = decoder_specs(input_dim, hidden);
  return {Mlp::from_specs(enc, &rng), Mlp::from_specs(dec, &rng)};
}

Matrix encode(const EncoderDecoderParams& p, const Matrix& x) { return p.encoder.forward(x); }
Matrix decode(const EncoderDecoderParams& p, const Matrix& h) { return p.decoder.forward(h); }

double recon_loss(const Matrix& x, const Matrix& x_hat) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
    throw DataError("recon_loss: shape mismatch");
  }
  if (x.size() == 0) return 0.0;
  return (x_hat - x).squaredNorm() / static_cast<double>(x.size());
}

double triplet_loss(const RowVector& anchor, const RowVector& positive, const RowVector& negative,
                    double margin) {
  const double ap = (anchor - positive).norm();
  const double an = (anchor - negative).norm();
  return std::max(ap - an + margin, 0.0);
}

TripletBatch mine_triplets(std::span<const int> labels, Rng& rng, double margin) {
  TripletBatch out;
  out.margin = margin;
  std::vector<std::size_t> normal;
  std::vector<std::size_t> anomalous;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 0 ? normal : anomalous).push_back(i);
  if (normal.empty() || anomalous.empty()) return out;

  for (std::size_t a = 0; a < labels.size(); ++a) {
    const auto& same = labels[a] == 0 ? normal : anomalous;
    const auto& other = labels[a] == 0 ? anomalous : normal;
    if (same.size() < 2) continue;
    // Draw from same \ {a} by skipping over the anchor's slot.
    std::uniform_int_distribution<std::size_t> pick_pos(0, same.size() - 2);
    std::size_t pos = same[pick_pos(rng)];
    if (pos == a) pos = same.back();
    std::uniform_int_distribution<std::size_t> pick_neg(0, other.size() - 1);
    out.triplets.push_back({a, pos, other[pick_neg(rng)]});
  }
  return out;
}

LossTerms cfe_loss(const EncoderDecoderParams& p, const Matrix& x, const TripletBatch& triplets,
                   const LossConfig& cfg, EncoderDecoderParams* grad) {
  LossTerms terms;
  MlpCache enc_cache;
  const Matrix h = p.encoder.forward(x, grad ? &enc_cache : nullptr);
  Matrix d_h;
  if (grad) {
    *grad = p.zeros_like();
    d_h = Matrix::Zero(h.rows(), h.cols());
  }

  if (cfg.use_metric && !triplets.empty()) {
    const double inv_t = 1.0 / static_cast<double>(triplets.triplets.size());
    double sum = 0.0;
    for (const auto& t : triplets.triplets) {
      const auto a = static_cast<Eigen::Index>(t.anchor);
      const auto pp = static_cast<Eigen::Index>(t.positive);
      const auto n = static_cast<Eigen::Index>(t.negative);
      const RowVector diff_ap = h.row(a) - h.row(pp);
      const RowVector diff_an = h.row(a) - h.row(n);
      double d_ap = diff_ap.squaredNorm();
      double d_an = diff_an.squaredNorm();
      if (!cfg.squared_distance) {
        d_ap = std::sqrt(d_ap);
        d_an = std::sqrt(d_an);
      }
      const double hinge = d_ap - d_an + triplets.margin;
      if (hinge <= 0.0) continue;
      sum += hinge;
      if (!grad) continue;
      // d(distance)/d(anchor) for each pair; zero distance contributes no direction.
      RowVector g_ap;
      RowVector g_an;
      if (cfg.squared_distance) {
        g_ap = 2.0 * diff_ap;
        g_an = 2.0 * diff_an;
      } else {
        g_ap = d_ap > 0.0 ? RowVector(diff_ap / d_ap) : RowVector::Zero(h.cols());
        g_an = d_an > 0.0 ? RowVector(diff_an / d_an) : RowVector::Zero(h.cols());
      }
      d_h.row(a) += inv_t * (g_ap - g_an);
      d_h.row(pp) -= inv_t * g_ap;
      d_h.row(n) += inv_t * g_an;
    }
    terms.metric = sum * inv_t;
  }

  if (cfg.use_recon) {
    MlpCache dec_cache;
    const Matrix x_hat = p.decoder.forward(h, grad ? &dec_cache : nullptr);
    terms.recon = recon_loss(x, x_hat);
    if (grad) {
      const Matrix d_xhat = (2.0 / static_cast<double>(x.size())) * (x_hat - x);
      d_h += p.decoder.backward(dec_cache, d_xhat, grad->decoder);
    }
  }

  terms.total = (cfg.use_metric ? terms.metric : 0.0) + (cfg.use_recon ? terms.recon : 0.0);
  if (grad) p.encoder.backward(enc_cache, d_h, grad->encoder, false);
  return terms;
}

AdamState AdamState::zeros_for(const EncoderDecoderParams& p, AdamOptions options) {
  AdamState s;
  s.options = options;
  s.first_moment = p.zeros_like();
  s.second_moment = p.zeros_like();
  return s;
}

void adam_step(EncoderDecoderParams& p, const EncoderDecoderParams& grads, AdamState& state) {
  ++state.step;
  const auto& o = state.options;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = o.beta1 * m + (1.0 - o.beta1) * g;
    v.array() = o.beta2 * v.array() + (1.0 - o.beta2) * g.array().square();
    param.array() -= o.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + o.epsilon);
  };
  zip_layers(p.encoder, grads.encoder, state.first_moment.encoder, state.second_moment.encoder, update);
  zip_layers(p.decoder, grads.decoder, state.first_moment.decoder, state.second_moment.decoder, update);
}

std::vector<LossRecord> train_epochs(EncoderDecoderParams& p, AdamState& opt, const Matrix& x,
                                     std::span<const int> labels, const TrainOptions& options,
                                     Rng& shuffle_rng, Rng& mining_rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0) throw DataError("train_epochs: empty training set");
  if (labels.size() != n) throw DataError("train_epochs: label count does not match rows");
  if (options.batch_size == 0) throw ConfigError("batch_size must be positive");

  std::vector<LossRecord> trace;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  EncoderDecoderParams grad;
  std::vector<int> batch_labels;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      const std::size_t len = std::min(options.batch_size, n - start);
      const auto idx = std::span(order).subspan(start, len);
      const Matrix xb = take_rows(x, idx);
      batch_labels.clear();
      for (auto i : idx) batch_labels.push_back(labels[i]);
      TripletBatch triplets;
      triplets.margin = options.margin;
      if (options.loss.use_metric) triplets = mine_triplets(batch_labels, mining_rng, options.margin);

      const LossTerms terms = cfe_loss(p, xb, triplets, options.loss, &grad);
      if (!std::isfinite(terms.total)) {
        throw NumericError("non-finite training loss at step " + std::to_string(trace.size()) +
                           " (learning rate too high or exploding activations)");
      }
      trace.push_back({trace.size(), terms.metric, terms.recon, terms.total});
      adam_step(p, grad, opt);
    }
  }
  return trace;
}

}  // namespace acorn
