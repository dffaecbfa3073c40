// Copyright 2026 The atomlm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "atomlm/model.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "atomlm/util.h"

namespace atomlm {

void ModelConfig::Validate() const {
  auto fail = [](const std::string &what) {
    throw Error("invalid model config: " + what);
  };
  if (hidden <= 0) fail("hidden width must be positive");
  if (layers <= 0) fail("layers must be positive");
  if (heads <= 0) fail("heads must be positive");
  if (ff_width <= 0) fail("ff_width must be positive");
  if (hidden % heads != 0) fail("l divisible by heads");
  if (max_seq_len < 8) fail("max_seq_len must be at least 8");
  if (vocab_size < kNumSpecialTokens) fail("vocab_size must be at least 5");
}

namespace {

constexpr double kNormEpsilon = 1e-5;
constexpr double kInitStddev = 0.02;

// Embedding rows are scaled by width rather than fixed: input rows start
// with unit expected L2 norm, the scale recoded atom rows are normalized
// to, and output rows with half of that so untrained logits stay close to
// uniform.
double InitStddev(const std::string &name, int width) {
  const double unit = 1.0 / std::sqrt(static_cast<double>(width));
  if (name == "token_embeddings") return unit;
  if (name == "output_projection") return 0.5 * unit;
  return kInitStddev;
}

template <typename T>
std::vector<Matrix<T> *> TensorList(ModelParams<T> &params) {
  std::vector<Matrix<T> *> out;
  params.ForEach([&](const std::string &, Matrix<T> &m) { out.push_back(&m); });
  return out;
}

template <typename T>
std::vector<const Matrix<T> *> TensorList(const ModelParams<T> &params) {
  std::vector<const Matrix<T> *> out;
  params.ForEach(
      [&](const std::string &, const Matrix<T> &m) { out.push_back(&m); });
  return out;
}

template <typename T>
struct NormCache {
  Matrix<T> xhat;     // n x l
  Matrix<T> inv_std;  // n x 1
};

template <typename T>
Matrix<T> LayerNormForward(const Matrix<T> &x, const Matrix<T> &gain,
                           const Matrix<T> &bias, NormCache<T> *cache) {
  const Eigen::Index n = x.rows();
  const Eigen::Index l = x.cols();
  cache->xhat.resize(n, l);
  cache->inv_std.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    T mean = x.row(i).mean();
    auto centered = (x.row(i).array() - mean).matrix();
    T var = centered.squaredNorm() / static_cast<T>(l);
    T inv = T(1) / std::sqrt(var + static_cast<T>(kNormEpsilon));
    cache->inv_std(i, 0) = inv;
    cache->xhat.row(i) = centered * inv;
  }
  Matrix<T> y = cache->xhat.array().rowwise() * gain.row(0).array();
  y.rowwise() += bias.row(0);
  return y;
}

template <typename T>
Matrix<T> LayerNormBackward(const Matrix<T> &dy, const Matrix<T> &gain,
                            const NormCache<T> &cache, Matrix<T> *dgain,
                            Matrix<T> *dbias) {
  const Eigen::Index n = dy.rows();
  const auto l = static_cast<T>(dy.cols());
  *dgain += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  *dbias += dy.colwise().sum();
  Matrix<T> dxhat = dy.array().rowwise() * gain.row(0).array();
  Matrix<T> dx(n, dy.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    T mean_d = dxhat.row(i).sum() / l;
    T mean_dx = dxhat.row(i).dot(cache.xhat.row(i)) / l;
    dx.row(i) = cache.inv_std(i, 0) *
                (dxhat.row(i).array() - mean_d -
                 cache.xhat.row(i).array() * mean_dx)
                    .matrix();
  }
  return dx;
}

template <typename T>
T Gelu(T x) {
  return T(0.5) * x * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
}

template <typename T>
T GeluDerivative(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
  const T pdf = std::exp(T(-0.5) * x * x) / std::sqrt(T(2) * std::numbers::pi_v<T>);
  return cdf + x * pdf;
}

template <typename T>
struct LayerCache {
  Matrix<T> input;
  Matrix<T> q, k, v;
  std::vector<Matrix<T>> probs;  // per head, n x n
  Matrix<T> context;
  NormCache<T> attn_norm;
  Matrix<T> h1;
  Matrix<T> ff_pre;
  Matrix<T> ff_act;
  NormCache<T> ff_norm;
};

template <typename T>
struct ForwardState {
  NormCache<T> embedding_norm;
  std::vector<LayerCache<T>> layers;
  Matrix<T> output;  // n x l
};

template <typename T>
void CheckSequence(const BasicModel<T> &model, const TokenSequence &seq) {
  if (static_cast<int>(seq.ids.size()) > model.config.max_seq_len) {
    throw Error("sequence too long: " + std::to_string(seq.ids.size()) +
                " > " + std::to_string(model.config.max_seq_len));
  }
  for (TokenId id : seq.ids) {
    if (id < 0 || id >= model.config.vocab_size) {
      throw Error("id out of range: " + std::to_string(id));
    }
  }
}

template <typename T>
void Forward(const BasicModel<T> &model, const TokenSequence &seq,
             ForwardState<T> *state) {
  CheckSequence(model, seq);
  const auto &p = model.params;
  const int l = model.config.hidden;
  const int heads = model.config.heads;
  const int dh = l / heads;
  const auto n = static_cast<Eigen::Index>(seq.ids.size());
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  Matrix<T> x(n, l);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = p.token_embeddings.row(seq.ids[i]) + p.position_embeddings.row(i);
  }
  x = LayerNormForward(x, p.embedding_norm_gain, p.embedding_norm_bias,
                       &state->embedding_norm);

  std::vector<char> key_valid(n);
  for (Eigen::Index i = 0; i < n; ++i) key_valid[i] = seq.ids[i] != kPadId;

  state->layers.resize(p.layers.size());
  for (size_t li = 0; li < p.layers.size(); ++li) {
    const LayerParams<T> &lp = p.layers[li];
    LayerCache<T> &c = state->layers[li];
    c.input = x;
    c.q = x * lp.query_weight;
    c.q.rowwise() += lp.query_bias.row(0);
    c.k = x * lp.key_weight;
    c.k.rowwise() += lp.key_bias.row(0);
    c.v = x * lp.value_weight;
    c.v.rowwise() += lp.value_bias.row(0);

    c.context.resize(n, l);
    c.probs.resize(heads);
    for (int h = 0; h < heads; ++h) {
      auto qh = c.q.middleCols(h * dh, dh);
      auto kh = c.k.middleCols(h * dh, dh);
      auto vh = c.v.middleCols(h * dh, dh);
      Matrix<T> scores = (qh * kh.transpose()) * scale;
      Matrix<T> &prob = c.probs[h];
      prob.resize(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        T max_score = -std::numeric_limits<T>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
          if (key_valid[j]) max_score = std::max(max_score, scores(i, j));
        }
        T sum = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
          T e = key_valid[j] ? std::exp(scores(i, j) - max_score) : T(0);
          prob(i, j) = e;
          sum += e;
        }
        if (sum > 0) prob.row(i) /= sum;
      }
      c.context.middleCols(h * dh, dh) = prob * vh;
    }
    Matrix<T> attn = c.context * lp.attn_out_weight;
    attn.rowwise() += lp.attn_out_bias.row(0);
    c.h1 = LayerNormForward<T>(x + attn, lp.attn_norm_gain, lp.attn_norm_bias,
                               &c.attn_norm);
    c.ff_pre = c.h1 * lp.ff_in_weight;
    c.ff_pre.rowwise() += lp.ff_in_bias.row(0);
    c.ff_act = c.ff_pre.unaryExpr([](T u) { return Gelu(u); });
    Matrix<T> ff = c.ff_act * lp.ff_out_weight;
    ff.rowwise() += lp.ff_out_bias.row(0);
    x = LayerNormForward<T>(c.h1 + ff, lp.ff_norm_gain, lp.ff_norm_bias,
                            &c.ff_norm);
  }
  state->output = std::move(x);
}

template <typename T>
void Backward(const BasicModel<T> &model, const TokenSequence &seq,
              const ForwardState<T> &state, Matrix<T> dx,
              ModelParams<T> *grad) {
  const auto &p = model.params;
  const int l = model.config.hidden;
  const int heads = model.config.heads;
  const int dh = l / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  for (size_t li = p.layers.size(); li-- > 0;) {
    const LayerParams<T> &lp = p.layers[li];
    LayerParams<T> &lg = grad->layers[li];
    const LayerCache<T> &c = state.layers[li];

    // Feed-forward block with residual, then post-norm.
    Matrix<T> dr2 = LayerNormBackward(dx, lp.ff_norm_gain, c.ff_norm,
                                      &lg.ff_norm_gain, &lg.ff_norm_bias);
    lg.ff_out_weight.noalias() += c.ff_act.transpose() * dr2;
    lg.ff_out_bias += dr2.colwise().sum();
    Matrix<T> dact = dr2 * lp.ff_out_weight.transpose();
    Matrix<T> dpre =
        dact.array() *
        c.ff_pre.unaryExpr([](T u) { return GeluDerivative(u); }).array();
    lg.ff_in_weight.noalias() += c.h1.transpose() * dpre;
    lg.ff_in_bias += dpre.colwise().sum();
    Matrix<T> dh1 = dr2 + dpre * lp.ff_in_weight.transpose();

    // Attention block with residual, then post-norm.
    Matrix<T> dr1 = LayerNormBackward(dh1, lp.attn_norm_gain, c.attn_norm,
                                      &lg.attn_norm_gain, &lg.attn_norm_bias);
    lg.attn_out_weight.noalias() += c.context.transpose() * dr1;
    lg.attn_out_bias += dr1.colwise().sum();
    Matrix<T> dcontext = dr1 * lp.attn_out_weight.transpose();

    const Eigen::Index n = c.input.rows();
    Matrix<T> dq(n, l), dk(n, l), dv(n, l);
    for (int h = 0; h < heads; ++h) {
      const Matrix<T> &prob = c.probs[h];
      auto dctx_h = dcontext.middleCols(h * dh, dh);
      Matrix<T> dprob = dctx_h * c.v.middleCols(h * dh, dh).transpose();
      dv.middleCols(h * dh, dh) = prob.transpose() * dctx_h;
      Matrix<T> dscores(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        T dot = dprob.row(i).dot(prob.row(i));
        dscores.row(i) = prob.row(i).array() * (dprob.row(i).array() - dot);
      }
      dscores *= scale;
      dq.middleCols(h * dh, dh) = dscores * c.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh) =
          dscores.transpose() * c.q.middleCols(h * dh, dh);
    }
    lg.query_weight.noalias() += c.input.transpose() * dq;
    lg.query_bias += dq.colwise().sum();
    lg.key_weight.noalias() += c.input.transpose() * dk;
    lg.key_bias += dk.colwise().sum();
    lg.value_weight.noalias() += c.input.transpose() * dv;
    lg.value_bias += dv.colwise().sum();
    dx = dr1;
    dx.noalias() += dq * lp.query_weight.transpose();
    dx.noalias() += dk * lp.key_weight.transpose();
    dx.noalias() += dv * lp.value_weight.transpose();
  }

  Matrix<T> demb =
      LayerNormBackward(dx, p.embedding_norm_gain, state.embedding_norm,
                        &grad->embedding_norm_gain, &grad->embedding_norm_bias);
  for (Eigen::Index i = 0; i < demb.rows(); ++i) {
    grad->token_embeddings.row(seq.ids[i]) += demb.row(i);
    grad->position_embeddings.row(i) += demb.row(i);
  }
}

template <typename T>
Matrix<T> OutputLogits(const BasicModel<T> &model, const Matrix<T> &states) {
  Matrix<T> logits = states * model.params.output_projection.transpose();
  logits.rowwise() += model.params.output_bias.row(0);
  return logits;
}

template <typename T>
void CheckTargets(const TokenSequence &seq, std::span<const MaskTarget> targets,
                  int vocab_size) {
  if (targets.empty()) throw Error("no mask targets");
  for (const MaskTarget &t : targets) {
    if (t.position >= seq.ids.size()) {
      throw Error("target position out of range");
    }
    if (t.id < 0 || t.id >= vocab_size) {
      throw Error("target id out of range: " + std::to_string(t.id));
    }
  }
}

}  // namespace

template <typename T>
ModelParams<T> ModelParams<T>::ZerosLike() const {
  ModelParams<T> out = *this;
  out.ForEach([](const std::string &, Matrix<T> &m) { m.setZero(); });
  return out;
}

template <typename T>
template <typename U>
BasicModel<U> BasicModel<T>::Cast() const {
  BasicModel<U> out;
  out.config = config;
  out.params.layers.resize(params.layers.size());
  auto src = TensorList(params);
  // Shape the destination by visiting it in the same order.
  std::vector<Matrix<U> *> dst;
  out.params.ForEach(
      [&](const std::string &, Matrix<U> &m) { dst.push_back(&m); });
  for (size_t i = 0; i < src.size(); ++i) *dst[i] = src[i]->template cast<U>();
  return out;
}

template <typename T>
BasicModel<T> InitModel(const ModelConfig &config) {
  config.Validate();
  const int l = config.hidden;
  const int v = config.vocab_size;
  BasicModel<T> model;
  model.config = config;
  auto &p = model.params;
  p.token_embeddings.resize(v, l);
  p.position_embeddings.resize(config.max_seq_len, l);
  p.embedding_norm_gain.resize(1, l);
  p.embedding_norm_bias.resize(1, l);
  p.layers.resize(config.layers);
  for (auto &layer : p.layers) {
    layer.query_weight.resize(l, l);
    layer.query_bias.resize(1, l);
    layer.key_weight.resize(l, l);
    layer.key_bias.resize(1, l);
    layer.value_weight.resize(l, l);
    layer.value_bias.resize(1, l);
    layer.attn_out_weight.resize(l, l);
    layer.attn_out_bias.resize(1, l);
    layer.attn_norm_gain.resize(1, l);
    layer.attn_norm_bias.resize(1, l);
    layer.ff_in_weight.resize(l, config.ff_width);
    layer.ff_in_bias.resize(1, config.ff_width);
    layer.ff_out_weight.resize(config.ff_width, l);
    layer.ff_out_bias.resize(1, l);
    layer.ff_norm_gain.resize(1, l);
    layer.ff_norm_bias.resize(1, l);
  }
  p.output_projection.resize(v, l);
  p.output_bias.resize(1, v);

  Rng rng(DeriveSeed(config.seed, "init"));
  p.ForEach([&](const std::string &name, Matrix<T> &m) {
    if (name.ends_with(".gain")) {
      m.setOnes();
    } else if (name.ends_with(".bias") || name == "output_bias") {
      m.setZero();
    } else {
      const double stddev = InitStddev(name, l);
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = static_cast<T>(rng.Normal() * stddev);
      }
    }
  });
  return model;
}

template <typename T>
Matrix<T> EncodeSequence(const BasicModel<T> &model, const TokenSequence &seq) {
  ForwardState<T> state;
  Forward(model, seq, &state);
  return std::move(state.output);
}

template <typename T>
Matrix<T> ForwardLogits(const BasicModel<T> &model, const TokenSequence &seq) {
  return OutputLogits(model, EncodeSequence(model, seq));
}

template <typename T>
T MlmLoss(const BasicModel<T> &model, const TokenSequence &seq,
          std::span<const MaskTarget> targets) {
  CheckTargets<T>(seq, targets, model.config.vocab_size);
  Matrix<T> states = EncodeSequence(model, seq);
  double total = 0.0;
  for (const MaskTarget &t : targets) {
    Matrix<T> z = states.row(t.position) *
                      model.params.output_projection.transpose() +
                  model.params.output_bias;
    T max_z = z.maxCoeff();
    T lse = max_z + std::log((z.array() - max_z).exp().sum());
    total += static_cast<double>(lse - z(0, t.id));
  }
  return static_cast<T>(total / static_cast<double>(targets.size()));
}

template <typename T>
T MlmLoss(const BasicModel<T> &model, const TokenSequence &seq,
          std::span<const TokenId> target_ids) {
  std::vector<size_t> masks;
  for (size_t i = 0; i < seq.ids.size(); ++i) {
    if (seq.ids[i] == kMaskId) masks.push_back(i);
  }
  if (masks.size() != target_ids.size()) {
    throw Error("mask/target count mismatch: " + std::to_string(masks.size()) +
                " masks, " + std::to_string(target_ids.size()) + " targets");
  }
  std::vector<MaskTarget> targets;
  for (size_t k = 0; k < masks.size(); ++k) {
    targets.push_back({masks[k], target_ids[k]});
  }
  return MlmLoss(model, seq, std::span<const MaskTarget>(targets));
}

template <typename T>
T LossAndGradient(const BasicModel<T> &model, const TokenSequence &seq,
                  std::span<const MaskTarget> targets, T weight,
                  ModelParams<T> *grad) {
  CheckTargets<T>(seq, targets, model.config.vocab_size);
  ForwardState<T> state;
  Forward(model, seq, &state);
  const auto &p = model.params;
  const T inv_m = T(1) / static_cast<T>(targets.size());

  Matrix<T> dx = Matrix<T>::Zero(state.output.rows(), state.output.cols());
  double total = 0.0;
  for (const MaskTarget &t : targets) {
    Matrix<T> h = state.output.row(t.position);
    Matrix<T> z = h * p.output_projection.transpose() + p.output_bias;
    T max_z = z.maxCoeff();
    Matrix<T> prob = (z.array() - max_z).exp().matrix();
    T sum = prob.sum();
    total += static_cast<double>(max_z + std::log(sum) - z(0, t.id));
    prob /= sum;
    prob(0, t.id) -= T(1);
    Matrix<T> dz = prob * (inv_m * weight);
    grad->output_projection.noalias() += dz.transpose() * h;
    grad->output_bias += dz;
    dx.row(t.position).noalias() += dz * p.output_projection;
  }
  Backward(model, seq, state, std::move(dx), grad);
  return static_cast<T>(total / static_cast<double>(targets.size()));
}

template <typename T>
BasicModel<T> ResizeVocab(const BasicModel<T> &model, int new_v) {
  const int v = model.config.vocab_size;
  if (new_v < v) throw Error("shrinking unsupported");
  BasicModel<T> out = model;
  if (new_v == v) return out;
  const int l = model.config.hidden;
  auto grow_rows = [&](Matrix<T> &m) {
    Matrix<T> bigger = Matrix<T>::Zero(new_v, l);
    bigger.topRows(v) = m;
    m = std::move(bigger);
  };
  grow_rows(out.params.token_embeddings);
  grow_rows(out.params.output_projection);
  Matrix<T> bias = Matrix<T>::Zero(1, new_v);
  bias.leftCols(v) = model.params.output_bias;
  out.params.output_bias = std::move(bias);
  out.config.vocab_size = new_v;
  return out;
}

template <typename T>
bool AllFinite(const ModelParams<T> &params) {
  bool ok = true;
  params.ForEach([&](const std::string &, const Matrix<T> &m) {
    if (ok && !m.allFinite()) ok = false;
  });
  return ok;
}

std::string ModelChecksum(const MlmModel &model) {
  std::string bytes;
  model.params.ForEach([&](const std::string &name, const Matrix<float> &m) {
    bytes += name;
    bytes.append(reinterpret_cast<const char *>(m.data()),
                 static_cast<size_t>(m.size()) * sizeof(float));
  });
  return Sha256Hex(bytes);
}

std::string RowsDigest(const Matrix<float> &m, int rows) {
  if (rows > m.rows()) throw Error("RowsDigest: not enough rows");
  return Sha256Hex(std::string_view(
      reinterpret_cast<const char *>(m.data()),
      static_cast<size_t>(rows) * static_cast<size_t>(m.cols()) * sizeof(float)));
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  double max_z = -std::numeric_limits<double>::infinity();
  for (double z : logits) max_z = std::max(max_z, z);
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_z);
    sum += out[i];
  }
  for (double &x : out) x /= sum;
  return out;
}

#define ATOMLM_INSTANTIATE(T)                                                 \
  template struct ModelParams<T>;                                             \
  template BasicModel<T> InitModel<T>(const ModelConfig &);                   \
  template Matrix<T> EncodeSequence<T>(const BasicModel<T> &,                 \
                                       const TokenSequence &);                \
  template Matrix<T> ForwardLogits<T>(const BasicModel<T> &,                  \
                                      const TokenSequence &);                 \
  template T MlmLoss<T>(const BasicModel<T> &, const TokenSequence &,         \
                        std::span<const MaskTarget>);                         \
  template T MlmLoss<T>(const BasicModel<T> &, const TokenSequence &,         \
                        std::span<const TokenId>);                            \
  template T LossAndGradient<T>(const BasicModel<T> &, const TokenSequence &, \
                                std::span<const MaskTarget>, T,               \
                                ModelParams<T> *);                            \
  template BasicModel<T> ResizeVocab<T>(const BasicModel<T> &, int);          \
  template bool AllFinite<T>(const ModelParams<T> &);

ATOMLM_INSTANTIATE(float)
ATOMLM_INSTANTIATE(double)
#undef ATOMLM_INSTANTIATE

template BasicModel<double> BasicModel<float>::Cast<double>() const;
template BasicModel<float> BasicModel<double>::Cast<float>() const;
template BasicModel<float> BasicModel<float>::Cast<float>() const;

}  // namespace atomlm
