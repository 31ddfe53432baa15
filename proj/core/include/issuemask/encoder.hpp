#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace issuemask {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;

template <typename S>
struct Param {
  std::string name;
  Matrix<S> value;
  Matrix<S> grad;
  bool decay = true;  // biases and layer-norm parameters are exempt from weight decay
};

/// Named parameter tensors in a fixed order (the order is part of the checkpoint format).
template <typename S>
class ParamStore {
 public:
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols, bool decay);
  Param<S>& operator[](std::size_t i) { return params_[i]; }
  const Param<S>& operator[](std::size_t i) const { return params_[i]; }
  std::vector<Param<S>>& all() { return params_; }
  const std::vector<Param<S>>& all() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t count() const;  // number of scalars
  void zero_grad();
  /// sha256 over names, shapes, and the raw little-endian values.
  std::string digest() const;

 private:
  std::vector<Param<S>> params_;
};

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t hidden = 64;
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t intermediate = 128;
  std::size_t max_positions = 512;
  double init_std = 0.02;
  double layer_norm_eps = 1e-5;

  void validate() const;
  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j, const std::string& where);
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Post-layer-norm bidirectional transformer encoder (BERT layout, no dropout)
/// with hand-written backward pass. Sequences are processed one at a time;
/// callers accumulate gradients over a batch.
template <typename S>
class Encoder {
 public:
  struct LayerNormCache {
    Matrix<S> xhat;
    RowVector<S> rstd;  // per row
  };
  struct LayerCache {
    Matrix<S> input;
    Matrix<S> q, k, v;
    std::vector<Matrix<S>> probs;  // per head, T x T
    Matrix<S> context;
    LayerNormCache ln1;
    Matrix<S> h1;
    Matrix<S> pre_act;
    Matrix<S> act;
    LayerNormCache ln2;
  };
  struct Cache {
    std::vector<std::int32_t> ids;
    LayerNormCache ln_emb;
    std::vector<LayerCache> layers;
  };

  Encoder() = default;
  /// Parameters drawn from N(0, init_std) with the given seed; LN gains 1, biases 0.
  Encoder(EncoderConfig config, std::uint64_t seed);

  const EncoderConfig& config() const { return config_; }
  ParamStore<S>& params() { return params_; }
  const ParamStore<S>& params() const { return params_; }

  /// Hidden states, one row per input id. `cache` may be null for inference.
  Matrix<S> forward(const std::vector<std::int32_t>& ids, Cache* cache) const;
  /// Accumulates parameter gradients for d(loss)/d(hidden states).
  void backward(const Cache& cache, const Matrix<S>& d_hidden);

  std::size_t token_embedding() const { return tok_emb_; }

  /// Copies parameter values between precisions (names and shapes must match).
  template <typename T>
  void assign_from(const Encoder<T>& other);

 private:
  struct LayerIndex {
    std::size_t wq, bq, wk, bk, wv, bv, wo, bo, ln1_g, ln1_b, w1, b1, w2, b2, ln2_g, ln2_b;
  };

  EncoderConfig config_;
  ParamStore<S> params_;
  std::size_t tok_emb_ = 0, pos_emb_ = 0, emb_ln_g_ = 0, emb_ln_b_ = 0;
  std::vector<LayerIndex> layers_;

  template <typename T>
  friend class Encoder;
};

template <typename S>
template <typename T>
void Encoder<S>::assign_from(const Encoder<T>& other) {
  config_ = other.config_;
  *this = Encoder<S>(config_, 0);
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i].value = other.params()[i].value.template cast<S>();
}

/// Row-wise softmax computed in double.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

}  // namespace issuemask
