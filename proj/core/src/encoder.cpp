#include "issuemask/encoder.hpp"

#include <cmath>

#include "issuemask/common.hpp"
#include "issuemask/hashing.hpp"
#include "issuemask/rng.hpp"

namespace issuemask {
using nlohmann::json;

template <typename S>
std::size_t ParamStore<S>::add(std::string name, Eigen::Index rows, Eigen::Index cols, bool decay) {
  Param<S> p;
  p.name = std::move(name);
  p.value = Matrix<S>::Zero(rows, cols);
  p.grad = Matrix<S>::Zero(rows, cols);
  p.decay = decay;
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

template <typename S>
std::size_t ParamStore<S>::count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

template <typename S>
void ParamStore<S>::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

template <typename S>
std::string ParamStore<S>::digest() const {
  Sha256 h;
  for (const auto& p : params_) {
    h.update(p.name).update("\0", 1);
    const std::int64_t shape[2] = {p.value.rows(), p.value.cols()};
    h.update(shape, sizeof(shape));
    h.update(p.value.data(), static_cast<std::size_t>(p.value.size()) * sizeof(S));
  }
  return h.hex_digest();
}

template class ParamStore<float>;
template class ParamStore<double>;

void EncoderConfig::validate() const {
  if (vocab_size <= 5) throw ValidationError("encoder.vocab_size", "vocabulary has no words");
  if (hidden == 0 || layers == 0 || heads == 0 || intermediate == 0 || max_positions < 2) {
    throw ValidationError("encoder", "hidden, layers, heads, intermediate must be positive and max_positions >= 2");
  }
  if (hidden % heads != 0) throw ValidationError("encoder.heads", "hidden size must be divisible by heads");
  if (!(init_std > 0)) throw ValidationError("encoder.init_std", "must be positive");
}

json EncoderConfig::to_json() const {
  return {{"vocab_size", vocab_size}, {"hidden", hidden},
          {"layers", layers},         {"heads", heads},
          {"intermediate", intermediate}, {"max_positions", max_positions},
          {"init_std", init_std},     {"layer_norm_eps", layer_norm_eps}};
}

EncoderConfig EncoderConfig::from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where, "expected an object");
  EncoderConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "vocab_size") {
        c.vocab_size = value.get<std::size_t>();
      } else if (key == "hidden") {
        c.hidden = value.get<std::size_t>();
      } else if (key == "layers") {
        c.layers = value.get<std::size_t>();
      } else if (key == "heads") {
        c.heads = value.get<std::size_t>();
      } else if (key == "intermediate") {
        c.intermediate = value.get<std::size_t>();
      } else if (key == "max_positions") {
        c.max_positions = value.get<std::size_t>();
      } else if (key == "init_std") {
        c.init_std = value.get<double>();
      } else if (key == "layer_norm_eps") {
        c.layer_norm_eps = value.get<double>();
      } else {
        throw ValidationError(where + "." + key, "unknown key");
      }
    } catch (const json::exception& e) {
      throw ValidationError(where + "." + key, e.what());
    }
  }
  return c;
}

namespace {

template <typename S>
Matrix<S> layer_norm(const Matrix<S>& x, const Matrix<S>& gain, const Matrix<S>& bias, S eps,
                     typename Encoder<S>::LayerNormCache* cache) {
  const auto rows = x.rows();
  const auto cols = x.cols();
  Matrix<S> xhat(rows, cols);
  RowVector<S> rstd(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const S mean = x.row(r).mean();
    const S var = (x.row(r).array() - mean).square().mean();
    rstd(r) = S(1) / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mean) * rstd(r);
  }
  Matrix<S> y = (xhat.array().rowwise() * gain.row(0).array()).matrix();
  y.rowwise() += bias.row(0);
  if (cache != nullptr) {
    cache->xhat = std::move(xhat);
    cache->rstd = std::move(rstd);
  }
  return y;
}

template <typename S>
Matrix<S> layer_norm_backward(const Matrix<S>& dy, const typename Encoder<S>::LayerNormCache& cache,
                              Param<S>& gain, Param<S>& bias) {
  gain.grad.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  bias.grad.row(0) += dy.colwise().sum();
  const Matrix<S> dxhat = (dy.array().rowwise() * gain.value.row(0).array()).matrix();
  Matrix<S> dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const S mean_d = dxhat.row(r).mean();
    const S mean_dx = (dxhat.row(r).array() * cache.xhat.row(r).array()).mean();
    dx.row(r) = cache.rstd(r) * (dxhat.row(r).array() - mean_d - cache.xhat.row(r).array() * mean_dx).matrix();
  }
  return dx;
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

template <typename S>
S gelu(S u) {
  return S(0.5) * u * (S(1) + std::tanh(S(kGeluC) * (u + S(kGeluA) * u * u * u)));
}

template <typename S>
S gelu_grad(S u) {
  const S t = std::tanh(S(kGeluC) * (u + S(kGeluA) * u * u * u));
  return S(0.5) * (S(1) + t) + S(0.5) * u * (S(1) - t * t) * S(kGeluC) * (S(1) + S(3 * kGeluA) * u * u);
}

template <typename S>
void softmax_rows_inplace(Matrix<S>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const S max = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - max).exp().matrix();
    m.row(r) /= m.row(r).sum();
  }
}

}  // namespace

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out = logits;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double max = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - max).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

template <typename S>
Encoder<S>::Encoder(EncoderConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const auto d = static_cast<Eigen::Index>(config_.hidden);
  const auto f = static_cast<Eigen::Index>(config_.intermediate);
  tok_emb_ = params_.add("embeddings.token", static_cast<Eigen::Index>(config_.vocab_size), d, true);
  pos_emb_ = params_.add("embeddings.position", static_cast<Eigen::Index>(config_.max_positions), d, true);
  emb_ln_g_ = params_.add("embeddings.ln.gain", 1, d, false);
  emb_ln_b_ = params_.add("embeddings.ln.bias", 1, d, false);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const auto p = "layer" + std::to_string(l) + ".";
    LayerIndex li{};
    li.wq = params_.add(p + "attn.wq", d, d, true);
    li.bq = params_.add(p + "attn.bq", 1, d, false);
    li.wk = params_.add(p + "attn.wk", d, d, true);
    li.bk = params_.add(p + "attn.bk", 1, d, false);
    li.wv = params_.add(p + "attn.wv", d, d, true);
    li.bv = params_.add(p + "attn.bv", 1, d, false);
    li.wo = params_.add(p + "attn.wo", d, d, true);
    li.bo = params_.add(p + "attn.bo", 1, d, false);
    li.ln1_g = params_.add(p + "ln1.gain", 1, d, false);
    li.ln1_b = params_.add(p + "ln1.bias", 1, d, false);
    li.w1 = params_.add(p + "ffn.w1", d, f, true);
    li.b1 = params_.add(p + "ffn.b1", 1, f, false);
    li.w2 = params_.add(p + "ffn.w2", f, d, true);
    li.b2 = params_.add(p + "ffn.b2", 1, d, false);
    li.ln2_g = params_.add(p + "ln2.gain", 1, d, false);
    li.ln2_b = params_.add(p + "ln2.bias", 1, d, false);
    layers_.push_back(li);
  }

  SeededRng rng(seed);
  for (auto& p : params_.all()) {
    if (p.name.ends_with(".gain")) {
      p.value.setOnes();
    } else if (p.decay) {
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = static_cast<S>(rng.normal(0.0, config_.init_std));
    }
  }
}

template <typename S>
Matrix<S> Encoder<S>::forward(const std::vector<std::int32_t>& ids, Cache* cache) const {
  const auto T = static_cast<Eigen::Index>(ids.size());
  if (ids.empty() || ids.size() > config_.max_positions) {
    throw Error("encoder input of " + std::to_string(ids.size()) + " tokens exceeds positional capacity " +
                std::to_string(config_.max_positions));
  }
  const auto d = static_cast<Eigen::Index>(config_.hidden);
  const auto heads = static_cast<Eigen::Index>(config_.heads);
  const auto dh = d / heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  const S eps = static_cast<S>(config_.layer_norm_eps);

  Matrix<S> x(T, d);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto id = ids[static_cast<std::size_t>(t)];
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) throw Error("token id out of range");
    x.row(t) = params_[tok_emb_].value.row(id) + params_[pos_emb_].value.row(t);
  }
  if (cache != nullptr) {
    cache->ids = ids;
    cache->layers.assign(layers_.size(), {});
  }
  Matrix<S> h = layer_norm<S>(x, params_[emb_ln_g_].value, params_[emb_ln_b_].value, eps,
                              cache ? &cache->ln_emb : nullptr);

  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& li = layers_[l];
    LayerCache local;
    LayerCache& c = cache ? cache->layers[l] : local;
    c.q = h * params_[li.wq].value;
    c.q.rowwise() += params_[li.bq].value.row(0);
    c.k = h * params_[li.wk].value;
    c.k.rowwise() += params_[li.bk].value.row(0);
    c.v = h * params_[li.wv].value;
    c.v.rowwise() += params_[li.bv].value.row(0);
    c.context.resize(T, d);
    c.probs.resize(static_cast<std::size_t>(heads));
    for (Eigen::Index hd = 0; hd < heads; ++hd) {
      const auto off = hd * dh;
      Matrix<S> scores = (c.q.middleCols(off, dh) * c.k.middleCols(off, dh).transpose()) * scale;
      softmax_rows_inplace(scores);
      c.context.middleCols(off, dh) = scores * c.v.middleCols(off, dh);
      c.probs[static_cast<std::size_t>(hd)] = std::move(scores);
    }
    Matrix<S> r1 = c.context * params_[li.wo].value;
    r1.rowwise() += params_[li.bo].value.row(0);
    r1 += h;
    c.h1 = layer_norm<S>(r1, params_[li.ln1_g].value, params_[li.ln1_b].value, eps, &c.ln1);
    c.pre_act = c.h1 * params_[li.w1].value;
    c.pre_act.rowwise() += params_[li.b1].value.row(0);
    c.act = c.pre_act.unaryExpr([](S u) { return gelu(u); });
    Matrix<S> r2 = c.act * params_[li.w2].value;
    r2.rowwise() += params_[li.b2].value.row(0);
    r2 += c.h1;
    c.input = std::move(h);
    h = layer_norm<S>(r2, params_[li.ln2_g].value, params_[li.ln2_b].value, eps, &c.ln2);
  }
  return h;
}

template <typename S>
void Encoder<S>::backward(const Cache& cache, const Matrix<S>& d_hidden) {
  const auto T = static_cast<Eigen::Index>(cache.ids.size());
  const auto d = static_cast<Eigen::Index>(config_.hidden);
  const auto heads = static_cast<Eigen::Index>(config_.heads);
  const auto dh = d / heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  Matrix<S> grad = d_hidden;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& li = layers_[l];
    const auto& c = cache.layers[l];
    const Matrix<S> dr2 = layer_norm_backward<S>(grad, c.ln2, params_[li.ln2_g], params_[li.ln2_b]);

    params_[li.w2].grad.noalias() += c.act.transpose() * dr2;
    params_[li.b2].grad.row(0) += dr2.colwise().sum();
    Matrix<S> dpre = dr2 * params_[li.w2].value.transpose();
    dpre = dpre.cwiseProduct(c.pre_act.unaryExpr([](S u) { return gelu_grad(u); }));
    params_[li.w1].grad.noalias() += c.h1.transpose() * dpre;
    params_[li.b1].grad.row(0) += dpre.colwise().sum();
    Matrix<S> dh1 = dr2;
    dh1.noalias() += dpre * params_[li.w1].value.transpose();

    const Matrix<S> dr1 = layer_norm_backward<S>(dh1, c.ln1, params_[li.ln1_g], params_[li.ln1_b]);
    params_[li.wo].grad.noalias() += c.context.transpose() * dr1;
    params_[li.bo].grad.row(0) += dr1.colwise().sum();
    const Matrix<S> dctx = dr1 * params_[li.wo].value.transpose();

    Matrix<S> dq(T, d), dk(T, d), dv(T, d);
    for (Eigen::Index hd = 0; hd < heads; ++hd) {
      const auto off = hd * dh;
      const auto& P = c.probs[static_cast<std::size_t>(hd)];
      const Matrix<S> dO = dctx.middleCols(off, dh);
      dv.middleCols(off, dh) = P.transpose() * dO;
      const Matrix<S> dP = dO * c.v.middleCols(off, dh).transpose();
      Matrix<S> dS(T, T);
      for (Eigen::Index r = 0; r < T; ++r) {
        const S dot = (dP.row(r).array() * P.row(r).array()).sum();
        dS.row(r) = (P.row(r).array() * (dP.row(r).array() - dot)).matrix() * scale;
      }
      dq.middleCols(off, dh) = dS * c.k.middleCols(off, dh);
      dk.middleCols(off, dh) = dS.transpose() * c.q.middleCols(off, dh);
    }
    params_[li.wq].grad.noalias() += c.input.transpose() * dq;
    params_[li.bq].grad.row(0) += dq.colwise().sum();
    params_[li.wk].grad.noalias() += c.input.transpose() * dk;
    params_[li.bk].grad.row(0) += dk.colwise().sum();
    params_[li.wv].grad.noalias() += c.input.transpose() * dv;
    params_[li.bv].grad.row(0) += dv.colwise().sum();

    grad = dr1;
    grad.noalias() += dq * params_[li.wq].value.transpose();
    grad.noalias() += dk * params_[li.wk].value.transpose();
    grad.noalias() += dv * params_[li.wv].value.transpose();
  }

  const Matrix<S> dx = layer_norm_backward<S>(grad, cache.ln_emb, params_[emb_ln_g_], params_[emb_ln_b_]);
  for (Eigen::Index t = 0; t < T; ++t) {
    params_[tok_emb_].grad.row(cache.ids[static_cast<std::size_t>(t)]) += dx.row(t);
    params_[pos_emb_].grad.row(t) += dx.row(t);
  }
}

template class Encoder<float>;
template class Encoder<double>;

}  // namespace issuemask
