#include "issuemask/pretrain.hpp"

#include <cmath>
#include <fstream>

#include "issuemask/checkpoint.hpp"
#include "issuemask/common.hpp"
#include "issuemask/hashing.hpp"
#include "issuemask/optimizer.hpp"
#include "issuemask/rng.hpp"

namespace issuemask {
namespace fs = std::filesystem;
using nlohmann::json;

void PretrainConfig::validate() const {
  if (epochs == 0) throw ValidationError("pretrain.epochs", "must be >= 1");
  if (batch_size == 0) throw ValidationError("pretrain.batch_size", "must be >= 1");
  if (!(learning_rate > 0)) throw ValidationError("pretrain.learning_rate", "must be positive");
  if (!(mask_probability > 0 && mask_probability < 1)) {
    throw ValidationError("pretrain.mask_probability", "must lie in (0, 1)");
  }
  if (max_sequence_length < 2 || max_sequence_length > encoder.max_positions) {
    throw ValidationError("pretrain.max_sequence_length", "must lie in [2, encoder.max_positions]");
  }
}

json PretrainConfig::to_json() const {
  auto enc = encoder.to_json();
  enc.erase("vocab_size");
  return {{"encoder", enc},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"mask_probability", mask_probability},
          {"max_sequence_length", max_sequence_length},
          {"min_count", min_count},
          {"max_vocab", max_vocab},
          {"seed", seed}};
}

PretrainConfig PretrainConfig::from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where, "expected an object");
  PretrainConfig c;
  for (const auto& [key, value] : j.items()) {
    const auto at = where + "." + key;
    try {
      if (key == "encoder") {
        c.encoder = EncoderConfig::from_json(value, at);
      } else if (key == "epochs") {
        c.epochs = value.get<std::size_t>();
      } else if (key == "batch_size") {
        c.batch_size = value.get<std::size_t>();
      } else if (key == "learning_rate") {
        c.learning_rate = value.get<double>();
      } else if (key == "mask_probability") {
        c.mask_probability = value.get<double>();
      } else if (key == "max_sequence_length") {
        c.max_sequence_length = value.get<std::size_t>();
      } else if (key == "min_count") {
        c.min_count = value.get<std::size_t>();
      } else if (key == "max_vocab") {
        c.max_vocab = value.get<std::size_t>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else {
        throw ValidationError(at, "unknown key");
      }
    } catch (const json::exception& e) {
      throw ValidationError(at, e.what());
    }
  }
  return c;
}

PretrainedEncoder pretrain_mlm(const std::vector<std::vector<std::string>>& docs, const PretrainConfig& config,
                               std::string id) {
  config.validate();
  std::vector<const std::vector<std::string>*> usable;
  for (const auto& d : docs) {
    if (!d.empty()) usable.push_back(&d);
  }
  if (usable.empty()) throw ValidationError("pretrain", "no non-empty documents");

  PretrainedEncoder model;
  model.id = std::move(id);
  model.vocab = Vocab::build(docs, config.min_count, config.max_vocab);
  auto enc_config = config.encoder;
  enc_config.vocab_size = model.vocab.size();
  model.encoder = Encoder<float>(enc_config, derive_seed(config.seed, 1));

  auto& params = model.encoder.params();
  const auto V = static_cast<Eigen::Index>(model.vocab.size());
  Param<float> out_bias{"mlm.bias", Matrix<float>::Zero(1, V), Matrix<float>::Zero(1, V), false};
  std::vector<Param<float>*> trainable;
  for (auto& p : params.all()) trainable.push_back(&p);
  trainable.push_back(&out_bias);
  AdamW<float> optimizer(trainable, {0.9, 0.999, 1e-6, 0.01});
  auto& embedding = params[model.encoder.token_embedding()];

  SeededRng rng(derive_seed(config.seed, 2));
  std::vector<std::size_t> order(usable.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t steps_per_epoch = (order.size() + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = steps_per_epoch * config.epochs;
  const auto first_word = static_cast<std::uint64_t>(Vocab::kNumSpecial);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t epoch_positions = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto end = std::min(order.size(), start + config.batch_size);
      struct Example {
        std::vector<std::int32_t> input;
        std::vector<std::pair<Eigen::Index, std::int32_t>> targets;
      };
      std::vector<Example> batch;
      std::size_t positions = 0;
      for (std::size_t b = start; b < end; ++b) {
        Example ex;
        const auto original = model.vocab.encode(*usable[order[b]], config.max_sequence_length);
        ex.input = original;
        for (std::size_t t = 1; t < original.size(); ++t) {
          if (rng.uniform() < config.mask_probability) ex.targets.emplace_back(static_cast<Eigen::Index>(t), original[t]);
        }
        if (ex.targets.empty() && original.size() > 1) {
          const auto t = 1 + rng.uniform_index(original.size() - 1);
          ex.targets.emplace_back(static_cast<Eigen::Index>(t), original[t]);
        }
        for (const auto& [t, _] : ex.targets) {
          const double r = rng.uniform();
          if (r < 0.8) {
            ex.input[static_cast<std::size_t>(t)] = Vocab::kMask;
          } else if (r < 0.9 && static_cast<std::uint64_t>(V) > first_word) {
            ex.input[static_cast<std::size_t>(t)] =
                static_cast<std::int32_t>(first_word + rng.uniform_index(static_cast<std::uint64_t>(V) - first_word));
          }
        }
        positions += ex.targets.size();
        batch.push_back(std::move(ex));
      }
      if (positions == 0) continue;

      optimizer.zero_grad();
      const float inv = 1.0f / static_cast<float>(positions);
      for (const auto& ex : batch) {
        if (ex.targets.empty()) continue;
        Encoder<float>::Cache cache;
        const auto hidden = model.encoder.forward(ex.input, &cache);
        Matrix<float> d_hidden = Matrix<float>::Zero(hidden.rows(), hidden.cols());
        for (const auto& [t, target] : ex.targets) {
          Matrix<float> logits = hidden.row(t) * embedding.value.transpose();
          logits += out_bias.value;
          const float max = logits.maxCoeff();
          Matrix<float> probs = (logits.array() - max).exp().matrix();
          const float sum = probs.sum();
          probs /= sum;
          epoch_loss -= std::log(std::max(static_cast<double>(probs(0, target)), 1e-30));
          probs(0, target) -= 1.0f;
          probs *= inv;
          d_hidden.row(t) += probs * embedding.value;
          embedding.grad.noalias() += probs.transpose() * hidden.row(t);
          out_bias.grad += probs;
        }
        model.encoder.backward(cache, d_hidden);
      }
      epoch_positions += positions;
      optimizer.clip_grad_norm(1.0);
      optimizer.step(linear_decay(config.learning_rate, optimizer.steps(), total_steps));
    }
    model.epoch_losses.push_back(epoch_positions == 0 ? 0.0 : epoch_loss / static_cast<double>(epoch_positions));
  }
  return model;
}

void save_pretrained(const fs::path& dir, const PretrainedEncoder& model, const std::vector<ProvenanceInput>& inputs) {
  fs::create_directories(dir);
  model.vocab.save(dir / "vocab.txt");
  write_tensors(dir / "weights.bin", model.encoder.params());
  json manifest = {{"format", kCheckpointFormat},
                   {"kind", "pretrained_encoder"},
                   {"id", model.id},
                   {"encoder", model.encoder.config().to_json()},
                   {"vocab_sha256", sha256_file(dir / "vocab.txt")},
                   {"weights_sha256", sha256_file(dir / "weights.bin")},
                   {"params_digest", model.digest()},
                   {"epoch_losses", model.epoch_losses}};
  {
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
  }
  Provenance prov;
  prov.artifact = "pretrained_encoder";
  prov.inputs = inputs;
  prov.meta = {{"params_digest", model.digest()}};
  write_provenance(dir, std::move(prov));
}

PretrainedEncoder load_pretrained(const fs::path& dir) {
  const auto manifest = read_checkpoint_manifest(dir, "pretrained_encoder");
  PretrainedEncoder model;
  model.id = manifest.at("id").get<std::string>();
  model.vocab = Vocab::load(dir / "vocab.txt");
  const auto config = EncoderConfig::from_json(manifest.at("encoder"), "encoder");
  if (config.vocab_size != model.vocab.size()) throw ValidationError(dir.string(), "vocab size mismatch");
  model.encoder = Encoder<float>(config, 0);
  read_tensors(dir / "weights.bin", model.encoder.params());
  if (model.digest() != manifest.at("params_digest").get<std::string>()) {
    throw DependencyError("pretrained encoder " + dir.string() + " fails its parameter digest");
  }
  model.epoch_losses = manifest.value("epoch_losses", std::vector<double>{});
  return model;
}

}  // namespace issuemask
