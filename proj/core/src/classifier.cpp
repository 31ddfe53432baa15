#include "issuemask/classifier.hpp"

#include <cmath>
#include <fstream>

#include "issuemask/checkpoint.hpp"
#include "issuemask/hashing.hpp"
#include "issuemask/optimizer.hpp"
#include "issuemask/rng.hpp"

namespace issuemask {
namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate(std::size_t positional_capacity) const {
  if (epochs < 1) throw ValidationError("train.epochs", "must be >= 1");
  if (batch_size < 1) throw ValidationError("train.batch_size", "must be >= 1");
  if (!(learning_rate > 0)) throw ValidationError("train.learning_rate", "must be positive");
  if (max_sequence_length < 2) throw ValidationError("train.max_sequence_length", "must be >= 2");
  if (positional_capacity != 0 && max_sequence_length > positional_capacity) {
    throw ValidationError("train.max_sequence_length", "exceeds the encoder's positional capacity of " +
                                                           std::to_string(positional_capacity));
  }
  if (!(cls_loss_weight >= 0)) throw ValidationError("train.cls_loss_weight", "must be non-negative");
  if (!(weight_decay >= 0)) throw ValidationError("train.weight_decay", "must be non-negative");
  if (!(grad_clip > 0)) throw ValidationError("train.grad_clip", "must be positive");
}

json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"max_sequence_length", max_sequence_length},
          {"seed", seed},
          {"encoder_id", encoder_id},
          {"data_workers", data_workers},
          {"cls_loss_weight", cls_loss_weight},
          {"weight_decay", weight_decay},
          {"grad_clip", grad_clip}};
}

TrainConfig TrainConfig::from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where, "expected an object");
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    const auto at = where + "." + key;
    try {
      if (key == "epochs") {
        c.epochs = value.get<std::size_t>();
      } else if (key == "batch_size") {
        c.batch_size = value.get<std::size_t>();
      } else if (key == "learning_rate") {
        c.learning_rate = value.get<double>();
      } else if (key == "max_sequence_length") {
        c.max_sequence_length = value.get<std::size_t>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "encoder_id") {
        c.encoder_id = value.get<std::string>();
      } else if (key == "data_workers") {
        c.data_workers = value.get<std::size_t>();
      } else if (key == "cls_loss_weight") {
        c.cls_loss_weight = value.get<double>();
      } else if (key == "weight_decay") {
        c.weight_decay = value.get<double>();
      } else if (key == "grad_clip") {
        c.grad_clip = value.get<double>();
      } else {
        throw ValidationError(at, "unknown key");
      }
    } catch (const json::exception& e) {
      throw ValidationError(at, e.what());
    }
  }
  return c;
}

std::string ClassifierModel::weights_digest() const {
  return sha256_hex(encoder.params().digest() + head.digest());
}

namespace {

constexpr std::size_t kHeadWeight = 0;
constexpr std::size_t kHeadBias = 1;

ParamStore<float> make_head(std::size_t hidden) {
  ParamStore<float> head;
  head.add("head.weight", static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(kNumLabels), true);
  head.add("head.bias", 1, static_cast<Eigen::Index>(kNumLabels), false);
  return head;
}

struct Target {
  Eigen::Index position;  // row in the encoder output
  std::size_t label;
  float weight;
};

// Encoded ids plus every loss term an instance contributes.
struct Prepared {
  std::vector<std::int32_t> ids;
  std::vector<Target> targets;
};

Prepared prepare(const ClassifierModel& model, const MaskedInstance& instance) {
  Prepared p;
  p.ids = model.vocab.encode(instance.tokens, model.config.max_sequence_length);
  for (std::size_t m = 0; m < instance.mask_positions.size(); ++m) {
    const auto row = instance.mask_positions[m] + 1;
    if (row < p.ids.size()) p.targets.push_back({static_cast<Eigen::Index>(row), label_index(instance.pseudo_labels[m]), 1.0f});
  }
  if (model.config.cls_loss_weight > 0 && instance.truth_label) {
    p.targets.push_back({0, label_index(*instance.truth_label), static_cast<float>(model.config.cls_loss_weight)});
  }
  return p;
}

double positions_of(const Prepared& p) {
  return static_cast<double>(p.targets.size());
}

double instance_loss(const ClassifierModel& model, const Prepared& p) {
  const auto hidden = model.encoder.forward(p.ids, nullptr);
  double loss = 0.0;
  for (const auto& t : p.targets) {
    Matrix<float> logits = hidden.row(t.position) * model.head[kHeadWeight].value;
    logits += model.head[kHeadBias].value;
    const float max = logits.maxCoeff();
    const Matrix<float> probs = (logits.array() - max).exp().matrix() / (logits.array() - max).exp().sum();
    loss += t.weight * -std::log(std::max(static_cast<double>(probs(0, static_cast<Eigen::Index>(t.label))), 1e-30));
  }
  return loss;
}

// Forward, loss, and backward for one instance. Returns the summed weighted
// loss; gradients are scaled by `scale`.
double instance_step(ClassifierModel& model, const Prepared& p, float scale) {
  Encoder<float>::Cache cache;
  const auto hidden = model.encoder.forward(p.ids, &cache);
  auto& w = model.head[kHeadWeight];
  auto& b = model.head[kHeadBias];
  Matrix<float> d_hidden = Matrix<float>::Zero(hidden.rows(), hidden.cols());
  double loss = 0.0;
  for (const auto& t : p.targets) {
    Matrix<float> logits = hidden.row(t.position) * w.value;
    logits += b.value;
    const float max = logits.maxCoeff();
    Matrix<float> probs = (logits.array() - max).exp().matrix();
    probs /= probs.sum();
    const auto y = static_cast<Eigen::Index>(t.label);
    loss += t.weight * -std::log(std::max(static_cast<double>(probs(0, y)), 1e-30));
    probs(0, y) -= 1.0f;
    probs *= t.weight * scale;
    w.grad.noalias() += hidden.row(t.position).transpose() * probs;
    b.grad += probs;
    d_hidden.row(t.position) += probs * w.value.transpose();
  }
  model.encoder.backward(cache, d_hidden);
  return loss;
}

}  // namespace

ClassifierModel::Logits ClassifierModel::logits(const MaskedInstance& instance) const {
  const auto ids = vocab.encode(instance.tokens, config.max_sequence_length);
  Logits out;
  for (auto pos : instance.mask_positions) {
    if (pos + 1 < ids.size()) out.kept_masks.push_back(pos);
  }
  const auto hidden = encoder.forward(ids, nullptr);
  out.rows.resize(static_cast<Eigen::Index>(out.kept_masks.size() + 1), static_cast<Eigen::Index>(kNumLabels));
  auto row_logits = [&](Eigen::Index r) -> Eigen::RowVectorXd {
    Matrix<float> l = hidden.row(r) * head[kHeadWeight].value;
    l += head[kHeadBias].value;
    return l.cast<double>();
  };
  out.rows.row(0) = row_logits(0);
  for (std::size_t m = 0; m < out.kept_masks.size(); ++m) {
    out.rows.row(static_cast<Eigen::Index>(m + 1)) = row_logits(static_cast<Eigen::Index>(out.kept_masks[m] + 1));
  }
  return out;
}

ClassifierModel init_classifier(const PretrainedEncoder& base, const TrainConfig& config) {
  config.validate(base.encoder.config().max_positions);
  ClassifierModel model;
  model.encoder_id = config.encoder_id.empty() ? base.id : config.encoder_id;
  model.pretrained_digest = base.digest();
  model.vocab = base.vocab;
  model.encoder = base.encoder;
  model.config = config;
  model.head = make_head(base.encoder.config().hidden);
  SeededRng rng(derive_seed(config.seed, 11));
  auto& w = model.head[kHeadWeight].value;
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<float>(rng.normal(0.0, 0.02));
  model.encoder.params().zero_grad();
  model.initial_weights_digest = model.weights_digest();
  return model;
}

ClassifierModel fine_tune(const PretrainedEncoder& base, const std::vector<MaskedInstance>& train,
                          const TrainConfig& config) {
  if (train.empty()) throw ValidationError("fine_tune", "empty training set");
  for (const auto& instance : train) {
    if (!instance.truth_label) throw ValidationError(instance.issue_id, "training instance without a label");
    instance.validate(instance.issue_id);
  }
  auto model = init_classifier(base, config);

  std::vector<Prepared> prepared;
  prepared.reserve(train.size());
  for (const auto& instance : train) prepared.push_back(prepare(model, instance));

  std::vector<Param<float>*> trainable;
  for (auto& p : model.encoder.params().all()) trainable.push_back(&p);
  for (auto& p : model.head.all()) trainable.push_back(&p);
  AdamW<float> optimizer(trainable, {0.9, 0.999, 1e-6, config.weight_decay});

  SeededRng rng(derive_seed(config.seed, 12));
  std::vector<std::size_t> order(prepared.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t steps_per_epoch = (order.size() + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = steps_per_epoch * config.epochs;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    double epoch_positions = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto end = std::min(order.size(), start + config.batch_size);
      double positions = 0.0;
      for (std::size_t i = start; i < end; ++i) positions += positions_of(prepared[order[i]]);
      if (positions == 0.0) continue;
      optimizer.zero_grad();
      double batch_loss = 0.0;
      const auto scale = static_cast<float>(1.0 / positions);
      for (std::size_t i = start; i < end; ++i) {
        if (!prepared[order[i]].targets.empty()) batch_loss += instance_step(model, prepared[order[i]], scale);
      }
      optimizer.clip_grad_norm(config.grad_clip);
      optimizer.step(linear_decay(config.learning_rate, optimizer.steps(), total_steps));
      if (epoch == 0) model.first_epoch_step_losses.push_back(batch_loss / positions);
      epoch_loss += batch_loss;
      epoch_positions += positions;
    }
    model.epoch_losses.push_back(epoch_positions == 0.0 ? 0.0 : epoch_loss / epoch_positions);
  }
  optimizer.zero_grad();
  return model;
}

double mean_loss(const ClassifierModel& model, const std::vector<MaskedInstance>& instances) {
  double loss = 0.0;
  double positions = 0.0;
  for (const auto& instance : instances) {
    const auto p = prepare(model, instance);
    positions += positions_of(p);
    if (!p.targets.empty()) loss += instance_loss(model, p);
  }
  return positions == 0.0 ? 0.0 : loss / positions;
}

std::string_view to_string(DecisionPath path) {
  return path == DecisionPath::mask_vote ? "mask_vote" : "cls_fallback";
}

namespace {

// Strict argmax; nullopt on an exact tie.
std::optional<Label> strict_argmax(const ClassProbs& p) {
  if (p[0] > p[1]) return kLabelOrder[0];
  if (p[1] > p[0]) return kLabelOrder[1];
  return std::nullopt;
}

}  // namespace

PredictionOutcome decide(std::string issue_id, std::vector<ClassProbs> per_mask, ClassProbs cls, double threshold) {
  PredictionOutcome out;
  out.issue_id = std::move(issue_id);
  out.per_mask_probabilities = std::move(per_mask);
  out.cls_probabilities = cls;
  const auto sec = label_index(Label::security);
  const auto non = label_index(Label::non_security);

  if (out.per_mask_probabilities.empty()) {
    out.decision_path = DecisionPath::cls_fallback;
    out.final_label = cls[sec] > threshold ? Label::security : Label::non_security;
    out.max_confidence = cls[label_index(out.final_label)];
    return out;
  }

  out.decision_path = DecisionPath::mask_vote;
  ClassProbs mean{};
  for (const auto& p : out.per_mask_probabilities) {
    ++out.vote_tally[p[sec] >= p[non] ? sec : non];
    mean[sec] += p[sec];
    mean[non] += p[non];
  }
  if (out.vote_tally[sec] != out.vote_tally[non]) {
    out.final_label = out.vote_tally[sec] > out.vote_tally[non] ? Label::security : Label::non_security;
  } else if (auto by_mean = strict_argmax(mean)) {
    out.final_label = *by_mean;
  } else if (auto by_cls = strict_argmax(cls)) {
    out.final_label = *by_cls;
  } else {
    out.final_label = Label::security;
  }
  for (const auto& p : out.per_mask_probabilities) {
    out.max_confidence = std::max(out.max_confidence, p[label_index(out.final_label)]);
  }
  return out;
}

PredictionOutcome predict(const ClassifierModel& model, const MaskedInstance& instance, double threshold) {
  const auto logits = model.logits(instance);
  const Eigen::MatrixXd probs = softmax_rows(logits.rows);
  std::vector<ClassProbs> per_mask;
  for (Eigen::Index r = 1; r < probs.rows(); ++r) per_mask.push_back({probs(r, 0), probs(r, 1)});
  return decide(instance.issue_id, std::move(per_mask), {probs(0, 0), probs(0, 1)}, threshold);
}

std::vector<PredictionOutcome> predict_batch(const ClassifierModel& model, const std::vector<MaskedInstance>& instances,
                                             double threshold) {
  std::vector<PredictionOutcome> out;
  out.reserve(instances.size());
  for (const auto& instance : instances) {
    try {
      out.push_back(predict(model, instance, threshold));
    } catch (const Error& e) {
      throw Error("instance " + instance.issue_id + ": " + e.what());
    }
  }
  return out;
}

json to_json(const PredictionOutcome& o) {
  json tally;
  for (auto label : kLabelOrder) tally[std::string(to_string(label))] = o.vote_tally[label_index(label)];
  return {{"issue_id", o.issue_id},
          {"per_mask_probabilities", o.per_mask_probabilities},
          {"cls_probabilities", o.cls_probabilities},
          {"vote_tally", tally},
          {"final_label", std::string(to_string(o.final_label))},
          {"decision_path", std::string(to_string(o.decision_path))},
          {"max_confidence", o.max_confidence}};
}

PredictionOutcome outcome_from_json(const json& r, const std::string& where) {
  PredictionOutcome o;
  try {
    o.issue_id = r.at("issue_id").get<std::string>();
    o.per_mask_probabilities = r.at("per_mask_probabilities").get<std::vector<ClassProbs>>();
    o.cls_probabilities = r.at("cls_probabilities").get<ClassProbs>();
    for (auto label : kLabelOrder) {
      o.vote_tally[label_index(label)] = r.at("vote_tally").at(std::string(to_string(label))).get<std::size_t>();
    }
    o.final_label = parse_label(r.at("final_label").get<std::string>());
    const auto path = r.at("decision_path").get<std::string>();
    if (path != "mask_vote" && path != "cls_fallback") throw ValidationError(where, "unknown decision_path");
    o.decision_path = path == "mask_vote" ? DecisionPath::mask_vote : DecisionPath::cls_fallback;
    o.max_confidence = r.at("max_confidence").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(where, e.what());
  }
  return o;
}

namespace {

ParamStore<float> combined(const ClassifierModel& model) {
  ParamStore<float> all;
  for (const auto* store : {&model.encoder.params(), &model.head}) {
    for (const auto& p : store->all()) {
      const auto i = all.add(p.name, p.value.rows(), p.value.cols(), p.decay);
      all[i].value = p.value;
    }
  }
  return all;
}

}  // namespace

void save_classifier(const fs::path& dir, const ClassifierModel& model, const std::vector<ProvenanceInput>& inputs) {
  fs::create_directories(dir);
  model.vocab.save(dir / "vocab.txt");
  write_tensors(dir / "weights.bin", combined(model));
  json labels = json::array();
  for (auto label : kLabelOrder) labels.push_back(std::string(to_string(label)));
  const json manifest = {{"format", kCheckpointFormat},
                         {"kind", "classifier"},
                         {"encoder_id", model.encoder_id},
                         {"pretrained_digest", model.pretrained_digest},
                         {"encoder", model.encoder.config().to_json()},
                         {"config", model.config.to_json()},
                         {"label_order", labels},
                         {"initial_weights_digest", model.initial_weights_digest},
                         {"params_digest", model.weights_digest()},
                         {"vocab_sha256", sha256_file(dir / "vocab.txt")},
                         {"weights_sha256", sha256_file(dir / "weights.bin")},
                         {"epoch_losses", model.epoch_losses}};
  {
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
  }
  Provenance prov;
  prov.artifact = "classifier";
  prov.inputs = inputs;
  prov.meta = {{"initial_weights_digest", model.initial_weights_digest}, {"params_digest", model.weights_digest()}};
  write_provenance(dir, std::move(prov));
}

ClassifierModel load_classifier(const fs::path& dir) {
  const auto manifest = read_checkpoint_manifest(dir, "classifier");
  const auto where = (dir / "manifest.json").string();
  json labels = json::array();
  for (auto label : kLabelOrder) labels.push_back(std::string(to_string(label)));
  if (manifest.at("label_order") != labels) throw ValidationError(where, "label_order must be [security, non_security]");

  ClassifierModel model;
  model.encoder_id = manifest.at("encoder_id").get<std::string>();
  model.pretrained_digest = manifest.at("pretrained_digest").get<std::string>();
  model.vocab = Vocab::load(dir / "vocab.txt");
  const auto enc_config = EncoderConfig::from_json(manifest.at("encoder"), where + ".encoder");
  if (enc_config.vocab_size != model.vocab.size()) throw ValidationError(where, "vocab size mismatch");
  model.encoder = Encoder<float>(enc_config, 0);
  model.head = make_head(enc_config.hidden);
  model.config = TrainConfig::from_json(manifest.at("config"), where + ".config");
  model.initial_weights_digest = manifest.at("initial_weights_digest").get<std::string>();
  model.epoch_losses = manifest.value("epoch_losses", std::vector<double>{});

  auto all = combined(model);
  read_tensors(dir / "weights.bin", all);
  std::size_t i = 0;
  for (auto* store : {&model.encoder.params(), &model.head}) {
    for (auto& p : store->all()) p.value = all[i++].value;
  }
  if (model.weights_digest() != manifest.at("params_digest").get<std::string>()) {
    throw DependencyError("classifier checkpoint " + dir.string() + " fails its parameter digest");
  }
  return model;
}

}  // namespace issuemask
