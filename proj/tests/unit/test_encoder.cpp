#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "issuemask/common.hpp"
#include "issuemask/encoder.hpp"
#include "issuemask/optimizer.hpp"
#include "issuemask/rng.hpp"
#include "issuemask/vocab.hpp"

using namespace issuemask;
namespace fs = std::filesystem;

namespace {

EncoderConfig tiny_config() {
  EncoderConfig c;
  c.vocab_size = 12;
  c.hidden = 8;
  c.layers = 2;
  c.heads = 2;
  c.intermediate = 16;
  c.max_positions = 10;
  c.init_std = 0.3;
  return c;
}

double weighted_sum(const Matrix<double>& h, const Matrix<double>& r) { return (h.array() * r.array()).sum(); }

}  // namespace

// Central differences on every parameter tensor against the hand-written backward pass.
TEST(Encoder, GradientMatchesFiniteDifferences) {
  Encoder<double> enc(tiny_config(), 5);
  const std::vector<std::int32_t> ids{2, 7, 4, 9, 11, 3};
  SeededRng rng(8);
  Matrix<double> r(static_cast<Eigen::Index>(ids.size()), 8);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = rng.normal();

  Encoder<double>::Cache cache;
  enc.params().zero_grad();
  enc.forward(ids, &cache);
  enc.backward(cache, r);

  const double eps = 1e-6;
  for (auto& p : enc.params().all()) {
    for (int probe = 0; probe < 4; ++probe) {
      const auto i = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(p.value.size())));
      const double saved = p.value.data()[i];
      p.value.data()[i] = saved + eps;
      const double up = weighted_sum(enc.forward(ids, nullptr), r);
      p.value.data()[i] = saved - eps;
      const double down = weighted_sum(enc.forward(ids, nullptr), r);
      p.value.data()[i] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double analytic = p.grad.data()[i];
      // Token rows that never appear have zero gradient on both sides.
      EXPECT_NEAR(analytic, numeric, 1e-6 + 1e-4 * std::abs(numeric)) << p.name << "[" << i << "]";
    }
  }
}

TEST(Encoder, SeededInitIsDeterministic) {
  Encoder<float> a(tiny_config(), 3), b(tiny_config(), 3), c(tiny_config(), 4);
  EXPECT_EQ(a.params().digest(), b.params().digest());
  EXPECT_NE(a.params().digest(), c.params().digest());
}

TEST(Encoder, BidirectionalContext) {
  Encoder<double> enc(tiny_config(), 1);
  const auto h1 = enc.forward({2, 5, 6}, nullptr);
  const auto h2 = enc.forward({2, 5, 7}, nullptr);
  // Changing a later token changes the representation of an earlier one.
  EXPECT_GT((h1.row(1) - h2.row(1)).norm(), 1e-9);
}

TEST(Encoder, RejectsTooLongInput) {
  Encoder<float> enc(tiny_config(), 1);
  EXPECT_ANY_THROW(enc.forward(std::vector<std::int32_t>(11, 5), nullptr));
}

TEST(Softmax, RowsSumToOne) {
  Eigen::MatrixXd logits(3, 2);
  logits << 1000, -1000, 0.3, 0.3, -5, 2;
  const auto p = softmax_rows(logits);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
    EXPECT_GE(p.row(i).minCoeff(), 0.0);
  }
  EXPECT_DOUBLE_EQ(p(1, 0), 0.5);
}

TEST(AdamW, FirstStepMatchesHandComputation) {
  ParamStore<double> store;
  store.add("w", 1, 2, true);
  store.add("b", 1, 1, false);
  store[0].value << 1.0, -2.0;
  store[1].value << 0.5;
  store[0].grad << 0.1, -0.3;
  store[1].grad << 2.0;
  AdamW<double> opt({&store[0], &store[1]}, AdamWConfig{0.9, 0.999, 1e-12, 0.1});
  opt.step(0.01);
  // Bias-corrected first step moves each coordinate by lr * g/|g| (up to eps), plus decay on w.
  EXPECT_NEAR(store[0].value(0, 0), 1.0 - 0.01 * 0.1 * 1.0 - 0.01, 1e-9);
  EXPECT_NEAR(store[0].value(0, 1), -2.0 - 0.01 * 0.1 * -2.0 + 0.01, 1e-9);
  EXPECT_NEAR(store[1].value(0, 0), 0.5 - 0.01, 1e-9);
}

TEST(AdamW, ClipScalesJointNorm) {
  ParamStore<double> store;
  store.add("a", 1, 2, true);
  store[0].grad << 3.0, 4.0;
  AdamW<double> opt({&store[0]});
  EXPECT_DOUBLE_EQ(opt.clip_grad_norm(1.0), 5.0);
  EXPECT_NEAR(store[0].grad.norm(), 1.0, 1e-12);
}

TEST(Schedule, LinearDecayNoWarmup) {
  EXPECT_DOUBLE_EQ(linear_decay(2e-5, 0, 10), 2e-5);
  EXPECT_DOUBLE_EQ(linear_decay(2e-5, 5, 10), 1e-5);
  EXPECT_DOUBLE_EQ(linear_decay(2e-5, 10, 10), 0.0);
}

TEST(Vocab, SpecialsAndEncoding) {
  const auto v = Vocab::build({{"b", "a", "b"}, {"c", "[MASK]"}});
  EXPECT_EQ(v.token(Vocab::kMask), "[MASK]");
  EXPECT_EQ(v.id("[MASK]"), Vocab::kMask);
  EXPECT_EQ(v.id("b"), static_cast<std::int32_t>(Vocab::kNumSpecial));
  EXPECT_EQ(v.id("never"), Vocab::kUnk);
  EXPECT_EQ(v.encode({"a", "b", "c"}, 3), (std::vector<std::int32_t>{Vocab::kCls, v.id("a"), v.id("b")}));
  const auto dir = fs::temp_directory_path() / "issuemask_vocab";
  fs::create_directories(dir);
  v.save(dir / "vocab.txt");
  EXPECT_EQ(Vocab::load(dir / "vocab.txt"), v);
}
