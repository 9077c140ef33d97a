/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>

#include "fithand/checkpoint.hpp"
#include "fithand/error.hpp"
#include "fithand/optim.hpp"
#include "fithand/train.hpp"

using namespace fithand;

namespace {

TensorSet random_set(std::size_t n, std::size_t classes, std::size_t side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  TensorSet s;
  s.classes = classes;
  s.images = Tensor<float>(Shape{n, 1, side, side});
  for (auto& v : s.images.data()) v = u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    s.labels.push_back(static_cast<int>(i % classes));
    s.subjects.push_back("A");
  }
  return s;
}

Network<float> small_net(std::size_t classes = 3, std::uint64_t seed = 1) {
  Network<float> net(build_fithand(classes, 1, 8, 16));
  net.initialize(seed);
  return net;
}

}  // namespace

TEST(Metrics, HandComputedExample) {
  const std::vector<int> truth{0, 0, 1, 1};
  const std::vector<int> pred{0, 1, 1, 1};
  const Metrics m = compute_metrics(truth, pred, 2);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(m.f1[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1[1], 0.8);
  EXPECT_NEAR(m.macro_f1, 0.7333333333333333, 1e-15);
  EXPECT_EQ(m.confusion[0][1], 1u);
  EXPECT_EQ(m.total(), 4u);
}

TEST(Metrics, DegenerateCases) {
  const std::vector<int> truth{0, 0, 1, 1};
  const Metrics perfect = compute_metrics(truth, truth, 2);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.macro_f1, 1.0);

  const Metrics one_class = compute_metrics(truth, std::vector<int>{0, 0, 0, 0}, 2);
  EXPECT_EQ(one_class.accuracy, 0.5);
  EXPECT_EQ(one_class.f1[1], 0.0);
  EXPECT_NEAR(one_class.macro_f1, 1.0 / 3.0, 1e-15);

  const std::vector<int> skewed{0, 0, 0, 0, 0, 0, 0, 1};
  EXPECT_EQ(compute_metrics(skewed, skewed, 2).macro_f1, 1.0);
  EXPECT_THROW(compute_metrics(std::vector<int>{}, std::vector<int>{}, 2), InputError);
}

TEST(Metrics, PermutationInvariant) {
  std::mt19937_64 rng(4);
  std::vector<int> truth(50), pred(50);
  for (int i = 0; i < 50; ++i) {
    truth[i] = static_cast<int>(rng() % 4);
    pred[i] = static_cast<int>(rng() % 4);
  }
  const Metrics a = compute_metrics(truth, pred, 4);
  std::vector<std::size_t> order(50);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> t2, p2;
  for (auto i : order) {
    t2.push_back(truth[i]);
    p2.push_back(pred[i]);
  }
  EXPECT_EQ(a, compute_metrics(t2, p2, 4));
}

TEST(Train, ZeroLearningRateKeepsParameters) {
  auto net = small_net();
  const auto before = net.params();
  TrainConfig tc;
  tc.lr = 0.0;
  tc.epochs = 2;
  tc.batch = 4;
  train(net, random_set(6, 3, 16, 1), tc);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(net.params()[i].storage(), before[i].storage());
}

TEST(Train, SameSeedSameLog) {
  TrainConfig tc;
  tc.lr = 0.05;
  tc.epochs = 3;
  tc.batch = 4;
  tc.seed = 9;
  const auto data = random_set(10, 3, 16, 2);
  auto a = small_net();
  auto b = small_net();
  const auto la = train(a, data, tc);
  const auto lb = train(b, data, tc);
  EXPECT_EQ(la.csv(), lb.csv());
  EXPECT_EQ(la.csv().substr(0, 20), "epoch,loss,accuracy\n");
  for (std::size_t i = 0; i < a.params().size(); ++i) EXPECT_EQ(a.params()[i].storage(), b.params()[i].storage());
}

TEST(Train, SingleSampleOverfits) {
  auto net = small_net(2, 3);
  TrainConfig tc;
  tc.lr = 0.05;
  tc.momentum = 0.9;
  tc.epochs = 200;
  tc.batch = 1;
  const auto log = train(net, random_set(1, 2, 16, 5), tc);
  EXPECT_LT(log.epochs.back().loss, 0.01);
}

TEST(Train, SmallStepDecreasesLoss) {
  Network<double> net = small_net().cast<double>();
  Tensor<double> x(Shape{3, 1, 16, 16});
  std::mt19937_64 rng(6);
  for (auto& v : x.data()) v = std::uniform_real_distribution<double>(0, 1)(rng);
  const std::vector<int> labels{0, 1, 2};
  auto loss_and_grads = [&](std::vector<Tensor<double>>* grads) {
    Tape<double> tape;
    const auto fwd = net.forward(tape, tape.leaf(x, false));
    const Var l = loss(tape, fwd.logits, std::span<const int>(labels), LossKind::cross_entropy);
    if (grads) {
      tape.backward(l);
      for (Var p : fwd.params) grads->push_back(tape.grad(p));
    }
    return tape.value(l)[0];
  };
  std::vector<Tensor<double>> grads;
  const double before = loss_and_grads(&grads);
  sgd_step<double>(net.params(), grads, 1e-6);
  EXPECT_LT(loss_and_grads(nullptr), before);
}

TEST(Train, KlAndCrossEntropyFirstStepGradientsAgree) {
  const auto net = small_net().cast<double>();
  Tensor<double> x(Shape{2, 1, 16, 16}, 0.25);
  x[7] = 0.9;
  const std::vector<int> labels{2, 0};
  auto grads = [&](LossKind kind) {
    Tape<double> tape;
    const auto fwd = net.forward(tape, tape.leaf(x, false));
    tape.backward(loss(tape, fwd.logits, std::span<const int>(labels), kind));
    std::vector<Tensor<double>> out;
    for (Var p : fwd.params) out.push_back(tape.grad(p));
    return out;
  };
  const auto ce = grads(LossKind::cross_entropy);
  const auto kl = grads(LossKind::kl_divergence);
  for (std::size_t i = 0; i < ce.size(); ++i) {
    for (std::size_t j = 0; j < ce[i].size(); ++j) ASSERT_NEAR(ce[i][j], kl[i][j], 1e-6);
  }
}

TEST(Train, Errors) {
  auto net = small_net();
  TrainConfig tc;
  tc.epochs = 1;
  EXPECT_THROW(train(net, random_set(4, 4, 16, 1), tc), ConfigError);
  EXPECT_THROW(train(net, random_set(4, 3, 24, 1), tc), ConfigError);
  tc.batch = 0;
  EXPECT_THROW(train(net, random_set(4, 3, 16, 1), tc), ConfigError);

  TrainConfig blow;
  blow.epochs = 1;
  blow.lr = 1.0;
  auto bad = small_net();
  bad.params().back()[0] = std::numeric_limits<float>::quiet_NaN();
  try {
    train(bad, random_set(4, 3, 16, 1), blow);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("batch 0"), std::string::npos) << e.what();
  }
  EXPECT_THROW(evaluate(net, TensorSet{}), InputError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto net = small_net();
  train(net, random_set(6, 3, 16, 3), TrainConfig{0.05, 1, 3});
  const auto bytes = serialize_checkpoint(net);
  const auto loaded = parse_checkpoint(bytes);
  EXPECT_EQ(serialize_checkpoint(loaded), bytes);
  EXPECT_EQ(serialize_config(loaded.config()), serialize_config(net.config()));
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    EXPECT_EQ(std::memcmp(net.params()[i].data().data(), loaded.params()[i].data().data(),
                          net.params()[i].size() * sizeof(float)),
              0);
  }
  const auto data = random_set(9, 3, 16, 4);
  EXPECT_EQ(evaluate(net, data), evaluate(loaded, data));
}

TEST(Checkpoint, FileRoundTrip) {
  const auto net = small_net();
  const auto path = std::filesystem::temp_directory_path() / "fithand_ckpt_test.fith";
  save_checkpoint(net, path);
  const auto loaded = load_checkpoint(path);
  EXPECT_EQ(serialize_checkpoint(loaded), serialize_checkpoint(net));
  std::filesystem::remove(path);
}

TEST(Checkpoint, DistinctErrorKinds) {
  const auto bytes = serialize_checkpoint(small_net());
  auto kind_of = [](std::vector<std::uint8_t> b) {
    try {
      parse_checkpoint(b);
    } catch (const CheckpointError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error";
    return CheckpointError::Kind::malformed;
  };
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  EXPECT_EQ(kind_of(flipped), CheckpointError::Kind::bad_checksum);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(kind_of(magic), CheckpointError::Kind::bad_magic);
  auto version = bytes;
  version[4] = 2;
  EXPECT_EQ(kind_of(version), CheckpointError::Kind::bad_version);
  EXPECT_EQ(kind_of({bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(bytes.size() / 3)}),
            CheckpointError::Kind::truncated);
  auto crc = bytes;
  crc.back() ^= 0x80;
  EXPECT_EQ(kind_of(crc), CheckpointError::Kind::bad_checksum);
}
