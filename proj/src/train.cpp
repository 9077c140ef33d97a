/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "fithand/augment.hpp"
#include "fithand/error.hpp"
#include "fithand/optim.hpp"

namespace fithand {

namespace {

std::string fixed(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

Tensor<float> gather(const Tensor<float>& images, std::span<const std::size_t> indices) {
  const Shape s = images.shape();
  Tensor<float> out(Shape{indices.size(), s.c, s.h, s.w});
  const std::size_t stride = s.sample_size();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(images.sample(indices[i]), stride, out.data().begin() + static_cast<std::ptrdiff_t>(i * stride));
  }
  return out;
}

std::vector<int> argmax_rows(const Tensor<float>& logits) {
  const std::size_t n = logits.shape().n;
  const std::size_t c = logits.shape().sample_size();
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float* row = logits.sample(i);
    out[i] = static_cast<int>(std::max_element(row, row + c) - row);
  }
  return out;
}

void check_compatible(const Network<float>& net, const TensorSet& data) {
  const NetConfig& cfg = net.config();
  if (data.size() == 0) throw InputError("dataset is empty");
  if (data.classes != cfg.classes) {
    throw ConfigError("dataset has " + std::to_string(data.classes) + " classes but the network head has " +
                      std::to_string(cfg.classes));
  }
  const Shape s = data.images.shape();
  if (s.c != cfg.in_channels) {
    throw ConfigError("dataset has " + std::to_string(s.c) + " channels but the network expects " +
                      std::to_string(cfg.in_channels));
  }
  if (s.h != cfg.input_size || s.w != cfg.input_size) {
    throw ConfigError("dataset images are " + std::to_string(s.h) + "x" + std::to_string(s.w) +
                      " but the network expects " + std::to_string(cfg.input_size));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be finite and non-negative");
  if (batch < 1) throw ConfigError("batch size must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
}

TensorSet prepare(const Dataset& data, std::size_t input_size, bool augment_images) {
  if (data.empty()) throw InputError("dataset is empty");
  const std::size_t copies = augment_images ? 10 : 1;
  const std::size_t n = data.size() * copies;
  TensorSet out;
  out.classes = data.classes();
  out.images = Tensor<float>(Shape{n, data.channels, input_size, input_size});
  out.labels.reserve(n);
  out.subjects.reserve(n);
  const std::size_t stride = out.images.shape().sample_size();
  std::size_t row = 0;
  auto append = [&](const Image& img, const Sample& s) {
    const Tensor<float> t = resize_and_normalize<float>(img, input_size);
    std::copy(t.data().begin(), t.data().end(),
              out.images.data().begin() + static_cast<std::ptrdiff_t>(row * stride));
    out.labels.push_back(static_cast<int>(s.label));
    out.subjects.push_back(s.subject);
    ++row;
  };
  for (const Sample& s : data.samples) {
    if (!augment_images) {
      append(s.image, s);
      continue;
    }
    for (const auto& a : augment(s.image)) append(a.image, s);
  }
  return out;
}

std::string TrainLog::csv() const {
  std::string out = "epoch,loss,accuracy\n";
  for (const auto& e : epochs) {
    out += std::to_string(e.epoch) + "," + fixed("%.6f", e.loss) + "," + fixed("%.4f", e.accuracy) + "\n";
  }
  return out;
}

TrainLog train(Network<float>& net, const TensorSet& data, const TrainConfig& config, std::ostream* progress) {
  config.validate();
  check_compatible(net, data);

  const std::size_t n = data.size();
  const auto lr = static_cast<float>(config.lr);
  Sgd<float> optimizer(lr, static_cast<float>(config.momentum));
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(n);
  TrainLog log;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += config.batch, ++batch_index) {
      const std::size_t count = std::min(config.batch, n - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      std::vector<int> labels(count);
      for (std::size_t i = 0; i < count; ++i) labels[i] = data.labels[idx[i]];

      Tape<float> tape;
      const Var image = tape.leaf(gather(data.images, idx), false);
      const auto fwd = net.forward(tape, image);
      const Var loss_var = loss(tape, fwd.logits, std::span<const int>(labels), config.loss);
      const float value = tape.value(loss_var)[0];
      if (!std::isfinite(value)) {
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + " (samples " + std::to_string(start) + ".." +
                           std::to_string(start + count - 1) + ")");
      }
      const auto predicted = argmax_rows(tape.value(fwd.logits));
      for (std::size_t i = 0; i < count; ++i) correct += predicted[i] == labels[i] ? 1 : 0;
      loss_sum += static_cast<double>(value) * static_cast<double>(count);

      tape.backward(loss_var);
      std::vector<Tensor<float>> grads;
      grads.reserve(fwd.params.size());
      for (const Var p : fwd.params) grads.push_back(tape.grad(p));
      optimizer.step(std::span<Tensor<float>>(net.params()), std::span<const Tensor<float>>(grads));
    }
    const EpochRecord rec{epoch, loss_sum / static_cast<double>(n),
                          static_cast<double>(correct) / static_cast<double>(n)};
    log.epochs.push_back(rec);
    if (progress) {
      *progress << "epoch " << rec.epoch << "/" << config.epochs << "  loss " << fixed("%.6f", rec.loss)
                << "  acc " << fixed("%.4f", rec.accuracy) << '\n';
    }
  }
  return log;
}

std::size_t Metrics::total() const {
  std::size_t t = 0;
  for (const auto& row : confusion) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t classes) {
  if (truth.empty()) throw InputError("cannot compute metrics over zero samples");
  if (truth.size() != predicted.size()) throw ShapeError("truth and prediction counts differ");
  if (classes < 1) throw ConfigError("metrics need at least one class");
  Metrics m;
  m.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= classes || static_cast<std::size_t>(p) >= classes) {
      throw InputError("label out of range at sample " + std::to_string(i));
    }
    ++m.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    correct += t == p ? 1 : 0;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  m.f1.assign(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    const double tp = static_cast<double>(m.confusion[c][c]);
    double row = 0.0;
    double col = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      row += static_cast<double>(m.confusion[c][k]);
      col += static_cast<double>(m.confusion[k][c]);
    }
    const double precision = col > 0.0 ? tp / col : 0.0;
    const double recall = row > 0.0 ? tp / row : 0.0;
    m.f1[c] = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  m.macro_f1 = std::accumulate(m.f1.begin(), m.f1.end(), 0.0) / static_cast<double>(classes);
  return m;
}

std::vector<int> predict_labels(const Network<float>& net, const TensorSet& data, std::size_t batch) {
  check_compatible(net, data);
  if (batch < 1) throw ConfigError("batch size must be at least 1");
  std::vector<int> out;
  out.reserve(data.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += batch) {
    const std::size_t count = std::min(batch, data.size() - start);
    idx.resize(count);
    std::iota(idx.begin(), idx.end(), start);
    const auto labels = argmax_rows(net.predict(gather(data.images, idx)));
    out.insert(out.end(), labels.begin(), labels.end());
  }
  return out;
}

Metrics evaluate(const Network<float>& net, const TensorSet& data, std::size_t batch) {
  if (data.size() == 0) throw InputError("cannot evaluate on an empty dataset");
  const auto predicted = predict_labels(net, data, batch);
  return compute_metrics(data.labels, predicted, net.config().classes);
}

std::string format_metrics(const Metrics& m, const std::vector<std::string>& class_names) {
  const std::size_t classes = m.confusion.size();
  auto name_of = [&](std::size_t c) {
    return c < class_names.size() ? class_names[c] : "class_" + std::to_string(c);
  };
  std::size_t width = 5;
  for (std::size_t c = 0; c < classes; ++c) width = std::max(width, name_of(c).size());
  std::size_t cell = 6;
  for (const auto& row : m.confusion) {
    for (std::size_t v : row) cell = std::max(cell, std::to_string(v).size() + 1);
  }

  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(width), "truth");
  out += buf;
  for (std::size_t c = 0; c < classes; ++c) {
    std::snprintf(buf, sizeof buf, " %*zu", static_cast<int>(cell), c);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, " %8s\n", "f1");
  out += buf;
  for (std::size_t r = 0; r < classes; ++r) {
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(width), name_of(r).c_str());
    out += buf;
    for (std::size_t c = 0; c < classes; ++c) {
      std::snprintf(buf, sizeof buf, " %*zu", static_cast<int>(cell), m.confusion[r][c]);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, " %8.4f\n", m.f1[r]);
    out += buf;
  }
  out += "samples=" + std::to_string(m.total()) + "\n";
  out += "accuracy=" + fixed("%.6f", m.accuracy) + "\n";
  out += "macro_f1=" + fixed("%.6f", m.macro_f1) + "\n";
  for (std::size_t c = 0; c < classes; ++c) {
    out += "f1." + name_of(c) + "=" + fixed("%.6f", m.f1[c]) + "\n";
  }
  return out;
}

}  // namespace fithand
