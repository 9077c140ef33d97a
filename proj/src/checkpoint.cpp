/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <zlib.h>

#include "fithand/error.hpp"

namespace fithand {

namespace {

constexpr char kMagic[4] = {'F', 'I', 'T', 'H'};
using Kind = CheckpointError::Kind;

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw CheckpointError(Kind::truncated, std::string("checkpoint truncated while reading ") + what);
    }
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename U>
  U le(const char* what) {
    const auto s = take(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(s[i]) << (8 * i));
    return v;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Network<float>& net) {
  Writer w;
  w.bytes(kMagic, 4);
  w.le<std::uint32_t>(kCheckpointVersion);
  const std::string config = serialize_config(net.config());
  w.le<std::uint32_t>(static_cast<std::uint32_t>(config.size()));
  w.bytes(config.data(), config.size());

  const auto& descs = net.graph().params();
  w.le<std::uint32_t>(static_cast<std::uint32_t>(descs.size()));
  for (std::size_t i = 0; i < descs.size(); ++i) {
    const std::string& name = descs[i].name;
    w.le<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    const Shape s = net.params()[i].shape();
    w.le<std::uint8_t>(4);
    for (std::size_t d : {s.n, s.c, s.h, s.w}) w.le<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (float v : net.params()[i].data()) w.f32(v);
  }
  auto& out = w.data();
  const std::uint32_t crc = crc32_of(std::span<const std::uint8_t>(out).subspan(4));
  w.le<std::uint32_t>(crc);
  return std::move(out);
}

Network<float> parse_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError(Kind::bad_magic, "not a checkpoint file (bad magic)");
  }
  Reader header(bytes.subspan(4));
  const auto version = header.le<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(Kind::bad_version, "unsupported checkpoint version " + std::to_string(version));
  }
  if (bytes.size() < 4 + 4 + 4) throw CheckpointError(Kind::truncated, "checkpoint truncated before checksum");
  const auto body = bytes.subspan(4, bytes.size() - 8);
  Reader tail(bytes.subspan(bytes.size() - 4));
  const auto stored = tail.le<std::uint32_t>("checksum");

  // Parse first so a short file reports truncation rather than a checksum failure.
  Reader r(body);
  r.le<std::uint32_t>("version");
  const auto config_len = r.le<std::uint32_t>("config length");
  const auto config_bytes = r.take(config_len, "config");
  const std::string config_text(config_bytes.begin(), config_bytes.end());
  const auto count = r.le<std::uint32_t>("tensor count");

  struct Record {
    std::string name;
    Shape shape;
    std::span<const std::uint8_t> payload;
  };
  std::vector<Record> records;
  for (std::uint32_t t = 0; t < count; ++t) {
    Record rec;
    const auto name_len = r.le<std::uint16_t>("tensor name length");
    const auto name = r.take(name_len, "tensor name");
    rec.name.assign(name.begin(), name.end());
    const auto ndim = r.le<std::uint8_t>("tensor rank");
    if (ndim != 4) throw CheckpointError(Kind::malformed, "tensor " + rec.name + " has rank " + std::to_string(ndim));
    std::size_t dims[4];
    for (auto& d : dims) d = r.le<std::uint32_t>("tensor dims");
    rec.shape = Shape{dims[0], dims[1], dims[2], dims[3]};
    rec.payload = r.take(rec.shape.size() * 4, "tensor payload");
    records.push_back(std::move(rec));
  }
  if (r.remaining() != 0) throw CheckpointError(Kind::malformed, "trailing bytes before checksum");
  if (crc32_of(body) != stored) throw CheckpointError(Kind::bad_checksum, "checkpoint checksum mismatch");

  NetConfig config;
  try {
    config = parse_config(config_text);
  } catch (const Error& e) {
    throw CheckpointError(Kind::malformed, std::string("bad checkpoint config: ") + e.what());
  }
  Network<float> net(build_network(config));
  const auto& descs = net.graph().params();
  if (records.size() != descs.size()) {
    throw CheckpointError(Kind::malformed, "checkpoint has " + std::to_string(records.size()) +
                                               " tensors, architecture needs " + std::to_string(descs.size()));
  }
  for (std::size_t i = 0; i < descs.size(); ++i) {
    if (records[i].name != descs[i].name || records[i].shape != descs[i].shape) {
      throw CheckpointError(Kind::malformed, "tensor " + std::to_string(i) + " is " + records[i].name + " " +
                                                 records[i].shape.str() + ", expected " + descs[i].name + " " +
                                                 descs[i].shape.str());
    }
    Tensor<float> t(records[i].shape);
    auto out = t.data();
    Reader p(records[i].payload);
    for (auto& v : out) v = std::bit_cast<float>(p.le<std::uint32_t>("payload"));
    net.params()[i] = std::move(t);
  }
  return net;
}

void save_checkpoint(const Network<float>& net, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Network<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

}  // namespace fithand
