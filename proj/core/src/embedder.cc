// Copyright 2026 The EverySearch Authors.
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

#include "everysearch/embedder.h"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "everysearch/detail/binary_io.h"
#include "everysearch/detail/model_math.h"
#include "everysearch/error.h"
#include "everysearch/fp16.h"
#include "everysearch/hash.h"

namespace everysearch {

namespace detail {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return std::move(buf).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename to " + path.string() + ": " + ec.message());
}

}  // namespace detail

namespace {

constexpr char kWeightsMagic[4] = {'E', 'M', 'B', 'W'};

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller on mt19937_64 output: reproducible across standard libraries,
// unlike std::normal_distribution.
double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

void fill_glorot(std::vector<float>& m, std::size_t fan_in, std::size_t fan_out,
                 std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : m) v = f16_round(static_cast<float>((2.0 * uniform01(rng) - 1.0) * limit));
}

template <typename Fn>
void for_each_group(const ModelWeights& w, Fn&& fn) {
  fn(w.token_table);
  fn(w.layer1_weight);
  fn(w.layer1_bias);
  fn(w.layer2_weight);
  fn(w.layer2_bias);
}

}  // namespace

std::size_t ModelDims::parameter_count() const noexcept {
  const std::size_t v = vocab_buckets, t = token_dim, h = hidden_dim, d = embedding_dim;
  return v * t + t * h + h + h * d + d;
}

bool ModelDims::valid() const noexcept {
  return vocab_buckets > 0 && token_dim > 0 && hidden_dim > 0 && embedding_dim > 0;
}

ModelWeights make_default_weights(const ModelDims& dims, std::uint64_t seed) {
  if (!dims.valid()) throw Error(ErrorCode::kInvalidArgument, "model dims must be positive");
  ModelWeights w = ModelWeights::zeros(dims);
  std::mt19937_64 rng(seed);
  for (auto& v : w.token_table) v = f16_round(static_cast<float>(standard_normal(rng)));
  fill_glorot(w.layer1_weight, dims.token_dim, dims.hidden_dim, rng);
  fill_glorot(w.layer2_weight, dims.hidden_dim, dims.embedding_dim, rng);
  return w;
}

void validate_weights(const ModelWeights& w) {
  const ModelDims& d = w.dims;
  if (!d.valid()) throw Error(ErrorCode::kDimensionMismatch, "model dims must be positive");
  const bool sizes_ok =
      w.token_table.size() == std::size_t{d.vocab_buckets} * d.token_dim &&
      w.layer1_weight.size() == std::size_t{d.token_dim} * d.hidden_dim &&
      w.layer1_bias.size() == d.hidden_dim &&
      w.layer2_weight.size() == std::size_t{d.hidden_dim} * d.embedding_dim &&
      w.layer2_bias.size() == d.embedding_dim;
  if (!sizes_ok) throw Error(ErrorCode::kDimensionMismatch, "parameter sizes disagree with dims");
  for_each_group(w, [](const std::vector<float>& g) {
    for (float v : g) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite parameter");
    }
  });
}

float Embedding::norm() const noexcept {
  double sq = 0.0;
  for (float v : values_) sq += double{v} * v;
  return static_cast<float>(std::sqrt(sq));
}

std::uint32_t token_id(std::string_view token, std::uint32_t buckets) {
  if (token.empty()) throw Error(ErrorCode::kInvalidArgument, "empty token");
  if (buckets == 0) throw Error(ErrorCode::kInvalidArgument, "bucket count must be positive");
  return static_cast<std::uint32_t>(fnv1a64(token) % buckets);
}

Embedding forward(const ModelWeights& weights, const TokenSequence& tokens) {
  if (tokens.empty()) throw Error(ErrorCode::kEmptyInput, "cannot embed an empty token sequence");
  const auto ids = detail::bucket_ids(tokens, weights.dims.vocab_buckets);
  detail::ForwardTrace<float> trace;
  detail::run_forward(weights, ids, trace);
  if (!(trace.norm >= static_cast<float>(kDegenerateNorm))) {
    throw Error(ErrorCode::kDegenerateVector, "pre-normalization output has zero norm");
  }
  return Embedding(std::move(trace.unit));
}

TokenSequence model_tokens(std::string_view text) {
  if (text == kPlaceholderToken) return {std::string(kPlaceholderToken)};
  TokenSequence tokens = normalize_query(text);
  if (tokens.empty()) tokens.emplace_back(kPlaceholderToken);
  return tokens;
}

Embedding embed_text(const ModelWeights& weights, std::string_view text) {
  return forward(weights, model_tokens(text));
}

void save_weights(const ModelWeights& weights, const std::filesystem::path& path) {
  validate_weights(weights);
  const ModelDims& d = weights.dims;
  std::string buf;
  buf.reserve(kWeightsHeaderSize + 2 * d.parameter_count());
  buf.append(kWeightsMagic, 4);
  detail::append_le<std::uint16_t>(buf, kWeightsVersion);
  detail::append_le<std::uint32_t>(buf, d.vocab_buckets);
  detail::append_le<std::uint16_t>(buf, d.token_dim);
  detail::append_le<std::uint16_t>(buf, d.hidden_dim);
  detail::append_le<std::uint16_t>(buf, d.embedding_dim);
  for_each_group(weights, [&](const std::vector<float>& g) {
    for (float v : g) detail::append_le<std::uint16_t>(buf, f16_encode(v));
  });
  detail::write_file_atomic(path, buf);
}

ModelWeights load_weights(const std::filesystem::path& path,
                          const std::optional<ModelDims>& expected) {
  const std::string buf = detail::read_file(path);
  const std::string name = path.string();
  if (buf.size() < 4 || std::string_view(buf.data(), 4) != std::string_view(kWeightsMagic, 4)) {
    throw Error(ErrorCode::kBadMagic, name + " is not a weights file");
  }
  if (buf.size() < kWeightsHeaderSize) throw Error(ErrorCode::kTruncated, name + ": short header");
  const auto version = detail::read_le<std::uint16_t>(buf.data() + 4);
  if (version != kWeightsVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                name + ": weights version " + std::to_string(version));
  }
  ModelDims d;
  d.vocab_buckets = detail::read_le<std::uint32_t>(buf.data() + 6);
  d.token_dim = detail::read_le<std::uint16_t>(buf.data() + 10);
  d.hidden_dim = detail::read_le<std::uint16_t>(buf.data() + 12);
  d.embedding_dim = detail::read_le<std::uint16_t>(buf.data() + 14);
  if (!d.valid()) throw Error(ErrorCode::kCorrupt, name + ": zero dimension in header");
  if (expected && !(*expected == d)) {
    throw Error(ErrorCode::kDimensionMismatch, name + ": dims differ from expected model");
  }
  const std::size_t want = kWeightsHeaderSize + 2 * d.parameter_count();
  if (buf.size() < want) throw Error(ErrorCode::kTruncated, name + ": parameters truncated");
  if (buf.size() > want) throw Error(ErrorCode::kCorrupt, name + ": trailing bytes");

  ModelWeights w = ModelWeights::zeros(d);
  const char* p = buf.data() + kWeightsHeaderSize;
  auto fill = [&](std::vector<float>& g) {
    for (auto& v : g) {
      v = f16_decode(detail::read_le<std::uint16_t>(p));
      p += 2;
    }
  };
  fill(w.token_table);
  fill(w.layer1_weight);
  fill(w.layer1_bias);
  fill(w.layer2_weight);
  fill(w.layer2_bias);
  validate_weights(w);
  return w;
}

std::uint64_t weights_fingerprint(const ModelWeights& weights) {
  std::string head;
  detail::append_le<std::uint32_t>(head, weights.dims.vocab_buckets);
  detail::append_le<std::uint16_t>(head, weights.dims.token_dim);
  detail::append_le<std::uint16_t>(head, weights.dims.hidden_dim);
  detail::append_le<std::uint16_t>(head, weights.dims.embedding_dim);
  std::uint64_t h = fnv1a64(head);
  for_each_group(weights, [&](const std::vector<float>& g) {
    for (float v : g) {
      const std::uint16_t bits = f16_encode(v);
      const char bytes[2] = {static_cast<char>(bits & 0xFF), static_cast<char>(bits >> 8)};
      h = fnv1a64(std::string_view(bytes, 2), h);
    }
  });
  return h;
}

}  // namespace everysearch
