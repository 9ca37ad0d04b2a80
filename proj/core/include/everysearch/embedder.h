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

#ifndef EVERYSEARCH_EMBEDDER_H_
#define EVERYSEARCH_EMBEDDER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "everysearch/tokenizer.h"

namespace everysearch {

/// Shape of the tiny bi-encoder: a hashed token-embedding table followed by
/// two dense layers.
struct ModelDims {
  std::uint32_t vocab_buckets = 32768;
  std::uint16_t token_dim = 128;
  std::uint16_t hidden_dim = 256;
  std::uint16_t embedding_dim = 128;

  std::size_t parameter_count() const noexcept;
  bool valid() const noexcept;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Model parameters. Matrices are row-major:
///   token_table   vocab_buckets x token_dim
///   layer1_weight token_dim x hidden_dim, layer1_bias hidden_dim
///   layer2_weight hidden_dim x embedding_dim, layer2_bias embedding_dim
/// `Real` is float in production; the trainer instantiates double for
/// finite-difference checks.
template <typename Real>
struct BasicModelWeights {
  ModelDims dims;
  std::vector<Real> token_table;
  std::vector<Real> layer1_weight;
  std::vector<Real> layer1_bias;
  std::vector<Real> layer2_weight;
  std::vector<Real> layer2_bias;

  static BasicModelWeights zeros(const ModelDims& dims) {
    BasicModelWeights w;
    w.dims = dims;
    w.token_table.assign(std::size_t{dims.vocab_buckets} * dims.token_dim, Real{0});
    w.layer1_weight.assign(std::size_t{dims.token_dim} * dims.hidden_dim, Real{0});
    w.layer1_bias.assign(dims.hidden_dim, Real{0});
    w.layer2_weight.assign(std::size_t{dims.hidden_dim} * dims.embedding_dim, Real{0});
    w.layer2_bias.assign(dims.embedding_dim, Real{0});
    return w;
  }

  template <typename Other>
  BasicModelWeights<Other> cast() const {
    auto conv = [](const std::vector<Real>& v) {
      return std::vector<Other>(v.begin(), v.end());
    };
    return {dims, conv(token_table), conv(layer1_weight), conv(layer1_bias),
            conv(layer2_weight), conv(layer2_bias)};
  }

  std::span<const Real> token_row(std::uint32_t id) const {
    return std::span<const Real>(token_table).subspan(
        std::size_t{id} * dims.token_dim, dims.token_dim);
  }
};

using ModelWeights = BasicModelWeights<float>;

inline constexpr std::uint64_t kDefaultModelSeed = 0x5EA2C4E5ull;
inline constexpr std::string_view kPlaceholderToken = "<empty>";
inline constexpr double kDegenerateNorm = 1e-12;

/// Seeded "untrained" model: token rows ~ N(0, 1), dense layers Glorot-uniform,
/// zero biases. Every parameter is pre-rounded to binary16 so the in-memory
/// model equals its serialized form.
ModelWeights make_default_weights(const ModelDims& dims = {},
                                  std::uint64_t seed = kDefaultModelSeed);

/// Throws kDimensionMismatch when vector sizes disagree with `dims` and
/// kInvalidArgument on non-finite parameters.
void validate_weights(const ModelWeights& weights);

/// Fixed-length unit-norm embedding vector.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<float> values) : values_(std::move(values)) {}

  std::span<const float> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  float operator[](std::size_t i) const { return values_[i]; }
  float norm() const noexcept;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<float> values_;
};

/// Bucket id of a token: FNV-1a 64 of its UTF-8 bytes modulo `buckets`.
std::uint32_t token_id(std::string_view token, std::uint32_t buckets);

/// Mean-pools token rows, applies layer1 + tanh, layer2, then L2-normalizes.
/// Throws kEmptyInput for an empty sequence and kDegenerateVector when the
/// pre-normalization norm is below 1e-12.
Embedding forward(const ModelWeights& weights, const TokenSequence& tokens);

/// normalize_query followed by forward; empty text embeds the placeholder
/// token.
Embedding embed_text(const ModelWeights& weights, std::string_view text);

/// Token sequence actually fed to the model for `text`. Text without word
/// characters, or the placeholder itself, maps to the placeholder token.
TokenSequence model_tokens(std::string_view text);

// Weight file: "EMBW" | version u16 | V u32 | d_tok u16 | h u16 | d u16 |
// little-endian binary16 parameters (token_table, layer1_weight, layer1_bias,
// layer2_weight, layer2_bias).
inline constexpr std::uint16_t kWeightsVersion = 1;
inline constexpr std::size_t kWeightsHeaderSize = 16;

void save_weights(const ModelWeights& weights, const std::filesystem::path& path);

/// Throws kBadMagic, kUnsupportedVersion, kTruncated, kCorrupt (trailing
/// bytes or invalid header dims) and kDimensionMismatch when `expected` is
/// given and differs from the header.
ModelWeights load_weights(const std::filesystem::path& path,
                          const std::optional<ModelDims>& expected = std::nullopt);

/// Hash over the binary16 images of every parameter; identifies a model.
std::uint64_t weights_fingerprint(const ModelWeights& weights);

}  // namespace everysearch

#endif  // EVERYSEARCH_EMBEDDER_H_
