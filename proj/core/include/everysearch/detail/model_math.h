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

#ifndef EVERYSEARCH_DETAIL_MODEL_MATH_H_
#define EVERYSEARCH_DETAIL_MODEL_MATH_H_

// Forward and backward passes of the tiny model, shared by inference (float)
// and by the trainer's gradient checker (double).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "everysearch/embedder.h"

namespace everysearch::detail {

template <typename Real>
struct ForwardTrace {
  std::vector<std::uint32_t> ids;
  std::vector<Real> pooled;  // token_dim
  std::vector<Real> hidden;  // hidden_dim, after tanh
  std::vector<Real> output;  // embedding_dim, before normalization
  Real norm = 0;
  std::vector<Real> unit;  // embedding_dim
};

template <typename Real>
void run_forward(const BasicModelWeights<Real>& w,
                 std::span<const std::uint32_t> ids, ForwardTrace<Real>& t) {
  const std::size_t d_tok = w.dims.token_dim;
  const std::size_t h = w.dims.hidden_dim;
  const std::size_t d = w.dims.embedding_dim;

  t.ids.assign(ids.begin(), ids.end());
  t.pooled.assign(d_tok, Real{0});
  for (std::uint32_t id : ids) {
    const Real* row = w.token_table.data() + std::size_t{id} * d_tok;
    for (std::size_t i = 0; i < d_tok; ++i) t.pooled[i] += row[i];
  }
  const Real inv_n = Real{1} / static_cast<Real>(ids.size());
  for (auto& v : t.pooled) v *= inv_n;

  t.hidden.assign(w.layer1_bias.begin(), w.layer1_bias.end());
  for (std::size_t i = 0; i < d_tok; ++i) {
    const Real x = t.pooled[i];
    const Real* col = w.layer1_weight.data() + i * h;
    for (std::size_t j = 0; j < h; ++j) t.hidden[j] += x * col[j];
  }
  for (auto& v : t.hidden) v = std::tanh(v);

  t.output.assign(w.layer2_bias.begin(), w.layer2_bias.end());
  for (std::size_t j = 0; j < h; ++j) {
    const Real a = t.hidden[j];
    const Real* col = w.layer2_weight.data() + j * d;
    for (std::size_t k = 0; k < d; ++k) t.output[k] += a * col[k];
  }

  Real sq = 0;
  for (Real v : t.output) sq += v * v;
  t.norm = std::sqrt(sq);
  t.unit.resize(d);
  if (t.norm >= static_cast<Real>(kDegenerateNorm)) {
    for (std::size_t k = 0; k < d; ++k) t.unit[k] = t.output[k] / t.norm;
  } else {
    std::fill(t.unit.begin(), t.unit.end(), Real{0});
  }
}

/// Parameter gradients. Token-table gradients are sparse: only rows touched
/// by the processed texts are materialized (ordered map keeps updates
/// deterministic).
template <typename Real>
struct Gradients {
  ModelDims dims;
  std::map<std::uint32_t, std::vector<Real>> token_rows;
  std::vector<Real> layer1_weight;
  std::vector<Real> layer1_bias;
  std::vector<Real> layer2_weight;
  std::vector<Real> layer2_bias;

  explicit Gradients(const ModelDims& d) : dims(d) { clear(); }

  void clear() {
    token_rows.clear();
    layer1_weight.assign(std::size_t{dims.token_dim} * dims.hidden_dim, Real{0});
    layer1_bias.assign(dims.hidden_dim, Real{0});
    layer2_weight.assign(std::size_t{dims.hidden_dim} * dims.embedding_dim, Real{0});
    layer2_bias.assign(dims.embedding_dim, Real{0});
  }

  Real token_gradient(std::uint32_t row, std::size_t col) const {
    auto it = token_rows.find(row);
    return it == token_rows.end() ? Real{0} : it->second[col];
  }
};

/// Accumulates d(loss)/d(params) into `g` given d(loss)/d(unit embedding).
template <typename Real>
void run_backward(const BasicModelWeights<Real>& w, const ForwardTrace<Real>& t,
                  std::span<const Real> grad_unit, Gradients<Real>& g) {
  const std::size_t d_tok = w.dims.token_dim;
  const std::size_t h = w.dims.hidden_dim;
  const std::size_t d = w.dims.embedding_dim;

  // Through the L2 normalization: (I - u u^T) / |z| applied to grad_unit.
  Real proj = 0;
  for (std::size_t k = 0; k < d; ++k) proj += grad_unit[k] * t.unit[k];
  std::vector<Real> d_out(d);
  for (std::size_t k = 0; k < d; ++k) {
    d_out[k] = (grad_unit[k] - proj * t.unit[k]) / t.norm;
  }

  std::vector<Real> d_hidden(h, Real{0});
  for (std::size_t j = 0; j < h; ++j) {
    const Real a = t.hidden[j];
    const Real* wcol = w.layer2_weight.data() + j * d;
    Real* gcol = g.layer2_weight.data() + j * d;
    Real acc = 0;
    for (std::size_t k = 0; k < d; ++k) {
      gcol[k] += a * d_out[k];
      acc += wcol[k] * d_out[k];
    }
    d_hidden[j] = acc * (Real{1} - a * a);
  }
  for (std::size_t k = 0; k < d; ++k) g.layer2_bias[k] += d_out[k];

  std::vector<Real> d_pooled(d_tok, Real{0});
  for (std::size_t i = 0; i < d_tok; ++i) {
    const Real x = t.pooled[i];
    const Real* wcol = w.layer1_weight.data() + i * h;
    Real* gcol = g.layer1_weight.data() + i * h;
    Real acc = 0;
    for (std::size_t j = 0; j < h; ++j) {
      gcol[j] += x * d_hidden[j];
      acc += wcol[j] * d_hidden[j];
    }
    d_pooled[i] = acc;
  }
  for (std::size_t j = 0; j < h; ++j) g.layer1_bias[j] += d_hidden[j];

  const Real inv_n = Real{1} / static_cast<Real>(t.ids.size());
  for (std::uint32_t id : t.ids) {
    auto& row = g.token_rows[id];
    if (row.empty()) row.assign(d_tok, Real{0});
    for (std::size_t i = 0; i < d_tok; ++i) row[i] += d_pooled[i] * inv_n;
  }
}

inline std::vector<std::uint32_t> bucket_ids(const TokenSequence& tokens,
                                      std::uint32_t buckets) {
  std::vector<std::uint32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& tok : tokens) ids.push_back(token_id(tok, buckets));
  return ids;
}

}  // namespace everysearch::detail

#endif  // EVERYSEARCH_DETAIL_MODEL_MATH_H_
