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

#include "everysearch/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "everysearch/detail/binary_io.h"
#include "everysearch/detail/model_math.h"
#include "everysearch/error.h"

namespace everysearch {
namespace {

struct EncodedPair {
  std::vector<std::uint32_t> query_ids;
  std::vector<std::uint32_t> item_ids;
  PairLabel label;
};

EncodedPair encode(const TrainingPair& pair, std::uint32_t buckets) {
  return {detail::bucket_ids(model_tokens(pair.query_text), buckets),
          detail::bucket_ids(model_tokens(pair.item_text), buckets), pair.label};
}

// d(loss)/d(similarity); zero on the satisfied side and at the kink itself.
template <typename Real>
Real loss_slope(Real similarity, PairLabel label, const Margins& m) {
  if (label == PairLabel::kPositive) return similarity < Real{m.positive} ? Real{-1} : Real{0};
  return similarity > Real{m.negative} ? Real{1} : Real{0};
}

template <typename Real>
Real hinge(Real similarity, PairLabel label, const Margins& m) {
  if (label == PairLabel::kPositive) return std::max(Real{0}, Real{m.positive} - similarity);
  return std::max(Real{0}, similarity - Real{m.negative});
}

template <typename Real>
Real dot(const std::vector<Real>& a, const std::vector<Real>& b) {
  Real acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

template <typename Real>
struct PairPass {
  detail::ForwardTrace<Real> query;
  detail::ForwardTrace<Real> item;
  Real similarity = 0;
};

template <typename Real>
void run_pair(const BasicModelWeights<Real>& w, const EncodedPair& p, PairPass<Real>& pass) {
  detail::run_forward(w, p.query_ids, pass.query);
  detail::run_forward(w, p.item_ids, pass.item);
  if (!std::isfinite(pass.query.norm) || !std::isfinite(pass.item.norm)) {
    throw Error(ErrorCode::kNumericDivergence, "embedding norm overflowed");
  }
  const auto deg = static_cast<Real>(kDegenerateNorm);
  if (!(pass.query.norm >= deg) || !(pass.item.norm >= deg)) {
    throw Error(ErrorCode::kDegenerateVector, "training pair embeds to a zero vector");
  }
  pass.similarity = dot(pass.query.unit, pass.item.unit);
}

template <typename Real>
void accumulate_gradient(const BasicModelWeights<Real>& w, const PairPass<Real>& pass,
                         Real slope, detail::Gradients<Real>& g) {
  if (slope == Real{0}) return;
  const std::size_t d = w.dims.embedding_dim;
  std::vector<Real> grad(d);
  for (std::size_t k = 0; k < d; ++k) grad[k] = slope * pass.item.unit[k];
  detail::run_backward(w, pass.query, std::span<const Real>(grad), g);
  for (std::size_t k = 0; k < d; ++k) grad[k] = slope * pass.query.unit[k];
  detail::run_backward(w, pass.item, std::span<const Real>(grad), g);
}

// Returns false if any updated parameter became non-finite.
bool apply_update(ModelWeights& w, const detail::Gradients<float>& g, float lr) {
  bool finite = true;
  auto update = [&](float* p, const float* grad, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      p[i] -= lr * grad[i];
      finite = finite && std::isfinite(p[i]);
    }
  };
  auto step = [&](std::vector<float>& p, const std::vector<float>& grad) {
    update(p.data(), grad.data(), p.size());
  };
  step(w.layer1_weight, g.layer1_weight);
  step(w.layer1_bias, g.layer1_bias);
  step(w.layer2_weight, g.layer2_weight);
  step(w.layer2_bias, g.layer2_bias);
  const std::size_t d_tok = w.dims.token_dim;
  for (const auto& [row, grad] : g.token_rows) {
    update(w.token_table.data() + std::size_t{row} * d_tok, grad.data(), d_tok);
  }
  return finite;
}

// Fisher-Yates with an explicitly specified draw, reproducible across
// standard libraries (std::shuffle is not).
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0f) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
  }
  if (epochs < 0) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 0");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  if (!(margins.positive > margins.negative)) {
    throw Error(ErrorCode::kInvalidArgument, "positive margin must exceed negative margin");
  }
}

float contrastive_loss(float similarity, PairLabel label, const Margins& margins) {
  if (!(similarity >= -1.0f - kSimilaritySlack && similarity <= 1.0f + kSimilaritySlack)) {
    throw Error(ErrorCode::kInvalidArgument,
                "similarity " + std::to_string(similarity) + " outside [-1, 1]");
  }
  return hinge(std::clamp(similarity, -1.0f, 1.0f), label, margins);
}

float mean_loss(const ModelWeights& weights, std::span<const TrainingPair> pairs,
                const Margins& margins) {
  if (pairs.empty()) return 0.0f;
  PairPass<float> pass;
  double total = 0.0;
  for (const auto& pair : pairs) {
    run_pair(weights, encode(pair, weights.dims.vocab_buckets), pass);
    total += contrastive_loss(std::clamp(pass.similarity, -1.0f, 1.0f), pair.label, margins);
  }
  return static_cast<float>(total / static_cast<double>(pairs.size()));
}

TrainResult train(const ModelWeights& initial, std::span<const TrainingPair> pairs,
                  const TrainConfig& config) {
  config.validate();
  validate_weights(initial);
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "no training pairs");

  TrainResult result{initial, {}};
  if (config.epochs == 0) return result;

  ModelWeights& w = result.weights;
  std::vector<EncodedPair> encoded;
  encoded.reserve(pairs.size());
  for (const auto& p : pairs) encoded.push_back(encode(p, w.dims.vocab_buckets));

  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed);
  detail::Gradients<float> grads(w.dims);
  PairPass<float> pass;
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const float scale = 1.0f / static_cast<float>(end - start);
      grads.clear();
      for (std::size_t b = start; b < end; ++b) {
        const EncodedPair& p = encoded[order[b]];
        run_pair(w, p, pass);
        const float s = std::clamp(pass.similarity, -1.0f, 1.0f);
        const float loss = hinge(s, p.label, config.margins);
        if (!std::isfinite(loss) || !std::isfinite(pass.similarity)) {
          throw Error(ErrorCode::kNumericDivergence,
                      "non-finite loss at epoch " + std::to_string(epoch));
        }
        epoch_loss += loss;
        accumulate_gradient(w, pass, loss_slope(s, p.label, config.margins) * scale, grads);
      }
      if (!apply_update(w, grads, config.learning_rate)) {
        throw Error(ErrorCode::kNumericDivergence,
                    "non-finite parameters at epoch " + std::to_string(epoch));
      }
    }
    const double mean = epoch_loss / static_cast<double>(order.size());
    if (!std::isfinite(mean)) throw Error(ErrorCode::kNumericDivergence, "non-finite epoch loss");
    result.loss_history.push_back(static_cast<float>(mean));
  }
  return result;
}

GradientCheckReport gradient_check(const ModelWeights& weights, const TrainingPair& pair,
                                   double epsilon, const Margins& margins,
                                   std::uint64_t seed, std::size_t samples_per_group) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-2)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must lie in [1e-6, 1e-2]");
  }
  validate_weights(weights);
  BasicModelWeights<double> w = weights.cast<double>();
  const EncodedPair p = encode(pair, w.dims.vocab_buckets);
  const double kink = pair.label == PairLabel::kPositive ? margins.positive : margins.negative;

  PairPass<double> pass;
  run_pair(w, p, pass);
  detail::Gradients<double> g(w.dims);
  accumulate_gradient(w, pass, loss_slope(pass.similarity, p.label, margins), g);

  GradientCheckReport report;
  std::mt19937_64 rng(seed);

  auto check = [&](double& param, double analytic) {
    if (std::abs(pass.similarity - kink) < 1e-6) {
      ++report.skipped_at_kink;
      return;
    }
    const double original = param;
    PairPass<double> probe;
    param = original + epsilon;
    run_pair(w, p, probe);
    const double s_plus = probe.similarity;
    const double loss_plus = hinge(s_plus, p.label, margins);
    param = original - epsilon;
    run_pair(w, p, probe);
    const double s_minus = probe.similarity;
    const double loss_minus = hinge(s_minus, p.label, margins);
    param = original;
    if ((s_plus - kink) * (s_minus - kink) <= 0.0) {
      ++report.skipped_at_kink;
      return;
    }
    const double numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    report.max_relative_error = std::max(report.max_relative_error,
                                         std::abs(analytic - numeric) / scale);
    report.max_abs_analytic = std::max(report.max_abs_analytic, std::abs(analytic));
    report.max_abs_numeric = std::max(report.max_abs_numeric, std::abs(numeric));
    ++report.checked;
  };

  auto sample_dense = [&](std::vector<double>& params, const std::vector<double>& grad) {
    if (params.size() <= samples_per_group) {
      for (std::size_t i = 0; i < params.size(); ++i) check(params[i], grad[i]);
      return;
    }
    for (std::size_t n = 0; n < samples_per_group; ++n) {
      const std::size_t i = static_cast<std::size_t>(rng() % params.size());
      check(params[i], grad[i]);
    }
  };

  // Token-table coordinates outside the pair's rows have zero gradient on
  // both sides, so sampling concentrates on touched rows.
  std::set<std::uint32_t> rows(p.query_ids.begin(), p.query_ids.end());
  rows.insert(p.item_ids.begin(), p.item_ids.end());
  std::vector<std::pair<std::uint32_t, std::size_t>> coords;
  for (std::uint32_t r : rows) {
    for (std::size_t c = 0; c < w.dims.token_dim; ++c) coords.emplace_back(r, c);
  }
  auto token_check = [&](const std::pair<std::uint32_t, std::size_t>& rc) {
    double& param = w.token_table[std::size_t{rc.first} * w.dims.token_dim + rc.second];
    check(param, g.token_gradient(rc.first, rc.second));
  };
  if (coords.size() <= samples_per_group) {
    for (const auto& rc : coords) token_check(rc);
  } else {
    for (std::size_t n = 0; n < samples_per_group; ++n) {
      token_check(coords[static_cast<std::size_t>(rng() % coords.size())]);
    }
  }
  sample_dense(w.layer1_weight, g.layer1_weight);
  sample_dense(w.layer1_bias, g.layer1_bias);
  sample_dense(w.layer2_weight, g.layer2_weight);
  sample_dense(w.layer2_bias, g.layer2_bias);
  return report;
}

std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<TrainingPair> pairs;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw Error(ErrorCode::kCorrupt,
                  path.string() + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    const std::string label = line.substr(0, t1);
    TrainingPair pair;
    if (label == "1") {
      pair.label = PairLabel::kPositive;
    } else if (label == "0") {
      pair.label = PairLabel::kNegative;
    } else {
      throw Error(ErrorCode::kCorrupt,
                  path.string() + ":" + std::to_string(line_no) + ": label must be 1 or 0");
    }
    pair.query_text = line.substr(t1 + 1, t2 - t1 - 1);
    pair.item_text = line.substr(t2 + 1);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace everysearch
