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

#ifndef EVERYSEARCH_TRAINER_H_
#define EVERYSEARCH_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "everysearch/embedder.h"

namespace everysearch {

enum class PairLabel { kNegative = 0, kPositive = 1 };

struct TrainingPair {
  std::string query_text;
  std::string item_text;
  PairLabel label = PairLabel::kPositive;
};

/// Hinge margins on cosine similarity. Positives are pulled to >= positive,
/// negatives pushed to <= negative.
struct Margins {
  float positive = 1.0f;
  float negative = 0.0f;
};

struct TrainConfig {
  float learning_rate = 0.05f;
  int epochs = 10;
  int batch_size = 8;
  Margins margins;
  std::uint64_t seed = 0;

  /// Throws kInvalidArgument on a non-positive rate or batch size, negative
  /// epochs, or margins with positive <= negative.
  void validate() const;
};

/// Tolerance on |similarity| > 1 from rounding; values inside are clamped.
inline constexpr float kSimilaritySlack = 1e-4f;

/// positive: max(0, m_pos - s); negative: max(0, s - m_neg).
float contrastive_loss(float similarity, PairLabel label, const Margins& margins = {});

struct TrainResult {
  ModelWeights weights;
  std::vector<float> loss_history;  // mean loss per epoch
};

/// Mini-batch SGD on the mean contrastive loss. Query and item share the
/// same weights. Every parameter group (token table and both dense layers)
/// is updated; tokenization and bucket hashing stay fixed. Deterministic
/// for a given seed. Throws kNumericDivergence on a non-finite loss.
TrainResult train(const ModelWeights& initial, std::span<const TrainingPair> pairs,
                  const TrainConfig& config);

/// Mean contrastive loss of `pairs` under `weights` (no update).
float mean_loss(const ModelWeights& weights, std::span<const TrainingPair> pairs,
                const Margins& margins = {});

struct GradientCheckReport {
  double max_relative_error = 0.0;
  double max_abs_analytic = 0.0;
  double max_abs_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_at_kink = 0;
};

/// Compares the analytic gradient of one pair's loss against central finite
/// differences, in double precision, on `samples_per_group` random
/// coordinates of each parameter group (token-table samples come from rows
/// the pair touches). Coordinates whose perturbation straddles the hinge
/// kink, or whose similarity sits within 1e-6 of it, are skipped.
/// `epsilon` must lie in [1e-6, 1e-2].
GradientCheckReport gradient_check(const ModelWeights& weights, const TrainingPair& pair,
                                   double epsilon, const Margins& margins = {},
                                   std::uint64_t seed = 0,
                                   std::size_t samples_per_group = 100);

/// Reads `label<TAB>query<TAB>item_text` lines (label 1 or 0). Blank lines
/// and lines starting with '#' are ignored; malformed lines throw
/// kCorrupt naming the line number.
std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& path);

}  // namespace everysearch

#endif  // EVERYSEARCH_TRAINER_H_
