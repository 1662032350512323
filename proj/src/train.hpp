// Copyright 2026 the dualgraph-rec authors
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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "corpus.hpp"
#include "eval.hpp"
#include "graph.hpp"
#include "model.hpp"

namespace dgsr {

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 5000;
    double reg_lambda = 1e-5;
    int max_epochs = 250;
    std::uint64_t seed = 42;
    VariantConfig variant;
    int dim = 10;
    bool use_adam = false;  // default optimizer is plain SGD
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    // Recompute propagated tables per batch (faithful gradients); per-epoch
    // caching is a documented approximation.
    bool cache_propagation_per_epoch = false;
    bool include_valid_edges = false;
    EvalConfig valid_eval;  // per-epoch validation metric settings
    bool record_timing = false;

    void validate() const;
};

/// A training example: positive transition (user, anchor, target) plus one
/// sampled negative target.
struct Quadruple {
    std::int32_t user;
    std::int32_t anchor;
    std::int32_t positive;
    std::int32_t negative;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double valid_recall = 0.0;
    double valid_mrr = 0.0;
    double valid_ndcg = 0.0;
    std::int64_t wall_time_ms = 0;
};

struct FitResult {
    EmbeddingState best_state;
    int best_epoch = -1;  // -1: no validation ran, best_state is the final state
    double best_valid_ndcg = 0.0;
    std::vector<EpochRecord> history;
};

/// Gradients w.r.t. the four base tables.
struct TableGradients {
    Matrix user_emb;
    Matrix item_ui_emb;
    Matrix anchor_emb;
    Matrix item_ii_emb;
};

/// Uniform draw from the items the user never interacted with.
std::int32_t sample_negative(std::mt19937_64& rng, std::span<const std::int32_t> user_items_sorted,
                             std::int32_t item_count);

/// -ln sigmoid(y_pos - y_neg), computed as softplus(-(y_pos - y_neg)).
double bpr_loss(double y_pos, double y_neg);

/// Mean batch BPR loss plus lambda * sum of squared norms of the base-table
/// rows each quadruple touches (enabled terms only). Forward-only; the
/// finite-difference tests differentiate exactly this function.
double batch_loss(const EmbeddingState& state, const NormalizedBigraph& ui_graph,
                  const NormalizedBigraph& ii_graph, std::span<const Quadruple> batch,
                  const VariantConfig& variant, double reg_lambda);

/// Analytic gradient of batch_loss, with the propagation part backpropagated
/// through the adjoint map. Returns the loss as well.
double batch_gradients(const EmbeddingState& state, const NormalizedBigraph& ui_graph,
                       const NormalizedBigraph& ii_graph, std::span<const Quadruple> batch,
                       const VariantConfig& variant, double reg_lambda, TableGradients& grads);

/// One optimizer update in place; returns the batch loss.
double step(EmbeddingState& state, const NormalizedBigraph& ui_graph, const NormalizedBigraph& ii_graph,
            std::span<const Quadruple> batch, const TrainConfig& config);

FitResult fit(const SequenceDataset& dataset, const NormalizedBigraph& ui_graph,
              const NormalizedBigraph& ii_graph, const TrainConfig& config);

/// JSON lines, one object per epoch.
void write_history(const std::vector<EpochRecord>& history, std::ostream& out);

}  // namespace dgsr
