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
#include <span>
#include <string>

#include "graph.hpp"
#include "matrix.hpp"

namespace dgsr {

/// Which score terms are active and how many convolution layers feed each.
/// MF = (ui only, 0 layers); FMC = (ii only, 0); FPMC = (both, 0); the full
/// model is (both, K_ui > 0, K_ii > 0).
struct VariantConfig {
    bool use_ui_term = true;
    bool use_ii_term = true;
    int ui_layers = 0;
    int ii_layers = 0;

    void validate() const;
    std::string name() const;
};

VariantConfig parse_variant(const std::string& name, int ui_layers, int ii_layers);

/// The four base embedding tables. All are independently initialized and
/// independently updated: users, items as interaction targets, items as
/// transition anchors, items as transition targets.
struct EmbeddingState {
    std::int32_t user_count = 0;
    std::int32_t item_count = 0;
    int dim = 0;
    std::uint64_t seed = 0;
    Matrix user_emb;     // N_U x d
    Matrix item_ui_emb;  // N_I x d, target role in the interaction term
    Matrix anchor_emb;   // N_I x d, anchor role in the transition term
    Matrix item_ii_emb;  // N_I x d, target role in the transition term
};

/// Tables after graph propagation and layer combination.
struct PropagatedState {
    Matrix user_emb;
    Matrix item_ui_emb;
    Matrix anchor_emb;
    Matrix item_ii_emb;
};

/// Fills each table i.i.d. normal(0, 0.01^2) from one seeded generator.
EmbeddingState init_embeddings(std::int32_t user_count, std::int32_t item_count, int dim, std::uint64_t seed);

/// Propagates each enabled term's table pair over its graph; a disabled
/// term's tables (and any 0-layer term) pass through unchanged.
PropagatedState forward(const EmbeddingState& state, const NormalizedBigraph& ui_graph,
                        const NormalizedBigraph& ii_graph, const VariantConfig& variant);

double score(const PropagatedState& prop, std::int32_t user, std::int32_t anchor, std::int32_t item,
             const VariantConfig& variant);

/// Scores candidates[b][c] for (users[b], anchors[b]); element (b, c) equals
/// score(prop, users[b], anchors[b], candidates[b][c], variant).
Matrix score_batch(const PropagatedState& prop, std::span<const std::int32_t> users,
                   std::span<const std::int32_t> anchors,
                   const std::vector<std::vector<std::int32_t>>& candidates, const VariantConfig& variant);

// Checkpoint: little-endian binary, layout documented in the README.
void save_checkpoint(const EmbeddingState& state, const VariantConfig& variant, const std::string& path);
std::pair<EmbeddingState, VariantConfig> load_checkpoint(const std::string& path);

}  // namespace dgsr
