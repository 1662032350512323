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
#include <span>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "matrix.hpp"

namespace dgsr {

/// Bipartite graph with deduplicated edges, stored in CSR form for both
/// orientations. Each edge (a, b) carries the symmetric normalization
/// coefficient 1/(sqrt(deg(a)) * sqrt(deg(b))). Neighbor lists are sorted
/// so per-row accumulation order is fixed.
struct NormalizedBigraph {
    std::int32_t left_count = 0;
    std::int32_t right_count = 0;

    // left -> right
    std::vector<std::int64_t> left_ptr;
    std::vector<std::int32_t> left_adj;
    std::vector<double> left_coeff;
    // right -> left
    std::vector<std::int64_t> right_ptr;
    std::vector<std::int32_t> right_adj;
    std::vector<double> right_coeff;

    std::vector<std::int32_t> left_degree;
    std::vector<std::int32_t> right_degree;

    std::int64_t edge_count() const { return static_cast<std::int64_t>(left_adj.size()); }

    static NormalizedBigraph build(std::vector<std::pair<std::int32_t, std::int32_t>> edges,
                                   std::int32_t left_count, std::int32_t right_count);
};

/// User-item interaction graph over training-visible interactions: items
/// referenced by train triplets plus valid-triplet anchors. Valid targets
/// are added only when include_valid_targets is set.
NormalizedBigraph build_ui_graph(std::span<const Triplet> train_triplets,
                                 std::span<const Triplet> valid_triplets,
                                 std::int32_t user_count, std::int32_t item_count,
                                 bool include_valid_targets = false);

/// Item-item transition graph: left nodes are items in their anchor role,
/// right nodes items in their target role, one edge per observed training
/// transition.
NormalizedBigraph build_ii_graph(std::span<const Triplet> train_triplets, std::int32_t item_count);

/// K-layer light graph convolution with layer-sum combination. Layer 0 is
/// the input; layer k aggregates the opposite side's layer k-1 with the
/// normalization coefficients. Returns the sum over layers 0..K.
std::pair<Matrix, Matrix> propagate(const NormalizedBigraph& graph, const Matrix& left_emb,
                                    const Matrix& right_emb, int layers);

/// Adjoint of propagate: applies the transposed linear map to upstream
/// gradients, so <propagate(x), y> == <x, propagate_transpose(y)>.
std::pair<Matrix, Matrix> propagate_transpose(const NormalizedBigraph& graph, const Matrix& upstream_left,
                                              const Matrix& upstream_right, int layers);

/// Debug dump: `left<TAB>right<TAB>coefficient` per edge.
void dump_edges(const NormalizedBigraph& graph, std::ostream& out);

}  // namespace dgsr
