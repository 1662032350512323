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

#include "graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "error.hpp"

namespace dgsr {

NormalizedBigraph NormalizedBigraph::build(std::vector<std::pair<std::int32_t, std::int32_t>> edges,
                                           std::int32_t left_count, std::int32_t right_count) {
    for (const auto& [a, b] : edges) {
        if (a < 0 || a >= left_count || b < 0 || b >= right_count) {
            throw Error(ErrorCode::invalid_argument, "edge endpoint out of range");
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    NormalizedBigraph g;
    g.left_count = left_count;
    g.right_count = right_count;
    g.left_degree.assign(left_count, 0);
    g.right_degree.assign(right_count, 0);
    for (const auto& [a, b] : edges) {
        ++g.left_degree[a];
        ++g.right_degree[b];
    }

    g.left_ptr.assign(left_count + 1, 0);
    for (const auto& [a, b] : edges) ++g.left_ptr[a + 1];
    for (std::int32_t a = 0; a < left_count; ++a) g.left_ptr[a + 1] += g.left_ptr[a];
    g.left_adj.resize(edges.size());
    g.left_coeff.resize(edges.size());
    {
        std::vector<std::int64_t> cursor(g.left_ptr.begin(), g.left_ptr.end() - 1);
        for (const auto& [a, b] : edges) {
            const std::int64_t at = cursor[a]++;
            g.left_adj[at] = b;
            g.left_coeff[at] = 1.0 / (std::sqrt(static_cast<double>(g.left_degree[a])) *
                                      std::sqrt(static_cast<double>(g.right_degree[b])));
        }
    }

    g.right_ptr.assign(right_count + 1, 0);
    for (const auto& [a, b] : edges) ++g.right_ptr[b + 1];
    for (std::int32_t b = 0; b < right_count; ++b) g.right_ptr[b + 1] += g.right_ptr[b];
    g.right_adj.resize(edges.size());
    g.right_coeff.resize(edges.size());
    {
        std::vector<std::int64_t> cursor(g.right_ptr.begin(), g.right_ptr.end() - 1);
        // edges are sorted by (a, b), so each right row receives its
        // neighbors in increasing left order.
        for (const auto& [a, b] : edges) {
            const std::int64_t at = cursor[b]++;
            g.right_adj[at] = a;
            g.right_coeff[at] = 1.0 / (std::sqrt(static_cast<double>(g.right_degree[b])) *
                                       std::sqrt(static_cast<double>(g.left_degree[a])));
        }
    }
    return g;
}

NormalizedBigraph build_ui_graph(std::span<const Triplet> train_triplets,
                                 std::span<const Triplet> valid_triplets,
                                 std::int32_t user_count, std::int32_t item_count,
                                 bool include_valid_targets) {
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    edges.reserve(train_triplets.size() * 2 + valid_triplets.size());
    for (const auto& t : train_triplets) {
        edges.emplace_back(t.user, t.anchor);
        edges.emplace_back(t.user, t.target);
    }
    // The valid anchor is the last item of the training prefix; it appears
    // in no train triplet when the prefix has a single item.
    for (const auto& t : valid_triplets) {
        edges.emplace_back(t.user, t.anchor);
        if (include_valid_targets) edges.emplace_back(t.user, t.target);
    }
    return NormalizedBigraph::build(std::move(edges), user_count, item_count);
}

NormalizedBigraph build_ii_graph(std::span<const Triplet> train_triplets, std::int32_t item_count) {
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    edges.reserve(train_triplets.size());
    for (const auto& t : train_triplets) edges.emplace_back(t.anchor, t.target);
    return NormalizedBigraph::build(std::move(edges), item_count, item_count);
}

namespace {

// dst[r] = sum over neighbors of coeff * src[neighbor]
void gather(const std::vector<std::int64_t>& ptr, const std::vector<std::int32_t>& adj,
            const std::vector<double>& coeff, const Matrix& src, Matrix& dst) {
    const std::int64_t d = dst.cols();
    for (std::int64_t r = 0; r < dst.rows(); ++r) {
        auto out = dst.row(r);
        std::fill(out.begin(), out.end(), 0.0);
        for (std::int64_t e = ptr[r]; e < ptr[r + 1]; ++e) {
            const double w = coeff[e];
            auto in = src.row(adj[e]);
            for (std::int64_t k = 0; k < d; ++k) out[k] += w * in[k];
        }
    }
}

// dst[neighbor] += coeff * src[r] over the rows of the given CSR.
void scatter(const std::vector<std::int64_t>& ptr, const std::vector<std::int32_t>& adj,
             const std::vector<double>& coeff, const Matrix& src, Matrix& dst) {
    const std::int64_t d = dst.cols();
    dst.set_zero();
    for (std::int64_t r = 0; r < src.rows(); ++r) {
        auto in = src.row(r);
        for (std::int64_t e = ptr[r]; e < ptr[r + 1]; ++e) {
            const double w = coeff[e];
            auto out = dst.row(adj[e]);
            for (std::int64_t k = 0; k < d; ++k) out[k] += w * in[k];
        }
    }
}

void check_shapes(const NormalizedBigraph& graph, const Matrix& left, const Matrix& right, int layers) {
    if (left.rows() != graph.left_count || right.rows() != graph.right_count || left.cols() != right.cols()) {
        throw Error(ErrorCode::invalid_argument, "embedding shape does not match graph");
    }
    if (layers < 0) throw Error(ErrorCode::invalid_argument, "layer count must be >= 0");
}

void add_into(Matrix& acc, const Matrix& term) {
    for (std::size_t i = 0; i < acc.data().size(); ++i) acc.data()[i] += term.data()[i];
}

}  // namespace

std::pair<Matrix, Matrix> propagate(const NormalizedBigraph& graph, const Matrix& left_emb,
                                    const Matrix& right_emb, int layers) {
    check_shapes(graph, left_emb, right_emb, layers);
    Matrix acc_left = left_emb;
    Matrix acc_right = right_emb;
    Matrix cur_left = left_emb;
    Matrix cur_right = right_emb;
    Matrix next_left(left_emb.rows(), left_emb.cols());
    Matrix next_right(right_emb.rows(), right_emb.cols());
    for (int k = 1; k <= layers; ++k) {
        gather(graph.left_ptr, graph.left_adj, graph.left_coeff, cur_right, next_left);
        gather(graph.right_ptr, graph.right_adj, graph.right_coeff, cur_left, next_right);
        add_into(acc_left, next_left);
        add_into(acc_right, next_right);
        std::swap(cur_left, next_left);
        std::swap(cur_right, next_right);
    }
    return {std::move(acc_left), std::move(acc_right)};
}

std::pair<Matrix, Matrix> propagate_transpose(const NormalizedBigraph& graph, const Matrix& upstream_left,
                                              const Matrix& upstream_right, int layers) {
    check_shapes(graph, upstream_left, upstream_right, layers);
    Matrix acc_left = upstream_left;
    Matrix acc_right = upstream_right;
    Matrix cur_left = upstream_left;
    Matrix cur_right = upstream_right;
    Matrix next_left(upstream_left.rows(), upstream_left.cols());
    Matrix next_right(upstream_right.rows(), upstream_right.cols());
    for (int k = 1; k <= layers; ++k) {
        // Transpose of "left gathers from right" is "right rows scatter back
        // through the same edges", and symmetrically for the other half.
        scatter(graph.right_ptr, graph.right_adj, graph.right_coeff, cur_right, next_left);
        scatter(graph.left_ptr, graph.left_adj, graph.left_coeff, cur_left, next_right);
        add_into(acc_left, next_left);
        add_into(acc_right, next_right);
        std::swap(cur_left, next_left);
        std::swap(cur_right, next_right);
    }
    return {std::move(acc_left), std::move(acc_right)};
}

void dump_edges(const NormalizedBigraph& graph, std::ostream& out) {
    for (std::int32_t a = 0; a < graph.left_count; ++a) {
        for (std::int64_t e = graph.left_ptr[a]; e < graph.left_ptr[a + 1]; ++e) {
            out << a << '\t' << graph.left_adj[e] << '\t' << graph.left_coeff[e] << '\n';
        }
    }
}

}  // namespace dgsr
