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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "model.hpp"

namespace dgsr {

struct EvalConfig {
    int n = 10;                   // ranking cutoff
    int negatives = 100;          // sampled negatives per positive
    std::uint64_t seed = 7;
    std::vector<std::int32_t> bucket_edges = {1, 2, 5, 10, 20};

    void validate() const;
};

struct BucketMetrics {
    std::int32_t lo = 0;
    std::int32_t hi = -1;  // -1 means unbounded
    double recall = 0.0;
    double mrr = 0.0;
    double ndcg = 0.0;
    std::int64_t count = 0;
};

struct MetricsReport {
    double recall = 0.0;
    double mrr = 0.0;
    double ndcg = 0.0;
    int n = 0;
    int negatives = 0;
    std::int64_t sample_count = 0;
    std::vector<BucketMetrics> buckets;
};

/// Samples `count` distinct negatives: never in the user's item set, never
/// the anchor, never the positive. Throws when the admissible pool is too
/// small.
std::vector<std::int32_t> sample_eval_negatives(std::mt19937_64& rng,
                                                std::span<const std::int32_t> user_items_sorted,
                                                std::int32_t anchor, std::int32_t positive, int count,
                                                std::int32_t item_count);

/// 1 + negatives scoring strictly higher + negatives tying (positive loses
/// ties).
int rank_of_positive(std::span<const double> scores, std::size_t positive_index);

struct SampleMetrics {
    double recall, mrr, ndcg;
};
SampleMetrics metrics_at_n(int rank, int n);

/// Sampled top-n evaluation over a triplet split, bucketed by the positive
/// item's training interaction count. Per-sample RNG streams derive from
/// (seed, sample index).
MetricsReport evaluate(const PropagatedState& prop, const VariantConfig& variant,
                       const SequenceDataset& dataset, std::span<const Triplet> split,
                       const EvalConfig& config);

std::string report_to_json(const MetricsReport& report);

}  // namespace dgsr
