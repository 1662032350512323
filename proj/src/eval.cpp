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

#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <json.hpp>

#include "error.hpp"

namespace dgsr {

void EvalConfig::validate() const {
    if (n < 1 || negatives < 1) throw Error(ErrorCode::invalid_argument, "n and negatives must be >= 1");
    if (n > negatives + 1) {
        throw Error(ErrorCode::invalid_argument, "cutoff n exceeds the ranked candidate count");
    }
    if (bucket_edges.empty() || !std::is_sorted(bucket_edges.begin(), bucket_edges.end())) {
        throw Error(ErrorCode::invalid_argument, "bucket edges must be non-empty and sorted");
    }
}

std::vector<std::int32_t> sample_eval_negatives(std::mt19937_64& rng,
                                                std::span<const std::int32_t> user_items_sorted,
                                                std::int32_t anchor, std::int32_t positive, int count,
                                                std::int32_t item_count) {
    auto admissible = [&](std::int32_t j) {
        if (j == anchor || j == positive) return false;
        return !std::binary_search(user_items_sorted.begin(), user_items_sorted.end(), j);
    };
    std::int64_t pool = item_count;
    std::unordered_set<std::int32_t> blocked(user_items_sorted.begin(), user_items_sorted.end());
    blocked.insert(anchor);
    blocked.insert(positive);
    pool = item_count - static_cast<std::int64_t>(blocked.size());
    if (pool < count) {
        throw Error(ErrorCode::unsampleable, "admissible negative pool (" + std::to_string(pool) +
                                                 ") smaller than requested count " + std::to_string(count));
    }

    std::vector<std::int32_t> out;
    out.reserve(count);
    if (pool <= 2 * static_cast<std::int64_t>(count)) {
        // Tight pool: enumerate and draw without replacement.
        std::vector<std::int32_t> candidates;
        candidates.reserve(pool);
        for (std::int32_t j = 0; j < item_count; ++j) {
            if (admissible(j)) candidates.push_back(j);
        }
        for (int k = 0; k < count; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, candidates.size() - 1);
            std::swap(candidates[k], candidates[pick(rng)]);
            out.push_back(candidates[k]);
        }
        return out;
    }
    std::unordered_set<std::int32_t> chosen;
    std::uniform_int_distribution<std::int32_t> pick(0, item_count - 1);
    while (static_cast<int>(out.size()) < count) {
        const std::int32_t j = pick(rng);
        if (!admissible(j) || chosen.count(j)) continue;
        chosen.insert(j);
        out.push_back(j);
    }
    return out;
}

int rank_of_positive(std::span<const double> scores, std::size_t positive_index) {
    const double pos = scores[positive_index];
    int rank = 1;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        if (c == positive_index) continue;
        if (scores[c] >= pos) ++rank;
    }
    return rank;
}

SampleMetrics metrics_at_n(int rank, int n) {
    if (rank < 1) throw Error(ErrorCode::invalid_argument, "rank must be >= 1");
    if (rank > n) return {0.0, 0.0, 0.0};
    return {1.0, 1.0 / rank, 1.0 / std::log2(static_cast<double>(rank) + 1.0)};
}

namespace {

std::mt19937_64 sample_rng(std::uint64_t seed, std::int64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

std::size_t bucket_for(const std::vector<std::int32_t>& edges, std::int32_t count) {
    // Counts below the first edge fall into the first bucket.
    std::size_t b = 0;
    for (std::size_t k = 1; k < edges.size(); ++k) {
        if (count >= edges[k]) b = k;
    }
    return b;
}

}  // namespace

MetricsReport evaluate(const PropagatedState& prop, const VariantConfig& variant,
                       const SequenceDataset& dataset, std::span<const Triplet> split,
                       const EvalConfig& config) {
    config.validate();
    MetricsReport report;
    report.n = config.n;
    report.negatives = config.negatives;
    report.buckets.resize(config.bucket_edges.size());
    for (std::size_t b = 0; b < report.buckets.size(); ++b) {
        report.buckets[b].lo = config.bucket_edges[b];
        report.buckets[b].hi = b + 1 < report.buckets.size() ? config.bucket_edges[b + 1] : -1;
    }

    std::vector<std::int32_t> candidates(config.negatives + 1);
    std::vector<double> scores(config.negatives + 1);
    for (std::size_t s = 0; s < split.size(); ++s) {
        const Triplet& t = split[s];
        auto rng = sample_rng(config.seed, static_cast<std::int64_t>(s));
        auto negatives = sample_eval_negatives(rng, dataset.user_items[t.user], t.anchor, t.target,
                                               config.negatives, dataset.item_count);
        candidates[0] = t.target;
        std::copy(negatives.begin(), negatives.end(), candidates.begin() + 1);
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            scores[c] = score(prop, t.user, t.anchor, candidates[c], variant);
        }
        const int rank = rank_of_positive(scores, 0);
        const SampleMetrics m = metrics_at_n(rank, config.n);
        report.recall += m.recall;
        report.mrr += m.mrr;
        report.ndcg += m.ndcg;
        ++report.sample_count;

        auto& bucket = report.buckets[bucket_for(config.bucket_edges, dataset.item_train_count[t.target])];
        bucket.recall += m.recall;
        bucket.mrr += m.mrr;
        bucket.ndcg += m.ndcg;
        ++bucket.count;
    }

    if (report.sample_count > 0) {
        report.recall /= report.sample_count;
        report.mrr /= report.sample_count;
        report.ndcg /= report.sample_count;
    }
    for (auto& bucket : report.buckets) {
        if (bucket.count > 0) {
            bucket.recall /= bucket.count;
            bucket.mrr /= bucket.count;
            bucket.ndcg /= bucket.count;
        }
    }
    return report;
}

std::string report_to_json(const MetricsReport& report) {
    nlohmann::ordered_json buckets = nlohmann::json::array();
    for (const auto& b : report.buckets) {
        nlohmann::ordered_json entry{{"lo", b.lo},       {"recall", b.recall}, {"mrr", b.mrr},
                             {"ndcg", b.ndcg},   {"count", b.count}};
        if (b.hi >= 0) {
            entry["hi"] = b.hi;
        } else {
            entry["hi"] = nullptr;
        }
        buckets.push_back(entry);
    }
    nlohmann::ordered_json doc{{"recall", report.recall},
                       {"mrr", report.mrr},
                       {"ndcg", report.ndcg},
                       {"n", report.n},
                       {"negatives", report.negatives},
                       {"sample_count", report.sample_count},
                       {"buckets", buckets}};
    return doc.dump(2);
}

}  // namespace dgsr
