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

#include "synth.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <vector>

#include "error.hpp"

namespace dgsr {

void SynthConfig::validate() const {
    if (n_users < 1 || n_items < 1) throw Error(ErrorCode::invalid_argument, "need users and items");
    if (seq_len_min < 1 || seq_len_max < seq_len_min) {
        throw Error(ErrorCode::invalid_argument, "bad sequence length range");
    }
    if (n_user_clusters < 1 || n_item_clusters < 1 || n_item_clusters > n_items) {
        throw Error(ErrorCode::invalid_argument, "bad cluster counts");
    }
    if (alpha_pref < 0.0 || alpha_trans < 0.0 || alpha_pref + alpha_trans > 1.0) {
        throw Error(ErrorCode::invalid_argument, "alpha_pref + alpha_trans must be within [0, 1]");
    }
    if (cluster_advance_prob < 0.0 || cluster_advance_prob > 1.0 || popularity_skew < 0.0) {
        throw Error(ErrorCode::invalid_argument, "bad cluster_advance_prob or popularity_skew");
    }
}

namespace {

// Items are split into contiguous cluster blocks.
struct ClusterLayout {
    std::vector<std::int32_t> first;  // cluster -> first item, size C+1
    std::vector<std::int32_t> item_cluster;

    ClusterLayout(std::int32_t n_items, int n_clusters) {
        first.resize(n_clusters + 1);
        item_cluster.resize(n_items);
        for (int c = 0; c <= n_clusters; ++c) {
            first[c] = static_cast<std::int32_t>(static_cast<std::int64_t>(n_items) * c / n_clusters);
        }
        for (int c = 0; c < n_clusters; ++c) {
            for (std::int32_t i = first[c]; i < first[c + 1]; ++i) item_cluster[i] = c;
        }
    }
};

class ItemPicker {
public:
    ItemPicker(const ClusterLayout& layout, double skew) : layout_(layout), skew_(skew) {
        if (skew_ > 0.0) {
            const std::int32_t n = layout.item_cluster.empty()
                                       ? 0
                                       : static_cast<std::int32_t>(layout.item_cluster.size());
            weights_.resize(n);
            for (std::int32_t i = 0; i < n; ++i) {
                const std::int32_t rank = i - layout.first[layout.item_cluster[i]];
                weights_[i] = std::pow(static_cast<double>(rank + 1), -skew_);
            }
        }
    }

    std::int32_t from_cluster(std::mt19937_64& rng, int cluster) const {
        return pick_range(rng, layout_.first[cluster], layout_.first[cluster + 1]);
    }

    std::int32_t any(std::mt19937_64& rng) const {
        return pick_range(rng, 0, static_cast<std::int32_t>(layout_.item_cluster.size()));
    }

private:
    std::int32_t pick_range(std::mt19937_64& rng, std::int32_t lo, std::int32_t hi) const {
        if (skew_ == 0.0) {
            std::uniform_int_distribution<std::int32_t> pick(lo, hi - 1);
            return pick(rng);
        }
        double total = 0.0;
        for (std::int32_t i = lo; i < hi; ++i) total += weights_[i];
        std::uniform_real_distribution<double> u(0.0, total);
        double r = u(rng);
        for (std::int32_t i = lo; i < hi; ++i) {
            r -= weights_[i];
            if (r <= 0.0) return i;
        }
        return hi - 1;
    }

    const ClusterLayout& layout_;
    double skew_;
    std::vector<double> weights_;
};

}  // namespace

void generate(const SynthConfig& config, std::ostream& out) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    const ClusterLayout layout(config.n_items, config.n_item_clusters);
    const ItemPicker picker(layout, config.popularity_skew);

    std::vector<int> user_cluster(config.n_users);
    std::uniform_int_distribution<int> pick_user_cluster(0, config.n_user_clusters - 1);
    for (auto& c : user_cluster) c = pick_user_cluster(rng);

    std::uniform_int_distribution<int> pick_len(config.seq_len_min, config.seq_len_max);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    for (std::int32_t u = 0; u < config.n_users; ++u) {
        const int preferred = user_cluster[u] % config.n_item_clusters;
        const int len = pick_len(rng);
        std::int32_t prev = -1;
        for (int t = 0; t < len; ++t) {
            std::int32_t item;
            const double r = coin(rng);
            // The first pick has no predecessor; its alpha_trans band falls
            // through to the uniform branch.
            if (prev >= 0 && r < config.alpha_trans) {
                int c = layout.item_cluster[prev];
                if (coin(rng) < config.cluster_advance_prob) c = (c + 1) % config.n_item_clusters;
                item = picker.from_cluster(rng, c);
            } else if (r >= config.alpha_trans && r < config.alpha_trans + config.alpha_pref) {
                item = picker.from_cluster(rng, preferred);
            } else {
                item = picker.any(rng);
            }
            out << 'q' << u << '\t' << 'u' << u << '\t' << 'i' << item << '\t' << t << '\n';
            prev = item;
        }
    }
}

}  // namespace dgsr
