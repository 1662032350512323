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

namespace dgsr {

/// Synthetic corpus with a planted long-term preference signal (users stick
/// to a preferred item cluster) and a planted transition signal (item
/// clusters follow a cyclic Markov chain). The remainder probability mass
/// picks uniformly at random over all items.
struct SynthConfig {
    std::int32_t n_users = 100;
    std::int32_t n_items = 50;
    int seq_len_min = 10;
    int seq_len_max = 10;
    int n_user_clusters = 5;
    int n_item_clusters = 5;
    double alpha_pref = 0.4;   // P(pick from the user's preferred cluster)
    double alpha_trans = 0.4;  // P(pick from the Markov-successor cluster)
    double cluster_advance_prob = 0.8;  // cluster c -> (c+1) mod C, else stay
    // 0 = uniform within a cluster; > 0 applies rank^(-skew) weights, giving
    // a long-tail item popularity distribution.
    double popularity_skew = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Emits the canonical corpus TSV: one sequence per user, timestamps are
/// positions.
void generate(const SynthConfig& config, std::ostream& out);

}  // namespace dgsr
