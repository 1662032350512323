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
#include <string>
#include <unordered_map>
#include <vector>

namespace dgsr {

/// One interaction after ID densification. `seq` is the sequence the event
/// belongs to; several sequences may map onto the same user.
struct Event {
    std::int32_t seq;
    std::int32_t user;
    std::int32_t item;
    std::int64_t timestamp;
};

/// Densified interaction log. Events are ordered by sequence (in first
/// appearance order) and within a sequence by non-decreasing timestamp,
/// ties broken by input order.
struct InteractionLog {
    std::vector<Event> events;
    std::int32_t sequence_count = 0;
    std::int32_t user_count = 0;
    std::int32_t item_count = 0;
    // dense index -> raw id
    std::vector<std::string> sequence_ids;
    std::vector<std::string> user_ids;
    std::vector<std::string> item_ids;
    // sequence index -> user index
    std::vector<std::int32_t> sequence_user;
};

/// A (user, anchor item, target item) transition.
struct Triplet {
    std::int32_t user;
    std::int32_t anchor;
    std::int32_t target;

    bool operator==(const Triplet&) const = default;
};

/// Per-sequence item lists with the holdout split: the last transition of
/// each sequence is the test triplet, the second to last the validation
/// triplet, and everything before that trains the model.
struct SequenceDataset {
    std::vector<std::vector<std::int32_t>> sequences;   // per sequence id
    std::vector<std::int32_t> sequence_user;            // sequence -> user
    std::vector<Triplet> train_triplets;
    std::vector<Triplet> valid_triplets;
    std::vector<Triplet> test_triplets;
    std::vector<std::vector<std::int32_t>> user_items;  // sorted unique, full sequences
    std::vector<std::int32_t> item_train_count;         // occurrences in training prefixes
    std::int32_t user_count = 0;
    std::int32_t item_count = 0;
    int min_seq_len = 0;

    std::int64_t action_count() const;
};

/// Parses the canonical TSV (sequence_id, user_id, item_id, timestamp),
/// drops items with global frequency < min_item_freq, then drops sequences
/// whose remaining length < min_seq_len. Dense ids follow first-appearance
/// order of the surviving events.
InteractionLog ingest(std::istream& input, int min_seq_len, int min_item_freq);

InteractionLog ingest_file(const std::string& path, int min_seq_len, int min_item_freq);

/// Builds the per-sequence split. With holdout=false every consecutive pair
/// becomes a train triplet and valid/test stay empty (training-graph mode,
/// also used by toy fixtures with sequences shorter than 3).
SequenceDataset build_splits(const InteractionLog& log, int min_seq_len, bool holdout = true);

/// Keeps k uniformly sampled sequences (without replacement) and
/// re-densifies all ids.
InteractionLog sample_sequences(const InteractionLog& log, std::int32_t k, std::uint64_t seed);

// Canonical and split-file I/O.
void write_events(const InteractionLog& log, std::ostream& out);
void write_triplets(const std::vector<Triplet>& triplets, std::ostream& out);
std::vector<Triplet> read_triplets(std::istream& in);
void write_vocab(const std::vector<std::string>& ids, std::ostream& out);

/// Writes events.tsv, train/valid/test.tsv, vocab_users.tsv, vocab_items.tsv
/// and dataset.json into out_dir.
void write_prepared_dir(const InteractionLog& log, const SequenceDataset& dataset,
                        int min_seq_len, int min_item_freq, bool holdout, const std::string& out_dir);

/// Reloads a directory produced by write_prepared_dir.
struct PreparedData {
    InteractionLog log;
    SequenceDataset dataset;
    int min_seq_len = 0;
    int min_item_freq = 0;
    bool holdout = true;
};
PreparedData load_prepared_dir(const std::string& dir);

}  // namespace dgsr
