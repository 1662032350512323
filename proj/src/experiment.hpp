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

#include <string>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "eval.hpp"
#include "synth.hpp"
#include "train.hpp"

namespace dgsr {

/// One experiment's settings: training, evaluation and optional sweep grids.
/// Parsed from a JSON object; unknown keys and invalid values are reported
/// exhaustively in one error.
struct ExperimentConfig {
    TrainConfig train;
    EvalConfig eval;
    std::string variant_name = "dgsr";
    // sweep grids (empty list = single value from the scalar fields)
    std::vector<std::string> sweep_variants;
    std::vector<int> sweep_dims;
    std::vector<int> sweep_ui_layers;
    std::vector<int> sweep_ii_layers;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
SynthConfig parse_synth_config(const nlohmann::json& doc);

/// ingest + build_splits + write the prepared directory; returns the
/// dataset statistics as JSON (sequences, users, items, actions, split
/// sizes, average actions per user and per item).
std::string run_prepare(const std::string& input_tsv, int min_seq_len, int min_item_freq,
                        const std::string& out_dir, bool holdout = true);

std::string dataset_stats_json(const InteractionLog& log, const SequenceDataset& dataset);

/// Builds the two graphs per config and runs fit; writes the best checkpoint
/// and the history JSONL. Returns a summary JSON.
std::string run_train(const PreparedData& data, const ExperimentConfig& config,
                      const std::string& checkpoint_path, const std::string& history_path);

/// Evaluates a checkpoint on "test" or "valid"; checks checkpoint/dataset
/// compatibility first.
std::string run_evaluate(const EmbeddingState& state, const VariantConfig& variant,
                         const PreparedData& data, const std::string& split, const EvalConfig& eval,
                         bool include_valid_edges);

/// Cartesian product over the sweep grids; each cell trains and evaluates.
/// A failed cell is recorded in the table, not fatal. Returns a JSON array
/// sorted by test NDCG (descending); also writes sweep.csv when out_dir is
/// non-empty.
std::string run_sweep(const PreparedData& data, const ExperimentConfig& config, const std::string& out_dir);

}  // namespace dgsr
