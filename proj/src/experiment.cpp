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

#include "experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"

namespace dgsr {

namespace {

class ConfigReader {
public:
    explicit ConfigReader(const nlohmann::json& doc, std::string scope = "")
        : doc_(doc), scope_(std::move(scope)) {
        if (!doc.is_object()) errors_.push_back(prefix() + "config must be a JSON object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!doc_.is_object() || !doc_.contains(key)) return;
        try {
            out = doc_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            errors_.push_back(prefix() + "field '" + key + "' has the wrong type");
        }
    }

    const nlohmann::json* object(const char* key) {
        seen_.insert(key);
        if (!doc_.is_object() || !doc_.contains(key)) return nullptr;
        if (!doc_.at(key).is_object()) {
            errors_.push_back(prefix() + "field '" + key + "' must be an object");
            return nullptr;
        }
        return &doc_.at(key);
    }

    void check(bool ok, const std::string& message) {
        if (!ok) errors_.push_back(prefix() + message);
    }

    void finish_scope() {
        if (!doc_.is_object()) return;
        for (const auto& [key, value] : doc_.items()) {
            (void)value;
            if (!seen_.count(key)) errors_.push_back(prefix() + "unknown field '" + key + "'");
        }
    }

    void absorb(ConfigReader& nested) {
        errors_.insert(errors_.end(), nested.errors_.begin(), nested.errors_.end());
    }

    void throw_if_errors() const {
        if (errors_.empty()) return;
        std::string joined = "invalid config:";
        for (const auto& e : errors_) joined += "\n  - " + e;
        throw Error(ErrorCode::invalid_argument, joined);
    }

private:
    std::string prefix() const { return scope_.empty() ? "" : scope_ + ": "; }

    const nlohmann::json& doc_;
    std::string scope_;
    std::set<std::string> seen_;
    std::vector<std::string> errors_;
};

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
    ExperimentConfig cfg;
    ConfigReader r(doc);

    std::int64_t seed = static_cast<std::int64_t>(cfg.train.seed);
    int ui_layers = 0, ii_layers = 0;
    r.get("seed", seed);
    r.get("variant", cfg.variant_name);
    r.get("dim", cfg.train.dim);
    r.get("ui_layers", ui_layers);
    r.get("ii_layers", ii_layers);
    r.get("learning_rate", cfg.train.learning_rate);
    r.get("batch_size", cfg.train.batch_size);
    r.get("reg_lambda", cfg.train.reg_lambda);
    r.get("max_epochs", cfg.train.max_epochs);
    r.get("use_adam", cfg.train.use_adam);
    r.get("cache_propagation_per_epoch", cfg.train.cache_propagation_per_epoch);
    r.get("include_valid_edges", cfg.train.include_valid_edges);
    r.get("record_timing", cfg.train.record_timing);

    if (const nlohmann::json* eval = r.object("eval")) {
        ConfigReader er(*eval, "eval");
        std::int64_t eval_seed = static_cast<std::int64_t>(cfg.eval.seed);
        er.get("n", cfg.eval.n);
        er.get("negatives", cfg.eval.negatives);
        er.get("seed", eval_seed);
        er.get("bucket_edges", cfg.eval.bucket_edges);
        er.finish_scope();
        r.absorb(er);
        cfg.eval.seed = static_cast<std::uint64_t>(eval_seed);
    }
    if (const nlohmann::json* sweep = r.object("sweep")) {
        ConfigReader sr(*sweep, "sweep");
        sr.get("variants", cfg.sweep_variants);
        sr.get("dims", cfg.sweep_dims);
        sr.get("ui_layers", cfg.sweep_ui_layers);
        sr.get("ii_layers", cfg.sweep_ii_layers);
        sr.finish_scope();
        r.absorb(sr);
    }
    r.finish_scope();

    r.check(cfg.train.learning_rate > 0.0, "learning_rate must be > 0");
    r.check(cfg.train.batch_size >= 1, "batch_size must be >= 1");
    r.check(cfg.train.reg_lambda >= 0.0, "reg_lambda must be >= 0");
    r.check(cfg.train.max_epochs >= 0, "max_epochs must be >= 0");
    r.check(cfg.train.dim >= 1, "dim must be >= 1");
    r.check(ui_layers >= 0 && ui_layers <= 3, "ui_layers must be within [0, 3]");
    r.check(ii_layers >= 0 && ii_layers <= 3, "ii_layers must be within [0, 3]");
    const bool variant_known = cfg.variant_name == "mf" || cfg.variant_name == "fmc" ||
                               cfg.variant_name == "fpmc" || cfg.variant_name == "dgsr";
    r.check(variant_known, "variant must be one of mf, fmc, fpmc, dgsr");
    r.check(cfg.eval.n >= 1 && cfg.eval.negatives >= 1 && cfg.eval.n <= cfg.eval.negatives + 1,
            "eval cutoff must satisfy 1 <= n <= negatives + 1");
    for (const auto& v : cfg.sweep_variants) {
        r.check(v == "mf" || v == "fmc" || v == "fpmc" || v == "dgsr",
                "sweep variant '" + v + "' must be one of mf, fmc, fpmc, dgsr");
    }
    for (int k : cfg.sweep_ui_layers) r.check(k >= 0 && k <= 3, "sweep ui_layers values must be within [0, 3]");
    for (int k : cfg.sweep_ii_layers) r.check(k >= 0 && k <= 3, "sweep ii_layers values must be within [0, 3]");
    for (int d : cfg.sweep_dims) r.check(d >= 1, "sweep dims values must be >= 1");
    r.throw_if_errors();

    cfg.train.seed = static_cast<std::uint64_t>(seed);
    cfg.train.variant = parse_variant(cfg.variant_name, ui_layers, ii_layers);
    cfg.train.valid_eval = cfg.eval;
    return cfg;
}

SynthConfig parse_synth_config(const nlohmann::json& doc) {
    SynthConfig cfg;
    ConfigReader r(doc);
    std::int64_t seed = static_cast<std::int64_t>(cfg.seed);
    r.get("n_users", cfg.n_users);
    r.get("n_items", cfg.n_items);
    r.get("seq_len_min", cfg.seq_len_min);
    r.get("seq_len_max", cfg.seq_len_max);
    r.get("n_user_clusters", cfg.n_user_clusters);
    r.get("n_item_clusters", cfg.n_item_clusters);
    r.get("alpha_pref", cfg.alpha_pref);
    r.get("alpha_trans", cfg.alpha_trans);
    r.get("cluster_advance_prob", cfg.cluster_advance_prob);
    r.get("popularity_skew", cfg.popularity_skew);
    r.get("seed", seed);
    r.finish_scope();
    r.throw_if_errors();
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.validate();
    return cfg;
}

std::string dataset_stats_json(const InteractionLog& log, const SequenceDataset& dataset) {
    const std::int64_t actions = dataset.action_count();
    nlohmann::ordered_json stats{
        {"sequences", log.sequence_count},
        {"users", log.user_count},
        {"items", log.item_count},
        {"actions", actions},
        {"train_triplets", dataset.train_triplets.size()},
        {"valid_triplets", dataset.valid_triplets.size()},
        {"test_triplets", dataset.test_triplets.size()},
        {"avg_actions_per_user", log.user_count ? static_cast<double>(actions) / log.user_count : 0.0},
        {"avg_actions_per_item", log.item_count ? static_cast<double>(actions) / log.item_count : 0.0},
    };
    return stats.dump(2);
}

std::string run_prepare(const std::string& input_tsv, int min_seq_len, int min_item_freq,
                        const std::string& out_dir, bool holdout) {
    const InteractionLog log = ingest_file(input_tsv, min_seq_len, min_item_freq);
    const SequenceDataset dataset = build_splits(log, min_seq_len, holdout);
    write_prepared_dir(log, dataset, min_seq_len, min_item_freq, holdout, out_dir);
    return dataset_stats_json(log, dataset);
}

namespace {

struct BuiltGraphs {
    NormalizedBigraph ui;
    NormalizedBigraph ii;
};

BuiltGraphs build_graphs(const SequenceDataset& dataset, bool include_valid_edges) {
    return {build_ui_graph(dataset.train_triplets, dataset.valid_triplets, dataset.user_count,
                           dataset.item_count, include_valid_edges),
            build_ii_graph(dataset.train_triplets, dataset.item_count)};
}

nlohmann::ordered_json metrics_entry(const MetricsReport& report) {
    return {{"recall", report.recall}, {"mrr", report.mrr}, {"ndcg", report.ndcg}};
}

}  // namespace

std::string run_train(const PreparedData& data, const ExperimentConfig& config,
                      const std::string& checkpoint_path, const std::string& history_path) {
    const BuiltGraphs graphs = build_graphs(data.dataset, config.train.include_valid_edges);
    const FitResult result = fit(data.dataset, graphs.ui, graphs.ii, config.train);

    if (!checkpoint_path.empty()) save_checkpoint(result.best_state, config.train.variant, checkpoint_path);
    if (!history_path.empty()) {
        std::ofstream out(history_path);
        if (!out) throw Error(ErrorCode::io, "cannot write '" + history_path + "'");
        write_history(result.history, out);
    }

    nlohmann::ordered_json summary{
        {"variant", config.train.variant.name()},
        {"dim", config.train.dim},
        {"ui_layers", config.train.variant.ui_layers},
        {"ii_layers", config.train.variant.ii_layers},
        {"epochs", result.history.size()},
        {"best_epoch", result.best_epoch},
        {"best_valid_ndcg", result.best_valid_ndcg},
        {"checkpoint", checkpoint_path},
        {"history", history_path},
    };
    return summary.dump(2);
}

std::string run_evaluate(const EmbeddingState& state, const VariantConfig& variant,
                         const PreparedData& data, const std::string& split, const EvalConfig& eval,
                         bool include_valid_edges) {
    if (state.user_count != data.dataset.user_count || state.item_count != data.dataset.item_count) {
        throw Error(ErrorCode::incompatible,
                    "checkpoint tables (" + std::to_string(state.user_count) + " users, " +
                        std::to_string(state.item_count) + " items) do not match the dataset (" +
                        std::to_string(data.dataset.user_count) + " users, " +
                        std::to_string(data.dataset.item_count) + " items)");
    }
    std::span<const Triplet> triplets;
    if (split == "test") {
        triplets = data.dataset.test_triplets;
    } else if (split == "valid") {
        triplets = data.dataset.valid_triplets;
    } else {
        throw Error(ErrorCode::invalid_argument, "split must be 'test' or 'valid'");
    }
    const BuiltGraphs graphs = build_graphs(data.dataset, include_valid_edges);
    const PropagatedState prop = forward(state, graphs.ui, graphs.ii, variant);
    const MetricsReport report = evaluate(prop, variant, data.dataset, triplets, eval);
    return report_to_json(report);
}

std::string run_sweep(const PreparedData& data, const ExperimentConfig& config, const std::string& out_dir) {
    const std::vector<std::string> variants =
        config.sweep_variants.empty() ? std::vector<std::string>{config.variant_name} : config.sweep_variants;
    const std::vector<int> dims =
        config.sweep_dims.empty() ? std::vector<int>{config.train.dim} : config.sweep_dims;
    const std::vector<int> ui_grid = config.sweep_ui_layers.empty()
                                         ? std::vector<int>{config.train.variant.ui_layers}
                                         : config.sweep_ui_layers;
    const std::vector<int> ii_grid = config.sweep_ii_layers.empty()
                                         ? std::vector<int>{config.train.variant.ii_layers}
                                         : config.sweep_ii_layers;

    const BuiltGraphs graphs = build_graphs(data.dataset, config.train.include_valid_edges);

    nlohmann::ordered_json table = nlohmann::json::array();
    for (const auto& variant_name : variants) {
        for (int dim : dims) {
            for (int k_ui : ui_grid) {
                for (int k_ii : ii_grid) {
                    nlohmann::ordered_json row{{"variant", variant_name},
                                               {"dim", dim},
                                               {"ui_layers", k_ui},
                                               {"ii_layers", k_ii}};
                    try {
                        TrainConfig cell = config.train;
                        cell.dim = dim;
                        cell.variant = parse_variant(variant_name, k_ui, k_ii);
                        // Masked-off terms ignore their layer knob; record
                        // the effective values.
                        row["ui_layers"] = cell.variant.ui_layers;
                        row["ii_layers"] = cell.variant.ii_layers;
                        const FitResult result = fit(data.dataset, graphs.ui, graphs.ii, cell);
                        const PropagatedState prop =
                            forward(result.best_state, graphs.ui, graphs.ii, cell.variant);
                        const MetricsReport test = evaluate(prop, cell.variant, data.dataset,
                                                            data.dataset.test_triplets, config.eval);
                        row["test"] = metrics_entry(test);
                        row["best_valid_ndcg"] = result.best_valid_ndcg;
                        row["best_epoch"] = result.best_epoch;
                    } catch (const std::exception& e) {
                        row["error"] = e.what();
                    }
                    table.push_back(std::move(row));
                }
            }
        }
    }

    std::stable_sort(table.begin(), table.end(), [](const nlohmann::json& a, const nlohmann::json& b) {
        const double na = a.contains("test") ? a["test"]["ndcg"].get<double>() : -1.0;
        const double nb = b.contains("test") ? b["test"]["ndcg"].get<double>() : -1.0;
        return na > nb;
    });

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream csv(std::filesystem::path(out_dir) / "sweep.csv");
        if (!csv) throw Error(ErrorCode::io, "cannot write sweep.csv in '" + out_dir + "'");
        csv << "variant,dim,ui_layers,ii_layers,recall,mrr,ndcg,best_valid_ndcg,error\n";
        for (const auto& row : table) {
            csv << row["variant"].get<std::string>() << ',' << row["dim"].get<int>() << ','
                << row["ui_layers"].get<int>() << ',' << row["ii_layers"].get<int>() << ',';
            if (row.contains("test")) {
                csv << row["test"]["recall"].get<double>() << ',' << row["test"]["mrr"].get<double>() << ','
                    << row["test"]["ndcg"].get<double>() << ',' << row["best_valid_ndcg"].get<double>()
                    << ",\n";
            } else {
                csv << ",,,,\"" << row["error"].get<std::string>() << "\"\n";
            }
        }
        std::ofstream js(std::filesystem::path(out_dir) / "sweep.json");
        js << table.dump(2) << '\n';
    }
    return table.dump(2);
}

}  // namespace dgsr
