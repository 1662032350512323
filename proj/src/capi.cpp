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

#include "dgsr.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "error.hpp"
#include "experiment.hpp"

struct dgsr_dataset {
    dgsr::PreparedData data;
};

struct dgsr_model {
    dgsr::EmbeddingState state;
    dgsr::VariantConfig variant;
};

namespace {

thread_local std::string g_last_error = "no error";

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

dgsr_status status_for(dgsr::ErrorCode code) {
    switch (code) {
        case dgsr::ErrorCode::io: return DGSR_ERR_IO;
        case dgsr::ErrorCode::parse: return DGSR_ERR_PARSE;
        case dgsr::ErrorCode::invalid_argument: return DGSR_ERR_INVALID_ARGUMENT;
        case dgsr::ErrorCode::empty_corpus: return DGSR_ERR_EMPTY_CORPUS;
        case dgsr::ErrorCode::incompatible: return DGSR_ERR_INCOMPATIBLE;
        case dgsr::ErrorCode::numeric: return DGSR_ERR_NUMERIC;
        case dgsr::ErrorCode::unsampleable: return DGSR_ERR_UNSAMPLEABLE;
    }
    return DGSR_ERR_INTERNAL;
}

template <typename Fn>
dgsr_status guarded(Fn&& fn) {
    try {
        fn();
        return DGSR_OK;
    } catch (const dgsr::Error& e) {
        g_last_error = e.what();
        return status_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        g_last_error = e.what();
        return DGSR_ERR_PARSE;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DGSR_ERR_INTERNAL;
    }
}

nlohmann::json parse_json(const char* text) {
    if (text == nullptr || *text == '\0') return nlohmann::json::object();
    return nlohmann::json::parse(text);
}

void require(bool ok, const char* message) {
    if (!ok) throw dgsr::Error(dgsr::ErrorCode::invalid_argument, message);
}

}  // namespace

extern "C" {

const char* dgsr_status_name(dgsr_status status) {
    switch (status) {
        case DGSR_OK: return "ok";
        case DGSR_ERR_IO: return "io";
        case DGSR_ERR_PARSE: return "parse";
        case DGSR_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case DGSR_ERR_EMPTY_CORPUS: return "empty_corpus";
        case DGSR_ERR_INCOMPATIBLE: return "incompatible";
        case DGSR_ERR_NUMERIC: return "numeric";
        case DGSR_ERR_UNSAMPLEABLE: return "unsampleable";
        case DGSR_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* dgsr_last_error(void) { return g_last_error.c_str(); }

void dgsr_string_free(char* s) { std::free(s); }

dgsr_status dgsr_synth(const char* config_json, const char* out_tsv_path) {
    return guarded([&] {
        require(out_tsv_path != nullptr, "out_tsv_path is required");
        const dgsr::SynthConfig cfg = dgsr::parse_synth_config(parse_json(config_json));
        std::ofstream out(out_tsv_path);
        if (!out) throw dgsr::Error(dgsr::ErrorCode::io, std::string("cannot write '") + out_tsv_path + "'");
        dgsr::generate(cfg, out);
    });
}

dgsr_status dgsr_prepare(const char* input_tsv_path, int min_seq_len, int min_item_freq,
                         int with_holdout, const char* out_dir, char** stats_json_out) {
    return guarded([&] {
        require(input_tsv_path != nullptr && out_dir != nullptr, "input path and out_dir are required");
        const std::string stats = dgsr::run_prepare(input_tsv_path, min_seq_len, min_item_freq, out_dir,
                                                    with_holdout != 0);
        if (stats_json_out != nullptr) *stats_json_out = dup_string(stats);
    });
}

dgsr_status dgsr_dataset_open(const char* prepared_dir, dgsr_dataset** dataset_out) {
    return guarded([&] {
        require(prepared_dir != nullptr && dataset_out != nullptr, "prepared_dir and out pointer required");
        auto handle = std::make_unique<dgsr_dataset>();
        handle->data = dgsr::load_prepared_dir(prepared_dir);
        *dataset_out = handle.release();
    });
}

void dgsr_dataset_close(dgsr_dataset* dataset) { delete dataset; }

dgsr_status dgsr_dataset_stats(const dgsr_dataset* dataset, char** stats_json_out) {
    return guarded([&] {
        require(dataset != nullptr && stats_json_out != nullptr, "dataset and out pointer required");
        *stats_json_out = dup_string(dgsr::dataset_stats_json(dataset->data.log, dataset->data.dataset));
    });
}

dgsr_status dgsr_train(const dgsr_dataset* dataset, const char* config_json,
                       const char* checkpoint_path, const char* history_path, char** summary_json_out) {
    return guarded([&] {
        require(dataset != nullptr, "dataset is required");
        const dgsr::ExperimentConfig cfg = dgsr::parse_experiment_config(parse_json(config_json));
        const std::string summary =
            dgsr::run_train(dataset->data, cfg, checkpoint_path ? checkpoint_path : "",
                            history_path ? history_path : "");
        if (summary_json_out != nullptr) *summary_json_out = dup_string(summary);
    });
}

dgsr_status dgsr_model_open(const char* checkpoint_path, dgsr_model** model_out) {
    return guarded([&] {
        require(checkpoint_path != nullptr && model_out != nullptr, "path and out pointer required");
        auto [state, variant] = dgsr::load_checkpoint(checkpoint_path);
        *model_out = new dgsr_model{std::move(state), variant};
    });
}

void dgsr_model_close(dgsr_model* model) { delete model; }

dgsr_status dgsr_model_info(const dgsr_model* model, char** info_json_out) {
    return guarded([&] {
        require(model != nullptr && info_json_out != nullptr, "model and out pointer required");
        nlohmann::ordered_json info{{"users", model->state.user_count},
                                    {"items", model->state.item_count},
                                    {"dim", model->state.dim},
                                    {"seed", model->state.seed},
                                    {"variant", model->variant.name()},
                                    {"ui_layers", model->variant.ui_layers},
                                    {"ii_layers", model->variant.ii_layers}};
        *info_json_out = dup_string(info.dump(2));
    });
}

dgsr_status dgsr_evaluate(const dgsr_model* model, const dgsr_dataset* dataset, const char* split,
                          const char* config_json, char** report_json_out) {
    return guarded([&] {
        require(model != nullptr && dataset != nullptr && split != nullptr, "model, dataset, split required");
        const dgsr::ExperimentConfig cfg = dgsr::parse_experiment_config(parse_json(config_json));
        const std::string report =
            dgsr::run_evaluate(model->state, model->variant, dataset->data, split, cfg.eval,
                               cfg.train.include_valid_edges);
        if (report_json_out != nullptr) *report_json_out = dup_string(report);
    });
}

dgsr_status dgsr_score(const dgsr_model* model, const dgsr_dataset* dataset, int32_t user,
                       int32_t anchor, int32_t item, double* score_out) {
    return guarded([&] {
        require(model != nullptr && dataset != nullptr && score_out != nullptr,
                "model, dataset and out pointer required");
        const auto& ds = dataset->data.dataset;
        if (model->state.user_count != ds.user_count || model->state.item_count != ds.item_count) {
            throw dgsr::Error(dgsr::ErrorCode::incompatible, "checkpoint does not match the dataset");
        }
        const auto ui = dgsr::build_ui_graph(ds.train_triplets, ds.valid_triplets, ds.user_count,
                                             ds.item_count);
        const auto ii = dgsr::build_ii_graph(ds.train_triplets, ds.item_count);
        const dgsr::PropagatedState prop = dgsr::forward(model->state, ui, ii, model->variant);
        *score_out = dgsr::score(prop, user, anchor, item, model->variant);
    });
}

dgsr_status dgsr_sweep(const dgsr_dataset* dataset, const char* config_json, const char* out_dir,
                       char** table_json_out) {
    return guarded([&] {
        require(dataset != nullptr, "dataset is required");
        const dgsr::ExperimentConfig cfg = dgsr::parse_experiment_config(parse_json(config_json));
        const std::string table = dgsr::run_sweep(dataset->data, cfg, out_dir ? out_dir : "");
        if (table_json_out != nullptr) *table_json_out = dup_string(table);
    });
}

}  // extern "C"
