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

// Command-line front end. Everything goes through the C API in dgsr.h; the
// config is a JSON file merged with flag overrides (flags win).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dgsr.h"

namespace {

using nlohmann::json;

int fail(dgsr_status status) {
    std::string message = dgsr_last_error();
    for (char& c : message) {
        if (c == '\n') c = ' ';
    }
    std::cerr << "error: " << dgsr_status_name(status) << ": " << message << '\n';
    return static_cast<int>(status);
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: io: cannot open config '" << path << "'\n";
        std::exit(static_cast<int>(DGSR_ERR_IO));
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        std::cerr << "error: parse: config '" << path << "': " << e.what() << '\n';
        std::exit(static_cast<int>(DGSR_ERR_PARSE));
    }
}

struct CommonFlags {
    std::string config_path;
    std::optional<std::int64_t> seed;
    std::optional<std::string> variant;
    std::optional<int> ui_layers;
    std::optional<int> ii_layers;
    std::optional<int> dim;
    std::optional<double> learning_rate;
    std::optional<int> batch_size;
    std::optional<int> max_epochs;
    std::optional<double> reg_lambda;

    void add_to(CLI::App& cmd, bool train_flags) {
        cmd.add_option("--config", config_path, "JSON config file");
        cmd.add_option("--seed", seed, "seed override");
        if (!train_flags) return;
        cmd.add_option("--variant", variant, "mf, fmc, fpmc or dgsr")
            ->check(CLI::IsMember({"mf", "fmc", "fpmc", "dgsr"}));
        cmd.add_option("--ui-layers", ui_layers, "interaction-graph layers");
        cmd.add_option("--ii-layers", ii_layers, "transition-graph layers");
        cmd.add_option("--dim", dim, "embedding dimension");
        cmd.add_option("--lr", learning_rate, "learning rate");
        cmd.add_option("--batch-size", batch_size, "batch size");
        cmd.add_option("--epochs", max_epochs, "max epochs");
        cmd.add_option("--reg-lambda", reg_lambda, "L2 regularization strength");
    }

    json merged() const {
        json cfg = load_config(config_path);
        if (seed) cfg["seed"] = *seed;
        if (variant) cfg["variant"] = *variant;
        if (ui_layers) cfg["ui_layers"] = *ui_layers;
        if (ii_layers) cfg["ii_layers"] = *ii_layers;
        if (dim) cfg["dim"] = *dim;
        if (learning_rate) cfg["learning_rate"] = *learning_rate;
        if (batch_size) cfg["batch_size"] = *batch_size;
        if (max_epochs) cfg["max_epochs"] = *max_epochs;
        if (reg_lambda) cfg["reg_lambda"] = *reg_lambda;
        return cfg;
    }
};

struct OwnedString {
    char* value = nullptr;
    ~OwnedString() { dgsr_string_free(value); }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-graph sequential recommender"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus TSV");
    CommonFlags synth_flags;
    std::string synth_out;
    synth_flags.add_to(*synth, false);
    synth->add_option("--out", synth_out, "output TSV path")->required();

    // prepare
    auto* prepare = app.add_subcommand("prepare", "ingest a corpus and write the split files");
    std::string prepare_input, prepare_out;
    int min_seq_len = 7;
    int min_item_freq = 5;
    prepare->add_option("input", prepare_input, "corpus TSV (sequence, user, item, timestamp)")->required();
    prepare->add_option("--out", prepare_out, "output directory")->required();
    bool no_holdout = false;
    prepare->add_option("--min-seq-len", min_seq_len, "minimum sequence length (default 7)");
    prepare->add_option("--min-item-freq", min_item_freq, "minimum item frequency (default 5)");
    prepare->add_flag("--no-holdout", no_holdout, "keep every transition as a train triplet (no valid/test)");

    // train
    auto* train = app.add_subcommand("train", "train a model on a prepared dataset");
    CommonFlags train_flags;
    std::string train_data, train_out;
    train_flags.add_to(*train, true);
    train->add_option("--data", train_data, "prepared dataset directory")->required();
    train->add_option("--out", train_out, "output directory (checkpoint.bin, history.jsonl)")->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint");
    CommonFlags eval_flags;
    std::string eval_data, eval_checkpoint, eval_split = "test";
    eval_flags.add_to(*evaluate, false);
    evaluate->add_option("--data", eval_data, "prepared dataset directory")->required();
    evaluate->add_option("--checkpoint", eval_checkpoint, "checkpoint path")->required();
    evaluate->add_option("--split", eval_split, "test or valid")
        ->check(CLI::IsMember({"test", "valid"}));

    // sweep
    auto* sweep = app.add_subcommand("sweep", "grid sweep over variants, dims and layers");
    CommonFlags sweep_flags;
    std::string sweep_data, sweep_out;
    sweep_flags.add_to(*sweep, true);
    sweep->add_option("--data", sweep_data, "prepared dataset directory")->required();
    sweep->add_option("--out", sweep_out, "output directory (sweep.csv, sweep.json)")->required();

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) {
        const std::string cfg = synth_flags.merged().dump();
        const dgsr_status rc = dgsr_synth(cfg.c_str(), synth_out.c_str());
        if (rc != DGSR_OK) return fail(rc);
        std::cout << "wrote " << synth_out << '\n';
        return 0;
    }

    if (prepare->parsed()) {
        OwnedString stats;
        const dgsr_status rc = dgsr_prepare(prepare_input.c_str(), min_seq_len, min_item_freq,
                                            no_holdout ? 0 : 1, prepare_out.c_str(), &stats.value);
        if (rc != DGSR_OK) return fail(rc);
        std::cout << stats.value << '\n';
        return 0;
    }

    dgsr_dataset* dataset = nullptr;
    const std::string data_dir = train->parsed() ? train_data : evaluate->parsed() ? eval_data : sweep_data;
    if (const dgsr_status rc = dgsr_dataset_open(data_dir.c_str(), &dataset); rc != DGSR_OK) {
        return fail(rc);
    }

    int exit_code = 0;
    if (train->parsed()) {
        std::filesystem::create_directories(train_out);
        const std::string checkpoint = (std::filesystem::path(train_out) / "checkpoint.bin").string();
        const std::string history = (std::filesystem::path(train_out) / "history.jsonl").string();
        const std::string cfg = train_flags.merged().dump();
        OwnedString summary;
        const dgsr_status rc =
            dgsr_train(dataset, cfg.c_str(), checkpoint.c_str(), history.c_str(), &summary.value);
        if (rc != DGSR_OK) {
            exit_code = fail(rc);
        } else {
            std::cout << summary.value << '\n';
        }
    } else if (evaluate->parsed()) {
        dgsr_model* model = nullptr;
        dgsr_status rc = dgsr_model_open(eval_checkpoint.c_str(), &model);
        if (rc == DGSR_OK) {
            OwnedString report;
            const std::string cfg = eval_flags.merged().dump();
            rc = dgsr_evaluate(model, dataset, eval_split.c_str(), cfg.c_str(), &report.value);
            if (rc == DGSR_OK) std::cout << report.value << '\n';
            dgsr_model_close(model);
        }
        if (rc != DGSR_OK) exit_code = fail(rc);
    } else if (sweep->parsed()) {
        OwnedString table;
        const std::string cfg = sweep_flags.merged().dump();
        const dgsr_status rc = dgsr_sweep(dataset, cfg.c_str(), sweep_out.c_str(), &table.value);
        if (rc != DGSR_OK) {
            exit_code = fail(rc);
        } else {
            std::cout << table.value << '\n';
        }
    }

    dgsr_dataset_close(dataset);
    return exit_code;
}
