/*
 * Copyright 2026 the dualgraph-rec authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C API of the dual-graph sequential recommender. All functions return
 * DGSR_OK on success; on failure dgsr_last_error() holds a message for the
 * calling thread. Strings returned through char** are heap-allocated and
 * must be released with dgsr_string_free(). Configs are JSON documents; the
 * accepted keys are documented in the README.
 */

#ifndef DGSR_H
#define DGSR_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dgsr_status {
    DGSR_OK = 0,
    DGSR_ERR_IO = 1,
    DGSR_ERR_PARSE = 2,
    DGSR_ERR_INVALID_ARGUMENT = 3,
    DGSR_ERR_EMPTY_CORPUS = 4,
    DGSR_ERR_INCOMPATIBLE = 5,
    DGSR_ERR_NUMERIC = 6,
    DGSR_ERR_UNSAMPLEABLE = 7,
    DGSR_ERR_INTERNAL = 8
} dgsr_status;

const char* dgsr_status_name(dgsr_status status);

/* Message of the last failing call on this thread; never NULL. */
const char* dgsr_last_error(void);

void dgsr_string_free(char* s);

typedef struct dgsr_dataset dgsr_dataset; /* prepared corpus + splits */
typedef struct dgsr_model dgsr_model;     /* embedding tables + variant */

/* Generates a synthetic corpus TSV from a synth config JSON. */
dgsr_status dgsr_synth(const char* config_json, const char* out_tsv_path);

/* Ingests a canonical corpus TSV, builds the splits and writes the prepared
 * directory. with_holdout=0 turns every consecutive pair into a train
 * triplet (training-graph mode; valid/test stay empty). stats_json_out
 * (optional) receives dataset statistics. */
dgsr_status dgsr_prepare(const char* input_tsv_path, int min_seq_len, int min_item_freq,
                         int with_holdout, const char* out_dir, char** stats_json_out);

dgsr_status dgsr_dataset_open(const char* prepared_dir, dgsr_dataset** dataset_out);
void dgsr_dataset_close(dgsr_dataset* dataset);
dgsr_status dgsr_dataset_stats(const dgsr_dataset* dataset, char** stats_json_out);

/* Trains per the experiment config, writes the best checkpoint and the
 * per-epoch history JSONL, and (optionally) returns a summary JSON. Empty
 * paths skip the corresponding output. */
dgsr_status dgsr_train(const dgsr_dataset* dataset, const char* config_json,
                       const char* checkpoint_path, const char* history_path, char** summary_json_out);

dgsr_status dgsr_model_open(const char* checkpoint_path, dgsr_model** model_out);
void dgsr_model_close(dgsr_model* model);
dgsr_status dgsr_model_info(const dgsr_model* model, char** info_json_out);

/* Sampled top-n evaluation on split "test" or "valid". */
dgsr_status dgsr_evaluate(const dgsr_model* model, const dgsr_dataset* dataset, const char* split,
                          const char* config_json, char** report_json_out);

/* Scores one (user, anchor, item) triplet, propagation included. */
dgsr_status dgsr_score(const dgsr_model* model, const dgsr_dataset* dataset, int32_t user,
                       int32_t anchor, int32_t item, double* score_out);

/* Grid sweep; writes sweep.csv and sweep.json into out_dir when non-empty
 * and returns the result table as JSON. */
dgsr_status dgsr_sweep(const dgsr_dataset* dataset, const char* config_json, const char* out_dir,
                       char** table_json_out);

#ifdef __cplusplus
}
#endif

#endif /* DGSR_H */
