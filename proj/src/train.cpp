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

#include "train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "error.hpp"

namespace dgsr {

void TrainConfig::validate() const {
    // 0 is admitted so the "learning rate 0 is a no-op" contract stays testable.
    if (learning_rate < 0.0) throw Error(ErrorCode::invalid_argument, "learning_rate must be >= 0");
    if (batch_size < 1) throw Error(ErrorCode::invalid_argument, "batch_size must be >= 1");
    if (reg_lambda < 0.0) throw Error(ErrorCode::invalid_argument, "reg_lambda must be >= 0");
    if (max_epochs < 0) throw Error(ErrorCode::invalid_argument, "max_epochs must be >= 0");
    if (dim < 1) throw Error(ErrorCode::invalid_argument, "dim must be >= 1");
    variant.validate();
}

std::int32_t sample_negative(std::mt19937_64& rng, std::span<const std::int32_t> user_items_sorted,
                             std::int32_t item_count) {
    if (static_cast<std::int64_t>(user_items_sorted.size()) >= item_count) {
        throw Error(ErrorCode::unsampleable, "user interacted with every item");
    }
    std::uniform_int_distribution<std::int32_t> pick(0, item_count - 1);
    for (;;) {
        const std::int32_t j = pick(rng);
        if (!std::binary_search(user_items_sorted.begin(), user_items_sorted.end(), j)) return j;
    }
}

double bpr_loss(double y_pos, double y_neg) {
    const double margin = y_pos - y_neg;
    // softplus(-margin), stable on both tails
    if (margin > 0.0) return std::log1p(std::exp(-margin));
    return -margin + std::log1p(std::exp(margin));
}

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double regularization(const EmbeddingState& state, std::span<const Quadruple> batch,
                      const VariantConfig& variant, double reg_lambda) {
    if (reg_lambda == 0.0) return 0.0;
    double reg = 0.0;
    for (const auto& q : batch) {
        if (variant.use_ui_term) {
            reg += squared_norm(state.user_emb.row(q.user));
            reg += squared_norm(state.item_ui_emb.row(q.positive));
            reg += squared_norm(state.item_ui_emb.row(q.negative));
        }
        if (variant.use_ii_term) {
            reg += squared_norm(state.anchor_emb.row(q.anchor));
            reg += squared_norm(state.item_ii_emb.row(q.positive));
            reg += squared_norm(state.item_ii_emb.row(q.negative));
        }
    }
    return reg_lambda * reg;
}

double gradients_impl(const EmbeddingState& state, const NormalizedBigraph& ui_graph,
                      const NormalizedBigraph& ii_graph, std::span<const Quadruple> batch,
                      const VariantConfig& variant, double reg_lambda, TableGradients& grads,
                      const PropagatedState* cached_prop) {
    if (batch.empty()) throw Error(ErrorCode::invalid_argument, "empty batch");
    PropagatedState local;
    const PropagatedState* prop = cached_prop;
    if (prop == nullptr) {
        local = forward(state, ui_graph, ii_graph, variant);
        prop = &local;
    }

    grads.user_emb = Matrix(state.user_emb.rows(), state.dim);
    grads.item_ui_emb = Matrix(state.item_ui_emb.rows(), state.dim);
    grads.anchor_emb = Matrix(state.anchor_emb.rows(), state.dim);
    grads.item_ii_emb = Matrix(state.item_ii_emb.rows(), state.dim);
    Matrix g_user(state.user_emb.rows(), state.dim);
    Matrix g_item_ui(state.item_ui_emb.rows(), state.dim);
    Matrix g_anchor(state.anchor_emb.rows(), state.dim);
    Matrix g_item_ii(state.item_ii_emb.rows(), state.dim);

    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (const auto& q : batch) {
        const double y_pos = score(*prop, q.user, q.anchor, q.positive, variant);
        const double y_neg = score(*prop, q.user, q.anchor, q.negative, variant);
        loss += inv_batch * bpr_loss(y_pos, y_neg);
        // d/dm of softplus(-m)
        const double g = -inv_batch * sigmoid(-(y_pos - y_neg));
        const int d = state.dim;
        if (variant.use_ui_term) {
            auto eu = prop->user_emb.row(q.user);
            auto ei = prop->item_ui_emb.row(q.positive);
            auto ej = prop->item_ui_emb.row(q.negative);
            auto gu = g_user.row(q.user);
            auto gi = g_item_ui.row(q.positive);
            auto gj = g_item_ui.row(q.negative);
            for (int k = 0; k < d; ++k) {
                gu[k] += g * (ei[k] - ej[k]);
                gi[k] += g * eu[k];
                gj[k] -= g * eu[k];
            }
        }
        if (variant.use_ii_term) {
            auto el = prop->anchor_emb.row(q.anchor);
            auto ei = prop->item_ii_emb.row(q.positive);
            auto ej = prop->item_ii_emb.row(q.negative);
            auto gl = g_anchor.row(q.anchor);
            auto gi = g_item_ii.row(q.positive);
            auto gj = g_item_ii.row(q.negative);
            for (int k = 0; k < d; ++k) {
                gl[k] += g * (ei[k] - ej[k]);
                gi[k] += g * el[k];
                gj[k] -= g * el[k];
            }
        }
    }

    // Back through the linear propagation.
    if (variant.use_ui_term && variant.ui_layers > 0) {
        auto [gu, gi] = propagate_transpose(ui_graph, g_user, g_item_ui, variant.ui_layers);
        grads.user_emb = std::move(gu);
        grads.item_ui_emb = std::move(gi);
    } else {
        grads.user_emb = std::move(g_user);
        grads.item_ui_emb = std::move(g_item_ui);
    }
    if (variant.use_ii_term && variant.ii_layers > 0) {
        auto [gl, gi] = propagate_transpose(ii_graph, g_anchor, g_item_ii, variant.ii_layers);
        grads.anchor_emb = std::move(gl);
        grads.item_ii_emb = std::move(gi);
    } else {
        grads.anchor_emb = std::move(g_anchor);
        grads.item_ii_emb = std::move(g_item_ii);
    }

    // Regularization acts on the base tables directly, one term per touch.
    if (reg_lambda > 0.0) {
        const double two_lambda = 2.0 * reg_lambda;
        const int d = state.dim;
        for (const auto& q : batch) {
            if (variant.use_ui_term) {
                for (int k = 0; k < d; ++k) {
                    grads.user_emb(q.user, k) += two_lambda * state.user_emb(q.user, k);
                    grads.item_ui_emb(q.positive, k) += two_lambda * state.item_ui_emb(q.positive, k);
                    grads.item_ui_emb(q.negative, k) += two_lambda * state.item_ui_emb(q.negative, k);
                }
            }
            if (variant.use_ii_term) {
                for (int k = 0; k < d; ++k) {
                    grads.anchor_emb(q.anchor, k) += two_lambda * state.anchor_emb(q.anchor, k);
                    grads.item_ii_emb(q.positive, k) += two_lambda * state.item_ii_emb(q.positive, k);
                    grads.item_ii_emb(q.negative, k) += two_lambda * state.item_ii_emb(q.negative, k);
                }
            }
        }
    }
    loss += regularization(state, batch, variant, reg_lambda);
    if (!std::isfinite(loss)) throw Error(ErrorCode::numeric, "non-finite training loss");
    return loss;
}

}  // namespace

double batch_loss(const EmbeddingState& state, const NormalizedBigraph& ui_graph,
                  const NormalizedBigraph& ii_graph, std::span<const Quadruple> batch,
                  const VariantConfig& variant, double reg_lambda) {
    if (batch.empty()) throw Error(ErrorCode::invalid_argument, "empty batch");
    const PropagatedState prop = forward(state, ui_graph, ii_graph, variant);
    double loss = 0.0;
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    for (const auto& q : batch) {
        const double y_pos = score(prop, q.user, q.anchor, q.positive, variant);
        const double y_neg = score(prop, q.user, q.anchor, q.negative, variant);
        loss += inv_batch * bpr_loss(y_pos, y_neg);
    }
    return loss + regularization(state, batch, variant, reg_lambda);
}

double batch_gradients(const EmbeddingState& state, const NormalizedBigraph& ui_graph,
                       const NormalizedBigraph& ii_graph, std::span<const Quadruple> batch,
                       const VariantConfig& variant, double reg_lambda, TableGradients& grads) {
    return gradients_impl(state, ui_graph, ii_graph, batch, variant, reg_lambda, grads, nullptr);
}

namespace {

void sgd_update(Matrix& table, const Matrix& grad, double lr) {
    for (std::size_t i = 0; i < table.data().size(); ++i) table.data()[i] -= lr * grad.data()[i];
}

struct AdamState {
    Matrix m, v;
    void init(std::int64_t rows, std::int64_t cols) {
        m = Matrix(rows, cols);
        v = Matrix(rows, cols);
    }
};

struct AdamOptimizer {
    AdamState user, item_ui, anchor, item_ii;
    std::int64_t t = 0;

    void init(const EmbeddingState& s) {
        user.init(s.user_emb.rows(), s.dim);
        item_ui.init(s.item_ui_emb.rows(), s.dim);
        anchor.init(s.anchor_emb.rows(), s.dim);
        item_ii.init(s.item_ii_emb.rows(), s.dim);
    }

    void update_table(Matrix& table, const Matrix& grad, AdamState& st, const TrainConfig& cfg,
                      double bias1, double bias2) {
        for (std::size_t i = 0; i < table.data().size(); ++i) {
            const double g = grad.data()[i];
            double& m = st.m.data()[i];
            double& v = st.v.data()[i];
            m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
            v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g * g;
            table.data()[i] -= cfg.learning_rate * (m / bias1) / (std::sqrt(v / bias2) + cfg.adam_eps);
        }
    }

    void apply(EmbeddingState& state, const TableGradients& grads, const TrainConfig& cfg) {
        ++t;
        const double bias1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
        const double bias2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
        update_table(state.user_emb, grads.user_emb, user, cfg, bias1, bias2);
        update_table(state.item_ui_emb, grads.item_ui_emb, item_ui, cfg, bias1, bias2);
        update_table(state.anchor_emb, grads.anchor_emb, anchor, cfg, bias1, bias2);
        update_table(state.item_ii_emb, grads.item_ii_emb, item_ii, cfg, bias1, bias2);
    }
};

}  // namespace

double step(EmbeddingState& state, const NormalizedBigraph& ui_graph, const NormalizedBigraph& ii_graph,
            std::span<const Quadruple> batch, const TrainConfig& config) {
    config.validate();
    TableGradients grads;
    const double loss =
        batch_gradients(state, ui_graph, ii_graph, batch, config.variant, config.reg_lambda, grads);
    sgd_update(state.user_emb, grads.user_emb, config.learning_rate);
    sgd_update(state.item_ui_emb, grads.item_ui_emb, config.learning_rate);
    sgd_update(state.anchor_emb, grads.anchor_emb, config.learning_rate);
    sgd_update(state.item_ii_emb, grads.item_ii_emb, config.learning_rate);
    return loss;
}

FitResult fit(const SequenceDataset& dataset, const NormalizedBigraph& ui_graph,
              const NormalizedBigraph& ii_graph, const TrainConfig& config) {
    config.validate();
    if (dataset.train_triplets.empty()) {
        throw Error(ErrorCode::invalid_argument, "dataset has no training triplets");
    }

    FitResult result;
    EmbeddingState state = init_embeddings(dataset.user_count, dataset.item_count, config.dim, config.seed);
    result.best_state = state;

    std::mt19937_64 rng(config.seed);
    AdamOptimizer adam;
    if (config.use_adam) adam.init(state);

    std::vector<std::size_t> order(dataset.train_triplets.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<Quadruple> quads(order.size());

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t k = 0; k < order.size(); ++k) {
            const Triplet& t = dataset.train_triplets[order[k]];
            quads[k] = {t.user, t.anchor, t.target,
                        sample_negative(rng, dataset.user_items[t.user], dataset.item_count)};
        }

        PropagatedState cached;
        if (config.cache_propagation_per_epoch) {
            cached = forward(state, ui_graph, ii_graph, config.variant);
        }

        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < quads.size(); begin += config.batch_size) {
            const std::size_t end = std::min(begin + config.batch_size, quads.size());
            std::span<const Quadruple> batch(quads.data() + begin, end - begin);
            TableGradients grads;
            const double loss = gradients_impl(
                state, ui_graph, ii_graph, batch, config.variant, config.reg_lambda, grads,
                config.cache_propagation_per_epoch ? &cached : nullptr);
            if (config.use_adam) {
                adam.apply(state, grads, config);
            } else {
                sgd_update(state.user_emb, grads.user_emb, config.learning_rate);
                sgd_update(state.item_ui_emb, grads.item_ui_emb, config.learning_rate);
                sgd_update(state.anchor_emb, grads.anchor_emb, config.learning_rate);
                sgd_update(state.item_ii_emb, grads.item_ii_emb, config.learning_rate);
            }
            epoch_loss += loss * static_cast<double>(batch.size());
        }
        epoch_loss /= static_cast<double>(quads.size());

        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = epoch_loss;
        if (!dataset.valid_triplets.empty()) {
            const PropagatedState prop = forward(state, ui_graph, ii_graph, config.variant);
            const MetricsReport valid =
                evaluate(prop, config.variant, dataset, dataset.valid_triplets, config.valid_eval);
            record.valid_recall = valid.recall;
            record.valid_mrr = valid.mrr;
            record.valid_ndcg = valid.ndcg;
            if (result.best_epoch < 0 || valid.ndcg > result.best_valid_ndcg) {
                result.best_epoch = epoch;
                result.best_valid_ndcg = valid.ndcg;
                result.best_state = state;
            }
        }
        if (config.record_timing) {
            record.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                      std::chrono::steady_clock::now() - started)
                                      .count();
        }
        result.history.push_back(record);
    }

    if (result.best_epoch < 0) result.best_state = std::move(state);
    return result;
}

void write_history(const std::vector<EpochRecord>& history, std::ostream& out) {
    for (const auto& r : history) {
        nlohmann::ordered_json line{{"epoch", r.epoch},
                                    {"train_loss", r.train_loss},
                                    {"valid_recall", r.valid_recall},
                                    {"valid_mrr", r.valid_mrr},
                                    {"valid_ndcg", r.valid_ndcg},
                                    {"wall_time_ms", r.wall_time_ms}};
        out << line.dump() << '\n';
    }
}

}  // namespace dgsr
