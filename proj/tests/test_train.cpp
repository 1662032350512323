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

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "synth.hpp"
#include "test_oracles.hpp"
#include "train.hpp"

using namespace dgsr;

namespace {

constexpr double kLn2 = 0.6931471805599453;

struct FdSetup {
    EmbeddingState state;
    NormalizedBigraph ui;
    NormalizedBigraph ii;
    std::vector<Quadruple> batch;
};

FdSetup make_fd_setup(std::uint64_t seed) {
    FdSetup s;
    s.state = init_embeddings(4, 6, 3, seed);
    std::mt19937_64 rng(seed + 100);
    s.ui = oracle::random_bigraph(rng, 4, 6, 0.4);
    s.ii = oracle::random_bigraph(rng, 6, 6, 0.3);
    s.batch = {{0, 1, 2, 4}, {1, 0, 3, 5}, {3, 5, 0, 2}, {2, 2, 4, 1}};
    return s;
}

// Central finite differences of batch_loss over every parameter, compared
// against the analytic gradient.
void check_gradients_fd(FdSetup& s, const VariantConfig& variant, double reg_lambda) {
    TableGradients grads;
    const double loss =
        batch_gradients(s.state, s.ui, s.ii, s.batch, variant, reg_lambda, grads);
    CHECK(loss == doctest::Approx(batch_loss(s.state, s.ui, s.ii, s.batch, variant, reg_lambda))
                      .epsilon(1e-12));

    const double h = 1e-5;
    Matrix* tables[] = {&s.state.user_emb, &s.state.item_ui_emb, &s.state.anchor_emb,
                        &s.state.item_ii_emb};
    const Matrix* grad_tables[] = {&grads.user_emb, &grads.item_ui_emb, &grads.anchor_emb,
                                   &grads.item_ii_emb};
    for (int t = 0; t < 4; ++t) {
        for (std::size_t i = 0; i < tables[t]->data().size(); ++i) {
            double& p = tables[t]->data()[i];
            const double saved = p;
            p = saved + h;
            const double up = batch_loss(s.state, s.ui, s.ii, s.batch, variant, reg_lambda);
            p = saved - h;
            const double down = batch_loss(s.state, s.ui, s.ii, s.batch, variant, reg_lambda);
            p = saved;
            const double fd = (up - down) / (2.0 * h);
            const double analytic = grad_tables[t]->data()[i];
            const double tol = 1e-6 + 1e-4 * std::max(std::abs(fd), std::abs(analytic));
            CHECK(std::abs(fd - analytic) <= tol);
        }
    }
}

}  // namespace

TEST_CASE("bpr loss reference values") {
    CHECK(bpr_loss(0.0, 0.0) == doctest::Approx(kLn2).epsilon(1e-12));
    // -ln sigmoid(1)
    CHECK(bpr_loss(1.0, 0.0) == doctest::Approx(0.3132616875182228).epsilon(1e-12));
    CHECK(bpr_loss(0.0, 1.0) == doctest::Approx(1.3132616875182228).epsilon(1e-12));
    // saturated tails stay finite and sane
    CHECK(bpr_loss(40.0, 0.0) == doctest::Approx(std::exp(-40.0)).epsilon(1e-6));
    CHECK(bpr_loss(0.0, 40.0) == doctest::Approx(40.0).epsilon(1e-10));
    CHECK(std::isfinite(bpr_loss(-700.0, 700.0)));
    CHECK(std::isfinite(bpr_loss(700.0, -700.0)));
}

TEST_CASE("swapping positive and negative never helps on average") {
    // Convexity of softplus: bpr(a,b) + bpr(b,a) >= 2 ln 2.
    std::mt19937_64 rng(17);
    std::normal_distribution<double> dist(0.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const double a = dist(rng), b = dist(rng);
        CHECK(bpr_loss(a, b) + bpr_loss(b, a) >= 2.0 * kLn2 - 1e-12);
    }
    CHECK(bpr_loss(1.5, 1.5) + bpr_loss(1.5, 1.5) == doctest::Approx(2.0 * kLn2).epsilon(1e-12));
}

TEST_CASE("sample_negative avoids the user's items") {
    std::mt19937_64 rng(5);
    const std::vector<std::int32_t> items = {1, 3, 4};
    for (int i = 0; i < 1000; ++i) {
        const std::int32_t j = sample_negative(rng, items, 6);
        CHECK((j == 0 || j == 2 || j == 5));
    }
}

TEST_CASE("sample_negative with a single admissible item is forced") {
    std::mt19937_64 rng(6);
    const std::vector<std::int32_t> items = {0, 2};
    for (int i = 0; i < 50; ++i) CHECK(sample_negative(rng, items, 3) == 1);
}

TEST_CASE("sample_negative fails when no item is admissible") {
    std::mt19937_64 rng(7);
    const std::vector<std::int32_t> items = {0, 1, 2};
    try {
        sample_negative(rng, items, 3);
        FAIL("expected an unsampleable error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::unsampleable);
    }
}

TEST_CASE("sample_negative is uniform over the admissible pool") {
    std::mt19937_64 rng(8);
    const std::vector<std::int32_t> items = {1, 3};
    const int n = 80000;
    std::vector<int> counts(10, 0);
    for (int i = 0; i < n; ++i) ++counts[sample_negative(rng, items, 10)];
    CHECK(counts[1] == 0);
    CHECK(counts[3] == 0);
    const double expected = n / 8.0;
    const double sd = std::sqrt(n * (1.0 / 8.0) * (7.0 / 8.0));
    for (int j = 0; j < 10; ++j) {
        if (j == 1 || j == 3) continue;
        CHECK(std::abs(counts[j] - expected) < 5.0 * sd);
    }
}

TEST_CASE("single-example gradient matches the closed form (no propagation)") {
    EmbeddingState state = init_embeddings(2, 4, 3, 9);
    const NormalizedBigraph ui = NormalizedBigraph::build({}, 2, 4);
    const NormalizedBigraph ii = NormalizedBigraph::build({}, 4, 4);
    const VariantConfig v = parse_variant("fpmc", 0, 0);
    const Quadruple q{1, 0, 2, 3};
    TableGradients grads;
    const double loss = batch_gradients(state, ui, ii, std::vector<Quadruple>{q}, v, 0.0, grads);

    const double y_pos = dot(state.user_emb.row(1), state.item_ui_emb.row(2)) +
                         dot(state.anchor_emb.row(0), state.item_ii_emb.row(2));
    const double y_neg = dot(state.user_emb.row(1), state.item_ui_emb.row(3)) +
                         dot(state.anchor_emb.row(0), state.item_ii_emb.row(3));
    const double m = y_pos - y_neg;
    CHECK(loss == doctest::Approx(bpr_loss(y_pos, y_neg)).epsilon(1e-14));
    const double g = -1.0 / (1.0 + std::exp(m));  // -sigmoid(-m)
    for (int k = 0; k < 3; ++k) {
        CHECK(grads.user_emb(1, k) ==
              doctest::Approx(g * (state.item_ui_emb(2, k) - state.item_ui_emb(3, k))).epsilon(1e-12));
        CHECK(grads.item_ui_emb(2, k) == doctest::Approx(g * state.user_emb(1, k)).epsilon(1e-12));
        CHECK(grads.item_ui_emb(3, k) == doctest::Approx(-g * state.user_emb(1, k)).epsilon(1e-12));
        CHECK(grads.anchor_emb(0, k) ==
              doctest::Approx(g * (state.item_ii_emb(2, k) - state.item_ii_emb(3, k))).epsilon(1e-12));
        CHECK(grads.item_ii_emb(2, k) == doctest::Approx(g * state.anchor_emb(0, k)).epsilon(1e-12));
        CHECK(grads.item_ii_emb(3, k) == doctest::Approx(-g * state.anchor_emb(0, k)).epsilon(1e-12));
        // untouched rows stay zero
        CHECK(grads.user_emb(0, k) == 0.0);
        CHECK(grads.item_ui_emb(0, k) == 0.0);
        CHECK(grads.anchor_emb(1, k) == 0.0);
    }
}

TEST_CASE("analytic gradients match finite differences") {
    SUBCASE("interaction term only") {
        FdSetup s = make_fd_setup(1);
        check_gradients_fd(s, parse_variant("mf", 0, 0), 0.0);
    }
    SUBCASE("transition term only") {
        FdSetup s = make_fd_setup(2);
        check_gradients_fd(s, parse_variant("fmc", 0, 0), 0.0);
    }
    SUBCASE("both terms, no propagation") {
        FdSetup s = make_fd_setup(3);
        check_gradients_fd(s, parse_variant("fpmc", 0, 0), 0.0);
    }
    SUBCASE("both terms, one layer each") {
        FdSetup s = make_fd_setup(4);
        check_gradients_fd(s, parse_variant("dgsr", 1, 1), 0.0);
    }
    SUBCASE("both terms, two layers each") {
        FdSetup s = make_fd_setup(5);
        check_gradients_fd(s, parse_variant("dgsr", 2, 2), 0.0);
    }
    SUBCASE("asymmetric layer counts") {
        FdSetup s = make_fd_setup(6);
        check_gradients_fd(s, parse_variant("dgsr", 2, 1), 0.0);
    }
    SUBCASE("with regularization") {
        FdSetup s = make_fd_setup(7);
        check_gradients_fd(s, parse_variant("dgsr", 1, 2), 1e-3);
    }
    SUBCASE("regularization without propagation") {
        FdSetup s = make_fd_setup(8);
        check_gradients_fd(s, parse_variant("fpmc", 0, 0), 1e-2);
    }
}

TEST_CASE("regularization counts a row once per touch") {
    // The same quadruple twice must double the penalty.
    FdSetup s = make_fd_setup(10);
    const VariantConfig v = parse_variant("fpmc", 0, 0);
    const std::vector<Quadruple> once = {s.batch[0]};
    const std::vector<Quadruple> twice = {s.batch[0], s.batch[0]};
    const double base = batch_loss(s.state, s.ui, s.ii, once, v, 0.0);
    const double reg1 = batch_loss(s.state, s.ui, s.ii, once, v, 1e-2) - base;
    const double reg2 = batch_loss(s.state, s.ui, s.ii, twice, v, 1e-2) -
                        batch_loss(s.state, s.ui, s.ii, twice, v, 0.0);
    CHECK(reg2 == doctest::Approx(2.0 * reg1).epsilon(1e-10));
}

TEST_CASE("an sgd step reduces the batch loss") {
    FdSetup s = make_fd_setup(11);
    TrainConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.reg_lambda = 0.0;
    cfg.dim = 3;
    cfg.variant = parse_variant("dgsr", 1, 1);
    const double before = batch_loss(s.state, s.ui, s.ii, s.batch, cfg.variant, 0.0);
    const double returned = step(s.state, s.ui, s.ii, s.batch, cfg);
    CHECK(returned == doctest::Approx(before).epsilon(1e-12));
    const double after = batch_loss(s.state, s.ui, s.ii, s.batch, cfg.variant, 0.0);
    CHECK(after < before);
}

TEST_CASE("empty batch is rejected") {
    FdSetup s = make_fd_setup(12);
    TableGradients grads;
    CHECK_THROWS_AS(batch_loss(s.state, s.ui, s.ii, {}, parse_variant("fpmc", 0, 0), 0.0), Error);
    CHECK_THROWS_AS(
        batch_gradients(s.state, s.ui, s.ii, {}, parse_variant("fpmc", 0, 0), 0.0, grads), Error);
}

namespace {

SequenceDataset make_synth_dataset(std::uint64_t seed, std::int32_t users = 60, std::int32_t items = 40) {
    SynthConfig cfg;
    cfg.n_users = users;
    cfg.n_items = items;
    cfg.seq_len_min = 8;
    cfg.seq_len_max = 12;
    cfg.seed = seed;
    std::ostringstream buf;
    generate(cfg, buf);
    std::istringstream in(buf.str());
    return build_splits(ingest(in, 5, 1), 5);
}

}  // namespace

TEST_CASE("fit with zero epochs returns the seeded initialization") {
    const SequenceDataset ds = make_synth_dataset(21);
    const NormalizedBigraph ui = build_ui_graph(ds.train_triplets, ds.valid_triplets, ds.user_count,
                                                ds.item_count);
    const NormalizedBigraph ii = build_ii_graph(ds.train_triplets, ds.item_count);
    TrainConfig cfg;
    cfg.max_epochs = 0;
    cfg.dim = 4;
    cfg.seed = 3;
    cfg.variant = parse_variant("fpmc", 0, 0);
    const FitResult r = fit(ds, ui, ii, cfg);
    CHECK(r.history.empty());
    CHECK(r.best_epoch == -1);
    const EmbeddingState init = init_embeddings(ds.user_count, ds.item_count, 4, 3);
    CHECK(r.best_state.user_emb == init.user_emb);
    CHECK(r.best_state.item_ii_emb == init.item_ii_emb);
}

TEST_CASE("learning rate zero with no regularization changes nothing") {
    const SequenceDataset ds = make_synth_dataset(22, 30, 25);
    const NormalizedBigraph ui = build_ui_graph(ds.train_triplets, ds.valid_triplets, ds.user_count,
                                                ds.item_count);
    const NormalizedBigraph ii = build_ii_graph(ds.train_triplets, ds.item_count);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.reg_lambda = 0.0;
    cfg.max_epochs = 3;
    cfg.dim = 4;
    cfg.seed = 4;
    cfg.variant = parse_variant("dgsr", 1, 1);
    cfg.valid_eval.negatives = 10;
    const FitResult r = fit(ds, ui, ii, cfg);
    const EmbeddingState init = init_embeddings(ds.user_count, ds.item_count, 4, 4);
    CHECK(r.best_state.user_emb == init.user_emb);
    CHECK(r.best_state.item_ui_emb == init.item_ui_emb);
    CHECK(r.best_state.anchor_emb == init.anchor_emb);
    CHECK(r.best_state.item_ii_emb == init.item_ii_emb);
    // loss of an untrained model sits at ln 2 up to initialization noise
    CHECK(r.history.back().train_loss == doctest::Approx(kLn2).epsilon(1e-3));
}

TEST_CASE("fit is deterministic in the seed") {
    const SequenceDataset ds = make_synth_dataset(23, 40, 30);
    const NormalizedBigraph ui = build_ui_graph(ds.train_triplets, ds.valid_triplets, ds.user_count,
                                                ds.item_count);
    const NormalizedBigraph ii = build_ii_graph(ds.train_triplets, ds.item_count);
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.batch_size = 64;
    cfg.max_epochs = 4;
    cfg.dim = 5;
    cfg.seed = 12;
    cfg.variant = parse_variant("dgsr", 1, 1);
    cfg.valid_eval.negatives = 15;
    const FitResult a = fit(ds, ui, ii, cfg);
    const FitResult b = fit(ds, ui, ii, cfg);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e) {
        CHECK(a.history[e].train_loss == b.history[e].train_loss);
        CHECK(a.history[e].valid_ndcg == b.history[e].valid_ndcg);
    }
    CHECK(a.best_epoch == b.best_epoch);
    CHECK(a.best_state.user_emb == b.best_state.user_emb);

    cfg.seed = 13;
    const FitResult c = fit(ds, ui, ii, cfg);
    CHECK(a.history.front().train_loss != c.history.front().train_loss);
}

TEST_CASE("training pushes the loss below the random-guess level") {
    SynthConfig synth;
    synth.n_users = 80;
    synth.n_items = 40;
    synth.seq_len_min = 15;
    synth.seq_len_max = 15;
    synth.alpha_pref = 0.45;
    synth.alpha_trans = 0.45;
    synth.seed = 31;
    std::ostringstream buf;
    generate(synth, buf);
    std::istringstream in(buf.str());
    const SequenceDataset ds = build_splits(ingest(in, 5, 1), 5);
    const NormalizedBigraph ui = build_ui_graph(ds.train_triplets, ds.valid_triplets, ds.user_count,
                                                ds.item_count);
    const NormalizedBigraph ii = build_ii_graph(ds.train_triplets, ds.item_count);
    TrainConfig cfg;
    // adam escapes the near-zero initialization in a handful of epochs
    cfg.use_adam = true;
    cfg.learning_rate = 0.01;
    cfg.batch_size = 256;
    cfg.max_epochs = 30;
    cfg.dim = 8;
    cfg.seed = 1;
    cfg.variant = parse_variant("fpmc", 0, 0);
    cfg.valid_eval.negatives = 20;
    const FitResult r = fit(ds, ui, ii, cfg);
    CHECK(r.history.back().train_loss < kLn2 * 0.9);
    CHECK(r.history.back().train_loss < r.history.front().train_loss);
}

TEST_CASE("history serializes as one json object per line") {
    std::vector<EpochRecord> history(2);
    history[0] = {0, 0.7, 0.1, 0.05, 0.08, 0};
    history[1] = {1, 0.6, 0.2, 0.10, 0.15, 0};
    std::ostringstream out;
    write_history(history, out);
    std::istringstream in(out.str());
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        const auto doc = nlohmann::json::parse(line);
        CHECK(doc.at("epoch") == rows);
        CHECK(doc.at("train_loss").is_number());
        CHECK(doc.at("valid_ndcg").is_number());
        CHECK(doc.at("wall_time_ms") == 0);
        ++rows;
    }
    CHECK(rows == 2);
}
