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

#include "model.hpp"

#include <cstring>
#include <fstream>
#include <random>

#include "error.hpp"

namespace dgsr {

void VariantConfig::validate() const {
    if (!use_ui_term && !use_ii_term) {
        throw Error(ErrorCode::invalid_argument, "at least one score term must be enabled");
    }
    if (ui_layers < 0 || ii_layers < 0) {
        throw Error(ErrorCode::invalid_argument, "layer counts must be >= 0");
    }
}

std::string VariantConfig::name() const {
    if (use_ui_term && !use_ii_term) return "mf";
    if (!use_ui_term && use_ii_term) return "fmc";
    if (ui_layers == 0 && ii_layers == 0) return "fpmc";
    return "dgsr";
}

VariantConfig parse_variant(const std::string& name, int ui_layers, int ii_layers) {
    VariantConfig v;
    if (name == "mf") {
        v.use_ii_term = false;
        v.ii_layers = 0;
        v.ui_layers = ui_layers;
    } else if (name == "fmc") {
        v.use_ui_term = false;
        v.ui_layers = 0;
        v.ii_layers = ii_layers;
    } else if (name == "fpmc") {
        v.ui_layers = 0;
        v.ii_layers = 0;
    } else if (name == "dgsr") {
        v.ui_layers = ui_layers;
        v.ii_layers = ii_layers;
    } else {
        throw Error(ErrorCode::invalid_argument, "unknown variant '" + name + "'");
    }
    v.validate();
    return v;
}

EmbeddingState init_embeddings(std::int32_t user_count, std::int32_t item_count, int dim, std::uint64_t seed) {
    if (user_count <= 0 || item_count <= 0 || dim <= 0) {
        throw Error(ErrorCode::invalid_argument, "embedding table sizes must be positive");
    }
    EmbeddingState state;
    state.user_count = user_count;
    state.item_count = item_count;
    state.dim = dim;
    state.seed = seed;
    state.user_emb = Matrix(user_count, dim);
    state.item_ui_emb = Matrix(item_count, dim);
    state.anchor_emb = Matrix(item_count, dim);
    state.item_ii_emb = Matrix(item_count, dim);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 0.01);
    for (Matrix* table : {&state.user_emb, &state.item_ui_emb, &state.anchor_emb, &state.item_ii_emb}) {
        for (double& v : table->data()) v = dist(rng);
    }
    return state;
}

PropagatedState forward(const EmbeddingState& state, const NormalizedBigraph& ui_graph,
                        const NormalizedBigraph& ii_graph, const VariantConfig& variant) {
    variant.validate();
    PropagatedState prop;
    if (variant.use_ui_term && variant.ui_layers > 0) {
        auto [u, i] = propagate(ui_graph, state.user_emb, state.item_ui_emb, variant.ui_layers);
        prop.user_emb = std::move(u);
        prop.item_ui_emb = std::move(i);
    } else {
        prop.user_emb = state.user_emb;
        prop.item_ui_emb = state.item_ui_emb;
    }
    if (variant.use_ii_term && variant.ii_layers > 0) {
        auto [l, i] = propagate(ii_graph, state.anchor_emb, state.item_ii_emb, variant.ii_layers);
        prop.anchor_emb = std::move(l);
        prop.item_ii_emb = std::move(i);
    } else {
        prop.anchor_emb = state.anchor_emb;
        prop.item_ii_emb = state.item_ii_emb;
    }
    return prop;
}

double score(const PropagatedState& prop, std::int32_t user, std::int32_t anchor, std::int32_t item,
             const VariantConfig& variant) {
    if (user < 0 || user >= prop.user_emb.rows() || anchor < 0 || anchor >= prop.anchor_emb.rows() ||
        item < 0 || item >= prop.item_ui_emb.rows()) {
        throw Error(ErrorCode::invalid_argument, "score index out of range");
    }
    double y = 0.0;
    if (variant.use_ui_term) y += dot(prop.user_emb.row(user), prop.item_ui_emb.row(item));
    if (variant.use_ii_term) y += dot(prop.anchor_emb.row(anchor), prop.item_ii_emb.row(item));
    return y;
}

Matrix score_batch(const PropagatedState& prop, std::span<const std::int32_t> users,
                   std::span<const std::int32_t> anchors,
                   const std::vector<std::vector<std::int32_t>>& candidates, const VariantConfig& variant) {
    if (users.size() != anchors.size() || users.size() != candidates.size()) {
        throw Error(ErrorCode::invalid_argument, "score_batch shapes do not align");
    }
    const std::size_t width = candidates.empty() ? 0 : candidates.front().size();
    for (const auto& row : candidates) {
        if (row.size() != width) throw Error(ErrorCode::invalid_argument, "ragged candidate matrix");
    }
    Matrix out(static_cast<std::int64_t>(users.size()), static_cast<std::int64_t>(width));
    for (std::size_t b = 0; b < users.size(); ++b) {
        for (std::size_t c = 0; c < width; ++c) {
            out(static_cast<std::int64_t>(b), static_cast<std::int64_t>(c)) =
                score(prop, users[b], anchors[b], candidates[b][c], variant);
        }
    }
    return out;
}

namespace {

constexpr char kMagic[8] = {'D', 'G', 'R', 'C', 'K', 'P', '0', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

std::uint64_t read_u64(std::istream& in) {
    char buf[8];
    in.read(buf, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
}

void write_table(std::ostream& out, const Matrix& m) {
    for (double v : m.data()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        write_u64(out, bits);
    }
}

void read_table(std::istream& in, Matrix& m) {
    for (double& v : m.data()) {
        const std::uint64_t bits = read_u64(in);
        std::memcpy(&v, &bits, 8);
    }
}

}  // namespace

void save_checkpoint(const EmbeddingState& state, const VariantConfig& variant, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, static_cast<std::uint64_t>(state.user_count));
    write_u64(out, static_cast<std::uint64_t>(state.item_count));
    write_u64(out, static_cast<std::uint64_t>(state.dim));
    write_u64(out, state.seed);
    write_u64(out, (variant.use_ui_term ? 1u : 0u) | (variant.use_ii_term ? 2u : 0u));
    write_u64(out, static_cast<std::uint64_t>(variant.ui_layers));
    write_u64(out, static_cast<std::uint64_t>(variant.ii_layers));
    write_table(out, state.user_emb);
    write_table(out, state.item_ui_emb);
    write_table(out, state.anchor_emb);
    write_table(out, state.item_ii_emb);
    if (!out) throw Error(ErrorCode::io, "short write to '" + path + "'");
}

std::pair<EmbeddingState, VariantConfig> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw Error(ErrorCode::parse, "'" + path + "' is not a checkpoint file");
    }
    EmbeddingState state;
    state.user_count = static_cast<std::int32_t>(read_u64(in));
    state.item_count = static_cast<std::int32_t>(read_u64(in));
    state.dim = static_cast<int>(read_u64(in));
    state.seed = read_u64(in);
    const std::uint64_t flags = read_u64(in);
    VariantConfig variant;
    variant.use_ui_term = (flags & 1) != 0;
    variant.use_ii_term = (flags & 2) != 0;
    variant.ui_layers = static_cast<int>(read_u64(in));
    variant.ii_layers = static_cast<int>(read_u64(in));
    if (state.user_count <= 0 || state.item_count <= 0 || state.dim <= 0) {
        throw Error(ErrorCode::parse, "'" + path + "' has corrupt header");
    }
    state.user_emb = Matrix(state.user_count, state.dim);
    state.item_ui_emb = Matrix(state.item_count, state.dim);
    state.anchor_emb = Matrix(state.item_count, state.dim);
    state.item_ii_emb = Matrix(state.item_count, state.dim);
    read_table(in, state.user_emb);
    read_table(in, state.item_ui_emb);
    read_table(in, state.anchor_emb);
    read_table(in, state.item_ii_emb);
    if (!in) throw Error(ErrorCode::parse, "'" + path + "' truncated");
    variant.validate();
    return {std::move(state), variant};
}

}  // namespace dgsr
