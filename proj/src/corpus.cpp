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

#include "corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace dgsr {

namespace {

struct RawEvent {
    std::string seq, user, item;
    std::int64_t timestamp;
};

std::int64_t parse_int64(std::string_view field, std::size_t line_no) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::parse,
                    "line " + std::to_string(line_no) + ": bad integer field '" + std::string(field) + "'");
    }
    return value;
}

std::vector<RawEvent> parse_events(std::istream& input) {
    std::vector<RawEvent> raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<std::string_view, 4> fields;
        std::string_view rest = line;
        for (int f = 0; f < 4; ++f) {
            auto tab = rest.find('\t');
            if (f < 3) {
                if (tab == std::string_view::npos) {
                    throw Error(ErrorCode::parse,
                                "line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
                }
                fields[f] = rest.substr(0, tab);
                rest = rest.substr(tab + 1);
            } else {
                if (tab != std::string_view::npos) {
                    throw Error(ErrorCode::parse,
                                "line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
                }
                fields[f] = rest;
            }
        }
        if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
            throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": empty id field");
        }
        raw.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2]),
                       parse_int64(fields[3], line_no)});
    }
    return raw;
}

std::int32_t intern(std::unordered_map<std::string, std::int32_t>& map, std::vector<std::string>& ids,
                    const std::string& raw) {
    auto [it, inserted] = map.emplace(raw, static_cast<std::int32_t>(ids.size()));
    if (inserted) ids.push_back(raw);
    return it->second;
}

}  // namespace

std::int64_t SequenceDataset::action_count() const {
    std::int64_t n = 0;
    for (const auto& s : sequences) n += static_cast<std::int64_t>(s.size());
    return n;
}

InteractionLog ingest(std::istream& input, int min_seq_len, int min_item_freq) {
    if (min_seq_len < 2) {
        throw Error(ErrorCode::invalid_argument, "min_seq_len must be >= 2");
    }
    std::vector<RawEvent> raw = parse_events(input);

    std::unordered_map<std::string, std::int64_t> item_freq;
    for (const auto& e : raw) ++item_freq[e.item];

    std::unordered_map<std::string, std::int64_t> seq_len;
    for (const auto& e : raw) {
        if (item_freq[e.item] >= min_item_freq) ++seq_len[e.seq];
    }

    InteractionLog log;
    std::unordered_map<std::string, std::int32_t> seq_map, user_map, item_map;
    for (const auto& e : raw) {
        if (item_freq[e.item] < min_item_freq) continue;
        if (seq_len[e.seq] < min_seq_len) continue;
        Event ev;
        ev.seq = intern(seq_map, log.sequence_ids, e.seq);
        ev.user = intern(user_map, log.user_ids, e.user);
        ev.item = intern(item_map, log.item_ids, e.item);
        ev.timestamp = e.timestamp;
        if (static_cast<std::size_t>(ev.seq) == log.sequence_user.size()) {
            log.sequence_user.push_back(ev.user);
        } else if (log.sequence_user[ev.seq] != ev.user) {
            throw Error(ErrorCode::parse, "sequence '" + e.seq + "' maps to multiple users");
        }
        log.events.push_back(ev);
    }
    if (log.events.empty()) {
        throw Error(ErrorCode::empty_corpus, "no events survive filtering");
    }
    log.sequence_count = static_cast<std::int32_t>(log.sequence_ids.size());
    log.user_count = static_cast<std::int32_t>(log.user_ids.size());
    log.item_count = static_cast<std::int32_t>(log.item_ids.size());

    // Within each sequence, order by non-decreasing timestamp keeping input
    // order on ties; sequences themselves stay in first-appearance order.
    std::stable_sort(log.events.begin(), log.events.end(), [](const Event& a, const Event& b) {
        if (a.seq != b.seq) return a.seq < b.seq;
        return a.timestamp < b.timestamp;
    });
    return log;
}

InteractionLog ingest_file(const std::string& path, int min_seq_len, int min_item_freq) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
    try {
        return ingest(in, min_seq_len, min_item_freq);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::parse) throw Error(ErrorCode::parse, path + ": " + e.what());
        throw;
    }
}

SequenceDataset build_splits(const InteractionLog& log, int min_seq_len, bool holdout) {
    SequenceDataset ds;
    ds.user_count = log.user_count;
    ds.item_count = log.item_count;
    ds.min_seq_len = min_seq_len;
    ds.sequence_user = log.sequence_user;
    ds.sequences.resize(log.sequence_count);
    for (const auto& e : log.events) ds.sequences[e.seq].push_back(e.item);

    ds.user_items.resize(log.user_count);
    ds.item_train_count.assign(log.item_count, 0);

    for (std::int32_t s = 0; s < log.sequence_count; ++s) {
        const auto& seq = ds.sequences[s];
        const std::int32_t u = ds.sequence_user[s];
        if (holdout && static_cast<int>(seq.size()) < std::max(min_seq_len, 3)) {
            throw Error(ErrorCode::invalid_argument,
                        "sequence " + log.sequence_ids[s] + " shorter than " +
                            std::to_string(std::max(min_seq_len, 3)) + " after filtering");
        }
        for (std::int32_t item : seq) ds.user_items[u].push_back(item);

        const std::size_t len = seq.size();
        if (!holdout) {
            for (std::size_t t = 0; t + 1 < len; ++t) ds.train_triplets.push_back({u, seq[t], seq[t + 1]});
            for (std::int32_t item : seq) ++ds.item_train_count[item];
            continue;
        }
        ds.test_triplets.push_back({u, seq[len - 2], seq[len - 1]});
        ds.valid_triplets.push_back({u, seq[len - 3], seq[len - 2]});
        for (std::size_t t = 0; t + 3 < len; ++t) ds.train_triplets.push_back({u, seq[t], seq[t + 1]});
        // Training prefix excludes the valid and test targets.
        for (std::size_t t = 0; t + 2 < len; ++t) ++ds.item_train_count[seq[t]];
    }

    for (auto& items : ds.user_items) {
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
    }
    return ds;
}

InteractionLog sample_sequences(const InteractionLog& log, std::int32_t k, std::uint64_t seed) {
    if (k <= 0 || k > log.sequence_count) {
        throw Error(ErrorCode::invalid_argument, "sample size out of range");
    }
    std::vector<std::int32_t> order(log.sequence_count);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<char> keep(log.sequence_count, 0);
    for (std::int32_t i = 0; i < k; ++i) keep[order[i]] = 1;

    // Rewrite the kept events in canonical text form and re-ingest so dense
    // ids are reassigned consistently with a fresh ingest of the same data.
    std::ostringstream buf;
    for (const auto& e : log.events) {
        if (!keep[e.seq]) continue;
        buf << log.sequence_ids[e.seq] << '\t' << log.user_ids[e.user] << '\t' << log.item_ids[e.item] << '\t'
            << e.timestamp << '\n';
    }
    std::istringstream in(buf.str());
    return ingest(in, 2, 1);
}

void write_events(const InteractionLog& log, std::ostream& out) {
    for (const auto& e : log.events) {
        out << log.sequence_ids[e.seq] << '\t' << log.user_ids[e.user] << '\t' << log.item_ids[e.item] << '\t'
            << e.timestamp << '\n';
    }
}

void write_triplets(const std::vector<Triplet>& triplets, std::ostream& out) {
    for (const auto& t : triplets) out << t.user << '\t' << t.anchor << '\t' << t.target << '\n';
}

std::vector<Triplet> read_triplets(std::istream& in) {
    std::vector<Triplet> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Triplet t;
        if (std::sscanf(line.c_str(), "%d\t%d\t%d", &t.user, &t.anchor, &t.target) != 3) {
            throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": bad triplet line");
        }
        out.push_back(t);
    }
    return out;
}

void write_vocab(const std::vector<std::string>& ids, std::ostream& out) {
    for (std::size_t i = 0; i < ids.size(); ++i) out << i << '\t' << ids[i] << '\n';
}

namespace {

void write_file(const std::filesystem::path& path, const auto& writer) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    writer(out);
}

}  // namespace

void write_prepared_dir(const InteractionLog& log, const SequenceDataset& dataset,
                        int min_seq_len, int min_item_freq, bool holdout, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_file(dir / "events.tsv", [&](std::ostream& o) { write_events(log, o); });
    write_file(dir / "train.tsv", [&](std::ostream& o) { write_triplets(dataset.train_triplets, o); });
    write_file(dir / "valid.tsv", [&](std::ostream& o) { write_triplets(dataset.valid_triplets, o); });
    write_file(dir / "test.tsv", [&](std::ostream& o) { write_triplets(dataset.test_triplets, o); });
    write_file(dir / "vocab_users.tsv", [&](std::ostream& o) { write_vocab(log.user_ids, o); });
    write_file(dir / "vocab_items.tsv", [&](std::ostream& o) { write_vocab(log.item_ids, o); });

    nlohmann::json meta{
        {"min_seq_len", min_seq_len},
        {"min_item_freq", min_item_freq},
        {"holdout", holdout},
        {"sequence_count", log.sequence_count},
        {"user_count", log.user_count},
        {"item_count", log.item_count},
        {"action_count", dataset.action_count()},
        {"train_triplets", dataset.train_triplets.size()},
        {"valid_triplets", dataset.valid_triplets.size()},
        {"test_triplets", dataset.test_triplets.size()},
    };
    write_file(dir / "dataset.json", [&](std::ostream& o) { o << meta.dump(2) << '\n'; });
}

PreparedData load_prepared_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    std::ifstream meta_in(root / "dataset.json");
    if (!meta_in) throw Error(ErrorCode::io, "cannot open '" + (root / "dataset.json").string() + "'");
    nlohmann::json meta = nlohmann::json::parse(meta_in, nullptr, true);

    PreparedData data;
    data.min_seq_len = meta.at("min_seq_len").get<int>();
    data.min_item_freq = meta.at("min_item_freq").get<int>();
    data.holdout = meta.value("holdout", true);
    // events.tsv is already filtered; re-ingesting with no-op filters
    // reassigns the same dense ids (first-appearance order is preserved).
    data.log = ingest_file((root / "events.tsv").string(), data.min_seq_len, 1);
    data.dataset = build_splits(data.log, data.min_seq_len, data.holdout);
    return data;
}

}  // namespace dgsr
