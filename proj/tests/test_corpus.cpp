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

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "corpus.hpp"
#include "error.hpp"
#include "synth.hpp"

using namespace dgsr;

namespace {

std::string tsv(std::initializer_list<std::string> lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

InteractionLog ingest_text(const std::string& text, int min_seq_len, int min_item_freq) {
    std::istringstream in(text);
    return ingest(in, min_seq_len, min_item_freq);
}

// Fig-2-style toy: u1 = [i1, i2, i3], u2 = [i4, i1].
const std::string kToy = tsv({
    "q1\tu1\ti1\t1",
    "q1\tu1\ti2\t2",
    "q1\tu1\ti3\t3",
    "q2\tu2\ti4\t1",
    "q2\tu2\ti1\t2",
});

}  // namespace

TEST_CASE("ingest drops users shorter than min_seq_len") {
    const std::string text = tsv({
        "a\ta\tx\t1", "a\ta\ty\t2", "a\ta\tz\t3",
        "b\tb\tx\t1", "b\tb\ty\t2",
        "c\tc\tx\t1", "c\tc\ty\t2", "c\tc\tz\t3",
    });
    const InteractionLog log = ingest_text(text, 3, 1);
    CHECK(log.user_count == 2);
    CHECK(std::find(log.user_ids.begin(), log.user_ids.end(), "b") == log.user_ids.end());
}

TEST_CASE("ingest with no-op filters keeps all distinct ids") {
    const InteractionLog log = ingest_text(kToy, 2, 1);
    CHECK(log.user_count == 2);
    CHECK(log.item_count == 4);
    CHECK(log.sequence_count == 2);
    CHECK(log.events.size() == 5);
}

TEST_CASE("item below min_item_freq removed before the length filter") {
    // 20-line fixture: item "rare" appears 4 times, others at least 5.
    std::vector<std::string> lines;
    // u1: 5 commons + 2 rares interleaved -> after item filter length 5
    lines.push_back("s1\tu1\tc1\t1");
    lines.push_back("s1\tu1\trare\t2");
    lines.push_back("s1\tu1\tc2\t3");
    lines.push_back("s1\tu1\tc1\t4");
    lines.push_back("s1\tu1\trare\t5");
    lines.push_back("s1\tu1\tc2\t6");
    lines.push_back("s1\tu1\tc1\t7");
    // u2: 2 commons + 2 rares -> after filter length 2 < 3, dropped
    lines.push_back("s2\tu2\tc1\t1");
    lines.push_back("s2\tu2\trare\t2");
    lines.push_back("s2\tu2\trare\t3");
    lines.push_back("s2\tu2\tc2\t4");
    // u3: commons only
    for (int t = 1; t <= 9; ++t) lines.push_back("s3\tu3\t" + std::string(t % 2 ? "c1" : "c2") + "\t" + std::to_string(t));
    std::string text;
    for (const auto& l : lines) text += l + "\n";

    // Independent frequency count over the fixture.
    std::map<std::string, int> freq;
    for (const auto& l : lines) {
        const auto a = l.find('\t'), b = l.find('\t', l.find('\t') + 1);
        const auto c = l.find('\t', b + 1);
        ++freq[l.substr(b + 1, c - b - 1)];
    }
    CHECK(freq["rare"] == 4);
    CHECK(freq["c1"] >= 5);
    CHECK(freq["c2"] >= 5);

    const InteractionLog log = ingest_text(text, 3, 5);
    CHECK(std::find(log.item_ids.begin(), log.item_ids.end(), "rare") == log.item_ids.end());
    CHECK(std::find(log.user_ids.begin(), log.user_ids.end(), "u2") == log.user_ids.end());
    CHECK(log.user_count == 2);  // u1 (shortened to 5) and u3
    CHECK(log.item_count == 2);
}

TEST_CASE("malformed line reports its line number") {
    const std::string text = tsv({"a\ta\tx\t1", "broken line"});
    CHECK_THROWS_WITH_AS(ingest_text(text, 2, 1), doctest::Contains("line 2"), Error);
}

TEST_CASE("bad timestamp reports its line number") {
    const std::string text = tsv({"a\ta\tx\tnotanumber"});
    CHECK_THROWS_WITH_AS(ingest_text(text, 2, 1), doctest::Contains("line 1"), Error);
}

TEST_CASE("empty result after filtering raises empty-corpus") {
    const std::string text = tsv({"a\ta\tx\t1", "a\ta\ty\t2"});
    try {
        ingest_text(text, 5, 1);
        FAIL("expected empty-corpus error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::empty_corpus);
    }
}

TEST_CASE("timestamp ties keep input order") {
    const std::string text = tsv({"a\ta\tx\t7", "a\ta\ty\t7", "a\ta\tz\t7"});
    const InteractionLog log = ingest_text(text, 3, 1);
    const SequenceDataset ds = build_splits(log, 3);
    CHECK(ds.sequences[0] == std::vector<std::int32_t>{0, 1, 2});
}

TEST_CASE("split of a 5-item sequence") {
    const std::string text = tsv({
        "s\tu\ta\t1", "s\tu\tb\t2", "s\tu\tc\t3", "s\tu\td\t4", "s\tu\te\t5",
    });
    const InteractionLog log = ingest_text(text, 5, 1);
    const SequenceDataset ds = build_splits(log, 5);
    // dense ids in first-appearance order: a=0 .. e=4
    CHECK(ds.test_triplets == std::vector<Triplet>{{0, 3, 4}});
    CHECK(ds.valid_triplets == std::vector<Triplet>{{0, 2, 3}});
    CHECK(ds.train_triplets == std::vector<Triplet>{{0, 0, 1}, {0, 1, 2}});
}

TEST_CASE("split of a 3-item sequence leaves no train triplets") {
    const std::string text = tsv({"s\tu\ta\t1", "s\tu\tb\t2", "s\tu\tc\t3"});
    const SequenceDataset ds = build_splits(ingest_text(text, 3, 1), 3);
    CHECK(ds.test_triplets == std::vector<Triplet>{{0, 1, 2}});
    CHECK(ds.valid_triplets == std::vector<Triplet>{{0, 0, 1}});
    CHECK(ds.train_triplets.empty());
}

TEST_CASE("toy corpus in training-graph mode keeps all transition pairs") {
    const SequenceDataset ds = build_splits(ingest_text(kToy, 2, 1), 2, /*holdout=*/false);
    // i1=0 i2=1 i3=2 i4=3; u1=0 u2=1
    CHECK(ds.train_triplets == std::vector<Triplet>{{0, 0, 1}, {0, 1, 2}, {1, 3, 0}});
    CHECK(ds.valid_triplets.empty());
    CHECK(ds.test_triplets.empty());
}

TEST_CASE("sequence shorter than 3 rejected by the holdout split") {
    CHECK_THROWS_AS(build_splits(ingest_text(kToy, 2, 1), 2, /*holdout=*/true), Error);
}

TEST_CASE("every consecutive pair lands in exactly one split") {
    SynthConfig cfg;
    cfg.n_users = 40;
    cfg.n_items = 30;
    cfg.seq_len_min = 3;
    cfg.seq_len_max = 12;
    cfg.seed = 99;
    std::ostringstream buf;
    generate(cfg, buf);
    std::istringstream in(buf.str());
    const InteractionLog log = ingest(in, 3, 1);
    const SequenceDataset ds = build_splits(log, 3);

    std::int64_t pairs = 0;
    for (const auto& s : ds.sequences) pairs += static_cast<std::int64_t>(s.size()) - 1;
    CHECK(static_cast<std::int64_t>(ds.train_triplets.size() + ds.valid_triplets.size() +
                                    ds.test_triplets.size()) == pairs);
    CHECK(ds.valid_triplets.size() == ds.sequences.size());
    CHECK(ds.test_triplets.size() == ds.sequences.size());

    // Holdout triplets never contradict the source order: (anchor, target)
    // must appear as adjacent positions.
    auto adjacent = [&](const Triplet& t) {
        for (std::size_t s = 0; s < ds.sequences.size(); ++s) {
            if (ds.sequence_user[s] != t.user) continue;
            const auto& seq = ds.sequences[s];
            for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
                if (seq[k] == t.anchor && seq[k + 1] == t.target) return true;
            }
        }
        return false;
    };
    for (const auto& t : ds.test_triplets) CHECK(adjacent(t));
    for (const auto& t : ds.valid_triplets) CHECK(adjacent(t));
}

TEST_CASE("canonical round trip reproduces identical triplets") {
    SynthConfig cfg;
    cfg.n_users = 25;
    cfg.n_items = 20;
    cfg.seq_len_min = 4;
    cfg.seq_len_max = 9;
    cfg.seed = 5;
    std::ostringstream buf;
    generate(cfg, buf);
    std::istringstream in(buf.str());
    const InteractionLog log = ingest(in, 4, 1);
    const SequenceDataset ds = build_splits(log, 4);

    std::ostringstream round;
    write_events(log, round);
    std::istringstream in2(round.str());
    const InteractionLog log2 = ingest(in2, 4, 1);
    const SequenceDataset ds2 = build_splits(log2, 4);
    CHECK(ds.train_triplets == ds2.train_triplets);
    CHECK(ds.valid_triplets == ds2.valid_triplets);
    CHECK(ds.test_triplets == ds2.test_triplets);
}

TEST_CASE("sample_sequences is seeded and keeps exactly k sequences") {
    SynthConfig cfg;
    cfg.n_users = 30;
    cfg.n_items = 20;
    cfg.seq_len_min = 5;
    cfg.seq_len_max = 5;
    cfg.seed = 11;
    std::ostringstream buf;
    generate(cfg, buf);
    std::istringstream in(buf.str());
    const InteractionLog log = ingest(in, 5, 1);

    const InteractionLog a = sample_sequences(log, 10, 3);
    const InteractionLog b = sample_sequences(log, 10, 3);
    CHECK(a.sequence_count == 10);
    CHECK(a.sequence_ids == b.sequence_ids);
    CHECK(a.events.size() == b.events.size());

    const InteractionLog c = sample_sequences(log, 10, 4);
    CHECK(a.sequence_ids != c.sequence_ids);
}

TEST_CASE("a sequence id mapping to two users is rejected") {
    const std::string text = tsv({"s\tu1\ta\t1", "s\tu2\tb\t2"});
    CHECK_THROWS_AS(ingest_text(text, 2, 1), Error);
}
