#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "emoxgen/errors.hpp"
#include "emoxgen/tokenizer.hpp"

using namespace emoxgen;
using tok::Vocab;

namespace {

const std::vector<std::string> kCorpus = {
    "the quick brown fox jumps over the lazy dog",
    "the lazy dog sleeps while the quick fox runs",
    "pack my box with five dozen liquor jugs",
    "how vexingly quick daft zebras jump",
    "sphinx of black quartz judge my vow",
    "the dog and the fox and the zebra walk home",
    "quick quick quick brown brown fox fox fox",
};

}  // namespace

TEST_CASE("a dominant repeated word becomes a single token") {
    std::vector<std::string> corpus(50, "hello");
    Vocab v = tok::train_vocab(corpus, 300);
    CHECK(v.id_of("hello") >= 4);
    auto ids = tok::encode("hello", v, 16);
    REQUIRE(ids.size() == 3);
    CHECK(ids[0] == Vocab::kCls);
    CHECK(ids[1] == v.id_of("hello"));
    CHECK(ids[2] == Vocab::kSep);
}

TEST_CASE("training is deterministic") {
    Vocab a = tok::train_vocab(kCorpus, 400);
    Vocab b = tok::train_vocab(kCorpus, 400);
    CHECK(a.tokens == b.tokens);
}

TEST_CASE("empty corpus and undersized vocab are rejected") {
    CHECK_THROWS_AS(tok::train_vocab({}, 300), DataError);
    CHECK_THROWS_AS(tok::train_vocab(kCorpus, 259), ContractError);
}

TEST_CASE("specials hold ids 0-3 and no trained token shadows them") {
    Vocab v = tok::train_vocab(kCorpus, 400);
    CHECK(v.tokens[0] == "[PAD]");
    CHECK(v.tokens[1] == "[UNK]");
    CHECK(v.tokens[2] == "[CLS]");
    CHECK(v.tokens[3] == "[SEP]");
    CHECK(std::count(v.tokens.begin(), v.tokens.end(), "[UNK]") == 1);
}

TEST_CASE("entire training corpus encodes without unknowns") {
    Vocab v = tok::train_vocab(kCorpus, 400);
    for (const auto& line : kCorpus) {
        auto ids = tok::encode(line, v, 512);
        for (int id : ids) {
            CHECK(id != Vocab::kUnk);
            CHECK(id != Vocab::kPad);
            CHECK(id >= 0);
            CHECK(id < v.size());
        }
    }
}

TEST_CASE("empty string encodes to [CLS][SEP]") {
    Vocab v = tok::train_vocab(kCorpus, 300);
    CHECK(tok::encode("", v, 128) == std::vector<int>{Vocab::kCls, Vocab::kSep});
    CHECK(tok::encode("   \t \n ", v, 128) == std::vector<int>{Vocab::kCls, Vocab::kSep});
}

TEST_CASE("round-trips corpus text up to whitespace normalization") {
    Vocab v = tok::train_vocab(kCorpus, 500);
    for (const auto& line : kCorpus) {
        auto text = tok::decode(tok::encode(line, v, 512), v);
        CHECK(text == tok::normalize(line));
    }
    CHECK(tok::decode(tok::encode("  The   QUICK\tfox ", v, 512), v) == "the quick fox");
}

TEST_CASE("unknown spans collapse to a single [UNK]") {
    Vocab v = tok::train_vocab(kCorpus, 300);
    auto ids = tok::encode("fox \xF0\x9F\x98\x80\xF0\x9F\x98\x80 dog", v, 128);
    const long unks = std::count(ids.begin(), ids.end(), Vocab::kUnk);
    CHECK(unks == 1);
}

TEST_CASE("encodings never exceed max_len and keep CLS/SEP under truncation") {
    Vocab v = tok::train_vocab(kCorpus, 300);
    std::string long_text;
    for (int i = 0; i < 300; ++i) long_text += "quick brown fox ";
    for (size_t max_len : {2u, 3u, 8u, 64u, 128u}) {
        auto ids = tok::encode(long_text, v, max_len);
        CHECK(ids.size() <= max_len);
        CHECK(ids.front() == Vocab::kCls);
        CHECK(ids.back() == Vocab::kSep);
    }
}

TEST_CASE("vocab files round-trip through save/load") {
    Vocab v = tok::train_vocab(kCorpus, 400);
    auto path = std::string("/tmp/emoxgen_vocab_test.txt");
    v.save(path);
    Vocab loaded = Vocab::load(path);
    CHECK(loaded.tokens == v.tokens);
    CHECK(tok::encode("the quick fox", loaded, 32) == tok::encode("the quick fox", v, 32));
}
