#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace emoxgen::tok {

// Subword vocabulary with wordpiece-style continuation pieces ("##x").
// Ids 0-3 are reserved for [PAD], [UNK], [CLS], [SEP].
struct Vocab {
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kCls = 2;
    static constexpr int kSep = 3;

    std::vector<std::string> tokens;
    std::unordered_map<std::string, int> ids;
    size_t max_token_chars = 1;

    int size() const { return static_cast<int>(tokens.size()); }
    int id_of(const std::string& token) const {
        auto it = ids.find(token);
        return it == ids.end() ? -1 : it->second;
    }

    void save(const std::string& path) const;
    static Vocab load(const std::string& path);
};

// Greedy frequency-based subword vocabulary of at most `size` entries.
// Deterministic for a given corpus; lowercases input.
Vocab train_vocab(const std::vector<std::string>& corpus, size_t size);

// [CLS] pieces... [SEP], right-truncated to max_len with both specials kept.
// Unknown character spans collapse to a single [UNK]. Total on any string.
std::vector<int> encode(const std::string& text, const Vocab& vocab, size_t max_len);

std::string decode(const std::vector<int>& ids, const Vocab& vocab);

// Lowercased, whitespace-normalized view of a string; decode(encode(x))
// equals normalize(x) whenever every piece of x is in-vocabulary.
std::string normalize(const std::string& text);

}  // namespace emoxgen::tok
