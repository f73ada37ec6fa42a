#include "emoxgen/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "emoxgen/errors.hpp"

namespace emoxgen::tok {

namespace {

const char* kSpecials[4] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};

std::string lowercase(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> whitespace_words(const std::string& s) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) words.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

// Split a UTF-8 string into codepoint-sized chunks; malformed bytes pass
// through as single-byte chunks.
std::vector<std::string> utf8_chars(const std::string& s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        const unsigned char b = static_cast<unsigned char>(s[i]);
        size_t len = 1;
        if ((b & 0xE0) == 0xC0) len = 2;
        else if ((b & 0xF0) == 0xE0) len = 3;
        else if ((b & 0xF8) == 0xF0) len = 4;
        if (i + len > s.size()) len = 1;
        out.push_back(s.substr(i, len));
        i += len;
    }
    return out;
}

size_t char_count(const std::string& s) { return utf8_chars(s).size(); }

void index_tokens(Vocab& v) {
    v.ids.clear();
    v.max_token_chars = 1;
    for (size_t i = 0; i < v.tokens.size(); ++i) {
        v.ids.emplace(v.tokens[i], static_cast<int>(i));
        const std::string& t = v.tokens[i];
        const size_t body = t.rfind("##", 0) == 0 ? char_count(t.substr(2)) : char_count(t);
        v.max_token_chars = std::max(v.max_token_chars, body);
    }
}

}  // namespace

Vocab train_vocab(const std::vector<std::string>& corpus, size_t size) {
    if (corpus.empty()) throw DataError("train_vocab: empty corpus");
    if (size < 260) {
        throw ContractError("train_vocab: size must be >= 260, got " + std::to_string(size));
    }

    // Word frequencies over the lowercased corpus.
    std::map<std::string, long long> word_freq;
    for (const auto& line : corpus) {
        for (auto& w : whitespace_words(lowercase(line))) word_freq[w] += 1;
    }
    if (word_freq.empty()) throw DataError("train_vocab: corpus contains no words");

    // Working representation: each distinct word as its symbol sequence.
    struct Word {
        std::vector<std::string> syms;
        long long freq;
    };
    std::vector<Word> words;
    words.reserve(word_freq.size());
    std::map<std::string, long long> sym_freq;
    for (const auto& [w, f] : word_freq) {
        auto chars = utf8_chars(w);
        std::vector<std::string> syms;
        syms.reserve(chars.size());
        for (size_t i = 0; i < chars.size(); ++i) {
            syms.push_back(i == 0 ? chars[i] : "##" + chars[i]);
            sym_freq[syms.back()] += f;
        }
        words.push_back({std::move(syms), f});
    }

    Vocab vocab;
    for (const char* s : kSpecials) vocab.tokens.emplace_back(s);

    // Single symbols by descending frequency, ties alphabetical.
    std::vector<std::pair<std::string, long long>> singles(sym_freq.begin(), sym_freq.end());
    std::sort(singles.begin(), singles.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (const auto& [sym, f] : singles) {
        if (vocab.tokens.size() >= size) break;
        vocab.tokens.push_back(sym);
    }

    std::map<std::string, bool> known;
    for (const auto& t : vocab.tokens) known[t] = true;

    // Greedy merges of the most frequent adjacent pair until the budget is
    // spent or no pair repeats.
    while (vocab.tokens.size() < size) {
        std::map<std::pair<std::string, std::string>, long long> pair_freq;
        for (const auto& w : words) {
            for (size_t i = 0; i + 1 < w.syms.size(); ++i) {
                pair_freq[{w.syms[i], w.syms[i + 1]}] += w.freq;
            }
        }
        std::pair<std::string, std::string> best;
        long long best_freq = 0;
        for (const auto& [p, f] : pair_freq) {
            if (f > best_freq) {
                best = p;
                best_freq = f;
            }
        }
        if (best_freq < 2) break;
        const std::string merged =
            best.first + (best.second.rfind("##", 0) == 0 ? best.second.substr(2) : best.second);
        for (auto& w : words) {
            for (size_t i = 0; i + 1 < w.syms.size();) {
                if (w.syms[i] == best.first && w.syms[i + 1] == best.second) {
                    w.syms[i] = merged;
                    w.syms.erase(w.syms.begin() + static_cast<long>(i + 1));
                } else {
                    ++i;
                }
            }
        }
        if (!known[merged]) {
            known[merged] = true;
            vocab.tokens.push_back(merged);
        }
    }

    index_tokens(vocab);
    return vocab;
}

std::vector<int> encode(const std::string& text, const Vocab& vocab, size_t max_len) {
    if (max_len < 2) {
        throw ContractError("encode: max_len must fit [CLS] and [SEP], got " +
                            std::to_string(max_len));
    }
    std::vector<int> out{Vocab::kCls};
    const size_t budget = max_len - 2;

    for (const auto& word : whitespace_words(lowercase(text))) {
        const auto chars = utf8_chars(word);
        size_t i = 0;
        bool at_start = true;
        bool in_unknown = false;
        while (i < chars.size()) {
            const size_t max_span = std::min(chars.size() - i, vocab.max_token_chars);
            int matched = -1;
            size_t matched_len = 0;
            for (size_t span = max_span; span >= 1; --span) {
                std::string piece;
                if (!at_start) piece = "##";
                for (size_t j = 0; j < span; ++j) piece += chars[i + j];
                const int id = vocab.id_of(piece);
                if (id >= 0) {
                    matched = id;
                    matched_len = span;
                    break;
                }
            }
            if (matched >= 0) {
                out.push_back(matched);
                i += matched_len;
                at_start = false;
                in_unknown = false;
            } else {
                if (!in_unknown) out.push_back(Vocab::kUnk);
                in_unknown = true;
                ++i;
                at_start = false;
            }
        }
    }

    if (out.size() > budget + 1) out.resize(budget + 1);
    out.push_back(Vocab::kSep);
    return out;
}

std::string decode(const std::vector<int>& ids, const Vocab& vocab) {
    std::string out;
    for (int id : ids) {
        if (id == Vocab::kPad || id == Vocab::kCls || id == Vocab::kSep) continue;
        if (id < 0 || id >= vocab.size()) {
            throw IndexError("decode: id " + std::to_string(id) + " outside vocab of size " +
                             std::to_string(vocab.size()));
        }
        const std::string& t = vocab.tokens[static_cast<size_t>(id)];
        if (t.rfind("##", 0) == 0) {
            out += t.substr(2);
        } else {
            if (!out.empty()) out += ' ';
            out += t;
        }
    }
    return out;
}

std::string normalize(const std::string& text) {
    std::ostringstream os;
    bool first = true;
    for (const auto& w : whitespace_words(lowercase(text))) {
        if (!first) os << ' ';
        os << w;
        first = false;
    }
    return os.str();
}

void Vocab::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    for (const auto& t : tokens) os << t << '\n';
    if (!os) throw DataError("failed writing '" + path + "'");
}

Vocab Vocab::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open '" + path + "'");
    Vocab v;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        v.tokens.push_back(line);
    }
    if (v.tokens.size() < 4) throw ParseError("'" + path + "' is not a vocab file");
    for (int i = 0; i < 4; ++i) {
        if (v.tokens[static_cast<size_t>(i)] != kSpecials[i]) {
            throw ParseError("'" + path + "' is missing special token " + kSpecials[i] +
                             " at id " + std::to_string(i));
        }
    }
    index_tokens(v);
    return v;
}

}  // namespace emoxgen::tok
