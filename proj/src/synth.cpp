#include "emoxgen/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>

#include "emoxgen/errors.hpp"
#include "emoxgen/rng.hpp"

namespace emoxgen::data {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kOnsets = {"b", "d",  "f",  "g",  "k",  "l",  "m",  "n",
                                          "p", "r",  "s",  "t",  "v",  "z",  "br", "dr",
                                          "gr", "kl", "pl", "sk", "st", "tr", "vr", "zn"};
const std::vector<std::string> kVowels = {"a", "e", "i", "o", "u", "ai", "ea", "ou", "ei"};
const std::vector<std::string> kCodas = {"", "n", "r", "s", "t", "l", "k", "m", "x"};

// Anger/disgust-family GoEmotions labels used to skew hateful-style texts.
const std::vector<std::string> kHostileEmotions = {"anger", "annoyance", "disapproval", "disgust"};

class WordFactory {
public:
    explicit WordFactory(num::Rng& rng) : rng_(rng) {}

    std::string fresh() {
        for (;;) {
            std::string w;
            const int syllables = 2 + static_cast<int>(rng_.bounded(2));
            for (int s = 0; s < syllables; ++s) {
                w += rng_.pick(kOnsets);
                w += rng_.pick(kVowels);
            }
            w += rng_.pick(kCodas);
            if (used_.insert(w).second) return w;
        }
    }

    std::vector<std::string> fresh_batch(size_t n) {
        std::vector<std::string> out;
        out.reserve(n);
        for (size_t i = 0; i < n; ++i) out.push_back(fresh());
        return out;
    }

private:
    num::Rng& rng_;
    std::set<std::string> used_;
};

struct DomainInventory {
    std::vector<std::string> fillers;   // shared portion + domain-unique
    std::vector<std::string> implicit;  // hostile phrasing, same split
};

struct Inventories {
    std::vector<std::string> groups;
    std::vector<std::string> slurs;  // explicit lexicon, shared by all domains
    std::vector<DomainInventory> domains;
    DomainInventory mixed;  // union view used by the emotion corpus
};

constexpr size_t kFillerPerDomain = 40;
constexpr size_t kImplicitPerDomain = 6;

Inventories build_inventories(const SynthConfig& cfg, num::Rng& rng) {
    WordFactory words(rng);
    Inventories inv;
    inv.groups = words.fresh_batch(4);
    inv.slurs = words.fresh_batch(8);

    const auto shared_fill =
        words.fresh_batch(static_cast<size_t>(cfg.vocab_overlap * kFillerPerDomain + 0.5));
    const auto shared_impl =
        words.fresh_batch(static_cast<size_t>(cfg.vocab_overlap * kImplicitPerDomain + 0.5));
    for (int d = 0; d < cfg.domains; ++d) {
        DomainInventory di;
        di.fillers = shared_fill;
        for (auto& w : words.fresh_batch(kFillerPerDomain - shared_fill.size())) {
            di.fillers.push_back(std::move(w));
        }
        di.implicit = shared_impl;
        for (auto& w : words.fresh_batch(kImplicitPerDomain - shared_impl.size())) {
            di.implicit.push_back(std::move(w));
        }
        inv.mixed.fillers.insert(inv.mixed.fillers.end(), di.fillers.begin(), di.fillers.end());
        inv.mixed.implicit.insert(inv.mixed.implicit.end(), di.implicit.begin(), di.implicit.end());
        inv.domains.push_back(std::move(di));
    }
    return inv;
}

// Sentences are fixed-length filler templates with label-bearing words
// substituted into slots, so length carries no class signal.
std::string make_text(const Inventories& inv, const DomainInventory& di, num::Rng& rng,
                      bool hateful, double explicit_rate) {
    const size_t n_words = 6 + rng.bounded(6);
    std::vector<std::string> words(n_words);
    for (auto& w : words) w = rng.pick(di.fillers);
    const size_t slot = 1 + rng.bounded(n_words - 2);
    if (hateful) {
        if (rng.bernoulli(explicit_rate)) {
            words[slot - 1] = rng.pick(inv.slurs);
            words[slot] = rng.pick(inv.groups);
        } else {
            words[slot - 1] = rng.pick(inv.groups);
            words[slot] = rng.pick(di.implicit);
        }
    } else if (rng.bernoulli(0.3)) {
        words[slot] = rng.pick(inv.groups);
    }
    std::string text;
    for (const auto& w : words) {
        if (!text.empty()) text += ' ';
        text += w;
    }
    return text;
}

std::vector<std::string> pick_emotions(num::Rng& rng, bool hateful_style, double corr) {
    const auto& all = go_emotion_names();
    std::vector<std::string> pool;
    if (rng.bernoulli(corr)) {
        if (hateful_style) {
            pool = kHostileEmotions;
        } else {
            for (const auto& name : all) {
                if (std::find(kHostileEmotions.begin(), kHostileEmotions.end(), name) ==
                    kHostileEmotions.end()) {
                    pool.push_back(name);
                }
            }
        }
    } else {
        pool = all;
    }
    std::vector<std::string> out{rng.pick(pool)};
    if (rng.bernoulli(0.3)) out.push_back(rng.pick(pool));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void validate(const SynthConfig& cfg) {
    if (cfg.domains < 2) throw ConfigError("synth: need at least 2 domains");
    if (cfg.n_per_domain < 100) throw ConfigError("synth: need at least 100 examples per domain");
    if (cfg.vocab_overlap < 0 || cfg.vocab_overlap > 1) {
        throw ConfigError("synth: vocab_overlap must lie in [0,1]");
    }
    if (cfg.explicit_rate < 0 || cfg.explicit_rate > 1) {
        throw ConfigError("synth: explicit_rate must lie in [0,1]");
    }
    if (cfg.emotion_corr < 0 || cfg.emotion_corr > 1) {
        throw ConfigError("synth: emotion_corr must lie in [0,1]");
    }
}

}  // namespace

SynthOutput synth_generate(const SynthConfig& cfg) {
    validate(cfg);
    num::Rng rng(cfg.seed);
    const Inventories inv = build_inventories(cfg, rng);

    SynthOutput out;
    for (int d = 0; d < cfg.domains; ++d) {
        std::vector<LabeledExample> domain;
        domain.reserve(static_cast<size_t>(cfg.n_per_domain));
        const int positives = cfg.n_per_domain / 2;
        for (int i = 0; i < cfg.n_per_domain; ++i) {
            const bool hateful = i < positives;
            LabeledExample ex;
            ex.text = make_text(inv, inv.domains[static_cast<size_t>(d)], rng, hateful,
                                cfg.explicit_rate);
            ex.hs_label = hateful ? 1 : 0;
            domain.push_back(std::move(ex));
        }
        rng.shuffle(domain);
        out.hs_domains.push_back(std::move(domain));
    }

    const int n_emotion = cfg.emotion_n > 0 ? cfg.emotion_n : 2 * cfg.n_per_domain;
    out.emotion.reserve(static_cast<size_t>(n_emotion));
    for (int i = 0; i < n_emotion; ++i) {
        const bool hateful_style = rng.bernoulli(0.5);
        LabeledExample ex;
        ex.text = make_text(inv, inv.mixed, rng, hateful_style, cfg.explicit_rate);
        ex.hs_label = hateful_style ? 1 : 0;
        ex.emotions = pick_emotions(rng, hateful_style, cfg.emotion_corr);
        out.emotion.push_back(std::move(ex));
    }
    return out;
}

void synth_write(const SynthConfig& cfg, const std::string& out_dir) {
    SynthOutput data = synth_generate(cfg);
    const fs::path root(out_dir);
    for (size_t d = 0; d < data.hs_domains.size(); ++d) {
        const fs::path dir = root / ("domain" + std::to_string(d));
        fs::create_directories(dir);
        SplitResult parts = split(data.hs_domains[d], 0.8, 0.1, 0.1,
                                  num::Rng::derived(cfg.seed, 1000 + d).next_u64());
        write_jsonl((dir / "train.jsonl").string(), parts.train);
        write_jsonl((dir / "val.jsonl").string(), parts.val);
        write_jsonl((dir / "test.jsonl").string(), parts.test);
    }

    // Emotion splits are cut proportionally without stratification; only the
    // training portion participates in auxiliary-task runs.
    const fs::path edir = root / "emotion";
    fs::create_directories(edir);
    std::vector<LabeledExample> emo = data.emotion;
    num::Rng erng(num::Rng::derived(cfg.seed, 2000).next_u64());
    erng.shuffle(emo);
    const size_t n = emo.size();
    const size_t n_train = static_cast<size_t>(0.8 * static_cast<double>(n));
    const size_t n_val = static_cast<size_t>(0.1 * static_cast<double>(n));
    write_jsonl((edir / "train.jsonl").string(),
                {emo.begin(), emo.begin() + static_cast<long>(n_train)});
    write_jsonl((edir / "val.jsonl").string(),
                {emo.begin() + static_cast<long>(n_train),
                 emo.begin() + static_cast<long>(n_train + n_val)});
    write_jsonl((edir / "test.jsonl").string(),
                {emo.begin() + static_cast<long>(n_train + n_val), emo.end()});
}

}  // namespace emoxgen::data
