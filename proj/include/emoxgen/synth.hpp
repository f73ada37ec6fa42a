#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emoxgen/corpus.hpp"

namespace emoxgen::data {

// Multi-domain synthetic benchmark. Each domain shares one explicit hateful
// lexicon; implicit hostility and filler vocabulary are split into a shared
// portion (fraction `vocab_overlap`) and per-domain words, so lowering the
// overlap widens the cross-domain gap. The emotion corpus draws on every
// domain's inventory and skews hateful-style texts toward anger/disgust with
// strength `emotion_corr`.
struct SynthConfig {
    int domains = 2;
    int n_per_domain = 1000;       // balanced positives/negatives
    double vocab_overlap = 0.5;    // rho in [0,1]
    double explicit_rate = 0.5;    // probability a positive uses the shared lexicon
    double emotion_corr = 0.5;     // kappa in [0,1]
    int emotion_n = 0;             // 0 -> 2 * n_per_domain
    uint64_t seed = 0;
};

struct SynthOutput {
    std::vector<std::vector<LabeledExample>> hs_domains;
    // Emotion examples carry the style flag in hs_label for diagnostics.
    std::vector<LabeledExample> emotion;
};

SynthOutput synth_generate(const SynthConfig& config);

// Generates, splits 80/10/10 and writes domain{i}/{train,val,test}.jsonl
// plus emotion/{train,val,test}.jsonl under `out_dir`.
void synth_write(const SynthConfig& config, const std::string& out_dir);

}  // namespace emoxgen::data
