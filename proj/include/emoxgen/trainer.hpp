#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emoxgen/corpus.hpp"
#include "emoxgen/model.hpp"
#include "emoxgen/tokenizer.hpp"

namespace emoxgen::train {

enum class AuxScheme { kNone, kGo, kEkman };
enum class TaskMix { kRoundRobin, kProportional };

std::string aux_scheme_name(AuxScheme s);
AuxScheme aux_scheme_from(const std::string& name);

struct TrainConfig {
    size_t epochs = 5;
    size_t batch_size = 8;
    double lr = 1e-4;
    std::vector<uint64_t> seeds = {0, 1, 3};
    size_t early_stop_patience = 2;
    AuxScheme aux_scheme = AuxScheme::kNone;
    TaskMix task_mix = TaskMix::kRoundRobin;
    size_t max_len = 128;
    bool normalize_nll = false;

    void validate() const;
};

struct EpochLog {
    size_t epoch = 0;  // 1-based
    std::string task;
    double mean_loss = 0.0;
    std::optional<double> val_f1;  // main task only
};

struct SeedResult {
    uint64_t seed = 0;
    double best_val_f1 = 0.0;
    size_t best_epoch = 0;
    size_t optimizer_steps = 0;
    std::vector<size_t> steps_per_epoch;
    std::map<std::string, double> test_f1;
    std::vector<EpochLog> log;
};

struct RunResult {
    std::vector<SeedResult> per_seed;
    std::map<std::string, double> mean_test_f1;
};

// Inputs for one training configuration. `aux` holds emotion examples;
// the scheme decides how they are projected onto a head.
struct TrainData {
    std::vector<data::LabeledExample> hs_train;
    std::vector<data::LabeledExample> hs_val;
    std::vector<data::LabeledExample> aux;
    std::map<std::string, std::vector<data::LabeledExample>> test_sets;
};

// Threshold-0.5 binary-F1 of the HS head over a labeled set.
double evaluate_f1(const nn::ModelBundle& bundle, const tok::Vocab& vocab,
                   const std::vector<data::LabeledExample>& examples, size_t max_len);

// One seeded run: alternating task batches through the shared encoder,
// early stopping on main-task validation F1, best checkpoint restored
// into `bundle` on return.
SeedResult train_multitask(const TrainData& data, nn::ModelBundle& bundle,
                           const tok::Vocab& vocab, const TrainConfig& cfg, uint64_t seed);

// Full protocol: one independent train_multitask per configured seed with
// fresh initialization, plus per-test-set means.
RunResult run_seeds(const TrainData& data, const nn::EncoderConfig& enc_cfg,
                    const tok::Vocab& vocab, const TrainConfig& cfg,
                    std::vector<nn::ModelBundle>* trained_bundles = nullptr);

// Head set implied by an aux scheme (always includes the HS task).
std::vector<nn::TaskSpec> tasks_for_scheme(AuxScheme scheme);

}  // namespace emoxgen::train
