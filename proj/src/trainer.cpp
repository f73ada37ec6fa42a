#include "emoxgen/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "emoxgen/adam.hpp"
#include "emoxgen/errors.hpp"
#include "emoxgen/evalkit.hpp"
#include "emoxgen/losses.hpp"
#include "emoxgen/rng.hpp"

namespace emoxgen::train {

std::string aux_scheme_name(AuxScheme s) {
    switch (s) {
        case AuxScheme::kNone: return "none";
        case AuxScheme::kGo: return "go";
        case AuxScheme::kEkman: return "ekman";
    }
    return "?";
}

AuxScheme aux_scheme_from(const std::string& name) {
    if (name == "none") return AuxScheme::kNone;
    if (name == "go") return AuxScheme::kGo;
    if (name == "ekman") return AuxScheme::kEkman;
    throw ConfigError("unknown aux scheme '" + name + "' (expected none|go|ekman)");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
    if (seeds.empty()) throw ConfigError("train config: at least one seed is required");
    if (max_len < 2) throw ConfigError("train config: max_len must be >= 2");
}

std::vector<nn::TaskSpec> tasks_for_scheme(AuxScheme scheme) {
    std::vector<nn::TaskSpec> tasks{nn::TaskSpec::hs()};
    if (scheme == AuxScheme::kGo) tasks.push_back(nn::TaskSpec::emotion_go());
    if (scheme == AuxScheme::kEkman) tasks.push_back(nn::TaskSpec::emotion_ekman());
    return tasks;
}

namespace {

struct TokenizedHs {
    std::vector<std::vector<int>> tokens;
    std::vector<int> labels;
};

// Aux examples projected onto the scheme's head: a class index for the
// Ekman head, a 28-slot multi-hot row for the GoEmotions head.
struct TokenizedAux {
    std::vector<std::vector<int>> tokens;
    std::vector<int> classes;
    std::vector<std::vector<float>> multihot;
};

TokenizedHs tokenize_hs(const std::vector<data::LabeledExample>& examples, const tok::Vocab& vocab,
                        size_t max_len) {
    TokenizedHs out;
    for (const auto& ex : examples) {
        if (!ex.hs_label) throw DataError("HS example without a binary label: '" + ex.text + "'");
        out.tokens.push_back(tok::encode(ex.text, vocab, max_len));
        out.labels.push_back(*ex.hs_label);
    }
    return out;
}

TokenizedAux tokenize_aux(const std::vector<data::LabeledExample>& examples,
                          const tok::Vocab& vocab, size_t max_len, AuxScheme scheme) {
    TokenizedAux out;
    for (const auto& ex : examples) {
        if (!ex.emotions) {
            throw DataError("emotion example without labels: '" + ex.text + "'");
        }
        if (scheme == AuxScheme::kEkman) {
            // Multi-Ekman examples are excluded from single-label training.
            auto label = data::reduce_single_label(ex);
            if (!label) continue;
            out.tokens.push_back(tok::encode(ex.text, vocab, max_len));
            out.classes.push_back(data::ekman_index(*label));
        } else {
            std::vector<float> row(data::go_emotion_names().size(), 0.0f);
            for (const auto& name : *ex.emotions) row[static_cast<size_t>(data::go_index(name))] = 1.0f;
            out.tokens.push_back(tok::encode(ex.text, vocab, max_len));
            out.multihot.push_back(std::move(row));
        }
    }
    return out;
}

num::Tensor<float> batch_probs(const nn::ModelBundle& bundle,
                               const std::vector<std::vector<int>>& tokens,
                               const std::vector<size_t>& idx, const nn::TaskSpec& task,
                               const nn::ForwardCtx<float>& ctx) {
    std::vector<num::Tensor<float>> rows;
    rows.reserve(idx.size());
    for (size_t i : idx) rows.push_back(nn::predict(bundle, tokens[i], task, ctx));
    return rows.size() == 1 ? rows[0] : num::concat(rows, 0);
}

}  // namespace

double evaluate_f1(const nn::ModelBundle& bundle, const tok::Vocab& vocab,
                   const std::vector<data::LabeledExample>& examples, size_t max_len) {
    std::vector<int> preds, gold;
    preds.reserve(examples.size());
    const auto task = nn::TaskSpec::hs();
    for (const auto& ex : examples) {
        if (!ex.hs_label) throw DataError("evaluation example without a binary label");
        const float p = nn::predict(bundle, tok::encode(ex.text, vocab, max_len), task).item();
        preds.push_back(p >= 0.5f ? 1 : 0);
        gold.push_back(*ex.hs_label);
    }
    return eval::binary_f1(preds, gold);
}

SeedResult train_multitask(const TrainData& data, nn::ModelBundle& bundle,
                           const tok::Vocab& vocab, const TrainConfig& cfg, uint64_t seed) {
    cfg.validate();
    if (data.hs_train.empty()) throw DataError("training split is empty");
    if (data.hs_val.empty()) throw DataError("validation split is empty");
    const bool use_aux = cfg.aux_scheme != AuxScheme::kNone;
    if (use_aux && data.aux.empty()) {
        throw ConfigError("aux_scheme is '" + aux_scheme_name(cfg.aux_scheme) +
                          "' but no auxiliary data was provided");
    }
    const nn::TaskSpec hs_task = bundle.task(nn::TaskId::kHs);
    const nn::TaskSpec aux_task = cfg.aux_scheme == AuxScheme::kGo
                                      ? bundle.task(nn::TaskId::kEmotionGo)
                                  : cfg.aux_scheme == AuxScheme::kEkman
                                      ? bundle.task(nn::TaskId::kEmotionEkman)
                                      : nn::TaskSpec::hs();

    const TokenizedHs hs = tokenize_hs(data.hs_train, vocab, cfg.max_len);
    const TokenizedAux aux =
        use_aux ? tokenize_aux(data.aux, vocab, cfg.max_len, cfg.aux_scheme) : TokenizedAux{};
    if (use_aux && aux.tokens.empty()) {
        throw DataError("auxiliary dataset is empty after single-label reduction");
    }

    num::Rng shuffle_rng = num::Rng::derived(seed, 1);
    num::Rng dropout_rng = num::Rng::derived(seed, 2);
    num::Rng mix_rng = num::Rng::derived(seed, 3);

    num::AdamState<float> opt;
    opt.lr = cfg.lr;
    auto hs_params = bundle.task_params(hs_task);
    auto aux_params = use_aux ? bundle.task_params(aux_task) : decltype(hs_params){};

    const nn::ForwardCtx<float> train_ctx{true, &dropout_rng};

    auto step = [&](const nn::TaskSpec& task, const std::vector<size_t>& idx,
                    auto& params) -> double {
        bundle.zero_grads();
        num::Tensor<float> probs = batch_probs(bundle, task.id == nn::TaskId::kHs ? hs.tokens
                                                                                  : aux.tokens,
                                               idx, task, train_ctx);
        loss::LossValue<float> l;
        if (task.id == nn::TaskId::kHs) {
            std::vector<int> y;
            for (size_t i : idx) y.push_back(hs.labels[i]);
            l = loss::nll_binary(probs, y, cfg.normalize_nll);
        } else if (task.id == nn::TaskId::kEmotionEkman) {
            std::vector<int> y;
            for (size_t i : idx) y.push_back(aux.classes[i]);
            l = loss::nll_categorical(probs, y, cfg.normalize_nll);
        } else {
            std::vector<std::vector<float>> y;
            for (size_t i : idx) y.push_back(aux.multihot[i]);
            l = loss::bce_multilabel(probs, y);
        }
        const double value = l.value.item();
        num::backward(l.value);
        std::map<std::string, std::vector<float>> grads;
        for (auto& [name, p] : params) grads.emplace(name, p.grad());
        num::adam_step(opt, params, grads);
        return value;
    };

    // Auxiliary batches cycle through a reshuffled order on exhaustion,
    // persisting across epochs so every aux example gets seen.
    std::vector<size_t> aux_order(aux.tokens.size());
    for (size_t i = 0; i < aux_order.size(); ++i) aux_order[i] = i;
    size_t aux_pos = aux_order.size();  // forces an initial shuffle
    auto next_aux_batch = [&]() {
        std::vector<size_t> idx;
        for (size_t i = 0; i < cfg.batch_size; ++i) {
            if (aux_pos >= aux_order.size()) {
                shuffle_rng.shuffle(aux_order);
                aux_pos = 0;
            }
            idx.push_back(aux_order[aux_pos++]);
        }
        return idx;
    };

    SeedResult result;
    result.seed = seed;
    result.best_val_f1 = -1.0;
    auto best_params = bundle.snapshot();
    size_t epochs_since_best = 0;

    std::vector<size_t> hs_order(hs.tokens.size());
    for (size_t i = 0; i < hs_order.size(); ++i) hs_order[i] = i;

    const double aux_ratio =
        use_aux ? static_cast<double>(aux.tokens.size()) / static_cast<double>(hs.tokens.size())
                : 0.0;

    for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(hs_order);
        double hs_loss_sum = 0.0, aux_loss_sum = 0.0;
        size_t hs_batches = 0, aux_batches = 0, epoch_steps = 0;
        for (size_t start = 0; start < hs_order.size(); start += cfg.batch_size) {
            const size_t end = std::min(start + cfg.batch_size, hs_order.size());
            std::vector<size_t> idx(hs_order.begin() + static_cast<long>(start),
                                    hs_order.begin() + static_cast<long>(end));
            hs_loss_sum += step(hs_task, idx, hs_params);
            ++hs_batches;
            ++epoch_steps;
            if (use_aux) {
                size_t aux_steps = 1;
                if (cfg.task_mix == TaskMix::kProportional) {
                    aux_steps = static_cast<size_t>(aux_ratio);
                    if (mix_rng.bernoulli(aux_ratio - std::floor(aux_ratio))) ++aux_steps;
                }
                for (size_t s = 0; s < aux_steps; ++s) {
                    aux_loss_sum += step(aux_task, next_aux_batch(), aux_params);
                    ++aux_batches;
                    ++epoch_steps;
                }
            }
        }

        const double val_f1 = evaluate_f1(bundle, vocab, data.hs_val, cfg.max_len);
        result.log.push_back({epoch, hs_task.name(), hs_loss_sum / hs_batches, val_f1});
        if (use_aux && aux_batches > 0) {
            result.log.push_back({epoch, aux_task.name(), aux_loss_sum / aux_batches, std::nullopt});
        }
        result.steps_per_epoch.push_back(epoch_steps);
        result.optimizer_steps += epoch_steps;

        if (val_f1 > result.best_val_f1) {
            result.best_val_f1 = val_f1;
            result.best_epoch = epoch;
            best_params = bundle.snapshot();
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
            if (epochs_since_best >= cfg.early_stop_patience) break;
        }
    }

    bundle.restore(best_params);
    for (const auto& [name, examples] : data.test_sets) {
        result.test_f1[name] = evaluate_f1(bundle, vocab, examples, cfg.max_len);
    }
    return result;
}

RunResult run_seeds(const TrainData& data, const nn::EncoderConfig& enc_cfg,
                    const tok::Vocab& vocab, const TrainConfig& cfg,
                    std::vector<nn::ModelBundle>* trained_bundles) {
    cfg.validate();
    RunResult result;
    for (uint64_t seed : cfg.seeds) {
        auto bundle = nn::ModelBundle::init(enc_cfg, tasks_for_scheme(cfg.aux_scheme), seed);
        result.per_seed.push_back(train_multitask(data, bundle, vocab, cfg, seed));
        if (trained_bundles) trained_bundles->push_back(std::move(bundle));
    }
    for (const auto& [name, examples] : data.test_sets) {
        double total = 0.0;
        for (const auto& sr : result.per_seed) total += sr.test_f1.at(name);
        result.mean_test_f1[name] = total / static_cast<double>(result.per_seed.size());
    }
    return result;
}

}  // namespace emoxgen::train
