#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "emoxgen/adam.hpp"
#include "emoxgen/losses.hpp"
#include "emoxgen/synth.hpp"
#include "emoxgen/trainer.hpp"

using namespace emoxgen;
using train::AuxScheme;
using train::TrainConfig;

namespace {

nn::EncoderConfig small_encoder(size_t vocab) {
    nn::EncoderConfig cfg;
    cfg.layers = 2;
    cfg.d_model = 32;
    cfg.heads = 2;
    cfg.d_ff = 64;
    cfg.dropout = 0.1;
    cfg.max_len = 48;
    cfg.vocab_size = vocab;
    return cfg;
}

struct Bench {
    train::TrainData data;
    tok::Vocab vocab;
};

// Synthetic two-domain benchmark with the vocab trained on the training
// texts, mirroring the CLI pipeline. Foreign domains are evaluated on
// their full datasets since the model never sees them.
Bench make_bench(double overlap, uint64_t seed, int n = 300, int domains = 2) {
    data::SynthConfig cfg;
    cfg.domains = domains;
    cfg.n_per_domain = n;
    cfg.vocab_overlap = overlap;
    cfg.emotion_corr = 0.8;
    cfg.seed = seed;
    auto out = data::synth_generate(cfg);

    Bench bench;
    auto parts = data::split(out.hs_domains[0], 0.8, 0.1, 0.1, 11);
    bench.data.hs_train = parts.train;
    bench.data.hs_val = parts.val;
    bench.data.test_sets["domain0"] = parts.test;
    for (int d = 1; d < domains; ++d) {
        bench.data.test_sets["domain" + std::to_string(d)] =
            out.hs_domains[static_cast<size_t>(d)];
    }
    bench.data.aux = out.emotion;

    std::vector<std::string> corpus;
    for (const auto& e : bench.data.hs_train) corpus.push_back(e.text);
    for (const auto& e : bench.data.aux) corpus.push_back(e.text);
    bench.vocab = tok::train_vocab(corpus, 2000);
    return bench;
}

TrainConfig fast_config(AuxScheme scheme) {
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.lr = 2e-3;  // from-scratch desk scale; the 1e-4 default assumes pretrained weights
    cfg.batch_size = 4;
    cfg.aux_scheme = scheme;
    cfg.max_len = 48;
    cfg.seeds = {0};
    return cfg;
}

}  // namespace

TEST_CASE("config validation and aux requirements") {
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.seeds.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    CHECK_THROWS_AS(train::aux_scheme_from("bogus"), ConfigError);
    CHECK(train::aux_scheme_from("ekman") == AuxScheme::kEkman);
    CHECK(train::tasks_for_scheme(AuxScheme::kGo).size() == 2);

    auto bench = make_bench(0.5, 1, 120);
    auto cfg2 = fast_config(AuxScheme::kEkman);
    cfg2.epochs = 1;
    bench.data.aux.clear();
    auto bundle = nn::ModelBundle::init(small_encoder(static_cast<size_t>(bench.vocab.size())),
                                        train::tasks_for_scheme(AuxScheme::kEkman), 0);
    CHECK_THROWS_AS(train::train_multitask(bench.data, bundle, bench.vocab, cfg2, 0), ConfigError);
}

TEST_CASE("separable data trains to high in-domain F1 and identical reruns match") {
    auto bench = make_bench(0.5, 2);
    const auto enc = small_encoder(static_cast<size_t>(bench.vocab.size()));
    const auto cfg = fast_config(AuxScheme::kNone);

    auto bundle = nn::ModelBundle::init(enc, train::tasks_for_scheme(cfg.aux_scheme), 0);
    auto r1 = train::train_multitask(bench.data, bundle, bench.vocab, cfg, 0);
    CHECK(r1.best_val_f1 >= 0.95);
    CHECK(r1.test_f1.at("domain0") >= 0.9);

    auto bundle2 = nn::ModelBundle::init(enc, train::tasks_for_scheme(cfg.aux_scheme), 0);
    auto r2 = train::train_multitask(bench.data, bundle2, bench.vocab, cfg, 0);
    CHECK(r1.best_val_f1 == r2.best_val_f1);
    CHECK(r1.test_f1 == r2.test_f1);
    CHECK(r1.optimizer_steps == r2.optimizer_steps);
    for (const auto& [name, p] : bundle.params) {
        CHECK(p.values() == bundle2.params.at(name).values());
    }
}

TEST_CASE("full vocabulary overlap makes domains interchangeable") {
    auto bench = make_bench(1.0, 3, 800);
    auto cfg = fast_config(AuxScheme::kNone);
    cfg.epochs = 10;  // converge fully; this probes the i.i.d.-domain property
    cfg.early_stop_patience = 99;
    auto bundle = nn::ModelBundle::init(small_encoder(static_cast<size_t>(bench.vocab.size())),
                                        train::tasks_for_scheme(cfg.aux_scheme), 0);
    auto r = train::train_multitask(bench.data, bundle, bench.vocab, cfg, 0);
    const double gap = std::abs(r.test_f1.at("domain0") - r.test_f1.at("domain1"));
    CHECK(gap <= 0.02);
}

TEST_CASE("optimizer step count per epoch matches the schedule") {
    auto bench = make_bench(0.5, 4, 120);
    const auto enc = small_encoder(static_cast<size_t>(bench.vocab.size()));

    auto cfg = fast_config(AuxScheme::kNone);
    cfg.epochs = 2;
    cfg.early_stop_patience = 99;
    auto bundle = nn::ModelBundle::init(enc, train::tasks_for_scheme(cfg.aux_scheme), 0);
    auto r = train::train_multitask(bench.data, bundle, bench.vocab, cfg, 0);
    const size_t hs_batches =
        (bench.data.hs_train.size() + cfg.batch_size - 1) / cfg.batch_size;
    REQUIRE(r.steps_per_epoch.size() == 2);
    for (size_t s : r.steps_per_epoch) CHECK(s == hs_batches);

    auto cfg2 = fast_config(AuxScheme::kEkman);
    cfg2.epochs = 2;
    cfg2.early_stop_patience = 99;
    auto bundle2 = nn::ModelBundle::init(enc, train::tasks_for_scheme(cfg2.aux_scheme), 0);
    auto r2 = train::train_multitask(bench.data, bundle2, bench.vocab, cfg2, 0);
    for (size_t s : r2.steps_per_epoch) CHECK(s == 2 * hs_batches);
}

TEST_CASE("early stopping never returns a checkpoint below the best validation F1") {
    auto bench = make_bench(0.5, 5, 160);
    auto cfg = fast_config(AuxScheme::kNone);
    cfg.epochs = 5;
    auto bundle = nn::ModelBundle::init(small_encoder(static_cast<size_t>(bench.vocab.size())),
                                        train::tasks_for_scheme(cfg.aux_scheme), 0);
    auto r = train::train_multitask(bench.data, bundle, bench.vocab, cfg, 0);
    double best_logged = -1;
    for (const auto& entry : r.log) {
        if (entry.val_f1) best_logged = std::max(best_logged, *entry.val_f1);
    }
    CHECK(r.best_val_f1 == best_logged);
    // Restored weights reproduce the best validation score exactly.
    CHECK(train::evaluate_f1(bundle, bench.vocab, bench.data.hs_val, cfg.max_len) ==
          r.best_val_f1);
}

TEST_CASE("one auxiliary step leaves the HS decoder bit-identical and vice versa") {
    auto bench = make_bench(0.5, 6, 120);
    const auto enc = small_encoder(static_cast<size_t>(bench.vocab.size()));
    auto bundle = nn::ModelBundle::init(enc, train::tasks_for_scheme(AuxScheme::kEkman), 0);
    num::AdamState<float> opt;
    opt.lr = 1e-3;

    auto run_step = [&](const nn::TaskSpec& task) {
        bundle.zero_grads();
        num::Rng rng(1);
        nn::ForwardCtx<float> ctx{true, &rng};
        num::Tensor<float> probs;
        loss::LossValue<float> l;
        if (task.id == nn::TaskId::kHs) {
            const auto& ex = bench.data.hs_train[0];
            probs = nn::predict(bundle, tok::encode(ex.text, bench.vocab, 48), task, ctx);
            l = loss::nll_binary(probs, {*ex.hs_label});
        } else {
            const auto& ex = bench.data.aux[0];
            probs = nn::predict(bundle, tok::encode(ex.text, bench.vocab, 48), task, ctx);
            l = loss::nll_categorical(probs, {0});
        }
        num::backward(l.value);
        auto params = bundle.task_params(task);
        std::map<std::string, std::vector<float>> grads;
        for (auto& [name, p] : params) grads.emplace(name, p.grad());
        num::adam_step(opt, params, grads);
    };

    auto head_values = [&](const std::string& prefix) {
        std::map<std::string, std::vector<float>> out;
        for (const auto& [name, p] : bundle.params) {
            if (name.rfind(prefix, 0) == 0) out.emplace(name, p.values());
        }
        return out;
    };

    const auto hs_before = head_values("head.hs.");
    run_step(bundle.task(nn::TaskId::kEmotionEkman));
    CHECK(head_values("head.hs.") == hs_before);  // bit-identical

    const auto emo_before = head_values("head.emotion-ekman.");
    const auto shared_before = bundle.at("emb.tok").values();
    run_step(bundle.task(nn::TaskId::kHs));
    CHECK(head_values("head.emotion-ekman.") == emo_before);
    CHECK(bundle.at("emb.tok").values() != shared_before);  // encoder did move
}

TEST_CASE("run_seeds aggregates per-seed results") {
    auto bench = make_bench(0.5, 7, 120);
    const auto enc = small_encoder(static_cast<size_t>(bench.vocab.size()));
    auto cfg = fast_config(AuxScheme::kNone);
    cfg.epochs = 2;

    cfg.seeds = {0};
    auto single = train::run_seeds(bench.data, enc, bench.vocab, cfg);
    REQUIRE(single.per_seed.size() == 1);
    for (const auto& [name, f1] : single.mean_test_f1) {
        CHECK(f1 == single.per_seed[0].test_f1.at(name));
    }

    cfg.seeds = {0, 1, 3};
    auto multi = train::run_seeds(bench.data, enc, bench.vocab, cfg);
    REQUIRE(multi.per_seed.size() == 3);
    for (const auto& [name, mean] : multi.mean_test_f1) {
        double lo = 1e9, hi = -1e9, total = 0;
        for (const auto& sr : multi.per_seed) {
            lo = std::min(lo, sr.test_f1.at(name));
            hi = std::max(hi, sr.test_f1.at(name));
            total += sr.test_f1.at(name);
        }
        CHECK(mean >= lo);
        CHECK(mean <= hi);
        CHECK(mean == doctest::Approx(total / 3).epsilon(1e-12));
    }
}

TEST_CASE("aux scheme none ignores auxiliary data entirely") {
    auto bench = make_bench(0.5, 8, 120);
    const auto enc = small_encoder(static_cast<size_t>(bench.vocab.size()));
    auto cfg = fast_config(AuxScheme::kNone);
    cfg.epochs = 1;

    auto with_aux = bench.data;
    auto without_aux = bench.data;
    without_aux.aux.clear();
    auto b1 = nn::ModelBundle::init(enc, train::tasks_for_scheme(cfg.aux_scheme), 0);
    auto b2 = nn::ModelBundle::init(enc, train::tasks_for_scheme(cfg.aux_scheme), 0);
    auto r1 = train::train_multitask(with_aux, b1, bench.vocab, cfg, 0);
    auto r2 = train::train_multitask(without_aux, b2, bench.vocab, cfg, 0);
    CHECK(r1.test_f1 == r2.test_f1);
    for (const auto& [name, p] : b1.params) CHECK(p.values() == b2.params.at(name).values());
}
