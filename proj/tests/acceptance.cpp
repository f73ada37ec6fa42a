// Acceptance suite: one checkable criterion per function, one PASS/FAIL
// line each. Run all (no args) or a single criterion by number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "emoxgen/adam.hpp"
#include "emoxgen/cli.hpp"
#include "emoxgen/corpus.hpp"
#include "emoxgen/evalkit.hpp"
#include "emoxgen/gradcheck.hpp"
#include "emoxgen/losses.hpp"
#include "emoxgen/model.hpp"
#include "emoxgen/rng.hpp"
#include "emoxgen/synth.hpp"
#include "emoxgen/tokenizer.hpp"
#include "emoxgen/trainer.hpp"

using namespace emoxgen;
namespace fs = std::filesystem;

namespace {

const std::string kFixture3 = std::string(EMOXGEN_FIXTURE_DIR) + "/table3.csv";
const std::string kFixture4 = std::string(EMOXGEN_FIXTURE_DIR) + "/table4.csv";

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Check {
    Outcome* outcome;
    void operator()(bool ok, const std::string& what) const {
        if (!ok) {
            outcome->pass = false;
            outcome->detail += (outcome->detail.empty() ? "" : "; ") + what;
        }
    }
};

fs::path work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "emoxgen_acceptance";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// --- 1: explicit percentage fractions from the result tables --------------------

Outcome criterion1() {
    Outcome out;
    Check check{&out};
    const auto m = eval::ResultMatrix::from_csv(kFixture3);

    const double decline = eval::pct_change(m.cell("offred", "offred"),
                                            *m.cd_printed[m.row_index("offred")]);
    check(std::abs(decline - (-33.7)) <= 0.05, "offred decline " + fmt(decline));

    const double kaggle = eval::pct_change(*m.cd_printed[m.row_index("kaggle")],
                                           *m.cd_printed[m.row_index("kaggle+go")]);
    check(std::abs(kaggle - 2.9) <= 0.05, "kaggle uplift " + fmt(kaggle));

    const double kumar = eval::pct_change(*m.cd_printed[m.row_index("kumar")],
                                          *m.cd_printed[m.row_index("kumar+go")]);
    check(std::abs(kumar - 6.6) <= 0.05, "kumar uplift " + fmt(kumar));

    const double wh = eval::in_domain_uplift({m.cell("wh", "founta"), m.cell("wh", "wh")},
                                             {m.cell("wh+go", "founta"), m.cell("wh+go", "wh")});
    check(std::abs(wh - 4.5) <= 0.05, "wh means uplift " + fmt(wh));

    if (out.pass) {
        out.detail = "decline " + fmt(decline) + ", uplifts " + fmt(kaggle) + "/" + fmt(kumar) +
                     "/" + fmt(wh);
    }
    return out;
}

// --- 2: CD-average recomputation and discrepancy reporting ----------------------

Outcome criterion2() {
    Outcome out;
    Check check{&out};
    const auto m = eval::ResultMatrix::from_csv(kFixture3);
    const auto report = eval::verify_fixture(m, 0.001);

    for (const char* row : {"kaggle", "kumar", "offred", "razavi"}) {
        const double recomputed = eval::cd_average(m, row);
        const double printed = *m.cd_printed[m.row_index(row)];
        check(std::abs(recomputed - printed) <= 0.001,
              std::string(row) + " off by " + fmt(std::abs(recomputed - printed)));
    }

    auto flagged = [&](const std::string& row) -> const eval::Discrepancy* {
        for (const auto& d : report.discrepancies) {
            if (d.row_label == row) return &d;
        }
        return nullptr;
    };
    const auto* founta = flagged("founta");
    const auto* wh = flagged("wh");
    check(founta != nullptr, "founta not in discrepancy report");
    check(wh != nullptr, "wh not in discrepancy report");
    if (founta) check(std::abs(founta->recomputed - 0.6438) <= 1e-9, "founta recomputed");
    if (wh) check(std::abs(wh->recomputed - 0.5514) <= 1e-9, "wh recomputed");
    for (const char* row : {"kaggle", "kumar", "offred", "razavi"}) {
        check(flagged(row) == nullptr, std::string(row) + " wrongly flagged");
    }
    if (out.pass) {
        out.detail = "4 baselines within 0.001; founta 0.6438 and wh 0.5514 flagged";
    }
    return out;
}

// --- 3: figure 3b marginal aggregation -------------------------------------------

Outcome criterion3() {
    Outcome out;
    Check check{&out};
    std::map<std::string, eval::ResultMatrix> matrices{
        {"bert", eval::ResultMatrix::from_csv(kFixture3)},
        {"fbert", eval::ResultMatrix::from_csv(kFixture4)}};
    const auto entries = eval::marginal_aggregate(matrices, eval::Collapse::kEmotionCorpus);
    auto uplift = [&](const std::string& train) {
        for (const auto& e : entries) {
            if (e.train == train && e.group == "bert") return e.uplift_pct;
        }
        return -1e9;
    };
    const double kumar = uplift("kumar"), offred = uplift("offred"), wh = uplift("wh");
    check(std::abs(kumar - 7.6) <= 0.3, "kumar " + fmt(kumar));
    check(std::abs(offred - 5.7) <= 0.3, "offred " + fmt(offred));
    check(std::abs(wh - 5.6) <= 0.3, "wh " + fmt(wh));
    if (out.pass) {
        out.detail = "kumar " + fmt(kumar) + ", offred " + fmt(offred) + ", wh " + fmt(wh);
    }
    return out;
}

// --- 4: emotion conversion properties --------------------------------------------

Outcome criterion4() {
    Outcome out;
    Check check{&out};
    std::map<std::string, int> sizes;
    std::set<std::string> covered;
    for (const auto& [go, ek] : data::go_to_ekman_map()) {
        covered.insert(go);
        sizes[ek] += 1;
    }
    check(covered.size() == 27, "preimages cover " + std::to_string(covered.size()));
    const std::map<std::string, int> expected{{"anger", 3},   {"disgust", 1}, {"fear", 2},
                                              {"joy", 12},    {"sadness", 5}, {"surprise", 4}};
    for (const auto& [ek, n] : expected) {
        check(sizes[ek] == n, ek + " preimage " + std::to_string(sizes[ek]));
    }
    for (const auto& name : data::go_emotion_names()) {
        if (name != data::kNeutral) check(covered.count(name) == 1, name + " unmapped");
    }

    num::Rng rng(4);
    const auto& names = data::go_emotion_names();
    for (int trial = 0; trial < 10000 && out.pass; ++trial) {
        std::vector<std::string> a, b;
        for (const auto& n : names) {
            if (rng.bernoulli(0.2)) a.push_back(n);
            if (rng.bernoulli(0.2)) b.push_back(n);
        }
        std::vector<std::string> uni = a;
        uni.insert(uni.end(), b.begin(), b.end());
        std::sort(uni.begin(), uni.end());
        uni.erase(std::unique(uni.begin(), uni.end()), uni.end());
        auto ma = data::map_to_ekman(a);
        auto mb = data::map_to_ekman(b);
        std::vector<std::string> mu = ma;
        mu.insert(mu.end(), mb.begin(), mb.end());
        std::sort(mu.begin(), mu.end());
        mu.erase(std::unique(mu.begin(), mu.end()), mu.end());
        check(data::map_to_ekman(uni) == mu, "union homomorphism trial " + std::to_string(trial));
    }
    if (out.pass) out.detail = "partition (3,1,2,12,5,4); union law on 10000 subsets";
    return out;
}

// --- 5: loss hand values ----------------------------------------------------------

Outcome criterion5() {
    Outcome out;
    Check check{&out};
    using T = num::Tensor<double>;

    const double perfect = loss::nll_binary(T::from({1}, {1.0}), {1}).value.item();
    check(perfect <= 1e-6, "perfect nll " + fmt(perfect));
    const double half = loss::nll_binary(T::from({1}, {0.5}), {1}).value.item();
    check(std::abs(half - std::log(2.0)) <= 1e-6, "nll(0.5)");
    const double batch = loss::nll_binary(T::from({2, 1}, {0.9, 0.2}), {1, 0}).value.item();
    check(std::abs(batch - (-std::log(0.9) - std::log(0.8))) <= 1e-6, "nll batch");

    const double bce1 =
        loss::bce_multilabel(T::from({1, 1}, {0.5}), {std::vector<double>{1.0}}).value.item();
    check(std::abs(bce1 - std::log(2.0)) <= 1e-6, "bce single");
    const double bce4 = loss::bce_multilabel(T::from({2, 2}, {0.9, 0.1, 0.2, 0.8}),
                                             {std::vector<double>{1, 0}, std::vector<double>{0, 1}})
                            .value.item();
    const double bce4_expected = (-std::log(0.9) - std::log(0.9) - std::log(0.8) - std::log(0.8)) / 4;
    check(std::abs(bce4 - bce4_expected) <= 1e-6, "bce 2x2");
    check(std::abs(bce4 - 0.1643) <= 5e-5, "bce printed value");

    bool identical = true;
    for (double p : {1e-9, 0.001, 0.25, 0.5, 0.875, 0.999, 1.0}) {
        for (int y : {0, 1}) {
            const double nll = loss::nll_binary(T::from({1, 1}, {p}), {y}).value.item();
            const double bce =
                loss::bce_multilabel(T::from({1, 1}, {p}), {std::vector<double>{double(y)}})
                    .value.item();
            identical = identical && nll == bce;
        }
    }
    check(identical, "single-term nll != bce");
    if (out.pass) out.detail = "hand values within 1e-6; single-term equality exact";
    return out;
}

// --- 6: gradient fidelity ----------------------------------------------------------

void reseed_generic(nn::Bundle<double>& b, uint64_t seed) {
    num::Rng rng(seed);
    for (auto& [name, p] : b.params) {
        std::vector<double> v(p.numel());
        const bool is_gamma = name.find("gamma") != std::string::npos;
        for (auto& x : v) x = is_gamma ? rng.normal(1.0, 0.1) : rng.normal(0.0, 0.2);
        p.set_values(std::move(v));
    }
}

Outcome criterion6() {
    Outcome out;
    Check check{&out};
    using T = num::Tensor<double>;
    double worst = 0.0;

    // (a) every primitive over random shapes, mixed-sign loss weights.
    num::Rng shapes(42);
    for (int inst = 0; inst < 12; ++inst) {
        const size_t r = 1 + shapes.bounded(3), c = 1 + shapes.bounded(4),
                     k = 1 + shapes.bounded(3);
        auto draw = [&](size_t n, double lo, double hi) {
            std::vector<double> v(n);
            for (auto& x : v) x = lo + (hi - lo) * shapes.uniform();
            return v;
        };
        auto sdraw = [&](size_t n) {
            std::vector<double> v(n);
            for (auto& x : v) x = (shapes.bernoulli(0.5) ? 1.0 : -1.0) * (0.5 + shapes.uniform());
            return v;
        };
        auto a = T::param({r, c}, draw(r * c, 0.2, 1.5));
        auto b = T::param({r, c}, draw(r * c, 0.2, 1.5));
        auto m2 = T::param({c, k}, draw(c * k, -1.5, -0.2));
        auto bias = T::param({c}, draw(c, 0.2, 1.0));
        auto gam = T::param({c}, draw(c, 0.7, 1.3));
        auto bet = T::param({c}, draw(c, -0.3, 0.3));
        auto tab = T::param({5, c}, draw(5 * c, -1, 1));
        std::vector<int> ids = {int(shapes.bounded(5)), int(shapes.bounded(5)),
                                int(shapes.bounded(5))};
        const auto wa = sdraw(r * c), wm = sdraw(r * k), wt = sdraw(c * r), we = sdraw(3 * c),
                   wc = sdraw(2 * r * c), ws = sdraw(r);
        auto fl = [](const num::Tensor<double>& t, const std::vector<double>& w) {
            return num::sum(num::mul(t, T::from(t.shape(), w)));
        };
        struct Case {
            const char* name;
            std::function<num::Tensor<double>()> f;
            std::vector<num::Tensor<double>> params;
        };
        std::vector<Case> cases = {
            {"add", [&] { return fl(num::add(a, b), wa); }, {a, b}},
            {"add_bias", [&] { return fl(num::add(a, bias), wa); }, {a, bias}},
            {"sub", [&] { return fl(num::sub(a, b), wa); }, {a, b}},
            {"mul", [&] { return fl(num::mul(a, b), wa); }, {a, b}},
            {"affine", [&] { return fl(num::affine(a, 1.7, -0.3), wa); }, {a}},
            {"matmul", [&] { return fl(num::matmul(a, m2), wm); }, {a, m2}},
            {"transpose", [&] { return fl(num::transpose(a), wt); }, {a}},
            {"softmax", [&] { return fl(num::softmax(a), wa); }, {a}},
            {"layer_norm", [&] { return fl(num::layer_norm(a, gam, bet), wa); }, {a, gam, bet}},
            {"gelu", [&] { return fl(num::gelu(a), wa); }, {a}},
            {"tanh", [&] { return fl(num::tanh(a), wa); }, {a}},
            {"sigmoid", [&] { return fl(num::sigmoid(a), wa); }, {a}},
            {"log", [&] { return fl(num::log(a), wa); }, {a}},
            {"clamp", [&] { return fl(num::clamp(a, 0.05, 2.5), wa); }, {a}},
            {"embedding", [&] { return fl(num::embedding(tab, ids), we); }, {tab}},
            {"concat0", [&] { return fl(num::concat<double>({a, b}, 0), wc); }, {a, b}},
            {"concat1", [&] { return fl(num::concat<double>({a, b}, 1), wc); }, {a, b}},
            {"slice", [&] { return fl(num::slice(a, 0, r, 0, 1), ws); }, {a}},
            {"sum", [&] { return num::sum(a); }, {a}},
            {"mean", [&] { return num::mean(a); }, {a}},
        };
        for (auto& cs : cases) {
            const double err = num::grad_check(cs.f, cs.params, 1e-5);
            worst = std::max(worst, err);
            check(err <= 1e-5, std::string(cs.name) + " err " + fmt(err));
        }
    }

    nn::EncoderConfig cfg;
    cfg.layers = 1;
    cfg.d_model = 8;
    cfg.heads = 2;
    cfg.d_ff = 16;
    cfg.dropout = 0.0;
    cfg.max_len = 8;
    cfg.vocab_size = 20;
    const std::vector<int> tokens = {2, 7, 11, 3};

    // (b) the summed binary NLL through the HS head.
    {
        auto b = nn::Bundle<double>::init(cfg, {nn::TaskSpec::hs()}, 1);
        reseed_generic(b, 17);
        std::vector<num::Tensor<double>> params;
        for (auto& [n_, p] : b.params) params.push_back(p);
        auto f = [&]() {
            return loss::nll_binary(nn::predict(b, tokens, nn::TaskSpec::hs()), {1}).value;
        };
        const double err = num::grad_check(f, params, 1e-5);
        worst = std::max(worst, err);
        check(err <= 1e-5, "hs head err " + fmt(err));
    }

    // (c) the mean BCE through the 28-class head.
    std::vector<std::vector<double>> go_targets{std::vector<double>(28, 0.0)};
    go_targets[0][2] = 1.0;
    go_targets[0][11] = 1.0;
    {
        auto b = nn::Bundle<double>::init(cfg, {nn::TaskSpec::emotion_go()}, 1);
        reseed_generic(b, 15);
        std::vector<num::Tensor<double>> params;
        for (auto& [n_, p] : b.params) params.push_back(p);
        auto f = [&]() {
            return loss::bce_multilabel(nn::predict(b, tokens, nn::TaskSpec::emotion_go()),
                                        go_targets)
                .value;
        };
        const double err = num::grad_check(f, params, 1e-5);
        worst = std::max(worst, err);
        check(err <= 1e-5, "go head err " + fmt(err));
    }

    // (d) the full tiny encoder feeding both heads.
    {
        auto b = nn::Bundle<double>::init(cfg, {nn::TaskSpec::hs(), nn::TaskSpec::emotion_go()}, 1);
        reseed_generic(b, 15);
        std::vector<num::Tensor<double>> params;
        for (auto& [n_, p] : b.params) params.push_back(p);
        auto f = [&]() {
            auto h = nn::encode(b, nn::embed(b, tokens));
            auto hs = loss::nll_binary(nn::pool_and_decode(b, h, nn::TaskSpec::hs()), {1});
            auto go = loss::bce_multilabel(nn::pool_and_decode(b, h, nn::TaskSpec::emotion_go()),
                                           go_targets);
            return num::add(hs.value, go.value);
        };
        const double err = num::grad_check(f, params, 1e-5);
        worst = std::max(worst, err);
        check(err <= 1e-5, "both heads err " + fmt(err));
    }

    if (out.pass) {
        std::ostringstream os;
        os << "max relative error " << worst;
        out.detail = os.str();
    }
    return out;
}

// --- 7: hard-sharing invariant ------------------------------------------------------

Outcome criterion7() {
    Outcome out;
    Check check{&out};
    data::SynthConfig scfg;
    scfg.domains = 2;
    scfg.n_per_domain = 120;
    scfg.seed = 6;
    auto synth = data::synth_generate(scfg);
    std::vector<std::string> corpus;
    for (const auto& e : synth.hs_domains[0]) corpus.push_back(e.text);
    for (const auto& e : synth.emotion) corpus.push_back(e.text);
    const auto vocab = tok::train_vocab(corpus, 600);

    nn::EncoderConfig enc;
    enc.layers = 2;
    enc.d_model = 32;
    enc.heads = 2;
    enc.d_ff = 64;
    enc.max_len = 48;
    enc.vocab_size = static_cast<size_t>(vocab.size());
    auto bundle =
        nn::ModelBundle::init(enc, train::tasks_for_scheme(train::AuxScheme::kEkman), 0);
    num::AdamState<float> opt;
    opt.lr = 1e-3;

    auto step = [&](const nn::TaskSpec& task) {
        bundle.zero_grads();
        num::Rng rng(1);
        nn::ForwardCtx<float> ctx{true, &rng};
        loss::LossValue<float> l;
        if (task.id == nn::TaskId::kHs) {
            const auto& ex = synth.hs_domains[0][0];
            l = loss::nll_binary(
                nn::predict(bundle, tok::encode(ex.text, vocab, 48), task, ctx), {*ex.hs_label});
        } else {
            const auto& ex = synth.emotion[0];
            l = loss::nll_categorical(
                nn::predict(bundle, tok::encode(ex.text, vocab, 48), task, ctx), {0});
        }
        num::backward(l.value);
        auto params = bundle.task_params(task);
        std::map<std::string, std::vector<float>> grads;
        for (auto& [name, p] : params) grads.emplace(name, p.grad());
        num::adam_step(opt, params, grads);
    };
    auto head = [&](const std::string& prefix) {
        std::map<std::string, std::vector<float>> vals;
        for (const auto& [name, p] : bundle.params) {
            if (name.rfind(prefix, 0) == 0) vals.emplace(name, p.values());
        }
        return vals;
    };

    const auto hs_before = head("head.hs.");
    step(bundle.task(nn::TaskId::kEmotionEkman));
    check(head("head.hs.") == hs_before, "hs decoder changed by auxiliary step");

    const auto emo_before = head("head.emotion-ekman.");
    const auto enc_before = bundle.at("emb.tok").values();
    step(bundle.task(nn::TaskId::kHs));
    check(head("head.emotion-ekman.") == emo_before, "emotion decoder changed by hs step");
    check(bundle.at("emb.tok").values() != enc_before, "shared encoder did not move");
    if (out.pass) out.detail = "decoders bit-identical across opposite-task steps";
    return out;
}

// --- 8: exhaustive F1 oracle ----------------------------------------------------------

Outcome criterion8() {
    Outcome out;
    Check check{&out};
    long long checked = 0;
    for (int n = 1; n <= 8 && out.pass; ++n) {
        for (int p = 0; p < (1 << n); ++p) {
            for (int g = 0; g < (1 << n); ++g) {
                std::vector<int> pred(n), gold(n);
                int tp = 0, fp = 0, fn = 0;
                for (int i = 0; i < n; ++i) {
                    pred[i] = (p >> i) & 1;
                    gold[i] = (g >> i) & 1;
                    tp += pred[i] == 1 && gold[i] == 1;
                    fp += pred[i] == 1 && gold[i] == 0;
                    fn += pred[i] == 0 && gold[i] == 1;
                }
                const int denom = 2 * tp + fp + fn;
                const double oracle = denom == 0 ? 0.0 : 2.0 * tp / static_cast<double>(denom);
                const double got = eval::binary_f1(pred, gold);
                ++checked;
                if (std::abs(got - oracle) > 1e-12) {
                    check(false, "mismatch at n=" + std::to_string(n) + " p=" + std::to_string(p) +
                                     " g=" + std::to_string(g));
                    break;
                }
            }
        }
    }
    if (out.pass) out.detail = std::to_string(checked) + " pairs match the oracle";
    return out;
}

// --- 9: trainability and bit-identical reruns ------------------------------------------

Outcome criterion9() {
    Outcome out;
    Check check{&out};
    const fs::path root = work_dir() / "criterion9";
    fs::remove_all(root);
    const auto dat = root / "data";
    check(cli::dispatch({"synth", "--domains", "2", "--n", "400", "--overlap", "0.5", "--seed",
                         "0", "--out", dat.string()}) == 0,
          "synth failed");

    auto run = [&](const std::string& name) {
        return cli::dispatch({"train",
                              "--train", (dat / "domain0").string(),
                              "--seeds", "0",
                              "--epochs", "5",
                              "--lr", "2e-3",
                              "--batch-size", "4",
                              "--layers", "2",
                              "--d-model", "32",
                              "--heads", "2",
                              "--d-ff", "64",
                              "--max-len", "48",
                              "--vocab-size", "2000",
                              "--out", (root / name).string()});
    };
    check(run("run_a") == 0, "first train failed");
    check(run("run_b") == 0, "second train failed");

    const std::string result_a = slurp(root / "run_a" / "result.json");
    check(!result_a.empty(), "missing result.json");
    check(result_a == slurp(root / "run_b" / "result.json"), "result.json not bit-identical");
    check(slurp(root / "run_a" / "weights.emow") == slurp(root / "run_b" / "weights.emow"),
          "weights not bit-identical");

    const auto rj = nlohmann::json::parse(result_a);
    const double val = rj.at("per_seed").at(0).at("best_val_f1").get<double>();
    check(val >= 0.95, "best val F1 " + fmt(val));
    if (out.pass) out.detail = "val F1 " + fmt(val) + "; identical reruns byte-equal";
    return out;
}

// --- 10: directional multitask benefit ---------------------------------------------------

Outcome criterion10() {
    Outcome out;
    Check check{&out};
    data::SynthConfig scfg;
    scfg.domains = 3;
    scfg.n_per_domain = 1000;
    scfg.vocab_overlap = 0.3;
    scfg.explicit_rate = 0.5;
    scfg.emotion_corr = 0.8;
    scfg.seed = 0;
    const auto synth = data::synth_generate(scfg);

    std::vector<data::SplitResult> splits;
    for (int d = 0; d < 3; ++d) {
        splits.push_back(data::split(synth.hs_domains[static_cast<size_t>(d)], 0.8, 0.1, 0.1, 42));
    }

    std::map<std::string, double> cd_by_scheme;
    std::ostringstream lines;
    for (int d = 0; d < 3; ++d) {
        train::TrainData td;
        td.hs_train = splits[static_cast<size_t>(d)].train;
        td.hs_val = splits[static_cast<size_t>(d)].val;
        for (int t = 0; t < 3; ++t) {
            if (t != d) {
                td.test_sets["domain" + std::to_string(t)] = splits[static_cast<size_t>(t)].test;
            }
        }
        td.aux = synth.emotion;
        std::vector<std::string> corpus;
        for (const auto& e : td.hs_train) corpus.push_back(e.text);
        for (const auto& e : td.aux) corpus.push_back(e.text);
        const auto vocab = tok::train_vocab(corpus, 3000);

        nn::EncoderConfig enc;
        enc.layers = 2;
        enc.d_model = 32;
        enc.heads = 2;
        enc.d_ff = 64;
        enc.max_len = 48;
        enc.vocab_size = static_cast<size_t>(vocab.size());
        for (auto scheme : {train::AuxScheme::kNone, train::AuxScheme::kEkman}) {
            train::TrainConfig cfg;
            cfg.epochs = 5;
            cfg.lr = 2e-3;
            cfg.batch_size = 4;
            cfg.max_len = 48;
            cfg.seeds = {0, 1, 3};
            cfg.aux_scheme = scheme;
            const auto rr = train::run_seeds(td, enc, vocab, cfg);
            double mean_cd = 0;
            for (const auto& [name, f1] : rr.mean_test_f1) mean_cd += f1;
            mean_cd /= static_cast<double>(rr.mean_test_f1.size());
            cd_by_scheme[train::aux_scheme_name(scheme)] += mean_cd / 3.0;
            lines << "domain" << d << ',' << train::aux_scheme_name(scheme) << ','
                  << eval::format_number(mean_cd) << '\n';
        }
    }

    const double baseline = cd_by_scheme.at("none");
    const double enriched = cd_by_scheme.at("ekman");
    const double delta = enriched - baseline;
    check(delta >= -0.01, "delta " + fmt(delta));

    const fs::path report = work_dir() / "criterion10_report.md";
    std::ostringstream md;
    md << "# Synthetic cross-domain multitask benefit\n\n"
       << "Mean cross-domain F1 over seeds {0,1,3}, three training domains.\n\n"
       << "| scheme | mean CD F1 |\n|---|---|\n"
       << "| none | " << eval::format_number(baseline) << " |\n"
       << "| ekman | " << eval::format_number(enriched) << " |\n\n"
       << "Signed delta (ekman - none): " << eval::format_number(delta) << "\n\n"
       << "Per-domain means:\n\n```\n" << lines.str() << "```\n";
    {
        std::ofstream os(report);
        os << md.str();
    }
    check(slurp(report).find("Signed delta") != std::string::npos, "report missing delta");
    if (out.pass) {
        out.detail = "mean CD none " + fmt(baseline) + " vs ekman " + fmt(enriched) +
                     " (delta " + fmt(delta) + "), report " + report.string();
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"fixture arithmetic: explicit percentage fractions", criterion1},
        {"CD-average recomputation and discrepancies", criterion2},
        {"figure 3b marginal aggregation", criterion3},
        {"emotion conversion partition and union law", criterion4},
        {"loss hand values and single-term equality", criterion5},
        {"gradient fidelity vs central finite differences", criterion6},
        {"hard-parameter-sharing invariant", criterion7},
        {"binary F1 exhaustive oracle", criterion8},
        {"trainability and bit-identical reruns", criterion9},
        {"directional multitask benefit on the synthetic benchmark", criterion10},
    };

    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "usage: %s [1..%zu]\n", argv[0], criteria.size());
            return 2;
        }
    }

    bool all_pass = true;
    for (size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && static_cast<size_t>(only - 1) != i) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %zu: %s (%.1fs) %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first.c_str(), secs,
                    outcome.detail.empty() ? "" : ("- " + outcome.detail).c_str());
        std::fflush(stdout);
        all_pass = all_pass && outcome.pass;
    }
    return all_pass ? 0 : 1;
}
