#include "emoxgen/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "emoxgen/corpus.hpp"
#include "emoxgen/errors.hpp"
#include "emoxgen/evalkit.hpp"
#include "emoxgen/model.hpp"
#include "emoxgen/synth.hpp"
#include "emoxgen/tokenizer.hpp"
#include "emoxgen/trainer.hpp"
#include "emoxgen/weights.hpp"

namespace emoxgen::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// --- config (de)serialization --------------------------------------------------

ordered_json encoder_to_json(const nn::EncoderConfig& cfg) {
    return ordered_json{{"layers", cfg.layers},   {"d_model", cfg.d_model},
                        {"heads", cfg.heads},     {"d_ff", cfg.d_ff},
                        {"dropout", cfg.dropout}, {"max_len", cfg.max_len},
                        {"vocab_size", cfg.vocab_size}};
}

nn::EncoderConfig encoder_from_json(const json& j) {
    nn::EncoderConfig cfg;
    cfg.layers = j.value("layers", cfg.layers);
    cfg.d_model = j.value("d_model", cfg.d_model);
    cfg.heads = j.value("heads", cfg.heads);
    cfg.d_ff = j.value("d_ff", cfg.d_ff);
    cfg.dropout = j.value("dropout", cfg.dropout);
    cfg.max_len = j.value("max_len", cfg.max_len);
    cfg.vocab_size = j.value("vocab_size", cfg.vocab_size);
    return cfg;
}

ordered_json train_to_json(const train::TrainConfig& cfg) {
    return ordered_json{
        {"epochs", cfg.epochs},
        {"batch_size", cfg.batch_size},
        {"lr", cfg.lr},
        {"seeds", cfg.seeds},
        {"early_stop_patience", cfg.early_stop_patience},
        {"aux_scheme", train::aux_scheme_name(cfg.aux_scheme)},
        {"task_mix", cfg.task_mix == train::TaskMix::kRoundRobin ? "roundrobin" : "proportional"},
        {"max_len", cfg.max_len},
        {"normalize_nll", cfg.normalize_nll}};
}

train::TrainConfig train_from_json(const json& j) {
    train::TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.seeds = j.value("seeds", cfg.seeds);
    cfg.early_stop_patience = j.value("early_stop_patience", cfg.early_stop_patience);
    cfg.aux_scheme = train::aux_scheme_from(j.value("aux_scheme", std::string("none")));
    const std::string mix = j.value("task_mix", std::string("roundrobin"));
    if (mix != "roundrobin" && mix != "proportional") {
        throw ConfigError("unknown task_mix '" + mix + "'");
    }
    cfg.task_mix = mix == "roundrobin" ? train::TaskMix::kRoundRobin : train::TaskMix::kProportional;
    cfg.max_len = j.value("max_len", cfg.max_len);
    cfg.normalize_nll = j.value("normalize_nll", cfg.normalize_nll);
    return cfg;
}

json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open '" + path + "'");
    try {
        json j;
        is >> j;
        return j;
    } catch (const json::exception& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
}

void write_text_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path.string() + "' for writing");
    os << content;
    if (!os) throw DataError("failed writing '" + path.string() + "'");
}

// Every artifact directory/file gets the manifest that produced it.
void write_manifest(const fs::path& out, bool out_is_dir, const ordered_json& manifest) {
    const fs::path path = out_is_dir ? out / "manifest.json" : fs::path(out.string() + ".manifest.json");
    write_text_file(path, manifest.dump(2) + "\n");
}

std::vector<uint64_t> parse_seeds(const std::string& csv) {
    std::vector<uint64_t> seeds;
    std::string cur;
    std::istringstream is(csv);
    while (std::getline(is, cur, ',')) {
        if (cur.empty()) continue;
        try {
            seeds.push_back(std::stoull(cur));
        } catch (const std::exception&) {
            throw ConfigError("bad seed '" + cur + "' in '" + csv + "'");
        }
    }
    if (seeds.empty()) throw ConfigError("no seeds in '" + csv + "'");
    return seeds;
}

// --- prepare --------------------------------------------------------------------

struct PrepareArgs {
    std::string input, out;
    std::string task = "hs";
    std::string format = "csv";
    std::string text_col = "text", label_col = "label";
    std::string positive = "1";
    std::string policy = "cap";
    size_t cap = 5000;
    std::string name = "dataset", domain;
    std::string split = "0.8,0.1,0.1";
    uint64_t seed = 0;
    uint64_t split_seed = 42;
};

std::tuple<double, double, double> parse_ratios(const std::string& csv) {
    double r[3];
    std::istringstream is(csv);
    std::string cur;
    for (int i = 0; i < 3; ++i) {
        if (!std::getline(is, cur, ',')) throw ConfigError("--split needs three ratios");
        try {
            r[i] = std::stod(cur);
        } catch (const std::exception&) {
            throw ConfigError("bad ratio '" + cur + "'");
        }
    }
    return {r[0], r[1], r[2]};
}

int cmd_prepare(const PrepareArgs& a) {
    std::vector<data::LabeledExample> examples;
    if (a.task == "hs") {
        data::DatasetSpec spec;
        spec.name = a.name;
        spec.domain = a.domain;
        spec.format = a.format == "tsv"     ? data::FileFormat::kTsv
                      : a.format == "jsonl" ? data::FileFormat::kJsonl
                                            : data::FileFormat::kCsv;
        spec.text_field = a.text_col;
        spec.label_field = a.label_col;
        spec.positive_values.clear();
        std::istringstream is(a.positive);
        std::string v;
        while (std::getline(is, v, ',')) spec.positive_values.push_back(v);
        spec.policy = a.policy == "downsample" ? data::SamplingPolicy::kDownsampleNegatives
                                               : data::SamplingPolicy::kCapPerClass;
        spec.cap = a.cap;
        examples = data::load_dataset(a.input, spec, a.seed);
    } else if (a.task == "emotion") {
        for (auto& ex : data::read_jsonl(a.input)) {
            if (!ex.emotions) {
                throw SchemaError("'" + a.input + "': emotion record without 'emotions'");
            }
            ex.text = data::clean_text(ex.text);
            if (ex.text.empty()) continue;
            examples.push_back(std::move(ex));
        }
        if (examples.empty()) throw DataError("'" + a.input + "': no usable emotion records");
    } else {
        throw ConfigError("--task must be hs or emotion, got '" + a.task + "'");
    }

    const auto [tr, va, te] = parse_ratios(a.split);
    auto parts = data::split(examples, tr, va, te, a.split_seed);
    fs::create_directories(a.out);
    data::write_jsonl((fs::path(a.out) / "train.jsonl").string(), parts.train);
    data::write_jsonl((fs::path(a.out) / "val.jsonl").string(), parts.val);
    data::write_jsonl((fs::path(a.out) / "test.jsonl").string(), parts.test);

    write_manifest(a.out, true,
                   ordered_json{{"command", "prepare"},
                                {"input", a.input},
                                {"task", a.task},
                                {"format", a.format},
                                {"text_col", a.text_col},
                                {"label_col", a.label_col},
                                {"positive", a.positive},
                                {"policy", a.policy},
                                {"cap", a.cap},
                                {"name", a.name},
                                {"domain", a.domain},
                                {"split", a.split},
                                {"seed", a.seed},
                                {"split_seed", a.split_seed},
                                {"out", a.out}});
    std::cout << "prepared " << examples.size() << " examples -> " << a.out << " ("
              << parts.train.size() << "/" << parts.val.size() << "/" << parts.test.size()
              << ")\n";
    return 0;
}

// --- synth ----------------------------------------------------------------------

int cmd_synth(const data::SynthConfig& cfg, const std::string& out) {
    data::synth_write(cfg, out);
    write_manifest(out, true,
                   ordered_json{{"command", "synth"},
                                {"domains", cfg.domains},
                                {"n", cfg.n_per_domain},
                                {"overlap", cfg.vocab_overlap},
                                {"explicit_rate", cfg.explicit_rate},
                                {"emotion_corr", cfg.emotion_corr},
                                {"emotion_n", cfg.emotion_n},
                                {"seed", cfg.seed},
                                {"out", out}});
    std::cout << "synthesized " << cfg.domains << " domains -> " << out << "\n";
    return 0;
}

// --- train ----------------------------------------------------------------------

struct TrainArgs {
    std::string train_path, val_path, aux_path, out;
    std::string aux_scheme = "none";
    std::string config_path, manifest_path, init_weights;
    std::string seeds;
    std::vector<std::string> tests;  // name=path
    uint64_t split_seed = 42;
    size_t vocab_budget = 8000;
    // encoder overrides (<0 / 0 means "not set")
    long layers = -1, d_model = -1, heads = -1, d_ff = -1, max_len = -1;
    double dropout = -1.0;
    long epochs = -1, batch_size = -1, patience = -1;
    double lr = -1.0;
    std::string task_mix;
};

struct ResolvedData {
    std::vector<data::LabeledExample> train, val;
    std::map<std::string, std::vector<data::LabeledExample>> tests;
};

ResolvedData resolve_hs_data(const TrainArgs& a) {
    ResolvedData out;
    const fs::path p(a.train_path);
    if (fs::is_directory(p)) {
        out.train = data::read_jsonl((p / "train.jsonl").string());
        out.val = data::read_jsonl(!a.val_path.empty() ? a.val_path : (p / "val.jsonl").string());
        if (fs::exists(p / "test.jsonl")) {
            out.tests.emplace("self", data::read_jsonl((p / "test.jsonl").string()));
        }
    } else if (!a.val_path.empty()) {
        out.train = data::read_jsonl(a.train_path);
        out.val = data::read_jsonl(a.val_path);
    } else {
        auto parts = data::split(data::read_jsonl(a.train_path), 0.8, 0.1, 0.1, a.split_seed);
        out.train = std::move(parts.train);
        out.val = std::move(parts.val);
        out.tests.emplace("self", std::move(parts.test));
    }
    for (const auto& spec : a.tests) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--test expects name=path, got '" + spec + "'");
        }
        out.tests[spec.substr(0, eq)] = data::read_jsonl(spec.substr(eq + 1));
    }
    return out;
}

std::vector<data::LabeledExample> resolve_aux_data(const std::string& path) {
    if (path.empty()) return {};
    const fs::path p(path);
    return data::read_jsonl(fs::is_directory(p) ? (p / "train.jsonl").string() : path);
}

int cmd_train(TrainArgs a) {
    json manifest_in;
    if (!a.manifest_path.empty()) {
        manifest_in = load_json_file(a.manifest_path);
        const json& m = manifest_in;
        if (a.train_path.empty()) a.train_path = m.value("train", "");
        if (a.val_path.empty()) a.val_path = m.value("val", "");
        if (a.aux_path.empty()) a.aux_path = m.value("aux", "");
        if (a.aux_scheme == "none") a.aux_scheme = m.value("aux_scheme", "none");
        if (a.config_path.empty()) a.config_path = m.value("config", "");
        if (a.seeds.empty() && m.contains("seeds")) a.seeds = m.at("seeds").get<std::string>();
        if (a.tests.empty() && m.contains("tests")) {
            a.tests = m.at("tests").get<std::vector<std::string>>();
        }
        if (a.out.empty()) a.out = m.value("out", "");
        if (a.init_weights.empty()) a.init_weights = m.value("init_weights", "");
        a.split_seed = m.value("split_seed", a.split_seed);
        a.vocab_budget = m.value("vocab_budget", a.vocab_budget);
    }
    if (a.train_path.empty()) throw ConfigError("train: --train is required");
    if (a.out.empty()) throw ConfigError("train: --out is required");

    nn::EncoderConfig enc;
    train::TrainConfig cfg;
    if (!a.config_path.empty()) {
        const json j = load_json_file(a.config_path);
        if (j.contains("encoder")) enc = encoder_from_json(j.at("encoder"));
        if (j.contains("train")) cfg = train_from_json(j.at("train"));
    }
    // A manifest's resolved configs take over from the defaults so a rerun
    // reproduces the original run exactly.
    if (manifest_in.contains("encoder")) enc = encoder_from_json(manifest_in.at("encoder"));
    if (manifest_in.contains("train_config")) cfg = train_from_json(manifest_in.at("train_config"));
    if (a.layers > 0) enc.layers = static_cast<size_t>(a.layers);
    if (a.d_model > 0) enc.d_model = static_cast<size_t>(a.d_model);
    if (a.heads > 0) enc.heads = static_cast<size_t>(a.heads);
    if (a.d_ff > 0) enc.d_ff = static_cast<size_t>(a.d_ff);
    if (a.dropout >= 0) enc.dropout = a.dropout;
    if (a.max_len > 0) {
        enc.max_len = static_cast<size_t>(a.max_len);
        cfg.max_len = static_cast<size_t>(a.max_len);
    }
    if (a.epochs > 0) cfg.epochs = static_cast<size_t>(a.epochs);
    if (a.batch_size > 0) cfg.batch_size = static_cast<size_t>(a.batch_size);
    if (a.patience > 0) cfg.early_stop_patience = static_cast<size_t>(a.patience);
    if (a.lr > 0) cfg.lr = a.lr;
    if (!a.task_mix.empty()) {
        if (a.task_mix != "roundrobin" && a.task_mix != "proportional") {
            throw ConfigError("--task-mix must be roundrobin or proportional");
        }
        cfg.task_mix = a.task_mix == "roundrobin" ? train::TaskMix::kRoundRobin
                                                  : train::TaskMix::kProportional;
    }
    cfg.aux_scheme = train::aux_scheme_from(a.aux_scheme);
    if (!a.seeds.empty()) cfg.seeds = parse_seeds(a.seeds);
    cfg.validate();

    train::TrainData td;
    auto resolved = resolve_hs_data(a);
    td.hs_train = std::move(resolved.train);
    td.hs_val = std::move(resolved.val);
    td.test_sets = std::move(resolved.tests);
    td.aux = resolve_aux_data(a.aux_path);

    std::vector<std::string> corpus;
    for (const auto& e : td.hs_train) corpus.push_back(e.text);
    for (const auto& e : td.aux) corpus.push_back(e.text);
    const tok::Vocab vocab = tok::train_vocab(corpus, a.vocab_budget);
    enc.vocab_size = static_cast<size_t>(vocab.size());
    enc.validate();

    const fs::path out(a.out);
    fs::create_directories(out);
    vocab.save((out / "vocab.txt").string());

    std::vector<nn::ModelBundle> bundles;
    train::RunResult result;
    const auto tasks = train::tasks_for_scheme(cfg.aux_scheme);
    for (uint64_t seed : cfg.seeds) {
        auto bundle = nn::ModelBundle::init(enc, tasks, seed);
        if (!a.init_weights.empty()) nn::load_bundle_weights(bundle, a.init_weights);
        result.per_seed.push_back(train::train_multitask(td, bundle, vocab, cfg, seed));
        nn::save_bundle_weights(bundle,
                                (out / ("weights.seed" + std::to_string(seed) + ".emow")).string());
        bundles.push_back(std::move(bundle));
    }
    for (const auto& [name, examples] : td.test_sets) {
        double total = 0;
        for (const auto& sr : result.per_seed) total += sr.test_f1.at(name);
        result.mean_test_f1[name] = total / static_cast<double>(result.per_seed.size());
    }

    // weights.emow carries the best seed's checkpoint (highest validation F1,
    // first seed on ties).
    size_t best = 0;
    for (size_t i = 1; i < result.per_seed.size(); ++i) {
        if (result.per_seed[i].best_val_f1 > result.per_seed[best].best_val_f1) best = i;
    }
    nn::save_bundle_weights(bundles[best], (out / "weights.emow").string());

    write_text_file(out / "config.json",
                    ordered_json{{"encoder", encoder_to_json(enc)}, {"train", train_to_json(cfg)}}
                            .dump(2) +
                        "\n");

    std::ostringstream log;
    log << "seed,epoch,task,mean_loss,val_f1\n";
    for (const auto& sr : result.per_seed) {
        for (const auto& entry : sr.log) {
            log << sr.seed << ',' << entry.epoch << ',' << entry.task << ','
                << eval::format_number(entry.mean_loss) << ',';
            if (entry.val_f1) log << eval::format_number(*entry.val_f1);
            log << '\n';
        }
    }
    write_text_file(out / "log.csv", log.str());

    ordered_json rj;
    rj["mean_test_f1"] = result.mean_test_f1;
    rj["weights"] = "weights.emow";
    rj["per_seed"] = ordered_json::array();
    for (const auto& sr : result.per_seed) {
        ordered_json s{{"seed", sr.seed},
                       {"best_val_f1", sr.best_val_f1},
                       {"best_epoch", sr.best_epoch},
                       {"optimizer_steps", sr.optimizer_steps},
                       {"test_f1", sr.test_f1}};
        rj["per_seed"].push_back(std::move(s));
    }
    write_text_file(out / "result.json", rj.dump(2) + "\n");

    write_manifest(out, true,
                   ordered_json{{"command", "train"},
                                {"train", a.train_path},
                                {"val", a.val_path},
                                {"aux", a.aux_path},
                                {"aux_scheme", train::aux_scheme_name(cfg.aux_scheme)},
                                {"config", a.config_path},
                                {"init_weights", a.init_weights},
                                {"seeds", [&] {
                                     std::string s;
                                     for (uint64_t v : cfg.seeds) {
                                         if (!s.empty()) s += ',';
                                         s += std::to_string(v);
                                     }
                                     return s;
                                 }()},
                                {"tests", a.tests},
                                {"split_seed", a.split_seed},
                                {"vocab_budget", a.vocab_budget},
                                {"encoder", encoder_to_json(enc)},
                                {"train_config", train_to_json(cfg)},
                                {"out", a.out}});

    std::cout << "trained " << cfg.seeds.size() << " seed(s) -> " << a.out << "\n";
    for (const auto& [name, f1] : result.mean_test_f1) {
        std::cout << "  mean F1 " << name << " = " << eval::format_number(f1) << "\n";
    }
    return 0;
}

// --- eval / matrix ---------------------------------------------------------------

struct LoadedRun {
    nn::EncoderConfig enc;
    train::AuxScheme scheme = train::AuxScheme::kNone;
    size_t max_len = 128;
    tok::Vocab vocab;
    std::vector<nn::ModelBundle> bundles;  // one per seed weight file, frozen
};

LoadedRun load_run(const fs::path& dir) {
    LoadedRun run;
    const json cfg = load_json_file((dir / "config.json").string());
    run.enc = encoder_from_json(cfg.at("encoder"));
    const auto tcfg = train_from_json(cfg.at("train"));
    run.scheme = tcfg.aux_scheme;
    run.max_len = tcfg.max_len;
    run.vocab = tok::Vocab::load((dir / "vocab.txt").string());

    std::vector<fs::path> weight_files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("weights.seed", 0) == 0 && name.size() > 5 &&
            name.substr(name.size() - 5) == ".emow") {
            weight_files.push_back(entry.path());
        }
    }
    std::sort(weight_files.begin(), weight_files.end());
    if (weight_files.empty()) weight_files.push_back(dir / "weights.emow");
    for (const auto& wf : weight_files) {
        auto bundle = nn::ModelBundle::init(run.enc, train::tasks_for_scheme(run.scheme), 0);
        nn::load_bundle_weights(bundle, wf.string());
        nn::freeze(bundle);
        run.bundles.push_back(std::move(bundle));
    }
    return run;
}

double run_mean_f1(const LoadedRun& run, const std::vector<data::LabeledExample>& test) {
    double total = 0;
    for (const auto& bundle : run.bundles) {
        total += train::evaluate_f1(bundle, run.vocab, test, run.max_len);
    }
    return total / static_cast<double>(run.bundles.size());
}

int cmd_eval(const std::string& run_dir, const std::string& test_path, const std::string& name,
             const std::string& out) {
    const LoadedRun run = load_run(run_dir);
    const auto test = data::read_jsonl(test_path);
    const double f1 = run_mean_f1(run, test);
    std::cout << name << "," << eval::format_number(f1) << "\n";
    if (!out.empty()) {
        write_text_file(out, ordered_json{{"test", name}, {"f1", f1}}.dump(2) + "\n");
        write_manifest(out, false,
                       ordered_json{{"command", "eval"},
                                    {"run", run_dir},
                                    {"test", test_path},
                                    {"name", name},
                                    {"out", out}});
    }
    return 0;
}

size_t default_jobs() {
    if (const char* env = std::getenv("EMOXGEN_JOBS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<size_t>(v);
    }
    return 1;
}

int cmd_matrix(const std::string& runs_dir, const std::string& tests_dir, const std::string& out,
               size_t jobs) {
    std::vector<std::pair<std::string, fs::path>> runs;
    for (const auto& entry : fs::directory_iterator(runs_dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "config.json")) {
            runs.emplace_back(entry.path().filename().string(), entry.path());
        }
    }
    std::sort(runs.begin(), runs.end());
    if (runs.empty()) throw DataError("no run directories under '" + runs_dir + "'");

    std::vector<std::pair<std::string, fs::path>> tests;
    for (const auto& entry : fs::directory_iterator(tests_dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "test.jsonl")) {
            tests.emplace_back(entry.path().filename().string(), entry.path() / "test.jsonl");
        } else if (entry.path().extension() == ".jsonl") {
            tests.emplace_back(entry.path().stem().string(), entry.path());
        }
    }
    std::sort(tests.begin(), tests.end());
    if (tests.empty()) throw DataError("no test sets under '" + tests_dir + "'");

    std::vector<LoadedRun> loaded;
    loaded.reserve(runs.size());
    for (const auto& [name, dir] : runs) loaded.push_back(load_run(dir));
    std::vector<std::vector<data::LabeledExample>> test_data;
    test_data.reserve(tests.size());
    for (const auto& [name, path] : tests) test_data.push_back(data::read_jsonl(path.string()));

    // Each (run, test) cell is independent; merge order is fixed by index.
    eval::ResultMatrix m;
    for (const auto& [name, dir] : runs) m.row_labels.push_back(name);
    for (const auto& [name, path] : tests) m.col_labels.push_back(name);
    m.cells.assign(runs.size(), std::vector<double>(tests.size(), 0.0));
    m.cd_printed.assign(runs.size(), std::nullopt);

    std::atomic<size_t> next{0};
    const size_t total = runs.size() * tests.size();
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= total) return;
            const size_t r = i / tests.size();
            const size_t t = i % tests.size();
            m.cells[r][t] = run_mean_f1(loaded[r], test_data[t]);
        }
    };
    const size_t n_threads = std::max<size_t>(1, std::min(jobs, total));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }

    write_text_file(out, m.to_csv());
    write_manifest(out, false,
                   ordered_json{{"command", "matrix"},
                                {"runs", runs_dir},
                                {"tests", tests_dir},
                                {"jobs", jobs},
                                {"out", out}});
    std::cout << "matrix " << runs.size() << "x" << tests.size() << " -> " << out << "\n";
    return 0;
}

// --- analyze / fixture-check -------------------------------------------------------

int cmd_analyze(const std::string& matrix_path, const std::string& matrix2_path,
                const std::string& label, const std::string& label2, const std::string& baseline,
                double tolerance, const std::string& out) {
    auto m = eval::ResultMatrix::from_csv(matrix_path);
    auto report = eval::analyze_matrix(m, tolerance);

    if (!baseline.empty()) {
        const size_t base = m.row_index(baseline);
        for (size_t r = 0; r < m.row_labels.size(); ++r) {
            if (r == base) continue;
            const double b = eval::cd_average(m, base);
            const double e = eval::cd_average(m, r);
            report.row_uplifts.push_back(
                {m.row_labels[r] + " vs " + baseline, b, e, eval::pct_change(b, e)});
        }
    }
    if (!matrix2_path.empty()) {
        std::map<std::string, eval::ResultMatrix> matrices{
            {label, m}, {label2, eval::ResultMatrix::from_csv(matrix2_path)}};
        for (auto collapse : {eval::Collapse::kEmotionCorpus, eval::Collapse::kBaseModel}) {
            auto entries = eval::marginal_aggregate(matrices, collapse);
            report.marginals.insert(report.marginals.end(), entries.begin(), entries.end());
        }
    }

    const std::string md = eval::render_markdown(m, report);
    write_text_file(out, md);
    const fs::path csv_path = fs::path(out).replace_extension(".csv");
    write_text_file(csv_path, eval::render_csv(report));
    write_manifest(out, false,
                   ordered_json{{"command", "analyze"},
                                {"matrix", matrix_path},
                                {"matrix2", matrix2_path},
                                {"label", label},
                                {"label2", label2},
                                {"baseline", baseline},
                                {"tolerance", tolerance},
                                {"out", out}});
    std::cout << "report -> " << out << " and " << csv_path.string() << "\n";
    return 0;
}

int cmd_fixture_check(const std::string& fixture_path, double tolerance, const std::string& out) {
    const auto fixture = eval::ResultMatrix::from_csv(fixture_path);
    const auto report = eval::verify_fixture(fixture, tolerance);
    std::cout << "fixture " << fixture_path << ": " << report.discrepancies.size()
              << " CD-average discrepancies at tolerance " << eval::format_number(tolerance)
              << "\n";
    for (const auto& d : report.discrepancies) {
        std::cout << "  " << d.row_label << ": printed " << eval::format_number(d.printed)
                  << " recomputed " << eval::format_number(d.recomputed) << "\n";
    }
    if (!out.empty()) {
        write_text_file(out, eval::render_markdown(fixture, report));
        write_manifest(out, false,
                       ordered_json{{"command", "fixture-check"},
                                    {"fixture", fixture_path},
                                    {"tolerance", tolerance},
                                    {"out", out}});
    }
    return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"emoxgen: multitask emotion-enriched text classification toolkit"};
    app.require_subcommand(1);

    // prepare
    PrepareArgs pa;
    auto* prepare = app.add_subcommand("prepare", "Ingest, clean and split a dataset");
    prepare->add_option("--input", pa.input, "Source file")->required();
    prepare->add_option("--out", pa.out, "Output directory")->required();
    prepare->add_option("--task", pa.task, "hs|emotion");
    prepare->add_option("--format", pa.format, "csv|tsv|jsonl");
    prepare->add_option("--text-col", pa.text_col, "Text column/field");
    prepare->add_option("--label-col", pa.label_col, "Label column/field");
    prepare->add_option("--positive", pa.positive, "Comma-separated positive label values");
    prepare->add_option("--policy", pa.policy, "cap|downsample");
    prepare->add_option("--cap", pa.cap, "Per-class cap for the cap policy");
    prepare->add_option("--name", pa.name, "Dataset name");
    prepare->add_option("--domain", pa.domain, "Source domain");
    prepare->add_option("--split", pa.split, "train,val,test ratios");
    prepare->add_option("--seed", pa.seed, "Sampling seed");
    prepare->add_option("--split-seed", pa.split_seed, "Split seed");

    // synth
    data::SynthConfig sc;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Generate the synthetic multi-domain benchmark");
    synth->add_option("--domains", sc.domains, "Number of HS domains");
    synth->add_option("--n", sc.n_per_domain, "Examples per domain");
    synth->add_option("--overlap", sc.vocab_overlap, "Cross-domain vocabulary overlap (rho)");
    synth->add_option("--explicit-rate", sc.explicit_rate, "Share of explicit positives");
    synth->add_option("--emotion-corr", sc.emotion_corr, "Emotion/hatefulness correlation (kappa)");
    synth->add_option("--emotion-n", sc.emotion_n, "Emotion corpus size (0 = 2n)");
    synth->add_option("--seed", sc.seed, "Generator seed");
    synth->add_option("--out", synth_out, "Output directory")->required();

    // train
    TrainArgs ta;
    auto* tr = app.add_subcommand("train", "Train HS classifier, optionally with emotion auxiliary");
    tr->add_option("--train", ta.train_path, "Training data (dir or jsonl)");
    tr->add_option("--val", ta.val_path, "Validation jsonl");
    tr->add_option("--aux", ta.aux_path, "Auxiliary emotion data (dir or jsonl)");
    tr->add_option("--aux-scheme", ta.aux_scheme, "none|go|ekman");
    tr->add_option("--config", ta.config_path, "JSON config with encoder/train sections");
    tr->add_option("--manifest", ta.manifest_path, "Manifest JSON with all train options");
    tr->add_option("--init-weights", ta.init_weights, "EMOW1 file for initialization");
    tr->add_option("--seeds", ta.seeds, "Comma-separated seeds");
    tr->add_option("--test", ta.tests, "name=path test sets (repeatable)");
    tr->add_option("--out", ta.out, "Run directory");
    tr->add_option("--split-seed", ta.split_seed, "Split seed when --train is a single file");
    tr->add_option("--vocab-size", ta.vocab_budget, "Tokenizer vocabulary budget");
    tr->add_option("--layers", ta.layers, "Encoder layers");
    tr->add_option("--d-model", ta.d_model, "Model width");
    tr->add_option("--heads", ta.heads, "Attention heads");
    tr->add_option("--d-ff", ta.d_ff, "Feed-forward width");
    tr->add_option("--dropout", ta.dropout, "Dropout rate");
    tr->add_option("--max-len", ta.max_len, "Maximum token sequence length");
    tr->add_option("--epochs", ta.epochs, "Training epochs");
    tr->add_option("--batch-size", ta.batch_size, "Batch size");
    tr->add_option("--patience", ta.patience, "Early-stopping patience");
    tr->add_option("--lr", ta.lr, "Learning rate");
    tr->add_option("--task-mix", ta.task_mix, "roundrobin|proportional");

    // eval
    std::string eval_run, eval_test, eval_name = "test", eval_out;
    auto* ev = app.add_subcommand("eval", "Evaluate a run on one test set");
    ev->add_option("--run", eval_run, "Run directory")->required();
    ev->add_option("--test", eval_test, "Test jsonl")->required();
    ev->add_option("--name", eval_name, "Label for the test set");
    ev->add_option("--out", eval_out, "Optional JSON output path");

    // matrix
    std::string mx_runs, mx_tests, mx_out;
    size_t mx_jobs = default_jobs();
    auto* mx = app.add_subcommand("matrix", "Evaluate all runs against all test sets");
    mx->add_option("--runs", mx_runs, "Directory of run directories")->required();
    mx->add_option("--tests", mx_tests, "Directory of test sets")->required();
    mx->add_option("--out", mx_out, "Output matrix CSV")->required();
    mx->add_option("--jobs", mx_jobs, "Parallel cell jobs (default EMOXGEN_JOBS or 1)");

    // analyze
    std::string an_matrix, an_matrix2, an_label = "a", an_label2 = "b", an_baseline, an_out;
    double an_tol = 0.001;
    auto* an = app.add_subcommand("analyze", "Derive CD averages, declines and uplifts");
    an->add_option("--matrix", an_matrix, "Result matrix CSV")->required();
    an->add_option("--matrix2", an_matrix2, "Second matrix for marginal aggregation");
    an->add_option("--label", an_label, "Label for --matrix");
    an->add_option("--label2", an_label2, "Label for --matrix2");
    an->add_option("--baseline", an_baseline, "Baseline row for extra uplift comparisons");
    an->add_option("--tolerance", an_tol, "Discrepancy tolerance");
    an->add_option("--out", an_out, "Markdown report path")->required();

    // fixture-check
    std::string fx_fixture, fx_out;
    double fx_tol = 0.001;
    auto* fx = app.add_subcommand("fixture-check", "Recompute a shipped fixture's CD column");
    fx->add_option("--fixture", fx_fixture, "Fixture CSV")->required();
    fx->add_option("--tolerance", fx_tol, "Discrepancy tolerance");
    fx->add_option("--out", fx_out, "Optional Markdown report path");

    try {
        app.parse(argc, argv);
        if (*prepare) return cmd_prepare(pa);
        if (*synth) return cmd_synth(sc, synth_out);
        if (*tr) return cmd_train(ta);
        if (*ev) return cmd_eval(eval_run, eval_test, eval_name, eval_out);
        if (*mx) return cmd_matrix(mx_runs, mx_tests, mx_out, mx_jobs);
        if (*an) return cmd_analyze(an_matrix, an_matrix2, an_label, an_label2, an_baseline,
                                    an_tol, an_out);
        if (*fx) return cmd_fixture_check(fx_fixture, fx_tol, fx_out);
        return 1;
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_validation_error(e) ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int dispatch(const std::vector<std::string>& args) {
    std::vector<std::string> full;
    full.push_back("emoxgen");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const auto& s : full) argv.push_back(s.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace emoxgen::cli
