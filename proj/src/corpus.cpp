#include "emoxgen/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "emoxgen/errors.hpp"
#include "emoxgen/rng.hpp"

namespace emoxgen::data {

namespace {

// Emoji codepoint ranges removed by clean_text. The list is intentionally
// coarse block-level coverage; see README for the exact inventory.
constexpr std::pair<uint32_t, uint32_t> kEmojiRanges[] = {
    {0x1F000, 0x1FAFF},  // pictographs, emoticons, transport, supplemental
    {0x2600, 0x27BF},    // misc symbols and dingbats
    {0x2B00, 0x2B5F},    // arrows, stars, squares
    {0xFE00, 0xFE0F},    // variation selectors
    {0x200D, 0x200D},    // zero-width joiner
    {0x20E3, 0x20E3},    // combining enclosing keycap
};

bool is_emoji(uint32_t cp) {
    for (auto [lo, hi] : kEmojiRanges) {
        if (cp >= lo && cp <= hi) return true;
    }
    return false;
}

void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string strip_emoji(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        const unsigned char b = static_cast<unsigned char>(s[i]);
        uint32_t cp = b;
        size_t len = 1;
        if ((b & 0xE0) == 0xC0 && i + 1 < s.size()) {
            cp = (b & 0x1Fu) << 6 | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
            len = 2;
        } else if ((b & 0xF0) == 0xE0 && i + 2 < s.size()) {
            cp = (b & 0x0Fu) << 12 | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6 |
                 (static_cast<unsigned char>(s[i + 2]) & 0x3Fu);
            len = 3;
        } else if ((b & 0xF8) == 0xF0 && i + 3 < s.size()) {
            cp = (b & 0x07u) << 18 | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 12 |
                 (static_cast<unsigned char>(s[i + 2]) & 0x3Fu) << 6 |
                 (static_cast<unsigned char>(s[i + 3]) & 0x3Fu);
            len = 4;
        }
        if (!is_emoji(cp)) append_utf8(out, cp);
        i += len;
    }
    return out;
}

bool is_url_token(const std::string& token) {
    std::string lower = token;
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return lower.rfind("http://", 0) == 0 || lower.rfind("https://", 0) == 0 ||
           lower.rfind("www.", 0) == 0;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace

std::string clean_text(const std::string& raw) {
    std::string out;
    for (const auto& token : split_ws(strip_emoji(raw))) {
        if (token[0] == '@' || token[0] == '#' || is_url_token(token)) continue;
        if (!out.empty()) out += ' ';
        out += token;
    }
    return out;
}

// --- CSV ---------------------------------------------------------------------

namespace {

// RFC-style CSV rows: quoted fields, doubled quotes, delimiters and
// newlines inside quotes.
std::vector<std::vector<std::string>> parse_delimited(const std::string& content, char delim) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    size_t i = 0;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };
    while (i < content.size()) {
        const char c = content[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == delim) {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_row();
        } else {
            field.push_back(c);
        }
        ++i;
    }
    if (!field.empty() || !row.empty()) end_row();
    return rows;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct RawRecord {
    std::string text;
    std::string label;
};

std::vector<RawRecord> read_records(const std::string& path, const DatasetSpec& spec) {
    std::vector<RawRecord> records;
    if (spec.format == FileFormat::kJsonl) {
        std::ifstream is(path);
        if (!is) throw DataError("cannot open '" + path + "'");
        std::string line;
        size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError("'" + path + "' line " + std::to_string(lineno) + ": " + e.what());
            }
            if (!j.contains(spec.text_field) || !j.contains(spec.label_field)) {
                throw SchemaError("'" + path + "' line " + std::to_string(lineno) +
                                  ": missing field '" +
                                  (j.contains(spec.text_field) ? spec.label_field : spec.text_field) +
                                  "'");
            }
            const auto& lv = j.at(spec.label_field);
            std::string label = lv.is_string() ? lv.get<std::string>() : lv.dump();
            records.push_back({j.at(spec.text_field).get<std::string>(), std::move(label)});
        }
        return records;
    }

    const char delim = spec.format == FileFormat::kTsv ? '\t' : ',';
    auto rows = parse_delimited(read_file(path), delim);
    if (rows.empty()) throw DataError("'" + path + "' is empty");
    const auto& header = rows[0];
    auto find_col = [&](const std::string& name) -> size_t {
        for (size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        std::string have;
        for (const auto& h : header) have += (have.empty() ? "" : ", ") + h;
        throw SchemaError("'" + path + "' has no column '" + name + "' (columns: " + have + ")");
    };
    const size_t text_col = find_col(spec.text_field);
    const size_t label_col = find_col(spec.label_field);
    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() <= std::max(text_col, label_col)) continue;  // ragged tail line
        records.push_back({row[text_col], row[label_col]});
    }
    return records;
}

std::string trimmed(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

std::vector<LabeledExample> load_dataset(const std::string& path, const DatasetSpec& spec,
                                         uint64_t seed) {
    const auto records = read_records(path, spec);
    std::vector<LabeledExample> pos, neg;
    const std::set<std::string> positive(spec.positive_values.begin(), spec.positive_values.end());
    for (const auto& rec : records) {
        std::string text = clean_text(rec.text);
        if (text.empty()) continue;
        LabeledExample ex;
        ex.text = std::move(text);
        ex.hs_label = positive.count(trimmed(rec.label)) ? 1 : 0;
        (*ex.hs_label == 1 ? pos : neg).push_back(std::move(ex));
    }
    if (pos.empty() || neg.empty()) {
        throw DataError("dataset '" + spec.name + "': class " + (pos.empty() ? "positive" : "negative") +
                        " is empty after filtering");
    }

    size_t take = std::min(pos.size(), neg.size());
    if (spec.policy == SamplingPolicy::kCapPerClass) take = std::min(take, spec.cap);

    num::Rng rng(seed);
    rng.shuffle(pos);
    rng.shuffle(neg);
    std::vector<LabeledExample> out;
    out.reserve(2 * take);
    out.insert(out.end(), pos.begin(), pos.begin() + static_cast<long>(take));
    out.insert(out.end(), neg.begin(), neg.begin() + static_cast<long>(take));
    rng.shuffle(out);
    return out;
}

// --- emotion taxonomy --------------------------------------------------------

const std::vector<std::string>& go_emotion_names() {
    static const std::vector<std::string> names = {
        "admiration", "amusement", "anger",       "annoyance",  "approval",  "caring",
        "confusion",  "curiosity", "desire",      "disappointment", "disapproval", "disgust",
        "embarrassment", "excitement", "fear",    "gratitude",  "grief",     "joy",
        "love",       "nervousness", "optimism",  "pride",      "realization", "relief",
        "remorse",    "sadness",   "surprise",    "neutral"};
    return names;
}

const std::vector<std::string>& ekman_emotion_names() {
    static const std::vector<std::string> names = {"anger", "disgust", "fear",
                                                   "joy",   "sadness", "surprise", "neutral"};
    return names;
}

const std::map<std::string, std::string>& go_to_ekman_map() {
    static const std::map<std::string, std::string> mapping = {
        {"anger", "anger"},         {"annoyance", "anger"},      {"disapproval", "anger"},
        {"disgust", "disgust"},
        {"fear", "fear"},           {"nervousness", "fear"},
        {"admiration", "joy"},      {"amusement", "joy"},        {"approval", "joy"},
        {"caring", "joy"},          {"desire", "joy"},           {"excitement", "joy"},
        {"gratitude", "joy"},       {"joy", "joy"},              {"love", "joy"},
        {"optimism", "joy"},        {"pride", "joy"},            {"relief", "joy"},
        {"sadness", "sadness"},     {"disappointment", "sadness"}, {"embarrassment", "sadness"},
        {"grief", "sadness"},       {"remorse", "sadness"},
        {"surprise", "surprise"},   {"realization", "surprise"}, {"confusion", "surprise"},
        {"curiosity", "surprise"},
    };
    return mapping;
}

int go_index(const std::string& name) {
    const auto& names = go_emotion_names();
    for (size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<int>(i);
    }
    throw TaxonomyError("unknown GoEmotions label '" + name + "'");
}

int ekman_index(const std::string& name) {
    const auto& names = ekman_emotion_names();
    for (size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<int>(i);
    }
    throw TaxonomyError("unknown Ekman label '" + name + "'");
}

std::vector<std::string> map_to_ekman(const std::vector<std::string>& emotions) {
    std::set<std::string> out;
    const auto& mapping = go_to_ekman_map();
    for (const auto& e : emotions) {
        if (e == kNeutral) {
            out.insert(kNeutral);
            continue;
        }
        auto it = mapping.find(e);
        if (it == mapping.end()) throw TaxonomyError("unknown GoEmotions label '" + e + "'");
        out.insert(it->second);
    }
    return {out.begin(), out.end()};
}

std::optional<std::string> reduce_single_label(const LabeledExample& example) {
    if (!example.emotions) {
        throw ContractError("reduce_single_label: example has no emotion labels");
    }
    auto mapped = map_to_ekman(*example.emotions);
    if (mapped.size() == 1) return mapped.front();
    return std::nullopt;
}

// --- splitting ---------------------------------------------------------------

namespace {

std::string stratum_key(const LabeledExample& ex) {
    if (ex.hs_label) return "hs:" + std::to_string(*ex.hs_label);
    if (ex.emotions) {
        auto mapped = map_to_ekman(*ex.emotions);
        return mapped.size() == 1 ? "em:" + mapped.front() : "em:multi";
    }
    return "none";
}

}  // namespace

SplitResult split(const std::vector<LabeledExample>& data, double train_ratio, double val_ratio,
                  double test_ratio, uint64_t seed) {
    if (train_ratio <= 0 || val_ratio <= 0 || test_ratio <= 0 ||
        std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9) {
        throw ContractError("split: ratios must be positive and sum to 1");
    }
    std::map<std::string, std::vector<size_t>> strata;
    for (size_t i = 0; i < data.size(); ++i) strata[stratum_key(data[i])].push_back(i);

    num::Rng rng(seed);
    SplitResult out;
    for (auto& [key, idx] : strata) {
        rng.shuffle(idx);
        const size_t n = idx.size();
        const size_t n_train = static_cast<size_t>(static_cast<double>(n) * train_ratio);
        const size_t n_val = static_cast<size_t>(static_cast<double>(n) * val_ratio);
        const size_t n_test = n - n_train - n_val;
        if (n_train == 0 || n_val == 0 || n_test == 0) {
            throw DataError("split: stratum '" + key + "' with " + std::to_string(n) +
                            " examples yields an empty split");
        }
        for (size_t i = 0; i < n_train; ++i) out.train.push_back(data[idx[i]]);
        for (size_t i = n_train; i < n_train + n_val; ++i) out.val.push_back(data[idx[i]]);
        for (size_t i = n_train + n_val; i < n; ++i) out.test.push_back(data[idx[i]]);
    }
    rng.shuffle(out.train);
    rng.shuffle(out.val);
    rng.shuffle(out.test);
    return out;
}

// --- JSONL -------------------------------------------------------------------

void write_jsonl(const std::string& path, const std::vector<LabeledExample>& examples) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    for (const auto& ex : examples) {
        nlohmann::ordered_json j;
        j["text"] = ex.text;
        if (ex.hs_label) j["label"] = *ex.hs_label;
        if (ex.emotions) j["emotions"] = *ex.emotions;
        os << j.dump() << '\n';
    }
    if (!os) throw DataError("failed writing '" + path + "'");
}

std::vector<LabeledExample> read_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open '" + path + "'");
    std::vector<LabeledExample> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("'" + path + "' line " + std::to_string(lineno) + ": " + e.what());
        }
        LabeledExample ex;
        if (!j.contains("text") || !j.at("text").is_string()) {
            throw SchemaError("'" + path + "' line " + std::to_string(lineno) +
                              ": missing string field 'text'");
        }
        ex.text = j.at("text").get<std::string>();
        if (j.contains("label")) ex.hs_label = j.at("label").get<int>();
        if (j.contains("emotions")) {
            std::vector<std::string> ems = j.at("emotions").get<std::vector<std::string>>();
            std::sort(ems.begin(), ems.end());
            ems.erase(std::unique(ems.begin(), ems.end()), ems.end());
            ex.emotions = std::move(ems);
        }
        if (!ex.hs_label && !ex.emotions) {
            throw SchemaError("'" + path + "' line " + std::to_string(lineno) +
                              ": record has neither 'label' nor 'emotions'");
        }
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace emoxgen::data
