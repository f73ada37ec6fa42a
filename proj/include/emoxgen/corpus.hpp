#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emoxgen::data {

// One (text, target) pair. Binary hate-speech label and/or an emotion
// label set; at least one of the two is present.
struct LabeledExample {
    std::string text;
    std::optional<int> hs_label;                          // 1 = hateful
    std::optional<std::vector<std::string>> emotions;     // sorted, unique

    bool operator==(const LabeledExample&) const = default;
};

// --- text preprocessing -----------------------------------------------------

// Removes @mention, #hashtag and URL tokens whole, strips emoji codepoints,
// collapses whitespace and trims. Idempotent.
std::string clean_text(const std::string& raw);

// --- dataset ingestion -------------------------------------------------------

enum class FileFormat { kCsv, kTsv, kJsonl };
enum class SamplingPolicy { kCapPerClass, kDownsampleNegatives };

struct DatasetSpec {
    std::string name;
    std::string domain;
    FileFormat format = FileFormat::kCsv;
    std::string text_field = "text";
    std::string label_field = "label";
    std::vector<std::string> positive_values = {"1"};
    SamplingPolicy policy = SamplingPolicy::kCapPerClass;
    size_t cap = 5000;
};

// Parses, cleans, and class-balances a binary HS dataset. Deterministic
// under `seed`; rows whose text is empty after cleaning are dropped.
std::vector<LabeledExample> load_dataset(const std::string& path, const DatasetSpec& spec,
                                         uint64_t seed);

// --- emotion taxonomy --------------------------------------------------------

inline constexpr const char* kNeutral = "neutral";

const std::vector<std::string>& go_emotion_names();     // 27 emotions + neutral
const std::vector<std::string>& ekman_emotion_names();  // 6 emotions + neutral
const std::map<std::string, std::string>& go_to_ekman_map();  // 27 entries

int go_index(const std::string& name);     // position within go_emotion_names
int ekman_index(const std::string& name);  // position within ekman_emotion_names

// Image of a GoEmotions label set under the Ekman conversion; neutral
// passes through. Output sorted and deduplicated.
std::vector<std::string> map_to_ekman(const std::vector<std::string>& emotions);

// Ekman-collapsed single label, or nothing when the example maps to more
// than one Ekman class (excluded from single-label training).
std::optional<std::string> reduce_single_label(const LabeledExample& example);

// --- splitting ---------------------------------------------------------------

struct SplitResult {
    std::vector<LabeledExample> train, val, test;
};

// Class-stratified, exhaustive, disjoint, seed-deterministic partition.
SplitResult split(const std::vector<LabeledExample>& data, double train_ratio, double val_ratio,
                  double test_ratio, uint64_t seed);

// --- JSONL exchange format ---------------------------------------------------
// {"text": str, "label": 0|1} and/or {"text": str, "emotions": [str, ...]}

void write_jsonl(const std::string& path, const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> read_jsonl(const std::string& path);

}  // namespace emoxgen::data
