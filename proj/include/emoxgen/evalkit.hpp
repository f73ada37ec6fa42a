#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emoxgen::eval {

// Binary F1 on the positive class: 2PR/(P+R), with the 0-convention for
// degenerate precision/recall.
double binary_f1(const std::vector<int>& predictions, const std::vector<int>& gold);

// Train-config x test-set grid of binary F1 scores. Row labels follow
// "<train>", "<train>+go", "<train>+ek"; a row's in-domain cell is the
// column whose name equals the label's train prefix.
struct ResultMatrix {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<double>> cells;
    std::vector<std::optional<double>> cd_printed;  // per row, when shipped

    size_t row_index(const std::string& label) const;
    std::optional<size_t> col_index(const std::string& label) const;
    std::optional<size_t> in_domain_col(size_t row) const;
    double cell(const std::string& row, const std::string& col) const;
    static std::string train_prefix(const std::string& row_label);

    // CSV with header `train,<col>,...[,cd_avg_printed]`.
    static ResultMatrix from_csv(const std::string& path);
    std::string to_csv() const;
};

// Arithmetic mean of a row's off-diagonal cells.
double cd_average(const ResultMatrix& m, size_t row);
double cd_average(const ResultMatrix& m, const std::string& row_label);

// (new - old) / old * 100.
double pct_change(double old_value, double new_value);

// pct_change of the means of paired in-domain readings (single values are
// the one-element case).
double in_domain_uplift(const std::vector<double>& baseline_values,
                        const std::vector<double>& enriched_values);

struct Discrepancy {
    std::string row_label;
    double printed = 0.0;
    double recomputed = 0.0;
};

struct UpliftEntry {
    std::string label;
    double baseline = 0.0;
    double enriched = 0.0;
    double pct = 0.0;
};

struct MarginalEntry {
    std::string train;
    std::string group;  // base-model name or emotion scheme, per collapse
    double baseline_cd = 0.0;
    double enriched_cd = 0.0;
    double uplift_pct = 0.0;
};

struct AnalysisReport {
    double tolerance = 0.001;
    std::vector<std::pair<std::string, double>> cd_recomputed;  // per row
    std::vector<Discrepancy> discrepancies;        // |printed - recomputed| > tolerance
    std::vector<UpliftEntry> declines;             // in-domain -> CD, baseline rows
    std::vector<UpliftEntry> row_uplifts;          // enriched CD vs baseline CD
    std::vector<UpliftEntry> cell_uplifts;         // per enriched cell vs baseline cell
    std::vector<UpliftEntry> means_uplifts;        // paired-mean in-domain formula rows
    std::vector<MarginalEntry> marginals;          // filled by marginal_aggregate callers
};

// Fixture verification: recompute CD averages, flag rows off by more than
// the tolerance, and derive every decline/uplift the row structure allows.
AnalysisReport verify_fixture(const ResultMatrix& fixture, double tolerance);

// Same analysis for matrices without a printed CD column.
AnalysisReport analyze_matrix(const ResultMatrix& m, double tolerance);

enum class Collapse {
    kBaseModel,      // average away the base models, keep go/ek separate
    kEmotionCorpus,  // average away the emotion corpora, keep models separate
};

// Marginal CD-average aggregation over a set of per-base-model matrices
// sharing row/column universes.
std::vector<MarginalEntry> marginal_aggregate(const std::map<std::string, ResultMatrix>& matrices,
                                              Collapse collapse);

// Deterministic renderings. Markdown reproduces the matrix grid
// cell-for-cell and annotates uplifts with magnitude tiers
// (+ <2%, ++ <5%, +++ <10%, ++++ >=10%).
std::string render_markdown(const ResultMatrix& m, const AnalysisReport& report);
std::string render_csv(const AnalysisReport& report);

std::string format_number(double v);  // shortest round-trip representation

}  // namespace emoxgen::eval
