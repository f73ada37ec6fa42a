#include "emoxgen/evalkit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "emoxgen/errors.hpp"

namespace emoxgen::eval {

double binary_f1(const std::vector<int>& predictions, const std::vector<int>& gold) {
    if (predictions.size() != gold.size()) {
        throw ContractError("binary_f1: " + std::to_string(predictions.size()) +
                            " predictions vs " + std::to_string(gold.size()) + " gold labels");
    }
    long long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        if ((predictions[i] != 0 && predictions[i] != 1) || (gold[i] != 0 && gold[i] != 1)) {
            throw ContractError("binary_f1: labels must be 0 or 1");
        }
        tp += predictions[i] == 1 && gold[i] == 1;
        fp += predictions[i] == 1 && gold[i] == 0;
        fn += predictions[i] == 0 && gold[i] == 1;
    }
    if (tp + fp == 0 || tp + fn == 0) return 0.0;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

// --- ResultMatrix -------------------------------------------------------------

std::string ResultMatrix::train_prefix(const std::string& row_label) {
    const auto plus = row_label.find('+');
    return plus == std::string::npos ? row_label : row_label.substr(0, plus);
}

size_t ResultMatrix::row_index(const std::string& label) const {
    for (size_t i = 0; i < row_labels.size(); ++i) {
        if (row_labels[i] == label) return i;
    }
    throw ContractError("result matrix has no row '" + label + "'");
}

std::optional<size_t> ResultMatrix::col_index(const std::string& label) const {
    for (size_t i = 0; i < col_labels.size(); ++i) {
        if (col_labels[i] == label) return i;
    }
    return std::nullopt;
}

std::optional<size_t> ResultMatrix::in_domain_col(size_t row) const {
    return col_index(train_prefix(row_labels.at(row)));
}

double ResultMatrix::cell(const std::string& row, const std::string& col) const {
    auto c = col_index(col);
    if (!c) throw ContractError("result matrix has no column '" + col + "'");
    return cells.at(row_index(row)).at(*c);
}

namespace {

double parse_number(const std::string& field, const std::string& context) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(context + ": '" + field + "' is not a number");
    }
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

ResultMatrix ResultMatrix::from_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw ParseError("'" + path + "' is empty");
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "train") {
        throw ParseError("'" + path + "' must start with a `train,<col>,...` header");
    }
    ResultMatrix m;
    bool has_printed = header.back() == "cd_avg_printed";
    const size_t ncols = header.size() - 1 - (has_printed ? 1 : 0);
    if (ncols == 0) throw ParseError("'" + path + "' has no test-set columns");
    for (size_t i = 1; i <= ncols; ++i) m.col_labels.push_back(header[i]);
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw ParseError("'" + path + "' line " + std::to_string(lineno) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        m.row_labels.push_back(fields[0]);
        std::vector<double> row;
        for (size_t i = 1; i <= ncols; ++i) {
            row.push_back(parse_number(fields[i], "'" + path + "' line " + std::to_string(lineno)));
        }
        m.cells.push_back(std::move(row));
        if (has_printed) {
            m.cd_printed.push_back(
                parse_number(fields.back(), "'" + path + "' line " + std::to_string(lineno)));
        } else {
            m.cd_printed.push_back(std::nullopt);
        }
    }
    if (m.row_labels.empty()) throw ParseError("'" + path + "' has no data rows");
    return m;
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string ResultMatrix::to_csv() const {
    const bool has_printed =
        std::any_of(cd_printed.begin(), cd_printed.end(), [](const auto& p) { return p.has_value(); });
    std::ostringstream os;
    os << "train";
    for (const auto& c : col_labels) os << ',' << c;
    if (has_printed) os << ",cd_avg_printed";
    os << '\n';
    for (size_t r = 0; r < row_labels.size(); ++r) {
        os << row_labels[r];
        for (double v : cells[r]) os << ',' << format_number(v);
        if (has_printed) os << ',' << (cd_printed[r] ? format_number(*cd_printed[r]) : "");
        os << '\n';
    }
    return os.str();
}

// --- analysis operations -------------------------------------------------------

double cd_average(const ResultMatrix& m, size_t row) {
    const auto& cells = m.cells.at(row);
    const auto diag = m.in_domain_col(row);
    double total = 0.0;
    size_t n = 0;
    for (size_t c = 0; c < cells.size(); ++c) {
        if (diag && *diag == c) continue;
        total += cells[c];
        ++n;
    }
    if (n == 0) {
        throw ContractError("cd_average: row '" + m.row_labels.at(row) +
                            "' has no off-diagonal cells");
    }
    return total / static_cast<double>(n);
}

double cd_average(const ResultMatrix& m, const std::string& row_label) {
    return cd_average(m, m.row_index(row_label));
}

double pct_change(double old_value, double new_value) {
    if (old_value == 0.0) throw DomainError("pct_change: baseline value is zero");
    return (new_value - old_value) / old_value * 100.0;
}

double in_domain_uplift(const std::vector<double>& baseline_values,
                        const std::vector<double>& enriched_values) {
    if (baseline_values.empty() || baseline_values.size() != enriched_values.size()) {
        throw ContractError("in_domain_uplift: operand lists must pair up");
    }
    auto mean = [](const std::vector<double>& v) {
        double total = 0.0;
        for (double x : v) total += x;
        return total / static_cast<double>(v.size());
    };
    return pct_change(mean(baseline_values), mean(enriched_values));
}

namespace {

// CD value used in derived percentages: printed when the fixture ships one,
// recomputed otherwise.
double cd_for(const ResultMatrix& m, size_t row) {
    if (m.cd_printed.at(row)) return *m.cd_printed.at(row);
    return cd_average(m, row);
}

AnalysisReport analyze_impl(const ResultMatrix& m, double tolerance) {
    AnalysisReport report;
    report.tolerance = tolerance;
    for (size_t r = 0; r < m.row_labels.size(); ++r) {
        const double recomputed = cd_average(m, r);
        report.cd_recomputed.emplace_back(m.row_labels[r], recomputed);
        if (m.cd_printed[r] && std::abs(*m.cd_printed[r] - recomputed) > tolerance) {
            report.discrepancies.push_back({m.row_labels[r], *m.cd_printed[r], recomputed});
        }
    }

    for (size_t r = 0; r < m.row_labels.size(); ++r) {
        const std::string& label = m.row_labels[r];
        const std::string prefix = ResultMatrix::train_prefix(label);
        if (label == prefix) {
            // Baseline row: in-domain -> cross-domain decline.
            if (auto diag = m.in_domain_col(r)) {
                const double in_domain = m.cells[r][*diag];
                const double cd = cd_for(m, r);
                report.declines.push_back({label, in_domain, cd, pct_change(in_domain, cd)});
            }
            continue;
        }
        // Enriched row: uplifts against its baseline row when present.
        bool has_baseline = false;
        for (const auto& rl : m.row_labels) has_baseline = has_baseline || rl == prefix;
        if (!has_baseline) continue;
        const size_t base = m.row_index(prefix);
        const double base_cd = cd_for(m, base);
        const double enr_cd = cd_for(m, r);
        report.row_uplifts.push_back({label, base_cd, enr_cd, pct_change(base_cd, enr_cd)});
        for (size_t c = 0; c < m.col_labels.size(); ++c) {
            const double bv = m.cells[base][c];
            const double ev = m.cells[r][c];
            report.cell_uplifts.push_back(
                {label + "->" + m.col_labels[c], bv, ev, pct_change(bv, ev)});
        }
        // Paired-mean in-domain formula over the first test column and the
        // in-domain cell, when both exist.
        const auto diag = m.in_domain_col(r);
        if (diag && !m.col_labels.empty() && *diag != 0) {
            const std::vector<double> b{m.cells[base][0], m.cells[base][*diag]};
            const std::vector<double> e{m.cells[r][0], m.cells[r][*diag]};
            report.means_uplifts.push_back({label + " (" + m.col_labels[0] + "/in-domain means)",
                                            (b[0] + b[1]) / 2, (e[0] + e[1]) / 2,
                                            in_domain_uplift(b, e)});
        }
    }
    return report;
}

}  // namespace

AnalysisReport verify_fixture(const ResultMatrix& fixture, double tolerance) {
    for (const auto& printed : fixture.cd_printed) {
        if (!printed) {
            throw ContractError("verify_fixture: fixture is missing the printed CD column");
        }
    }
    return analyze_impl(fixture, tolerance);
}

AnalysisReport analyze_matrix(const ResultMatrix& m, double tolerance) {
    return analyze_impl(m, tolerance);
}

// --- marginal aggregation ------------------------------------------------------

std::vector<MarginalEntry> marginal_aggregate(const std::map<std::string, ResultMatrix>& matrices,
                                              Collapse collapse) {
    if (matrices.empty()) throw ContractError("marginal_aggregate: no matrices");
    const ResultMatrix& first = matrices.begin()->second;
    for (const auto& [name, m] : matrices) {
        if (m.row_labels != first.row_labels || m.col_labels != first.col_labels) {
            throw ContractError("marginal_aggregate: matrix '" + name +
                                "' does not share the row/column universe");
        }
    }

    std::vector<std::string> trains;
    for (const auto& label : first.row_labels) {
        if (label == ResultMatrix::train_prefix(label)) trains.push_back(label);
    }

    auto cd_of = [](const ResultMatrix& m, const std::string& label) {
        return cd_for(m, m.row_index(label));
    };

    std::vector<MarginalEntry> out;
    if (collapse == Collapse::kEmotionCorpus) {
        // Per base model: enriched mean over the emotion corpora.
        for (const auto& [name, m] : matrices) {
            for (const auto& train : trains) {
                const double base = cd_of(m, train);
                const double enriched = (cd_of(m, train + "+go") + cd_of(m, train + "+ek")) / 2.0;
                out.push_back({train, name, base, enriched, pct_change(base, enriched)});
            }
        }
    } else {
        // Per emotion corpus: means over the base models.
        for (const char* scheme : {"go", "ek"}) {
            for (const auto& train : trains) {
                double base = 0.0, enriched = 0.0;
                for (const auto& [name, m] : matrices) {
                    base += cd_of(m, train);
                    enriched += cd_of(m, train + "+" + scheme);
                }
                base /= static_cast<double>(matrices.size());
                enriched /= static_cast<double>(matrices.size());
                out.push_back({train, scheme, base, enriched, pct_change(base, enriched)});
            }
        }
    }
    return out;
}

// --- rendering -----------------------------------------------------------------

namespace {

std::string tier_marker(double pct) {
    if (pct <= 0.0) return "";
    if (pct < 2.0) return "+";
    if (pct < 5.0) return "++";
    if (pct < 10.0) return "+++";
    return "++++";
}

}  // namespace

std::string render_markdown(const ResultMatrix& m, const AnalysisReport& report) {
    std::ostringstream os;
    os << "| Train/Test |";
    for (const auto& c : m.col_labels) os << ' ' << c << " |";
    os << " CD Avg |\n|---|";
    for (size_t i = 0; i < m.col_labels.size(); ++i) os << "---|";
    os << "---|\n";
    for (size_t r = 0; r < m.row_labels.size(); ++r) {
        os << "| " << m.row_labels[r] << " |";
        for (double v : m.cells[r]) os << ' ' << format_number(v) << " |";
        os << ' ' << format_number(report.cd_recomputed.at(r).second) << " |\n";
    }

    if (!report.discrepancies.empty()) {
        os << "\n## CD-average discrepancies (tolerance " << format_number(report.tolerance)
           << ")\n\n| Row | Printed | Recomputed |\n|---|---|---|\n";
        for (const auto& d : report.discrepancies) {
            os << "| " << d.row_label << " | " << format_number(d.printed) << " | "
               << format_number(d.recomputed) << " |\n";
        }
    }

    auto uplift_section = [&os](const char* title, const std::vector<UpliftEntry>& entries) {
        if (entries.empty()) return;
        os << "\n## " << title << "\n\n| Row | Baseline | Enriched | Change | Tier |\n"
           << "|---|---|---|---|---|\n";
        for (const auto& u : entries) {
            os << "| " << u.label << " | " << format_number(u.baseline) << " | "
               << format_number(u.enriched) << " | " << format_number(u.pct) << "% | "
               << tier_marker(u.pct) << " |\n";
        }
    };
    uplift_section("In-domain to cross-domain declines", report.declines);
    uplift_section("CD-average uplifts vs baseline", report.row_uplifts);
    uplift_section("Paired-mean in-domain uplifts", report.means_uplifts);
    uplift_section("Per-cell uplifts vs baseline", report.cell_uplifts);

    if (!report.marginals.empty()) {
        os << "\n## Marginal CD aggregates\n\n| Train | Group | Baseline | Enriched | Change |\n"
           << "|---|---|---|---|---|\n";
        for (const auto& e : report.marginals) {
            os << "| " << e.train << " | " << e.group << " | " << format_number(e.baseline_cd)
               << " | " << format_number(e.enriched_cd) << " | " << format_number(e.uplift_pct)
               << "% |\n";
        }
    }
    return os.str();
}

std::string render_csv(const AnalysisReport& report) {
    std::ostringstream os;
    os << "section,label,old,new,value\n";
    for (const auto& [label, cd] : report.cd_recomputed) {
        os << "cd_recomputed," << label << ",,," << format_number(cd) << '\n';
    }
    for (const auto& d : report.discrepancies) {
        os << "discrepancy," << d.row_label << ',' << format_number(d.printed) << ','
           << format_number(d.recomputed) << ','
           << format_number(std::abs(d.printed - d.recomputed)) << '\n';
    }
    auto rows = [&os](const char* section, const std::vector<UpliftEntry>& entries) {
        for (const auto& u : entries) {
            os << section << ',' << u.label << ',' << format_number(u.baseline) << ','
               << format_number(u.enriched) << ',' << format_number(u.pct) << '\n';
        }
    };
    rows("decline", report.declines);
    rows("row_uplift", report.row_uplifts);
    rows("means_uplift", report.means_uplifts);
    rows("cell_uplift", report.cell_uplifts);
    for (const auto& e : report.marginals) {
        os << "marginal," << e.train << '+' << e.group << ',' << format_number(e.baseline_cd)
           << ',' << format_number(e.enriched_cd) << ',' << format_number(e.uplift_pct) << '\n';
    }
    return os.str();
}

}  // namespace emoxgen::eval
