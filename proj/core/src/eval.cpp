#include "caselab/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "caselab/error.hpp"

namespace caselab {

using ordered_json = nlohmann::ordered_json;

std::string to_string(GainKind gain) {
    return gain == GainKind::exponential ? "exponential" : "linear";
}

GainKind parse_gain(std::string_view name) {
    if (name == "exponential" || name == "exp") {
        return GainKind::exponential;
    }
    if (name == "linear") {
        return GainKind::linear;
    }
    throw ConfigError("unknown gain '" + std::string(name) + "' (expected exponential or linear)");
}

void MetricConfig::validate() const {
    for (auto k : precision_cutoffs) {
        if (k == 0) {
            throw ConfigError("precision cutoff must be positive");
        }
    }
    for (auto k : ndcg_cutoffs) {
        if (k == 0) {
            throw ConfigError("NDCG cutoff must be positive");
        }
    }
    if (threshold < 1 || threshold > RelevanceJudgments::kMaxGrade) {
        throw ConfigError("relevance threshold must be in 1.." + std::to_string(RelevanceJudgments::kMaxGrade));
    }
    if (precision_cutoffs.empty() && ndcg_cutoffs.empty() && !include_map) {
        throw ConfigError("no metrics selected");
    }
}

std::vector<std::string> MetricConfig::metric_names() const {
    std::vector<std::string> out;
    for (auto k : precision_cutoffs) {
        out.push_back("P@" + std::to_string(k));
    }
    if (include_map) {
        out.emplace_back("MAP");
    }
    for (auto k : ndcg_cutoffs) {
        out.push_back("NDCG@" + std::to_string(k));
    }
    return out;
}

namespace {

std::size_t parse_cutoff(const std::string& name, std::size_t prefix) {
    const std::string digits = name.substr(prefix);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw ConfigError("bad metric '" + name + "'");
    }
    const auto k = std::stoull(digits);
    if (k == 0) {
        throw ConfigError("bad metric '" + name + "': cutoff must be positive");
    }
    return static_cast<std::size_t>(k);
}

} // namespace

MetricConfig MetricConfig::from_names(std::span<const std::string> names) {
    MetricConfig cfg;
    cfg.precision_cutoffs.clear();
    cfg.ndcg_cutoffs.clear();
    cfg.include_map = false;
    for (const auto& raw : names) {
        std::string upper;
        for (unsigned char c : raw) {
            upper += static_cast<char>(std::toupper(c));
        }
        if (upper == "MAP") {
            cfg.include_map = true;
        } else if (upper.rfind("NDCG@", 0) == 0) {
            cfg.ndcg_cutoffs.push_back(parse_cutoff(upper, 5));
        } else if (upper.rfind("P@", 0) == 0) {
            cfg.precision_cutoffs.push_back(parse_cutoff(upper, 2));
        } else {
            throw ConfigError("unknown metric '" + raw + "' (expected P@k, MAP or NDCG@k)");
        }
    }
    cfg.validate();
    return cfg;
}

double precision_at_k(const RankedRun& run, const RelevanceJudgments& qrels, std::size_t k, int threshold) {
    if (k == 0) {
        throw ConfigError("precision cutoff must be positive");
    }
    std::size_t hits = 0;
    const std::size_t n = std::min(k, run.entries.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (qrels.grade(run.query_id, run.entries[i].doc_id) >= threshold) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

namespace {

std::size_t count_relevant(const RelevanceJudgments& qrels, const std::string& query_id, int threshold) {
    const auto* judged = qrels.judged(query_id);
    if (judged == nullptr) {
        return 0;
    }
    return static_cast<std::size_t>(
        std::count_if(judged->begin(), judged->end(), [&](const auto& kv) { return kv.second >= threshold; }));
}

} // namespace

double average_precision(const RankedRun& run, const RelevanceJudgments& qrels, int threshold) {
    const std::size_t relevant = count_relevant(qrels, run.query_id, threshold);
    if (relevant == 0) {
        return 0.0;
    }
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < run.entries.size(); ++i) {
        if (qrels.grade(run.query_id, run.entries[i].doc_id) >= threshold) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(relevant);
}

MapResult mean_average_precision(std::span<const RankedRun> runs, const RelevanceJudgments& qrels, int threshold) {
    MapResult out;
    if (runs.empty()) {
        return out;
    }
    double sum = 0.0;
    for (const auto& run : runs) {
        if (count_relevant(qrels, run.query_id, threshold) == 0) {
            out.zero_relevant.push_back(run.query_id);
        }
        sum += average_precision(run, qrels, threshold);
    }
    out.map = sum / static_cast<double>(runs.size());
    return out;
}

double gain_of(int grade, GainKind gain) {
    if (grade <= 0) {
        return 0.0;
    }
    return gain == GainKind::exponential ? std::exp2(grade) - 1.0 : static_cast<double>(grade);
}

double ndcg_at_k(const RankedRun& run, const RelevanceJudgments& qrels, std::size_t k, GainKind gain) {
    if (k == 0) {
        throw ConfigError("NDCG cutoff must be positive");
    }
    std::vector<int> ideal;
    if (const auto* judged = qrels.judged(run.query_id)) {
        for (const auto& [doc, g] : *judged) {
            ideal.push_back(g);
        }
    }
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i) {
        idcg += gain_of(ideal[i], gain) / std::log2(static_cast<double>(i) + 2.0);
    }
    if (idcg <= 0.0) {
        return 0.0;
    }
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, run.entries.size()); ++i) {
        dcg += gain_of(qrels.grade(run.query_id, run.entries[i].doc_id), gain) / std::log2(static_cast<double>(i) + 2.0);
    }
    return dcg / idcg;
}

namespace {

// Unbiased bounded draw; avoids std::uniform_int_distribution, whose output is
// implementation-defined.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= limit) {
            return r % n;
        }
    }
}

} // namespace

FoldPlan kfold_splits(std::vector<std::string> query_ids, std::size_t n_folds, std::uint64_t seed) {
    std::sort(query_ids.begin(), query_ids.end());
    query_ids.erase(std::unique(query_ids.begin(), query_ids.end()), query_ids.end());
    if (n_folds == 0 || n_folds > query_ids.size()) {
        throw ConfigError("cannot split " + std::to_string(query_ids.size()) + " queries into " +
                          std::to_string(n_folds) + " folds");
    }
    std::mt19937_64 rng(seed);
    for (std::size_t i = query_ids.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(bounded(rng, i));
        std::swap(query_ids[i - 1], query_ids[j]);
    }
    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.seed = seed;
    plan.folds.resize(n_folds);
    for (std::size_t i = 0; i < query_ids.size(); ++i) {
        plan.folds[i % n_folds].push_back(query_ids[i]);
    }
    return plan;
}

std::vector<double> query_metrics(const RankedRun& run, const RelevanceJudgments& qrels, const MetricConfig& config) {
    std::vector<double> out;
    for (auto k : config.precision_cutoffs) {
        out.push_back(precision_at_k(run, qrels, k, config.threshold));
    }
    if (config.include_map) {
        out.push_back(average_precision(run, qrels, config.threshold));
    }
    for (auto k : config.ndcg_cutoffs) {
        out.push_back(ndcg_at_k(run, qrels, k, config.gain));
    }
    return out;
}

namespace {

std::vector<double> mean_rows(const std::vector<std::vector<double>>& rows, std::size_t width) {
    std::vector<double> mean(width, 0.0);
    if (rows.empty()) {
        return mean;
    }
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < width; ++i) {
            mean[i] += r[i];
        }
    }
    for (auto& v : mean) {
        v /= static_cast<double>(rows.size());
    }
    return mean;
}

} // namespace

EvalReport evaluate_run(const std::map<std::string, RankedRun>& runs, const RelevanceJudgments& qrels,
                        const MetricConfig& config, const FoldPlan* folds, std::string name) {
    config.validate();
    EvalReport report;
    report.name = std::move(name);
    report.metrics = config.metric_names();
    const std::size_t width = report.metrics.size();

    std::map<std::string, std::vector<double>> per_query;
    for (const auto& qid : qrels.query_ids()) {
        RankedRun empty;
        const RankedRun* run = &empty;
        if (auto it = runs.find(qid); it != runs.end()) {
            run = &it->second;
        } else {
            empty.query_id = qid;
            report.missing_queries.push_back(qid);
        }
        if (count_relevant(qrels, qid, config.threshold) == 0) {
            report.zero_relevant.push_back(qid);
        }
        per_query[qid] = query_metrics(*run, qrels, config);
    }
    report.n_queries = per_query.size();

    if (folds == nullptr) {
        std::vector<std::vector<double>> rows;
        for (auto& [qid, row] : per_query) {
            rows.push_back(row);
        }
        report.overall = mean_rows(rows, width);
        return report;
    }

    std::vector<std::vector<double>> fold_means;
    for (const auto& fold : folds->folds) {
        std::vector<std::vector<double>> rows;
        for (const auto& qid : fold) {
            if (auto it = per_query.find(qid); it != per_query.end()) {
                rows.push_back(it->second);
            }
        }
        if (rows.empty()) {
            continue;
        }
        fold_means.push_back(mean_rows(rows, width));
    }
    report.per_fold = fold_means;
    report.overall = mean_rows(fold_means, width);
    return report;
}

void attach_baseline(EvalReport& report, const EvalReport& baseline) {
    if (report.metrics != baseline.metrics) {
        throw ConfigError("baseline '" + baseline.name + "' was evaluated with different metrics");
    }
    std::vector<double> inc(report.overall.size());
    for (std::size_t i = 0; i < inc.size(); ++i) {
        inc[i] = (report.overall[i] - baseline.overall[i]) * 100.0;
    }
    report.baseline = baseline.name;
    report.increments = std::move(inc);
}

namespace {

std::string two_decimals(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", value);
    std::string s(buf);
    if (s == "-0.00") {
        s = "0.00";
    }
    return s;
}

} // namespace

std::string format_percent(double fraction) {
    return two_decimals(fraction * 100.0);
}

std::string render_table(std::span<const EvalReport> reports) {
    if (reports.empty()) {
        return {};
    }
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"Model"};
    header.insert(header.end(), reports.front().metrics.begin(), reports.front().metrics.end());
    cells.push_back(header);
    for (const auto& r : reports) {
        std::vector<std::string> row{r.name.empty() ? std::string("run") : r.name};
        for (std::size_t i = 0; i < r.overall.size(); ++i) {
            std::string cell = format_percent(r.overall[i]);
            if (r.increments) {
                cell += "(" + two_decimals((*r.increments)[i]) + ")";
            }
            row.push_back(std::move(cell));
        }
        cells.push_back(std::move(row));
    }
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size() && i < widths.size(); ++i) {
            widths[i] = std::max(widths[i], row[i].size());
        }
    }
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i != 0) {
                out += "  ";
            }
            out += row[i];
            if (i + 1 < row.size()) {
                out.append(widths[i] - row[i].size(), ' ');
            }
        }
        out += '\n';
    }
    return out;
}

std::string report_json(std::span<const EvalReport> reports) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : reports) {
        ordered_json j;
        j["name"] = r.name;
        j["n_queries"] = r.n_queries;
        ordered_json overall;
        for (std::size_t i = 0; i < r.metrics.size(); ++i) {
            overall[r.metrics[i]] = r.overall[i];
        }
        j["metrics"] = std::move(overall);
        if (!r.per_fold.empty()) {
            ordered_json folds = ordered_json::array();
            for (const auto& f : r.per_fold) {
                ordered_json fj;
                for (std::size_t i = 0; i < r.metrics.size(); ++i) {
                    fj[r.metrics[i]] = f[i];
                }
                folds.push_back(std::move(fj));
            }
            j["per_fold"] = std::move(folds);
        }
        if (r.increments) {
            j["baseline"] = r.baseline;
            ordered_json inc;
            for (std::size_t i = 0; i < r.metrics.size(); ++i) {
                inc[r.metrics[i]] = (*r.increments)[i];
            }
            j["increments_pp"] = std::move(inc);
        }
        j["missing_queries"] = r.missing_queries;
        j["zero_relevant"] = r.zero_relevant;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

} // namespace caselab
