#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "caselab/corpus.hpp"
#include "caselab/rank.hpp"

namespace caselab {

enum class GainKind { exponential, linear };

std::string to_string(GainKind gain);
GainKind parse_gain(std::string_view name);

struct MetricConfig {
    std::vector<std::size_t> precision_cutoffs{5, 10};
    bool include_map = true;
    std::vector<std::size_t> ndcg_cutoffs{10, 20, 30};
    int threshold = 2; // binary relevance: grade >= threshold
    GainKind gain = GainKind::exponential;

    void validate() const;
    /// Column names in report order: P@k..., MAP, NDCG@k...
    std::vector<std::string> metric_names() const;

    /// Accepts "P@k", "MAP", "NDCG@k" (case-insensitive). Throws ConfigError otherwise.
    static MetricConfig from_names(std::span<const std::string> names);
};

/// Missing slots past the end of a short run count as non-relevant.
double precision_at_k(const RankedRun& run, const RelevanceJudgments& qrels, std::size_t k,
                      int threshold = 2);

/// Normalized by the number of relevant judged documents; 0 when there are none.
double average_precision(const RankedRun& run, const RelevanceJudgments& qrels, int threshold = 2);

struct MapResult {
    double map = 0;
    std::vector<std::string> zero_relevant;
};

MapResult mean_average_precision(std::span<const RankedRun> runs, const RelevanceJudgments& qrels,
                                 int threshold = 2);

double gain_of(int grade, GainKind gain);

/// Ideal DCG comes from the query's judged grades; NDCG is 0 when it is 0.
double ndcg_at_k(const RankedRun& run, const RelevanceJudgments& qrels, std::size_t k,
                 GainKind gain = GainKind::exponential);

struct FoldPlan {
    std::size_t n_folds = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::string>> folds;
};

/// Seeded Fisher-Yates shuffle, then round-robin assignment. Identical across
/// platforms for a given seed. Throws ConfigError when n_folds is 0 or exceeds
/// the number of queries.
FoldPlan kfold_splits(std::vector<std::string> query_ids, std::size_t n_folds, std::uint64_t seed);

inline constexpr std::uint64_t kDefaultSeed = 20240101;

/// Metric values (fractions) for one query in metric_names() order.
std::vector<double> query_metrics(const RankedRun& run, const RelevanceJudgments& qrels,
                                  const MetricConfig& config);

struct EvalReport {
    std::string name;
    std::vector<std::string> metrics;
    std::vector<double> overall; // fractions
    std::vector<std::vector<double>> per_fold;
    std::size_t n_queries = 0;
    std::vector<std::string> missing_queries; // judged but absent from the run
    std::vector<std::string> zero_relevant;
    std::string baseline;
    std::optional<std::vector<double>> increments; // percentage points vs baseline
};

/// Evaluates every judged query. Without a fold plan, `overall` is the mean over
/// queries; with one, the mean of per-fold means.
EvalReport evaluate_run(const std::map<std::string, RankedRun>& runs, const RelevanceJudgments& qrels,
                        const MetricConfig& config, const FoldPlan* folds = nullptr,
                        std::string name = {});

void attach_baseline(EvalReport& report, const EvalReport& baseline);

/// Two-decimal percentage, e.g. 0.4056 -> "40.56".
std::string format_percent(double fraction);

/// Aligned text table; cells become "42.99(2.43)" when increments are present.
std::string render_table(std::span<const EvalReport> reports);
std::string report_json(std::span<const EvalReport> reports);

} // namespace caselab
