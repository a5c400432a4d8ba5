#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "caselab/index.hpp"
#include "caselab/rank.hpp"
#include "caselab/tokenize.hpp"

namespace caselab {

enum class ImportanceSource { bm25, attention };

std::string to_string(ImportanceSource source);

/// Importance of one word type within a query. Lists are kept in rank order.
struct WordImportance {
    std::string word;
    std::size_t first_token = 0; // index into the query's TokenizedText
    std::size_t tf = 0;          // occurrences in the query
    double score = 0;
    std::size_t rank = 0; // 1-based
    ImportanceSource source = ImportanceSource::bm25;
    /// For attention scores: some occurrence overlaps a model token. Always true for bm25.
    bool covered = true;
};

/// BM25 self-matching weight of every distinct content word:
/// idf(w) * (k + 1) / (tf(w, q) + k * (1 - b + b * |q| / avgl)), avgl taken from
/// stats.avg_query_len. Ties rank by first occurrence.
std::vector<WordImportance> bm25_word_importance(const TokenizedText& query, const CorpusStats& stats,
                                                 const Bm25Params& params = {},
                                                 bool exclude_stopwords = true);

struct ExportToken {
    std::string text;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
};

/// Last-layer [CLS] attention over a (possibly truncated) query, for one (query, doc) pair.
struct AttentionExport {
    std::string query_id;
    std::string doc_id;
    int doc_grade = 0;
    std::vector<ExportToken> tokens;
    std::vector<double> cls_weights;

    /// Throws ValidationError when sizes differ, weights are negative or not
    /// finite, or an offset falls outside a query of `query_length` characters.
    void validate(std::size_t query_length) const;
};

/// JSONL reader for exporter output. Structure is checked per line (FormatError).
std::vector<AttentionExport> read_attention_exports(const std::filesystem::path& path);
std::string format_attention_export(const AttentionExport& record);

/// (w - min) / (max - min); all zeros when max == min.
std::vector<double> min_max_normalize(std::span<const double> weights);

/// Aligns normalized token attention to query words:
/// atten(s) = 1/len(s) * sum_j |s ∩ t_j| * w'_j / len(t_j).
/// Occurrences of the same word are averaged. Words no token touches score 0 and
/// are marked uncovered.
std::vector<WordImportance> attention_to_word_scores(const AttentionExport& record,
                                                     const TokenizedText& query,
                                                     bool exclude_stopwords = true);

/// Mean of per-word attention over the grade-3 exports of one query.
/// Throws ConfigError when there is none.
std::vector<WordImportance> aggregate_attention(std::span<const AttentionExport> exports,
                                                const TokenizedText& query,
                                                bool exclude_stopwords = true,
                                                int required_grade = 3);

/// Word types with at least one salient occurrence.
std::unordered_set<std::string> salient_word_types(const TokenizedText& query,
                                                   const std::vector<bool>& salient_tokens);

struct QuerySalience {
    std::string query_id;
    std::vector<WordImportance> ranking; // rank order
    std::unordered_set<std::string> salient;
};

/// Cutoff (prefix size) of interval i (1-based) for n ranked words: ceil(i * n / n_intervals).
std::size_t interval_cutoff(std::size_t i, std::size_t n_words, std::size_t n_intervals);
/// 0-based interval containing 1-based `rank`.
std::size_t interval_of_rank(std::size_t rank, std::size_t n_words, std::size_t n_intervals);

struct IntervalReport {
    std::size_t n_intervals = 0;
    std::size_t n_queries = 0;               // queries contributing
    std::vector<std::string> excluded;       // queries without salient words
    std::vector<double> precision;           // cumulative prefix, macro-averaged
    std::vector<double> recall;              // cumulative prefix, macro-averaged
    std::vector<double> interval_precision;  // per bucket, macro over queries whose bucket is non-empty
    std::vector<std::optional<double>> avg_tf;  // per bucket, over salient words; empty bucket -> nullopt
    std::vector<std::optional<double>> avg_idf;
};

IntervalReport interval_precision_recall(std::span<const QuerySalience> queries,
                                         std::size_t n_intervals = 10);

/// Fills avg_tf / avg_idf of salient words per (non-cumulative) interval, pooled across queries.
IntervalReport tf_idf_by_interval(std::span<const QuerySalience> queries, const CorpusStats& stats,
                                  std::size_t n_intervals = 10,
                                  IdfVariant variant = IdfVariant::robertson);

/// Restricts both rankings of one query to words the attention side covers and
/// re-ranks each within that subset. Returns {a', b'}.
std::pair<QuerySalience, QuerySalience> restrict_to_covered(const QuerySalience& bm25,
                                                            const QuerySalience& attention);

/// Percentage of salient words falling in (interval under a, interval under b).
/// Rows index `a`. Throws ValidationError when a query's word sets differ.
std::vector<std::vector<double>> joint_rank_distribution(std::span<const QuerySalience> a,
                                                         std::span<const QuerySalience> b,
                                                         std::size_t n_intervals = 10);

} // namespace caselab
