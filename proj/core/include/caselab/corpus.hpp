#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "caselab/tokenize.hpp"

namespace caselab {

struct CaseDocument {
    std::string doc_id;
    std::string text;
    std::vector<std::string> charges;
    std::size_t length_chars = 0;

    friend bool operator==(const CaseDocument&, const CaseDocument&) = default;
};

struct QueryCase {
    std::string query_id;
    std::string text;
    std::vector<std::string> charges;

    friend bool operator==(const QueryCase&, const QueryCase&) = default;
};

/// Lawyer-marked salient spans over a query. Sorted, disjoint, non-empty.
struct SalienceAnnotation {
    std::string query_id;
    std::vector<CharSpan> spans;

    std::size_t total_length() const noexcept;
    friend bool operator==(const SalienceAnnotation&, const SalienceAnnotation&) = default;
};

/// Sorts spans and merges overlapping ones. Touching spans ([0,2),[2,4)) stay separate.
std::vector<CharSpan> normalize_spans(std::vector<CharSpan> spans);

/// Graded judgments (0..3, 3 = most relevant) and ordered candidate pools.
class RelevanceJudgments {
public:
    static constexpr int kMaxGrade = 3;

    void set_grade(const std::string& query_id, const std::string& doc_id, int grade);
    void set_pool(const std::string& query_id, std::vector<std::string> doc_ids);

    /// 0 for unjudged documents.
    int grade(const std::string& query_id, const std::string& doc_id) const;
    bool has_query(const std::string& query_id) const;
    const std::map<std::string, int>* judged(const std::string& query_id) const;
    const std::vector<std::string>* pool(const std::string& query_id) const;

    /// Query ids that carry judgments, sorted.
    std::vector<std::string> query_ids() const;
    const std::map<std::string, std::map<std::string, int>>& grades() const noexcept { return grades_; }
    const std::map<std::string, std::vector<std::string>>& pools() const noexcept { return pools_; }
    std::size_t size() const noexcept { return grades_.size(); }

    friend bool operator==(const RelevanceJudgments&, const RelevanceJudgments&) = default;

private:
    std::map<std::string, std::map<std::string, int>> grades_;
    std::map<std::string, std::vector<std::string>> pools_;
};

struct DatasetBundle {
    std::vector<CaseDocument> documents;
    std::vector<QueryCase> queries;
    RelevanceJudgments qrels;
    std::map<std::string, SalienceAnnotation> annotations;

    const CaseDocument* find_document(const std::string& doc_id) const;
    const QueryCase* find_query(const std::string& query_id) const;
    const SalienceAnnotation* find_annotation(const std::string& query_id) const;

    /// Throws ValidationError listing every offending id.
    void validate() const;

    friend bool operator==(const DatasetBundle& a, const DatasetBundle& b) {
        return a.documents == b.documents && a.queries == b.queries && a.qrels == b.qrels &&
               a.annotations == b.annotations;
    }
};

struct IngestOptions {
    // documents.jsonl and queries.jsonl are always required.
    bool require_qrels = false;
    bool require_pools = false;
    bool require_annotations = false;
};

namespace dataset_files {
inline constexpr const char* kDocuments = "documents.jsonl";
inline constexpr const char* kQueries = "queries.jsonl";
inline constexpr const char* kQrels = "qrels.jsonl";
inline constexpr const char* kPools = "pools.jsonl";
inline constexpr const char* kAnnotations = "annotations.jsonl";
} // namespace dataset_files

/// Loads and validates a dataset directory. When pools.jsonl is absent, each
/// query's pool is its judged documents in file order.
///
/// Errors: IoError for a missing required file (message names it), FormatError
/// with the line number for a malformed record, ValidationError for broken
/// cross-references.
DatasetBundle load_dataset(const std::filesystem::path& root, const IngestOptions& options = {});
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& root);

// Per-file readers, usable on their own by the CLI.
std::vector<CaseDocument> read_documents(const std::filesystem::path& path);
std::vector<QueryCase> read_queries(const std::filesystem::path& path);
void read_qrels(const std::filesystem::path& path, RelevanceJudgments& into);
void read_pools(const std::filesystem::path& path, RelevanceJudgments& into);
/// Spans are normalized (sorted, merged). Bounds are checked against `queries` when given.
std::map<std::string, SalienceAnnotation> read_annotations(const std::filesystem::path& path,
                                                           const std::vector<QueryCase>* queries = nullptr);

struct AnnotationStatsRow {
    double avg_query_length = 0;
    double avg_annotation_length = 0;
    double avg_compression_rate = 0; // fraction, mean of per-query ratios
    std::size_t n_queries = 0;
};

struct AnnotationStats {
    AnnotationStatsRow with_stopwords;
    AnnotationStatsRow without_stopwords;
    /// Queries dropped from the stopword-free row because nothing remained.
    std::vector<std::string> excluded;
};

/// Character-length statistics over annotated queries. The stopword-free row
/// removes characters covered by stopword tokens from both the query and its
/// annotation. Without an analyzer only the first row is meaningful and the
/// second repeats it.
AnnotationStats annotation_stats(const DatasetBundle& bundle, const Analyzer* analyzer = nullptr);

} // namespace caselab
