#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "caselab/corpus.hpp"
#include "caselab/index.hpp"

namespace caselab {

struct Bm25Params {
    double k = 1.4;
    double b = 0.6;
    IdfVariant idf = IdfVariant::robertson;

    void validate() const;
    /// "k=1.4,b=0.6"; the idf variant is appended only when not robertson.
    std::string describe() const;
};

enum class Smoothing { jelinek_mercer, dirichlet };

struct QlParams {
    Smoothing smoothing = Smoothing::jelinek_mercer;
    double lambda = 0.1;
    double mu = 2000;

    void validate() const;
    std::string describe() const;
};

struct TfidfParams {
    IdfVariant idf = IdfVariant::smooth_log;

    std::string describe() const;
};

enum class ModelKind { tfidf, bm25, ql };

std::string to_string(ModelKind kind);
/// Throws ConfigError for anything but tfidf/bm25/ql.
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
    ModelKind kind = ModelKind::bm25;
    Bm25Params bm25;
    QlParams ql;
    TfidfParams tfidf;

    std::string name() const { return to_string(kind); }
    std::string describe() const;

    /// `params` is a comma-separated key=value list, e.g. "k=1.2,b=0.75" or
    /// "smoothing=dirichlet,mu=1500". Unknown keys are a ConfigError.
    static ModelSpec parse(std::string_view model, std::string_view params = {});
};

// Scorers take content terms in query order; repeated terms contribute once per occurrence.

double score_bm25(std::span<const std::string> query_terms, std::uint32_t doc,
                  const InvertedIndex& index, const Bm25Params& params = {});

/// Log-probability of the query under the smoothed document model.
double score_ql(std::span<const std::string> query_terms, std::uint32_t doc,
                const InvertedIndex& index, const QlParams& params = {});

/// Background probability for a term absent from the collection: 1 / (|C| + |V|).
double ql_floor_probability(const InvertedIndex& index);

/// Cosine of tf*idf vectors; 0 when either vector has zero norm.
double score_tfidf(std::span<const std::string> query_terms, std::uint32_t doc,
                   const InvertedIndex& index, const TfidfParams& params = {});

double score(std::span<const std::string> query_terms, std::uint32_t doc,
             const InvertedIndex& index, const ModelSpec& model);

struct ScoredDoc {
    std::string doc_id;
    double score = 0;

    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

struct RankedRun {
    std::string query_id;
    std::vector<ScoredDoc> entries; // score non-increasing, ties by ascending doc_id
    std::string model;
    std::string params;

    friend bool operator==(const RankedRun&, const RankedRun&) = default;
};

/// Ranks `pool` (or the whole collection when null) and keeps the top `k`
/// (k = 0 keeps everything). Throws ValidationError for pool docs missing from the index.
RankedRun retrieve(const std::string& query_id, std::span<const std::string> query_terms,
                   const InvertedIndex& index, const ModelSpec& model,
                   const std::vector<std::string>* pool, std::size_t k);

/// Tokenizes the query with `analyzer` (normally built from index.tokenizer_config()).
/// With `pools` set, ranks within that query's pool; a query without a pool is a ValidationError.
RankedRun retrieve(const QueryCase& query, const InvertedIndex& index, const Analyzer& analyzer,
                   const ModelSpec& model, const RelevanceJudgments* pools, std::size_t k);

/// One JSON line per retrieved doc: query_id, doc_id, rank, score, model, params.
std::string format_run(std::span<const RankedRun> runs);
std::map<std::string, RankedRun> read_run(const std::filesystem::path& path);

} // namespace caselab
