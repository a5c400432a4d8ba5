#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "caselab/corpus.hpp"
#include "caselab/tokenize.hpp"

namespace caselab {

enum class IdfVariant {
    robertson,  // ln((N - df + 0.5) / (df + 0.5) + 1), unseen words have df = 0
    smooth_log, // ln(N / max(df, 1))
};

std::string to_string(IdfVariant variant);
IdfVariant parse_idf_variant(std::string_view name);

double idf_value(std::size_t n_docs, std::size_t df, IdfVariant variant);

struct CorpusStats {
    std::size_t n_docs = 0;
    std::unordered_map<std::string, std::uint32_t> df;
    double avg_doc_len = 0;
    /// Mean counted length of the query set supplied at build time (avgl of
    /// the query-word importance formula). 0 when no queries were given.
    double avg_query_len = 0;
    std::size_t n_queries = 0;
    /// |C|: total indexed term occurrences.
    std::uint64_t total_terms = 0;

    std::uint32_t document_frequency(std::string_view word) const;
};

double idf(const CorpusStats& stats, std::string_view word, IdfVariant variant);

struct Posting {
    std::uint32_t doc = 0; // ordinal into the index's document table
    std::uint32_t tf = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

struct IndexOptions {
    bool exclude_stopwords = true;
    /// Only meaningful with exclude_stopwords: whether masked tokens still count toward |d|.
    bool count_stopwords_in_length = false;

    friend bool operator==(const IndexOptions&, const IndexOptions&) = default;
};

/// Term -> postings over a fixed document set. Immutable once built.
class InvertedIndex {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    /// Throws ValidationError on duplicate doc ids.
    static InvertedIndex build(std::span<const CaseDocument> docs, const Analyzer& analyzer,
                               const IndexOptions& options = {},
                               std::span<const QueryCase> queries = {});

    std::size_t n_docs() const noexcept { return doc_ids_.size(); }
    const std::string& doc_id(std::uint32_t ord) const { return doc_ids_.at(ord); }
    const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
    std::optional<std::uint32_t> doc_ordinal(std::string_view doc_id) const;
    std::uint32_t doc_len(std::uint32_t ord) const { return doc_len_.at(ord); }

    std::size_t vocabulary_size() const noexcept { return terms_.size(); }
    /// Sorted vocabulary.
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    /// Postings sorted by document ordinal; empty for unknown terms.
    std::span<const Posting> postings(std::string_view term) const;
    std::uint32_t tf(std::string_view term, std::uint32_t doc) const;
    std::uint32_t df(std::string_view term) const;
    std::uint64_t cf(std::string_view term) const;

    const CorpusStats& stats() const noexcept { return stats_; }
    double idf(std::string_view term, IdfVariant variant) const;
    /// Euclidean norm of the document's tf*idf vector.
    double tfidf_norm(std::uint32_t doc, IdfVariant variant) const;

    /// Counted length of a tokenized text under this index's options.
    std::size_t counted_length(const TokenizedText& tok) const;
    /// Terms of a tokenized text that participate in scoring, in text order.
    std::vector<std::string> query_terms(const TokenizedText& tok) const;

    const TokenizerConfig& tokenizer_config() const noexcept { return tokenizer_; }
    const std::string& tokenizer_fingerprint() const noexcept { return tokenizer_fingerprint_; }
    const IndexOptions& options() const noexcept { return options_; }

    /// Content hash over documents, postings, statistics, and tokenizer.
    std::string fingerprint() const;

    void save(const std::filesystem::path& path) const;
    /// Throws FormatError on a version mismatch or a corrupt/truncated file and
    /// ConfigError when `expected_tokenizer_fingerprint` is given and differs.
    static InvertedIndex load(const std::filesystem::path& path,
                              const std::string* expected_tokenizer_fingerprint = nullptr);

    friend bool operator==(const InvertedIndex& a, const InvertedIndex& b);

private:
    void finalize();
    std::optional<std::uint32_t> term_id(std::string_view term) const;

    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::uint32_t> term_ids_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<std::uint64_t> cf_;

    std::vector<std::string> doc_ids_;
    std::unordered_map<std::string, std::uint32_t> doc_ordinals_;
    std::vector<std::uint32_t> doc_len_;

    CorpusStats stats_;
    std::vector<double> norm_robertson_;
    std::vector<double> norm_smooth_log_;

    TokenizerConfig tokenizer_;
    std::string tokenizer_fingerprint_;
    IndexOptions options_;
};

inline InvertedIndex build_index(std::span<const CaseDocument> docs, const Analyzer& analyzer,
                                 const IndexOptions& options = {},
                                 std::span<const QueryCase> queries = {}) {
    return InvertedIndex::build(docs, analyzer, options, queries);
}

} // namespace caselab
