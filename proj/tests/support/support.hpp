#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "caselab/corpus.hpp"

namespace caselab::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Small graded dataset (documents, queries, qrels, annotations) with
/// space-separated words, written as the standard JSONL files under `dir`.
void write_demo_dataset(const std::filesystem::path& dir);

struct RandomCollection {
    std::vector<CaseDocument> docs;
    std::vector<std::string> queries; // whitespace-separated
};

/// Up to `max_docs` documents over a small vocabulary and `n_queries` queries of
/// at most `max_query_words` words (occasionally including unseen words).
RandomCollection random_collection(std::mt19937_64& rng, std::size_t max_docs, std::size_t max_query_words,
                                   std::size_t n_queries);

/// Brute-force sparse scorers over whitespace-tokenized raw texts, with no index.
class OracleScorer {
public:
    explicit OracleScorer(const std::vector<CaseDocument>& docs);

    std::vector<double> bm25(const std::vector<std::string>& query, double k, double b) const;
    std::vector<double> ql_jm(const std::vector<std::string>& query, double lambda) const;
    std::vector<double> ql_dirichlet(const std::vector<std::string>& query, double mu) const;
    std::vector<double> tfidf(const std::vector<std::string>& query, bool smooth_log) const;

    /// Doc ids by descending score, ties by ascending id.
    std::vector<std::string> rank(const std::vector<double>& scores) const;

    double idf_robertson(const std::string& term) const;
    double idf_smooth_log(const std::string& term) const;

private:
    std::vector<std::string> ids_;
    std::vector<std::map<std::string, std::uint32_t>> tf_;
    std::vector<std::size_t> len_;
    std::map<std::string, std::uint32_t> df_;
    std::map<std::string, std::uint64_t> cf_;
    std::uint64_t total_ = 0;
    double avgdl_ = 0;
};

std::vector<std::string> split_ws(const std::string& text);

/// Brute-force metrics over an explicit ranked list of grades.
double oracle_precision(const std::vector<int>& ranked_grades, std::size_t k, int threshold);
double oracle_average_precision(const std::vector<int>& ranked_grades, std::size_t n_relevant, int threshold);
double oracle_ndcg(const std::vector<int>& ranked_grades, std::vector<int> judged_grades, std::size_t k);

} // namespace caselab::testing
