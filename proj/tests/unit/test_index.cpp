#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "caselab/error.hpp"
#include "caselab/index.hpp"
#include "caselab/util.hpp"
#include "support.hpp"

using namespace caselab;
using caselab::testing::TempDir;

namespace {

std::vector<CaseDocument> docs_abc() {
    return {{"d1", "a b b", {}, 5}, {"d2", "b c", {}, 3}};
}

} // namespace

TEST(Idf, Variants) {
    EXPECT_DOUBLE_EQ(idf_value(2, 1, IdfVariant::robertson), std::log(1.5 / 1.5 + 1.0));
    EXPECT_DOUBLE_EQ(idf_value(10, 0, IdfVariant::robertson), std::log(10.5 / 0.5 + 1.0));
    EXPECT_DOUBLE_EQ(idf_value(10, 2, IdfVariant::smooth_log), std::log(5.0));
    EXPECT_DOUBLE_EQ(idf_value(10, 0, IdfVariant::smooth_log), std::log(10.0));
    EXPECT_EQ(idf_value(1, 1, IdfVariant::smooth_log), 0.0);
    EXPECT_GT(idf_value(3, 3, IdfVariant::robertson), 0.0);
    EXPECT_EQ(parse_idf_variant("smooth-log"), IdfVariant::smooth_log);
    EXPECT_THROW(parse_idf_variant("bm25"), ConfigError);
}

TEST(Index, StatisticsAndPostings) {
    const auto docs = docs_abc();
    const auto idx = InvertedIndex::build(docs, Analyzer{});
    EXPECT_EQ(idx.n_docs(), 2u);
    EXPECT_EQ(idx.terms(), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(idx.df("b"), 2u);
    EXPECT_EQ(idx.cf("b"), 3u);
    EXPECT_EQ(idx.tf("b", 0), 2u);
    EXPECT_EQ(idx.tf("zz", 0), 0u);
    EXPECT_TRUE(idx.postings("zz").empty());
    EXPECT_EQ(idx.stats().total_terms, 5u);
    EXPECT_DOUBLE_EQ(idx.stats().avg_doc_len, 2.5);
    EXPECT_EQ(idx.doc_len(0), 3u);
    EXPECT_EQ(idx.doc_ordinal("d2").value(), 1u);
    EXPECT_FALSE(idx.doc_ordinal("d3").has_value());
}

TEST(Index, EmptyCorpus) {
    const auto idx = InvertedIndex::build({}, Analyzer{});
    EXPECT_EQ(idx.n_docs(), 0u);
    EXPECT_EQ(idx.stats().avg_doc_len, 0.0);
}

TEST(Index, DuplicateDocIdIsValidationError) {
    const std::vector<CaseDocument> docs{{"d", "a", {}, 1}, {"d", "b", {}, 1}};
    EXPECT_THROW(InvertedIndex::build(docs, Analyzer{}), ValidationError);
}

TEST(Index, StopwordsExcludedFromPostingsAndLength) {
    const std::vector<CaseDocument> docs{{"d1", "the a the b", {}, 11}};
    const Analyzer an(TokenizerConfig{"whitespace", {}, {"the"}});
    const auto idx = InvertedIndex::build(docs, an);
    EXPECT_EQ(idx.df("the"), 0u);
    EXPECT_EQ(idx.doc_len(0), 2u);
    IndexOptions counted;
    counted.count_stopwords_in_length = true;
    EXPECT_EQ(InvertedIndex::build(docs, an, counted).doc_len(0), 4u);
    IndexOptions keep;
    keep.exclude_stopwords = false;
    EXPECT_EQ(InvertedIndex::build(docs, an, keep).df("the"), 1u);
}

TEST(Index, AverageQueryLengthFromQueries) {
    const std::vector<QueryCase> queries{{"q1", "a b c", {}}, {"q2", "a", {}}};
    const auto idx = InvertedIndex::build(docs_abc(), Analyzer{}, {}, queries);
    EXPECT_DOUBLE_EQ(idx.stats().avg_query_len, 2.0);
    EXPECT_EQ(idx.stats().n_queries, 2u);
}

TEST(Index, TfidfNormMatchesDefinition) {
    const auto idx = InvertedIndex::build(docs_abc(), Analyzer{});
    const double wa = idx.idf("a", IdfVariant::smooth_log);
    const double wb = idx.idf("b", IdfVariant::smooth_log);
    EXPECT_DOUBLE_EQ(idx.tfidf_norm(0, IdfVariant::smooth_log), std::sqrt(wa * wa + 4 * wb * wb));
}

TEST(Index, SaveLoadRoundTripAndFingerprint) {
    TempDir dir;
    const Analyzer an(TokenizerConfig{"maxmatch", {"盗窃", "被告人"}, {"的"}});
    const std::vector<CaseDocument> docs{{"d1", "被告人的盗窃行为", {}, 8}, {"d2", "盗窃财物", {}, 4}};
    const std::vector<QueryCase> queries{{"q", "盗窃", {}}};
    const auto idx = InvertedIndex::build(docs, an, {}, queries);
    idx.save(dir / "x.idx");
    const auto back = InvertedIndex::load(dir / "x.idx");
    EXPECT_EQ(back, idx);
    EXPECT_EQ(back.fingerprint(), idx.fingerprint());
    EXPECT_EQ(back.stats().avg_query_len, idx.stats().avg_query_len);
    EXPECT_EQ(back.tokenizer_config().lexicon, an.config().lexicon);
    EXPECT_EQ(InvertedIndex::build(docs, an, {}, queries).fingerprint(), idx.fingerprint());
}

TEST(Index, LoadRejectsCorruption) {
    TempDir dir;
    InvertedIndex::build(docs_abc(), Analyzer{}).save(dir / "x.idx");
    std::string bytes = read_file(dir / "x.idx");

    std::string flipped = bytes;
    flipped[bytes.size() / 2] = static_cast<char>(flipped[bytes.size() / 2] ^ 0x5a);
    write_file_atomic(dir / "flip.idx", flipped);
    EXPECT_THROW(InvertedIndex::load(dir / "flip.idx"), FormatError);

    write_file_atomic(dir / "short.idx", bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(InvertedIndex::load(dir / "short.idx"), FormatError);

    std::string version = bytes;
    version[4] = 9;
    write_file_atomic(dir / "ver.idx", version);
    EXPECT_THROW(InvertedIndex::load(dir / "ver.idx"), FormatError);

    EXPECT_THROW(InvertedIndex::load(dir / "missing.idx"), IoError);
}

TEST(Index, LoadChecksTokenizerFingerprint) {
    TempDir dir;
    InvertedIndex::build(docs_abc(), Analyzer{}).save(dir / "x.idx");
    const std::string other = Analyzer(TokenizerConfig{"maxmatch", {"a"}, {}}).fingerprint();
    EXPECT_THROW(InvertedIndex::load(dir / "x.idx", &other), ConfigError);
    const std::string same = Analyzer{}.fingerprint();
    EXPECT_NO_THROW(InvertedIndex::load(dir / "x.idx", &same));
}

TEST(Index, ParallelBuildMatchesSequential) {
    std::vector<CaseDocument> docs;
    for (int i = 0; i < 2000; ++i) {
        std::string text;
        for (int j = 0; j < 10; ++j) {
            text += "w" + std::to_string((i * 7 + j * 13) % 97) + " ";
        }
        docs.push_back({"d" + std::to_string(i), text, {}, 0});
    }
    const auto a = InvertedIndex::build(docs, Analyzer{});
    const auto b = InvertedIndex::build(docs, Analyzer{});
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.fingerprint(), b.fingerprint());
    std::vector<CaseDocument> few(docs.begin(), docs.begin() + 10);
    const auto c = InvertedIndex::build(few, Analyzer{});
    EXPECT_EQ(c.df("w0"), InvertedIndex::build(few, Analyzer{}).df("w0"));
}
