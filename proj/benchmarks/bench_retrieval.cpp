#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "caselab/eval.hpp"
#include "caselab/index.hpp"
#include "caselab/rank.hpp"

using namespace caselab;

namespace {

// Zipf-ish synthetic collection: word w<i> drawn with weight 1/(i+1).
std::vector<CaseDocument> synthetic_docs(std::size_t n_docs, std::size_t doc_len, std::size_t vocab) {
    std::mt19937_64 rng(42);
    std::vector<double> weights(vocab);
    for (std::size_t i = 0; i < vocab; ++i) {
        weights[i] = 1.0 / static_cast<double>(i + 1);
    }
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::vector<CaseDocument> docs;
    for (std::size_t d = 0; d < n_docs; ++d) {
        std::string text;
        for (std::size_t t = 0; t < doc_len; ++t) {
            text += "w" + std::to_string(pick(rng)) + " ";
        }
        docs.push_back({"d" + std::to_string(d), text, {}, 0});
    }
    return docs;
}

std::vector<std::string> query_terms(std::size_t n) {
    std::vector<std::string> q;
    for (std::size_t i = 0; i < n; ++i) {
        q.push_back("w" + std::to_string(i * 7 % 500));
    }
    return q;
}

void BM_IndexBuild(benchmark::State& state) {
    const auto docs = synthetic_docs(static_cast<std::size_t>(state.range(0)), 300, 5000);
    const Analyzer analyzer;
    for (auto _ : state) {
        benchmark::DoNotOptimize(InvertedIndex::build(docs, analyzer));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IndexBuild)->Arg(100)->Arg(1000);

void BM_RetrievePool(benchmark::State& state, const char* model) {
    const auto docs = synthetic_docs(2000, 300, 5000);
    const auto idx = InvertedIndex::build(docs, Analyzer{});
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < 100; ++i) {
        pool.push_back(docs[i * 20].doc_id);
    }
    const auto spec = ModelSpec::parse(model);
    const auto q = query_terms(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(retrieve("q", q, idx, spec, &pool, 0));
    }
}
BENCHMARK_CAPTURE(BM_RetrievePool, bm25, "bm25")->Arg(50)->Arg(500);
BENCHMARK_CAPTURE(BM_RetrievePool, ql, "ql")->Arg(50)->Arg(500);
BENCHMARK_CAPTURE(BM_RetrievePool, tfidf, "tfidf")->Arg(50)->Arg(500);

void BM_RetrieveCorpus(benchmark::State& state) {
    const auto docs = synthetic_docs(static_cast<std::size_t>(state.range(0)), 300, 5000);
    const auto idx = InvertedIndex::build(docs, Analyzer{});
    const auto spec = ModelSpec::parse("bm25");
    const auto q = query_terms(200);
    for (auto _ : state) {
        benchmark::DoNotOptimize(retrieve("q", q, idx, spec, nullptr, 100));
    }
}
BENCHMARK(BM_RetrieveCorpus)->Arg(1000)->Arg(10000);

void BM_Ndcg(benchmark::State& state) {
    RelevanceJudgments qrels;
    RankedRun run;
    run.query_id = "q";
    std::mt19937 rng(1);
    for (int i = 0; i < 100; ++i) {
        const std::string id = "d" + std::to_string(i);
        qrels.set_grade("q", id, static_cast<int>(rng() % 4));
        run.entries.push_back({id, 100.0 - i});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(ndcg_at_k(run, qrels, 30));
    }
}
BENCHMARK(BM_Ndcg);

} // namespace
