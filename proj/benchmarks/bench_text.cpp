#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "caselab/levenshtein.hpp"
#include "caselab/overlap.hpp"
#include "caselab/reformulate.hpp"
#include "caselab/tokenize.hpp"
#include "caselab/utf8.hpp"

using namespace caselab;

namespace {

std::string cjk_text(std::size_t n, std::uint64_t seed) {
    static const std::u32string alphabet = U"被告人盗窃财物经鉴定价值元公诉机关指控合同借款判决";
    std::mt19937_64 rng(seed);
    std::u32string s;
    for (std::size_t i = 0; i < n; ++i) {
        s += (i % 25 == 24) ? U'。' : alphabet[rng() % alphabet.size()];
    }
    return utf8::encode(s);
}

void BM_Levenshtein(benchmark::State& state) {
    const auto a = cjk_text(static_cast<std::size_t>(state.range(0)), 1);
    const auto b = cjk_text(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(levenshtein(a, b));
    }
}
BENCHMARK(BM_Levenshtein)->Arg(32)->Arg(128)->Arg(512);

void BM_RealignKeySentences(benchmark::State& state) {
    const QueryCase q{"q", cjk_text(500, 3), {}};
    auto units = sentence_texts(q.text);
    std::reverse(units.begin(), units.end());
    for (auto _ : state) {
        benchmark::DoNotOptimize(realign_key_sentences(units, q));
    }
}
BENCHMARK(BM_RealignKeySentences);

void BM_MaxMatchTokenize(benchmark::State& state) {
    TokenizerConfig cfg;
    cfg.name = "maxmatch";
    cfg.lexicon = {"被告人", "盗窃", "财物", "鉴定", "价值", "公诉机关", "指控", "合同", "借款", "判决"};
    const Analyzer analyzer(cfg);
    const auto text = cjk_text(static_cast<std::size_t>(state.range(0)), 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(analyzer.tokenize(text));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_MaxMatchTokenize)->Arg(500)->Arg(5000);

void BM_OverlapMeasure(benchmark::State& state) {
    const QueryCase q{"q", cjk_text(500, 5), {}};
    const SalienceAnnotation a{"q", {{10, 40}, {100, 160}, {300, 330}}};
    ReformulatedQuery r;
    r.query_id = "q";
    r.type = ReformulationType::key_sentence;
    r.units = {utf8::slice(q.text, 0, 24), utf8::slice(q.text, 100, 124), utf8::slice(q.text, 300, 324)};
    r.assembled_text = assemble_query_text(r.units, r.type);
    for (auto _ : state) {
        benchmark::DoNotOptimize(measure_reformulation(q, r, a));
    }
}
BENCHMARK(BM_OverlapMeasure);

} // namespace
