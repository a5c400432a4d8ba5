// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "caselab/error.hpp"
#include "caselab/eval.hpp"
#include "caselab/index.hpp"
#include "caselab/levenshtein.hpp"
#include "caselab/overlap.hpp"
#include "caselab/rank.hpp"
#include "caselab/reformulate.hpp"
#include "caselab/salience.hpp"
#include "caselab/utf8.hpp"
#include "caselab_cli/cli.hpp"
#include "caselab_mock/mock_llm.hpp"
#include "support.hpp"

using namespace caselab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

/// Collects failures while a criterion runs; the first few are kept for the report.
class Checker {
public:
    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ++failures_;
            if (notes_.size() < 3) {
                notes_.push_back(what);
            }
        }
    }
    Outcome outcome(std::string summary) const {
        if (failures_ == 0) {
            return {true, std::move(summary)};
        }
        std::string d = std::to_string(failures_) + " failure(s)";
        for (const auto& n : notes_) {
            d += "; " + n;
        }
        return {false, d};
    }

private:
    std::size_t failures_ = 0;
    std::vector<std::string> notes_;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome sparse_scorer_oracle() {
    const auto start = std::chrono::steady_clock::now();
    Checker c;
    std::mt19937_64 rng(1001);
    std::size_t rankings = 0;
    for (int round = 0; round < 100; ++round) {
        const auto col = testing::random_collection(rng, 10, 8, 5);
        const auto idx = InvertedIndex::build(col.docs, Analyzer{});
        const testing::OracleScorer oracle(col.docs);
        for (const auto& q : col.queries) {
            const auto terms = testing::split_ws(q);
            const auto check = [&](const ModelSpec& spec, const std::vector<double>& expected) {
                const auto run = retrieve("q", terms, idx, spec, nullptr, 0);
                std::vector<std::string> got;
                for (const auto& e : run.entries) {
                    got.push_back(e.doc_id);
                }
                c.expect(got == oracle.rank(expected), spec.name() + " ranking differs for '" + q + "'");
                ++rankings;
            };
            check(ModelSpec::parse("bm25"), oracle.bm25(terms, 1.4, 0.6));
            check(ModelSpec::parse("bm25", "k=0.9,b=0.4"), oracle.bm25(terms, 0.9, 0.4));
            check(ModelSpec::parse("ql"), oracle.ql_jm(terms, 0.1));
            check(ModelSpec::parse("ql", "smoothing=dirichlet,mu=50"), oracle.ql_dirichlet(terms, 50));
            check(ModelSpec::parse("tfidf"), oracle.tfidf(terms, true));
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(secs < 10.0, "runtime " + fmt(secs) + " s exceeds 10 s");
    return c.outcome(std::to_string(rankings) + " rankings identical, " + fmt(secs) + " s");
}

Outcome metric_oracle() {
    Checker c;
    std::mt19937 rng(2002);
    double worst = 0;
    for (int round = 0; round < 100; ++round) {
        RelevanceJudgments q;
        std::map<std::string, int> grades;
        std::vector<std::string> docs;
        const std::size_t n_docs = 1 + rng() % 40;
        for (std::size_t d = 0; d < n_docs; ++d) {
            docs.push_back("d" + std::to_string(d));
            if (rng() % 3 != 0) {
                grades[docs.back()] = static_cast<int>(rng() % 4);
                q.set_grade("q", docs.back(), grades[docs.back()]);
            }
        }
        if (grades.empty()) {
            grades["d0"] = 0;
            q.set_grade("q", "d0", 0);
        }
        std::shuffle(docs.begin(), docs.end(), rng);
        docs.resize(1 + rng() % docs.size());
        RankedRun run;
        run.query_id = "q";
        for (std::size_t i = 0; i < docs.size(); ++i) {
            run.entries.push_back({docs[i], static_cast<double>(docs.size() - i)});
        }
        std::vector<int> ranked;
        for (const auto& d : docs) {
            ranked.push_back(grades.count(d) ? grades[d] : 0);
        }
        std::vector<int> judged;
        std::size_t n_rel = 0;
        for (const auto& [d, g] : grades) {
            judged.push_back(g);
            n_rel += g >= 2 ? 1 : 0;
        }
        const auto diff = [&](double a, double b, const std::string& what) {
            worst = std::max(worst, std::abs(a - b));
            c.expect(std::abs(a - b) <= 1e-9, what + " differs by " + fmt(std::abs(a - b)));
        };
        for (std::size_t k : {5u, 10u, 20u, 30u}) {
            diff(precision_at_k(run, q, k), testing::oracle_precision(ranked, k, 2), "P@" + std::to_string(k));
            diff(ndcg_at_k(run, q, k), testing::oracle_ndcg(ranked, judged, k), "NDCG@" + std::to_string(k));
        }
        diff(average_precision(run, q), testing::oracle_average_precision(ranked, n_rel, 2), "AP");
    }
    RelevanceJudgments w;
    w.set_grade("q", "a", 3);
    w.set_grade("q", "b", 0);
    w.set_grade("q", "c", 2);
    RankedRun wr;
    wr.query_id = "q";
    wr.entries = {{"a", 3}, {"b", 2}, {"c", 1}};
    const double worked = ndcg_at_k(wr, w, 3);
    c.expect(std::abs(worked - 0.9558) <= 1e-4, "worked NDCG " + fmt(worked));
    return c.outcome("max |diff| " + fmt(worst) + "; worked NDCG " + fmt(worked));
}

Outcome word_importance_identity() {
    Checker c;
    std::mt19937_64 rng(3003);
    const auto tok = tokenize("s", TokenizerConfig{});
    for (int i = 0; i < 50; ++i) {
        CorpusStats stats;
        stats.n_docs = 1 + rng() % 100000;
        stats.df["s"] = static_cast<std::uint32_t>(rng() % (stats.n_docs + 1));
        stats.avg_query_len = 1.0; // |S| = 1 = avgl
        Bm25Params params;
        const double expected = idf(stats, "s", params.idf);
        const auto ws = bm25_word_importance(tok, stats, params);
        c.expect(ws.size() == 1 && ws[0].tf == 1 && ws[0].score == expected,
                 "omega != IDF for df=" + std::to_string(stats.df["s"]) + " N=" + std::to_string(stats.n_docs));
    }
    return c.outcome("50 random IDF values reproduced exactly");
}

TokenizedText manual_tokens(std::size_t length, std::vector<Token> tokens) {
    TokenizedText t;
    t.length_chars = length;
    t.stopword_mask.assign(tokens.size(), false);
    t.tokens = std::move(tokens);
    return t;
}

AttentionExport make_export(std::vector<ExportToken> tokens, std::vector<double> weights) {
    AttentionExport e;
    e.query_id = "q";
    e.doc_id = "d";
    e.doc_grade = 3;
    e.tokens = std::move(tokens);
    e.cls_weights = std::move(weights);
    return e;
}

double score_of(const std::vector<WordImportance>& ws, const std::string& word) {
    for (const auto& w : ws) {
        if (w.word == word) {
            return w.score;
        }
    }
    return std::nan("");
}

Outcome attention_alignment() {
    Checker c;
    std::mt19937_64 rng(4004);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto query = manual_tokens(14, {{"aaa", 0, 3}, {"bb", 3, 5}, {"cccc", 5, 9}, {"ddd", 9, 12}, {"ee", 12, 14}});
    double max_delta = 0;
    for (int round = 0; round < 200; ++round) {
        std::vector<ExportToken> toks{{"x", 0, 2}, {"x", 2, 4}, {"x", 4, 7}, {"x", 7, 8}, {"x", 8, 11}};
        std::vector<double> w1;
        std::vector<double> w2;
        const double a = 0.01 + 100 * u(rng);
        const double b = 10 * u(rng);
        for (std::size_t i = 0; i < toks.size(); ++i) {
            w1.push_back(u(rng));
            w2.push_back(a * w1.back() + b);
        }
        const auto s1 = attention_to_word_scores(make_export(toks, w1), query);
        const auto s2 = attention_to_word_scores(make_export(toks, w2), query);
        for (const auto& w : s1) {
            max_delta = std::max(max_delta, std::abs(w.score - score_of(s2, w.word)));
        }
        // "ee" lies past the last exported token.
        c.expect(score_of(s1, "ee") == 0.0, "truncated word scored nonzero");
    }
    c.expect(max_delta < 1e-12, "affine max |delta| " + fmt(max_delta));

    const auto q2 = manual_tokens(6, {{"abc", 0, 3}, {"def", 3, 6}});
    const auto hand = attention_to_word_scores(make_export({{"ab", 0, 2}, {"cd", 2, 4}, {"ef", 4, 6}}, {1.0, 0.5, 0.0}), q2);
    const double v = score_of(hand, "abc");
    c.expect(std::abs(v - 0.4167) <= 1e-4, "hand example gave " + fmt(v));
    return c.outcome("affine max |delta| " + fmt(max_delta) + "; hand example " + fmt(v) + "; truncated words 0");
}

/// Ten queries whose BM25 word ranks are fixed through document frequencies, with
/// salient words planted at chosen ranks via annotation spans.
std::vector<QuerySalience> planted_fixture(Checker& c) {
    std::mt19937 rng(5005);
    CorpusStats stats;
    stats.n_docs = 1000;
    stats.avg_query_len = 10;
    std::vector<QuerySalience> out;
    for (int qi = 0; qi < 10; ++qi) {
        const std::size_t n = 5 + 3 * static_cast<std::size_t>(qi);
        std::vector<std::string> by_rank;
        for (std::size_t r = 1; r <= n; ++r) {
            by_rank.push_back("w" + std::to_string(qi) + "_" + std::to_string(r));
            stats.df[by_rank.back()] = static_cast<std::uint32_t>(r * 7);
        }
        std::set<std::size_t> planted;
        while (planted.empty()) {
            for (std::size_t r = 1; r <= n; ++r) {
                if (rng() % 4 == 0) {
                    planted.insert(r);
                }
            }
        }
        std::vector<std::string> order = by_rank;
        std::shuffle(order.begin(), order.end(), rng);
        std::string text;
        std::vector<CharSpan> spans;
        for (const auto& w : order) {
            if (!text.empty()) {
                text += ' ';
            }
            const std::size_t start = utf8::length(text);
            text += w;
            const std::size_t rank = static_cast<std::size_t>(std::find(by_rank.begin(), by_rank.end(), w) - by_rank.begin()) + 1;
            if (planted.count(rank)) {
                spans.push_back({start, start + utf8::length(w)});
            }
        }
        const auto tok = tokenize(text, TokenizerConfig{});
        QuerySalience qs;
        qs.query_id = "q" + std::to_string(qi);
        qs.ranking = bm25_word_importance(tok, stats);
        qs.salient = salient_word_types(tok, mark_salient_words(tok, spans));
        for (const auto& w : qs.ranking) {
            const bool should = planted.count(w.rank) > 0;
            c.expect(w.word == by_rank[w.rank - 1], "rank of " + w.word + " not as planted");
            c.expect(qs.salient.count(w.word) == (should ? 1u : 0u), "salience of " + w.word + " not as planted");
        }
        out.push_back(std::move(qs));
    }
    return out;
}

Outcome interval_analysis() {
    Checker c;
    const auto fixture = planted_fixture(c);
    const std::size_t m = 10;
    for (const auto& q : fixture) {
        const auto single = interval_precision_recall(std::vector<QuerySalience>{q}, m);
        c.expect(single.recall.back() == 1.0, q.query_id + " recall at 100% is " + fmt(single.recall.back()));
    }
    const auto report = interval_precision_recall(fixture, m);

    // Enumeration oracle: walk prefixes of each ranking directly.
    std::vector<double> precision(m, 0.0), recall(m, 0.0), bucket_sum(m, 0.0);
    std::vector<std::size_t> bucket_n(m, 0);
    for (const auto& q : fixture) {
        const std::size_t n = q.ranking.size();
        std::size_t prev = 0;
        for (std::size_t i = 1; i <= m; ++i) {
            std::size_t cut = 0;
            while (cut * m < i * n) {
                ++cut;
            }
            std::size_t hits = 0;
            std::size_t bucket_hits = 0;
            for (const auto& w : q.ranking) {
                if (w.rank <= cut && q.salient.count(w.word)) {
                    ++hits;
                    bucket_hits += w.rank > prev ? 1 : 0;
                }
            }
            precision[i - 1] += static_cast<double>(hits) / static_cast<double>(cut);
            recall[i - 1] += static_cast<double>(hits) / static_cast<double>(q.salient.size());
            if (cut > prev) {
                bucket_sum[i - 1] += static_cast<double>(bucket_hits) / static_cast<double>(cut - prev);
                ++bucket_n[i - 1];
            }
            prev = cut;
        }
    }
    double worst = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double p = precision[i] / static_cast<double>(fixture.size());
        const double r = recall[i] / static_cast<double>(fixture.size());
        const double b = bucket_n[i] ? bucket_sum[i] / static_cast<double>(bucket_n[i]) : 0.0;
        worst = std::max({worst, std::abs(p - report.precision[i]), std::abs(r - report.recall[i]),
                          std::abs(b - report.interval_precision[i])});
    }
    c.expect(worst <= 1e-12, "interval table differs from enumeration by " + fmt(worst));
    c.expect(report.n_queries == fixture.size(), "some fixture queries were excluded");
    return c.outcome("10 queries, recall@100% = 1 each, table max |diff| " + fmt(worst));
}

QuerySalience permuted(const std::string& id, std::size_t n, std::mt19937& rng, const std::set<std::size_t>& salient) {
    QuerySalience q;
    q.query_id = id;
    std::vector<std::size_t> ranks(n);
    for (std::size_t i = 0; i < n; ++i) {
        ranks[i] = i + 1;
    }
    std::shuffle(ranks.begin(), ranks.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
        WordImportance w;
        w.word = "w" + std::to_string(i);
        w.rank = ranks[i];
        q.ranking.push_back(w);
        if (salient.count(i)) {
            q.salient.insert(w.word);
        }
    }
    std::sort(q.ranking.begin(), q.ranking.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
    return q;
}

Outcome joint_matrix() {
    Checker c;
    std::mt19937 rng(6006);
    double worst_sum = 0;
    for (int round = 0; round < 20; ++round) {
        std::vector<QuerySalience> a, b;
        for (int qi = 0; qi < 8; ++qi) {
            const std::size_t n = 1 + rng() % 30;
            std::set<std::size_t> sal{rng() % n};
            for (std::size_t i = 0; i < n; ++i) {
                if (rng() % 3 == 0) {
                    sal.insert(i);
                }
            }
            const std::string id = "q" + std::to_string(qi);
            a.push_back(permuted(id, n, rng, sal));
            b.push_back(permuted(id, n, rng, sal));
        }
        const auto m = joint_rank_distribution(a, b, 10);
        double sum = 0;
        for (const auto& row : m) {
            for (double x : row) {
                sum += x;
            }
        }
        worst_sum = std::max(worst_sum, std::abs(sum - 100.0));
        const auto diag = joint_rank_distribution(a, a, 10);
        for (std::size_t i = 0; i < diag.size(); ++i) {
            for (std::size_t j = 0; j < diag[i].size(); ++j) {
                c.expect(i == j || diag[i][j] == 0.0, "identical rankings put mass off the diagonal");
            }
        }
    }
    c.expect(worst_sum <= 1e-9, "matrix sum off by " + fmt(worst_sum));
    return c.outcome("max |sum - 100| " + fmt(worst_sum) + "; identical rankings diagonal");
}

std::string random_keyword(std::mt19937& rng) {
    static const std::vector<std::string> pool{"盗窃", "被告人", "财物", "合同", "借款", "伤害", "fraud", "theft", "判决", "证人"};
    return pool[rng() % pool.size()] + (rng() % 2 ? pool[rng() % pool.size()] : "");
}

struct CliResult {
    int code = 0;
    std::string err;
};

CliResult cli_run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, err.str()};
}

/// reformulate -> retrieve -> evaluate into `out`, returning the concatenated outputs.
std::string pipeline(const fs::path& data, const fs::path& index, const fs::path& llm_conf, const fs::path& cache,
                     const fs::path& out, Checker& c) {
    fs::create_directories(out);
    std::string all;
    for (const std::string type : {"keyword", "key_sentence", "summary"}) {
        const auto ref = out / (type + ".jsonl");
        const auto run = out / (type + ".run.jsonl");
        const auto rep = out / (type + ".eval.json");
        auto r = cli_run({"reformulate", "--queries", data.string(), "--type", type, "--llm", llm_conf.string(),
                          "--cache", cache.string(), "--out", ref.string()});
        c.expect(r.code == 0, "reformulate " + type + ": " + r.err);
        r = cli_run({"retrieve", "--index", index.string(), "--reformulated", ref.string(), "--qrels",
                     (data / "qrels.jsonl").string(), "--model", "bm25", "--out", run.string()});
        c.expect(r.code == 0, "retrieve " + type + ": " + r.err);
        r = cli_run({"evaluate", "--run", run.string(), "--qrels", data.string(), "--out", rep.string()});
        c.expect(r.code == 0, "evaluate " + type + ": " + r.err);
        all += testing::read_text(ref) + testing::read_text(run) + testing::read_text(rep);
    }
    return all;
}

Outcome offline_determinism() {
    Checker c;
    testing::TempDir dir;
    testing::write_demo_dataset(dir / "data");
    const auto idx = cli_run({"index", "--corpus", (dir / "data").string(), "--out", (dir / "index.bin").string()});
    c.expect(idx.code == 0, "index: " + idx.err);

    std::string live;
    {
        mock::MockLlmServer server;
        server.start();
        testing::write_text(dir / "live.conf", "endpoint = " + server.endpoint() + "\nmodel = mock-1\n");
        live = pipeline(dir / "data", dir / "index.bin", dir / "live.conf", dir / "cache", dir / "live", c);
        c.expect(server.requests() == 9, "expected 9 mock requests, saw " + std::to_string(server.requests()));
    }
    // Frozen cache, no endpoint.
    testing::write_text(dir / "offline.conf", "model = mock-1\n");
    const auto first = pipeline(dir / "data", dir / "index.bin", dir / "offline.conf", dir / "cache", dir / "a", c);
    const auto second = pipeline(dir / "data", dir / "index.bin", dir / "offline.conf", dir / "cache", dir / "b", c);
    c.expect(!first.empty() && first == second, "offline runs differ");
    c.expect(first == live, "offline replay differs from the live run");

    std::mt19937 rng(7007);
    const std::vector<std::string> seps{",", "，", "、", "\n", ", "};
    for (int round = 0; round < 50; ++round) {
        std::string raw = rng() % 2 ? "Keywords: " : "";
        const std::size_t n = 1 + rng() % 6;
        for (std::size_t i = 0; i < n; ++i) {
            raw += i ? seps[rng() % seps.size()] : "";
            raw += rng() % 4 == 0 ? std::to_string(i + 1) + ". " : "";
            raw += random_keyword(rng);
        }
        raw += rng() % 2 ? "。" : "";
        const auto units = parse_response(raw, ReformulationType::keyword);
        const auto again = units.empty() ? units
                                         : parse_response(assemble_query_text(units, ReformulationType::keyword),
                                                          ReformulationType::keyword);
        c.expect(!units.empty() && again == units, "parse/assemble not idempotent for '" + raw + "'");
    }
    return c.outcome("3 query types x 2 offline runs byte-identical to live; 50 fuzzed keyword responses idempotent");
}

std::string random_sentence(std::mt19937& rng) {
    static const std::u32string alphabet = U"甲乙丙丁戊己庚辛壬癸子丑寅卯辰巳午未申酉";
    std::u32string s;
    const std::size_t n = 8 + rng() % 15;
    for (std::size_t i = 0; i < n; ++i) {
        s += alphabet[rng() % alphabet.size()];
    }
    return utf8::encode(s);
}

std::string edit(const std::string& text, std::mt19937& rng, int edits) {
    std::u32string s = utf8::decode(text);
    for (int e = 0; e < edits; ++e) {
        const std::size_t pos = rng() % s.size();
        switch (rng() % 3) {
        case 0: s[pos] = U'某'; break;
        case 1: s.erase(pos, 1); break;
        default: s.insert(pos, 1, U'的'); break;
        }
    }
    return utf8::encode(s);
}

Outcome realignment() {
    Checker c;
    std::mt19937 rng(8008);
    std::size_t cases = 0;
    for (int round = 0; round < 100; ++round) {
        const std::size_t n = 2 + rng() % 7;
        std::vector<std::string> sentences;
        while (sentences.size() < n) {
            const auto s = random_sentence(rng);
            // Keep edits (at most 2 per sentence) below the inter-sentence distance.
            bool far = true;
            for (const auto& t : sentences) {
                far = far && levenshtein(s, t) > 4;
            }
            if (far) {
                sentences.push_back(s);
            }
        }
        std::string text;
        for (const auto& s : sentences) {
            text += s + "。";
        }
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) {
            order[i] = i;
        }
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::string> units;
        for (auto i : order) {
            units.push_back(edit(sentences[i], rng, static_cast<int>(rng() % 3)));
        }
        const auto r = realign_key_sentences(units, QueryCase{"q", text, {}});
        const bool sorted = std::is_sorted(r.matched.begin(), r.matched.end());
        std::vector<std::size_t> identity(n);
        for (std::size_t i = 0; i < n; ++i) {
            identity[i] = i;
        }
        c.expect(sorted && r.matched == identity, "order not restored in round " + std::to_string(round));
        ++cases;
    }
    return c.outcome(std::to_string(cases) + "/100 shuffles restored");
}

Outcome overlap_fixtures() {
    Checker c;
    const auto near = [&](double got, double want, const std::string& what) {
        c.expect(std::abs(got - want) <= 1e-9, what + " = " + fmt(got) + ", expected " + fmt(want));
    };
    near(overlap_unit("XBCD", std::vector<std::string>{"BC", "DE"}), 1.5, "overlap(XBCD; BC, DE)");
    near(info_ratio(1.0, 100, 20, 40).as_written, 5.0, "as-written InfoR");

    const QueryCase q{"q1", "甲乙丙。丁戊己。", {}};
    const SalienceAnnotation a{"q1", {{1, 6}}};
    ReformulatedQuery kw;
    kw.query_id = "q1";
    kw.type = ReformulationType::keyword;
    kw.units = {"乙丙", "丁"};
    kw.assembled_text = assemble_query_text(kw.units, kw.type);
    const auto m = measure_reformulation(q, kw, a);
    near(m.overlap.normalized, 0.75, "keyword fixture overlap");
    near(m.info.as_written, 0.75 * 8 / 5, "keyword fixture as-written InfoR");
    near(m.info.density, 0.75 * 8 / 3, "keyword fixture density InfoR");

    const QueryCase long_q{"q", "被告人张某盗窃财物。经鉴定价值三千元。公诉机关提起公诉", {}};
    const SalienceAnnotation long_a{"q", {{3, 7}, {10, 14}, {16, 18}, {20, 24}}};
    ReformulatedQuery self;
    self.query_id = "q";
    self.type = ReformulationType::summary;
    self.units = {long_q.text};
    self.assembled_text = long_q.text;
    const auto s = measure_reformulation(long_q, self, long_a);
    c.expect(s.info.density == 1.0, "density InfoR(Q, Q, A) = " + fmt(s.info.density));
    return c.outcome("worked fixtures within 1e-9; density InfoR(Q, Q, A) = " + fmt(s.info.density));
}

Outcome increment_format() {
    Checker c;
    EvalReport base;
    base.name = "BM25";
    base.metrics = {"P@5", "MAP"};
    base.overall = {0.4056, 0.4921};
    EvalReport ks = base;
    ks.name = "BM25+key_sentence";
    ks.overall = {0.4299, 0.5012};
    attach_baseline(ks, base);
    const auto table = render_table(std::vector<EvalReport>{base, ks});
    c.expect(table.find("42.99(2.43)") != std::string::npos, "increment cell missing from:\n" + table);
    c.expect(table.find("50.12(0.91)") != std::string::npos, "increment cell missing from:\n" + table);
    return c.outcome("cells render as 42.99(2.43)");
}

Outcome lecard_check(const fs::path& root) {
    Checker c;
    const auto bundle = load_dataset(root, IngestOptions{true, false, false});
    TokenizerConfig tc;
    tc.name = "maxmatch";
    if (fs::exists(root / "lexicon.txt") || fs::exists(root / "stopwords.txt")) {
        tc = TokenizerConfig::from_files("maxmatch", fs::exists(root / "lexicon.txt") ? root / "lexicon.txt" : fs::path(),
                                         fs::exists(root / "stopwords.txt") ? root / "stopwords.txt" : fs::path());
    }
    const Analyzer analyzer(tc);
    const auto index = InvertedIndex::build(bundle.documents, analyzer, {}, bundle.queries);
    std::map<std::string, RankedRun> runs;
    for (const auto& q : bundle.queries) {
        if (bundle.qrels.pool(q.query_id) != nullptr) {
            runs[q.query_id] = retrieve(q, index, analyzer, ModelSpec::parse("bm25", "k=1.4,b=0.6"), &bundle.qrels, 0);
        }
    }
    MetricConfig cfg;
    cfg.precision_cutoffs = {5};
    cfg.include_map = false;
    cfg.ndcg_cutoffs = {};
    const auto report = evaluate_run(runs, bundle.qrels, cfg);
    const double p5 = report.overall[0] * 100.0;
    c.expect(std::abs(p5 - 40.56) <= 5.0, "P@5 " + fmt(p5) + " outside 40.56 +/- 5");
    return c.outcome("P@5 " + format_percent(report.overall[0]) + " over " + std::to_string(report.n_queries) +
                     " queries");
}

} // namespace

int main() {
    struct Criterion {
        std::string name;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria{
        {"sparse-scorer-oracle", sparse_scorer_oracle},
        {"metric-oracle", metric_oracle},
        {"word-importance-identity", word_importance_identity},
        {"attention-alignment", attention_alignment},
        {"salience-intervals", interval_analysis},
        {"joint-rank-matrix", joint_matrix},
        {"offline-determinism", offline_determinism},
        {"key-sentence-realignment", realignment},
        {"overlap-inforatio", overlap_fixtures},
        {"increment-bracket-format", increment_format},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Outcome o;
        try {
            o = cr.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.ok ? "PASS" : "FAIL", cr.name.c_str(), o.detail.c_str());
        failed += o.ok ? 0 : 1;
    }

    if (const char* dir = std::getenv("CASELAB_LECARD_DIR"); dir != nullptr && *dir != '\0') {
        Outcome o;
        try {
            o = lecard_check(dir);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s lecard-bm25-p5: %s\n", o.ok ? "PASS" : "FAIL", o.detail.c_str());
        failed += o.ok ? 0 : 1;
    } else {
        std::printf("SKIP lecard-bm25-p5: CASELAB_LECARD_DIR not set\n");
    }
    std::fflush(stdout);
    return failed == 0 ? 0 : 1;
}
