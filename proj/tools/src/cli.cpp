#include "caselab_cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "caselab/corpus.hpp"
#include "caselab/error.hpp"
#include "caselab/eval.hpp"
#include "caselab/index.hpp"
#include "caselab/llm.hpp"
#include "caselab/overlap.hpp"
#include "caselab/rank.hpp"
#include "caselab/reformulate.hpp"
#include "caselab/salience.hpp"
#include "caselab/tokenize.hpp"
#include "caselab/util.hpp"
#include "manifest.hpp"

#ifndef CASELAB_VERSION
#define CASELAB_VERSION "0.0.0"
#endif

namespace caselab::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string version() {
    return CASELAB_VERSION;
}

namespace {

constexpr const char* kFormatsHelp = R"(File formats (JSONL = one JSON object per line, offsets in Unicode code points):
  documents.jsonl    {"doc_id": str, "text": str, "charges": [str]}
  queries.jsonl      {"query_id": str, "text": str, "charges": [str]}
  qrels.jsonl        {"query_id": str, "doc_id": str, "grade": 0..3}
  pools.jsonl        {"query_id": str, "doc_ids": [str]}
  annotations.jsonl  {"query_id": str, "spans": [[start, end], ...]}
  run file           {"query_id", "doc_id", "rank", "score", "model", "params"}
  reformulated       {"query_id", "type", "units": [str], "assembled_text",
                      "provenance": {"model", "prompt_fingerprint", "timestamp"},
                      "raw_response", "flagged"}
  attention export   {"query_id", "doc_id", "doc_grade",
                      "tokens": [{"text", "char_start", "char_end"}], "cls_weights": [float]}
  --llm file         key = value lines: endpoint, model, timeout_ms, max_retries,
                     retry_backoff_ms, concurrency, api_key_env, generation.<name>
                     The API key is read from the environment variable named by
                     api_key_env (default OPENAI_API_KEY).
Every command that writes --out also writes <out>.manifest.json.
Exit codes: 0 ok, 2 usage/config/validation, 3 I/O or malformed input, 4 LLM service failure.)";

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::vector<std::string> args;
    std::string config_dump;
};

void finish(const Context& ctx, const std::string& command, const fs::path& primary,
            std::vector<fs::path> inputs, std::vector<fs::path> outputs) {
    RunManifest m;
    m.command = command;
    m.command_line = ctx.args;
    m.config_fingerprint = fingerprint(ctx.config_dump);
    m.inputs = std::move(inputs);
    m.outputs = std::move(outputs);
    write_manifest(m, primary, version());
}

/// Accepts a dataset directory or a file path; returns `dir/name` for directories.
fs::path resolve_in(const fs::path& p, const char* name) {
    return fs::is_directory(p) ? p / name : p;
}

// ---------------------------------------------------------------------------
// index

struct IndexArgs {
    std::string corpus;
    std::string queries;
    std::string out;
    std::string tokenizer = "whitespace";
    std::string lexicon;
    std::string stopwords;
    bool keep_stopwords = false;
    bool count_stopwords_in_length = false;
};

int cmd_index(const IndexArgs& a, Context& ctx) {
    const fs::path docs_path = resolve_in(a.corpus, dataset_files::kDocuments);
    fs::path queries_path = a.queries.empty() ? fs::path() : resolve_in(a.queries, dataset_files::kQueries);
    if (queries_path.empty() && fs::is_directory(a.corpus) && fs::exists(fs::path(a.corpus) / dataset_files::kQueries)) {
        queries_path = fs::path(a.corpus) / dataset_files::kQueries;
    }
    const auto docs = read_documents(docs_path);
    std::vector<QueryCase> queries;
    if (!queries_path.empty()) {
        queries = read_queries(queries_path);
    }
    const Analyzer analyzer(TokenizerConfig::from_files(a.tokenizer, a.lexicon, a.stopwords));
    IndexOptions options;
    options.exclude_stopwords = !a.keep_stopwords;
    options.count_stopwords_in_length = a.count_stopwords_in_length;
    const auto index = InvertedIndex::build(docs, analyzer, options, queries);
    index.save(a.out);

    const auto& s = index.stats();
    ctx.out << "documents      " << s.n_docs << "\n"
            << "vocabulary     " << index.vocabulary_size() << "\n"
            << "total terms    " << s.total_terms << "\n"
            << "avg doc len    " << format_double(s.avg_doc_len) << "\n"
            << "queries        " << s.n_queries << "\n"
            << "avg query len  " << format_double(s.avg_query_len) << "\n"
            << "fingerprint    " << index.fingerprint() << "\n";

    std::vector<fs::path> inputs{docs_path};
    if (!queries_path.empty()) {
        inputs.push_back(queries_path);
    }
    for (const auto& p : {a.lexicon, a.stopwords}) {
        if (!p.empty()) {
            inputs.emplace_back(p);
        }
    }
    finish(ctx, "index", a.out, inputs, {a.out});
    return kExitOk;
}

// ---------------------------------------------------------------------------
// retrieve

struct RetrieveArgs {
    std::string index;
    std::string queries;
    std::string reformulated;
    std::string model = "bm25";
    std::string params;
    std::string pool = "pools";
    std::string pools;
    std::string qrels;
    std::size_t k = 0;
    std::string out;
};

int cmd_retrieve(const RetrieveArgs& a, Context& ctx) {
    const ModelSpec model = ModelSpec::parse(a.model, a.params);
    if (a.pool != "pools" && a.pool != "corpus") {
        throw ConfigError("--pool must be 'pools' or 'corpus'");
    }
    if (a.queries.empty() && a.reformulated.empty()) {
        throw ConfigError("retrieve needs --queries or --reformulated");
    }
    std::vector<fs::path> inputs{a.index};

    std::vector<QueryCase> queries;
    if (!a.reformulated.empty()) {
        inputs.emplace_back(a.reformulated);
        for (const auto& r : read_reformulated(a.reformulated)) {
            if (r.flagged || r.assembled_text.empty()) {
                ctx.err << "warning: skipping flagged reformulation of " << r.query_id << "\n";
                continue;
            }
            queries.push_back({r.query_id, r.assembled_text, {}});
        }
    } else {
        const fs::path qp = resolve_in(a.queries, dataset_files::kQueries);
        inputs.push_back(qp);
        queries = read_queries(qp);
    }

    RelevanceJudgments pools;
    const RelevanceJudgments* pools_ptr = nullptr;
    if (a.pool == "pools") {
        if (!a.pools.empty()) {
            inputs.emplace_back(a.pools);
            read_pools(a.pools, pools);
        } else if (!a.qrels.empty()) {
            inputs.emplace_back(a.qrels);
            RelevanceJudgments judged;
            read_qrels(a.qrels, judged);
            for (const auto& [qid, grades] : judged.grades()) {
                std::vector<std::string> ids;
                for (const auto& [doc, g] : grades) {
                    ids.push_back(doc);
                }
                pools.set_pool(qid, std::move(ids));
            }
        } else {
            throw ConfigError("--pool pools needs --pools or --qrels (or use --pool corpus)");
        }
        pools_ptr = &pools;
    }

    const auto index = InvertedIndex::load(a.index);
    const Analyzer analyzer(index.tokenizer_config());
    std::vector<RankedRun> runs;
    runs.reserve(queries.size());
    for (const auto& q : queries) {
        runs.push_back(retrieve(q, index, analyzer, model, pools_ptr, a.k));
    }
    write_file_atomic(a.out, format_run(runs));
    ctx.out << "wrote " << runs.size() << " rankings (" << model.name() << " " << model.describe() << ") to "
            << a.out << "\n";
    finish(ctx, "retrieve", a.out, inputs, {a.out});
    return kExitOk;
}

// ---------------------------------------------------------------------------
// reformulate

struct ReformulateArgs {
    std::string queries;
    std::string type;
    std::string llm;
    std::string cache;
    std::string annotations;
    std::string prompts;
    std::string joiner = "。";
    std::string out;
};

int cmd_reformulate(const ReformulateArgs& a, Context& ctx) {
    const auto type = parse_reformulation_type(a.type);
    const fs::path qp = resolve_in(a.queries, dataset_files::kQueries);
    const auto queries = read_queries(qp);
    std::vector<fs::path> inputs{qp};
    std::vector<ReformulatedQuery> results;

    if (type == ReformulationType::annotation) {
        if (a.annotations.empty()) {
            throw ConfigError("--type annotation requires --annotations");
        }
        const fs::path ap = resolve_in(a.annotations, dataset_files::kAnnotations);
        inputs.push_back(ap);
        const auto annotations = read_annotations(ap, &queries);
        for (const auto& q : queries) {
            auto it = annotations.find(q.query_id);
            if (it == annotations.end() || it->second.spans.empty()) {
                ctx.err << "warning: no annotation for " << q.query_id << "; skipped\n";
                continue;
            }
            results.push_back(annotation_to_query(q, it->second, split_sentences(q.text), a.joiner));
        }
    } else {
        LlmConfig config;
        if (!a.llm.empty()) {
            config = LlmConfig::load(a.llm);
            inputs.emplace_back(a.llm);
        }
        if (config.endpoint.empty() && a.cache.empty()) {
            throw ConfigError("LLM query types need an endpoint (--llm) or a response cache (--cache)");
        }
        const PromptLibrary prompts = a.prompts.empty() ? PromptLibrary::builtin() : PromptLibrary::load(a.prompts);
        if (!a.prompts.empty()) {
            inputs.emplace_back(a.prompts);
        }
        std::unique_ptr<ResponseCache> cache;
        if (!a.cache.empty()) {
            cache = std::make_unique<ResponseCache>(a.cache);
        }
        std::unique_ptr<HttpChatClient> client;
        if (!config.endpoint.empty()) {
            client = std::make_unique<HttpChatClient>(config);
        }
        Reformulator reformulator(prompts, config, cache.get(), client.get());
        results = reformulator.reformulate_all(queries, type);
        ctx.err << "network calls: " << reformulator.network_calls() << "\n";
    }

    std::string body;
    std::size_t flagged = 0;
    for (const auto& r : results) {
        body += format_reformulated(r);
        body += '\n';
        if (r.flagged) {
            ++flagged;
            ctx.err << "warning: empty reformulation for " << r.query_id << "\n";
        }
    }
    write_file_atomic(a.out, body);
    ctx.out << "wrote " << results.size() << " " << to_string(type) << " queries (" << flagged << " flagged) to "
            << a.out << "\n";
    finish(ctx, "reformulate", a.out, inputs, {a.out});
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::vector<std::string> runs;
    std::string qrels;
    std::string baseline;
    std::string metrics;
    std::size_t folds = 0;
    std::uint64_t seed = kDefaultSeed;
    int threshold = 2;
    std::string gain = "exponential";
    std::string out;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto t = trim(item);
        if (!t.empty()) {
            out.emplace_back(t);
        }
    }
    return out;
}

int cmd_evaluate(const EvaluateArgs& a, Context& ctx) {
    MetricConfig config;
    if (!a.metrics.empty()) {
        config = MetricConfig::from_names(split_list(a.metrics));
    }
    config.threshold = a.threshold;
    config.gain = parse_gain(a.gain);
    config.validate();

    RelevanceJudgments qrels;
    const fs::path qp = resolve_in(a.qrels, dataset_files::kQrels);
    read_qrels(qp, qrels);
    std::vector<fs::path> inputs{qp};

    std::optional<FoldPlan> plan;
    if (a.folds > 0) {
        plan = kfold_splits(qrels.query_ids(), a.folds, a.seed);
    }
    const FoldPlan* plan_ptr = plan ? &*plan : nullptr;

    std::optional<EvalReport> baseline;
    if (!a.baseline.empty()) {
        inputs.emplace_back(a.baseline);
        baseline = evaluate_run(read_run(a.baseline), qrels, config, plan_ptr, fs::path(a.baseline).stem().string());
    }
    std::vector<EvalReport> reports;
    for (const auto& path : a.runs) {
        inputs.emplace_back(path);
        auto report = evaluate_run(read_run(path), qrels, config, plan_ptr, fs::path(path).stem().string());
        if (baseline) {
            attach_baseline(report, *baseline);
        }
        if (!report.missing_queries.empty()) {
            ctx.err << "warning: " << report.name << " has no ranking for " << report.missing_queries.size()
                    << " judged queries (scored as empty)\n";
        }
        reports.push_back(std::move(report));
    }
    if (baseline) {
        reports.insert(reports.begin(), *baseline);
    }
    ctx.out << render_table(reports);
    if (!a.out.empty()) {
        write_file_atomic(a.out, report_json(reports));
        finish(ctx, "evaluate", a.out, inputs, {a.out});
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// salience

struct SalienceArgs {
    std::string queries;
    std::string annotations;
    std::string index;
    std::string attention;
    std::size_t intervals = 10;
    std::string bm25_params;
    std::string idf = "robertson";
    std::string out;
};

ordered_json interval_json(const IntervalReport& r) {
    ordered_json j;
    j["n_queries"] = r.n_queries;
    j["excluded"] = r.excluded;
    std::vector<std::string> labels;
    for (std::size_t i = 1; i <= r.n_intervals; ++i) {
        labels.push_back(format_double(100.0 * static_cast<double>(i) / static_cast<double>(r.n_intervals)) + "%");
    }
    j["cutoffs"] = labels;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["interval_precision"] = r.interval_precision;
    const auto opt = [](const std::vector<std::optional<double>>& v) {
        ordered_json arr = ordered_json::array();
        for (const auto& x : v) {
            arr.push_back(x ? ordered_json(*x) : ordered_json(nullptr));
        }
        return arr;
    };
    j["avg_tf"] = opt(r.avg_tf);
    j["avg_idf"] = opt(r.avg_idf);
    return j;
}

std::string csv_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

void append_interval_csv(std::string& csv, const std::string& source, const IntervalReport& r) {
    for (std::size_t i = 0; i < r.n_intervals; ++i) {
        csv += source + "," + std::to_string(i + 1) + "," + format_double(r.precision[i]) + "," +
               format_double(r.recall[i]) + "," + format_double(r.interval_precision[i]) + "," +
               csv_cell(r.avg_tf[i]) + "," + csv_cell(r.avg_idf[i]) + "\n";
    }
}

int cmd_salience(const SalienceArgs& a, Context& ctx) {
    if (a.intervals == 0) {
        throw ConfigError("--intervals must be positive");
    }
    const Bm25Params params = ModelSpec::parse("bm25", a.bm25_params).bm25;
    const IdfVariant variant = parse_idf_variant(a.idf);
    const fs::path qp = resolve_in(a.queries, dataset_files::kQueries);
    const fs::path ap = resolve_in(a.annotations, dataset_files::kAnnotations);
    const auto queries = read_queries(qp);
    const auto annotations = read_annotations(ap, &queries);
    const auto index = InvertedIndex::load(a.index);
    const Analyzer analyzer(index.tokenizer_config());
    const bool exclude = index.options().exclude_stopwords;
    std::vector<fs::path> inputs{qp, ap, a.index};

    std::map<std::string, std::vector<AttentionExport>> exports;
    if (!a.attention.empty()) {
        inputs.emplace_back(a.attention);
        for (auto& e : read_attention_exports(a.attention)) {
            exports[e.query_id].push_back(std::move(e));
        }
    }

    std::vector<QuerySalience> bm25;
    std::vector<QuerySalience> attention;
    std::vector<QuerySalience> bm25_covered;
    std::vector<QuerySalience> attention_covered;
    std::vector<std::string> skipped;
    for (const auto& q : queries) {
        auto ann = annotations.find(q.query_id);
        if (ann == annotations.end()) {
            continue;
        }
        const auto tok = analyzer.tokenize(q.text, q.query_id);
        const auto salient = salient_word_types(tok, mark_salient_words(tok, ann->second.spans));
        QuerySalience b{q.query_id, bm25_word_importance(tok, index.stats(), params, exclude), salient};
        bm25.push_back(b);
        if (a.attention.empty()) {
            continue;
        }
        auto ex = exports.find(q.query_id);
        if (ex == exports.end()) {
            ctx.err << "warning: no attention export for " << q.query_id << "; skipped\n";
            skipped.push_back(q.query_id);
            continue;
        }
        for (const auto& e : ex->second) {
            e.validate(tok.length_chars);
        }
        QuerySalience t{q.query_id, {}, salient};
        try {
            t.ranking = aggregate_attention(ex->second, tok, exclude);
        } catch (const ConfigError& e) {
            ctx.err << "warning: " << e.what() << "; skipped\n";
            skipped.push_back(q.query_id);
            continue;
        }
        attention.push_back(t);
        auto [bc, tc] = restrict_to_covered(b, t);
        bm25_covered.push_back(std::move(bc));
        attention_covered.push_back(std::move(tc));
    }

    ordered_json j;
    j["n_intervals"] = a.intervals;
    j["bm25_params"] = params.describe();
    j["idf"] = to_string(variant);
    j["corpus_docs"] = index.stats().n_docs;
    j["avg_query_len"] = index.stats().avg_query_len;
    j["word_scoring"] = "bm25 scores word types; attention averages covered occurrences of each type";
    j["n_annotated_queries"] = bm25.size();
    std::string csv = "source,interval,precision,recall,interval_precision,avg_tf,avg_idf\n";
    const auto bm25_report = tf_idf_by_interval(bm25, index.stats(), a.intervals, variant);
    j["bm25"] = interval_json(bm25_report);
    append_interval_csv(csv, "bm25", bm25_report);
    std::string joint_csv;
    if (!a.attention.empty()) {
        const auto att = tf_idf_by_interval(attention, index.stats(), a.intervals, variant);
        const auto bc = tf_idf_by_interval(bm25_covered, index.stats(), a.intervals, variant);
        const auto ac = tf_idf_by_interval(attention_covered, index.stats(), a.intervals, variant);
        j["attention"] = interval_json(att);
        j["bm25_covered"] = interval_json(bc);
        j["attention_covered"] = interval_json(ac);
        append_interval_csv(csv, "attention", att);
        append_interval_csv(csv, "bm25_covered", bc);
        append_interval_csv(csv, "attention_covered", ac);
        const auto matrix = joint_rank_distribution(bm25_covered, attention_covered, a.intervals);
        ordered_json joint;
        joint["rows"] = "bm25 interval";
        joint["columns"] = "attention interval";
        joint["percent"] = matrix;
        j["joint"] = std::move(joint);
        joint_csv = "bm25_interval";
        for (std::size_t c = 0; c < a.intervals; ++c) {
            joint_csv += ",att_" + std::to_string(c + 1);
        }
        joint_csv += "\n";
        for (std::size_t r = 0; r < matrix.size(); ++r) {
            joint_csv += std::to_string(r + 1);
            for (double v : matrix[r]) {
                joint_csv += "," + format_double(v);
            }
            joint_csv += "\n";
        }
    }
    j["skipped"] = skipped;

    const fs::path out(a.out);
    fs::path csv_path = out;
    csv_path.replace_extension(".intervals.csv");
    write_file_atomic(out, j.dump(2) + "\n");
    write_file_atomic(csv_path, csv);
    std::vector<fs::path> outputs{out, csv_path};
    if (!joint_csv.empty()) {
        fs::path joint_path = out;
        joint_path.replace_extension(".joint.csv");
        write_file_atomic(joint_path, joint_csv);
        outputs.push_back(joint_path);
    }
    ctx.out << "salience report for " << bm25.size() << " annotated queries written to " << a.out << "\n";
    finish(ctx, "salience", out, inputs, outputs);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// overlap

struct OverlapArgs {
    std::string queries;
    std::vector<std::string> reformulated;
    std::string annotations;
    std::string variant = "as-written";
    std::string intersection = "multiset";
    std::string out;
};

int cmd_overlap(const OverlapArgs& a, Context& ctx) {
    const auto variant = parse_info_variant(a.variant);
    const auto mode = parse_intersection_mode(a.intersection);
    const fs::path qp = resolve_in(a.queries, dataset_files::kQueries);
    const fs::path ap = resolve_in(a.annotations, dataset_files::kAnnotations);
    const auto queries = read_queries(qp);
    const auto annotations = read_annotations(ap, &queries);
    std::vector<fs::path> inputs{qp, ap};
    std::vector<ReformulatedQuery> refs;
    for (const auto& p : a.reformulated) {
        inputs.emplace_back(p);
        auto part = read_reformulated(p);
        refs.insert(refs.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    std::set<std::string> known;
    for (const auto& q : queries) {
        known.insert(q.query_id);
    }
    std::vector<std::string> unknown;
    for (const auto& r : refs) {
        if (!known.contains(r.query_id)) {
            unknown.push_back(r.query_id);
        }
    }
    if (!unknown.empty()) {
        std::string list;
        for (const auto& id : unknown) {
            list += (list.empty() ? "" : ", ") + id;
        }
        throw ValidationError("reformulations reference unknown query ids: " + list, unknown);
    }
    const auto summary = summarize_reformulations(queries, refs, annotations, variant, mode);
    for (const auto& f : summary.flagged) {
        ctx.err << "flagged: " << f << "\n";
    }
    ctx.out << render_overlap_table(summary);
    if (!a.out.empty()) {
        write_file_atomic(a.out, overlap_json(summary));
        finish(ctx, "overlap", a.out, inputs, {a.out});
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
    std::string dataset;
    std::string tokenizer = "whitespace";
    std::string lexicon;
    std::string stopwords;
    std::string out;
};

int cmd_stats(const StatsArgs& a, Context& ctx) {
    IngestOptions opts;
    opts.require_annotations = true;
    const auto bundle = load_dataset(a.dataset, opts);
    std::unique_ptr<Analyzer> analyzer;
    if (!a.stopwords.empty()) {
        analyzer = std::make_unique<Analyzer>(TokenizerConfig::from_files(a.tokenizer, a.lexicon, a.stopwords));
    }
    const auto stats = annotation_stats(bundle, analyzer.get());
    const auto row = [](const AnnotationStatsRow& r) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-8zu  %-10.2f  %-10.2f  %.2f%%", r.n_queries, r.avg_query_length,
                      r.avg_annotation_length, r.avg_compression_rate * 100.0);
        return std::string(buf);
    };
    ctx.out << "                 queries   avg query   avg annot.  compression\n"
            << "with stopwords   " << row(stats.with_stopwords) << "\n";
    if (analyzer) {
        ctx.out << "w/o stopwords    " << row(stats.without_stopwords) << "\n";
    }
    for (const auto& id : stats.excluded) {
        ctx.err << "excluded (empty after stopword removal): " << id << "\n";
    }
    if (!a.out.empty()) {
        const auto rj = [](const AnnotationStatsRow& r) {
            ordered_json j;
            j["n_queries"] = r.n_queries;
            j["avg_query_length"] = r.avg_query_length;
            j["avg_annotation_length"] = r.avg_annotation_length;
            j["avg_compression_rate"] = r.avg_compression_rate;
            return j;
        };
        ordered_json j;
        j["with_stopwords"] = rj(stats.with_stopwords);
        if (analyzer) {
            j["without_stopwords"] = rj(stats.without_stopwords);
        }
        j["excluded"] = stats.excluded;
        write_file_atomic(a.out, j.dump(2) + "\n");
        std::vector<fs::path> inputs{a.dataset};
        if (!a.stopwords.empty()) {
            inputs.emplace_back(a.stopwords);
        }
        finish(ctx, "stats", a.out, inputs, {a.out});
    }
    return kExitOk;
}

int run_checked(const std::vector<std::string>& args, Context& ctx) {
    CLI::App app{"caselab: sparse retrieval, query salience and query reformulation for long legal-case queries"};
    app.set_version_flag("--version", version());
    app.set_config("--config", "", "TOML/INI file of option values; command-line flags take precedence");
    app.footer(kFormatsHelp);
    app.require_subcommand(1);

    IndexArgs ia;
    auto* index = app.add_subcommand("index", "Build and save an inverted index over a document collection");
    index->add_option("--corpus", ia.corpus, "documents.jsonl or a dataset directory")->required();
    index->add_option("--queries", ia.queries, "queries.jsonl used for the average query length");
    index->add_option("--out", ia.out, "Index file to write")->required();
    index->add_option("--tokenizer", ia.tokenizer, "whitespace | maxmatch")->capture_default_str();
    index->add_option("--lexicon", ia.lexicon, "One word per line, for maxmatch");
    index->add_option("--stopwords", ia.stopwords, "One stopword per line");
    index->add_flag("--keep-stopwords", ia.keep_stopwords, "Index stopwords as ordinary terms");
    index->add_flag("--count-stopwords-in-length", ia.count_stopwords_in_length,
                    "Count masked stopwords toward document length");

    RetrieveArgs ra;
    auto* retr = app.add_subcommand("retrieve", "Rank candidates for each query");
    retr->add_option("--index", ra.index, "Index file")->required();
    retr->add_option("--queries", ra.queries, "queries.jsonl or a dataset directory");
    retr->add_option("--reformulated", ra.reformulated, "Reformulated-queries JSONL to use instead of --queries");
    retr->add_option("--model", ra.model, "tfidf | bm25 | ql")->capture_default_str();
    retr->add_option("--params", ra.params, "Comma-separated key=value, e.g. k=1.4,b=0.6 or lambda=0.1");
    retr->add_option("--pool", ra.pool, "pools (rank each query's candidate pool) | corpus")->capture_default_str();
    retr->add_option("--pools", ra.pools, "pools.jsonl");
    retr->add_option("--qrels", ra.qrels, "qrels.jsonl; judged documents form the pool when --pools is absent");
    retr->add_option("--k", ra.k, "Keep the top k (0 keeps all)")->capture_default_str();
    retr->add_option("--out", ra.out, "Run file to write")->required();

    ReformulateArgs fa;
    auto* refo = app.add_subcommand("reformulate", "Produce keyword / key_sentence / summary / annotation queries");
    refo->add_option("--queries", fa.queries, "queries.jsonl or a dataset directory")->required();
    refo->add_option("--type", fa.type, "keyword | key_sentence | summary | annotation")->required();
    refo->add_option("--llm", fa.llm, "LLM config file (key = value)");
    refo->add_option("--cache", fa.cache, "Response cache directory");
    refo->add_option("--annotations", fa.annotations, "annotations.jsonl (annotation type)");
    refo->add_option("--prompts", fa.prompts, "Prompt template JSON (default: built-in en-v1)");
    refo->add_option("--joiner", fa.joiner, "Separator between annotation sentences");
    refo->add_option("--out", fa.out, "Reformulated-queries JSONL to write")->required();

    EvaluateArgs ea;
    auto* eval = app.add_subcommand("evaluate", "Score run files against graded judgments");
    eval->add_option("--run", ea.runs, "Run file(s)")->required();
    eval->add_option("--qrels", ea.qrels, "qrels.jsonl or a dataset directory")->required();
    eval->add_option("--baseline", ea.baseline, "Run file that increments are measured against");
    eval->add_option("--metrics", ea.metrics, "e.g. P@5,P@10,MAP,NDCG@10,NDCG@20,NDCG@30");
    eval->add_option("--folds", ea.folds, "Cross-validation folds (0 = none)")->capture_default_str();
    eval->add_option("--seed", ea.seed, "Fold shuffle seed")->capture_default_str();
    eval->add_option("--threshold", ea.threshold, "Minimum grade counted relevant")->capture_default_str();
    eval->add_option("--gain", ea.gain, "exponential | linear (NDCG gain)")->capture_default_str();
    eval->add_option("--out", ea.out, "JSON report to write");

    SalienceArgs sa;
    auto* sal = app.add_subcommand("salience", "Compare word importance rankings with annotated salient words");
    sal->add_option("--queries", sa.queries, "queries.jsonl or a dataset directory")->required();
    sal->add_option("--annotations", sa.annotations, "annotations.jsonl or a dataset directory")->required();
    sal->add_option("--index", sa.index, "Index built with the queries (for IDF and average query length)")
        ->required();
    sal->add_option("--attention", sa.attention, "Attention export JSONL");
    sal->add_option("--intervals", sa.intervals, "Number of rank intervals")->capture_default_str();
    sal->add_option("--bm25-params", sa.bm25_params, "k=..,b=..");
    sal->add_option("--idf", sa.idf, "IDF for the TF/IDF tables: robertson | smooth-log")->capture_default_str();
    sal->add_option("--out", sa.out, "JSON report (CSV tables are written next to it)")->required();

    OverlapArgs oa;
    auto* ov = app.add_subcommand("overlap", "Overlap / InfoR statistics of reformulated queries");
    ov->add_option("--queries", oa.queries, "queries.jsonl or a dataset directory")->required();
    ov->add_option("--reformulated", oa.reformulated, "Reformulated-queries JSONL file(s)")->required();
    ov->add_option("--annotations", oa.annotations, "annotations.jsonl or a dataset directory")->required();
    ov->add_option("--variant", oa.variant, "Headline InfoR: as-written | density")->capture_default_str();
    ov->add_option("--intersection", oa.intersection, "multiset | set")->capture_default_str();
    ov->add_option("--out", oa.out, "JSON report to write");

    StatsArgs ta;
    auto* st = app.add_subcommand("stats", "Annotation length and compression statistics");
    st->add_option("--dataset", ta.dataset, "Dataset directory")->required();
    st->add_option("--tokenizer", ta.tokenizer, "whitespace | maxmatch")->capture_default_str();
    st->add_option("--lexicon", ta.lexicon, "Lexicon for maxmatch");
    st->add_option("--stopwords", ta.stopwords, "Stopword list for the second row");
    st->add_option("--out", ta.out, "JSON report to write");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, ctx.out, ctx.err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    ctx.config_dump = app.config_to_str(true, false);

    if (index->parsed()) {
        return cmd_index(ia, ctx);
    }
    if (retr->parsed()) {
        return cmd_retrieve(ra, ctx);
    }
    if (refo->parsed()) {
        return cmd_reformulate(fa, ctx);
    }
    if (eval->parsed()) {
        return cmd_evaluate(ea, ctx);
    }
    if (sal->parsed()) {
        return cmd_salience(sa, ctx);
    }
    if (ov->parsed()) {
        return cmd_overlap(oa, ctx);
    }
    if (st->parsed()) {
        return cmd_stats(ta, ctx);
    }
    return kExitUsage;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Context ctx{out, err, args, {}};
    try {
        return run_checked(args, ctx);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const UpstreamError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUpstream;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace caselab::cli
