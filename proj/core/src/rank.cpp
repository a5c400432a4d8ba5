#include "caselab/rank.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "caselab/error.hpp"
#include "caselab/util.hpp"

namespace caselab {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Parameters

void Bm25Params::validate() const {
    if (!(k > 0) || !std::isfinite(k)) {
        throw ConfigError("bm25 k must be positive, got " + format_double(k));
    }
    if (!(b >= 0 && b <= 1)) {
        throw ConfigError("bm25 b must lie in [0,1], got " + format_double(b));
    }
}

std::string Bm25Params::describe() const {
    std::string s = "k=" + format_double(k) + ",b=" + format_double(b);
    if (idf != IdfVariant::robertson) {
        s += ",idf=" + to_string(idf);
    }
    return s;
}

void QlParams::validate() const {
    if (smoothing == Smoothing::jelinek_mercer && !(lambda > 0 && lambda < 1)) {
        throw ConfigError("ql lambda must lie in (0,1), got " + format_double(lambda));
    }
    if (smoothing == Smoothing::dirichlet && !(mu > 0 && std::isfinite(mu))) {
        throw ConfigError("ql mu must be positive, got " + format_double(mu));
    }
}

std::string QlParams::describe() const {
    if (smoothing == Smoothing::jelinek_mercer) {
        return "smoothing=jm,lambda=" + format_double(lambda);
    }
    return "smoothing=dirichlet,mu=" + format_double(mu);
}

std::string TfidfParams::describe() const {
    return "idf=" + to_string(idf);
}

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::tfidf: return "tfidf";
    case ModelKind::bm25: return "bm25";
    case ModelKind::ql: return "ql";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "tfidf") {
        return ModelKind::tfidf;
    }
    if (name == "bm25") {
        return ModelKind::bm25;
    }
    if (name == "ql") {
        return ModelKind::ql;
    }
    throw ConfigError("unknown model '" + std::string(name) + "' (expected tfidf, bm25 or ql)");
}

std::string ModelSpec::describe() const {
    switch (kind) {
    case ModelKind::tfidf: return tfidf.describe();
    case ModelKind::bm25: return bm25.describe();
    case ModelKind::ql: return ql.describe();
    }
    return {};
}

namespace {

double parse_number(std::string_view key, std::string_view value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(std::string(value), &used);
        if (used != value.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("parameter " + std::string(key) + " expects a number, got '" + std::string(value) + "'");
    }
}

} // namespace

ModelSpec ModelSpec::parse(std::string_view model, std::string_view params) {
    ModelSpec spec;
    spec.kind = parse_model_kind(model);
    std::size_t pos = 0;
    while (pos < params.size()) {
        std::size_t comma = params.find(',', pos);
        if (comma == std::string_view::npos) {
            comma = params.size();
        }
        const std::string_view item = trim(params.substr(pos, comma - pos));
        pos = comma + 1;
        if (item.empty()) {
            continue;
        }
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("parameter '" + std::string(item) + "' is not key=value");
        }
        const std::string_view key = trim(item.substr(0, eq));
        const std::string_view value = trim(item.substr(eq + 1));
        bool known = false;
        switch (spec.kind) {
        case ModelKind::bm25:
            if (key == "k" || key == "k1") {
                spec.bm25.k = parse_number(key, value);
                known = true;
            } else if (key == "b") {
                spec.bm25.b = parse_number(key, value);
                known = true;
            } else if (key == "idf") {
                spec.bm25.idf = parse_idf_variant(value);
                known = true;
            }
            break;
        case ModelKind::ql:
            if (key == "lambda") {
                spec.ql.lambda = parse_number(key, value);
                known = true;
            } else if (key == "mu") {
                spec.ql.mu = parse_number(key, value);
                known = true;
            } else if (key == "smoothing") {
                if (value == "jm" || value == "jelinek-mercer") {
                    spec.ql.smoothing = Smoothing::jelinek_mercer;
                } else if (value == "dirichlet") {
                    spec.ql.smoothing = Smoothing::dirichlet;
                } else {
                    throw ConfigError("unknown smoothing '" + std::string(value) + "'");
                }
                known = true;
            }
            break;
        case ModelKind::tfidf:
            if (key == "idf") {
                spec.tfidf.idf = parse_idf_variant(value);
                known = true;
            }
            break;
        }
        if (!known) {
            throw ConfigError("unknown parameter '" + std::string(key) + "' for model " + to_string(spec.kind));
        }
    }
    spec.bm25.validate();
    spec.ql.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Scorers

namespace {

double length_ratio(std::uint32_t dl, double avgdl) {
    return avgdl > 0 ? static_cast<double>(dl) / avgdl : 1.0;
}

double bm25_term(std::uint32_t tf, double idf, double ratio, const Bm25Params& p) {
    const double f = tf;
    return idf * f * (p.k + 1) / (f + p.k * (1 - p.b + p.b * ratio));
}

double background_probability(std::uint64_t cf, std::uint64_t total, double floor) {
    return cf > 0 ? static_cast<double>(cf) / static_cast<double>(total) : floor;
}

double ql_term(std::uint32_t tf, std::uint32_t dl, double p_c, const QlParams& p) {
    if (p.smoothing == Smoothing::jelinek_mercer) {
        const double p_d = dl > 0 ? static_cast<double>(tf) / static_cast<double>(dl) : 0.0;
        return std::log((1 - p.lambda) * p_d + p.lambda * p_c);
    }
    return std::log((static_cast<double>(tf) + p.mu * p_c) / (static_cast<double>(dl) + p.mu));
}

/// Distinct query terms with their query frequency, in first-occurrence order.
std::vector<std::pair<std::string, std::uint32_t>> query_vector(std::span<const std::string> terms) {
    std::vector<std::pair<std::string, std::uint32_t>> out;
    std::unordered_map<std::string, std::size_t> at;
    for (const auto& t : terms) {
        auto [it, fresh] = at.emplace(t, out.size());
        if (fresh) {
            out.emplace_back(t, 1);
        } else {
            ++out[it->second].second;
        }
    }
    return out;
}

} // namespace

double score_bm25(std::span<const std::string> query_terms, std::uint32_t doc, const InvertedIndex& index,
                  const Bm25Params& params) {
    const double ratio = length_ratio(index.doc_len(doc), index.stats().avg_doc_len);
    double s = 0;
    for (const auto& t : query_terms) {
        const auto tf = index.tf(t, doc);
        if (tf == 0) {
            continue;
        }
        s += bm25_term(tf, index.idf(t, params.idf), ratio, params);
    }
    return s;
}

double ql_floor_probability(const InvertedIndex& index) {
    return 1.0 / (static_cast<double>(index.stats().total_terms) + static_cast<double>(index.vocabulary_size()));
}

double score_ql(std::span<const std::string> query_terms, std::uint32_t doc, const InvertedIndex& index,
                const QlParams& params) {
    const double floor = ql_floor_probability(index);
    const auto total = index.stats().total_terms;
    const auto dl = index.doc_len(doc);
    double s = 0;
    for (const auto& t : query_terms) {
        s += ql_term(index.tf(t, doc), dl, background_probability(index.cf(t), total, floor), params);
    }
    return s;
}

double score_tfidf(std::span<const std::string> query_terms, std::uint32_t doc, const InvertedIndex& index,
                   const TfidfParams& params) {
    const auto qv = query_vector(query_terms);
    double dot = 0;
    double qnorm2 = 0;
    for (const auto& [t, qtf] : qv) {
        const double w = index.idf(t, params.idf);
        const double qw = qtf * w;
        qnorm2 += qw * qw;
        dot += qw * (index.tf(t, doc) * w);
    }
    const double dnorm = index.tfidf_norm(doc, params.idf);
    const double qnorm = std::sqrt(qnorm2);
    if (qnorm == 0 || dnorm == 0) {
        return 0;
    }
    return dot / (qnorm * dnorm);
}

double score(std::span<const std::string> query_terms, std::uint32_t doc, const InvertedIndex& index,
             const ModelSpec& model) {
    switch (model.kind) {
    case ModelKind::tfidf: return score_tfidf(query_terms, doc, index, model.tfidf);
    case ModelKind::bm25: return score_bm25(query_terms, doc, index, model.bm25);
    case ModelKind::ql: return score_ql(query_terms, doc, index, model.ql);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Retrieval

namespace {

// Term-at-a-time scoring of every document. Additions happen in the same order
// as the per-document scorers, so both paths produce identical doubles.
std::vector<double> score_all(std::span<const std::string> terms, const InvertedIndex& index, const ModelSpec& model) {
    const std::size_t n = index.n_docs();
    std::vector<double> acc(n, 0.0);
    const double avgdl = index.stats().avg_doc_len;
    switch (model.kind) {
    case ModelKind::bm25:
        for (const auto& t : terms) {
            const auto list = index.postings(t);
            if (list.empty()) {
                continue;
            }
            const double w = index.idf(t, model.bm25.idf);
            for (const auto& p : list) {
                acc[p.doc] += bm25_term(p.tf, w, length_ratio(index.doc_len(p.doc), avgdl), model.bm25);
            }
        }
        break;
    case ModelKind::ql: {
        const double floor = ql_floor_probability(index);
        const auto total = index.stats().total_terms;
        for (const auto& t : terms) {
            const auto list = index.postings(t);
            const double p_c = background_probability(index.cf(t), total, floor);
            auto it = list.begin();
            for (std::uint32_t d = 0; d < n; ++d) {
                std::uint32_t tf = 0;
                if (it != list.end() && it->doc == d) {
                    tf = it->tf;
                    ++it;
                }
                acc[d] += ql_term(tf, index.doc_len(d), p_c, model.ql);
            }
        }
        break;
    }
    case ModelKind::tfidf: {
        const auto qv = query_vector(terms);
        double qnorm2 = 0;
        for (const auto& [t, qtf] : qv) {
            const double w = index.idf(t, model.tfidf.idf);
            const double qw = qtf * w;
            qnorm2 += qw * qw;
            auto it = index.postings(t).begin();
            const auto end = index.postings(t).end();
            for (std::uint32_t d = 0; d < n; ++d) {
                std::uint32_t tf = 0;
                if (it != end && it->doc == d) {
                    tf = it->tf;
                    ++it;
                }
                acc[d] += qw * (tf * w);
            }
        }
        const double qnorm = std::sqrt(qnorm2);
        for (std::uint32_t d = 0; d < n; ++d) {
            const double dnorm = index.tfidf_norm(d, model.tfidf.idf);
            acc[d] = (qnorm == 0 || dnorm == 0) ? 0.0 : acc[d] / (qnorm * dnorm);
        }
        break;
    }
    }
    return acc;
}

void sort_and_cut(std::vector<ScoredDoc>& entries, std::size_t k) {
    const auto better = [](const ScoredDoc& a, const ScoredDoc& b) {
        return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
    };
    if (k != 0 && k < entries.size()) {
        std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(k), entries.end(), better);
        entries.resize(k);
    } else {
        std::sort(entries.begin(), entries.end(), better);
    }
}

} // namespace

RankedRun retrieve(const std::string& query_id, std::span<const std::string> query_terms, const InvertedIndex& index,
                   const ModelSpec& model, const std::vector<std::string>* pool, std::size_t k) {
    RankedRun run;
    run.query_id = query_id;
    run.model = model.name();
    run.params = model.describe();

    if (pool != nullptr) {
        std::vector<std::string> missing;
        std::vector<std::uint32_t> ords;
        ords.reserve(pool->size());
        for (const auto& id : *pool) {
            auto ord = index.doc_ordinal(id);
            if (!ord) {
                missing.push_back(id);
            } else {
                ords.push_back(*ord);
            }
        }
        if (!missing.empty()) {
            std::string msg = "pool of " + query_id + " references documents missing from the index:";
            for (const auto& m : missing) {
                msg += " " + m;
            }
            throw ValidationError(msg, missing);
        }
        run.entries.reserve(ords.size());
        for (auto ord : ords) {
            run.entries.push_back({index.doc_id(ord), score(query_terms, ord, index, model)});
        }
    } else {
        const auto scores = score_all(query_terms, index, model);
        run.entries.reserve(scores.size());
        for (std::uint32_t d = 0; d < scores.size(); ++d) {
            run.entries.push_back({index.doc_id(d), scores[d]});
        }
    }
    sort_and_cut(run.entries, k);
    return run;
}

RankedRun retrieve(const QueryCase& query, const InvertedIndex& index, const Analyzer& analyzer,
                   const ModelSpec& model, const RelevanceJudgments* pools, std::size_t k) {
    const auto terms = index.query_terms(analyzer.tokenize(query.text, query.query_id));
    const std::vector<std::string>* pool = nullptr;
    if (pools != nullptr) {
        pool = pools->pool(query.query_id);
        if (pool == nullptr) {
            throw ValidationError("no candidate pool for query " + query.query_id, {query.query_id});
        }
    }
    return retrieve(query.query_id, terms, index, model, pool, k);
}

// ---------------------------------------------------------------------------
// Run files

std::string format_run(std::span<const RankedRun> runs) {
    std::string out;
    for (const auto& run : runs) {
        for (std::size_t i = 0; i < run.entries.size(); ++i) {
            ordered_json j;
            j["query_id"] = run.query_id;
            j["doc_id"] = run.entries[i].doc_id;
            j["rank"] = i + 1;
            j["score"] = run.entries[i].score;
            j["model"] = run.model;
            j["params"] = run.params;
            out += j.dump();
            out += '\n';
        }
    }
    return out;
}

std::map<std::string, RankedRun> read_run(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw IoError("run file not found: " + path.string());
    }
    struct Line {
        std::size_t rank;
        ScoredDoc doc;
    };
    std::map<std::string, std::vector<Line>> lines;
    std::map<std::string, RankedRun> runs;
    const auto all = split_lines(read_file(path));
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto text = trim(all[i]);
        if (text.empty()) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(text);
            const auto qid = j.at("query_id").get<std::string>();
            auto& run = runs[qid];
            if (run.query_id.empty()) {
                run.query_id = qid;
                run.model = j.value("model", "");
                run.params = j.value("params", "");
            }
            lines[qid].push_back({j.at("rank").get<std::size_t>(),
                                  {j.at("doc_id").get<std::string>(), j.at("score").get<double>()}});
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path.filename().string() + ":" + std::to_string(i + 1) + ": malformed run line: " + e.what(),
                              path.string(), i + 1);
        }
    }
    for (auto& [qid, ls] : lines) {
        std::stable_sort(ls.begin(), ls.end(), [](const Line& a, const Line& b) { return a.rank < b.rank; });
        auto& run = runs[qid];
        for (auto& l : ls) {
            run.entries.push_back(std::move(l.doc));
        }
    }
    return runs;
}

} // namespace caselab
