#include "caselab/salience.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "caselab/error.hpp"
#include "caselab/util.hpp"

namespace caselab {

std::string to_string(ImportanceSource source) {
    return source == ImportanceSource::bm25 ? "bm25" : "attention";
}

namespace {

struct WordType {
    std::string word;
    std::size_t first_token = 0;
    std::vector<std::size_t> occurrences; // token indices
};

/// Distinct counted words of the query, in first-occurrence order.
std::vector<WordType> word_types(const TokenizedText& query, bool exclude_stopwords) {
    std::vector<WordType> types;
    std::unordered_map<std::string, std::size_t> at;
    for (std::size_t i = 0; i < query.tokens.size(); ++i) {
        if (exclude_stopwords && i < query.stopword_mask.size() && query.stopword_mask[i]) {
            continue;
        }
        const auto& surface = query.tokens[i].surface;
        auto [it, fresh] = at.emplace(surface, types.size());
        if (fresh) {
            types.push_back({surface, i, {}});
        }
        types[it->second].occurrences.push_back(i);
    }
    return types;
}

void assign_ranks(std::vector<WordImportance>& words) {
    std::stable_sort(words.begin(), words.end(), [](const WordImportance& a, const WordImportance& b) {
        return a.score != b.score ? a.score > b.score : a.first_token < b.first_token;
    });
    for (std::size_t i = 0; i < words.size(); ++i) {
        words[i].rank = i + 1;
    }
}

} // namespace

std::vector<WordImportance> bm25_word_importance(const TokenizedText& query, const CorpusStats& stats,
                                                 const Bm25Params& params, bool exclude_stopwords) {
    const auto types = word_types(query, exclude_stopwords);
    if (types.empty()) {
        return {};
    }
    if (!(stats.avg_query_len > 0)) {
        throw ConfigError("average query length is unavailable; build the index with the query set");
    }
    std::size_t length = 0;
    for (const auto& t : types) {
        length += t.occurrences.size();
    }
    const double ratio = static_cast<double>(length) / stats.avg_query_len;
    std::vector<WordImportance> out;
    out.reserve(types.size());
    for (const auto& t : types) {
        const double tf = static_cast<double>(t.occurrences.size());
        WordImportance w;
        w.word = t.word;
        w.first_token = t.first_token;
        w.tf = t.occurrences.size();
        // Saturation factor first: at tf = 1 and |q| = avgl it is exactly 1.
        const double saturation = (params.k + 1) / (tf + params.k * (1 - params.b + params.b * ratio));
        w.score = idf(stats, t.word, params.idf) * saturation;
        w.source = ImportanceSource::bm25;
        out.push_back(std::move(w));
    }
    assign_ranks(out);
    return out;
}

// ---------------------------------------------------------------------------
// Attention exports

void AttentionExport::validate(std::size_t query_length) const {
    const auto fail = [&](const std::string& why) {
        throw ValidationError("attention export " + query_id + "/" + doc_id + ": " + why, {query_id});
    };
    if (tokens.size() != cls_weights.size()) {
        fail("tokens and cls_weights differ in length");
    }
    if (doc_grade < 0 || doc_grade > 3) {
        fail("doc_grade outside 0..3");
    }
    for (double w : cls_weights) {
        if (!std::isfinite(w) || w < 0) {
            fail("weights must be finite and non-negative");
        }
    }
    for (const auto& t : tokens) {
        if (t.char_start >= t.char_end || t.char_end > query_length) {
            fail("token offsets outside the query text");
        }
    }
}

std::vector<AttentionExport> read_attention_exports(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw IoError("attention file not found: " + path.string());
    }
    std::vector<AttentionExport> out;
    const auto lines = split_lines(read_file(path));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto text = trim(lines[i]);
        if (text.empty()) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(text);
            AttentionExport rec;
            rec.query_id = j.at("query_id").get<std::string>();
            rec.doc_id = j.at("doc_id").get<std::string>();
            rec.doc_grade = j.at("doc_grade").get<int>();
            for (const auto& t : j.at("tokens")) {
                rec.tokens.push_back({t.at("text").get<std::string>(), t.at("char_start").get<std::size_t>(),
                                      t.at("char_end").get<std::size_t>()});
            }
            for (const auto& w : j.at("cls_weights")) {
                rec.cls_weights.push_back(w.get<double>());
            }
            if (rec.tokens.size() != rec.cls_weights.size()) {
                throw FormatError(path.filename().string() + ":" + std::to_string(i + 1) +
                                      ": tokens and cls_weights differ in length",
                                  path.string(), i + 1);
            }
            out.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path.filename().string() + ":" + std::to_string(i + 1) + ": malformed attention record: " +
                                  e.what(),
                              path.string(), i + 1);
        }
    }
    return out;
}

std::string format_attention_export(const AttentionExport& record) {
    nlohmann::ordered_json j;
    j["query_id"] = record.query_id;
    j["doc_id"] = record.doc_id;
    j["doc_grade"] = record.doc_grade;
    j["tokens"] = nlohmann::ordered_json::array();
    for (const auto& t : record.tokens) {
        nlohmann::ordered_json tj;
        tj["text"] = t.text;
        tj["char_start"] = t.char_start;
        tj["char_end"] = t.char_end;
        j["tokens"].push_back(std::move(tj));
    }
    j["cls_weights"] = record.cls_weights;
    return j.dump();
}

std::vector<double> min_max_normalize(std::span<const double> weights) {
    if (weights.empty()) {
        return {};
    }
    const auto [lo, hi] = std::minmax_element(weights.begin(), weights.end());
    const double min = *lo;
    const double range = *hi - min;
    std::vector<double> out(weights.size(), 0.0);
    if (range > 0) {
        for (std::size_t i = 0; i < weights.size(); ++i) {
            out[i] = (weights[i] - min) / range;
        }
    }
    return out;
}

std::vector<WordImportance> attention_to_word_scores(const AttentionExport& record, const TokenizedText& query,
                                                     bool exclude_stopwords) {
    const auto normalized = min_max_normalize(record.cls_weights);
    const auto types = word_types(query, exclude_stopwords);
    std::vector<WordImportance> out;
    out.reserve(types.size());
    for (const auto& t : types) {
        double sum = 0;
        std::size_t covered = 0;
        for (std::size_t occ : t.occurrences) {
            const CharSpan word = query.tokens[occ].span();
            const double word_len = static_cast<double>(word.length());
            double atten = 0;
            bool touched = false;
            for (std::size_t j = 0; j < record.tokens.size(); ++j) {
                const CharSpan tok{record.tokens[j].char_start, record.tokens[j].char_end};
                const std::size_t inter = intersection_length(word, tok);
                if (inter == 0) {
                    continue;
                }
                touched = true;
                atten += static_cast<double>(inter) * normalized[j] / static_cast<double>(tok.length());
            }
            if (touched) {
                sum += atten / word_len;
                ++covered;
            }
        }
        WordImportance w;
        w.word = t.word;
        w.first_token = t.first_token;
        w.tf = t.occurrences.size();
        w.score = covered == 0 ? 0.0 : sum / static_cast<double>(covered);
        w.source = ImportanceSource::attention;
        w.covered = covered > 0;
        out.push_back(std::move(w));
    }
    assign_ranks(out);
    return out;
}

std::vector<WordImportance> aggregate_attention(std::span<const AttentionExport> exports, const TokenizedText& query,
                                                bool exclude_stopwords, int required_grade) {
    std::vector<const AttentionExport*> selected;
    for (const auto& e : exports) {
        if (e.doc_grade == required_grade) {
            selected.push_back(&e);
        }
    }
    if (selected.empty()) {
        throw ConfigError("no grade-" + std::to_string(required_grade) + " attention export for query " +
                          query.source_ref);
    }
    std::vector<WordImportance> acc;
    std::unordered_map<std::string, std::size_t> at;
    for (const auto* e : selected) {
        for (auto& w : attention_to_word_scores(*e, query, exclude_stopwords)) {
            auto [it, fresh] = at.emplace(w.word, acc.size());
            if (fresh) {
                acc.push_back(w);
            } else {
                acc[it->second].score += w.score;
                acc[it->second].covered = acc[it->second].covered || w.covered;
            }
        }
    }
    const double n = static_cast<double>(selected.size());
    for (auto& w : acc) {
        w.score /= n;
    }
    assign_ranks(acc);
    return acc;
}

std::unordered_set<std::string> salient_word_types(const TokenizedText& query, const std::vector<bool>& salient_tokens) {
    std::unordered_set<std::string> out;
    for (std::size_t i = 0; i < query.tokens.size() && i < salient_tokens.size(); ++i) {
        if (salient_tokens[i]) {
            out.insert(query.tokens[i].surface);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Interval analysis

std::size_t interval_cutoff(std::size_t i, std::size_t n_words, std::size_t n_intervals) {
    return (i * n_words + n_intervals - 1) / n_intervals;
}

std::size_t interval_of_rank(std::size_t rank, std::size_t n_words, std::size_t n_intervals) {
    for (std::size_t i = 1; i <= n_intervals; ++i) {
        if (rank <= interval_cutoff(i, n_words, n_intervals)) {
            return i - 1;
        }
    }
    return n_intervals - 1;
}

IntervalReport interval_precision_recall(std::span<const QuerySalience> queries, std::size_t n_intervals) {
    if (n_intervals == 0) {
        throw ConfigError("n_intervals must be positive");
    }
    IntervalReport report;
    report.n_intervals = n_intervals;
    report.precision.assign(n_intervals, 0.0);
    report.recall.assign(n_intervals, 0.0);
    report.interval_precision.assign(n_intervals, 0.0);
    report.avg_tf.assign(n_intervals, std::nullopt);
    report.avg_idf.assign(n_intervals, std::nullopt);
    std::vector<std::size_t> bucket_queries(n_intervals, 0);

    for (const auto& q : queries) {
        const std::size_t n = q.ranking.size();
        std::vector<bool> hit(n, false);
        std::size_t total = 0;
        for (const auto& w : q.ranking) {
            if (w.rank >= 1 && w.rank <= n && q.salient.count(w.word) != 0) {
                hit[w.rank - 1] = true;
                ++total;
            }
        }
        if (total == 0) {
            report.excluded.push_back(q.query_id);
            continue;
        }
        ++report.n_queries;
        std::size_t prev = 0;
        std::size_t hits = 0;
        for (std::size_t i = 1; i <= n_intervals; ++i) {
            const std::size_t cut = interval_cutoff(i, n, n_intervals);
            std::size_t bucket_hits = 0;
            for (std::size_t r = prev; r < cut; ++r) {
                bucket_hits += hit[r] ? 1 : 0;
            }
            hits += bucket_hits;
            report.precision[i - 1] += static_cast<double>(hits) / static_cast<double>(cut);
            report.recall[i - 1] += static_cast<double>(hits) / static_cast<double>(total);
            if (cut > prev) {
                report.interval_precision[i - 1] += static_cast<double>(bucket_hits) / static_cast<double>(cut - prev);
                ++bucket_queries[i - 1];
            }
            prev = cut;
        }
    }
    if (report.n_queries > 0) {
        const double nq = static_cast<double>(report.n_queries);
        for (std::size_t i = 0; i < n_intervals; ++i) {
            report.precision[i] /= nq;
            report.recall[i] /= nq;
            if (bucket_queries[i] > 0) {
                report.interval_precision[i] /= static_cast<double>(bucket_queries[i]);
            }
        }
    }
    return report;
}

IntervalReport tf_idf_by_interval(std::span<const QuerySalience> queries, const CorpusStats& stats,
                                  std::size_t n_intervals, IdfVariant variant) {
    IntervalReport report = interval_precision_recall(queries, n_intervals);
    std::vector<double> tf_sum(n_intervals, 0.0);
    std::vector<double> idf_sum(n_intervals, 0.0);
    std::vector<std::size_t> count(n_intervals, 0);
    for (const auto& q : queries) {
        const std::size_t n = q.ranking.size();
        for (const auto& w : q.ranking) {
            if (q.salient.count(w.word) == 0) {
                continue;
            }
            const std::size_t b = interval_of_rank(w.rank, n, n_intervals);
            tf_sum[b] += static_cast<double>(w.tf);
            idf_sum[b] += idf(stats, w.word, variant);
            ++count[b];
        }
    }
    for (std::size_t i = 0; i < n_intervals; ++i) {
        if (count[i] > 0) {
            report.avg_tf[i] = tf_sum[i] / static_cast<double>(count[i]);
            report.avg_idf[i] = idf_sum[i] / static_cast<double>(count[i]);
        }
    }
    return report;
}

std::pair<QuerySalience, QuerySalience> restrict_to_covered(const QuerySalience& bm25, const QuerySalience& attention) {
    std::unordered_set<std::string> covered;
    for (const auto& w : attention.ranking) {
        if (w.covered) {
            covered.insert(w.word);
        }
    }
    const auto restrict = [&](const QuerySalience& src) {
        QuerySalience out{src.query_id, {}, src.salient};
        std::vector<WordImportance> words = src.ranking;
        std::sort(words.begin(), words.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
        for (auto& w : words) {
            if (covered.count(w.word) != 0) {
                out.ranking.push_back(std::move(w));
                out.ranking.back().rank = out.ranking.size();
            }
        }
        return out;
    };
    return {restrict(bm25), restrict(attention)};
}

std::vector<std::vector<double>> joint_rank_distribution(std::span<const QuerySalience> a,
                                                         std::span<const QuerySalience> b, std::size_t n_intervals) {
    if (n_intervals == 0) {
        throw ConfigError("n_intervals must be positive");
    }
    if (a.size() != b.size()) {
        throw ValidationError("joint rank distribution needs the same queries on both sides", {});
    }
    std::vector<std::vector<double>> matrix(n_intervals, std::vector<double>(n_intervals, 0.0));
    std::size_t total = 0;
    for (std::size_t q = 0; q < a.size(); ++q) {
        if (a[q].query_id != b[q].query_id) {
            throw ValidationError("query order differs: " + a[q].query_id + " vs " + b[q].query_id,
                                  {a[q].query_id, b[q].query_id});
        }
        std::unordered_map<std::string, std::size_t> rank_b;
        for (const auto& w : b[q].ranking) {
            rank_b.emplace(w.word, w.rank);
        }
        bool same = rank_b.size() == a[q].ranking.size();
        for (const auto& w : a[q].ranking) {
            same = same && rank_b.count(w.word) != 0;
        }
        if (!same) {
            throw ValidationError("word sets differ for query " + a[q].query_id, {a[q].query_id});
        }
        const std::size_t n = a[q].ranking.size();
        for (const auto& w : a[q].ranking) {
            if (a[q].salient.count(w.word) == 0) {
                continue;
            }
            matrix[interval_of_rank(w.rank, n, n_intervals)][interval_of_rank(rank_b[w.word], n, n_intervals)] += 1;
            ++total;
        }
    }
    if (total > 0) {
        for (auto& row : matrix) {
            for (auto& cell : row) {
                cell = cell * 100.0 / static_cast<double>(total);
            }
        }
    }
    return matrix;
}

} // namespace caselab
