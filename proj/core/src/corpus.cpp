#include "caselab/corpus.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "caselab/error.hpp"
#include "caselab/utf8.hpp"
#include "caselab/util.hpp"

namespace caselab {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::size_t SalienceAnnotation::total_length() const noexcept {
    std::size_t n = 0;
    for (const auto& s : spans) {
        n += s.length();
    }
    return n;
}

std::vector<CharSpan> normalize_spans(std::vector<CharSpan> spans) {
    std::sort(spans.begin(), spans.end(),
              [](const CharSpan& a, const CharSpan& b) { return a.start != b.start ? a.start < b.start : a.end < b.end; });
    std::vector<CharSpan> out;
    for (const auto& s : spans) {
        if (!out.empty() && s.start < out.back().end) {
            out.back().end = std::max(out.back().end, s.end);
        } else {
            out.push_back(s);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// RelevanceJudgments

void RelevanceJudgments::set_grade(const std::string& query_id, const std::string& doc_id, int grade) {
    if (grade < 0 || grade > kMaxGrade) {
        throw ValidationError("grade " + std::to_string(grade) + " outside 0..3 for " + query_id + "/" + doc_id,
                              {query_id, doc_id});
    }
    grades_[query_id][doc_id] = grade;
}

void RelevanceJudgments::set_pool(const std::string& query_id, std::vector<std::string> doc_ids) {
    pools_[query_id] = std::move(doc_ids);
}

int RelevanceJudgments::grade(const std::string& query_id, const std::string& doc_id) const {
    auto q = grades_.find(query_id);
    if (q == grades_.end()) {
        return 0;
    }
    auto d = q->second.find(doc_id);
    return d == q->second.end() ? 0 : d->second;
}

bool RelevanceJudgments::has_query(const std::string& query_id) const {
    return grades_.count(query_id) != 0;
}

const std::map<std::string, int>* RelevanceJudgments::judged(const std::string& query_id) const {
    auto it = grades_.find(query_id);
    return it == grades_.end() ? nullptr : &it->second;
}

const std::vector<std::string>* RelevanceJudgments::pool(const std::string& query_id) const {
    auto it = pools_.find(query_id);
    return it == pools_.end() ? nullptr : &it->second;
}

std::vector<std::string> RelevanceJudgments::query_ids() const {
    std::vector<std::string> ids;
    ids.reserve(grades_.size());
    for (const auto& [q, _] : grades_) {
        ids.push_back(q);
    }
    return ids;
}

// ---------------------------------------------------------------------------
// DatasetBundle

const CaseDocument* DatasetBundle::find_document(const std::string& doc_id) const {
    auto it = std::find_if(documents.begin(), documents.end(), [&](const auto& d) { return d.doc_id == doc_id; });
    return it == documents.end() ? nullptr : &*it;
}

const QueryCase* DatasetBundle::find_query(const std::string& query_id) const {
    auto it = std::find_if(queries.begin(), queries.end(), [&](const auto& q) { return q.query_id == query_id; });
    return it == queries.end() ? nullptr : &*it;
}

const SalienceAnnotation* DatasetBundle::find_annotation(const std::string& query_id) const {
    auto it = annotations.find(query_id);
    return it == annotations.end() ? nullptr : &it->second;
}

namespace {

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i != 0) {
            out += ", ";
        }
        out += ids[i];
    }
    return out;
}

void throw_if_any(const std::string& what, std::vector<std::string> ids) {
    if (ids.empty()) {
        return;
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    const std::string message = what + ": " + join_ids(ids);
    throw ValidationError(message, std::move(ids));
}

} // namespace

void DatasetBundle::validate() const {
    std::set<std::string> doc_ids;
    std::vector<std::string> bad;
    for (const auto& d : documents) {
        if (!doc_ids.insert(d.doc_id).second) {
            bad.push_back(d.doc_id);
        }
        if (d.length_chars != utf8::length(d.text)) {
            bad.push_back(d.doc_id);
        }
    }
    throw_if_any("duplicate doc_id or inconsistent length_chars", bad);

    std::map<std::string, const QueryCase*> query_map;
    for (const auto& q : queries) {
        if (!query_map.emplace(q.query_id, &q).second || q.text.empty()) {
            bad.push_back(q.query_id);
        }
    }
    throw_if_any("duplicate query_id or empty query text", bad);

    for (const auto& [qid, _] : qrels.grades()) {
        if (!query_map.count(qid)) {
            bad.push_back(qid);
        }
    }
    for (const auto& [qid, _] : qrels.pools()) {
        if (!query_map.count(qid)) {
            bad.push_back(qid);
        }
    }
    throw_if_any("qrels/pools reference unknown query_id", bad);

    for (const auto& [qid, pool] : qrels.pools()) {
        for (const auto& d : pool) {
            if (!doc_ids.count(d)) {
                bad.push_back(d);
            }
        }
    }
    for (const auto& [qid, judged] : qrels.grades()) {
        for (const auto& [d, _] : judged) {
            if (!doc_ids.count(d)) {
                bad.push_back(d);
            }
        }
    }
    throw_if_any("unknown doc_id", bad);

    for (const auto& [qid, judged] : qrels.grades()) {
        const auto* pool = qrels.pool(qid);
        if (pool == nullptr) {
            bad.push_back(qid);
            continue;
        }
        const std::set<std::string> members(pool->begin(), pool->end());
        for (const auto& [d, _] : judged) {
            if (!members.count(d)) {
                bad.push_back(d);
            }
        }
    }
    throw_if_any("judged doc_id missing from its query's pool", bad);

    for (const auto& [qid, ann] : annotations) {
        auto q = query_map.find(qid);
        if (q == query_map.end()) {
            bad.push_back(qid);
            continue;
        }
        const std::size_t len = utf8::length(q->second->text);
        std::size_t prev_end = 0;
        for (const auto& s : ann.spans) {
            if (s.start >= s.end || s.end > len || s.start < prev_end) {
                bad.push_back(qid);
                break;
            }
            prev_end = s.end;
        }
    }
    throw_if_any("annotation references unknown query or has invalid spans", bad);
}

// ---------------------------------------------------------------------------
// JSONL reading

namespace {

template <typename Fn>
void for_each_record(const fs::path& path, Fn&& fn) {
    if (!fs::exists(path)) {
        throw IoError("missing dataset file: " + path.string());
    }
    const std::string content = read_file(path);
    const auto lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string_view line = trim(lines[i]);
        if (line.empty()) {
            continue;
        }
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError(path.filename().string() + ":" + std::to_string(i + 1) + ": invalid JSON: " + e.what(),
                              path.string(), i + 1);
        }
        try {
            if (!rec.is_object()) {
                throw std::runtime_error("record is not an object");
            }
            fn(rec);
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception& e) {
            throw FormatError(path.filename().string() + ":" + std::to_string(i + 1) + ": malformed record: " + e.what(),
                              path.string(), i + 1);
        }
    }
}

std::string require_string(const json& rec, const char* key) {
    auto it = rec.find(key);
    if (it == rec.end() || !it->is_string()) {
        throw std::runtime_error(std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

std::vector<std::string> optional_strings(const json& rec, const char* key) {
    auto it = rec.find(key);
    if (it == rec.end() || it->is_null()) {
        return {};
    }
    if (!it->is_array()) {
        throw std::runtime_error(std::string("field '") + key + "' must be an array of strings");
    }
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) {
            throw std::runtime_error(std::string("field '") + key + "' must be an array of strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace

std::vector<CaseDocument> read_documents(const fs::path& path) {
    std::vector<CaseDocument> docs;
    for_each_record(path, [&](const json& rec) {
        CaseDocument d;
        d.doc_id = require_string(rec, "doc_id");
        d.text = require_string(rec, "text");
        d.charges = optional_strings(rec, "charges");
        d.length_chars = utf8::length(d.text);
        docs.push_back(std::move(d));
    });
    return docs;
}

std::vector<QueryCase> read_queries(const fs::path& path) {
    std::vector<QueryCase> queries;
    for_each_record(path, [&](const json& rec) {
        QueryCase q;
        q.query_id = require_string(rec, "query_id");
        q.text = require_string(rec, "text");
        q.charges = optional_strings(rec, "charges");
        if (q.text.empty()) {
            throw std::runtime_error("query text is empty");
        }
        queries.push_back(std::move(q));
    });
    return queries;
}

void read_qrels(const fs::path& path, RelevanceJudgments& into) {
    for_each_record(path, [&](const json& rec) {
        const auto qid = require_string(rec, "query_id");
        const auto did = require_string(rec, "doc_id");
        auto g = rec.find("grade");
        if (g == rec.end() || !g->is_number_integer()) {
            throw std::runtime_error("field 'grade' must be an integer");
        }
        const int grade = g->get<int>();
        if (grade < 0 || grade > RelevanceJudgments::kMaxGrade) {
            throw std::runtime_error("grade " + std::to_string(grade) + " outside 0..3");
        }
        into.set_grade(qid, did, grade);
    });
}

void read_pools(const fs::path& path, RelevanceJudgments& into) {
    for_each_record(path, [&](const json& rec) {
        const auto qid = require_string(rec, "query_id");
        auto ids = optional_strings(rec, "doc_ids");
        std::set<std::string> seen;
        for (const auto& d : ids) {
            if (!seen.insert(d).second) {
                throw std::runtime_error("duplicate doc_id '" + d + "' in pool");
            }
        }
        into.set_pool(qid, std::move(ids));
    });
}

std::map<std::string, SalienceAnnotation> read_annotations(const fs::path& path,
                                                           const std::vector<QueryCase>* queries) {
    std::map<std::string, std::size_t> lengths;
    if (queries != nullptr) {
        for (const auto& q : *queries) {
            lengths[q.query_id] = utf8::length(q.text);
        }
    }
    std::map<std::string, SalienceAnnotation> out;
    for_each_record(path, [&](const json& rec) {
        SalienceAnnotation ann;
        ann.query_id = require_string(rec, "query_id");
        auto spans = rec.find("spans");
        if (spans == rec.end() || !spans->is_array()) {
            throw std::runtime_error("field 'spans' must be an array of [start, end] pairs");
        }
        std::vector<CharSpan> raw;
        for (const auto& s : *spans) {
            if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() || !s[1].is_number_integer()) {
                throw std::runtime_error("span must be [int, int]");
            }
            const long long a = s[0].get<long long>();
            const long long b = s[1].get<long long>();
            if (a < 0 || b <= a) {
                throw std::runtime_error("span [" + std::to_string(a) + "," + std::to_string(b) + ") is empty or negative");
            }
            raw.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
        }
        ann.spans = normalize_spans(std::move(raw));
        if (queries != nullptr) {
            auto len = lengths.find(ann.query_id);
            if (len == lengths.end()) {
                throw ValidationError("annotation for unknown query_id " + ann.query_id, {ann.query_id});
            }
            if (!ann.spans.empty() && ann.spans.back().end > len->second) {
                throw ValidationError("annotation span beyond query length for " + ann.query_id, {ann.query_id});
            }
        }
        auto& slot = out[ann.query_id];
        if (slot.query_id.empty()) {
            slot = std::move(ann);
        } else {
            // Several lines for one query accumulate.
            slot.spans.insert(slot.spans.end(), ann.spans.begin(), ann.spans.end());
            slot.spans = normalize_spans(std::move(slot.spans));
        }
    });
    return out;
}

DatasetBundle load_dataset(const fs::path& root, const IngestOptions& options) {
    if (!fs::is_directory(root)) {
        throw IoError("dataset directory not found: " + root.string());
    }
    DatasetBundle bundle;
    bundle.documents = read_documents(root / dataset_files::kDocuments);
    bundle.queries = read_queries(root / dataset_files::kQueries);

    const auto optional_file = [&](const char* name, bool required) -> bool {
        const fs::path p = root / name;
        if (fs::exists(p)) {
            return true;
        }
        if (required) {
            throw IoError(std::string("missing dataset file: ") + p.string());
        }
        return false;
    };

    const bool have_qrels = optional_file(dataset_files::kQrels, options.require_qrels);
    const bool have_pools = optional_file(dataset_files::kPools, options.require_pools);
    if (have_qrels) {
        read_qrels(root / dataset_files::kQrels, bundle.qrels);
    }
    if (have_pools) {
        read_pools(root / dataset_files::kPools, bundle.qrels);
    } else if (have_qrels) {
        // Pools default to the judged documents, in qrels file order.
        std::map<std::string, std::vector<std::string>> derived;
        for_each_record(root / dataset_files::kQrels, [&](const json& rec) {
            auto& v = derived[rec.at("query_id").get<std::string>()];
            const auto d = rec.at("doc_id").get<std::string>();
            if (std::find(v.begin(), v.end(), d) == v.end()) {
                v.push_back(d);
            }
        });
        for (auto& [q, ids] : derived) {
            bundle.qrels.set_pool(q, std::move(ids));
        }
    }
    if (optional_file(dataset_files::kAnnotations, options.require_annotations)) {
        bundle.annotations = read_annotations(root / dataset_files::kAnnotations, nullptr);
    }
    bundle.validate();
    return bundle;
}

void save_dataset(const DatasetBundle& bundle, const fs::path& root) {
    std::ostringstream docs;
    for (const auto& d : bundle.documents) {
        ordered_json j;
        j["doc_id"] = d.doc_id;
        j["text"] = d.text;
        j["charges"] = d.charges;
        docs << j.dump() << '\n';
    }
    std::ostringstream queries;
    for (const auto& q : bundle.queries) {
        ordered_json j;
        j["query_id"] = q.query_id;
        j["text"] = q.text;
        j["charges"] = q.charges;
        queries << j.dump() << '\n';
    }
    std::ostringstream qrels;
    for (const auto& [qid, judged] : bundle.qrels.grades()) {
        for (const auto& [did, grade] : judged) {
            ordered_json j;
            j["query_id"] = qid;
            j["doc_id"] = did;
            j["grade"] = grade;
            qrels << j.dump() << '\n';
        }
    }
    std::ostringstream pools;
    for (const auto& [qid, ids] : bundle.qrels.pools()) {
        ordered_json j;
        j["query_id"] = qid;
        j["doc_ids"] = ids;
        pools << j.dump() << '\n';
    }
    std::ostringstream anns;
    for (const auto& [qid, ann] : bundle.annotations) {
        ordered_json j;
        j["query_id"] = qid;
        j["spans"] = ordered_json::array();
        for (const auto& s : ann.spans) {
            j["spans"].push_back({s.start, s.end});
        }
        anns << j.dump() << '\n';
    }
    write_file_atomic(root / dataset_files::kDocuments, docs.str());
    write_file_atomic(root / dataset_files::kQueries, queries.str());
    write_file_atomic(root / dataset_files::kQrels, qrels.str());
    write_file_atomic(root / dataset_files::kPools, pools.str());
    write_file_atomic(root / dataset_files::kAnnotations, anns.str());
}

// ---------------------------------------------------------------------------
// Annotation statistics

namespace {

struct Accumulator {
    double query_len = 0;
    double ann_len = 0;
    double rate = 0;
    std::size_t n = 0;

    void add(double q, double a) {
        query_len += q;
        ann_len += a;
        rate += a / q;
        ++n;
    }

    AnnotationStatsRow row() const {
        if (n == 0) {
            return {};
        }
        const double dn = static_cast<double>(n);
        return {query_len / dn, ann_len / dn, rate / dn, n};
    }
};

} // namespace

AnnotationStats annotation_stats(const DatasetBundle& bundle, const Analyzer* analyzer) {
    Accumulator with;
    Accumulator without;
    AnnotationStats stats;
    for (const auto& q : bundle.queries) {
        const auto* ann = bundle.find_annotation(q.query_id);
        if (ann == nullptr) {
            continue;
        }
        const std::size_t qlen = utf8::length(q.text);
        const std::size_t alen = ann->total_length();
        with.add(static_cast<double>(qlen), static_cast<double>(alen));

        if (analyzer == nullptr || analyzer->stopwords().empty()) {
            without.add(static_cast<double>(qlen), static_cast<double>(alen));
            continue;
        }
        // Per-character mask of stopword coverage.
        std::vector<bool> removed(qlen, false);
        const TokenizedText tok = analyzer->tokenize(q.text, q.query_id);
        for (std::size_t i = 0; i < tok.tokens.size(); ++i) {
            if (tok.stopword_mask[i]) {
                for (std::size_t c = tok.tokens[i].char_start; c < tok.tokens[i].char_end; ++c) {
                    removed[c] = true;
                }
            }
        }
        const auto kept = static_cast<std::size_t>(std::count(removed.begin(), removed.end(), false));
        std::size_t ann_kept = 0;
        for (const auto& s : ann->spans) {
            for (std::size_t c = s.start; c < s.end && c < qlen; ++c) {
                ann_kept += removed[c] ? 0 : 1;
            }
        }
        if (kept == 0) {
            stats.excluded.push_back(q.query_id);
            continue;
        }
        without.add(static_cast<double>(kept), static_cast<double>(ann_kept));
    }
    stats.with_stopwords = with.row();
    stats.without_stopwords = without.row();
    return stats;
}

} // namespace caselab
