#include "caselab/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <future>
#include <map>
#include <thread>

#include "caselab/error.hpp"
#include "caselab/util.hpp"

namespace caselab {

std::string to_string(IdfVariant variant) {
    return variant == IdfVariant::robertson ? "robertson" : "smooth-log";
}

IdfVariant parse_idf_variant(std::string_view name) {
    if (name == "robertson") {
        return IdfVariant::robertson;
    }
    if (name == "smooth-log" || name == "smooth_log") {
        return IdfVariant::smooth_log;
    }
    throw ConfigError("unknown idf variant '" + std::string(name) + "' (expected robertson or smooth-log)");
}

double idf_value(std::size_t n_docs, std::size_t df, IdfVariant variant) {
    const double n = static_cast<double>(n_docs);
    if (variant == IdfVariant::robertson) {
        const double d = static_cast<double>(df);
        return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
    }
    if (n_docs == 0) {
        return 0.0;
    }
    const double d = static_cast<double>(std::max<std::size_t>(df, 1));
    return std::max(0.0, std::log(n / d));
}

std::uint32_t CorpusStats::document_frequency(std::string_view word) const {
    auto it = df.find(std::string(word));
    return it == df.end() ? 0 : it->second;
}

double idf(const CorpusStats& stats, std::string_view word, IdfVariant variant) {
    return idf_value(stats.n_docs, stats.document_frequency(word), variant);
}

// ---------------------------------------------------------------------------
// Build

namespace {

using TermCounts = std::vector<std::pair<std::string, std::uint32_t>>;

struct DocTerms {
    TermCounts counts; // sorted by term
    std::uint32_t length = 0;
};

DocTerms analyze_document(const CaseDocument& doc, const Analyzer& analyzer, const IndexOptions& options) {
    const TokenizedText tok = analyzer.tokenize(doc.text, doc.doc_id);
    std::map<std::string, std::uint32_t> counts;
    std::uint32_t length = 0;
    for (std::size_t i = 0; i < tok.tokens.size(); ++i) {
        const bool stop = tok.stopword_mask[i];
        if (stop && options.exclude_stopwords) {
            if (options.count_stopwords_in_length) {
                ++length;
            }
            continue;
        }
        ++counts[tok.tokens[i].surface];
        ++length;
    }
    return {TermCounts(counts.begin(), counts.end()), length};
}

} // namespace

InvertedIndex InvertedIndex::build(std::span<const CaseDocument> docs, const Analyzer& analyzer,
                                   const IndexOptions& options, std::span<const QueryCase> queries) {
    InvertedIndex index;
    index.tokenizer_ = analyzer.config();
    index.tokenizer_fingerprint_ = analyzer.fingerprint();
    index.options_ = options;

    std::vector<std::string> duplicates;
    for (const auto& d : docs) {
        const auto ord = static_cast<std::uint32_t>(index.doc_ids_.size());
        if (!index.doc_ordinals_.emplace(d.doc_id, ord).second) {
            duplicates.push_back(d.doc_id);
            continue;
        }
        index.doc_ids_.push_back(d.doc_id);
    }
    if (!duplicates.empty()) {
        std::string msg = "duplicate doc_id:";
        for (const auto& id : duplicates) {
            msg += " " + id;
        }
        throw ValidationError(msg, duplicates);
    }

    // Tokenize in parallel over contiguous chunks; merge in document order.
    std::vector<DocTerms> analyzed(docs.size());
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), docs.size() / 64));
    if (workers <= 1) {
        for (std::size_t i = 0; i < docs.size(); ++i) {
            analyzed[i] = analyze_document(docs[i], analyzer, options);
        }
    } else {
        std::vector<std::future<void>> tasks;
        const std::size_t chunk = (docs.size() + workers - 1) / workers;
        for (std::size_t lo = 0; lo < docs.size(); lo += chunk) {
            const std::size_t hi = std::min(docs.size(), lo + chunk);
            tasks.push_back(std::async(std::launch::async, [&, lo, hi] {
                for (std::size_t i = lo; i < hi; ++i) {
                    analyzed[i] = analyze_document(docs[i], analyzer, options);
                }
            }));
        }
        for (auto& t : tasks) {
            t.get();
        }
    }

    std::unordered_map<std::string, std::vector<Posting>> postings;
    index.doc_len_.resize(docs.size());
    for (std::size_t i = 0; i < analyzed.size(); ++i) {
        index.doc_len_[i] = analyzed[i].length;
        for (auto& [term, tf] : analyzed[i].counts) {
            postings[term].push_back({static_cast<std::uint32_t>(i), tf});
        }
    }
    index.terms_.reserve(postings.size());
    for (const auto& [term, _] : postings) {
        index.terms_.push_back(term);
    }
    std::sort(index.terms_.begin(), index.terms_.end());
    index.postings_.reserve(index.terms_.size());
    for (const auto& term : index.terms_) {
        index.postings_.push_back(std::move(postings[term]));
    }

    if (!queries.empty()) {
        double total = 0;
        for (const auto& q : queries) {
            total += static_cast<double>(index.counted_length(analyzer.tokenize(q.text, q.query_id)));
        }
        index.stats_.avg_query_len = total / static_cast<double>(queries.size());
        index.stats_.n_queries = queries.size();
    }
    index.finalize();
    return index;
}

void InvertedIndex::finalize() {
    term_ids_.clear();
    term_ids_.reserve(terms_.size());
    for (std::uint32_t i = 0; i < terms_.size(); ++i) {
        term_ids_.emplace(terms_[i], i);
    }
    doc_ordinals_.clear();
    for (std::uint32_t i = 0; i < doc_ids_.size(); ++i) {
        doc_ordinals_.emplace(doc_ids_[i], i);
    }

    stats_.n_docs = doc_ids_.size();
    stats_.df.clear();
    stats_.df.reserve(terms_.size());
    stats_.total_terms = 0;
    cf_.assign(terms_.size(), 0);
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        stats_.df.emplace(terms_[t], static_cast<std::uint32_t>(postings_[t].size()));
        for (const auto& p : postings_[t]) {
            cf_[t] += p.tf;
        }
        stats_.total_terms += cf_[t];
    }
    double len_sum = 0;
    for (auto l : doc_len_) {
        len_sum += l;
    }
    stats_.avg_doc_len = doc_len_.empty() ? 0.0 : len_sum / static_cast<double>(doc_len_.size());

    norm_robertson_.assign(doc_ids_.size(), 0.0);
    norm_smooth_log_.assign(doc_ids_.size(), 0.0);
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        const double w_r = idf_value(stats_.n_docs, postings_[t].size(), IdfVariant::robertson);
        const double w_s = idf_value(stats_.n_docs, postings_[t].size(), IdfVariant::smooth_log);
        for (const auto& p : postings_[t]) {
            const double tf = p.tf;
            norm_robertson_[p.doc] += (tf * w_r) * (tf * w_r);
            norm_smooth_log_[p.doc] += (tf * w_s) * (tf * w_s);
        }
    }
    for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
        norm_robertson_[d] = std::sqrt(norm_robertson_[d]);
        norm_smooth_log_[d] = std::sqrt(norm_smooth_log_[d]);
    }
}

// ---------------------------------------------------------------------------
// Lookups

std::optional<std::uint32_t> InvertedIndex::doc_ordinal(std::string_view doc_id) const {
    auto it = doc_ordinals_.find(std::string(doc_id));
    if (it == doc_ordinals_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::uint32_t> InvertedIndex::term_id(std::string_view term) const {
    auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
    auto id = term_id(term);
    if (!id) {
        return {};
    }
    return postings_[*id];
}

std::uint32_t InvertedIndex::tf(std::string_view term, std::uint32_t doc) const {
    const auto list = postings(term);
    auto it = std::lower_bound(list.begin(), list.end(), doc,
                               [](const Posting& p, std::uint32_t d) { return p.doc < d; });
    return it != list.end() && it->doc == doc ? it->tf : 0;
}

std::uint32_t InvertedIndex::df(std::string_view term) const {
    return static_cast<std::uint32_t>(postings(term).size());
}

std::uint64_t InvertedIndex::cf(std::string_view term) const {
    auto id = term_id(term);
    return id ? cf_[*id] : 0;
}

double InvertedIndex::idf(std::string_view term, IdfVariant variant) const {
    return idf_value(stats_.n_docs, df(term), variant);
}

double InvertedIndex::tfidf_norm(std::uint32_t doc, IdfVariant variant) const {
    return variant == IdfVariant::robertson ? norm_robertson_.at(doc) : norm_smooth_log_.at(doc);
}

std::size_t InvertedIndex::counted_length(const TokenizedText& tok) const {
    if (!options_.exclude_stopwords || options_.count_stopwords_in_length) {
        return tok.tokens.size();
    }
    return static_cast<std::size_t>(std::count(tok.stopword_mask.begin(), tok.stopword_mask.end(), false));
}

std::vector<std::string> InvertedIndex::query_terms(const TokenizedText& tok) const {
    if (options_.exclude_stopwords) {
        return tok.content_terms();
    }
    std::vector<std::string> out;
    out.reserve(tok.tokens.size());
    for (const auto& t : tok.tokens) {
        out.push_back(t.surface);
    }
    return out;
}

bool operator==(const InvertedIndex& a, const InvertedIndex& b) {
    return a.terms_ == b.terms_ && a.postings_ == b.postings_ && a.doc_ids_ == b.doc_ids_ &&
           a.doc_len_ == b.doc_len_ && a.stats_.avg_query_len == b.stats_.avg_query_len &&
           a.stats_.n_queries == b.stats_.n_queries && a.tokenizer_fingerprint_ == b.tokenizer_fingerprint_ &&
           a.options_ == b.options_;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[4] = {'C', 'L', 'I', 'X'};

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.append(s);
    }
    std::string& buffer() { return buf_; }

private:
    void raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
    std::string buf_;
};

class Reader {
public:
    Reader(std::string_view data, std::string file) : data_(data), file_(std::move(file)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint32_t u32() { return pod<std::uint32_t>(); }
    std::uint64_t u64() { return pod<std::uint64_t>(); }
    double f64() { return pod<double>(); }
    std::string str() {
        const auto n = u32();
        return std::string(take(n));
    }
    bool done() const { return pos_ == data_.size(); }
    [[noreturn]] void corrupt(const std::string& why) const {
        throw FormatError("corrupt index file " + file_ + ": " + why, file_);
    }

private:
    template <typename T>
    T pod() {
        T v;
        std::memcpy(&v, take(sizeof v).data(), sizeof v);
        return v;
    }
    std::string_view take(std::size_t n) {
        if (n > data_.size() - pos_) {
            corrupt("unexpected end of data");
        }
        auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::string_view data_;
    std::string file_;
    std::size_t pos_ = 0;
};

void write_payload(Writer& w, const TokenizerConfig& tok, const IndexOptions& options, const CorpusStats& stats,
                   const std::vector<std::string>& doc_ids, const std::vector<std::uint32_t>& doc_len,
                   const std::vector<std::string>& terms, const std::vector<std::vector<Posting>>& postings) {
    w.str(tok.name);
    w.u32(static_cast<std::uint32_t>(tok.lexicon.size()));
    for (const auto& s : tok.lexicon) {
        w.str(s);
    }
    w.u32(static_cast<std::uint32_t>(tok.stopwords.size()));
    for (const auto& s : tok.stopwords) {
        w.str(s);
    }
    w.u8(options.exclude_stopwords ? 1 : 0);
    w.u8(options.count_stopwords_in_length ? 1 : 0);
    w.f64(stats.avg_query_len);
    w.u64(stats.n_queries);
    w.u64(doc_ids.size());
    for (std::size_t i = 0; i < doc_ids.size(); ++i) {
        w.str(doc_ids[i]);
        w.u32(doc_len[i]);
    }
    w.u64(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
        w.str(terms[t]);
        w.u32(static_cast<std::uint32_t>(postings[t].size()));
        for (const auto& p : postings[t]) {
            w.u32(p.doc);
            w.u32(p.tf);
        }
    }
}

} // namespace

std::string InvertedIndex::fingerprint() const {
    Writer w;
    write_payload(w, tokenizer_, options_, stats_, doc_ids_, doc_len_, terms_, postings_);
    return hex64(fnv1a64(w.buffer()));
}

void InvertedIndex::save(const std::filesystem::path& path) const {
    Writer payload;
    write_payload(payload, tokenizer_, options_, stats_, doc_ids_, doc_len_, terms_, postings_);
    Writer out;
    out.buffer().append(kMagic, sizeof kMagic);
    out.u32(kFormatVersion);
    out.u64(payload.buffer().size());
    out.buffer().append(payload.buffer());
    out.u64(fnv1a64(payload.buffer()));
    write_file_atomic(path, out.buffer());
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path, const std::string* expected_tokenizer_fingerprint) {
    if (!std::filesystem::exists(path)) {
        throw IoError("index file not found: " + path.string());
    }
    const std::string data = read_file(path);
    Reader header(data, path.string());
    if (data.size() < sizeof kMagic || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) {
        header.corrupt("bad magic");
    }
    const std::string_view rest = std::string_view(data).substr(sizeof kMagic);
    Reader r(rest, path.string());
    const auto version = r.u32();
    if (version != kFormatVersion) {
        throw FormatError("index version mismatch in " + path.string() + ": file has " + std::to_string(version) +
                              ", expected " + std::to_string(kFormatVersion),
                          path.string());
    }
    const auto payload_size = r.u64();
    constexpr std::size_t kPrefix = sizeof(std::uint32_t) + sizeof(std::uint64_t);
    if (payload_size + kPrefix + sizeof(std::uint64_t) != rest.size()) {
        r.corrupt("size mismatch (truncated?)");
    }
    const std::string_view payload = rest.substr(kPrefix, payload_size);
    std::uint64_t stored_sum;
    std::memcpy(&stored_sum, rest.data() + kPrefix + payload_size, sizeof stored_sum);
    if (stored_sum != fnv1a64(payload)) {
        r.corrupt("checksum mismatch");
    }

    Reader p(payload, path.string());
    InvertedIndex index;
    index.tokenizer_.name = p.str();
    for (auto n = p.u32(); n > 0; --n) {
        index.tokenizer_.lexicon.push_back(p.str());
    }
    for (auto n = p.u32(); n > 0; --n) {
        index.tokenizer_.stopwords.push_back(p.str());
    }
    index.options_.exclude_stopwords = p.u8() != 0;
    index.options_.count_stopwords_in_length = p.u8() != 0;
    index.stats_.avg_query_len = p.f64();
    index.stats_.n_queries = p.u64();
    const auto n_docs = p.u64();
    if (n_docs > payload.size()) {
        p.corrupt("document count out of range");
    }
    index.doc_ids_.reserve(n_docs);
    index.doc_len_.reserve(n_docs);
    for (std::uint64_t i = 0; i < n_docs; ++i) {
        index.doc_ids_.push_back(p.str());
        index.doc_len_.push_back(p.u32());
    }
    const auto n_terms = p.u64();
    if (n_terms > payload.size()) {
        p.corrupt("term count out of range");
    }
    index.terms_.reserve(n_terms);
    index.postings_.reserve(n_terms);
    for (std::uint64_t t = 0; t < n_terms; ++t) {
        index.terms_.push_back(p.str());
        std::vector<Posting> list(p.u32());
        for (auto& posting : list) {
            posting.doc = p.u32();
            posting.tf = p.u32();
            if (posting.doc >= n_docs || posting.tf == 0) {
                p.corrupt("posting out of range");
            }
        }
        index.postings_.push_back(std::move(list));
    }
    if (!p.done()) {
        p.corrupt("trailing bytes");
    }

    try {
        index.tokenizer_fingerprint_ = Analyzer(index.tokenizer_).fingerprint();
    } catch (const ConfigError& e) {
        p.corrupt(e.what());
    }
    if (expected_tokenizer_fingerprint != nullptr && *expected_tokenizer_fingerprint != index.tokenizer_fingerprint_) {
        throw ConfigError("index " + path.string() + " was built with a different tokenizer configuration");
    }
    index.finalize();
    return index;
}

} // namespace caselab
