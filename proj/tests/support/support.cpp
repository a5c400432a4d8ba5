#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace caselab::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("caselab-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_demo_dataset(const fs::path& dir) {
    write_text(dir / "documents.jsonl",
               R"({"doc_id":"d1","text":"被告人 张某 盗窃 财物 。 价值 三千元 。","charges":["盗窃罪"]})"
               "\n"
               R"({"doc_id":"d2","text":"原告 李某 借款 合同 纠纷 。 判决 返还 借款 。","charges":[]})"
               "\n"
               R"({"doc_id":"d3","text":"被告人 王某 故意 伤害 他人 。 致 轻伤 。","charges":["故意伤害罪"]})"
               "\n"
               R"({"doc_id":"d4","text":"被告人 赵某 盗窃 电动车 。 价值 二千元 。 退赔 损失 。","charges":["盗窃罪"]})"
               "\n"
               R"({"doc_id":"d5","text":"合同 诈骗 。 被告人 骗取 财物 。","charges":["合同诈骗罪"]})"
               "\n");
    write_text(dir / "queries.jsonl",
               R"({"query_id":"q1","text":"张某 盗窃 他人 财物 。 经 鉴定 价值 三千元 。 公诉 机关 指控 。","charges":[]})"
               "\n"
               R"({"query_id":"q2","text":"李某 借款 未还 。 双方 签订 合同 。","charges":[]})"
               "\n"
               R"({"query_id":"q3","text":"王某 伤害 他人 。 致 轻伤 。","charges":[]})"
               "\n");
    write_text(dir / "qrels.jsonl",
               R"({"query_id":"q1","doc_id":"d1","grade":3})"
               "\n"
               R"({"query_id":"q1","doc_id":"d4","grade":2})"
               "\n"
               R"({"query_id":"q1","doc_id":"d5","grade":1})"
               "\n"
               R"({"query_id":"q1","doc_id":"d2","grade":0})"
               "\n"
               R"({"query_id":"q2","doc_id":"d2","grade":3})"
               "\n"
               R"({"query_id":"q2","doc_id":"d5","grade":1})"
               "\n"
               R"({"query_id":"q2","doc_id":"d1","grade":0})"
               "\n"
               R"({"query_id":"q3","doc_id":"d3","grade":3})"
               "\n"
               R"({"query_id":"q3","doc_id":"d4","grade":1})"
               "\n"
               R"({"query_id":"q3","doc_id":"d1","grade":0})"
               "\n");
    write_text(dir / "annotations.jsonl",
               R"({"query_id":"q1","spans":[[3,11],[19,25]]})"
               "\n"
               R"({"query_id":"q2","spans":[[3,8]]})"
               "\n"
               R"({"query_id":"q3","spans":[[3,8],[13,15]]})"
               "\n");
}

std::vector<std::string> split_ws(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) {
        out.push_back(w);
    }
    return out;
}

RandomCollection random_collection(std::mt19937_64& rng, std::size_t max_docs, std::size_t max_query_words,
                                   std::size_t n_queries) {
    static const std::vector<std::string> vocab{"ab", "cd", "ef", "gh", "ij", "kl", "mn", "op", "qr", "st"};
    const auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    RandomCollection out;
    const std::size_t vocab_size = pick(3, vocab.size());
    const std::size_t n_docs = pick(1, max_docs);
    for (std::size_t d = 0; d < n_docs; ++d) {
        std::string text;
        const std::size_t len = pick(1, 12);
        for (std::size_t i = 0; i < len; ++i) {
            text += (i ? " " : "") + vocab[pick(0, vocab_size - 1)];
        }
        char id[32];
        std::snprintf(id, sizeof id, "d%02zu", d);
        out.docs.push_back({id, text, {}, 0});
    }
    for (std::size_t q = 0; q < n_queries; ++q) {
        std::string text;
        const std::size_t len = pick(1, max_query_words);
        for (std::size_t i = 0; i < len; ++i) {
            const bool unseen = pick(0, 9) == 0;
            text += (i ? " " : "") + (unseen ? std::string("zz") : vocab[pick(0, vocab_size - 1)]);
        }
        out.queries.push_back(text);
    }
    return out;
}

OracleScorer::OracleScorer(const std::vector<CaseDocument>& docs) {
    for (const auto& d : docs) {
        ids_.push_back(d.doc_id);
        std::map<std::string, std::uint32_t> tf;
        const auto words = split_ws(d.text);
        for (const auto& w : words) {
            ++tf[w];
            ++cf_[w];
        }
        for (const auto& [w, n] : tf) {
            ++df_[w];
        }
        len_.push_back(words.size());
        total_ += words.size();
        tf_.push_back(std::move(tf));
    }
    double sum = 0;
    for (auto l : len_) {
        sum += static_cast<double>(l);
    }
    avgdl_ = len_.empty() ? 0.0 : sum / static_cast<double>(len_.size());
}

double OracleScorer::idf_robertson(const std::string& term) const {
    const double n = static_cast<double>(ids_.size());
    auto it = df_.find(term);
    const double d = it == df_.end() ? 0.0 : it->second;
    return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

double OracleScorer::idf_smooth_log(const std::string& term) const {
    const double n = static_cast<double>(ids_.size());
    auto it = df_.find(term);
    const double d = it == df_.end() ? 1.0 : it->second;
    return std::max(0.0, std::log(n / d));
}

namespace {

std::uint32_t lookup(const std::map<std::string, std::uint32_t>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
}

} // namespace

std::vector<double> OracleScorer::bm25(const std::vector<std::string>& query, double k, double b) const {
    std::vector<double> out(ids_.size(), 0.0);
    for (std::size_t d = 0; d < ids_.size(); ++d) {
        const double ratio = avgdl_ > 0 ? static_cast<double>(len_[d]) / avgdl_ : 1.0;
        for (const auto& t : query) {
            const double f = lookup(tf_[d], t);
            if (f == 0) {
                continue;
            }
            out[d] += idf_robertson(t) * f * (k + 1) / (f + k * (1 - b + b * ratio));
        }
    }
    return out;
}

namespace {

double background(const std::map<std::string, std::uint64_t>& cf, std::uint64_t total, std::size_t vocab,
                  const std::string& t) {
    auto it = cf.find(t);
    if (it != cf.end()) {
        return static_cast<double>(it->second) / static_cast<double>(total);
    }
    return 1.0 / (static_cast<double>(total) + static_cast<double>(vocab));
}

} // namespace

std::vector<double> OracleScorer::ql_jm(const std::vector<std::string>& query, double lambda) const {
    std::vector<double> out(ids_.size(), 0.0);
    for (std::size_t d = 0; d < ids_.size(); ++d) {
        for (const auto& t : query) {
            const double p_d = static_cast<double>(lookup(tf_[d], t)) / static_cast<double>(len_[d]);
            out[d] += std::log((1 - lambda) * p_d + lambda * background(cf_, total_, df_.size(), t));
        }
    }
    return out;
}

std::vector<double> OracleScorer::ql_dirichlet(const std::vector<std::string>& query, double mu) const {
    std::vector<double> out(ids_.size(), 0.0);
    for (std::size_t d = 0; d < ids_.size(); ++d) {
        for (const auto& t : query) {
            const double tf = lookup(tf_[d], t);
            out[d] += std::log((tf + mu * background(cf_, total_, df_.size(), t)) /
                               (static_cast<double>(len_[d]) + mu));
        }
    }
    return out;
}

std::vector<double> OracleScorer::tfidf(const std::vector<std::string>& query, bool smooth_log) const {
    const auto w_of = [&](const std::string& t) { return smooth_log ? idf_smooth_log(t) : idf_robertson(t); };
    // Query term frequencies in first-occurrence order.
    std::vector<std::string> order;
    std::map<std::string, std::uint32_t> qtf;
    for (const auto& t : query) {
        if (qtf[t]++ == 0) {
            order.push_back(t);
        }
    }
    std::vector<double> out(ids_.size(), 0.0);
    for (std::size_t d = 0; d < ids_.size(); ++d) {
        double dn2 = 0;
        for (const auto& [t, f] : tf_[d]) {
            const double x = static_cast<double>(f) * w_of(t);
            dn2 += x * x;
        }
        double dot = 0;
        double qn2 = 0;
        for (const auto& t : order) {
            const double w = w_of(t);
            const double qw = qtf[t] * w;
            qn2 += qw * qw;
            dot += qw * (lookup(tf_[d], t) * w);
        }
        const double dn = std::sqrt(dn2);
        const double qn = std::sqrt(qn2);
        out[d] = (dn == 0 || qn == 0) ? 0.0 : dot / (qn * dn);
    }
    return out;
}

std::vector<std::string> OracleScorer::rank(const std::vector<double>& scores) const {
    std::vector<std::size_t> idx(ids_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return ids_[a] < ids_[b];
    });
    std::vector<std::string> out;
    for (auto i : idx) {
        out.push_back(ids_[i]);
    }
    return out;
}

double oracle_precision(const std::vector<int>& ranked_grades, std::size_t k, int threshold) {
    double hits = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (i < ranked_grades.size() && ranked_grades[i] >= threshold) {
            hits += 1;
        }
    }
    return hits / static_cast<double>(k);
}

double oracle_average_precision(const std::vector<int>& ranked_grades, std::size_t n_relevant, int threshold) {
    if (n_relevant == 0) {
        return 0.0;
    }
    double total = 0;
    for (std::size_t r = 1; r <= ranked_grades.size(); ++r) {
        if (ranked_grades[r - 1] < threshold) {
            continue;
        }
        // precision of the prefix ending at r, recounted from scratch
        double hits = 0;
        for (std::size_t i = 0; i < r; ++i) {
            hits += ranked_grades[i] >= threshold ? 1 : 0;
        }
        total += hits / static_cast<double>(r);
    }
    return total / static_cast<double>(n_relevant);
}

double oracle_ndcg(const std::vector<int>& ranked_grades, std::vector<int> judged_grades, std::size_t k) {
    const auto dcg = [k](const std::vector<int>& g) {
        double s = 0;
        for (std::size_t i = 0; i < g.size() && i < k; ++i) {
            s += (std::pow(2.0, g[i]) - 1.0) * std::log(2.0) / std::log(static_cast<double>(i) + 2.0);
        }
        return s;
    };
    std::sort(judged_grades.rbegin(), judged_grades.rend());
    const double ideal = dcg(judged_grades);
    return ideal == 0 ? 0.0 : dcg(ranked_grades) / ideal;
}

} // namespace caselab::testing
