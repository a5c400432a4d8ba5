#include "caselab/reformulate.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "caselab/error.hpp"
#include "caselab/levenshtein.hpp"
#include "caselab/utf8.hpp"
#include "caselab/util.hpp"

namespace caselab {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string to_string(ReformulationType type) {
    switch (type) {
    case ReformulationType::keyword: return "keyword";
    case ReformulationType::key_sentence: return "key_sentence";
    case ReformulationType::summary: return "summary";
    case ReformulationType::annotation: return "annotation";
    }
    return "?";
}

ReformulationType parse_reformulation_type(std::string_view name) {
    if (name == "keyword") {
        return ReformulationType::keyword;
    }
    if (name == "key_sentence") {
        return ReformulationType::key_sentence;
    }
    if (name == "summary") {
        return ReformulationType::summary;
    }
    if (name == "annotation") {
        return ReformulationType::annotation;
    }
    throw ConfigError("unknown query type '" + std::string(name) + "' (expected keyword, key_sentence, summary or annotation)");
}

// ---------------------------------------------------------------------------
// Prompts

std::string PromptTemplate::render(std::string_view query_text) const {
    std::string out;
    for (const std::string* part : {&role_preamble, &task_explanation, &requirements, &details}) {
        if (part->empty()) {
            continue;
        }
        if (!out.empty()) {
            out += ' ';
        }
        out += *part;
    }
    out += '\n';
    out += query_text;
    return out;
}

std::string PromptTemplate::fingerprint() const {
    return caselab::fingerprint(role_preamble + '\x1f' + task_explanation + '\x1f' + requirements + '\x1f' + details);
}

PromptLibrary PromptLibrary::builtin() {
    static const std::string kRole = "You are a legal expert with knowledge of the law.";
    static const std::string kFocus = "Pay attention to the key statement that plays a crucial role in the case judgement.";
    PromptLibrary lib;
    lib.version_ = "en-v1";
    lib.templates_[ReformulationType::keyword] = {
        kRole, "You need to do the keyword extraction task of the law for keyword extraction.", kFocus,
        "Please separate each word using comma."};
    lib.templates_[ReformulationType::key_sentence] = {
        kRole, "You need to do the legal key content extraction task for key sentence extraction.", kFocus,
        "Please list the key sentence."};
    lib.templates_[ReformulationType::summary] = {
        kRole, "You need to make a summary of the above legal documents.", kFocus, ""};
    return lib;
}

PromptLibrary PromptLibrary::parse(std::string_view json_text) {
    PromptLibrary lib;
    try {
        const auto j = json::parse(json_text);
        lib.version_ = j.at("version").get<std::string>();
        for (const auto& [name, t] : j.at("templates").items()) {
            const auto type = parse_reformulation_type(name);
            if (type == ReformulationType::annotation) {
                throw ConfigError("annotation queries do not use a prompt");
            }
            lib.templates_[type] = {t.value("role_preamble", ""), t.value("task_explanation", ""),
                                    t.value("requirements", ""), t.value("details", "")};
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid prompt template file: ") + e.what());
    }
    if (lib.version_.empty()) {
        throw ConfigError("prompt template file needs a non-empty version");
    }
    return lib;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& path) {
    return parse(read_file(path));
}

const PromptTemplate& PromptLibrary::get(ReformulationType type) const {
    if (type == ReformulationType::annotation) {
        throw ConfigError("annotation queries are built from annotations, not prompted");
    }
    auto it = templates_.find(type);
    if (it == templates_.end()) {
        throw ConfigError("prompt library " + version_ + " has no template for " + to_string(type));
    }
    return it->second;
}

std::string PromptLibrary::fingerprint(ReformulationType type) const {
    return caselab::fingerprint(version_ + '\x1f' + to_string(type) + '\x1f' + get(type).fingerprint());
}

std::string render_prompt(ReformulationType type, const QueryCase& query, const PromptLibrary& library) {
    return library.get(type).render(query.text);
}

// ---------------------------------------------------------------------------
// Response parsing

namespace {

bool is_marker_terminator(char32_t c) {
    return c == U'.' || c == U')' || c == U'、' || c == U'．' || c == U'）' || c == U':' || c == U'：';
}

bool is_digit(char32_t c) {
    return (c >= U'0' && c <= U'9') || (c >= U'０' && c <= U'９');
}

/// Removes one leading list marker ("1.", "2)", "3、", "(4)", "（5）", "-", "*", "•"). Returns false when none.
bool strip_list_marker(std::u32string& s) {
    if (s.empty()) {
        return false;
    }
    std::size_t i = 0;
    if (s[0] == U'-' || s[0] == U'*' || s[0] == U'•' || s[0] == U'·') {
        i = 1;
    } else if (s[0] == U'(' || s[0] == U'（') {
        std::size_t j = 1;
        while (j < s.size() && is_digit(s[j])) {
            ++j;
        }
        if (j == 1 || j >= s.size() || (s[j] != U')' && s[j] != U'）')) {
            return false;
        }
        i = j + 1;
    } else if (is_digit(s[0])) {
        std::size_t j = 0;
        while (j < s.size() && is_digit(s[j])) {
            ++j;
        }
        if (j >= s.size() || !is_marker_terminator(s[j])) {
            return false;
        }
        if (j + 1 < s.size() && is_digit(s[j + 1])) {
            return false; // "3.5" is a number, not a marker
        }
        i = j + 1;
    } else {
        return false;
    }
    s.erase(0, i);
    return true;
}

void trim_u32(std::u32string& s) {
    std::size_t lo = 0;
    std::size_t hi = s.size();
    while (lo < hi && utf8::is_space(s[lo])) {
        ++lo;
    }
    while (hi > lo && utf8::is_space(s[hi - 1])) {
        --hi;
    }
    s = s.substr(lo, hi - lo);
}

std::string clean_unit(std::string_view raw, bool strip_trailing_period) {
    std::u32string s = utf8::decode(raw);
    for (;;) {
        const std::u32string before = s;
        trim_u32(s);
        strip_list_marker(s);
        trim_u32(s);
        while (strip_trailing_period && !s.empty() && (s.back() == U'.' || s.back() == U'。')) {
            s.pop_back();
        }
        if (s == before) {
            break;
        }
    }
    return utf8::encode(s);
}

std::vector<std::string> split_on(std::string_view text, std::u32string_view delimiters) {
    const std::u32string chars = utf8::decode(text);
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= chars.size(); ++i) {
        if (i == chars.size() || delimiters.find(chars[i]) != std::u32string_view::npos) {
            out.push_back(utf8::encode(std::u32string_view(chars).substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

std::string_view strip_keyword_label(std::string_view text) {
    for (std::string_view label : {"Keywords:", "Keywords：", "keywords:", "keywords：", "关键词：", "关键词:"}) {
        if (text.substr(0, label.size()) == label) {
            return text.substr(label.size());
        }
    }
    return text;
}

} // namespace

std::vector<std::string> parse_response(std::string_view raw, ReformulationType type) {
    const std::string text = trim_unicode(raw);
    std::vector<std::string> units;
    switch (type) {
    case ReformulationType::keyword:
        for (const auto& piece : split_on(strip_keyword_label(text), U",，、\n")) {
            std::string u = clean_unit(piece, true);
            if (!u.empty()) {
                units.push_back(std::move(u));
            }
        }
        break;
    case ReformulationType::key_sentence:
        for (const auto& line : split_on(text, U"\n")) {
            std::string u = clean_unit(line, false);
            if (!u.empty()) {
                units.push_back(std::move(u));
            }
        }
        if (units.size() == 1) {
            auto sentences = sentence_texts(units.front());
            std::vector<std::string> cleaned;
            for (const auto& s : sentences) {
                std::string u = clean_unit(s, false);
                if (!u.empty()) {
                    cleaned.push_back(std::move(u));
                }
            }
            if (cleaned.size() > 1) {
                units = std::move(cleaned);
            }
        }
        break;
    case ReformulationType::summary:
        if (!text.empty()) {
            units.push_back(text);
        }
        break;
    case ReformulationType::annotation:
        throw ConfigError("annotation queries have no LLM response to parse");
    }
    return units;
}

Realignment realign_key_sentences(std::span<const std::string> units, const QueryCase& original) {
    const auto sentences = sentence_texts(original.text);
    std::vector<std::size_t> matched(units.size(), 0);
    if (!sentences.empty()) {
        for (std::size_t i = 0; i < units.size(); ++i) {
            matched[i] = nearest_by_edit_distance(units[i], sentences);
        }
    }
    std::vector<std::size_t> order(units.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return matched[a] < matched[b]; });
    Realignment out;
    for (std::size_t i : order) {
        out.units.push_back(units[i]);
        out.matched.push_back(matched[i]);
    }
    return out;
}

std::string assemble_query_text(std::span<const std::string> units, ReformulationType type,
                                std::string_view annotation_joiner) {
    if (units.empty()) {
        throw ConfigError("cannot assemble a query from zero units");
    }
    const auto join = [&](std::string_view sep) {
        std::string out;
        for (std::size_t i = 0; i < units.size(); ++i) {
            if (i != 0) {
                out += sep;
            }
            out += units[i];
        }
        return out;
    };
    switch (type) {
    case ReformulationType::keyword: return "Keywords: " + join(",");
    case ReformulationType::key_sentence: return join("\n");
    case ReformulationType::summary: return join("");
    case ReformulationType::annotation: return join(annotation_joiner);
    }
    return {};
}

ReformulatedQuery annotation_to_query(const QueryCase& query, const SalienceAnnotation& annotation,
                                      std::span<const SentenceSpan> sentences, std::string_view joiner) {
    std::vector<bool> chosen(sentences.size(), false);
    for (const auto& span : annotation.spans) {
        bool any = false;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            if (intersection_length(span, sentences[i].span()) > 0) {
                chosen[i] = true;
                any = true;
            }
        }
        if (!any) {
            throw ValidationError("annotation span [" + std::to_string(span.start) + "," + std::to_string(span.end) +
                                      ") of " + query.query_id + " lies outside every sentence",
                                  {query.query_id});
        }
    }
    const std::u32string chars = utf8::decode(query.text);
    ReformulatedQuery out;
    out.query_id = query.query_id;
    out.type = ReformulationType::annotation;
    out.provenance.model = "annotation";
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (chosen[i]) {
            const auto& s = sentences[i];
            out.units.push_back(utf8::encode(std::u32string_view(chars).substr(s.char_start, s.char_end - s.char_start)));
        }
    }
    if (out.units.empty()) {
        out.flagged = true;
    } else {
        out.assembled_text = assemble_query_text(out.units, ReformulationType::annotation, joiner);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSONL

std::string format_reformulated(const ReformulatedQuery& q) {
    ordered_json j;
    j["query_id"] = q.query_id;
    j["type"] = to_string(q.type);
    j["units"] = q.units;
    j["assembled_text"] = q.assembled_text;
    ordered_json p;
    p["model"] = q.provenance.model;
    p["prompt_fingerprint"] = q.provenance.prompt_fingerprint;
    p["timestamp"] = q.provenance.timestamp;
    j["provenance"] = std::move(p);
    j["raw_response"] = q.raw_response;
    j["flagged"] = q.flagged;
    return j.dump();
}

std::vector<ReformulatedQuery> read_reformulated(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw IoError("reformulated-queries file not found: " + path.string());
    }
    std::vector<ReformulatedQuery> out;
    const auto lines = split_lines(read_file(path));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto text = trim(lines[i]);
        if (text.empty()) {
            continue;
        }
        try {
            const auto j = json::parse(text);
            ReformulatedQuery q;
            q.query_id = j.at("query_id").get<std::string>();
            q.type = parse_reformulation_type(j.at("type").get<std::string>());
            q.units = j.at("units").get<std::vector<std::string>>();
            q.assembled_text = j.at("assembled_text").get<std::string>();
            if (auto p = j.find("provenance"); p != j.end() && p->is_object()) {
                q.provenance.model = p->value("model", "");
                q.provenance.prompt_fingerprint = p->value("prompt_fingerprint", "");
                q.provenance.timestamp = p->value("timestamp", "");
            }
            q.raw_response = j.value("raw_response", "");
            q.flagged = j.value("flagged", q.units.empty());
            out.push_back(std::move(q));
        } catch (const json::exception& e) {
            throw FormatError(path.filename().string() + ":" + std::to_string(i + 1) + ": malformed record: " + e.what(),
                              path.string(), i + 1);
        }
    }
    return out;
}

} // namespace caselab
