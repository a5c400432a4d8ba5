#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "caselab/corpus.hpp"
#include "caselab/tokenize.hpp"

namespace caselab {

enum class ReformulationType { keyword, key_sentence, summary, annotation };

std::string to_string(ReformulationType type);
ReformulationType parse_reformulation_type(std::string_view name);

/// Four-part zero-shot prompt. Rendering joins the non-empty parts in field
/// order with single spaces, then appends the query text on a new line.
struct PromptTemplate {
    std::string role_preamble;
    std::string task_explanation;
    std::string requirements;
    std::string details;

    std::string render(std::string_view query_text) const;
    std::string fingerprint() const;
};

/// Versioned templates for the three LLM-backed types.
class PromptLibrary {
public:
    /// The English templates, version "en-v1".
    static PromptLibrary builtin();

    /// JSON: {"version": str, "templates": {"keyword": {"role_preamble", "task_explanation",
    /// "requirements", "details"}, "key_sentence": {...}, "summary": {...}}}
    static PromptLibrary load(const std::filesystem::path& path);
    static PromptLibrary parse(std::string_view json_text);

    const std::string& version() const noexcept { return version_; }
    /// Throws ConfigError for ReformulationType::annotation.
    const PromptTemplate& get(ReformulationType type) const;
    /// Folds the library version into the template fingerprint.
    std::string fingerprint(ReformulationType type) const;

private:
    std::string version_;
    std::map<ReformulationType, PromptTemplate> templates_;
};

std::string render_prompt(ReformulationType type, const QueryCase& query,
                          const PromptLibrary& library = PromptLibrary::builtin());

struct Provenance {
    std::string model;
    std::string prompt_fingerprint;
    std::string timestamp;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ReformulatedQuery {
    std::string query_id;
    ReformulationType type = ReformulationType::keyword;
    std::string raw_response;
    std::vector<std::string> units;
    std::string assembled_text;
    Provenance provenance;
    /// Set when the response produced no usable units.
    bool flagged = false;

    friend bool operator==(const ReformulatedQuery&, const ReformulatedQuery&) = default;
};

/// keyword: split on ',', '，', '、' and newlines after dropping a leading
/// "Keywords:" label; key_sentence: one unit per line with list markers removed
/// (a single line is further split into sentences); summary: the whole text.
std::vector<std::string> parse_response(std::string_view raw, ReformulationType type);

struct Realignment {
    std::vector<std::string> units;   // reordered
    std::vector<std::size_t> matched; // original sentence index per reordered unit
};

/// Maps each unit to its nearest original sentence by edit distance (ties to the
/// earlier sentence) and stably sorts units by that sentence's position.
Realignment realign_key_sentences(std::span<const std::string> units, const QueryCase& original);

/// keyword: "Keywords: a,b"; key_sentence: units joined by '\n'; summary: units
/// concatenated; annotation: units joined by `annotation_joiner`.
/// Throws ConfigError on empty units.
std::string assemble_query_text(std::span<const std::string> units, ReformulationType type,
                                std::string_view annotation_joiner = "。");

/// Selects every sentence touching an annotation span, in original order, once each.
/// Throws ValidationError when a span touches no sentence.
ReformulatedQuery annotation_to_query(const QueryCase& query, const SalienceAnnotation& annotation,
                                      std::span<const SentenceSpan> sentences,
                                      std::string_view joiner = "。");

/// One JSON line: query_id, type, units, assembled_text, provenance, raw_response, flagged.
std::string format_reformulated(const ReformulatedQuery& query);
std::vector<ReformulatedQuery> read_reformulated(const std::filesystem::path& path);

} // namespace caselab
