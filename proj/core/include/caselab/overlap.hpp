#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "caselab/corpus.hpp"
#include "caselab/reformulate.hpp"
#include "caselab/tokenize.hpp"

namespace caselab {

enum class UnitKind { word, sentence };

struct UnitizedText {
    std::string source_id;
    UnitKind kind = UnitKind::sentence;
    std::vector<std::string> units;
    std::vector<SentenceSpan> spans; // originals only, parallel to units
    std::size_t length_chars = 0;
};

/// Punctuation-delimited sentences of the original query.
UnitizedText unitize_original(const QueryCase& query);

/// keyword -> word units; other types -> sentence units of each unit.
UnitizedText unitize_reformulation(const ReformulatedQuery& query);

/// Characters of reformulated content: keyword units summed, otherwise the assembled text.
std::size_t reformulation_length(const ReformulatedQuery& query);

/// Annotation spans clipped to each original sentence.
struct AnnotationUnits {
    std::vector<std::vector<std::string>> per_sentence;
    std::size_t total_length = 0; // characters of the unclipped annotation

    std::size_t total_units() const noexcept;
};

AnnotationUnits annotation_units(const QueryCase& query, const UnitizedText& original,
                                 const SalienceAnnotation& annotation);

/// Index of the nearest original unit by edit distance (ties to the smallest index).
std::size_t match_unit(std::string_view unit, std::span<const std::string> original_units);

enum class IntersectionMode { multiset, set };

IntersectionMode parse_intersection_mode(std::string_view name);

/// |u ∩ a| over characters.
std::size_t char_intersection(std::string_view u, std::string_view a, IntersectionMode mode);

/// sum_p |u ∩ a_p| / |a_p|.
double overlap_unit(std::string_view unit, std::span<const std::string> annotation_units,
                    IntersectionMode mode = IntersectionMode::multiset);

struct OverlapResult {
    double raw = 0;
    double normalized = 0; // raw / total annotation units
};

/// Throws ValidationError when the annotation yields no units.
OverlapResult overlap_query(const UnitizedText& reformulated, const UnitizedText& original,
                            const AnnotationUnits& annotation,
                            IntersectionMode mode = IntersectionMode::multiset);

enum class InfoRVariant { as_written, density };

std::string to_string(InfoRVariant variant);
InfoRVariant parse_info_variant(std::string_view name);

struct InfoRatio {
    double as_written = 0; // overlap * |Q| / |A|
    double density = 0;    // overlap * |Q| / |U|

    double select(InfoRVariant variant) const noexcept {
        return variant == InfoRVariant::as_written ? as_written : density;
    }
};

/// Throws ValidationError when |A| or |U| is zero.
InfoRatio info_ratio(double normalized_overlap, std::size_t query_length,
                     std::size_t annotation_length, std::size_t reformulation_length);

struct QueryOverlap {
    std::string query_id;
    ReformulationType type = ReformulationType::keyword;
    OverlapResult overlap;
    std::size_t length = 0;
    InfoRatio info;
};

/// Full per-query computation. Throws ValidationError for an empty annotation.
QueryOverlap measure_reformulation(const QueryCase& query, const ReformulatedQuery& reformulated,
                                   const SalienceAnnotation& annotation,
                                   IntersectionMode mode = IntersectionMode::multiset);

struct OverlapRow {
    ReformulationType type = ReformulationType::keyword;
    std::size_t n_queries = 0;
    double avg_overlap = 0; // fraction
    double avg_length = 0;
    double avg_info_as_written = 0;
    double avg_info_density = 0;
};

struct OverlapSummary {
    InfoRVariant headline = InfoRVariant::as_written;
    std::vector<OverlapRow> rows; // one per type present, in enum order
    std::vector<QueryOverlap> per_query;
    std::vector<std::string> flagged; // "<query_id>:<type>: reason"
};

/// Per-type means over queries. Queries lacking a reformulation, an annotation,
/// or usable units are excluded and flagged.
OverlapSummary summarize_reformulations(std::span<const QueryCase> queries,
                                        std::span<const ReformulatedQuery> reformulations,
                                        const std::map<std::string, SalienceAnnotation>& annotations,
                                        InfoRVariant headline = InfoRVariant::as_written,
                                        IntersectionMode mode = IntersectionMode::multiset);

/// Columns: Query type, Avg. overlap, Avg. length, Avg. InfoR.
std::string render_overlap_table(const OverlapSummary& summary);
std::string overlap_json(const OverlapSummary& summary);

} // namespace caselab
