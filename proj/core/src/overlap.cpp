#include "caselab/overlap.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "caselab/error.hpp"
#include "caselab/levenshtein.hpp"
#include "caselab/utf8.hpp"
#include "caselab/util.hpp"

namespace caselab {

using ordered_json = nlohmann::ordered_json;

UnitizedText unitize_original(const QueryCase& query) {
    UnitizedText out;
    out.source_id = query.query_id;
    out.kind = UnitKind::sentence;
    out.length_chars = utf8::length(query.text);
    for (const auto& s : split_sentences(query.text)) {
        out.units.push_back(utf8::slice(query.text, s.char_start, s.char_end));
        out.spans.push_back(s);
    }
    return out;
}

UnitizedText unitize_reformulation(const ReformulatedQuery& query) {
    UnitizedText out;
    out.source_id = query.query_id;
    out.length_chars = reformulation_length(query);
    if (query.type == ReformulationType::keyword) {
        out.kind = UnitKind::word;
        for (const auto& u : query.units) {
            if (!trim_unicode(u).empty()) {
                out.units.push_back(u);
            }
        }
        return out;
    }
    out.kind = UnitKind::sentence;
    for (const auto& u : query.units) {
        for (auto& s : sentence_texts(u)) {
            if (!trim_unicode(s).empty()) {
                out.units.push_back(std::move(s));
            }
        }
    }
    return out;
}

std::size_t reformulation_length(const ReformulatedQuery& query) {
    if (query.type != ReformulationType::keyword) {
        return utf8::length(query.assembled_text);
    }
    std::size_t n = 0;
    for (const auto& u : query.units) {
        n += utf8::length(u);
    }
    return n;
}

std::size_t AnnotationUnits::total_units() const noexcept {
    std::size_t n = 0;
    for (const auto& s : per_sentence) {
        n += s.size();
    }
    return n;
}

AnnotationUnits annotation_units(const QueryCase& query, const UnitizedText& original,
                                 const SalienceAnnotation& annotation) {
    AnnotationUnits out;
    out.total_length = annotation.total_length();
    out.per_sentence.resize(original.spans.size());
    for (std::size_t j = 0; j < original.spans.size(); ++j) {
        const auto sentence = original.spans[j].span();
        for (const auto& span : annotation.spans) {
            const std::size_t lo = std::max(span.start, sentence.start);
            const std::size_t hi = std::min(span.end, sentence.end);
            if (lo < hi) {
                out.per_sentence[j].push_back(utf8::slice(query.text, lo, hi));
            }
        }
    }
    return out;
}

std::size_t match_unit(std::string_view unit, std::span<const std::string> original_units) {
    if (original_units.empty()) {
        throw ValidationError("cannot match a unit against an empty original", {});
    }
    return nearest_by_edit_distance(unit, original_units);
}

IntersectionMode parse_intersection_mode(std::string_view name) {
    if (name == "multiset") {
        return IntersectionMode::multiset;
    }
    if (name == "set") {
        return IntersectionMode::set;
    }
    throw ConfigError("unknown intersection mode '" + std::string(name) + "' (expected multiset or set)");
}

std::size_t char_intersection(std::string_view u, std::string_view a, IntersectionMode mode) {
    const std::u32string uc = utf8::decode(u);
    const std::u32string ac = utf8::decode(a);
    if (mode == IntersectionMode::set) {
        const std::set<char32_t> us(uc.begin(), uc.end());
        const std::set<char32_t> as(ac.begin(), ac.end());
        std::size_t n = 0;
        for (char32_t c : as) {
            n += us.count(c);
        }
        return n;
    }
    std::unordered_map<char32_t, std::size_t> counts;
    for (char32_t c : ac) {
        ++counts[c];
    }
    std::size_t n = 0;
    for (char32_t c : uc) {
        auto it = counts.find(c);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++n;
        }
    }
    return n;
}

double overlap_unit(std::string_view unit, std::span<const std::string> annotation_units, IntersectionMode mode) {
    double sum = 0.0;
    for (const auto& a : annotation_units) {
        const std::size_t len = utf8::length(a);
        if (len == 0) {
            continue;
        }
        sum += static_cast<double>(char_intersection(unit, a, mode)) / static_cast<double>(len);
    }
    return sum;
}

OverlapResult overlap_query(const UnitizedText& reformulated, const UnitizedText& original,
                            const AnnotationUnits& annotation, IntersectionMode mode) {
    const std::size_t k = annotation.total_units();
    if (k == 0) {
        throw ValidationError("annotation of " + original.source_id + " yields no units", {original.source_id});
    }
    OverlapResult out;
    for (const auto& u : reformulated.units) {
        const std::size_t j = match_unit(u, original.units);
        out.raw += overlap_unit(u, annotation.per_sentence.at(j), mode);
    }
    out.normalized = out.raw / static_cast<double>(k);
    return out;
}

std::string to_string(InfoRVariant variant) {
    return variant == InfoRVariant::as_written ? "as-written" : "density";
}

InfoRVariant parse_info_variant(std::string_view name) {
    if (name == "as-written" || name == "as_written") {
        return InfoRVariant::as_written;
    }
    if (name == "density") {
        return InfoRVariant::density;
    }
    throw ConfigError("unknown InfoR variant '" + std::string(name) + "' (expected as-written or density)");
}

InfoRatio info_ratio(double normalized_overlap, std::size_t query_length, std::size_t annotation_length,
                     std::size_t reformulation_length) {
    if (annotation_length == 0) {
        throw ValidationError("InfoR needs a non-empty annotation", {});
    }
    if (reformulation_length == 0) {
        throw ValidationError("InfoR needs a non-empty reformulation", {});
    }
    const double q = static_cast<double>(query_length);
    return {normalized_overlap * q / static_cast<double>(annotation_length),
            normalized_overlap * q / static_cast<double>(reformulation_length)};
}

QueryOverlap measure_reformulation(const QueryCase& query, const ReformulatedQuery& reformulated,
                                   const SalienceAnnotation& annotation, IntersectionMode mode) {
    const UnitizedText original = unitize_original(query);
    if (original.units.empty()) {
        throw ValidationError("query " + query.query_id + " has no sentences", {query.query_id});
    }
    const AnnotationUnits ann = annotation_units(query, original, annotation);
    const UnitizedText units = unitize_reformulation(reformulated);
    if (units.units.empty()) {
        throw ValidationError("reformulation of " + query.query_id + " has no units", {query.query_id});
    }
    QueryOverlap out;
    out.query_id = query.query_id;
    out.type = reformulated.type;
    out.overlap = overlap_query(units, original, ann, mode);
    out.length = units.length_chars;
    out.info = info_ratio(out.overlap.normalized, original.length_chars, ann.total_length, out.length);
    return out;
}

OverlapSummary summarize_reformulations(std::span<const QueryCase> queries,
                                        std::span<const ReformulatedQuery> reformulations,
                                        const std::map<std::string, SalienceAnnotation>& annotations,
                                        InfoRVariant headline, IntersectionMode mode) {
    OverlapSummary out;
    out.headline = headline;
    std::map<std::string, const QueryCase*> by_id;
    for (const auto& q : queries) {
        by_id[q.query_id] = &q;
    }
    std::map<ReformulationType, std::set<std::string>> seen;
    for (const auto& r : reformulations) {
        seen[r.type].insert(r.query_id);
        const std::string tag = r.query_id + ":" + to_string(r.type) + ": ";
        auto q = by_id.find(r.query_id);
        if (q == by_id.end()) {
            out.flagged.push_back(tag + "unknown query");
            continue;
        }
        auto a = annotations.find(r.query_id);
        if (a == annotations.end() || a->second.spans.empty()) {
            out.flagged.push_back(tag + "no annotation");
            continue;
        }
        if (r.flagged || r.units.empty()) {
            out.flagged.push_back(tag + "no usable units");
            continue;
        }
        try {
            out.per_query.push_back(measure_reformulation(*q->second, r, a->second, mode));
        } catch (const ValidationError& e) {
            out.flagged.push_back(tag + e.what());
        }
    }
    for (const auto& [type, ids] : seen) {
        for (const auto& q : queries) {
            if (!ids.contains(q.query_id)) {
                out.flagged.push_back(q.query_id + ":" + to_string(type) + ": no reformulation");
            }
        }
    }
    for (const auto& [type, ids] : seen) {
        OverlapRow row;
        row.type = type;
        for (const auto& m : out.per_query) {
            if (m.type != type) {
                continue;
            }
            ++row.n_queries;
            row.avg_overlap += m.overlap.normalized;
            row.avg_length += static_cast<double>(m.length);
            row.avg_info_as_written += m.info.as_written;
            row.avg_info_density += m.info.density;
        }
        if (row.n_queries > 0) {
            const double n = static_cast<double>(row.n_queries);
            row.avg_overlap /= n;
            row.avg_length /= n;
            row.avg_info_as_written /= n;
            row.avg_info_density /= n;
        }
        out.rows.push_back(row);
    }
    return out;
}

namespace {

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string type_label(ReformulationType type) {
    switch (type) {
    case ReformulationType::keyword: return "keyword";
    case ReformulationType::key_sentence: return "key sentence";
    case ReformulationType::summary: return "summary";
    case ReformulationType::annotation: return "annotation";
    }
    return "?";
}

} // namespace

std::string render_overlap_table(const OverlapSummary& summary) {
    std::vector<std::vector<std::string>> cells{
        {"Query type", "Avg. overlap", "Avg. length", "Avg. InfoR (" + to_string(summary.headline) + ")"}};
    for (const auto& r : summary.rows) {
        const double info = summary.headline == InfoRVariant::as_written ? r.avg_info_as_written : r.avg_info_density;
        cells.push_back({type_label(r.type), fixed2(r.avg_overlap * 100.0) + "%", fixed2(r.avg_length), fixed2(info)});
    }
    std::vector<std::size_t> widths(4, 0);
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            widths[i] = std::max(widths[i], row[i].size());
        }
    }
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i != 0) {
                out += "  ";
            }
            out += row[i];
            if (i + 1 < row.size()) {
                out.append(widths[i] - row[i].size(), ' ');
            }
        }
        out += '\n';
    }
    return out;
}

std::string overlap_json(const OverlapSummary& summary) {
    ordered_json j;
    j["infor_headline"] = to_string(summary.headline);
    ordered_json rows = ordered_json::array();
    for (const auto& r : summary.rows) {
        ordered_json row;
        row["query_type"] = to_string(r.type);
        row["n_queries"] = r.n_queries;
        row["avg_overlap_pct"] = r.avg_overlap * 100.0;
        row["avg_length"] = r.avg_length;
        row["avg_infor"] = summary.headline == InfoRVariant::as_written ? r.avg_info_as_written : r.avg_info_density;
        row["avg_infor_as_written"] = r.avg_info_as_written;
        row["avg_infor_density"] = r.avg_info_density;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    ordered_json per = ordered_json::array();
    for (const auto& q : summary.per_query) {
        ordered_json row;
        row["query_id"] = q.query_id;
        row["query_type"] = to_string(q.type);
        row["overlap_raw"] = q.overlap.raw;
        row["overlap"] = q.overlap.normalized;
        row["length"] = q.length;
        row["infor_as_written"] = q.info.as_written;
        row["infor_density"] = q.info.density;
        per.push_back(std::move(row));
    }
    j["per_query"] = std::move(per);
    j["flagged"] = summary.flagged;
    return j.dump(2) + "\n";
}

} // namespace caselab
