#include <gtest/gtest.h>

#include <json.hpp>

#include "caselab/error.hpp"
#include "caselab/overlap.hpp"

using namespace caselab;

namespace {

const QueryCase kQuery{"q1", "甲乙丙。丁戊己。", {}};
const SalienceAnnotation kAnnotation{"q1", {{1, 6}}};

ReformulatedQuery reformulated(ReformulationType type, std::vector<std::string> units,
                               std::string query_id = "q1") {
    ReformulatedQuery r;
    r.query_id = std::move(query_id);
    r.type = type;
    r.units = std::move(units);
    r.assembled_text = assemble_query_text(r.units, type);
    return r;
}

} // namespace

TEST(CharIntersection, MultisetAndSet) {
    EXPECT_EQ(char_intersection("AAB", "AAA", IntersectionMode::multiset), 2u);
    EXPECT_EQ(char_intersection("AAB", "AAA", IntersectionMode::set), 1u);
    EXPECT_EQ(char_intersection("盗窃罪", "窃取", IntersectionMode::multiset), 1u);
    EXPECT_EQ(char_intersection("", "abc", IntersectionMode::multiset), 0u);
    EXPECT_EQ(parse_intersection_mode("set"), IntersectionMode::set);
    EXPECT_THROW(parse_intersection_mode("bag"), ConfigError);
}

TEST(OverlapUnit, WorkedExample) {
    const std::vector<std::string> a{"BC", "DE"};
    EXPECT_NEAR(overlap_unit("XBCD", a), 1.5, 1e-9);
    EXPECT_EQ(overlap_unit("XBCD", std::vector<std::string>{}), 0.0);
}

TEST(InfoRatio, AsWrittenAndDensity) {
    const auto r = info_ratio(1.0, 100, 20, 50);
    EXPECT_NEAR(r.as_written, 5.0, 1e-9);
    EXPECT_NEAR(r.density, 2.0, 1e-9);
    EXPECT_EQ(r.select(InfoRVariant::density), r.density);
    EXPECT_THROW(info_ratio(1.0, 100, 0, 5), ValidationError);
    EXPECT_THROW(info_ratio(1.0, 100, 5, 0), ValidationError);
    EXPECT_EQ(parse_info_variant("as-written"), InfoRVariant::as_written);
    EXPECT_THROW(parse_info_variant("ratio"), ConfigError);
}

TEST(Units, OriginalSentencesAndClippedAnnotation) {
    const auto original = unitize_original(kQuery);
    EXPECT_EQ(original.units, (std::vector<std::string>{"甲乙丙", "丁戊己"}));
    EXPECT_EQ(original.length_chars, 8u);
    const auto a = annotation_units(kQuery, original, kAnnotation);
    EXPECT_EQ(a.per_sentence, (std::vector<std::vector<std::string>>{{"乙丙"}, {"丁戊"}}));
    EXPECT_EQ(a.total_units(), 2u);
    EXPECT_EQ(a.total_length, 5u);
}

TEST(Units, ReformulationKindsAndLengths) {
    const auto kw = reformulated(ReformulationType::keyword, {"乙丙", "丁"});
    const auto ukw = unitize_reformulation(kw);
    EXPECT_EQ(ukw.kind, UnitKind::word);
    EXPECT_EQ(reformulation_length(kw), 3u);

    const auto sm = reformulated(ReformulationType::summary, {"甲乙。丁戊"});
    const auto usm = unitize_reformulation(sm);
    EXPECT_EQ(usm.kind, UnitKind::sentence);
    EXPECT_EQ(usm.units, (std::vector<std::string>{"甲乙", "丁戊"}));
    EXPECT_EQ(reformulation_length(sm), 5u);

    const auto ks = reformulated(ReformulationType::key_sentence, {"甲乙丙", "丁戊己"});
    EXPECT_EQ(reformulation_length(ks), 7u); // includes the joining newline
}

TEST(Units, MatchPrefersEarlierOnTies) {
    const std::vector<std::string> originals{"甲乙", "丙乙"};
    EXPECT_EQ(match_unit("乙", originals), 0u);
    EXPECT_EQ(match_unit("丙乙乙", originals), 1u);
    EXPECT_THROW(match_unit("x", std::vector<std::string>{}), ValidationError);
}

TEST(Measure, KeywordFixture) {
    const auto m = measure_reformulation(kQuery, reformulated(ReformulationType::keyword, {"乙丙", "丁"}), kAnnotation);
    EXPECT_NEAR(m.overlap.raw, 1.5, 1e-12);
    EXPECT_NEAR(m.overlap.normalized, 0.75, 1e-12);
    EXPECT_EQ(m.length, 3u);
    EXPECT_NEAR(m.info.as_written, 0.75 * 8 / 5, 1e-12);
    EXPECT_NEAR(m.info.density, 0.75 * 8 / 3, 1e-12);
}

TEST(Measure, OriginalAgainstItselfHasUnitDensity) {
    const QueryCase q{"q", "被告人张某盗窃财物。经鉴定价值三千元。公诉机关提起公诉", {}};
    const SalienceAnnotation a{"q", {{3, 7}, {10, 14}, {16, 18}, {20, 24}}};
    ReformulatedQuery self;
    self.query_id = "q";
    self.type = ReformulationType::summary;
    self.units = {q.text};
    self.assembled_text = q.text;
    const auto m = measure_reformulation(q, self, a);
    EXPECT_EQ(m.overlap.normalized, 1.0);
    EXPECT_EQ(m.info.density, 1.0);
}

TEST(Measure, EmptyAnnotationRejected) {
    EXPECT_THROW(measure_reformulation(kQuery, reformulated(ReformulationType::keyword, {"甲"}),
                                       SalienceAnnotation{"q1", {}}),
                 ValidationError);
}

TEST(Summary, AveragesPerTypeAndFlagsProblems) {
    const std::vector<QueryCase> queries{kQuery, {"q2", "子丑寅。卯辰巳。", {}}, {"q3", "午未。", {}}};
    const std::map<std::string, SalienceAnnotation> annotations{{"q1", kAnnotation}, {"q2", {"q2", {{0, 3}}}}};
    auto bad = reformulated(ReformulationType::keyword, {"x"}, "q2");
    bad.units.clear();
    bad.flagged = true;
    const std::vector<ReformulatedQuery> refs{
        reformulated(ReformulationType::keyword, {"乙丙", "丁"}),
        bad,
        reformulated(ReformulationType::key_sentence, {"甲乙丙"}),
        reformulated(ReformulationType::key_sentence, {"子丑寅"}, "q2"),
        reformulated(ReformulationType::keyword, {"午"}, "q3"),
        reformulated(ReformulationType::keyword, {"午"}, "q9"),
    };
    const auto s = summarize_reformulations(queries, refs, annotations);
    ASSERT_EQ(s.rows.size(), 2u);
    EXPECT_EQ(s.rows[0].type, ReformulationType::keyword);
    EXPECT_EQ(s.rows[0].n_queries, 1u);
    EXPECT_NEAR(s.rows[0].avg_overlap, 0.75, 1e-12);
    EXPECT_EQ(s.rows[1].type, ReformulationType::key_sentence);
    EXPECT_EQ(s.rows[1].n_queries, 2u);
    // q1: "甲乙丙" covers "乙丙" of two units -> 0.5; q2: full -> 1.
    EXPECT_NEAR(s.rows[1].avg_overlap, 0.75, 1e-12);
    EXPECT_NEAR(s.rows[1].avg_length, 3.0, 1e-12);

    const auto has = [&](const std::string& needle) {
        for (const auto& f : s.flagged) {
            if (f.find(needle) != std::string::npos) {
                return true;
            }
        }
        return false;
    };
    EXPECT_TRUE(has("q9:keyword: unknown query"));
    EXPECT_TRUE(has("q3:keyword: no annotation"));
    EXPECT_TRUE(has("q2:keyword: no usable units"));
}

TEST(Summary, TableAndJson) {
    const std::vector<QueryCase> queries{kQuery};
    const std::map<std::string, SalienceAnnotation> annotations{{"q1", kAnnotation}};
    const std::vector<ReformulatedQuery> refs{reformulated(ReformulationType::keyword, {"乙丙", "丁"}),
                                              reformulated(ReformulationType::key_sentence, {"甲乙丙"})};
    auto s = summarize_reformulations(queries, refs, annotations, InfoRVariant::density);
    EXPECT_EQ(render_overlap_table(s),
              "Query type    Avg. overlap  Avg. length  Avg. InfoR (density)\n"
              "keyword       75.00%        3.00         2.00\n"
              "key sentence  50.00%        3.00         1.33\n");
    const auto j = nlohmann::json::parse(overlap_json(s));
    EXPECT_EQ(j["infor_headline"], "density");
    EXPECT_EQ(j["rows"][1]["query_type"], "key_sentence");
    EXPECT_NEAR(j["rows"][0]["avg_infor_as_written"].get<double>(), 1.2, 1e-12);
}
