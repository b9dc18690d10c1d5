#include <catch2/catch_amalgamated.hpp>

#include "rlaa/domain.hpp"

using namespace rlaa;

static AttributeSchema reddit_schema() {
    return load_schema(std::string(RLAA_SOURCE_DIR) + "/data/schemas/personal_reddit.json");
}

TEST_CASE("schema round-trips through json and validates") {
    const auto schema = reddit_schema();
    REQUIRE(schema.schema_id == "personal_reddit");
    REQUIRE(schema.attributes.size() == 8);
    REQUIRE(schema.validate().empty());
    REQUIRE(schema.find("age")->kind == AttributeKind::Integer);
    REQUIRE(schema.find("current_city_country")->kind == AttributeKind::Place);
    REQUIRE(schema.find("income_level")->enum_values.size() == 4);
    REQUIRE(schema.find("shoe_size") == nullptr);

    const json j = schema;
    const auto back = j.get<AttributeSchema>();
    REQUIRE(back == schema);
}

TEST_CASE("schema validation catches structural problems") {
    AttributeSchema s;
    s.schema_id = "broken";
    s.attributes = {{"age", AttributeKind::Integer, {}},
                    {"age", AttributeKind::Integer, {}},
                    {"mood", AttributeKind::Enum, {}},
                    {"city", AttributeKind::Place, {"dublin"}}};
    const auto violations = s.validate();
    REQUIRE(violations.size() == 3);
}

TEST_CASE("document validation flags unknown attributes and empties") {
    const auto schema = reddit_schema();
    Document doc;
    doc.id = "d1";
    doc.original_text = "hello";
    doc.schema_id = "personal_reddit";
    doc.ground_truth = {{"age", "27"}, {"shoe_size", "44"}};

    auto violations = validate_document(doc, schema);
    REQUIRE(violations.size() == 1);
    REQUIRE(violations[0] == "unknown attribute shoe_size");

    doc.original_text = "";
    doc.ground_truth.erase("shoe_size");
    violations = validate_document(doc, schema);
    REQUIRE(violations.size() == 1);
    REQUIRE(violations[0] == "empty text");
}

TEST_CASE("protected set follows schema order and skips unknowns") {
    const auto schema = reddit_schema();
    Document doc;
    doc.id = "d1";
    doc.original_text = "text";
    doc.schema_id = "personal_reddit";
    doc.ground_truth = {{"occupation", "nurse"},
                        {"age", "34"},
                        {"sex", "unknown"},
                        {"education", "  "},
                        {"relationship_status", "married"}};

    const auto prot = protected_set(doc, schema);
    REQUIRE(prot.size() == 3);
    REQUIRE(prot[0] == std::pair<std::string, std::string>{"age", "34"});
    REQUIRE(prot[1] == std::pair<std::string, std::string>{"occupation", "nurse"});
    REQUIRE(prot[2] == std::pair<std::string, std::string>{"relationship_status", "married"});
}

TEST_CASE("validity parsing is case-folded and conservative") {
    REQUIRE(validity_from_string("High") == Validity::High);
    REQUIRE(validity_from_string("MED") == Validity::Med);
    REQUIRE(validity_from_string("medium") == Validity::Med);
    REQUIRE(validity_from_string(" low ") == Validity::Low);
    REQUIRE(validity_from_string("invalid") == Validity::Invalid);
    REQUIRE(validity_from_string("plausible") == Validity::Invalid);
    REQUIRE(validity_from_string("") == Validity::Invalid);

    REQUIRE(is_actionable(Validity::High));
    REQUIRE(is_actionable(Validity::Med));
    REQUIRE_FALSE(is_actionable(Validity::Low));
    REQUIRE_FALSE(is_actionable(Validity::Invalid));
}

TEST_CASE("verdict leaked_concept survives serialization only when present") {
    Verdict v;
    v.attribute = "age";
    v.validity = Validity::High;
    v.leaked_concept = "turned 30 last week";
    json j = v;
    REQUIRE(j.contains("leaked_concept"));
    REQUIRE(j.get<Verdict>() == v);

    v.leaked_concept = std::nullopt;
    v.validity = Validity::Low;
    j = v;
    REQUIRE_FALSE(j.contains("leaked_concept"));
    REQUIRE(j.get<Verdict>() == v);
}

TEST_CASE("trajectory round-trips through json") {
    Trajectory traj;
    traj.document_id = "d1";
    traj.mode = Mode::Rlaa;
    traj.stop_reason = StopReason::EmptyPolicy;

    IterationRecord r0;
    r0.t = 0;
    r0.text_before = "I live in Dublin.";
    r0.findings = {{"current_city_country", "Dublin is named outright."}};
    r0.guesses = {{"current_city_country", "Dublin, Ireland", "Dublin, Ireland"}};
    r0.verdicts = {{"current_city_country", Validity::High, "Dublin is named outright.",
                    "the city name", ""}};
    r0.policy.actions = {{r0.findings[0], "the city name", Validity::High, "Dublin"}};
    r0.text_after = "I live in a European capital.";
    r0.wall_clock_ms = 120;

    IterationRecord r1;
    r1.t = 1;
    r1.text_before = r0.text_after;
    r1.findings = {{"current_city_country", "A capital is still mentioned."}};
    r1.verdicts = {{"current_city_country", Validity::Invalid, "", std::nullopt,
                    "too broad to identify anyone"}};
    r1.text_after = r1.text_before;

    traj.records = {r0, r1};
    traj.final_text = r1.text_after;

    const json j = traj;
    REQUIRE(j.get<Trajectory>() == traj);
    REQUIRE(validate_trajectory(traj, 10).empty());
}

TEST_CASE("trajectory validation catches broken invariants") {
    Trajectory traj;
    traj.document_id = "d1";
    traj.stop_reason = StopReason::EmptyPolicy;

    IterationRecord r;
    r.t = 0;
    r.text_before = "a";
    r.text_after = "b";  // changed text with empty policy
    traj.records = {r};
    traj.final_text = "b";

    auto violations = validate_trajectory(traj, 10);
    REQUIRE(violations.size() == 1);
    REQUIRE(violations[0].find("empty policy changed text") != std::string::npos);

    traj.records[0].text_after = "a";
    traj.final_text = "c";
    violations = validate_trajectory(traj, 10);
    REQUIRE_FALSE(violations.empty());

    traj.final_text = "a";
    REQUIRE(validate_trajectory(traj, 10).empty());
    REQUIRE_FALSE(validate_trajectory(traj, 0).empty());

    Trajectory empty_traj;
    empty_traj.document_id = "d2";
    empty_traj.final_text = "untouched";
    empty_traj.stop_reason = StopReason::AgentFailure;
    REQUIRE(validate_trajectory(empty_traj, 10, std::string("untouched")).empty());
    REQUIRE_FALSE(validate_trajectory(empty_traj, 10, std::string("original")).empty());
}

TEST_CASE("marginal records price privacy gains") {
    const auto r = make_marginal(1, 0.25, 0.05);
    REQUIRE(r.mrs_finite());
    REQUIRE(r.mrs == Catch::Approx(0.2));

    SECTION("gain below the noise floor is priced at infinity") {
        const auto tiny = make_marginal(2, 5e-7, 0.1);
        REQUIRE_FALSE(tiny.mrs_finite());
        const auto negative = make_marginal(3, -0.1, 0.1);
        REQUIRE_FALSE(negative.mrs_finite());
    }

    SECTION("free improvements are priced at zero") {
        const auto free_step = make_marginal(4, 0.2, -0.05);
        REQUIRE(free_step.mrs == 0.0);
    }

    SECTION("the infinite sentinel serializes as null") {
        json j = make_marginal(2, 0.0, 0.1);
        REQUIRE(j.at("mrs").is_null());
        const auto back = j.get<MarginalRecord>();
        REQUIRE_FALSE(back.mrs_finite());

        j = r;
        REQUIRE(j.at("mrs").get<double>() == Catch::Approx(0.2));
        REQUIRE(j.get<MarginalRecord>() == r);
    }
}

TEST_CASE("unknown-value predicate") {
    REQUIRE(is_unknown_value(""));
    REQUIRE(is_unknown_value("   "));
    REQUIRE(is_unknown_value("unknown"));
    REQUIRE(is_unknown_value(" Unknown "));
    REQUIRE_FALSE(is_unknown_value("27"));
    REQUIRE_FALSE(is_unknown_value("unknown city"));
}
