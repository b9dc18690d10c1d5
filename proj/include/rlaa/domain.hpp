#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlaa/errors.hpp"
#include "rlaa/util.hpp"

namespace rlaa {

using json = nlohmann::json;

// Floor below which a privacy delta counts as noise rather than gain. Keeps
// the MRS series total where the ratio would otherwise be undefined.
inline constexpr double kEpsilonP = 1e-6;

inline constexpr double kMrsInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Attribute schemas
// ---------------------------------------------------------------------------

enum class AttributeKind { Integer, Enum, FreeText, Place };

inline std::string to_string(AttributeKind kind) {
    switch (kind) {
        case AttributeKind::Integer: return "integer";
        case AttributeKind::Enum: return "enum";
        case AttributeKind::FreeText: return "free_text";
        case AttributeKind::Place: return "place";
    }
    return "free_text";
}

inline AttributeKind attribute_kind_from_string(const std::string& s) {
    if (s == "integer") return AttributeKind::Integer;
    if (s == "enum") return AttributeKind::Enum;
    if (s == "free_text" || s == "free-text") return AttributeKind::FreeText;
    if (s == "place") return AttributeKind::Place;
    throw ConfigError("unknown attribute kind: " + s);
}

struct AttributeSpec {
    std::string name;
    AttributeKind kind = AttributeKind::FreeText;
    std::vector<std::string> enum_values;

    bool operator==(const AttributeSpec&) const = default;
};

struct AttributeSchema {
    std::string schema_id;
    std::vector<AttributeSpec> attributes;

    bool operator==(const AttributeSchema&) const = default;

    const AttributeSpec* find(const std::string& name) const {
        for (const auto& a : attributes)
            if (a.name == name) return &a;
        return nullptr;
    }

    bool has(const std::string& name) const { return find(name) != nullptr; }

    /// Schema-level invariant check: unique names, enum_values only on enums.
    std::vector<std::string> validate() const {
        std::vector<std::string> violations;
        if (schema_id.empty()) violations.push_back("empty schema_id");
        std::map<std::string, int> seen;
        for (const auto& a : attributes) {
            if (a.name.empty()) violations.push_back("attribute with empty name");
            if (++seen[a.name] == 2) violations.push_back("duplicate attribute " + a.name);
            if (a.kind == AttributeKind::Enum && a.enum_values.empty())
                violations.push_back("enum attribute " + a.name + " has no enum_values");
            if (a.kind != AttributeKind::Enum && !a.enum_values.empty())
                violations.push_back("non-enum attribute " + a.name + " has enum_values");
        }
        return violations;
    }
};

inline void to_json(json& j, const AttributeSpec& a) {
    j = json{{"name", a.name}, {"kind", to_string(a.kind)}};
    if (!a.enum_values.empty()) j["enum_values"] = a.enum_values;
}

inline void from_json(const json& j, AttributeSpec& a) {
    a.name = j.at("name").get<std::string>();
    a.kind = attribute_kind_from_string(j.at("kind").get<std::string>());
    a.enum_values = j.value("enum_values", std::vector<std::string>{});
}

inline void to_json(json& j, const AttributeSchema& s) {
    j = json{{"schema_id", s.schema_id}, {"attributes", s.attributes}};
}

inline void from_json(const json& j, AttributeSchema& s) {
    s.schema_id = j.at("schema_id").get<std::string>();
    s.attributes = j.at("attributes").get<std::vector<AttributeSpec>>();
}

inline AttributeSchema load_schema(const std::filesystem::path& path) {
    AttributeSchema schema;
    try {
        schema = json::parse(read_file(path)).get<AttributeSchema>();
    } catch (const json::exception& e) {
        throw ConfigError("invalid schema file " + path.string() + ": " + e.what());
    }
    const auto violations = schema.validate();
    if (!violations.empty())
        throw ConfigError("schema " + path.string() + ": " + violations.front());
    return schema;
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

struct Document {
    std::string id;
    std::string original_text;
    std::map<std::string, std::string> ground_truth;
    std::string schema_id;

    bool operator==(const Document&) const = default;
};

inline void to_json(json& j, const Document& d) {
    j = json{{"id", d.id},
             {"original_text", d.original_text},
             {"ground_truth", d.ground_truth},
             {"schema_id", d.schema_id}};
}

inline void from_json(const json& j, Document& d) {
    d.id = j.at("id").get<std::string>();
    d.original_text = j.at("original_text").get<std::string>();
    d.ground_truth = j.value("ground_truth", std::map<std::string, std::string>{});
    d.schema_id = j.at("schema_id").get<std::string>();
}

/// A ground-truth value of "unknown" (any case) or blank means the document
/// does not actually contain that attribute.
inline bool is_unknown_value(const std::string& value) {
    const std::string t = trim(value);
    return t.empty() || iequals(t, "unknown");
}

inline std::vector<std::string> validate_document(const Document& doc,
                                                  const AttributeSchema& schema) {
    std::vector<std::string> violations;
    if (doc.id.empty()) violations.push_back("empty id");
    if (doc.original_text.empty()) violations.push_back("empty text");
    if (doc.schema_id != schema.schema_id)
        violations.push_back("schema mismatch: document references " + doc.schema_id);
    for (const auto& [name, value] : doc.ground_truth) {
        (void)value;
        if (!schema.has(name)) violations.push_back("unknown attribute " + name);
    }
    return violations;
}

/// The attribute/value pairs the document actually discloses, in schema order.
/// K, wherever it appears in scoring, is the size of this list.
inline std::vector<std::pair<std::string, std::string>> protected_set(
    const Document& doc, const AttributeSchema& schema) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& spec : schema.attributes) {
        auto it = doc.ground_truth.find(spec.name);
        if (it == doc.ground_truth.end()) continue;
        if (is_unknown_value(it->second)) continue;
        out.emplace_back(spec.name, it->second);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loop vocabulary: findings, verdicts, policies
// ---------------------------------------------------------------------------

struct AttributeGuess {
    std::string attribute;
    std::string value;      // normalized
    std::string raw_value;  // as emitted by the model

    bool operator==(const AttributeGuess&) const = default;
};

inline void to_json(json& j, const AttributeGuess& g) {
    j = json{{"attribute", g.attribute}, {"value", g.value}, {"raw_value", g.raw_value}};
}

inline void from_json(const json& j, AttributeGuess& g) {
    g.attribute = j.at("attribute").get<std::string>();
    g.value = j.at("value").get<std::string>();
    g.raw_value = j.value("raw_value", g.value);
}

struct LeakFinding {
    std::string attribute;
    std::string reasoning;

    bool operator==(const LeakFinding&) const = default;
};

inline void to_json(json& j, const LeakFinding& f) {
    j = json{{"attribute", f.attribute}, {"reasoning", f.reasoning}};
}

inline void from_json(const json& j, LeakFinding& f) {
    f.attribute = j.at("attribute").get<std::string>();
    f.reasoning = j.at("reasoning").get<std::string>();
}

enum class Validity { High, Med, Low, Invalid };

inline std::string to_string(Validity v) {
    switch (v) {
        case Validity::High: return "high";
        case Validity::Med: return "med";
        case Validity::Low: return "low";
        case Validity::Invalid: return "invalid";
    }
    return "invalid";
}

/// Case-folds and accepts the "medium" wire spelling. Anything unrecognized is
/// treated as invalid, the conservative label for hallucinated levels.
inline Validity validity_from_string(const std::string& s) {
    const std::string v = to_lower(trim(s));
    if (v == "high") return Validity::High;
    if (v == "med" || v == "medium") return Validity::Med;
    if (v == "low") return Validity::Low;
    return Validity::Invalid;
}

inline bool is_actionable(Validity v) { return v == Validity::High || v == Validity::Med; }

struct Verdict {
    std::string attribute;
    Validity validity = Validity::Invalid;
    std::string reasoning_evidence;
    std::optional<std::string> leaked_concept;
    std::string validation_notes;

    bool operator==(const Verdict&) const = default;
};

inline void to_json(json& j, const Verdict& v) {
    j = json{{"attribute", v.attribute},
             {"validity", to_string(v.validity)},
             {"reasoning_evidence", v.reasoning_evidence},
             {"validation_notes", v.validation_notes}};
    if (v.leaked_concept) j["leaked_concept"] = *v.leaked_concept;
}

inline void from_json(const json& j, Verdict& v) {
    v.attribute = j.at("attribute").get<std::string>();
    v.validity = validity_from_string(j.at("validity").get<std::string>());
    v.reasoning_evidence = j.value("reasoning_evidence", "");
    v.validation_notes = j.value("validation_notes", "");
    if (j.contains("leaked_concept") && !j.at("leaked_concept").is_null())
        v.leaked_concept = j.at("leaked_concept").get<std::string>();
    else
        v.leaked_concept = std::nullopt;
}

struct PolicyAction {
    LeakFinding leak;
    std::string leaked_concept;
    Validity validity = Validity::High;  // High or Med only
    std::string evidence;                // phrase the attacker keyed on

    bool operator==(const PolicyAction&) const = default;
};

inline void to_json(json& j, const PolicyAction& a) {
    j = json{{"leak", a.leak},
             {"leaked_concept", a.leaked_concept},
             {"validity", to_string(a.validity)},
             {"evidence", a.evidence}};
}

inline void from_json(const json& j, PolicyAction& a) {
    a.leak = j.at("leak").get<LeakFinding>();
    a.leaked_concept = j.at("leaked_concept").get<std::string>();
    a.validity = validity_from_string(j.at("validity").get<std::string>());
    a.evidence = j.value("evidence", "");
}

/// The actionable leaks that survived arbitration. Empty is a legal value and
/// is what triggers the early stop.
struct PolicySet {
    std::vector<PolicyAction> actions;

    bool empty() const { return actions.empty(); }
    size_t size() const { return actions.size(); }

    bool operator==(const PolicySet&) const = default;
};

inline void to_json(json& j, const PolicySet& p) { j = json{{"actions", p.actions}}; }

inline void from_json(const json& j, PolicySet& p) {
    p.actions = j.at("actions").get<std::vector<PolicyAction>>();
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct TranscriptMessage {
    std::string role;  // system | user | assistant
    std::string content;

    bool operator==(const TranscriptMessage&) const = default;
};

inline void to_json(json& j, const TranscriptMessage& m) {
    j = json{{"role", m.role}, {"content", m.content}};
}

inline void from_json(const json& j, TranscriptMessage& m) {
    m.role = j.at("role").get<std::string>();
    m.content = j.at("content").get<std::string>();
}

struct AgentTranscript {
    std::string role;  // attacker | arbitrator | anonymizer | judge | adversary
    std::vector<TranscriptMessage> request;
    std::string response;

    bool operator==(const AgentTranscript&) const = default;
};

inline void to_json(json& j, const AgentTranscript& t) {
    j = json{{"role", t.role}, {"request", t.request}, {"response", t.response}};
}

inline void from_json(const json& j, AgentTranscript& t) {
    t.role = j.at("role").get<std::string>();
    t.request = j.at("request").get<std::vector<TranscriptMessage>>();
    t.response = j.at("response").get<std::string>();
}

struct IterationRecord {
    int t = 0;
    std::string text_before;
    std::vector<LeakFinding> findings;
    std::vector<AttributeGuess> guesses;
    std::vector<Verdict> verdicts;
    PolicySet policy;
    std::string text_after;
    std::int64_t wall_clock_ms = 0;
    std::vector<AgentTranscript> agent_transcripts;

    bool operator==(const IterationRecord&) const = default;
};

inline void to_json(json& j, const IterationRecord& r) {
    j = json{{"t", r.t},
             {"text_before", r.text_before},
             {"findings", r.findings},
             {"guesses", r.guesses},
             {"verdicts", r.verdicts},
             {"policy", r.policy},
             {"text_after", r.text_after},
             {"wall_clock_ms", r.wall_clock_ms},
             {"agent_transcripts", r.agent_transcripts}};
}

inline void from_json(const json& j, IterationRecord& r) {
    r.t = j.at("t").get<int>();
    r.text_before = j.at("text_before").get<std::string>();
    r.findings = j.at("findings").get<std::vector<LeakFinding>>();
    r.guesses = j.value("guesses", std::vector<AttributeGuess>{});
    r.verdicts = j.at("verdicts").get<std::vector<Verdict>>();
    r.policy = j.at("policy").get<PolicySet>();
    r.text_after = j.at("text_after").get<std::string>();
    r.wall_clock_ms = j.value("wall_clock_ms", std::int64_t{0});
    r.agent_transcripts = j.value("agent_transcripts", std::vector<AgentTranscript>{});
}

enum class StopReason { EmptyPolicy, MaxIterations, AgentFailure };

inline std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::EmptyPolicy: return "empty_policy";
        case StopReason::MaxIterations: return "max_iterations";
        case StopReason::AgentFailure: return "agent_failure";
    }
    return "agent_failure";
}

inline StopReason stop_reason_from_string(const std::string& s) {
    if (s == "empty_policy") return StopReason::EmptyPolicy;
    if (s == "max_iterations") return StopReason::MaxIterations;
    if (s == "agent_failure") return StopReason::AgentFailure;
    throw ConfigError("unknown stop_reason: " + s);
}

enum class Mode { Rlaa, Greedy };

inline std::string to_string(Mode m) { return m == Mode::Rlaa ? "rlaa" : "greedy"; }

inline Mode mode_from_string(const std::string& s) {
    const std::string v = to_lower(trim(s));
    if (v == "rlaa") return Mode::Rlaa;
    if (v == "greedy") return Mode::Greedy;
    throw ConfigError("unknown mode: " + s);
}

struct Trajectory {
    std::string document_id;
    std::vector<IterationRecord> records;
    std::string final_text;
    StopReason stop_reason = StopReason::MaxIterations;
    Mode mode = Mode::Rlaa;

    bool operator==(const Trajectory&) const = default;
};

inline void to_json(json& j, const Trajectory& t) {
    j = json{{"document_id", t.document_id},
             {"records", t.records},
             {"final_text", t.final_text},
             {"stop_reason", to_string(t.stop_reason)},
             {"mode", to_string(t.mode)}};
}

inline void from_json(const json& j, Trajectory& t) {
    t.document_id = j.at("document_id").get<std::string>();
    t.records = j.at("records").get<std::vector<IterationRecord>>();
    t.final_text = j.at("final_text").get<std::string>();
    t.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
    t.mode = mode_from_string(j.at("mode").get<std::string>());
}

/// Structural invariant check over a trajectory, usable against persisted
/// files as well as fresh loop output. original_text is needed only for the
/// degenerate no-records case.
inline std::vector<std::string> validate_trajectory(
    const Trajectory& traj, int max_iterations,
    const std::optional<std::string>& original_text = std::nullopt) {
    std::vector<std::string> violations;
    if (static_cast<int>(traj.records.size()) > max_iterations)
        violations.push_back("more records than max_iterations");
    int expected_t = 0;
    for (const auto& r : traj.records) {
        if (r.t != expected_t++)
            violations.push_back("non-monotone step index at t=" + std::to_string(r.t));
        if (r.policy.empty() && r.text_after != r.text_before)
            violations.push_back("empty policy changed text at t=" + std::to_string(r.t));
        for (const auto& v : r.verdicts) {
            bool found = false;
            for (const auto& f : r.findings)
                if (f.attribute == v.attribute) found = true;
            if (!found)
                violations.push_back("verdict for unknown finding " + v.attribute + " at t=" +
                                     std::to_string(r.t));
        }
    }
    if (traj.records.empty()) {
        if (original_text && traj.final_text != *original_text)
            violations.push_back("final_text differs from original with no records");
    } else if (traj.final_text != traj.records.back().text_after) {
        violations.push_back("final_text differs from last record");
    }
    if (traj.stop_reason == StopReason::EmptyPolicy &&
        (traj.records.empty() || !traj.records.back().policy.empty()))
        violations.push_back("stop_reason empty_policy without an empty final policy");
    return violations;
}

// ---------------------------------------------------------------------------
// Judge scores
// ---------------------------------------------------------------------------

/// readability and meaning are 1..10; hallucination is 1 when the text stayed
/// free of invented facts, 0 otherwise. clamped records that the raw reply
/// was out of range and had to be coerced.
struct JudgeScores {
    int readability = 1;
    int meaning = 1;
    int hallucination = 0;
    std::map<std::string, std::string> explanations;
    bool clamped = false;

    bool operator==(const JudgeScores&) const = default;
};

inline void to_json(json& j, const JudgeScores& s) {
    j = json{{"readability", s.readability},
             {"meaning", s.meaning},
             {"hallucination", s.hallucination},
             {"explanations", s.explanations},
             {"clamped", s.clamped}};
}

inline void from_json(const json& j, JudgeScores& s) {
    s.readability = j.at("readability").get<int>();
    s.meaning = j.at("meaning").get<int>();
    s.hallucination = j.at("hallucination").get<int>();
    s.explanations = j.value("explanations", std::map<std::string, std::string>{});
    s.clamped = j.value("clamped", false);
}

// ---------------------------------------------------------------------------
// Marginal economics
// ---------------------------------------------------------------------------

/// One privacy/utility transaction. mrs is the utility cost paid per unit of
/// privacy gained; when the gain is below the noise floor the price is the
/// +inf sentinel (serialized as null).
struct MarginalRecord {
    int t = 0;
    double delta_p = 0.0;
    double delta_c = 0.0;
    double mrs = kMrsInfinity;

    bool mrs_finite() const { return std::isfinite(mrs); }

    bool operator==(const MarginalRecord&) const = default;
};

inline MarginalRecord make_marginal(int t, double delta_p, double delta_c) {
    MarginalRecord r;
    r.t = t;
    r.delta_p = delta_p;
    r.delta_c = delta_c;
    if (delta_p > kEpsilonP) {
        // A negative cost for positive gain is a free improvement; price 0.
        r.mrs = delta_c > 0.0 ? delta_c / delta_p : 0.0;
    } else {
        r.mrs = kMrsInfinity;
    }
    return r;
}

inline void to_json(json& j, const MarginalRecord& m) {
    j = json{{"t", m.t}, {"delta_p", m.delta_p}, {"delta_c", m.delta_c}};
    if (m.mrs_finite())
        j["mrs"] = m.mrs;
    else
        j["mrs"] = nullptr;
}

inline void from_json(const json& j, MarginalRecord& m) {
    m.t = j.at("t").get<int>();
    m.delta_p = j.at("delta_p").get<double>();
    m.delta_c = j.at("delta_c").get<double>();
    if (j.contains("mrs") && !j.at("mrs").is_null())
        m.mrs = j.at("mrs").get<double>();
    else
        m.mrs = kMrsInfinity;
}

}  // namespace rlaa
