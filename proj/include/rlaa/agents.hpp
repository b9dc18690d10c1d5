#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rlaa/domain.hpp"
#include "rlaa/errors.hpp"
#include "rlaa/gateway.hpp"
#include "rlaa/prompts.hpp"

namespace rlaa {

// ---------------------------------------------------------------------------
// Lenient JSON extraction
//
// Model replies wrap their JSON in prose, markdown fences, or duplicate
// scaffolding. The scanners below find the first balanced span that actually
// parses, skipping brackets that live inside string literals.
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

inline std::optional<std::pair<size_t, size_t>> find_balanced(const std::string& text,
                                                              char open, char close,
                                                              size_t from) {
    const size_t start = text.find(open, from);
    if (start == std::string::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false, escaped = false;
    for (size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"')
            in_string = true;
        else if (c == open)
            ++depth;
        else if (c == close && --depth == 0)
            return std::make_pair(start, i + 1);
    }
    return std::nullopt;
}

struct ExtractedJson {
    json value;
    size_t begin = 0;
    size_t end = 0;
};

inline std::optional<ExtractedJson> first_parseable(const std::string& text, char open,
                                                    char close, size_t from = 0) {
    while (true) {
        const auto span = find_balanced(text, open, close, from);
        if (!span) return std::nullopt;
        try {
            return ExtractedJson{json::parse(text.substr(span->first, span->second - span->first)),
                                 span->first, span->second};
        } catch (const json::exception&) {
            from = span->first + 1;
        }
    }
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos <= text.size()) {
        const size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        std::string line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        pos = eol + 1;
    }
    return lines;
}

inline std::vector<std::string> split_paragraphs(const std::string& text) {
    std::vector<std::string> paragraphs;
    std::string current;
    for (const auto& line : split_lines(text)) {
        if (trim(line).empty()) {
            if (!current.empty()) paragraphs.push_back(current);
            current.clear();
        } else {
            if (!current.empty()) current += '\n';
            current += line;
        }
    }
    if (!current.empty()) paragraphs.push_back(current);
    return paragraphs;
}

inline std::string guess_value_to_string(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return trim(v.get<std::string>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    return v.dump();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Attacker reply
// ---------------------------------------------------------------------------

struct AttackerReply {
    std::string inference;
    std::vector<LeakFinding> findings;
    std::vector<AttributeGuess> guesses;
};

/// Expected shape is "Inference: ... Guess: {json}", but every part of that
/// scaffold is treated as optional except the JSON object itself.
inline AttackerReply parse_attacker_reply(const std::string& reply,
                                          const AttributeSchema& schema) {
    AttackerReply out;

    // The last "Guess:" wins; models sometimes mention the word early on.
    const size_t marker = reply.rfind("Guess:");
    std::string inference_region;
    std::optional<detail::ExtractedJson> obj;
    if (marker != std::string::npos) {
        inference_region = reply.substr(0, marker);
        obj = detail::first_parseable(reply, '{', '}', marker);
    }
    if (!obj || !obj->value.is_object()) {
        obj = detail::first_parseable(reply, '{', '}');
        while (obj && !obj->value.is_object())
            obj = detail::first_parseable(reply, '{', '}', obj->begin + 1);
        if (!obj) throw ParseError("attacker reply contains no guess object");
        if (marker == std::string::npos || obj->begin < marker)
            inference_region = reply.substr(0, obj->begin);
    }

    if (const size_t label = inference_region.find("Inference:"); label != std::string::npos)
        inference_region = inference_region.substr(label + 10);
    out.inference = trim(inference_region);

    for (const auto& spec : schema.attributes) {
        if (!obj->value.contains(spec.name)) continue;
        const json& v = obj->value.at(spec.name);
        out.guesses.push_back({spec.name, detail::guess_value_to_string(v),
                               v.is_string() ? v.get<std::string>() : v.dump()});
    }

    // Findings come from attribute names mentioned in the reasoning, each
    // claiming the text up to the next mention.
    const std::string lower = to_lower(inference_region);
    std::vector<std::pair<size_t, std::string>> mentions;
    for (const auto& spec : schema.attributes) {
        const std::string name = to_lower(spec.name);
        size_t from = 0;
        while (true) {
            const size_t p = lower.find(name, from);
            if (p == std::string::npos) break;
            const bool left_ok = p == 0 || !detail::is_word_char(lower[p - 1]);
            const bool right_ok = p + name.size() >= lower.size() ||
                                  !detail::is_word_char(lower[p + name.size()]);
            if (left_ok && right_ok) {
                mentions.emplace_back(p, spec.name);
                break;
            }
            from = p + 1;
        }
    }
    std::sort(mentions.begin(), mentions.end());
    for (size_t i = 0; i < mentions.size(); ++i) {
        const size_t begin = mentions[i].first;
        const size_t end =
            i + 1 < mentions.size() ? mentions[i + 1].first : inference_region.size();
        out.findings.push_back({mentions[i].second, trim(inference_region.substr(begin, end - begin))});
    }

    if (out.findings.empty()) {
        // No attribute named in the prose: credit each guessed attribute with
        // the whole reasoning, or fall back to one catch-all finding.
        for (const auto& g : out.guesses) out.findings.push_back({g.attribute, out.inference});
        if (out.findings.empty()) out.findings.push_back({"inference", out.inference});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Arbitrator reply
// ---------------------------------------------------------------------------

inline std::vector<Verdict> parse_verdicts(const std::string& reply) {
    auto arr = detail::first_parseable(reply, '[', ']');
    while (arr && !arr->value.is_array())
        arr = detail::first_parseable(reply, '[', ']', arr->begin + 1);
    if (!arr) throw ParseError("arbitrator reply contains no json list");

    std::vector<Verdict> out;
    for (const auto& el : arr->value) {
        if (!el.is_object()) continue;
        if (!el.contains("attribute") || !el.at("attribute").is_string()) continue;
        Verdict v;
        v.attribute = el.at("attribute").get<std::string>();
        std::string raw_validity;
        if (el.contains("validity_level") && el.at("validity_level").is_string())
            raw_validity = el.at("validity_level").get<std::string>();
        else if (el.contains("validity") && el.at("validity").is_string())
            raw_validity = el.at("validity").get<std::string>();
        v.validity = validity_from_string(raw_validity);
        if (el.contains("reasoning_evidence") && el.at("reasoning_evidence").is_string())
            v.reasoning_evidence = el.at("reasoning_evidence").get<std::string>();
        if (el.contains("validation_notes") && el.at("validation_notes").is_string())
            v.validation_notes = el.at("validation_notes").get<std::string>();
        if (el.contains("leaked_concept") && el.at("leaked_concept").is_string() &&
            !trim(el.at("leaked_concept").get<std::string>()).empty())
            v.leaked_concept = el.at("leaked_concept").get<std::string>();

        // An actionable verdict with nothing to neutralize cannot be executed.
        if (is_actionable(v.validity) && !v.leaked_concept) {
            v.validity = Validity::Low;
            if (!v.validation_notes.empty()) v.validation_notes += ' ';
            v.validation_notes += "(downgraded: no leaked_concept to act on)";
        }
        out.push_back(std::move(v));
    }
    return out;
}

/// Drops verdicts that do not answer any submitted finding.
inline std::vector<Verdict> keep_known_verdicts(const std::vector<Verdict>& verdicts,
                                                const std::vector<LeakFinding>& findings) {
    std::vector<Verdict> out;
    for (const auto& v : verdicts)
        for (const auto& f : findings)
            if (f.attribute == v.attribute) {
                out.push_back(v);
                break;
            }
    return out;
}

/// The execute/ignore gate: high and medium verdicts become actions, low and
/// invalid ones are discarded. Order follows the verdict list.
inline PolicySet select_policy(const std::vector<LeakFinding>& findings,
                               const std::vector<Verdict>& verdicts) {
    PolicySet policy;
    for (const auto& v : verdicts) {
        if (!is_actionable(v.validity)) continue;
        const LeakFinding* leak = nullptr;
        for (const auto& f : findings)
            if (f.attribute == v.attribute) {
                leak = &f;
                break;
            }
        if (!leak) continue;
        policy.actions.push_back(
            {*leak, v.leaked_concept.value_or(""), v.validity, v.reasoning_evidence});
    }
    return policy;
}

/// Greedy ablation: every finding is executed as if arbitrated high.
inline std::vector<Verdict> synthesize_greedy_verdicts(const std::vector<LeakFinding>& findings) {
    std::vector<Verdict> out;
    for (const auto& f : findings)
        out.push_back({f.attribute, Validity::High, f.reasoning, f.reasoning,
                       "accepted without arbitration"});
    return out;
}

// ---------------------------------------------------------------------------
// Anonymizer reply
// ---------------------------------------------------------------------------

struct AnonymizerReply {
    std::string text;
    bool degraded = false;  // the "#" protocol was missing; text was salvaged
};

namespace detail {

inline std::string strip_wrapping(const std::string& candidate) {
    auto paragraphs = split_paragraphs(candidate);
    while (!paragraphs.empty()) {
        const std::string first = to_lower(trim(split_lines(paragraphs.front()).front()));
        if (first == "here is the anonymized text:") {
            auto lines = split_lines(paragraphs.front());
            lines.erase(lines.begin());
            std::string rest;
            for (const auto& l : lines) {
                if (!rest.empty()) rest += '\n';
                rest += l;
            }
            if (trim(rest).empty())
                paragraphs.erase(paragraphs.begin());
            else
                paragraphs.front() = rest;
            continue;
        }
        break;
    }
    while (!paragraphs.empty() &&
           to_lower(trim(paragraphs.back())).rfind("note:", 0) == 0)
        paragraphs.pop_back();
    std::string out;
    for (const auto& p : paragraphs) {
        if (!out.empty()) out += "\n\n";
        out += p;
    }
    return trim(out);
}

}  // namespace detail

/// The contract asks for: explanation, a line holding "#", then the text.
/// Replies that break the contract are salvaged when possible and flagged.
inline AnonymizerReply parse_anonymizer_reply(const std::string& reply) {
    const auto lines = detail::split_lines(reply);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]) != "#") continue;
        std::string after;
        for (size_t k = i + 1; k < lines.size(); ++k) {
            if (k > i + 1) after += '\n';
            after += lines[k];
        }
        const std::string text = detail::strip_wrapping(after);
        if (text.empty()) throw ParseError("anonymizer reply has no text after '#'");
        return {text, false};
    }

    // No "#" anywhere. Treat the first paragraph as the explanation and take
    // the longest of the rest; a single-paragraph reply is taken whole.
    const auto paragraphs = detail::split_paragraphs(detail::strip_wrapping(reply));
    std::string best;
    if (paragraphs.size() >= 2) {
        for (size_t i = 1; i < paragraphs.size(); ++i)
            if (paragraphs[i].size() > best.size()) best = paragraphs[i];
    } else if (!paragraphs.empty()) {
        best = paragraphs.front();
    }
    best = trim(best);
    if (best.empty()) throw ParseError("anonymizer reply contains no usable text");
    return {best, true};
}

// ---------------------------------------------------------------------------
// Judge reply
// ---------------------------------------------------------------------------

inline JudgeScores parse_judge_reply(const std::string& reply) {
    std::optional<detail::ExtractedJson> obj = detail::first_parseable(reply, '{', '}');
    while (obj && !(obj->value.is_object() && obj->value.contains("readability")))
        obj = detail::first_parseable(reply, '{', '}', obj->begin + 1);
    if (!obj) throw ParseError("judge reply contains no scores object");

    JudgeScores scores;
    auto axis = [&](const char* key) -> double {
        if (!obj->value.contains(key))
            throw ParseError(std::string("judge reply is missing '") + key + "'");
        const json& v = obj->value.at(key);
        const json* score = &v;
        if (v.is_object()) {
            if (v.contains("explanation") && v.at("explanation").is_string())
                scores.explanations[key] = v.at("explanation").get<std::string>();
            if (!v.contains("score"))
                throw ParseError(std::string("judge reply is missing '") + key + "' score");
            score = &v.at("score");
        }
        if (!score->is_number())
            throw ParseError(std::string("judge '") + key + "' score is not a number");
        return score->get<double>();
    };

    const double read = axis("readability");
    const double mean = axis("meaning");
    const double hall = axis("hallucinations");

    auto clamp_ten = [&](double v) {
        double r = std::round(v);
        if (r != v) scores.clamped = true;
        if (r < 1.0) {
            r = 1.0;
            scores.clamped = true;
        }
        if (r > 10.0) {
            r = 10.0;
            scores.clamped = true;
        }
        return static_cast<int>(r);
    };
    scores.readability = clamp_ten(read);
    scores.meaning = clamp_ten(mean);
    scores.hallucination = hall >= 0.5 ? 1 : 0;
    if (hall != 0.0 && hall != 1.0) scores.clamped = true;
    return scores;
}

// ---------------------------------------------------------------------------
// Prompt builders
// ---------------------------------------------------------------------------

namespace detail {

inline std::string attribute_list_phrase(const AttributeSchema& schema) {
    std::string out;
    for (size_t i = 0; i < schema.attributes.size(); ++i) {
        if (i > 0) out += i + 1 == schema.attributes.size() ? " and " : ", ";
        out += schema.attributes[i].name;
    }
    return out;
}

inline std::string attribute_keys_phrase(const AttributeSchema& schema) {
    std::string out;
    for (size_t i = 0; i < schema.attributes.size(); ++i) {
        if (i > 0) out += ", ";
        out += '"' + schema.attributes[i].name + '"';
    }
    return out;
}

inline std::string value_rules_text(const AttributeSchema& schema) {
    std::string out;
    int n = 0;
    for (const auto& spec : schema.attributes) {
        if (n > 0) out += "\n\n";
        out += std::to_string(++n) + ". " + spec.name + ": ";
        switch (spec.kind) {
            case AttributeKind::Integer:
                out += "must be an accurate integer (e.g., 35, not \"35\" or \"30-40\").";
                break;
            case AttributeKind::Enum: {
                out += "must be one of the following exact strings: ";
                for (size_t i = 0; i < spec.enum_values.size(); ++i) {
                    if (i > 0)
                        out += i + 1 == spec.enum_values.size() ? " or " : ", ";
                    out += '"' + spec.enum_values[i] + '"';
                }
                out += '.';
                break;
            }
            case AttributeKind::Place:
                out += "Provide your best guess as a string in the format \"City, Country\" "
                       "(e.g., \"Shanghai, China\") or just \"Country\" (e.g., \"China\").";
                break;
            case AttributeKind::FreeText:
                out += "Provide your best guess as a string.";
                break;
        }
    }
    return out;
}

}  // namespace detail

inline std::vector<ChatMessage> build_attacker_prompt(const PromptTemplate& tmpl,
                                                      const AttributeSchema& schema,
                                                      const std::string& text) {
    std::map<std::string, std::string> values{{"user_response", text}};
    std::string body;
    if (auto it = tmpl.user_bodies.find(schema.schema_id); it != tmpl.user_bodies.end()) {
        body = it->second;
    } else {
        body = tmpl.user_body("");
        values["attribute_list"] = detail::attribute_list_phrase(schema);
        values["attribute_keys"] = detail::attribute_keys_phrase(schema);
        values["value_rules"] = detail::value_rules_text(schema);
    }
    return {{"system", tmpl.system_text}, {"user", render(body, values)}};
}

inline std::vector<ChatMessage> build_arbitrator_prompt(
    const PromptTemplate& tmpl, const std::string& text,
    const std::vector<std::string>& protected_names, const std::string& inference_block) {
    if (trim(inference_block).empty())
        throw TemplateError("refusing to arbitrate an empty inference block");
    const std::map<std::string, std::string> values{
        {"current_comment", text},
        {"attributes_to_protect", json(protected_names).dump()},
        {"attacker_inference_block", inference_block}};
    return {{"system", tmpl.system_text}, {"user", render(tmpl.user_body(""), values)}};
}

/// Feedback the anonymizer sees: one entry per policy action, using the wire
/// spellings "high"/"medium".
inline std::string policy_feedback_json(const PolicySet& policy) {
    json feedback = json::array();
    for (const auto& a : policy.actions) {
        feedback.push_back({{"attribute", a.leak.attribute},
                            {"validity_level", a.validity == Validity::High ? "high" : "medium"},
                            {"reasoning_evidence", a.evidence},
                            {"leaked_concept", a.leaked_concept}});
    }
    return feedback.dump(2);
}

inline std::vector<ChatMessage> build_anonymizer_prompt(const PromptTemplate& tmpl,
                                                        const std::string& text,
                                                        const PolicySet& policy) {
    if (policy.empty())
        throw EmptyPolicyError("anonymizer called with nothing to neutralize");
    const std::map<std::string, std::string> values{{"user_response", text},
                                                    {"feedback", policy_feedback_json(policy)}};
    return {{"system", tmpl.system_text}, {"user", render(tmpl.user_body(""), values)}};
}

inline std::vector<ChatMessage> build_judge_prompt(const PromptTemplate& tmpl,
                                                   const std::string& original,
                                                   const std::string& adapted) {
    const std::map<std::string, std::string> values{{"original_comment_string", original},
                                                    {"adapted_comment_string", adapted}};
    return {{"system", tmpl.system_text}, {"user", render(tmpl.user_body(""), values)}};
}

}  // namespace rlaa
