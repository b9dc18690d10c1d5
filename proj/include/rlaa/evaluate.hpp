#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rlaa/agents.hpp"
#include "rlaa/domain.hpp"
#include "rlaa/errors.hpp"
#include "rlaa/gateway.hpp"
#include "rlaa/metrics.hpp"
#include "rlaa/prompts.hpp"

namespace rlaa {

// ---------------------------------------------------------------------------
// Trajectory evaluation
//
// Privacy is measured by letting a fresh adversary attack each text revision
// and counting correct guesses over the protected set. Utility is measured by
// a judge comparing each revision against the original, plus lexical overlap
// scores. Step 0 is the untouched original: its utility axes are definitional
// (a text is identical to itself), so the judge is never asked about it.
// ---------------------------------------------------------------------------

struct StepEval {
    int step = 0;  // 0 = original text
    std::string text;
    double priv = 0.0;
    double util = 1.0;
    double rouge_l = 1.0;
    double bleu = 1.0;
    JudgeScores judge;
    bool adversary_failed = false;  // attack produced no parseable guess; counts as zero matches

    bool operator==(const StepEval&) const = default;
};

inline void to_json(json& j, const StepEval& s) {
    j = json{{"step", s.step},       {"text", s.text},   {"priv", s.priv},
             {"util", s.util},       {"rouge_l", s.rouge_l}, {"bleu", s.bleu},
             {"judge", s.judge},     {"adversary_failed", s.adversary_failed}};
}

inline void from_json(const json& j, StepEval& s) {
    j.at("step").get_to(s.step);
    j.at("text").get_to(s.text);
    j.at("priv").get_to(s.priv);
    j.at("util").get_to(s.util);
    j.at("rouge_l").get_to(s.rouge_l);
    j.at("bleu").get_to(s.bleu);
    j.at("judge").get_to(s.judge);
    s.adversary_failed = j.value("adversary_failed", false);
}

struct DocumentEval {
    std::string document_id;
    Mode mode = Mode::Rlaa;
    StopReason stop_reason = StopReason::MaxIterations;
    std::vector<StepEval> steps;  // steps[0] is always the original
    std::vector<MarginalRecord> marginals;
    double final_cumulative_mrs = 0.0;
    int adversary_calls = 0;
    int judge_calls = 0;

    bool operator==(const DocumentEval&) const = default;

    const StepEval& original() const { return steps.front(); }
    const StepEval& final() const { return steps.back(); }
};

inline void to_json(json& j, const DocumentEval& d) {
    j = json{{"document_id", d.document_id},
             {"mode", to_string(d.mode)},
             {"stop_reason", to_string(d.stop_reason)},
             {"steps", d.steps},
             {"marginals", d.marginals},
             {"final_cumulative_mrs", d.final_cumulative_mrs},
             {"adversary_calls", d.adversary_calls},
             {"judge_calls", d.judge_calls}};
}

inline void from_json(const json& j, DocumentEval& d) {
    j.at("document_id").get_to(d.document_id);
    d.mode = mode_from_string(j.at("mode").get<std::string>());
    d.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
    j.at("steps").get_to(d.steps);
    j.at("marginals").get_to(d.marginals);
    j.at("final_cumulative_mrs").get_to(d.final_cumulative_mrs);
    d.adversary_calls = j.value("adversary_calls", 0);
    d.judge_calls = j.value("judge_calls", 0);
}

struct EvalContext {
    AttributeSchema schema;
    PromptTemplate attacker_template;  // the adversary reuses the attacker role
    PromptTemplate judge_template;
    BackendPtr adversary;
    BackendPtr judge;
    GenerationParams adversary_params{0.0, std::nullopt, 1024};
    GenerationParams judge_params{0.0, std::nullopt, 1024};
    bool per_step = true;  // false: evaluate only the original-to-final transition
};

namespace detail {

struct EvalMemo {
    std::map<std::string, std::pair<double, bool>> priv_by_text;  // value, failed
    std::map<std::string, JudgeScores> judge_by_text;
};

inline std::pair<double, bool> adversary_priv(EvalContext& ctx, EvalMemo& memo,
                                              const Document& doc, const std::string& text,
                                              int& calls) {
    if (auto it = memo.priv_by_text.find(text); it != memo.priv_by_text.end()) return it->second;
    const auto messages = build_attacker_prompt(ctx.attacker_template, ctx.schema, text);
    const std::string raw = ctx.adversary->complete(messages, ctx.adversary_params);
    ++calls;
    std::pair<double, bool> out{0.0, false};
    try {
        const AttackerReply reply = parse_attacker_reply(raw, ctx.schema);
        out.first = priv_score(reply.guesses, doc, ctx.schema);
    } catch (const ParseError&) {
        // No parseable guess is a failed attack: zero matches by definition.
        out = {0.0, true};
    }
    memo.priv_by_text.emplace(text, out);
    return out;
}

inline JudgeScores judge_utility(EvalContext& ctx, EvalMemo& memo, const std::string& original,
                                 const std::string& candidate, int& calls) {
    if (candidate == original) {
        JudgeScores perfect;
        perfect.readability = 10;
        perfect.meaning = 10;
        perfect.hallucination = 1;
        return perfect;
    }
    if (auto it = memo.judge_by_text.find(candidate); it != memo.judge_by_text.end())
        return it->second;
    const auto messages = build_judge_prompt(ctx.judge_template, original, candidate);
    const std::string raw = ctx.judge->complete(messages, ctx.judge_params);
    ++calls;
    const JudgeScores scores = parse_judge_reply(raw);
    memo.judge_by_text.emplace(candidate, scores);
    return scores;
}

}  // namespace detail

inline DocumentEval evaluate_document(EvalContext& ctx, const Document& doc,
                                      const Trajectory& trajectory) {
    if (trajectory.document_id != doc.id)
        throw DomainError("trajectory belongs to document '" + trajectory.document_id +
                          "', not '" + doc.id + "'");

    DocumentEval eval;
    eval.document_id = doc.id;
    eval.mode = trajectory.mode;
    eval.stop_reason = trajectory.stop_reason;

    std::vector<std::string> texts{doc.original_text};
    if (ctx.per_step) {
        for (const auto& record : trajectory.records) texts.push_back(record.text_after);
    } else if (!trajectory.records.empty()) {
        texts.push_back(trajectory.final_text);
    }

    detail::EvalMemo memo;
    for (size_t i = 0; i < texts.size(); ++i) {
        StepEval step;
        step.step = static_cast<int>(i);
        step.text = texts[i];
        const auto [priv, failed] =
            detail::adversary_priv(ctx, memo, doc, texts[i], eval.adversary_calls);
        step.priv = priv;
        step.adversary_failed = failed;
        step.judge = detail::judge_utility(ctx, memo, doc.original_text, texts[i],
                                           eval.judge_calls);
        step.util = util_score(step.judge);
        step.rouge_l = rouge_l_f1(doc.original_text, texts[i]);
        step.bleu = bleu(doc.original_text, texts[i]);
        eval.steps.push_back(std::move(step));
    }

    std::vector<double> privacy_levels, utility_levels;
    for (const auto& s : eval.steps) {
        privacy_levels.push_back(s.priv);
        utility_levels.push_back(s.util);
    }
    if (eval.steps.size() > 1) {
        eval.marginals = marginal_series(privacy_levels, utility_levels);
        eval.final_cumulative_mrs = cumulative_mrs(eval.marginals);
    }
    return eval;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

/// Macro-averaged corpus summary over each document's final revision.
inline json make_summary(const std::vector<DocumentEval>& evals) {
    if (evals.empty()) throw DomainError("cannot summarize an empty evaluation set");
    double util = 0, priv = 0, rouge = 0, bleu_sum = 0, mean = 0, read = 0, hall = 0;
    double priv_original = 0, cum = 0;
    int with_transitions = 0;
    for (const auto& e : evals) {
        const StepEval& last = e.final();
        util += last.util;
        priv += last.priv;
        rouge += last.rouge_l;
        bleu_sum += last.bleu;
        read += last.judge.readability;
        mean += last.judge.meaning;
        hall += last.judge.hallucination;
        priv_original += e.original().priv;
        if (!e.marginals.empty()) {
            cum += e.final_cumulative_mrs;
            ++with_transitions;
        }
    }
    const double n = static_cast<double>(evals.size());
    return json{{"UTIL", util / n},
                {"PRIV", priv / n},
                {"ROUGE", rouge / n},
                {"BLEU", bleu_sum / n},
                {"MEAN", mean / n},
                {"READ", read / n},
                {"HALL", hall / n},
                {"priv_original", priv_original / n},
                {"cumulative_mrs_final",
                 with_transitions > 0 ? cum / with_transitions : 0.0},
                {"documents", evals.size()}};
}

/// Per-step marginal table across the corpus. Documents that stopped early
/// keep contributing their frozen totals to the pooled column.
inline std::string mrs_table(const std::vector<DocumentEval>& evals) {
    size_t max_steps = 0;
    for (const auto& e : evals) max_steps = std::max(max_steps, e.marginals.size());

    auto fmt = [](double v) {
        if (std::isinf(v)) return std::string("inf");
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };

    std::string out = "step,delta_p,delta_c,mrs,cumulative_mrs,cumulative_mrs_pooled,docs\n";
    for (size_t t = 1; t <= max_steps; ++t) {
        double dp = 0, dc = 0, cum_macro = 0;
        double pooled_dp = 0, pooled_dc = 0;
        int docs = 0;
        for (const auto& e : evals) {
            const size_t have = std::min(t, e.marginals.size());
            for (size_t k = 0; k < have; ++k) {
                pooled_dp += e.marginals[k].delta_p;
                pooled_dc += e.marginals[k].delta_c;
            }
            if (e.marginals.size() < t) continue;
            ++docs;
            dp += e.marginals[t - 1].delta_p;
            dc += e.marginals[t - 1].delta_c;
            double doc_dp = 0, doc_dc = 0;
            for (size_t k = 0; k < t; ++k) {
                doc_dp += e.marginals[k].delta_p;
                doc_dc += e.marginals[k].delta_c;
            }
            cum_macro += doc_dc / std::max(doc_dp, kEpsilonP);
        }
        const double mean_dp = docs > 0 ? dp / docs : 0.0;
        const double mean_dc = docs > 0 ? dc / docs : 0.0;
        const double mrs = mean_dp > kEpsilonP
                               ? (mean_dc > 0.0 ? mean_dc / mean_dp : 0.0)
                               : kMrsInfinity;
        out += std::to_string(t) + ',' + fmt(mean_dp) + ',' + fmt(mean_dc) + ',' + fmt(mrs) +
               ',' + fmt(docs > 0 ? cum_macro / docs : 0.0) + ',' +
               fmt(pooled_dc / std::max(pooled_dp, kEpsilonP)) + ',' + std::to_string(docs) +
               '\n';
    }
    return out;
}

}  // namespace rlaa
