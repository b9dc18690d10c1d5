#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rlaa/agents.hpp"
#include "rlaa/domain.hpp"
#include "rlaa/errors.hpp"
#include "rlaa/gateway.hpp"
#include "rlaa/prompts.hpp"

namespace rlaa {

struct RunContext {
    Mode mode = Mode::Rlaa;
    int max_iterations = 10;
    AttributeSchema schema;
    PromptTemplate attacker_template;
    PromptTemplate arbitrator_template;  // unused in greedy mode
    PromptTemplate anonymizer_template;
    BackendPtr attacker;
    BackendPtr arbitrator;  // may be null in greedy mode
    BackendPtr anonymizer;
    GenerationParams attacker_params{0.1, 0.9, 1024};
    GenerationParams arbitrator_params{0.0, std::nullopt, 1024};
    GenerationParams anonymizer_params{0.5, 0.9, 512};
};

struct DocumentRun {
    Trajectory trajectory;
    std::optional<std::string> failure;  // set when the loop died mid-flight
};

namespace detail {

inline std::vector<TranscriptMessage> to_transcript(const std::vector<ChatMessage>& messages) {
    std::vector<TranscriptMessage> out;
    out.reserve(messages.size());
    for (const auto& m : messages) out.push_back({m.role, m.content});
    return out;
}

}  // namespace detail

/// Duplicate findings for one attribute collapse to the one with the most
/// reasoning attached.
inline std::vector<LeakFinding> merge_findings(const std::vector<LeakFinding>& findings) {
    std::vector<LeakFinding> out;
    for (const auto& f : findings) {
        LeakFinding* existing = nullptr;
        for (auto& o : out)
            if (o.attribute == f.attribute) {
                existing = &o;
                break;
            }
        if (!existing)
            out.push_back(f);
        else if (f.reasoning.size() > existing->reasoning.size())
            existing->reasoning = f.reasoning;
    }
    return out;
}

/// One full adversarial loop over a document. Never throws for per-agent
/// problems: those end the loop early with stop_reason agent_failure and the
/// error text in `failure`, keeping the last good text as the result.
inline DocumentRun run_document(const RunContext& ctx, const Document& doc) {
    DocumentRun run;
    Trajectory& traj = run.trajectory;
    traj.document_id = doc.id;
    traj.mode = ctx.mode;
    traj.stop_reason = StopReason::MaxIterations;
    traj.final_text = doc.original_text;

    std::vector<std::string> protected_names;
    for (const auto& [name, value] : protected_set(doc, ctx.schema)) {
        (void)value;
        protected_names.push_back(name);
    }

    std::string text = doc.original_text;
    for (int t = 0; t < ctx.max_iterations; ++t) {
        IterationRecord record;
        record.t = t;
        record.text_before = text;
        const auto started = std::chrono::steady_clock::now();

        try {
            const auto attacker_prompt =
                build_attacker_prompt(ctx.attacker_template, ctx.schema, text);
            const std::string attacker_reply =
                ctx.attacker->complete(attacker_prompt, ctx.attacker_params);
            record.agent_transcripts.push_back(
                {"attacker", detail::to_transcript(attacker_prompt), attacker_reply});

            const auto parsed = parse_attacker_reply(attacker_reply, ctx.schema);
            record.findings = merge_findings(parsed.findings);
            record.guesses = parsed.guesses;

            if (ctx.mode == Mode::Greedy) {
                record.verdicts = synthesize_greedy_verdicts(record.findings);
            } else if (trim(parsed.inference).empty()) {
                // Nothing arbitrable: a bare guess object carries no reasoning
                // whose validity could be judged, so nothing is actionable.
                record.verdicts = {};
            } else {
                const auto arbitrator_prompt = build_arbitrator_prompt(
                    ctx.arbitrator_template, text, protected_names, parsed.inference);
                const std::string arbitrator_reply =
                    ctx.arbitrator->complete(arbitrator_prompt, ctx.arbitrator_params);
                record.agent_transcripts.push_back(
                    {"arbitrator", detail::to_transcript(arbitrator_prompt), arbitrator_reply});
                record.verdicts =
                    keep_known_verdicts(parse_verdicts(arbitrator_reply), record.findings);
            }
            record.policy = select_policy(record.findings, record.verdicts);

            if (record.policy.empty()) {
                // Fixed point: with no executed edits the next state equals
                // this one, so later iterations cannot differ. Stop here.
                record.text_after = text;
                record.wall_clock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                           std::chrono::steady_clock::now() - started)
                                           .count();
                traj.records.push_back(std::move(record));
                traj.stop_reason = StopReason::EmptyPolicy;
                break;
            }

            const auto anonymizer_prompt =
                build_anonymizer_prompt(ctx.anonymizer_template, text, record.policy);
            const std::string anonymizer_reply =
                ctx.anonymizer->complete(anonymizer_prompt, ctx.anonymizer_params);
            record.agent_transcripts.push_back(
                {"anonymizer", detail::to_transcript(anonymizer_prompt), anonymizer_reply});
            record.text_after = parse_anonymizer_reply(anonymizer_reply).text;
        } catch (const Error& e) {
            record.verdicts.clear();
            record.policy.actions.clear();
            record.text_after = record.text_before;
            record.wall_clock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                       std::chrono::steady_clock::now() - started)
                                       .count();
            traj.records.push_back(std::move(record));
            traj.stop_reason = StopReason::AgentFailure;
            run.failure = e.what();
            break;
        }

        record.wall_clock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - started)
                                   .count();
        text = record.text_after;
        traj.records.push_back(std::move(record));
    }

    if (!traj.records.empty()) traj.final_text = traj.records.back().text_after;
    return run;
}

using ProgressCallback =
    std::function<void(size_t done, size_t total, const std::string& document_id)>;

/// Runs a corpus with a worker pool. Outcomes land in input order and one
/// document's crash cannot take down its neighbors.
inline std::vector<DocumentRun> run_corpus(const RunContext& ctx,
                                           const std::vector<Document>& documents,
                                           int parallelism,
                                           const ProgressCallback& progress = nullptr) {
    if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
    std::vector<DocumentRun> outcomes(documents.size());
    std::atomic<size_t> next{0};
    std::atomic<size_t> done{0};
    std::mutex progress_mu;

    auto worker = [&] {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= documents.size()) return;
            try {
                outcomes[i] = run_document(ctx, documents[i]);
            } catch (const std::exception& e) {
                Trajectory traj;
                traj.document_id = documents[i].id;
                traj.mode = ctx.mode;
                traj.final_text = documents[i].original_text;
                traj.stop_reason = StopReason::AgentFailure;
                outcomes[i] = {std::move(traj), std::string(e.what())};
            }
            const size_t finished = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(progress_mu);
                progress(finished, documents.size(), documents[i].id);
            }
        }
    };

    const size_t n_workers =
        std::min<size_t>(static_cast<size_t>(parallelism), std::max<size_t>(documents.size(), 1));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return outcomes;
}

// ---------------------------------------------------------------------------
// Trajectory persistence
// ---------------------------------------------------------------------------

inline void save_trajectory(const std::filesystem::path& path, const DocumentRun& run) {
    json j = run.trajectory;
    if (run.failure) j["failure"] = *run.failure;
    write_file(path, j.dump(2) + "\n");
}

inline DocumentRun load_trajectory(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ParseError("trajectory file " + path.string() + " is not valid json: " + e.what());
    }
    DocumentRun run;
    try {
        run.trajectory = j.get<Trajectory>();
    } catch (const json::exception& e) {
        throw ParseError("trajectory file " + path.string() + " is malformed: " + e.what());
    }
    if (j.contains("failure") && j.at("failure").is_string())
        run.failure = j.at("failure").get<std::string>();
    return run;
}

}  // namespace rlaa
