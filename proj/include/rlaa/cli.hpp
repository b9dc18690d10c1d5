#pragma once

#include <atomic>
#include <cctype>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "rlaa/config.hpp"
#include "rlaa/econ_sim.hpp"
#include "rlaa/evaluate.hpp"
#include "rlaa/orchestrator.hpp"

namespace rlaa {

// ---------------------------------------------------------------------------
// Command layer
//
// Each command is a plain function over an options struct plus two output
// streams, so tests can drive them in-process. Exit codes: 0 success,
// 1 partial failure (some documents failed, or validation found violations),
// 2 configuration error, 3 dataset or run-directory error, 4 comparison
// refused because the runs cover different datasets, 5 anything else.
// ---------------------------------------------------------------------------

// ------------------------------- datasets ---------------------------------

struct DatasetEntry {
    Document document;
    size_t line = 0;  // 1-based line in the source file
};

/// Reads a JSONL dataset: one object per line with "id", "text", "schema",
/// and optional "attributes". Unknown keys are ignored.
inline std::vector<DatasetEntry> load_dataset_entries(const std::string& path) {
    const std::string body = read_file(path);
    std::vector<DatasetEntry> entries;
    size_t line_no = 0;
    for (const auto& line : split(body, '\n')) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("dataset line " + std::to_string(line_no) +
                             " is not valid JSON: " + e.what());
        }
        if (!j.is_object())
            throw ParseError("dataset line " + std::to_string(line_no) + " is not an object");
        DatasetEntry entry;
        entry.line = line_no;
        Document& doc = entry.document;
        doc.id = j.value("id", "");
        if (doc.id.empty())
            throw ParseError("dataset line " + std::to_string(line_no) + " is missing 'id'");
        if (!j.contains("text") || !j.at("text").is_string())
            throw ParseError("dataset line " + std::to_string(line_no) + " is missing 'text'");
        doc.original_text = j.at("text").get<std::string>();
        doc.schema_id = j.value("schema", "");
        if (doc.schema_id.empty())
            throw ParseError("dataset line " + std::to_string(line_no) + " is missing 'schema'");
        if (j.contains("attributes")) {
            const json& attrs = j.at("attributes");
            if (!attrs.is_object())
                throw ParseError("dataset line " + std::to_string(line_no) +
                                 ": 'attributes' must be an object");
            for (auto it = attrs.begin(); it != attrs.end(); ++it)
                doc.ground_truth[it.key()] = detail::guess_value_to_string(it.value());
        }
        entries.push_back(std::move(entry));
    }
    if (entries.empty()) throw ParseError("dataset " + path + " holds no documents");
    return entries;
}

inline std::vector<Document> load_dataset(const std::string& path) {
    std::vector<Document> docs;
    for (auto& entry : load_dataset_entries(path)) docs.push_back(std::move(entry.document));
    return docs;
}

// ------------------------------ run layout --------------------------------

struct DatasetInfo {
    std::string path;
    std::string digest;
    size_t documents = 0;

    bool operator==(const DatasetInfo&) const = default;
};

inline void to_json(json& j, const DatasetInfo& d) {
    j = json{{"path", d.path}, {"digest", d.digest}, {"documents", d.documents}};
}

inline void from_json(const json& j, DatasetInfo& d) {
    j.at("path").get_to(d.path);
    j.at("digest").get_to(d.digest);
    j.at("documents").get_to(d.documents);
}

struct RunManifest {
    std::string run_id;
    std::string created_at;
    std::string mode;
    DatasetInfo dataset;
    std::map<std::string, std::string> template_digests;   // role name to content digest
    std::vector<std::string> document_ids;                 // input order
    std::map<std::string, std::string> trajectory_files;   // document id to relative path
    int failures = 0;

    bool operator==(const RunManifest&) const = default;
};

inline void to_json(json& j, const RunManifest& m) {
    j = json{{"run_id", m.run_id},
             {"created_at", m.created_at},
             {"mode", m.mode},
             {"dataset", m.dataset},
             {"templates", m.template_digests},
             {"document_ids", m.document_ids},
             {"trajectory_files", m.trajectory_files},
             {"failures", m.failures}};
}

inline void from_json(const json& j, RunManifest& m) {
    j.at("run_id").get_to(m.run_id);
    j.at("created_at").get_to(m.created_at);
    j.at("mode").get_to(m.mode);
    j.at("dataset").get_to(m.dataset);
    j.at("templates").get_to(m.template_digests);
    j.at("document_ids").get_to(m.document_ids);
    j.at("trajectory_files").get_to(m.trajectory_files);
    j.at("failures").get_to(m.failures);
}

namespace detail {

inline std::string sanitize_component(const std::string& id) {
    std::string out;
    for (const char ch : id) {
        const auto uc = static_cast<unsigned char>(ch);
        out += (std::isalnum(uc) || ch == '.' || ch == '_' || ch == '-') ? ch : '_';
    }
    if (out.empty() || out == "." || out == "..") out = "doc";
    return out;
}

/// Maps document ids to distinct relative file names under a run directory.
inline std::map<std::string, std::string> plan_filenames(const std::vector<Document>& docs,
                                                         const std::string& subdir) {
    std::map<std::string, std::string> files;
    std::set<std::string> taken;
    for (const auto& doc : docs) {
        std::string base = sanitize_component(doc.id);
        std::string name = base;
        for (int n = 2; taken.count(name); ++n) name = base + "-" + std::to_string(n);
        taken.insert(name);
        files[doc.id] = subdir + "/" + name + ".json";
    }
    return files;
}

inline std::string make_run_id() {
    std::string ts = iso8601_now();
    std::erase(ts, '-');
    std::erase(ts, ':');
    std::random_device rd;
    const auto entropy = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    return ts + "-" + to_hex(entropy).substr(8);
}

inline int guard(std::ostream& err, const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        err << "data error: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return 3;
    } catch (const DomainError& e) {
        err << "data error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 5;
    }
}

inline void role_record_paths(RunConfig& cfg, const std::filesystem::path& run_dir) {
    const auto set = [&](RoleConfig& role, const char* name) {
        role.backend.record_cassette =
            (run_dir / "cassettes" / (std::string(name) + ".json")).string();
    };
    set(cfg.attacker, "attacker");
    set(cfg.arbitrator, "arbitrator");
    set(cfg.anonymizer, "anonymizer");
    set(cfg.judge, "judge");
    set(cfg.adversary, "adversary");
}

inline std::map<std::string, std::string> template_digests(const RunConfig& cfg) {
    std::map<std::string, std::string> digests;
    digests["attacker"] = content_digest(read_file(cfg.attacker.template_path));
    digests["arbitrator"] = content_digest(read_file(cfg.arbitrator.template_path));
    digests["anonymizer"] = content_digest(read_file(cfg.anonymizer.template_path));
    digests["judge"] = content_digest(read_file(cfg.judge.template_path));
    return digests;
}

}  // namespace detail

// ------------------------------- anonymize --------------------------------

struct AnonymizeOptions {
    std::string config_path;
    std::string dataset_path;
    std::string out_dir;  // empty: runs/<run id>
    std::string mode_override;
    int max_iterations_override = 0;  // 0: keep config value
    int parallelism = 1;
    bool record = false;
    bool quiet = false;
};

/// Shared engine behind `anonymize` and `replay`: the config is already
/// loaded and resolved, possibly rewritten for replay.
inline int run_anonymize(RunConfig cfg, const std::string& dataset_path, std::string out_dir,
                         int parallelism, bool record, bool quiet, std::ostream& out,
                         std::ostream& err) {
    const std::string dataset_body = read_file(dataset_path);
    const std::vector<DatasetEntry> entries = load_dataset_entries(dataset_path);
    const AttributeSchema schema = load_schema(cfg.schema_path);

    std::vector<std::string> violations;
    std::set<std::string> seen_ids;
    std::vector<Document> documents;
    for (const auto& entry : entries) {
        for (const auto& v : validate_document(entry.document, schema))
            violations.push_back("line " + std::to_string(entry.line) + " (" +
                                 entry.document.id + "): " + v);
        if (!seen_ids.insert(entry.document.id).second)
            violations.push_back("line " + std::to_string(entry.line) + ": duplicate id '" +
                                 entry.document.id + "'");
        documents.push_back(entry.document);
    }
    if (!violations.empty()) {
        for (const auto& v : violations) err << v << '\n';
        err << "dataset " << dataset_path << " failed validation\n";
        return 3;
    }

    const std::string run_id = detail::make_run_id();
    if (out_dir.empty()) out_dir = "runs/" + run_id;
    const auto run_dir = std::filesystem::absolute(out_dir);
    std::filesystem::create_directories(run_dir / "trajectories");
    if (record) detail::role_record_paths(cfg, run_dir);

    write_file((run_dir / "config.json").string(), json(cfg).dump(2) + "\n");

    RunContext ctx = make_run_context(cfg);
    ProgressCallback progress;
    if (!quiet)
        progress = [&err](size_t done, size_t total, const std::string& id) {
            err << "[" << done << "/" << total << "] " << id << '\n';
        };
    const std::vector<DocumentRun> outcomes = run_corpus(ctx, documents, parallelism, progress);

    RunManifest manifest;
    manifest.run_id = run_id;
    manifest.created_at = iso8601_now();
    manifest.mode = to_string(cfg.mode);
    manifest.dataset = {std::filesystem::absolute(dataset_path).string(),
                        content_digest(dataset_body), documents.size()};
    manifest.template_digests = detail::template_digests(cfg);
    manifest.trajectory_files = detail::plan_filenames(documents, "trajectories");

    int failures = 0;
    for (size_t i = 0; i < documents.size(); ++i) {
        manifest.document_ids.push_back(documents[i].id);
        save_trajectory(run_dir / manifest.trajectory_files.at(documents[i].id), outcomes[i]);
        if (outcomes[i].failure) {
            ++failures;
            err << "document " << documents[i].id << " failed: " << *outcomes[i].failure
                << '\n';
        }
    }
    manifest.failures = failures;
    write_file((run_dir / "manifest.json").string(), json(manifest).dump(2) + "\n");

    out << "run directory: " << run_dir.string() << '\n';
    out << "documents: " << documents.size() << ", failures: " << failures << '\n';
    if (failures > 0) {
        err << failures << " of " << documents.size() << " documents failed\n";
        return 1;
    }
    return 0;
}

inline int cmd_anonymize(const AnonymizeOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guard(err, [&]() -> int {
        RunConfig cfg = load_run_config(opts.config_path);
        if (!opts.mode_override.empty()) cfg.mode = mode_from_string(opts.mode_override);
        if (opts.max_iterations_override != 0) {
            if (opts.max_iterations_override < 1)
                throw ConfigError("max iterations must be at least 1");
            cfg.max_iterations = opts.max_iterations_override;
        }
        return run_anonymize(cfg, opts.dataset_path, opts.out_dir, opts.parallelism,
                             opts.record, opts.quiet, out, err);
    });
}

// -------------------------------- evaluate --------------------------------

struct EvaluateOptions {
    std::string run_dir;
    bool final_only = false;
    int parallelism = 1;
    bool quiet = false;
};

namespace detail {

inline RunConfig load_run_snapshot(const std::filesystem::path& run_dir) {
    const auto config_path = run_dir / "config.json";
    if (!std::filesystem::exists(config_path))
        throw ParseError(run_dir.string() + " is not a run directory (no config.json)");
    RunConfig cfg = default_run_config();
    try {
        json::parse(read_file(config_path.string())).get_to(cfg);
    } catch (const json::exception& e) {
        throw ParseError("run config snapshot is malformed: " + std::string(e.what()));
    }
    cfg.validate();
    return cfg;
}

inline RunManifest load_manifest(const std::filesystem::path& run_dir) {
    try {
        return json::parse(read_file((run_dir / "manifest.json").string()))
            .get<RunManifest>();
    } catch (const json::exception& e) {
        throw ParseError("run manifest is malformed: " + std::string(e.what()));
    }
}

inline void check_dataset_digest(const RunManifest& manifest, const std::string& body) {
    if (content_digest(body) != manifest.dataset.digest)
        throw ParseError("dataset " + manifest.dataset.path +
                         " changed since the run was created (digest mismatch)");
}

}  // namespace detail

inline int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guard(err, [&]() -> int {
        const auto run_dir = std::filesystem::absolute(opts.run_dir);
        const RunConfig cfg = detail::load_run_snapshot(run_dir);
        const RunManifest manifest = detail::load_manifest(run_dir);
        const std::string dataset_body = read_file(manifest.dataset.path);
        detail::check_dataset_digest(manifest, dataset_body);

        std::map<std::string, Document> by_id;
        for (auto& doc : load_dataset(manifest.dataset.path)) by_id[doc.id] = std::move(doc);

        struct Job {
            Document document;
            Trajectory trajectory;
            std::string eval_file;
        };
        std::vector<Job> jobs;
        for (const auto& id : manifest.document_ids) {
            const auto doc_it = by_id.find(id);
            if (doc_it == by_id.end())
                throw ParseError("document '" + id + "' is missing from the dataset");
            const auto file_it = manifest.trajectory_files.find(id);
            if (file_it == manifest.trajectory_files.end())
                throw ParseError("manifest lists no trajectory for '" + id + "'");
            const auto path = run_dir / file_it->second;
            if (!std::filesystem::exists(path))
                throw ParseError("trajectory file " + path.string() + " is missing");
            Job job;
            job.document = doc_it->second;
            job.trajectory = load_trajectory(path).trajectory;
            job.eval_file =
                "eval/" + std::filesystem::path(file_it->second).filename().string();
            jobs.push_back(std::move(job));
        }

        EvalContext ectx = make_eval_context(cfg, !opts.final_only);
        std::vector<std::optional<DocumentEval>> evals(jobs.size());
        std::vector<std::string> eval_errors(jobs.size());
        std::atomic<size_t> next{0};
        std::atomic<size_t> finished{0};
        std::mutex progress_mu;
        auto worker = [&]() {
            for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
                try {
                    evals[i] = evaluate_document(ectx, jobs[i].document, jobs[i].trajectory);
                } catch (const std::exception& e) {
                    eval_errors[i] = e.what();
                }
                const size_t done = finished.fetch_add(1) + 1;
                if (!opts.quiet) {
                    std::lock_guard lock(progress_mu);
                    err << "[" << done << "/" << jobs.size() << "] " << jobs[i].document.id
                        << '\n';
                }
            }
        };
        const int n_workers = std::max(
            1, std::min<int>(opts.parallelism, static_cast<int>(jobs.size())));
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();

        std::vector<DocumentEval> done;
        int failed = 0;
        for (size_t i = 0; i < jobs.size(); ++i) {
            if (evals[i]) {
                write_file((run_dir / jobs[i].eval_file).string(),
                           json(*evals[i]).dump(2) + "\n");
                done.push_back(*evals[i]);
            } else {
                ++failed;
                err << "evaluation of " << jobs[i].document.id
                    << " failed: " << eval_errors[i] << '\n';
            }
        }
        if (done.empty()) throw DomainError("no document evaluated successfully");

        json summary = make_summary(done);
        summary["run_id"] = manifest.run_id;
        summary["final_only"] = opts.final_only;
        summary["eval_failures"] = failed;
        write_file((run_dir / "summary.json").string(), summary.dump(2) + "\n");
        write_file((run_dir / "eval" / "mrs.csv").string(), mrs_table(done));

        for (const char* key : {"UTIL", "PRIV", "ROUGE", "BLEU", "READ", "MEAN", "HALL"})
            out << key << ": " << summary.at(key).get<double>() << '\n';
        out << "priv_original: " << summary.at("priv_original").get<double>() << '\n';
        out << "cumulative_mrs_final: "
            << summary.at("cumulative_mrs_final").get<double>() << '\n';

        if (failed > 0) {
            err << failed << " of " << jobs.size() << " documents failed evaluation\n";
            return 1;
        }
        return 0;
    });
}

// -------------------------------- compare ---------------------------------

struct CompareOptions {
    std::string baseline_dir;
    std::string candidate_dir;
    std::string plot_csv;  // optional: merged cumulative-MRS curve
};

inline int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guard(err, [&]() -> int {
        const auto base_dir = std::filesystem::absolute(opts.baseline_dir);
        const auto cand_dir = std::filesystem::absolute(opts.candidate_dir);
        const RunManifest base_manifest = detail::load_manifest(base_dir);
        const RunManifest cand_manifest = detail::load_manifest(cand_dir);
        if (base_manifest.dataset.digest != cand_manifest.dataset.digest) {
            err << "runs cover different datasets (" << base_manifest.dataset.digest
                << " vs " << cand_manifest.dataset.digest << ")\n";
            return 4;
        }

        auto load_summary = [](const std::filesystem::path& dir) {
            const auto path = dir / "summary.json";
            if (!std::filesystem::exists(path))
                throw ParseError(dir.string() + " has no summary.json; run evaluate first");
            return json::parse(read_file(path.string()));
        };
        const json base = load_summary(base_dir);
        const json cand = load_summary(cand_dir);

        out << "metric,baseline,candidate,delta\n";
        for (const char* key : {"UTIL", "PRIV", "ROUGE", "BLEU", "READ", "MEAN", "HALL",
                                "priv_original", "cumulative_mrs_final"}) {
            const double b = base.at(key).get<double>();
            const double c = cand.at(key).get<double>();
            out << key << ',' << b << ',' << c << ',' << (c - b) << '\n';
        }

        const double b_cum = base.at("cumulative_mrs_final").get<double>();
        const double c_cum = cand.at("cumulative_mrs_final").get<double>();
        try {
            out << "rationality_gain_percent," << rationality_gain(b_cum, c_cum) << '\n';
        } catch (const DomainError&) {
            out << "rationality_gain_percent,n/a\n";
        }

        if (!opts.plot_csv.empty()) {
            auto pooled_by_step = [](const std::filesystem::path& dir) {
                std::map<int, std::string> curve;
                const auto path = dir / "eval" / "mrs.csv";
                if (!std::filesystem::exists(path)) return curve;
                const auto lines = split(read_file(path.string()), '\n');
                for (size_t i = 1; i < lines.size(); ++i) {
                    if (trim(lines[i]).empty()) continue;
                    const auto fields = split(lines[i], ',');
                    if (fields.size() >= 6) curve[std::stoi(fields[0])] = fields[5];
                }
                return curve;
            };
            const auto base_curve = pooled_by_step(base_dir);
            const auto cand_curve = pooled_by_step(cand_dir);
            std::set<int> steps;
            for (const auto& [t, _] : base_curve) steps.insert(t);
            for (const auto& [t, _] : cand_curve) steps.insert(t);
            std::string csv = "step,baseline_cumulative_mrs,candidate_cumulative_mrs\n";
            for (const int t : steps) {
                const auto b = base_curve.find(t);
                const auto c = cand_curve.find(t);
                csv += std::to_string(t) + ',' +
                       (b != base_curve.end() ? b->second : "") + ',' +
                       (c != cand_curve.end() ? c->second : "") + '\n';
            }
            write_file(opts.plot_csv, csv);
        }
        return 0;
    });
}

// -------------------------------- simulate --------------------------------

struct SimulateOptions {
    std::string config_path;  // empty: built-in defaults
    std::string out_dir;      // empty: print only
    std::string sweep;        // comma-separated accuracies, e.g. "1.0,0.9,0.7"
};

inline int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guard(err, [&]() -> int {
        SimConfig cfg;
        if (!opts.config_path.empty()) {
            try {
                json::parse(read_file(opts.config_path)).get_to(cfg);
            } catch (const json::exception& e) {
                throw ConfigError("simulation config is malformed: " + std::string(e.what()));
            }
        }
        const SimResult result = run_simulation(cfg);

        out << "price interval: [" << result.lambda_lower << ", ";
        if (std::isinf(result.lambda_upper))
            out << "inf";
        else
            out << result.lambda_upper;
        out << ")\n";
        out << "greedy cumulative MRS: " << result.greedy.final_cumulative_mrs << '\n';
        out << "arbitrated cumulative MRS: " << result.arbitrated.final_cumulative_mrs;
        if (result.arbitrated.stop_step > 0)
            out << " (stopped at step " << result.arbitrated.stop_step << ")";
        out << '\n';
        if (result.arbitrated.final_cumulative_mrs > 0.0)
            out << "greedy/arbitrated ratio: "
                << result.greedy.final_cumulative_mrs /
                       result.arbitrated.final_cumulative_mrs
                << '\n';

        if (!opts.out_dir.empty()) {
            const auto dir = std::filesystem::absolute(opts.out_dir);
            write_file((dir / "series.csv").string(), series_csv(result));
            write_file((dir / "result.json").string(), json(result).dump(2) + "\n");
        }

        if (!opts.sweep.empty()) {
            std::vector<double> ps;
            for (const auto& field : split(opts.sweep, ',')) {
                try {
                    ps.push_back(std::stod(trim(field)));
                } catch (const std::exception&) {
                    throw ConfigError("sweep value '" + field + "' is not a number");
                }
            }
            const auto rows = sweep_accuracy(cfg, ps);
            const std::string csv = sweep_csv(rows);
            out << csv;
            if (!opts.out_dir.empty())
                write_file((std::filesystem::absolute(opts.out_dir) / "sweep.csv").string(),
                           csv);
        }
        return 0;
    });
}

// -------------------------------- validate --------------------------------

struct ValidateOptions {
    std::string dataset_path;
    std::string schema_path;
};

inline int cmd_validate(const ValidateOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guard(err, [&]() -> int {
        const AttributeSchema schema = load_schema(opts.schema_path);
        const std::vector<DatasetEntry> entries = load_dataset_entries(opts.dataset_path);
        std::vector<std::string> violations;
        std::set<std::string> seen_ids;
        for (const auto& entry : entries) {
            for (const auto& v : validate_document(entry.document, schema))
                violations.push_back("line " + std::to_string(entry.line) + " (" +
                                     entry.document.id + "): " + v);
            if (!seen_ids.insert(entry.document.id).second)
                violations.push_back("line " + std::to_string(entry.line) +
                                     ": duplicate id '" + entry.document.id + "'");
        }
        if (!violations.empty()) {
            for (const auto& v : violations) out << v << '\n';
            err << violations.size() << " violation(s) in " << opts.dataset_path << '\n';
            return 1;
        }
        out << "ok: " << entries.size() << " documents\n";
        return 0;
    });
}

// --------------------------------- replay ---------------------------------

struct ReplayOptions {
    std::string run_dir;
    std::string out_dir;  // empty: a fresh runs/<run id>
    int parallelism = 1;
    bool quiet = false;
};

inline int cmd_replay(const ReplayOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guard(err, [&]() -> int {
        const auto run_dir = std::filesystem::absolute(opts.run_dir);
        RunConfig cfg = detail::load_run_snapshot(run_dir);
        const RunManifest manifest = detail::load_manifest(run_dir);

        const auto flip = [](RoleConfig& role, const char* name) {
            if (!role.backend.record_cassette.empty()) {
                role.backend.kind = BackendKind::Replay;
                role.backend.cassette = role.backend.record_cassette;
                role.backend.record_cassette.clear();
                role.backend.script.clear();
            } else if (role.backend.kind != BackendKind::Replay) {
                throw ConfigError(std::string(name) +
                                  " recorded no cassette; re-run anonymize with --record");
            }
        };
        flip(cfg.attacker, "attacker");
        flip(cfg.arbitrator, "arbitrator");
        flip(cfg.anonymizer, "anonymizer");
        // The adversary and judge only matter at evaluation time; leave them
        // untouched unless they recorded, so replayed runs stay evaluable.
        if (!cfg.adversary.backend.record_cassette.empty()) flip(cfg.adversary, "adversary");
        if (!cfg.judge.backend.record_cassette.empty()) flip(cfg.judge, "judge");

        const std::string dataset_body = read_file(manifest.dataset.path);
        detail::check_dataset_digest(manifest, dataset_body);

        return run_anonymize(cfg, manifest.dataset.path, opts.out_dir, opts.parallelism,
                             /*record=*/false, opts.quiet, out, err);
    });
}

}  // namespace rlaa
