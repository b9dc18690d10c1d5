#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>

#include "rlaa/domain.hpp"
#include "rlaa/errors.hpp"
#include "rlaa/evaluate.hpp"
#include "rlaa/gateway.hpp"
#include "rlaa/orchestrator.hpp"
#include "rlaa/prompts.hpp"
#include "rlaa/util.hpp"

namespace rlaa {

// ---------------------------------------------------------------------------
// Run configuration
//
// One JSON document describes a whole run: the loop mode and budget, the
// attribute schema, and per role (attacker, arbitrator, anonymizer, judge,
// adversary) a backend, generation parameters, and a prompt template. The
// same format is written back verbatim into each run directory so a run can
// be reproduced or replayed from its own snapshot. Relative paths inside a
// config resolve against the directory containing the config file.
// ---------------------------------------------------------------------------

struct RoleConfig {
    BackendDescriptor backend;
    GenerationParams generation;
    std::string template_path;  // empty for the adversary, which reuses the attacker template

    bool operator==(const RoleConfig&) const = default;
};

struct RunConfig {
    Mode mode = Mode::Rlaa;
    int max_iterations = 10;
    std::string schema_path = "data/schemas/personal_reddit.json";
    RoleConfig attacker;
    RoleConfig arbitrator;
    RoleConfig anonymizer;
    RoleConfig judge;
    RoleConfig adversary;

    bool operator==(const RunConfig&) const = default;

    void validate() const {
        if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
        if (schema_path.empty()) throw ConfigError("schema path is required");
        auto check_role = [](const RoleConfig& role, const char* name, bool needs_template) {
            if (needs_template && role.template_path.empty())
                throw ConfigError(std::string(name) + " role needs a prompt template");
            if (role.backend.kind == BackendKind::Replay && role.backend.cassette.empty())
                throw ConfigError(std::string(name) + " replay backend needs a cassette");
            if (role.backend.kind == BackendKind::Live && role.backend.base_url.empty())
                throw ConfigError(std::string(name) + " live backend needs a base_url");
        };
        check_role(attacker, "attacker", true);
        check_role(arbitrator, "arbitrator", true);
        check_role(anonymizer, "anonymizer", true);
        check_role(judge, "judge", true);
        check_role(adversary, "adversary", false);
    }
};

inline RunConfig default_run_config() {
    RunConfig cfg;
    cfg.attacker.generation = {0.1, 0.9, 1024};
    cfg.attacker.template_path = "data/templates/attacker.txt";
    cfg.arbitrator.generation = {0.0, std::nullopt, 1024};
    cfg.arbitrator.template_path = "data/templates/arbitrator.txt";
    cfg.anonymizer.generation = {0.5, 0.9, 512};
    cfg.anonymizer.template_path = "data/templates/anonymizer.txt";
    cfg.judge.generation = {0.0, std::nullopt, 1024};
    cfg.judge.template_path = "data/templates/judge.txt";
    cfg.adversary.generation = {0.0, std::nullopt, 1024};
    return cfg;
}

inline void to_json(json& j, const RoleConfig& r) {
    j = json{{"backend", r.backend}, {"generation", r.generation}};
    if (!r.template_path.empty()) j["template"] = r.template_path;
}

inline void from_json(const json& j, RoleConfig& r) {
    if (j.contains("backend")) j.at("backend").get_to(r.backend);
    if (j.contains("generation")) j.at("generation").get_to(r.generation);
    if (j.contains("template")) j.at("template").get_to(r.template_path);
}

inline void to_json(json& j, const RunConfig& c) {
    j = json{{"mode", to_string(c.mode)},
             {"max_iterations", c.max_iterations},
             {"schema", c.schema_path},
             {"roles",
              {{"attacker", c.attacker},
               {"arbitrator", c.arbitrator},
               {"anonymizer", c.anonymizer},
               {"judge", c.judge},
               {"adversary", c.adversary}}}};
}

inline void from_json(const json& j, RunConfig& c) {
    if (j.contains("mode")) c.mode = mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("max_iterations")) j.at("max_iterations").get_to(c.max_iterations);
    if (j.contains("schema")) j.at("schema").get_to(c.schema_path);
    if (j.contains("roles")) {
        const json& roles = j.at("roles");
        if (roles.contains("attacker")) roles.at("attacker").get_to(c.attacker);
        if (roles.contains("arbitrator")) roles.at("arbitrator").get_to(c.arbitrator);
        if (roles.contains("anonymizer")) roles.at("anonymizer").get_to(c.anonymizer);
        if (roles.contains("judge")) roles.at("judge").get_to(c.judge);
        if (roles.contains("adversary")) roles.at("adversary").get_to(c.adversary);
    }
}

namespace detail {

inline std::string resolve_against(const std::filesystem::path& base, const std::string& path) {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return p.lexically_normal().string();
    return (base / p).lexically_normal().string();
}

inline void resolve_role_paths(const std::filesystem::path& base, RoleConfig& role) {
    role.template_path = resolve_against(base, role.template_path);
    role.backend.cassette = resolve_against(base, role.backend.cassette);
    role.backend.record_cassette = resolve_against(base, role.backend.record_cassette);
}

/// RLAA_<ROLE>_BASE_URL and RLAA_<ROLE>_MODEL trump the file, so a config can
/// be pointed at another server without editing it. Keys never live in the
/// file at all; api_key_env names the variable that holds the bearer token.
inline void apply_env_overrides(RoleConfig& role, const std::string& role_name) {
    std::string upper = role_name;
    for (char& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (const char* url = std::getenv(("RLAA_" + upper + "_BASE_URL").c_str()))
        role.backend.base_url = url;
    if (const char* model = std::getenv(("RLAA_" + upper + "_MODEL").c_str()))
        role.backend.model = model;
}

}  // namespace detail

/// Loads a run config over the built-in defaults, resolves its relative paths
/// against the config file's directory, and applies environment overrides.
inline RunConfig load_run_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    RunConfig cfg = default_run_config();
    try {
        j.get_to(cfg);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + " is malformed: " + e.what());
    }

    const auto base = std::filesystem::absolute(std::filesystem::path(path)).parent_path();
    cfg.schema_path = detail::resolve_against(base, cfg.schema_path);
    detail::resolve_role_paths(base, cfg.attacker);
    detail::resolve_role_paths(base, cfg.arbitrator);
    detail::resolve_role_paths(base, cfg.anonymizer);
    detail::resolve_role_paths(base, cfg.judge);
    detail::resolve_role_paths(base, cfg.adversary);

    detail::apply_env_overrides(cfg.attacker, "attacker");
    detail::apply_env_overrides(cfg.arbitrator, "arbitrator");
    detail::apply_env_overrides(cfg.anonymizer, "anonymizer");
    detail::apply_env_overrides(cfg.judge, "judge");
    detail::apply_env_overrides(cfg.adversary, "adversary");

    cfg.validate();
    return cfg;
}

inline RunContext make_run_context(const RunConfig& cfg) {
    RunContext ctx;
    ctx.mode = cfg.mode;
    ctx.max_iterations = cfg.max_iterations;
    ctx.schema = load_schema(cfg.schema_path);
    ctx.attacker_template = load_template(cfg.attacker.template_path);
    ctx.arbitrator_template = load_template(cfg.arbitrator.template_path);
    ctx.anonymizer_template = load_template(cfg.anonymizer.template_path);
    ctx.attacker = make_backend(cfg.attacker.backend);
    ctx.arbitrator = make_backend(cfg.arbitrator.backend);
    ctx.anonymizer = make_backend(cfg.anonymizer.backend);
    ctx.attacker_params = cfg.attacker.generation;
    ctx.arbitrator_params = cfg.arbitrator.generation;
    ctx.anonymizer_params = cfg.anonymizer.generation;
    return ctx;
}

inline EvalContext make_eval_context(const RunConfig& cfg, bool per_step) {
    EvalContext ctx;
    ctx.schema = load_schema(cfg.schema_path);
    ctx.attacker_template = load_template(cfg.attacker.template_path);
    ctx.judge_template = load_template(cfg.judge.template_path);
    ctx.adversary = make_backend(cfg.adversary.backend);
    ctx.judge = make_backend(cfg.judge.backend);
    ctx.adversary_params = cfg.adversary.generation;
    ctx.judge_params = cfg.judge.generation;
    ctx.per_step = per_step;
    return ctx;
}

}  // namespace rlaa
