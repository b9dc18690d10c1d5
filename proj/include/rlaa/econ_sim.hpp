#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rlaa/domain.hpp"
#include "rlaa/errors.hpp"
#include "rlaa/util.hpp"

namespace rlaa {

// ---------------------------------------------------------------------------
// Synthetic attacker economy
//
// A population of leads mixes genuine leaks (fixing one buys gamma privacy)
// with ghost leads (fixing one buys only xi). Every executed edit costs
// epsilon utility. A greedy agent executes everything it draws; an arbitrated
// agent executes a lead only when a Bernoulli(p) arbitrator classifies it
// correctly, and retires at the first step where nothing was executed.
// ---------------------------------------------------------------------------

struct SimConfig {
    int n_genuine = 5;
    int n_ghost = 50;
    double gamma = 0.1;
    double xi = 0.001;
    double epsilon = 0.02;
    double p = 0.9;
    int T = 10;
    int leaks_per_step = 2;
    std::uint64_t seed = 7;
    bool shuffled = false;

    bool operator==(const SimConfig&) const = default;

    void validate() const {
        if (n_genuine < 0 || n_ghost < 0 || n_genuine + n_ghost == 0)
            throw ConfigError("population must hold at least one lead");
        if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
        if (xi < 0.0) throw ConfigError("xi must be non-negative");
        if (!(xi < gamma)) throw ConfigError("xi must be smaller than gamma");
        if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
        if (p < 0.5 || p > 1.0) throw ConfigError("p must lie in [0.5, 1]");
        if (T < 1) throw ConfigError("T must be at least 1");
        if (leaks_per_step < 1) throw ConfigError("leaks_per_step must be at least 1");
    }
};

inline void to_json(json& j, const SimConfig& c) {
    j = json{{"n_genuine", c.n_genuine}, {"n_ghost", c.n_ghost},
             {"gamma", c.gamma},         {"xi", c.xi},
             {"epsilon", c.epsilon},     {"p", c.p},
             {"T", c.T},                 {"leaks_per_step", c.leaks_per_step},
             {"seed", c.seed},           {"shuffled", c.shuffled}};
}

inline void from_json(const json& j, SimConfig& c) {
    SimConfig defaults;
    c.n_genuine = j.value("n_genuine", defaults.n_genuine);
    c.n_ghost = j.value("n_ghost", defaults.n_ghost);
    c.gamma = j.value("gamma", defaults.gamma);
    c.xi = j.value("xi", defaults.xi);
    c.epsilon = j.value("epsilon", defaults.epsilon);
    c.p = j.value("p", defaults.p);
    c.T = j.value("T", defaults.T);
    c.leaks_per_step = j.value("leaks_per_step", defaults.leaks_per_step);
    c.seed = j.value("seed", defaults.seed);
    c.shuffled = j.value("shuffled", defaults.shuffled);
}

struct SimStep {
    int t = 0;  // 1-based
    int drawn_genuine = 0;
    int drawn_ghost = 0;
    int executed_genuine = 0;
    int executed_ghost = 0;
    double delta_p = 0.0;
    double delta_c = 0.0;
    double mrs = kMrsInfinity;
    double cumulative_mrs = 0.0;

    bool operator==(const SimStep&) const = default;
};

inline void to_json(json& j, const SimStep& s) {
    j = json{{"t", s.t},
             {"drawn_genuine", s.drawn_genuine},
             {"drawn_ghost", s.drawn_ghost},
             {"executed_genuine", s.executed_genuine},
             {"executed_ghost", s.executed_ghost},
             {"delta_p", s.delta_p},
             {"delta_c", s.delta_c},
             {"mrs", std::isinf(s.mrs) ? json(nullptr) : json(s.mrs)},
             {"cumulative_mrs", s.cumulative_mrs}};
}

inline void from_json(const json& j, SimStep& s) {
    j.at("t").get_to(s.t);
    j.at("drawn_genuine").get_to(s.drawn_genuine);
    j.at("drawn_ghost").get_to(s.drawn_ghost);
    j.at("executed_genuine").get_to(s.executed_genuine);
    j.at("executed_ghost").get_to(s.executed_ghost);
    j.at("delta_p").get_to(s.delta_p);
    j.at("delta_c").get_to(s.delta_c);
    s.mrs = j.at("mrs").is_null() ? kMrsInfinity : j.at("mrs").get<double>();
    j.at("cumulative_mrs").get_to(s.cumulative_mrs);
}

struct AgentSeries {
    std::vector<SimStep> steps;
    int stop_step = 0;  // step that executed nothing and ended the run; 0 = ran out the clock
    double total_privacy_gain = 0.0;
    double total_utility_cost = 0.0;
    double final_cumulative_mrs = 0.0;

    bool operator==(const AgentSeries&) const = default;
};

inline void to_json(json& j, const AgentSeries& a) {
    j = json{{"steps", a.steps},
             {"stop_step", a.stop_step},
             {"total_privacy_gain", a.total_privacy_gain},
             {"total_utility_cost", a.total_utility_cost},
             {"final_cumulative_mrs", a.final_cumulative_mrs}};
}

inline void from_json(const json& j, AgentSeries& a) {
    j.at("steps").get_to(a.steps);
    j.at("stop_step").get_to(a.stop_step);
    j.at("total_privacy_gain").get_to(a.total_privacy_gain);
    j.at("total_utility_cost").get_to(a.total_utility_cost);
    j.at("final_cumulative_mrs").get_to(a.final_cumulative_mrs);
}

struct SimResult {
    SimConfig config;
    AgentSeries greedy;
    AgentSeries arbitrated;
    double lambda_lower = 0.0;  // epsilon / gamma
    double lambda_upper = 0.0;  // epsilon / xi; the viable price interval is [lower, upper)

    bool operator==(const SimResult&) const = default;
};

inline void to_json(json& j, const SimResult& r) {
    j = json{{"config", r.config},
             {"greedy", r.greedy},
             {"arbitrated", r.arbitrated},
             {"lambda_lower", r.lambda_lower},
             {"lambda_upper",
              std::isinf(r.lambda_upper) ? json(nullptr) : json(r.lambda_upper)}};
}

inline void from_json(const json& j, SimResult& r) {
    j.at("config").get_to(r.config);
    j.at("greedy").get_to(r.greedy);
    j.at("arbitrated").get_to(r.arbitrated);
    j.at("lambda_lower").get_to(r.lambda_lower);
    r.lambda_upper =
        j.at("lambda_upper").is_null() ? kMrsInfinity : j.at("lambda_upper").get<double>();
}

namespace detail {

inline std::vector<bool> lead_population(const SimConfig& cfg) {
    std::vector<bool> population(static_cast<size_t>(cfg.n_genuine), true);
    population.resize(static_cast<size_t>(cfg.n_genuine + cfg.n_ghost), false);
    if (cfg.shuffled) {
        std::mt19937_64 rng(cfg.seed);
        std::shuffle(population.begin(), population.end(), rng);
    }
    return population;
}

inline AgentSeries simulate_agent(const SimConfig& cfg, const std::vector<bool>& population,
                                  bool arbitrated) {
    // The coin stream is seeded independently of the shuffle so both agents
    // face the identical lead order.
    std::mt19937_64 coins(cfg.seed * 0x9E3779B97F4A7C15ULL + 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    AgentSeries series;
    size_t cursor = 0;
    double sum_dp = 0.0, sum_dc = 0.0;
    for (int t = 1; t <= cfg.T; ++t) {
        SimStep step;
        step.t = t;
        for (int k = 0; k < cfg.leaks_per_step && cursor < population.size(); ++k, ++cursor) {
            const bool genuine = population[cursor];
            (genuine ? step.drawn_genuine : step.drawn_ghost) += 1;
            bool execute = true;
            if (arbitrated) {
                const bool correct = unit(coins) < cfg.p;
                // Correct on a genuine lead means confirming it; correct on a
                // ghost means rejecting it.
                execute = genuine ? correct : !correct;
            }
            if (!execute) continue;
            (genuine ? step.executed_genuine : step.executed_ghost) += 1;
            step.delta_p += genuine ? cfg.gamma : cfg.xi;
            step.delta_c += cfg.epsilon;
        }
        sum_dp += step.delta_p;
        sum_dc += step.delta_c;
        step.mrs = make_marginal(t, step.delta_p, step.delta_c).mrs;
        step.cumulative_mrs = sum_dc / std::max(sum_dp, kEpsilonP);
        series.steps.push_back(step);
        if (arbitrated && step.executed_genuine + step.executed_ghost == 0) {
            // Empty policy: nothing was executed, so the text would not have
            // changed and every later step would repeat this one.
            series.stop_step = t;
            break;
        }
    }
    series.total_privacy_gain = sum_dp;
    series.total_utility_cost = sum_dc;
    series.final_cumulative_mrs = sum_dc / std::max(sum_dp, kEpsilonP);
    return series;
}

inline std::string csv_number(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

inline SimResult run_simulation(const SimConfig& cfg) {
    cfg.validate();
    const auto population = detail::lead_population(cfg);
    SimResult result;
    result.config = cfg;
    result.greedy = detail::simulate_agent(cfg, population, false);
    result.arbitrated = detail::simulate_agent(cfg, population, true);
    result.lambda_lower = cfg.epsilon / cfg.gamma;
    result.lambda_upper = cfg.xi > 0.0 ? cfg.epsilon / cfg.xi : kMrsInfinity;
    return result;
}

/// Re-runs the simulation across arbitrator accuracies. Population and coin
/// streams depend only on the seed, so rows differ in p alone.
inline std::vector<SimResult> sweep_accuracy(SimConfig cfg, const std::vector<double>& ps) {
    std::vector<SimResult> results;
    results.reserve(ps.size());
    for (const double p : ps) {
        cfg.p = p;
        results.push_back(run_simulation(cfg));
    }
    return results;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

inline std::string series_csv(const SimResult& result) {
    std::string out =
        "agent,t,drawn_genuine,drawn_ghost,executed_genuine,executed_ghost,"
        "delta_p,delta_c,mrs,cumulative_mrs\n";
    auto emit = [&](const char* agent, const AgentSeries& series) {
        for (const auto& s : series.steps) {
            out += agent;
            out += ',' + std::to_string(s.t) + ',' + std::to_string(s.drawn_genuine) + ',' +
                   std::to_string(s.drawn_ghost) + ',' + std::to_string(s.executed_genuine) +
                   ',' + std::to_string(s.executed_ghost) + ',' + detail::csv_number(s.delta_p) +
                   ',' + detail::csv_number(s.delta_c) + ',' + detail::csv_number(s.mrs) + ',' +
                   detail::csv_number(s.cumulative_mrs) + '\n';
        }
    };
    emit("greedy", result.greedy);
    emit("arbitrated", result.arbitrated);
    return out;
}

inline std::string sweep_csv(const std::vector<SimResult>& results) {
    std::string out = "p,greedy_cumulative_mrs,arbitrated_cumulative_mrs,ratio,"
                      "arbitrated_stop_step\n";
    for (const auto& r : results) {
        const double ratio = r.arbitrated.final_cumulative_mrs > 0.0
                                 ? r.greedy.final_cumulative_mrs /
                                       r.arbitrated.final_cumulative_mrs
                                 : kMrsInfinity;
        out += detail::csv_number(r.config.p) + ',' +
               detail::csv_number(r.greedy.final_cumulative_mrs) + ',' +
               detail::csv_number(r.arbitrated.final_cumulative_mrs) + ',' +
               detail::csv_number(ratio) + ',' + std::to_string(r.arbitrated.stop_step) + '\n';
    }
    return out;
}

}  // namespace rlaa
