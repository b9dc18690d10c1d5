#include <iostream>

#include <CLI11.hpp>

#include "rlaa/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"adversarial text anonymization engine"};
    app.require_subcommand(1);

    rlaa::AnonymizeOptions an;
    auto* anonymize =
        app.add_subcommand("anonymize", "Run the anonymization loop over a dataset");
    anonymize->add_option("--config", an.config_path, "run config JSON")->required();
    anonymize->add_option("--dataset", an.dataset_path, "JSONL dataset")->required();
    anonymize->add_option("--out-dir", an.out_dir, "run directory (default: runs/<run id>)");
    anonymize->add_option("--mode", an.mode_override, "override mode: rlaa or greedy");
    anonymize->add_option("--max-iterations", an.max_iterations_override,
                          "override the iteration budget");
    anonymize->add_option("--parallel", an.parallelism, "worker count")
        ->check(CLI::PositiveNumber);
    anonymize->add_flag("--record", an.record,
                        "record model exchanges into the run directory");
    anonymize->add_flag("--quiet", an.quiet, "suppress progress output");

    rlaa::EvaluateOptions ev;
    auto* evaluate =
        app.add_subcommand("evaluate", "Score the trajectories in a run directory");
    evaluate->add_option("run_dir", ev.run_dir, "run directory")->required();
    evaluate->add_flag("--final-only", ev.final_only,
                       "score only the original-to-final transition");
    evaluate->add_option("--parallel", ev.parallelism, "worker count")
        ->check(CLI::PositiveNumber);
    evaluate->add_flag("--quiet", ev.quiet, "suppress progress output");

    rlaa::CompareOptions cp;
    auto* compare = app.add_subcommand("compare", "Compare two evaluated runs");
    compare->add_option("baseline", cp.baseline_dir, "baseline run directory")->required();
    compare->add_option("candidate", cp.candidate_dir, "candidate run directory")->required();
    compare->add_option("--plot-csv", cp.plot_csv, "write a merged cumulative-MRS curve");

    rlaa::SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Run the attacker economy simulator");
    simulate->add_option("--config", sim.config_path, "simulation config JSON");
    simulate->add_option("--out-dir", sim.out_dir, "directory for series.csv and result.json");
    simulate->add_option("--sweep", sim.sweep, "comma-separated arbitrator accuracies");

    rlaa::ValidateOptions va;
    auto* validate = app.add_subcommand("validate", "Validate a dataset against a schema");
    validate->add_option("--dataset", va.dataset_path, "JSONL dataset")->required();
    validate->add_option("--schema", va.schema_path, "attribute schema JSON")->required();

    rlaa::ReplayOptions rp;
    auto* replay =
        app.add_subcommand("replay", "Re-run a recorded run from its own cassettes");
    replay->add_option("run_dir", rp.run_dir, "recorded run directory")->required();
    replay->add_option("--out-dir", rp.out_dir, "run directory for the replayed run");
    replay->add_option("--parallel", rp.parallelism, "worker count")
        ->check(CLI::PositiveNumber);
    replay->add_flag("--quiet", rp.quiet, "suppress progress output");

    CLI11_PARSE(app, argc, argv);

    if (anonymize->parsed()) return rlaa::cmd_anonymize(an, std::cout, std::cerr);
    if (evaluate->parsed()) return rlaa::cmd_evaluate(ev, std::cout, std::cerr);
    if (compare->parsed()) return rlaa::cmd_compare(cp, std::cout, std::cerr);
    if (simulate->parsed()) return rlaa::cmd_simulate(sim, std::cout, std::cerr);
    if (validate->parsed()) return rlaa::cmd_validate(va, std::cout, std::cerr);
    if (replay->parsed()) return rlaa::cmd_replay(rp, std::cout, std::cerr);
    return 0;
}
