// Regenerates the committed replay cassettes under tests/fixtures/cassettes/
// by driving the real pipeline over mini.jsonl with scripted backends wrapped
// in recorders. Run it manually after changing prompts, parsers, or the
// fixture dataset; the test suite replays the committed cassettes.

#include <filesystem>
#include <iostream>

#include "rlaa/cli.hpp"

using namespace rlaa;
namespace fs = std::filesystem;

namespace {

const char* kAttackerAlpha0 =
    "Inference: The phrase 'moved to Dublin' pins current_city_country to Dublin, Ireland, "
    "and 'work as a nurse' reveals occupation directly.\n\n"
    "Guess: {\"current_city_country\": \"Dublin, Ireland\", \"occupation\": \"nurse\"}";

const char* kAttackerAlpha1 =
    "Inference: The text still says the author works as a nurse, so occupation remains "
    "visible; the location is now too vague to place.\n\n"
    "Guess: {\"occupation\": \"nurse\"}";

const char* kAttackerBeta0 =
    "Inference: 'Growing up in Boston' gives birth_city_country as Boston, United States, "
    "and 'at 34' states the age plainly.\n\n"
    "Guess: {\"birth_city_country\": \"Boston, United States\", \"age\": 34}";

const char* kAttackerBeta1 =
    "Inference: Nothing concrete remains; the region hint is too vague to recover "
    "birth_city_country.\n\n"
    "Guess: {\"birth_city_country\": \"somewhere in the eastern United States\"}";

const char* kArbitratorAlpha0 =
    "[{\"attribute\": \"current_city_country\", \"validity_level\": \"high\", "
    "\"reasoning_evidence\": \"The text states the move to Dublin outright.\", "
    "\"leaked_concept\": \"moved to Dublin\"}, "
    "{\"attribute\": \"occupation\", \"validity_level\": \"low\", "
    "\"reasoning_evidence\": \"Nurse is stated but too common to identify anyone.\"}]";

const char* kArbitratorAlpha1 =
    "[{\"attribute\": \"occupation\", \"validity_level\": \"low\", "
    "\"reasoning_evidence\": \"Still just a common occupation with no identifying power.\"}]";

const char* kArbitratorBeta0 =
    "[{\"attribute\": \"birth_city_country\", \"validity_level\": \"medium\", "
    "\"reasoning_evidence\": \"Growing up there implies birthplace but is not certain.\", "
    "\"leaked_concept\": \"childhood in Boston\"}, "
    "{\"attribute\": \"age\", \"validity_level\": \"high\", "
    "\"reasoning_evidence\": \"The age 34 is written in the text.\", "
    "\"leaked_concept\": \"explicit age 34\"}]";

const char* kArbitratorBeta1 =
    "[{\"attribute\": \"birth_city_country\", \"validity_level\": \"invalid\", "
    "\"reasoning_evidence\": \"The inference is a guess with no textual anchor.\"}]";

const char* kAnonymizerAlpha =
    "The city reference must go while the voice stays intact.\n#\n"
    "I moved abroad two years ago and I work as a nurse.";

const char* kAnonymizerBeta =
    "Both concrete details generalize cleanly.\n#\n"
    "Growing up back east was fun; even now I still miss it.";

const char* kAdversaryAlpha0 =
    "Inference: current_city_country is Dublin, Ireland from the stated move; occupation "
    "nurse is written in the text.\n\n"
    "Guess: {\"current_city_country\": \"Dublin, Ireland\", \"occupation\": \"nurse\"}";

const char* kAdversaryAlpha1 =
    "Inference: The rewrite hides the city entirely; occupation nurse is still stated.\n\n"
    "Guess: {\"current_city_country\": \"London, United Kingdom\", \"occupation\": \"nurse\"}";

const char* kAdversaryBeta0 =
    "Inference: birth_city_country is Boston, United States from growing up there; age is "
    "34 as written.\n\n"
    "Guess: {\"birth_city_country\": \"Boston, United States\", \"age\": 34}";

const char* kAdversaryBeta1 =
    "Inference: The rewrite hides both the city and the age.\n\n"
    "Guess: {\"birth_city_country\": \"unknown\", \"age\": \"unknown\"}";

const char* kJudgeAlpha =
    "{\"readability\": {\"score\": 9, \"explanation\": \"Reads naturally.\"}, "
    "\"meaning\": {\"score\": 8, \"explanation\": \"Only the city was generalized.\"}, "
    "\"hallucinations\": {\"score\": 1, \"explanation\": \"No invented details.\"}}";

const char* kJudgeBeta =
    "{\"readability\": {\"score\": 8, \"explanation\": \"Small rhythm change.\"}, "
    "\"meaning\": {\"score\": 7, \"explanation\": \"Region kept, city and age dropped.\"}, "
    "\"hallucinations\": {\"score\": 1, \"explanation\": \"Nothing added.\"}}";

}  // namespace

int main() {
    const std::string src = RLAA_SOURCE_DIR;
    const std::string fixtures = src + "/tests/fixtures";
    const std::string cassettes = fixtures + "/cassettes";
    fs::create_directories(cassettes);

    RunConfig cfg = default_run_config();
    cfg.schema_path = src + "/data/schemas/personal_reddit.json";
    cfg.attacker.template_path = src + "/data/templates/attacker.txt";
    cfg.arbitrator.template_path = src + "/data/templates/arbitrator.txt";
    cfg.anonymizer.template_path = src + "/data/templates/anonymizer.txt";
    cfg.judge.template_path = src + "/data/templates/judge.txt";

    const auto script_role = [&](RoleConfig& role, const char* name,
                                 std::vector<std::string> script) {
        role.backend.kind = BackendKind::Scripted;
        role.backend.model = "fixture-model";
        role.backend.script = std::move(script);
        role.backend.record_cassette = cassettes + "/" + name + ".json";
        fs::remove(role.backend.record_cassette);
    };
    script_role(cfg.attacker, "attacker",
                {kAttackerAlpha0, kAttackerAlpha1, kAttackerBeta0, kAttackerBeta1});
    script_role(cfg.arbitrator, "arbitrator",
                {kArbitratorAlpha0, kArbitratorAlpha1, kArbitratorBeta0, kArbitratorBeta1});
    script_role(cfg.anonymizer, "anonymizer", {kAnonymizerAlpha, kAnonymizerBeta});
    script_role(cfg.adversary, "adversary",
                {kAdversaryAlpha0, kAdversaryAlpha1, kAdversaryBeta0, kAdversaryBeta1});
    script_role(cfg.judge, "judge", {kJudgeAlpha, kJudgeBeta});

    const std::string run_dir = (fs::temp_directory_path() / "rlaa-fixture-gen").string();
    fs::remove_all(run_dir);

    int rc = run_anonymize(cfg, fixtures + "/mini.jsonl", run_dir, /*parallelism=*/1,
                           /*record=*/false, /*quiet=*/true, std::cout, std::cerr);
    if (rc != 0) {
        std::cerr << "anonymize pass failed with exit code " << rc << '\n';
        return rc;
    }

    EvaluateOptions ev;
    ev.run_dir = run_dir;
    ev.parallelism = 1;
    ev.quiet = true;
    rc = cmd_evaluate(ev, std::cout, std::cerr);
    if (rc != 0) {
        std::cerr << "evaluate pass failed with exit code " << rc << '\n';
        return rc;
    }

    for (const char* name : {"attacker", "arbitrator", "anonymizer", "adversary", "judge"}) {
        const auto entries =
            json::parse(read_file(cassettes + "/" + std::string(name) + ".json"));
        std::cout << name << " cassette: " << entries.size() << " entries\n";
    }
    fs::remove_all(run_dir);
    return 0;
}
