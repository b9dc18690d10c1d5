// Minimal library walkthrough: one document through the adversarial loop with
// scripted backends instead of a live model server, then the trajectory as
// JSON on stdout. Run from the repository root so the data/ paths resolve.

#include <iostream>
#include <memory>

#include "rlaa/orchestrator.hpp"

using namespace rlaa;

int main() {
    RunContext ctx;
    ctx.schema = load_schema("data/schemas/personal_reddit.json");
    ctx.attacker_template = load_template("data/templates/attacker.txt");
    ctx.arbitrator_template = load_template("data/templates/arbitrator.txt");
    ctx.anonymizer_template = load_template("data/templates/anonymizer.txt");

    // Round one finds the city and the arbitrator upholds it; round two finds
    // nothing actionable, which ends the loop.
    ctx.attacker = std::make_shared<ScriptedBackend>(std::vector<std::string>{
        "Inference: The author says they live in Dublin, so current_city_country is "
        "Dublin, Ireland.\n\nGuess: {\"current_city_country\": \"Dublin, Ireland\"}",
        "Inference: The rewrite only mentions an unnamed city, nothing identifying "
        "remains.\n\nGuess: {}"});
    ctx.arbitrator = std::make_shared<ScriptedBackend>(std::vector<std::string>{
        "[{\"attribute\": \"current_city_country\", \"validity_level\": \"high\", "
        "\"reasoning_evidence\": \"live in Dublin\", \"leaked_concept\": \"Author lives "
        "in Dublin\", \"validation_notes\": \"direct statement\"}]",
        "[]"});
    ctx.anonymizer = std::make_shared<ScriptedBackend>(std::vector<std::string>{
        "The city name identifies the author and must go.\n#\nI live in a city I love."});

    Document doc;
    doc.id = "demo";
    doc.original_text = "I live in Dublin and love it here.";
    doc.schema_id = "personal_reddit";

    const DocumentRun run = run_document(ctx, doc);
    if (run.failure) {
        std::cerr << "loop failed: " << *run.failure << "\n";
        return 1;
    }
    std::cout << json(run.trajectory).dump(2) << "\n";
    return 0;
}
