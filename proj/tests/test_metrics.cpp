#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>

#include "oracles.hpp"
#include "rlaa/metrics.hpp"

using namespace rlaa;

static json load_fixture(const std::string& rel) {
    std::ifstream in(std::string(RLAA_SOURCE_DIR) + "/" + rel);
    REQUIRE(in.good());
    return json::parse(in);
}

static AttributeSchema reddit_schema() {
    return load_schema(std::string(RLAA_SOURCE_DIR) + "/data/schemas/personal_reddit.json");
}

TEST_CASE("tokenizer lowercases and strips edge punctuation") {
    REQUIRE(tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
    REQUIRE(tokenize("  don't   stop ") == std::vector<std::string>{"don't", "stop"});
    REQUIRE(tokenize("(a) [b] {c}") == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(tokenize("...") == std::vector<std::string>{});
    REQUIRE(tokenize("") == std::vector<std::string>{});
}

TEST_CASE("attribute matcher agrees with the hand-labeled corpus") {
    const json corpus = load_fixture("tests/fixtures/match_corpus.json");
    REQUIRE(corpus.at("pairs").size() == 30);
    for (const auto& pair : corpus.at("pairs")) {
        const auto kind = attribute_kind_from_string(pair.at("kind").get<std::string>());
        const auto guess = pair.at("guess").get<std::string>();
        const auto truth = pair.at("truth").get<std::string>();
        const bool expected = pair.at("match").get<bool>();
        INFO("kind=" << pair.at("kind").get<std::string>() << " guess='" << guess << "' truth='"
                     << truth << "'");
        REQUIRE(match_attribute(kind, guess, truth) == expected);
    }
}

TEST_CASE("abstentions never match") {
    REQUIRE_FALSE(match_attribute(AttributeKind::FreeText, "", "nurse"));
    REQUIRE_FALSE(match_attribute(AttributeKind::FreeText, "unknown", "nurse"));
    REQUIRE_FALSE(match_attribute(AttributeKind::Integer, "Unknown", "27"));
}

TEST_CASE("priv_score counts recovered protected attributes") {
    const auto schema = reddit_schema();
    Document doc;
    doc.id = "d1";
    doc.original_text = "text";
    doc.schema_id = "personal_reddit";
    doc.ground_truth = {{"age", "27"},
                        {"occupation", "software developer"},
                        {"current_city_country", "Dublin, Ireland"},
                        {"sex", "unknown"}};

    std::vector<AttributeGuess> guesses = {
        {"age", "27", "27"},
        {"occupation", "developer", "developer"},
        {"current_city_country", "London, UK", "London, UK"},
    };
    // 2 of the 3 protected attributes recovered; "sex" is not protected here.
    REQUIRE(priv_score(guesses, doc, schema) == Catch::Approx(2.0 / 3.0));

    SECTION("abstentions count as misses") {
        guesses[0].value = "";
        REQUIRE(priv_score(guesses, doc, schema) == Catch::Approx(1.0 / 3.0));
    }

    SECTION("guesses for unprotected attributes are ignored") {
        guesses.push_back({"sex", "male", "male"});
        REQUIRE(priv_score(guesses, doc, schema) == Catch::Approx(2.0 / 3.0));
    }

    SECTION("a document with nothing to protect is a scoring error") {
        Document bare = doc;
        bare.ground_truth = {{"sex", "unknown"}};
        REQUIRE_THROWS_AS(priv_score(guesses, bare, schema), EmptyProtectedSetError);
    }
}

TEST_CASE("util_score blends the three judge axes") {
    REQUIRE(util_score(10, 10, 1) == 1.0);
    REQUIRE(util_score(1, 1, 0) == Catch::Approx(0.2 / 3.0));

    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> ten(1, 10);
    std::uniform_int_distribution<int> bit(0, 1);
    for (int i = 0; i < 200; ++i) {
        const int r = ten(rng), m = ten(rng), h = bit(rng);
        const double expected = (r / 10.0 + m / 10.0 + h) / 3.0;
        REQUIRE(util_score(r, m, h) == Catch::Approx(expected).margin(1e-12));
        JudgeScores s;
        s.readability = r;
        s.meaning = m;
        s.hallucination = h;
        REQUIRE(util_score(s) == util_score(r, m, h));
    }
}

TEST_CASE("rouge-l matches its frozen example") {
    const std::vector<std::string> ref = {"a", "b", "c", "d"};
    const std::vector<std::string> cand = {"a", "c", "d", "e"};
    REQUIRE(rouge_l_f1(ref, cand) == Catch::Approx(0.75).margin(1e-12));
    REQUIRE(rouge_l_f1("same text here", "same text here") == Catch::Approx(1.0));
    REQUIRE(rouge_l_f1("abc def", "") == 0.0);
    REQUIRE(rouge_l_f1("", "abc") == 0.0);
    REQUIRE(rouge_l_f1("one two", "three four") == 0.0);
}

TEST_CASE("bleu matches its frozen example") {
    const std::vector<std::string> ref = {"the", "cat", "sat", "on", "the", "mat"};
    const std::vector<std::string> cand = {"the", "cat", "sat"};
    REQUIRE(bleu(ref, cand) == Catch::Approx(0.23505403213046533).margin(1e-12));
    REQUIRE(bleu(ref, ref) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(bleu(ref, {}) == 0.0);
}

TEST_CASE("rouge and bleu agree with brute-force oracles on random pairs") {
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "cat", "sat", "the"};
    std::mt19937_64 rng(20240817);
    std::uniform_int_distribution<size_t> len(0, 12);
    std::uniform_int_distribution<size_t> pick(0, vocab.size() - 1);

    auto sample = [&] {
        std::vector<std::string> toks(len(rng));
        for (auto& t : toks) t = vocab[pick(rng)];
        return toks;
    };

    for (int i = 0; i < 150; ++i) {
        const auto ref = sample();
        const auto cand = sample();
        INFO("pair " << i);
        REQUIRE(rouge_l_f1(ref, cand) ==
                Catch::Approx(oracle::rouge_l_brute(ref, cand)).margin(1e-9));
        if (!cand.empty())
            REQUIRE(bleu(ref, cand) ==
                    Catch::Approx(oracle::bleu_reference(ref, cand)).margin(1e-9));
    }
}

TEST_CASE("marginal series telescopes") {
    const std::vector<double> privacy = {0.8, 0.6, 0.6, 0.25, 0.25};
    const std::vector<double> utility = {1.0, 0.9, 0.9, 0.7, 0.65};
    const auto series = marginal_series(privacy, utility);
    REQUIRE(series.size() == 4);

    double dp_sum = 0.0;
    for (const auto& r : series) dp_sum += r.delta_p;
    REQUIRE(dp_sum == Catch::Approx(privacy.front() - privacy.back()).margin(1e-12));

    REQUIRE(series[0].mrs == Catch::Approx(0.1 / 0.2));
    REQUIRE_FALSE(series[1].mrs_finite());  // no privacy movement
    REQUIRE(series[2].mrs == Catch::Approx(0.2 / 0.35));
    REQUIRE_FALSE(series[3].mrs_finite());  // cost without gain
}

TEST_CASE("cumulative mrs divides pooled cost by pooled gain") {
    const std::vector<double> privacy = {1.0, 0.5, 0.5};
    const std::vector<double> utility = {1.0, 0.8, 0.7};
    const auto series = marginal_series(privacy, utility);
    // step 2 gains nothing yet costs 0.1; the pooled ratio still converges
    REQUIRE(cumulative_mrs(series, 1) == Catch::Approx(0.2 / 0.5));
    REQUIRE(cumulative_mrs(series) == Catch::Approx(0.3 / 0.5));
}

TEST_CASE("rationality gain reproduces the published reductions") {
    REQUIRE(rationality_gain(3.80, 1.74) == Catch::Approx(54.2).margin(0.1));
    REQUIRE(rationality_gain(3.32, 1.10) == Catch::Approx(66.9).margin(0.1));
    REQUIRE(rationality_gain(1.80, 1.28) == Catch::Approx(28.9).margin(0.1));
    REQUIRE_THROWS_AS(rationality_gain(0.0, 1.0), DomainError);
    REQUIRE_THROWS_AS(rationality_gain(-1.0, 1.0), DomainError);
}
