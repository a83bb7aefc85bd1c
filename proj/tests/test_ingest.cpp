#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <arb/error.hpp>
#include <arb/ingest.hpp>
#include <arb/types.hpp>

using namespace arb;

namespace {

AttemptRecord rec(const std::string& provider, const std::string& problem,
                  bool success, double cost) {
    AttemptRecord r;
    r.provider_id = provider;
    r.problem_id = problem;
    r.success = success;
    r.cost = cost;
    return r;
}

std::string write_temp(const std::string& name, const std::string& body) {
    const std::string path = std::string("/tmp/") + name;
    std::ofstream f(path, std::ios::binary);
    f << body;
    return path;
}

} // namespace

TEST_CASE("attempt lines parse every optional field") {
    const auto r = parse_attempt_line(
        R"({"provider_id":"p","problem_id":"q","success":true,"cost":0.5,)"
        R"("input_tokens":100,"output_tokens":20,"cached_input_tokens":40,)"
        R"("tags":["math","hard"],"cost_unit":"usd"})");
    CHECK(r.provider_id == "p");
    CHECK(r.problem_id == "q");
    CHECK(r.success);
    CHECK(r.cost == 0.5);
    CHECK(*r.input_tokens == 100);
    CHECK(*r.output_tokens == 20);
    CHECK(*r.cached_input_tokens == 40);
    CHECK(r.tags == std::set<std::string>{"hard", "math"});
    CHECK(*r.declared_unit == CostUnit::usd);

    const auto minimal =
        parse_attempt_line(R"({"provider_id":"p","problem_id":"q","success":false,"cost":1})");
    CHECK_FALSE(minimal.success);
    CHECK_FALSE(minimal.input_tokens.has_value());
    CHECK_FALSE(minimal.declared_unit.has_value());
}

TEST_CASE("attempt line validation rejects malformed records") {
    CHECK_THROWS_AS(parse_attempt_line("not json"), Error);
    CHECK_THROWS_AS(parse_attempt_line("[1,2]"), Error);
    // missing success
    CHECK_THROWS_AS(parse_attempt_line(R"({"provider_id":"p","problem_id":"q","cost":1})"), Error);
    // neither cost nor tokens
    CHECK_THROWS_AS(parse_attempt_line(R"({"provider_id":"p","problem_id":"q","success":true})"),
                    Error);
    // cached exceeds input
    CHECK_THROWS_AS(parse_attempt_line(
                        R"({"provider_id":"p","problem_id":"q","success":true,)"
                        R"("input_tokens":10,"output_tokens":5,"cached_input_tokens":11})"),
                    Error);
    try {
        parse_attempt_line(R"({"provider_id":"p","problem_id":"q","success":true,"cost":-2})");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_record);
    }
}

TEST_CASE("log loading reports the offending line and tolerates blanks") {
    const auto path = write_temp(
        "arbkit_log_bad.jsonl",
        "{\"provider_id\":\"p\",\"problem_id\":\"q\",\"success\":true,\"cost\":1}\n"
        "\n"
        "{\"provider_id\":\"p\"}\n");
    try {
        load_attempt_log(path);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }

    const auto good = write_temp(
        "arbkit_log_good.jsonl",
        "{\"provider_id\":\"p\",\"problem_id\":\"q\",\"success\":true,\"cost\":1}\n"
        "\n"
        "{\"provider_id\":\"p\",\"problem_id\":\"r\",\"success\":false,\"cost\":2}\n");
    CHECK(load_attempt_log(good).size() == 2);

    const auto empty = write_temp("arbkit_log_empty.jsonl", "\n\n");
    CHECK_THROWS_AS(load_attempt_log(empty), Error);
    CHECK_THROWS_AS(load_attempt_log("/tmp/arbkit_no_such_log.jsonl"), Error);
}

TEST_CASE("pricing pass fills token-only records and keeps explicit costs") {
    PricingTable table({PricingEntry{"p", 0.25, 2.00, 0.9}});

    AttemptRecord tokens;
    tokens.provider_id = "p";
    tokens.problem_id = "q";
    tokens.success = true;
    tokens.input_tokens = 1000000;
    tokens.output_tokens = 1000000;

    auto priced = price_records({rec("p", "q", true, 7.0), tokens}, &table);
    CHECK(*priced[0].cost == 7.0);
    CHECK(*priced[1].cost == 2.25);

    // parameter-count pricing bills only generated tokens
    std::map<std::string, double> params{{"p", 1.7e9}};
    AttemptRecord t2 = tokens;
    t2.output_tokens = 1000;
    auto flops = price_records({t2}, nullptr, &params);
    CHECK(*flops[0].cost == 3.4e12);

    CHECK_THROWS_AS(price_records({tokens}, nullptr, nullptr), Error);
    std::map<std::string, double> wrong{{"other", 1e9}};
    CHECK_THROWS_AS(price_records({tokens}, nullptr, &wrong), Error);
    PricingTable empty_table;
    CHECK_THROWS_AS(price_records({tokens}, &empty_table), Error);
}

TEST_CASE("aggregation folds attempts into per-pair statistics") {
    std::vector<AttemptRecord> records{
        rec("p", "q", true, 1.0),
        rec("p", "q", false, 2.0),
        rec("p", "q", true, 1.0),
        rec("p", "q", false, 2.0),
        rec("p", "r", false, 0.3),
    };
    const Dataset d = aggregate(records, CostUnit::usd);
    CHECK(d.unit() == CostUnit::usd);
    REQUIRE(d.provider_count() == 1);
    REQUIRE(d.problem_count() == 2);

    const auto q = d.stats_at(0, d.require_problem("q"));
    CHECK(q.attempts == 4);
    CHECK(q.successes == 2);
    CHECK(q.mean_cost == 1.5);
    const auto r = d.stats_at(0, d.require_problem("r"));
    CHECK(r.attempts == 1);
    CHECK(r.successes == 0);
    CHECK(r.mean_cost == 0.3);

    // the attempt sequence survives in recorded order
    const auto* log = d.attempt_log(0, d.require_problem("q"));
    REQUIRE(log != nullptr);
    REQUIRE(log->size() == 4);
    CHECK((*log)[0].cost == 1.0);
    CHECK((*log)[0].success);
    CHECK((*log)[1].cost == 2.0);
    CHECK_FALSE((*log)[1].success);
}

TEST_CASE("aggregation statistics do not depend on record order") {
    std::vector<AttemptRecord> records{
        rec("a", "q1", true, 1.0),  rec("b", "q1", false, 4.0),
        rec("a", "q2", false, 2.0), rec("a", "q1", false, 3.0),
        rec("b", "q2", true, 0.5),  rec("a", "q2", true, 2.0),
    };
    auto shuffled = records;
    std::reverse(shuffled.begin(), shuffled.end());

    const auto lhs = aggregate(records, CostUnit::abstract_unit).all_stats();
    const auto rhs = aggregate(shuffled, CostUnit::abstract_unit).all_stats();
    REQUIRE(lhs.size() == rhs.size());
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        CHECK(lhs[i].provider_id == rhs[i].provider_id);
        CHECK(lhs[i].problem_id == rhs[i].problem_id);
        CHECK(lhs[i].attempts == rhs[i].attempts);
        CHECK(lhs[i].successes == rhs[i].successes);
        CHECK(lhs[i].mean_cost == rhs[i].mean_cost);
    }
}

TEST_CASE("aggregation rejects inconsistent inputs") {
    CHECK_THROWS_AS(aggregate({}, CostUnit::usd), Error);

    auto unpriced = rec("p", "q", true, 1.0);
    unpriced.cost.reset();
    unpriced.input_tokens = 10;
    unpriced.output_tokens = 5;
    CHECK_THROWS_AS(aggregate({unpriced}, CostUnit::usd), Error);

    auto declared = rec("p", "q", true, 1.0);
    declared.declared_unit = CostUnit::flops;
    try {
        aggregate({declared}, CostUnit::usd);
        FAIL("expected a unit mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::mixed_units);
    }

    try {
        aggregate({rec("p", "q", false, 0.0)}, CostUnit::usd);
        FAIL("expected a degenerate cost");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::degenerate_cost);
    }
}

TEST_CASE("tags accumulate per problem and drive splits") {
    auto easy = rec("a", "q1", true, 1.0);
    easy.tags = {"easy"};
    auto hard = rec("a", "q2", false, 1.0);
    hard.tags = {"hard"};
    auto retag = rec("b", "q1", false, 2.0);
    retag.tags = {"seen"};
    const Dataset d = aggregate({easy, hard, retag}, CostUnit::usd);

    CHECK(d.problem_tags(d.require_problem("q1")) == std::set<std::string>{"easy", "seen"});
    CHECK(d.problem_tags(d.require_problem("q2")) == std::set<std::string>{"hard"});

    const auto split = split_by_tag(d, "easy");
    CHECK_FALSE(split.empty_side);
    REQUIRE(split.with_tag.problem_count() == 1);
    CHECK(split.with_tag.problems()[0] == "q1");
    REQUIRE(split.without_tag.problem_count() == 1);
    CHECK(split.without_tag.problems()[0] == "q2");
    // both sides keep the full provider roster
    CHECK(split.with_tag.provider_count() == 2);
    CHECK(split.without_tag.provider_count() == 2);

    const auto nothing = split_by_tag(d, "absent");
    CHECK(nothing.empty_side);
    CHECK(nothing.with_tag.empty());
    CHECK(nothing.without_tag.problem_count() == 2);

    CHECK_THROWS_AS(split_by_tag(Dataset{}, "easy"), Error);
}

TEST_CASE("unobserved pairs get the provider's mean cost and never solve") {
    const Dataset d = aggregate(
        {
            rec("a", "q1", true, 2.0),
            rec("a", "q2", false, 4.0),
            rec("b", "q3", true, 5.0),
        },
        CostUnit::usd);
    const std::size_t a = d.require_provider("a");
    const std::size_t b = d.require_provider("b");
    const std::size_t q3 = d.require_problem("q3");

    CHECK_FALSE(d.observed(a, q3));
    const auto imputed = d.stats_at(a, q3);
    CHECK(imputed.attempts == 0);
    CHECK(imputed.successes == 0);
    CHECK(imputed.mean_cost == 3.0);  // mean of a's observed 2.0 and 4.0
    CHECK(d.imputed_mean_cost(b) == 5.0);

    const auto curve = d.solve_curve(a, q3);
    CHECK(curve.at_budget(1e9) == 0.0);

    // a provider left with no observations falls back to the dataset mean
    const Dataset only_q3 = d.subset({"q3"});
    CHECK(only_q3.provider_count() == 2);
    CHECK(only_q3.imputed_mean_cost(only_q3.require_provider("a")) == 5.0);
}

TEST_CASE("datasets survive a save and load round trip") {
    auto tagged = rec("p", "q", true, 1.0);
    tagged.tags = {"t1"};
    const Dataset d = aggregate(
        {tagged, rec("p", "q", false, 2.0), rec("p", "r", false, 0.3), rec("w", "q", true, 0.25)},
        CostUnit::flops);

    const std::string path = "/tmp/arbkit_dataset_rt.jsonl";
    save_dataset(d, path);
    const Dataset back = load_dataset(path);

    CHECK(back.unit() == CostUnit::flops);
    CHECK(back.providers() == d.providers());
    CHECK(back.problems() == d.problems());
    const auto lhs = d.all_stats();
    const auto rhs = back.all_stats();
    REQUIRE(lhs.size() == rhs.size());
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        CHECK(lhs[i].attempts == rhs[i].attempts);
        CHECK(lhs[i].successes == rhs[i].successes);
        CHECK(lhs[i].mean_cost == rhs[i].mean_cost);
        CHECK(lhs[i].tags == rhs[i].tags);
    }
    const auto* log = back.attempt_log(back.require_provider("p"), back.require_problem("q"));
    REQUIRE(log != nullptr);
    REQUIRE(log->size() == 2);
    CHECK((*log)[0].cost == 1.0);
    CHECK((*log)[1].cost == 2.0);
    CHECK_FALSE((*log)[1].success);

    const auto bad = write_temp("arbkit_dataset_bad.jsonl",
                                "{\"schema\":\"arbkit-dataset-v1\",\"cost_unit\":\"usd\"}\n"
                                "{\"provider_id\":\"p\"}\n");
    try {
        load_dataset(bad);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    CHECK_THROWS_AS(load_dataset("/tmp/arbkit_no_such_dataset.jsonl"), Error);
}
