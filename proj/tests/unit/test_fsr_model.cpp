#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fitgen/fsr_model.hpp"
#include "test_support.hpp"

using namespace fitgen;

namespace {

ComponentCatalog sensors() {
    return ComponentCatalog({{"APP", ComponentClass::Sensor, "pedal"},
                             {"WSA", ComponentClass::Sensor, "steering angle"},
                             {"WS", ComponentClass::Sensor, "wheel speed"},
                             {"YR", ComponentClass::Sensor, "yaw rate"},
                             {"ST", ComponentClass::Sensor, "steering torque"}});
}

FaultTestCase tc_for(LocationMap map) {
    FaultTestCase tc;
    tc.id = "TC";
    tc.locations = std::move(map);
    tc.window = {175, 375};
    for (const auto& id : tc.locations.selected()) tc.faults.emplace(id, FaultSpec{DelayParams{0.5}, std::nullopt});
    return tc;
}

}  // namespace

TEST_CASE("catalog rejects duplicate and empty ids") {
    CHECK_THROWS_AS(ComponentCatalog({{"A", ComponentClass::Sensor, ""}, {"A", ComponentClass::Sensor, ""}}),
                    ConfigError);
    CHECK_THROWS_AS(ComponentCatalog({{"", ComponentClass::Sensor, ""}}), ConfigError);
}

TEST_CASE("catalog without() keeps order") {
    const auto c = sensors().without({"WSA", "ST"});
    CHECK(c.ids() == std::vector<std::string>{"APP", "WS", "YR"});
}

TEST_CASE("location map parse: canonical order, strict keys and values") {
    const auto cat = sensors();
    const auto m = parse_location_map(R"({"YR":0,"APP":1,"WSA":0,"WS":1,"ST":0})", cat);
    CHECK(to_json_text(m) == R"({"APP":1,"WSA":0,"WS":1,"YR":0,"ST":0})");
    CHECK(m.sum() == 2);
    CHECK(m.selected() == std::vector<std::string>{"APP", "WS"});

    CHECK_THROWS_AS(parse_location_map(R"({"APP":1,"WSA":0,"WS":0,"YR":0})", cat), FormatError);
    CHECK_THROWS_AS(parse_location_map(R"({"APP":1,"WSA":0,"WS":0,"YR":0,"ST":0,"X":0})", cat), FormatError);
    CHECK_THROWS_AS(parse_location_map(R"({"APP":2,"WSA":0,"WS":0,"YR":0,"ST":0})", cat), FormatError);
    CHECK_THROWS_AS(parse_location_map("[1,0]", cat), FormatError);
    CHECK_THROWS_AS(parse_location_map("{not json", cat), FormatError);
}

TEST_CASE("validator flags each contract clause") {
    const auto cat = sensors();
    CHECK(validate_test_case(tc_for(LocationMap::select(cat, {"APP"})), cat).valid());
    CHECK(validate_test_case(tc_for(LocationMap::select(cat, {"APP", "YR"})), cat).valid());
    CHECK(validate_test_case(tc_for(LocationMap::select(cat, {})), cat).has(ViolationKind::EmptySelection));
    CHECK(validate_test_case(tc_for(LocationMap::select(cat, {"APP", "WS", "YR"})), cat)
              .has(ViolationKind::TooManyLocations));

    auto tc = tc_for(LocationMap::select(cat, {"APP"}));
    tc.window = {375, 175};
    CHECK(validate_test_case(tc, cat).has(ViolationKind::BadWindow));

    tc = tc_for(LocationMap::select(cat, {"APP"}));
    tc.faults.clear();
    CHECK(validate_test_case(tc, cat).has(ViolationKind::MissingFault));

    tc = tc_for(LocationMap::select(cat, {"APP"}));
    tc.faults.emplace("WS", FaultSpec{GainParams{2}, std::nullopt});
    CHECK(validate_test_case(tc, cat).has(ViolationKind::OrphanFault));

    tc = tc_for(LocationMap::select(cat, {"APP"}));
    tc.faults["APP"].params = DelayParams{-1};
    CHECK(validate_test_case(tc, cat).has(ViolationKind::BadParams));

    const ComponentCatalog act({{"TA", ComponentClass::Actuator, ""}, {"BA", ComponentClass::Actuator, ""}});
    tc = tc_for(LocationMap::select(act, {"TA"}));
    tc.faults["TA"].params = GainParams{2};
    CHECK(validate_test_case(tc, act).has(ViolationKind::InapplicableFaultType));
}

// Property: over random candidate maps the validator's verdict on the location
// clauses equals the predicate recomputed from scratch.
TEST_CASE("validator agrees with a direct predicate on random maps") {
    const auto cat = sensors();
    const std::vector<std::string> pool{"APP", "WSA", "WS", "YR", "ST", "XX"};
    std::mt19937 rng(7);
    int disagreements = 0;
    for (int i = 0; i < 2000; ++i) {
        std::vector<LocationMap::Entry> e;
        std::vector<std::string> keys = cat.ids();
        if (rng() % 4 == 0) keys.erase(keys.begin() + static_cast<long>(rng() % keys.size()));
        if (rng() % 4 == 0) keys.push_back(pool[rng() % pool.size()]);
        if (rng() % 6 == 0) std::shuffle(keys.begin(), keys.end(), rng);
        for (const auto& k : keys) e.emplace_back(k, static_cast<int>(rng() % 5 == 0 ? rng() % 4 : rng() % 2) - (rng() % 17 == 0));
        auto tc = tc_for(LocationMap(e));
        bool keys_equal = keys == cat.ids();
        long sum = 0;
        bool domain = true;
        for (const auto& [k, v] : e) {
            sum += v;
            domain = domain && (v == 0 || v == 1);
        }
        const bool expected = keys_equal && domain && sum >= 1 && sum <= 2;
        disagreements += validate_test_case(tc, cat).valid() != expected;
    }
    CHECK(disagreements == 0);
}

TEST_CASE("fault params json round trip and strictness") {
    for (const auto& p : std::vector<FaultParams>{GainParams{2}, OffsetParams{-3}, StuckAtParams{5}, DelayParams{0.5},
                                                  NoiseParams{1, 9}, PacketLossParams{0.5, 3, DropPolicy::HoldLast},
                                                  DriftParams{0.1}, SpikeParams{4, 0.01, 11}}) {
        const auto back = fault_params_from_json(json::parse(fault_params_to_json(p).dump()));
        CHECK(fault_params_to_json(back) == fault_params_to_json(p));
    }
    CHECK_THROWS_AS(fault_params_from_json(json::parse(R"({"type":"delay","tau_s":0.5,"extra":1})")), FormatError);
    CHECK_THROWS_AS(fault_params_from_json(json::parse(R"({"type":"delay"})")), FormatError);
    CHECK_THROWS_AS(fault_params_from_json(json::parse(R"({"type":"warp","x":1})")), FormatError);
    CHECK_THROWS_AS(fault_params_from_json(json::parse(R"({"type":"packet_loss","p":1.5})")), FormatError);
}

TEST_CASE("test case json round trip keeps file key order") {
    const auto cat = sensors();
    auto tc = tc_for(LocationMap::select(cat, {"WS", "YR"}));
    tc.faults["YR"].window = Window{200, 300};
    const auto text = test_cases_to_text({tc});
    const auto back = test_cases_from_text(text);
    REQUIRE(back.size() == 1);
    CHECK(back[0].locations == tc.locations);
    CHECK(back[0].window_for("YR") == Window{200, 300});
    CHECK(back[0].window_for("WS") == Window{175, 375});
    CHECK(test_cases_to_text(back) == text);
}

TEST_CASE("bundled dataset shape") {
    const auto all = load_fsr_dataset(testing_support::data_path("fsr_dataset.jsonl"));
    const auto eval = eval_split(all);
    REQUIRE(eval.size() == 134);
    int sensor = 0;
    for (const auto& f : eval) sensor += f.gold_class == ComponentClass::Sensor;
    CHECK(sensor == 97);
    CHECK(eval.size() - sensor == 37);
}

TEST_CASE("dataset parser rejects malformed records") {
    CHECK_THROWS_AS(parse_fsr_dataset(R"({"id":"a","text":"t","gold_locations":[]})"), FormatError);
    CHECK_THROWS_AS(parse_fsr_dataset("{\"id\":\"a\",\"text\":\"t\"}\n{\"id\":\"a\",\"text\":\"u\"}"), FormatError);
    CHECK_THROWS_AS(parse_fsr_dataset(R"({"id":"a","text":""})"), FormatError);
    CHECK(parse_fsr_dataset("\n{\"id\":\"a\",\"text\":\"t\"}\n\n").size() == 1);
}
