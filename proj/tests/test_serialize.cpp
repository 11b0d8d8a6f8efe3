#include "doctest.h"
#include "support.hpp"

#include "hmsom/error.hpp"
#include "hmsom/serialize.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>

using namespace hmsom;

TEST_CASE("shortest round-trip number formatting") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, std::numeric_limits<double>::denorm_min()}) {
        CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
    }
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("verdicts round-trip through CSV") {
    std::vector<row_verdict> v;
    for (int i = 0; i < 20; ++i) {
        row_verdict r;
        r.key = {i % 3 + 1, 10 + i, 7 + i, 13 + i};
        r.result = {std::sqrt(static_cast<double>(i)) / 7.0, static_cast<std::size_t>(i % 49), i % 4 != 0,
                    i % 2 ? detection_mode::local : detection_mode::global, 0.3 + i * 1e-3};
        v.push_back(r);
    }
    const auto text = io::verdicts_to_csv(v);
    CHECK(text.rfind("engine,timestamp,distance,bmu,threshold,healthy,rule,window_first,window_last\n", 0) == 0);
    const auto back = io::verdicts_from_csv(text);
    REQUIRE(back.size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(back[i].key == v[i].key);
        CHECK(back[i].result.distance == v[i].result.distance);
        CHECK(back[i].result.bmu == v[i].result.bmu);
        CHECK(back[i].result.healthy == v[i].result.healthy);
        CHECK(back[i].result.rule == v[i].result.rule);
        CHECK(back[i].result.threshold == v[i].result.threshold);
    }
    CHECK(io::verdicts_to_csv(back) == text);
    CHECK_THROWS_WITH_AS(static_cast<void>(io::verdicts_from_csv("h\n1,2,x,0,1,1,global,0,4\n")),
                         doctest::Contains("line 2"), data_error);
    CHECK_THROWS_AS(static_cast<void>(io::verdicts_from_csv("h\n1,2,3\n")), data_error);
}

TEST_CASE("injection records round-trip") {
    const auto d = testing::make_data(200, 3, 2);
    const auto a = inject(d.table, default_signature_set()[9], 12, 1);
    const auto b = inject(d.table, signature{"r", {{"FF", 0.25}}}, 5, 2, defect_shape::ramp);
    const std::vector<injection_record> recs{a.record, b.record};
    const auto back = io::records_from_json(io::records_to_json(recs));
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[i].signature == recs[i].signature);
        CHECK(back[i].engine == recs[i].engine);
        CHECK(back[i].start == recs[i].start);
        CHECK(back[i].rows == recs[i].rows);
        CHECK(back[i].times == recs[i].times);
        CHECK(back[i].shape == recs[i].shape);
        const std::map<std::string, double> x(back[i].offsets.begin(), back[i].offsets.end());
        const std::map<std::string, double> y(recs[i].offsets.begin(), recs[i].offsets.end());
        CHECK(x == y);
    }
    const auto restored = remove_injection(b.table, back[1]);
    CHECK(restored.rows[b.record.rows[0]].values == d.table.rows[b.record.rows[0]].values);
    CHECK_THROWS_AS(static_cast<void>(io::records_from_json("{\"signature\": 3}")), data_error);
    CHECK_THROWS_AS(static_cast<void>(io::records_from_json("not json")), data_error);
}

TEST_CASE("signature files") {
    const auto s = io::signature_from_json(R"({"name": "leak", "offsets": {"FF": 0.8, "EXH": -1.5}})");
    CHECK(s.name == "leak");
    const std::map<std::string, double> m(s.offsets.begin(), s.offsets.end());
    CHECK(m == std::map<std::string, double>{{"FF", 0.8}, {"EXH", -1.5}});
    const auto again = io::signature_from_json(io::signature_to_json(s));
    CHECK(again.offsets == s.offsets);
    CHECK_THROWS_AS(static_cast<void>(io::signature_from_json(R"({"offsets": {}})")), data_error);
}

TEST_CASE("bundle loading rejects other formats") {
    CHECK_THROWS_WITH_AS(static_cast<void>(io::bundle_from_json(R"({"format": "hmsom-bundle/0"})")),
                         doctest::Contains("hmsom-bundle/0"), data_error);
    CHECK_THROWS_AS(static_cast<void>(io::bundle_from_json("[1,2")), data_error);
    CHECK_THROWS_WITH_AS(static_cast<void>(io::load_bundle("/nonexistent/bundle.json")),
                         doctest::Contains("/nonexistent/bundle.json"), data_error);
}

TEST_CASE("file helpers") {
    testing::temp_dir dir("io");
    io::write_file(dir / "x.txt", "abc\n");
    CHECK(io::read_file(dir / "x.txt") == "abc\n");
    CHECK_THROWS_AS(io::write_file(dir.path() / "missing" / "x.txt", "a"), data_error);
}
