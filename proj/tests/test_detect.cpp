#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

#include "hmsom/detect.hpp"
#include "hmsom/error.hpp"

#include <random>

using namespace hmsom;

TEST_CASE("nearest-rank percentile agrees with a sort oracle") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> len(1, 5000);
    std::lognormal_distribution<double> value;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(len(rng));
        for (auto& x : v) {
            x = value(rng);
        }
        for (unsigned p : {50u, 95u, 99u}) {
            CHECK(percentile(v, p) == oracle::sorted_percentile(v, p));
        }
    }
}

TEST_CASE("percentile edge cases") {
    const std::vector<double> v{5, 1, 4, 2, 3};
    CHECK(percentile(v, 100) == 5);
    CHECK(percentile(v, 1) == 1);
    CHECK(percentile(v, 20) == 1);
    CHECK(percentile(v, 20.0001) == 2);
    CHECK(percentile(std::vector<double>{7}, 99) == 7);
    // 99th of 100 values is the 99th smallest.
    std::vector<double> h(100);
    for (std::size_t i = 0; i < h.size(); ++i) {
        h[i] = static_cast<double>(100 - i);
    }
    CHECK(percentile(h, 99) == 99);
    CHECK_THROWS_AS(static_cast<void>(percentile(std::vector<double>{}, 50)), usage_error);
    CHECK_THROWS_AS(static_cast<void>(percentile(v, 0)), usage_error);
    CHECK_THROWS_AS(static_cast<void>(percentile(v, 100.5)), usage_error);
}

TEST_CASE("calibration: global and per-unit limits with fallback") {
    std::vector<map_distance> d;
    for (int i = 1; i <= 100; ++i) {
        d.push_back({static_cast<double>(i), 0});
    }
    for (int i = 1; i <= 5; ++i) {
        d.push_back({1000.0 + i, 2});
    }
    const auto th = calibrate(d, 3, 99, 10);
    std::vector<double> all;
    for (const auto& x : d) {
        all.push_back(x.distance);
    }
    CHECK(th.global_upper == oracle::sorted_percentile(all, 99));
    CHECK(th.local_upper[0].value() == 99.0);
    CHECK_FALSE(th.local_upper[1].has_value());
    CHECK_FALSE(th.local_upper[2].has_value());
    CHECK(th.local_count == std::vector<std::size_t>{100, 0, 5});
    CHECK(th.fallback_count() == 2);
    CHECK(th.resolved_local(2) == th.global_upper);
    CHECK(th.calibrated());

    CHECK_THROWS_AS(static_cast<void>(calibrate(std::vector<map_distance>{}, 3)), usage_error);
    CHECK_THROWS_AS(static_cast<void>(calibrate(d, 2)), data_error);
}

TEST_CASE("decision interval is closed") {
    std::vector<map_distance> d;
    for (int i = 0; i < 200; ++i) {
        d.push_back({0.01 * i, static_cast<std::size_t>(i % 2)});
    }
    const auto th = calibrate(d, 2);
    const auto at = decide({th.global_upper, 0}, th, detection_mode::global);
    CHECK(at.healthy);
    CHECK(at.threshold == th.global_upper);
    CHECK(at.rule == detection_mode::global);
    CHECK_FALSE(decide({std::nextafter(th.global_upper, 1e9), 0}, th, detection_mode::global).healthy);
    const double lu = th.resolved_local(1);
    CHECK(decide({lu, 1}, th, detection_mode::local).healthy);
    CHECK_FALSE(decide({std::nextafter(lu, 1e9), 1}, th, detection_mode::local).healthy);
    CHECK(decide({0.0, 1}, th, detection_mode::local).healthy);
    CHECK_THROWS_AS(static_cast<void>(decide({0.0, 0}, detector_thresholds{}, detection_mode::global)), data_error);
}

TEST_CASE("local decisions degenerate to global when no unit qualifies") {
    const auto data = testing::gaussian_matrix(600, 4, 3);
    som_options opt;
    opt.epochs = 10;
    const auto m = train_som(data, opt);
    const auto th = calibrate(distances_to_map(data, m), m.units(), 99, 601);
    CHECK(th.fallback_count() == m.units());
    const auto probe = testing::gaussian_matrix(1000, 4, 4, 1.5);
    for (Eigen::Index i = 0; i < probe.rows(); ++i) {
        const std::span<const double> x(probe.row(i).data(), 4);
        const auto g = decide(x, m, th, detection_mode::global);
        const auto l = decide(x, m, th, detection_mode::local);
        CHECK(g.healthy == l.healthy);
        CHECK(g.threshold == l.threshold);
    }
}

TEST_CASE("training flag rate never exceeds the nominal tail") {
    const auto data = testing::gaussian_matrix(1234, 4, 5);
    som_options opt;
    opt.epochs = 10;
    const auto m = train_som(data, opt);
    const auto d = distances_to_map(data, m);
    const auto th = calibrate(d, m.units());
    std::size_t flagged = 0;
    for (const auto& x : d) {
        flagged += decide(x, th, detection_mode::global).healthy ? 0 : 1;
    }
    CHECK(flagged <= 1234 / 100 + 1);
    CHECK(flagged >= 1);
}
