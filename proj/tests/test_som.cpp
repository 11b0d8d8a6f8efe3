#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

#include "hmsom/error.hpp"
#include "hmsom/plot.hpp"
#include "hmsom/som.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

using namespace hmsom;

TEST_CASE("neighbourhood matrix") {
    const auto id = neighborhood_matrix(3, 4, 0.0);
    CHECK(id.isIdentity());
    const auto h = neighborhood_matrix(3, 4, 1.3);
    CHECK(h.rows() == 12);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // Units 1 = (0,1) and 11 = (2,3): squared grid distance 4 + 4.
    CHECK(h(1, 11) == doctest::Approx(std::exp(-8.0 / (2.0 * 1.3 * 1.3))));
    CHECK(h(5, 5) == 1.0);
}

TEST_CASE("neighbourhood width decays linearly") {
    som_options opt;
    CHECK(neighborhood_width(opt, 0) == 3.5);
    CHECK(neighborhood_width(opt, opt.epochs - 1) == doctest::Approx(0.5));
    const double mid = neighborhood_width(opt, 10) - neighborhood_width(opt, 11);
    CHECK(mid == doctest::Approx((3.5 - 0.5) / 49.0));
    opt.rows = 4;
    opt.cols = 9;
    CHECK(neighborhood_width(opt, 0) == 4.5);
}

TEST_CASE("PCA grid initialization spans the two leading axes") {
    // Elongated cloud: spread 10 along x, 3 along y, 0.1 along z.
    auto data = testing::gaussian_matrix(4000, 3, 12);
    data.col(0) *= 10.0;
    data.col(1) *= 3.0;
    data.col(2) *= 0.1;
    som_options opt;
    opt.rows = 5;
    opt.cols = 3;
    const auto p = initialize_prototypes(data, opt);
    REQUIRE(p.rows() == 15);
    // Corner units sit near +-2 standard deviations on each axis.
    CHECK(std::abs(std::abs(p(0, 0)) - 20.0) < 1.0);
    CHECK(std::abs(std::abs(p(0, 1)) - 6.0) < 0.5);
    CHECK(std::abs(p(14, 0) + p(0, 0)) < 0.5);
    CHECK(std::abs(p(7, 0)) < 0.5);  // centre unit near the mean
    CHECK(p.col(2).cwiseAbs().maxCoeff() < 0.5);
    // Rows run along the first axis.
    CHECK(std::abs(p(0, 0) - p(2, 0)) < 0.5);
    CHECK(initialize_prototypes(data, opt) == p);
}

TEST_CASE("random initialization draws distinct samples") {
    const auto data = testing::gaussian_matrix(60, 2, 3);
    som_options opt;
    opt.init = som_init::random_samples;
    const auto p = initialize_prototypes(data, opt);
    std::set<std::pair<double, double>> seen;
    for (Eigen::Index u = 0; u < p.rows(); ++u) {
        CHECK(seen.insert({p(u, 0), p(u, 1)}).second);
        bool found = false;
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            found = found || (data(i, 0) == p(u, 0) && data(i, 1) == p(u, 1));
        }
        CHECK(found);
    }
    // Fewer samples than units: sampling with replacement still fills the map.
    const auto small = initialize_prototypes(testing::gaussian_matrix(10, 2, 3), opt);
    CHECK(small.rows() == 49);
}

TEST_CASE("zero-width batch epoch equals one Lloyd iteration") {
    const auto data = testing::gaussian_matrix(100, 3, 21);
    const auto start = testing::gaussian_matrix(9, 3, 22);
    auto protos = start;
    batch_epoch(data, protos, neighborhood_matrix(3, 3, 0.0));
    const auto expected = oracle::lloyd_step(data, start);
    CHECK((protos - expected).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("training reduces quantization error and is deterministic") {
    const auto data = testing::gaussian_matrix(1500, 6, 30);
    som_training_report report;
    const auto m = train_som(data, som_options{}, &report);
    CHECK(m.units() == 49);
    CHECK(m.dimension() == 6);
    CHECK(report.final_quantization_error < report.initial_quantization_error);
    CHECK(report.final_quantization_error == doctest::Approx(quantization_error(data, m)));
    CHECK(train_som(data, som_options{}).prototypes == m.prototypes);
}

TEST_CASE("distance to map equals an exhaustive scan") {
    const auto data = testing::gaussian_matrix(800, 6, 31);
    som_options opt;
    opt.epochs = 15;
    const auto m = train_som(data, opt);
    const auto probe = testing::gaussian_matrix(500, 6, 32, 2.0);
    const auto all = distances_to_map(probe, m);
    for (Eigen::Index i = 0; i < probe.rows(); ++i) {
        const auto ref = oracle::exhaustive_nearest(probe.row(i).data(), m.prototypes);
        const auto one = distance_to_map(std::span<const double>(probe.row(i).data(), 6), m);
        CHECK(one.distance == ref.distance);
        CHECK(one.bmu == ref.unit);
        CHECK(all[static_cast<std::size_t>(i)].distance == ref.distance);
        CHECK(all[static_cast<std::size_t>(i)].bmu == ref.unit);
    }
    const double wrong[2] = {0, 0};
    CHECK_THROWS_AS(static_cast<void>(distance_to_map(std::span<const double>(wrong, 2), m)), data_error);
}

TEST_CASE("SOM input errors") {
    CHECK_THROWS_AS(static_cast<void>(train_som(row_matrix(0, 3), som_options{})), data_error);
    auto bad = testing::gaussian_matrix(10, 2, 1);
    bad(3, 1) = std::nan("");
    CHECK_THROWS_AS(static_cast<void>(train_som(bad, som_options{})), data_error);
    som_options empty;
    empty.rows = 0;
    CHECK_THROWS_AS(static_cast<void>(train_som(testing::gaussian_matrix(10, 2, 1), empty)), usage_error);
}

TEST_CASE("component plane gray levels") {
    som_model m;
    m.rows = 2;
    m.cols = 2;
    m.prototypes.resize(4, 2);
    m.prototypes << 0.0, 5.0, 1.0, 5.0, 2.0, 5.0, 4.0, 5.0;
    const auto g = plane_gray_levels(m, 0);
    CHECK(g == std::vector<std::uint8_t>{255, 191, 128, 0});
    CHECK(plane_gray_levels(m, 1) == std::vector<std::uint8_t>{128, 128, 128, 128});
}

TEST_CASE("component planes are written as PGM and SVG") {
    const auto data = testing::gaussian_matrix(300, 3, 40);
    som_options opt;
    opt.rows = 3;
    opt.cols = 4;
    opt.epochs = 5;
    const auto m = train_som(data, opt);
    testing::temp_dir dir("planes");
    plane_overlay overlay;
    for (const auto& d : distances_to_map(data, m)) {
        overlay.bmu.push_back(d.bmu);
        overlay.anomaly.push_back(overlay.bmu.size() % 10 == 0);
    }
    const auto files = export_component_planes(m, {"a", "b", "c"}, dir.path(), plane_format::both, &overlay, 8);
    CHECK(files.size() == 6);
    const auto img = plot::read_pgm(dir.path() / "b.pgm");
    CHECK(img.width == 32);
    CHECK(img.height == 24);
    const auto levels = plane_gray_levels(m, 1);
    for (std::size_t u = 0; u < m.units(); ++u) {
        const auto x = (u % 4) * 8 + 3;
        const auto y = (u / 4) * 8 + 5;
        CHECK(img.pixels[y * img.width + x] == levels[u]);
    }
    CHECK(plot::read_pgm(dir.path() / "a.pgm").pixels.size() == 32 * 24);
    std::ifstream in(dir.path() / "c.svg");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("<svg") == 0);
    CHECK(text.find(">c</text>") != std::string::npos);
    CHECK(text.find("#00a000") != std::string::npos);
    CHECK(text.find("#e00000") != std::string::npos);

    testing::temp_dir only("planes_pgm");
    CHECK(export_component_planes(m, {"a", "b", "c"}, only.path(), plane_format::pgm).size() == 3);
    CHECK_THROWS_AS(static_cast<void>(export_component_planes(m, {"a"}, only.path())), usage_error);
}
