#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

#include "hmsom/kernels.hpp"
#include "hmsom/som.hpp"

#include <omp.h>

#include <cstring>

using namespace hmsom;

namespace {

/// Runs `f` with several OpenMP threads even on a single-core machine.
template <typename F>
void with_threads(int n, F&& f) {
    const int before = omp_get_max_threads();
    omp_set_num_threads(n);
    f();
    omp_set_num_threads(before);
}

bool bit_equal(const row_matrix& a, const row_matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("nearest prototype breaks ties toward the lowest index") {
    row_matrix protos(3, 2);
    protos << 1, 0, -1, 0, 0, 5;
    const double x[2] = {0, 0};
    const auto hit = kernels::nearest(x, protos);
    CHECK(hit.unit == 0);
    CHECK(hit.distance == 1.0);
}

TEST_CASE("BMU search: serial and parallel are bit-identical and match a scan") {
    const auto data = testing::gaussian_matrix(3001, 6, 1);
    const auto protos = testing::gaussian_matrix(49, 6, 2);
    std::vector<kernels::nearest_unit> serial(3001);
    std::vector<kernels::nearest_unit> parallel(3001);
    kernels::find_bmus_serial(data, protos, serial);
    with_threads(4, [&] { kernels::find_bmus_parallel(data, protos, parallel); });
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].unit == parallel[i].unit);
        CHECK(std::memcmp(&serial[i].distance, &parallel[i].distance, sizeof(double)) == 0);
        const auto ref = oracle::exhaustive_nearest(data.row(static_cast<Eigen::Index>(i)).data(), protos);
        CHECK(serial[i].unit == ref.unit);
        CHECK(serial[i].distance == ref.distance);
    }
}

TEST_CASE("batch update: serial and parallel are bit-identical") {
    const auto data = testing::gaussian_matrix(2000, 6, 3);
    const auto start = testing::gaussian_matrix(49, 6, 4);
    std::vector<kernels::nearest_unit> bmus(2000);
    kernels::find_bmus_serial(data, start, bmus);
    for (double sigma : {0.0, 0.5, 1.7, 3.5}) {
        const auto h = neighborhood_matrix(7, 7, sigma);
        auto a = start;
        auto b = start;
        kernels::batch_update_serial(data, bmus, h, a);
        with_threads(3, [&] { kernels::batch_update_parallel(data, bmus, h, b); });
        CHECK(bit_equal(a, b));
    }
}

TEST_CASE("batch update keeps prototypes with no weight") {
    row_matrix data(2, 1);
    data << 1.0, 3.0;
    row_matrix protos(3, 1);
    protos << 0.0, 10.0, 20.0;
    std::vector<kernels::nearest_unit> bmus{{1.0, 0}, {9.0, 0}};
    const auto h = neighborhood_matrix(1, 3, 0.0);
    kernels::batch_update_serial(data, bmus, h, protos);
    CHECK(protos(0, 0) == 2.0);
    CHECK(protos(1, 0) == 10.0);
    CHECK(protos(2, 0) == 20.0);
}

TEST_CASE("mixture log terms: serial and parallel are bit-identical") {
    const auto data = testing::gaussian_matrix(1500, 4, 5);
    std::vector<kernels::gaussian_component> comps;
    for (int k = 0; k < 3; ++k) {
        const auto a = testing::gaussian_matrix(4, 4, 10 + static_cast<std::uint64_t>(k));
        const Eigen::MatrixXd cov = Eigen::MatrixXd(a.transpose() * a) + Eigen::MatrixXd::Identity(4, 4);
        comps.push_back({std::log(0.2 + 0.1 * k), Eigen::VectorXd::Constant(4, k), cov.llt().matrixL()});
    }
    Eigen::MatrixXd serial;
    Eigen::MatrixXd parallel;
    kernels::mixture_log_terms_serial(data, comps, serial);
    with_threads(4, [&] { kernels::mixture_log_terms_parallel(data, comps, parallel); });
    REQUIRE(serial.rows() == 1500);
    CHECK(std::memcmp(serial.data(), parallel.data(), sizeof(double) * static_cast<std::size_t>(serial.size())) == 0);

    // Direct density for one sample.
    const auto& c = comps[1];
    const Eigen::MatrixXd cov = c.chol * c.chol.transpose();
    const Eigen::VectorXd d = data.row(7).transpose() - c.mean;
    const double expected =
        c.log_weight - 0.5 * (4.0 * std::log(2.0 * M_PI) + std::log(cov.determinant()) + d.dot(cov.inverse() * d));
    CHECK(serial(7, 1) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("SOM training is identical with one or many threads") {
    const auto data = testing::gaussian_matrix(1200, 6, 6);
    som_options opt;
    opt.epochs = 10;
    opt.parallel = false;
    const auto serial = train_som(data, opt);
    opt.parallel = true;
    som_model parallel;
    with_threads(4, [&] { parallel = train_som(data, opt); });
    CHECK(bit_equal(serial.prototypes, parallel.prototypes));
}
