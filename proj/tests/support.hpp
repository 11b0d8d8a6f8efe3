#pragma once

#include "hmsom/schema.hpp"
#include "hmsom/synth.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace testing {

/// Fresh empty directory under the system temp dir, removed on destruction.
class temp_dir {
public:
    explicit temp_dir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("hmsom_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~temp_dir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    temp_dir(const temp_dir&) = delete;
    temp_dir& operator=(const temp_dir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    [[nodiscard]] std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline hmsom::row_matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, scale);
    hmsom::row_matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = z(rng);
        }
    }
    return m;
}

/// Default generator restricted to `engines` engines 1..engines.
inline hmsom::generated_data make_data(std::size_t rows, std::uint64_t seed, std::size_t engines = 16,
                                       double noise = 0.05) {
    auto cfg = hmsom::default_generator_config(seed);
    cfg.n_rows = rows;
    cfg.noise_std = noise;
    if (engines < cfg.n_engines) {
        for (std::size_t e = 1; e <= engines; ++e) {
            cfg.active_engines.push_back(static_cast<hmsom::engine_id>(e));
        }
    }
    return hmsom::generate(cfg);
}

/// Largest agreement between two labelings over all relabelings of `b`
/// (exhaustive over permutations, so only for small k).
inline double best_permutation_agreement(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                                         std::size_t k) {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::size_t best = 0;
    do {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            hits += a[i] == perm[b[i]] ? 1 : 0;
        }
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(a.size());
}

}  // namespace testing
