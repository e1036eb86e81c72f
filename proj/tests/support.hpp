#pragma once

// Independent oracles and fixtures shared by the unit and acceptance tests.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "lacr/acs.hpp"
#include "lacr/graph.hpp"
#include "lacr/model.hpp"

namespace lacr::testing {

// Plain recursive evaluation of the ACS levels, no shared sums.
inline double naive_acs(const ScoreMatrix& m, std::size_t x, StanceLabel s, std::size_t level) {
    if (level == 1) {
        double sum = 0.0;
        for (std::size_t y = 0; y < m.smkg_size(); ++y) {
            const StanceLabel sy = m.smkg_nodes()[y].stance;
            sum += m.smkg(x, y, s == sy ? RelationType::Agree : RelationType::Disagree);
        }
        return sum / static_cast<double>(m.smkg_size());
    }
    const std::size_t n = m.tusm_size();
    double sum = 0.0;
    for (std::size_t z = 0; z < n; ++z) {
        if (z == x) continue;
        for (StanceLabel sz : {StanceLabel::Accept, StanceLabel::Reject}) {
            const RelationType r = s == sz ? RelationType::Agree : RelationType::Disagree;
            sum += naive_acs(m, z, sz, level - 1) + m.tusm(x, z, r);
        }
    }
    return sum / static_cast<double>(n - 1);
}

inline double naive_acs_star(const ScoreMatrix& m, std::size_t x, StanceLabel s, std::size_t depth) {
    const std::size_t levels = m.tusm_size() < 2 ? 1 : depth;
    double sum = 0.0;
    for (std::size_t l = 1; l <= levels; ++l) sum += naive_acs(m, x, s, l);
    return sum / static_cast<double>(levels);
}

// Random score matrix with |TUSM| = n_tusm and |SMKG| = n_smkg (>= 1).
inline ScoreMatrix random_matrix(std::size_t n_tusm, std::size_t n_smkg, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::string> tusm;
    for (std::size_t i = 0; i < n_tusm; ++i) tusm.push_back("u" + std::to_string(i));
    std::vector<LabeledTweet> nodes;
    for (std::size_t i = 0; i < n_smkg; ++i) {
        nodes.push_back({"g" + std::to_string(i), coin(rng) ? StanceLabel::Accept : StanceLabel::Reject});
    }
    ScoreMatrix m("m", tusm, nodes);
    for (std::size_t x = 0; x < n_tusm; ++x) {
        for (RelationType r : kRelationTypes) {
            for (std::size_t y = 0; y < n_smkg; ++y) m.smkg(x, y, r) = u(rng);
            for (std::size_t z = 0; z < n_tusm; ++z) {
                if (z != x) m.tusm(x, z, r) = u(rng);
            }
        }
    }
    return m;
}

// ||a - b||_2 / max(||a||_2, ||b||_2), 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double scale = std::sqrt(std::max(na, nb));
    return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

// Central difference of f around each entry of `x`.
template <class F>
std::vector<double> central_differences(std::vector<double>& x, F&& f, double eps) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + eps;
        const double up = f();
        x[i] = keep - eps;
        const double down = f();
        x[i] = keep;
        out[i] = (up - down) / (2.0 * eps);
    }
    return out;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("lacr_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace lacr::testing
