#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "support.hpp"
#include "wavecluster/error.hpp"
#include "wavecluster/feature_select.hpp"

using namespace wavecluster;

namespace {

// Two separated blobs in the first `informative` columns, uniform noise in
// the rest.
Eigen::MatrixXd planted(std::size_t n, int informative, int noise, std::uint64_t seed) {
    auto rng = make_rng(seed, "planted");
    NormalSampler normal;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), informative + noise);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double centre = (i % 2 == 0) ? 0.0 : 4.0;
        for (int j = 0; j < informative; ++j) x(i, j) = centre + 0.5 * normal(rng);
        for (int j = informative; j < informative + noise; ++j) x(i, j) = 4.0 * uniform01(rng);
    }
    return x;
}

}  // namespace

TEST_CASE("clusterability of a two-point mass is one") {
    std::vector<double> c(40);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (i % 2) ? 1.0 : 0.0;
    CHECK(clusterability_index(c) == doctest::Approx(1.0));
    CHECK(clusterability_index(std::vector<double>(10, 2.0)) == 0.0);
}

TEST_CASE("clusterability agrees with the exhaustive-split oracle") {
    const auto& o = wctest::oracle()["clusterability_check"];
    const auto col = o["column"].get<std::vector<double>>();
    CHECK(clusterability_index(col) == doctest::Approx(o["index"].get<double>()).epsilon(1e-12));
}

TEST_CASE("clusterability of uniform and normal samples") {
    const auto& o = wctest::oracle()["clusterability_mc"];
    auto rng = make_rng(5, "clusterability-mc");
    NormalSampler normal;
    double uni = 0.0, nor = 0.0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> u(1000), g(1000);
        for (auto& v : u) v = uniform01(rng);
        for (auto& v : g) v = normal(rng);
        uni += clusterability_index(u) / reps;
        nor += clusterability_index(g) / reps;
    }
    CHECK(std::abs(uni - 0.75) < 0.05);
    CHECK(std::abs(uni - o["uniform_mean"].get<double>()) < 0.005);
    CHECK(nor < 1.0);
    CHECK(nor > 0.0);
    CHECK(std::abs(nor - o["normal_mean"].get<double>()) < 0.005);
}

TEST_CASE("range normalization") {
    Eigen::MatrixXd x(3, 2);
    x << 1, 5, 3, 5, 2, 5;
    const auto r = range_normalize(x);
    CHECK(r(0, 0) == 0.0);
    CHECK(r(1, 0) == 1.0);
    CHECK(r(2, 0) == 0.5);
    CHECK(r.col(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("uniform reference quantile is deterministic and near the uniform index") {
    const double a = uniform_reference_quantile(150, 0.5, 200, 3);
    CHECK(a == uniform_reference_quantile(150, 0.5, 200, 3));
    CHECK(std::abs(a - 0.75) < 0.05);
    CHECK(uniform_reference_quantile(150, 0.9, 200, 3) >= a);
}

TEST_CASE("planted informative columns are selected") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto x = planted(150, 2, 4, seed);
        SelectionOptions opt;
        opt.k = 2;
        opt.seed = seed;
        const auto rep = select_features(x, opt);
        if (rep.selected == std::vector<int>{0, 1}) ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("a single informative column is selected alone") {
    const auto x = planted(120, 1, 3, 77);
    SelectionOptions opt;
    opt.k = 2;
    const auto rep = select_features(x, opt);
    CHECK(rep.selected == std::vector<int>{0});
}

TEST_CASE("selection report invariants") {
    const auto x = planted(100, 2, 3, 9);
    SelectionOptions opt;
    opt.k = 2;
    const auto rep = select_features(x, opt);
    CHECK(rep.clusterability.size() == 5);
    for (std::size_t s = 1; s < rep.best_per_size.size(); ++s) {
        CHECK(rep.best_per_size[s].features.size() == s + 1);
        CHECK(rep.best_per_size[s].sse <= rep.best_per_size[s - 1].sse + 1e-12);
    }
    for (int f : rep.selected)
        CHECK(std::find(rep.screened_in.begin(), rep.screened_in.end(), f) != rep.screened_in.end());
    // deterministic
    const auto again = select_features(x, opt);
    CHECK(again.selected == rep.selected);
    CHECK(again.clusterability == rep.clusterability);
}

TEST_CASE("no structure leaves the selection empty") {
    // constant columns score 0 and never pass screening
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(50, 3, 1.5);
    SelectionOptions opt;
    opt.k = 2;
    const auto rep = select_features(x, opt);
    CHECK(rep.screened_in.empty());
    CHECK(rep.no_structure);
    CHECK(rep.selected.empty());
}

TEST_CASE("selection option errors") {
    const auto x = planted(20, 1, 1, 1);
    SelectionOptions opt;
    opt.k = 1;
    CHECK_THROWS_AS(select_features(x, opt), InvalidArgument);
    opt.k = 2;
    opt.penalty = -1.0;
    CHECK_THROWS_AS(select_features(x, opt), InvalidArgument);
    opt.penalty = 0.05;
    opt.k = 50;
    CHECK_THROWS_AS(select_features(x, opt), InvalidArgument);
}

TEST_CASE("stable selection takes the most frequent subset") {
    for (std::uint64_t seed : {4u, 5u, 6u}) {
        const auto x = planted(150, 2, 3, seed);
        SelectionOptions opt;
        opt.seed = seed;
        const auto s = select_features_stable(x, 5, opt);
        REQUIRE(s.per_k.size() == 4);
        CHECK(s.per_k.front().selected == std::vector<int>{0, 1});
        // most frequent subset; ties go to the one appearing at the smaller k
        auto count = [&](const std::vector<int>& subset) {
            return std::count_if(s.per_k.begin(), s.per_k.end(),
                                 [&](const SelectionReport& r) { return r.selected == subset; });
        };
        const auto chosen = count(s.selected);
        for (std::size_t i = 0; i < s.per_k.size(); ++i) {
            const auto& subset = s.per_k[i].selected;
            CHECK(count(subset) <= chosen);
            if (count(subset) == chosen && subset != s.selected) {
                const auto first_chosen = std::find_if(s.per_k.begin(), s.per_k.end(), [&](const SelectionReport& r) {
                    return r.selected == s.selected;
                });
                CHECK(first_chosen - s.per_k.begin() < static_cast<std::ptrdiff_t>(i));
            }
        }
    }
}

TEST_CASE("selection JSON lists indices and labels") {
    const auto x = planted(150, 2, 3, 5);
    const auto s = select_features_stable(x, 5, SelectionOptions{});
    REQUIRE(s.selected == std::vector<int>{0, 1});
    std::stringstream buf;
    write_selection_json(buf, s, {"a", "b", "c", "d", "e"});
    const auto j = nlohmann::json::parse(buf.str());
    CHECK(j["selected"] == nlohmann::json({0, 1}));
    CHECK(j["selected_labels"] == nlohmann::json({"a", "b"}));
}
