#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <sstream>

#include "support.hpp"
#include "wavecluster/cwt.hpp"
#include "wavecluster/error.hpp"

using namespace wavecluster;

TEST_CASE("scale grid sizes") {
    CHECK(make_scale_grid(1, 6, 8).size() == 41);
    CHECK(make_scale_grid(1, 4, 8).size() == 25);
    const auto g = make_scale_grid(0, 1, 1);
    REQUIRE(g.size() == 2);
    CHECK(g.scales[0] == 1.0);
    CHECK(g.scales[1] == 2.0);
    const auto d = make_scale_grid(1, 6, 8);
    CHECK(d.scales.front() == 2.0);
    CHECK(d.scales.back() == doctest::Approx(64.0).epsilon(1e-14));
    CHECK_THROWS_AS(make_scale_grid(3, 3, 8), InvalidArgument);
    CHECK_THROWS_AS(make_scale_grid(1, 3, 0), InvalidArgument);
}

TEST_CASE("Morlet wavelet values") {
    CHECK(std::abs(morlet(0.0) - std::pow(std::numbers::pi, -0.25)) < 1e-15);
    const auto v = morlet(0.5);
    CHECK(std::abs(std::abs(v) - std::pow(std::numbers::pi, -0.25) * std::exp(-0.125)) < 1e-15);
    CHECK(std::abs(std::arg(v) - 3.0) < 1e-12);
}

TEST_CASE("CWT matches the frequency-domain oracle") {
    const auto& o = wctest::oracle()["cwt_signal64"];
    const auto grid = make_scale_grid(o["omin"], o["omax"], o["voices"]);
    const auto z = wctest::signal(64, 0);
    const auto w = cwt_morlet(z, grid);
    REQUIRE(w.scales() == static_cast<Eigen::Index>(grid.size()));
    double err = 0.0;
    for (Eigen::Index j = 0; j < w.scales(); ++j)
        for (Eigen::Index k = 0; k < 64; ++k)
            err = std::max(err, std::abs(w.values(j, k) - std::complex<double>(o["re"][j][k], o["im"][j][k])));
    CHECK(err < 1e-10);

    CwtOptions l2;
    l2.normalization = CwtNormalization::L2;
    const auto w2 = cwt_morlet(z, grid, l2);
    const auto& r = wctest::oracle()["cwt_signal64_l2_row0"];
    for (Eigen::Index k = 0; k < 64; ++k)
        CHECK(std::abs(w2.values(0, k) - std::complex<double>(r["re"][k], r["im"][k])) < 1e-10);
}

TEST_CASE("CWT matches direct summation of the defining formula") {
    const auto z = wctest::white_noise(128, 3);
    const auto grid = make_scale_grid(1, 6, 3);  // includes scales beyond N/2
    const auto w = cwt_morlet(z, grid);
    for (std::size_t j = 0; j < grid.size(); ++j)
        for (std::size_t k : {0u, 1u, 37u, 127u})
            CHECK(std::abs(w.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) -
                           wctest::cwt_direct(z, grid.scales[j], k)) < 1e-10);
}

TEST_CASE("CWT is linear and vanishes on zero") {
    const auto grid = make_scale_grid(1, 4, 4);
    const auto z = wctest::signal(64, 0);
    const auto x = wctest::signal(64, 1);
    std::vector<double> mix(64);
    for (std::size_t i = 0; i < 64; ++i) mix[i] = 1.5 * z[i] - 0.25 * x[i];
    const auto wz = cwt_morlet(z, grid);
    const auto wx = cwt_morlet(x, grid);
    const auto wm = cwt_morlet(mix, grid);
    CHECK((wm.values - (1.5 * wz.values - 0.25 * wx.values)).cwiseAbs().maxCoeff() < 1e-10);
    const auto w0 = cwt_morlet(std::vector<double>(64, 0.0), grid);
    CHECK(w0.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a cosine peaks at the Morlet scale-period relation") {
    const std::size_t n = 512;
    const auto grid = make_scale_grid(1, 6, 8);
    for (double period : {8.0, 16.0, 32.0, 64.0}) {
        std::vector<double> z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / period);
        const auto w = cwt_morlet(z, grid);
        Eigen::Index best = 0;
        w.values.cwiseAbs2().rowwise().sum().maxCoeff(&best);
        const double expected = period * 6.0 / (2.0 * std::numbers::pi);
        const double voices_off = std::abs(std::log2(grid.scales[static_cast<std::size_t>(best)] / expected)) * 8.0;
        CHECK(voices_off <= 1.0);
    }
}

TEST_CASE("cone warning for scales above N/2") {
    const auto w = cwt_morlet(wctest::signal(64, 0), make_scale_grid(1, 6, 1));
    CHECK(w.cone_warning == std::vector<bool>{false, false, false, false, false, true});
}

TEST_CASE("CWT input checks") {
    CHECK_THROWS_AS(cwt_morlet(std::vector<double>(4, 1.0), make_scale_grid(1, 2, 1)), InvalidArgument);
    ScaleGrid tiny;
    tiny.scales = {0.5};
    CHECK_THROWS_AS(cwt_morlet(std::vector<double>(16, 1.0), tiny), InvalidArgument);
}

TEST_CASE("smoothing preserves constants and nonnegativity") {
    const auto grid = make_scale_grid(1, 6, 8);
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(grid.size()), 64, 3.25);
    CHECK((smooth_spectrum(c, grid) - c).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXd r(static_cast<Eigen::Index>(grid.size()), 64);
    auto rng = make_rng(4, "smooth");
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = uniform01(rng);
    CHECK(smooth_spectrum(r, grid).minCoeff() >= 0.0);
    CHECK(scale_window_rows(grid, {}) == 5);
    CHECK(scale_window_rows(make_scale_grid(1, 4, 4), {}) == 3);
}

TEST_CASE("impulse smoothing matches direct convolution") {
    const auto& o = wctest::oracle()["impulse_smoothing"];
    const auto grid = make_scale_grid(1, 4, 4);
    Eigen::MatrixXd impulse = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.size()), 64);
    const int row = o["row"];
    const int col = o["col"];
    impulse(row, col) = 1.0;
    const auto s = smooth_spectrum(impulse, grid);
    CHECK(s.sum() == doctest::Approx(1.0).epsilon(1e-12));
    Eigen::Index r = 0, c = 0;
    s.maxCoeff(&r, &c);
    CHECK(c == col);
    CHECK(std::abs(r - row) <= 1);  // flat boxcar across the scale window
    CHECK(s(row, col) == doctest::Approx(s.maxCoeff()));
    for (Eigen::Index j = 0; j < s.rows(); ++j)
        for (Eigen::Index k = 0; k < s.cols(); ++k) CHECK(std::abs(s(j, k) - o["values"][j][k].get<double>()) < 1e-12);
}

TEST_CASE("complex and real smoothing agree") {
    const auto grid = make_scale_grid(1, 4, 4);
    const auto w = cwt_morlet(wctest::signal(64, 2), grid);
    const ComplexMatrix s = smooth_spectrum(w.values, grid);
    CHECK((s.real() - smooth_spectrum(Eigen::MatrixXd(w.values.real()), grid)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(smooth_spectrum(Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 8)), grid), InvalidArgument);
}

TEST_CASE("spectrum binary round trip and truncation") {
    const auto w = cwt_morlet(wctest::signal(32, 1), make_scale_grid(1, 3, 2));
    std::stringstream buf;
    write_spectrum_binary(buf, w.values);
    CHECK(buf.str().size() == 8 + static_cast<std::size_t>(w.values.size()) * 16);
    const auto back = read_spectrum_binary(buf);
    CHECK(back == w.values);

    std::string truncated = buf.str().substr(0, 20);
    std::stringstream bad(truncated);
    CHECK_THROWS_AS(read_spectrum_binary(bad), DataError);

    std::stringstream mag;
    write_spectrum_magnitude_csv(mag, w);
    std::string first;
    std::getline(mag, first);
    CHECK(first.rfind("scale,", 0) == 0);
}
