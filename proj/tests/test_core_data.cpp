#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "wavecluster/core_data.hpp"
#include "wavecluster/error.hpp"

using namespace wavecluster;

TEST_CASE("slice_series cuts contiguous curves") {
    SampledSignal s;
    s.values = {0, 1, 2, 3, 4, 5, 6, 7};
    auto r = slice_series(s, 4);
    REQUIRE(r.dataset.size() == 2);
    CHECK(r.dataset.curves[0] == std::vector<double>{0, 1, 2, 3});
    CHECK(r.dataset.curves[1] == std::vector<double>{4, 5, 6, 7});
    CHECK(r.remainder == 0);
    CHECK(r.dataset.origin_index == std::vector<std::size_t>{0, 4});
}

TEST_CASE("slice_series reports the remainder") {
    SampledSignal s;
    for (int i = 0; i <= 8; ++i) s.values.push_back(i);
    auto r = slice_series(s, 4);
    CHECK(r.dataset.size() == 2);
    CHECK(r.remainder == 1);
}

TEST_CASE("a year of half-hourly readings gives 365 daily curves") {
    SampledSignal s;
    s.values.assign(17520, 1.0);
    s.sampling_step = 0.5;
    auto r = slice_series(s, 48);
    CHECK(r.dataset.size() == 365);
    CHECK(r.dataset.length() == 48);
    CHECK(r.remainder == 0);
}

TEST_CASE("slice_series rejects bad inputs") {
    SampledSignal s;
    s.values = {1, 2, 3};
    CHECK_THROWS_AS(slice_series(s, 4), InvalidArgument);
    CHECK_THROWS_AS(slice_series(s, 1), InvalidArgument);
    s.values = {1, NAN, 3, 4};
    CHECK_THROWS_AS(slice_series(s, 2), InvalidArgument);
    SampledSignal empty;
    CHECK_THROWS_AS(slice_series(empty, 2), InvalidArgument);
}

TEST_CASE("resample_dyadic maps 48 points to 64") {
    std::vector<double> curve(48);
    for (std::size_t i = 0; i < curve.size(); ++i) curve[i] = std::sin(0.2 * static_cast<double>(i));
    auto r = resample_dyadic(curve, 6);
    CHECK(r.values.size() == 64);
    CHECK_FALSE(r.downsampled);
    CHECK(r.values.front() == doctest::Approx(curve.front()).epsilon(1e-12));
    CHECK(r.values.back() == doctest::Approx(curve.back()).epsilon(1e-12));
}

TEST_CASE("resample_dyadic is the identity on an existing dyadic grid") {
    const auto curve = wctest::signal(64, 3);
    auto r = resample_dyadic(curve, 6);
    CHECK(r.values == curve);
}

TEST_CASE("a linear ramp stays a linear ramp") {
    for (unsigned levels : {3u, 5u, 7u, 10u}) {
        std::vector<double> ramp(37);
        for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 2.5 - 0.75 * static_cast<double>(i);
        auto r = resample_dyadic(ramp, levels);
        const auto m = r.values.size();
        for (std::size_t k = 0; k < m; ++k) {
            // direct evaluation of the ramp at x = k/(m-1) on the knot scale
            const double x = static_cast<double>(k) / static_cast<double>(m - 1) * 36.0;
            CHECK(std::abs(r.values[k] - (2.5 - 0.75 * x)) <= 1e-9);
        }
    }
}

TEST_CASE("downsampling is flagged") {
    std::vector<double> curve(100, 1.0);
    auto r = resample_dyadic(curve, 5);
    CHECK(r.downsampled);
    CHECK(r.values.size() == 32);
}

TEST_CASE("natural cubic spline interpolates its knots") {
    const auto y = wctest::signal(20, 1);
    NaturalCubicSpline s(y);
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(s(static_cast<double>(i) / 19.0) == doctest::Approx(y[i]).epsilon(1e-12));
}

TEST_CASE("power-of-two helpers") {
    CHECK(is_power_of_two(1));
    CHECK(is_power_of_two(1024));
    CHECK_FALSE(is_power_of_two(0));
    CHECK_FALSE(is_power_of_two(48));
    CHECK(exact_log2(64) == 6u);
    CHECK_FALSE(exact_log2(65).has_value());
}

TEST_CASE("dataset CSV round trip is exact") {
    FunctionalDataset d;
    d.curves = {wctest::signal(16, 0), wctest::signal(16, 1)};
    d.curves[0][3] = 1e-300;
    d.curves[1][5] = -123456789.125;
    std::stringstream buf;
    write_dataset_csv(buf, d);
    auto back = read_dataset_csv(buf);
    CHECK(back.curves == d.curves);
}

TEST_CASE("dataset CSV accepts headers and comments, rejects ragged rows") {
    std::stringstream ok("# exported\nt0,t1,t2\n1,2,3\n4,5,6\n");
    auto d = read_dataset_csv(ok);
    CHECK(d.size() == 2);
    CHECK(d.length() == 3);

    std::stringstream ragged("1,2,3\n4,5\n");
    CHECK_THROWS_AS(read_dataset_csv(ragged), DataError);
    std::stringstream junk("1,2,3\n4,x,6\n");
    CHECK_THROWS_AS(read_dataset_csv(junk), DataError);
}

TEST_CASE("signal CSV and label CSV") {
    std::stringstream sig("value\n1.5\n2.5\n-3\n");
    auto s = read_signal_csv(sig, 0.5);
    CHECK(s.values == std::vector<double>{1.5, 2.5, -3});
    CHECK(s.sampling_step == 0.5);

    std::vector<int> labels = {0, 2, 1, 1};
    std::stringstream buf;
    write_labels_csv(buf, labels);
    CHECK(buf.str().rfind("id,label\n", 0) == 0);
    CHECK(read_labels_csv(buf) == labels);

    // partition files carry a third column
    std::stringstream part("id,label,distance\n0,1,0.5\n1,0,0.25\n");
    CHECK(read_labels_csv(part) == std::vector<int>{1, 0});
    std::stringstream bad("id,label\n0,1.5\n");
    CHECK_THROWS_AS(read_labels_csv(bad), DataError);
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-310, 6.02214076e23, 0.0}) {
        const auto text = format_double(v);
        CHECK(std::strtod(text.c_str(), nullptr) == v);
    }
    CHECK(format_double(1.0) == "1");
}
