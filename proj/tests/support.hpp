// Shared helpers for the test executables: the deterministic test signal
// mirrored by oracles/gen_oracles.py, access to the frozen oracle values,
// and brute-force reference implementations.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "wavecluster/random.hpp"

namespace wctest {

// Same formula as signal() in oracles/gen_oracles.py.
inline std::vector<double> signal(std::size_t n, int variant) {
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<long long>(i);
        const double x = static_cast<double>(i);
        const double noise = static_cast<double>((ii * 7919 + 31 * variant) % 13 - 6);
        z[i] = std::sin(0.37 * x + variant) + 0.6 * std::cos(0.011 * x * x + 0.5 * variant) + 0.1 * noise;
    }
    return z;
}

inline const nlohmann::json& oracle() {
    static const nlohmann::json data = [] {
        std::ifstream in(WC_ORACLE_PATH);
        return nlohmann::json::parse(in);
    }();
    return data;
}

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, std::uint64_t index = 0) {
    auto rng = wavecluster::make_rng(seed, "test-noise", index);
    wavecluster::NormalSampler normal;
    std::vector<double> z(n);
    for (auto& v : z) v = normal(rng);
    return z;
}

inline Eigen::MatrixXd gaussian_blobs(const Eigen::MatrixXd& centers, std::size_t per_blob, double sd,
                                      std::uint64_t seed, std::vector<int>* labels = nullptr) {
    auto rng = wavecluster::make_rng(seed, "test-blobs");
    wavecluster::NormalSampler normal;
    const auto k = static_cast<std::size_t>(centers.rows());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(k * per_blob), centers.cols());
    if (labels) labels->clear();
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < per_blob; ++i) {
            const auto row = static_cast<Eigen::Index>(c * per_blob + i);
            for (Eigen::Index j = 0; j < centers.cols(); ++j)
                x(row, j) = centers(static_cast<Eigen::Index>(c), j) + sd * normal(rng);
            if (labels) labels->push_back(static_cast<int>(c));
        }
    return x;
}

// ---- oracles ------------------------------------------------------------

// Orthonormal DWT matrix assembled from the periodized filter rows:
// level operators A_n (lowpass) and D_n (highpass) of size n/2 x n with
// entries A(k, (2k + m) mod n) += h[m], composed from the finest level
// down. Row order matches WaveletDecomposition::flatten().
inline Eigen::MatrixXd dwt_matrix(std::size_t n, const std::vector<double>& h) {
    const std::size_t len = h.size();
    std::vector<double> g(len);
    for (std::size_t k = 0; k < len; ++k) g[k] = ((k % 2) ? -1.0 : 1.0) * h[len - 1 - k];
    auto level = [&](std::size_t size, const std::vector<double>& f) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size / 2), static_cast<Eigen::Index>(size));
        for (std::size_t k = 0; k < size / 2; ++k)
            for (std::size_t t = 0; t < len; ++t)
                m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>((2 * k + t) % size)) += f[t];
        return m;
    };
    std::vector<Eigen::MatrixXd> detail_rows;  // finest first
    Eigen::MatrixXd chain = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t size = n; size >= 2; size /= 2) {
        detail_rows.push_back(level(size, g) * chain);
        chain = level(size, h) * chain;
    }
    Eigen::MatrixXd w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::Index row = 0;
    for (auto it = detail_rows.rbegin(); it != detail_rows.rend(); ++it) {
        w.middleRows(row, it->rows()) = *it;
        row += it->rows();
    }
    w.row(row) = chain.row(0);
    return w;
}

// Direct evaluation of the defining sum over all integer times t in a
// window of +-9a around k, with the curve extended periodically.
inline std::complex<double> cwt_direct(std::span<const double> z, double a, std::size_t k, double omega0 = 6.0,
                                       bool l1 = true) {
    const auto n = static_cast<long>(z.size());
    const long reach = static_cast<long>(std::ceil(9.0 * a));
    std::complex<double> acc = 0.0;
    for (long t = static_cast<long>(k) - reach; t <= static_cast<long>(k) + reach; ++t) {
        const double u = static_cast<double>(t - static_cast<long>(k)) / a;
        const std::complex<double> psi =
            std::pow(M_PI, -0.25) * std::exp(-0.5 * u * u) * std::exp(std::complex<double>(0.0, omega0 * u));
        acc += z[static_cast<std::size_t>(((t % n) + n) % n)] * std::conj(psi);
    }
    return acc * (l1 ? 1.0 / a : 1.0 / std::sqrt(a));
}

// Rand and adjusted Rand by enumerating all pairs.
struct PairCounts {
    double rand = 0.0;
    double adjusted = 0.0;
};
inline PairCounts rand_by_pairs(std::span<const int> a, std::span<const int> b) {
    const std::size_t n = a.size();
    double both = 0, only_a = 0, only_b = 0, neither = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            if (sa && sb) ++both;
            else if (sa) ++only_a;
            else if (sb) ++only_b;
            else ++neither;
        }
    const double pairs = both + only_a + only_b + neither;
    PairCounts out;
    out.rand = (both + neither) / pairs;
    const double sum_a = both + only_a;
    const double sum_b = both + only_b;
    const double expected = sum_a * sum_b / pairs;
    const double max_index = 0.5 * (sum_a + sum_b);
    out.adjusted = max_index == expected ? 1.0 : (both - expected) / (max_index - expected);
    return out;
}

// Minimum disagreements over all injective relabelings (brute force).
inline std::size_t misclassified_by_permutation(std::span<const int> pred, std::span<const int> truth, int k) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = pred.size();
    do {
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (perm[static_cast<std::size_t>(pred[i])] != truth[i]) ++wrong;
        best = std::min(best, wrong);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

inline double medoid_cost(const Eigen::MatrixXd& d, const std::vector<std::size_t>& medoids) {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        double best = INFINITY;
        for (auto m : medoids) best = std::min(best, d(i, static_cast<Eigen::Index>(m)));
        cost += best;
    }
    return cost;
}

// True when no (medoid, non-medoid) exchange lowers the cost by more than
// `tolerance`, checked exhaustively.
inline bool swap_optimal(const Eigen::MatrixXd& d, const std::vector<std::size_t>& medoids, double tolerance) {
    const double base = medoid_cost(d, medoids);
    for (std::size_t slot = 0; slot < medoids.size(); ++slot)
        for (Eigen::Index h = 0; h < d.rows(); ++h) {
            const auto cand = static_cast<std::size_t>(h);
            if (std::find(medoids.begin(), medoids.end(), cand) != medoids.end()) continue;
            auto trial = medoids;
            trial[slot] = cand;
            if (medoid_cost(d, trial) < base - tolerance) return false;
        }
    return true;
}

inline Eigen::MatrixXd random_dissimilarity(std::size_t n, std::uint64_t seed) {
    auto rng = wavecluster::make_rng(seed, "test-dissimilarity");
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), 3);
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        for (Eigen::Index j = 0; j < 3; ++j) pts(i, j) = wavecluster::uniform01(rng);
    Eigen::MatrixXd d(pts.rows(), pts.rows());
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        for (Eigen::Index j = 0; j < pts.rows(); ++j) d(i, j) = (pts.row(i) - pts.row(j)).norm();
    return d;
}

}  // namespace wctest
