#include "wavecluster/simulation.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "wavecluster/error.hpp"
#include "wavecluster/random.hpp"

namespace wavecluster {

LabelledDataset gen_sinus(std::size_t n_curves, std::size_t length, double sigma, std::uint64_t seed,
                          int label) {
    if (length < 8) throw InvalidArgument("sinus curves need at least 8 samples");
    if (sigma < 0.0) throw InvalidArgument("noise sigma must be nonnegative");
    const double len = static_cast<double>(length);
    std::vector<double> clean(length);
    for (std::size_t x = 0; x < length; ++x) {
        const double t = static_cast<double>(x);
        clean[x] = std::sin(5.0 * std::numbers::pi * t / len) + std::sin(2.0 * std::numbers::pi * t / len);
    }
    LabelledDataset out;
    out.dataset.segment_length = length;
    for (std::size_t i = 0; i < n_curves; ++i) {
        Rng rng = make_rng(seed, "sinus", i);
        NormalSampler normal;
        std::vector<double> curve = clean;
        for (auto& v : curve) v += sigma * normal(rng);
        out.dataset.curves.push_back(std::move(curve));
        out.labels.push_back(label);
    }
    return out;
}

void FarModel::validate() const {
    if (!(operator_norm >= 0.0 && operator_norm < 1.0))
        throw InvalidArgument("FAR operator norm must lie in [0, 1) for stationarity");
    if (sigma < 0.0) throw InvalidArgument("FAR noise sigma must be nonnegative");
}

namespace {

double spectral_norm_symmetric(const Eigen::MatrixXd& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Eigen::MatrixXd far_operator(const FarModel& model, std::size_t length) {
    model.validate();
    if (length < 8) throw InvalidArgument("FAR grid needs at least 8 points");
    const auto m = static_cast<Eigen::Index>(length);
    const double len = static_cast<double>(length);
    Eigen::MatrixXd b(m, m);
    if (model.kernel == FarKernel::Diagonal) {
        b.setZero();
        for (Eigen::Index i = 0; i < m; ++i) b(i, i) = std::exp(-static_cast<double>(i) / len);
        return model.operator_norm * b;  // ||B||_2 = b(0,0) = 1
    }
    const double bw = model.bandwidth > 0.0 ? model.bandwidth : len / 10.0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) b(i, j) = std::exp(-std::abs(static_cast<double>(i - j)) / bw);

    // The eigen-solve dominates generation time; benchmarks reuse a handful
    // of (length, bandwidth) pairs.
    static std::mutex cache_mutex;
    static std::map<std::pair<Eigen::Index, double>, double> norm_cache;
    double norm = 0.0;
    {
        std::lock_guard lock(cache_mutex);
        auto it = norm_cache.find({m, bw});
        if (it != norm_cache.end()) norm = it->second;
    }
    if (norm == 0.0) {
        norm = spectral_norm_symmetric(b);
        std::lock_guard lock(cache_mutex);
        norm_cache[{m, bw}] = norm;
    }
    return (model.operator_norm / norm) * b;
}

LabelledDataset gen_far(std::size_t n_curves, std::size_t length, const FarModel& model,
                        std::uint64_t seed, int label) {
    const Eigen::MatrixXd a = far_operator(model, length);
    const bool diagonal = model.kernel == FarKernel::Diagonal;
    const auto m = static_cast<Eigen::Index>(length);

    auto step = [&](Eigen::VectorXd& f, Rng& rng, NormalSampler& normal) {
        Eigen::VectorXd next = diagonal ? Eigen::VectorXd(a.diagonal().cwiseProduct(f)) : Eigen::VectorXd(a * f);
        for (Eigen::Index i = 0; i < m; ++i) next(i) += model.sigma * normal(rng);
        f = std::move(next);
    };

    LabelledDataset out;
    out.dataset.segment_length = length;
    auto emit = [&](const Eigen::VectorXd& f) {
        out.dataset.curves.emplace_back(f.data(), f.data() + f.size());
        out.labels.push_back(label);
    };

    if (model.independent_draws) {
        for (std::size_t c = 0; c < n_curves; ++c) {
            Rng rng = make_rng(seed, "far-chain", c);
            NormalSampler normal;
            Eigen::VectorXd f = Eigen::VectorXd::Zero(m);
            for (std::size_t t = 0; t <= model.burn_in; ++t) step(f, rng, normal);
            emit(f);
        }
        return out;
    }
    Rng rng = make_rng(seed, "far-chain", 0);
    NormalSampler normal;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(m);
    for (std::size_t t = 0; t < model.burn_in; ++t) step(f, rng, normal);
    for (std::size_t c = 0; c < n_curves; ++c) {
        step(f, rng, normal);
        emit(f);
    }
    return out;
}

LabelledDataset gen_benchmark(std::uint64_t seed, const BenchmarkOptions& options) {
    FarModel diag;
    diag.kernel = FarKernel::Diagonal;
    diag.operator_norm = options.operator_norm;
    diag.sigma = options.far_sigma;
    diag.independent_draws = options.independent_draws;
    diag.bandwidth = options.far_bandwidth;
    FarModel full = diag;
    full.kernel = FarKernel::Full;

    LabelledDataset out = gen_sinus(options.curves_per_class, options.length, options.sinus_sigma,
                                    derive_seed(seed, "benchmark-sinus"), 0);
    for (auto [model, label, tag] : {std::tuple{diag, 1, "benchmark-far-diagonal"},
                                     std::tuple{full, 2, "benchmark-far-full"}}) {
        auto part = gen_far(options.curves_per_class, options.length, model, derive_seed(seed, tag), label);
        for (std::size_t i = 0; i < part.labels.size(); ++i) {
            out.dataset.curves.push_back(std::move(part.dataset.curves[i]));
            out.labels.push_back(part.labels[i]);
        }
    }
    return out;
}

}  // namespace wavecluster
