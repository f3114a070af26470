#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "wavecluster/core_data.hpp"

namespace wavecluster {

struct LabelledDataset {
    FunctionalDataset dataset;
    std::vector<int> labels;
};

// f(x) = sin(5 pi x / L) + sin(2 pi x / L) + eps, x = 0..L-1, eps ~ N(0, sigma^2).
LabelledDataset gen_sinus(std::size_t n_curves, std::size_t length, double sigma, std::uint64_t seed,
                          int label = 0);

enum class FarKernel { Diagonal, Full };

struct FarModel {
    FarKernel kernel = FarKernel::Diagonal;
    double operator_norm = 0.8;  // spectral norm of the autoregressive operator
    double sigma = 1.0;
    std::size_t burn_in = 50;
    double bandwidth = 0.0;  // full kernel only; <= 0 means length / 10
    // false: successive states of one chain; true: every curve is the end
    // of its own chain.
    bool independent_draws = false;

    void validate() const;
};

// A = rho * B / ||B||_2 with B = diag(exp(-i/m)) or B_ij = exp(-|i-j| / bandwidth).
Eigen::MatrixXd far_operator(const FarModel& model, std::size_t length);

LabelledDataset gen_far(std::size_t n_curves, std::size_t length, const FarModel& model,
                        std::uint64_t seed, int label = 0);

struct BenchmarkOptions {
    std::size_t curves_per_class = 25;
    std::size_t length = 1024;
    double sinus_sigma = 1.0;
    double operator_norm = 0.8;
    double far_sigma = 1.0;
    // The benchmark uses a narrower full-kernel bandwidth and independent
    // draws so that the two FAR classes differ in their scale energies and
    // curves within a class are not near-copies of each other.
    double far_bandwidth = 10.0;  // <= 0 means length / 10
    bool independent_draws = true;
};

// Sinus (label 0), diagonal FAR (label 1), full FAR (label 2).
LabelledDataset gen_benchmark(std::uint64_t seed, const BenchmarkOptions& options = {});

}  // namespace wavecluster
