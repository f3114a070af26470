#include "wavecluster/clustering.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "wavecluster/core_data.hpp"
#include "wavecluster/error.hpp"
#include "wavecluster/parallel.hpp"
#include "wavecluster/random.hpp"

namespace wavecluster {

namespace {

struct Restart {
    std::vector<int> labels;
    Eigen::MatrixXd centers;
    double cost = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

// Nearest center, ties to the lowest index.
std::pair<int, double> nearest_center(const Eigen::MatrixXd& data, Eigen::Index row,
                                      const Eigen::MatrixXd& centers) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        const double d = (data.row(row) - centers.row(c)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return {best, best_d};
}

Eigen::MatrixXd plus_plus_seeding(const Eigen::MatrixXd& data, int k, Rng& rng) {
    const Eigen::Index n = data.rows();
    Eigen::MatrixXd centers(k, data.cols());
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    std::size_t first = uniform_index(rng, static_cast<std::size_t>(n));
    centers.row(0) = data.row(static_cast<Eigen::Index>(first));
    chosen[first] = true;
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = (data.row(i) - centers.row(0)).squaredNorm();

    for (int c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double running = 0.0;
            pick = d2.size() - 1;
            for (std::size_t i = 0; i < d2.size(); ++i) {
                running += d2[i];
                if (running > target && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            // every point coincides with a center already
            pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
        }
        chosen[pick] = true;
        centers.row(c) = data.row(static_cast<Eigen::Index>(pick));
        for (Eigen::Index i = 0; i < n; ++i)
            d2[static_cast<std::size_t>(i)] =
                std::min(d2[static_cast<std::size_t>(i)], (data.row(i) - centers.row(c)).squaredNorm());
    }
    return centers;
}

Restart lloyd(const Eigen::MatrixXd& data, int k, int max_iterations, Rng& rng) {
    const Eigen::Index n = data.rows();
    Restart r;
    r.centers = plus_plus_seeding(data, k, rng);
    r.labels.assign(static_cast<std::size_t>(n), -1);
    std::vector<double> dist(static_cast<std::size_t>(n));
    [[maybe_unused]] double previous = std::numeric_limits<double>::infinity();

    for (int it = 0; it < max_iterations; ++it) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto [c, d] = nearest_center(data, i, r.centers);
            if (r.labels[static_cast<std::size_t>(i)] != c) changed = true;
            r.labels[static_cast<std::size_t>(i)] = c;
            dist[static_cast<std::size_t>(i)] = d;
        }
        r.iterations = it + 1;
        if (!changed && it > 0) break;

        // Repair empty clusters with the point farthest from its center.
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int l : r.labels) ++counts[static_cast<std::size_t>(l)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < dist.size(); ++i) {
                if (counts[static_cast<std::size_t>(r.labels[i])] <= 1) continue;
                if (dist[i] > far_d) {
                    far_d = dist[i];
                    far = i;
                }
            }
            --counts[static_cast<std::size_t>(r.labels[far])];
            r.labels[far] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            dist[far] = 0.0;
        }

        r.centers.setZero();
        for (Eigen::Index i = 0; i < n; ++i) r.centers.row(r.labels[static_cast<std::size_t>(i)]) += data.row(i);
        for (int c = 0; c < k; ++c) r.centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

        const double cost = kmeans_cost(data, r.labels, r.centers);
        assert(cost <= previous * (1.0 + 1e-12) + 1e-300);
        previous = cost;
    }
    r.cost = kmeans_cost(data, r.labels, r.centers);
    return r;
}

}  // namespace

double kmeans_cost(const Eigen::MatrixXd& data, const std::vector<int>& labels,
                   const Eigen::MatrixXd& centers) {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        cost += (data.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    return cost;
}

Partition kmeans(const Eigen::MatrixXd& data, int k, const KMeansOptions& options) {
    const Eigen::Index n = data.rows();
    if (k < 1) throw InvalidArgument("k must be at least 1");
    if (k > n)
        throw InvalidArgument("k (" + std::to_string(k) + ") exceeds the number of observations (" +
                              std::to_string(n) + ")");
    if (options.restarts < 1) throw InvalidArgument("restarts must be at least 1");
    if (!data.allFinite()) throw InvalidArgument("feature matrix has non-finite entries");

    std::vector<Restart> runs(static_cast<std::size_t>(options.restarts));
    parallel_for(runs.size(), [&](std::size_t r) {
        Rng rng = make_rng(options.seed, "kmeans", r);
        runs[r] = lloyd(data, k, options.max_iterations, rng);
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].cost < runs[best].cost) best = r;

    Partition p;
    p.k = k;
    p.labels = std::move(runs[best].labels);
    p.centers = std::move(runs[best].centers);
    p.cost = runs[best].cost;
    p.seed = options.seed;
    p.restarts = options.restarts;
    p.iterations = runs[best].iterations;
    return p;
}

JumpResult choose_k_by_jump(const Eigen::MatrixXd& data, int k_max, const KMeansOptions& options) {
    if (k_max < 2) throw InvalidArgument("k_max must be at least 2");
    const Eigen::Index n = data.rows();
    if (k_max > n) throw InvalidArgument("k_max exceeds the number of observations");
    const double p = static_cast<double>(data.cols());

    DistortionCurve curve;
    curve.power = p / 2.0;
    for (int k = 1; k <= k_max; ++k) {
        KMeansOptions opt = options;
        opt.seed = derive_seed(options.seed, "jump", static_cast<std::uint64_t>(k));
        const auto part = kmeans(data, k, opt);
        curve.k_values.push_back(k);
        double d = part.cost / (static_cast<double>(n) * p);
        // d_K is nonincreasing for exact minimizers; best-of-restarts can
        // miss that by a hair.
        if (!curve.distortion.empty()) d = std::min(d, curve.distortion.back());
        curve.distortion.push_back(d);
    }

    const double d1 = curve.distortion.front();
    const double zero_threshold = d1 * 1e-14;
    std::vector<double> log_y(curve.distortion.size());
    double max_log = -std::numeric_limits<double>::infinity();
    int first_zero = 0;
    for (std::size_t i = 0; i < curve.distortion.size(); ++i) {
        const double d = curve.distortion[i];
        if (d <= zero_threshold) {
            if (!first_zero) first_zero = curve.k_values[i];
            log_y[i] = std::numeric_limits<double>::infinity();
            continue;
        }
        log_y[i] = -curve.power * std::log(d);
        max_log = std::max(max_log, log_y[i]);
    }
    curve.log_scale = std::isfinite(max_log) ? max_log : 0.0;
    curve.capped = first_zero != 0;

    double previous = 0.0;
    double best_jump = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < log_y.size(); ++i) {
        const double y = std::isinf(log_y[i]) ? std::numeric_limits<double>::infinity()
                                               : std::exp(log_y[i] - curve.log_scale);
        curve.transformed.push_back(y);
        const double jump = std::isinf(y) && std::isinf(previous) ? 0.0 : y - previous;
        curve.jumps.push_back(jump);
        if (!curve.capped && jump > best_jump) {
            best_jump = jump;
            curve.best_k = curve.k_values[i];
        }
        previous = y;
    }
    if (curve.capped) curve.best_k = first_zero;
    return {curve.best_k, curve};
}

double pam_cost(const Eigen::MatrixXd& d, const std::vector<std::size_t>& medoids) {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (auto m : medoids) best = std::min(best, d(i, static_cast<Eigen::Index>(m)));
        cost += best;
    }
    return cost;
}

Partition pam(const DissimilarityMatrix& dm, int k, std::uint64_t seed) {
    dm.validate();
    const auto& d = dm.values;
    const Eigen::Index n = d.rows();
    if (k < 1) throw InvalidArgument("k must be at least 1");
    if (k > n)
        throw InvalidArgument("k (" + std::to_string(k) + ") exceeds the number of observations (" +
                              std::to_string(n) + ")");
    const auto un = static_cast<std::size_t>(n);

    // BUILD
    std::vector<std::size_t> medoids;
    std::vector<bool> is_medoid(un, false);
    std::vector<double> nearest(un, std::numeric_limits<double>::infinity());
    for (int step = 0; step < k; ++step) {
        std::size_t pick = un;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < un; ++c) {
            if (is_medoid[c]) continue;
            double gain = 0.0;
            for (std::size_t i = 0; i < un; ++i) {
                const double dc = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
                gain += step == 0 ? -dc : std::max(0.0, nearest[i] - dc);
            }
            if (gain > best_gain) {
                best_gain = gain;
                pick = c;
            }
        }
        medoids.push_back(pick);
        is_medoid[pick] = true;
        for (std::size_t i = 0; i < un; ++i)
            nearest[i] = std::min(nearest[i], d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(pick)));
    }

    // SWAP: steepest descent over all (medoid, non-medoid) exchanges.
    int swaps = 0;
    std::vector<double> first(un), second(un);
    std::vector<std::size_t> owner(un);
    double cost = pam_cost(d, medoids);
    for (;;) {
        for (std::size_t i = 0; i < un; ++i) {
            first[i] = second[i] = std::numeric_limits<double>::infinity();
            for (std::size_t m = 0; m < medoids.size(); ++m) {
                const double v = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(medoids[m]));
                if (v < first[i]) {
                    second[i] = first[i];
                    first[i] = v;
                    owner[i] = m;
                } else if (v < second[i]) {
                    second[i] = v;
                }
            }
        }
        double best_delta = 0.0;
        std::size_t best_m = 0, best_h = 0;
        for (std::size_t m = 0; m < medoids.size(); ++m) {
            for (std::size_t h = 0; h < un; ++h) {
                if (is_medoid[h]) continue;
                double delta = 0.0;
                for (std::size_t i = 0; i < un; ++i) {
                    const double dh = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h));
                    const double replacement = owner[i] == m ? std::min(second[i], dh) : std::min(first[i], dh);
                    delta += replacement - first[i];
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_m = m;
                    best_h = h;
                }
            }
        }
        if (!(best_delta < -1e-12 * std::max(1.0, cost))) break;
        is_medoid[medoids[best_m]] = false;
        medoids[best_m] = best_h;
        is_medoid[best_h] = true;
        cost = pam_cost(d, medoids);
        ++swaps;
    }

    std::sort(medoids.begin(), medoids.end());
    Partition p;
    p.k = k;
    p.medoids = medoids;
    p.seed = seed;
    p.iterations = swaps;
    p.labels.resize(un);
    p.cost = 0.0;
    for (std::size_t i = 0; i < un; ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < medoids.size(); ++m) {
            const double v = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(medoids[m]));
            if (v < best_d) {
                best_d = v;
                best = static_cast<int>(m);
            }
        }
        p.labels[i] = best;
        p.cost += best_d;
    }
    return p;
}

std::vector<double> distances_to_representative(const Eigen::MatrixXd& data, const Partition& p) {
    std::vector<double> out(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        out[static_cast<std::size_t>(i)] = (data.row(i) - p.centers.row(p.labels[static_cast<std::size_t>(i)])).norm();
    return out;
}

std::vector<double> distances_to_medoid(const DissimilarityMatrix& d, const Partition& p) {
    std::vector<double> out(p.labels.size());
    for (std::size_t i = 0; i < p.labels.size(); ++i)
        out[i] = d.values(static_cast<Eigen::Index>(i),
                          static_cast<Eigen::Index>(p.medoids[static_cast<std::size_t>(p.labels[i])]));
    return out;
}

void write_partition_csv(std::ostream& out, const Partition& p, const std::vector<double>& distances) {
    out << "id,label,distance\n";
    for (std::size_t i = 0; i < p.labels.size(); ++i)
        out << i << ',' << p.labels[i] << ',' << format_double(distances.at(i)) << '\n';
}

void write_distortion_csv(std::ostream& out, const DistortionCurve& curve) {
    out << "k,distortion,transformed,jump\n";
    for (std::size_t i = 0; i < curve.k_values.size(); ++i)
        out << curve.k_values[i] << ',' << format_double(curve.distortion[i]) << ','
            << format_double(curve.transformed[i]) << ',' << format_double(curve.jumps[i]) << '\n';
}

}  // namespace wavecluster
