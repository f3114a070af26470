#include "wavecluster/feature_select.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "wavecluster/clustering.hpp"
#include "wavecluster/error.hpp"
#include "wavecluster/parallel.hpp"
#include "wavecluster/random.hpp"

namespace wavecluster {

namespace {

// Best two-group split of sorted values, via prefix sums.
double best_split_sse(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    std::vector<double> s(n + 1, 0.0), s2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        s[i + 1] = s[i] + v[i];
        s2[i + 1] = s2[i] + v[i] * v[i];
    }
    auto sse = [&](std::size_t lo, std::size_t hi) {
        const double m = static_cast<double>(hi - lo);
        const double sum = s[hi] - s[lo];
        return std::max(0.0, (s2[hi] - s2[lo]) - sum * sum / m);
    };
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t cut = 1; cut < n; ++cut) best = std::min(best, sse(0, cut) + sse(cut, n));
    return best;
}

double column_total_ss(const Eigen::VectorXd& col) {
    return (col.array() - col.mean()).square().sum();
}

// Within-cluster sum of squares of one column for a given labelling.
double column_within_ss(const Eigen::VectorXd& col, const std::vector<int>& labels, int k) {
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0), sq(static_cast<std::size_t>(k), 0.0);
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
        const auto c = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
        sum[c] += col(i);
        sq[c] += col(i) * col(i);
        ++count[c];
    }
    double w = 0.0;
    for (std::size_t c = 0; c < sum.size(); ++c)
        if (count[c] > 0) w += std::max(0.0, sq[c] - sum[c] * sum[c] / count[c]);
    return w;
}

std::vector<int> mask_to_features(std::uint32_t mask, const std::vector<int>& pool) {
    std::vector<int> out;
    for (std::size_t b = 0; b < pool.size(); ++b)
        if (mask & (1u << b)) out.push_back(pool[b]);
    return out;
}

// Orders (score, subset) pairs: lower score first, then lexicographic.
bool better(double score_a, const std::vector<int>& a, double score_b, const std::vector<int>& b) {
    if (score_a != score_b) return score_a < score_b;
    return a < b;
}

}  // namespace

Eigen::MatrixXd range_normalize(const Eigen::MatrixXd& data) {
    Eigen::MatrixXd out(data.rows(), data.cols());
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const double lo = data.col(j).minCoeff();
        const double hi = data.col(j).maxCoeff();
        if (hi > lo)
            out.col(j) = (data.col(j).array() - lo) / (hi - lo);
        else
            out.col(j).setZero();
    }
    return out;
}

double clusterability_index(std::span<const double> column) {
    if (column.size() < 2) throw InvalidArgument("clusterability needs at least 2 values");
    const auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) return 0.0;
    std::vector<double> v(column.size());
    std::transform(column.begin(), column.end(), v.begin(), [&](double x) { return (x - lo) / (hi - lo); });
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double total = 0.0;
    for (double x : v) total += (x - mean) * (x - mean);
    if (!(total > 0.0)) return 0.0;
    return std::clamp(1.0 - best_split_sse(std::move(v)) / total, 0.0, 1.0);
}

double uniform_reference_quantile(std::size_t n, double quantile, int surrogates, std::uint64_t seed) {
    if (surrogates < 1) throw InvalidArgument("need at least one surrogate");
    if (!(quantile >= 0.0 && quantile <= 1.0)) throw InvalidArgument("screen quantile must lie in [0, 1]");
    std::vector<double> indices(static_cast<std::size_t>(surrogates));
    std::vector<double> column(n);
    for (int s = 0; s < surrogates; ++s) {
        Rng rng = make_rng(seed, "uniform-surrogate", static_cast<std::uint64_t>(s));
        for (auto& x : column) x = uniform01(rng);
        indices[static_cast<std::size_t>(s)] = clusterability_index(column);
    }
    std::sort(indices.begin(), indices.end());
    const double pos = quantile * static_cast<double>(indices.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, indices.size() - 1);
    return indices[lo] + (pos - static_cast<double>(lo)) * (indices[hi] - indices[lo]);
}

SelectionReport select_features(const Eigen::MatrixXd& features, const SelectionOptions& options) {
    const Eigen::Index n = features.rows();
    const Eigen::Index p = features.cols();
    if (p < 1 || p > 16) throw InvalidArgument("feature selection supports 1 to 16 features");
    if (n < 10) throw InvalidArgument("feature selection needs at least 10 observations");
    if (options.k < 2) throw InvalidArgument("k must be at least 2");
    if (options.k > n) throw InvalidArgument("k exceeds the number of observations");
    if (!features.allFinite()) throw InvalidArgument("feature matrix has non-finite entries");
    if (!(options.penalty >= 0.0)) throw InvalidArgument("penalty must be nonnegative");

    SelectionReport report;
    report.k = options.k;
    report.penalty = options.penalty;
    report.screen_threshold = uniform_reference_quantile(
        static_cast<std::size_t>(n), options.screen_quantile, options.surrogates,
        derive_seed(options.seed, "screen"));
    for (Eigen::Index j = 0; j < p; ++j) {
        const Eigen::VectorXd col = features.col(j);
        const double index = clusterability_index(std::span<const double>(col.data(), static_cast<std::size_t>(n)));
        report.clusterability.push_back(index);
        if (index > 0.0 && index >= report.screen_threshold) report.screened_in.push_back(static_cast<int>(j));
    }
    if (report.screened_in.empty()) {
        report.no_structure = true;
        return report;
    }

    const Eigen::MatrixXd normalized = range_normalize(features);
    const auto& pool = report.screened_in;
    const std::size_t s = pool.size();
    std::vector<double> total_ss(s);
    for (std::size_t b = 0; b < s; ++b) total_ss[b] = column_total_ss(normalized.col(pool[b]));

    const std::uint32_t full = (1u << s) - 1;
    std::vector<std::vector<int>> labels(full + 1);
    std::vector<double> sse(full + 1, 0.0);

    // criterion of a labelling restricted to the columns in `mask`
    auto criterion = [&](std::uint32_t mask, const std::vector<int>& lab) {
        double v = 0.0;
        for (std::size_t b = 0; b < s; ++b)
            v += (mask & (1u << b)) ? column_within_ss(normalized.col(pool[b]), lab, options.k) : total_ss[b];
        return v;
    };

    // Subsets grouped by size so every proper subset is finished before its
    // supersets inherit its labelling.
    std::vector<std::vector<std::uint32_t>> by_size(s + 1);
    for (std::uint32_t mask = 1; mask <= full; ++mask)
        by_size[static_cast<std::size_t>(std::popcount(mask))].push_back(mask);

    for (std::size_t size = 1; size <= s; ++size) {
        const auto& masks = by_size[size];
        parallel_for(masks.size(), [&](std::size_t t) {
            const std::uint32_t mask = masks[t];
            const auto cols = mask_to_features(mask, pool);
            Eigen::MatrixXd sub(n, static_cast<Eigen::Index>(cols.size()));
            for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = normalized.col(cols[c]);
            KMeansOptions km;
            km.restarts = options.restarts;
            km.seed = derive_seed(options.seed, "subset", mask);
            auto part = kmeans(sub, options.k, km);
            std::vector<int> best_labels = std::move(part.labels);
            double best = criterion(mask, best_labels);
            for (std::size_t b = 0; b < s; ++b) {
                if (!(mask & (1u << b)) || size == 1) continue;
                const std::uint32_t child = mask & ~(1u << b);
                const double v = criterion(mask, labels[child]);
                if (v < best) {
                    best = v;
                    best_labels = labels[child];
                }
            }
            labels[mask] = std::move(best_labels);
            sse[mask] = best;
        });
    }

    report.best_per_size.resize(s);
    double chosen_score = std::numeric_limits<double>::infinity();
    std::vector<int> chosen_features;
    for (std::size_t size = 1; size <= s; ++size) {
        SubsetScore best{{}, std::numeric_limits<double>::infinity(), 0.0};
        for (std::uint32_t mask : by_size[size]) {
            auto cols = mask_to_features(mask, pool);
            if (better(sse[mask], cols, best.sse, best.features) || best.features.empty())
                best = {cols, sse[mask], sse[mask] * (1.0 + options.penalty * static_cast<double>(size))};
            const double penalized = sse[mask] * (1.0 + options.penalty * static_cast<double>(size));
            if (better(penalized, cols, chosen_score, chosen_features) || chosen_features.empty()) {
                chosen_score = penalized;
                chosen_features = cols;
            }
        }
        report.best_per_size[size - 1] = std::move(best);
    }
    report.selected = chosen_features;
    return report;
}

StableSelection select_features_stable(const Eigen::MatrixXd& features, int k_max,
                                       SelectionOptions options) {
    if (k_max < 2) throw InvalidArgument("k_max must be at least 2");
    StableSelection out;
    const std::uint64_t master = options.seed;
    std::map<std::vector<int>, std::pair<int, int>> votes;  // subset -> (count, first k)
    for (int k = 2; k <= k_max; ++k) {
        options.k = k;
        options.seed = derive_seed(master, "select-k", static_cast<std::uint64_t>(k));
        auto report = select_features(features, options);
        auto [it, inserted] = votes.try_emplace(report.selected, 0, k);
        ++it->second.first;
        out.per_k.push_back(std::move(report));
    }
    int best_count = -1, best_first = 0;
    for (const auto& [subset, tally] : votes) {
        if (tally.first > best_count || (tally.first == best_count && tally.second < best_first)) {
            best_count = tally.first;
            best_first = tally.second;
            out.selected = subset;
        }
    }
    return out;
}

void write_selection_json(std::ostream& out, const StableSelection& selection,
                          const std::vector<std::string>& feature_labels) {
    auto label = [&](int j) {
        return j >= 0 && static_cast<std::size_t>(j) < feature_labels.size()
                   ? feature_labels[static_cast<std::size_t>(j)]
                   : std::to_string(j);
    };
    auto labels_of = [&](const std::vector<int>& cols) {
        nlohmann::json arr = nlohmann::json::array();
        for (int c : cols) arr.push_back(label(c));
        return arr;
    };
    nlohmann::json doc;
    doc["selected"] = selection.selected;
    doc["selected_labels"] = labels_of(selection.selected);
    nlohmann::json per_k = nlohmann::json::array();
    for (const auto& r : selection.per_k) {
        nlohmann::json item;
        item["k"] = r.k;
        item["clusterability"] = r.clusterability;
        item["screen_threshold"] = r.screen_threshold;
        item["screened_in"] = r.screened_in;
        item["penalty"] = r.penalty;
        item["no_structure"] = r.no_structure;
        item["selected"] = r.selected;
        nlohmann::json sizes = nlohmann::json::array();
        for (const auto& s : r.best_per_size)
            sizes.push_back({{"size", s.features.size()}, {"features", s.features},
                             {"sse", s.sse}, {"penalized", s.penalized}});
        item["best_per_size"] = sizes;
        per_k.push_back(item);
    }
    doc["per_k"] = per_k;
    out << doc.dump(2) << '\n';
}

}  // namespace wavecluster
