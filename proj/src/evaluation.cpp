#include "wavecluster/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "wavecluster/core_data.hpp"
#include "wavecluster/error.hpp"

namespace wavecluster {

namespace {

// Relabels arbitrary integer labels to 0..K-1 in ascending label order.
std::vector<int> compact_labels(std::span<const int> labels, int& k) {
    std::map<int, int> index;
    for (int l : labels) index.emplace(l, 0);
    int next = 0;
    for (auto& [label, id] : index) id = next++;
    k = next;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = index[labels[i]];
    return out;
}

std::vector<std::vector<std::size_t>> contingency_table(const std::vector<int>& a, int ka,
                                                        const std::vector<int>& b, int kb) {
    std::vector<std::vector<std::size_t>> table(static_cast<std::size_t>(ka),
                                                std::vector<std::size_t>(static_cast<std::size_t>(kb), 0));
    for (std::size_t i = 0; i < a.size(); ++i) ++table[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])];
    return table;
}

// Minimum-cost perfect assignment on a square matrix; returns column for
// each row.
std::vector<int> hungarian(const std::vector<std::vector<long long>>& cost) {
    const std::size_t n = cost.size();
    constexpr long long inf = std::numeric_limits<long long>::max() / 4;
    std::vector<long long> u(n + 1, 0), v(n + 1, 0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<long long> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            long long delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const long long cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (std::size_t j = 1; j <= n; ++j)
        if (p[j]) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
    return row_to_col;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

Misclassification misclassification(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size())
        throw InvalidArgument("label vectors differ in length (" + std::to_string(predicted.size()) +
                              " vs " + std::to_string(truth.size()) + ")");
    if (predicted.empty()) throw InvalidArgument("label vectors are empty");
    int kp = 0, kt = 0;
    const auto p = compact_labels(predicted, kp);
    const auto t = compact_labels(truth, kt);
    Misclassification out;
    out.contingency = contingency_table(p, kp, t, kt);

    const std::size_t m = static_cast<std::size_t>(std::max(kp, kt));
    std::vector<std::vector<long long>> cost(m, std::vector<long long>(m, 0));
    for (std::size_t i = 0; i < static_cast<std::size_t>(kp); ++i)
        for (std::size_t j = 0; j < static_cast<std::size_t>(kt); ++j)
            cost[i][j] = -static_cast<long long>(out.contingency[i][j]);
    const auto assignment = hungarian(cost);

    std::size_t matched = 0;
    out.matching.assign(static_cast<std::size_t>(kp), -1);
    for (std::size_t i = 0; i < static_cast<std::size_t>(kp); ++i) {
        const int j = assignment[i];
        if (j >= 0 && j < kt) {
            out.matching[i] = j;
            matched += out.contingency[i][static_cast<std::size_t>(j)];
        }
    }
    out.count = predicted.size() - matched;
    out.rate = static_cast<double>(out.count) / static_cast<double>(predicted.size());
    return out;
}

RandIndices rand_indices(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw InvalidArgument("label vectors differ in length");
    if (a.size() < 2) throw InvalidArgument("Rand indices need at least 2 observations");
    int ka = 0, kb = 0;
    const auto la = compact_labels(a, ka);
    const auto lb = compact_labels(b, kb);
    const auto table = contingency_table(la, ka, lb, kb);

    double sum_cells = 0.0;
    std::vector<double> rows(static_cast<std::size_t>(ka), 0.0), cols(static_cast<std::size_t>(kb), 0.0);
    for (std::size_t i = 0; i < table.size(); ++i)
        for (std::size_t j = 0; j < table[i].size(); ++j) {
            const double c = static_cast<double>(table[i][j]);
            sum_cells += choose2(c);
            rows[i] += c;
            cols[j] += c;
        }
    double sum_rows = 0.0, sum_cols = 0.0;
    for (double r : rows) sum_rows += choose2(r);
    for (double c : cols) sum_cols += choose2(c);
    const double pairs = choose2(static_cast<double>(a.size()));

    RandIndices out;
    out.rand = (pairs + 2.0 * sum_cells - sum_rows - sum_cols) / pairs;
    const double expected = sum_rows * sum_cols / pairs;
    const double maximum = 0.5 * (sum_rows + sum_cols);
    out.adjusted = maximum == expected ? 1.0 : (sum_cells - expected) / (maximum - expected);
    return out;
}

ValidationReport validate_partition(std::span<const int> predicted, std::span<const int> truth) {
    return {misclassification(predicted, truth), rand_indices(predicted, truth)};
}

void write_validation_json(std::ostream& out, const ValidationReport& report) {
    nlohmann::json doc;
    doc["misclassified"] = report.error.count;
    doc["misclassification_rate"] = report.error.rate;
    doc["contingency"] = report.error.contingency;
    doc["matching"] = report.error.matching;
    doc["rand_index"] = report.rand.rand;
    doc["adjusted_rand_index"] = report.rand.adjusted;
    out << doc.dump(2) << '\n';
}

namespace {

double shadow_from(double d1, double d2) {
    const double denom = d1 + d2;
    if (!(denom > 0.0)) return 0.0;
    return std::clamp(2.0 * d1 / denom, 0.0, 1.0);
}

}  // namespace

std::vector<double> shadow_values(const Eigen::MatrixXd& data, const Partition& partition) {
    if (partition.k < 2) throw InvalidArgument("shadow values need at least 2 clusters");
    if (partition.centers.rows() != partition.k || partition.centers.cols() != data.cols())
        throw InvalidArgument("partition centers do not match the feature space");
    std::vector<double> out(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const int own = partition.labels[static_cast<std::size_t>(i)];
        const double d1 = (data.row(i) - partition.centers.row(own)).norm();
        double d2 = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < partition.centers.rows(); ++c)
            if (c != own) d2 = std::min(d2, (data.row(i) - partition.centers.row(c)).norm());
        out[static_cast<std::size_t>(i)] = shadow_from(d1, d2);
    }
    return out;
}

std::vector<double> shadow_values(const DissimilarityMatrix& d, const Partition& partition) {
    if (partition.k < 2) throw InvalidArgument("shadow values need at least 2 clusters");
    if (partition.medoids.size() != static_cast<std::size_t>(partition.k))
        throw InvalidArgument("partition has no medoids");
    std::vector<double> out(partition.labels.size());
    for (std::size_t i = 0; i < partition.labels.size(); ++i) {
        const auto own = static_cast<std::size_t>(partition.labels[i]);
        const auto row = static_cast<Eigen::Index>(i);
        const double d1 = d.values(row, static_cast<Eigen::Index>(partition.medoids[own]));
        double d2 = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < partition.medoids.size(); ++m)
            if (m != own) d2 = std::min(d2, d.values(row, static_cast<Eigen::Index>(partition.medoids[m])));
        out[i] = shadow_from(d1, d2);
    }
    return out;
}

std::vector<std::size_t> convex_hull(const Eigen::MatrixXd& points, std::span<const std::size_t> subset) {
    std::vector<std::size_t> idx(subset.begin(), subset.end());
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto ra = static_cast<Eigen::Index>(a), rb = static_cast<Eigen::Index>(b);
        if (points(ra, 0) != points(rb, 0)) return points(ra, 0) < points(rb, 0);
        if (points(ra, 1) != points(rb, 1)) return points(ra, 1) < points(rb, 1);
        return a < b;
    });
    idx.erase(std::unique(idx.begin(), idx.end(),
                          [&](std::size_t a, std::size_t b) {
                              const auto ra = static_cast<Eigen::Index>(a), rb = static_cast<Eigen::Index>(b);
                              return points(ra, 0) == points(rb, 0) && points(ra, 1) == points(rb, 1);
                          }),
              idx.end());
    if (idx.size() < 3) return idx;
    auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
        const auto ro = static_cast<Eigen::Index>(o), ra = static_cast<Eigen::Index>(a),
                   rb = static_cast<Eigen::Index>(b);
        return (points(ra, 0) - points(ro, 0)) * (points(rb, 1) - points(ro, 1)) -
               (points(ra, 1) - points(ro, 1)) * (points(rb, 0) - points(ro, 0));
    };
    std::vector<std::size_t> hull(2 * idx.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], idx[i]) <= 0.0) --k;
        hull[k++] = idx[i];
    }
    for (std::size_t i = idx.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], idx[i]) <= 0.0) --k;
        hull[k++] = idx[i];
    }
    hull.resize(k - 1);
    return hull;
}

NeighborhoodGraph neighborhood_graph(const Eigen::MatrixXd& data, const Partition& partition) {
    const Eigen::Index n = data.rows();
    const int k = partition.k;
    if (k < 2) throw InvalidArgument("neighborhood graph needs at least 2 clusters");
    if (n < k + 2) throw InvalidArgument("neighborhood graph needs at least k + 2 observations");
    const auto shadows = shadow_values(data, partition);

    NeighborhoodGraph g;
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(1, n - 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd values = eig.eigenvalues();  // ascending
    const Eigen::Index p = data.cols();
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(p, 2);
    const double top = values(p - 1);
    g.rank = 0;
    for (int c = 0; c < 2 && c < p; ++c) {
        const Eigen::Index col = p - 1 - c;
        if (!(values(col) > 1e-12 * std::max(top, 0.0)) || !(top > 0.0)) break;
        Eigen::VectorXd v = eig.eigenvectors().col(col);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        basis.col(c) = v;
        ++g.rank;
    }
    g.point_positions = centered * basis;
    g.node_positions = (partition.centers.rowwise() - mean) * basis;

    // edges from each point's two nearest centers
    std::map<std::pair<int, int>, std::pair<double, std::size_t>> edges;
    std::vector<std::vector<double>> member_dist(static_cast<std::size_t>(k));
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
        int first = -1, second = -1;
        double d_first = std::numeric_limits<double>::infinity(), d_second = d_first;
        for (int c = 0; c < k; ++c) {
            const double d = (data.row(i) - partition.centers.row(c)).norm();
            if (d < d_first) {
                second = first;
                d_second = d_first;
                first = c;
                d_first = d;
            } else if (d < d_second) {
                second = c;
                d_second = d;
            }
        }
        auto& slot = edges[{std::min(first, second), std::max(first, second)}];
        slot.first += shadows[static_cast<std::size_t>(i)];
        ++slot.second;

        const int own = partition.labels[static_cast<std::size_t>(i)];
        members[static_cast<std::size_t>(own)].push_back(static_cast<std::size_t>(i));
        member_dist[static_cast<std::size_t>(own)].push_back((data.row(i) - partition.centers.row(own)).norm());
    }
    for (const auto& [key, acc] : edges)
        g.edges.push_back({key.first, key.second, acc.first / static_cast<double>(acc.second), acc.second});

    g.inner_hulls.resize(static_cast<std::size_t>(k));
    g.outer_hulls.resize(static_cast<std::size_t>(k));
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
        if (members[c].empty()) continue;
        auto sorted = member_dist[c];
        std::sort(sorted.begin(), sorted.end());
        const std::size_t m = sorted.size();
        const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
        std::vector<std::size_t> inner, outer;
        for (std::size_t t = 0; t < m; ++t) {
            if (member_dist[c][t] <= median) inner.push_back(members[c][t]);
            if (member_dist[c][t] <= 2.5 * median) outer.push_back(members[c][t]);
        }
        g.inner_hulls[c] = convex_hull(g.point_positions, inner);
        g.outer_hulls[c] = convex_hull(g.point_positions, outer);
    }
    return g;
}

void write_graph_dot(std::ostream& out, const NeighborhoodGraph& graph) {
    out << "graph neighborhood {\n";
    for (Eigen::Index c = 0; c < graph.node_positions.rows(); ++c)
        out << "  c" << c << " [pos=\"" << format_double(graph.node_positions(c, 0)) << ','
            << format_double(graph.node_positions(c, 1)) << "!\"];\n";
    for (const auto& e : graph.edges)
        out << "  c" << e.from << " -- c" << e.to << " [weight=" << format_double(e.weight)
            << ", support=" << e.support << "];\n";
    out << "}\n";
}

void write_graph_points_csv(std::ostream& out, const NeighborhoodGraph& graph, const Partition& partition) {
    std::vector<int> inner(static_cast<std::size_t>(graph.point_positions.rows()), 0), outer = inner;
    for (const auto& hull : graph.inner_hulls)
        for (auto i : hull) inner[i] = 1;
    for (const auto& hull : graph.outer_hulls)
        for (auto i : hull) outer[i] = 1;
    out << "id,label,pc1,pc2,inner_hull_vertex,outer_hull_vertex\n";
    for (Eigen::Index i = 0; i < graph.point_positions.rows(); ++i)
        out << i << ',' << partition.labels[static_cast<std::size_t>(i)] << ','
            << format_double(graph.point_positions(i, 0)) << ',' << format_double(graph.point_positions(i, 1))
            << ',' << inner[static_cast<std::size_t>(i)] << ',' << outer[static_cast<std::size_t>(i)] << '\n';
}

}  // namespace wavecluster
