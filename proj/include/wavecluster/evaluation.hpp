#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wavecluster/clustering.hpp"
#include "wavecluster/dissimilarity.hpp"

namespace wavecluster {

struct Misclassification {
    std::size_t count = 0;
    double rate = 0.0;
    // matching[predicted label] = truth label it was mapped to, -1 if none
    std::vector<int> matching;
    std::vector<std::vector<std::size_t>> contingency;  // [pred][truth]
};

// Minimizes disagreements over one-to-one label matchings (Hungarian
// algorithm on the contingency table).
Misclassification misclassification(std::span<const int> predicted, std::span<const int> truth);

struct RandIndices {
    double rand = 0.0;
    double adjusted = 0.0;
};

RandIndices rand_indices(std::span<const int> a, std::span<const int> b);

struct ValidationReport {
    Misclassification error;
    RandIndices rand;
};

ValidationReport validate_partition(std::span<const int> predicted, std::span<const int> truth);
void write_validation_json(std::ostream& out, const ValidationReport& report);

// s(i) = 2 d1 / (d1 + d2) where d1 is the distance to the assigned center
// and d2 to the closest other center. 0 when both distances are zero.
std::vector<double> shadow_values(const Eigen::MatrixXd& data, const Partition& partition);
std::vector<double> shadow_values(const DissimilarityMatrix& d, const Partition& partition);

struct GraphEdge {
    int from = 0;
    int to = 0;
    double weight = 0.0;  // mean shadow of the points whose two nearest centers are {from, to}
    std::size_t support = 0;
};

struct NeighborhoodGraph {
    Eigen::MatrixXd node_positions;   // K x 2, centers on the principal plane
    Eigen::MatrixXd point_positions;  // n x 2
    std::vector<GraphEdge> edges;
    // Convex hull vertex indices (into the observations), counter-clockwise.
    std::vector<std::vector<std::size_t>> inner_hulls;  // distance <= median
    std::vector<std::vector<std::size_t>> outer_hulls;  // distance <= 2.5 median
    int rank = 2;  // < 2 when the feature covariance is degenerate
};

NeighborhoodGraph neighborhood_graph(const Eigen::MatrixXd& data, const Partition& partition);

// Convex hull (Andrew's monotone chain) of the selected points; returns
// indices into `points`, collinear points dropped.
std::vector<std::size_t> convex_hull(const Eigen::MatrixXd& points, std::span<const std::size_t> subset);

void write_graph_dot(std::ostream& out, const NeighborhoodGraph& graph);
void write_graph_points_csv(std::ostream& out, const NeighborhoodGraph& graph, const Partition& partition);

}  // namespace wavecluster
