#pragma once

#include <string>
#include <vector>

#include "mapsr/superpixel.hpp"
#include "mapsr/tensorio.hpp"

namespace mapsr {

enum class PropSolver { fixed_point, direct };

struct GraphConfig {
    int k = 100;
    double gamma = 1.0;
    double sigma = 1.0;
    double spatial_exponent = 2.0;  // exponent of the spatial kernel
    double alpha = 0.5;
    double tol = 1e-6;
    int max_prop_iters = 1000;
    PropSolver solver = PropSolver::fixed_point;

    void validate() const;
};

PropSolver parse_solver(const std::string& s);

struct PropagationError : std::runtime_error {
    double residual;
    PropagationError(const std::string& msg, double res)
        : std::runtime_error(msg), residual(res) {}
};

// Sparse symmetric affinity graph; adjacency stores each undirected edge in
// both endpoint lists.
struct AffinityGraph {
    int n = 0;
    std::vector<std::vector<std::pair<int, double>>> adj;  // A_ij > 0 entries
    std::vector<double> degrees;
    bool k_clamped = false;  // k >= N was clamped to N-1

    // A-hat_ij = A_ij / sqrt(d_i d_j); zero-degree rows stay zero.
    double normalized_weight(int i, int j, double a_ij) const;
    // y_out = A-hat * y for one column of scores.
    void normalized_matvec(const std::vector<double>& y,
                           std::vector<double>& out) const;
};

// kNN graph in the joint space of unit-norm embeddings and coordinates
// normalized to [0,1] by max(H,W)-1, with weights
// w_ij = max(0, z_i.z_j)^gamma * exp(-sigma * |x_i-x_j|^q), symmetrized by
// elementwise max.
AffinityGraph build_graph(const SuperpixelPartition& part,
                          const GraphConfig& cfg);

// Solves (I - alpha*A-hat) Y = (1-alpha) Y0 per class column by conjugate
// gradient; the returned solution satisfies the inf-norm residual < tol.
std::vector<std::vector<double>> propagate_direct(
    const AffinityGraph& graph, const std::vector<std::vector<double>>& y0,
    double alpha, double tol = 1e-8, int max_iters = 10000);

// Fixed-point iteration Y <- alpha*A-hat*Y + (1-alpha)*Y0 from Y0 until the
// inf-norm step change drops below tol.
std::vector<std::vector<double>> propagate_fixed_point(
    const AffinityGraph& graph, const std::vector<std::vector<double>>& y0,
    double alpha, double tol, int max_iters);

// Propagate the partition's mean scores, take per-segment argmax (ties ->
// lowest class), broadcast to pixels.
LabelMap refine_labels(const SuperpixelPartition& part,
                       const AffinityGraph& graph, const GraphConfig& cfg,
                       int classes);

// Literal objective: |Y-Y0|_F^2 + lambda * sum over undirected edges of
// A_ij |Y_i - Y_j|^2.
double objective_value(const AffinityGraph& graph,
                       const std::vector<std::vector<double>>& y_hat,
                       const std::vector<std::vector<double>>& y_tilde,
                       double lambda);

// Normalized-variant objective |Y-Y0|_F^2 + lambda * tr(Y^T (I - A-hat) Y);
// the closed-form linear system is its stationarity condition.
double objective_value_normalized(const AffinityGraph& graph,
                                  const std::vector<std::vector<double>>& y_hat,
                                  const std::vector<std::vector<double>>& y_tilde,
                                  double lambda);

// Largest eigenvalue magnitude of A-hat by power iteration (test support).
double normalized_spectral_radius(const AffinityGraph& graph, int iters = 200);

// Edge-list dump "i j weight" per line, i < j.
void write_graph_edges(const AffinityGraph& graph, const std::string& path);

}  // namespace mapsr
