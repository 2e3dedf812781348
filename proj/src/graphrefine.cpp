#include "mapsr/graphrefine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace mapsr {

void GraphConfig::validate() const {
    if (k < 1) throw ValidationError("k must be >= 1");
    if (gamma <= 0 || sigma <= 0 || spatial_exponent <= 0)
        throw ValidationError("gamma/sigma/spatial_exponent must be > 0");
    if (alpha < 0 || alpha >= 1) throw ValidationError("alpha must be in [0,1)");
    if (tol <= 0) throw ValidationError("tol must be > 0");
    if (max_prop_iters < 1) throw ValidationError("max_prop_iters must be >= 1");
}

PropSolver parse_solver(const std::string& s) {
    if (s == "fixed_point") return PropSolver::fixed_point;
    if (s == "direct") return PropSolver::direct;
    throw ValidationError("unknown solver: " + s);
}

double AffinityGraph::normalized_weight(int i, int j, double a_ij) const {
    double di = degrees[i], dj = degrees[j];
    if (di <= 0 || dj <= 0) return 0.0;
    return a_ij / std::sqrt(di * dj);
}

void AffinityGraph::normalized_matvec(const std::vector<double>& y,
                                      std::vector<double>& out) const {
    out.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (degrees[i] <= 0) continue;
        double acc = 0;
        for (auto [j, a] : adj[i]) acc += normalized_weight(i, j, a) * y[j];
        out[i] = acc;
    }
}

AffinityGraph build_graph(const SuperpixelPartition& part,
                          const GraphConfig& cfg) {
    cfg.validate();
    const int n = part.n;
    if (n < 2) throw ValidationError("graph needs at least 2 nodes");

    AffinityGraph g;
    g.n = n;
    g.adj.assign(n, {});
    g.degrees.assign(n, 0.0);

    int k = cfg.k;
    if (k >= n) {
        k = n - 1;
        g.k_clamped = true;
    }

    const double coord_scale =
        std::max(part.h, part.w) > 1 ? 1.0 / (std::max(part.h, part.w) - 1) : 1.0;
    std::vector<std::array<double, 2>> coords(n);
    for (int i = 0; i < n; ++i) {
        coords[i][0] = part.centroids[i][0] * coord_scale;
        coords[i][1] = part.centroids[i][1] * coord_scale;
    }
    const int D = static_cast<int>(part.mean_embeddings.empty()
                                       ? 0
                                       : part.mean_embeddings[0].size());

    auto emb_dot = [&](int i, int j) {
        double s = 0;
        const auto& zi = part.mean_embeddings[i];
        const auto& zj = part.mean_embeddings[j];
        for (int d = 0; d < D; ++d) s += static_cast<double>(zi[d]) * zj[d];
        return s;
    };

    // Exact kNN under the joint distance, then affinity weights on the
    // directed neighbor pairs; symmetrize by elementwise max.
    std::vector<std::vector<std::pair<int, double>>> directed(n);
    std::vector<std::pair<double, int>> cand(n);
    for (int i = 0; i < n; ++i) {
        int m = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double dot = emb_dot(i, j);
            double emb_d2 = std::max(0.0, 2.0 - 2.0 * dot);  // unit-norm z
            double dr = coords[i][0] - coords[j][0],
                   dc = coords[i][1] - coords[j][1];
            cand[m++] = {emb_d2 + dr * dr + dc * dc, j};
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.begin() + m);
        for (int t = 0; t < k; ++t) {
            int j = cand[t].second;
            double dot = emb_dot(i, j);
            double sim = std::max(0.0, dot);
            double feat = std::pow(sim, cfg.gamma);
            double dr = coords[i][0] - coords[j][0],
                   dc = coords[i][1] - coords[j][1];
            double dist = std::sqrt(dr * dr + dc * dc);
            double spatial =
                std::exp(-cfg.sigma * std::pow(dist, cfg.spatial_exponent));
            double wgt = feat * spatial;
            if (wgt > 0) directed[i].push_back({j, wgt});
        }
    }

    // A = max(W, W^T); store each undirected edge once per endpoint.
    std::vector<std::vector<std::pair<int, double>>> merged(n);
    for (int i = 0; i < n; ++i)
        for (auto [j, wgt] : directed[i]) {
            if (j > i)
                merged[i].push_back({j, wgt});
            else {
                // look for the reverse edge in merged[j]
                bool found = false;
                for (auto& e : merged[j])
                    if (e.first == i) {
                        e.second = std::max(e.second, wgt);
                        found = true;
                        break;
                    }
                if (!found) merged[j].push_back({i, wgt});
            }
        }
    // dedupe forward duplicates (i<j entries may appear twice)
    for (int i = 0; i < n; ++i) {
        std::sort(merged[i].begin(), merged[i].end());
        std::vector<std::pair<int, double>> uniq;
        for (auto [j, wgt] : merged[i]) {
            if (!uniq.empty() && uniq.back().first == j)
                uniq.back().second = std::max(uniq.back().second, wgt);
            else
                uniq.push_back({j, wgt});
        }
        for (auto [j, wgt] : uniq) {
            g.adj[i].push_back({j, wgt});
            g.adj[j].push_back({i, wgt});
            g.degrees[i] += wgt;
            g.degrees[j] += wgt;
        }
    }
    for (auto& lst : g.adj) std::sort(lst.begin(), lst.end());
    return g;
}

namespace {

double inf_norm_residual(const AffinityGraph& g,
                         const std::vector<double>& y,
                         const std::vector<double>& rhs, double alpha) {
    std::vector<double> ay;
    g.normalized_matvec(y, ay);
    double worst = 0;
    for (int i = 0; i < g.n; ++i)
        worst = std::max(worst, std::abs(y[i] - alpha * ay[i] - rhs[i]));
    return worst;
}

}  // namespace

std::vector<std::vector<double>> propagate_direct(
    const AffinityGraph& graph, const std::vector<std::vector<double>>& y0,
    double alpha, double tol, int max_iters) {
    const int n = graph.n;
    const int C = static_cast<int>(y0.empty() ? 0 : y0[0].size());
    std::vector<std::vector<double>> out(n, std::vector<double>(C, 0.0));

    // CG on the SPD system (I - alpha*A-hat) y = (1-alpha) y0, per column.
    std::vector<double> rhs(n), x(n), r(n), p(n), ap(n), tmp(n);
    for (int col = 0; col < C; ++col) {
        for (int i = 0; i < n; ++i) {
            rhs[i] = (1.0 - alpha) * y0[i][col];
            x[i] = rhs[i];  // warm start at (1-alpha)Y0
        }
        graph.normalized_matvec(x, tmp);
        double rr = 0;
        for (int i = 0; i < n; ++i) {
            r[i] = rhs[i] - (x[i] - alpha * tmp[i]);
            p[i] = r[i];
            rr += r[i] * r[i];
        }
        int iter = 0;
        while (iter++ < max_iters) {
            if (inf_norm_residual(graph, x, rhs, alpha) < tol) break;
            graph.normalized_matvec(p, tmp);
            double pap = 0;
            for (int i = 0; i < n; ++i) {
                ap[i] = p[i] - alpha * tmp[i];
                pap += p[i] * ap[i];
            }
            if (pap <= 0) break;
            double step = rr / pap;
            double rr_new = 0;
            for (int i = 0; i < n; ++i) {
                x[i] += step * p[i];
                r[i] -= step * ap[i];
                rr_new += r[i] * r[i];
            }
            double beta = rr_new / rr;
            rr = rr_new;
            for (int i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        }
        double res = inf_norm_residual(graph, x, rhs, alpha);
        if (res >= tol)
            throw PropagationError(
                "direct solver failed to converge, residual " +
                    std::to_string(res),
                res);
        for (int i = 0; i < n; ++i) out[i][col] = x[i];
    }
    return out;
}

std::vector<std::vector<double>> propagate_fixed_point(
    const AffinityGraph& graph, const std::vector<std::vector<double>>& y0,
    double alpha, double tol, int max_iters) {
    const int n = graph.n;
    const int C = static_cast<int>(y0.empty() ? 0 : y0[0].size());
    std::vector<std::vector<double>> cur = y0;
    std::vector<double> col(n), av(n);
    for (int iter = 0; iter < max_iters; ++iter) {
        double change = 0;
        for (int c = 0; c < C; ++c) {
            for (int i = 0; i < n; ++i) col[i] = cur[i][c];
            graph.normalized_matvec(col, av);
            for (int i = 0; i < n; ++i) {
                double next = alpha * av[i] + (1.0 - alpha) * y0[i][c];
                change = std::max(change, std::abs(next - cur[i][c]));
                cur[i][c] = next;
            }
        }
        if (change < tol) return cur;
    }
    throw PropagationError("fixed-point iteration exceeded max_iters", -1.0);
}

LabelMap refine_labels(const SuperpixelPartition& part,
                       const AffinityGraph& graph, const GraphConfig& cfg,
                       int classes) {
    std::vector<std::vector<double>> refined;
    if (cfg.solver == PropSolver::direct)
        refined = propagate_direct(graph, part.mean_scores, cfg.alpha, cfg.tol,
                                   cfg.max_prop_iters * 10);
    else
        refined = propagate_fixed_point(graph, part.mean_scores, cfg.alpha,
                                        cfg.tol, cfg.max_prop_iters);
    std::vector<uint8_t> seg_class(part.n, 0);
    for (int s = 0; s < part.n; ++s) {
        int best = 0;
        for (int c = 1; c < static_cast<int>(refined[s].size()); ++c)
            if (refined[s][c] > refined[s][best]) best = c;
        seg_class[s] = static_cast<uint8_t>(best);
    }
    LabelMap out(part.h, part.w, classes);
    for (size_t i = 0; i < part.assignment.size(); ++i)
        out.data[i] = seg_class[part.assignment[i]];
    return out;
}

double objective_value(const AffinityGraph& graph,
                       const std::vector<std::vector<double>>& y_hat,
                       const std::vector<std::vector<double>>& y_tilde,
                       double lambda) {
    const int C = static_cast<int>(y_hat.empty() ? 0 : y_hat[0].size());
    double fidelity = 0;
    for (int i = 0; i < graph.n; ++i)
        for (int c = 0; c < C; ++c) {
            double d = y_tilde[i][c] - y_hat[i][c];
            fidelity += d * d;
        }
    double smooth = 0;
    for (int i = 0; i < graph.n; ++i)
        for (auto [j, a] : graph.adj[i]) {
            if (j <= i) continue;  // each undirected edge once
            double acc = 0;
            for (int c = 0; c < C; ++c) {
                double d = y_tilde[i][c] - y_tilde[j][c];
                acc += d * d;
            }
            smooth += a * acc;
        }
    return fidelity + lambda * smooth;
}

double objective_value_normalized(const AffinityGraph& graph,
                                  const std::vector<std::vector<double>>& y_hat,
                                  const std::vector<std::vector<double>>& y_tilde,
                                  double lambda) {
    const int C = static_cast<int>(y_hat.empty() ? 0 : y_hat[0].size());
    double fidelity = 0, smooth = 0;
    for (int i = 0; i < graph.n; ++i)
        for (int c = 0; c < C; ++c) {
            double d = y_tilde[i][c] - y_hat[i][c];
            fidelity += d * d;
            smooth += y_tilde[i][c] * y_tilde[i][c];  // tr(Y^T Y)
        }
    for (int i = 0; i < graph.n; ++i)
        for (auto [j, a] : graph.adj[i]) {
            double ahat = graph.normalized_weight(i, j, a);
            for (int c = 0; c < C; ++c)
                smooth -= ahat * y_tilde[i][c] * y_tilde[j][c];
        }
    return fidelity + lambda * smooth;
}

double normalized_spectral_radius(const AffinityGraph& graph, int iters) {
    std::vector<double> v(graph.n, 1.0), av;
    double lambda = 0;
    for (int t = 0; t < iters; ++t) {
        graph.normalized_matvec(v, av);
        double norm = 0;
        for (double x : av) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-300) return 0.0;
        lambda = norm;
        for (int i = 0; i < graph.n; ++i) v[i] = av[i] / norm;
    }
    return lambda;
}

void write_graph_edges(const AffinityGraph& graph, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    for (int i = 0; i < graph.n; ++i)
        for (auto [j, a] : graph.adj[i])
            if (j > i) os << i << " " << j << " " << a << "\n";
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace mapsr
