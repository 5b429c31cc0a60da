#include "selfsim/gdifs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace selfsim {

GDSystem::GDSystem(Digraph graph, std::vector<Similarity> maps)
    : graph_(std::move(graph)), maps_(std::move(maps)) {
    if (maps_.size() != static_cast<std::size_t>(graph_.edge_count())) {
        throw ValidationError("gd system: one similarity per edge required");
    }
    if (maps_.empty()) {
        throw ValidationError("gd system: at least one edge required");
    }
    ambient_dim_ = maps_.front().dim();
    for (const Similarity& s : maps_) {
        if (s.dim() != ambient_dim_) {
            throw ValidationError("gd system: maps must share one ambient dimension");
        }
    }
}

double GDSystem::q_max() const {
    double q = 0.0;
    for (const Similarity& s : maps_) q = std::max(q, s.ratio());
    return q;
}

double GDSystem::q_min() const {
    double q = 1.0;
    for (const Similarity& s : maps_) q = std::min(q, s.ratio());
    return q;
}

SystemReport validate(const GDSystem& system) {
    SystemReport report;
    const Digraph& g = system.graph();
    report.out_degree.resize(static_cast<std::size_t>(g.vertex_count()));
    report.out_degrees_ok = true;
    for (int u = 0; u < g.vertex_count(); ++u) {
        const int deg = static_cast<int>(g.edges_from(u).size());
        report.out_degree[static_cast<std::size_t>(u)] = deg;
        if (deg == 0) {
            report.out_degrees_ok = false;
            std::ostringstream msg;
            msg << "vertex " << u << " has no outgoing edge";
            report.problems.push_back(msg.str());
        }
    }
    report.unreachable_witness = g.unreachable_pair();
    report.regular = !report.unreachable_witness;
    if (!report.regular) {
        std::ostringstream msg;
        msg << "graph not strongly connected: no path from vertex "
            << report.unreachable_witness->first << " to vertex "
            << report.unreachable_witness->second;
        report.problems.push_back(msg.str());
    }
    report.q_min = system.q_min();
    report.q_max = system.q_max();
    // Ratios outside (0,1) cannot be represented by Similarity, so they are
    // rejected upstream; the bounds are reported for completeness.
    report.accepted = report.regular && report.out_degrees_ok;
    return report;
}

void require_valid(const GDSystem& system) {
    const SystemReport report = validate(system);
    if (!report.accepted) {
        throw ValidationError("gd system rejected: " + report.problems.front());
    }
}

RatioMatrix ratio_matrix(const GDSystem& system, double s) {
    if (s < 0.0) throw ValidationError("ratio_matrix: exponent must be >= 0");
    const Digraph& g = system.graph();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(g.vertex_count(), g.vertex_count());
    for (const Edge& e : g.edges()) {
        b(e.from, e.to) += std::pow(system.map(e.id).ratio(), s);
    }
    return RatioMatrix{std::move(b), s};
}

double spectral_radius(const Eigen::MatrixXd& m, double rel_tol,
                       int max_iterations) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        throw ValidationError("spectral_radius: matrix must be square");
    }
    if (m.minCoeff() < 0.0) {
        throw ValidationError("spectral_radius: matrix must be nonnegative");
    }
    const int n = static_cast<int>(m.rows());
    const Eigen::MatrixXd shifted = m + Eigen::MatrixXd::Identity(n, n);

    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / n);
    double lambda = 0.0;
    for (int iter = 1; iter <= max_iterations; ++iter) {
        Eigen::VectorXd w = shifted * v;
        const double norm = w.lpNorm<1>();
        // Strictly positive start vector keeps the 1-norm positive.
        const double next = norm;
        w /= norm;
        if (std::abs(next - lambda) <= rel_tol * std::max(1.0, std::abs(next))) {
            return next - 1.0;
        }
        lambda = next;
        v = std::move(w);
    }
    const double residual = (shifted * v - lambda * v).norm();
    std::ostringstream msg;
    msg << "power iteration did not converge after " << max_iterations
        << " iterations (residual " << residual << ")";
    throw NumericsError(msg.str());
}

namespace {

double collatz_wielandt(const Eigen::MatrixXd& m, const Eigen::VectorXd& l,
                        bool lower) {
    if (m.rows() != m.cols() || m.rows() != l.size()) {
        throw ValidationError("collatz_wielandt: dimension mismatch");
    }
    if (l.minCoeff() <= 0.0) {
        throw ValidationError("collatz_wielandt: vector must be strictly positive");
    }
    const Eigen::VectorXd ml = m * l;
    double bound = lower ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
    for (Eigen::Index u = 0; u < l.size(); ++u) {
        const double ratio = ml(u) / l(u);
        bound = lower ? std::min(bound, ratio) : std::max(bound, ratio);
    }
    return bound;
}

}  // namespace

double collatz_wielandt_lower(const Eigen::MatrixXd& m, const Eigen::VectorXd& l) {
    return collatz_wielandt(m, l, true);
}

double collatz_wielandt_upper(const Eigen::MatrixXd& m, const Eigen::VectorXd& l) {
    return collatz_wielandt(m, l, false);
}

DimensionResult similarity_dimension(const GDSystem& system) {
    require_valid(system);

    auto phi = [&](double s) { return spectral_radius(ratio_matrix(system, s)); };

    const double q_max = system.q_max();
    const double edge_count = static_cast<double>(system.graph().edge_count());
    const double s_max = std::log(edge_count) / std::log(1.0 / q_max) + 1.0;

    const double phi0 = phi(0.0);
    if (phi0 < 1.0 - 1e-12) {
        throw ValidationError(
            "similarity_dimension: Phi(0) < 1, inconsistent input");
    }
    double lo = 0.0;
    double hi = s_max;
    double phi_hi = phi(hi);
    if (phi_hi > 1.0) {
        throw NumericsError("similarity_dimension: bracket failure at s_max");
    }

    DimensionResult result;
    double mid = 0.5 * (lo + hi);
    double phi_mid = phi0;
    for (int iter = 1; iter <= 200; ++iter) {
        mid = 0.5 * (lo + hi);
        phi_mid = phi(mid);
        result.iterations = iter;
        if (phi_mid > 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15 * std::max(1.0, s_max)) break;
    }
    result.s1 = mid;
    result.phi_at_s1 = phi_mid;
    result.bracket_lo = lo;
    result.bracket_hi = hi;
    if (std::abs(result.phi_at_s1 - 1.0) > 1e-10) {
        throw NumericsError("similarity_dimension: |Phi(s1) - 1| above tolerance");
    }
    return result;
}

std::vector<Vector> attractor_seeds(const GDSystem& system) {
    require_valid(system);
    const Digraph& g = system.graph();
    std::vector<Vector> seeds;
    seeds.reserve(static_cast<std::size_t>(g.vertex_count()));
    for (int u = 0; u < g.vertex_count(); ++u) {
        // BFS for a shortest cycle through u, tracked by edge predecessors.
        std::vector<int> pred_edge(static_cast<std::size_t>(g.vertex_count()), -1);
        std::vector<char> visited(static_cast<std::size_t>(g.vertex_count()), 0);
        std::deque<int> queue{u};
        std::optional<int> closing_edge;
        while (!queue.empty() && !closing_edge) {
            const int v = queue.front();
            queue.pop_front();
            for (int id : g.edges_from(v)) {
                const int w = g.edge(id).to;
                if (w == u) {
                    closing_edge = id;
                    break;
                }
                if (!visited[static_cast<std::size_t>(w)]) {
                    visited[static_cast<std::size_t>(w)] = 1;
                    pred_edge[static_cast<std::size_t>(w)] = id;
                    queue.push_back(w);
                }
            }
        }
        if (!closing_edge) {
            throw ValidationError("attractor_seeds: no cycle through vertex");
        }
        std::vector<int> cycle{*closing_edge};
        int v = g.edge(*closing_edge).from;
        while (v != u) {
            const int id = pred_edge[static_cast<std::size_t>(v)];
            cycle.push_back(id);
            v = g.edge(id).from;
        }
        std::reverse(cycle.begin(), cycle.end());
        Similarity composed = system.map(cycle.front());
        for (std::size_t i = 1; i < cycle.size(); ++i) {
            composed = compose(composed, system.map(cycle[i]));
        }
        seeds.push_back(composed.fixed_point());
    }
    return seeds;
}

AttractorApproximation approximate_attractor(const GDSystem& system, int u,
                                             int depth, std::size_t cap,
                                             const std::vector<Vector>* seeds) {
    require_valid(system);
    if (depth < 0) throw ValidationError("approximate_attractor: negative depth");
    const std::vector<Vector> own_seeds =
        seeds ? std::vector<Vector>{} : attractor_seeds(system);
    const std::vector<Vector>& seed = seeds ? *seeds : own_seeds;

    AttractorApproximation approx;
    approx.component = u;
    approx.depth = depth;

    std::vector<int> address;
    auto dfs = [&](auto&& self, int vertex, const Similarity* prefix,
                   int remaining) -> void {
        if (remaining == 0) {
            if (approx.points.size() >= cap) {
                throw CapExceededError("attractor approximation exceeded cap");
            }
            const Vector& s = seed[static_cast<std::size_t>(vertex)];
            approx.points.push_back(prefix ? (*prefix)(s) : s);
            approx.addresses.push_back(Path{address});
            return;
        }
        for (int id : system.graph().edges_from(vertex)) {
            const Similarity& edge_map = system.map(id);
            const Similarity next =
                prefix ? compose(*prefix, edge_map) : edge_map;
            address.push_back(id);
            self(self, system.graph().edge(id).to, &next, remaining - 1);
            address.pop_back();
        }
    };
    dfs(dfs, u, nullptr, depth);
    return approx;
}

GDSystem path_power(const GDSystem& system, int k, std::size_t cap) {
    if (k < 1) throw ValidationError("path_power: k must be >= 1");
    const Digraph& g = system.graph();
    std::vector<Edge> edges;
    std::vector<Similarity> maps;
    for (int u = 0; u < g.vertex_count(); ++u) {
        for (const Path& p : g.paths_from(u, k, cap)) {
            Similarity composed = system.map(p.edges.front());
            for (std::size_t i = 1; i < p.edges.size(); ++i) {
                composed = compose(composed, system.map(p.edges[i]));
            }
            const int id = static_cast<int>(edges.size());
            edges.push_back(Edge{id, u, g.edge(p.edges.back()).to});
            maps.push_back(std::move(composed));
        }
    }
    return GDSystem(Digraph(g.vertex_count(), std::move(edges)), std::move(maps));
}

}  // namespace selfsim
