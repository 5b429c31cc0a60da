#pragma once

// Shared fixtures and randomized generators for the test suites.

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfsim/multizipper.hpp"
#include "selfsim/spec_io.hpp"

namespace testsupport {

using selfsim::Digraph;
using selfsim::Edge;
using selfsim::GDSystem;
using selfsim::Multizipper;
using selfsim::OrthogonalMap;
using selfsim::ParsedSpec;
using selfsim::Similarity;
using selfsim::Vector;

inline Vector v2(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

// Similarity with the given linear part whose translation is solved so that
// `source` lands on `target`.
inline Similarity map_endpoint(double q, const OrthogonalMap& o,
                               const Vector& source, const Vector& target) {
    Vector b = target - q * (o.matrix() * source);
    return Similarity(q, o, std::move(b));
}

inline ParsedSpec catalog_spec(const std::string& name) {
    for (const selfsim::CatalogEntry& entry : selfsim::catalog()) {
        if (entry.name == name) return selfsim::parse_spec(entry.spec);
    }
    throw std::runtime_error("no catalog entry named " + name);
}

// Linear-part styles that keep the x-axis invariant.  The reversed styles
// need the orientation flag so endpoints land in swapped order.
inline OrthogonalMap collinear_style(int style) {
    switch (style & 3) {
        case 0: return OrthogonalMap::identity(2);
        case 1: return OrthogonalMap::rotation2d(0.0, true);   // diag(1,-1)
        case 2: return OrthogonalMap::rotation2d(180.0);       // -I
        default: return OrthogonalMap::rotation2d(180.0, true);  // diag(-1,1)
    }
}
inline bool collinear_style_reversed(int style) { return (style & 3) >= 2; }

// Random partition of [0, 1] into m cells with no cell shorter than
// min_frac of the average.
inline std::vector<double> random_breaks(std::mt19937& rng, int m) {
    std::uniform_real_distribution<double> raw(1.0, 3.0);
    std::vector<double> lengths(static_cast<std::size_t>(m));
    double total = 0.0;
    for (double& len : lengths) total += (len = raw(rng));
    std::vector<double> breaks{0.0};
    double acc = 0.0;
    for (int i = 0; i + 1 < m; ++i) {
        acc += lengths[static_cast<std::size_t>(i)] / total;
        breaks.push_back(acc);
    }
    breaks.push_back(1.0);
    return breaks;
}

// One-vertex zipper whose nodes all sit on the unit segment of the x-axis;
// ratios sum to 1, so the similarity dimension is exactly 1.
inline Multizipper random_collinear_one_vertex(std::mt19937& rng) {
    std::uniform_int_distribution<int> cells(2, 4);
    std::uniform_int_distribution<int> style(0, 3);
    const int m = cells(rng);
    const std::vector<double> breaks = random_breaks(rng, m);

    std::vector<Vector> chain;
    for (double t : breaks) chain.push_back(v2(t, 0.0));

    std::vector<Edge> edges;
    std::vector<Similarity> maps;
    std::vector<bool> reversed;
    std::vector<int> assignment;
    for (int i = 0; i < m; ++i) {
        const int s = style(rng);
        const bool rev = collinear_style_reversed(s);
        const double q = breaks[static_cast<std::size_t>(i) + 1] -
                         breaks[static_cast<std::size_t>(i)];
        const Vector& target =
            rev ? chain[static_cast<std::size_t>(i) + 1]
                : chain[static_cast<std::size_t>(i)];
        edges.push_back({i, 0, 0});
        maps.push_back(map_endpoint(q, collinear_style(s), chain.front(), target));
        reversed.push_back(rev);
        assignment.push_back(i);
    }
    return Multizipper(GDSystem(Digraph(1, edges), maps), {chain}, {assignment},
                       reversed);
}

// Two-vertex graph-directed zipper: both components are unit segments on
// the x-axis (component b offset), every row of B(1) sums to 1.
inline Multizipper random_collinear_two_vertex(std::mt19937& rng) {
    std::uniform_int_distribution<int> cells(2, 3);
    std::uniform_int_distribution<int> style(0, 3);
    std::uniform_int_distribution<int> pick_vertex(0, 1);
    std::uniform_real_distribution<double> offset(-2.0, 2.0);

    const double c = offset(rng);
    std::vector<std::vector<Vector>> chains(2);
    std::vector<std::vector<double>> breaks(2);
    const double base[2] = {0.0, c};
    for (int u = 0; u < 2; ++u) {
        breaks[static_cast<std::size_t>(u)] = random_breaks(rng, cells(rng));
        for (double t : breaks[static_cast<std::size_t>(u)]) {
            chains[static_cast<std::size_t>(u)].push_back(v2(base[u] + t, 0.0));
        }
    }

    std::vector<Edge> edges;
    std::vector<Similarity> maps;
    std::vector<bool> reversed;
    std::vector<std::vector<int>> assignment(2);
    for (int u = 0; u < 2; ++u) {
        const auto& chain = chains[static_cast<std::size_t>(u)];
        const int m = static_cast<int>(chain.size()) - 1;
        for (int i = 0; i < m; ++i) {
            // Cell 0 targets the other vertex so the graph stays strongly
            // connected; later cells pick freely.
            const int v = i == 0 ? 1 - u : pick_vertex(rng);
            const int s = style(rng);
            const bool rev = collinear_style_reversed(s);
            const double q = (chain[static_cast<std::size_t>(i) + 1] -
                              chain[static_cast<std::size_t>(i)])
                                 .norm();
            const Vector& source = chains[static_cast<std::size_t>(v)].front();
            const Vector& target = rev ? chain[static_cast<std::size_t>(i) + 1]
                                       : chain[static_cast<std::size_t>(i)];
            const int id = static_cast<int>(edges.size());
            edges.push_back({id, u, v});
            maps.push_back(map_endpoint(q, collinear_style(s), source, target));
            reversed.push_back(rev);
            assignment[static_cast<std::size_t>(u)].push_back(id);
        }
    }
    return Multizipper(GDSystem(Digraph(2, edges), maps), chains, assignment,
                       reversed);
}

inline Multizipper random_collinear_zipper(std::mt19937& rng) {
    return (rng() & 1) ? random_collinear_one_vertex(rng)
                       : random_collinear_two_vertex(rng);
}

// One-vertex zipper with nodes (0,0), (a,h), (1,0) and rotation maps; the
// middle node sits h off the chord, so the ratio sum exceeds 1.
inline Multizipper random_off_chord_zipper(std::mt19937& rng) {
    std::uniform_real_distribution<double> apex_x(0.2, 0.8);
    std::uniform_real_distribution<double> apex_y(0.01, 0.4);
    const double a = apex_x(rng);
    const double h = apex_y(rng);

    const std::vector<Vector> chain{v2(0.0, 0.0), v2(a, h), v2(1.0, 0.0)};
    const double q1 = std::hypot(a, h);
    const double q2 = std::hypot(1.0 - a, h);
    const double deg = 180.0 / M_PI;
    Similarity s1(q1, OrthogonalMap::rotation2d(std::atan2(h, a) * deg),
                  v2(0.0, 0.0));
    Similarity s2 = map_endpoint(
        q2, OrthogonalMap::rotation2d(std::atan2(-h, 1.0 - a) * deg),
        chain.front(), chain[1]);
    return Multizipper(
        GDSystem(Digraph(1, {{0, 0, 0}, {1, 0, 0}}), {s1, s2}), {chain},
        {{0, 1}}, {false, false});
}

// Random irreducible nonnegative matrix: sparse random entries plus a full
// cycle so irreducibility is guaranteed.
inline Eigen::MatrixXd random_irreducible(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> value(0.0, 2.0);
    std::bernoulli_distribution keep(0.4);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (keep(rng)) m(i, j) = value(rng);
        }
        m(i, (i + 1) % n) += 0.1 + value(rng);
    }
    return m;
}

}  // namespace testsupport
