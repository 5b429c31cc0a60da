#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "selfsim/errors.hpp"

namespace selfsim {

inline constexpr std::size_t kDefaultPathCap = 1'000'000;

struct Edge {
    int id;    // dense, 0..E-1
    int from;  // alpha(e)
    int to;    // omega(e)
};

/// A path e1...ek with omega(e_i) == alpha(e_{i+1}).
struct Path {
    std::vector<int> edges;

    bool operator==(const Path&) const = default;
};

/// Directed multigraph on vertices 0..n-1 with dense edge ids.
class Digraph {
  public:
    Digraph(int vertex_count, std::vector<Edge> edges);

    int vertex_count() const { return vertex_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int id) const { return edges_.at(static_cast<std::size_t>(id)); }

    // Edge ids e with alpha(e) == u (in declaration order).
    const std::vector<int>& edges_from(int u) const;
    // Edge ids e with alpha(e) == u and omega(e) == v.
    std::vector<int> edges_between(int u, int v) const;

    bool is_strongly_connected() const;
    // Some ordered pair (u, v) with no path from u to v, if one exists.
    std::optional<std::pair<int, int>> unreachable_pair() const;

    // (u, v) entry = number of edges from u to v.
    Eigen::MatrixXd count_matrix() const;

    // All paths of length k from u to v; throws CapExceededError past cap.
    std::vector<Path> paths_of_length(int u, int v, int k,
                                      std::size_t cap = kDefaultPathCap) const;
    // All paths of length k starting at u, in lexicographic edge order.
    std::vector<Path> paths_from(int u, int k,
                                 std::size_t cap = kDefaultPathCap) const;

    bool is_valid_path(const Path& p) const;

  private:
    void check_vertex(int u) const;

    int vertex_count_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> out_;  // per-vertex outgoing edge ids
};

}  // namespace selfsim
