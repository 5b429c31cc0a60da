#include "selfsim/digraph.hpp"

#include <algorithm>
#include <sstream>

namespace selfsim {

Digraph::Digraph(int vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
    if (vertex_count_ < 1) {
        throw ValidationError("digraph: need at least one vertex");
    }
    std::vector<char> seen(edges_.size(), 0);
    for (const Edge& e : edges_) {
        if (e.id < 0 || e.id >= static_cast<int>(edges_.size()) || seen[e.id]) {
            throw ValidationError("digraph: edge ids must be unique and dense 0..E-1");
        }
        seen[e.id] = 1;
        if (e.from < 0 || e.from >= vertex_count_ || e.to < 0 ||
            e.to >= vertex_count_) {
            std::ostringstream msg;
            msg << "digraph: edge " << e.id << " endpoint out of range";
            throw ValidationError(msg.str());
        }
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return a.id < b.id; });
    out_.assign(static_cast<std::size_t>(vertex_count_), {});
    for (const Edge& e : edges_) {
        out_[static_cast<std::size_t>(e.from)].push_back(e.id);
    }
}

void Digraph::check_vertex(int u) const {
    if (u < 0 || u >= vertex_count_) {
        std::ostringstream msg;
        msg << "digraph: vertex " << u << " out of range [0," << vertex_count_ << ")";
        throw ValidationError(msg.str());
    }
}

const std::vector<int>& Digraph::edges_from(int u) const {
    check_vertex(u);
    return out_[static_cast<std::size_t>(u)];
}

std::vector<int> Digraph::edges_between(int u, int v) const {
    check_vertex(u);
    check_vertex(v);
    std::vector<int> result;
    for (int id : out_[static_cast<std::size_t>(u)]) {
        if (edges_[static_cast<std::size_t>(id)].to == v) result.push_back(id);
    }
    return result;
}

std::optional<std::pair<int, int>> Digraph::unreachable_pair() const {
    // Forward reachability from vertex 0 and backward reachability to it;
    // strong connectivity holds iff both cover everything.
    auto reach = [&](bool forward) {
        std::vector<char> visited(static_cast<std::size_t>(vertex_count_), 0);
        std::vector<int> stack{0};
        visited[0] = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (const Edge& e : edges_) {
                const int src = forward ? e.from : e.to;
                const int dst = forward ? e.to : e.from;
                if (src == u && !visited[static_cast<std::size_t>(dst)]) {
                    visited[static_cast<std::size_t>(dst)] = 1;
                    stack.push_back(dst);
                }
            }
        }
        return visited;
    };
    const auto fwd = reach(true);
    const auto bwd = reach(false);
    for (int v = 0; v < vertex_count_; ++v) {
        if (!fwd[static_cast<std::size_t>(v)]) return std::make_pair(0, v);
        if (!bwd[static_cast<std::size_t>(v)]) return std::make_pair(v, 0);
    }
    return std::nullopt;
}

bool Digraph::is_strongly_connected() const { return !unreachable_pair(); }

Eigen::MatrixXd Digraph::count_matrix() const {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(vertex_count_, vertex_count_);
    for (const Edge& e : edges_) c(e.from, e.to) += 1.0;
    return c;
}

std::vector<Path> Digraph::paths_from(int u, int k, std::size_t cap) const {
    check_vertex(u);
    if (k < 0) throw ValidationError("paths_from: negative length");
    std::vector<Path> result;
    std::vector<int> current;
    current.reserve(static_cast<std::size_t>(k));

    auto dfs = [&](auto&& self, int vertex, int remaining) -> void {
        if (remaining == 0) {
            if (result.size() >= cap) {
                throw CapExceededError("path enumeration exceeded cap");
            }
            result.push_back(Path{current});
            return;
        }
        for (int id : out_[static_cast<std::size_t>(vertex)]) {
            current.push_back(id);
            self(self, edges_[static_cast<std::size_t>(id)].to, remaining - 1);
            current.pop_back();
        }
    };
    dfs(dfs, u, k);
    return result;
}

std::vector<Path> Digraph::paths_of_length(int u, int v, int k,
                                           std::size_t cap) const {
    check_vertex(v);
    if (k < 1) throw ValidationError("paths_of_length: length must be >= 1");
    std::vector<Path> all = paths_from(u, k, cap);
    std::vector<Path> result;
    for (Path& p : all) {
        if (edges_[static_cast<std::size_t>(p.edges.back())].to == v) {
            result.push_back(std::move(p));
        }
    }
    return result;
}

bool Digraph::is_valid_path(const Path& p) const {
    for (std::size_t i = 0; i < p.edges.size(); ++i) {
        const int id = p.edges[i];
        if (id < 0 || id >= edge_count()) return false;
        if (i > 0 &&
            edges_[static_cast<std::size_t>(p.edges[i - 1])].to !=
                edges_[static_cast<std::size_t>(id)].from) {
            return false;
        }
    }
    return true;
}

}  // namespace selfsim
