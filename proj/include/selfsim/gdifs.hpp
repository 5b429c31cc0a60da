#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "selfsim/digraph.hpp"
#include "selfsim/geometry.hpp"

namespace selfsim {

/// Graph-directed system of contraction similarities: one map per edge,
/// S_e carrying the component of omega(e) into the component of alpha(e).
class GDSystem {
  public:
    GDSystem(Digraph graph, std::vector<Similarity> maps);

    const Digraph& graph() const { return graph_; }
    const Similarity& map(int edge_id) const {
        return maps_.at(static_cast<std::size_t>(edge_id));
    }
    const std::vector<Similarity>& maps() const { return maps_; }
    int ambient_dim() const { return ambient_dim_; }

    double q_max() const;
    double q_min() const;

  private:
    Digraph graph_;
    std::vector<Similarity> maps_;  // indexed by edge id
    int ambient_dim_;
};

struct SystemReport {
    bool regular = false;
    bool out_degrees_ok = false;
    bool accepted = false;
    std::optional<std::pair<int, int>> unreachable_witness;
    std::vector<int> out_degree;
    double q_min = 0.0;
    double q_max = 0.0;
    std::vector<std::string> problems;
};

SystemReport validate(const GDSystem& system);

// Throws ValidationError with the report's first problem unless accepted.
void require_valid(const GDSystem& system);

struct RatioMatrix {
    Eigen::MatrixXd entries;  // (u,v) = sum over E_uv of q_e^s
    double exponent;
};

RatioMatrix ratio_matrix(const GDSystem& system, double s);

// Perron root of a nonnegative matrix by power iteration on M + I
// (the diagonal shift neutralizes periodic patterns), 1-norm normalized.
double spectral_radius(const Eigen::MatrixXd& m, double rel_tol = 1e-12,
                       int max_iterations = 100000);
inline double spectral_radius(const RatioMatrix& m) {
    return spectral_radius(m.entries);
}

// min_u (M l)_u / l_u for positive l; lower-bounds the Perron root.
double collatz_wielandt_lower(const Eigen::MatrixXd& m, const Eigen::VectorXd& l);
// max_u (M l)_u / l_u; upper-bounds the Perron root.
double collatz_wielandt_upper(const Eigen::MatrixXd& m, const Eigen::VectorXd& l);

struct DimensionResult {
    double s1 = 0.0;
    double phi_at_s1 = 0.0;
    int iterations = 0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
};

// Unique s >= 0 with spectral radius of B(s) equal to 1, by bisection on
// the strictly decreasing map s -> Phi(s).
DimensionResult similarity_dimension(const GDSystem& system);

struct AttractorApproximation {
    int component = 0;
    int depth = 0;
    std::vector<Vector> points;
    std::vector<Path> addresses;  // one path per point
};

// Per-vertex seed points: fixed point of the composed map along a shortest
// cycle through each vertex.
std::vector<Vector> attractor_seeds(const GDSystem& system);

// Points { S_sigma(seed) : sigma a length-depth path from u }, in
// lexicographic address order.  Optional seed override (e.g. multizipper
// node endpoints).
AttractorApproximation approximate_attractor(
    const GDSystem& system, int u, int depth, std::size_t cap = kDefaultPathCap,
    const std::vector<Vector>* seeds = nullptr);

// System whose edges are all length-k paths with composed maps; attractor
// and similarity dimension are unchanged.
GDSystem path_power(const GDSystem& system, int k,
                    std::size_t cap = kDefaultPathCap);

}  // namespace selfsim
