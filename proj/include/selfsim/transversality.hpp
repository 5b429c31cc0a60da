#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "selfsim/multizipper.hpp"

namespace selfsim {

// Unit normal grid: `count` uniformly spaced angles for d == 2, a Fibonacci
// sphere for d >= 3.  Defaults follow the scan conventions (3600 / 4000).
std::vector<Vector> normal_grid(int d, int count);
inline int default_grid_count(int d) { return d == 2 ? 3600 : 4000; }

// Oriented weak transversality of the hyperplane through sample point
// `index` with normal n: the later subarc lies in the closed plus
// half-space, the earlier one in the closed minus half-space, within tol.
// Swapping the roles of the half-spaces is the same test with -n.
bool is_weakly_transverse(const OrderedArcSample& sample, int index,
                          const Vector& n, double tol);
// Strict version: open half-spaces, margin tol, split point excluded.
bool is_transverse(const OrderedArcSample& sample, int index, const Vector& n,
                   double tol);

inline double default_transversality_tol(const OrderedArcSample& sample) {
    return sample.cell_bound;
}

/// Grid normals weakly transverse at one sample point (finite-resolution
/// stand-in for Sigma(x); the dual description of the cones Q+-).
struct ConeApprox {
    int index = 0;
    std::vector<int> normal_ids;  // indices into the grid

    bool empty() const { return normal_ids.empty(); }
};

ConeApprox transverse_normals(const OrderedArcSample& sample, int index,
                              const std::vector<Vector>& grid, double tol);

// Normals weakly transverse at every split index in [first, last]
// (constraints accumulate, so the result nests inside each point's cone).
ConeApprox transverse_normals_subarc(const OrderedArcSample& sample, int first,
                                     int last, const std::vector<Vector>& grid,
                                     double tol);

/// Batch cone evaluation: pass(index, normal) for every interior index at
/// once, O(grid * points) via prefix/suffix extremes of the projections.
class ConeScan {
  public:
    ConeScan(const OrderedArcSample& sample, const std::vector<Vector>& grid,
             double tol);

    bool pass(int index, int normal_id) const {
        return pass_[static_cast<std::size_t>(index) * grid_size_ +
                     static_cast<std::size_t>(normal_id)] != 0;
    }
    bool cone_empty(int index) const;
    int point_count() const { return point_count_; }
    int grid_size() const { return static_cast<int>(grid_size_); }

  private:
    std::size_t grid_size_;
    int point_count_;
    std::vector<char> pass_;  // row-major [index][normal]; boundary rows zero
};

// Strict monotonicity of t -> <n, gamma(t)> along the sample; on failure
// the earliest violating index pair.
std::pair<bool, std::pair<int, int>> projection_monotone(
    const OrderedArcSample& sample, const Vector& n);

struct DirectionScanReport {
    int grid_size = 0;
    std::vector<int> monotone_ids;
};

DirectionScanReport direction_scan(const OrderedArcSample& sample,
                                   const std::vector<Vector>& grid);

struct DyadicCell {
    int depth = 0;
    int cell = 0;
    bool has_nontransverse = false;
};

struct DensityReport {
    int dyadic_depth = 0;
    int grid_size = 0;
    std::vector<int> transverse_indices;  // interior indices with nonempty cone
    std::vector<DyadicCell> table;        // depths 1..D
    bool verdict = false;  // nowhere dense at tested resolution
};

DensityReport transverse_point_report(const OrderedArcSample& sample,
                                      const std::vector<Vector>& grid, int D,
                                      double tol);

struct InvariantNormals {
    // Every orthogonal part is +-identity: the whole projective space
    // qualifies.
    bool all_directions = false;
    std::vector<Vector> normals;  // representatives, up to sign
};

// Directions n with O_e^T n = +-n for every edge map, i.e. normals of
// hyperplanes preserved by all generators.
InvariantNormals invariant_hyperplanes(const GDSystem& system);

// Finite-resolution limit transversality: any grid normal weakly transverse
// throughout the w-window around `index` must be weakly transverse at
// `index` itself with doubled tolerance.
bool limit_transversality_check(const ConeScan& at_tol, const ConeScan& at_2tol,
                                int index, int w);
bool limit_transversality_check(const OrderedArcSample& sample,
                                const std::vector<Vector>& grid, int index,
                                int w, double tol);

// Finite-resolution cone semicontinuity, in the dual (normal-set) form:
// any grid normal transverse at every window neighbor must lie within
// slack_steps of the cone at `index`.
bool semicontinuity_check(const ConeScan& at_tol, int index, int w,
                          int slack_steps = 1);
bool semicontinuity_check(const OrderedArcSample& sample,
                          const std::vector<Vector>& grid, int index, int w,
                          double tol);

// A single grid normal strictly transverse at every interior index, if any.
std::optional<int> common_transverse_normal(const OrderedArcSample& sample,
                                            const std::vector<Vector>& grid,
                                            double tol);

}  // namespace selfsim
