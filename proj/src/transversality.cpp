#include "selfsim/transversality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

namespace selfsim {

namespace {

int thread_count() {
    if (const char* env = std::getenv("SELFSIM_THREADS")) {
        const int requested = std::atoi(env);
        if (requested >= 1) return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 4u));
}

void check_unit(const Vector& n) {
    if (std::abs(n.norm() - 1.0) > 1e-9) {
        throw ValidationError("transversality: normal must be a unit vector");
    }
}

void check_interior(const OrderedArcSample& sample, int index) {
    const int last = static_cast<int>(sample.points.size()) - 1;
    if (index <= 0 || index >= last) {
        throw ValidationError(
            "transversality: split index must be interior (endpoints excluded)");
    }
}

}  // namespace

std::vector<Vector> normal_grid(int d, int count) {
    if (d < 2 || count < 1) {
        throw ValidationError("normal_grid: need d >= 2 and count >= 1");
    }
    std::vector<Vector> grid;
    grid.reserve(static_cast<std::size_t>(count));
    if (d == 2) {
        for (int j = 0; j < count; ++j) {
            Vector n(2);
            // Cardinal directions must be exact: cos(pi/2) != 0 in floating
            // point, and a 1e-17 slope defeats flatness tests downstream.
            if ((4LL * j) % count == 0) {
                switch ((4LL * j) / count) {
                    case 0: n << 1.0, 0.0; break;
                    case 1: n << 0.0, 1.0; break;
                    case 2: n << -1.0, 0.0; break;
                    default: n << 0.0, -1.0; break;
                }
            } else {
                const double a = 2.0 * M_PI * j / count;
                n << std::cos(a), std::sin(a);
            }
            grid.push_back(std::move(n));
        }
    } else if (d == 3) {
        // Fibonacci sphere.
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (int j = 0; j < count; ++j) {
            const double z = 1.0 - (2.0 * j + 1.0) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = 2.0 * M_PI * j / golden;
            Vector n(3);
            n << r * std::cos(phi), r * std::sin(phi), z;
            grid.push_back(std::move(n));
        }
    } else {
        // Deterministic pseudo-random directions for higher dimensions.
        std::uint64_t state = 0x9e3779b97f4a7c15ull;
        auto next = [&state]() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            return static_cast<double>(state >> 11) / 9007199254740992.0;
        };
        while (static_cast<int>(grid.size()) < count) {
            Vector n(d);
            for (int i = 0; i < d; ++i) {
                // Box-Muller.
                const double u1 = std::max(next(), 1e-12);
                const double u2 = next();
                n(i) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
            }
            const double len = n.norm();
            if (len > 1e-8) grid.push_back(n / len);
        }
    }
    return grid;
}

bool is_weakly_transverse(const OrderedArcSample& sample, int index,
                          const Vector& n, double tol) {
    check_unit(n);
    check_interior(sample, index);
    const double split = n.dot(sample.points[static_cast<std::size_t>(index)]);
    const int count = static_cast<int>(sample.points.size());
    for (int j = 0; j < count; ++j) {
        const double v = n.dot(sample.points[static_cast<std::size_t>(j)]) - split;
        if (j > index && v < -tol) return false;
        if (j < index && v > tol) return false;
    }
    return true;
}

bool is_transverse(const OrderedArcSample& sample, int index, const Vector& n,
                   double tol) {
    check_unit(n);
    check_interior(sample, index);
    const double split = n.dot(sample.points[static_cast<std::size_t>(index)]);
    const int count = static_cast<int>(sample.points.size());
    for (int j = 0; j < count; ++j) {
        if (j == index) continue;
        const double v = n.dot(sample.points[static_cast<std::size_t>(j)]) - split;
        if (j > index && !(v > tol)) return false;
        if (j < index && !(v < -tol)) return false;
    }
    return true;
}

ConeApprox transverse_normals(const OrderedArcSample& sample, int index,
                              const std::vector<Vector>& grid, double tol) {
    if (grid.empty()) throw ValidationError("transverse_normals: empty grid");
    check_interior(sample, index);
    ConeApprox cone;
    cone.index = index;
    for (int g = 0; g < static_cast<int>(grid.size()); ++g) {
        if (is_weakly_transverse(sample, index, grid[static_cast<std::size_t>(g)],
                                 tol)) {
            cone.normal_ids.push_back(g);
        }
    }
    return cone;
}

ConeApprox transverse_normals_subarc(const OrderedArcSample& sample, int first,
                                     int last, const std::vector<Vector>& grid,
                                     double tol) {
    if (first > last) std::swap(first, last);
    check_interior(sample, first);
    check_interior(sample, last);
    ConeApprox cone;
    cone.index = first;
    for (int g = 0; g < static_cast<int>(grid.size()); ++g) {
        bool everywhere = true;
        for (int i = first; i <= last && everywhere; ++i) {
            everywhere = is_weakly_transverse(
                sample, i, grid[static_cast<std::size_t>(g)], tol);
        }
        if (everywhere) cone.normal_ids.push_back(g);
    }
    return cone;
}

ConeScan::ConeScan(const OrderedArcSample& sample,
                   const std::vector<Vector>& grid, double tol)
    : grid_size_(grid.size()),
      point_count_(static_cast<int>(sample.points.size())) {
    if (grid.empty()) throw ValidationError("ConeScan: empty grid");
    if (point_count_ < 3) throw ValidationError("ConeScan: need >= 3 points");
    pass_.assign(static_cast<std::size_t>(point_count_) * grid_size_, 0);

    const int workers =
        std::min<int>(thread_count(), static_cast<int>(grid_size_));
    auto scan_range = [&](int g_begin, int g_end) {
        std::vector<double> proj(static_cast<std::size_t>(point_count_));
        std::vector<double> prefix_max(static_cast<std::size_t>(point_count_));
        std::vector<double> suffix_min(static_cast<std::size_t>(point_count_));
        for (int g = g_begin; g < g_end; ++g) {
            const Vector& n = grid[static_cast<std::size_t>(g)];
            for (int j = 0; j < point_count_; ++j) {
                proj[static_cast<std::size_t>(j)] =
                    n.dot(sample.points[static_cast<std::size_t>(j)]);
            }
            prefix_max[0] = proj[0];
            for (int j = 1; j < point_count_; ++j) {
                prefix_max[static_cast<std::size_t>(j)] = std::max(
                    prefix_max[static_cast<std::size_t>(j) - 1],
                    proj[static_cast<std::size_t>(j)]);
            }
            suffix_min[static_cast<std::size_t>(point_count_) - 1] =
                proj[static_cast<std::size_t>(point_count_) - 1];
            for (int j = point_count_ - 2; j >= 0; --j) {
                suffix_min[static_cast<std::size_t>(j)] = std::min(
                    suffix_min[static_cast<std::size_t>(j) + 1],
                    proj[static_cast<std::size_t>(j)]);
            }
            for (int i = 1; i < point_count_ - 1; ++i) {
                const double split = proj[static_cast<std::size_t>(i)];
                const bool ok =
                    suffix_min[static_cast<std::size_t>(i) + 1] >= split - tol &&
                    prefix_max[static_cast<std::size_t>(i) - 1] <= split + tol;
                pass_[static_cast<std::size_t>(i) * grid_size_ +
                      static_cast<std::size_t>(g)] = ok ? 1 : 0;
            }
        }
    };

    if (workers <= 1) {
        scan_range(0, static_cast<int>(grid_size_));
    } else {
        std::vector<std::thread> pool;
        const int chunk =
            (static_cast<int>(grid_size_) + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int begin = w * chunk;
            const int end =
                std::min(static_cast<int>(grid_size_), begin + chunk);
            if (begin < end) pool.emplace_back(scan_range, begin, end);
        }
        for (std::thread& t : pool) t.join();
    }
}

bool ConeScan::cone_empty(int index) const {
    const std::size_t row = static_cast<std::size_t>(index) * grid_size_;
    for (std::size_t g = 0; g < grid_size_; ++g) {
        if (pass_[row + g]) return false;
    }
    return true;
}

std::pair<bool, std::pair<int, int>> projection_monotone(
    const OrderedArcSample& sample, const Vector& n) {
    if (sample.points.size() < 2) {
        throw ValidationError("projection_monotone: need >= 2 points");
    }
    const int count = static_cast<int>(sample.points.size());
    std::vector<double> proj(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        proj[static_cast<std::size_t>(j)] =
            n.dot(sample.points[static_cast<std::size_t>(j)]);
    }
    auto first_violation = [&](double dir) {
        for (int j = 0; j + 1 < count; ++j) {
            if (!((proj[static_cast<std::size_t>(j) + 1] -
                   proj[static_cast<std::size_t>(j)]) * dir > 0.0)) {
                return j;
            }
        }
        return -1;
    };
    const double total = proj[static_cast<std::size_t>(count) - 1] - proj[0];
    if (total > 0.0) {
        const int j = first_violation(1.0);
        if (j < 0) return {true, {-1, -1}};
        return {false, {j, j + 1}};
    }
    if (total < 0.0) {
        const int j = first_violation(-1.0);
        if (j < 0) return {true, {-1, -1}};
        return {false, {j, j + 1}};
    }
    // Flat overall: cannot be strictly monotone; earliest adjacent witness.
    const int up = first_violation(1.0);
    const int down = first_violation(-1.0);
    const int j = std::min(up < 0 ? count : up, down < 0 ? count : down);
    return {false, {j, j + 1}};
}

DirectionScanReport direction_scan(const OrderedArcSample& sample,
                                   const std::vector<Vector>& grid) {
    if (grid.empty()) throw ValidationError("direction_scan: empty grid");
    DirectionScanReport report;
    report.grid_size = static_cast<int>(grid.size());
    for (int g = 0; g < report.grid_size; ++g) {
        if (projection_monotone(sample, grid[static_cast<std::size_t>(g)]).first) {
            report.monotone_ids.push_back(g);
        }
    }
    return report;
}

DensityReport transverse_point_report(const OrderedArcSample& sample,
                                      const std::vector<Vector>& grid, int D,
                                      double tol) {
    if (D < 1) throw ValidationError("transverse_point_report: D must be >= 1");
    const int count = static_cast<int>(sample.points.size());
    const int segments = 1 << D;
    if ((count - 1) / segments < 8) {
        std::ostringstream msg;
        msg << "transverse_point_report: need >= 8 samples per depth-" << D
            << " dyadic subarc, have " << (count - 1) / segments;
        throw ValidationError(msg.str());
    }

    const ConeScan scan(sample, grid, tol);
    DensityReport report;
    report.dyadic_depth = D;
    report.grid_size = static_cast<int>(grid.size());

    std::vector<char> transverse(static_cast<std::size_t>(count), 0);
    for (int i = 1; i + 1 < count; ++i) {
        if (!scan.cone_empty(i)) {
            transverse[static_cast<std::size_t>(i)] = 1;
            report.transverse_indices.push_back(i);
        }
    }

    report.verdict = true;
    for (int depth = 1; depth <= D; ++depth) {
        const int cells = 1 << depth;
        for (int c = 0; c < cells; ++c) {
            const long long lo = static_cast<long long>(count - 1) * c / cells;
            const long long hi =
                static_cast<long long>(count - 1) * (c + 1) / cells;
            bool found = false;
            for (long long i = std::max(lo, 1ll);
                 i <= std::min(hi, static_cast<long long>(count - 2)); ++i) {
                if (!transverse[static_cast<std::size_t>(i)]) {
                    found = true;
                    break;
                }
            }
            report.table.push_back(DyadicCell{depth, c, found});
            if (!found) report.verdict = false;
        }
    }
    return report;
}

InvariantNormals invariant_hyperplanes(const GDSystem& system) {
    const int d = system.ambient_dim();
    const double tol = 1e-10;

    std::vector<Matrix> constraining;
    for (const Similarity& s : system.maps()) {
        const Matrix& o = s.orthogonal().matrix();
        const double to_plus = (o - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
        const double to_minus = (o + Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
        if (std::min(to_plus, to_minus) > tol) constraining.push_back(o);
    }

    InvariantNormals result;
    if (constraining.empty()) {
        result.all_directions = true;
        return result;
    }

    // Candidate subspaces: intersections of +-1 eigenspaces across all
    // constraining orthogonal parts, one sign choice per map.
    auto eigenspace = [&](const Matrix& o, double sign) {
        Eigen::JacobiSVD<Matrix> svd(o - sign * Matrix::Identity(d, d),
                                     Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        int rank = 0;
        while (rank < sv.size() && sv(rank) > 1e-8) ++rank;
        return Matrix(svd.matrixV().rightCols(d - rank));
    };
    auto intersect = [&](const Matrix& a, const Matrix& b) {
        if (a.cols() == 0 || b.cols() == 0) return Matrix(d, 0);
        const Matrix gap = 2.0 * Matrix::Identity(d, d) - a * a.transpose() -
                           b * b.transpose();
        Eigen::SelfAdjointEigenSolver<Matrix> eig(gap);
        int dim = 0;
        while (dim < d && eig.eigenvalues()(dim) < 1e-8) ++dim;
        return Matrix(eig.eigenvectors().leftCols(dim));
    };

    std::vector<Matrix> candidates{Matrix::Identity(d, d)};
    for (const Matrix& o : constraining) {
        const Matrix plus = eigenspace(o, 1.0);
        const Matrix minus = eigenspace(o, -1.0);
        std::vector<Matrix> next;
        for (const Matrix& c : candidates) {
            for (const Matrix* space : {&plus, &minus}) {
                Matrix meet = intersect(c, *space);
                if (meet.cols() > 0) next.push_back(std::move(meet));
            }
        }
        candidates = std::move(next);
        if (candidates.empty()) return result;
    }

    auto invariant_everywhere = [&](const Vector& n) {
        for (const Similarity& s : system.maps()) {
            const Vector image = s.orthogonal().matrix().transpose() * n;
            if (std::min((image - n).norm(), (image + n).norm()) > tol) {
                return false;
            }
        }
        return true;
    };
    for (const Matrix& c : candidates) {
        for (Eigen::Index j = 0; j < c.cols(); ++j) {
            Vector n = c.col(j);
            n /= n.norm();
            if (!invariant_everywhere(n)) continue;
            bool duplicate = false;
            for (const Vector& seen : result.normals) {
                if (std::abs(seen.dot(n)) > 1.0 - 1e-8) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) result.normals.push_back(std::move(n));
        }
    }
    return result;
}

namespace {

std::vector<int> window_indices(const ConeScan& scan, int index, int w) {
    std::vector<int> js;
    const int last_interior = scan.point_count() - 2;
    for (int j = std::max(1, index - w); j <= std::min(last_interior, index + w);
         ++j) {
        if (j != index) js.push_back(j);
    }
    return js;
}

}  // namespace

bool limit_transversality_check(const ConeScan& at_tol, const ConeScan& at_2tol,
                                int index, int w) {
    const std::vector<int> window = window_indices(at_tol, index, w);
    if (window.empty()) return true;
    for (int g = 0; g < at_tol.grid_size(); ++g) {
        bool throughout = true;
        for (int j : window) {
            if (!at_tol.pass(j, g)) {
                throughout = false;
                break;
            }
        }
        if (throughout && !at_2tol.pass(index, g)) return false;
    }
    return true;
}

bool limit_transversality_check(const OrderedArcSample& sample,
                                const std::vector<Vector>& grid, int index,
                                int w, double tol) {
    check_interior(sample, index);
    const ConeScan at_tol(sample, grid, tol);
    const ConeScan at_2tol(sample, grid, 2.0 * tol);
    return limit_transversality_check(at_tol, at_2tol, index, w);
}

bool semicontinuity_check(const ConeScan& at_tol, int index, int w,
                          int slack_steps) {
    // Dual form of cone semicontinuity, following the complement identity
    // Q+(x) = (union of minus half-spaces over Sigma(x))^c: the spatial
    // inclusion reduces to upper semicontinuity of the normal sets.  A
    // normal transverse at *every* window neighbor (it persists as y -> x)
    // must sit within slack_steps of the cone at the index.  Pointwise
    // neighbor-cone containment is the wrong discretization: polyline
    // corners rotate the local cone by the turning angle per sample step.
    const std::vector<int> window = window_indices(at_tol, index, w);
    if (window.empty()) return true;
    const int grid_size = at_tol.grid_size();
    for (int g = 0; g < grid_size; ++g) {
        bool persistent = true;
        for (int j : window) {
            if (!at_tol.pass(j, g)) {
                persistent = false;
                break;
            }
        }
        if (!persistent) continue;
        bool nearby = false;
        for (int step = -slack_steps; step <= slack_steps && !nearby; ++step) {
            const int gg = ((g + step) % grid_size + grid_size) % grid_size;
            nearby = at_tol.pass(index, gg);
        }
        if (!nearby) return false;
    }
    return true;
}

bool semicontinuity_check(const OrderedArcSample& sample,
                          const std::vector<Vector>& grid, int index, int w,
                          double tol) {
    check_interior(sample, index);
    const ConeScan at_tol(sample, grid, tol);
    return semicontinuity_check(at_tol, index, w);
}

std::optional<int> common_transverse_normal(const OrderedArcSample& sample,
                                            const std::vector<Vector>& grid,
                                            double tol) {
    const int count = static_cast<int>(sample.points.size());
    if (count < 3) return std::nullopt;
    std::vector<double> proj(static_cast<std::size_t>(count));
    for (int g = 0; g < static_cast<int>(grid.size()); ++g) {
        const Vector& n = grid[static_cast<std::size_t>(g)];
        for (int j = 0; j < count; ++j) {
            proj[static_cast<std::size_t>(j)] =
                n.dot(sample.points[static_cast<std::size_t>(j)]);
        }
        // Strict transversality at every interior split means adjacent
        // projections strictly separate by more than tol.
        bool ok = true;
        for (int j = 0; j + 1 < count && ok; ++j) {
            ok = proj[static_cast<std::size_t>(j) + 1] >
                 proj[static_cast<std::size_t>(j)] + tol;
        }
        if (ok) return g;
    }
    return std::nullopt;
}

}  // namespace selfsim
