#pragma once

#include <Eigen/Dense>

#include "selfsim/errors.hpp"

namespace selfsim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Tolerance for accepting a matrix as orthogonal (M^T M = I).
inline constexpr double kOrthoTol = 1e-10;

/// A d x d orthogonal matrix, validated and re-orthonormalized at
/// construction.  Drift within kOrthoTol is repaired by a QR pass;
/// anything worse is rejected.
class OrthogonalMap {
  public:
    explicit OrthogonalMap(Matrix m);

    static OrthogonalMap identity(int dim);
    // 2D convenience: rotation by angle_deg, optionally composed with a
    // reflection across the x-axis (reflection applied first).
    static OrthogonalMap rotation2d(double angle_deg, bool reflect = false);

    const Matrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }
    double det() const { return m_.determinant(); }

  private:
    Matrix m_;
};

/// Contraction similarity in affine form x -> q * O * x + b with
/// ratio q in (0,1).  The fixed point is derived on demand.
class Similarity {
  public:
    Similarity(double ratio, OrthogonalMap orthogonal, Vector translation);

    Vector operator()(const Vector& x) const;

    double ratio() const { return ratio_; }
    const OrthogonalMap& orthogonal() const { return orthogonal_; }
    const Vector& translation() const { return translation_; }
    int dim() const { return orthogonal_.dim(); }

    // Solves (I - q O) x0 = b; always solvable since q < 1.
    Vector fixed_point() const;

  private:
    double ratio_;
    OrthogonalMap orthogonal_;
    Vector translation_;
};

Vector apply(const Similarity& s, const Vector& x);

// Result applies s1 after s2: compose(s1, s2)(x) == s1(s2(x)).
Similarity compose(const Similarity& s1, const Similarity& s2);

/// Hyperplane {x : <n, x> = c} with unit normal n.
struct Hyperplane {
    Vector normal;
    double offset;

    Hyperplane(Vector n, double c);
};

// <n, x> - c; positive on the open plus side, negative on the minus side.
double signed_distance(const Hyperplane& h, const Vector& x);

}  // namespace selfsim
