#include "selfsim/geometry.hpp"

#include <cmath>
#include <sstream>

namespace selfsim {

namespace {

void check_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw ValidationError(std::string(what) + ": non-finite entries");
    }
}

}  // namespace

OrthogonalMap::OrthogonalMap(Matrix m) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) {
        throw ValidationError("orthogonal map: matrix must be square, d >= 1");
    }
    check_finite(m_, "orthogonal map");

    const int d = static_cast<int>(m_.rows());
    const double drift =
        (m_.transpose() * m_ - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    if (drift > kOrthoTol) {
        std::ostringstream msg;
        msg << "orthogonal map: M^T M deviates from I by " << drift;
        throw ValidationError(msg.str());
    }
    const double det = m_.determinant();
    if (std::abs(std::abs(det) - 1.0) > kOrthoTol) {
        throw ValidationError("orthogonal map: |det| must be 1");
    }

    // Re-orthonormalize: composed rotations accumulate drift over deep paths.
    if (drift > 0.0) {
        Eigen::HouseholderQR<Matrix> qr(m_);
        Matrix q = qr.householderQ();
        Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        // Fix column signs so Q stays close to the input.
        for (int j = 0; j < d; ++j) {
            if (r(j, j) < 0.0) q.col(j) = -q.col(j);
        }
        m_ = q;
    }
}

OrthogonalMap OrthogonalMap::identity(int dim) {
    return OrthogonalMap(Matrix::Identity(dim, dim));
}

OrthogonalMap OrthogonalMap::rotation2d(double angle_deg, bool reflect) {
    const double a = angle_deg * M_PI / 180.0;
    Matrix rot(2, 2);
    rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    if (reflect) {
        Matrix flip(2, 2);
        flip << 1.0, 0.0, 0.0, -1.0;
        rot = rot * flip;
    }
    return OrthogonalMap(rot);
}

Similarity::Similarity(double ratio, OrthogonalMap orthogonal, Vector translation)
    : ratio_(ratio),
      orthogonal_(std::move(orthogonal)),
      translation_(std::move(translation)) {
    if (!(ratio_ > 0.0 && ratio_ < 1.0)) {
        std::ostringstream msg;
        msg << "similarity: ratio " << ratio_ << " outside (0,1)";
        throw ValidationError(msg.str());
    }
    if (translation_.size() != orthogonal_.dim()) {
        throw ValidationError("similarity: translation dimension mismatch");
    }
    if (!translation_.allFinite()) {
        throw ValidationError("similarity: non-finite translation");
    }
}

Vector Similarity::operator()(const Vector& x) const {
    if (x.size() != dim()) {
        throw ValidationError("similarity apply: dimension mismatch");
    }
    return ratio_ * (orthogonal_.matrix() * x) + translation_;
}

Vector Similarity::fixed_point() const {
    const int d = dim();
    const Matrix a = Matrix::Identity(d, d) - ratio_ * orthogonal_.matrix();
    return a.partialPivLu().solve(translation_);
}

Vector apply(const Similarity& s, const Vector& x) { return s(x); }

Similarity compose(const Similarity& s1, const Similarity& s2) {
    if (s1.dim() != s2.dim()) {
        throw ValidationError("similarity compose: dimension mismatch");
    }
    OrthogonalMap o(s1.orthogonal().matrix() * s2.orthogonal().matrix());
    Vector b = s1.ratio() * (s1.orthogonal().matrix() * s2.translation()) +
               s1.translation();
    return Similarity(s1.ratio() * s2.ratio(), std::move(o), std::move(b));
}

Hyperplane::Hyperplane(Vector n, double c) : normal(std::move(n)), offset(c) {
    const double len = normal.norm();
    if (!(len > 0.0) || !normal.allFinite()) {
        throw ValidationError("hyperplane: normal must be a nonzero finite vector");
    }
    normal /= len;
    offset /= len;  // same point set under the unit normal
}

double signed_distance(const Hyperplane& h, const Vector& x) {
    if (x.size() != h.normal.size()) {
        throw ValidationError("signed_distance: dimension mismatch");
    }
    return h.normal.dot(x) - h.offset;
}

}  // namespace selfsim
