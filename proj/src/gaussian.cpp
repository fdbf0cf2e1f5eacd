#include "cvk/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace cvk {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kPairTol = 1e-8;

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Eigen::MatrixXd symplectic_form(const ModeLayout& layout) {
    require(layout.n_modes >= 1, "symplectic_form: n_modes must be >= 1");
    const int n = layout.n_modes;
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    sigma.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    sigma.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    return sigma;
}

CovarianceMatrix::CovarianceMatrix(ModeLayout layout, const Eigen::MatrixXd& data)
    : layout_(layout) {
    require(layout_.n_modes >= 1, "CovarianceMatrix: n_modes must be >= 1");
    const int d = layout_.dim();
    require(data.rows() == d && data.cols() == d, "CovarianceMatrix: size does not match layout");
    require(data.allFinite(), "CovarianceMatrix: entries must be finite");
    const double asym = (data - data.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol) {
        std::ostringstream msg;
        msg << "CovarianceMatrix: input asymmetry " << asym << " exceeds " << kSymmetryTol;
        throw std::invalid_argument(msg.str());
    }
    data_ = 0.5 * (data + data.transpose());
}

FirstMoments::FirstMoments(ModeLayout layout_in, const Eigen::VectorXd& data_in)
    : layout(layout_in), data(data_in) {
    require(data.size() == layout.dim(), "FirstMoments: length must equal 2 * n_modes");
    require(data.allFinite(), "FirstMoments: entries must be finite");
}

CovarianceMatrix vacuum_cm(const ModeLayout& layout) {
    return CovarianceMatrix(layout, Eigen::MatrixXd::Identity(layout.dim(), layout.dim()));
}

CovarianceMatrix two_mode_squeezed_cm(double r) {
    require(r >= 0.0 && std::isfinite(r), "two_mode_squeezed_cm: r must be finite and >= 0");
    const double c = std::cosh(2.0 * r);
    const double s = std::sinh(2.0 * r);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    g(0, 0) = c;  g(0, 1) = -s;
    g(1, 0) = -s; g(1, 1) = c;
    g(2, 2) = c;  g(2, 3) = s;
    g(3, 2) = s;  g(3, 3) = c;
    return CovarianceMatrix(ModeLayout{2}, g);
}

CovarianceMatrix partial_transpose(const CovarianceMatrix& cm) {
    require(cm.layout().n_modes == 2, "partial_transpose: defined for two-mode states only");
    Eigen::Vector4d p(1.0, 1.0, 1.0, -1.0);
    Eigen::MatrixXd g = p.asDiagonal() * cm.matrix() * p.asDiagonal();
    return CovarianceMatrix(cm.layout(), g);
}

namespace detail {

std::vector<double> pair_degenerate_moduli(const std::vector<double>& sorted_moduli, double tol) {
    if (sorted_moduli.size() % 2 != 0)
        throw std::runtime_error("pair_degenerate_moduli: odd number of moduli");
    std::vector<double> reps;
    reps.reserve(sorted_moduli.size() / 2);
    for (std::size_t k = 0; k + 1 < sorted_moduli.size(); k += 2) {
        const double lo = sorted_moduli[k];
        const double hi = sorted_moduli[k + 1];
        if (hi - lo > tol * std::max(1.0, hi)) {
            std::ostringstream msg;
            msg << "symplectic spectrum moduli do not pair: " << lo << " vs " << hi;
            throw std::runtime_error(msg.str());
        }
        reps.push_back(0.5 * (lo + hi));
    }
    return reps;
}

}  // namespace detail

std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& cm) {
    const int d = cm.dim();
    const std::complex<double> im(0.0, 1.0);
    Eigen::MatrixXcd m = im * symplectic_form(cm.layout()) * cm.matrix();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("symplectic_eigenvalues: eigensolver failed");
    std::vector<double> moduli(d);
    for (int k = 0; k < d; ++k) moduli[k] = std::abs(solver.eigenvalues()(k));
    std::sort(moduli.begin(), moduli.end());
    return detail::pair_degenerate_moduli(moduli, kPairTol);
}

double log_negativity(const CovarianceMatrix& cm) {
    require(cm.layout().n_modes == 2, "log_negativity: defined for two-mode states only");
    const std::vector<double> nu = symplectic_eigenvalues(partial_transpose(cm));
    double neg = 0.0;
    for (double v : nu) neg -= std::log2(std::min(1.0, v));
    return neg;
}

double cm_distance(const CovarianceMatrix& a, const CovarianceMatrix& b) {
    require(a.layout() == b.layout(), "cm_distance: layouts differ");
    return (a.matrix() - b.matrix()).squaredNorm();
}

double physicality_min_eigenvalue(const CovarianceMatrix& cm) {
    const std::complex<double> im(0.0, 1.0);
    Eigen::MatrixXcd h = cm.matrix().cast<std::complex<double>>() + im * symplectic_form(cm.layout());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("physicality_min_eigenvalue: eigensolver failed");
    return solver.eigenvalues().minCoeff();
}

bool is_physical(const CovarianceMatrix& cm, double tol) {
    return physicality_min_eigenvalue(cm) >= -tol;
}

}  // namespace cvk
