#pragma once

#include <Eigen/Dense>
#include <vector>

namespace cvk {

/// Bosonic mode bookkeeping. Quadratures are ordered q-first:
/// R = (q_1, ..., q_n, p_1, ..., p_n), so vectors and matrices have size 2n.
struct ModeLayout {
    int n_modes = 1;

    int dim() const { return 2 * n_modes; }
    bool operator==(const ModeLayout& other) const { return n_modes == other.n_modes; }
};

/// Symplectic form sigma = [[0, I], [-I, 0]] in the q-first ordering.
/// Satisfies sigma^2 = -I and sigma^T = -sigma.
Eigen::MatrixXd symplectic_form(const ModeLayout& layout);

/// Covariance matrix of symmetrized second moments,
///   gamma_ij = <R_i R_j + R_j R_i> - 2 <R_i><R_j>,
/// normalized so the vacuum state is the identity. Stored exactly symmetric:
/// construction symmetrizes and rejects input whose asymmetry exceeds 1e-10.
class CovarianceMatrix {
  public:
    CovarianceMatrix(ModeLayout layout, const Eigen::MatrixXd& data);

    const ModeLayout& layout() const { return layout_; }
    const Eigen::MatrixXd& matrix() const { return data_; }
    int dim() const { return layout_.dim(); }

  private:
    ModeLayout layout_;
    Eigen::MatrixXd data_;
};

/// First statistical moments <R> of a Gaussian state.
struct FirstMoments {
    FirstMoments(ModeLayout layout_in, const Eigen::VectorXd& data_in);

    ModeLayout layout;
    Eigen::VectorXd data;
};

/// Vacuum state: gamma = I.
CovarianceMatrix vacuum_cm(const ModeLayout& layout);

/// Two-mode squeezed vacuum with squeezing parameter r >= 0 in layout
/// (q_1, q_2, p_1, p_2):
///   qq block [[cosh 2r, -sinh 2r], [-sinh 2r, cosh 2r]],
///   pp block [[cosh 2r,  sinh 2r], [ sinh 2r, cosh 2r]],
/// and vanishing qp blocks.
CovarianceMatrix two_mode_squeezed_cm(double r);

/// Partial transposition of the second mode of a two-mode state:
/// gamma -> P gamma P with P = diag(1, 1, 1, -1).
CovarianceMatrix partial_transpose(const CovarianceMatrix& cm);

/// Symplectic spectrum: the moduli of the eigenvalues of i sigma gamma come in
/// degenerate pairs; returns one representative per pair, ascending.
/// Throws std::runtime_error if the moduli fail to pair within tolerance
/// (which signals a malformed input, since exact pairing is guaranteed for
/// symmetric gamma).
std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& cm);

/// Logarithmic negativity of a two-mode state:
///   N = -sum_k log2(min(1, nu_k))
/// over the pair representatives nu_k of the partially transposed state.
double log_negativity(const CovarianceMatrix& cm);

/// Squared Frobenius distance d2(a, b) = sum_ij (a_ij - b_ij)^2.
double cm_distance(const CovarianceMatrix& a, const CovarianceMatrix& b);

/// Smallest eigenvalue of the Hermitian matrix gamma + i sigma. A physical
/// state has all eigenvalues >= 0 up to numerical noise.
double physicality_min_eigenvalue(const CovarianceMatrix& cm);

/// True if gamma + i sigma >= -tol, the uncertainty-principle test.
bool is_physical(const CovarianceMatrix& cm, double tol = 1e-8);

namespace detail {
/// Collapses a sorted list of 2m moduli into m pair representatives (pair
/// means). Throws std::runtime_error when some adjacent pair differs by more
/// than tol * max(1, modulus).
std::vector<double> pair_degenerate_moduli(const std::vector<double>& sorted_moduli, double tol);
}  // namespace detail

}  // namespace cvk
