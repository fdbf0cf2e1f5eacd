#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cvk/gaussian.hpp"

namespace cvk {

/// Uniform time grid on [0, t_f] with n_steps integration steps and
/// n_steps + 1 nodes t_k = k * dt.
struct TimeGrid {
    TimeGrid(double t_f_in, int n_steps_in);

    double t_f;
    int n_steps;

    double dt() const { return t_f / n_steps; }
    int n_nodes() const { return n_steps + 1; }
    double node(int k) const { return t_f * static_cast<double>(k) / n_steps; }
    bool operator==(const TimeGrid& other) const {
        return t_f == other.t_f && n_steps == other.n_steps;
    }
};

/// Scalar control amplitude sampled at the grid nodes. Values between nodes
/// are linearly interpolated, which is how the integrators evaluate the field
/// at Runge-Kutta mid-stages.
struct ControlField {
    ControlField(TimeGrid grid_in, std::vector<double> values_in);

    static ControlField constant(const TimeGrid& grid, double value);

    TimeGrid grid;
    std::vector<double> values;

    /// Linear interpolation at arbitrary t in [0, t_f].
    double at(double t) const;
};

/// Quadratic Hamiltonian H = (1/2) R^T M(t) R with M(t) = m0 + f(t) * mc.
/// Both matrices are stored symmetrized, M -> (M + M^T) / 2.
class QuadraticGenerator {
  public:
    QuadraticGenerator(ModeLayout layout, const Eigen::MatrixXd& m0, const Eigen::MatrixXd& mc);

    const ModeLayout& layout() const { return layout_; }
    const Eigen::MatrixXd& m0() const { return m0_; }
    const Eigen::MatrixXd& mc() const { return mc_; }

    /// Drift part sigma * m0 (cached).
    const Eigen::MatrixXd& a0() const { return a0_; }
    /// Control part sigma * mc (cached); the flow at field value f uses
    /// A(f) = a0 + f * ac.
    const Eigen::MatrixXd& ac() const { return ac_; }

  private:
    ModeLayout layout_;
    Eigen::MatrixXd m0_, mc_;
    Eigen::MatrixXd a0_, ac_;
};

/// Vectorized flow matrix G(M) = I (x) (sigma M) + (sigma M) (x) I acting on
/// column-stacked vec(gamma): G vec(gamma) = vec(A gamma + gamma A^T) with
/// A = sigma M.
Eigen::MatrixXd flow_matrix(const ModeLayout& layout, const Eigen::MatrixXd& m_sym);

/// Flow matrix of the generator at field value f, i.e. flow_matrix for
/// M = m0 + f * mc.
Eigen::MatrixXd assemble_flow(const QuadraticGenerator& gen, double f);

/// Integrates d/dt gamma = A(t) gamma + gamma A(t)^T, A(t) = sigma M(t), with
/// classical fixed-step RK4 on the grid. Returns the state at every node
/// (n_steps + 1 entries, first is gamma0). The state is re-symmetrized after
/// every step. Throws std::runtime_error naming the step if the state stops
/// being finite.
std::vector<CovarianceMatrix> propagate_cm(const QuadraticGenerator& gen,
                                           const ControlField& field, const TimeGrid& grid,
                                           const CovarianceMatrix& gamma0);

/// Integrates the adjoint equation d/dt chi = -G(t)^T chi backward from
/// chi(t_f) = chi_f, equivalently d/dt X = -(A^T X + X A) for the unstacked
/// 2n x 2n matrix X. Returns X at every node, index-aligned with the grid.
std::vector<Eigen::MatrixXd> propagate_costate(const QuadraticGenerator& gen,
                                               const ControlField& field, const TimeGrid& grid,
                                               const Eigen::VectorXd& chi_f);

/// Integrates d/dt <R> = [sigma M(t) + sigma Delta] <R>; bath_drift supplies
/// the optional static drift correction Delta. Returns <R> at every node.
std::vector<Eigen::VectorXd> propagate_first_moments(
    const QuadraticGenerator& gen, const ControlField& field, const TimeGrid& grid,
    const FirstMoments& m0, const std::optional<Eigen::MatrixXd>& bath_drift = std::nullopt);

}  // namespace cvk
