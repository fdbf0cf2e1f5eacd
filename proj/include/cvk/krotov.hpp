#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cvk/dynamics.hpp"
#include "cvk/gaussian.hpp"

namespace cvk {

/// Update window S(t) evaluated at the grid nodes and clamped to [0, 1].
/// Blackman: S(t) = 0.42 - 0.5 cos(2 pi t / t_f) + 0.08 cos(4 pi t / t_f),
/// which vanishes at both ends and so pins the field endpoints.
class ShapeFunction {
  public:
    static ShapeFunction blackman(const TimeGrid& grid);
    static ShapeFunction constant_one(const TimeGrid& grid);

    const TimeGrid& grid() const { return grid_; }
    double at_node(int k) const { return values_[k]; }
    const std::vector<double>& values() const { return values_; }

  private:
    ShapeFunction(TimeGrid grid, std::vector<double> values);
    TimeGrid grid_;
    std::vector<double> values_;
};

struct KrotovConfig {
    double lambda_a = 8000.0;   // inverse update strength; Delta f ~ S / lambda_a
    double tol_d2 = 1e-4;       // stop once d2(gamma(t_f), target) <= tol_d2
    int max_iters = 2000;
    std::optional<int> spectral_cutoff;  // keep this many cosine coefficients
};

struct IterationRecord {
    int iter;
    double d2;
    double field_update_norm;  // L2 norm over the grid of the total field change
};

struct KrotovResult {
    ControlField field;
    std::vector<IterationRecord> iterations;
    std::vector<CovarianceMatrix> trajectory;  // propagation under the final field
    bool converged = false;
    bool diverged = false;
    double final_d2 = 0.0;
};

/// Costate terminal condition chi(t_f) = 2 [vec(target) - vec(final)], the
/// negative gradient of d2 with respect to vec(gamma(t_f)).
Eigen::VectorXd costate_boundary(const CovarianceMatrix& final_cm, const CovarianceMatrix& target);

/// Time-local update amplitude
///   Delta f = (shape / lambda_a) * chi^T G_c vec(gamma)
///           = (shape / lambda_a) * <X, A_c gamma + gamma A_c^T>_F,
/// where A_c = sigma mc and X is chi unstacked to a 2n x 2n matrix.
double pulse_update_amplitude(const Eigen::VectorXd& chi, const CovarianceMatrix& gamma,
                              const QuadraticGenerator& gen, double shape, double lambda_a);

/// Iterative pulse optimization toward a target covariance matrix.
///
/// Each iteration: (1) propagate the costate backward under the current field
/// from the terminal condition above; (2) sweep forward, updating the field
/// node by node with pulse_update_amplitude and advancing the state with the
/// freshly updated values; (3) with a spectral cutoff configured, reconstruct
/// the field from its leading cosine coefficients, so the stored field is
/// exactly band-limited (equivalent, for a band-limited guess, to low-passing
/// each window-shaped update); (4) re-propagate under the new field and record
/// d2. Stops on d2 <= tol_d2, on the iteration budget, or once d2 has
/// increased five iterations in a row (divergence guard).
KrotovResult optimize(const QuadraticGenerator& gen, const TimeGrid& grid,
                      const CovarianceMatrix& gamma0, const CovarianceMatrix& target,
                      const ControlField& guess, const ShapeFunction& shape,
                      const KrotovConfig& config);

/// Minimum time scale for reaching the two-mode squeezed target:
///   T_QSL = arccos(1 / cosh r) / G.
double qsl_reachability_hint(double r, double G);

}  // namespace cvk
