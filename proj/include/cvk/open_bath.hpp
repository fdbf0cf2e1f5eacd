#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cvk/dynamics.hpp"
#include "cvk/gaussian.hpp"

namespace cvk {

/// Bath with Lorentzian spectral density and correlation kernel
///   alpha(t - s) = (eta / 2) exp(-(eta + i Omega) |t - s|),
/// coupling to the system through L = sum_i l_i R_i. The auxiliary operator
/// Obar = sum_i o_i R_i carries the memory; its coefficients obey the o-ODE
/// below with o(0) = 0. In Markov mode o is pinned to its wide-band limit
/// l / 2 and never integrated.
struct LorentzianBath {
    LorentzianBath(double eta_in, double omega_shift_in, Eigen::VectorXcd couplings_in,
                   bool markov_in);

    double eta;                  // kernel decay rate
    double omega_shift;          // kernel oscillation Omega
    Eigen::VectorXcd couplings;  // l, length 2 n_modes
    bool markov;

    /// Mechanical-only damping L = lambda * b, b = (q_2 + i p_2) / sqrt(2):
    /// l = (0, lambda/sqrt2, 0, i lambda/sqrt2) in the two-mode layout.
    static LorentzianBath single_mechanical(double lambda, double eta, double omega_shift = 0.0,
                                            bool markov = false);

    /// Both modes damped, L = lambda_o a + lambda_m b:
    /// l = (lambda_o, lambda_m, i lambda_o, i lambda_m) / sqrt(2).
    static LorentzianBath two_mode(double lambda_o, double lambda_m, double eta,
                                   double omega_shift = 0.0, bool markov = false);
};

/// Right-hand side of the memory-coefficient equation
///   d/dt o_i = alpha(0) l_i - (eta + i Omega) o_i - o_l [sigma M]_{l i}
///              - i sigma_{k l} (o_k o_l l*_i + o_i o_l l*_k),
/// with alpha(0) = eta / 2 and M = m0 + f * mc.
Eigen::VectorXcd obar_rhs(const LorentzianBath& bath, const QuadraticGenerator& gen, double f,
                          const Eigen::VectorXcd& o);

/// Drift and diffusion corrections built from the instantaneous o:
///   Delta_mn   = Re[i l_m o*_n - i l*_m o_n]   (real by construction),
///   deltaR_mn  = Re[l*_m o_n + o*_m l_n].
/// In the Markov limit o = l / 2 these reduce to Im(l*_m l_n) and
/// Re(l*_m l_n).
struct DriftDiffusion {
    Eigen::MatrixXd drift;      // Delta
    Eigen::MatrixXd diffusion;  // deltaR
};
DriftDiffusion drift_diffusion(const LorentzianBath& bath, const Eigen::VectorXcd& o);

struct OpenTrajectory {
    std::vector<CovarianceMatrix> cms;
    std::vector<Eigen::VectorXcd> obar;
};

/// Joint fixed-step RK4 integration of the memory coefficients and the
/// covariance matrix:
///   d/dt gamma = B gamma + gamma B^T + 2 sigma deltaR sigma^T,
///   B = sigma M(t) + sigma Delta,
/// with o evolving per obar_rhs (or held at l / 2 in Markov mode; that is the
/// identical code path with a frozen o). Returns both trajectories at every
/// node.
OpenTrajectory propagate_open_cm(const QuadraticGenerator& gen, const ControlField& field,
                                 const TimeGrid& grid, const LorentzianBath& bath,
                                 const CovarianceMatrix& gamma0);

}  // namespace cvk
