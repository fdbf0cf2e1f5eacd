#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "cvk/dynamics.hpp"
#include "cvk/krotov.hpp"

namespace cvk {

/// Linearized optomechanical system in the frame where the control field f(t)
/// is the (sign-flipped) cavity detuning. Layout (q_c, q_m, p_c, p_m),
/// mechanical frequency omega_m, linearized coupling G.
struct OptomechParams {
    double omega_m = 1.0;
    double G = 0.1;
};

/// Drift and control matrices of H = (1/2) R^T [m0 + f(t) mc] R:
///   m0 = [[0, 2G, 0, 0], [2G, omega_m, 0, 0], [0, 0, 0, 0], [0, 0, 0, omega_m]],
///   mc = diag(1, 0, 1, 0).
QuadraticGenerator build_generator(const OptomechParams& params);

/// Inputs of the classical steady state of the driven cavity before
/// linearization.
struct MeanFieldParams {
    double omega_c;  // cavity frequency
    double omega;    // drive frequency
    double omega_m = 1.0;
    double g;        // single-photon coupling
    double drive;    // Omega_d
    double kappa_a;  // cavity linewidth
};

struct MeanFieldSolution {
    std::complex<double> alpha;  // cavity amplitude
    double beta;                 // mechanical displacement, real
    double detuning;             // omega - omega_c + 2 G^2 / omega_m
    double G;                    // |alpha| g (phase gauged away)
    int iterations;
};

/// Damped fixed-point solution (mixing 1/2) of
///   [i (omega - omega_c) - i g (beta + beta*) - kappa_a] alpha = i drive,
///   -i omega_m beta = i g |alpha|^2.
/// Throws std::runtime_error after 10^4 iterations without convergence (the
/// bistable regime has no unique fixed point), reporting the last two
/// iterates.
MeanFieldSolution mean_field_fixed_point(const MeanFieldParams& params);

/// Bath parameters in plain scalar form, mapped to LorentzianBath couplings
/// by the experiment layer.
struct BathSpec {
    double eta = 0.5;
    double omega_shift = 0.0;
    double lambda_o = 0.0;
    double lambda_m = 0.0;
    bool markov = false;
};

struct ScanAxis {
    std::string name;  // one of: G, t_f, lambda, eta, lambda_o, lambda_m
    double min = 0.0;
    double max = 0.0;
    int count = 24;
};

struct ScanSpec {
    ScanAxis axis1, axis2;
};

/// Everything needed to reproduce one of the canned experiments.
struct ProblemPreset {
    std::string name;
    OptomechParams model;
    double target_r;
    TimeGrid grid;
    KrotovConfig krotov;
    double guess_constant = 0.0;
    std::optional<BathSpec> bath;
    std::optional<ScanSpec> scan;
};

/// Canned experiment bundles: fig2, fig2_spectral, fig3_rwa, fig3_strong,
/// fig4_scan, fig5_open, fig6_scan, fig7_scan.
ProblemPreset preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace cvk
