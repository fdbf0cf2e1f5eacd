#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "cvk/krotov.hpp"
#include "cvk/spectral.hpp"
#include "oracles.hpp"

using cvk::ControlField;
using cvk::CovarianceMatrix;
using cvk::KrotovConfig;
using cvk::ModeLayout;
using cvk::QuadraticGenerator;
using cvk::ShapeFunction;
using cvk::TimeGrid;

namespace {

QuadraticGenerator entangler(double coupling) {
    const ModeLayout layout{2};
    Eigen::MatrixXd m0 = Eigen::MatrixXd::Zero(4, 4);
    m0(0, 1) = m0(1, 0) = 2.0 * coupling;
    m0(1, 1) = 1.0;
    m0(3, 3) = 1.0;
    Eigen::MatrixXd mc = Eigen::MatrixXd::Zero(4, 4);
    mc(0, 0) = 1.0;
    mc(2, 2) = 1.0;
    return QuadraticGenerator(layout, m0, mc);
}

}  // namespace

TEST_CASE("update window vanishes at the ends and peaks near the middle") {
    const TimeGrid grid(60.0, 240);
    const ShapeFunction s = ShapeFunction::blackman(grid);
    CHECK(s.at_node(0) == 0.0);               // exactly zero, not just small
    CHECK(s.at_node(grid.n_steps) == 0.0);
    CHECK(s.at_node(grid.n_steps / 2) == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 0; k <= grid.n_steps; ++k) {
        CHECK(s.at_node(k) >= 0.0);
        CHECK(s.at_node(k) <= 1.0);
    }
    // Spot value: S at t = t_f / 4 is 0.42 - 0.5 cos(pi/2) + 0.08 cos(pi) = 0.34.
    CHECK(s.at_node(grid.n_steps / 4) == doctest::Approx(0.34).epsilon(1e-12));

    const ShapeFunction one = ShapeFunction::constant_one(grid);
    CHECK(one.at_node(0) == 1.0);
    CHECK(one.at_node(grid.n_steps) == 1.0);
}

TEST_CASE("costate boundary is the negative distance gradient") {
    const CovarianceMatrix target = cvk::two_mode_squeezed_cm(0.9);
    const CovarianceMatrix state = cvk::vacuum_cm(ModeLayout{2});
    const Eigen::VectorXd chi = cvk::costate_boundary(state, target);
    REQUIRE(chi.size() == 16);

    // Finite-difference check: d2(gamma + eps E_ij) - d2(gamma) = -eps chi_(ij).
    const double eps = 1e-6;
    const double base = cvk::cm_distance(state, target);
    for (int idx : {0, 5, 9, 14}) {
        const int i = idx % 4;
        const int j = idx / 4;
        Eigen::MatrixXd bumped = state.matrix();
        bumped(i, j) += eps;
        bumped = 0.5 * (bumped + bumped.transpose()).eval();
        // Symmetrized bump: off-diagonal entries move (i,j) and (j,i) by eps/2
        // each, which matches the symmetric gradient component chi_(ij).
        const CovarianceMatrix moved(state.layout(), bumped);
        const double fd = (cvk::cm_distance(moved, target) - base) / eps;
        CHECK(fd == doctest::Approx(-chi(idx)).epsilon(1e-4));
    }
}

TEST_CASE("pulse update amplitude equals the dense vectorized contraction") {
    const QuadraticGenerator gen = entangler(0.2);
    const Eigen::MatrixXd sigma = cvk::symplectic_form(gen.layout());
    const Eigen::MatrixXd s = oracle::random_symplectic(sigma);
    const CovarianceMatrix gamma(gen.layout(), s * s.transpose());
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd chi(16);
    for (int i = 0; i < 16; ++i) chi(i) = dist(oracle::rng());

    // Oracle: chi^T [I (x) A_c + A_c (x) I] vec(gamma) with dense Kronecker.
    const Eigen::MatrixXd ac = sigma * gen.mc();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
    const Eigen::MatrixXd gc = oracle::kron(id, ac) + oracle::kron(ac, id);
    const double contraction = chi.dot(gc * oracle::vec(gamma.matrix()));

    const double lambda_a = 8000.0;
    const double shape = 0.37;
    const double update = cvk::pulse_update_amplitude(chi, gamma, gen, shape, lambda_a);
    CHECK(update == doctest::Approx(shape / lambda_a * contraction).epsilon(1e-12));

    // Scaling in lambda_a and vanishing shape.
    CHECK(cvk::pulse_update_amplitude(chi, gamma, gen, shape, 2.0 * lambda_a) ==
          doctest::Approx(0.5 * update).epsilon(1e-12));
    CHECK(cvk::pulse_update_amplitude(chi, gamma, gen, 0.0, lambda_a) == 0.0);
}

TEST_CASE("update amplitude points along the true distance gradient") {
    // For the terminal-cost problem, the first-order change of d2 under a
    // localized field bump must match what the costate contraction predicts.
    const QuadraticGenerator gen = entangler(0.25);
    const TimeGrid grid(4.0, 400);
    const ControlField field = ControlField::constant(grid, -0.9);
    const CovarianceMatrix vac = cvk::vacuum_cm(gen.layout());
    const CovarianceMatrix target = cvk::two_mode_squeezed_cm(0.6);

    auto terminal_d2 = [&](const ControlField& f) {
        return cvk::cm_distance(cvk::propagate_cm(gen, f, grid, vac).back(), target);
    };

    const auto traj = cvk::propagate_cm(gen, field, grid, vac);
    const Eigen::VectorXd chi_f = cvk::costate_boundary(traj.back(), target);
    const auto costates = cvk::propagate_costate(gen, field, grid, chi_f);

    const int k = 170;  // an interior node
    // chi^T G_c vec(gamma) at node k = -dJ/df_k per unit time (the functional
    // derivative); a nodal bump of height eps integrates to eps * dt of field
    // area under linear interpolation.
    const double grad = cvk::pulse_update_amplitude(
        oracle::vec(costates[static_cast<std::size_t>(k)]), traj[static_cast<std::size_t>(k)],
        gen, 1.0, 1.0);

    const double eps = 1e-5;
    ControlField bumped = field;
    bumped.values[static_cast<std::size_t>(k)] += eps;
    const double dj = terminal_d2(bumped) - terminal_d2(field);
    const double predicted = -eps * grid.dt() * grad;
    CHECK(dj == doctest::Approx(predicted).epsilon(1e-3));
}

TEST_CASE("optimization is a no-op when the initial state already matches the target") {
    const QuadraticGenerator gen = entangler(0.2);
    const TimeGrid grid(1.0, 50);
    // Target = free evolution endpoint of the guess: zero iterations needed.
    const ControlField guess = ControlField::constant(grid, -1.0);
    const CovarianceMatrix vac = cvk::vacuum_cm(gen.layout());
    const CovarianceMatrix target = cvk::propagate_cm(gen, guess, grid, vac).back();

    KrotovConfig config;
    config.tol_d2 = 1e-10;
    const auto result =
        cvk::optimize(gen, grid, vac, target, guess, ShapeFunction::blackman(grid), config);
    CHECK(result.converged);
    CHECK(result.iterations.size() == 1);  // baseline record only
    CHECK(result.iterations.front().d2 <= 1e-10);
    CHECK(result.field.values == guess.values);
}

TEST_CASE("small entangling problem converges with pinned endpoints") {
    const QuadraticGenerator gen = entangler(0.3);
    const TimeGrid grid(8.0, 800);
    const ControlField guess = ControlField::constant(grid, 0.0);
    const CovarianceMatrix vac = cvk::vacuum_cm(gen.layout());
    const CovarianceMatrix target = cvk::two_mode_squeezed_cm(0.4);

    KrotovConfig config;
    config.lambda_a = 50.0;
    config.tol_d2 = 1e-3;
    config.max_iters = 4000;
    const auto result =
        cvk::optimize(gen, grid, vac, target, guess, ShapeFunction::blackman(grid), config);

    CHECK(result.converged);
    CHECK_FALSE(result.diverged);
    CHECK(result.final_d2 <= 1e-3);
    // At this deliberately strong coupling the first few steps can overshoot;
    // past the transient the distance must fall monotonically.
    for (std::size_t i = 51; i < result.iterations.size(); ++i)
        CHECK(result.iterations[i].d2 <= result.iterations[i - 1].d2 + 1e-12);

    // The Blackman window freezes both endpoints at the (zero) guess value.
    CHECK(std::abs(result.field.values.front()) < 1e-12);
    CHECK(std::abs(result.field.values.back()) < 1e-12);

    // The recorded trajectory is the propagation under the returned field.
    const auto check = cvk::propagate_cm(gen, result.field, grid, vac);
    CHECK((check.back().matrix() - result.trajectory.back().matrix()).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("spectrally constrained optimization emits an exactly band-limited field") {
    const QuadraticGenerator gen = entangler(0.3);
    const TimeGrid grid(8.0, 800);
    const ControlField guess = ControlField::constant(grid, 0.0);
    const CovarianceMatrix vac = cvk::vacuum_cm(gen.layout());
    const CovarianceMatrix target = cvk::two_mode_squeezed_cm(0.4);

    KrotovConfig config;
    config.lambda_a = 50.0;
    config.tol_d2 = 1e-3;
    config.max_iters = 6000;
    config.spectral_cutoff = 12;
    const auto result =
        cvk::optimize(gen, grid, vac, target, guess, ShapeFunction::blackman(grid), config);
    CHECK(result.converged);
    CHECK(result.final_d2 <= 1e-3);

    // All cosine amplitudes of the emitted field (final node dropped, since
    // the analysis length is the step count) above the cutoff vanish.
    std::vector<double> head(result.field.values.begin(), result.field.values.end() - 1);
    const cvk::Spectrum spec = cvk::dct_forward(head, grid.t_f);
    for (int k = 12; k < spec.size(); ++k) CHECK(std::abs(spec.amplitude(k)) < 1e-12);
    // The final node is never touched (zero window there), so the right end
    // stays at the guess value even in spectral mode.
    CHECK(result.field.values.back() == 0.0);
}

TEST_CASE("reachability time scale: arccos(1 / cosh r) / G") {
    CHECK(cvk::qsl_reachability_hint(0.8, 0.1) ==
          doctest::Approx(7.262048227415288).epsilon(1e-12));
    CHECK(cvk::qsl_reachability_hint(0.0, 0.1) == doctest::Approx(0.0).epsilon(1e-15));
    // Doubling G halves the bound.
    CHECK(cvk::qsl_reachability_hint(1.25, 0.2) ==
          doctest::Approx(0.5 * cvk::qsl_reachability_hint(1.25, 0.1)).epsilon(1e-12));
}
