#include "cvk/krotov.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "cvk/spectral.hpp"

namespace cvk {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kDivergenceGuard = 5;

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

ShapeFunction::ShapeFunction(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {}

ShapeFunction ShapeFunction::blackman(const TimeGrid& grid) {
    std::vector<double> v(grid.n_nodes());
    for (int k = 0; k <= grid.n_steps; ++k) {
        const double phase = 2.0 * kPi * static_cast<double>(k) / grid.n_steps;
        const double s = 0.42 - 0.5 * std::cos(phase) + 0.08 * std::cos(2.0 * phase);
        v[k] = std::clamp(s, 0.0, 1.0);
    }
    return ShapeFunction(grid, std::move(v));
}

ShapeFunction ShapeFunction::constant_one(const TimeGrid& grid) {
    return ShapeFunction(grid, std::vector<double>(grid.n_nodes(), 1.0));
}

Eigen::VectorXd costate_boundary(const CovarianceMatrix& final_cm,
                                 const CovarianceMatrix& target) {
    require(final_cm.layout() == target.layout(), "costate_boundary: layout mismatch");
    const int d = final_cm.dim();
    Eigen::MatrixXd diff = 2.0 * (target.matrix() - final_cm.matrix());
    return Eigen::Map<const Eigen::VectorXd>(diff.data(), d * d);
}

double pulse_update_amplitude(const Eigen::VectorXd& chi, const CovarianceMatrix& gamma,
                              const QuadraticGenerator& gen, double shape, double lambda_a) {
    require(gen.layout() == gamma.layout(), "pulse_update_amplitude: layout mismatch");
    require(lambda_a > 0.0, "pulse_update_amplitude: lambda_a must be > 0");
    const int d = gen.layout().dim();
    require(chi.size() == d * d, "pulse_update_amplitude: chi must have length (2n)^2");
    const Eigen::Map<const Eigen::MatrixXd> x(chi.data(), d, d);
    const Eigen::MatrixXd& g = gamma.matrix();
    Eigen::MatrixXd gc = gen.ac() * g;
    gc += g * gen.ac().transpose();
    return (shape / lambda_a) * (x.array() * gc.array()).sum();
}

KrotovResult optimize(const QuadraticGenerator& gen, const TimeGrid& grid,
                      const CovarianceMatrix& gamma0, const CovarianceMatrix& target,
                      const ControlField& guess, const ShapeFunction& shape,
                      const KrotovConfig& config) {
    require(guess.grid == grid, "optimize: guess grid does not match");
    require(shape.grid() == grid, "optimize: shape grid does not match");
    require(gen.layout() == gamma0.layout() && gen.layout() == target.layout(),
            "optimize: layout mismatch");
    require(config.lambda_a > 0.0, "optimize: lambda_a must be > 0");
    require(config.tol_d2 > 0.0, "optimize: tol_d2 must be > 0");
    require(config.max_iters >= 1, "optimize: max_iters must be >= 1");
    if (config.spectral_cutoff)
        require(*config.spectral_cutoff >= 1, "optimize: spectral_cutoff must be >= 1");

    const int d = gen.layout().dim();
    const int n = grid.n_steps;
    const double h = grid.dt();

    KrotovResult result{guess, {}, {}, false, false, 0.0};
    ControlField& field = result.field;

    std::unique_ptr<TruncatedDct> filter;
    if (config.spectral_cutoff) filter = std::make_unique<TruncatedDct>(n, *config.spectral_cutoff);

    auto apply_spectral_filter = [&](std::vector<double>& values) {
        // Rebuild the field from its leading cosine coefficients. Because the
        // guess is band-limited and the projection is linear, cutting the full
        // field each iteration is identical to cutting just this iteration's
        // (already window-shaped) update and adding it on — so the update
        // stays a window-shaped descent step and the stored field is exactly
        // band-limited. The analysis length is the step count; the final node
        // is carried over unchanged.
        std::vector<double> head(values.begin(), values.begin() + n);
        const double tail = values[n];
        values = filter->inverse(filter->forward(head));
        values.push_back(tail);
    };

    result.trajectory = propagate_cm(gen, field, grid, gamma0);
    double d2 = cm_distance(result.trajectory.back(), target);
    result.iterations.push_back({0, d2, 0.0});
    result.final_d2 = d2;
    if (d2 <= config.tol_d2) {
        result.converged = true;
        return result;
    }

    Eigen::MatrixXd g(d, d), a(d, d), k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d), gc(d, d);
    auto rhs = [&](const Eigen::MatrixXd& state, double f_val, Eigen::MatrixXd& deriv) {
        a = gen.a0() + f_val * gen.ac();
        deriv.noalias() = a * state;
        deriv.noalias() += state * a.transpose();
    };

    int rising_streak = 0;
    for (int iter = 1; iter <= config.max_iters; ++iter) {
        const Eigen::VectorXd chi_f = costate_boundary(result.trajectory.back(), target);
        const std::vector<Eigen::MatrixXd> costates = propagate_costate(gen, field, grid, chi_f);

        // Forward sweep with in-place field updates: node k is updated from
        // the stored costate and the state propagated so far, then the step to
        // node k+1 interpolates between the fresh value at k and the
        // previous-iteration value at k+1.
        const std::vector<double> old_values = field.values;
        g = gamma0.matrix();
        for (int k = 0; k <= n; ++k) {
            gc.noalias() = gen.ac() * g;
            gc.noalias() += g * gen.ac().transpose();
            const double grad = (costates[k].array() * gc.array()).sum();
            field.values[k] += (shape.at_node(k) / config.lambda_a) * grad;
            if (!std::isfinite(field.values[k]))
                throw std::runtime_error("optimize: field became non-finite during sweep");
            if (k == n) break;

            const double f0 = field.values[k];
            const double f1 = field.values[k + 1];
            const double fm = 0.5 * (f0 + f1);
            rhs(g, f0, k1);
            tmp = g + (0.5 * h) * k1;
            rhs(tmp, fm, k2);
            tmp = g + (0.5 * h) * k2;
            rhs(tmp, fm, k3);
            tmp = g + h * k3;
            rhs(tmp, f1, k4);
            g += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            g = 0.5 * (g + g.transpose()).eval();
            if (!g.allFinite())
                throw std::runtime_error("optimize: state became non-finite during sweep");
        }

        if (filter) apply_spectral_filter(field.values);

        result.trajectory = propagate_cm(gen, field, grid, gamma0);
        const double prev_d2 = d2;
        d2 = cm_distance(result.trajectory.back(), target);

        double update_sq = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double df = field.values[k] - old_values[k];
            update_sq += df * df * h;
        }
        result.iterations.push_back({iter, d2, std::sqrt(update_sq)});
        result.final_d2 = d2;

        if (d2 <= config.tol_d2) {
            result.converged = true;
            break;
        }
        rising_streak = (d2 > prev_d2) ? rising_streak + 1 : 0;
        if (rising_streak >= kDivergenceGuard) {
            result.diverged = true;
            break;
        }
    }
    return result;
}

double qsl_reachability_hint(double r, double G) {
    require(G > 0.0, "qsl_reachability_hint: G must be > 0");
    require(std::isfinite(r) && r >= 0.0, "qsl_reachability_hint: r must be finite and >= 0");
    return std::acos(1.0 / std::cosh(r)) / G;
}

}  // namespace cvk
