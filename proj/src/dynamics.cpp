#include "cvk/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cvk {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

[[noreturn]] void fail_nonfinite(const char* where, int step) {
    std::ostringstream msg;
    msg << where << ": state became non-finite at step " << step;
    throw std::runtime_error(msg.str());
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace

TimeGrid::TimeGrid(double t_f_in, int n_steps_in) : t_f(t_f_in), n_steps(n_steps_in) {
    require(std::isfinite(t_f) && t_f > 0.0, "TimeGrid: t_f must be finite and > 0");
    require(n_steps >= 2, "TimeGrid: n_steps must be >= 2");
}

ControlField::ControlField(TimeGrid grid_in, std::vector<double> values_in)
    : grid(grid_in), values(std::move(values_in)) {
    require(static_cast<int>(values.size()) == grid.n_nodes(),
            "ControlField: need n_steps + 1 nodal values");
    for (double v : values)
        require(std::isfinite(v), "ControlField: values must be finite");
}

ControlField ControlField::constant(const TimeGrid& grid, double value) {
    return ControlField(grid, std::vector<double>(grid.n_nodes(), value));
}

double ControlField::at(double t) const {
    if (t <= 0.0) return values.front();
    if (t >= grid.t_f) return values.back();
    const double x = t / grid.dt();
    int k = static_cast<int>(x);
    if (k >= grid.n_steps) k = grid.n_steps - 1;
    const double w = x - k;
    return (1.0 - w) * values[k] + w * values[k + 1];
}

QuadraticGenerator::QuadraticGenerator(ModeLayout layout, const Eigen::MatrixXd& m0,
                                       const Eigen::MatrixXd& mc)
    : layout_(layout) {
    const int d = layout_.dim();
    require(m0.rows() == d && m0.cols() == d, "QuadraticGenerator: m0 size mismatch");
    require(mc.rows() == d && mc.cols() == d, "QuadraticGenerator: mc size mismatch");
    require(m0.allFinite() && mc.allFinite(), "QuadraticGenerator: matrices must be finite");
    m0_ = 0.5 * (m0 + m0.transpose());
    mc_ = 0.5 * (mc + mc.transpose());
    const Eigen::MatrixXd sigma = symplectic_form(layout_);
    a0_ = sigma * m0_;
    ac_ = sigma * mc_;
}

Eigen::MatrixXd flow_matrix(const ModeLayout& layout, const Eigen::MatrixXd& m_sym) {
    const int d = layout.dim();
    require(m_sym.rows() == d && m_sym.cols() == d, "flow_matrix: size mismatch");
    const Eigen::MatrixXd a = symplectic_form(layout) * m_sym;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    return kron(id, a) + kron(a, id);
}

Eigen::MatrixXd assemble_flow(const QuadraticGenerator& gen, double f) {
    return flow_matrix(gen.layout(), gen.m0() + f * gen.mc());
}

std::vector<CovarianceMatrix> propagate_cm(const QuadraticGenerator& gen,
                                           const ControlField& field, const TimeGrid& grid,
                                           const CovarianceMatrix& gamma0) {
    require(field.grid == grid, "propagate_cm: field grid does not match");
    require(gen.layout() == gamma0.layout(), "propagate_cm: layout mismatch");
    require(is_physical(gamma0), "propagate_cm: gamma0 violates the uncertainty bound");

    const int d = gen.layout().dim();
    const double h = grid.dt();
    std::vector<CovarianceMatrix> out;
    out.reserve(grid.n_nodes());
    out.push_back(gamma0);

    Eigen::MatrixXd g = gamma0.matrix();
    Eigen::MatrixXd a(d, d), k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);

    auto rhs = [&](const Eigen::MatrixXd& state, double f_val, Eigen::MatrixXd& deriv) {
        a = gen.a0() + f_val * gen.ac();
        deriv.noalias() = a * state;
        deriv.noalias() += state * a.transpose();
    };

    for (int k = 0; k < grid.n_steps; ++k) {
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
        if (!g.allFinite()) fail_nonfinite("propagate_cm", k);
        out.emplace_back(gen.layout(), g);
    }
    return out;
}

std::vector<Eigen::MatrixXd> propagate_costate(const QuadraticGenerator& gen,
                                               const ControlField& field, const TimeGrid& grid,
                                               const Eigen::VectorXd& chi_f) {
    require(field.grid == grid, "propagate_costate: field grid does not match");
    const int d = gen.layout().dim();
    require(chi_f.size() == d * d, "propagate_costate: chi_f must have length (2n)^2");
    require(chi_f.allFinite(), "propagate_costate: chi_f must be finite");

    std::vector<Eigen::MatrixXd> out(grid.n_nodes());
    // Column-stacking: X(i, j) = chi(j * d + i).
    Eigen::MatrixXd x = Eigen::Map<const Eigen::MatrixXd>(chi_f.data(), d, d);
    out[grid.n_steps] = x;

    const double h = -grid.dt();
    Eigen::MatrixXd a(d, d), k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);

    auto rhs = [&](const Eigen::MatrixXd& state, double f_val, Eigen::MatrixXd& deriv) {
        a = gen.a0() + f_val * gen.ac();
        deriv.noalias() = -(a.transpose() * state);
        deriv.noalias() -= state * a;
    };

    for (int k = grid.n_steps; k > 0; --k) {
        const double f0 = field.values[k];
        const double f1 = field.values[k - 1];
        const double fm = 0.5 * (f0 + f1);

        rhs(x, f0, k1);
        tmp = x + (0.5 * h) * k1;
        rhs(tmp, fm, k2);
        tmp = x + (0.5 * h) * k2;
        rhs(tmp, fm, k3);
        tmp = x + h * k3;
        rhs(tmp, f1, k4);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) fail_nonfinite("propagate_costate", k);
        out[k - 1] = x;
    }
    return out;
}

std::vector<Eigen::VectorXd> propagate_first_moments(
    const QuadraticGenerator& gen, const ControlField& field, const TimeGrid& grid,
    const FirstMoments& m0, const std::optional<Eigen::MatrixXd>& bath_drift) {
    require(field.grid == grid, "propagate_first_moments: field grid does not match");
    require(gen.layout() == m0.layout, "propagate_first_moments: layout mismatch");
    const int d = gen.layout().dim();

    Eigen::MatrixXd drift = Eigen::MatrixXd::Zero(d, d);
    if (bath_drift) {
        require(bath_drift->rows() == d && bath_drift->cols() == d,
                "propagate_first_moments: bath_drift size mismatch");
        drift = symplectic_form(gen.layout()) * (*bath_drift);
    }

    std::vector<Eigen::VectorXd> out;
    out.reserve(grid.n_nodes());
    out.push_back(m0.data);

    Eigen::VectorXd v = m0.data;
    const double h = grid.dt();
    Eigen::MatrixXd a(d, d);
    Eigen::VectorXd k1(d), k2(d), k3(d), k4(d), tmp(d);

    auto rhs = [&](const Eigen::VectorXd& state, double f_val, Eigen::VectorXd& deriv) {
        a = gen.a0() + f_val * gen.ac() + drift;
        deriv.noalias() = a * state;
    };

    for (int k = 0; k < grid.n_steps; ++k) {
        const double f0 = field.values[k];
        const double f1 = field.values[k + 1];
        const double fm = 0.5 * (f0 + f1);

        rhs(v, f0, k1);
        tmp = v + (0.5 * h) * k1;
        rhs(tmp, fm, k2);
        tmp = v + (0.5 * h) * k2;
        rhs(tmp, fm, k3);
        tmp = v + h * k3;
        rhs(tmp, f1, k4);
        v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!v.allFinite()) fail_nonfinite("propagate_first_moments", k);
        out.push_back(v);
    }
    return out;
}

}  // namespace cvk
