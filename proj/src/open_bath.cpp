#include "cvk/open_bath.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

namespace cvk {

namespace {

using std::complex;
const complex<double> kI(0.0, 1.0);

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

LorentzianBath::LorentzianBath(double eta_in, double omega_shift_in,
                               Eigen::VectorXcd couplings_in, bool markov_in)
    : eta(eta_in), omega_shift(omega_shift_in), couplings(std::move(couplings_in)),
      markov(markov_in) {
    require(std::isfinite(eta) && std::isfinite(omega_shift),
            "LorentzianBath: parameters must be finite");
    require(markov || eta > 0.0, "LorentzianBath: eta must be > 0 unless markov");
    require(couplings.size() >= 2 && couplings.size() % 2 == 0,
            "LorentzianBath: couplings must have length 2 * n_modes");
    require(couplings.allFinite(), "LorentzianBath: couplings must be finite");
}

LorentzianBath LorentzianBath::single_mechanical(double lambda, double eta, double omega_shift,
                                                 bool markov) {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::VectorXcd l(4);
    l << 0.0, lambda * s, 0.0, kI * (lambda * s);
    return LorentzianBath(eta, omega_shift, std::move(l), markov);
}

LorentzianBath LorentzianBath::two_mode(double lambda_o, double lambda_m, double eta,
                                        double omega_shift, bool markov) {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::VectorXcd l(4);
    l << lambda_o * s, lambda_m * s, kI * (lambda_o * s), kI * (lambda_m * s);
    return LorentzianBath(eta, omega_shift, std::move(l), markov);
}

Eigen::VectorXcd obar_rhs(const LorentzianBath& bath, const QuadraticGenerator& gen, double f,
                          const Eigen::VectorXcd& o) {
    require(!bath.markov, "obar_rhs: no memory equation in Markov mode");
    const int d = gen.layout().dim();
    require(bath.couplings.size() == d && o.size() == d, "obar_rhs: dimension mismatch");

    const Eigen::VectorXcd& l = bath.couplings;
    const complex<double> eta_eff(bath.eta, bath.omega_shift);
    const double alpha0 = 0.5 * bath.eta;

    // sigma M with M = m0 + f mc, promoted to complex once.
    const Eigen::MatrixXd a = gen.a0() + f * gen.ac();
    const Eigen::MatrixXd sigma = symplectic_form(gen.layout());

    const Eigen::VectorXcd sigma_o = sigma.cast<complex<double>>() * o;
    const complex<double> o_sigma_o = (o.transpose() * sigma_o)(0);          // sum_kl sigma_kl o_k o_l
    const complex<double> lconj_sigma_o = (l.adjoint() * sigma_o)(0);        // sum_kl sigma_kl l*_k o_l

    Eigen::VectorXcd rhs = alpha0 * l - eta_eff * o;
    rhs -= a.transpose().cast<complex<double>>() * o;                        // -o_l [sigma M]_{l i}
    rhs -= kI * (o_sigma_o * l.conjugate() + lconj_sigma_o * o);
    return rhs;
}

DriftDiffusion drift_diffusion(const LorentzianBath& bath, const Eigen::VectorXcd& o) {
    const auto d = bath.couplings.size();
    require(o.size() == d, "drift_diffusion: dimension mismatch");
    const Eigen::VectorXcd& l = bath.couplings;
    // Delta_mn = Re[i l_m o*_n - i l*_m o_n] = -2 Im(l_m o*_n).
    Eigen::MatrixXd drift = -2.0 * (l * o.adjoint()).imag();
    // deltaR_mn = Re[l*_m o_n + o*_m l_n].
    Eigen::MatrixXd diffusion =
        ((l.conjugate() * o.transpose()) + (o.conjugate() * l.transpose())).real();
    return DriftDiffusion{std::move(drift), std::move(diffusion)};
}

OpenTrajectory propagate_open_cm(const QuadraticGenerator& gen, const ControlField& field,
                                 const TimeGrid& grid, const LorentzianBath& bath,
                                 const CovarianceMatrix& gamma0) {
    require(field.grid == grid, "propagate_open_cm: field grid does not match");
    require(gen.layout() == gamma0.layout(), "propagate_open_cm: layout mismatch");
    const int d = gen.layout().dim();
    require(bath.couplings.size() == d, "propagate_open_cm: couplings do not match layout");
    require(is_physical(gamma0), "propagate_open_cm: gamma0 violates the uncertainty bound");

    const Eigen::MatrixXd sigma = symplectic_form(gen.layout());
    const double h = grid.dt();

    OpenTrajectory out;
    out.cms.reserve(grid.n_nodes());
    out.obar.reserve(grid.n_nodes());

    Eigen::MatrixXd g = gamma0.matrix();
    Eigen::VectorXcd o = bath.markov ? Eigen::VectorXcd(0.5 * bath.couplings)
                                     : Eigen::VectorXcd(Eigen::VectorXcd::Zero(d));
    out.cms.push_back(gamma0);
    out.obar.push_back(o);

    // Stage derivative of the pair (gamma, o) at field value f.
    auto rhs = [&](const Eigen::MatrixXd& g_state, const Eigen::VectorXcd& o_state, double f,
                   Eigen::MatrixXd& dg, Eigen::VectorXcd& do_) {
        const DriftDiffusion dd = drift_diffusion(bath, o_state);
        Eigen::MatrixXd b = gen.a0() + f * gen.ac();
        b.noalias() += sigma * dd.drift;
        dg.noalias() = b * g_state;
        dg.noalias() += g_state * b.transpose();
        dg.noalias() += 2.0 * (sigma * dd.diffusion * sigma.transpose());
        if (bath.markov)
            do_.setZero(d);
        else
            do_ = obar_rhs(bath, gen, f, o_state);
    };

    Eigen::MatrixXd gk1(d, d), gk2(d, d), gk3(d, d), gk4(d, d);
    Eigen::VectorXcd ok1(d), ok2(d), ok3(d), ok4(d);

    for (int k = 0; k < grid.n_steps; ++k) {
        const double f0 = field.values[k];
        const double f1 = field.values[k + 1];
        const double fm = 0.5 * (f0 + f1);

        rhs(g, o, f0, gk1, ok1);
        rhs(g + (0.5 * h) * gk1, o + (0.5 * h) * ok1, fm, gk2, ok2);
        rhs(g + (0.5 * h) * gk2, o + (0.5 * h) * ok2, fm, gk3, ok3);
        rhs(g + h * gk3, o + h * ok3, f1, gk4, ok4);
        g += (h / 6.0) * (gk1 + 2.0 * gk2 + 2.0 * gk3 + gk4);
        o += (h / 6.0) * (ok1 + 2.0 * ok2 + 2.0 * ok3 + ok4);
        g = 0.5 * (g + g.transpose()).eval();
        if (!g.allFinite() || !o.allFinite()) {
            std::ostringstream msg;
            msg << "propagate_open_cm: state became non-finite at step " << k;
            throw std::runtime_error(msg.str());
        }
        out.cms.emplace_back(gen.layout(), g);
        out.obar.push_back(o);
    }
    return out;
}

}  // namespace cvk
