#include "cvk/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cvk {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

void check_signal(const std::vector<double>& x) {
    require(x.size() >= 2, "dct: need at least 2 samples");
    for (double v : x) require(std::isfinite(v), "dct: samples must be finite");
}

}  // namespace

Spectrum::Spectrum(std::vector<double> coefficients, double t_f)
    : coefficients_(std::move(coefficients)), t_f_(t_f) {
    require(coefficients_.size() >= 2, "Spectrum: need at least 2 coefficients");
    require(std::isfinite(t_f_) && t_f_ > 0.0, "Spectrum: t_f must be finite and > 0");
}

double Spectrum::frequency(int j) const {
    require(j >= 0 && j < size(), "Spectrum::frequency: index out of range");
    return kPi * j / t_f_;
}

double Spectrum::phase(int j) const {
    require(j >= 0 && j < size(), "Spectrum::phase: index out of range");
    return kPi * j / (2.0 * size());
}

double Spectrum::amplitude(int j) const {
    require(j >= 0 && j < size(), "Spectrum::amplitude: index out of range");
    const double scale = (j == 0) ? 1.0 : 2.0;
    return scale * std::abs(coefficients_[j]) / logical_size();
}

Spectrum dct_forward(const std::vector<double>& x, double t_f) {
    check_signal(x);
    const int n = static_cast<int>(x.size());
    std::vector<double> y(n, 0.0);
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += x[j] * std::cos(kPi * (j + 0.5) * k / n);
        y[k] = 2.0 * acc;
    }
    return Spectrum(std::move(y), t_f);
}

std::vector<double> dct_inverse(const Spectrum& spectrum) {
    const int n = spectrum.size();
    const double inv_n2 = 1.0 / spectrum.logical_size();
    const std::vector<double>& y = spectrum.coefficients();
    std::vector<double> x(n, 0.0);
    for (int k = 0; k < n; ++k) {
        double acc = y[0];
        for (int j = 1; j < n; ++j) {
            if (y[j] == 0.0) continue;
            acc += 2.0 * y[j] * std::cos(kPi * j * (k + 0.5) / n);
        }
        x[k] = acc * inv_n2;
    }
    return x;
}

Spectrum low_pass(Spectrum spectrum, int keep) {
    require(keep >= 1, "low_pass: keep must be >= 1");
    auto& y = spectrum.coefficients();
    for (int j = keep; j < spectrum.size(); ++j) y[j] = 0.0;
    return spectrum;
}

std::vector<std::pair<double, double>> amplitude_report(const Spectrum& spectrum) {
    std::vector<std::pair<double, double>> out;
    out.reserve(spectrum.size());
    for (int j = 0; j < spectrum.size(); ++j)
        out.emplace_back(spectrum.frequency(j), spectrum.amplitude(j));
    return out;
}

std::vector<double> truncated_dct_coefficients(const std::vector<double>& x, int keep) {
    check_signal(x);
    require(keep >= 1, "truncated_dct_coefficients: keep must be >= 1");
    const int n = static_cast<int>(x.size());
    const int m = std::min(keep, n);
    std::vector<double> y(m, 0.0);
    for (int k = 0; k < m; ++k) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += x[j] * std::cos(kPi * (j + 0.5) * k / n);
        y[k] = 2.0 * acc;
    }
    return y;
}

TruncatedDct::TruncatedDct(int n, int keep) : n_(n), keep_(std::min(keep, n)) {
    require(n >= 2, "TruncatedDct: need n >= 2");
    require(keep >= 1, "TruncatedDct: keep must be >= 1");
    table_.resize(static_cast<std::size_t>(keep_) * n_);
    for (int k = 0; k < keep_; ++k)
        for (int j = 0; j < n_; ++j)
            table_[static_cast<std::size_t>(k) * n_ + j] = std::cos(kPi * (j + 0.5) * k / n_);
}

std::vector<double> TruncatedDct::forward(const std::vector<double>& x) const {
    require(static_cast<int>(x.size()) == n_, "TruncatedDct::forward: length mismatch");
    std::vector<double> y(keep_, 0.0);
    for (int k = 0; k < keep_; ++k) {
        const double* row = table_.data() + static_cast<std::size_t>(k) * n_;
        double acc = 0.0;
        for (int j = 0; j < n_; ++j) acc += x[j] * row[j];
        y[k] = 2.0 * acc;
    }
    return y;
}

std::vector<double> TruncatedDct::inverse(const std::vector<double>& coefficients) const {
    require(static_cast<int>(coefficients.size()) == keep_,
            "TruncatedDct::inverse: length mismatch");
    const double inv_n2 = 1.0 / (2.0 * n_);
    std::vector<double> x(n_, 0.0);
    for (int k = 0; k < n_; ++k) x[k] = coefficients[0];
    for (int j = 1; j < keep_; ++j) {
        const double* row = table_.data() + static_cast<std::size_t>(j) * n_;
        const double c = 2.0 * coefficients[j];
        // Type-III basis cos(pi j (k + 1/2) / n) is the transpose of the
        // type-II table, row j, entry k.
        for (int k = 0; k < n_; ++k) x[k] += c * row[k];
    }
    for (int k = 0; k < n_; ++k) x[k] *= inv_n2;
    return x;
}

}  // namespace cvk
