#pragma once

#include <utility>
#include <vector>

namespace cvk {

/// Cosine-series representation of a real signal of n samples spanning [0, t_f].
/// Forward transform (type-II, unnormalized, doubled):
///   Y_k = 2 * sum_{j=0}^{n-1} x_j cos(pi (j + 1/2) k / n),   k = 0..n-1.
/// The inverse divides the type-III sum by the logical size N = 2n:
///   x_k = (Y_0 + 2 * sum_{j=1}^{n-1} Y_j cos(pi j (k + 1/2) / n)) / N,
/// so coefficient j corresponds to the cosine component
///   amplitude_j * cos(omega_j t + phi_j),
/// with omega_j = pi j / t_f, phi_j = pi j / (2n), amplitude_j = (j == 0 ? 1 : 2) |Y_j| / N.
class Spectrum {
  public:
    Spectrum(std::vector<double> coefficients, double t_f);

    int size() const { return static_cast<int>(coefficients_.size()); }
    int logical_size() const { return 2 * size(); }
    double t_f() const { return t_f_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    std::vector<double>& coefficients() { return coefficients_; }

    double frequency(int j) const;
    double phase(int j) const;
    double amplitude(int j) const;

  private:
    std::vector<double> coefficients_;
    double t_f_;
};

/// Forward transform of x (n >= 2 samples spanning [0, t_f]).
Spectrum dct_forward(const std::vector<double>& x, double t_f);

/// Inverse transform; exact round trip with dct_forward up to rounding.
/// Coefficients that are exactly zero are skipped, so the cost is
/// O(n * nnz).
std::vector<double> dct_inverse(const Spectrum& spectrum);

/// Zeroes every coefficient with index >= keep (keep >= 1).
Spectrum low_pass(Spectrum spectrum, int keep);

/// (omega_j, amplitude_j) pairs for all coefficients.
std::vector<std::pair<double, double>> amplitude_report(const Spectrum& spectrum);

/// First `keep` forward coefficients only, O(n * keep); matches the leading
/// coefficients of dct_forward exactly (same summation order).
std::vector<double> truncated_dct_coefficients(const std::vector<double>& x, int keep);

/// Precomputed-cosine-table version of the truncate-and-reconstruct round
/// trip used inside iterative optimization; algebraically identical to
/// dct_inverse(low_pass(dct_forward(x, t_f), keep)).
class TruncatedDct {
  public:
    TruncatedDct(int n, int keep);

    int n() const { return n_; }
    int keep() const { return keep_; }

    /// First `keep` forward coefficients of x.
    std::vector<double> forward(const std::vector<double>& x) const;
    /// Reconstruction from the leading coefficients (length n output).
    std::vector<double> inverse(const std::vector<double>& coefficients) const;

  private:
    int n_, keep_;
    std::vector<double> table_;  // keep rows of n cosines, row-major
};

}  // namespace cvk
