#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace cwt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// First-kind Chebyshev wavelet basis on [0,1].
///
/// Resolution pair (k, M): 2^(k-1) dyadic subintervals, Chebyshev order
/// 0..M-1 on each.  Subinterval n (1-based) covers
/// [(n-1)/2^(k-1), n/2^(k-1)]; interfaces belong to the left subinterval
/// (closed-right convention).
class WaveletBasis {
public:
    WaveletBasis(int k, int M);

    int k() const { return k_; }
    int M() const { return M_; }
    int subintervals() const { return nsub_; }
    int dim() const { return nsub_ * M_; }               // s = 2^(k-1) M
    double subinterval_width() const { return 1.0 / nsub_; }
    double amplitude() const { return amp_; }            // sqrt(2^k / pi)

    /// 1-based subinterval owning t (closed-right; t=0 belongs to 1).
    int subinterval_of(double t) const;

    /// Flat wavelet index of (n, m); n is 1-based, m in [0, M).
    int index(int n, int m) const { return (n - 1) * M_ + m; }

    /// psi_{nm}(t); zero outside subinterval n.
    double eval_psi(int n, int m, double t) const;

    /// Chebyshev-form evaluation without the support check.  Used for
    /// one-sided limits at interfaces (e.g. subinterval n+1 from the right).
    double eval_psi_unclamped(int n, int m, double t) const;

    /// Psi(t): dense length-s vector; at most M entries are nonzero.
    VectorXd eval_vector(double t) const;

private:
    int k_, M_, nsub_;
    double amp_;
};

/// T_0..T_{mmax}(x) by the three-term recurrence.
void chebyshev_t_all(int mmax, double x, double* out);

/// Gauss-Legendre rule on [a, b].
struct QuadratureRule {
    VectorXd nodes;
    VectorXd weights;
};
QuadratureRule gauss_legendre(int npts, double a, double b);

struct ExpandOptions {
    /// 1-based subintervals to fill; empty = all.  Blocks outside stay zero.
    std::vector<int> blocks;
    /// Breakpoints of f (in f's own argument); quadrature panels split there.
    std::vector<double> breakpoints;
};

/// Coefficients f_{nm} of f on [0,1] by the Chebyshev-weighted integral,
/// evaluated with Gauss-Legendre (4M nodes per subinterval, split at any
/// breakpoint falling inside).  Throws on a non-finite sample.
VectorXd expand_scalar(const WaveletBasis& basis, const std::function<double(double)>& f,
                       const ExpandOptions& opts = {});

/// Wavelet coefficients of a vector function with `channels` components,
/// interleaved so the components of each (n,m) are contiguous.
class CoeffVector {
public:
    CoeffVector(const WaveletBasis& basis, int channels);
    CoeffVector(const WaveletBasis& basis, int channels, VectorXd data);

    const WaveletBasis& basis() const { return basis_; }
    int channels() const { return channels_; }
    VectorXd& data() { return data_; }
    const VectorXd& data() const { return data_; }

    double& at(int n, int m, int channel);
    double at(int n, int m, int channel) const;

    /// Channel values at t; uses only the subinterval containing t.
    VectorXd reconstruct(double t) const;

private:
    WaveletBasis basis_;
    int channels_;
    VectorXd data_;
};

CoeffVector expand_vector(const WaveletBasis& basis,
                          const std::vector<std::function<double(double)>>& channels,
                          const ExpandOptions& opts = {});

/// Per-subinterval monomial form of a CoeffVector, in unscaled time after
/// multiplying the argument through by t_f.  Pure change of basis.
class PiecewisePoly {
public:
    PiecewisePoly(int channels, double t_f, std::vector<double> breaks,
                  std::vector<MatrixXd> coeffs);

    int channels() const { return channels_; }
    int pieces() const { return static_cast<int>(coeffs_.size()); }
    double t_f() const { return t_f_; }
    const std::vector<double>& breaks() const { return breaks_; }
    /// Monomial coefficients (ascending degree) of piece i, channels x M.
    const MatrixXd& piece(int i) const { return coeffs_[i]; }

    VectorXd eval(double t) const;

private:
    int channels_;
    double t_f_;
    std::vector<double> breaks_;     // pieces() + 1 ascending knots
    std::vector<MatrixXd> coeffs_;
};

PiecewisePoly to_piecewise_poly(const CoeffVector& coeffs, double t_f = 1.0);

/// Theorem-1 magnitude bounds per (n, m) given sup-norms of f, f', f''.
/// |f_n0| <= sqrt(pi/2^k) rho0, |f_n1| <= sqrt(pi/2^(3k-1)) rho1,
/// |f_nm| <= sqrt(pi/2^(5k-1)) rho/(m^2-1) for m >= 2.
VectorXd theorem1_coefficient_bounds(const WaveletBasis& basis, double rho0, double rho1,
                                     double rho);

} // namespace cwt
