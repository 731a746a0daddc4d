#include "cwtrack/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cwt {

namespace {
constexpr double kPi = 3.14159265358979323846;

double curly_p(int m) { return m == 0 ? 1.0 : std::sqrt(2.0); }
} // namespace

WaveletBasis::WaveletBasis(int k, int M) : k_(k), M_(M) {
    if (k < 2) throw std::invalid_argument("WaveletBasis: k must be >= 2");
    if (M < 3) throw std::invalid_argument("WaveletBasis: M must be >= 3");
    if (k > 16) throw std::invalid_argument("WaveletBasis: k > 16 not supported");
    nsub_ = 1 << (k - 1);
    amp_ = std::sqrt(std::pow(2.0, k) / kPi);
}

int WaveletBasis::subinterval_of(double t) const {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("subinterval_of: t outside [0,1]");
    if (t == 0.0) return 1;
    int n = static_cast<int>(std::ceil(t * nsub_));
    return std::min(std::max(n, 1), nsub_);
}

void chebyshev_t_all(int mmax, double x, double* out) {
    out[0] = 1.0;
    if (mmax >= 1) out[1] = x;
    for (int m = 2; m <= mmax; ++m) out[m] = 2.0 * x * out[m - 1] - out[m - 2];
}

double WaveletBasis::eval_psi_unclamped(int n, int m, double t) const {
    if (n < 1 || n > nsub_ || m < 0 || m >= M_)
        throw std::invalid_argument("eval_psi: index out of range");
    double x = std::pow(2.0, k_) * t - 2.0 * n + 1.0;
    double tm2 = 1.0, tm1 = x, tm = (m == 0) ? 1.0 : x;
    for (int j = 2; j <= m; ++j) {
        tm = 2.0 * x * tm1 - tm2;
        tm2 = tm1;
        tm1 = tm;
    }
    return amp_ * curly_p(m) * tm;
}

double WaveletBasis::eval_psi(int n, int m, double t) const {
    if (n < 1 || n > nsub_ || m < 0 || m >= M_)
        throw std::invalid_argument("eval_psi: index out of range");
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("eval_psi: t outside [0,1]");
    if (subinterval_of(t) != n) return 0.0;
    return eval_psi_unclamped(n, m, t);
}

VectorXd WaveletBasis::eval_vector(double t) const {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("eval_vector: t outside [0,1]");
    VectorXd v = VectorXd::Zero(dim());
    int n = subinterval_of(t);
    double x = std::pow(2.0, k_) * t - 2.0 * n + 1.0;
    std::vector<double> tms(M_);
    chebyshev_t_all(M_ - 1, x, tms.data());
    for (int m = 0; m < M_; ++m) v[index(n, m)] = amp_ * curly_p(m) * tms[m];
    return v;
}

QuadratureRule gauss_legendre(int npts, double a, double b) {
    // Nodes of P_n by Newton from the Chebyshev initial guess.
    QuadratureRule rule;
    rule.nodes.resize(npts);
    rule.weights.resize(npts);
    for (int i = 0; i < npts; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (npts + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= npts; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = npts * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = a + 0.5 * (b - a) * (1.0 - x);
        rule.weights[i] = (b - a) / ((1.0 - x * x) * pp * pp);
    }
    return rule;
}

VectorXd expand_scalar(const WaveletBasis& basis, const std::function<double(double)>& f,
                       const ExpandOptions& opts) {
    const int M = basis.M();
    const int k = basis.k();
    const double pk = std::pow(2.0, k);
    VectorXd out = VectorXd::Zero(basis.dim());

    std::vector<int> blocks = opts.blocks;
    if (blocks.empty())
        for (int n = 1; n <= basis.subintervals(); ++n) blocks.push_back(n);

    const QuadratureRule base = gauss_legendre(4 * M, 0.0, kPi);
    for (int n : blocks) {
        if (n < 1 || n > basis.subintervals())
            throw std::invalid_argument("expand_scalar: block index out of range");
        // theta-panels, split where a breakpoint of f falls inside this subinterval
        std::vector<double> cuts{0.0, kPi};
        for (double tb : opts.breakpoints) {
            double x = pk * tb - 2.0 * n + 1.0;
            if (x > -1.0 + 1e-14 && x < 1.0 - 1e-14) cuts.push_back(std::acos(x));
        }
        std::sort(cuts.begin(), cuts.end());

        std::vector<double> theta, weight;
        for (size_t c = 0; c + 1 < cuts.size(); ++c) {
            if (cuts[c + 1] - cuts[c] < 1e-14) continue;
            if (cuts.size() == 2) {
                for (int i = 0; i < base.nodes.size(); ++i) {
                    theta.push_back(base.nodes[i]);
                    weight.push_back(base.weights[i]);
                }
            } else {
                QuadratureRule panel = gauss_legendre(4 * M, cuts[c], cuts[c + 1]);
                for (int i = 0; i < panel.nodes.size(); ++i) {
                    theta.push_back(panel.nodes[i]);
                    weight.push_back(panel.weights[i]);
                }
            }
        }

        std::vector<double> fv(theta.size());
        for (size_t i = 0; i < theta.size(); ++i) {
            double targ = (std::cos(theta[i]) + 2.0 * n - 1.0) / pk;
            fv[i] = f(targ);
            if (!std::isfinite(fv[i]))
                throw std::runtime_error("expand_scalar: non-finite function value at t = " +
                                         std::to_string(targ));
        }
        for (int m = 0; m < M; ++m) {
            double acc = 0.0;
            for (size_t i = 0; i < theta.size(); ++i)
                acc += weight[i] * fv[i] * std::cos(m * theta[i]);
            out[basis.index(n, m)] = curly_p(m) / std::sqrt(pk * kPi) * acc;
        }
    }
    return out;
}

CoeffVector::CoeffVector(const WaveletBasis& basis, int channels)
    : basis_(basis), channels_(channels), data_(VectorXd::Zero(basis.dim() * channels)) {
    if (channels < 1) throw std::invalid_argument("CoeffVector: channels must be >= 1");
}

CoeffVector::CoeffVector(const WaveletBasis& basis, int channels, VectorXd data)
    : basis_(basis), channels_(channels), data_(std::move(data)) {
    if (channels < 1) throw std::invalid_argument("CoeffVector: channels must be >= 1");
    if (data_.size() != basis.dim() * channels)
        throw std::invalid_argument("CoeffVector: data length != channels * s");
}

double& CoeffVector::at(int n, int m, int channel) {
    return data_[basis_.index(n, m) * channels_ + channel];
}

double CoeffVector::at(int n, int m, int channel) const {
    return data_[basis_.index(n, m) * channels_ + channel];
}

VectorXd CoeffVector::reconstruct(double t) const {
    int n = basis_.subinterval_of(t);
    double x = std::pow(2.0, basis_.k()) * t - 2.0 * n + 1.0;
    std::vector<double> tms(basis_.M());
    chebyshev_t_all(basis_.M() - 1, x, tms.data());
    VectorXd val = VectorXd::Zero(channels_);
    for (int m = 0; m < basis_.M(); ++m) {
        double psi = basis_.amplitude() * curly_p(m) * tms[m];
        for (int c = 0; c < channels_; ++c) val[c] += at(n, m, c) * psi;
    }
    return val;
}

CoeffVector expand_vector(const WaveletBasis& basis,
                          const std::vector<std::function<double(double)>>& channels,
                          const ExpandOptions& opts) {
    CoeffVector out(basis, static_cast<int>(channels.size()));
    for (size_t c = 0; c < channels.size(); ++c) {
        VectorXd coef = expand_scalar(basis, channels[c], opts);
        for (int j = 0; j < basis.dim(); ++j)
            out.data()[j * channels.size() + c] = coef[j];
    }
    return out;
}

PiecewisePoly::PiecewisePoly(int channels, double t_f, std::vector<double> breaks,
                             std::vector<MatrixXd> coeffs)
    : channels_(channels), t_f_(t_f), breaks_(std::move(breaks)), coeffs_(std::move(coeffs)) {
    if (breaks_.size() != coeffs_.size() + 1)
        throw std::invalid_argument("PiecewisePoly: breaks/coeffs size mismatch");
}

VectorXd PiecewisePoly::eval(double t) const {
    // closed-right: piece i covers (breaks[i], breaks[i+1]]
    int i = 0;
    while (i < pieces() - 1 && t > breaks_[i + 1]) ++i;
    const MatrixXd& c = coeffs_[i];
    VectorXd val = VectorXd::Zero(channels_);
    for (int d = static_cast<int>(c.cols()) - 1; d >= 0; --d)
        val = val * t + c.col(d);
    return val;
}

PiecewisePoly to_piecewise_poly(const CoeffVector& coeffs, double t_f) {
    const WaveletBasis& b = coeffs.basis();
    const int M = b.M();
    const int q = coeffs.channels();

    // Monomial coefficients of T_m(x), ascending.
    std::vector<std::vector<double>> tpoly(M);
    tpoly[0] = {1.0};
    if (M > 1) tpoly[1] = {0.0, 1.0};
    for (int m = 2; m < M; ++m) {
        tpoly[m].assign(m + 1, 0.0);
        for (int d = 0; d <= m - 1; ++d) tpoly[m][d + 1] += 2.0 * tpoly[m - 1][d];
        for (int d = 0; d <= m - 2; ++d) tpoly[m][d] -= tpoly[m - 2][d];
    }

    std::vector<double> breaks(b.subintervals() + 1);
    for (int n = 0; n <= b.subintervals(); ++n)
        breaks[n] = t_f * n / b.subintervals();

    std::vector<MatrixXd> pieces;
    const double pk = std::pow(2.0, b.k());
    for (int n = 1; n <= b.subintervals(); ++n) {
        MatrixXd c = MatrixXd::Zero(q, M);
        // x = (2^k / t_f) t - (2n - 1): expand T_m(a t + b)
        const double a = pk / t_f;
        const double bb = -(2.0 * n - 1.0);
        for (int m = 0; m < M; ++m) {
            // (a t + b)^d accumulated via repeated multiplication
            std::vector<double> pw{1.0};
            std::vector<double> full(M, 0.0);
            for (int d = 0; d <= m; ++d) {
                for (size_t j = 0; j < pw.size(); ++j) full[j] += tpoly[m][d] * pw[j];
                if (d < m) {
                    std::vector<double> nxt(pw.size() + 1, 0.0);
                    for (size_t j = 0; j < pw.size(); ++j) {
                        nxt[j] += bb * pw[j];
                        nxt[j + 1] += a * pw[j];
                    }
                    pw = std::move(nxt);
                }
            }
            for (int ch = 0; ch < q; ++ch) {
                double w = b.amplitude() * curly_p(m) * coeffs.at(n, m, ch);
                for (int d = 0; d < M; ++d) c(ch, d) += w * full[d];
            }
        }
        pieces.push_back(std::move(c));
    }
    return PiecewisePoly(q, t_f, std::move(breaks), std::move(pieces));
}

VectorXd theorem1_coefficient_bounds(const WaveletBasis& basis, double rho0, double rho1,
                                     double rho) {
    if (rho0 < 0 || rho1 < 0 || rho < 0)
        throw std::invalid_argument("theorem1_coefficient_bounds: negative sup-norm");
    const double k = basis.k();
    VectorXd out(basis.dim());
    const double b0 = std::sqrt(kPi / std::pow(2.0, k)) * rho0;
    const double b1 = std::sqrt(kPi / std::pow(2.0, 3 * k - 1)) * rho1;
    const double bm = std::sqrt(kPi / std::pow(2.0, 5 * k - 1)) * rho;
    for (int n = 1; n <= basis.subintervals(); ++n)
        for (int m = 0; m < basis.M(); ++m)
            out[basis.index(n, m)] = (m == 0) ? b0 : (m == 1 ? b1 : bm / (m * m - 1.0));
    return out;
}

} // namespace cwt
