#include "cwtrack/opmat.hpp"

#include <cmath>
#include <stdexcept>

namespace cwt {

namespace {
constexpr double kPi = 3.14159265358979323846;
double curly_p(int m) { return m == 0 ? 1.0 : std::sqrt(2.0); }
} // namespace

MatrixXd integration_matrix(const WaveletBasis& basis) {
    const int M = basis.M();
    const double r2 = std::sqrt(2.0);

    MatrixXd L = MatrixXd::Zero(M, M);
    L(0, 0) = 1.0;
    L(0, 1) = 1.0 / r2;
    L(1, 0) = -r2 / 4.0;
    if (M > 2) L(1, 2) = 0.25;
    for (int m = 2; m < M; ++m) {
        L(m, 0) = ((m % 2 == 1) ? 1.0 : -1.0) * r2 / (m * m - 1.0);
        L(m, m - 1) = -1.0 / (2.0 * (m - 1.0));
        if (m + 1 < M) L(m, m + 1) = 1.0 / (2.0 * (m + 1.0)); // T_M term dropped on the last row
    }

    MatrixXd E = MatrixXd::Zero(M, M);
    E(0, 0) = 2.0;
    for (int m = 2; m < M; ++m)
        E(m, 0) = -(1.0 + ((m % 2 == 0) ? 1.0 : -1.0)) * r2 / (m * m - 1.0);

    const int nsub = basis.subintervals();
    const double scale = 1.0 / std::pow(2.0, basis.k());
    MatrixXd P = MatrixXd::Zero(basis.dim(), basis.dim());
    for (int n = 0; n < nsub; ++n) {
        P.block(n * M, n * M, M, M) = scale * L;
        for (int n2 = n + 1; n2 < nsub; ++n2) P.block(n * M, n2 * M, M, M) = scale * E;
    }
    return P;
}

MatrixXd gram_matrix(const WaveletBasis& basis) {
    const int M = basis.M();
    MatrixXd C1 = MatrixXd::Zero(M, M);
    for (int i = 1; i <= M; ++i) {
        for (int j = 1; j <= M; ++j) {
            if ((i + j) % 2 != 0) continue;
            double l;
            if (i == 1 && j == 1)
                l = 1.0;
            else if (i == 1 || j == 1)
                l = std::sqrt(2.0);
            else
                l = 2.0;
            double num = 1.0 - (i - 1.0) * (i - 1.0) - (j - 1.0) * (j - 1.0);
            double den = ((i + j - 2.0) * (i + j - 2.0) - 1.0) * ((i - j) * (i - j) - 1.0);
            C1(i - 1, j - 1) = l * num / den;
        }
    }
    MatrixXd C = MatrixXd::Zero(basis.dim(), basis.dim());
    for (int n = 0; n < basis.subintervals(); ++n)
        C.block(n * M, n * M, M, M) = (2.0 / kPi) * C1;
    return C;
}

namespace {

struct KernelEntry {
    int a, b, c;
    double w;
};

// psi_a psi_b = sqrt(2^k/pi) * sum_c kernel(a,b,c) psi_c on a shared
// subinterval, with the a+b term dropped once it leaves the basis.
// kernel(a,b,c) = (p_a p_b / 2) (delta_{c,a+b}/p_{a+b} + delta_{c,|a-b|}/p_{|a-b|}).
std::vector<KernelEntry> product_kernel(int M) {
    std::vector<KernelEntry> k;
    for (int a = 0; a < M; ++a) {
        for (int b = 0; b < M; ++b) {
            double w = curly_p(a) * curly_p(b) / 2.0;
            int cs = a + b;
            if (cs <= M - 1) k.push_back({a, b, cs, w / curly_p(cs)});
            int cd = std::abs(a - b);
            k.push_back({a, b, cd, w / curly_p(cd)});
        }
    }
    return k;
}

} // namespace

MatrixXd product_matrix(const WaveletBasis& basis, const CoeffVector& f) {
    if (f.channels() != 1)
        throw std::invalid_argument("product_matrix: coefficient vector must have one channel");
    std::vector<MatrixXd> blocks(basis.dim());
    for (int j = 0; j < basis.dim(); ++j) {
        blocks[j] = MatrixXd::Constant(1, 1, f.data()[j]);
    }
    return block_product_matrix(basis, blocks);
}

MatrixXd block_product_matrix(const WaveletBasis& basis, const std::vector<MatrixXd>& blocks) {
    if (static_cast<int>(blocks.size()) != basis.dim())
        throw std::invalid_argument("block_product_matrix: need one block per wavelet index");
    const int p = static_cast<int>(blocks[0].rows());
    const int q = static_cast<int>(blocks[0].cols());
    for (const auto& blk : blocks)
        if (blk.rows() != p || blk.cols() != q)
            throw std::invalid_argument("block_product_matrix: inconsistent block shapes");

    const int M = basis.M();
    const auto kernel = product_kernel(M);
    MatrixXd out = MatrixXd::Zero(basis.dim() * p, basis.dim() * q);
    for (int n = 0; n < basis.subintervals(); ++n) {
        for (const auto& t : kernel) {
            // Ftilde[(n,c), (n,b)] += kernel(a,b,c) * F_{na}
            out.block((n * M + t.c) * p, (n * M + t.b) * q, p, q) +=
                basis.amplitude() * t.w * blocks[n * M + t.a];
        }
    }
    return out;
}

MatrixXd delay_matrix(const WaveletBasis& basis, int n_v) {
    if (n_v < 0 || n_v > basis.subintervals())
        throw std::invalid_argument("delay_matrix: shift outside [0, 2^(k-1)]");
    const int M = basis.M();
    MatrixXd D = MatrixXd::Zero(basis.dim(), basis.dim());
    for (int n = 0; n < basis.subintervals() - n_v; ++n)
        for (int m = 0; m < M; ++m) D(n * M + m, (n + n_v) * M + m) = 1.0;
    return D;
}

MatrixXd endpoint_outer(const WaveletBasis& basis) {
    VectorXd v = basis.eval_vector(1.0);
    return v * v.transpose();
}

MatrixXd kron_lift(const MatrixXd& m, int dim) {
    MatrixXd out = MatrixXd::Zero(m.rows() * dim, m.cols() * dim);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            if (m(i, j) == 0.0) continue;
            for (int d = 0; d < dim; ++d) out(i * dim + d, j * dim + d) = m(i, j);
        }
    return out;
}

MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
    MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CoeffVector constant_expansion(const WaveletBasis& basis, const VectorXd& value) {
    CoeffVector out(basis, static_cast<int>(value.size()));
    const double amp = std::sqrt(kPi / std::pow(2.0, basis.k()));
    for (int n = 1; n <= basis.subintervals(); ++n)
        for (int c = 0; c < value.size(); ++c) out.at(n, 0, c) = amp * value[c];
    return out;
}

} // namespace cwt
