#pragma once

#include "cwtrack/basis.hpp"

namespace cwt {

/// Operational matrix of integration P: int_0^t Psi(e) de ~= P Psi(t).
/// Block upper-triangular, diagonal blocks L/2^k, off-diagonal E/2^k.
MatrixXd integration_matrix(const WaveletBasis& basis);

/// Gram matrix C = int_0^1 Psi Psi^T dt, (2/pi) blkdiag of identical M x M
/// blocks.  Closed form, no quadrature.
MatrixXd gram_matrix(const WaveletBasis& basis);

/// Product operational matrix: f Psi(t) Psi^T(t) ~= Psi^T(t) ftilde for a
/// scalar coefficient vector f.
MatrixXd product_matrix(const WaveletBasis& basis, const CoeffVector& f);

/// Block generalization: substitutes the p x q block F_{nm} wherever the
/// scalar template uses f_{nm}, so that
///   F(tau) (Psi^T x I_q) ~= (Psi^T x I_p) Ftilde
/// for F(tau) = sum F_{nm} psi_{nm}(tau).  All blocks must share one shape.
MatrixXd block_product_matrix(const WaveletBasis& basis, const std::vector<MatrixXd>& blocks);

/// Delay matrix D_v: Psi(t - h_v) = D_v Psi(t) for t >= h_v = n_v / 2^(k-1).
MatrixXd delay_matrix(const WaveletBasis& basis, int n_v);

/// Rank-one endpoint matrix Psi(1) Psi^T(1).
MatrixXd endpoint_outer(const WaveletBasis& basis);

/// O (x) I_dim.
MatrixXd kron_lift(const MatrixXd& m, int dim);

/// kron(A, B) for general dense blocks.
MatrixXd kron(const MatrixXd& a, const MatrixXd& b);

/// Wavelet coefficients of a constant vector: sqrt(pi/2^k) at every (n, 0).
CoeffVector constant_expansion(const WaveletBasis& basis, const VectorXd& value);

} // namespace cwt
