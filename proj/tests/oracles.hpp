// Independent reference computations for the tests: explicit Kronecker
// products and exact propagators from Hermitian eigendecomposition.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <complex>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Mat lowering(int d) {
    Mat a = Mat::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// Product of factors[k] (identity where factors[k] is empty) over local dims.
inline Mat product(const std::vector<int>& dims, const std::vector<Mat>& factors) {
    Mat out = Mat::Identity(1, 1);
    for (std::size_t k = 0; k < dims.size(); ++k) {
        out = kron(out, factors[k].size() ? factors[k] : Mat(Mat::Identity(dims[k], dims[k])));
    }
    return out;
}

inline Mat single(const std::vector<int>& dims, std::size_t k, const Mat& local) {
    std::vector<Mat> f(dims.size());
    f[k] = local;
    return product(dims, f);
}

// exp(-i H t) for Hermitian H.
inline Mat propagator(const Mat& h, double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Vec phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace oracle
