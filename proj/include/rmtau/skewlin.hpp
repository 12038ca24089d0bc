#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmtau {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using cplx = std::complex<double>;

struct SizingError : std::out_of_range {
    int required;
    SizingError(const std::string& what, int req) : std::out_of_range(what), required(req) {}
};

// A skew, a border; row/column 0 corresponds to absolute mode index `base`
struct SkewPair {
    CMatrix A;
    CVector a;
    int base = 0;
    int offset_hint = 0;
    std::string provenance;

    int size() const { return static_cast<int>(A.rows()); }
    bool contains(int idx) const { return idx >= base && idx < base + size(); }
};

namespace detail {

inline void check_skew(const CMatrix& M)
{
    if (M.rows() != M.cols()) throw std::invalid_argument("pfaffian: matrix not square");
    if (M.size() == 0) return;
    double nrm = M.cwiseAbs().maxCoeff();
    double asym = (M + M.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * nrm) throw std::invalid_argument("pfaffian: matrix is not skew-symmetric");
}

} // namespace detail

// Parlett-Reid style skew elimination with pivoting
inline std::complex<double> pfaffian(const CMatrix& M)
{
    detail::check_skew(M);
    const Eigen::Index n = M.rows();
    if (n % 2) throw std::invalid_argument("pfaffian undefined for odd order");
    if (n == 0) return 1.0;
    CMatrix A = M;
    std::complex<double> pf = 1.0;
    for (Eigen::Index k = 0; k + 1 < n; k += 2) {
        Eigen::Index kp = k + 1;
        double best = std::abs(A(k + 1, k));
        for (Eigen::Index i = k + 2; i < n; ++i)
            if (std::abs(A(i, k)) > best) best = std::abs(A(i, k)), kp = i;
        if (kp != k + 1) {
            A.row(k + 1).swap(A.row(kp));
            A.col(k + 1).swap(A.col(kp));
            pf = -pf;
        }
        if (A(k + 1, k) == 0.0) return 0.0;
        pf *= A(k, k + 1);
        if (k + 2 < n) {
            const Eigen::Index r = n - k - 2;
            CVector tau = A.row(k).tail(r).transpose() / A(k, k + 1);
            CVector col = A.col(k + 1).tail(r);
            A.bottomRightCorner(r, r) += tau * col.transpose() - col * tau.transpose();
        }
    }
    return pf;
}

namespace detail {
inline std::complex<double> pf_expand(const CMatrix& M, std::vector<int>& idx)
{
    if (idx.empty()) return 1.0;
    int first = idx[0];
    std::complex<double> acc = 0.0;
    for (std::size_t j = 1; j < idx.size(); ++j) {
        int second = idx[j];
        std::vector<int> rest;
        for (std::size_t k = 1; k < idx.size(); ++k)
            if (k != j) rest.push_back(idx[k]);
        double sign = (j % 2 == 1) ? 1.0 : -1.0;
        acc += sign * M(first, second) * pf_expand(M, rest);
    }
    return acc;
}
} // namespace detail

// signed sum over perfect matchings
inline std::complex<double> pfaffian_combinatorial(const CMatrix& M)
{
    if (M.rows() != M.cols()) throw std::invalid_argument("pfaffian: matrix not square");
    if (M.rows() % 2) throw std::invalid_argument("pfaffian undefined for odd order");
    if (M.rows() > 8) throw std::invalid_argument("pfaffian_combinatorial: dimension > 8");
    std::vector<int> idx(M.rows());
    for (int i = 0; i < M.rows(); ++i) idx[i] = i;
    return detail::pf_expand(M, idx);
}

// Pf of [A_{h_i+L, h_j+L}], bordered by a_{h_i+L} in the last column when N is odd
inline std::complex<double> abar(const std::vector<int>& h, int L, const SkewPair& pair)
{
    const int N = static_cast<int>(h.size());
    if (N == 0) return 1.0;
    for (int i = 0; i + 1 < N; ++i)
        if (h[i] <= h[i + 1]) throw std::invalid_argument("abar: h must be strictly decreasing");
    int lo = h.back() + L, hi = h.front() + L;
    if (!pair.contains(lo) || !pair.contains(hi)) {
        int need = hi - pair.base + 1;
        throw SizingError("abar: moment table too small, need indices " + std::to_string(lo) + ".." +
                              std::to_string(hi) + " (size " + std::to_string(need) + " from base " +
                              std::to_string(pair.base) + ")",
                          need);
    }
    auto at = [&](int i) { return h[i] + L - pair.base; };
    if (N == 1) return pair.a(at(0));
    if (N == 2) return pair.A(at(0), at(1));
    const int n = N % 2 ? N + 1 : N;
    CMatrix M = CMatrix::Zero(n, n);
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            M(i, j) = pair.A(at(i), at(j));
            M(j, i) = -M(i, j);
        }
    if (N % 2)
        for (int i = 0; i < N; ++i) {
            M(i, N) = pair.a(at(i));
            M(N, i) = -M(i, N);
        }
    return pfaffian(M);
}

} // namespace rmtau
