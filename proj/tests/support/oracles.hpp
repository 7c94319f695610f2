#ifndef POLITELENS_TESTS_ORACLES_HPP
#define POLITELENS_TESTS_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "politelens/common.hpp"

namespace testutil {

// Independent eigensolver oracle: cyclic Jacobi rotations on a symmetric
// matrix. Used to cross-check the power-iteration PCA.
struct JacobiResult {
    std::vector<double> eigenvalues;
    politelens::Matrix<double> vectors;  // columns are eigenvectors
};

inline JacobiResult jacobi_eig(politelens::Matrix<double> a) {
    const std::size_t n = a.rows();
    politelens::Matrix<double> v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    JacobiResult r;
    r.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.eigenvalues[i] = a(i, i);
    r.vectors = std::move(v);
    return r;
}

}  // namespace testutil

#endif  // POLITELENS_TESTS_ORACLES_HPP
