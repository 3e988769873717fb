#pragma once

#include <vector>

#include "kpplab/common.hpp"

namespace kpplab {

/// Thomas algorithm for a*x_{i-1} + b*x_i + c*x_{i+1} = d_i, i = 0..n-1.
/// No pivoting; the systems solved here (I - dt/2 Dxx, resolvent shifts off
/// the spectrum) are diagonally dominant or uniformly invertible.
template <class T>
std::vector<T> solve_tridiagonal(const std::vector<T>& sub,
                                 const std::vector<T>& diag,
                                 const std::vector<T>& sup,
                                 const std::vector<T>& rhs) {
    const std::size_t n = diag.size();
    std::vector<T> cp(n), dp(n), x(n);
    cp[0] = sup[0] / diag[0];
    dp[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        T m = diag[i] - sub[i] * cp[i - 1];
        cp[i] = sup[i] / m;
        dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / m;
    }
    x[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
    return x;
}

/// Prefactored real tridiagonal solver for repeated right-hand sides.
class TridiagonalLU {
public:
    TridiagonalLU() = default;
    TridiagonalLU(std::vector<double> sub, const std::vector<double>& diag,
                  std::vector<double> sup)
        : sub_(std::move(sub)), sup_(std::move(sup)) {
        const std::size_t n = diag.size();
        inv_piv_.resize(n);
        double piv = diag[0];
        inv_piv_[0] = 1.0 / piv;
        for (std::size_t i = 1; i < n; ++i) {
            piv = diag[i] - sub_[i] * sup_[i - 1] * inv_piv_[i - 1];
            inv_piv_[i] = 1.0 / piv;
        }
    }

    void solve_inplace(std::vector<double>& d) const {
        const std::size_t n = inv_piv_.size();
        for (std::size_t i = 1; i < n; ++i)
            d[i] -= sub_[i] * d[i - 1] * inv_piv_[i - 1];
        d[n - 1] *= inv_piv_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;)
            d[i] = (d[i] - sup_[i] * d[i + 1]) * inv_piv_[i];
    }

    bool empty() const { return inv_piv_.empty(); }

private:
    std::vector<double> sub_, sup_, inv_piv_;
};

} // namespace kpplab
