#include "gaplab/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gaplab/error.hpp"

namespace gaplab {

namespace {

// Factor-and-solve for a general tridiagonal system, LU with partial
// pivoting (adjacent-row swaps, one fill-in superdiagonal). dl/d/du are the
// sub/main/super diagonals; b is overwritten with the solution.
void pivoted_tridiag_solve(std::vector<double> dl, std::vector<double> d,
                           std::vector<double> du, std::vector<double>& b) {
    const std::size_t n = d.size();
    std::vector<double> du2(n, 0.0);
    std::vector<char> swapped(n, 0);
    dl.resize(n, 0.0);
    du.resize(n, 0.0);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            double piv = d[i];
            if (piv == 0.0) piv = 1e-300;
            double fact = dl[i] / piv;
            d[i + 1] -= fact * du[i];
            dl[i] = fact;
            du2[i] = 0.0;
        } else {
            double fact = d[i] / dl[i];
            d[i] = dl[i];
            double temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            du2[i] = du[i + 1];
            du[i + 1] = -fact * du2[i];
            du[i] = temp;
            dl[i] = fact;
            swapped[i] = 1;
        }
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!swapped[i]) {
            b[i + 1] -= dl[i] * b[i];
        } else {
            double temp = b[i];
            b[i] = b[i + 1];
            b[i + 1] = temp - dl[i] * b[i];
        }
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        if (ii + 1 < n) s -= du[ii] * b[ii + 1];
        if (ii + 2 < n) s -= du2[ii] * b[ii + 2];
        double piv = d[ii];
        if (piv == 0.0) piv = 1e-300;
        b[ii] = s / piv;
    }
}

// eigenvalue count below x for symmetric tridiagonal B = (d, e), Sturm sequence
std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
    const std::size_t n = d.size();
    std::size_t count = 0;
    double q = d[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < n; ++i) {
        double denom = q;
        if (std::abs(denom) < 1e-300) denom = (denom < 0.0) ? -1e-300 : 1e-300;
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if (q < 0.0) ++count;
    }
    return count;
}

}  // namespace

void TridiagonalSystem::validate() const {
    const std::size_t n = diag.size();
    if (n < 2) fail("invalid system", "need at least 2 rows");
    if (offdiag.size() != n - 1) fail("invalid system", "offdiag size mismatch");
    if (weight.size() != n) fail("invalid system", "weight size mismatch");
    for (double w : weight)
        if (!(w > 0.0)) fail("invalid system", "weights must be positive");
    for (double v : diag)
        if (!std::isfinite(v)) fail("invalid system", "non-finite diagonal");
    for (double v : offdiag)
        if (!std::isfinite(v)) fail("invalid system", "non-finite offdiagonal");
}

std::vector<TridiagEigenPair> eig_sym_tridiag(const TridiagonalSystem& sys, std::size_t count) {
    sys.validate();
    const std::size_t n = sys.size();
    if (count == 0 || count > n) fail("invalid system", "eigenpair count out of range");

    // symmetrized standard form B = W^{-1/2} A W^{-1/2}
    std::vector<double> d(n), e(n - 1);
    for (std::size_t i = 0; i < n; ++i) d[i] = sys.diag[i] / sys.weight[i];
    for (std::size_t i = 0; i + 1 < n; ++i)
        e[i] = sys.offdiag[i] / std::sqrt(sys.weight[i] * sys.weight[i + 1]);

    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(e[i - 1]);
        if (i + 1 < n) r += std::abs(e[i]);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    const double scale = std::max({std::abs(lo), std::abs(hi), 1e-30});

    double norm_a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = std::abs(sys.diag[i]);
        if (i > 0) r += std::abs(sys.offdiag[i - 1]);
        if (i + 1 < n) r += std::abs(sys.offdiag[i]);
        norm_a = std::max(norm_a, r);
    }

    std::vector<TridiagEigenPair> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        double a = lo - 1e-12 * scale, b = hi + 1e-12 * scale;
        for (int it = 0; it < 140 && (b - a) > 1e-15 * scale; ++it) {
            double mid = 0.5 * (a + b);
            if (sturm_count(d, e, mid) >= k + 1)
                b = mid;
            else
                a = mid;
        }
        double lambda = 0.5 * (a + b);

        // inverse iteration with a deterministic pseudo-random seed vector
        std::vector<double> x(n);
        unsigned long long s = 0x9e3779b97f4a7c15ull + k;
        for (std::size_t i = 0; i < n; ++i) {
            s = s * 6364136223846793005ull + 1442695040888963407ull;
            x[i] = 0.5 + static_cast<double>(s >> 11) * (1.0 / 9007199254740992.0);
        }
        std::vector<double> dl(n - 1), dd(n), du(n - 1);
        for (int it = 0; it < 8; ++it) {
            for (std::size_t i = 0; i < n; ++i) dd[i] = d[i] - lambda;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                dl[i] = e[i];
                du[i] = e[i];
            }
            pivoted_tridiag_solve(dl, dd, du, x);
            double nrm = 0.0;
            for (double v : x) nrm += v * v;
            nrm = std::sqrt(nrm);
            if (!(nrm > 0.0) || !std::isfinite(nrm))
                fail("eigensolver failure", "inverse iteration degenerated");
            for (double& v : x) v /= nrm;
            double res = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double bx = d[i] * x[i];
                if (i > 0) bx += e[i - 1] * x[i - 1];
                if (i + 1 < n) bx += e[i] * x[i + 1];
                res = std::max(res, std::abs(bx - lambda * x[i]));
            }
            if (res <= 1e-13 * scale && it >= 1) break;
        }

        // Rayleigh-quotient polish: the bisection floor is absolute in the
        // Gershgorin scale, the quotient restores full relative accuracy
        {
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double bx = d[i] * x[i];
                if (i > 0) bx += e[i - 1] * x[i - 1];
                if (i + 1 < n) bx += e[i] * x[i + 1];
                num += x[i] * bx;
                den += x[i] * x[i];
            }
            lambda = num / den;
        }

        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = x[i] / std::sqrt(sys.weight[i]);
        double wn = 0.0;
        for (std::size_t i = 0; i < n; ++i) wn += sys.weight[i] * v[i] * v[i];
        wn = std::sqrt(wn);
        std::size_t imax = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
        double sgn = (v[imax] >= 0.0) ? 1.0 : -1.0;
        for (double& vv : v) vv = vv * sgn / wn;

        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double av = sys.diag[i] * v[i];
            if (i > 0) av += sys.offdiag[i - 1] * v[i - 1];
            if (i + 1 < n) av += sys.offdiag[i] * v[i + 1];
            res = std::max(res, std::abs(av - lambda * sys.weight[i] * v[i]));
        }
        if (res > 1e-10 * std::max(norm_a, 1e-30))
            fail("eigensolver failure",
                 "residual " + std::to_string(res) + " exceeds 1e-10 * |A|_inf");

        out[k].value = lambda;
        out[k].vector = std::move(v);
    }

    for (std::size_t k = 1; k < count; ++k)
        if (!(out[k].value >= out[k - 1].value))
            fail("eigensolver failure", "eigenvalues not ascending");
    return out;
}

std::vector<double> solve_tridiag(std::vector<double> lower, std::vector<double> diag,
                                  std::vector<double> upper, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() + 1 != n || upper.size() + 1 != n || rhs.size() != n)
        fail("invalid system", "tridiagonal solve size mismatch");
    pivoted_tridiag_solve(std::move(lower), std::move(diag), std::move(upper), rhs);
    return rhs;
}

}  // namespace gaplab
