#include "gaplab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gaplab/error.hpp"
#include "gaplab/ivp.hpp"
#include "gaplab/roots.hpp"
#include "gaplab/tridiag.hpp"

namespace gaplab {

namespace {

constexpr double kGradeThreshold = 2.8;

// derivative of f at x2 from (x0,f0), (x1,f1), (x2,f2), one-sided
double lagrange_deriv_right(double x0, double x1, double x2, double f0, double f1, double f2) {
    return f0 * (x2 - x1) / ((x0 - x1) * (x0 - x2)) +
           f1 * (x2 - x0) / ((x1 - x0) * (x1 - x2)) +
           f2 * (2.0 * x2 - x0 - x1) / ((x2 - x0) * (x2 - x1));
}

// derivative at the middle node of three
double lagrange_deriv_mid(double x0, double x1, double x2, double f0, double f1, double f2) {
    return f0 * (x1 - x2) / ((x0 - x1) * (x0 - x2)) +
           f1 * (2.0 * x1 - x0 - x2) / ((x1 - x0) * (x1 - x2)) +
           f2 * (x1 - x0) / ((x2 - x0) * (x2 - x1));
}

std::vector<double> fd_derivative(const std::vector<double>& x, const std::vector<double>& f) {
    const std::size_t n = x.size();
    std::vector<double> df(n);
    df[0] = -lagrange_deriv_right(x[2], x[1], x[0], f[2], f[1], f[0]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        df[i] = lagrange_deriv_mid(x[i - 1], x[i], x[i + 1], f[i - 1], f[i], f[i + 1]);
    df[n - 1] = lagrange_deriv_right(x[n - 3], x[n - 2], x[n - 1], f[n - 3], f[n - 2], f[n - 1]);
    return df;
}

void normalize_pair(EigenPair& p, Normalization norm, double half) {
    (void)half;
    double scale = 1.0;
    if (norm == Normalization::DerivativeAtRight) {
        double dr = p.dphi.back();
        if (dr == 0.0) fail("eigensolver failure", "zero right-end derivative");
        scale = -1.0 / dr;  // phi'(D/2) = -1, sign keeps interior positive
    } else {
        double mx = 0.0;
        for (double v : p.phi) mx = std::max(mx, std::abs(v));
        if (mx == 0.0) fail("eigensolver failure", "zero eigenfunction");
        double sign = 1.0;
        for (double v : p.phi)
            if (std::abs(v) == mx) {
                sign = (v >= 0.0) ? 1.0 : -1.0;
                break;
            }
        scale = sign / mx;
    }
    for (double& v : p.phi) v *= scale;
    for (double& v : p.dphi) v *= scale;
}

// Full-interval mirror of the half grid: [-rev(nodes[1..]), nodes].
std::vector<double> mirror_nodes(const Grid1D& half) {
    std::vector<double> full;
    full.reserve(2 * half.size() - 1);
    for (std::size_t i = half.size(); i-- > 1;) full.push_back(-half.nodes[i]);
    for (double z : half.nodes) full.push_back(z);
    return full;
}

struct DenseResult {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;  // on interior full-grid nodes
    std::vector<double> full;                  // full-grid nodes
};

DenseResult dense_solve(const ModelProblem& prob, const Grid1D& half, std::size_t count) {
    auto full = mirror_nodes(half);
    const std::size_t m = full.size() - 2;  // interior unknowns
    TridiagonalSystem sys;
    sys.diag.assign(m, 0.0);
    sys.offdiag.assign(m - 1, 0.0);
    sys.weight.assign(m, 0.0);
    for (std::size_t i = 1; i + 1 < full.size(); ++i) {
        double hl = full[i] - full[i - 1];
        double hr = full[i + 1] - full[i];
        double wl = prob.weight(0.5 * (full[i - 1] + full[i]));
        double wr = prob.weight(0.5 * (full[i] + full[i + 1]));
        std::size_t r = i - 1;
        sys.diag[r] = wl / hl + wr / hr;
        if (r + 1 < m) sys.offdiag[r] = -wr / hr;
        sys.weight[r] = prob.weight(full[i]) * 0.5 * (hl + hr);
    }
    auto pairs = eig_sym_tridiag(sys, count);
    DenseResult res;
    res.full = std::move(full);
    for (auto& p : pairs) {
        res.values.push_back(p.value);
        res.vectors.push_back(std::move(p.vector));
    }
    return res;
}

// parity defect relative to sup norm; index 0 must be even, 1 odd
double parity_defect(const std::vector<double>& vec, Parity parity) {
    const std::size_t m = vec.size();  // odd count, center at (m-1)/2
    double mx = 0.0, defect = 0.0;
    for (double v : vec) mx = std::max(mx, std::abs(v));
    for (std::size_t i = 0; i < m; ++i) {
        double mirrored = vec[m - 1 - i];
        double d = (parity == Parity::Even) ? std::abs(vec[i] - mirrored)
                                            : std::abs(vec[i] + mirrored);
        defect = std::max(defect, d);
    }
    return defect / mx;
}

EigenPair fold_to_half(const DenseResult& res, std::size_t idx, const ModelProblem& prob,
                       Normalization norm) {
    EigenPair p;
    p.index = static_cast<int>(idx);
    p.value = res.values[idx];
    p.parity = (idx % 2 == 0) ? Parity::Even : Parity::Odd;

    double defect = parity_defect(res.vectors[idx], p.parity);
    if (defect > 1e-6)
        fail("eigensolver failure",
             "mode " + std::to_string(idx) + " parity defect " + std::to_string(defect));

    // fold: full interior nodes are full[1..end-1]; half grid nodes map to the
    // right part, with Dirichlet zero appended at D/2
    const std::size_t m = res.vectors[idx].size();
    const std::size_t center = (m - 1) / 2;  // index of z=0 in the interior array
    const std::size_t half_n = prob.grid.size();
    p.phi.resize(half_n);
    for (std::size_t i = 0; i + 1 < half_n; ++i) p.phi[i] = res.vectors[idx][center + i];
    p.phi[half_n - 1] = 0.0;
    p.dphi = fd_derivative(prob.grid.nodes, p.phi);
    normalize_pair(p, norm, prob.half());
    return p;
}

struct ShotResult {
    double endpoint;  // phi(D/2), the Dirichlet mismatch
    IvpSolution sol;
};

ShotResult shoot(const ModelProblem& prob, Parity parity, double mu,
                 std::span<const double> checkpoints) {
    const int n = prob.n;
    OdeRhs rhs = [n, mu](double z, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = (n - 1) * std::tan(z) * y[1] - mu * y[0];
    };
    double y0[2];
    if (parity == Parity::Even) {
        y0[0] = 1.0;
        y0[1] = 0.0;
    } else {
        y0[0] = 0.0;
        y0[1] = 1.0;
    }
    IvpConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    ShotResult r{0.0, integrate_ivp(rhs, 0.0, prob.half(), y0, cfg, checkpoints)};
    r.endpoint = r.sol.final_state()[0];
    return r;
}

}  // namespace

ModelProblem ModelProblem::make(int n, double D, std::size_t half_nodes) {
    ModelProblem p;
    p.n = n;
    p.D = D;
    if (D > kGradeThreshold)
        p.grid = Grid1D::graded_right(0.0, 0.5 * D, half_nodes);
    else
        p.grid = Grid1D::uniform(0.0, 0.5 * D, half_nodes);
    p.validate();
    return p;
}

void ModelProblem::validate() const {
    if (n < 1) fail("diameter out of range", "dimension must be >= 1");
    if (!(D > 0.0) || !(D < std::numbers::pi))
        fail("diameter out of range", "need 0 < D < pi, got D=" + std::to_string(D));
    grid.validate();
    if (grid.a != 0.0 || std::abs(grid.b - 0.5 * D) > 1e-14)
        fail("invalid grid", "model grid must span [0, D/2]");
}

double ModelProblem::weight(double z) const {
    return std::pow(std::cos(z), n - 1);
}

std::vector<EigenPair> solve_spectrum_dense(const ModelProblem& prob, std::size_t count,
                                            Normalization norm) {
    prob.validate();
    auto res = dense_solve(prob, prob.grid, count);
    std::vector<EigenPair> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(fold_to_half(res, k, prob, norm));
    return out;
}

EigenPair solve_spectrum_shooting(const ModelProblem& prob, int index, double mu_lo, double mu_hi,
                                  Normalization norm) {
    prob.validate();
    if (index != 0 && index != 1) fail("eigensolver failure", "shooting supports indices 0 and 1");
    Parity parity = (index == 0) ? Parity::Even : Parity::Odd;

    auto mismatch = [&](double mu) { return shoot(prob, parity, mu, {}).endpoint; };
    RootConfig rc;
    rc.x_tol = 1e-13 * std::max(1.0, std::abs(mu_hi));
    double mu = find_root(mismatch, mu_lo, mu_hi, rc);

    auto shot = shoot(prob, parity, mu, prob.grid.nodes);
    EigenPair p;
    p.index = index;
    p.value = mu;
    p.parity = parity;
    const std::size_t half_n = prob.grid.size();
    p.phi.resize(half_n);
    p.dphi.resize(half_n);
    for (std::size_t i = 0; i < half_n; ++i) {
        p.phi[i] = shot.sol.states[i][0];
        p.dphi[i] = shot.sol.states[i][1];
    }
    p.phi[half_n - 1] = 0.0;  // converged mismatch, pin the Dirichlet end
    // interior zero count must match the mode index on the half interval
    int sign_changes = 0;
    for (std::size_t i = 2; i + 1 < half_n; ++i)
        if (p.phi[i] * p.phi[i - 1] < 0.0) ++sign_changes;
    if (sign_changes != 0)
        fail("eigensolver failure", "unexpected interior zeros in shooting mode " +
                                        std::to_string(index));
    normalize_pair(p, norm, prob.half());
    return p;
}

ModelGap model_gap(const ModelProblem& prob) {
    prob.validate();
    const std::size_t n1 = prob.grid.size();
    const std::size_t n2 = 2 * n1 - 1;
    ModelProblem fine = ModelProblem::make(prob.n, prob.D, n2);

    auto coarse_res = dense_solve(prob, prob.grid, 2);
    auto fine_res = dense_solve(fine, fine.grid, 2);

    double extrap[2], tol[2];
    for (int k = 0; k < 2; ++k) {
        double mc = coarse_res.values[static_cast<std::size_t>(k)];
        double mf = fine_res.values[static_cast<std::size_t>(k)];
        extrap[k] = mf + (mf - mc) / 3.0;
        tol[k] = 4.0 / 3.0 * std::abs(mf - mc);
    }

    // parity sanity on the fine dense vectors
    for (std::size_t k = 0; k < 2; ++k) {
        double defect = parity_defect(fine_res.vectors[k], k == 0 ? Parity::Even : Parity::Odd);
        if (defect > 1e-6)
            fail("eigensolver failure", "dense parity defect " + std::to_string(defect));
    }

    ModelGap g;
    g.certified_tol = tol[0] + tol[1];

    for (int k = 0; k < 2; ++k) {
        double center = extrap[k];
        double width = std::max({50.0 * tol[k], 1e-7 * center, 1e-9});
        EigenPair pair;
        bool ok = false;
        for (int attempt = 0; attempt < 6 && !ok; ++attempt, width *= 4.0) {
            try {
                pair = solve_spectrum_shooting(prob, k, center - width, center + width);
                ok = true;
            } catch (const NumericsError& e) {
                if (e.kind() != std::string("bracket failure")) throw;
            }
        }
        if (!ok) fail("bracket failure", "no shooting bracket around dense eigenvalue");
        if (std::abs(pair.value - center) > 1e-6 * std::max(1.0, center))
            fail("eigensolver failure", "shooting and dense eigenvalues disagree: " +
                                            std::to_string(pair.value) + " vs " +
                                            std::to_string(center));
        if (k == 0) {
            g.mu0 = pair.value;
            g.ground = std::move(pair);
        } else {
            g.mu1 = pair.value;
            g.excited = std::move(pair);
        }
    }

    g.gap = g.mu1 - g.mu0;
    g.bound = 3.0 * std::numbers::pi * std::numbers::pi / (prob.D * prob.D);
    g.margin = g.gap - g.bound;
    if (!(g.mu0 > 0.0)) fail("eigensolver failure", "ground eigenvalue not positive");
    if (!(g.mu1 > g.mu0)) fail("eigensolver failure", "spectrum not ordered");
    return g;
}

}  // namespace gaplab
