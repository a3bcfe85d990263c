#include "gaplab/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "gaplab/error.hpp"
#include "gaplab/interp.hpp"
#include "gaplab/ivp.hpp"
#include "gaplab/parallel.hpp"
#include "gaplab/roots.hpp"

namespace gaplab {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

IvpConfig branch_config(double span) {
    IvpConfig cfg;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;
    cfg.max_step = std::max(span, 1e-6) / 64.0;
    return cfg;
}

void check_checkpoints(std::span<const double> cps, double half) {
    if (!std::is_sorted(cps.begin(), cps.end())) fail("invalid grid", "checkpoints must ascend");
    for (double zq : cps)
        if (zq < -1e-12 || zq > half + 1e-12) fail("invalid grid", "checkpoint outside [0, D/2]");
}

EnvelopeCurve right_envelope(double lam, double kt, double m, double half) {
    EnvelopeCurve ec;
    ec.lambda = lam;
    if (lam < 1e-7) {
        // lam -> 0 limit of lam tan(lam u - arctan(kt/lam)): -kt / (1 + kt u)
        ec.z_min = 0.0;
        ec.psi = [kt, m, half](double z) {
            double u = half - z;
            return -kt / (1.0 + kt * u) + m * std::tan(z);
        };
    } else {
        ec.z_min = std::max(0.0, half - (kHalfPi + std::atan(kt / lam)) / lam);
        ec.psi = [lam, kt, m, half](double z) {
            return lam * std::tan(lam * (half - z) - std::atan(kt / lam)) + m * std::tan(z);
        };
    }
    return ec;
}

}  // namespace

double stationary_rate(const PruferProblem& prob, double z, double psi, double c) {
    double cz = std::cos(z);
    return -psi * psi + (prob.n - 1) * std::tan(z) * psi - prob.mu0 + c / (cz * cz);
}

double k_tilde(const PruferProblem& prob, double k) {
    return k + prob.m() * std::tan(prob.half());
}

double v_potential(const PruferProblem& prob, double c, double z) {
    double cz = std::cos(z);
    double nm1 = prob.n - 1.0;
    return (nm1 * (prob.n - 3.0) + 4.0 * c) / (4.0 * cz * cz) - 0.25 * nm1 * nm1 - prob.mu0;
}

double inf_v(const PruferProblem& prob, double c) {
    double a = (prob.n - 1.0) * (prob.n - 3.0) + 4.0 * c;
    return a >= 0.0 ? v_potential(prob, c, 0.0) : v_potential(prob, c, prob.half());
}

double sup_v(const PruferProblem& prob, double c) {
    double a = (prob.n - 1.0) * (prob.n - 3.0) + 4.0 * c;
    return a >= 0.0 ? v_potential(prob, c, prob.half()) : v_potential(prob, c, 0.0);
}

double RiccatiBranch::eval(double zq) const {
    if (z.size() < 2) fail("invalid evaluation", "branch holds too few samples");
    if (zq < z.front() - 1e-12 || zq > z.back() + 1e-12)
        fail("invalid evaluation", "query outside the sampled branch domain");
    zq = std::clamp(zq, z.front(), z.back());
    return hermite_eval(z, psi, dpsi, zq);
}

double RiccatiBranch::slope_at(double zq) const {
    return stationary_rate(prob, zq, eval(zq), c);
}

RiccatiBranch solve_branch_left(const PruferProblem& prob, double c,
                                std::span<const double> checkpoints) {
    prob.validate();
    double half = prob.half();
    check_checkpoints(checkpoints, half);

    RiccatiBranch br;
    br.prob = prob;
    br.side = BranchSide::Left;
    br.c = c;

    bool has_zero = !checkpoints.empty() && checkpoints.front() <= 1e-14;
    std::vector<double> cps;
    for (double zq : checkpoints)
        if (zq > 1e-14) cps.push_back(std::min(zq, half));

    OdeRhs rhs = [&prob, c](double zz, std::span<const double> y, std::span<double> dy) {
        dy[0] = stationary_rate(prob, zz, y[0], c);
    };
    double y0[1] = {0.0};
    auto sol = integrate_ivp(rhs, 0.0, half, y0, branch_config(half), cps);
    if (sol.blowup && sol.blowup->z < half - 1e-6)
        fail("bound violation", "interior escape on the left branch");
    if (sol.blowup) br.blowup_z = sol.blowup->z;

    if (has_zero) {
        br.z.push_back(0.0);
        br.psi.push_back(0.0);
    }
    for (std::size_t i = 0; i < sol.z.size(); ++i) {
        br.z.push_back(sol.z[i]);
        br.psi.push_back(sol.states[i][0]);
    }
    br.dpsi.resize(br.z.size());
    for (std::size_t i = 0; i < br.z.size(); ++i)
        br.dpsi[i] = stationary_rate(prob, br.z[i], br.psi[i], c);
    return br;
}

RiccatiBranch solve_branch_right(const PruferProblem& prob, double k, double c,
                                 std::span<const double> checkpoints) {
    prob.validate();
    if (!(k > 0.0)) fail("invalid evaluation", "k must be positive");
    double half = prob.half();
    check_checkpoints(checkpoints, half);
    double kt = k_tilde(prob, k);
    double m = prob.m();
    double switch_p = 10.0 * (1.0 + kt);  // leave the psi chart past this in p
    double thr = std::max(switch_p + m * std::tan(half) + 10.0,
                          2.0 * (kt + std::sqrt(std::max(sup_v(prob, c), 0.0))) + 10.0);
    double w_back = 4.0 / switch_p;  // leave the w chart when p falls below switch_p/4

    // caller checkpoints, descending, with the start D/2 recorded directly
    std::vector<double> cps(checkpoints.begin(), checkpoints.end());
    std::reverse(cps.begin(), cps.end());
    std::vector<double> zs, ps;  // collected samples, descending
    if (!cps.empty() && cps.front() >= half - 1e-14) {
        zs.push_back(half);
        ps.push_back(-k);
        cps.erase(cps.begin());
    }

    OdeRhs psi_rhs = [&prob, c](double zz, std::span<const double> y, std::span<double> dy) {
        dy[0] = stationary_rate(prob, zz, y[0], c);
    };
    OdeRhs w_rhs = [&prob, c](double zz, std::span<const double> y, std::span<double> dy) {
        dy[0] = 1.0 - v_potential(prob, c, zz) * y[0] * y[0];
    };

    double z_cur = half;
    double psi_cur = -k;
    std::optional<double> blow;
    std::size_t cursor = 0;
    bool in_w = false;
    double w_cur = 0.0;
    bool done = false;

    for (int phase = 0; !done; ++phase) {
        if (phase > 64) fail("stiffness failure", "chart switching did not settle");
        if (!in_w) {
            std::vector<double> phase_cps(cps.begin() + cursor, cps.end());
            IvpConfig cfg = branch_config(z_cur);
            cfg.blowup_threshold = thr;
            double y0[1] = {psi_cur};
            auto sol = integrate_ivp(psi_rhs, z_cur, 0.0, y0, cfg, phase_cps);
            for (std::size_t i = 0; i < sol.z.size(); ++i) {
                zs.push_back(sol.z[i]);
                ps.push_back(sol.states[i][0]);
            }
            cursor += sol.z.size();
            if (!sol.blowup) {
                done = true;
            } else {
                double z_e = sol.blowup->z;
                double p_e = sol.blowup->value - m * std::tan(z_e);
                if (p_e <= 0.0)
                    fail("bound violation", "downward escape on the right branch");
                z_cur = z_e;
                w_cur = 1.0 / p_e;
                in_w = true;
            }
        } else {
            // dense overlay catches the transversal w = 0 crossing (w' = 1 there)
            std::vector<double> merged(cps.begin() + cursor, cps.end());
            int overlay = 2048;
            for (int i = 1; i <= overlay; ++i)
                merged.push_back(z_cur * (1.0 - static_cast<double>(i) / overlay));
            std::sort(merged.begin(), merged.end(), std::greater<>());
            while (!merged.empty() && merged.front() >= z_cur - 1e-15) merged.erase(merged.begin());
            merged.erase(std::unique(merged.begin(), merged.end(),
                                     [](double a, double b) { return std::abs(a - b) < 1e-15; }),
                         merged.end());

            IvpConfig cfg = branch_config(z_cur);
            cfg.blowup_threshold = w_back;
            double y0[1] = {w_cur};
            auto sol = integrate_ivp(w_rhs, z_cur, 0.0, y0, cfg, merged);

            // first nonpositive w among the samples marks the escape cell
            std::size_t cross = sol.z.size();
            for (std::size_t i = 0; i < sol.z.size(); ++i)
                if (sol.states[i][0] <= 0.0) {
                    cross = i;
                    break;
                }

            auto record_prefix = [&](std::size_t limit) {
                for (std::size_t i = 0; i < limit; ++i) {
                    if (cursor < cps.size() && std::abs(sol.z[i] - cps[cursor]) < 1e-13) {
                        zs.push_back(sol.z[i]);
                        ps.push_back(m * std::tan(sol.z[i]) + 1.0 / sol.states[i][0]);
                        ++cursor;
                    }
                }
            };
            auto refine_crossing = [&](double z_a, double w_a, double z_b) {
                auto g = [&](double zeta) {
                    if (zeta >= z_a) return w_a;
                    double w0[1] = {w_a};
                    return integrate_ivp(w_rhs, z_a, zeta, w0, branch_config(z_a - z_b)).final_state()[0];
                };
                RootConfig rc;
                rc.x_tol = 1e-13;
                return find_root(g, z_b, z_a, rc);
            };

            if (cross < sol.z.size()) {
                record_prefix(cross);
                double z_a = cross == 0 ? z_cur : sol.z[cross - 1];
                double w_a = cross == 0 ? w_cur : sol.states[cross - 1][0];
                blow = refine_crossing(z_a, w_a, sol.z[cross]);
                done = true;
            } else if (sol.blowup) {
                record_prefix(sol.z.size());
                double z_e = sol.blowup->z;
                double w_e = sol.blowup->value;
                if (w_e <= 0.0) {
                    // crossed between the last sample and the escape
                    double z_a = sol.z.empty() ? z_cur : sol.z.back();
                    double w_a = sol.z.empty() ? w_cur : sol.states.back()[0];
                    blow = refine_crossing(z_a, w_a, z_e);
                    done = true;
                } else {
                    z_cur = z_e;
                    psi_cur = m * std::tan(z_e) + 1.0 / w_e;
                    in_w = false;
                }
            } else {
                record_prefix(sol.z.size());
                done = true;
            }
        }
    }

    RiccatiBranch br;
    br.prob = prob;
    br.side = BranchSide::Right;
    br.c = c;
    br.k = k;
    br.blowup_z = blow;
    br.z.assign(zs.rbegin(), zs.rend());
    br.psi.assign(ps.rbegin(), ps.rend());
    br.dpsi.resize(br.z.size());
    for (std::size_t i = 0; i < br.z.size(); ++i)
        br.dpsi[i] = stationary_rate(prob, br.z[i], br.psi[i], c);
    return br;
}

PSubstitution p_substitute(const RiccatiBranch& curve) {
    PSubstitution ps;
    ps.k_tilde = k_tilde(curve.prob, curve.k);
    double m = curve.prob.m();
    ps.z = curve.z;
    ps.p.reserve(curve.z.size());
    ps.v.reserve(curve.z.size());
    for (std::size_t i = 0; i < curve.z.size(); ++i) {
        ps.p.push_back(curve.psi[i] - m * std::tan(curve.z[i]));
        ps.v.push_back(v_potential(curve.prob, curve.c, curve.z[i]));
    }
    return ps;
}

EnvelopeSet explicit_bounds(const PruferProblem& prob, double k, double c, double s) {
    prob.validate();
    if (!(k > 0.0)) fail("invalid evaluation", "k must be positive");
    if (s < 0.0) fail("invalid evaluation", "shift must be nonnegative");
    double half = prob.half();
    double m = prob.m();
    double kt = k_tilde(prob, k);

    EnvelopeSet es;
    es.k_tilde = kt;

    double lam_up = std::sqrt(std::max(sup_v(prob, c + s), 0.0));
    es.upper_left.lambda = lam_up;
    es.upper_left.z_min = 0.0;
    es.upper_left.psi = [lam_up, m](double z) {
        return lam_up * std::tanh(lam_up * z) + m * std::tan(z);
    };
    es.upper_right = right_envelope(std::sqrt(std::max(-inf_v(prob, c - s), 0.0)), kt, m, half);

    double gate = std::max(-inf_v(prob, c), sup_v(prob, c));
    if (!(s > gate))
        fail("s too small for lambda bounds",
             "shift must exceed max(-inf V, sup V) at the base coupling");
    double lam_lo = std::sqrt(s + inf_v(prob, c));
    es.lower_left.lambda = lam_lo;
    es.lower_left.z_min = 0.0;
    es.lower_left.psi = [lam_lo, m](double z) {
        return lam_lo * std::tanh(lam_lo * z) + m * std::tan(z);
    };
    es.lower_right = right_envelope(std::sqrt(s - sup_v(prob, c)), kt, m, half);
    return es;
}

SupersolutionProfile supersolution_at(const PruferProblem& prob, double k, double base_c,
                                      double s, std::size_t nodes) {
    prob.validate();
    if (!(k > 0.0)) fail("invalid evaluation", "k must be positive");
    if (s < 0.0) fail("invalid evaluation", "shift must be nonnegative");
    Grid1D grid = modulus_grid(prob, nodes);

    SupersolutionProfile sp;
    sp.k = k;
    sp.s = s;
    sp.c = base_c;
    sp.left = solve_branch_left(prob, base_c + s, grid.nodes);
    sp.right = solve_branch_right(prob, k, base_c - s, grid.nodes);
    if (!sp.left.complete())
        fail("bound violation", "left branch must reach D/2 for the minimum construction");

    std::size_t count = grid.nodes.size();
    std::size_t offset = count - sp.right.z.size();  // right samples form a suffix
    sp.z = grid.nodes;
    sp.psi.resize(count);
    sp.active.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        double lv = sp.left.psi[i];
        if (i == 0) {  // imposed exact zero
            sp.psi[i] = 0.0;
            sp.active[i] = BranchSide::Left;
        } else if (i < offset) {  // right branch counts +infinity here
            sp.psi[i] = lv;
            sp.active[i] = BranchSide::Left;
        } else {
            double rv = sp.right.psi[i - offset];
            if (i + 1 == count) {  // ties go right: the -k end is imposed there
                sp.active[i] = lv < rv - 1e-9 ? BranchSide::Left : BranchSide::Right;
            } else {
                sp.active[i] = lv <= rv ? BranchSide::Left : BranchSide::Right;
            }
            sp.psi[i] = sp.active[i] == BranchSide::Left ? lv : rv;
        }
    }

    if (s > 0.0) {
        // unique transversal crossing: the branch difference gains slope
        // 2s/cos^2 z at any contact, so it flips sign exactly once
        for (std::size_t i = std::max<std::size_t>(offset, 1); i + 1 < count; ++i) {
            double d0 = sp.left.psi[i] - sp.right.psi[i - offset];
            double d1 = sp.left.psi[i + 1] - sp.right.psi[i + 1 - offset];
            if (d0 < 0.0 && d1 >= 0.0) {
                if (d1 == 0.0) {
                    sp.crossing_z = sp.z[i + 1];
                } else {
                    auto h = [&](double zq) { return sp.left.eval(zq) - sp.right.eval(zq); };
                    RootConfig rc;
                    rc.x_tol = 1e-13;
                    sp.crossing_z = find_root(h, sp.z[i], sp.z[i + 1], rc);
                }
                break;
            }
        }
    }
    return sp;
}

SupersolutionProfile supersolution(const PruferProblem& prob, double k, double s,
                                   std::size_t nodes) {
    return supersolution_at(prob, k, solve_robin_coupling(prob, 1.0 / k), s, nodes);
}

ModulusSearch find_s_of_k(const PruferProblem& prob, double k, const ModulusPredicate& oracle,
                          double s_max, double s_tol, std::size_t nodes) {
    prob.validate();
    if (!(s_max > 0.0) || !(s_tol > 0.0))
        fail("invalid evaluation", "s_max and s_tol must be positive");
    double base_c = solve_robin_coupling(prob, 1.0 / k);
    auto passes = [&](double s) { return oracle(supersolution_at(prob, k, base_c, s, nodes)); };

    ModulusSearch out;
    if (passes(0.0)) {
        out.s = 0.0;
    } else {
        if (!passes(s_max))
            fail("s cap exceeded; modulus premise unverified at this resolution",
                 "predicate still fails at s_max");
        double lo = 0.0, hi = s_max;
        while (hi - lo > s_tol) {
            double mid = 0.5 * (lo + hi);
            (passes(mid) ? hi : lo) = mid;
        }
        out.s = hi;
    }
    for (double f : {2.0, 4.0, 8.0}) {
        double sp = std::min(out.s + f * s_tol, s_max);
        bool ok = passes(sp);
        out.spot_checks.emplace_back(sp, ok);
        out.monotone_ok = out.monotone_ok && ok;
    }
    return out;
}

double ModulusProfile::eval(double zq) const {
    if (z.size() < 2) fail("invalid evaluation", "profile holds too few samples");
    if (zq < z.front() - 1e-12 || zq > z.back() + 1e-12)
        fail("invalid evaluation", "query outside [0, D/2]");
    zq = std::clamp(zq, z.front(), z.back());
    return hermite_eval(z, psi, dpsi, zq);
}

ModulusProfile initial_modulus(const PruferProblem& prob, int k, std::span<const double> s_of_j,
                               std::size_t nodes) {
    prob.validate();
    if (k < 1) fail("invalid evaluation", "k must be at least 1");
    if (s_of_j.size() != static_cast<std::size_t>(k))
        fail("invalid evaluation", "one shift per level is required");
    Grid1D grid = modulus_grid(prob, nodes);

    std::vector<SupersolutionProfile> profs(static_cast<std::size_t>(k));
    parallel_for(static_cast<std::size_t>(k), [&](std::size_t idx) {
        double kk = static_cast<double>(idx + 1);
        double base_c = solve_robin_coupling(prob, 1.0 / kk);
        profs[idx] = supersolution_at(prob, kk, base_c, s_of_j[idx], nodes);
    });

    std::size_t count = grid.nodes.size();
    ModulusProfile mp;
    mp.k = k;
    mp.z = grid.nodes;
    mp.psi.resize(count);
    mp.dpsi.resize(count);
    mp.piece_c.resize(count);
    std::vector<std::size_t> win(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < profs.size(); ++j)
            if (profs[j].psi[i] < profs[best].psi[i]) best = j;
        win[i] = best;
        mp.psi[i] = profs[best].psi[i];
        mp.piece_c[i] = profs[best].piece_coupling(i);
        mp.dpsi[i] = stationary_rate(prob, grid.nodes[i], mp.psi[i], mp.piece_c[i]);
    }

    // kinks sit where the realizing piece changes with a genuine sign swing
    auto piece_eval = [&](std::size_t j, BranchSide side, double zq) {
        const RiccatiBranch& b = side == BranchSide::Left ? profs[j].left : profs[j].right;
        if (zq < b.z.front() - 1e-12) return 1e30;  // right branch past its escape
        return b.eval(zq);
    };
    for (std::size_t i = 0; i + 1 < count; ++i) {
        std::size_t ja = win[i], jb = win[i + 1];
        BranchSide sa = profs[ja].active[i], sb = profs[jb].active[i + 1];
        if (ja == jb && sa == sb) continue;
        double ca = profs[ja].piece_coupling(i);
        double cb = profs[jb].piece_coupling(i + 1);
        if (std::abs(ca - cb) < 1e-12) continue;  // same equation, no derivative jump
        auto diff = [&](double zq) { return piece_eval(ja, sa, zq) - piece_eval(jb, sb, zq); };
        double d0 = diff(grid.nodes[i]);
        double d1 = diff(grid.nodes[i + 1]);
        if (!(d0 < -1e-12 && d1 > 1e-12)) continue;  // boundary tie, not a crossing
        RootConfig rc;
        rc.x_tol = 1e-13;
        double zk = find_root(diff, grid.nodes[i], grid.nodes[i + 1], rc);
        double ck = std::cos(zk);
        mp.kinks.push_back({zk, (cb - ca) / (ck * ck)});
    }

    double lip = 0.0;
    for (std::size_t i = 0; i + 1 < count; ++i)
        lip = std::max(lip, std::abs(mp.psi[i + 1] - mp.psi[i]) /
                                (grid.nodes[i + 1] - grid.nodes[i]));
    mp.lipschitz_const = lip;
    return mp;
}

}  // namespace gaplab
