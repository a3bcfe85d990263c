#include "gaplab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "gaplab/cap.hpp"
#include "gaplab/error.hpp"
#include "gaplab/model.hpp"
#include "gaplab/parabolic.hpp"
#include "gaplab/parallel.hpp"
#include "gaplab/prufer.hpp"
#include "gaplab/riccati.hpp"
#include "json.hpp"

namespace gaplab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("io failure", "cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) fail("io failure", "short write to " + path.string());
}

// CSV contract: '.' decimal separator (snprintf in the C locale), UTF-8,
// header row, one record per line.
void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::string text;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) text += ',';
        text += header[i];
    }
    text += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            fail("io failure", "csv row width does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) text += ',';
            text += row[i];
        }
        text += '\n';
    }
    write_text(path, text);
}

std::vector<std::string> num_row(std::initializer_list<double> values) {
    std::vector<std::string> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(num(v));
    return out;
}

// Collects stage verdicts and mirrors them to the log as they happen.
class Stages {
  public:
    explicit Stages(std::ostream& log) : log_(log) {}

    bool run(const std::string& stage, const std::function<std::string()>& body) {
        try {
            add(stage, true, body());
            return true;
        } catch (const NumericsError& err) {
            add(stage, false, err.what());
            return false;
        }
    }

    void add(const std::string& stage, bool pass, const std::string& detail) {
        log_ << (pass ? "[PASS] " : "[FAIL] ") << stage << ": " << detail << '\n';
        verdicts_.push_back({stage, pass, detail});
    }

    const std::vector<StageVerdict>& verdicts() const { return verdicts_; }

    bool all_pass() const {
        return std::all_of(verdicts_.begin(), verdicts_.end(),
                           [](const StageVerdict& v) { return v.pass; });
    }

  private:
    std::ostream& log_;
    std::vector<StageVerdict> verdicts_;
};

json config_json(const RunConfig& cfg) {
    json j;
    j["n"] = cfg.n;
    j["D"] = cfg.D;
    j["k_list"] = cfg.k_list;
    j["grid_nodes"] = cfg.grid_nodes;
    j["t_end"] = cfg.t_end;
    j["tolerances"] = cfg.tolerances;
    j["seed"] = cfg.seed;
    j["pairs"] = cfg.pairs;
    j["output_dir"] = cfg.output_dir;
    return j;
}

// Walks output_dir, checksums every data file, writes manifest.json, and
// reduces the verdict list to the exit code.
int finalize(const RunConfig& cfg, const std::string& command, const std::string& started,
             const Stages& st, std::ostream& log) {
    RunManifest man;
    man.command = command;
    man.started_utc = started;
    man.config = cfg;
    man.verdicts = st.verdicts();

    fs::path root = cfg.output_dir;
    fs::create_directories(root);
    std::vector<std::string> rels;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
            rels.push_back(fs::relative(entry.path(), root).generic_string());
    std::sort(rels.begin(), rels.end());
    for (const auto& rel : rels)
        man.files.emplace_back(rel, checksum_hex(fnv1a64_file(root / rel)));

    man.finished_utc = utc_now();
    write_text(root / "manifest.json", man.to_json() + "\n");
    log << (man.all_pass() ? "[PASS] " : "[FAIL] ") << command << ": " << man.files.size()
        << " data files listed in " << (root / "manifest.json").generic_string() << '\n';
    return man.all_pass() ? 0 : 1;
}

// Shared by the robin/modulus/flow pipelines: the comparison operator's
// certified ground eigenvalue at the configured resolution.
PruferProblem make_chart_problem(const RunConfig& cfg) {
    auto mp = ModelProblem::make(cfg.n, cfg.D, static_cast<std::size_t>(cfg.grid_nodes));
    auto mg = model_gap(mp);
    return PruferProblem{cfg.n, cfg.D, mg.mu0};
}

// Deterministic shift schedule for the nested supersolution family; level j
// uses s_j = 0.15 j. The library accepts any schedule; the harness fixes one
// so runs are reproducible.
std::vector<double> shift_schedule(int k) {
    std::vector<double> s(static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j) s[static_cast<std::size_t>(j - 1)] = 0.15 * j;
    return s;
}

json gap_report_json(const GapChainReport& rep) {
    json j;
    j["n"] = rep.n;
    j["radius"] = rep.radius;
    j["diameter"] = rep.diameter;
    j["lambda0"] = rep.lambda0;
    j["lambda1"] = rep.lambda1;
    j["lambda0_tol"] = rep.lambda0_tol;
    j["lambda1_tol"] = rep.lambda1_tol;
    j["mu0"] = rep.mu0;
    j["mu1"] = rep.mu1;
    j["mu_tol"] = rep.mu_tol;
    j["margin_chain"] = rep.margin_chain;
    j["margin_ground"] = rep.margin_ground;
    if (rep.margin_model.has_value())
        j["margin_model"] = *rep.margin_model;
    else
        j["margin_model"] = nullptr;
    j["second_radial"] = rep.second_radial;
    j["ordering_ok"] = rep.ordering_ok;
    j["ok"] = rep.ok;
    j["scope_note"] = rep.scope_note;
    return j;
}

}  // namespace

double RunConfig::tol(const std::string& key) const {
    auto it = tolerances.find(key);
    if (it == tolerances.end()) fail("invalid system", "unknown tolerance key: " + key);
    return it->second;
}

void RunConfig::validate() const {
    if (n < 1) fail("invalid system", "config field n must be >= 1");
    if (!(D > 0.0)) fail("invalid system", "config field D must be positive");
    if (k_list.empty()) fail("invalid system", "config field k_list must be non-empty");
    for (int k : k_list)
        if (k < 1) fail("invalid system", "config field k_list entries must be >= 1");
    if (grid_nodes < 3) fail("invalid system", "config field grid_nodes must be >= 3");
    if (!(t_end > 0.0)) fail("invalid system", "config field t_end must be positive");
    if (pairs < 1) fail("invalid system", "config field pairs must be >= 1");
    if (output_dir.empty()) fail("invalid system", "config field output_dir must be non-empty");
    for (const char* key : {"flow", "oracle", "margin", "logconcavity"}) {
        auto it = tolerances.find(key);
        if (it == tolerances.end() || !(it->second > 0.0))
            fail("invalid system",
                 std::string("config field tolerances.") + key + " must be present and positive");
    }
}

std::string RunConfig::to_json() const { return config_json(*this).dump(2); }

RunConfig RunConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& err) {
        fail("invalid system", std::string("config is not valid JSON: ") + err.what());
    }
    if (!j.is_object()) fail("invalid system", "config document must be a JSON object");

    RunConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "n")
                cfg.n = value.get<int>();
            else if (key == "D")
                cfg.D = value.get<double>();
            else if (key == "k_list")
                cfg.k_list = value.get<std::vector<int>>();
            else if (key == "grid_nodes")
                cfg.grid_nodes = value.get<int>();
            else if (key == "t_end")
                cfg.t_end = value.get<double>();
            else if (key == "tolerances")
                for (const auto& [tkey, tval] : value.items())
                    cfg.tolerances[tkey] = tval.get<double>();
            else if (key == "seed")
                cfg.seed = value.get<std::uint64_t>();
            else if (key == "pairs")
                cfg.pairs = value.get<int>();
            else if (key == "output_dir")
                cfg.output_dir = value.get<std::string>();
            else
                fail("invalid system", "unknown config key: " + key);
        }
    } catch (const json::exception& err) {
        fail("invalid system", std::string("config field has the wrong type: ") + err.what());
    }
    return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io failure", "cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

bool RunManifest::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(),
                       [](const StageVerdict& v) { return v.pass; });
}

std::string RunManifest::to_json() const {
    json j;
    j["command"] = command;
    j["version"] = version;
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;
    j["config"] = config_json(config);
    json verd = json::array();
    for (const auto& v : verdicts)
        verd.push_back({{"stage", v.stage}, {"pass", v.pass}, {"detail", v.detail}});
    j["verdicts"] = verd;
    j["all_pass"] = all_pass();
    json fl = json::array();
    for (const auto& [path, sum] : files) fl.push_back({{"path", path}, {"fnv1a64", sum}});
    j["files"] = fl;
    return j.dump(2);
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 14695981039346656037ULL;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io failure", "cannot open " + path.string() + " for checksumming");
    std::uint64_t hash = 14695981039346656037ULL;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof buf);
        std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ULL;
        }
    }
    return hash;
}

std::string checksum_hex(std::uint64_t value) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

int run_eigen(const RunConfig& cfg, std::ostream& log) {
    std::string started = utc_now();
    Stages st(log);
    fs::path root = cfg.output_dir;

    std::optional<ModelProblem> mp;
    st.run("config", [&] {
        cfg.validate();
        mp = ModelProblem::make(cfg.n, cfg.D, static_cast<std::size_t>(cfg.grid_nodes));
        return "n=" + std::to_string(cfg.n) + " D=" + num(cfg.D) +
               " nodes=" + std::to_string(cfg.grid_nodes);
    });

    std::optional<ModelGap> mg;
    if (mp) {
        st.run("spectrum", [&] {
            mg = model_gap(*mp);
            return "mu0=" + num(mg->mu0) + " mu1=" + num(mg->mu1) +
                   " certified_tol=" + num(mg->certified_tol);
        });
    }

    if (mg) {
        double otol = cfg.tol("oracle");
        if (cfg.n == 1) {
            double t0 = kPi * kPi / (cfg.D * cfg.D);
            double e0 = std::abs(mg->mu0 - t0) / t0;
            double e1 = std::abs(mg->mu1 - 4.0 * t0) / (4.0 * t0);
            st.add("oracle", e0 <= otol && e1 <= otol,
                   "closed-form relative defects " + num(e0) + ", " + num(e1));
        } else if (cfg.n == 3) {
            double t0 = kPi * kPi / (cfg.D * cfg.D) - 1.0;
            double t1 = 4.0 * kPi * kPi / (cfg.D * cfg.D) - 1.0;
            double e0 = std::abs(mg->mu0 - t0) / t0;
            double e1 = std::abs(mg->mu1 - t1) / t1;
            st.add("oracle", e0 <= otol && e1 <= otol,
                   "closed-form relative defects " + num(e0) + ", " + num(e1));
        } else {
            st.add("oracle", mg->mu0 < mg->mu1, "ordering mu0 < mu1 with gap " + num(mg->gap));
        }
        if (cfg.n >= 3)
            st.add("gap-bound", mg->margin >= -mg->certified_tol,
                   "gap - 3pi^2/D^2 = " + num(mg->margin) + " certified to " +
                       num(mg->certified_tol));

        st.run("emit", [&] {
            json j;
            j["n"] = cfg.n;
            j["D"] = cfg.D;
            j["grid_nodes"] = cfg.grid_nodes;
            j["mu0"] = mg->mu0;
            j["mu1"] = mg->mu1;
            j["gap"] = mg->gap;
            j["bound"] = mg->bound;
            j["margin"] = mg->margin;
            j["certified_tol"] = mg->certified_tol;
            write_text(root / "eigen" / "mu0_mu1.json", j.dump(2) + "\n");

            const auto& z = mp->grid.nodes;
            for (const EigenPair* pair : {&mg->ground, &mg->excited}) {
                std::vector<std::vector<std::string>> rows;
                rows.reserve(z.size());
                for (std::size_t i = 0; i < z.size(); ++i)
                    rows.push_back(num_row({z[i], pair->phi[i], pair->dphi[i]}));
                write_csv(root / "eigen" / ("phi" + std::to_string(pair->index) + ".csv"),
                          {"z", "phi", "dphi"}, rows);
            }
            return "eigen/mu0_mu1.json and eigenfunction tables";
        });
    }

    return finalize(cfg, "eigen", started, st, log);
}

int run_robin(const RunConfig& cfg, std::ostream& log) {
    std::string started = utc_now();
    Stages st(log);
    fs::path root = cfg.output_dir;

    std::optional<PruferProblem> pp;
    st.run("config", [&] {
        cfg.validate();
        pp = make_chart_problem(cfg);
        return "n=" + std::to_string(cfg.n) + " D=" + num(cfg.D) + " mu0=" + num(pp->mu0);
    });

    if (pp) {
        std::vector<std::pair<double, double>> c_of_eps;  // (eps, c)
        std::vector<std::vector<std::string>> table;
        bool aborted = false;
        for (int k : cfg.k_list) {
            if (aborted) break;
            double eps = 1.0 / k;
            std::string stage = "robin eps=1/" + std::to_string(k);
            aborted = !st.run(stage, [&] {
                double c = solve_robin_coupling(*pp, eps);
                auto grid = Grid1D::uniform(0.0, pp->half(), static_cast<std::size_t>(cfg.grid_nodes));
                auto sol = reconstruct_robin(*pp, grid, eps);

                double r_value = std::abs(sol.phi.back() - eps);
                double r_slope = std::abs(sol.dphi.back() + 1.0);
                double r_center = std::abs(sol.dphi.front());
                double h = grid.nodes[1] - grid.nodes[0];
                double r_ode = 0.0;
                for (std::size_t i = 2; i + 2 < sol.z.size(); ++i) {
                    double d2 = (-sol.phi[i - 2] + 16.0 * sol.phi[i - 1] - 30.0 * sol.phi[i] +
                                 16.0 * sol.phi[i + 1] - sol.phi[i + 2]) /
                                (12.0 * h * h);
                    double cz = std::cos(sol.z[i]);
                    double res = d2 - (pp->n - 1) * std::tan(sol.z[i]) * sol.dphi[i] +
                                 (pp->mu0 - sol.c / (cz * cz)) * sol.phi[i];
                    r_ode = std::max(r_ode, std::abs(res));
                }
                if (!(c > 0.0)) fail("bound violation", "coupling must be positive");
                double worst = std::max({r_value, r_slope, r_center, r_ode});
                if (worst > 1e-6)
                    fail("bound violation", "boundary or equation residual " + num(worst));

                c_of_eps.emplace_back(eps, c);
                table.push_back(num_row({eps, c, sol.sigma, r_value, r_slope, r_center, r_ode}));

                std::vector<std::vector<std::string>> rows;
                rows.reserve(sol.z.size());
                for (std::size_t i = 0; i < sol.z.size(); ++i)
                    rows.push_back(num_row({sol.z[i], sol.phi[i], sol.dphi[i], sol.q[i]}));
                write_csv(root / "flow" / ("robin_phi_k" + std::to_string(k) + ".csv"),
                          {"z", "phi", "dphi", "q"}, rows);
                return "c=" + num(c) + " residual sup " + num(worst);
            });
        }

        if (!table.empty())
            write_csv(root / "flow" / "robin_c.csv",
                      {"eps", "c", "sigma", "res_value", "res_slope", "res_center", "res_ode"},
                      table);

        if (c_of_eps.size() >= 2) {
            auto sorted = c_of_eps;
            std::sort(sorted.begin(), sorted.end());
            bool increasing = true;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
                if (!(sorted[i].second < sorted[i + 1].second)) increasing = false;
            st.add("coupling-monotone", increasing, "c strictly increasing in eps over " +
                                                        std::to_string(sorted.size()) + " values");
        }
    }

    return finalize(cfg, "robin", started, st, log);
}

int run_modulus(const RunConfig& cfg, std::ostream& log) {
    std::string started = utc_now();
    Stages st(log);
    fs::path root = cfg.output_dir;

    std::optional<PruferProblem> pp;
    st.run("config", [&] {
        cfg.validate();
        pp = make_chart_problem(cfg);
        return "n=" + std::to_string(cfg.n) + " D=" + num(cfg.D) + " mu0=" + num(pp->mu0);
    });

    if (pp) {
        std::vector<std::pair<int, ModulusProfile>> profiles;
        bool aborted = false;
        auto klist = cfg.k_list;
        std::sort(klist.begin(), klist.end());
        for (int k : klist) {
            if (aborted) break;
            std::string stage = "modulus k=" + std::to_string(k);
            aborted = !st.run(stage, [&] {
                auto shifts = shift_schedule(k);
                auto mp = initial_modulus(*pp, k, shifts, static_cast<std::size_t>(cfg.grid_nodes));
                if (mp.psi.front() != 0.0 || mp.psi.back() != -static_cast<double>(k))
                    fail("bound violation", "boundary values are not exact");
                for (const auto& kink : mp.kinks)
                    if (kink.jump > 0.0)
                        fail("bound violation", "kink jump " + num(kink.jump) + " at z=" +
                                                    num(kink.z) + " is positive");

                std::vector<std::vector<std::string>> rows;
                rows.reserve(mp.z.size());
                for (std::size_t i = 0; i < mp.z.size(); ++i)
                    rows.push_back(num_row({mp.z[i], mp.psi[i], mp.dpsi[i], mp.piece_c[i]}));
                write_csv(root / "flow" / ("modulus_k" + std::to_string(k) + ".csv"),
                          {"z", "psi", "dpsi", "piece_c"}, rows);

                std::string detail = std::to_string(mp.kinks.size()) + " kinks, Lipschitz " +
                                     num(mp.lipschitz_const);
                profiles.emplace_back(k, std::move(mp));
                return detail;
            });
        }

        for (std::size_t i = 0; i + 1 < profiles.size(); ++i) {
            const auto& [ka, a] = profiles[i];
            const auto& [kb, b] = profiles[i + 1];
            double worst = 0.0;
            for (std::size_t j = 0; j < a.psi.size(); ++j)
                worst = std::max(worst, b.psi[j] - a.psi[j]);
            st.add("nesting k=" + std::to_string(ka) + ".." + std::to_string(kb), worst <= 1e-12,
                   "max increase " + num(worst));
        }
    }

    return finalize(cfg, "modulus", started, st, log);
}

int run_flow(const RunConfig& cfg, std::ostream& log) {
    std::string started = utc_now();
    Stages st(log);
    fs::path root = cfg.output_dir;

    std::optional<PruferProblem> pp;
    st.run("config", [&] {
        cfg.validate();
        pp = make_chart_problem(cfg);
        return "n=" + std::to_string(cfg.n) + " D=" + num(cfg.D) + " mu0=" + num(pp->mu0);
    });

    if (pp) {
        bool aborted = false;
        for (int k : cfg.k_list) {
            if (aborted) break;
            std::string stage = "flow k=" + std::to_string(k);
            std::optional<ConvergenceReport> rep;
            aborted = !st.run(stage, [&] {
                auto shifts = shift_schedule(k);
                auto profile =
                    initial_modulus(*pp, k, shifts, static_cast<std::size_t>(cfg.grid_nodes));
                FlowOptions opt;
                opt.t_end = cfg.t_end;
                opt.tol = cfg.tol("flow");
                rep = evolve_modulus(*pp, profile, opt);

                json j;
                j["k"] = rep->k;
                j["converged"] = rep->converged;
                j["t_final"] = rep->t_final;
                j["sup_error_final"] = rep->sup_error_final;
                j["stationary_residual_final"] = rep->stationary_residual_final;
                j["monotonicity_violations"] = rep->monotonicity_violations;
                j["worst_monotonicity"] = rep->worst_monotonicity;
                j["sandwich_violations"] = rep->sandwich_violations;
                j["worst_sandwich"] = rep->worst_sandwich;
                j["field_tol"] = rep->field_tol;
                j["strict_delta"] = rep->strict_delta;
                j["lipschitz_initial"] = rep->lipschitz_initial;
                j["lipschitz_max"] = rep->lipschitz_max;
                j["decay_rate"] = rep->decay_rate;
                write_text(root / "flow" / ("report_k" + std::to_string(k) + ".json"),
                           j.dump(2) + "\n");

                std::vector<std::vector<std::string>> decay;
                decay.reserve(rep->times.size());
                for (std::size_t i = 0; i < rep->times.size(); ++i)
                    decay.push_back(num_row({rep->times[i], rep->sup_errors[i]}));
                write_csv(root / "flow" / ("decay_k" + std::to_string(k) + ".csv"),
                          {"t", "sup_error"}, decay);

                std::vector<std::vector<std::string>> final_rows;
                final_rows.reserve(profile.z.size());
                for (std::size_t i = 0; i < profile.z.size(); ++i)
                    final_rows.push_back(num_row({profile.z[i], rep->u_final[i]}));
                write_csv(root / "flow" / ("final_k" + std::to_string(k) + ".csv"), {"z", "u"},
                          final_rows);

                return "t_final=" + num(rep->t_final) + " sup_error=" + num(rep->sup_error_final) +
                       " residual=" + num(rep->stationary_residual_final);
            });
            if (!rep) continue;

            std::string suffix = " k=" + std::to_string(k);
            st.add("converged" + suffix, rep->converged,
                   "sup_error " + num(rep->sup_error_final) + " at t=" + num(rep->t_final));
            st.add("monotone" + suffix, rep->monotonicity_violations == 0,
                   std::to_string(rep->monotonicity_violations) + " violations, worst " +
                       num(rep->worst_monotonicity));
            st.add("sandwich" + suffix, rep->sandwich_violations == 0,
                   std::to_string(rep->sandwich_violations) + " violations, worst " +
                       num(rep->worst_sandwich));
            st.add("stationary" + suffix, rep->stationary_residual_final < 1e-4,
                   "final stationary residual " + num(rep->stationary_residual_final));
        }
    }

    return finalize(cfg, "flow", started, st, log);
}

int run_verify_gap(const RunConfig& cfg, std::ostream& log) {
    std::string started = utc_now();
    Stages st(log);
    fs::path root = cfg.output_dir;

    bool config_ok = st.run("config", [&] {
        cfg.validate();
        if (!(cfg.D < kPi)) fail("invalid system", "config field D must be below pi");
        return cfg.explicit_case ? "single case n=" + std::to_string(cfg.n) + " D=" + num(cfg.D)
                                 : std::string("default sweep");
    });

    if (config_ok) {
        struct Case {
            int n;
            double D;
        };
        std::vector<Case> cases;
        if (cfg.explicit_case) {
            cases.push_back({cfg.n, cfg.D});
        } else {
            for (int n : {2, 3, 5})
                for (double D : {0.5, 1.0, 2.0, 3.0, kPi - 0.1}) cases.push_back({n, D});
        }

        struct Slot {
            std::optional<GapChainReport> rep;
            std::string error;
        };
        std::vector<Slot> slots(cases.size());
        parallel_for(cases.size(), [&](std::size_t i) {
            try {
                auto prob = CapProblem::make(cases[i].n, 0.5 * cases[i].D);
                auto mp = ModelProblem::make(cases[i].n, cases[i].D,
                                             static_cast<std::size_t>(cfg.grid_nodes));
                auto mg = model_gap(mp);
                slots[i].rep = verify_gap_chain(prob, mp, mg);
            } catch (const NumericsError& err) {
                slots[i].error = err.what();
            }
        });

        double mtol = cfg.tol("margin");
        std::vector<std::vector<std::string>> summary;
        for (std::size_t i = 0; i < cases.size(); ++i) {
            std::string stage =
                "chain n=" + std::to_string(cases[i].n) + " D=" + short_num(cases[i].D);
            if (!slots[i].rep) {
                st.add(stage, false, slots[i].error);
                continue;
            }
            const auto& rep = *slots[i].rep;
            bool pass = rep.ok && rep.margin_chain >= -mtol && rep.margin_ground >= -mtol &&
                        (!rep.margin_model.has_value() || *rep.margin_model >= -mtol);
            st.add(stage, pass,
                   "chain " + num(rep.margin_chain) + ", ground " + num(rep.margin_ground) +
                       (rep.margin_model ? ", model " + num(*rep.margin_model) : ""));

            write_text(root / "gap" /
                           ("chain_n" + std::to_string(rep.n) + "_D" + short_num(rep.diameter) +
                            ".json"),
                       gap_report_json(rep).dump(2) + "\n");
            summary.push_back({num(rep.n), num(rep.diameter), num(rep.lambda0), num(rep.lambda1),
                               num(rep.mu0), num(rep.mu1), num(rep.lambda1 - rep.lambda0),
                               num(rep.mu1 - rep.mu0), num(rep.margin_chain),
                               num(rep.margin_ground),
                               rep.margin_model ? num(*rep.margin_model) : std::string(),
                               num(rep.second_radial), rep.ok ? "1" : "0"});
        }
        write_csv(root / "gap" / "summary.csv",
                  {"n", "D", "lambda0", "lambda1", "mu0", "mu1", "gap_domain", "gap_model",
                   "margin_chain", "margin_ground", "margin_model", "second_radial", "ok"},
                  summary);

        if (!cfg.explicit_case) {
            st.run("hemisphere limit", [&] {
                auto prob = CapProblem::make(3, kPi / 2 - 1e-3);
                double l0 = cap_eigenvalue(prob, 0).lambda;
                double l1 = cap_eigenvalue(prob, 1).lambda;
                json j;
                j["n"] = 3;
                j["radius"] = prob.radius;
                j["lambda0"] = l0;
                j["lambda1"] = l1;
                j["lambda_gap"] = l1 - l0;
                j["limit_lambda0"] = 3.0;
                j["limit_lambda1"] = 8.0;
                write_text(root / "gap" / "hemisphere.json", j.dump(2) + "\n");
                if (std::abs((l1 - l0) - 5.0) > 1e-2)
                    fail("bound violation", "hemisphere-limit gap " + num(l1 - l0));
                return "lambda gap " + num(l1 - l0) + " near the limit value 5";
            });
        }

        std::vector<Case> pair_cases;
        if (cfg.explicit_case)
            pair_cases.push_back({cfg.n, cfg.D});
        else
            pair_cases = {{2, 2.0}, {3, 2.5}};
        for (const auto& pc : pair_cases) {
            std::string stage =
                "logconcavity n=" + std::to_string(pc.n) + " D=" + short_num(pc.D);
            st.run(stage, [&] {
                auto prob = CapProblem::make(pc.n, 0.5 * pc.D);
                auto mg = model_gap(
                    ModelProblem::make(pc.n, pc.D, static_cast<std::size_t>(cfg.grid_nodes)));
                PruferProblem model{pc.n, pc.D, mg.mu0};
                auto ground = cap_eigenvalue(prob, 0);
                auto seeds =
                    make_pair_seeds(prob, static_cast<std::size_t>(cfg.pairs), cfg.seed);
                auto samples = sample_logconcavity(prob, seeds, ground, model);

                std::vector<std::vector<std::string>> rows;
                rows.reserve(samples.size());
                double min_margin = samples.front().margin;
                for (const auto& s : samples) {
                    double xy = 0.0;
                    for (std::size_t c = 0; c < s.x.size(); ++c) xy += s.x[c] * s.y[c];
                    rows.push_back(num_row({xy, s.d, s.lhs, s.rhs, s.margin}));
                    min_margin = std::min(min_margin, s.margin);
                }
                write_csv(root / "gap" /
                              ("logconcavity_n" + std::to_string(pc.n) + "_D" + short_num(pc.D) +
                               ".csv"),
                          {"x_dot_y", "d", "lhs", "rhs", "margin"}, rows);
                if (min_margin < -cfg.tol("logconcavity"))
                    fail("bound violation", "min margin " + num(min_margin));
                return "min margin " + num(min_margin) + " over " +
                       std::to_string(samples.size()) + " pairs";
            });
        }
    }

    return finalize(cfg, "verify-gap", started, st, log);
}

int run_sweep(const RunConfig& cfg, std::ostream& log) {
    std::string started = utc_now();
    Stages st(log);
    fs::path root = cfg.output_dir;

    bool config_ok = st.run("config", [&] {
        cfg.validate();
        return cfg.explicit_case ? "single cell n=" + std::to_string(cfg.n) + " D=" + num(cfg.D)
                                 : std::string("default grid, ") +
                                       std::to_string(worker_count()) + " workers";
    });

    if (config_ok) {
        struct Cell {
            int n;
            double D;
        };
        std::vector<Cell> cells;
        if (cfg.explicit_case) {
            cells.push_back({cfg.n, cfg.D});
        } else {
            for (int n : {1, 2, 3, 4, 5})
                for (double D : {0.5, 1.0, 2.0, 3.0, kPi - 0.1}) cells.push_back({n, D});
        }

        struct Slot {
            std::optional<ModelGap> gap;
            std::string error;
        };
        std::vector<Slot> slots(cells.size());
        parallel_for(cells.size(), [&](std::size_t i) {
            try {
                auto mp = ModelProblem::make(cells[i].n, cells[i].D,
                                             static_cast<std::size_t>(cfg.grid_nodes));
                slots[i].gap = model_gap(mp);
            } catch (const NumericsError& err) {
                slots[i].error = err.what();
            }
        });

        std::vector<std::vector<std::string>> rows;
        std::size_t failures = 0;
        bool bound_ok = true;
        double worst_margin = 1e300;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (!slots[i].gap) {
                ++failures;
                st.add("cell n=" + std::to_string(cells[i].n) + " D=" + short_num(cells[i].D),
                       false, slots[i].error);
                continue;
            }
            const auto& g = *slots[i].gap;
            rows.push_back(num_row({static_cast<double>(cells[i].n), cells[i].D, g.mu0, g.mu1,
                                    g.gap, g.bound, g.margin, g.certified_tol}));
            if (cells[i].n >= 3) {
                worst_margin = std::min(worst_margin, g.margin);
                if (g.margin < -g.certified_tol) bound_ok = false;
            }
        }
        write_csv(root / "eigen" / "sweep.csv",
                  {"n", "D", "mu0", "mu1", "gap", "bound", "margin", "certified_tol"}, rows);

        st.add("cells", failures == 0,
               std::to_string(rows.size()) + " of " + std::to_string(cells.size()) +
                   " cells computed");
        if (worst_margin < 1e300)
            st.add("gap-bound", bound_ok,
                   "worst margin over n >= 3 cells: " + num(worst_margin));
    }

    return finalize(cfg, "sweep", started, st, log);
}

}  // namespace gaplab
