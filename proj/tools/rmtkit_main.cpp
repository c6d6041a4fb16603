#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmtkit/ensembles.hpp"
#include "rmtkit/errors.hpp"
#include "rmtkit/io_util.hpp"
#include "rmtkit/kernels.hpp"
#include "rmtkit/limits.hpp"
#include "rmtkit/parallel.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace rmtkit;

namespace {

struct Common {
    std::string config_path;
    std::string out_dir = ".";
    int threads = 0; // 0 = resolve from env / default 1
};

int resolve_threads(const Common& c) {
    if (c.threads > 0) return c.threads;
    if (const char* env = std::getenv("RMT_KIT_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

double fnum(const json& j, const char* key) {
    double v = j.at(key).get<double>();
    if (!std::isfinite(v)) throw config_error(std::string("field '") + key + "' is not finite");
    return v;
}

int fint(const json& j, const char* key) { return j.at(key).get<int>(); }

std::vector<double> fvec(const json& j, const char* key) {
    std::vector<double> v = j.at(key).get<std::vector<double>>();
    for (double x : v)
        if (!std::isfinite(x))
            throw config_error(std::string("field '") + key + "' has a non-finite entry");
    return v;
}

using EnsembleVariant = std::variant<WishartParams, ProductParams, CoupledParams>;

EnsembleVariant parse_ensemble(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "coupled") {
        CoupledParams p;
        p.delta = fvec(j, "delta");
        p.q = fvec(j, "q");
        p.N = static_cast<int>(p.delta.size());
        p.M = static_cast<int>(p.q.size());
        p.L = fint(j, "L");
        p.alpha = fnum(j, "alpha");
        return p;
    }
    if (kind == "product") {
        ProductParams p;
        p.q = fvec(j, "q");
        p.M = static_cast<int>(p.q.size());
        p.N = fint(j, "N");
        p.L = fint(j, "L");
        p.alpha = fnum(j, "alpha");
        return p;
    }
    if (kind == "wishart") {
        WishartParams p;
        p.sigma = fvec(j, "sigma");
        p.q = fvec(j, "q");
        p.N = static_cast<int>(p.sigma.size());
        p.M = static_cast<int>(p.q.size());
        return p;
    }
    throw config_error("unknown ensemble kind '" + kind + "'");
}

std::vector<Violation> validate_variant(const EnsembleVariant& e) {
    return std::visit([](const auto& p) { return validate(p); }, e);
}

void require_variant(const EnsembleVariant& e) {
    std::visit([](const auto& p) { require_valid(p); }, e);
}

int variant_kappa(const EnsembleVariant& e) {
    if (std::holds_alternative<WishartParams>(e)) return 0;
    return std::visit(
        [](const auto& p) {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, WishartParams>)
                return 0;
            else
                return p.kappa();
        },
        e);
}

int variant_nu(const EnsembleVariant& e) {
    return std::visit([](const auto& p) { return p.nu(); }, e);
}

ScalingRegime parse_regime(const json& j) {
    ScalingRegime r;
    std::string reg = j.at("regime").get<std::string>();
    if (reg == "I")
        r.regime = Regime::I;
    else if (reg == "II")
        r.regime = Regime::II;
    else if (reg == "III")
        r.regime = Regime::III;
    else
        throw config_error("regime must be \"I\", \"II\" or \"III\"");
    if (j.contains("tau")) r.tau = fnum(j, "tau");
    if (j.contains("kappa")) r.kappa = fint(j, "kappa");
    if (j.contains("nu")) r.nu = fint(j, "nu");
    if (j.contains("pi_hat")) r.perturbations.pi_hat = fvec(j, "pi_hat");
    if (j.contains("theta_hat")) r.perturbations.theta_hat = fvec(j, "theta_hat");
    return r;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const Common& c, json manifest) {
    manifest["tool_version"] = kToolVersion;
    write_text_atomic((fs::path(c.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------- validate --

int run_validate(const json& cfg, const Common& c, json& manifest) {
    EnsembleVariant e = parse_ensemble(cfg.at("ensemble"));
    manifest["kappa"] = variant_kappa(e);
    manifest["nu"] = variant_nu(e);
    std::vector<Violation> v = validate_variant(e);
    if (v.empty()) {
        std::printf("constraints satisfied\n");
        write_manifest(c, manifest);
        return 0;
    }
    for (const auto& viol : v)
        std::printf("violated %s at (i=%d, j=%d): %s\n", viol.name.c_str(), viol.i, viol.j,
                    viol.detail.c_str());
    manifest["violations"] = static_cast<int>(v.size());
    write_manifest(c, manifest);
    return 2;
}

// ------------------------------------------------------------------ kernel --

int run_kernel(const json& cfg, const Common& c, json& manifest) {
    const json& k = cfg.at("kernel");
    std::vector<double> xs = fvec(k, "x"), ys = fvec(k, "y");
    CsvTable t;
    std::string type = k.at("type").get<std::string>();
    int nthreads = resolve_threads(c);
    std::vector<std::vector<std::string>> rows(xs.size() * ys.size());

    if (type == "finite") {
        FiniteKernel fk;
        fk.params = parse_ensemble(k.at("ensemble"));
        std::string method = k.value("method", "gram_sum");
        bool factorized = false;
        if (method == "gram_sum")
            fk.method = KernelMethod::gram_sum;
        else if (method == "contour_quadrature")
            fk.method = KernelMethod::contour_quadrature;
        else if (method == "residue_sum")
            fk.method = KernelMethod::residue_sum;
        else if (method == "factorized")
            factorized = true;
        else
            throw config_error("unknown kernel method '" + method + "'");
        if (k.contains("tol")) fk.tol = fnum(k, "tol");
        require_variant(fk.params);
        manifest["kappa"] = variant_kappa(fk.params);
        manifest["nu"] = variant_nu(fk.params);
        manifest["gauge"] = "canonical biorthogonal-sum gauge";
        t.header = {"x_sqsv", "y_sqsv", "K_canonical", "est_error"};
        parallel_for(static_cast<int>(rows.size()), nthreads, [&](int i) {
            double x = xs[static_cast<size_t>(i) / ys.size()];
            double y = ys[static_cast<size_t>(i) % ys.size()];
            KernelValue kv = factorized ? kernel_factorized(fk, x, y) : kernel_eval(fk, x, y);
            rows[static_cast<size_t>(i)] = {format_full(x), format_full(y),
                                            format_full(kv.value), format_full(kv.est_error)};
        });
    } else if (type == "limit") {
        ScalingRegime r = parse_regime(k);
        require_valid(r);
        manifest["kappa"] = r.kappa;
        manifest["nu"] = r.nu;
        manifest["gauge"] = "limit-kernel native gauge";
        t.header = {"x_hardedge", "y_hardedge", "K_limit", "est_error"};
        parallel_for(static_cast<int>(rows.size()), nthreads, [&](int i) {
            double x = xs[static_cast<size_t>(i) / ys.size()];
            double y = ys[static_cast<size_t>(i) % ys.size()];
            KernelValue kv;
            switch (r.regime) {
            case Regime::I:
                kv = kernel_I(r.perturbations, r.kappa, r.nu, x, y);
                break;
            case Regime::II:
                kv = kernel_II(r.perturbations, r.tau, r.kappa, r.nu, x, y);
                break;
            case Regime::III:
                kv = kernel_III(r.perturbations, r.nu, x, y);
                break;
            }
            rows[static_cast<size_t>(i)] = {format_full(x), format_full(y),
                                            format_full(kv.value), format_full(kv.est_error)};
        });
    } else {
        throw config_error("kernel type must be \"finite\" or \"limit\"");
    }
    t.rows = std::move(rows);
    std::string out = (fs::path(c.out_dir) / "kernel.csv").string();
    write_csv(out, t);
    manifest["outputs"] = {"kernel.csv"};
    manifest["rows"] = static_cast<int>(t.rows.size());
    write_manifest(c, manifest);
    std::printf("wrote %s (%zu rows)\n", out.c_str(), t.rows.size());
    return 0;
}

// ------------------------------------------------------------------ sample --

int run_sample(const json& cfg, const Common& c, json& manifest) {
    const json& s = cfg.at("sample");
    EnsembleVariant e = parse_ensemble(s.at("ensemble"));
    require_variant(e);
    int count = fint(s, "count");
    if (count < 1) throw config_error("sample count must be >= 1");
    std::uint64_t seed = s.at("seed").get<std::uint64_t>();
    int nthreads = resolve_threads(c);
    std::vector<std::vector<double>> draws = std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, CoupledParams>)
                return sample_coupled(p, seed, count, nthreads);
            else if constexpr (std::is_same_v<T, ProductParams>)
                return sample_product(p, seed, count, nthreads);
            else
                return sample_wishart(p, seed, count, nthreads);
        },
        e);
    CsvTable t;
    t.header = {"row"};
    size_t N = draws.empty() ? 0 : draws.front().size();
    for (size_t i = 1; i <= N; ++i) t.header.push_back("sqsv_" + std::to_string(i));
    t.rows.reserve(draws.size());
    for (size_t r = 0; r < draws.size(); ++r) {
        std::vector<std::string> row{std::to_string(r)};
        for (double v : draws[r]) row.push_back(format_full(v));
        t.rows.push_back(std::move(row));
    }
    std::string out = (fs::path(c.out_dir) / "samples.csv").string();
    write_csv(out, t);
    manifest["outputs"] = {"samples.csv"};
    manifest["seed"] = seed;
    manifest["count"] = count;
    manifest["kappa"] = variant_kappa(e);
    manifest["nu"] = variant_nu(e);
    write_manifest(c, manifest);
    std::printf("wrote %s (%d rows)\n", out.c_str(), count);
    return 0;
}

// ----------------------------------------------------------------- density --

std::vector<double> read_sample_values(const std::string& path, int expect_cols) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read sample file " + path);
    std::string line;
    if (!std::getline(in, line)) throw config_error("sample file " + path + " is empty");
    int header_cols = 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
    if (header_cols != expect_cols + 1)
        throw config_error("sample file has " + std::to_string(header_cols - 1) +
                           " value columns, ensemble needs " + std::to_string(expect_cols));
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        int col = 0;
        while (std::getline(ss, field, ',')) {
            if (col++ == 0) continue; // row index
            values.push_back(std::strtod(field.c_str(), nullptr));
        }
    }
    return values;
}

int run_density(const json& cfg, const Common& c, json& manifest) {
    const json& d = cfg.at("density");
    EnsembleVariant e = parse_ensemble(d.at("ensemble"));
    require_variant(e);
    const json& g = d.at("grid");
    double lo = fnum(g, "min"), hi = fnum(g, "max");
    int pts = fint(g, "points");
    if (!(hi > lo) || pts < 8) throw config_error("grid needs max > min and points >= 8");
    int N = std::visit([](const auto& p) { return p.N; }, e);
    FiniteKernel fk;
    fk.params = e;
    fk.method = KernelMethod::gram_sum;
    int nthreads = resolve_threads(c);

    std::vector<double> grid(static_cast<size_t>(pts)), rho(static_cast<size_t>(pts));
    double dt = (hi - lo) / (pts - 1);
    for (int i = 0; i < pts; ++i) grid[static_cast<size_t>(i)] = lo + dt * i;
    double floor_t = 1e-9 * (hi - lo); // grid may start at the hard edge t = 0
    parallel_for(pts, nthreads, [&](int i) {
        double tt = std::max(grid[static_cast<size_t>(i)], floor_t);
        rho[static_cast<size_t>(i)] = kernel_eval(fk, tt, tt).value;
    });
    // cumulative trapezoid; chi_square_binned normalises by the final mass
    std::vector<double> cdf(static_cast<size_t>(pts), 0.0);
    for (int i = 1; i < pts; ++i)
        cdf[static_cast<size_t>(i)] = cdf[static_cast<size_t>(i) - 1] +
                                      0.5 * dt *
                                          (rho[static_cast<size_t>(i)] +
                                           rho[static_cast<size_t>(i) - 1]);
    manifest["trace"] = cdf.back();
    manifest["kappa"] = variant_kappa(e);
    manifest["nu"] = variant_nu(e);

    std::vector<double> empirical; // per-grid-cell density of sample values
    bool have_samples = d.contains("samples") && !d.at("samples").get<std::string>().empty();
    if (have_samples) {
        std::string spath = d.at("samples").get<std::string>();
        std::vector<double> values = read_sample_values(spath, N);
        if (values.empty()) {
            have_samples = false;
        } else {
            empirical.assign(static_cast<size_t>(pts), 0.0);
            size_t rows_n = values.size() / static_cast<size_t>(N);
            for (double v : values) {
                int b = static_cast<int>(std::floor((v - lo) / dt));
                if (b >= 0 && b < pts) empirical[static_cast<size_t>(b)] += 1.0;
            }
            for (double& v : empirical) v /= static_cast<double>(rows_n) * dt;
            int bins = d.value("bins", 25);
            ChiSquare chi = chi_square_binned(values, grid, cdf, bins);
            manifest["chi_square"] = {{"statistic", chi.statistic},
                                      {"dof", chi.dof},
                                      {"p_value", chi.p_value},
                                      {"bins", bins}};
            std::printf("chi-square: statistic %.6g, dof %d, p-value %.6g\n", chi.statistic,
                        chi.dof, chi.p_value);
        }
    }

    CsvTable t;
    t.header = {"t_sqsv", "rho1_canonical", "empirical_density"};
    for (int i = 0; i < pts; ++i) {
        std::vector<std::string> row{format_full(grid[static_cast<size_t>(i)]),
                                     format_full(rho[static_cast<size_t>(i)]),
                                     have_samples ? format_full(empirical[static_cast<size_t>(i)])
                                                  : std::string()};
        t.rows.push_back(std::move(row));
    }
    std::string out = (fs::path(c.out_dir) / "density.csv").string();
    write_csv(out, t);
    manifest["outputs"] = {"density.csv"};
    write_manifest(c, manifest);
    std::printf("wrote %s (%d rows, trace %.6f, N = %d)\n", out.c_str(), pts, cdf.back(), N);
    return 0;
}

// -------------------------------------------------------------------- scan --

int run_scan(const json& cfg, const Common& c, bool assert_trend, json& manifest) {
    const json& s = cfg.at("scan");
    std::string type = s.value("type", "hard_edge");
    int nthreads = resolve_threads(c);
    ScanTable table;
    double trend_rel_max = s.value("final_rel_max", 0.05);

    if (type == "hard_edge") {
        ScalingRegime r = parse_regime(s);
        require_valid(r);
        manifest["kappa"] = r.kappa;
        manifest["nu"] = r.nu;
        const json& sj = s.at("schedule");
        std::string kind = sj.at("kind").get<std::string>();
        double value = fnum(sj, "value");
        MuSchedule sched;
        if (kind == "constant")
            sched = MuSchedule::constant(value);
        else if (kind == "critical")
            sched = MuSchedule::critical(value);
        else if (kind == "vanishing")
            sched = MuSchedule::vanishing(value);
        else
            throw config_error("schedule kind must be constant/critical/vanishing");
        std::vector<int> N_list = s.at("N_list").get<std::vector<int>>();
        if (assert_trend && N_list.size() < 3)
            throw config_error("--assert-trend needs at least 3 scan points in N_list");
        std::vector<std::pair<double, double>> probes;
        for (const auto& pr : s.at("probes")) {
            std::vector<double> xy = pr.get<std::vector<double>>();
            if (xy.size() != 2) throw config_error("each probe must be a [x, y] pair");
            probes.emplace_back(xy[0], xy[1]);
        }
        table = hard_edge_scan(r, sched, N_list, probes, {}, nthreads);
    } else if (type == "interpolate") {
        PerturbationSet p;
        if (s.contains("pi_hat")) p.pi_hat = fvec(s, "pi_hat");
        if (s.contains("theta_hat")) p.theta_hat = fvec(s, "theta_hat");
        int kappa = s.value("kappa", 0), nu = s.value("nu", 0);
        manifest["kappa"] = kappa;
        manifest["nu"] = nu;
        std::string dir = s.at("direction").get<std::string>();
        InterpDirection direction;
        if (dir == "to_I")
            direction = InterpDirection::to_I;
        else if (dir == "to_III")
            direction = InterpDirection::to_III;
        else
            throw config_error("direction must be \"to_I\" or \"to_III\"");
        std::vector<double> tau_list = fvec(s, "tau_list");
        if (assert_trend && tau_list.size() < 3)
            throw config_error("--assert-trend needs at least 3 scan points in tau_list");
        std::vector<double> pxy = fvec(s, "probe");
        if (pxy.size() != 2) throw config_error("probe must be a [x, y] pair");
        table = interpolate_scan(p, kappa, nu, tau_list, direction, {pxy[0], pxy[1]});
    } else {
        throw config_error("scan type must be \"hard_edge\" or \"interpolate\"");
    }

    CsvTable t;
    t.header = {table.scale_name, "x_hardedge",  "y_hardedge", "finite_rescaled",
                "limit_kernel",   "rel_error",   "est_error",  "cell_error"};
    for (const auto& cell : table.cells)
        t.rows.push_back({format_full(cell.scale), format_full(cell.x), format_full(cell.y),
                          format_full(cell.finite), format_full(cell.limit),
                          format_full(cell.rel_error), format_full(cell.est_error),
                          csv_quote(cell.error)});
    std::string out = (fs::path(c.out_dir) / "scan.csv").string();
    write_csv(out, t);
    manifest["outputs"] = {"scan.csv"};
    manifest["rows"] = static_cast<int>(t.rows.size());

    int rc = 0;
    if (assert_trend) {
        TrendReport tr = check_trend(table, trend_rel_max);
        manifest["trend"] = {{"monotone", tr.monotone},
                             {"final_below", tr.final_below},
                             {"worst_final_rel", tr.worst_final_rel}};
        if (!tr.monotone) {
            std::printf("trend check failed: %s\n", tr.detail.c_str());
            rc = 3;
        } else {
            std::printf("trend check passed (worst final rel %.3g)\n", tr.worst_final_rel);
        }
    }
    write_manifest(c, manifest);
    std::printf("wrote %s (%zu rows)\n", out.c_str(), t.rows.size());
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"singular-value statistics of coupled, product and deformed-Wishart ensembles"};
    app.require_subcommand(1);

    Common common;
    bool assert_trend = false;
    const char* names[] = {"validate", "kernel", "sample", "density", "scan"};
    const char* descs[] = {"check ensemble parameter constraints",
                           "tabulate a finite-size or limiting kernel on a grid",
                           "draw Monte Carlo squared-singular-value spectra",
                           "tabulate the one-point density, optionally against samples",
                           "convergence scan of rescaled kernels toward their limits"};
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", common.config_path, "JSON run configuration")->required();
        sub->add_option("--out", common.out_dir, "output directory (default .)");
        sub->add_option("--threads", common.threads, "worker threads (env RMT_KIT_THREADS)");
        if (std::string(names[i]) == "scan")
            sub->add_flag("--assert-trend", assert_trend,
                          "exit 3 unless rel_error decreases monotonically");
    }

    CLI11_PARSE(app, argc, argv);
    std::string cmd = app.get_subcommands().front()->get_name();

    try {
        std::ifstream in(common.config_path, std::ios::binary);
        if (!in) {
            std::fprintf(stderr, "cannot read config %s\n", common.config_path.c_str());
            return 1;
        }
        std::stringstream buf;
        buf << in.rdbuf();
        std::string raw = buf.str();
        json cfg = json::parse(raw);

        fs::create_directories(common.out_dir);
        json manifest;
        manifest["command"] = cmd;
        manifest["config_hash"] = hash_hex(fnv1a(raw));
        manifest["threads"] = resolve_threads(common);

        if (cmd == "validate") return run_validate(cfg, common, manifest);
        if (cmd == "kernel") return run_kernel(cfg, common, manifest);
        if (cmd == "sample") return run_sample(cfg, common, manifest);
        if (cmd == "density") return run_density(cfg, common, manifest);
        return run_scan(cfg, common, assert_trend, manifest);
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config parse error: %s\n", e.what());
        return 1;
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const parameter_error& e) {
        std::fprintf(stderr, "parameter validation failed: %s\n", e.what());
        return 2;
    } catch (const convergence_error& e) {
        std::fprintf(stderr, "did not converge: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    }
}
