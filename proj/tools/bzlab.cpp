// bzlab command-line driver.
//
// Exit codes: 0 success, 2 usage or validation error, 3 numerical failure, 4 I/O error.

#include <CLI11.hpp>

#include <bzlab/cases.hpp>
#include <bzlab/interp.hpp>
#include <bzlab/plot.hpp>
#include <bzlab/reference.hpp>
#include <bzlab/smeared.hpp>
#include <bzlab/smearing.hpp>
#include <bzlab/study.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

using namespace bzlab;

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_numerical = 3;
constexpr int exit_io = 4;

std::string g12(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct ComputeArgs {
    std::string case_id;
    std::string potential;
    double radius = 0.0;
    int dim = 1;
    std::string method = "smear";
    std::string scheme = "gauss";
    std::optional<double> cold_a;
    double sigma = 0.1;
    int L = 64;
    std::optional<double> electrons;
    int p = 1;
    int q = 1;
    double quad_tol = 1e-6;
    std::string csv;
    std::string density;
    std::vector<int> density_shape;
};

int cmd_compute(const ComputeArgs& a)
{
    std::optional<BandModel> model;
    double n_el = 0.0;
    std::string label;
    if (!a.potential.empty()) {
        if (!a.case_id.empty()) {
            throw InvalidArgument("give either --case or --potential, not both");
        }
        if (!(a.radius > 0.0)) {
            throw InvalidArgument("--potential needs a positive --radius");
        }
        model = BandModel::planewave(load_planewave_model(a.potential, a.radius, a.dim));
        if (!a.electrons) {
            throw InvalidArgument("--potential needs --N");
        }
        n_el = *a.electrons;
        label = "planewave";
    } else {
        if (a.case_id.empty()) {
            throw InvalidArgument("--case or --potential is required");
        }
        TestCase tc = make_case(a.case_id);
        n_el = a.electrons.value_or(tc.electrons);
        label = tc.id;
        model = std::move(tc.model);
    }
    if (a.L < 1) {
        throw InvalidArgument("--L must be positive");
    }
    const UniformGrid grid(model->dim(), a.L);
    const SampledBands bands(*model, grid);
    std::ostringstream line;
    std::string row;
    if (a.method == "smear") {
        const SmearingScheme scheme = SmearingScheme::parse(a.scheme, a.cold_a);
        const SmearedResult r = smeared_observables(bands, scheme, a.sigma, n_el);
        line << "fermi=" << g12(r.fermi_level) << " energy=" << g12(r.energy) << " entropy=" << g12(r.entropy)
             << " extrapolated=" << g12(r.extrapolated_energy);
        row = label + ",smear," + scheme.name() + ",0,0," + std::to_string(a.L) + "," + format_double(a.sigma) + "," +
              format_double(n_el) + "," + format_double(r.fermi_level) + "," + format_double(r.energy) + "," +
              format_double(r.entropy) + "," + format_double(r.extrapolated_energy);
        if (!a.density.empty()) {
            std::vector<int> shape = a.density_shape;
            if (shape.empty()) {
                const auto* pw = model->as_planewave();
                const int m = pw ? 2 * static_cast<int>(std::floor(pw->basis_radius())) + 2 : 0;
                shape.assign(static_cast<std::size_t>(model->dim()), std::max(m, 2));
            }
            write_density_csv(smeared_density(*model, scheme, grid, a.sigma, r.fermi_level, shape), a.density);
        }
    } else if (a.method == "interp") {
        if (!a.density.empty()) {
            throw InvalidArgument("--density is only available with --method smear");
        }
        LevelSetQuadConfig cfg;
        cfg.abs_tol = a.quad_tol;
        cfg.validate();
        const InterpResult r = interp_observables(bands, a.p, a.q, n_el, cfg);
        if (!r.budget_met) {
            throw NumericalError("quadrature budget not met (undecided volume " + g12(r.energy_error_bound) + ")");
        }
        line << "fermi=" << g12(r.fermi_level) << " energy=" << g12(r.energy);
        row = label + ",interp,-," + std::to_string(a.p) + "," + std::to_string(a.q) + "," + std::to_string(a.L) +
              ",0," + format_double(n_el) + "," + format_double(r.fermi_level) + "," + format_double(r.energy) + ",,";
    } else {
        throw InvalidArgument("--method must be smear or interp");
    }
    std::cout << line.str() << '\n';
    if (!a.csv.empty()) {
        const bool fresh = !std::filesystem::exists(a.csv);
        std::ofstream out(a.csv, std::ios::app);
        if (!out) {
            throw IoError("cannot write " + a.csv);
        }
        if (fresh) {
            out << "case,method,scheme,p,q,L,sigma,N,fermi,energy,entropy,extrapolated\n";
        }
        out << row << '\n';
    }
    return exit_ok;
}

std::vector<ReferenceValues> load_refs_if_present(const std::string& path)
{
    if (!std::filesystem::exists(path)) {
        return {};
    }
    return read_refs(path);
}

/// Replaces or adds rows, keeping the file sorted by (case, N).
void store_refs(std::vector<ReferenceValues> refs, const std::vector<ReferenceValues>& fresh, const std::string& path)
{
    for (const auto& f : fresh) {
        std::erase_if(refs, [&](const auto& r) { return r.case_id == f.case_id && std::abs(r.electrons - f.electrons) <= 1e-12; });
        refs.push_back(f);
    }
    std::sort(refs.begin(), refs.end(),
              [](const auto& a, const auto& b) { return std::tie(a.case_id, a.electrons) < std::tie(b.case_id, b.electrons); });
    write_refs(refs, path);
}

int cmd_make_refs(const std::vector<std::string>& cases, std::optional<double> tol, const std::string& path)
{
    std::vector<ReferenceValues> fresh;
    for (const auto& c : cases) {
        const ReferenceValues r = compute_reference(c, tol);
        std::cout << r.case_id << " N=" << g12(r.electrons) << " fermi=" << g12(r.fermi) << " (+-" << g12(r.fermi_bound)
                  << ") energy=" << g12(r.energy) << " (+-" << g12(r.energy_bound) << ")\n";
        fresh.push_back(r);
    }
    store_refs(load_refs_if_present(path), fresh, path);
    std::cout << "wrote " << path << '\n';
    return exit_ok;
}

class MissingReference : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

void print_summary(const StudyConfig& cfg, const std::vector<StudyRecord>& recs)
{
    char buf[160];
    const auto series = split_series(recs);
    if (cfg.method == "interp") {
        for (const auto& s : series) {
            const auto& r = s.front();
            if (r.observable == "fermi" && r.p != cfg.p_list.front()) {
                continue;
            }
            const SlopeFit f = fit_slope(s, SlopeAxis::L, cfg.slope_window);
            const std::string tag = r.observable == "fermi" ? "fermi q=" + std::to_string(r.q)
                                                            : r.observable + " p=" + std::to_string(r.p) +
                                                                  " q=" + std::to_string(r.q);
            if (f.fittable) {
                std::snprintf(buf, sizeof buf, "%s slope=%.3f", tag.c_str(), f.slope);
            } else {
                std::snprintf(buf, sizeof buf, "%s slope=not-fittable", tag.c_str());
            }
            std::cout << buf << '\n';
        }
        return;
    }
    std::cout << "scheme observable sigma L_max abs_error self_slope\n";
    for (const auto& s : series) {
        const auto& last = s.back();
        const SlopeFit f = fit_slope(s, SlopeAxis::L, cfg.slope_window, ErrorColumn::Self);
        std::snprintf(buf, sizeof buf, "%s %s %.6g %d %.3e %s", last.scheme.c_str(), last.observable.c_str(),
                      last.sigma, last.L, last.abs_error, f.fittable ? g12(f.slope).c_str() : "not-fittable");
        std::cout << buf << '\n';
    }
    // sigma-slopes of the limiting errors
    std::map<std::pair<std::string, std::string>, std::vector<StudyRecord>> limit;
    for (const auto& s : series) {
        limit[{s.back().scheme, s.back().observable}].push_back(s.back());
    }
    for (const auto& [key, rs] : limit) {
        const SlopeFit f = fit_slope(rs, SlopeAxis::Sigma, static_cast<int>(rs.size()));
        if (f.fittable) {
            std::snprintf(buf, sizeof buf, "%s %s sigma_slope=%.3f", key.first.c_str(), key.second.c_str(), f.slope);
        } else {
            std::snprintf(buf, sizeof buf, "%s %s sigma_slope=not-fittable", key.first.c_str(), key.second.c_str());
        }
        std::cout << buf << '\n';
    }
}

int cmd_sweep(const std::string& config_path, std::string out, bool make_refs, bool timing, bool quiet)
{
    const StudyConfig cfg = read_config(config_path);
    const std::string refs_path = default_refs_path();
    auto refs = load_refs_if_present(refs_path);
    std::optional<ReferenceValues> ref = find_reference(refs, cfg.case_id, cfg.n_electrons());
    if (ref && cfg.ref_tol && ref->tol > *cfg.ref_tol) {
        ref.reset();
    }
    if (!ref) {
        if (!make_refs) {
            throw MissingReference("no reference for " + cfg.case_id + " (N=" + g12(cfg.n_electrons()) + ") in " +
                                   refs_path + "; run `bzlab make-refs` or pass --make-refs");
        }
        const TestCase tc = make_case(cfg.case_id);
        ref = compute_reference(tc.model, tc.id, cfg.n_electrons(), cfg.ref_tol.value_or(default_reference_tol(tc.id)));
        store_refs(refs, {*ref}, refs_path);
    }
    if (out.empty()) {
        out = cfg.output.empty() ? "sweep.csv" : cfg.output;
    }
    const auto recs = run_sweep(cfg, *ref, SweepOptions{timing});
    write_records(recs, out);
    if (!quiet) {
        print_summary(cfg, recs);
    }
    std::cout << "wrote " << recs.size() << " records to " << out << '\n';
    return exit_ok;
}

int cmd_plot(const std::string& csv, PlotSpec spec, const std::vector<std::string>& filters, const std::string& out)
{
    for (const auto& f : filters) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument("--filter expects column=value");
        }
        spec.filters[f.substr(0, eq)] = f.substr(eq + 1);
    }
    const auto recs = read_records(csv);
    const PlotData data = collect_series(recs, spec);
    if (data.dropped > 0) {
        std::cerr << "warning: dropped " << data.dropped << " non-positive point(s)\n";
    }
    std::ostringstream svg;
    write_svg(data, spec, svg);
    std::ofstream file(out, std::ios::trunc);
    if (!file || !(file << svg.str())) {
        throw IoError("cannot write " + out);
    }
    return exit_ok;
}

int cmd_validate_schemes(std::optional<double> cold_a)
{
    bool ok = true;
    std::printf("%-6s %8s %8s %12s %12s %12s %12s %12s\n", "scheme", "declared", "verified", "M0-1", "M1", "M2", "M3",
                "M_{p+1}");
    for (const char* name : {"fd", "gauss", "mp0", "mp1", "mp2", "mp3", "cold"}) {
        const OrderReport r = order_report(SmearingScheme::parse(name, cold_a));
        const int next = std::min(r.declared + 1, 9);
        std::printf("%-6s %8d %8d %12.3e %12.3e %12.3e %12.3e %12.3e %s\n", name, r.declared, r.verified,
                    r.moments[0] - 1.0, r.moments[1], r.moments[2], r.moments[3], r.moments[next],
                    r.consistent() ? "ok" : "MISMATCH");
        ok = ok && r.consistent();
    }
    if (!ok) {
        std::cerr << "error: declared and verified orders differ\n";
        return exit_numerical;
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Brillouin-zone integration lab: smearing and interpolation convergence studies"};
    app.require_subcommand(1);
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    ComputeArgs ca;
    auto* compute = app.add_subcommand("compute", "compute the Fermi level and energy for one configuration");
    compute->add_option("--case", ca.case_id, "case1, case2 or graphene");
    compute->add_option("--potential", ca.potential, "plane-wave potential file (lines: K1..Kd re im)");
    compute->add_option("--radius", ca.radius, "plane-wave basis radius");
    compute->add_option("--dim", ca.dim, "dimension of the potential")->check(CLI::Range(1, 3));
    compute->add_option("--method", ca.method, "smear or interp");
    compute->add_option("--scheme", ca.scheme, "fd, gauss, mp0..mp3 or cold");
    compute->add_option("--cold-a", ca.cold_a, "cold smearing parameter");
    compute->add_option("--sigma", ca.sigma, "smearing width");
    compute->add_option("--L", ca.L, "grid points per axis");
    compute->add_option("--N", ca.electrons, "electron pairs per cell");
    compute->add_option("--p", ca.p, "spline order of the energy integrand")->check(CLI::IsMember({1, 2}));
    compute->add_option("--q", ca.q, "spline order of the occupied region")->check(CLI::IsMember({1, 2}));
    compute->add_option("--quad-tol", ca.quad_tol, "level-set quadrature tolerance");
    compute->add_option("--csv", ca.csv, "append a result row to this CSV file");
    compute->add_option("--density", ca.density, "write the real-space density CSV (plane-wave models)");
    compute->add_option("--density-shape", ca.density_shape, "real-space points per axis")->delimiter(',');

    std::string config;
    std::string sweep_out;
    bool sweep_make_refs = false;
    bool timing = false;
    bool quiet = false;
    auto* sweep = app.add_subcommand("sweep", "run a convergence sweep from a config file");
    sweep->add_option("config", config, "config file (key = value)")->required();
    sweep->add_option("--out", sweep_out, "records CSV path");
    sweep->add_flag("--make-refs", sweep_make_refs, "compute missing reference values");
    sweep->add_flag("--timing", timing, "record wall times (output then differs between runs)");
    sweep->add_flag("--quiet", quiet, "skip the slope summary");

    std::string plot_csv;
    std::string plot_out = "plot.svg";
    PlotSpec spec;
    std::vector<std::string> filters;
    std::string groups;
    bool linear = false;
    auto* plot = app.add_subcommand("plot", "log-log SVG plot of a records CSV");
    plot->add_option("csv", plot_csv, "records CSV")->required();
    plot->add_option("--x", spec.x_axis, "L or sigma")->check(CLI::IsMember({"L", "sigma"}));
    plot->add_option("--y", spec.y_column, "abs_error, self_error or value");
    plot->add_option("--group", groups, "comma-separated series columns");
    plot->add_option("--filter", filters, "column=value (repeatable)");
    plot->add_option("--title", spec.title, "plot title");
    plot->add_flag("--linear", linear, "linear axes");
    plot->add_option("--out", plot_out, "SVG path");

    std::vector<std::string> ref_cases = case_ids();
    std::optional<double> ref_tol;
    std::string refs_path;
    auto* mkrefs = app.add_subcommand("make-refs", "compute reference values into refs.csv");
    mkrefs->add_option("--cases", ref_cases, "cases")->delimiter(',');
    mkrefs->add_option("--tol", ref_tol, "reference tolerance (default per case)");
    mkrefs->add_option("--refs", refs_path, "output path (default $BZLAB_REFS or refs.csv)");

    std::optional<double> validate_cold_a;
    auto* validate = app.add_subcommand("validate-schemes", "check the moment orders of the smearing schemes");
    validate->add_option("--cold-a", validate_cold_a, "cold smearing parameter");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }
    set_thread_count(threads);

    try {
        if (*compute) {
            return cmd_compute(ca);
        }
        if (*sweep) {
            return cmd_sweep(config, sweep_out, sweep_make_refs, timing, quiet);
        }
        if (*plot) {
            if (!groups.empty()) {
                spec.group_by = detail::split_list(groups);
            }
            spec.log_log = !linear;
            return cmd_plot(plot_csv, spec, filters, plot_out);
        }
        if (*mkrefs) {
            return cmd_make_refs(ref_cases, ref_tol, refs_path.empty() ? default_refs_path() : refs_path);
        }
        if (*validate) {
            return cmd_validate_schemes(validate_cold_a);
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const UnsupportedOperation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    }
    return exit_usage;
}
