#include "qgraph/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "qgraph/boundary_limits.hpp"
#include "qgraph/coupling.hpp"
#include "qgraph/discrete_oracle.hpp"
#include "qgraph/interface_conditions.hpp"
#include "qgraph/io.hpp"
#include "qgraph/point_spectrum.hpp"

namespace qgraph {

namespace {

struct Options {
    std::string graph;
    std::string interface = "standard";
    int n = 0;
    std::string grid;
    std::string z_list;
    double eps = 0.0;
    double tol = 1e-8;
    std::uint64_t seed = 1;
    std::string out;
    std::string window = "0.5:9.5";
    int points_per_edge = 2000;
    double cluster_radius = 1e-3;
    std::string predictions;
    std::string candidates;
    std::string dump;
    int k = 1;
};

int exit_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::io: return exit_io;
    case ErrorCode::theorem_violation:
    case ErrorCode::internal:
    case ErrorCode::solver:
    case ErrorCode::randomization: return exit_theorem;
    default: return exit_validation;
    }
}

std::string format_matrix(const ComplexMatrix& m) {
    if (m.size() == 0) return fmt::format("({}x{} empty)", m.rows(), m.cols());
    std::ostringstream s;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        s << "  [";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const Complex v = m(i, j);
            const double re = std::abs(v.real()) < 1e-13 ? 0.0 : v.real();
            const double im = std::abs(v.imag()) < 1e-13 ? 0.0 : v.imag();
            if (j > 0) s << ", ";
            if (im == 0.0) {
                s << fmt::format("{:.10g}", re);
            } else {
                s << fmt::format("{:.10g}{:+.10g}i", re, im);
            }
        }
        s << "]\n";
    }
    return s.str();
}

// Writes to --out when given, otherwise to the standard stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : target_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw Error(ErrorCode::io, fmt::format("cannot write '{}'", path));
            target_ = &file_;
        }
    }
    std::ostream& stream() { return *target_; }

private:
    std::ofstream file_;
    std::ostream* target_;
};

struct Loaded {
    StarGraph graph;
    InterfaceCondition ic;
};

StarGraph require_graph(const Options& o) {
    if (o.graph.empty()) throw Error(ErrorCode::input, "--graph is required for this command");
    return load_graph(o.graph);
}

InterfaceCondition load_ic(const Options& o, int n_default) {
    const int n = o.n > 0 ? o.n : n_default;
    if (is_interface_preset(o.interface) && n <= 0) {
        throw Error(ErrorCode::input, "a preset interface needs --n or --graph");
    }
    const auto [a, b] = load_interface_matrices(o.interface, n);
    return validate(a, b, RankTolerance(o.tol));
}

Loaded load_both(const Options& o) {
    Loaded l{require_graph(o), {}};
    l.ic = load_ic(o, l.graph.n());
    if (l.ic.n() != l.graph.n()) {
        throw Error(ErrorCode::input,
                    fmt::format("interface is {}x{} but the graph has {} edges", l.ic.n(), l.ic.n(), l.graph.n()));
    }
    return l;
}

int cmd_check(const Options& o, std::ostream& out) {
    const int n_default = o.graph.empty() ? 0 : load_graph(o.graph).n();
    const int n = o.n > 0 ? o.n : n_default;
    if (is_interface_preset(o.interface) && n <= 0) {
        throw Error(ErrorCode::input, "a preset interface needs --n or --graph");
    }
    const RankTolerance tol(o.tol);
    const auto [a, b] = load_interface_matrices(o.interface, n);
    InterfaceCondition ic;
    try {
        ic = validate(a, b, tol);
    } catch (const Error& e) {
        out << fmt::format("D3: fail ({})\n", e.what());
        return exit_validation;
    }
    out << fmt::format("D3: ok (residual {:.3e})\n", ic.d3_residual());
    out << fmt::format("n = {}\nr = {}\n", ic.n(), ic.r());
    const bool d4 = satisfies_d4(ic, tol);
    out << fmt::format("D4: {}\n", d4 ? "ok" : "fail");

    const JUnitaryCompletion w = complete_j_unitary(ic);
    out << fmt::format("completion: |w*Jw - J| = {:.3e}, |wJw* - J| = {:.3e}, relations {:.3e}\n",
                       w.residual_star_left(), w.residual_star_right(), w.relation_residual());
    if (!d4) {
        if (!o.out.empty()) {
            Sink sink(o.out, out);
            sink.stream() << interface_to_json(ic.a(), ic.b()).dump(2) << "\n";
        }
        return exit_validation;
    }
    const NormalForm nf = to_normal_form(ic, tol);
    std::vector<int> one_based(nf.permutation);
    for (int& v : one_based) ++v;
    out << fmt::format("normal form permutation: {}\n", fmt::join(one_based, " "));
    out << "A1 =\n" << format_matrix(nf.a1);
    out << "A2 =\n" << format_matrix(nf.a2);
    out << "Q =\n" << format_matrix(nf.q);
    if (!o.out.empty()) {
        Sink sink(o.out, out);
        sink.stream() << interface_to_json(ic.a(), ic.b()).dump(2) << "\n";
    }
    return exit_ok;
}

std::vector<Complex> z_points(const Options& o) {
    std::vector<Complex> zs;
    if (!o.z_list.empty()) {
        // "re,im;re,im;..."
        std::stringstream ss(o.z_list);
        std::string item;
        while (std::getline(ss, item, ';')) {
            const auto comma = item.find(',');
            if (comma == std::string::npos) throw Error(ErrorCode::input, fmt::format("bad z '{}'", item));
            try {
                zs.emplace_back(std::stod(item.substr(0, comma)), std::stod(item.substr(comma + 1)));
            } catch (const std::exception&) {
                throw Error(ErrorCode::input, fmt::format("bad z '{}'", item));
            }
        }
    }
    if (!o.grid.empty()) {
        const double eps = o.eps > 0.0 ? o.eps : 1e-2;
        for (double x : parse_grid(o.grid)) zs.emplace_back(x, eps);
    }
    if (zs.empty()) throw Error(ErrorCode::input, "weyl needs --z or --grid");
    return zs;
}

int cmd_weyl(const Options& o, std::ostream& out) {
    const Loaded l = load_both(o);
    const Coupling coupling(l.graph, l.ic, RankTolerance(o.tol));
    std::vector<CoupledSample> samples;
    for (const Complex z : z_points(o)) samples.push_back(coupling.eval(z));
    Sink sink(o.out, out);
    write_samples_csv(sink.stream(), samples);
    return exit_ok;
}

int cmd_point(const Options& o, std::ostream& out, const std::vector<double>& xs) {
    const Loaded l = load_both(o);
    PointOptions po;
    po.tol = RankTolerance(o.tol);
    std::vector<GammaProblem> rows;
    for (double x : xs) rows.push_back(point_multiplicity(l.graph, l.ic, x, po));
    write_point_table(out, rows);
    return exit_ok;
}

int cmd_scan(const Options& o, std::ostream& out) {
    if (o.grid.empty()) throw Error(ErrorCode::input, "scan needs --grid");
    const Loaded l = load_both(o);
    const Coupling coupling(l.graph, l.ic, RankTolerance(o.tol));
    const EpsSchedule sched = EpsSchedule::down_to(o.eps > 0.0 ? o.eps : 1e-6);
    const MultiplicityProfile profile = scan(coupling, parse_grid(o.grid), sched);
    Sink sink(o.out, out);
    write_profile_csv(sink.stream(), profile);
    int status = profile.any_violation() ? exit_theorem : exit_ok;
    if (!o.candidates.empty()) {
        sink.stream() << "\n";
        const int point_status = cmd_point(o, sink.stream(), parse_grid(o.candidates));
        status = std::max(status, point_status);
    }
    return status;
}

std::pair<double, double> parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::input, "--window must be lo:hi");
    try {
        return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorCode::input, fmt::format("bad window '{}'", text));
    }
}

int cmd_oracle(const Options& o, std::ostream& out, std::ostream& err) {
    const Loaded l = load_both(o);
    GridSpec grid;
    grid.points_per_edge = o.points_per_edge;
    const auto [lo, hi] = parse_window(o.window);
    const AssembledOperator op = assemble(l.graph, l.ic, grid);
    if (!o.dump.empty()) {
        std::ofstream bin(o.dump, std::ios::binary);
        if (!bin) throw Error(ErrorCode::io, fmt::format("cannot write '{}'", o.dump));
        write_dense_binary(bin, op);
    }
    SpectrumReport report;
    report.window_lo = lo;
    report.window_hi = hi;
    if (hi > lo) report = eig_clusters(op, lo, hi, o.cluster_radius);
    {
        Sink sink(o.out, out);
        write_clusters_csv(sink.stream(), report);
    }
    if (o.predictions.empty()) return exit_ok;

    const auto j = read_json_file(o.predictions);
    std::vector<double> xs;
    try {
        xs = j.at("x").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::input, fmt::format("predictions file needs an \"x\" array: {}", e.what()));
    }
    constexpr double kMatchRadius = 2e-3;
    int status = exit_ok;
    for (double x : xs) {
        const GammaProblem g = point_multiplicity(l.graph, l.ic, x);
        int observed = 0;
        for (const auto& c : report.clusters) {
            if (std::abs(c.center - x) <= kMatchRadius) observed += c.multiplicity;
        }
        if (observed != g.np_ab) {
            err << fmt::format("mismatch at x = {}: predicted multiplicity {}, oracle {}\n", x, g.np_ab, observed);
            status = exit_theorem;
        }
    }
    return status;
}

int cmd_reduce(const Options& o, std::ostream& out) {
    const int n_default = o.graph.empty() ? 0 : load_graph(o.graph).n();
    const InterfaceCondition ic = load_ic(o, n_default);
    const RankTolerance tol(o.tol);
    const InterfaceCondition reduced = reduce_rank(ic, o.k, o.seed, tol);
    const int codim = coupling_codim(ic, reduced, tol);
    auto j = interface_to_json(reduced.a(), reduced.b());
    j["r"] = reduced.r();
    j["codim"] = codim;
    j["d4"] = satisfies_d4(reduced, tol);
    Sink sink(o.out, out);
    sink.stream() << j.dump(2) << "\n";
    if (reduced.r() != o.k || codim != ic.r() - o.k) return exit_theorem;
    return exit_ok;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    try {
        if (std::count(text.begin(), text.end(), ':') == 2) {
            const auto c1 = text.find(':');
            const auto c2 = text.find(':', c1 + 1);
            const double a = std::stod(text.substr(0, c1));
            const double b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
            const int count = std::stoi(text.substr(c2 + 1));
            if (count < 1) throw Error(ErrorCode::input, "grid needs at least one point");
            for (int i = 0; i < count; ++i) out.push_back(count == 1 ? a : a + (b - a) * i / (count - 1));
            return out;
        }
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw Error(ErrorCode::input, fmt::format("cannot parse grid '{}'", text));
    }
    if (out.empty()) throw Error(ErrorCode::input, "empty grid");
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectral multiplicities of coupled Schroedinger operators on star graphs", "qgraph"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "help for every subcommand");
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--graph", o.graph, "graph JSON file");
        sub->add_option("--interface", o.interface, "interface JSON file or preset (standard, decoupled, antidecoupled)");
        sub->add_option("--n", o.n, "size for presets when no graph is given");
        sub->add_option("--tol", o.tol, "relative rank tolerance")->check(CLI::Range(1e-15, 0.5));
        sub->add_option("--out", o.out, "output file (default stdout)");
    };
    auto* check = app.add_subcommand("check", "validate an interface condition and print its normal form");
    common(check);
    auto* weyl = app.add_subcommand("weyl", "dump M_w on a list of complex points");
    common(weyl);
    weyl->add_option("--z", o.z_list, "points as re,im;re,im;...");
    weyl->add_option("--grid", o.grid, "real parts, a:b:n or comma list");
    weyl->add_option("--eps", o.eps, "imaginary part used with --grid");
    auto* scan_cmd = app.add_subcommand("scan", "boundary-limit multiplicity profile");
    common(scan_cmd);
    scan_cmd->add_option("--grid", o.grid, "x values, a:b:n or comma list");
    scan_cmd->add_option("--eps", o.eps, "smallest eps of the schedule (default 1e-6)");
    scan_cmd->add_option("--candidates", o.candidates, "x values for the point-spectrum table");
    auto* point = app.add_subcommand("point", "eigenvalue multiplicities at real points");
    common(point);
    point->add_option("--grid", o.grid, "x values")->required();
    auto* oracle = app.add_subcommand("oracle", "finite-difference eigenvalue clusters");
    common(oracle);
    oracle->add_option("--window", o.window, "lo:hi");
    oracle->add_option("--points-per-edge", o.points_per_edge, "grid points per edge")->check(CLI::Range(16, 1000000));
    oracle->add_option("--radius", o.cluster_radius, "cluster radius");
    oracle->add_option("--predictions", o.predictions, "JSON {\"x\": [...]} to compare against");
    oracle->add_option("--dump", o.dump, "write the dense matrix as binary");
    auto* reduce = app.add_subcommand("reduce", "lower rank B while keeping (D4)");
    common(reduce);
    reduce->add_option("--k", o.k, "target rank")->required();
    reduce->add_option("--seed", o.seed, "random seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return exit_validation;
    }

    try {
        if (check->parsed()) return cmd_check(o, out);
        if (weyl->parsed()) return cmd_weyl(o, out);
        if (scan_cmd->parsed()) return cmd_scan(o, out);
        if (point->parsed()) return cmd_point(o, out, parse_grid(o.grid));
        if (oracle->parsed()) return cmd_oracle(o, out, err);
        if (reduce->parsed()) return cmd_reduce(o, out);
    } catch (const Error& e) {
        err << fmt::format("error [{}]: {}", to_string(e.code()), e.what());
        if (e.edge_index()) err << fmt::format(" (edge {})", *e.edge_index() + 1);
        err << "\n";
        return exit_for(e.code());
    } catch (const std::invalid_argument&) {
        // Malformed numbers in --z or --window.
        err << "error [input]: cannot parse a number in the arguments\n";
        return exit_validation;
    } catch (const std::out_of_range&) {
        err << "error [input]: number out of range in the arguments\n";
        return exit_validation;
    }
    return exit_validation;
}

}  // namespace qgraph
