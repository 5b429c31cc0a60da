#include "selfsim/cli_app.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "selfsim/spec_io.hpp"
#include "selfsim/transversality.hpp"

namespace selfsim::cli {

namespace {

using nlohmann::ordered_json;

struct LoadedSpec {
    ParsedSpec spec;
    std::string digest;
};

LoadedSpec load_with_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError("cannot open spec file: " + path);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes.str());
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("cannot parse " + path + ": " + e.what());
    }
    return LoadedSpec{parse_spec(doc), digest_hex(bytes.str())};
}

ordered_json base_report(const std::vector<std::string>& args,
                         const std::string& digest) {
    ordered_json report;
    report["command"] = args;
    report["input_digest"] = digest;
    report["parameters"] = ordered_json::object();
    report["results"] = ordered_json::object();
    return report;
}

void write_report(const std::string& path, const ordered_json& report) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SpecError("cannot write report file: " + path);
    out << report.dump(2) << "\n";
}

const Multizipper& need_zipper(const ParsedSpec& spec) {
    if (!spec.zipper) {
        throw ValidationError(
            "this command needs a multizipper spec (missing 'nodes')");
    }
    return *spec.zipper;
}

int resolve_vertex(const ParsedSpec& spec, const std::string& name) {
    if (name.empty()) return 0;
    return spec.vertex_index(name);
}

int cmd_dimension(const std::vector<std::string>& args,
                  const std::string& spec_path, const std::string& json_path,
                  std::ostream& out) {
    const LoadedSpec loaded = load_with_digest(spec_path);
    ordered_json report = base_report(args, loaded.digest);

    const DimensionResult dim = similarity_dimension(loaded.spec.system);
    const double r1 = spectral_radius(ratio_matrix(loaded.spec.system, 1.0));

    out << "similarity dimension s1 = " << format_number(dim.s1) << "\n";
    out << "Phi(s1) = " << format_number(dim.phi_at_s1) << "  bracket ["
        << format_number(dim.bracket_lo) << ", " << format_number(dim.bracket_hi)
        << "]  iterations " << dim.iterations << "\n";
    out << "spectral radius of B(1) = " << format_number(r1) << "\n";
    report["results"]["s1"] = dim.s1;
    report["results"]["phi_at_s1"] = dim.phi_at_s1;
    report["results"]["bracket"] = {dim.bracket_lo, dim.bracket_hi};
    report["results"]["iterations"] = dim.iterations;
    report["results"]["spectral_radius_B1"] = r1;

    if (loaded.spec.zipper) {
        const Eigen::VectorXd lengths = loaded.spec.zipper->end_to_end_vector();
        const double lower = collatz_wielandt_lower(
            ratio_matrix(loaded.spec.system, 1.0).entries, lengths);
        out << "collatz-wielandt lower bound at node lengths = "
            << format_number(lower) << "\n";
        report["results"]["collatz_wielandt_lower"] = lower;
    }
    write_report(json_path, report);
    return kExitOk;
}

int cmd_render(const std::vector<std::string>& args,
               const std::string& spec_path, const std::string& vertex,
               int depth, const std::string& out_path,
               const std::string& json_path, std::ostream& out) {
    const LoadedSpec loaded = load_with_digest(spec_path);
    const int u = resolve_vertex(loaded.spec, vertex);
    const bool svg = out_path.size() > 4 &&
                     out_path.substr(out_path.size() - 4) == ".svg";
    if (svg && loaded.spec.system.ambient_dim() != 2) {
        throw ValidationError("SVG output needs ambient dimension 2");
    }

    std::vector<Vector> points;
    std::vector<Path> addresses;
    if (loaded.spec.zipper) {
        OrderedArcSample sample = sample_arc(*loaded.spec.zipper, u, depth);
        points = std::move(sample.points);
        addresses = std::move(sample.addresses);
    } else {
        require_valid(loaded.spec.system);
        AttractorApproximation approx =
            approximate_attractor(loaded.spec.system, u, depth);
        points = std::move(approx.points);
        addresses = std::move(approx.addresses);
    }

    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw SpecError("cannot write output file: " + out_path);
    if (svg) {
        write_svg(file, points);
    } else {
        write_csv(file, points, addresses, loaded.spec.edge_names);
    }
    out << "wrote " << points.size() << " points to " << out_path << "\n";

    ordered_json report = base_report(args, loaded.digest);
    report["parameters"]["vertex"] =
        loaded.spec.vertex_names[static_cast<std::size_t>(u)];
    report["parameters"]["depth"] = depth;
    report["results"]["points"] = points.size();
    report["results"]["output"] = out_path;
    write_report(json_path, report);
    return kExitOk;
}

int cmd_verify(const std::vector<std::string>& args,
               const std::string& spec_path, const std::string& json_path,
               std::ostream& out) {
    const LoadedSpec loaded = load_with_digest(spec_path);
    const Multizipper& zipper = need_zipper(loaded.spec);
    ordered_json report = base_report(args, loaded.digest);

    const ZipperReport axioms = validate_multizipper(zipper);
    out << "system: " << (axioms.system_report.accepted ? "PASS" : "FAIL") << "\n";
    out << "MZ1: " << (axioms.mz1 ? "PASS" : "FAIL") << "\n";
    out << "MZ2: " << (axioms.mz2 ? "PASS" : "FAIL") << "\n";
    out << "MZ3: " << (axioms.mz3 ? "PASS" : "FAIL") << "\n";
    report["results"]["mz1"] = axioms.mz1;
    report["results"]["mz2"] = axioms.mz2;
    report["results"]["mz3"] = axioms.mz3;
    report["results"]["system_accepted"] = axioms.system_report.accepted;
    if (!axioms.accepted) {
        for (const AxiomViolation& v : axioms.violations) {
            out << "  " << v.axiom << " violation: " << v.detail << "\n";
            report["results"]["violations"].push_back(v.detail);
        }
        for (const std::string& p : axioms.system_report.problems) {
            out << "  system problem: " << p << "\n";
            report["results"]["violations"].push_back(p);
        }
        write_report(json_path, report);
        return kExitValidation;
    }

    bool lengths_ok = true;
    for (int u = 0; u < zipper.system().graph().vertex_count(); ++u) {
        const auto [length, weighted] = polyline_length_identity(zipper, u);
        const bool ok = std::abs(length - weighted) <= 1e-10;
        lengths_ok = lengths_ok && ok;
        out << "length identity (" << loaded.spec.vertex_names[static_cast<std::size_t>(u)]
            << "): " << format_number(length) << " vs "
            << format_number(weighted) << " " << (ok ? "PASS" : "FAIL") << "\n";
    }
    report["results"]["length_identity"] = lengths_ok;

    const Theorem3Verdict verdict = theorem3_verdict(zipper);
    out << "similarity dimension s1 = " << format_number(verdict.dimension.s1)
        << "\n";
    out << "theorem check: " << (verdict.pass ? "PASS" : "FAIL") << " ("
        << verdict.detail << ")\n";
    report["results"]["s1"] = verdict.dimension.s1;
    report["results"]["dimension_is_one"] = verdict.dimension_is_one;
    report["results"]["theorem_pass"] = verdict.pass;
    report["results"]["detail"] = verdict.detail;
    if (!verdict.dimension_is_one) {
        report["results"]["witness"] = verdict.witness;
        report["results"]["witness_refinement"] = verdict.witness_refinement;
    }
    write_report(json_path, report);
    if (!lengths_ok) return kExitValidation;
    return verdict.pass ? kExitOk : kExitTheorem;
}

int cmd_scan(const std::vector<std::string>& args, const std::string& spec_path,
             const std::string& vertex, int depth, int grid_count, int dyadic,
             const std::string& json_path, std::ostream& out) {
    const LoadedSpec loaded = load_with_digest(spec_path);
    const Multizipper& zipper = need_zipper(loaded.spec);
    const int u = resolve_vertex(loaded.spec, vertex);

    const OrderedArcSample sample = sample_arc(zipper, u, depth);
    const std::vector<Vector> grid =
        normal_grid(zipper.system().ambient_dim(), grid_count);
    const double tol = default_transversality_tol(sample);

    const DirectionScanReport directions = direction_scan(sample, grid);
    const DensityReport density =
        transverse_point_report(sample, grid, dyadic, tol);

    out << "sample: vertex "
        << loaded.spec.vertex_names[static_cast<std::size_t>(u)] << ", depth "
        << depth << ", " << sample.points.size() << " points\n";
    out << "grid: " << grid_count << " directions; tolerance "
        << format_number(tol) << "\n";
    out << "monotone projection directions: "
        << directions.monotone_ids.size() << " of " << grid_count << "\n";
    out << "transverse sample points: " << density.transverse_indices.size()
        << " of " << sample.points.size() - 2 << " interior\n";
    out << "nowhere-dense verdict at depth " << dyadic << ": "
        << (density.verdict ? "true" : "false") << "\n";

    ordered_json report = base_report(args, loaded.digest);
    report["parameters"]["vertex"] =
        loaded.spec.vertex_names[static_cast<std::size_t>(u)];
    report["parameters"]["depth"] = depth;
    report["parameters"]["grid"] = grid_count;
    report["parameters"]["dyadic_depth"] = dyadic;
    report["parameters"]["tolerance"] = tol;
    report["results"]["monotone_directions"] = directions.monotone_ids.size();
    report["results"]["transverse_points"] = density.transverse_indices.size();
    report["results"]["interior_points"] = sample.points.size() - 2;
    report["results"]["nowhere_dense"] = density.verdict;
    ordered_json table = ordered_json::array();
    for (const DyadicCell& cell : density.table) {
        ordered_json row;
        row["depth"] = cell.depth;
        row["cell"] = cell.cell;
        row["has_nontransverse"] = cell.has_nontransverse;
        table.push_back(std::move(row));
    }
    report["results"]["dyadic_table"] = std::move(table);
    write_report(json_path, report);
    return kExitOk;
}

int cmd_project(const std::vector<std::string>& args,
                const std::string& spec_path, const std::string& normal_arg,
                const std::string& out_path, const std::string& json_path,
                std::ostream& out) {
    const LoadedSpec loaded = load_with_digest(spec_path);
    const Multizipper& zipper = need_zipper(loaded.spec);

    Vector normal(2);
    {
        std::istringstream stream(normal_arg);
        std::string part;
        std::vector<double> coords;
        while (std::getline(stream, part, ',')) {
            coords.push_back(std::stod(part));
        }
        if (coords.size() != 2) {
            throw SpecError("--normal expects two comma-separated coordinates");
        }
        normal << coords[0], coords[1];
    }

    const ProjectionResult projection = project_zipper(zipper, normal);
    const DimensionResult quotient_dim =
        similarity_dimension(projection.quotient.system());

    ParsedSpec quotient_spec{projection.quotient.system(), projection.quotient,
                             loaded.spec.vertex_names, loaded.spec.edge_names};
    const ordered_json quotient_doc = emit_spec(quotient_spec);

    out << "projection axis = (" << format_number(projection.axis(0)) << ", "
        << format_number(projection.axis(1)) << ")\n";
    out << "conjugacy residual = " << format_number(projection.residual) << "\n";
    out << "quotient similarity dimension = " << format_number(quotient_dim.s1)
        << "\n";
    if (out_path.empty()) {
        out << quotient_doc.dump(2) << "\n";
    } else {
        std::ofstream file(out_path, std::ios::binary);
        if (!file) throw SpecError("cannot write output file: " + out_path);
        file << quotient_doc.dump(2) << "\n";
        out << "wrote quotient zipper spec to " << out_path << "\n";
    }

    ordered_json report = base_report(args, loaded.digest);
    report["parameters"]["normal"] = {normal(0), normal(1)};
    report["results"]["residual"] = projection.residual;
    report["results"]["quotient_s1"] = quotient_dim.s1;
    report["results"]["quotient_spec"] = quotient_doc;
    write_report(json_path, report);
    return kExitOk;
}

int cmd_catalog(const std::vector<std::string>& args,
                const std::string& out_dir, const std::string& json_path,
                std::ostream& out) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    ordered_json report = base_report(args, "");
    report["parameters"]["out_dir"] = out_dir;
    ordered_json names = ordered_json::array();
    for (const CatalogEntry& entry : catalog()) {
        const fs::path path = fs::path(out_dir) / (entry.name + ".json");
        std::ofstream file(path, std::ios::binary);
        if (!file) throw SpecError("cannot write " + path.string());
        file << entry.spec.dump(2) << "\n";
        out << entry.name << " -> " << path.string() << "\n";
        names.push_back(entry.name);
    }
    report["results"]["specs"] = std::move(names);
    write_report(json_path, report);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"graph-directed similarity systems and multizippers"};
    app.require_subcommand(1);

    std::string spec_path, vertex, out_path, json_path, normal_arg;
    std::string out_dir = "catalog";
    int depth = 5;
    int grid_count = 720;
    int dyadic = 3;

    auto* dimension = app.add_subcommand("dimension", "similarity dimension s1");
    dimension->add_option("spec", spec_path, "system spec (JSON)")->required();
    dimension->add_option("--json", json_path, "write JSON report");

    auto* render = app.add_subcommand("render", "sample an attractor component");
    render->add_option("spec", spec_path)->required();
    render->add_option("--vertex", vertex, "component (vertex name)");
    render->add_option("--depth", depth, "substitution depth");
    render->add_option("--out", out_path, "output file (.svg or .csv)")
        ->required();
    render->add_option("--json", json_path);

    auto* verify = app.add_subcommand("verify", "multizipper axioms + theorem");
    verify->add_option("spec", spec_path)->required();
    verify->add_option("--json", json_path);

    auto* scan = app.add_subcommand("scan", "transversality scans");
    scan->add_option("spec", spec_path)->required();
    scan->add_option("--vertex", vertex);
    scan->add_option("--depth", depth);
    scan->add_option("--grid", grid_count, "number of grid directions");
    scan->add_option("--dyadic", dyadic, "dyadic subdivision depth");
    scan->add_option("--json", json_path);

    auto* project = app.add_subcommand("project", "quotient zipper by a normal");
    project->add_option("spec", spec_path)->required();
    project->add_option("--normal", normal_arg, "normal as x,y")->required();
    project->add_option("--out", out_path, "write quotient spec here");
    project->add_option("--json", json_path);

    auto* catalog_cmd = app.add_subcommand("catalog", "write built-in examples");
    catalog_cmd->add_option("--out-dir", out_dir);
    catalog_cmd->add_option("--json", json_path);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }

    try {
        if (dimension->parsed()) {
            return cmd_dimension(args, spec_path, json_path, out);
        }
        if (render->parsed()) {
            return cmd_render(args, spec_path, vertex, depth, out_path,
                              json_path, out);
        }
        if (verify->parsed()) {
            return cmd_verify(args, spec_path, json_path, out);
        }
        if (scan->parsed()) {
            return cmd_scan(args, spec_path, vertex, depth, grid_count, dyadic,
                            json_path, out);
        }
        if (project->parsed()) {
            return cmd_project(args, spec_path, normal_arg, out_path, json_path,
                               out);
        }
        if (catalog_cmd->parsed()) {
            return cmd_catalog(args, out_dir, json_path, out);
        }
    } catch (const SpecError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const CapExceededError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericsError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    err << "error: no subcommand\n";
    return kExitIo;
}

}  // namespace selfsim::cli
