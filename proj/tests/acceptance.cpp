// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.  Tolerances are pinned here and nowhere else.

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "selfsim/cli_app.hpp"
#include "selfsim/transversality.hpp"
#include "support.hpp"

using namespace selfsim;
using testsupport::catalog_spec;
using testsupport::v2;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::cout << "[criterion " << criterion << "] " << (pass ? "PASS" : "FAIL")
              << " - " << detail << "\n";
    if (!pass) ++g_failures;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// 1. Closed-form similarity dimensions.
void criterion_dimension_closed_forms() {
    const double koch = similarity_dimension(catalog_spec("koch").system).s1;
    const double levy = similarity_dimension(catalog_spec("levy").system).s1;
    const double seg = similarity_dimension(catalog_spec("segment").system).s1;
    const double skew =
        similarity_dimension(catalog_spec("skew_segment").system).s1;
    const double two =
        similarity_dimension(catalog_spec("two_vertex").system).s1;
    const bool pass = close(koch, std::log(4.0) / std::log(3.0), 1e-9) &&
                      close(levy, 2.0, 1e-9) && close(seg, 1.0, 1e-10) &&
                      close(skew, 1.0, 1e-10) && close(two, 1.0, 1e-10);
    std::ostringstream detail;
    detail << "closed forms: koch " << format_number(koch) << ", levy "
           << format_number(levy) << ", segment " << format_number(seg)
           << ", skew " << format_number(skew) << ", two-vertex "
           << format_number(two);
    report(1, pass, detail.str());
}

// 2. Collinear ratio-sum-1 zippers are dimension 1 and straight.
void criterion_collinear_zippers() {
    std::mt19937 rng(424242);
    int checked = 0, failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Multizipper z = testsupport::random_collinear_zipper(rng);
        if (!validate_multizipper(z).accepted) {
            ++failures;
            continue;
        }
        if (!close(similarity_dimension(z.system()).s1, 1.0, 1e-9)) {
            ++failures;
            continue;
        }
        bool straight = true;
        for (int u = 0; u < z.system().graph().vertex_count(); ++u) {
            straight = straight && segment_certificate(z, u, 1e-9, 1e-6);
        }
        if (!straight) ++failures;
        ++checked;
    }
    std::ostringstream detail;
    detail << checked << " random collinear zippers, " << failures
           << " failures (s1 = 1 within 1e-9, segment at tol 1e-9, cells "
              "below 1e-6)";
    report(2, failures == 0 && checked == 100, detail.str());
}

// 3. Off-chord nodes force a strict dimension and witness gap.
void criterion_off_chord_witness() {
    std::mt19937 rng(77);
    int failures = 0;
    double min_s1 = 10.0, min_witness = 10.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Multizipper z = testsupport::random_off_chord_zipper(rng);
        if (!validate_multizipper(z).accepted) {
            ++failures;
            continue;
        }
        const double s1 = similarity_dimension(z.system()).s1;
        const double witness = collatz_wielandt_lower(
            ratio_matrix(z.system(), 1.0).entries, z.end_to_end_vector());
        min_s1 = std::min(min_s1, s1);
        min_witness = std::min(min_witness, witness);
        if (!(s1 > 1.0 + 1e-4) || !(witness > 1.0 + 1e-6)) ++failures;
        // The full verdict machinery must agree.
        const Theorem3Verdict v = theorem3_verdict(z);
        if (v.dimension_is_one || !v.pass) ++failures;
    }
    std::ostringstream detail;
    detail << "100 off-chord zippers, " << failures << " failures; min s1 "
           << format_number(min_s1) << ", min witness "
           << format_number(min_witness);
    report(3, failures == 0, detail.str());
}

// 4. Monotone-direction counts on the 720 grid.
void criterion_direction_scans() {
    const std::vector<Vector> grid = normal_grid(2, 720);
    auto count = [&](const char* name, int depth) {
        const ParsedSpec spec = catalog_spec(name);
        return direction_scan(sample_arc(*spec.zipper, 0, depth), grid)
            .monotone_ids.size();
    };
    const std::size_t koch = count("koch", 5);
    const std::size_t levy = count("levy", 6);
    const std::size_t seg = count("segment", 6);
    std::ostringstream detail;
    detail << "monotone directions of 720: koch " << koch << ", levy " << levy
           << ", segment " << seg << " (want 0 / 0 / 718)";
    report(4, koch == 0 && levy == 0 && seg == 718, detail.str());
}

// 5. Nowhere-density certificate for koch at depth 6.
void criterion_nowhere_density() {
    const ParsedSpec spec = catalog_spec("koch");
    const OrderedArcSample sample = sample_arc(*spec.zipper, 0, 6);
    const std::vector<Vector> grid = normal_grid(2, 720);
    const DensityReport density = transverse_point_report(
        sample, grid, 4, default_transversality_tol(sample));
    bool all_cells = true;
    for (const DyadicCell& cell : density.table) {
        all_cells = all_cells && cell.has_nontransverse;
    }
    std::ostringstream detail;
    detail << "koch depth 6, grid 720, dyadic depth 4: verdict "
           << (density.verdict ? "true" : "false") << ", "
           << density.transverse_indices.size() << " of "
           << sample.points.size() - 2 << " interior points transverse";
    report(5, density.verdict && all_cells, detail.str());
}

// 6. Collatz-Wielandt sandwich on random irreducible matrices.
void criterion_collatz_wielandt() {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> pos(0.05, 4.0);
    int failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        const Eigen::MatrixXd m = testsupport::random_irreducible(rng, n);
        Eigen::VectorXd l(n);
        for (int i = 0; i < n; ++i) l(i) = pos(rng);
        const double rho = spectral_radius(m);
        if (collatz_wielandt_lower(m, l) > rho + 1e-7 ||
            collatz_wielandt_upper(m, l) < rho - 1e-7) {
            ++failures;
        }
    }
    Eigen::MatrixXd swap(2, 2);
    swap << 0.0, 1.0, 1.0, 0.0;
    Eigen::VectorXd ones(2);
    ones << 1.0, 1.0;
    const bool equality = collatz_wielandt_lower(swap, ones) == 1.0 &&
                          collatz_wielandt_upper(swap, ones) == 1.0 &&
                          close(spectral_radius(swap), 1.0, 1e-12);
    std::ostringstream detail;
    detail << "1000 random irreducible matrices, " << failures
           << " sandwich failures at tol 1e-7; equality case "
           << (equality ? "exact" : "violated");
    report(6, failures == 0 && equality, detail.str());
}

// 7. Projection conjugacy for every zipper with an invariant normal.
void criterion_projection_conjugacy() {
    int checked = 0, failures = 0;
    std::ostringstream detail;
    for (const char* name :
         {"segment", "skew_segment", "two_vertex", "reflectzip"}) {
        const ParsedSpec spec = catalog_spec(name);
        const InvariantNormals normals = invariant_hyperplanes(spec.system);
        std::vector<Vector> candidates = normals.normals;
        if (normals.all_directions) candidates = {v2(0, 1)};
        if (candidates.empty()) continue;

        bool projected = false;
        for (const Vector& n : candidates) {
            try {
                const ProjectionResult p = project_zipper(*spec.zipper, n);
                const double parent = similarity_dimension(spec.system).s1;
                const double quotient =
                    similarity_dimension(p.quotient.system()).s1;
                if (p.residual < 1e-12 && close(parent, quotient, 1e-9)) {
                    projected = true;
                }
                break;
            } catch (const ValidationError&) {
                // Degenerate projection along this normal; try the next.
            }
        }
        ++checked;
        if (!projected) {
            ++failures;
            detail << name << " failed; ";
        }
    }
    detail << checked << " zippers with invariant normals, residual < 1e-12, "
           << "quotient dimension within 1e-9";
    report(7, checked >= 4 && failures == 0, detail.str());
}

// 8. Finite-resolution limit transversality and cone semicontinuity.
void criterion_limit_and_semicontinuity() {
    const std::vector<Vector> grid = normal_grid(2, 720);
    int counterexamples = 0;
    int indices = 0;
    for (const char* name : {"koch", "segment"}) {
        const ParsedSpec spec = catalog_spec(name);
        const OrderedArcSample sample = sample_arc(*spec.zipper, 0, 6);
        const double tol = default_transversality_tol(sample);
        const ConeScan at_tol(sample, grid, tol);
        const ConeScan at_2tol(sample, grid, 2 * tol);
        for (int i = 1; i + 1 < static_cast<int>(sample.points.size()); ++i) {
            ++indices;
            if (!limit_transversality_check(at_tol, at_2tol, i, 16)) {
                ++counterexamples;
            }
            if (!semicontinuity_check(at_tol, i, 8)) ++counterexamples;
        }
    }
    std::ostringstream detail;
    detail << indices
           << " interior indices (koch + segment, depth 6), windows 16/8, "
           << counterexamples << " counterexamples";
    report(8, counterexamples == 0, detail.str());
}

// 9. Rendering is self-similar: edge images of depth-k samples embed in
// depth-(k+1) samples.
void criterion_render_self_similarity() {
    int failures = 0;
    int checked = 0;
    for (const CatalogEntry& entry : catalog()) {
        const ParsedSpec spec = parse_spec(entry.spec);
        const Multizipper& z = *spec.zipper;
        const int vertices = z.system().graph().vertex_count();
        // Depth 0 is the bare node chain, not a substitution level: its
        // interior nodes only reappear two levels up.  Substitution depths
        // start at 1.
        for (int k = 1; k <= 4; ++k) {
            std::vector<OrderedArcSample> coarse, fine;
            for (int u = 0; u < vertices; ++u) {
                coarse.push_back(sample_arc(z, u, k));
                fine.push_back(sample_arc(z, u, k + 1));
            }
            for (const Edge& e : z.system().graph().edges()) {
                const auto& from = coarse[static_cast<std::size_t>(e.to)];
                const auto& into = fine[static_cast<std::size_t>(e.from)];
                for (const Vector& x : from.points) {
                    const Vector y = z.system().map(e.id)(x);
                    double best = 1e18;
                    for (const Vector& p : into.points) {
                        best = std::min(best, (y - p).norm());
                    }
                    if (best > 1e-10) ++failures;
                    ++checked;
                }
            }
        }
    }
    std::ostringstream detail;
    detail << checked << " mapped sample points across the catalog (k <= 4), "
           << failures << " outside 1e-10";
    report(9, failures == 0, detail.str());
}

// 10. Round-trip equality and byte-identical command reports.
void criterion_determinism() {
    bool round_trip = true;
    for (const CatalogEntry& entry : catalog()) {
        const ParsedSpec first = parse_spec(entry.spec);
        const nlohmann::ordered_json emitted = emit_spec(first);
        round_trip =
            round_trip && emit_spec(parse_spec(emitted)).dump() == emitted.dump();
    }

    std::ostringstream sink;
    if (cli::run({"catalog", "--out-dir", "acceptance_cat"}, sink, sink) != 0) {
        report(10, false, "catalog command failed");
        return;
    }
    const std::vector<std::vector<std::string>> matrix = {
        {"dimension", "acceptance_cat/koch.json"},
        {"dimension", "acceptance_cat/cesaro.json"},
        {"verify", "acceptance_cat/levy.json"},
        {"verify", "acceptance_cat/two_vertex.json"},
        {"scan", "acceptance_cat/koch.json", "--depth", "5", "--grid", "360",
         "--dyadic", "3"},
        {"project", "acceptance_cat/skew_segment.json", "--normal", "0,1"},
        {"render", "acceptance_cat/levy.json", "--depth", "6", "--out",
         "acceptance_cat/levy.svg"},
    };
    bool deterministic = true;
    for (const auto& args : matrix) {
        std::ostringstream out1, err1, out2, err2;
        const int c1 = cli::run(args, out1, err1);
        const int c2 = cli::run(args, out2, err2);
        deterministic = deterministic && c1 == 0 && c2 == 0 &&
                        out1.str() == out2.str() && err1.str() == err2.str();
    }
    std::ostringstream detail;
    detail << "round-trip " << (round_trip ? "equal" : "UNEQUAL") << ", "
           << matrix.size() << " commands "
           << (deterministic ? "byte-identical" : "DIVERGED");
    report(10, round_trip && deterministic, detail.str());
}

}  // namespace

int main() {
    criterion_dimension_closed_forms();
    criterion_collinear_zippers();
    criterion_off_chord_witness();
    criterion_direction_scans();
    criterion_nowhere_density();
    criterion_collatz_wielandt();
    criterion_projection_conjugacy();
    criterion_limit_and_semicontinuity();
    criterion_render_self_similarity();
    criterion_determinism();
    std::cout << (g_failures == 0 ? "all criteria passed"
                                  : "criteria failed: " +
                                        std::to_string(g_failures))
              << "\n";
    return g_failures == 0 ? 0 : 1;
}
