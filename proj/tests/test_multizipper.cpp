#include <doctest.h>

#include <cmath>
#include <random>

#include "selfsim/multizipper.hpp"
#include "support.hpp"

using namespace selfsim;
using testsupport::catalog_spec;
using testsupport::map_endpoint;
using testsupport::v2;

namespace {

const Multizipper& zipper_of(const ParsedSpec& spec) {
    REQUIRE(spec.zipper.has_value());
    return *spec.zipper;
}

double polyline_length(const std::vector<Vector>& pts) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        len += (pts[i + 1] - pts[i]).norm();
    }
    return len;
}

}  // namespace

TEST_CASE("catalog zippers satisfy all axioms") {
    for (const char* name : {"segment", "koch", "levy", "cesaro", "two_vertex",
                             "reflectzip", "skew_segment"}) {
        CAPTURE(name);
        const ParsedSpec spec = catalog_spec(name);
        const ZipperReport report = validate_multizipper(zipper_of(spec));
        CHECK(report.mz1);
        CHECK(report.mz2);
        CHECK(report.mz3);
        CHECK(report.accepted);
    }
}

TEST_CASE("MZ1 rejects a gap that reaches another component's span") {
    // Two unit-interval-ish components on the x-axis.  A chain gap equals
    // the ratio times the *source* span, so a same-vertex violation would
    // force a ratio >= 1 and never get past the similarity constructor;
    // the detectable violations compare against a different component.
    const OrthogonalMap id = OrthogonalMap::identity(2);
    const std::vector<Vector> chain_a{v2(0, 0), v2(0.6, 0), v2(1, 0)};
    const std::vector<Edge> edges{{0, 0, 0}, {1, 0, 1}, {2, 1, 0}, {3, 1, 0}};

    auto build = [&](double b_span) {
        const std::vector<Vector> chain_b{v2(2, 0), v2(2 + b_span / 2, 0),
                                          v2(2 + b_span, 0)};
        std::vector<Similarity> maps{
            map_endpoint(0.6, id, chain_a.front(), chain_a.front()),
            map_endpoint(0.4 / b_span, id, chain_b.front(), chain_a[1]),
            map_endpoint(b_span / 2, id, chain_a.front(), chain_b.front()),
            map_endpoint(b_span / 2, id, chain_a.front(), chain_b[1])};
        return Multizipper(GDSystem(Digraph(2, edges), maps),
                           {chain_a, chain_b}, {{0, 1}, {2, 3}},
                           {false, false, false, false});
    };

    // Span 0.7 > every gap: legal.
    CHECK(validate_multizipper(build(0.7)).mz1);

    // Span 0.5 <= the 0.6 gap in component a: MZ1 violation, and it is a
    // cross-vertex comparison.
    const ZipperReport verdict = validate_multizipper(build(0.5));
    CHECK_FALSE(verdict.mz1);
    CHECK_FALSE(verdict.accepted);
    CHECK(verdict.mz1_cross_vertex_only);
    REQUIRE_FALSE(verdict.violations.empty());
    CHECK(verdict.violations.front().axiom == "MZ1");
    CHECK(verdict.violations.front().cross_vertex);
}

TEST_CASE("MZ2 rejects a non-bijective cell assignment") {
    const ParsedSpec spec = catalog_spec("segment");
    const Multizipper& good = zipper_of(spec);
    // Assign the same edge to both cells.
    Multizipper doubled(good.system(), good.nodes(), {{0, 0}},
                        good.reversed_flags());
    const ZipperReport report = validate_multizipper(doubled);
    CHECK_FALSE(report.mz2);
    CHECK_FALSE(report.accepted);
}

TEST_CASE("MZ3 rejects endpoint mismatch beyond tolerance") {
    const ParsedSpec spec = catalog_spec("segment");
    const Multizipper& good = zipper_of(spec);
    std::vector<std::vector<Vector>> nodes = good.nodes();
    nodes[0][1] += v2(1e-6, 0.0);  // move the middle node off the images
    Multizipper bad(good.system(), nodes, good.assignment(),
                    good.reversed_flags());
    const ZipperReport report = validate_multizipper(bad);
    CHECK_FALSE(report.mz3);
    REQUIRE_FALSE(report.violations.empty());
    CHECK(report.violations.front().axiom == "MZ3");
    // The same perturbation within tolerance is accepted.
    std::vector<std::vector<Vector>> close = good.nodes();
    close[0][1] += v2(1e-10, 0.0);
    Multizipper ok(good.system(), close, good.assignment(),
                   good.reversed_flags());
    CHECK(validate_multizipper(ok).accepted);
}

TEST_CASE("length identity holds on the catalog") {
    for (const char* name : {"segment", "koch", "levy", "cesaro", "two_vertex",
                             "reflectzip", "skew_segment"}) {
        CAPTURE(name);
        const ParsedSpec spec = catalog_spec(name);
        const Multizipper& z = zipper_of(spec);
        for (int u = 0; u < z.system().graph().vertex_count(); ++u) {
            const auto [length, weighted] = polyline_length_identity(z, u);
            CHECK(std::abs(length - weighted) < 1e-10);
        }
    }
}

TEST_CASE("arc sample structure") {
    const ParsedSpec spec = catalog_spec("koch");
    const Multizipper& z = zipper_of(spec);
    const OrderedArcSample s0 = sample_arc(z, 0, 0);
    CHECK(s0.points.size() == 5);  // the node chain itself
    const OrderedArcSample s3 = sample_arc(z, 0, 3);
    CHECK(s3.points.size() == 65);  // 4^3 cells + 1
    // Endpoints are the component endpoints at every depth.
    CHECK((s3.points.front() - z.node_chain(0).front()).norm() < 1e-12);
    CHECK((s3.points.back() - z.node_chain(0).back()).norm() < 1e-12);
    // Koch polyline length grows as (4/3)^k.
    CHECK(polyline_length(s3.points) ==
          doctest::Approx(std::pow(4.0 / 3.0, 3)).epsilon(1e-10));
    // Every address is a valid depth-3 path from vertex 0.
    for (const Path& p : s3.addresses) {
        CHECK(p.edges.size() == 3);
        CHECK(z.system().graph().is_valid_path(p));
    }
    CHECK(s3.cell_bound == doctest::Approx(std::pow(1.0 / 3.0, 3) *
                                           s3.diameter_bound));
}

TEST_CASE("arc samples refine consistently") {
    // Depth-k points are a subsequence of depth-(k+1) points.
    for (const char* name : {"koch", "levy", "reflectzip", "two_vertex"}) {
        CAPTURE(name);
        const ParsedSpec spec = catalog_spec(name);
        const Multizipper& z = zipper_of(spec);
        const OrderedArcSample coarse = sample_arc(z, 0, 2);
        const OrderedArcSample fine = sample_arc(z, 0, 3);
        std::size_t j = 0;
        for (const Vector& p : coarse.points) {
            while (j < fine.points.size() && (fine.points[j] - p).norm() > 1e-10) {
                ++j;
            }
            CAPTURE(j);
            REQUIRE(j < fine.points.size());
        }
    }
}

TEST_CASE("is_segment accepts collinear monotone sequences only") {
    std::vector<Vector> collinear{v2(0, 0), v2(0.25, 0), v2(0.7, 0), v2(1, 0)};
    CHECK(is_segment(collinear, 1e-9));

    std::vector<Vector> bent{v2(0, 0), v2(0.5, 0.01), v2(1, 0)};
    CHECK_FALSE(is_segment(bent, 1e-9));
    CHECK(is_segment(bent, 0.1));  // generous tolerance absorbs the bend

    // Retracing sequence: collinear but not monotone.
    std::vector<Vector> retrace{v2(0, 0), v2(0.8, 0), v2(0.4, 0), v2(1, 0)};
    CHECK_FALSE(is_segment(retrace, 1e-9));

    std::vector<Vector> degenerate{v2(1, 1), v2(1, 1)};
    CHECK_THROWS_AS(is_segment(degenerate, 1e-9), ValidationError);
}

TEST_CASE("refine keeps the attractor and validity") {
    for (const char* name : {"koch", "two_vertex", "reflectzip"}) {
        CAPTURE(name);
        const ParsedSpec spec = catalog_spec(name);
        const Multizipper& z = zipper_of(spec);
        const Multizipper r = refine(z, 2);
        CHECK(validate_multizipper(r).accepted);
        // Depth-1 sample of the refinement equals the depth-2 sample.
        const OrderedArcSample a = sample_arc(r, 0, 1);
        const OrderedArcSample b = sample_arc(z, 0, 2);
        REQUIRE(a.points.size() == b.points.size());
        for (std::size_t i = 0; i < a.points.size(); ++i) {
            CHECK((a.points[i] - b.points[i]).norm() < 1e-12);
        }
    }
}

TEST_CASE("segment certificate separates straight from bent") {
    CHECK(segment_certificate(zipper_of(catalog_spec("segment")), 0, 1e-9, 1e-6));
    CHECK(segment_certificate(zipper_of(catalog_spec("skew_segment")), 0, 1e-9,
                              1e-6));
    CHECK_FALSE(
        segment_certificate(zipper_of(catalog_spec("koch")), 0, 1e-9, 1e-3));
}

TEST_CASE("theorem verdicts across the catalog") {
    SUBCASE("dimension one means segments") {
        for (const char* name : {"segment", "skew_segment", "two_vertex"}) {
            CAPTURE(name);
            const Theorem3Verdict v =
                theorem3_verdict(zipper_of(catalog_spec(name)));
            CHECK(v.dimension_is_one);
            CHECK(v.pass);
            for (bool seg : v.component_is_segment) CHECK(seg);
        }
    }
    SUBCASE("dimension above one comes with a witness") {
        for (const char* name : {"koch", "levy", "cesaro"}) {
            CAPTURE(name);
            const Theorem3Verdict v =
                theorem3_verdict(zipper_of(catalog_spec(name)));
            CHECK_FALSE(v.dimension_is_one);
            CHECK(v.pass);
            CHECK(v.witness > 1.0 + 1e-6);
        }
    }
}

TEST_CASE("random collinear zippers are valid and dimension one") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const Multizipper z = testsupport::random_collinear_zipper(rng);
        CAPTURE(trial);
        CHECK(validate_multizipper(z).accepted);
        CHECK(similarity_dimension(z.system()).s1 ==
              doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("projection of a straight zipper is exact") {
    const ParsedSpec spec = catalog_spec("segment");
    const ProjectionResult p = project_zipper(zipper_of(spec), v2(0, 1));
    CHECK(p.residual < 1e-12);
    CHECK(p.quotient.system().ambient_dim() == 1);
    CHECK(p.quotient_report.accepted);
    for (const Similarity& s : p.quotient.system().maps()) {
        CHECK(s.ratio() == doctest::Approx(0.5));
    }
}

TEST_CASE("projection of a reflection-symmetric zipper preserves ratios") {
    const ParsedSpec spec = catalog_spec("reflectzip");
    const Multizipper& z = zipper_of(spec);
    const ProjectionResult p = project_zipper(z, v2(0, 1));
    CHECK(p.residual < 1e-12);
    for (int e = 0; e < z.system().graph().edge_count(); ++e) {
        CHECK(p.quotient.system().map(e).ratio() ==
              doctest::Approx(z.system().map(e).ratio()));
    }
}

TEST_CASE("projection rejects non-invariant normals") {
    const ParsedSpec spec = catalog_spec("koch");
    CHECK_THROWS_AS(project_zipper(zipper_of(spec), v2(0, 1)), ValidationError);
    CHECK_THROWS_AS(project_zipper(zipper_of(spec), v2(1, 0)), ValidationError);
}
