#include "selfsim/spec_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace selfsim {

using nlohmann::json;
using nlohmann::ordered_json;

int ParsedSpec::vertex_index(const std::string& name) const {
    const auto it = std::find(vertex_names.begin(), vertex_names.end(), name);
    if (it == vertex_names.end()) {
        throw SpecError("unknown vertex name: " + name);
    }
    return static_cast<int>(it - vertex_names.begin());
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw SpecError("spec error at " + where + ": " + what);
}

double get_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "non-finite number");
    return v;
}

Vector get_vector(const json& j, int d, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != d) {
        fail(where, "expected an array of " + std::to_string(d) + " numbers");
    }
    Vector v(d);
    for (int i = 0; i < d; ++i) {
        v(i) = get_number(j[static_cast<std::size_t>(i)], where);
    }
    return v;
}

OrthogonalMap parse_orthogonal(const json& j, int d, const std::string& where) {
    try {
        if (j.is_object()) {
            if (d != 2) fail(where, "angle form of orthogonal needs dimension 2");
            const double angle =
                j.contains("angle_deg") ? get_number(j.at("angle_deg"), where) : 0.0;
            const bool reflect =
                j.contains("reflect") ? j.at("reflect").get<bool>() : false;
            return OrthogonalMap::rotation2d(angle, reflect);
        }
        if (!j.is_array() || static_cast<int>(j.size()) != d) {
            fail(where, "orthogonal must be matrix rows or {angle_deg, reflect}");
        }
        Matrix m(d, d);
        for (int r = 0; r < d; ++r) {
            const Vector row = get_vector(j[static_cast<std::size_t>(r)], d, where);
            m.row(r) = row.transpose();
        }
        return OrthogonalMap(std::move(m));
    } catch (const ValidationError& e) {
        fail(where, e.what());
    }
}

}  // namespace

ParsedSpec parse_spec(const json& doc) {
    if (!doc.is_object()) throw SpecError("spec must be a JSON object");
    if (!doc.contains("dimension")) throw SpecError("spec missing 'dimension'");
    const int d = doc.at("dimension").get<int>();
    if (d < 1) throw SpecError("spec 'dimension' must be >= 1");

    if (!doc.contains("vertices") || !doc.at("vertices").is_array() ||
        doc.at("vertices").empty()) {
        throw SpecError("spec needs a non-empty 'vertices' array");
    }
    std::vector<std::string> vertex_names;
    std::map<std::string, int> vertex_of;
    for (const auto& name : doc.at("vertices")) {
        if (!name.is_string()) fail("vertices", "names must be strings");
        const std::string s = name.get<std::string>();
        if (vertex_of.count(s)) fail("vertices", "duplicate name " + s);
        vertex_of[s] = static_cast<int>(vertex_names.size());
        vertex_names.push_back(s);
    }

    if (!doc.contains("edges") || !doc.at("edges").is_array() ||
        doc.at("edges").empty()) {
        throw SpecError("spec needs a non-empty 'edges' array");
    }
    std::vector<Edge> edges;
    std::vector<Similarity> maps;
    std::vector<bool> reversed;
    std::vector<std::string> edge_names;
    std::map<std::string, int> edge_of;
    for (const auto& e : doc.at("edges")) {
        const int id = static_cast<int>(edges.size());
        const std::string where = "edges[" + std::to_string(id) + "]";
        if (!e.is_object()) fail(where, "expected an object");
        const std::string name = e.contains("id")
                                     ? e.at("id").get<std::string>()
                                     : "e" + std::to_string(id + 1);
        if (edge_of.count(name)) fail(where, "duplicate edge id " + name);
        for (const char* field : {"from", "to", "ratio", "translation"}) {
            if (!e.contains(field)) {
                fail(where, std::string("missing field '") + field + "'");
            }
        }
        const auto from = vertex_of.find(e.at("from").get<std::string>());
        const auto to = vertex_of.find(e.at("to").get<std::string>());
        if (from == vertex_of.end() || to == vertex_of.end()) {
            fail(where, "edge endpoint names an unknown vertex");
        }
        OrthogonalMap orth = e.contains("orthogonal")
                                 ? parse_orthogonal(e.at("orthogonal"), d,
                                                    where + ".orthogonal")
                                 : OrthogonalMap::identity(d);
        try {
            maps.emplace_back(get_number(e.at("ratio"), where + ".ratio"),
                              std::move(orth),
                              get_vector(e.at("translation"), d,
                                         where + ".translation"));
        } catch (const ValidationError& err) {
            throw ValidationError(where + ": " + err.what());
        }
        edges.push_back(Edge{id, from->second, to->second});
        reversed.push_back(e.contains("reversed") ? e.at("reversed").get<bool>()
                                                  : false);
        edge_of[name] = id;
        edge_names.push_back(name);
    }

    GDSystem system(Digraph(static_cast<int>(vertex_names.size()), edges),
                    std::move(maps));

    std::optional<Multizipper> zipper;
    if (doc.contains("nodes")) {
        const auto& nodes_doc = doc.at("nodes");
        if (!nodes_doc.is_object()) fail("nodes", "expected an object");
        std::vector<std::vector<Vector>> nodes(vertex_names.size());
        for (const auto& [name, chain] : nodes_doc.items()) {
            const auto v = vertex_of.find(name);
            if (v == vertex_of.end()) fail("nodes", "unknown vertex " + name);
            if (!chain.is_array() || chain.size() < 2) {
                fail("nodes." + name, "expected >= 2 node points");
            }
            for (const auto& p : chain) {
                nodes[static_cast<std::size_t>(v->second)].push_back(
                    get_vector(p, d, "nodes." + name));
            }
        }
        std::vector<std::vector<int>> assignment(vertex_names.size());
        if (doc.contains("assignment")) {
            for (const auto& [name, list] : doc.at("assignment").items()) {
                const auto v = vertex_of.find(name);
                if (v == vertex_of.end()) {
                    fail("assignment", "unknown vertex " + name);
                }
                if (!list.is_array()) fail("assignment." + name, "expected array");
                for (const auto& edge_name : list) {
                    const auto e = edge_of.find(edge_name.get<std::string>());
                    if (e == edge_of.end()) {
                        fail("assignment." + name, "unknown edge id");
                    }
                    assignment[static_cast<std::size_t>(v->second)].push_back(
                        e->second);
                }
            }
        } else {
            // Default: each vertex's edges in declaration order.
            for (const Edge& e : system.graph().edges()) {
                assignment[static_cast<std::size_t>(e.from)].push_back(e.id);
            }
        }
        try {
            zipper.emplace(system, std::move(nodes), std::move(assignment),
                           std::move(reversed));
        } catch (const ValidationError& err) {
            throw ValidationError(std::string("multizipper spec: ") + err.what());
        }
    }

    return ParsedSpec{std::move(system), std::move(zipper),
                      std::move(vertex_names), std::move(edge_names)};
}

ParsedSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SpecError("cannot parse " + path + ": " + e.what());
    }
    return parse_spec(doc);
}

ordered_json emit_spec(const ParsedSpec& spec) {
    const GDSystem& system = spec.system;
    const Digraph& g = system.graph();
    const int d = system.ambient_dim();

    ordered_json doc;
    doc["version"] = "selfsim-1";
    doc["dimension"] = d;
    doc["vertices"] = spec.vertex_names;

    ordered_json edges = ordered_json::array();
    for (const Edge& e : g.edges()) {
        const Similarity& s = system.map(e.id);
        ordered_json edge;
        edge["id"] = spec.edge_names[static_cast<std::size_t>(e.id)];
        edge["from"] = spec.vertex_names[static_cast<std::size_t>(e.from)];
        edge["to"] = spec.vertex_names[static_cast<std::size_t>(e.to)];
        edge["ratio"] = s.ratio();
        ordered_json rows = ordered_json::array();
        for (int r = 0; r < d; ++r) {
            ordered_json row = ordered_json::array();
            for (int c = 0; c < d; ++c) row.push_back(s.orthogonal().matrix()(r, c));
            rows.push_back(std::move(row));
        }
        edge["orthogonal"] = std::move(rows);
        ordered_json b = ordered_json::array();
        for (int i = 0; i < d; ++i) b.push_back(s.translation()(i));
        edge["translation"] = std::move(b);
        if (spec.zipper) {
            edge["reversed"] = spec.zipper->reversed(e.id);
        }
        edges.push_back(std::move(edge));
    }
    doc["edges"] = std::move(edges);

    if (spec.zipper) {
        ordered_json nodes;
        ordered_json assignment;
        for (int u = 0; u < g.vertex_count(); ++u) {
            ordered_json chain = ordered_json::array();
            for (const Vector& p : spec.zipper->node_chain(u)) {
                ordered_json point = ordered_json::array();
                for (int i = 0; i < d; ++i) point.push_back(p(i));
                chain.push_back(std::move(point));
            }
            nodes[spec.vertex_names[static_cast<std::size_t>(u)]] =
                std::move(chain);
            ordered_json cells = ordered_json::array();
            for (int i = 0; i < spec.zipper->cell_count(u); ++i) {
                cells.push_back(
                    spec.edge_names[static_cast<std::size_t>(
                        spec.zipper->edge_of_cell(u, i))]);
            }
            assignment[spec.vertex_names[static_cast<std::size_t>(u)]] =
                std::move(cells);
        }
        doc["nodes"] = std::move(nodes);
        doc["assignment"] = std::move(assignment);
    }
    return doc;
}

namespace {

ordered_json edge_json(const std::string& id, const std::string& from,
                       const std::string& to, double ratio,
                       ordered_json orthogonal, double tx, double ty,
                       bool reversed = false) {
    ordered_json e;
    e["id"] = id;
    e["from"] = from;
    e["to"] = to;
    e["ratio"] = ratio;
    e["orthogonal"] = std::move(orthogonal);
    e["translation"] = ordered_json::array({tx, ty});
    e["reversed"] = reversed;
    return e;
}

ordered_json angle(double deg, bool reflect = false) {
    ordered_json o;
    o["angle_deg"] = deg;
    o["reflect"] = reflect;
    return o;
}

ordered_json base_doc() {
    ordered_json doc;
    doc["version"] = "selfsim-1";
    doc["dimension"] = 2;
    return doc;
}

}  // namespace

std::vector<CatalogEntry> catalog() {
    std::vector<CatalogEntry> entries;
    const double root3 = std::sqrt(3.0);

    {
        ordered_json doc = base_doc();
        doc["vertices"] = {"a"};
        doc["edges"] = {edge_json("e1", "a", "a", 0.5, angle(0.0), 0.0, 0.0),
                        edge_json("e2", "a", "a", 0.5, angle(0.0), 0.5, 0.0)};
        doc["nodes"]["a"] = {{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
        entries.push_back({"segment", std::move(doc)});
    }
    {
        ordered_json doc = base_doc();
        doc["vertices"] = {"a"};
        doc["edges"] = {
            edge_json("e1", "a", "a", 1.0 / 3.0, angle(0.0), 0.0, 0.0),
            edge_json("e2", "a", "a", 1.0 / 3.0, angle(60.0), 1.0 / 3.0, 0.0),
            edge_json("e3", "a", "a", 1.0 / 3.0, angle(-60.0), 0.5, root3 / 6.0),
            edge_json("e4", "a", "a", 1.0 / 3.0, angle(0.0), 2.0 / 3.0, 0.0)};
        doc["nodes"]["a"] = {{0.0, 0.0},
                            {1.0 / 3.0, 0.0},
                            {0.5, root3 / 6.0},
                            {2.0 / 3.0, 0.0},
                            {1.0, 0.0}};
        entries.push_back({"koch", std::move(doc)});
    }
    {
        const double q = 1.0 / std::sqrt(2.0);
        ordered_json doc = base_doc();
        doc["vertices"] = {"a"};
        doc["edges"] = {edge_json("e1", "a", "a", q, angle(45.0), 0.0, 0.0),
                        edge_json("e2", "a", "a", q, angle(-45.0), 0.5, 0.5)};
        doc["nodes"]["a"] = {{0.0, 0.0}, {0.5, 0.5}, {1.0, 0.0}};
        entries.push_back({"levy", std::move(doc)});
    }
    {
        // Cesaro family member with apex angle 40 degrees.
        const double deg = 40.0;
        const double rad = deg * M_PI / 180.0;
        const double q = 1.0 / (2.0 * std::cos(rad));
        const double apex_y = 0.5 * std::tan(rad);
        ordered_json doc = base_doc();
        doc["vertices"] = {"a"};
        doc["edges"] = {edge_json("e1", "a", "a", q, angle(deg), 0.0, 0.0),
                        edge_json("e2", "a", "a", q, angle(-deg), 0.5, apex_y)};
        doc["nodes"]["a"] = {{0.0, 0.0}, {0.5, apex_y}, {1.0, 0.0}};
        entries.push_back({"cesaro", std::move(doc)});
    }
    {
        ordered_json doc = base_doc();
        doc["vertices"] = {"a", "b"};
        // Mixed targets keep the graph aperiodic, so path powers of the
        // system stay strongly connected.
        doc["edges"] = {edge_json("e1", "a", "a", 0.5, angle(0.0), 0.0, 0.0),
                        edge_json("e2", "a", "b", 0.5, angle(0.0), 0.5, 0.0),
                        edge_json("e3", "b", "a", 0.5, angle(0.0), 0.0, 0.0),
                        edge_json("e4", "b", "b", 0.5, angle(0.0), 0.5, 0.0)};
        doc["nodes"]["a"] = {{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
        doc["nodes"]["b"] = {{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
        entries.push_back({"two_vertex", std::move(doc)});
    }
    {
        ordered_json doc = base_doc();
        doc["vertices"] = {"a"};
        doc["edges"] = {
            edge_json("e1", "a", "a", 0.5, angle(0.0, true), 0.0, 0.0),
            edge_json("e2", "a", "a", 0.5, angle(0.0), 0.5, 0.0)};
        doc["nodes"]["a"] = {{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
        entries.push_back({"reflectzip", std::move(doc)});
    }
    {
        ordered_json doc = base_doc();
        doc["vertices"] = {"a"};
        doc["edges"] = {edge_json("e1", "a", "a", 0.3, angle(0.0), 0.0, 0.0),
                        edge_json("e2", "a", "a", 0.7, angle(0.0), 0.3, 0.0)};
        doc["nodes"]["a"] = {{0.0, 0.0}, {0.3, 0.0}, {1.0, 0.0}};
        entries.push_back({"skew_segment", std::move(doc)});
    }
    return entries;
}

std::string format_number(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

void write_svg(std::ostream& out, const std::vector<Vector>& points) {
    if (points.empty() || points.front().size() != 2) {
        throw ValidationError("write_svg: need 2-D points");
    }
    double min_x = points.front()(0), max_x = min_x;
    double min_y = -points.front()(1), max_y = min_y;
    for (const Vector& p : points) {
        min_x = std::min(min_x, p(0));
        max_x = std::max(max_x, p(0));
        min_y = std::min(min_y, -p(1));
        max_y = std::max(max_y, -p(1));
    }
    const double pad = 0.05 * std::max({max_x - min_x, max_y - min_y, 1e-9});
    const double width = (max_x - min_x) + 2.0 * pad;
    const double height = (max_y - min_y) + 2.0 * pad;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\""
        << format_number(min_x - pad) << " " << format_number(min_y - pad)
        << " " << format_number(width) << " " << format_number(height)
        << "\">\n";
    out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\""
        << format_number(0.002 * std::max(width, height)) << "\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i > 0) out << " ";
        out << format_number(points[i](0)) << "," << format_number(-points[i](1));
    }
    out << "\"/>\n</svg>\n";
}

void write_csv(std::ostream& out, const std::vector<Vector>& points,
               const std::vector<Path>& addresses,
               const std::vector<std::string>& edge_names) {
    if (points.empty()) throw ValidationError("write_csv: no points");
    if (points.size() != addresses.size()) {
        throw ValidationError("write_csv: one address per point required");
    }
    const int d = static_cast<int>(points.front().size());
    out << "address";
    for (int i = 1; i <= d; ++i) out << ",x" << i;
    out << "\n";
    for (std::size_t row = 0; row < points.size(); ++row) {
        const Path& address = addresses[row];
        for (std::size_t i = 0; i < address.edges.size(); ++i) {
            if (i > 0) out << ".";
            out << edge_names.at(static_cast<std::size_t>(address.edges[i]));
        }
        for (int i = 0; i < d; ++i) out << "," << format_number(points[row](i));
        out << "\n";
    }
}

std::string digest_hex(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(hash));
    return buffer;
}

}  // namespace selfsim
