#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfsim/multizipper.hpp"

namespace selfsim {

/// A parsed system spec: always a GDSystem, and a Multizipper when the
/// spec carries node chains.  Vertex and edge names map to the dense
/// indices used internally.
struct ParsedSpec {
    GDSystem system;
    std::optional<Multizipper> zipper;
    std::vector<std::string> vertex_names;
    std::vector<std::string> edge_names;

    int vertex_index(const std::string& name) const;
};

ParsedSpec parse_spec(const nlohmann::json& doc);
ParsedSpec load_spec(const std::string& path);

// Canonical re-emission (orthogonal parts as matrix rows); parsing the
// result reproduces the same system field for field.
nlohmann::ordered_json emit_spec(const ParsedSpec& spec);

struct CatalogEntry {
    std::string name;
    nlohmann::ordered_json spec;
};

// Built-in example zippers: segment, koch, levy, cesaro (40 degree apex),
// two_vertex, reflectzip, skew_segment.
std::vector<CatalogEntry> catalog();

// SVG polyline of a 2-D point sequence, viewBox padded 5% around the
// bounding box; byte-deterministic for fixed input.
void write_svg(std::ostream& out, const std::vector<Vector>& points);

// CSV with columns address,x1..xd; addresses rendered as edge names
// joined by '.'.
void write_csv(std::ostream& out, const std::vector<Vector>& points,
               const std::vector<Path>& addresses,
               const std::vector<std::string>& edge_names);

// FNV-1a content digest used in reports.
std::string digest_hex(const std::string& bytes);

// Deterministic short rendering of a double for human-readable output.
std::string format_number(double value);

}  // namespace selfsim
