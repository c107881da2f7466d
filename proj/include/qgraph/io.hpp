#pragma once

// JSON input for graphs and interface conditions.
//
// Interface files: {"n": 3, "A": [[[re, im], ...], ...], "B": ...}; a plain
// number is accepted for a real entry. Presets: "standard", "decoupled",
// "antidecoupled" (size taken from the graph or --n).

#include <string>

#include "json.hpp"

#include "qgraph/interface_conditions.hpp"
#include "qgraph/weyl_functions.hpp"

namespace qgraph {

StarGraph graph_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const StarGraph& g);

/// Parses matrices only; (D3) is checked by the caller through validate().
std::pair<ComplexMatrix, ComplexMatrix> interface_matrices_from_json(const nlohmann::json& j);
nlohmann::json interface_to_json(const ComplexMatrix& a, const ComplexMatrix& b);

bool is_interface_preset(const std::string& name);
InterfaceCondition interface_preset(const std::string& name, int n);

/// Throws ErrorCode::io with a message naming the file on I/O or parse failure.
nlohmann::json read_json_file(const std::string& path);

StarGraph load_graph(const std::string& path);
/// `spec` is a preset name or a file path.
std::pair<ComplexMatrix, ComplexMatrix> load_interface_matrices(const std::string& spec, int n);

}  // namespace qgraph
