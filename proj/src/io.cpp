#include "qgraph/io.hpp"

#include <fstream>
#include <limits>

#include <fmt/format.h>

namespace qgraph {

using nlohmann::json;

namespace {

double number(const json& j, const char* what) {
    if (!j.is_number()) throw Error(ErrorCode::input, fmt::format("{} must be a number", what));
    return j.get<double>();
}

Complex complex_entry(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw Error(ErrorCode::input, fmt::format("matrix entry must be a number or [re, im], got {}", j.dump()));
}

ComplexMatrix matrix_from_json(const json& j, const char* name, int n) {
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        throw Error(ErrorCode::input, fmt::format("{} must have {} rows", name, n));
    }
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != n) {
            throw Error(ErrorCode::input, fmt::format("row {} of {} must have {} entries", i, name, n));
        }
        for (int k = 0; k < n; ++k) m(i, k) = complex_entry(row[static_cast<std::size_t>(k)]);
    }
    return m;
}

json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

Potential potential_from_json(const json& j) {
    Potential q;
    const std::string type = j.value("type", "zero");
    if (type == "zero") return q;
    if (type != "samples") throw Error(ErrorCode::input, fmt::format("unknown potential type '{}'", type));
    try {
        q.xs = j.at("xs").get<std::vector<double>>();
        q.qs = j.at("qs").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::input, fmt::format("potential samples: {}", e.what()));
    }
    return q;
}

}  // namespace

StarGraph graph_from_json(const json& j) {
    if (!j.is_object() || !j.contains("edges") || !j["edges"].is_array()) {
        throw Error(ErrorCode::input, "graph JSON needs an \"edges\" array");
    }
    StarGraph g;
    std::size_t index = 0;
    for (const json& e : j["edges"]) {
        try {
            const std::string kind = e.value("kind", "regular");
            const Potential q = e.contains("potential") ? potential_from_json(e["potential"]) : Potential{};
            if (kind == "regular") {
                const double beta = e.contains("outer_bc") ? number(e["outer_bc"].value("beta", json(0.0)), "beta")
                                                           : 0.0;
                g.edges.push_back(EdgeSpec::regular(number(e.value("length", json()), "length"), beta, q));
            } else if (kind == "half_line") {
                g.edges.push_back(EdgeSpec::half_line(q));
            } else if (kind == "artificial") {
                g.edges.push_back(EdgeSpec::artificial(number(e.value("m_const", json()), "m_const")));
            } else {
                throw Error(ErrorCode::input, fmt::format("unknown edge kind '{}'", kind));
            }
        } catch (Error& err) {
            throw err.with_edge(index);
        }
        ++index;
    }
    g.validate();
    return g;
}

json graph_to_json(const StarGraph& g) {
    json edges = json::array();
    for (const auto& e : g.edges) {
        json out;
        out["kind"] = to_string(e.kind);
        if (e.kind == EdgeKind::regular) {
            out["length"] = e.length;
            out["outer_bc"] = {{"beta", e.beta}};
        }
        if (e.kind == EdgeKind::artificial) {
            out["m_const"] = e.m_const;
        } else if (e.potential.is_zero()) {
            out["potential"] = {{"type", "zero"}};
        } else {
            out["potential"] = {{"type", "samples"}, {"xs", e.potential.xs}, {"qs", e.potential.qs}};
        }
        edges.push_back(std::move(out));
    }
    return {{"edges", edges}};
}

std::pair<ComplexMatrix, ComplexMatrix> interface_matrices_from_json(const json& j) {
    if (!j.is_object() || !j.contains("A") || !j.contains("B")) {
        throw Error(ErrorCode::input, "interface JSON needs \"A\" and \"B\"");
    }
    const int n = j.contains("n") ? j["n"].get<int>() : static_cast<int>(j["A"].size());
    if (n < 1) throw Error(ErrorCode::input, "interface size must be positive");
    return {matrix_from_json(j["A"], "A", n), matrix_from_json(j["B"], "B", n)};
}

json interface_to_json(const ComplexMatrix& a, const ComplexMatrix& b) {
    return {{"n", a.rows()}, {"A", matrix_to_json(a)}, {"B", matrix_to_json(b)}};
}

bool is_interface_preset(const std::string& name) {
    return name == "standard" || name == "decoupled" || name == "antidecoupled";
}

InterfaceCondition interface_preset(const std::string& name, int n) {
    if (name == "standard") return standard_condition(n);
    if (name == "decoupled") return decoupled_condition(n);
    if (name == "antidecoupled") return antidecoupled_condition(n);
    throw Error(ErrorCode::input, fmt::format("unknown interface preset '{}'", name));
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, fmt::format("cannot open '{}'", path));
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io, fmt::format("'{}' is not valid JSON: {}", path, e.what()));
    }
}

StarGraph load_graph(const std::string& path) { return graph_from_json(read_json_file(path)); }

std::pair<ComplexMatrix, ComplexMatrix> load_interface_matrices(const std::string& spec, int n) {
    if (is_interface_preset(spec)) {
        const InterfaceCondition ic = interface_preset(spec, n);
        return {ic.a(), ic.b()};
    }
    return interface_matrices_from_json(read_json_file(spec));
}

}  // namespace qgraph
