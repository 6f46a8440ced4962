#include "graphdiff/graph_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "graphdiff/errors.hpp"

namespace graphdiff {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& origin, const std::string& msg) {
    throw ConfigError(origin + ": " + msg);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& origin, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) known = known || it.key() == k;
        if (!known) bad(origin, "unknown key '" + it.key() + "' in " + where);
    }
}

CoeffFn parse_coeff(const json& j, const std::string& origin, const std::string& where) {
    if (!j.is_object()) bad(origin, where + " must be an object {family, coeffs}");
    check_keys(j, {"family", "coeffs"}, origin, where);
    if (!j.contains("family") || !j.contains("coeffs"))
        bad(origin, where + " needs both 'family' and 'coeffs'");
    const std::string fam = j["family"].get<std::string>();
    CoeffFn f;
    if (fam == "constant")
        f.family = CoeffFamily::Constant;
    else if (fam == "linear")
        f.family = CoeffFamily::Linear;
    else if (fam == "polynomial")
        f.family = CoeffFamily::Polynomial;
    else
        bad(origin, where + ": unknown family '" + fam + "'");
    if (!j["coeffs"].is_array() || j["coeffs"].empty())
        bad(origin, where + ": coeffs must be a non-empty array");
    for (const auto& c : j["coeffs"]) {
        if (!c.is_number()) bad(origin, where + ": coeffs must be numbers");
        f.coeffs.push_back(c.get<double>());
    }
    const size_t expect = f.family == CoeffFamily::Constant ? 1
                          : f.family == CoeffFamily::Linear ? 2
                                                            : f.coeffs.size();
    if (f.coeffs.size() != expect)
        bad(origin, where + ": family '" + fam + "' expects " + std::to_string(expect) +
                        " coefficient(s)");
    return f;
}

double parse_length(const json& j, const std::string& origin, const std::string& where) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return kInfiniteLength;
        bad(origin, where + ": length string must be \"inf\"");
    }
    if (!j.is_number()) bad(origin, where + ": length must be a number or \"inf\"");
    return j.get<double>();
}

MetricGraph parse_document(const json& doc, const std::string& origin) {
    if (!doc.is_object()) bad(origin, "top level must be an object");
    check_keys(doc, {"vertices", "edges", "weights"}, origin, "top level");
    for (const char* k : {"vertices", "edges", "weights"})
        if (!doc.contains(k)) bad(origin, std::string("missing section '") + k + "'");

    MetricGraph g;
    if (!doc["vertices"].is_array()) bad(origin, "'vertices' must be an array of ids");
    for (const auto& v : doc["vertices"]) {
        if (!v.is_number_integer()) bad(origin, "vertex ids must be integers");
        g.vertices.push_back(v.get<int>());
    }

    if (!doc["edges"].is_array()) bad(origin, "'edges' must be an array");
    for (const auto& je : doc["edges"]) {
        if (!je.is_object()) bad(origin, "edge entries must be objects");
        check_keys(je, {"id", "endpoints", "length", "orientation", "drift", "volatility"},
                   origin, "edge entry");
        for (const char* k : {"id", "endpoints", "length", "volatility"})
            if (!je.contains(k)) bad(origin, std::string("edge entry missing '") + k + "'");
        EdgeSpec e;
        e.id = je["id"].get<int>();
        const std::string where = "edge " + std::to_string(e.id);
        if (!je["endpoints"].is_array() || je["endpoints"].empty() ||
            je["endpoints"].size() > 2)
            bad(origin, where + ": endpoints must list one or two vertex ids");
        for (const auto& v : je["endpoints"]) e.endpoints.push_back(v.get<int>());
        e.length = parse_length(je["length"], origin, where);
        // Orientation picks which endpoint carries coordinate 0.  Required
        // when there are two endpoints; a half-infinite edge is always
        // anchored at its single vertex.
        if (e.endpoints.size() == 2) {
            if (!je.contains("orientation")) bad(origin, where + ": missing 'orientation'");
            const int o = je["orientation"].get<int>();
            if (o == e.endpoints[1]) std::swap(e.endpoints[0], e.endpoints[1]);
            else if (o != e.endpoints[0])
                bad(origin, where + ": orientation must name an endpoint");
        } else if (je.contains("orientation") &&
                   je["orientation"].get<int>() != e.endpoints[0]) {
            bad(origin, where + ": orientation must name the single endpoint");
        }
        e.drift = je.contains("drift") ? parse_coeff(je["drift"], origin, where + " drift")
                                       : CoeffFn::constant(0.0);
        e.volatility = parse_coeff(je["volatility"], origin, where + " volatility");
        g.edges.push_back(e);
    }

    if (!doc["weights"].is_object()) bad(origin, "'weights' must map vertex -> {edge: weight}");
    for (auto vit = doc["weights"].begin(); vit != doc["weights"].end(); ++vit) {
        int v = 0;
        try {
            v = std::stoi(vit.key());
        } catch (...) {
            bad(origin, "weights: vertex key '" + vit.key() + "' is not an integer");
        }
        if (!vit.value().is_object())
            bad(origin, "weights for vertex " + vit.key() + " must be an object");
        for (auto eit = vit.value().begin(); eit != vit.value().end(); ++eit) {
            int eid = 0;
            try {
                eid = std::stoi(eit.key());
            } catch (...) {
                bad(origin, "weights: edge key '" + eit.key() + "' is not an integer");
            }
            if (!eit.value().is_number())
                bad(origin, "weight (" + vit.key() + ", " + eit.key() + ") must be a number");
            g.weights[{v, eid}] = eit.value().get<double>();
        }
    }

    ValidationReport rep = validate_graph(g);
    if (!rep.ok) {
        std::ostringstream msg;
        msg << "invalid graph:";
        for (const auto& s : rep.violations) msg << "\n  - " << s;
        bad(origin, msg.str());
    }
    return g;
}

}  // namespace

MetricGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": JSON parse error: " + e.what());
    }
    return parse_document(doc, path);
}

MetricGraph parse_graph(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": JSON parse error: " + e.what());
    }
    return parse_document(doc, origin);
}

}  // namespace graphdiff
