#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "graphdiff/errors.hpp"
#include "graphdiff/graph_config.hpp"

using namespace graphdiff;

namespace {

const std::string kConfigDir = GRAPHDIFF_CONFIG_DIR;

// Minimal valid document the negative tests mutate.
std::string valid_doc() {
    return R"({
      "vertices": [0, 1, 2],
      "edges": [
        {"id": 0, "endpoints": [0, 1], "length": 1.0, "orientation": 0,
         "volatility": {"family": "constant", "coeffs": [1.0]}},
        {"id": 1, "endpoints": [0, 2], "length": 2.0, "orientation": 0,
         "drift": {"family": "linear", "coeffs": [0.1, -0.05]},
         "volatility": {"family": "constant", "coeffs": [0.8]}}
      ],
      "weights": {
        "0": {"0": 0.6, "1": 0.4},
        "1": {"0": 1.0},
        "2": {"1": 1.0}
      }
    })";
}

}  // namespace

TEST_CASE("shipped configs load and validate") {
    for (const char* name : {"star3", "star2_equal", "star2_skew", "path3", "htree",
                             "single_edge"}) {
        INFO(name);
        CHECK_NOTHROW(load_graph(kConfigDir + "/" + name + ".json"));
    }
}

TEST_CASE("shipped invalid configs are rejected with the right violation") {
    auto message_of = [](const std::string& path) {
        try {
            load_graph(path);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message_of(kConfigDir + "/invalid_cycle.json").find("cycle") != std::string::npos);
    CHECK(message_of(kConfigDir + "/invalid_weights.json").find("weight sum") !=
          std::string::npos);
}

TEST_CASE("valid document parses to the expected graph") {
    const MetricGraph g = parse_graph(valid_doc(), "doc");
    REQUIRE(g.edges.size() == 2);
    CHECK(g.vertices.size() == 3);
    CHECK(g.edge_by_id(1)->length == 2.0);
    CHECK(g.edge_by_id(1)->drift.coeffs == std::vector<double>{0.1, -0.05});
    CHECK(g.edge_by_id(0)->drift.coeffs == std::vector<double>{0.0});  // default
    CHECK(g.weight(0, 1) == 0.4);
    CHECK(g.weight(2, 1) == 1.0);
}

TEST_CASE("orientation picks the coordinate-zero endpoint") {
    std::string doc = valid_doc();
    // flip edge 0 so vertex 1 sits at coordinate 0
    const auto at = doc.find("\"orientation\": 0");
    doc.replace(at, 16, "\"orientation\": 1");
    const MetricGraph g = parse_graph(doc, "doc");
    CHECK(g.edge_by_id(0)->endpoints[0] == 1);
    CHECK(g.edge_by_id(0)->endpoints[1] == 0);
    CHECK(g.edge_by_id(0)->vertex_coord(1) == 0.0);
    CHECK(g.edge_by_id(0)->vertex_coord(0) == 1.0);
}

TEST_CASE("unknown keys are rejected at every level") {
    auto rejects = [](std::string doc, const std::string& needle) {
        try {
            parse_graph(doc, "doc");
            FAIL_CHECK("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    {
        std::string doc = valid_doc();
        doc.insert(doc.find("\"vertices\""), "\"extra\": 1, ");
        rejects(doc, "extra");
    }
    {
        std::string doc = valid_doc();
        doc.insert(doc.find("\"id\": 0"), "\"color\": 3, ");
        rejects(doc, "color");
    }
    {
        std::string doc = valid_doc();
        doc.insert(doc.find("\"family\": \"constant\""), "\"scale\": 2, ");
        rejects(doc, "scale");
    }
}

TEST_CASE("malformed documents raise ConfigError") {
    auto rejects = [](std::string doc) { CHECK_THROWS_AS(parse_graph(doc, "doc"), ConfigError); };

    rejects("{ not json");
    rejects("[1, 2]");  // top level not an object
    {
        std::string doc = valid_doc();
        doc.replace(doc.find("\"weights\""), 9, "\"weight\"");  // missing + unknown section
        rejects(doc);
    }
    {
        std::string doc = valid_doc();
        doc.replace(doc.find("\"linear\""), 8, "\"cubic\"");  // unknown family
        rejects(doc);
    }
    {
        std::string doc = valid_doc();
        // linear family with three coefficients
        doc.replace(doc.find("[0.1, -0.05]"), 12, "[0.1, -0.05, 1]");
        rejects(doc);
    }
    {
        std::string doc = valid_doc();
        doc.replace(doc.find("\"length\": 1.0"), 13, "\"length\": \"long\"");
        rejects(doc);
    }
    {
        std::string doc = valid_doc();
        // orientation must name an endpoint of the edge
        doc.replace(doc.find("\"orientation\": 0"), 16, "\"orientation\": 7");
        rejects(doc);
    }
    {
        std::string doc = valid_doc();
        doc.replace(doc.find("\"0\": {\"0\": 0.6"), 4, "\"x\":");  // non-integer vertex key
        rejects(doc);
    }
}

TEST_CASE("infinite length parses from the string form") {
    std::string doc = R"({
      "vertices": [0],
      "edges": [
        {"id": 0, "endpoints": [0], "length": "inf",
         "volatility": {"family": "constant", "coeffs": [1.0]}},
        {"id": 1, "endpoints": [0], "length": "inf",
         "volatility": {"family": "constant", "coeffs": [1.0]}}
      ],
      "weights": {"0": {"0": 0.5, "1": 0.5}}
    })";
    const MetricGraph g = parse_graph(doc, "doc");
    CHECK(g.edge_by_id(0)->half_infinite());
    CHECK(g.edge_by_id(1)->half_infinite());
}

TEST_CASE("missing file reports its path") {
    try {
        load_graph("/nonexistent/graph.json");
        FAIL_CHECK("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/graph.json") != std::string::npos);
    }
}
