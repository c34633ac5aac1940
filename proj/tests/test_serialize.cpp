#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "woldlab/examples.hpp"
#include "woldlab/serialize.hpp"

using namespace woldlab;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("woldlab_test_" + name)).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string load_error(const std::string& path) {
    try {
        load_tuple(path);
    } catch (const DeserializationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("operator and space round trips") {
    Operator a(2, 3);
    a << cplx(1, -2), 0.5, cplx(0, 3), -1, cplx(1e-17, 2), 7;
    CHECK((operator_from_json(to_json(a)) - a).norm() == 0.0);
    CHECK((operator_from_json(json::parse(to_json(a).dump())) - a).norm() == 0.0);

    SpaceDescriptor s{2, 16, 3, 8};
    SpaceDescriptor back = space_from_json(to_json(s));
    CHECK(back.vars == 2);
    CHECK(back.degree_cap == 16);
    CHECK(back.coeff_dim == 3);
    CHECK(back.guard == 8);
    CHECK_THROWS_AS(space_from_json(json{{"vars", 1}, {"degree_cap", 4}, {"coeff_dim", 1}, {"guard", 4}}),
                    DeserializationError);
}

TEST_CASE("tuple files round trip") {
    TwistedTuple t = construct_twisted(construct_demo(10, 8));
    const std::string path = temp_path("roundtrip.json");
    save_tuple(t, path);
    TwistedTuple back = load_tuple(path);
    CHECK(back.n == t.n);
    REQUIRE(back.ops.size() == t.ops.size());
    for (size_t i = 0; i < t.ops.size(); ++i) CHECK((back.ops[i] - t.ops[i]).norm() == 0.0);
    REQUIRE(back.twists.size() == t.twists.size());
    CHECK((back.twist(1, 2) - t.twist(1, 2)).norm() == 0.0);
    CHECK((back.twist(2, 1) - t.twist(2, 1)).norm() == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("a non-unitary twist names the violated invariant") {
    json j = {{"n", 2},
              {"ops", {to_json(identity(2)), to_json(identity(2))}},
              {"twists", {{"1,2", to_json(Operator(2.0 * identity(2)))}}}};
    const std::string path = temp_path("nonunitary.json");
    write_text(path, j.dump());
    std::string msg = load_error(path);
    CHECK(msg.find("invariant violated: twist unitarity") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("malformed tuple files") {
    const std::string path = temp_path("malformed.json");
    write_text(path, "{ not json");
    CHECK(load_error(path).find("not valid JSON") != std::string::npos);

    write_text(path, R"({"ops": []})");
    CHECK(load_error(path).find("missing field \"n\"") != std::string::npos);

    write_text(path, R"({"n": 1, "ops": [{"rows": 2, "cols": 2, "entries": [[1, 0], [0, 0], [0, 0]]}]})");
    CHECK(load_error(path).find("rows*cols") != std::string::npos);

    write_text(path, R"({"n": 1, "ops": [{"rows": 1, "cols": 1, "entries": [[1, "x"]]}]})");
    CHECK(load_error(path).find("[re, im]") != std::string::npos);

    write_text(path, R"({"n": 2, "ops": [{"rows": 1, "cols": 1, "entries": [[1, 0]]}]})");
    CHECK(load_error(path).find("n operators") != std::string::npos);

    write_text(path, R"({"n": 1, "ops": [{"rows": 1, "cols": 1, "entries": [[1, 0]]}], "twists": {"1-2": {}}})");
    CHECK(load_error(path).find("i,j") != std::string::npos);

    write_text(path, R"({"n": 0, "ops": []})");
    CHECK_FALSE(load_error(path).empty());

    std::remove(path.c_str());
    CHECK(load_error(temp_path("does_not_exist.json")).find("cannot open") != std::string::npos);
}

TEST_CASE("report serialization keeps non-finite values readable") {
    NearIsometryReport r;
    r.delta = std::numeric_limits<double>::infinity();
    r.ortho_residuals = {0.0, std::numeric_limits<double>::quiet_NaN()};
    json j = to_json(r);
    CHECK(j["delta"] == "inf");
    CHECK(j["ortho_residuals"][1] == "nan");
    CHECK(finite_or_sentinel(std::numeric_limits<double>::infinity()) == -1.0);
    CHECK(finite_or_sentinel(0.25) == 0.25);
    CHECK(kSchemaVersion == 1);
}
