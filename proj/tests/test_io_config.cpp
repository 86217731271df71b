#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "mfsg/config.hpp"
#include "mfsg/errors.hpp"
#include "mfsg/io.hpp"

using namespace mfsg;
using namespace mfsg::test;

namespace {

Json base_config() {
    return Json::parse(R"({"maps": [{"num": [0, 0, 1]}, {"num": [[0, 0], [0, 0], [0, 0], [1, 0]]}],
                           "probabilities": [0.5, 0.5]})");
}

std::string config_error(const Json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("map JSON") {
    const auto f = map_from_json(Json::parse(R"({"num": [[-1, 0], [0, 0], [1, 0]], "den": [[0, 0], [2, 0]]})"), "m");
    CHECK(f.degree() == 2);
    CHECK(std::abs(f(SpherePoint(2.0)).value - Complex(0.75, 0.0)) < 1e-15);
    const auto g = map_from_json(Json::parse(R"({"num": [0, [0, 1], 1]})"), "m");
    CHECK(g.is_polynomial());
    CHECK(g.num()[1] == Complex(0.0, 1.0));
    const auto back = map_from_json(Json::parse(map_to_json(f).dump()), "m");
    CHECK(back.num().coeffs() == f.num().coeffs());
    CHECK(back.den().coeffs() == f.den().coeffs());

    CHECK_THROWS_AS(map_from_json(Json::parse(R"({"num": [1]})"), "m"), ConfigError);       // constant
    CHECK_THROWS_AS(map_from_json(Json::parse(R"({"num": [[1, 2, 3]]})"), "m"), ConfigError);  // not a pair
    CHECK_THROWS_AS(map_from_json(Json::parse(R"({"num": [0, 1], "dem": [1]})"), "m"), ConfigError);
    CHECK_THROWS_AS(map_from_json(Json::parse(R"({"num": [0, 1], "den": [0]})"), "m"), ConfigError);
}

TEST_CASE("config defaults and fields") {
    auto c = parse_config(base_config());
    CHECK(c.maps.size() == 2);
    CHECK(c.potential == RunConfig::Potential::log_prob);
    CHECK(c.betas().size() == 33);
    CHECK_FALSE(c.depth.has_value());
    CHECK(c.julia_target_count >= 20000);
    CHECK(c.tol == 1e-6);
    CHECK(c.samples == 0);
    CHECK_FALSE(c.holder);

    auto j = base_config();
    j["depth"] = 7;
    j["potential"] = {{"constant", {-1.0, -2.0}}};
    j["beta"] = {{"min", -1}, {"max", 2}, {"steps", 13}};
    j["coliseum"] = Json::parse(R"({"window": [-1, 1, -2, 2], "resolution": [64, 32], "samples": 10,
                                    "traps": [{"center": [0, 0], "radius": 0.2, "label": "o"}]})");
    j["holder"] = Json::parse(R"({"n_points": 9, "radii": {"r0": 0.1, "ratio": 1.5, "count": 6}})");
    j["output_dir"] = "x";
    c = parse_config(j);
    CHECK(*c.depth == 7);
    CHECK(c.psi_constants() == std::vector<double>{-1.0, -2.0});
    CHECK(c.betas().front() == -1.0);
    CHECK(c.width == 64);
    CHECK(c.height == 32);
    CHECK(c.window.y1 == 2.0);
    CHECK(c.traps.size() == 1);
    CHECK(c.holder);
    CHECK(c.holder_count == 6);
    CHECK(c.output_dir == "x");

    // output_dir does not enter the digest.
    auto k = j;
    k["output_dir"] = "y";
    CHECK(parse_config(k).digest == c.digest);
    k["depth"] = 6;
    CHECK(parse_config(k).digest != c.digest);

    j = base_config();
    j["maps"] = Json::parse(R"([{"num": [0, 0, 1]}])");
    j["probabilities"] = {1};
    j["potential"] = "lyapunov";
    CHECK(parse_config(j).psi_constants() == std::vector<double>{-1.0});
}

TEST_CASE("config rejections name the field") {
    auto j = base_config();
    j["probabilities"] = {0.5, 0.6};
    CHECK(config_error(j).find("probabilities") != std::string::npos);
    j["probabilities"] = {0.5, 0.0};
    CHECK(config_error(j).find("probabilities[1]") != std::string::npos);
    j["probabilities"] = {1.0};
    CHECK(config_error(j).find("probabilities") != std::string::npos);

    j = base_config();
    j["colour"] = 1;
    CHECK(config_error(j) == "colour: unknown key");
    j = base_config();
    j["coliseum"] = {{"windw", {0, 1, 0, 1}}};
    CHECK(config_error(j) == "coliseum.windw: unknown key");
    j = base_config();
    j["holder"] = {{"radii", {{"r", 1}}}};
    CHECK(config_error(j) == "holder.radii.r: unknown key");

    j = base_config();
    j["beta"] = {{"steps", 4}};
    CHECK(config_error(j).find("beta.steps") != std::string::npos);
    j["beta"] = {{"min", -1}, {"max", 2}, {"steps", 6}};  // step 0.6 misses 0
    CHECK(config_error(j).find("beta = 0") != std::string::npos);
    j = base_config();
    j["coliseum"] = {{"resolution", 8193}};
    CHECK(config_error(j).find("coliseum.resolution") != std::string::npos);
    j["coliseum"] = {{"resolution", {8192, 8193}}};
    CHECK(config_error(j).find("coliseum.resolution[1]") != std::string::npos);
    j = base_config();
    j["depth"] = "deep";
    CHECK(config_error(j).find("depth") != std::string::npos);
    j["depth"] = 0;
    CHECK(config_error(j).find("depth") != std::string::npos);
    j = base_config();
    j["potential"] = {{"constant", {-1.0}}};
    CHECK(config_error(j).find("potential.constant") != std::string::npos);
    j = base_config();
    j["coliseum"] = Json::parse(R"({"traps": [{"center": [0, 0]}]})");
    CHECK(config_error(j).find("coliseum.traps[0]") != std::string::npos);
    j = base_config();
    j["maps"] = Json::parse(R"([{"num": [0, 1]}])");  // one map of degree 1
    j["probabilities"] = {1};
    CHECK(config_error(j).find("maps") != std::string::npos);
    j = base_config();
    j.erase("probabilities");
    CHECK(config_error(j) == "probabilities: missing");
}

TEST_CASE("load_config reports line and column of syntax errors") {
    const auto path = std::filesystem::temp_directory_path() / "mfsg_bad_config.json";
    {
        std::ofstream os(path);
        os << "{\"maps\": [],\n  \"probabilities\": [1,]\n}\n";
    }
    try {
        load_config(path.string());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("field.grid round trip") {
    auto f = PixelField::synthetic({-1, 2, -3, 1}, 7, 5, [](Complex z) { return z.real() * 0.1 + z.imag(); });
    f.mode = PixelField::Mode::fixed_point;
    f.tol = 1e-6;
    f.residual = 3e-7;
    f.iterations = 12;
    std::stringstream ss;
    write_field_grid(f, ss, {{"note", "x"}});
    const std::string text = ss.str();
    const auto nl = text.find('\n');
    const auto header = Json::parse(text.substr(0, nl));
    CHECK(header["resolution"] == Json::array({7, 5}));
    CHECK(header["meta"]["note"] == "x");
    CHECK(text.size() - nl - 1 == 7u * 5u * 4u);
    // Little-endian float32 of the first value.
    const float v0 = static_cast<float>(f.values[0]);
    std::uint32_t u0 = 0;
    for (int b = 0; b < 4; ++b) u0 |= static_cast<std::uint32_t>(static_cast<unsigned char>(text[nl + 1 + b])) << (8 * b);
    CHECK(u0 == std::bit_cast<std::uint32_t>(v0));

    const auto g = read_field_grid(ss);
    CHECK(g.width == 7);
    CHECK(g.height == 5);
    CHECK(g.window.y0 == -3.0);
    CHECK(g.mode == PixelField::Mode::fixed_point);
    CHECK(g.iterations == 12);
    for (std::size_t k = 0; k < f.values.size(); ++k) CHECK(g.values[k] == static_cast<double>(static_cast<float>(f.values[k])));

    std::stringstream trunc(text.substr(0, text.size() - 3));
    CHECK_THROWS_AS(read_field_grid(trunc), ConfigError);
}

TEST_CASE("png export") {
    const auto f = PixelField::synthetic({0, 1, 0, 1}, 16, 8, [](Complex z) { return z.imag(); });
    const auto path = std::filesystem::temp_directory_path() / "mfsg_field.png";
    write_field_png(f, path.string());
    std::ifstream in(path, std::ios::binary);
    std::string head(8, '\0');
    in.read(head.data(), 8);
    CHECK(head == std::string("\x89PNG\r\n\x1a\n", 8));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(write_field_png(f, "/nonexistent/dir/x.png"), Error);
}

TEST_CASE("spectrum svg") {
    SpectrumTable st;
    st.alpha = {1.0, 0.8, 0.6};
    st.s = {0.5, 1.2, 0.4};
    st.alpha_plus = 1.0;
    st.alpha_zero = 0.8;
    st.alpha_minus = 0.6;
    st.delta = 1.2;
    std::ostringstream os;
    write_spectrum_svg(st, os);
    const auto svg = os.str();
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(svg.find("1.2000") != std::string::npos);
    CHECK(svg.find("s(&#945;)") != std::string::npos);
}

TEST_CASE("number_json") {
    CHECK(number_json(1.5) == 1.5);
    CHECK(number_json(std::numeric_limits<double>::infinity()).is_null());
    CHECK(dump_json({{"a", 0.1}}) == "{\n  \"a\": 0.1\n}\n");
}
