#include "mfsg/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>

#include "mfsg/errors.hpp"

namespace mfsg {

namespace {

double finite_number(const Json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + ": not finite");
    return x;
}

}  // namespace

Polynomial polynomial_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array of [re, im] pairs");
    std::vector<Complex> c;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const std::string at = where + "[" + std::to_string(k) + "]";
        const Json& e = j[k];
        if (e.is_number()) {
            c.emplace_back(finite_number(e, at), 0.0);
        } else if (e.is_array() && e.size() == 2) {
            c.emplace_back(finite_number(e[0], at + "[0]"), finite_number(e[1], at + "[1]"));
        } else {
            throw ConfigError(at + ": expected [re, im]");
        }
    }
    return Polynomial(std::move(c));
}

RationalMap map_from_json(const Json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected {\"num\": [...], \"den\": [...]}");
    for (const auto& [key, value] : j.items())
        if (key != "num" && key != "den") throw ConfigError(where + "." + key + ": unknown key");
    if (!j.contains("num")) throw ConfigError(where + ".num: missing");
    Polynomial num = polynomial_from_json(j["num"], where + ".num");
    Polynomial den = j.contains("den") ? polynomial_from_json(j["den"], where + ".den") : Polynomial::constant(1.0);
    if (den.is_zero()) throw ConfigError(where + ".den: zero denominator");
    try {
        return RationalMap(std::move(num), std::move(den));
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

OrderedJson polynomial_to_json(const Polynomial& p) {
    OrderedJson a = OrderedJson::array();
    for (const auto& c : p.coeffs()) a.push_back({c.real(), c.imag()});
    return a;
}

OrderedJson map_to_json(const RationalMap& f) { return {{"num", polynomial_to_json(f.num())}, {"den", polynomial_to_json(f.den())}}; }

OrderedJson number_json(double x) { return std::isfinite(x) ? OrderedJson(x) : OrderedJson(nullptr); }

std::string dump_json(const OrderedJson& j) { return j.dump(2) + "\n"; }

void write_field_grid(const PixelField& field, std::ostream& os, const OrderedJson& meta) {
    OrderedJson h;
    h["format"] = "mfsg-field-grid";
    h["version"] = 1;
    h["window"] = {field.window.x0, field.window.x1, field.window.y0, field.window.y1};
    h["resolution"] = {field.width, field.height};
    h["encoding"] = "float32-le";
    OrderedJson m = meta;
    m["mode"] = mode_name(field.mode);
    if (field.mode == PixelField::Mode::monte_carlo) {
        m["samples"] = field.samples;
        m["flagged"] = field.flagged;
    } else if (field.mode == PixelField::Mode::fixed_point) {
        m["tol"] = field.tol;
        m["residual"] = field.residual;
        m["iterations"] = field.iterations;
    }
    h["meta"] = m;
    os << h.dump() << '\n';
    std::vector<char> buf(field.values.size() * 4);
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(field.values[k]));
        for (int b = 0; b < 4; ++b) buf[4 * k + b] = static_cast<char>((u >> (8 * b)) & 0xffu);
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw Error(ErrorClass::numeric, "field.grid: write failed");
}

PixelField read_field_grid(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("field.grid: missing header");
    Json h;
    try {
        h = Json::parse(line);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("field.grid: bad header: ") + e.what());
    }
    if (h.value("format", "") != "mfsg-field-grid") throw ConfigError("field.grid: not a field grid");
    PixelField f;
    const auto& w = h.at("window");
    f.window = {w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>(), w.at(3).get<double>()};
    f.width = h.at("resolution").at(0).get<int>();
    f.height = h.at("resolution").at(1).get<int>();
    if (f.width < 1 || f.height < 1) throw ConfigError("field.grid: bad resolution");
    const auto& m = h.at("meta");
    const std::string mode = m.value("mode", "synthetic");
    if (mode == "monte_carlo") {
        f.mode = PixelField::Mode::monte_carlo;
        f.samples = m.value("samples", 0u);
        f.flagged = m.value("flagged", std::uint64_t{0});
    } else if (mode == "fixed_point") {
        f.mode = PixelField::Mode::fixed_point;
        f.tol = m.value("tol", 0.0);
        f.residual = m.value("residual", 0.0);
        f.iterations = m.value("iterations", 0);
    }
    const std::size_t n = static_cast<std::size_t>(f.width) * f.height;
    std::vector<char> buf(n * 4);
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(is.gcount()) != buf.size()) throw ConfigError("field.grid: truncated data");
    f.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[4 * k + b])) << (8 * b);
        f.values[k] = std::bit_cast<float>(u);
    }
    return f;
}

void write_field_png(const PixelField& field, const std::string& path) {
    std::vector<png_byte> pixels(static_cast<std::size_t>(field.width) * field.height);
    for (int j = 0; j < field.height; ++j)
        for (int i = 0; i < field.width; ++i) {
            const double v = std::clamp(field.at(i, j), 0.0, 1.0);
            pixels[static_cast<std::size_t>(field.height - 1 - j) * field.width + i] =
                static_cast<png_byte>(std::lround(v * 255.0));
        }
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(field.width);
    img.height = static_cast<png_uint_32>(field.height);
    img.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&img, path.c_str(), 0, pixels.data(), field.width, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw Error(ErrorClass::numeric, "png: " + msg);
    }
}

void write_spectrum_svg(const SpectrumTable& st, std::ostream& os) {
    constexpr double W = 640, H = 480, ml = 70, mr = 30, mt = 30, mb = 60;
    double amin = st.alpha_minus, amax = st.alpha_plus, smax = st.delta;
    for (std::size_t k = 0; k < st.alpha.size(); ++k) {
        amin = std::min(amin, st.alpha[k]);
        amax = std::max(amax, st.alpha[k]);
        smax = std::max(smax, st.s[k]);
    }
    const double pad = std::max(0.05 * (amax - amin), 0.05);
    amin -= pad;
    amax += pad;
    double smin = 0.0;
    for (double s : st.s) smin = std::min(smin, s);
    smax = smax > smin ? smax * 1.08 : smin + 1.0;
    auto X = [&](double a) { return ml + (a - amin) / (amax - amin) * (W - ml - mr); };
    auto Y = [&](double s) { return H - mb - (s - smin) / (smax - smin) * (H - mt - mb); };

    char buf[256];
    auto put = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        os << buf;
    };
    put("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n", W, H, W, H);
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    put("<g stroke=\"black\" stroke-width=\"1\"><line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>", ml, H - mb, W - mr, H - mb);
    put("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/></g>\n", ml, H - mb, ml, mt);
    os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (int k = 0; k <= 5; ++k) {
        const double a = amin + (amax - amin) * k / 5.0, s = smin + (smax - smin) * k / 5.0;
        put("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>", X(a), H - mb, X(a), H - mb + 5);
        put("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%.3g</text>\n", X(a), H - mb + 20, a);
        put("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>", ml - 5, Y(s), ml, Y(s));
        put("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%.3g</text>\n", ml - 8, Y(s) + 4, s);
    }
    put("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-size=\"14\">&#945;</text>\n", (ml + W - mr) / 2, H - 15);
    put("<text x=\"20\" y=\"%.2f\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 %.2f)\">s(&#945;)</text>\n",
        (mt + H - mb) / 2, (mt + H - mb) / 2);
    os << "</g>\n<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < st.alpha.size(); ++k) put("%s%.2f,%.2f", k ? " " : "", X(st.alpha[k]), Y(st.s[k]));
    os << "\"/>\n";
    put("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"#c0392b\"/>\n", X(st.alpha_zero), Y(st.delta));
    put("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#c0392b\">"
        "&#945;&#8320; = %.4f, &#948; = %.4f%s</text>\n",
        X(st.alpha_zero) + 8, Y(st.delta) - 8, st.alpha_zero, st.delta, st.trivial ? " (trivial)" : "");
    os << "</svg>\n";
}

}  // namespace mfsg
