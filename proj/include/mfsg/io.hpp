#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "mfsg/random_dynamics.hpp"

namespace mfsg {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Polynomial from an array of [re, im] pairs (or bare reals), ascending
/// powers. `where` prefixes diagnostics; throws ConfigError.
Polynomial polynomial_from_json(const Json& j, const std::string& where);
/// {"num": [...], "den": [...]}, den defaulting to [1].
RationalMap map_from_json(const Json& j, const std::string& where);
OrderedJson polynomial_to_json(const Polynomial& p);
OrderedJson map_to_json(const RationalMap& f);

/// Shortest round-trip text for finite doubles, null otherwise.
OrderedJson number_json(double x);
/// Pretty JSON with a trailing newline.
std::string dump_json(const OrderedJson& j);

// field.grid: one line of JSON header, then width*height little-endian
// float32 values, row-major with row 0 at y0.
void write_field_grid(const PixelField& field, std::ostream& os, const OrderedJson& meta = OrderedJson::object());
PixelField read_field_grid(std::istream& is);

/// 8-bit grayscale, top row is y1. Throws Error(numeric) on I/O failure.
void write_field_png(const PixelField& field, const std::string& path);

/// (alpha, s) curve with axes and the apex (alpha_0, delta) marked.
void write_spectrum_svg(const SpectrumTable& st, std::ostream& os);

}  // namespace mfsg
