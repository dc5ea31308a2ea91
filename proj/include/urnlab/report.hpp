#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "urnlab/asymptotics.hpp"
#include "urnlab/matrix_core.hpp"

namespace urnlab {

using Json = nlohmann::json;

inline constexpr const char* kToolName = "urnlab";
inline constexpr const char* kToolVersion = "1.0.0";

/// Pretty-printed, sorted keys, %.17g floats, null for non-finite, trailing newline.
std::string canonical_json(const Json& j);

/// `format` is "json" or "csv". CSV accepts a numeric matrix (array of rows) or a
/// preformatted CSV string.
void emit_report(const Json& report, const std::string& format, const std::string& path);

std::string matrix_csv(const Matrix& m);

Json to_json(const Matrix& m);
Json to_json(const Row& r);
Json to_json(const Col& c);
Json to_json(cplx z);
Json to_json(const CRow& r);
Json to_json(const SpectralProfile& p);
Json to_json(const Regime& r);
Json to_json(const AsymptoticReport& r);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace urnlab
