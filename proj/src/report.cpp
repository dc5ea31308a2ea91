#include "urnlab/report.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>

#include "urnlab/errors.hpp"
#include "urnlab/format.hpp"

namespace urnlab {

namespace {

void put_indent(std::string& out, int level) { out.append(static_cast<std::size_t>(2 * level), ' '); }

void write_value(std::string& out, const Json& j, int level) {
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        put_indent(out, level + 1);
        out += Json(it.key()).dump();
        out += ": ";
        write_value(out, it.value(), level + 1);
      }
      out += "\n";
      put_indent(out, level);
      out += "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        put_indent(out, level + 1);
        write_value(out, j[i], level + 1);
      }
      out += "\n";
      put_indent(out, level);
      out += "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? fmt17(x) : "null";
      return;
    }
    default:
      out += j.dump(-1, ' ', false, Json::error_handler_t::strict);
  }
}

bool is_numeric_matrix(const Json& j) {
  if (!j.is_array() || j.empty()) return false;
  const std::size_t w = j[0].is_array() ? j[0].size() : 0;
  if (w == 0) return false;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != w) return false;
    for (const auto& x : row) {
      if (!x.is_number() && !x.is_null()) return false;
    }
  }
  return true;
}

}  // namespace

std::string canonical_json(const Json& j) {
  std::string out;
  write_value(out, j, 0);
  out += "\n";
  return out;
}

std::string matrix_csv(const Matrix& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (k) s += ",";
      s += fmt17(m(i, k));
    }
    s += "\n";
  }
  return s;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing: " + std::strerror(errno));
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write to '" + path + "' failed: " + std::strerror(errno));
}

void emit_report(const Json& report, const std::string& format, const std::string& path) {
  if (format == "json") {
    write_text_file(path, canonical_json(report));
    return;
  }
  if (format == "csv") {
    if (report.is_string()) {
      write_text_file(path, report.get<std::string>());
      return;
    }
    if (!is_numeric_matrix(report)) throw InvalidArgument("emit_report: csv needs a numeric matrix");
    std::string s;
    for (const auto& row : report) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) s += ",";
        s += row[k].is_null() ? "nan" : fmt17(row[k].get<double>());
      }
      s += "\n";
    }
    write_text_file(path, s);
    return;
  }
  throw InvalidArgument("emit_report: unsupported format '" + format + "'");
}

Json to_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    a.push_back(row);
  }
  return a;
}

Json to_json(const Row& r) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < r.size(); ++i) a.push_back(r(i));
  return a;
}

Json to_json(const Col& c) { return to_json(Row(c.transpose())); }

Json to_json(cplx z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

Json to_json(const CRow& r) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < r.size(); ++i) a.push_back(to_json(r(i)));
  return a;
}

Json to_json(const SpectralProfile& p) {
  Json groups = Json::array();
  for (const auto& g : p.groups) {
    groups.push_back({{"lambda", to_json(g.lambda)}, {"multiplicity", g.multiplicity}, {"block_sizes", g.block_sizes}});
  }
  Json j{{"dim", p.dim}, {"groups", groups}, {"rho", p.rho}, {"nu", p.nu}};
  j["lambda_sec"] = p.lambda_sec ? Json(*p.lambda_sec) : Json(nullptr);
  if (!p.warning.empty()) j["warning"] = p.warning;
  return j;
}

Json to_json(const Regime& r) {
  return {{"regime", regime_name(r.tag)}, {"rho", r.rho}, {"nu", r.nu}, {"scaling", r.scaling}};
}

Json to_json(const AsymptoticReport& r) {
  Json j{{"spectral_profile", to_json(r.profile)}, {"as_rate_exponent", r.as_rate_exponent}};
  j["regime"] = regime_name(r.regime.tag);
  j["rho"] = r.regime.rho;
  j["nu"] = r.regime.nu;
  j["scaling"] = r.regime.scaling;
  if (r.profile.lambda_sec) j["lambda_sec"] = *r.profile.lambda_sec;
  if (r.covariance) j[r.regime.tag == RegimeTag::Critical ? "sigma_tilde" : "sigma"] = to_json(*r.covariance);
  if (r.slow) {
    Json comps = Json::array();
    for (const auto& c : r.slow->components) {
      comps.push_back({{"lambda", to_json(c.lambda)}, {"frequency", c.frequency}, {"nu", c.nu},
                       {"direction", to_json(c.direction)}});
    }
    j["slow_descriptor"] = {{"rho", r.slow->rho}, {"nu", r.slow->nu}, {"components", comps}};
  }
  return j;
}

}  // namespace urnlab
