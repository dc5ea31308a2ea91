#include "urnlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "urnlab/digest.hpp"
#include "urnlab/errors.hpp"

namespace urnlab {

namespace {

std::string child(const std::string& ptr, const std::string& key) {
  std::string k;
  for (char c : key) {
    if (c == '~') k += "~0";
    else if (c == '/') k += "~1";
    else k += c;
  }
  return ptr + "/" + k;
}

std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

std::string type_name(const Json& j) { return j.type_name(); }

[[noreturn]] void fail(const std::string& ptr, const std::string& expected, const Json& got) {
  throw ConfigError((ptr.empty() ? std::string("/") : ptr) + ": expected " + expected + ", got " +
                        (got.is_null() ? std::string("null") : type_name(got) + " " + got.dump()),
                    ptr.empty() ? "/" : ptr);
}

void require_object(const Json& j, const std::string& ptr, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(ptr, "object", j);
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) {
      const std::string p = child(ptr, it.key());
      throw ConfigError(p + ": unknown key '" + it.key() + "'", p);
    }
  }
}

const Json* find(const Json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const Json& need(const Json& j, const std::string& ptr, const char* key) {
  const Json* v = find(j, key);
  if (!v) {
    const std::string p = child(ptr, key);
    throw ConfigError(p + ": required key missing", p);
  }
  return *v;
}

double number(const Json& j, const std::string& ptr) {
  if (!j.is_number()) fail(ptr, "number", j);
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(ptr, "finite number", j);
  return x;
}

std::uint64_t unsigned_int(const Json& j, const std::string& ptr) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  fail(ptr, "non-negative integer", j);
}

std::string string(const Json& j, const std::string& ptr) {
  if (!j.is_string()) fail(ptr, "string", j);
  return j.get<std::string>();
}

bool boolean(const Json& j, const std::string& ptr) {
  if (!j.is_boolean()) fail(ptr, "boolean", j);
  return j.get<bool>();
}

Row row(const Json& j, const std::string& ptr, int d) {
  if (!j.is_array()) fail(ptr, "array of " + std::to_string(d) + " numbers", j);
  if (static_cast<int>(j.size()) != d) {
    throw ConfigError(ptr + ": expected " + std::to_string(d) + " entries, got " + std::to_string(j.size()), ptr);
  }
  Row r(d);
  for (int i = 0; i < d; ++i) r(i) = number(j[i], child(ptr, i));
  return r;
}

Matrix matrix(const Json& j, const std::string& ptr, int d) {
  if (!j.is_array()) fail(ptr, std::to_string(d) + "x" + std::to_string(d) + " matrix (array of rows)", j);
  if (static_cast<int>(j.size()) != d) {
    throw ConfigError(ptr + ": expected a square " + std::to_string(d) + "x" + std::to_string(d) + " matrix, got " +
                          std::to_string(j.size()) + " rows",
                      ptr);
  }
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    const std::string p = child(ptr, i);
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != d) {
      throw ConfigError(p + ": expected a square " + std::to_string(d) + "x" + std::to_string(d) +
                            " matrix, row has " + (j[i].is_array() ? std::to_string(j[i].size()) : std::string("no")) +
                            " entries",
                        p);
    }
    for (int k = 0; k < d; ++k) m(i, k) = number(j[i][k], child(p, k));
  }
  return m;
}

template <class F>
auto wrap(const std::string& ptr, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(ptr + ": " + e.what(), ptr);
  }
}

int dimension(const Json& m, const std::string& ptr) {
  const std::uint64_t d = unsigned_int(need(m, ptr, "d"), child(ptr, "d"));
  if (d < 1 || d > 64) fail(child(ptr, "d"), "dimension in 1..64", m["d"]);
  return static_cast<int>(d);
}

SAModel parse_sa(const Json& m, const std::string& ptr) {
  require_object(m, ptr, {"kind", "d", "drift", "theta_star", "theta0", "noise", "remainder"});
  const int d = dimension(m, ptr);
  SAModel out;
  SAProcessSpec& s = out.spec;
  s.dim = d;
  const std::string dp = child(ptr, "drift");
  const Json& drift = need(m, ptr, "drift");
  if (!drift.is_object()) fail(dp, "object", drift);
  const std::string dk = string(need(drift, dp, "kind"), child(dp, "kind"));
  const Row star = find(m, "theta_star") ? row(m["theta_star"], child(ptr, "theta_star"), d) : Row::Zero(d);
  s.theta0 = find(m, "theta0") ? row(m["theta0"], child(ptr, "theta0"), d) : Row::Zero(d);
  if (dk == "linear") {
    require_object(drift, dp, {"kind", "matrix"});
    out.dh = matrix(need(drift, dp, "matrix"), child(dp, "matrix"), d);
    s.drift = wrap(dp, [&] { return linear_drift(out.dh, star); });
  } else if (dk == "rate_example") {
    require_object(drift, dp, {"kind", "rho", "f"});
    if (d != 1) throw ConfigError(child(ptr, "d") + ": rate_example needs d = 1", child(ptr, "d"));
    const double rho = number(need(drift, dp, "rho"), child(dp, "rho"));
    const std::string f = string(need(drift, dp, "f"), child(dp, "f"));
    if (!(s.theta0(0) > 0.0)) {
      throw ConfigError(child(ptr, "theta0") + ": rate_example needs theta0 > 0", child(ptr, "theta0"));
    }
    if (star.norm() != 0.0) throw ConfigError(child(ptr, "theta_star") + ": rate_example has theta* = 0", child(ptr, "theta_star"));
    s.drift = wrap(dp, [&] { return rate_example_drift(rho, f, s.theta0(0)); });
    out.dh = Matrix::Constant(1, 1, rho);
  } else {
    throw ConfigError(child(dp, "kind") + ": expected \"linear\" or \"rate_example\", got \"" + dk + "\"",
                      child(dp, "kind"));
  }
  s.theta_star = star;
  out.gamma = Matrix::Zero(d, d);
  if (const Json* nz = find(m, "noise")) {
    const std::string np = child(ptr, "noise");
    if (!nz->is_object()) fail(np, "object", *nz);
    const std::string nk = string(need(*nz, np, "kind"), child(np, "kind"));
    if (nk == "gaussian") {
      require_object(*nz, np, {"kind", "gamma"});
      out.gamma = matrix(need(*nz, np, "gamma"), child(np, "gamma"), d);
      s.noise = wrap(child(np, "gamma"), [&] { return gaussian_noise(out.gamma); });
    } else if (nk != "none") {
      throw ConfigError(child(np, "kind") + ": expected \"none\" or \"gaussian\", got \"" + nk + "\"",
                        child(np, "kind"));
    } else {
      require_object(*nz, np, {"kind"});
    }
  }
  if (const Json* rm = find(m, "remainder")) {
    const std::string rp = child(ptr, "remainder");
    require_object(*rm, rp, {"kind", "direction"});
    const std::string rk = string(need(*rm, rp, "kind"), child(rp, "kind"));
    const Row dir = find(*rm, "direction") ? row((*rm)["direction"], child(rp, "direction"), d) : Row::Ones(d);
    s.remainder = wrap(child(rp, "kind"), [&] { return remainder_schedule(rk, dir); });
  }
  s.description = m.dump();
  wrap(ptr, [&] {
    validate_spec(s);
    return 0;
  });
  return out;
}

UrnSpec parse_urn(const Json& m, const std::string& ptr, std::uint64_t seed) {
  require_object(m, ptr, {"kind", "d", "Y0", "adding_rule", "Vq", "estimate_vq", "vq_samples"});
  const int d = dimension(m, ptr);
  UrnSpec s;
  s.d = d;
  s.Y0 = row(need(m, ptr, "Y0"), child(ptr, "Y0"), d);
  const std::string ap = child(ptr, "adding_rule");
  const Json& ar = need(m, ptr, "adding_rule");
  if (!ar.is_object()) fail(ap, "object", ar);
  const std::string k = string(need(ar, ap, "kind"), child(ap, "kind"));
  if (k == "deterministic") {
    require_object(ar, ap, {"kind", "D"});
    const Matrix dm = matrix(need(ar, ap, "D"), child(ap, "D"), d);
    s.rule = wrap(ap, [&] { return deterministic_rule(dm); });
  } else if (k == "multinomial") {
    require_object(ar, ap, {"kind", "P", "scale"});
    const Matrix p = matrix(need(ar, ap, "P"), child(ap, "P"), d);
    const double sc = find(ar, "scale") ? number(ar["scale"], child(ap, "scale")) : 1.0;
    s.rule = wrap(ap, [&] { return multinomial_rule(p, sc); });
  } else if (k == "bernoulli") {
    require_object(ar, ap, {"kind", "S", "P"});
    const Matrix sm = matrix(need(ar, ap, "S"), child(ap, "S"), d);
    const Matrix p = matrix(need(ar, ap, "P"), child(ap, "P"), d);
    s.rule = wrap(ap, [&] { return bernoulli_rule(sm, p); });
  } else if (k == "removal") {
    require_object(ar, ap, {"kind", "H", "p"});
    const Matrix h = matrix(need(ar, ap, "H"), child(ap, "H"), d);
    const double p = number(need(ar, ap, "p"), child(ap, "p"));
    s.rule = wrap(ap, [&] { return removal_rule(h, p); });
  } else {
    throw ConfigError(child(ap, "kind") + ": unknown adding rule \"" + k + "\"", child(ap, "kind"));
  }
  if (const Json* vq = find(m, "Vq")) {
    const std::string vp = child(ptr, "Vq");
    if (!vq->is_array() || static_cast<int>(vq->size()) != d) fail(vp, "array of " + std::to_string(d) + " matrices", *vq);
    std::vector<Matrix> v;
    for (int q = 0; q < d; ++q) v.push_back(matrix((*vq)[q], child(vp, q), d));
    s.Vq = v;
  }
  if (const Json* e = find(m, "estimate_vq")) s.estimate_vq = boolean(*e, child(ptr, "estimate_vq"));
  if (const Json* e = find(m, "vq_samples")) s.vq_samples = unsigned_int(*e, child(ptr, "vq_samples"));
  s.vq_seed = seed;
  s.description = m.dump();
  wrap(ptr, [&] {
    validate_urn(s);
    return 0;
  });
  return s;
}

GaussModel parse_gauss(const Json& m, const std::string& ptr) {
  require_object(m, ptr, {"kind", "d", "H", "gamma", "G1", "grid"});
  const int d = dimension(m, ptr);
  GaussModel g;
  g.spec.H = matrix(need(m, ptr, "H"), child(ptr, "H"), d);
  g.gamma = matrix(need(m, ptr, "gamma"), child(ptr, "gamma"), d);
  wrap(child(ptr, "gamma"), [&] {
    require_symmetric_psd(g.gamma, 1e-10, "gamma");
    return 0;
  });
  g.spec.gamma_root = psd_root(g.gamma);
  g.spec.G1 = find(m, "G1") ? row(m["G1"], child(ptr, "G1"), d) : Row::Zero(d);
  const std::string gp = child(ptr, "grid");
  const Json& grid = need(m, ptr, "grid");
  if (grid.is_array()) {
    for (std::size_t i = 0; i < grid.size(); ++i) g.spec.grid.push_back(number(grid[i], child(gp, i)));
  } else if (grid.is_object()) {
    require_object(grid, gp, {"t_max", "steps"});
    const double tm = number(need(grid, gp, "t_max"), child(gp, "t_max"));
    const std::uint64_t steps = unsigned_int(need(grid, gp, "steps"), child(gp, "steps"));
    g.spec.grid = wrap(gp, [&] { return log_uniform_grid(tm, static_cast<int>(steps)); });
  } else {
    fail(gp, "array of times or {\"t_max\", \"steps\"}", grid);
  }
  wrap(ptr, [&] {
    validate_gauss(g.spec);
    return 0;
  });
  return g;
}

OdeModel parse_ode(const Json& m, const std::string& ptr) {
  require_object(m, ptr, {"kind", "d", "H", "theta0", "starts", "s_max", "tol", "output_every"});
  const int d = dimension(m, ptr);
  OdeModel o;
  o.H = matrix(need(m, ptr, "H"), child(ptr, "H"), d);
  if (const Json* t = find(m, "theta0")) o.starts.push_back(row(*t, child(ptr, "theta0"), d));
  if (const Json* st = find(m, "starts")) {
    const std::string sp = child(ptr, "starts");
    if (!st->is_array()) fail(sp, "array of start vectors", *st);
    for (std::size_t i = 0; i < st->size(); ++i) o.starts.push_back(row((*st)[i], child(sp, i), d));
  }
  if (o.starts.empty()) throw ConfigError(ptr + ": need \"theta0\" or \"starts\"", ptr);
  if (const Json* x = find(m, "s_max")) o.s_max = number(*x, child(ptr, "s_max"));
  if (const Json* x = find(m, "tol")) o.options.tol = number(*x, child(ptr, "tol"));
  if (const Json* x = find(m, "output_every")) o.options.output_every = number(*x, child(ptr, "output_every"));
  return o;
}

void parse_run(const Json& j, RunSection& run) {
  const std::string ptr = "/run";
  require_object(j, ptr, {"n", "replicates", "seed", "checkpoints"});
  if (const Json* x = find(j, "n")) {
    run.n = unsigned_int(*x, child(ptr, "n"));
    if (run.n < 1) fail(child(ptr, "n"), "positive integer", *x);
  }
  if (const Json* x = find(j, "replicates")) {
    run.replicates = unsigned_int(*x, child(ptr, "replicates"));
    if (run.replicates < 2) fail(child(ptr, "replicates"), "integer >= 2", *x);
  }
  if (const Json* x = find(j, "seed")) {
    run.seed = unsigned_int(*x, child(ptr, "seed"));
    run.seed_given = true;
  }
  if (const Json* x = find(j, "checkpoints")) {
    const std::string cp = child(ptr, "checkpoints");
    if (x->is_array()) {
      for (std::size_t i = 0; i < x->size(); ++i) {
        const std::uint64_t n = unsigned_int((*x)[i], child(cp, i));
        if (!run.checkpoints.empty() && n <= run.checkpoints.back()) fail(child(cp, i), "strictly increasing index", (*x)[i]);
        run.checkpoints.push_back(n);
      }
    } else if (x->is_object()) {
      require_object(*x, cp, {"dyadic_from"});
      run.dyadic_from = unsigned_int(need(*x, cp, "dyadic_from"), child(cp, "dyadic_from"));
      if (run.dyadic_from < 1) fail(child(cp, "dyadic_from"), "positive integer", (*x)["dyadic_from"]);
    } else {
      fail(cp, "array or {\"dyadic_from\": n0}", *x);
    }
  }
}

void parse_analysis(const Json& j, AnalysisSection& a, int d) {
  const std::string ptr = "/analysis";
  require_object(j, ptr, {"rho_tol", "tolerances", "chain_basis"});
  if (const Json* x = find(j, "rho_tol")) {
    a.rho_tol = number(*x, child(ptr, "rho_tol"));
    if (!(a.rho_tol > 0.0)) fail(child(ptr, "rho_tol"), "positive number", *x);
  }
  if (const Json* t = find(j, "tolerances")) {
    const std::string tp = child(ptr, "tolerances");
    require_object(*t, tp, {"cov", "ks_alpha", "path_gap"});
    if (const Json* x = find(*t, "cov")) a.tolerances.cov = number(*x, child(tp, "cov"));
    if (const Json* x = find(*t, "ks_alpha")) a.tolerances.ks_alpha = number(*x, child(tp, "ks_alpha"));
    if (const Json* x = find(*t, "path_gap")) a.tolerances.path_gap = number(*x, child(tp, "path_gap"));
  }
  if (const Json* x = find(j, "chain_basis")) {
    const std::string cp = child(ptr, "chain_basis");
    if (d <= 0) throw ConfigError(cp + ": chain_basis needs a model with \"d\"", cp);
    a.chain_basis = matrix(*x, cp, d);
  }
}

void parse_output(const Json& j, OutputSection& o) {
  const std::string ptr = "/output";
  require_object(j, ptr, {"dir", "formats"});
  if (const Json* x = find(j, "dir")) o.dir = string(*x, child(ptr, "dir"));
  if (const Json* x = find(j, "formats")) {
    const std::string fp = child(ptr, "formats");
    if (!x->is_array() || x->empty()) fail(fp, "non-empty array of \"json\"/\"csv\"", *x);
    o.formats.clear();
    for (std::size_t i = 0; i < x->size(); ++i) {
      const std::string f = string((*x)[i], child(fp, i));
      if (f != "json" && f != "csv") fail(child(fp, i), "\"json\" or \"csv\"", (*x)[i]);
      if (std::find(o.formats.begin(), o.formats.end(), f) == o.formats.end()) o.formats.push_back(f);
    }
  }
}

}  // namespace

ConfigDocument parse_config(const std::string& text, bool require_model) {
  ConfigDocument doc;
  try {
    doc.raw = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') ++line, col = 1;
      else ++col;
    }
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                          e.what(),
                      "");
  }
  const Json& j = doc.raw;
  require_object(j, "", {"model", "run", "analysis", "output"});
  doc.digest = fnv1a64_hex(canonical_json(j));
  if (const Json* r = find(j, "run")) parse_run(*r, doc.run);
  if (const Json* o = find(j, "output")) parse_output(*o, doc.output);
  int d = 0;
  if (const Json* m = find(j, "model")) {
    if (!m->is_object()) fail("/model", "object", *m);
    doc.kind = string(need(*m, "/model", "kind"), "/model/kind");
    if (doc.kind == "sa") {
      doc.sa = parse_sa(*m, "/model");
      d = doc.sa->spec.dim;
    } else if (doc.kind == "urn") {
      doc.urn = parse_urn(*m, "/model", doc.run.seed);
      d = doc.urn->d;
    } else if (doc.kind == "gauss") {
      doc.gauss = parse_gauss(*m, "/model");
      d = static_cast<int>(doc.gauss->spec.H.rows());
    } else if (doc.kind == "ode") {
      doc.ode = parse_ode(*m, "/model");
      d = static_cast<int>(doc.ode->H.rows());
    } else {
      throw ConfigError("/model/kind: expected one of \"sa\", \"urn\", \"gauss\", \"ode\", got \"" + doc.kind + "\"",
                        "/model/kind");
    }
  } else if (require_model) {
    throw ConfigError("/model: required key missing", "/model");
  }
  if (const Json* a = find(j, "analysis")) parse_analysis(*a, doc.analysis, d);
  return doc;
}

ConfigDocument load_config(const std::string& path, bool require_model) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file '" + path + "'", "");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), require_model);
}

std::vector<std::uint64_t> checkpoint_plan(const RunSection& run, std::uint64_t n_max) {
  if (!run.checkpoints.empty()) {
    std::vector<std::uint64_t> p;
    for (auto n : run.checkpoints) {
      if (n <= n_max) p.push_back(n);
    }
    if (p.empty() || p.back() != n_max) p.push_back(n_max);
    return p;
  }
  std::vector<std::uint64_t> p = dyadic_checkpoints(run.dyadic_from, n_max);
  if (p.empty() || p.back() != n_max) p.push_back(n_max);
  return p;
}

}  // namespace urnlab
