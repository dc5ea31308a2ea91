#include "urnlab/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <ostream>

#include "urnlab/appendix.hpp"
#include "urnlab/config.hpp"
#include "urnlab/digest.hpp"
#include "urnlab/errors.hpp"

namespace urnlab {

namespace {

struct Context {
  ConfigDocument doc;
  std::string config_digest;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::filesystem::path dir;
  bool json = true;
  bool csv = true;
  std::vector<std::string> written;
  std::ostream* out = nullptr;
};

// Flag, then config, then URNLAB_SEED, then 0.
std::uint64_t resolve_seed(const CommandFlags& f, const ConfigDocument& doc) {
  if (f.seed) return *f.seed;
  if (doc.run.seed_given) return doc.run.seed;
  if (const char* env = std::getenv("URNLAB_SEED")) {
    try {
      std::size_t pos = 0;
      const std::string s(env);
      const unsigned long long v = std::stoull(s, &pos, 10);
      if (pos != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("URNLAB_SEED must be an unsigned 64-bit integer, got '" + std::string(env) + "'", "");
    }
  }
  return 0;
}

Json provenance(const Context& c, const std::string& command) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"config_digest", c.config_digest},
          {"command", command}, {"seed", c.seed}};
}

void write_json(Context& c, const std::string& name, const Json& j) {
  if (!c.json) return;
  const auto p = (c.dir / name).string();
  emit_report(j, "json", p);
  c.written.push_back(p);
}

void write_csv(Context& c, const std::string& name, const std::string& text) {
  if (!c.csv) return;
  const auto p = (c.dir / name).string();
  emit_report(Json(text), "csv", p);
  c.written.push_back(p);
}

void require_kind(const Context& c, const std::string& kind, const std::string& command) {
  if (c.doc.kind != kind) {
    throw ConfigError("/model/kind: '" + command + "' needs a \"" + kind + "\" model, got \"" + c.doc.kind + "\"",
                      "/model/kind");
  }
}

Json urn_json(const UrnAsymptotics& a) {
  Json j{{"regime", regime_name(a.regime.tag)},
         {"rho", a.regime.rho},
         {"nu", a.regime.nu},
         {"scaling", a.regime.scaling},
         {"alpha", a.eig.alpha},
         {"H_rescaled", to_json(a.eig.H)},
         {"v", to_json(a.eig.v)},
         {"u", to_json(a.eig.u)},
         {"spectral_profile", to_json(a.eig.profile)},
         {"Dh_star", to_json(a.embedding.Dh_star)},
         {"Gamma", to_json(a.embedding.Gamma)},
         {"Sigma1", to_json(a.embedding.Sigma1)},
         {"Sigma2", to_json(a.embedding.Sigma2)}};
  j["lambda_sec"] = a.eig.lambda_sec ? Json(*a.eig.lambda_sec) : Json(nullptr);
  Json vq = Json::array();
  for (const auto& m : a.Vq) vq.push_back(to_json(m));
  j["Vq"] = vq;
  if (a.Sigma_tilde) j["sigma_tilde"] = to_json(*a.Sigma_tilde);
  Json comps = Json::array();
  for (const auto& s : a.slow_components) {
    comps.push_back({{"lambda", to_json(s.lambda)}, {"frequency", s.frequency}, {"left", to_json(s.left)},
                     {"direction", to_json(s.direction)}});
  }
  if (!comps.empty()) j["slow_components"] = comps;
  return j;
}

UrnAnalysisOptions urn_options(const Context& c) {
  UrnAnalysisOptions o;
  o.rho_tol = c.doc.analysis.rho_tol;
  o.chain_basis = c.doc.analysis.chain_basis;
  return o;
}

int cmd_analyze(Context& c) {
  Json j = provenance(c, "analyze");
  std::optional<Matrix> cov;
  if (c.doc.kind == "sa" || c.doc.kind == "gauss") {
    const Matrix dh = c.doc.kind == "sa" ? c.doc.sa->dh : c.doc.gauss->spec.H;
    const Matrix gamma = c.doc.kind == "sa" ? c.doc.sa->gamma : c.doc.gauss->gamma;
    AnalysisOptions o;
    o.rho_tol = c.doc.analysis.rho_tol;
    o.chain_basis = c.doc.analysis.chain_basis;
    const AsymptoticReport r = analyze(dh, gamma, o);
    j["analysis"] = to_json(r);
    cov = r.covariance;
  } else if (c.doc.kind == "urn") {
    const UrnAsymptotics a = urn_asymptotics(*c.doc.urn, urn_options(c));
    j["analysis"] = urn_json(a);
    cov = a.Sigma_tilde;
  } else if (c.doc.kind == "ode") {
    const UrnEigen e = urn_eigenstructure(c.doc.ode->H);
    Json a{{"alpha", e.alpha}, {"H_rescaled", to_json(e.H)}, {"v", to_json(e.v)}, {"u", to_json(e.u)},
           {"nu", e.nu}, {"spectral_profile", to_json(e.profile)}};
    a["lambda_sec"] = e.lambda_sec ? Json(*e.lambda_sec) : Json(nullptr);
    j["analysis"] = a;
  }
  j["note"] = kStableNote;
  write_json(c, "analyze.json", j);
  if (cov) write_csv(c, "covariance.csv", matrix_csv(*cov));
  return 0;
}

int cmd_simulate(Context& c, const std::string& command) {
  const RunSection& run = c.doc.run;
  Json j = provenance(c, command);
  j["kind"] = c.doc.kind;
  if (c.doc.kind == "sa") {
    const auto plan = checkpoint_plan(run, run.n);
    const Trajectory t = run_sa(c.doc.sa->spec, run.n, c.seed, plan);
    j["spec_digest"] = t.spec_digest;
    j["n"] = run.n;
    j["checkpoints"] = plan;
    write_csv(c, "trajectory.csv", trajectory_csv(t.checkpoints, "n", "theta_"));
  } else if (c.doc.kind == "urn") {
    const auto plan = checkpoint_plan(run, run.n);
    const UrnTrajectory t = run_urn(*c.doc.urn, run.n, c.seed, plan);
    j["spec_digest"] = t.spec_digest;
    j["n"] = run.n;
    j["checkpoints"] = plan;
    write_csv(c, "urn.csv", urn_csv(t.checkpoints));
  } else if (c.doc.kind == "gauss") {
    const auto path = simulate_gaussian_process(c.doc.gauss->spec, c.seed);
    j["spec_digest"] = fnv1a64_hex(c.doc.raw["model"].dump());
    j["grid_points"] = path.size();
    write_csv(c, "gauss.csv", gauss_csv(path));
  } else if (c.doc.kind == "ode") {
    const OdeModel& o = *c.doc.ode;
    j["spec_digest"] = fnv1a64_hex(c.doc.raw["model"].dump());
    j["s_max"] = o.s_max;
    j["starts"] = o.starts.size();
    for (std::size_t i = 0; i < o.starts.size(); ++i) {
      const auto states = integrate_flow(o.starts[i], o.H, o.s_max, o.options);
      write_csv(c, o.starts.size() == 1 ? "flow.csv" : "flow_" + std::to_string(i + 1) + ".csv", flow_csv(states));
    }
  }
  Json files = Json::array();
  for (const auto& f : c.written) files.push_back(std::filesystem::path(f).filename().string());
  j["files"] = files;
  write_json(c, command + ".json", j);
  return 0;
}

std::vector<std::uint64_t> horizons(const RunSection& run) {
  std::vector<std::uint64_t> h;
  for (auto n : run.checkpoints) {
    if (n >= 3 && n <= run.n) h.push_back(n);
  }
  if (h.empty() || h.back() != run.n) h.push_back(run.n);
  return h;
}

int cmd_verify(Context& c) {
  const RunSection& run = c.doc.run;
  if (run.n < 3) throw ConfigError("/run/n: verify needs n >= 3", "/run/n");
  MCConfig cfg;
  cfg.replicates = run.replicates;
  cfg.horizons = horizons(run);
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  Matrix predicted;
  Regime regime;
  MCSamples s;
  if (c.doc.kind == "sa") {
    AnalysisOptions o;
    o.rho_tol = c.doc.analysis.rho_tol;
    o.chain_basis = c.doc.analysis.chain_basis;
    const AsymptoticReport r = analyze(c.doc.sa->dh, c.doc.sa->gamma, o);
    if (!r.covariance) throw RegimeError("verify: the slow regime has no Gaussian limit to compare against");
    predicted = *r.covariance;
    regime = r.regime;
    s = mc_sample(c.doc.sa->spec, regime, cfg);
  } else if (c.doc.kind == "urn") {
    const UrnAsymptotics a = urn_asymptotics(*c.doc.urn, urn_options(c));
    if (!a.Sigma_tilde) throw RegimeError("verify: the slow regime has no Gaussian limit to compare against");
    predicted = *a.Sigma_tilde;
    regime = a.regime;
    s = mc_sample(*c.doc.urn, a, cfg);
  } else {
    throw ConfigError("/model/kind: verify supports \"sa\" and \"urn\" models, got \"" + c.doc.kind + "\"",
                      "/model/kind");
  }
  const double cov_tol =
      c.doc.analysis.tolerances.cov.value_or(regime.tag == RegimeTag::Critical ? 0.25 : 0.15);
  Json reports = Json::array();
  bool pass = false;
  for (std::size_t h = 0; h < s.horizons.size(); ++h) {
    MCReport rep = mc_report(s.scaled[h], predicted, s.horizons[h], cov_tol, c.doc.analysis.tolerances.ks_alpha);
    rep.excluded = s.excluded.size();
    pass = rep.pass;
    reports.push_back(to_json(rep));
    write_csv(c, "samples_" + std::to_string(s.horizons[h]) + ".csv", matrix_csv(s.scaled[h]));
  }
  Json j = provenance(c, "verify");
  j["regime"] = to_json(regime);
  j["replicates"] = run.replicates;
  j["excluded_replicates"] = s.excluded;
  j["reports"] = reports;
  j["pass"] = pass;
  j["judged_horizon"] = s.horizons.back();
  j["note"] = kStableNote;
  write_json(c, "verify.json", j);
  if (!pass) *c.out << "verification failed at n = " << s.horizons.back() << "\n";
  return pass ? 0 : 1;
}

int cmd_suite(Context& c, std::ostream& err) {
  SuiteOptions o;
  o.seed = c.seed;
  o.threads = c.threads;
  const SuiteReport rep = appendix_suite(o);
  Json j = rep.json;
  const Json prov = provenance(c, "suite");
  for (auto& [k, v] : prov.items()) j[k] = v;
  write_json(c, "suite.json", j);
  for (const auto& f : rep.failed) err << "suite: criterion failed: " << f << "\n";
  return rep.pass ? 0 : 1;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"analyze", "simulate", "urn", "gauss", "ode", "verify", "suite"};
  return s;
}

int run_command(const std::string& sub, const CommandFlags& flags, std::ostream& out, std::ostream& err) {
  try {
    if (std::find(subcommands().begin(), subcommands().end(), sub) == subcommands().end()) {
      throw InvalidArgument("unknown subcommand '" + sub + "'");
    }
    Context c;
    c.out = &out;
    const bool need_model = sub != "suite";
    if (flags.config_path) {
      c.doc = load_config(*flags.config_path, need_model);
    } else if (need_model) {
      throw ConfigError("'" + sub + "' needs --config", "");
    } else {
      c.doc = parse_config("{}", false);
    }
    c.config_digest = c.doc.digest;
    c.seed = resolve_seed(flags, c.doc);
    c.threads = std::max(1u, flags.threads);
    c.dir = flags.out_dir ? *flags.out_dir : c.doc.output.dir;
    if (flags.format) {
      if (*flags.format != "json" && *flags.format != "csv" && *flags.format != "both") {
        throw InvalidArgument("--format must be json, csv or both");
      }
      c.json = *flags.format != "csv";
      c.csv = *flags.format != "json";
    } else {
      const auto& f = c.doc.output.formats;
      c.json = std::find(f.begin(), f.end(), "json") != f.end();
      c.csv = std::find(f.begin(), f.end(), "csv") != f.end();
    }
    if (c.doc.urn && c.doc.urn->vq_seed != c.seed) c.doc.urn->vq_seed = c.seed;
    std::filesystem::create_directories(c.dir);

    int code = 0;
    if (sub == "analyze") code = cmd_analyze(c);
    else if (sub == "simulate") code = cmd_simulate(c, "simulate");
    else if (sub == "urn" || sub == "gauss" || sub == "ode") {
      require_kind(c, sub, sub);
      code = cmd_simulate(c, sub);
    } else if (sub == "verify") code = cmd_verify(c);
    else code = cmd_suite(c, err);
    for (const auto& p : c.written) out << "wrote " << p << "\n";
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const SpectrumError& e) {
    err << "spectrum error: " << e.what() << " (eigenvalue " << format_complex(e.eigenvalue) << ")\n";
    return 2;
  } catch (const RegimeError& e) {
    err << "regime error: " << e.what() << "\n";
    return 2;
  } catch (const NeedsChainBasis& e) {
    err << "needs chain basis: " << e.what() << " (set /analysis/chain_basis)\n";
    return 2;
  } catch (const InvalidBasis& e) {
    err << "invalid chain basis: " << e.what() << "\n";
    return 2;
  } catch (const AssumptionViolation& e) {
    err << "assumption violated: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace urnlab
