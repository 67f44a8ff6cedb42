#pragma once
// Run configuration: JSON document -> model, flow, initial data, evolution.
// Complex numbers are [re, im] (a bare number is read as real).

#include "gaudin/evolve.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>

namespace gaudin {

using json = nlohmann::json;

inline json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx to_cplx(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw Error(ErrorKind::config, where + ": expected a number or [re, im]");
}

inline json mat_json(const Mat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(cjson(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

inline Mat mat_from_json(const json& j, int N, const std::string& where) {
  if (!j.is_array() || int(j.size()) != N) throw Error(ErrorKind::config, where + ": expected an N x N matrix");
  Mat m(N, N);
  for (int r = 0; r < N; ++r) {
    if (!j[r].is_array() || int(j[r].size()) != N) throw Error(ErrorKind::config, where + ": expected an N x N matrix");
    for (int c = 0; c < N; ++c) m(r, c) = to_cplx(j[r][c], where);
  }
  return m;
}

namespace detail {

inline void allow_keys(const json& j, const std::string& block, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw Error(ErrorKind::config, block + ": expected an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw Error(ErrorKind::config, block + ": unknown key '" + k + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& block) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::config, block + "." + key + ": wrong type");
  }
}

}  // namespace detail

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> s{"pcm", "ll", "heisenberg", "cherednik2site"};
  return s;
}

/// Defaults of a named scenario; user keys are merged on top.
inline json scenario_defaults(const std::string& name) {
  const json i = cjson(I);
  json field = {{"dimension", "1+1"}, {"backend", "orbit"}, {"G", 256}, {"M", 64},
                {"init", {{"kind", "random_orbit"}, {"winding", 1}, {"harmonics", 2}, {"amplitude", 0.3}, {"theta_spread", 0.3}}}};
  json evo = {{"dt", "cfl"}, {"T", 0.1}, {"output_every", 50}};
  if (name == "heisenberg")
    return {{"model", {{"kind", "rational"}, {"N", 2}, {"marked_points", json::array({cjson(0.0)})}, {"lambda", json::array({i})}, {"k", 0.7}}},
            {"field", field}, {"flow", "second:1"}, {"evolution", evo}};
  if (name == "ll") {
    const cplx tau(0.3, 1.0);
    return {{"model", {{"kind", "elliptic"}, {"N", 2}, {"tau", cjson(tau)}, {"marked_points", json::array({cjson(0.15 + 0.2 * tau)})},
                       {"lambda", json::array({i})}, {"k", 0.7}}},
            {"field", field}, {"flow", "second:1"}, {"evolution", evo}};
  }
  if (name == "pcm")
    return {{"model", {{"kind", "rational"}, {"N", 2}, {"marked_points", json::array({cjson(0.0), cjson(1.0)})}, {"lambda", json::array({i, i})}, {"k", 0.7}}},
            {"field", field}, {"flow", "pcm"}, {"evolution", evo}};
  if (name == "cherednik2site") {
    // Square lattice and a real separation: the couplings phi_a(z_1 - z_2) are
    // then real, the flow keeps su(2) fields in su(2) and stays well posed.
    const cplx tau(0.0, 1.0);
    return {{"model", {{"kind", "elliptic"}, {"N", 2}, {"tau", cjson(tau)},
                       {"marked_points", json::array({cjson(0.15 + 0.3 * tau), cjson(0.6 + 0.3 * tau)})}, {"lambda", json::array({i, i})}, {"k", 0.7}}},
            {"field", field}, {"flow", "second:1"}, {"evolution", evo}};
  }
  throw Error(ErrorKind::config, "unknown scenario: " + name);
}

struct RunConfig {
  json doc;  // merged document
  std::optional<GaudinModel> model;
  Flow flow;
  bool field_theory = true;
  std::string backend = "orbit";
  int G = 256, M = 64;
  EvolutionSpec evolution;
  double cfl_factor = 0.2;
  std::uint64_t seed = 0;
  int z_samples = 10, x_samples = 2;
  int charges_site = 0, branch = 1;
  std::string out_dir = "out";
};

inline GaudinModel parse_model(const json& m) {
  using detail::allow_keys;
  allow_keys(m, "model", {"kind", "N", "n", "tau", "marked_points", "k", "lambda", "sl2_mode"});
  const std::string kind = detail::get_or<std::string>(m, "kind", "rational", "model");
  if (kind != "rational" && kind != "elliptic") throw Error(ErrorKind::config, "model.kind must be rational or elliptic");
  const int N = detail::get_or<int>(m, "N", 2, "model");
  if (!m.contains("marked_points") || !m["marked_points"].is_array() || m["marked_points"].empty())
    throw Error(ErrorKind::config, "model.marked_points: non-empty list required");
  std::vector<cplx> pts, lam;
  for (const auto& p : m["marked_points"]) pts.push_back(to_cplx(p, "model.marked_points"));
  if (m.contains("n") && detail::get_or<int>(m, "n", 0, "model") != int(pts.size()))
    throw Error(ErrorKind::config, "model.n differs from the number of marked points");
  if (!m.contains("lambda")) throw Error(ErrorKind::config, "model.lambda required");
  // One entry per site, or a bare number shared by all sites.
  if (m["lambda"].is_number()) {
    lam.assign(pts.size(), to_cplx(m["lambda"], "model.lambda"));
  } else if (m["lambda"].is_array() && m["lambda"].size() == pts.size()) {
    for (const auto& l : m["lambda"]) lam.push_back(to_cplx(l, "model.lambda"));
  } else {
    throw Error(ErrorKind::config, "model.lambda: one entry per marked point");
  }
  const cplx k = m.contains("k") ? to_cplx(m["k"], "model.k") : cplx(1.0);
  std::optional<EllipticContext> ctx;
  if (kind == "elliptic") {
    if (!m.contains("tau")) throw Error(ErrorKind::config, "model.tau required for elliptic models");
    ctx.emplace(to_cplx(m["tau"], "model.tau"));
  }
  std::optional<bool> sl2;
  if (m.contains("sl2_mode")) sl2 = detail::get_or<bool>(m, "sl2_mode", true, "model");
  return GaudinModel(kind == "elliptic" ? ModelKind::elliptic : ModelKind::rational, N, pts, lam, k, ctx, sl2);
}

/// "pcm", "first:1", "second:2", "h0", or a list of {kind, site, coef}. Sites are 1-based.
inline Flow parse_flow(const json& f, const GaudinModel& m) {
  auto one = [&](const std::string& s) -> FlowId {
    if (s == "h0") return FlowId::h0();
    const auto c = s.find(':');
    if (c == std::string::npos) throw Error(ErrorKind::config, "flow: expected kind:site, got '" + s + "'");
    const std::string kind = s.substr(0, c);
    int site = 0;
    try {
      site = std::stoi(s.substr(c + 1));
    } catch (...) {
      throw Error(ErrorKind::config, "flow: bad site in '" + s + "'");
    }
    if (site < 1 || site > m.n()) throw Error(ErrorKind::config, "flow: site out of range in '" + s + "'");
    if (kind == "first") return FlowId::first(site - 1);
    if (kind == "second") return FlowId::second(site - 1);
    throw Error(ErrorKind::config, "flow: unknown kind '" + kind + "'");
  };
  if (f.is_string()) {
    const std::string s = f.get<std::string>();
    if (s == "pcm") {
      if (m.n() != 2) throw Error(ErrorKind::config, "flow pcm needs two marked points");
      return pcm_flow();
    }
    return Flow(one(s));
  }
  if (!f.is_array() || f.empty()) throw Error(ErrorKind::config, "flow: expected a name or a list of terms");
  Flow out;
  for (const auto& t : f) {
    detail::allow_keys(t, "flow term", {"kind", "site", "coef"});
    const std::string kind = detail::get_or<std::string>(t, "kind", "", "flow term");
    const std::string id = kind == "h0" ? "h0" : kind + ":" + std::to_string(detail::get_or<int>(t, "site", 1, "flow term"));
    out.add(t.contains("coef") ? to_cplx(t["coef"], "flow.coef") : cplx(1.0), one(id));
  }
  return out;
}

inline EvolutionSpec parse_evolution(const json& e, double& cfl_factor, bool& use_cfl) {
  detail::allow_keys(e, "evolution", {"dt", "cfl_factor", "T", "output_every", "casimirs", "hamiltonians",
                                      "zero_curvature_spotcheck", "reproject"});
  EvolutionSpec s;
  use_cfl = e.contains("dt") && e["dt"].is_string();
  if (use_cfl && e["dt"].get<std::string>() != "cfl") throw Error(ErrorKind::config, "evolution.dt: number or \"cfl\"");
  if (!use_cfl) s.dt = detail::get_or<double>(e, "dt", s.dt, "evolution");
  cfl_factor = detail::get_or<double>(e, "cfl_factor", 0.2, "evolution");
  s.T = detail::get_or<double>(e, "T", s.T, "evolution");
  s.output_every = detail::get_or<int>(e, "output_every", s.output_every, "evolution");
  s.casimirs = detail::get_or<bool>(e, "casimirs", s.casimirs, "evolution");
  s.hamiltonians = detail::get_or<bool>(e, "hamiltonians", s.hamiltonians, "evolution");
  s.zero_curvature_spotcheck = detail::get_or<bool>(e, "zero_curvature_spotcheck", false, "evolution");
  s.reproject = detail::get_or<bool>(e, "reproject", false, "evolution");
  return s;
}

/// Validates the whole document before anything is computed.
inline RunConfig parse_config(json doc) {
  detail::allow_keys(doc, "config", {"scenario", "seed", "model", "field", "flow", "evolution", "residual", "charges", "output"});
  if (doc.contains("scenario")) {
    json base = scenario_defaults(detail::get_or<std::string>(doc, "scenario", "", "config"));
    base.merge_patch(doc);
    doc = base;
  }
  RunConfig c;
  if (!doc.contains("model")) throw Error(ErrorKind::config, "config: model block required");
  c.model.emplace(parse_model(doc["model"]));
  c.seed = detail::get_or<std::uint64_t>(doc, "seed", 0, "config");
  const json field = doc.value("field", json::object());
  detail::allow_keys(field, "field", {"dimension", "backend", "G", "M", "init"});
  const std::string dim = detail::get_or<std::string>(field, "dimension", "1+1", "field");
  if (dim != "1+1" && dim != "0+1") throw Error(ErrorKind::config, "field.dimension must be 1+1 or 0+1");
  c.field_theory = dim == "1+1";
  c.backend = detail::get_or<std::string>(field, "backend", "orbit", "field");
  if (c.backend != "orbit" && c.backend != "fourier") throw Error(ErrorKind::config, "field.backend must be orbit or fourier");
  c.G = detail::get_or<int>(field, "G", 256, "field");
  c.M = detail::get_or<int>(field, "M", 64, "field");
  if (c.field_theory && (!is_pow2(c.G) || c.G < 2 * c.M + 2 || c.M < 1))
    throw Error(ErrorKind::config, "field: G must be a power of two with G >= 2M + 2");
  if (!doc.contains("flow")) throw Error(ErrorKind::config, "config: flow block required");
  c.flow = parse_flow(doc["flow"], *c.model);
  for (const auto& [coef, id] : c.flow.terms) {
    check_flow(*c.model, id);
    if (c.field_theory && id.kind == FlowKind::h0) throw Error(ErrorKind::config, "flow h0 exists only in 0+1");
    if (c.field_theory && id.kind == FlowKind::second && c.model->N() != 2)
      throw Error(ErrorKind::config, "1+1 second flows are available for N = 2 only");
  }
  bool use_cfl = false;
  c.evolution = parse_evolution(doc.value("evolution", json::object()), c.cfl_factor, use_cfl);
  c.evolution.modes = c.M;
  if (use_cfl) {
    if (!c.field_theory) throw Error(ErrorKind::config, "evolution.dt = cfl applies to 1+1 runs only");
    c.evolution.dt = cfl_dt(*c.model, c.G, c.cfl_factor);
    c.evolution.T = std::ceil(c.evolution.T / c.evolution.dt - 1e-9) * c.evolution.dt;
  }
  c.evolution.validate();
  const json res = doc.value("residual", json::object());
  detail::allow_keys(res, "residual", {"z_samples", "x_samples"});
  c.z_samples = detail::get_or<int>(res, "z_samples", 10, "residual");
  c.x_samples = detail::get_or<int>(res, "x_samples", 2, "residual");
  if (c.z_samples < 1 || c.x_samples < 1) throw Error(ErrorKind::config, "residual: sample counts must be >= 1");
  const json ch = doc.value("charges", json::object());
  detail::allow_keys(ch, "charges", {"site", "branch"});
  c.charges_site = detail::get_or<int>(ch, "site", 1, "charges") - 1;
  c.branch = detail::get_or<int>(ch, "branch", 1, "charges");
  if (c.charges_site < 0 || c.charges_site >= c.model->n()) throw Error(ErrorKind::config, "charges.site out of range");
  if (c.branch != 1 && c.branch != -1) throw Error(ErrorKind::config, "charges.branch must be 1 or -1");
  const json out = doc.value("output", json::object());
  detail::allow_keys(out, "output", {"directory", "formats"});
  c.out_dir = detail::get_or<std::string>(out, "directory", "out", "output");
  // Initial data is checked here too, so a bad spec fails before any run.
  if (field.contains("init")) {
    const json& init = field["init"];
    if (!init.is_object() || !init.contains("kind")) throw Error(ErrorKind::config, "field.init: kind required");
  }
  c.doc = std::move(doc);
  return c;
}

// ---- initial data ---------------------------------------------------------

inline OrbitSpec orbit_from_json(const json& o, cplx lambda) {
  detail::allow_keys(o, "orbit", {"theta0", "theta_winding", "theta_amp", "theta_phase", "phi0", "phi_winding",
                                  "phi_amp", "phi_phase"});
  OrbitSpec s;
  s.lambda = lambda;
  s.theta0 = detail::get_or<double>(o, "theta0", s.theta0, "orbit");
  s.theta_winding = detail::get_or<int>(o, "theta_winding", 0, "orbit");
  s.theta_amp = detail::get_or<std::vector<double>>(o, "theta_amp", {}, "orbit");
  s.theta_phase = detail::get_or<std::vector<double>>(o, "theta_phase", {}, "orbit");
  s.phi0 = detail::get_or<double>(o, "phi0", 0.0, "orbit");
  s.phi_winding = detail::get_or<int>(o, "phi_winding", 0, "orbit");
  s.phi_amp = detail::get_or<std::vector<double>>(o, "phi_amp", {}, "orbit");
  s.phi_phase = detail::get_or<std::vector<double>>(o, "phi_phase", {}, "orbit");
  return s;
}

/// Per-site mode arrays as written by loop_state_json.
inline LoopState loop_state_from_json(const json& j, const GaudinModel& m) {
  if (!j.contains("sites") || !j["sites"].is_array() || int(j["sites"].size()) != m.n())
    throw Error(ErrorKind::config, "field file: one entry per site required");
  LoopState st{{}, detail::get_or<int>(j, "G", 256, "field file")};
  for (const auto& s : j["sites"]) {
    FourierSpec f;
    f.N = detail::get_or<int>(s, "N", m.N(), "field file");
    f.M = detail::get_or<int>(s, "M", 0, "field file");
    if (!s.contains("modes")) throw Error(ErrorKind::config, "field file: modes required");
    for (const auto& e : s["modes"]) {
      Modes md;
      for (const auto& v : e) md.push_back(to_cplx(v, "field file modes"));
      f.entries.push_back(md);
    }
    st.fields.push_back(LoopField::fourier(f));
  }
  return st;
}

inline json loop_state_json(const LoopState& st, int modes_m) {
  json sites = json::array();
  const LoopState fs = st.to_fourier(modes_m);
  for (const auto& f : fs.fields) {
    const FourierSpec& s = f.fourier_spec();
    json modes = json::array();
    for (const Modes& e : s.entries) {
      json arr = json::array();
      for (const cplx& v : e) arr.push_back(cjson(v));
      modes.push_back(arr);
    }
    sites.push_back({{"N", s.N}, {"M", s.M}, {"modes", modes}});
  }
  return {{"G", st.G}, {"sites", sites}};
}

inline LoopState initial_loop_state(const RunConfig& c) {
  const GaudinModel& m = *c.model;
  const json init = c.doc.contains("field") && c.doc["field"].contains("init")
                        ? c.doc["field"]["init"]
                        : json{{"kind", "random_orbit"}};
  const std::string kind = init.at("kind").get<std::string>();
  LoopState st{{}, c.G};
  if (kind == "random_orbit") {
    detail::allow_keys(init, "field.init", {"kind", "winding", "harmonics", "amplitude", "theta_spread"});
    if (m.N() != 2) throw Error(ErrorKind::config, "orbit fields are N = 2 only");
    PhaseSpec p;
    p.winding = detail::get_or<double>(init, "winding", p.winding, "field.init");
    p.harmonics = detail::get_or<int>(init, "harmonics", p.harmonics, "field.init");
    p.amplitude = detail::get_or<double>(init, "amplitude", p.amplitude, "field.init");
    p.theta_spread = detail::get_or<double>(init, "theta_spread", p.theta_spread, "field.init");
    for (int a = 0; a < m.n(); ++a) st.fields.push_back(sample_orbit_field(m.lambda(a), p, c.seed * 1000003ULL + a));
  } else if (kind == "orbit") {
    detail::allow_keys(init, "field.init", {"kind", "sites"});
    if (m.N() != 2) throw Error(ErrorKind::config, "orbit fields are N = 2 only");
    if (!init.contains("sites") || int(init["sites"].size()) != m.n())
      throw Error(ErrorKind::config, "field.init.sites: one orbit per site");
    for (int a = 0; a < m.n(); ++a) st.fields.push_back(LoopField::orbit(orbit_from_json(init["sites"][a], m.lambda(a))));
  } else if (kind == "file") {
    detail::allow_keys(init, "field.init", {"kind", "path"});
    const std::string path = detail::get_or<std::string>(init, "path", "", "field.init");
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot read field file " + path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(ErrorKind::config, std::string("field file: ") + e.what());
    }
    st = loop_state_from_json(j, m);
    st.G = c.G;
  } else {
    throw Error(ErrorKind::config, "field.init.kind must be random_orbit, orbit or file");
  }
  check_loop(m, st);
  if (c.backend == "fourier" && !(kind == "file")) st = st.to_fourier(c.M);
  return st;
}

inline SpinState initial_spin_state(const RunConfig& c) {
  const GaudinModel& m = *c.model;
  const json init = c.doc.contains("field") && c.doc["field"].contains("init")
                        ? c.doc["field"]["init"]
                        : json{{"kind", "random_onshell"}};
  const std::string kind = init.at("kind").get<std::string>();
  if (kind == "random_onshell") {
    detail::allow_keys(init, "field.init", {"kind", "conjugation"});
    const std::string how = detail::get_or<std::string>(init, "conjugation", "unitary", "field.init");
    if (how != "unitary" && how != "general") throw Error(ErrorKind::config, "conjugation must be unitary or general");
    std::mt19937_64 rng(c.seed);
    return random_onshell_state(m, rng, how == "unitary" ? Conjugation::unitary : Conjugation::general);
  }
  if (kind == "matrices") {
    detail::allow_keys(init, "field.init", {"kind", "sites"});
    if (!init.contains("sites") || int(init["sites"].size()) != m.n())
      throw Error(ErrorKind::config, "field.init.sites: one matrix per site");
    SpinState s;
    for (const auto& x : init["sites"]) s.push_back(mat_from_json(x, m.N(), "field.init.sites"));
    check_state(m, s);
    return s;
  }
  throw Error(ErrorKind::config, "0+1 field.init.kind must be random_onshell or matrices");
}

}  // namespace gaudin
