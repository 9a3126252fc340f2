#pragma once

// JSON run configurations for the qgeom tool. Everything is parsed and validated up front;
// parse functions throw qgeom::Error of kind Config.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "qgeom/qgeom.hpp"

namespace qgeom::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------------------------

inline void only_keys(const json & j, const std::string & where, std::initializer_list<const char *> allowed)
{
  if (!j.is_object()) { throw config_error(where + ": expected an object"); }
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto & [k, v] : j.items()) {
    if (!ok.count(k)) { throw config_error(where + ": unknown key '" + k + "'"); }
  }
}

inline const json & need(const json & j, const std::string & where, const char * key)
{
  if (!j.contains(key)) { throw config_error(where + ": missing key '" + key + "'"); }
  return j.at(key);
}

inline double as_number(const json & j, const std::string & where)
{
  if (!j.is_number()) { throw config_error(where + ": expected a number"); }
  return j.get<double>();
}

inline std::uint64_t as_count(const json & j, const std::string & where, std::uint64_t min = 0)
{
  if (!j.is_number_integer() || j.get<std::int64_t>() < std::int64_t(min)) {
    throw config_error(where + ": expected an integer >= " + std::to_string(min));
  }
  return j.get<std::uint64_t>();
}

inline std::string as_string(const json & j, const std::string & where)
{
  if (!j.is_string()) { throw config_error(where + ": expected a string"); }
  return j.get<std::string>();
}

/// A scalar or a list of scalars, for sweep axes.
inline std::vector<std::uint64_t> as_count_list(const json & j, const std::string & where, std::uint64_t min)
{
  std::vector<std::uint64_t> out;
  if (j.is_array()) {
    if (j.empty()) { throw config_error(where + ": empty list"); }
    for (std::size_t i = 0; i < j.size(); ++i) { out.push_back(as_count(j[i], where + "[" + std::to_string(i) + "]", min)); }
  } else {
    out.push_back(as_count(j, where, min));
  }
  return out;
}

inline unsigned as_qubits(const json & j, const std::string & where)
{
  const auto n = as_count(j, where, 1);
  if (n > kMaxQubits) { throw config_error(where + ": at most " + std::to_string(kMaxQubits) + " qubits"); }
  return unsigned(n);
}

template<typename F>
auto rethrow_as_config(const std::string & where, F f)
{
  try {
    return f();
  } catch (const Error & e) {
    if (e.kind() == ErrorKind::Argument) { throw config_error(where + ": " + e.what()); }
    throw;
  }
}

/// "XZI" or {"sum": [{"pauli": "XZI", "coeff": 1.0}, ...]}.
inline HermitianCoeffs parse_operator(const json & j, unsigned n, const std::string & where)
{
  return rethrow_as_config(where, [&] {
    if (j.is_string()) {
      const auto p = PauliString::parse(j.get<std::string>());
      if (p.qubits() != n) { throw config_error(where + ": string '" + p.str() + "' does not act on " + std::to_string(n) + " qubits"); }
      return HermitianCoeffs::single(p);
    }
    only_keys(j, where, {"sum"});
    const auto & s = need(j, where, "sum");
    if (!s.is_array() || s.empty()) { throw config_error(where + ".sum: expected a nonempty list"); }
    HermitianCoeffs h(n);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string w = where + ".sum[" + std::to_string(i) + "]";
      only_keys(s[i], w, {"pauli", "coeff"});
      const auto p = PauliString::parse(as_string(need(s[i], w, "pauli"), w + ".pauli"));
      if (p.qubits() != n) { throw config_error(w + ": string '" + p.str() + "' does not act on " + std::to_string(n) + " qubits"); }
      h.add(p, s[i].contains("coeff") ? as_number(s[i]["coeff"], w + ".coeff") : 1.0);
    }
    return h.prune(0.0);
  });
}

/// Dense complex matrix stored as {"real": [[...]], "imag": [[...]]}.
inline DenseMatrix read_dense_matrix(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) { throw config_error("cannot open matrix file " + path.string()); }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception & e) {
    throw config_error("matrix file " + path.string() + ": " + e.what());
  }
  const std::string where = path.string();
  only_keys(j, where, {"real", "imag"});
  const auto & re = need(j, where, "real");
  if (!re.is_array() || re.empty()) { throw config_error(where + ": 'real' must be a nonempty list of rows"); }
  const auto d = Eigen::Index(re.size());
  DenseMatrix m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (const char * part : {"real", "imag"}) {
      if (!j.contains(part)) { continue; }
      const auto & row = j[part].at(std::size_t(r));
      if (!row.is_array() || Eigen::Index(row.size()) != d) { throw config_error(where + ": matrix must be square"); }
    }
    for (Eigen::Index c = 0; c < d; ++c) {
      const double a = as_number(re[std::size_t(r)][std::size_t(c)], where);
      const double b = j.contains("imag") ? as_number(j["imag"][std::size_t(r)][std::size_t(c)], where) : 0.0;
      m(r, c)        = Complex(a, b);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------------------------
// generator families for n sweeps
// ---------------------------------------------------------------------------------------------

/// X and Z on every site plus ZZ on neighbours; generates su(2^n).
inline std::vector<HermitianCoeffs> xz_chain(unsigned n)
{
  std::vector<HermitianCoeffs> out;
  for (Letter l : {Letter::X, Letter::Z}) {
    for (unsigned i = 0; i < n; ++i) {
      PauliString p(n);
      p.set(i, l);
      out.push_back(HermitianCoeffs::single(p));
    }
  }
  for (unsigned i = 0; i + 1 < n; ++i) {
    PauliString p(n);
    p.set(i, Letter::Z);
    p.set(i + 1, Letter::Z);
    out.push_back(HermitianCoeffs::single(p));
  }
  return out;
}

/// Z on every site; abelian.
inline std::vector<HermitianCoeffs> z_only(unsigned n)
{
  std::vector<HermitianCoeffs> out;
  for (unsigned i = 0; i < n; ++i) {
    PauliString p(n);
    p.set(i, Letter::Z);
    out.push_back(HermitianCoeffs::single(p));
  }
  return out;
}

inline std::vector<HermitianCoeffs> family(const std::string & name, unsigned n, const std::string & where)
{
  if (name == "xz_chain") { return xz_chain(n); }
  if (name == "z_only") { return z_only(n); }
  throw config_error(where + ": unknown generator family '" + name + "' (known: xz_chain, z_only)");
}

// ---------------------------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------------------------

struct Common
{
  std::uint64_t seed{1};
  std::filesystem::path base_dir;
};

inline json load_config(const std::filesystem::path & path, const char * command)
{
  std::ifstream in(path);
  if (!in) { throw config_error("cannot open config " + path.string()); }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception & e) {
    throw config_error("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) { throw config_error("config: top level must be an object"); }
  const auto v = as_count(need(j, "config", "schema_version"), "schema_version");
  if (v != kSchemaVersion) { throw config_error("config: unsupported schema_version " + std::to_string(v) + " (expected 1)"); }
  if (j.contains("command") && as_string(j["command"], "command") != command) {
    throw config_error(std::string("config: written for command '") + j["command"].get<std::string>() + "', not '" + command + "'");
  }
  return j;
}

struct DlaConfig
{
  Common common;
  unsigned n{0};
  std::vector<HermitianCoeffs> generators;
  std::size_t max_dim{0};
};

inline DlaConfig parse_dla(const json & j)
{
  only_keys(j, "config", {"schema_version", "command", "n", "generators", "max_dim", "seed"});
  DlaConfig c;
  c.n              = as_qubits(need(j, "config", "n"), "n");
  const auto & gen = need(j, "config", "generators");
  if (!gen.is_array() || gen.empty()) { throw config_error("generators: expected a nonempty list"); }
  for (std::size_t i = 0; i < gen.size(); ++i) { c.generators.push_back(parse_operator(gen[i], c.n, "generators[" + std::to_string(i) + "]")); }
  c.max_dim = j.contains("max_dim") ? as_count(j["max_dim"], "max_dim", 1) : std::size_t(std::min<std::uint64_t>(pauli_count(c.n), 4096));
  if (c.max_dim < c.generators.size()) { throw config_error("max_dim: smaller than the generator count"); }
  if (j.contains("seed")) { c.common.seed = as_count(j["seed"], "seed"); }
  return c;
}

struct GeodesicConfig
{
  Common common;
  unsigned n{0};
  HermitianCoeffs target{1};
  PenaltyMetric metric{1, WeightScheme::Standard};
  std::size_t grid{kDefaultGeodesicGrid};
  std::size_t probe_paths{50};
  double probe_amplitude{0.1};
};

inline PenaltyMetric parse_metric(const json & j, unsigned n)
{
  if (j.is_string()) { return rethrow_as_config("metric", [&] { return penalty_weights(n, j.get<std::string>()); }); }
  only_keys(j, "metric", {"scheme", "weights", "default"});
  const auto scheme = rethrow_as_config("metric.scheme", [&] { return parse_weight_scheme(as_string(need(j, "metric", "scheme"), "metric.scheme")); });
  if (scheme == WeightScheme::Standard) {
    if (j.contains("weights") || j.contains("default")) { throw config_error("metric: weights only apply to the custom scheme"); }
    return PenaltyMetric(n, scheme);
  }
  std::map<std::uint64_t, double> w;
  if (j.contains("weights")) {
    const auto & ws = j["weights"];
    if (!ws.is_object()) { throw config_error("metric.weights: expected an object of string -> weight"); }
    for (const auto & [k, v] : ws.items()) {
      const auto p = rethrow_as_config("metric.weights", [&] { return PauliString::parse(k); });
      if (p.qubits() != n) { throw config_error("metric.weights: '" + k + "' does not act on " + std::to_string(n) + " qubits"); }
      w[p.index()] = as_number(v, "metric.weights." + k);
    }
  }
  const double def = j.contains("default") ? as_number(j["default"], "metric.default") : 1.0;
  return rethrow_as_config("metric", [&] { return PenaltyMetric::custom(n, w, def); });
}

inline GeodesicConfig parse_geodesic(const json & j)
{
  only_keys(j, "config", {"schema_version", "command", "n", "target", "metric", "grid", "probe_paths", "probe_amplitude", "seed"});
  GeodesicConfig c;
  c.n = as_qubits(need(j, "config", "n"), "n");
  const auto & t = need(j, "config", "target");
  if (t.is_object() && t.contains("sum") && t["sum"].is_array() && t["sum"].empty()) {
    c.target = HermitianCoeffs(c.n);
  } else {
    c.target = parse_operator(t, c.n, "target");
  }
  c.metric = j.contains("metric") ? parse_metric(j["metric"], c.n) : PenaltyMetric(c.n, WeightScheme::Standard);
  if (j.contains("grid")) { c.grid = as_count(j["grid"], "grid", 2); }
  if (j.contains("probe_paths")) { c.probe_paths = as_count(j["probe_paths"], "probe_paths"); }
  if (j.contains("probe_amplitude")) {
    c.probe_amplitude = as_number(j["probe_amplitude"], "probe_amplitude");
    if (!(c.probe_amplitude > 0)) { throw config_error("probe_amplitude: must be positive"); }
  }
  if (j.contains("seed")) { c.common.seed = as_count(j["seed"], "seed"); }
  return c;
}

/// Observable given as an operator, or {"local": "Z", "site": 1} padded with identities.
struct ObservableSpec
{
  std::optional<json> op;
  char local{'Z'};
  unsigned site{1};

  HermitianCoeffs build(unsigned n, const std::string & where) const
  {
    if (op) { return parse_operator(*op, n, where); }
    if (site > n) { throw config_error(where + ": site " + std::to_string(site) + " outside " + std::to_string(n) + " qubits"); }
    std::string s(n, 'I');
    s[site - 1] = local;
    return HermitianCoeffs::single(PauliString::parse(s));
  }
};

struct RhoSpec
{
  std::optional<DenseMatrix> dense;
};

struct VarianceConfig
{
  Common common;
  std::vector<unsigned> qubits;
  std::optional<json> generators;  // explicit list, requires a single n
  std::string family;
  std::vector<std::uint64_t> layers;
  std::optional<std::vector<double>> periods;
  RhoSpec rho;
  ObservableSpec observable;
  std::size_t samples{10000};
  bool two_design{true};
  std::size_t two_design_samples{0};
  std::size_t max_dim{256};
  unsigned workers{1};
};

inline VarianceConfig parse_variance(const json & j, const std::filesystem::path & base)
{
  only_keys(j, "config",
            {"schema_version", "command", "n", "generators", "family", "layers", "periods", "rho", "observable", "samples", "seed", "two_design",
             "max_dim", "workers"});
  VarianceConfig c;
  c.common.base_dir = base;
  for (auto v : as_count_list(need(j, "config", "n"), "n", 1)) {
    if (v > 10) { throw config_error("n: variance runs support at most 10 qubits"); }
    c.qubits.push_back(unsigned(v));
  }
  if (j.contains("generators") == j.contains("family")) { throw config_error("config: give exactly one of 'generators' or 'family'"); }
  if (j.contains("generators")) {
    if (c.qubits.size() != 1) { throw config_error("generators: an explicit list needs a single n; use 'family' to sweep n"); }
    const auto & g = j["generators"];
    if (!g.is_array() || g.empty()) { throw config_error("generators: expected a nonempty list"); }
    for (std::size_t i = 0; i < g.size(); ++i) { parse_operator(g[i], c.qubits[0], "generators[" + std::to_string(i) + "]"); }
    c.generators = g;
  } else {
    c.family = as_string(j["family"], "family");
    family(c.family, 1, "family");
  }
  c.layers = as_count_list(need(j, "config", "layers"), "layers", 1);
  if (j.contains("periods")) {
    const auto & p = j["periods"];
    if (p.is_string()) {
      if (p.get<std::string>() != "auto") { throw config_error("periods: expected \"auto\" or a list of positive numbers"); }
    } else if (p.is_array()) {
      std::vector<double> v;
      for (std::size_t i = 0; i < p.size(); ++i) {
        v.push_back(as_number(p[i], "periods[" + std::to_string(i) + "]"));
        if (!(v.back() > 0)) { throw config_error("periods: must be positive"); }
      }
      if (!c.generators || v.size() != c.generators->size()) { throw config_error("periods: list length must match an explicit generator list"); }
      c.periods = v;
    } else {
      throw config_error("periods: expected \"auto\" or a list");
    }
  }
  if (j.contains("rho")) {
    const auto & r = j["rho"];
    if (r.is_string()) {
      if (r.get<std::string>() != "computational_zero") { throw config_error("rho: expected \"computational_zero\" or {\"file\": path}"); }
    } else {
      only_keys(r, "rho", {"file"});
      if (c.qubits.size() != 1) { throw config_error("rho: a dense file needs a single n"); }
      c.rho.dense = read_dense_matrix(base / as_string(need(r, "rho", "file"), "rho.file"));
      if (c.rho.dense->rows() != Eigen::Index(dimension_of(c.qubits[0]))) { throw config_error("rho: matrix dimension does not match n"); }
    }
  }
  const auto & o = need(j, "config", "observable");
  if (o.is_object() && o.contains("local")) {
    only_keys(o, "observable", {"local", "site"});
    const auto l = as_string(o["local"], "observable.local");
    if (l.size() != 1 || std::string("XYZ").find(l[0]) == std::string::npos) { throw config_error("observable.local: one of X, Y, Z"); }
    c.observable.local = l[0];
    c.observable.site  = o.contains("site") ? unsigned(as_count(o["site"], "observable.site", 1)) : 1u;
  } else {
    c.observable.op = o;
  }
  for (unsigned n : c.qubits) { c.observable.build(n, "observable"); }
  if (j.contains("samples")) { c.samples = as_count(j["samples"], "samples", 100); }
  if (j.contains("seed")) { c.common.seed = as_count(j["seed"], "seed"); }
  if (j.contains("two_design")) {
    const auto & t = j["two_design"];
    if (t.is_boolean()) {
      c.two_design = t.get<bool>();
    } else {
      only_keys(t, "two_design", {"check", "samples"});
      if (t.contains("check")) {
        if (!t["check"].is_boolean()) { throw config_error("two_design.check: expected true or false"); }
        c.two_design = t["check"].get<bool>();
      }
      if (t.contains("samples")) { c.two_design_samples = as_count(t["samples"], "two_design.samples", 200); }
    }
  }
  if (j.contains("max_dim")) { c.max_dim = as_count(j["max_dim"], "max_dim", 1); }
  if (j.contains("workers")) { c.workers = unsigned(as_count(j["workers"], "workers", 1)); }
  return c;
}

struct TwirlConfig
{
  Common common;
  bool haar{true};
  Eigen::Index dim{2};
  HaarGroup group{HaarGroup::Unitary};
  std::optional<AnsatzSpec> ansatz;
  int k{1};
  DenseMatrix m;
  std::size_t samples{10000};
  std::optional<std::string> probe;
  std::size_t invariance_samples{0};
  unsigned workers{1};
};

inline TwirlConfig parse_twirl(const json & j, const std::filesystem::path & base)
{
  only_keys(j, "config", {"schema_version", "command", "source", "k", "M", "samples", "seed", "invariance", "workers"});
  TwirlConfig c;
  c.common.base_dir = base;
  const auto & src  = need(j, "config", "source");
  only_keys(src, "source", {"haar", "ensemble"});
  if (src.size() != 1) { throw config_error("source: give exactly one of 'haar' or 'ensemble'"); }
  unsigned qubits_per_copy = 0;
  if (src.contains("haar")) {
    const auto & h = src["haar"];
    only_keys(h, "source.haar", {"dim", "group"});
    c.dim = Eigen::Index(as_count(need(h, "source.haar", "dim"), "source.haar.dim", 1));
    if (h.contains("group")) {
      const auto g = as_string(h["group"], "source.haar.group");
      if (g == "unitary") {
        c.group = HaarGroup::Unitary;
      } else if (g == "special_unitary") {
        c.group = HaarGroup::SpecialUnitary;
      } else {
        throw config_error("source.haar.group: expected \"unitary\" or \"special_unitary\"");
      }
    }
  } else {
    c.haar         = false;
    const auto & e = src["ensemble"];
    only_keys(e, "source.ensemble", {"n", "generators", "family", "layers", "periods"});
    AnsatzSpec a;
    a.n = as_qubits(need(e, "source.ensemble", "n"), "source.ensemble.n");
    if (e.contains("generators") == e.contains("family")) { throw config_error("source.ensemble: give exactly one of 'generators' or 'family'"); }
    if (e.contains("generators")) {
      const auto & g = e["generators"];
      if (!g.is_array() || g.empty()) { throw config_error("source.ensemble.generators: expected a nonempty list"); }
      for (std::size_t i = 0; i < g.size(); ++i) { a.generators.push_back(parse_operator(g[i], a.n, "source.ensemble.generators[" + std::to_string(i) + "]")); }
    } else {
      a.generators = family(as_string(e["family"], "source.ensemble.family"), a.n, "source.ensemble.family");
    }
    a.layers = as_count(need(e, "source.ensemble", "layers"), "source.ensemble.layers", 1);
    if (e.contains("periods")) {
      const auto & p = e["periods"];
      if (!(p.is_string() && p.get<std::string>() == "auto")) {
        if (!p.is_array() || p.size() != a.generators.size()) { throw config_error("source.ensemble.periods: \"auto\" or one positive number per generator"); }
        for (std::size_t i = 0; i < p.size(); ++i) { a.periods.push_back(as_number(p[i], "source.ensemble.periods")); }
      }
    }
    c.dim           = Eigen::Index(dimension_of(a.n));
    qubits_per_copy = a.n;
    c.ansatz        = a;
  }
  c.k = int(as_count(need(j, "config", "k"), "k", 1));
  if (c.k > 12) { throw config_error("k: too large"); }
  Eigen::Index big = 1;
  for (int i = 0; i < c.k; ++i) {
    big *= c.dim;
    if (big > kMomentDimensionLimit) { throw guard_error("twirl: tensor dimension dim^k exceeds " + std::to_string(kMomentDimensionLimit)); }
  }
  const auto & mj = need(j, "config", "M");
  if (mj.is_string() && mj.get<std::string>() == "identity") {
    c.m = DenseMatrix::Identity(big, big);
  } else if (mj.is_object() && mj.contains("file")) {
    only_keys(mj, "M", {"file"});
    c.m = read_dense_matrix(base / as_string(mj["file"], "M.file"));
    if (c.m.rows() != big) { throw config_error("M: matrix dimension must be dim^k = " + std::to_string(big)); }
  } else {
    (void)qubits_per_copy;
    if ((big & (big - 1)) != 0) { throw config_error("M: Pauli operators need a power-of-two dimension; use a matrix file"); }
    const unsigned nq = unsigned(std::countr_zero(std::uint64_t(big)));
    c.m               = materialize(parse_operator(mj, nq, "M"));
  }
  if (j.contains("samples")) { c.samples = as_count(j["samples"], "samples", 100); }
  if (j.contains("seed")) { c.common.seed = as_count(j["seed"], "seed"); }
  if (j.contains("invariance")) {
    const auto & inv = j["invariance"];
    only_keys(inv, "invariance", {"probe", "samples"});
    const auto p = as_string(need(inv, "invariance", "probe"), "invariance.probe");
    if (p != "constant" && p != "re_trace" && p != "abs_u11_squared") {
      throw config_error("invariance.probe: one of constant, re_trace, abs_u11_squared");
    }
    if (!c.haar) { throw config_error("invariance: only defined for a haar source"); }
    c.probe = p;
    if (inv.contains("samples")) { c.invariance_samples = as_count(inv["samples"], "invariance.samples", 2); }
  }
  if (j.contains("workers")) { c.workers = unsigned(as_count(j["workers"], "workers", 1)); }
  return c;
}

}  // namespace qgeom::cli
