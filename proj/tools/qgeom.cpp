// qgeom: batch front end for closure, geodesic, variance and twirl runs.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "config.hpp"

namespace fs = std::filesystem;
using namespace qgeom;
using namespace qgeom::cli;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kGuard = 3, kNumerical = 4 };

constexpr const char * kCsvColumns =
    "index,n,layers,samples,mean,variance,variance_se,theoretical_variance,gap,gap_in_se,dla_dim,ideal_dims,"
    "rho_purities,observable_purities,rho_in_g,observable_in_g,two_design_distance,two_design_noise_floor,error";

struct Options
{
  std::string config;
  std::string out{"."};
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  bool quiet{false};
};

std::string g17(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// RFC 4180 field quoting.
std::string csv_field(const std::string & s)
{
  if (s.find_first_of(",\"\n\r") == std::string::npos) { return s; }
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') { out += '"'; }
    out += ch;
  }
  return out + "\"";
}

json terms_json(const HermitianCoeffs & h)
{
  json a = json::array();
  for (const auto & [k, c] : h.terms()) { a.push_back({{"pauli", PauliString::from_index(k, h.qubits()).str()}, {"coeff", c}}); }
  return a;
}

json matrix_json(const Eigen::MatrixXd & m)
{
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) { row.push_back(m(r, c)); }
    rows.push_back(row);
  }
  return rows;
}

void write_text(const fs::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) { throw std::runtime_error("cannot write " + path.string()); }
}

void write_json(const fs::path & path, const json & j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_out(const std::string & dir)
{
  const fs::path p(dir);
  fs::create_directories(p);
  return p;
}

// ---------------------------------------------------------------------------------------------

std::vector<fs::path> run_dla(const json & j, const Options & opt)
{
  auto c = parse_dla(j);
  if (opt.seed) { c.common.seed = *opt.seed; }
  const auto dla = lie_closure(c.generators, c.max_dim);
  const auto dec = ideal_decomposition(dla, c.common.seed);

  json r;
  r["n"]                = c.n;
  r["dim"]              = dla.dim();
  r["exact_pauli_path"] = dla.exact_pauli_path;
  json basis            = json::array();
  for (std::size_t i = 0; i < dla.dim(); ++i) {
    const auto & p = dla.provenance[i];
    json e{{"terms", terms_json(dla.basis[i])}};
    if (p.kind == BasisProvenance::Kind::Generator) {
      e["from_generator"] = p.generator;
    } else {
      e["bracket_of"] = {p.left, p.right};
    }
    basis.push_back(e);
  }
  r["basis"] = basis;
  json center = json::array();
  for (const auto & b : dec.center.basis) { center.push_back(terms_json(b)); }
  r["center_dim"] = dec.center.dim();
  r["center"]     = center;
  json ideals     = json::array();
  for (const auto & s : dec.simple_ideals) {
    json bs = json::array();
    for (const auto & b : s.basis) { bs.push_back(terms_json(b)); }
    ideals.push_back({{"dim", s.dim()}, {"basis", bs}});
  }
  r["simple_ideal_dims"] = dec.ideal_dims();
  r["simple_ideals"]     = ideals;
  r["decomposition"]     = {{"seed", dec.seed}, {"attempts", dec.attempts}};

  const auto out  = prepare_out(opt.out);
  const auto path = out / "dla_report.json";
  write_json(path, r);
  return {path};
}

std::vector<fs::path> run_geodesic(const json & j, const Options & opt)
{
  auto c = parse_geodesic(j);
  if (opt.seed) { c.common.seed = *opt.seed; }
  if (opt.samples) { c.probe_paths = *opt.samples; }
  const auto g  = pauli_geodesic(c.metric, c.target, c.grid);
  const auto pr = minimality_probe(c.metric, c.target, c.probe_paths, c.common.seed, c.grid, c.probe_amplitude);

  json r;
  r["n"]               = c.n;
  r["target"]          = terms_json(c.target);
  r["metric"]          = to_string(c.metric.scheme());
  r["grid"]            = c.grid;
  r["length"]          = g.length;
  r["measured_length"] = g.measured_length;
  r["el_residual"]     = g.el_residual;
  json support         = json::array();
  for (const auto & p : stabilizer_support(c.target).support) { support.push_back(p.str()); }
  r["support"] = support;
  double best  = std::numeric_limits<double>::infinity();
  for (double l : pr.perturbed_lengths) { best = std::min(best, l); }
  r["minimality_probe"] = {{"paths", pr.perturbed_lengths.size()},
                           {"seed", c.common.seed},
                           {"straight_length", pr.straight_length},
                           {"shortest_perturbed", pr.perturbed_lengths.empty() ? json(nullptr) : json(best)},
                           {"margin", pr.margin},
                           {"perturbed_lengths", pr.perturbed_lengths}};

  const auto out  = prepare_out(opt.out);
  const auto path = out / "geodesic_report.json";
  write_json(path, r);
  return {path};
}

struct Closure
{
  std::optional<DlaBasis> dla;
  std::optional<IdealDecomposition> dec;
  std::string error;
};

std::string join(const std::vector<std::string> & parts)
{
  std::string s;
  for (const auto & p : parts) { s += (s.empty() ? "" : ";") + p; }
  return s;
}

std::vector<fs::path> run_variance(const json & j, const Options & opt)
{
  auto c = parse_variance(j, fs::path(opt.config).parent_path());
  if (opt.seed) { c.common.seed = *opt.seed; }
  if (opt.samples) {
    if (*opt.samples < 100) { throw config_error("--samples: at least 100 required"); }
    c.samples = *opt.samples;
  }

  std::map<unsigned, Closure> closures;
  std::ostringstream csv;
  csv << kCsvColumns << '\n';
  json points = json::array();
  std::size_t index = 0, failed = 0;

  for (unsigned n : c.qubits) {
    const auto gens = c.generators ? [&] {
      std::vector<HermitianCoeffs> g;
      for (std::size_t i = 0; i < c.generators->size(); ++i) { g.push_back(parse_operator((*c.generators)[i], n, "generators")); }
      return g;
    }()
                                   : family(c.family, n, "family");
    for (auto layers : c.layers) {
      json pt{{"index", index}, {"n", n}, {"layers", layers}, {"samples", c.samples}};
      std::vector<std::string> row(19);
      row[0] = std::to_string(index);
      row[1] = std::to_string(n);
      row[2] = std::to_string(layers);
      row[3] = std::to_string(c.samples);
      std::vector<std::string> errors;
      try {
        AnsatzSpec spec{n, gens, layers, {}};
        if (c.periods) {
          for (double p : *c.periods) { spec.periods.push_back(p); }
        }
        const Ansatz a(spec);
        const DenseMatrix rho = c.rho.dense ? *c.rho.dense : computational_zero(n);
        const auto task       = LossTask::make(rho, materialize(c.observable.build(n, "observable")));
        const auto rep        = estimate_variance(a, task, c.samples, c.common.seed, c.workers);
        row[4] = g17(rep.mean);
        row[5] = g17(rep.variance);
        row[6] = g17(rep.variance_se);
        pt["mean"]        = rep.mean;
        pt["variance"]    = rep.variance;
        pt["variance_se"] = rep.variance_se;

        auto & cl = closures[n];
        if (!cl.dla && cl.error.empty()) {
          try {
            cl.dla = lie_closure(gens, std::min<std::uint64_t>(c.max_dim, pauli_count(n)));
            cl.dec = ideal_decomposition(*cl.dla, c.common.seed);
          } catch (const Error & e) {
            cl.error = std::string("theory: ") + e.what();
          }
        }
        if (cl.dec) {
          const auto th  = theoretical_variance(*cl.dec, task);
          const double gap = std::abs(rep.variance - th.value);
          row[7]  = g17(th.value);
          row[8]  = g17(gap);
          row[9]  = rep.variance_se > 0 ? g17(gap / rep.variance_se) : (gap == 0 ? "0" : "inf");
          row[10] = std::to_string(cl.dla->dim());
          std::vector<std::string> dims, rp, op;
          json table = json::array();
          for (const auto & t : th.table) {
            dims.push_back(std::to_string(t.dim));
            rp.push_back(g17(t.rho_purity));
            op.push_back(g17(t.observable_purity));
            table.push_back({{"dim", t.dim}, {"rho_purity", t.rho_purity}, {"observable_purity", t.observable_purity}, {"contribution", t.contribution}});
          }
          row[11] = join(dims);
          row[12] = join(rp);
          row[13] = join(op);
          row[14] = th.rho_in_g ? "true" : "false";
          row[15] = th.observable_in_g ? "true" : "false";
          pt["theoretical_variance"] = th.value;
          pt["gap"]                  = gap;
          pt["dla_dim"]              = cl.dla->dim();
          pt["center_dim"]           = cl.dec->center.dim();
          pt["purity_table"]         = table;
          pt["rho_residual"]         = th.rho_residual;
          pt["observable_residual"]  = th.observable_residual;
          pt["rho_in_g"]             = th.rho_in_g;
          pt["observable_in_g"]      = th.observable_in_g;
        } else {
          errors.push_back(cl.error);
        }

        const bool small = pauli_count(n) <= std::uint64_t(kTwoDesignDimensionLimit);
        if (c.two_design && small) {
          const std::size_t td_samples = c.two_design_samples ? c.two_design_samples : c.samples;
          const auto td = two_design_distance(a, std::max<std::size_t>(td_samples, 200), {kron(rho, rho)}, c.common.seed, c.workers);
          row[16] = g17(td.distance);
          row[17] = g17(td.noise_floor);
          pt["two_design"] = {{"distance", td.distance},
                              {"noise_floor", td.noise_floor},
                              {"reference", td.haar_reference ? "haar" : "deep_ansatz"},
                              {"reference_layers", td.reference_layers}};
        } else {
          row[16] = "unchecked";
          row[17] = "unchecked";
          pt["two_design"] = "unchecked";
        }
      } catch (const Error & e) {
        errors.push_back(e.what());
      }
      if (!errors.empty()) {
        ++failed;
        pt["error"] = join(errors);
      }
      row[18] = join(errors);
      for (std::size_t i = 0; i < row.size(); ++i) { csv << (i ? "," : "") << csv_field(row[i]); }
      csv << '\n';
      points.push_back(pt);
      ++index;
    }
  }

  json r;
  r["seed"]            = c.common.seed;
  r["samples"]         = c.samples;
  r["two_design_check"] = c.two_design;
  r["points"]          = points;
  r["failed_points"]   = failed;

  const auto out = prepare_out(opt.out);
  write_json(out / "variance_report.json", r);
  write_text(out / "variance.csv", csv.str());
  if (failed && !opt.quiet) { std::cerr << "qgeom variance: " << failed << " point(s) recorded an error\n"; }
  return {out / "variance_report.json", out / "variance.csv"};
}

std::vector<fs::path> run_twirl(const json & j, const Options & opt)
{
  auto c = parse_twirl(j, fs::path(opt.config).parent_path());
  if (opt.seed) { c.common.seed = *opt.seed; }
  if (opt.samples) {
    if (*opt.samples < 100) { throw config_error("--samples: at least 100 required"); }
    c.samples = *opt.samples;
  }

  std::optional<Ansatz> ansatz;
  if (c.ansatz) { ansatz.emplace(*c.ansatz); }
  const UnitarySampler sampler = c.haar ? haar_sampler(c.dim, c.group) : ensemble_sampler(*ansatz);
  const RngStream stream(c.common.seed, c.haar ? detail::kReferenceStream : detail::kEnsembleStream);
  const auto est = moment_operator(sampler, c.dim, c.k, c.m, c.samples, stream, c.workers);

  json r;
  r["source"]  = c.haar ? json{{"haar", {{"dim", c.dim}, {"group", c.group == HaarGroup::Unitary ? "unitary" : "special_unitary"}}}}
                        : json{{"ensemble", {{"n", c.ansatz->n}, {"layers", c.ansatz->layers}, {"periods", ansatz->periods()}}}};
  r["k"]       = c.k;
  r["samples"] = c.samples;
  r["seed"]    = c.common.seed;
  r["mean"]    = {{"real", matrix_json(est.mean.real())}, {"imag", matrix_json(est.mean.imag())}};
  r["standard_error"] = {{"real", matrix_json(est.se_real)}, {"imag", matrix_json(est.se_imag)}};
  r["max_abs_entry"]  = est.mean.cwiseAbs().maxCoeff();
  if (c.haar && c.k == 1) {
    // first Haar moment is Tr(M) I / N
    const DenseMatrix ref = (c.m.trace() / double(c.dim)) * DenseMatrix::Identity(c.dim, c.dim);
    r["first_moment_reference_deviation_in_se"] = est.max_deviation_in_se(ref);
  }
  if (c.probe) {
    const RngStream inv_stream(c.common.seed, 0x696e76);
    auto wr             = inv_stream.substream(~std::uint64_t{0});
    const DenseMatrix w = haar_sample(c.group, c.dim, wr);
    UnitaryProbe f;
    if (*c.probe == "constant") {
      f = [](const DenseMatrix &) { return 1.0; };
    } else if (*c.probe == "re_trace") {
      f = [](const DenseMatrix & u) { return u.trace().real(); };
    } else {
      f = [](const DenseMatrix & u) { return std::norm(u(0, 0)); };
    }
    const auto rep = invariance_test(f, w, c.invariance_samples ? c.invariance_samples : c.samples, inv_stream, c.group, c.workers);
    json labels    = json::array();
    for (auto l : InvarianceReport::labels) { labels.push_back(l); }
    r["invariance"] = {{"probe", *c.probe},        {"labels", labels},       {"means", rep.means},
                       {"standard_errors", rep.standard_errors}, {"max_gap_in_se", rep.max_gap_in_se}, {"threshold", rep.threshold},
                       {"samples", rep.samples}, {"pass", rep.pass}};
  }

  const auto out  = prepare_out(opt.out);
  const auto path = out / "twirl_report.json";
  write_json(path, r);
  return {path};
}

int exit_code_for(ErrorKind k)
{
  switch (k) {
    case ErrorKind::Guard: return kGuard;
    case ErrorKind::Numerical: return kNumerical;
    default: return kConfig;
  }
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"qgeom: dynamical Lie algebras, Pauli geodesics, loss variance and moment operators"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 2 configuration error, 3 size guard exceeded, 4 numerical precondition failed, 1 unexpected error.");

  Options opt;
  using Runner = std::vector<fs::path> (*)(const json &, const Options &);
  struct Sub
  {
    const char * name;
    const char * help;
    Runner run;
  };
  const std::vector<Sub> subs{
      {"dla", "Lie closure, center and simple ideals of a generator set", run_dla},
      {"geodesic", "Pauli geodesic length, Euler-Lagrange residual and minimality probe", run_geodesic},
      {"variance", "Loss variance over (n, layers) sweeps; writes variance_report.json and variance.csv", run_variance},
      {"twirl", "Moment operators over Haar or ansatz ensembles, optional invariance test", run_twirl},
  };
  std::vector<std::pair<CLI::App *, Runner>> registered;
  for (const auto & s : subs) {
    auto * sc = app.add_subcommand(s.name, s.help);
    sc->add_option("--config", opt.config, "JSON config file")->required()->check(CLI::ExistingFile);
    sc->add_option("--out", opt.out, "Output directory (created if missing)")->capture_default_str();
    sc->add_option("--seed", opt.seed, "Override the config seed");
    sc->add_option("--samples", opt.samples, "Override the sample count (probe paths for geodesic)");
    sc->add_flag("--quiet", opt.quiet, "Print nothing on success");
    if (std::string(s.name) == "variance") {
      sc->footer(std::string("CSV columns (one row per sweep point, floats with 17 significant digits):\n  ") + kCsvColumns
                 + "\nList-valued cells (ideal_dims, purities) are ';'-separated. Cells without a value are empty;\n"
                   "two_design columns read 'unchecked' when the check is off or n > 4.");
    }
    registered.emplace_back(sc, s.run);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  const auto t0 = std::chrono::steady_clock::now();
  for (const auto & [sc, run] : registered) {
    if (!sc->parsed()) { continue; }
    try {
      const auto j     = load_config(opt.config, sc->get_name().c_str());
      const auto files = run(j, opt);
      if (!opt.quiet) {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto & f : files) { std::cout << "wrote " << f.string() << '\n'; }
        std::printf("qgeom %s finished in %.2f s\n", sc->get_name().c_str(), s);
      }
      return kOk;
    } catch (const Error & e) {
      std::cerr << "qgeom " << sc->get_name() << ": " << e.what() << '\n';
      return exit_code_for(e.kind());
    } catch (const json::exception & e) {
      std::cerr << "qgeom " << sc->get_name() << ": config: " << e.what() << '\n';
      return kConfig;
    } catch (const std::exception & e) {
      std::cerr << "qgeom " << sc->get_name() << ": " << e.what() << '\n';
      return 1;
    }
  }
  return kConfig;
}
