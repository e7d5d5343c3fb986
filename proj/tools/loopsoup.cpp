// Command-line surface: experiment runner, exact queries, and samplers.
//
// Exit codes: 0 success, 2 validation failure (bad flags, bad domain spec,
// unknown experiment), 3 numerical failure (solver breakdown, non-finite
// values, or a violated experiment check).
//
// Every command is deterministic in (config, seed); CSV bodies are
// byte-identical across reruns, and --threads never changes results.
// Config may come from flags or --config file.json; flags win.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "loopsoup/conformal.hpp"
#include "loopsoup/experiments.hpp"

using namespace loopsoup;
namespace ex = loopsoup::experiments;

namespace {

struct Opts {
  std::string domain;
  std::vector<double> mesh;
  double lambda = 0.5;
  double kappa = 0.0;
  double beta = std::numbers::pi;
  double alpha = 2.0;
  std::vector<double> delta;
  std::vector<double> r;
  long n = -1;  // -1: per-command default
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  std::string out;
  std::string config;
  bool json = false;
  std::vector<std::string> faces;
  std::string name;  // positional (experiment / sample kind)
};

// Applies config-file values to options the user did not pass on the line.
struct ConfigLayer {
  struct Bind {
    CLI::Option* opt;
    std::function<void(const nlohmann::json&)> set;
  };
  std::vector<std::pair<std::string, Bind>> binds;

  template <class T>
  void add(CLI::Option* opt, const std::string& key, T& var) {
    if (opt)
      binds.push_back({key, {opt, [&var](const nlohmann::json& v) {
                               var = v.get<T>();
                             }}});
  }
  // Returns the keys actually taken from the file.
  std::vector<std::string> apply(const nlohmann::json& cfg) {
    std::vector<std::string> used;
    for (auto& [key, b] : binds)
      if (b.opt->count() == 0 && cfg.contains(key)) {
        b.set(cfg.at(key));
        used.push_back(key);
      }
    return used;
  }
};

void add_common(CLI::App* app, Opts& o, ConfigLayer& layer) {
  layer.add(app->add_option("--domain", o.domain,
                            "domain spec: square:N, rect:WxH, disk:R, faces:i,j;..."),
            "domain", o.domain);
  layer.add(app->add_option("--mesh", o.mesh, "lattice mesh (list where a sweep applies)"),
            "mesh", o.mesh);
  layer.add(app->add_option("--lambda", o.lambda, "soup intensity"), "lambda", o.lambda);
  layer.add(app->add_option("--kappa", o.kappa, "killing rate"), "kappa", o.kappa);
  layer.add(app->add_option("--beta", o.beta, "winding-field angle"), "beta", o.beta);
  layer.add(app->add_option("--alpha", o.alpha, "negative-Sobolev exponent"), "alpha",
            o.alpha);
  layer.add(app->add_option("--delta", o.delta, "diameter cutoffs, decreasing"),
            "delta", o.delta);
  layer.add(app->add_option("--r", o.r, "radius parameters"), "r", o.r);
  layer.add(app->add_option("--n", o.n, "sample / instance count"), "n", o.n);
  layer.add(app->add_option("--seed", o.seed, "random seed"), "seed", o.seed);
  layer.add(app->add_option("--threads", o.threads, "worker count (never changes results)"),
            "threads", o.threads);
  layer.add(app->add_option("--out", o.out, "output file (CSV/JSONL); manifest written alongside"),
            "out", o.out);
  app->add_option("--config", o.config, "JSON config file; explicit flags win");
  layer.add(app->add_flag("--json", o.json, "machine-readable output where supported"),
            "json", o.json);
  layer.add(app->add_option("--faces", o.faces,
                            "face list i,j ... (or WxH rectangle shorthand)"),
            "faces", o.faces);
}

nlohmann::json resolved_params(const Opts& o) {
  nlohmann::json j;
  j["domain"] = o.domain;
  j["mesh"] = o.mesh;
  j["lambda"] = o.lambda;
  j["kappa"] = o.kappa;
  j["beta"] = o.beta;
  j["alpha"] = o.alpha;
  j["delta"] = o.delta;
  j["r"] = o.r;
  j["n"] = o.n;
  j["seed"] = o.seed;
  j["threads"] = o.threads;
  j["faces"] = o.faces;
  return j;
}

// Writes the body (or JSON alternative) to --out/stdout; manifest beside --out.
int deliver(const Opts& o, const std::string& command, const std::string& body,
            const nlohmann::json* jalt = nullptr) {
  std::string payload =
      (o.json && jalt) ? jalt->dump(2) + "\n" : body;
  if (o.out.empty()) {
    std::cout << payload;
    return 0;
  }
  std::ofstream os(o.out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + o.out);
  os << payload;
  os.close();
  write_manifest(o.out + ".manifest.json",
                 run_manifest(command, resolved_params(o), {o.out}));
  return 0;
}

double single_mesh(const Opts& o, double fallback) {
  if (o.mesh.empty()) return fallback;
  if (o.mesh.size() > 1)
    throw std::invalid_argument("this command takes a single --mesh");
  if (!(o.mesh[0] > 0)) throw std::invalid_argument("mesh must be positive");
  return o.mesh[0];
}

int mesh_denominator(double mesh) {
  double inv = 1.0 / mesh;
  int denom = static_cast<int>(std::lround(inv));
  if (denom < 1 || std::abs(inv - denom) > 1e-9 * inv)
    throw std::invalid_argument("mesh must be the reciprocal of an integer here");
  return denom;
}

// Domain from --domain, with --faces WxH accepted as rectangle shorthand.
Domain resolve_domain(const Opts& o, const std::string& fallback_spec,
                      double fallback_mesh, std::string* spec_out = nullptr) {
  std::string spec = o.domain;
  if (spec.empty() && o.faces.size() == 1 &&
      o.faces[0].find('x') != std::string::npos)
    spec = "rect:" + o.faces[0];
  if (spec.empty()) spec = fallback_spec;
  if (spec_out) *spec_out = spec;
  return parse_domain(spec, single_mesh(o, fallback_mesh));
}

std::vector<Cell> parse_face_list(const std::vector<std::string>& toks) {
  std::vector<Cell> out;
  for (const std::string& t : toks) {
    int i = 0, j = 0;
    if (std::sscanf(t.c_str(), "%d,%d", &i, &j) != 2)
      throw std::invalid_argument("bad face token: " + t);
    out.push_back({i, j});
  }
  return out;
}

long n_or(const Opts& o, long dflt) {
  if (o.n == -1) return dflt;
  if (o.n < 1) throw std::invalid_argument("n must be positive");
  return o.n;
}

std::uint64_t seed_or(const Opts& o, std::uint64_t dflt) {
  return o.seed_given ? o.seed : dflt;
}

// ---------------------------------------------------------------------------
// experiment subcommand
// ---------------------------------------------------------------------------

int cmd_experiment(Opts& o) {
  std::ostringstream csv;
  bool ok = true;
  const std::string& name = o.name;
  auto known = [&] {
    for (const auto& e : ex::catalog())
      if (e.name == name) return true;
    return false;
  };
  if (!known()) throw std::invalid_argument("unknown experiment: " + name);

  if (name == "exact-vs-mc-correlations") {
    long n = n_or(o, 100000);
    std::uint64_t seed = seed_or(o, ex::kSeedCorrelations);
    o.n = n;
    o.seed = seed;
    auto res = ex::run_exact_vs_mc(n, seed, o.threads);
    ok = res.ok;
    csv << "experiment,domain,lambda,observable,exact,value,stderr,z,n,seed\n";
    for (const auto& r : res.rows)
      csv << csv_join({name, r.domain, g17(r.lambda), r.observable, g17(r.exact),
                       g17(r.mc), g17(r.se), g17(r.z), std::to_string(n),
                       std::to_string(seed)});
  } else if (name == "scaling-exponent") {
    std::vector<int> denoms;
    if (o.mesh.empty()) {
      denoms = {16, 32, 64, 128};
      for (int d : denoms) o.mesh.push_back(1.0 / d);
    } else {
      for (double m : o.mesh) denoms.push_back(mesh_denominator(m));
    }
    auto res = ex::run_scaling_exponent(o.lambda, denoms);
    ok = res.ok;
    csv << "experiment,lambda,mesh,quantity,value,stderr,n,seed\n";
    for (std::size_t i = 0; i < denoms.size(); ++i) {
      csv << csv_join({name, g17(o.lambda), g17(1.0 / denoms[i]), "odd_mass",
                       g17(res.odd_masses[i]), "", "", ""});
      csv << csv_join({name, g17(o.lambda), g17(1.0 / denoms[i]), "log_onepoint",
                       g17(res.log_sigma[i]), "", "", ""});
    }
    csv << csv_join({name, g17(o.lambda), "", "slope", g17(res.fit.slope),
                     g17(res.fit.slope_se), "", ""});
    csv << csv_join({name, g17(o.lambda), "", "slope_ci95", g17(res.fit.slope_ci95),
                     "", "", ""});
    csv << csv_join({name, g17(o.lambda), "", "target", g17(res.target), "", "", ""});
    csv << csv_join({name, g17(o.lambda), "", "slope_error", g17(res.error), "", "", ""});
  } else if (name == "boundary-constant") {
    double mesh = single_mesh(o, 1.0 / 128);
    int denom = mesh_denominator(mesh);
    std::vector<double> rs = o.r.empty() ? std::vector<double>{0.5, 0.7, 0.9} : o.r;
    o.r = rs;
    auto res = ex::run_boundary_constant(rs, denom);
    ok = res.ok;
    csv << "experiment,r,mesh,target,rel_err,value,stderr,n,seed\n";
    for (const auto& row : res.rows)
      csv << csv_join({name, g17(row.r), g17(mesh), g17(row.target),
                       g17(row.rel_err), g17(row.mass_diff), "", "", ""});
  } else if (name == "duality") {
    long n = n_or(o, 100000);
    std::uint64_t seed = seed_or(o, ex::kSeedDuality);
    o.n = n;
    o.seed = seed;
    std::string spec;
    Domain d = resolve_domain(o, "square:2", 1.0, &spec);
    auto res = ex::run_duality(d, n, seed, o.threads);
    ok = res.ok;
    int F = static_cast<int>(d.faces().size());
    csv << "experiment,route,outcome,value,stderr,n,seed\n";
    for (int route = 0; route < 3; ++route)
      for (std::size_t out = 0; out < res.probs[route].size(); ++out) {
        std::string pat;
        for (int f = 0; f < F; ++f) pat += (out >> f) & 1 ? '-' : '+';
        double p = res.probs[route][out];
        csv << csv_join({name, res.route_names[route], pat, g17(p),
                         g17(std::sqrt(p * (1 - p) / static_cast<double>(n))),
                         std::to_string(n), std::to_string(seed)});
      }
    csv << csv_join({name, "all", "max_z", g17(res.max_z), "", std::to_string(n),
                     std::to_string(seed)});
  } else if (name == "occupation-identity") {
    long n = n_or(o, 100000);
    std::uint64_t seed = seed_or(o, ex::kSeedOccupation);
    o.n = n;
    o.seed = seed;
    Domain d = resolve_domain(o, "square:3", 1.0);
    auto res = ex::run_occupation_identity(d, o.lambda, n, seed, o.threads);
    ok = res.ok;
    csv << "experiment,vertex,quantity,exact,value,stderr,z,n,seed\n";
    for (const auto& r : res.rows) {
      std::string v = std::to_string(r.vertex.first) + ";" +
                      std::to_string(r.vertex.second);
      double se1 = r.z_mean > 0 ? std::abs(r.mc_mean - r.exact_mean) / r.z_mean : 0;
      double se2 = r.z_second > 0 ? std::abs(r.mc_second - r.exact_second) / r.z_second : 0;
      csv << csv_join({name, v, "mean", g17(r.exact_mean), g17(r.mc_mean), g17(se1),
                       g17(r.z_mean), std::to_string(n), std::to_string(seed)});
      csv << csv_join({name, v, "second", g17(r.exact_second), g17(r.mc_second),
                       g17(se2), g17(r.z_second), std::to_string(n),
                       std::to_string(seed)});
    }
  } else if (name == "griffiths-inequalities") {
    long n = n_or(o, 200);
    std::uint64_t seed = seed_or(o, ex::kSeedGriffiths);
    o.n = n;
    o.seed = seed;
    auto res = ex::run_griffiths(static_cast<int>(n), seed);
    ok = res.ok;
    csv << "experiment,instance,lambda,positivity,monotonicity,second,value,stderr,n,seed\n";
    for (const auto& r : res.rows)
      csv << csv_join({name, std::to_string(r.index), g17(r.lambda),
                       g17(r.report.positivity), g17(r.report.monotonicity),
                       g17(r.report.second), g17(r.min_slack), "",
                       std::to_string(n), std::to_string(seed)});
  } else if (name == "nongaussianity") {
    double mesh = single_mesh(o, 1.0 / 128);
    int denom = mesh_denominator(mesh);
    std::vector<double> rhos = o.r.empty() ? std::vector<double>{0.1, 0.05} : o.r;
    if (rhos.size() == 1) rhos.push_back(rhos[0] / 2);
    o.r = rhos;
    auto res = ex::run_nongaussianity(o.lambda, rhos[0], rhos[1], denom);
    ok = res.ok;
    csv << "experiment,rho,mesh,lambda,a,b,value,stderr,n,seed\n";
    for (const auto& p : {res.main, res.shrunk})
      csv << csv_join({name, g17(p.rho), g17(mesh), g17(o.lambda), g17(p.a), g17(p.b),
                       g17(p.residual), "", "", ""});
  } else if (name == "sobolev-cauchy-trend") {
    long n = n_or(o, 50);
    std::uint64_t seed = seed_or(o, ex::kSeedSobolev);
    o.n = n;
    o.seed = seed;
    double mesh = single_mesh(o, 1.0 / 64);
    int denom = mesh_denominator(mesh);
    std::vector<double> deltas =
        o.delta.empty() ? std::vector<double>{0.4, 0.2, 0.1, 0.05} : o.delta;
    o.delta = deltas;
    auto res = ex::run_sobolev_trend(n, seed, denom, o.lambda, o.alpha, deltas,
                                     o.beta, o.threads);
    ok = res.ok;
    csv << "experiment,delta_hi,delta_lo,value,stderr,drop_mean,drop_se,drop_z,n,seed\n";
    for (const auto& p : res.pairs)
      csv << csv_join({name, g17(p.delta_hi), g17(p.delta_lo), g17(p.mean), g17(p.se),
                       g17(p.drop_mean), g17(p.drop_se), g17(p.drop_z),
                       std::to_string(n), std::to_string(seed)});
  } else if (name == "reflection-positivity") {
    long n = n_or(o, 20000);
    std::uint64_t seed = seed_or(o, ex::kSeedReflection);
    o.n = n;
    o.seed = seed;
    std::string spec;
    Domain d = resolve_domain(o, "square:24", 1.0, &spec);
    auto [i0, i1] = std::minmax_element(d.faces().begin(), d.faces().end());
    int L = i1->first - i0->first + 1;
    if (static_cast<long>(d.faces().size()) != static_cast<long>(L) * L)
      throw std::invalid_argument("reflection-positivity needs a square box");
    double kappa = o.kappa > 0 ? o.kappa : 1.0;
    o.kappa = kappa;
    auto res = ex::run_reflection_positivity(n, seed, L, kappa, o.lambda, o.threads);
    ok = res.ok;
    csv << "experiment,quantity,value,stderr,n,seed\n";
    csv << csv_join({name, "min_eigenvalue", g17(res.min_eig), g17(res.jack_se),
                     std::to_string(n), std::to_string(seed)});
    csv << csv_join({name, "symmetry_max_z", g17(res.sym_max_z), "",
                     std::to_string(n), std::to_string(seed)});
    csv << csv_join({name, "functions", std::to_string(res.nfuncs), "",
                     std::to_string(n), std::to_string(seed)});
  } else if (name == "oracle-equivalence") {
    auto res = ex::run_oracle_equivalence();
    ok = res.ok;
    csv << "experiment,quantity,value,stderr,n,seed\n";
    csv << csv_join({name, "domains", std::to_string(res.count), "", "", ""});
    csv << csv_join({name, "max_excess", g17(res.max_excess), "", "", ""});
  }

  nlohmann::json jout;
  jout["experiment"] = name;
  jout["ok"] = ok;
  jout["params"] = resolved_params(o);
  deliver(o, "experiment " + name, csv.str(), &jout);
  if (!ok) {
    std::cerr << "experiment " << name << ": check failed\n";
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// exact queries
// ---------------------------------------------------------------------------

int cmd_exact_npoint(Opts& o) {
  std::string spec;
  Domain d = resolve_domain(o, "square:8", 1.0, &spec);
  auto faces = parse_face_list(o.faces);
  if (faces.empty()) throw std::invalid_argument("--faces required");
  double value = npoint(d, faces, o.lambda, o.kappa);
  if (!std::isfinite(value)) throw std::runtime_error("non-finite result");
  std::ostringstream csv;
  csv << "quantity,domain,mesh,lambda,kappa,faces,value\n";
  std::string flist = ex::cell_list(faces);
  csv << csv_join({"npoint", spec, g17(d.mesh()), g17(o.lambda), g17(o.kappa), flist,
                   g17(value)});
  nlohmann::json j;
  j["quantity"] = "npoint";
  j["domain_spec"] = spec;
  j["parameters"] = {{"mesh", d.mesh()}, {"lambda", o.lambda}, {"kappa", o.kappa},
                     {"faces", flist}};
  j["value"] = value;
  j["error_bound"] = 0.0;
  return deliver(o, "exact-npoint", csv.str(), &j);
}

int cmd_mass(Opts& o) {
  std::string spec;
  Domain d = resolve_domain(o, "square:2", 1.0, &spec);
  std::ostringstream csv;
  csv << "quantity,domain,mesh,kappa,faces,value\n";
  double total = total_mass(d, o.kappa);
  if (!std::isfinite(total)) throw std::runtime_error("non-finite result");
  csv << csv_join({"total_mass", spec, g17(d.mesh()), g17(o.kappa), "", g17(total)});
  nlohmann::json j;
  j["quantity"] = "total_mass";
  j["domain_spec"] = spec;
  j["parameters"] = {{"mesh", d.mesh()}, {"kappa", o.kappa}};
  j["value"] = total;
  j["error_bound"] = 0.0;
  if (!o.faces.empty()) {
    auto faces = parse_face_list(o.faces);
    double odd = odd_mass(d, faces, o.kappa);
    std::string flist = ex::cell_list(faces);
    csv << csv_join({"odd_mass", spec, g17(d.mesh()), g17(o.kappa), flist, g17(odd)});
    j["quantity"] = "odd_mass";
    j["parameters"]["faces"] = flist;
    j["value"] = odd;
  }
  return deliver(o, "mass", csv.str(), &j);
}

int cmd_radius(Opts& o) {
  std::string spec;
  Domain d = resolve_domain(o, "disk:1", 1.0 / 32, &spec);
  // Vertex nearest the face centroid, lexicographic tie-break.
  double cx = 0, cy = 0;
  for (auto [i, j] : d.faces()) {
    cx += i + 0.5;
    cy += j + 0.5;
  }
  cx /= static_cast<double>(d.faces().size());
  cy /= static_cast<double>(d.faces().size());
  Cell best = d.vertices()[0];
  double bd = 1e300;
  for (Cell v : d.vertices()) {
    double dist = (v.first - cx) * (v.first - cx) + (v.second - cy) * (v.second - cy);
    if (dist < bd - 1e-12) {
      bd = dist;
      best = v;
    }
  }
  std::complex<double> z{best.first * d.mesh(), best.second * d.mesh()};
  double exact;
  if (spec.rfind("disk:", 0) == 0) {
    double R = std::stod(spec.substr(5));
    exact = conformal_radius_disk(R, z);
  } else if (spec.rfind("square:", 0) == 0) {
    int nside = std::stoi(spec.substr(7));
    exact = conformal_radius_square(nside * d.mesh(), {0.0, 0.0}, z);
  } else {
    throw std::invalid_argument("radius supports square:N and disk:R domains");
  }
  double lattice = conformal_radius_estimate(d, best);
  std::ostringstream csv;
  csv << "quantity,domain,mesh,vertex,lattice,exact,ratio\n";
  csv << csv_join({"conformal_radius", spec, g17(d.mesh()),
                   std::to_string(best.first) + ";" + std::to_string(best.second),
                   g17(lattice), g17(exact), g17(lattice / exact)});
  nlohmann::json j;
  j["quantity"] = "conformal_radius";
  j["domain_spec"] = spec;
  j["parameters"] = {{"mesh", d.mesh()}};
  j["value"] = lattice;
  j["error_bound"] = std::abs(lattice - exact);
  return deliver(o, "radius", csv.str(), &j);
}

// ---------------------------------------------------------------------------
// samplers
// ---------------------------------------------------------------------------

int cmd_sample(Opts& o) {
  const std::string& what = o.name;
  std::uint64_t seed = seed_or(o, 1);
  o.seed = seed;
  std::ostringstream body;
  std::string spec;
  if (what == "soup") {
    Domain d = resolve_domain(o, "square:4", 1.0, &spec);
    SoupSampler sampler(d, o.kappa);
    write_loops_jsonl(body, sampler.sample_soup(o.lambda, Rng(seed)));
  } else if (what == "dgff") {
    Domain d = resolve_domain(o, "square:4", 1.0, &spec);
    DgffSampler dgff(d, o.kappa);
    Rng rng(seed);
    write_vertex_field_csv(body, d, dgff.sample(rng), "phi");
  } else if (what == "spin-soup") {
    Domain d = resolve_domain(o, "square:4", 1.0, &spec);
    SoupSampler sampler(d, o.kappa);
    WindingGrid g = winding_field(d, sampler.sample_soup(o.lambda, Rng(seed)));
    std::vector<int> spins;
    for (Cell f : d.faces()) spins.push_back(g.spin(f));
    write_face_field_csv(body, d, spins, "spin");
  } else if (what == "spin-ising" || what == "spin-coins") {
    Domain d = resolve_domain(o, "square:4", 1.0, &spec);
    DgffSampler dgff(d, o.kappa);
    Rng rng(seed);
    Eigen::VectorXd phi = dgff.sample(rng);
    auto spins = what == "spin-ising" ? ising_spins_exact(d, phi, rng)
                                      : coin_spins(d, phi, rng);
    write_face_field_csv(body, d, spins, "spin");
  } else if (what == "occupation") {
    Domain d = resolve_domain(o, "square:4", 1.0, &spec);
    SoupSampler sampler(d, o.kappa);
    auto soup = sampler.sample_soup(o.lambda, Rng(seed, 1));
    Rng orng(seed, 2);
    write_vertex_field_csv(body, d, occupation_field(d, soup, o.lambda, orng), "T");
  } else if (what == "winding") {
    Domain d = resolve_domain(o, "square:4", 1.0, &spec);
    SoupSampler sampler(d, o.kappa);
    auto soup = sampler.sample_soup(o.lambda, Rng(seed));
    double cutoff = o.delta.empty() ? 0.0 : o.delta[0];
    WindingGrid g = WindingGrid::for_domain(d);
    for (const auto& loop : soup)
      if (ex::loop_linf_diameter(loop) * d.mesh() > cutoff) g.add_loop(loop);
    std::vector<double> re, im;
    for (Cell f : d.faces()) {
      double bn = o.beta * static_cast<double>(g.winding(f));
      re.push_back(std::cos(bn));
      im.push_back(std::sin(bn));
    }
    write_face_field_csv(body, d, re, im);
  } else if (what == "halfplane") {
    Domain d = resolve_domain(o, "square:24", 1.0, &spec);
    if (!(o.kappa > 0))
      throw std::invalid_argument("halfplane sampling requires --kappa > 0");
    SoupSampler sampler(d, o.kappa);
    write_face_field_csv(body, d,
                         sample_massive_box_field(sampler, o.lambda, Rng(seed)),
                         "spin");
  } else {
    throw std::invalid_argument("unknown sample kind: " + what);
  }
  o.domain = spec;
  return deliver(o, "sample " + what, body.str());
}

int cmd_list(const Opts& o) {
  if (o.json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : ex::catalog())
      arr.push_back({{"name", e.name}, {"anchor", e.anchor}, {"summary", e.summary}});
    std::cout << arr.dump(2) << '\n';
    return 0;
  }
  for (const auto& e : ex::catalog())
    std::cout << e.anchor << "  " << e.name << "\n      " << e.summary << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "loop-soup toolkit: winding-number spin fields, exact twisted-determinant\n"
      "correlations, free-field couplings, and the reproducible experiments\n"
      "behind them"};
  app.require_subcommand(1);
  {
    std::string footer = "Experiments (run with `experiment <name>`):\n";
    for (const auto& e : ex::catalog())
      footer += "  " + e.name + "\n";
    app.footer(footer);
  }
  Opts o;
  std::map<const CLI::App*, ConfigLayer> layers;

  CLI::App* list = app.add_subcommand("list", "catalog of experiments");
  list->add_flag("--json", o.json, "machine-readable catalog");

  CLI::App* exp = app.add_subcommand("experiment", "run a named experiment");
  exp->alias("run");
  exp->add_option("name", o.name, "experiment name (see `list`)")->required();
  add_common(exp, o, layers[exp]);

  CLI::App* np = app.add_subcommand("exact-npoint",
                                    "exact spin correlation of a face set");
  add_common(np, o, layers[np]);

  CLI::App* mass = app.add_subcommand("mass", "total (and odd) loop mass");
  add_common(mass, o, layers[mass]);

  CLI::App* rad = app.add_subcommand("radius",
                                     "lattice vs continuum conformal radius");
  add_common(rad, o, layers[rad]);

  CLI::App* smp = app.add_subcommand("sample", "draw one sample and serialize it");
  smp->add_option("kind", o.name,
                  "soup|dgff|spin-soup|spin-ising|spin-coins|occupation|winding|halfplane")
      ->required();
  add_common(smp, o, layers[smp]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    CLI::App* active = nullptr;
    for (CLI::App* sub : {exp, np, mass, rad, smp})
      if (sub->parsed()) {
        active = sub;
        o.seed_given |= sub->count("--seed") > 0;
      }
    if (!o.config.empty() && active) {
      std::ifstream is(o.config);
      if (!is) throw std::invalid_argument("cannot read config: " + o.config);
      nlohmann::json cfg;
      is >> cfg;
      for (const std::string& key : layers[active].apply(cfg))
        if (key == "seed") o.seed_given = true;
    }

    if (list->parsed()) return cmd_list(o);
    if (exp->parsed()) return cmd_experiment(o);
    if (np->parsed()) return cmd_exact_npoint(o);
    if (mass->parsed()) return cmd_mass(o);
    if (rad->parsed()) return cmd_radius(o);
    if (smp->parsed()) return cmd_sample(o);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
