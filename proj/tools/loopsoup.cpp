// Command-line front end: one subcommand per experiment, each writing its
// outputs and a manifest into --out.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "loopsoup/acceptance.hpp"
#include "loopsoup/clusters.hpp"
#include "loopsoup/contours.hpp"
#include "loopsoup/excursions.hpp"
#include "loopsoup/gff.hpp"
#include "loopsoup/harmonic.hpp"
#include "loopsoup/harness.hpp"
#include "loopsoup/loewner.hpp"
#include "loopsoup/loop_soup.hpp"

using namespace loopsoup;

namespace {

/// A subcommand whose parameters come from --config and flags (flags win).
struct Command {
  CLI::App* app = nullptr;
  std::string name;
  std::string config_path;
  std::string out_dir;
  std::map<std::string, std::string> raw;
  std::vector<std::string> keys;
  std::function<int(const Config&, ArtifactSet&, nlohmann::json&)> body;

  void param(const std::string& key, const std::string& help) {
    keys.push_back(key);
    app->add_option("--" + key, raw[key], help);
  }

  Config resolve() const {
    Config c = config_path.empty() ? Config{} : Config::load(config_path);
    c.require_known(keys);
    for (const auto& k : keys)
      if (app->count("--" + k) > 0) c.set(k, raw.at(k));
    return c;
  }
};

std::vector<double> number_list(const Config& c, const std::string& key, const std::string& fallback) {
  std::vector<double> out;
  std::stringstream ss(c.get_string(key, fallback));
  std::string item;
  while (std::getline(ss, item, ',')) {
    Config one;
    one.set(key, item);
    out.push_back(one.get_double(key, 0));
  }
  if (out.empty()) throw ConfigError("config." + key + ": empty list");
  return out;
}

std::vector<std::int64_t> int_list(const Config& c, const std::string& key, const std::string& fallback) {
  std::vector<std::int64_t> out;
  for (const double x : number_list(c, key, fallback)) {
    if (x != std::floor(x)) throw ConfigError("config." + key + ": expected integers");
    out.push_back(static_cast<std::int64_t>(x));
  }
  return out;
}

// Half-plane box either given explicitly or defaulted from the scale.
WeightedGraph box(const Config& c, int& n, int& w, int& h, int dw, int dh) {
  n = static_cast<int>(c.get_int("n", 2));
  w = static_cast<int>(c.get_int("width", static_cast<std::int64_t>(dw) * n));
  h = static_cast<int>(c.get_int("height", static_cast<std::int64_t>(dh) * n));
  return build_half_plane(n, w, h);
}

nlohmann::json path_json(const WeightedGraph& g, const std::vector<Index>& path) {
  nlohmann::json p = nlohmann::json::array();
  for (const Index v : path) p.push_back({g.vertex(v).i, g.vertex(v).j});
  return p;
}

int cmd_green(const Config& c, ArtifactSet& out, nlohmann::json& m) {
  const int w = static_cast<int>(c.get_int("width", 100)), h = static_cast<int>(c.get_int("height", 100));
  const int jmin = static_cast<int>(c.get_int("jmin", 10)), jmax = static_cast<int>(c.get_int("jmax", 20));
  const bool doubling = c.get_bool("doubling", true);
  auto write = [&](const std::string& name, int bw, int bh) {
    const auto rows = green_asymptotics(bw, bh, jmin, jmax);
    auto& f = out.open(name);
    f << "width,height,j,pi_j2_green,pi_j2_exit\n";
    for (const auto& r : rows) f << bw << "," << bh << "," << r.j << "," << r.visit << "," << r.exit << "\n";
    return rows;
  };
  const auto base = write("green.csv", w, h);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : base) lo = std::min(lo, r.visit), hi = std::max(hi, r.visit);
  std::printf("pi j^2 G for j in [%d, %d] on %dx%d: [%.5f, %.5f]\n", jmin, jmax, 2 * w + 1, h, lo, hi);
  if (doubling) {
    const auto big = write("green_doubled.csv", 2 * w, 2 * h);
    nlohmann::json drift = nlohmann::json::array();
    double d0 = 0, d1 = 0;
    for (std::size_t k = 0; k < base.size(); ++k) {
      drift.push_back({{"j", base[k].j}, {"base", base[k].visit}, {"doubled", big[k].visit}, {"change", big[k].visit - base[k].visit}});
      d0 = std::max(d0, std::abs(base[k].visit - 1));
      d1 = std::max(d1, std::abs(big[k].visit - 1));
    }
    out.open("drift.json") << nlohmann::json{{"rows", drift}, {"max_deviation_base", d0}, {"max_deviation_doubled", d1}}.dump(2)
                           << "\n";
    std::printf("max |pi j^2 G - 1|: %.5f -> %.5f under doubling\n", d0, d1);
  }
  m["summary"] = {{"min", lo}, {"max", hi}};
  return 0;
}

int cmd_ceq(const Config& c, ArtifactSet& out, nlohmann::json& m) {
  const double q = c.get_double("q", 4), a = c.get_double("a", 4 * q - 1);
  auto& f = out.open("ceq.csv");
  f << "n,q,a,width,height,ceq,ceq_per_n,ratio_8pi,ratio_2pi\n";
  nlohmann::json rows = nlohmann::json::array();
  for (const auto n64 : int_list(c, "n", "8")) {
    const int n = static_cast<int>(n64);
    const int w = static_cast<int>(c.get_int("width", static_cast<std::int64_t>(std::ceil(4 * q * n))));
    const int h = static_cast<int>(c.get_int("height", w));
    const WeightedGraph g = build_half_plane(n, w, h);
    const double ceq = ceq_n_q(build_quotient(g, a, q));
    const double ratio = ceq / n * 8 * std::numbers::pi / std::log(q);
    f << n << "," << q << "," << a << "," << w << "," << h << "," << ceq << "," << ceq / n << "," << ratio << "," << ratio / 4 << "\n";
    std::printf("n=%d: C^eq = %.6f, C^eq/n = %.6f, 8pi ratio %.4f, 2pi ratio %.4f\n", n, ceq, ceq / n, ratio, ratio / 4);
    rows.push_back({{"n", n}, {"ceq", ceq}});
  }
  m["summary"] = rows;
  return 0;
}

int cmd_sample_gff(const Config& c, ArtifactSet& out, nlohmann::json& m) {
  int n, w, h;
  const WeightedGraph g = box(c, n, w, h, 8, 8);
  const std::int64_t samples = c.get_int("samples", 1);
  const std::uint64_t seed = c.get_uint("seed", 1);
  m["seed"] = seed;
  const GffSampler sampler(g);
  auto& field = out.open("field.csv");
  auto& summary = out.open("clusters.csv");
  field << "sample,i,j,phi\n";
  summary << "sample,clusters,open_edges,largest\n";
  for (std::int64_t k = 0; k < samples; ++k) {
    const std::uint64_t s = replica_seed(seed, static_cast<std::uint64_t>(k));
    GffSample x = sampler.sample(s);
    mark_edges(x, g, s);
    for (Index f = 0; f < g.free_count(); ++f) {
      const Vertex p = g.vertex(g.free_vertices()[f]);
      field << k << "," << p.i << "," << p.j << "," << x.phi[f] << "\n";
    }
    const SignClusterPartition part = sign_clusters(x, g);
    std::vector<Index> size(part.count, 0);
    for (const Index l : part.cluster) ++size[l];
    std::int64_t open = 0;
    for (const auto e : x.edge_open) open += e;
    summary << k << "," << part.count << "," << open << "," << (size.empty() ? 0 : *std::max_element(size.begin(), size.end())) << "\n";
  }
  m["summary"] = {{"free_vertices", g.free_count()}, {"samples", samples}};
  return 0;
}

int cmd_sample_loops(const Config& c, ArtifactSet& out, nlohmann::json& m) {
  int n, w, h;
  const WeightedGraph g = box(c, n, w, h, 4, 4);
  const double alpha = c.get_double("alpha", 0.5);
  const std::int64_t samples = c.get_int("samples", 1);
  const std::uint64_t seed = c.get_uint("seed", 1);
  m["seed"] = seed;
  const int min_jumps = static_cast<int>(c.get_int("min_jumps", 0));
  const LoopSoupSampler sampler(g, static_cast<int>(c.get_int("kmax", 0)), c.get_double("eps", 1e-6));
  const auto& spec = sampler.spectrum();
  auto& loops = out.open("loops.jsonl");
  std::vector<double> hist(spec.kmax + 1, 0.0);
  for (std::int64_t k = 0; k < samples; ++k) {
    const LoopSoupSample s = filter_min_jumps(sampler.sample(alpha, replica_seed(seed, static_cast<std::uint64_t>(k))), min_jumps);
    for (const RootedLoop& l : s.loops) {
      loops << nlohmann::json{{"sample", k}, {"jumps", l.jumps()}, {"path", path_json(g, l.path)}}.dump() << "\n";
      hist[l.jumps()] += 1;
    }
  }
  auto& lens = out.open("lengths.csv");
  lens << "jumps,observed,expected\n";
  for (int k = std::max(2, min_jumps); k <= spec.kmax; ++k)
    lens << k << "," << hist[k] << "," << samples * alpha * spec.mass[k] << "\n";
  std::printf("kmax %d, tail bound %.3g, mean loops per soup %.3f (expected %.3f)\n", spec.kmax, spec.tail_bound,
              std::accumulate(hist.begin(), hist.end(), 0.0) / samples, alpha * spec.total_mass(std::max(2, min_jumps)));
  m["summary"] = {{"kmax", spec.kmax}, {"tail_bound", spec.tail_bound}};
  return 0;
}

int cmd_sample_excursions(const Config& c, ArtifactSet& out, nlohmann::json& m) {
  int n, w, h;
  const WeightedGraph g = box(c, n, w, h, 8, 6);
  const double lo = c.get_double("lo", -1), hi = c.get_double("hi", 0), u = c.get_double("u", 0.25);
  const std::int64_t samples = c.get_int("samples", 1);
  const std::uint64_t seed = c.get_uint("seed", 1);
  m["seed"] = seed;
  const ExcursionSampler ex(g, lo, hi);
  const EndpointIntensity wint = ex.intensity(u);
  const Index sites = static_cast<Index>(wint.sites.size());
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(sites, sites);
  auto pos = [&](Index v) { return std::find(wint.sites.begin(), wint.sites.end(), v) - wint.sites.begin(); };
  auto& paths = out.open("excursions.jsonl");
  for (std::int64_t k = 0; k < samples; ++k) {
    const ExcursionProcess p = ex.sample(u, replica_seed(seed, static_cast<std::uint64_t>(k)));
    for (const ExcursionPath& e : p.excursions) {
      count(pos(e.start), pos(e.end)) += 1;
      paths << nlohmann::json{{"sample", k}, {"start", g.vertex(e.start).i}, {"end", g.vertex(e.end).i}, {"path", path_json(g, e.path)}}.dump()
            << "\n";
    }
  }
  auto& ends = out.open("endpoints.csv");
  ends << "start_i,end_i,observed,expected\n";
  for (Index s = 0; s < sites; ++s)
    for (Index t = 0; t < sites; ++t)
      ends << g.vertex(wint.sites[s]).i << "," << g.vertex(wint.sites[t]).i << "," << count(s, t) << "," << samples * wint.mass(s, t) << "\n";
  std::printf("%d sites, expected %.4f excursions per sample, observed %.4f\n", sites, wint.total(), count.sum() / samples);
  m["summary"] = {{"sites", sites}, {"total_mass", wint.total()}};
  return 0;
}

int cmd_estimate_p(const Config& c, ArtifactSet& out, nlohmann::json& m) {
  ConnectionConfig cc;
  cc.n = static_cast<int>(c.get_int("n", cc.n));
  cc.width = static_cast<int>(c.get_int("width", 0));
  cc.height = static_cast<int>(c.get_int("height", 0));
  cc.alpha = c.get_double("alpha", cc.alpha);
  cc.u = c.get_double("u", cc.u);
  cc.v = c.get_double("v", cc.v);
  cc.q = c.get_double("q", cc.q);
  cc.a = c.get_double("a", cc.a);
  cc.mode = connection_mode_from_string(c.get_string("mode", "metric"));
  cc.samples = c.get_int("samples", cc.samples);
  cc.seed = c.get_uint("seed", cc.seed);
  cc.workers = static_cast<int>(c.get_int("workers", 1));
  cc.kmax = static_cast<int>(c.get_int("kmax", 0));
  cc.min_jumps = static_cast<int>(c.get_int("min_jumps", 0));
  m["seed"] = cc.seed;
  const ConnectionEstimate e = estimate_p(cc);
  auto& f = out.open("estimate.csv");
  f << "n,q,a,u,v,alpha,mode,samples,p_hat,stderr,hits,censored,ceq,formula_8pi,formula_16pi,limit\n";
  f << cc.n << "," << cc.q << "," << cc.a << "," << cc.u << "," << cc.v << "," << cc.alpha << "," << to_string(cc.mode) << ","
    << e.samples << "," << e.p_hat << "," << e.stderr_p << "," << e.hits << "," << e.censored << "," << e.ceq << "," << e.formula
    << "," << e.formula_local_time << "," << e.limit << "\n";
  std::printf("p_hat = %.5f +- %.5f (C^eq = %.5f; 8pi form %.5f, 16pi form %.5f, limit %.5f; censored %.3f)\n", e.p_hat,
              e.stderr_p, e.ceq, e.formula, e.formula_local_time, e.limit, e.censor_rate);
  m["summary"] = {{"p_hat", e.p_hat}, {"stderr", e.stderr_p}};
  return 0;
}

int cmd_contours(const Config& c, ArtifactSet& out, nlohmann::json& m) {
  int n, w, h;
  const WeightedGraph g = box(c, n, w, h, 8, 8);
  const std::string source = c.get_string("source", "gff");
  if (source != "gff" && source != "loops") throw ConfigError("config.source: expected gff or loops, got '" + source + "'");
  const std::int64_t samples = c.get_int("samples", 1);
  const std::uint64_t seed = c.get_uint("seed", 1);
  m["seed"] = seed;
  std::unique_ptr<GffSampler> gff;
  std::unique_ptr<LoopSoupSampler> soup;
  if (source == "gff") gff = std::make_unique<GffSampler>(g);
  else soup = std::make_unique<LoopSoupSampler>(g, static_cast<int>(c.get_int("kmax", 0)));
  const double alpha = c.get_double("alpha", 0.5);
  auto& js = out.open("contours.jsonl");
  auto& chk = out.open("checks.csv");
  chk << "sample,contours,censored,simple,disjoint,non_nested\n";
  std::int64_t bad = 0;
  for (std::int64_t k = 0; k < samples; ++k) {
    const std::uint64_t s = replica_seed(seed, static_cast<std::uint64_t>(k));
    ClusterPartition part;
    if (gff) {
      GffSample x = gff->sample(s);
      mark_edges(x, g, s);
      part = build_clusters(g, x, {});
    } else {
      const LoopSoupSample l = soup->sample(alpha, s);
      part = build_clusters(g, &l, {});
    }
    const ContourFamily f = outer_contours(part, g, source);
    const FamilyCheck fc = check_family(f);
    bad += !fc.ok();
    for (std::size_t i = 0; i < f.contours.size(); ++i) {
      nlohmann::json j = to_json(f.contours[i]);
      j["sample"] = k;
      j["index"] = i;
      js << j.dump() << "\n";
    }
    chk << k << "," << f.contours.size() << "," << f.censored << "," << fc.simple << "," << fc.disjoint << "," << fc.non_nested << "\n";
  }
  std::printf("%lld of %lld families failed the disjoint/non-nested checks\n", static_cast<long long>(bad), static_cast<long long>(samples));
  m["summary"] = {{"failed_families", bad}};
  return bad == 0 ? 0 : 1;
}

int cmd_loewner(const Config& c, ArtifactSet& out, nlohmann::json& m) {
  MartingaleConfig mc;
  mc.kappa = c.get_double("kappa", 4);
  mc.v = c.get_double("v", 1);
  mc.q0 = c.get_double("q0", 2);
  mc.paths = c.get_int("paths", 10000);
  mc.dt = c.get_double("dt", 1e-4);
  mc.margin = c.get_double("margin", 1e-3);
  mc.seed = c.get_uint("seed", 1);
  mc.workers = static_cast<int>(c.get_int("workers", 1));
  if (c.has("exponent")) mc.exponent = c.get_double("exponent", 0);
  m["seed"] = mc.seed;
  nlohmann::json rows = nlohmann::json::array();
  auto& f = out.open("martingale.csv");
  f << "t,mean,stderr,target,richardson_gap,absorbed,paths,dt\n";
  for (const double t : number_list(c, "t", "0.1,0.3,0.5")) {
    mc.t = t;
    const MartingaleStats st = martingale_check(mc);
    f << t << "," << st.mean << "," << st.stderr_mean << "," << st.target << "," << st.richardson_gap << "," << st.absorbed << ","
      << st.paths << "," << st.dt << "\n";
    std::printf("t=%.3f: %.5f +- %.5f (target %.5f, richardson gap %.2g, absorbed %lld)\n", t, st.mean, st.stderr_mean, st.target,
                st.richardson_gap, static_cast<long long>(st.absorbed));
    rows.push_back({{"t", t}, {"mean", st.mean}, {"stderr", st.stderr_mean}});
  }
  m["summary"] = rows;
  return 0;
}

int cmd_formulas(const Config& c, ArtifactSet& out, nlohmann::json& m) {
  const double alpha = c.get_double("alpha", 0.5), u = c.get_double("u", 0.25), v = c.get_double("v", 0.25), q = c.get_double("q", 4);
  const double kappa = kappa_of_alpha(alpha), u0 = u0_of_alpha(alpha);
  nlohmann::json j{{"alpha", alpha}, {"kappa", kappa}, {"u0", u0}, {"roundtrip_2alpha", 2 * alpha_of_kappa(kappa)},
                   {"p_metric_limit", closed_form_p(alpha, u, v, q, ClosedFormMode::metric_limit)}};
  if (alpha == 0.5 && u == u0) j["p_kappa4"] = closed_form_p(alpha, u, v, q, ClosedFormMode::kappa4_special);
  out.open("formulas.json") << j.dump(2) << "\n";
  std::printf("%s\n", j.dump(2).c_str());
  m["summary"] = j;
  return 0;
}

int cmd_accept(const Config& c, ArtifactSet& out, nlohmann::json& m) {
  AcceptanceOptions opt;
  opt.level = level_from_string(c.get_string("level", "fast"));
  opt.seed = c.get_uint("seed", opt.seed);
  m["seed"] = opt.seed;
  opt.workers = static_cast<int>(c.get_int("workers", 1));
  std::vector<std::int64_t> ids;
  if (c.has("criterion")) ids = int_list(c, "criterion", "");
  else
    for (int k = 1; k <= kCriterionCount; ++k) ids.push_back(k);
  auto& js = out.open("reports.jsonl");
  bool ok = true;
  nlohmann::json verdicts = nlohmann::json::object();
  for (const auto id : ids) {
    const CriterionResult r = run_criterion(static_cast<int>(id), opt);
    std::printf("%s\n", summary_line(r).c_str());
    std::fflush(stdout);
    js << to_json(r).dump() << "\n";
    verdicts[std::to_string(id)] = r.pass;
    ok = ok && r.pass;
  }
  m["summary"] = verdicts;
  m["passed"] = ok;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loop-soup, cable-system and Loewner experiments"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> cmds;
  auto add = [&](const std::string& name, const std::string& help, auto body, std::vector<std::pair<std::string, std::string>> params) {
    auto c = std::make_unique<Command>();
    c->name = name;
    c->app = app.add_subcommand(name, help);
    c->app->add_option("--config", c->config_path, "key = value file; flags override it")->check(CLI::ExistingFile);
    c->app->add_option("--out", c->out_dir, "output directory (default runs/<subcommand>)");
    for (const auto& [k, h] : params) c->param(k, h);
    c->body = body;
    cmds.push_back(std::move(c));
  };
  add("green", "pi j^2 G on a box and its doubling", cmd_green,
      {{"width", "half-width (lattice units)"}, {"height", "height"}, {"jmin", "first j"}, {"jmax", "last j"}, {"doubling", "also run the doubled box"}});
  add("ceq", "interval conductance C^eq_n(q)", cmd_ceq,
      {{"n", "scale or comma list"}, {"q", "right endpoint"}, {"a", "left interval length"}, {"width", "half-width"}, {"height", "height"}});
  add("sample-gff", "discrete GFF samples with cable edge marks", cmd_sample_gff,
      {{"n", "scale"}, {"width", "half-width"}, {"height", "height"}, {"samples", "count"}, {"seed", "master seed"}});
  add("sample-loops", "random-walk loop soups", cmd_sample_loops,
      {{"n", "scale"}, {"width", "half-width"}, {"height", "height"}, {"alpha", "intensity"}, {"kmax", "length cap (0: automatic)"},
       {"eps", "tail mass bound"}, {"min_jumps", "drop shorter loops"}, {"samples", "count"}, {"seed", "master seed"}});
  add("sample-excursions", "boundary excursion processes", cmd_sample_excursions,
      {{"n", "scale"}, {"width", "half-width"}, {"height", "height"}, {"lo", "interval start"}, {"hi", "interval end"},
       {"u", "intensity"}, {"samples", "count"}, {"seed", "master seed"}});
  add("estimate-p", "connection probability of two boundary excursion families", cmd_estimate_p,
      {{"n", "scale"}, {"width", "half-width (0: 6qn)"}, {"height", "height (0: 8qn)"}, {"alpha", "loop intensity"}, {"u", "left intensity"},
       {"v", "right intensity"}, {"q", "right interval [1, q]"}, {"a", "left interval [-a, 0]"}, {"mode", "metric, metric-vertex or discrete"},
       {"samples", "replicas"}, {"seed", "master seed"}, {"workers", "threads"}, {"kmax", "loop length cap"}, {"min_jumps", "loop cutoff"}});
  add("contours", "outer contour families", cmd_contours,
      {{"n", "scale"}, {"width", "half-width"}, {"height", "height"}, {"source", "gff or loops"}, {"alpha", "loop intensity"},
       {"kmax", "loop length cap"}, {"samples", "families"}, {"seed", "master seed"}});
  add("loewner-martingale", "restriction martingale over Brownian drivers", cmd_loewner,
      {{"kappa", "SLE parameter"}, {"v", "exponent parameter"}, {"q0", "second point"}, {"t", "time or comma list"}, {"paths", "drivers"},
       {"dt", "step"}, {"margin", "absorption margin"}, {"exponent", "override of -sqrt(v)"}, {"seed", "master seed"}, {"workers", "threads"}});
  add("formulas", "kappa(alpha), u0(alpha) and closed-form probabilities", cmd_formulas,
      {{"alpha", "loop intensity"}, {"u", "left intensity"}, {"v", "right intensity"}, {"q", "right endpoint"}});
  add("accept", "acceptance battery", cmd_accept,
      {{"level", "fast or full"}, {"criterion", "comma list (default all)"}, {"seed", "master seed"}, {"workers", "threads"}});

  CLI11_PARSE(app, argc, argv);
  for (const auto& c : cmds) {
    if (!c->app->parsed()) continue;
    try {
      const Config cfg = c->resolve();
      ArtifactSet out(c->out_dir.empty() ? std::filesystem::path("runs") / c->name : std::filesystem::path(c->out_dir));
      nlohmann::json manifest{{"subcommand", c->name}, {"config", cfg.to_json()}, {"seed", nullptr}};
      const int status = c->body(cfg, out, manifest);
      manifest["exit_status"] = status;
      const std::string hash = out.commit(manifest);
      std::printf("wrote %s (content %s)\n", out.dir().string().c_str(), hash.c_str());
      return status;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "%s: %s\n", c->name.c_str(), e.what());
      return 2;
    }
  }
  return 2;
}
