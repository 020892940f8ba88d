#include "mhdbl/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "json.hpp"
#include "mhdbl/errors.hpp"

namespace mhdbl {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

using Ref = std::variant<double*, int*, std::string*, bool*, std::vector<double>*>;

struct Key {
  std::string section;
  std::string name;
  Ref ref;
  std::string full() const { return section.empty() ? name : section + "." + name; }
};

std::vector<Key> keys(RunConfig& c) {
  return {
      {"", "profile", &c.profile},
      {"grid", "nx", &c.grid.nx},
      {"grid", "ny", &c.grid.ny},
      {"grid", "nY", &c.grid.nY},
      {"grid", "y_max", &c.grid.y_max},
      {"grid", "Y_max", &c.grid.Y_max},
      {"grid", "stretch", &c.grid.stretch},
      {"output", "dir", &c.out_dir},
      {"output", "ledger", &c.ledger},
      {"params", "eps", &c.params.eps},
      {"params", "nu", &c.params.nu},
      {"params", "kappa", &c.params.kappa},
      {"params", "L", &c.params.L},
      {"params", "gamma", &c.params.gamma},
      {"params", "zeta", &c.params.zeta},
      {"solver", "baseline_ratio_max", &c.baseline_ratio_max},
      {"solver", "euler_max_iter", &c.euler_max_iter},
      {"solver", "euler_tol", &c.euler_tol},
      {"solver", "layer0_max_iter", &c.layer0_max_iter},
      {"solver", "layer0_tol", &c.layer0_tol},
      {"solver", "linear_rel_tol", &c.linear_rel_tol},
      {"solver", "picard_max_iter", &c.picard_max_iter},
      {"solver", "picard_rel_tol", &c.picard_rel_tol},
      {"study", "eps", &c.eps_sweep},
      {"tables", "h0e", &c.h0e_table},
      {"tables", "u0e", &c.u0e_table},
      {"thresholds", "l", &c.thresholds.l},
      {"thresholds", "ratio_max", &c.thresholds.ratio_max},
      {"thresholds", "side_C", &c.thresholds.side_C},
      {"thresholds", "sigma0", &c.thresholds.sigma0},
      {"thresholds", "vartheta0", &c.thresholds.vartheta0},
  };
}

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& key) {
  double x = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError("cli", "parse_config", "key " + key + ": not a finite number: '" + v + "'");
  return x;
}

std::string format(const Ref& r) {
  struct {
    std::string operator()(double* p) const { return num(*p); }
    std::string operator()(int* p) const { return std::to_string(*p); }
    std::string operator()(std::string* p) const { return *p; }
    std::string operator()(bool* p) const { return *p ? "true" : "false"; }
    std::string operator()(std::vector<double>* p) const {
      std::string s;
      for (std::size_t k = 0; k < p->size(); ++k) s += (k ? ", " : "") + num((*p)[k]);
      return s;
    }
  } v;
  return std::visit(v, r);
}

void assign(const Ref& r, const std::string& value, const std::string& key) {
  struct {
    const std::string& v;
    const std::string& key;
    void operator()(double* p) const { *p = parse_double(v, key); }
    void operator()(int* p) const {
      int x = 0;
      auto res = std::from_chars(v.data(), v.data() + v.size(), x);
      if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("cli", "parse_config", "key " + key + ": not an integer: '" + v + "'");
      *p = x;
    }
    void operator()(std::string* p) const { *p = v; }
    void operator()(bool* p) const {
      if (v != "true" && v != "false")
        throw ConfigError("cli", "parse_config", "key " + key + ": expected true or false");
      *p = v == "true";
    }
    void operator()(std::vector<double>* p) const {
      p->clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) p->push_back(parse_double(trim(item), key));
    }
  } a{value, key};
  std::visit(a, r);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyMissing("cli", "load_table", "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Profile1D load_table(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> z, f;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) throw ConfigError("cli", "load_table", path + ": expected two columns in '" + line + "'");
    z.push_back(a);
    f.push_back(b);
  }
  if (z.size() < 4) throw ConfigError("cli", "load_table", path + ": need at least 4 rows");
  for (std::size_t k = 1; k < z.size(); ++k)
    if (!(z[k] > z[k - 1])) throw ConfigError("cli", "load_table", path + ": abscissae must increase");
  return Profile1D::tabulated(std::move(z), std::move(f));
}

json check_json(const CheckResult& c) {
  return {{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"threshold", c.threshold},
          {"margin", c.margin}, {"note", c.note}};
}

json checks_json(const std::vector<CheckResult>& cs) {
  json a = json::array();
  for (const auto& c : cs) a.push_back(check_json(c));
  return a;
}

json fit_json(const RateFit& f) { return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}}; }

json inequality_json(const InequalityReport& r) {
  return {{"name", r.name},   {"lhs_terms", r.lhs_terms}, {"rhs_terms", r.rhs_terms}, {"lhs", r.lhs},
          {"rhs", r.rhs},     {"ratio", r.ratio},         {"threshold", r.threshold}, {"pass", r.pass},
          {"extra", r.extra}};
}

json theorem_json(const MainTheoremReport& t) {
  return {{"eps", t.eps},       {"gap_U", t.gap_U},           {"gap_V", t.gap_V},
          {"gap_H", t.gap_H},   {"gap_G", t.gap_G},           {"normS", t.normS},
          {"iterations", t.iterations}, {"q_norm", t.q_norm}, {"asymptotic_ratio", t.asymptotic_ratio}};
}

// Collects artifacts of one subcommand and writes the manifest last.
class Artifacts {
 public:
  Artifacts(fs::path dir, std::string subcommand, std::string hash)
      : dir_(std::move(dir)), sub_(std::move(subcommand)), hash_(std::move(hash)) {
    // Start from an empty directory so stale files never outlive a rerun.
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void text(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw DependencyMissing("cli", "write_artifact", "cannot write " + (dir_ / name).string());
    out << content;
    files_.push_back(name);
  }
  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }
  // Two whitespace-separated columns for plotting.
  void columns(const std::string& name, const std::vector<double>& a, const std::vector<double>& b) {
    std::string s;
    for (std::size_t k = 0; k < a.size(); ++k) s += num(a[k]) + " " + num(b[k]) + "\n";
    text(name, s);
  }
  void finish(const json& summary) {
    std::sort(files_.begin(), files_.end());
    json m = {{"subcommand", sub_}, {"config_hash", hash_}, {"files", files_}, {"summary", summary}};
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << m.dump(2) << "\n";
  }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::string sub_, hash_;
  std::vector<std::string> files_;
};

std::vector<double> column(const Field2D& f, int i) { return {f.row(i).begin(), f.row(i).end()}; }

void add_failures(std::vector<CheckResult>& v, const std::vector<CheckResult>& cs) {
  for (const auto& c : cs)
    if (!c.pass) v.push_back(c);
}

std::string ledger_text(const std::string& sub, const std::string& hash, const std::vector<CheckResult>& bad) {
  std::string s = "# Violations: " + sub + " (" + hash + ")\n\n";
  if (bad.empty()) s += "none\n";
  for (const auto& c : bad)
    s += "- " + c.name + ": measured " + num(c.measured) + ", threshold " + num(c.threshold) +
         (c.note.empty() ? "" : " (" + c.note + ")") + "\n";
  return s;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  auto ks = keys(c);
  std::map<std::string, const Key*> index;
  for (const auto& k : ks) index[k.full()] = &k;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("cli", "parse_config", "line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("cli", "parse_config", "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    const auto it = index.find(key);
    if (it == index.end()) throw ConfigError("cli", "parse_config", "unknown key " + key);
    if (seen[key]++) throw ConfigError("cli", "parse_config", "duplicate key " + key);
    assign(it->second->ref, trim(line.substr(eq + 1)), key);
  }
  if (c.profile.empty()) throw ConfigError("cli", "parse_config", "profile is required");
  return c;
}

std::string canonical(const RunConfig& config) {
  RunConfig c = config;
  auto ks = keys(c);
  std::sort(ks.begin(), ks.end(), [](const Key& a, const Key& b) {
    return std::tie(a.section, a.name) < std::tie(b.section, b.name);
  });
  std::string out, section;
  for (const auto& k : ks) {
    if (k.section != section) {
      section = k.section;
      out += "\n[" + section + "]\n";
    }
    out += k.name + " = " + format(k.ref) + "\n";
  }
  return out;
}

std::string config_hash(const RunConfig& config) {
  std::string text = canonical(config);
  for (const std::string* t : {&config.u0e_table, &config.h0e_table})
    if (!t->empty()) text += "\n" + read_file(*t);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PipelineConfig to_pipeline(const RunConfig& c) {
  PipelineConfig p;
  p.profile = c.profile;
  p.params = c.params;
  p.grid = c.grid;
  p.grid.L = c.params.L;
  p.thresholds = c.thresholds;
  p.layer0.tol = c.layer0_tol;
  p.layer0.max_iter = c.layer0_max_iter;
  p.euler.tol = c.euler_tol;
  p.euler.max_iter = c.euler_max_iter;
  p.picard.max_iter = c.picard_max_iter;
  p.picard.rel_tol = c.picard_rel_tol;
  p.picard.linear.rel_tol = c.linear_rel_tol;
  p.baseline_ratio_max = c.baseline_ratio_max;
  if (!c.u0e_table.empty()) p.u0e_table = load_table(c.u0e_table);
  if (!c.h0e_table.empty()) p.h0e_table = load_table(c.h0e_table);
  return p;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"validate", "layer0", "euler1", "layer1",
                                          "compose",  "remainder", "audit", "study"};
  return s;
}

std::string csv_schemas() {
  return "CSV artifacts (comma separated, one header line):\n"
         "  picard.csv     iteration,normS,delta\n"
         "  study.csv      eps,R1,R2,R3,R4,weighted\n"
         "  theorem.csv    eps,gap_U,gap_V,gap_H,gap_G,normS,iterations,asymptotic_ratio,q_rel\n"
         "  audits.csv     eps,energy_ratio,positivity_ratio,linf_ratio,energy_imbalance\n"
         "  structure.csv  eps,check,measured,threshold,pass\n"
         "Two-column .dat files hold (abscissa, value) pairs; manifest.json lists every artifact.\n";
}

int run_subcommand(const std::string& sub, const RunConfig& config, const RunOptions& opt, std::ostream& log) {
  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), sub) == subs.end())
    throw ConfigError("cli", "run", "unknown subcommand " + sub);
  const PipelineConfig pc = to_pipeline(config);
  const std::string hash = config_hash(config);
  const fs::path root = opt.out_dir.empty() ? fs::path(config.out_dir) : fs::path(opt.out_dir);
  Artifacts art(root / hash / sub, sub, hash);
  art.text("config.txt", canonical(config));
  std::vector<CheckResult> bad;
  json summary;

  if (sub == "study") {
    const StudyReport rep = scaling_study(pc, config.eps_sweep, opt.jobs, true);
    std::string study = "eps,R1,R2,R3,R4,weighted\n", theorem =
        "eps,gap_U,gap_V,gap_H,gap_G,normS,iterations,asymptotic_ratio,q_rel\n";
    std::string audits = "eps,energy_ratio,positivity_ratio,linf_ratio,energy_imbalance\n";
    std::string structure = "eps,check,measured,threshold,pass\n";
    std::vector<double> eps, W;
    for (const auto& r : rep.rows) {
      const auto& t = r.theorem;
      double q_rel = 0.0;
      for (const auto& c : r.structure) {
        if (c.name == "magnetic_multiplier") q_rel = c.measured;
        structure += num(r.eps) + "," + c.name + "," + num(c.measured) + "," + num(c.threshold) + "," +
                     (c.pass ? "1" : "0") + "\n";
      }
      study += num(r.eps) + "," + num(r.R1) + "," + num(r.R2) + "," + num(r.R3) + "," + num(r.R4) + "," +
               num(r.weighted) + "\n";
      theorem += num(r.eps) + "," + num(t.gap_U) + "," + num(t.gap_V) + "," + num(t.gap_H) + "," + num(t.gap_G) +
                 "," + num(t.normS) + "," + std::to_string(t.iterations) + "," + num(t.asymptotic_ratio) + "," +
                 num(q_rel) + "\n";
      audits += num(r.eps) + "," + num(r.audits.energy_ratio) + "," + num(r.audits.positivity_ratio) + "," +
                num(r.audits.linf_ratio) + "," + num(r.audits.energy_imbalance) + "\n";
      eps.push_back(r.eps);
      W.push_back(r.weighted);
    }
    art.text("study.csv", study);
    art.text("theorem.csv", theorem);
    art.text("audits.csv", audits);
    art.text("structure.csv", structure);
    art.columns("weighted_residual.dat", eps, W);
    json slopes = {{"weighted", fit_json(rep.weighted)}, {"R1", fit_json(rep.R1)},      {"R3", fit_json(rep.R3)},
                   {"R24", fit_json(rep.R24)},           {"gap_U", fit_json(rep.gap_U)}, {"gap_V", fit_json(rep.gap_V)},
                   {"gap_H", fit_json(rep.gap_H)},       {"gap_G", fit_json(rep.gap_G)}, {"normS", fit_json(rep.normS)}};
    art.json_file("slopes.json", slopes);
    json table = json::array();
    for (const auto& r : rep.rows) table.push_back(theorem_json(r.theorem));
    art.json_file("theorem.json", table);
    const auto acc = study_acceptance(rep, pc.params);
    art.json_file("acceptance.json", checks_json(acc));
    json per_eps = json::array();
    for (const auto& r : rep.rows) per_eps.push_back({{"eps", r.eps}, {"checks", checks_json(r.structure)}});
    art.json_file("structure.json", per_eps);
    add_failures(bad, acc);
    summary = {{"residual_slope", rep.weighted.slope}, {"R1_slope", rep.R1.slope}, {"rows", rep.rows.size()}};
    log << "study: " << rep.rows.size() << " eps values, residual slope " << rep.weighted.slope << " (r2 "
        << rep.weighted.r2 << "), R1 slope " << rep.R1.slope << "\n";
    for (const auto& c : acc) log << "  " << (c.pass ? "pass " : "FAIL ") << c.name << " = " << c.measured << "\n";
  } else {
    const std::map<std::string, Stage> stage{{"validate", Stage::validate}, {"layer0", Stage::layer0},
                                             {"euler1", Stage::euler1},     {"layer1", Stage::layer1},
                                             {"compose", Stage::compose},   {"remainder", Stage::remainder},
                                             {"audit", Stage::remainder}};
    const PipelineResult r = run_pipeline(pc, stage.at(sub));
    art.json_file("validation.json",
                  {{"ratio_case", r.validation.ratio_case}, {"all_pass", r.validation.all_pass()},
                   {"checks", checks_json(r.validation.checks)}});
    add_failures(bad, r.validation.checks);
    summary["validation_pass"] = r.validation.all_pass();
    log << sub << ": profile " << pc.profile << ", eps " << r.params.eps << ", validation "
        << (r.validation.all_pass() ? "pass" : "FAIL") << " (" << r.validation.ratio_case << ")\n";
    if (sub == "validate") {
      art.json_file("structure.json", json::array());
    } else {
      const auto checks = structural_checks(r, pc);
      art.json_file("structure.json", checks_json(checks));
      add_failures(bad, checks);
      for (const auto& c : checks)
        if (!c.pass) log << "  FAIL " << c.name << " = " << c.measured << " (threshold " << c.threshold << ")\n";
    }
    if (r.l0 && sub == "layer0") {
      const auto& l0 = *r.l0;
      const int n = l0.u0p.nx();
      bool within = true;
      double min_h = 1e300, max_ratio = 0.0;
      int iters = 0;
      for (const auto& m : l0.monitor) {
        within = within && m.within_bounds;
        min_h = std::min(min_h, m.min_h_total);
        max_ratio = std::max(max_ratio, m.max_ratio);
        iters = std::max(iters, m.iterations);
      }
      const auto ct = corner_traces(l0);
      art.json_file("layer0.json", {{"u_e", l0.u_e}, {"h_e", l0.h_e}, {"u_b", l0.u_b}, {"within_bounds", within},
                                    {"min_h_total", min_h}, {"max_ratio", max_ratio}, {"max_newton_iterations", iters},
                                    {"stream_identity_residual", stream_identity_residual(l0, r.params)},
                                    {"corner_traces", {{"v0", ct.v0}, {"vL", ct.vL}, {"g0", ct.g0}, {"gL", ct.gL}}}});
      art.columns("u0p_outflow.dat", l0.u0p.mesh()->z, column(l0.u0p, n));
      art.columns("h0p_outflow.dat", l0.h0p.mesh()->z, column(l0.h0p, n));
      art.columns("trace_v1e.dat", l0.u0p.mesh()->x, l0.trace_v1e);
      if (!within) bad.push_back({"layer0_monitor", false, min_h, pc.thresholds.vartheta0 / 2, 0.0, "bounds left"});
      summary["within_bounds"] = within;
    }
    if (r.ec && sub == "euler1") {
      const auto& ec = *r.ec;
      const int mid = ec.v1e.nx() / 2;
      art.json_file("euler1.json", {{"iterations", ec.iterations}, {"rel_residual", ec.rel_residual},
                                    {"positivity_certificate", positivity_certificate(ec.w1, r.flow)},
                                    {"sup_v1e", sup_norm(ec.v1e)}, {"sup_g1e", sup_norm(ec.g1e)},
                                    {"sup_u1e", sup_norm(ec.u1e)}, {"sup_h1e", sup_norm(ec.h1e)}});
      art.columns("v1e_mid.dat", ec.v1e.mesh()->z, column(ec.v1e, mid));
      art.columns("wall_flux_b.dat", ec.v1e.mesh()->x, ec.b);
    }
    if (r.l1 && sub == "layer1") {
      const auto& l1 = *r.l1;
      art.json_file("layer1.json", {{"stream_residual", layer1_stream_residual(l1, *r.l0, *r.sources, r.params)},
                                    {"psi_defect", psi_defect(l1)}, {"sup_up", sup_norm(l1.up)},
                                    {"sup_vp", sup_norm(l1.vp)}, {"sup_hp", sup_norm(l1.hp)},
                                    {"sup_gp", sup_norm(l1.gp)}});
      art.columns("up_outflow.dat", l1.up.mesh()->z, column(l1.up, l1.up.nx()));
    }
    if (r.residuals && sub == "compose") {
      const auto& R = *r.residuals;
      const auto w = wall_defects(*r.approx, r.params);
      art.json_file("residuals.json", {{"R1", R.R1_L2}, {"R2", R.R2_L2}, {"R3", R.R3_L2}, {"R4", R.R4_L2},
                                       {"weighted", R.weighted_sum},
                                       {"wall_defects", {{"u", w.u}, {"v", w.v}, {"g", w.g}, {"dyh", w.dyh}}}});
      art.columns("u_app_outflow.dat", r.approx->u_app.mesh()->z, column(r.approx->u_app, r.approx->u_app.nx()));
      summary["weighted_residual"] = R.weighted_sum;
    }
    if (r.theorem && sub == "remainder") {
      art.json_file("theorem.json", theorem_json(*r.theorem));
      std::string pic = "iteration,normS,delta\n";
      std::vector<double> it, dl;
      for (const auto& h : r.remainder->history) {
        pic += std::to_string(h.iteration) + "," + num(h.normS) + "," + num(h.delta) + "\n";
        it.push_back(h.iteration);
        dl.push_back(h.delta);
      }
      art.text("picard.csv", pic);
      art.columns("picard_delta.dat", it, dl);
      summary["normS"] = r.theorem->normS;
    }
    if (r.remainder && sub == "audit") {
      const auto f = nonlinear_sources(*r.remainder, *r.residuals, *r.l1, r.params);
      const auto en = energy_audit(*r.remainder, *r.baseline, f, r.params);
      const auto pos = positivity_audit(*r.remainder, *r.baseline, f, r.params);
      const auto li = linf_audit(*r.remainder, stokes_sources(*r.remainder, r.params), r.params);
      const auto hp = hardy_poincare_check(r.remainder->u, r.params.L);
      art.json_file("audits.json",
                    {{"energy",
                      {{"identity_lhs_terms", en.identity_lhs_terms}, {"identity_rhs_terms", en.identity_rhs_terms},
                       {"identity_lhs", en.identity_lhs}, {"identity_rhs", en.identity_rhs},
                       {"imbalance", en.imbalance}, {"inequality", inequality_json(en.inequality)}}},
                     {"positivity", inequality_json(pos)},
                     {"linf", inequality_json(li)},
                     {"hardy_poincare_u",
                      {{"poincare_ratio", hp.poincare_ratio}, {"hardy_ratio", hp.hardy_ratio}, {"pass", hp.pass}}}});
      for (const auto* q : {&en.inequality, &pos, &li})
        if (!q->pass) bad.push_back({q->name, false, q->ratio, q->threshold, q->threshold - q->ratio, "audit ratio"});
      log << "audit: energy " << en.inequality.ratio << ", positivity " << pos.ratio << ", linf " << li.ratio
          << ", identity imbalance " << en.imbalance << "\n";
    }
  }
  summary["violations"] = bad.size();
  if (opt.ledger || config.ledger) art.text("ledger.md", ledger_text(sub, hash, bad));
  art.finish(summary);
  log << "artifacts: " << art.dir().string() << "\n";
  return opt.strict && !bad.empty() ? 3 : 0;
}

}  // namespace mhdbl
