#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <json.hpp>
#include <sstream>

#include "padicgeom/errors.hpp"
#include "padicgeom/fewnomial.hpp"
#include "padicgeom/integral_geom.hpp"
#include "padicgeom/volumes.hpp"

namespace padicgeom {

namespace {

using Json = nlohmann::ordered_json;

struct Options {
  unsigned p = 2;
  int precision = 0;
  std::string q;
  std::uint64_t seed = 1;
  std::uint64_t samples = 100000;
  unsigned threads = 1;
  std::string max_discard_rate;
  std::string format = "json";
};

struct Report {
  Json body = Json::object();
  Json table = Json::array();
  bool gate_ok = true;
};

std::string rat(const Rational& r) { return to_string(r); }

Json estimate_json(const Estimate& e) {
  return Json{{"mean", rat(e.mean)}, {"stderr", e.std_error}, {"samples", e.samples_used}, {"discarded", e.discarded}};
}

double z_score(const Estimate& e, const Rational& target) {
  const double diff = std::abs(to_double(e.mean - target));
  if (e.std_error == 0) return diff == 0 ? 0 : INFINITY;
  return diff / e.std_error;
}

PadicConfig padic_config(const Options& o) {
  std::optional<Rational> q;
  if (!o.q.empty()) {
    try {
      q = parse_rational(o.q);
    } catch (const std::invalid_argument& e) {
      throw InvalidConfig(e.what());
    }
  }
  return PadicConfig(o.p, o.precision, q);
}

McConfig mc_config(const Options& o) {
  McConfig mc(padic_config(o));
  mc.seed = o.seed;
  mc.samples = o.samples;
  mc.threads = o.threads;
  if (mc.samples == 0) throw InvalidConfig("--samples must be positive");
  if (!o.max_discard_rate.empty()) {
    try {
      mc.max_discard_rate = parse_rational(o.max_discard_rate);
    } catch (const std::invalid_argument& e) {
      throw InvalidConfig(e.what());
    }
    if (*mc.max_discard_rate < 0 || *mc.max_discard_rate > 1) throw InvalidConfig("--max-discard-rate must lie in [0, 1]");
  }
  return mc;
}

Json config_json(const Options& o, const PadicConfig& cfg) {
  Json c{{"p", o.p}, {"precision", cfg.precision()}, {"q", rat(cfg.q)}, {"seed", o.seed}, {"samples", o.samples}};
  if (!o.max_discard_rate.empty()) c["max_discard_rate"] = rat(parse_rational(o.max_discard_rate));
  return c;
}

std::string scalar_text(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

void flatten(const Json& v, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out.emplace_back(prefix, scalar_text(v));
  }
}

void emit(const std::string& format, const std::string& command, const Json& config, const Report& r, std::ostream& out) {
  if (format == "json") {
    Json doc{{"command", command}, {"config", config}};
    for (auto it = r.body.begin(); it != r.body.end(); ++it) doc[it.key()] = it.value();
    if (!r.table.empty()) doc["table"] = r.table;
    doc["gate"] = r.gate_ok ? "pass" : "fail";
    out << doc.dump(2) << "\n";
    return;
  }
  if (format == "csv" && !r.table.empty()) {
    std::vector<std::string> cols;
    for (auto it = r.table[0].begin(); it != r.table[0].end(); ++it) cols.push_back(it.key());
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const Json& row : r.table) {
      for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << scalar_text(row[cols[i]]);
      out << "\n";
    }
    return;
  }
  std::vector<std::pair<std::string, std::string>> lines;
  flatten(Json{{"command", command}, {"config", config}}, "", lines);
  flatten(r.body, "", lines);
  if (format == "csv") {
    out << "key,value\n";
    for (const auto& [k, v] : lines) out << k << "," << v << "\n";
    out << "gate," << (r.gate_ok ? "pass" : "fail") << "\n";
    return;
  }
  for (const auto& [k, v] : lines) out << k << " = " << v << "\n";
  for (const Json& row : r.table) {
    std::string line;
    for (auto it = row.begin(); it != row.end(); ++it) line += (line.empty() ? "" : "  ") + it.key() + "=" + scalar_text(it.value());
    out << line << "\n";
  }
  out << "gate = " << (r.gate_ok ? "pass" : "fail") << "\n";
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

int parse_int(const std::string& s) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidConfig("not an integer: '" + s + "'");
  }
}

// "0,1,3" is univariate; "0,0;1,0;0,1" lists points.
Support parse_support(const std::string& text) {
  if (text.find(';') == std::string::npos) {
    std::vector<int> exps;
    for (const std::string& s : split(text, ',')) exps.push_back(parse_int(s));
    return Support::univariate(exps);
  }
  std::vector<Exponent> pts;
  for (const std::string& point : split(text, ';')) {
    Exponent e;
    for (const std::string& s : split(point, ',')) e.push_back(parse_int(s));
    pts.push_back(e);
  }
  if (pts.empty()) throw InvalidConfig("empty support");
  return Support(static_cast<int>(pts[0].size()), pts);
}

RegionSpec parse_region_spec(const std::string& text, int n) {
  RegionSpec r;
  for (const std::string& s : split(text, ',')) r.push_back(parse_region(s));
  if (r.size() == 1) r.assign(static_cast<std::size_t>(n), r[0]);
  if (static_cast<int>(r.size()) != n) throw InvalidConfig("region needs one entry or one per variable");
  return r;
}

struct Args {
  std::vector<int> gamma, binomial, projective, grassmannian, schubert;
  int k = 1, l = 1, n = 2, m = 1, ambient = 3, max_entry = 40, depth = 1, truncation = 60;
  double max_tv = 0.02;
  std::string space = "projective", support = "0,1", region = "units";
};

Report cmd_volumes(const Args& a, const PadicConfig& cfg) {
  Report r;
  const Rational& q = cfg.q;
  bool any = false;
  if (a.gamma.size() == 1) {
    r.body["gamma"] = Json{{"n", a.gamma[0]}, {"value", rat(gamma(a.gamma[0], q))}};
    any = true;
  }
  if (a.binomial.size() == 2) {
    r.body["q_binomial"] = Json{{"n", a.binomial[0]}, {"k", a.binomial[1]}, {"value", rat(q_binomial(a.binomial[0], a.binomial[1], q))}};
    any = true;
  }
  if (a.projective.size() == 1) {
    r.body["projective"] = Json{{"n", a.projective[0]}, {"value", rat(projective_volume(a.projective[0], q))}};
    any = true;
  }
  if (a.grassmannian.size() == 2) {
    const int k = a.grassmannian[0], n = a.grassmannian[1];
    const Rational v = grassmannian_volume(k, n, q);
    r.body["grassmannian"] = Json{{"k", k}, {"n", n}, {"value", rat(v)}};
    r.gate_ok = v == grassmannian_volume_binomial(k, n, q);
    any = true;
  }
  if (a.schubert.size() == 4) {
    r.body["schubert_ratio"] = Json{{"a", a.schubert[0]}, {"a1", a.schubert[1]}, {"b", a.schubert[2]}, {"b1", a.schubert[3]},
                                    {"value", rat(schubert_volume_ratio(a.schubert[0], a.schubert[1], a.schubert[2], a.schubert[3], q))}};
    any = true;
  }
  if (!any) {
    for (int n = 0; n <= 6; ++n) {
      Json row{{"n", n}, {"gamma", rat(gamma(n, q))}, {"projective", rat(projective_volume(n, q))}};
      for (int k = 0; k <= n; ++k) row["G(" + std::to_string(k) + "," + std::to_string(n) + ")"] = rat(grassmannian_volume(k, n, q));
      r.table.push_back(row);
    }
  }
  return r;
}

Report cmd_rho(const Args& a, const PadicConfig& cfg) {
  Report r;
  for (const PositionKey& x : position_keys(a.k, std::min(a.max_entry, 8)))
    r.table.push_back(Json{{"key", to_string(x)}, {"rho", rat(rho(x, a.k, a.l, a.n, cfg.q))}});
  const TruncatedSum s = rho_normalization(a.k, a.l, a.n, cfg.q, a.max_entry);
  r.body["normalization"] = Json{{"max_entry", a.max_entry}, {"sum", rat(s.value)}, {"residual", rat(1 - s.value)}, {"tail_bound", rat(s.tail_bound)}};
  r.gate_ok = s.value <= 1 && 1 - s.value <= s.tail_bound;
  return r;
}

Report cmd_rho_moment(const Args& a, const PadicConfig& cfg) {
  Report r;
  const MomentIdentity m = rho_moment_identity(a.k, a.l, a.n, a.ambient, cfg.q, a.max_entry);
  const Rational gap = abs(m.lhs - m.rhs);
  r.body["moment"] = Json{{"lhs", rat(m.lhs)}, {"rhs", rat(m.rhs)}, {"difference", rat(gap)}, {"tail_bound", rat(m.tail_bound)}};
  r.gate_ok = gap <= m.tail_bound;
  return r;
}

Report cmd_alpha(const Args& a, const McConfig& mc) {
  Report r;
  const Estimate e = estimate_alpha(a.k, a.m, mc);
  r.body["alpha"] = estimate_json(e);
  if (a.k == 1 || a.m == 1) {
    const Rational closed = alpha_proj_closed(a.k * a.m + 1, Rational(mc.padic.p()));
    r.body["closed_form"] = rat(closed);
    r.body["z"] = z_score(e, closed);
    r.gate_ok = z_score(e, closed) <= 3;
  }
  return r;
}

Report cmd_expected_det(const Args& a, const McConfig& mc) {
  Report r;
  const Estimate e = estimate_expected_abs_det(a.n, mc);
  const Rational closed = expected_abs_det_closed(a.n, Rational(mc.padic.p()));
  r.body["expected_abs_det"] = estimate_json(e);
  r.body["closed_form"] = rat(closed);
  r.body["z"] = z_score(e, closed);
  r.gate_ok = z_score(e, closed) <= 3;
  return r;
}

Report cmd_position_sample(const Args& a, const McConfig& mc) {
  Report r;
  const Rational q(mc.padic.p());
  const PositionHistogram h = empirical_position_histogram(a.k, a.l, a.n, mc);
  for (const auto& [key, count] : h.counts) {
    const Rational freq = Rational(mpz_class(std::to_string(count))) / Rational(mpz_class(std::to_string(h.samples)));
    r.table.push_back(Json{{"key", to_string(key)}, {"count", count}, {"frequency", rat(freq)}, {"model_probability", rat(rho(key, a.k, a.l, a.n, q))}});
  }
  const double tv = total_variation(h, a.k, a.l, a.n, q, a.max_entry);
  r.body["total_variation"] = tv;
  r.body["max_total_variation"] = a.max_tv;
  r.gate_ok = tv <= a.max_tv;
  return r;
}

Report cmd_eta24(const McConfig& mc) {
  Report r;
  const Rational q(mc.padic.p());
  const Estimate direct = estimate_eta_2_4(mc);
  McConfig alpha_mc = mc;
  alpha_mc.seed = mc.seed ^ 0x9e3779b97f4a7c15ULL;
  const Estimate via_alpha = scale(estimate_alpha(2, 2, alpha_mc), eta_factor(2, 4, q));
  const double sigma = std::sqrt(direct.std_error * direct.std_error + via_alpha.std_error * via_alpha.std_error);
  const double diff = std::abs(to_double(direct.mean - via_alpha.mean));
  r.body["direct"] = estimate_json(direct);
  r.body["via_alpha"] = estimate_json(via_alpha);
  r.body["eta_factor"] = rat(eta_factor(2, 4, q));
  r.body["difference_over_sigma"] = sigma == 0 ? 0.0 : diff / sigma;
  r.gate_ok = diff <= 3 * sigma;
  return r;
}

Report cmd_fewnomial(const std::string& mode, const Args& a, const Options& o) {
  Report r;
  const Support s = parse_support(a.support);
  const RegionSpec region = parse_region_spec(a.region, s.n());
  const PadicConfig cfg = padic_config(o);
  r.body["support"] = a.support;
  r.body["region"] = a.region;
  if (mode == "closed") {
    const ClosedForm c = closed_form_expected_zeros(s, region, o.p, cfg.q);
    r.body["value"] = rat(c.value);
    r.body["exact"] = c.exact;
  } else if (mode == "series") {
    const SeriesValue v = expected_zeros_series(s, region, o.p, cfg.q, a.truncation);
    r.body["value"] = rat(v.value);
    r.body["tail_bound"] = rat(v.tail_bound);
  } else {
    const Estimate e = estimate_expected_zeros_mc(s, region, mc_config(o));
    r.body["estimate"] = estimate_json(e);
    try {
      const ClosedForm c = closed_form_expected_zeros(s, region, o.p, Rational(o.p));
      r.body["closed_form"] = rat(c.value);
      r.body["closed_form_exact"] = c.exact;
      r.body["z"] = z_score(e, c.value);
      if (c.exact) r.gate_ok = z_score(e, c.value) <= 3;
    } catch (const UnsupportedSupport&) {
    }
  }
  return r;
}

Report cmd_point_count(const Args& a, const Options& o) {
  Report r;
  const Rational q(o.p);
  PointCountSpace space = a.space == "projective" ? PointCountSpace::projective(a.n) : PointCountSpace::grassmannian(a.k, a.n);
  if (a.space != "projective" && a.space != "grassmannian") throw InvalidConfig("--space must be projective or grassmannian");
  const Rational counted = point_count_volume(space, o.p, a.depth);
  const Rational closed = space.kind == PointCountSpace::Kind::Projective ? projective_volume(a.n, q) : grassmannian_volume(a.k, a.n, q);
  r.body["space"] = a.space;
  r.body["depth"] = a.depth;
  r.body["enumerated"] = rat(counted);
  r.body["closed_form"] = rat(closed);
  r.gate_ok = counted == closed;
  return r;
}

Report cmd_selftest(const Options& o) {
  Report r;
  Json checks = Json::array();
  auto check = [&](const std::string& name, bool ok) {
    checks.push_back(Json{{"name", name}, {"ok", ok}});
    r.gate_ok = r.gate_ok && ok;
  };
  const Rational q2(2);
  check("gamma_q_factorial", gamma(5, q2) == pow(q2 - 1, 5) * epsilon_pow(q2, 15) * q_factorial(5, q2));
  check("grassmannian_forms", grassmannian_volume(2, 4, q2) == grassmannian_volume_binomial(2, 4, q2));
  check("schubert_1111", schubert_volume_ratio(1, 1, 1, 1, q2) == Rational(54, 49));
  check("eta_1n", eta_closed(1, 5, q2, alpha_proj_closed(5, q2)) == 1);
  const TruncatedSum s = rho_normalization(2, 2, 5, Rational(3), 30);
  check("rho_normalization", 1 - s.value <= s.tail_bound && s.value <= 1);
  check("point_count_p1", point_count_volume(PointCountSpace::projective(1), 2, 3) == Rational(3, 2));
  check("fewnomial_box", closed_form_expected_zeros(Support(2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}), {Region::KTimes, Region::KTimes}, 2, q2).value ==
                             Rational(9, 7));
  McConfig mc = mc_config(o);
  mc.samples = std::min<std::uint64_t>(mc.samples, 20000);
  check("expected_abs_det_n2", z_score(estimate_expected_abs_det(2, mc), expected_abs_det_closed(2, Rational(o.p))) <= 4);
  const ResidueRing& ring = mc.padic.ring;
  CounterRng rng(o.seed, 0);
  bool invariant = true;
  for (int i = 0; i < 50; ++i) {
    Subspace e = sample_uniform_subspace(ring, 2, 5, rng), f = sample_uniform_subspace(ring, 2, 5, rng);
    RMatrix g = sample_gln(ring, 5, rng);
    invariant = invariant && position_vector(e, f) == position_vector(transform(g, e), transform(g, f));
  }
  check("position_gl_invariance", invariant);
  r.body["checks"] = checks;
  return r;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"p-adic linear algebra and integral geometry toolkit"};
  app.fallthrough();
  app.require_subcommand(1);
  Options o;
  if (const char* env = std::getenv("PADICGEOM_THREADS")) {
    try {
      o.threads = static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      err << "ignoring invalid PADICGEOM_THREADS='" << env << "'\n";
    }
  }
  app.add_option("--p", o.p, "prime p");
  app.add_option("--precision", o.precision, "working precision N (0 = largest with p^N <= 2^62)");
  app.add_option("--q", o.q, "q for closed forms (rational, defaults to p)");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--samples", o.samples, "Monte Carlo sample count");
  app.add_option("--threads", o.threads, "worker threads (overrides PADICGEOM_THREADS)");
  app.add_option("--max-discard-rate", o.max_discard_rate, "largest tolerated fraction of indeterminate samples");
  app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv", "text"}));

  Args a;
  auto* volumes = app.add_subcommand("volumes", "gamma, q-binomial, projective, Grassmannian and Schubert volumes");
  volumes->add_option("--gamma", a.gamma, "n")->expected(1);
  volumes->add_option("--binomial", a.binomial, "n k")->expected(2);
  volumes->add_option("--projective", a.projective, "n")->expected(1);
  volumes->add_option("--grassmannian", a.grassmannian, "k n")->expected(2);
  volumes->add_option("--schubert", a.schubert, "a a1 b b1")->expected(4);

  auto add_dims = [&](CLI::App* c) {
    c->add_option("--k", a.k, "dim E");
    c->add_option("--l", a.l, "dim F");
    c->add_option("--n", a.n, "ambient dimension");
    c->add_option("--max-entry", a.max_entry, "truncation of position entries");
  };
  auto* rho_cmd = app.add_subcommand("rho", "joint density of position vectors and its normalization");
  add_dims(rho_cmd);
  auto* moment = app.add_subcommand("rho-moment", "moment identity across ambient dimensions");
  add_dims(moment);
  moment->add_option("--ambient", a.ambient, "larger ambient dimension");
  auto* alpha = app.add_subcommand("alpha", "Monte Carlo average scaling factor");
  alpha->add_option("--k", a.k);
  alpha->add_option("--m", a.m);
  auto* det = app.add_subcommand("expected-det", "Monte Carlo E|det| of a uniform R-matrix");
  det->add_option("--n", a.n);
  auto* pos = app.add_subcommand("position-sample", "empirical position-vector histogram against the density");
  add_dims(pos);
  pos->add_option("--max-tv", a.max_tv, "total variation gate");
  auto* eta = app.add_subcommand("eta24", "expected number of lines meeting four random lines, two estimators");
  auto* few = app.add_subcommand("fewnomial", "expected zeros of random fewnomials");
  few->require_subcommand(1);
  std::string few_mode;
  for (const char* mode : {"closed", "series", "mc"}) {
    auto* sub = few->add_subcommand(mode);
    sub->fallthrough();
    sub->add_option("--support", a.support, "univariate '0,1,3' or points '0,0;1,0;0,1'");
    sub->add_option("--region", a.region, "units, max-ideal, r-nonzero, k-minus-r, k-times (one or per variable)");
    sub->add_option("--truncation", a.truncation, "series truncation");
    sub->callback([&few_mode, mode] { few_mode = mode; });
  }
  few->fallthrough();
  auto* pc = app.add_subcommand("point-count", "volume by counting points over Z/p^depth");
  pc->add_option("--space", a.space, "projective or grassmannian");
  pc->add_option("--k", a.k);
  pc->add_option("--n", a.n);
  pc->add_option("--depth", a.depth);
  auto* self = app.add_subcommand("selftest", "quick property suite");
  for (CLI::App* c : {volumes, rho_cmd, moment, alpha, det, pos, eta, pc, self}) c->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const PadicConfig cfg = padic_config(o);
    const Json config = config_json(o, cfg);
    Report r;
    std::string name;
    if (*volumes) {
      name = "volumes";
      r = cmd_volumes(a, cfg);
    } else if (*rho_cmd) {
      name = "rho";
      r = cmd_rho(a, cfg);
    } else if (*moment) {
      name = "rho-moment";
      r = cmd_rho_moment(a, cfg);
    } else if (*alpha) {
      name = "alpha";
      r = cmd_alpha(a, mc_config(o));
    } else if (*det) {
      name = "expected-det";
      r = cmd_expected_det(a, mc_config(o));
    } else if (*pos) {
      name = "position-sample";
      r = cmd_position_sample(a, mc_config(o));
    } else if (*eta) {
      name = "eta24";
      r = cmd_eta24(mc_config(o));
    } else if (*few) {
      name = "fewnomial " + few_mode;
      r = cmd_fewnomial(few_mode, a, o);
    } else if (*pc) {
      name = "point-count";
      r = cmd_point_count(a, o);
    } else {
      name = "selftest";
      r = cmd_selftest(o);
    }
    emit(o.format, name, config, r, out);
    return r.gate_ok ? kExitOk : kExitGateFailure;
  } catch (const DiscardRateExceeded& e) {
    err << "discard rate exceeded: " << e.what() << "\n";
    return kExitDiscardBreach;
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const BudgetExceeded& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitInvalidConfig;
  }
}

}  // namespace padicgeom
