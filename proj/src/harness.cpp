#include "treerange/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "treerange/analytics.hpp"
#include "treerange/brw.hpp"
#include "treerange/errors.hpp"
#include "treerange/parallel.hpp"
#include "treerange/snake.hpp"
#include "treerange/spine.hpp"
#include "treerange/verify.hpp"

namespace treerange::harness {

using nlohmann::json;

const char* const kCsvHeader =
    "experiment,dim,n,p,reps,seed,value,stderr,extra_json,elapsed_ms";

namespace {

void require_keys(const json& obj, const std::vector<std::string>& allowed,
                  const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& key : allowed)
      if (it.key() == key) { ok = true; break; }
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Row {
  const ExperimentConfig* cfg;
  double value = 0.0;
  double stderr_ = 0.0;
  std::string extra = "{}";
  double elapsed_ms = 0.0;

  void write(std::ostream& os) const {
    os << cfg->experiment << ',' << cfg->dim << ',' << cfg->n << ',' << cfg->p
       << ',' << cfg->reps << ',' << cfg->seed << ',' << fmt_double(value)
       << ',' << fmt_double(stderr_) << ',' << csv_quote(extra) << ','
       << fmt_double(elapsed_ms) << '\n';
  }
};

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string warn_extra(const ExperimentConfig& cfg, std::string extra) {
  if (cfg.reps == 1) {
    // stderr is meaningless with a single replica; flag it.
    if (extra == "{}") return R"({"warn":"reps=1"})";
    extra.insert(extra.size() - 1, R"(,"warn":"reps=1")");
  }
  return extra;
}

}  // namespace

distributions::OffspringDistribution ExperimentConfig::make_offspring() const {
  if (offspring_kind == "geometric")
    return distributions::OffspringDistribution::geometric_critical();
  if (offspring_kind == "table")
    return distributions::OffspringDistribution::from_table(offspring_pmf);
  throw ConfigError("offspring kind must be geometric or table");
}

distributions::JumpDistribution ExperimentConfig::make_jump() const {
  if (jump_kind == "srw") return distributions::JumpDistribution::srw(dim);
  if (jump_kind == "table")
    return distributions::JumpDistribution::from_table(dim, jump_support);
  throw ConfigError("jump kind must be srw or table");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw ConfigError("invalid JSON");
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  require_keys(doc,
               {"experiment", "offspring", "jump", "n", "p", "horizon", "j_max",
                "m", "k", "reps", "cap", "stop_p", "box_radius", "h_reps",
                "seed", "workers", "out", "x", "eps", "r", "t", "dt", "level"},
               "config");
  ExperimentConfig cfg;
  if (!doc.contains("experiment") || !doc["experiment"].is_string())
    throw ConfigError("config requires an experiment name");
  cfg.experiment = doc["experiment"].get<std::string>();

  if (doc.contains("offspring")) {
    const json& off = doc["offspring"];
    require_keys(off, {"kind", "pmf"}, "offspring");
    cfg.offspring_kind = off.value("kind", "geometric");
    if (off.contains("pmf")) {
      for (const auto& entry : off["pmf"]) {
        if (!entry.is_array() || entry.size() != 2)
          throw ConfigError("offspring pmf entries must be [k, p] pairs");
        cfg.offspring_pmf.emplace_back(entry[0].get<std::int64_t>(),
                                       entry[1].get<double>());
      }
    }
  }
  if (doc.contains("jump")) {
    const json& jmp = doc["jump"];
    require_keys(jmp, {"kind", "dim", "support"}, "jump");
    cfg.jump_kind = jmp.value("kind", "srw");
    if (jmp.contains("dim")) cfg.dim = jmp["dim"].get<int>();
    if (jmp.contains("support")) {
      for (const auto& entry : jmp["support"]) {
        if (!entry.is_array() || entry.size() != 2)
          throw ConfigError("jump support entries must be [[x...], p] pairs");
        Point pt = Point::zero(cfg.dim);
        const auto& coords = entry[0];
        if (!coords.is_array() || static_cast<int>(coords.size()) != cfg.dim)
          throw ConfigError("jump support vector has wrong dimension");
        for (int i = 0; i < cfg.dim; ++i) pt.c[i] = coords[i].get<std::int32_t>();
        cfg.jump_support.emplace_back(pt, entry[1].get<double>());
      }
    }
  }

  auto geti = [&](const char* key, std::int64_t& slot) {
    if (doc.contains(key)) slot = doc[key].get<std::int64_t>();
  };
  geti("n", cfg.n);
  geti("p", cfg.p);
  geti("horizon", cfg.horizon);
  geti("j_max", cfg.j_max);
  geti("m", cfg.m);
  geti("k", cfg.k);
  geti("reps", cfg.reps);
  geti("cap", cfg.cap);
  geti("h_reps", cfg.h_reps);
  if (doc.contains("stop_p")) cfg.stop_p = doc["stop_p"].get<std::int64_t>();
  if (doc.contains("box_radius"))
    cfg.box_radius = doc["box_radius"].get<std::int32_t>();
  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("workers")) cfg.workers = doc["workers"].get<int>();
  if (doc.contains("out")) cfg.out = doc["out"].get<std::string>();
  if (doc.contains("x")) {
    for (const auto& c : doc["x"]) cfg.x.push_back(c.get<std::int32_t>());
  }
  if (doc.contains("eps")) cfg.eps = doc["eps"].get<double>();
  if (doc.contains("r")) cfg.r = doc["r"].get<double>();
  if (doc.contains("t")) cfg.t = doc["t"].get<double>();
  if (doc.contains("dt")) cfg.dt = doc["dt"].get<double>();
  if (doc.contains("level")) cfg.level = doc["level"].get<std::string>();
  return cfg;
}

void apply_env_seed(ExperimentConfig& config) {
  if (const char* env = std::getenv("TREERANGE_SEED")) {
    config.seed = std::strtoull(env, nullptr, 10);
  }
}

namespace {

void validate_common(const ExperimentConfig& cfg) {
  if (cfg.reps < 1) throw ValidationError("reps must be >= 1");
  if (cfg.workers < 1) throw ValidationError("workers must be >= 1");
}

int dispatch(const ExperimentConfig& cfg, std::ostream& csv, std::ostream& err) {
  validate_common(cfg);
  Timer timer;
  Row row{&cfg};
  const std::string& exp = cfg.experiment;

  if (exp == "verify") {
    auto level = cfg.level == "full" ? verify::Level::kFull : verify::Level::kFast;
    if (cfg.level != "full" && cfg.level != "fast")
      throw ValidationError("verify level must be fast or full");
    std::vector<verify::CheckResult> checks =
        verify::run_checks(level, cfg.workers, cfg.seed);
    bool all = true;
    for (const auto& c : checks) {
      err << (c.pass ? "PASS " : "FAIL ") << c.id << "  value=" << c.value
          << " expected=" << c.expected << " tol=" << c.tolerance;
      if (!c.note.empty()) err << "  (" << c.note << ")";
      err << "\n";
      ExperimentConfig sub = cfg;
      sub.experiment = "verify:" + c.id;
      Row crow{&sub};
      crow.value = c.pass ? 1.0 : 0.0;
      crow.stderr_ = 0.0;
      crow.extra = c.to_json();
      crow.elapsed_ms = c.elapsed_ms;
      crow.write(csv);
      all = all && c.pass;
    }
    return all ? 0 : 1;
  }

  auto mu = cfg.make_offspring();
  auto theta = cfg.make_jump();

  if (exp == "infinite-range") {
    if (cfg.n < 1) throw ValidationError("n must be >= 1");
    auto rec = spine::estimate_infinite_range(mu, theta, cfg.n, cfg.reps,
                                              cfg.seed, cfg.workers);
    row.value = rec.value;
    row.stderr_ = rec.stderr_;
  } else if (exp == "no-return") {
    if (cfg.horizon < 1) throw ValidationError("horizon must be >= 1");
    auto rec = spine::estimate_no_return(mu, theta, cfg.horizon, cfg.reps,
                                         cfg.seed, cfg.workers);
    row.value = rec.value;
    row.stderr_ = rec.stderr_;
  } else if (exp == "constant-formula") {
    if (cfg.j_max < 0) throw ValidationError("j_max must be >= 0");
    std::int32_t radius = cfg.box_radius > 0 ? cfg.box_radius : 10;
    std::int64_t h_reps = cfg.h_reps > 0 ? cfg.h_reps : 200000;
    analytics::GreenTable green(theta, std::min<std::int32_t>(radius + 2, 24));
    spine::HTable h(mu, theta, radius, h_reps, cfg.seed + 1);
    h.attach_green(&green);
    auto a = spine::estimate_a(mu, theta, std::max<std::int64_t>(h_reps, 10000),
                               cfg.seed + 2, 100000000, cfg.workers);
    auto res = spine::estimate_c_formula(mu, theta, cfg.j_max, cfg.reps,
                                         cfg.seed, h, green, a.record.value,
                                         a.record.stderr_, cfg.workers);
    row.value = res.record.value;
    row.stderr_ = res.record.stderr_;
    std::ostringstream ex;
    ex << "{\"a\":" << fmt_double(res.a_estimate)
       << ",\"product\":" << fmt_double(res.product_mean)
       << ",\"tail_log\":" << fmt_double(res.truncation_remainder)
       << ",\"h_truncated\":" << h.truncated() << "}";
    row.extra = ex.str();
  } else if (exp == "conditioned-range") {
    if (cfg.n < 1) throw ValidationError("n must be >= 1");
    auto rec = spine::conditioned_range(mu, theta, cfg.n, cfg.reps, cfg.seed,
                                        cfg.workers);
    row.value = rec.value;
    row.stderr_ = rec.stderr_;
  } else if (exp == "snake-free") {
    if (cfg.n < 2) throw ValidationError("n must be >= 2");
    auto res = snake::free_range(theta, cfg.n, cfg.reps, cfg.seed, cfg.workers);
    row.value = res.record.value;
    row.stderr_ = res.record.stderr_;
    std::ostringstream ex;
    ex << "{\"second_moment\":" << fmt_double(res.second_moment)
       << ",\"variance\":" << fmt_double(res.variance) << "}";
    row.extra = ex.str();
  } else if (exp == "snake-excursion") {
    if (cfg.n < 1) throw ValidationError("n must be >= 1");
    const double scale = std::log(double(cfg.n)) / double(cfg.n);
    std::vector<double> vals =
        replicate<double>(cfg.reps, cfg.workers, [&](std::uint64_t rep) {
          RngStream rng(cfg.seed, rep, /*domain=*/25);
          return scale * double(snake::sample_excursion_range(cfg.n, theta, rng));
        });
    auto ms = stats::mean_stderr(vals);
    row.value = ms.mean;
    row.stderr_ = ms.stderr_;
  } else if (exp == "head-return-exact") {
    if (cfg.k < 0) throw ValidationError("k must be >= 0");
    double v = snake::head_return_exact(theta, cfg.k);
    row.value = v;
    std::ostringstream ex;
    ex << "{\"k_scaled\":" << fmt_double(double(cfg.k) * v) << "}";
    row.extra = ex.str();
  } else if (exp == "no-return-head") {
    if (cfg.n < 1) throw ValidationError("n must be >= 1");
    auto res = snake::estimate_no_return_head(theta, cfg.n, cfg.reps, cfg.seed,
                                              cfg.stop_p, cfg.workers);
    row.value = res.record.value;
    row.stderr_ = res.record.stderr_;
    std::ostringstream ex;
    ex << "{\"log_scaled\":" << fmt_double(res.log_scaled) << "}";
    row.extra = ex.str();
  } else if (exp == "green") {
    Point pt = Point::zero(theta.dim());
    if (static_cast<int>(cfg.x.size()) != theta.dim())
      throw ValidationError("green requires --x with dim coordinates");
    for (int i = 0; i < theta.dim(); ++i) pt.c[i] = cfg.x[i];
    auto g = analytics::green(theta, pt, cfg.eps);
    row.value = g.value;
    row.stderr_ = g.error_bound;
    std::ostringstream ex;
    ex << "{\"terms\":" << g.terms
       << ",\"scaled\":" << fmt_double(pt.norm2() * g.value) << "}";
    row.extra = ex.str();
  } else if (exp == "green-sum") {
    if (cfg.m < 2) throw ValidationError("m must be >= 2");
    std::int32_t radius = cfg.box_radius > 0 ? cfg.box_radius : 24;
    analytics::GreenTable table(theta, radius);
    auto res = analytics::green_sum_along_walk(theta, cfg.m, cfg.reps, cfg.seed,
                                               table, cfg.workers);
    row.value = res.record.value;
    row.stderr_ = res.record.stderr_;
    std::ostringstream ex;
    ex << "{\"frac_dev_0.1\":" << fmt_double(res.fraction_dev_01)
       << ",\"frac_dev_0.2\":" << fmt_double(res.fraction_dev_02)
       << ",\"second_moment\":" << fmt_double(res.second_moment) << "}";
    row.extra = ex.str();
  } else if (exp == "suffcond") {
    if (cfg.j_max < 2) throw ValidationError("j_max must be >= 2");
    std::int32_t radius = cfg.box_radius > 0 ? cfg.box_radius : 20;
    analytics::GreenTable table(theta, radius);
    std::int64_t j_lo = std::max<std::int64_t>(1, cfg.j_max / 10);
    auto res = analytics::suffcond_diagnostic(mu, theta, j_lo, cfg.j_max,
                                              cfg.reps, cfg.seed, table, {},
                                              cfg.workers);
    row.value = res.median_drift;
    row.stderr_ = res.record.stderr_;
    std::ostringstream ex;
    ex << "{\"mean_log_final\":" << fmt_double(res.mean_log_final)
       << ",\"j_lo\":" << j_lo << "}";
    row.extra = ex.str();
  } else if (exp == "bessel") {
    auto res = analytics::bessel_log_integral(cfg.r, cfg.t, cfg.dt, cfg.reps,
                                              cfg.seed, cfg.workers);
    row.value = res.record.value;
    row.stderr_ = res.record.stderr_;
    std::ostringstream ex;
    ex << "{\"expected\":" << fmt_double(res.expected) << ",\"marginals\":[";
    for (std::size_t i = 0; i < res.marginal_mean_2s_over_rho2.size(); ++i) {
      if (i) ex << ',';
      ex << fmt_double(res.marginal_mean_2s_over_rho2[i]);
    }
    ex << "]}";
    row.extra = ex.str();
  } else if (exp == "brw") {
    if (cfg.p < 1) throw ValidationError("p must be >= 1");
    auto res = brw::ratio_experiment(cfg.p, mu, theta, cfg.reps, cfg.seed,
                                     cfg.cap, /*track_range=*/true,
                                     cfg.workers);
    auto ms = stats::mean_stderr(res.r_over_n);
    row.value = ms.mean;
    row.stderr_ = ms.stderr_;
    std::ostringstream ex;
    ex << "{\"truncated\":" << res.truncated << "}";
    row.extra = ex.str();
    if (!cfg.out.empty()) {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) throw IoError("cannot open " + cfg.out);
      f << "replica,p,dim,R,N,generations,truncated\n";
      for (std::size_t i = 0; i < res.runs.size(); ++i) {
        const auto& r = res.runs[i];
        f << i << ',' << cfg.p << ',' << cfg.dim << ',' << r.range << ','
          << r.progeny << ',' << r.generations << ',' << (r.truncated ? 1 : 0)
          << '\n';
      }
    }
  } else {
    throw ConfigError("unknown experiment '" + exp + "'");
  }

  row.elapsed_ms = timer.ms();
  row.extra = warn_extra(cfg, std::move(row.extra));
  row.write(csv);
  return 0;
}

}  // namespace

int run(const ExperimentConfig& config, std::ostream& csv, std::ostream& err) {
  try {
    csv << kCsvHeader << '\n';
    return dispatch(config, csv, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "io error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace treerange::harness
