#include "gwi/cli.hpp"

#include <algorithm>
#include <boost/crc.hpp>
#include <complex>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "gwi/estimator.hpp"
#include "gwi/limitlaw.hpp"
#include "gwi/model.hpp"
#include "gwi/parallel.hpp"
#include "gwi/rng.hpp"
#include "gwi/tailproc.hpp"
#include "json.hpp"

#ifndef GWI_BUILD_ID
#define GWI_BUILD_ID "unknown"
#endif

namespace gwi::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Limit-sample draws are grouped in chunks; chunk k uses stream k.
constexpr std::size_t kLimitChunk = 1000;
// Stream index reserved for the empirical a_n reference run.
constexpr std::uint64_t kScalingStream = 0x5ca1eULL << 40;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  if (used != t.size()) throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec == std::errc() && ptr == t.data() + t.size() && !t.empty()) return v;
  // Accept integral floating forms such as 1e5.
  const double d = to_double(key, text);
  if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19)
    throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
  return static_cast<std::uint64_t>(d);
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

ModelParams make_model(const ExperimentConfig& cfg) {
  return ModelParams(dist::OffspringLaw(dist::parse_offspring_family(cfg.offspring), cfg.mu_a),
                     dist::ImmigrationLaw(cfg.alpha, cfg.c));
}

std::vector<double> grid(double lo, double hi, double step, const char* field) {
  if (!(step > 0.0) || !(hi >= lo)) throw ConfigError(field, "grid needs min <= max and step > 0");
  const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> g(count);
  for (std::size_t k = 0; k < count; ++k) g[k] = lo + static_cast<double>(k) * step;
  return g;
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Writes through a temporary so a failed run never leaves a half file under
// the final name.
class OutFile {
 public:
  OutFile(const fs::path& dir, std::string name, RunManifest& manifest)
      : path_(dir / name), name_(std::move(name)), manifest_(manifest) {
    stream_.open(path_.string() + ".tmp", std::ios::binary);
    if (!stream_) throw std::runtime_error("cannot open " + path_.string() + " for writing");
  }
  std::ofstream& operator*() { return stream_; }
  void close() {
    stream_.close();
    if (!stream_) throw std::runtime_error("write failed: " + path_.string());
    fs::rename(path_.string() + ".tmp", path_);
    manifest_.outputs.push_back({name_, fs::file_size(path_), file_crc32(path_)});
  }

 private:
  fs::path path_;
  std::string name_;
  RunManifest& manifest_;
  std::ofstream stream_;
};

void write_json(const fs::path& dir, const std::string& name, const json& j, RunManifest& m) {
  OutFile f(dir, name, m);
  *f << j.dump(2) << '\n';
  f.close();
}

json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json record(const std::string& statistic, double empirical, double analytic, double stderr_,
            double threshold) {
  json r;
  r["statistic"] = statistic;
  r["empirical"] = num(empirical);
  r["analytic"] = num(analytic);
  r["stderr"] = num(stderr_);
  r["pass_threshold"] = num(threshold);
  if (std::isfinite(threshold)) r["pass"] = std::abs(empirical - analytic) <= threshold;
  return r;
}

constexpr double kNone = std::numeric_limits<double>::quiet_NaN();

void add_streams(RunManifest& m, std::uint64_t seed, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) m.stream_seeds.emplace_back(i, stream_seed(seed, i));
}

// ---------------------------------------------------------------------------

void run_simulate(const ExperimentConfig& cfg, const ModelParams& model, RunManifest& m) {
  const Trajectory traj =
      simulate_stationary(model, cfg.n, cfg.seed, 0, parse_init_mode(cfg.init));
  add_streams(m, cfg.seed, 1);
  const fs::path dir = cfg.out;
  {
    OutFile f(dir, "trajectory.csv", m);
    *f << "i,x,m\n";
    *f << 0 << ',' << traj.x[0] << ",\n";
    for (std::size_t i = 1; i < traj.x.size(); ++i)
      *f << i << ',' << traj.x[i] << ',' << format_double(traj.residual(i)) << '\n';
    f.close();
  }
  json meta;
  meta["alpha"] = cfg.alpha;
  meta["mu_a"] = cfg.mu_a;
  meta["sigma_a2"] = model.sigma_a2();
  meta["c"] = cfg.c;
  meta["mu_b"] = model.mu_b();
  meta["theta"] = model.theta();
  meta["offspring"] = cfg.offspring;
  meta["n"] = cfg.n;
  meta["seed"] = cfg.seed;
  meta["stream_seed"] = traj.seed;
  meta["init"] = std::string(to_string(traj.init));
  write_json(dir, "trajectory.meta.json", meta, m);
}

double resolve_a_n(const ExperimentConfig& cfg, const ModelParams& model, std::size_t n,
                   RunManifest& m) {
  const ScalingMode mode = parse_scaling_mode(cfg.a_n_mode);
  if (mode == ScalingMode::analytic) return scaling(model, n, mode).a_n;
  // Reference path of 10 n + 1 stationary draws on a dedicated stream.
  const Trajectory ref = simulate_stationary(model, 10 * n, cfg.seed, kScalingStream);
  m.stream_seeds.emplace_back(kScalingStream, stream_seed(cfg.seed, kScalingStream));
  return scaling(model, n, mode, std::span<const std::int64_t>(ref.x)).a_n;
}

void run_estimate(const ExperimentConfig& cfg, const ModelParams& model, unsigned workers,
                  RunManifest& m) {
  if (cfg.n < 2) throw ConfigError("n", "estimate needs n >= 2");
  const double a_n = resolve_a_n(cfg, model, cfg.n, m);
  const InitMode init = parse_init_mode(cfg.init);

  struct Row {
    bool overflow = false;
    est::ClsResult cls;
    est::PartialSumPair v;
    double scaled = kNone;
  };
  std::vector<Row> rows(cfg.reps);
  parallel_for(cfg.reps, workers, [&](std::size_t rep) {
    Row& row = rows[rep];
    try {
      // Horizon n + 1 supplies M_{n+1} for the v2 partial sum.
      const Trajectory traj = simulate_stationary(model, cfg.n + 1, cfg.seed, rep, init);
      row.cls = est::cls_estimate(std::span(traj.x.data(), cfg.n + 1), model.mu_b());
      row.v = est::partial_sums(traj, a_n);
      if (row.cls.defined) row.scaled = est::scaled_error(row.cls, model.mu_a(), a_n);
    } catch (const TailOverflow&) {
      row.overflow = true;
    }
  });
  add_streams(m, cfg.seed, cfg.reps);

  OutFile f(cfg.out, "replications.csv", m);
  *f << "rep,n,a_n,mu_hat,defined,v1,v2,scaled_error\n";
  std::size_t undefined = 0;
  for (std::size_t rep = 0; rep < rows.size(); ++rep) {
    const Row& r = rows[rep];
    *f << rep << ',' << cfg.n << ',' << format_double(a_n) << ',';
    if (r.overflow) {
      *f << "nan,0,nan,nan,nan\n";
      m.notes.push_back("rep " + std::to_string(rep) + ": tail overflow");
      continue;
    }
    if (!r.cls.defined) ++undefined;
    *f << (r.cls.defined ? format_double(r.cls.mu_hat) : "nan") << ',' << (r.cls.defined ? 1 : 0)
       << ',' << format_double(r.v.v1) << ',' << format_double(r.v.v2) << ','
       << format_double(r.scaled) << '\n';
  }
  f.close();
  if (undefined) m.notes.push_back(std::to_string(undefined) + " replications with undefined CLS");
}

double resolve_eps(const ExperimentConfig& cfg, const limit::LimitParams& lp, limit::Remainder mode) {
  if (cfg.eps > 0.0) return cfg.eps;
  return limit::eps_for_bound(lp, cfg.eps_target, mode);
}

void run_limit_sample(const ExperimentConfig& cfg, const ModelParams& model, unsigned workers,
                      RunManifest& m) {
  const limit::LimitParams lp(model);
  const limit::Remainder mode = limit::parse_remainder(cfg.remainder);
  const double eps = resolve_eps(cfg, lp, mode);
  const std::size_t chunks = (cfg.samples + kLimitChunk - 1) / kLimitChunk;
  std::vector<limit::LimitPair> pairs(cfg.samples);
  parallel_for(chunks, workers, [&](std::size_t k) {
    Rng rng = make_stream(cfg.seed, k);
    const std::size_t end = std::min(cfg.samples, (k + 1) * kLimitChunk);
    for (std::size_t i = k * kLimitChunk; i < end; ++i)
      pairs[i] = limit::sample_limit_pair(lp, eps, rng, mode);
  });
  add_streams(m, cfg.seed, chunks);
  m.notes.push_back("eps " + format_double(eps) + ", remainder " + cfg.remainder +
                    ", v1 mean bound " + format_double(limit::trunc_v1_mean_bound(lp, eps)) +
                    ", v2 sd bound " + format_double(limit::trunc_v2_sd_bound(lp, eps)));

  OutFile f(cfg.out, "limit_samples.csv", m);
  *f << "v1,v2,terms_used\n";
  for (const auto& p : pairs)
    *f << format_double(p.v1) << ',' << format_double(p.v2) << ',' << p.terms_used << '\n';
  f.close();
  OutFile r(cfg.out, "ratio.csv", m);
  *r << "ratio\n";
  for (const auto& p : pairs) *r << (p.v1 > 0.0 ? format_double(p.v2 / p.v1) : "nan") << '\n';
  r.close();
}

void run_cdf_table(const ExperimentConfig& cfg, const ModelParams& model, unsigned workers,
                   RunManifest& m) {
  const limit::LimitParams lp(model);
  const auto xs = grid(cfg.x_min, cfg.x_max, cfg.x_step, "x_step");
  std::vector<double> f(xs.size());
  parallel_for(xs.size(), workers, [&](std::size_t k) { f[k] = limit::cdf_ratio(lp, xs[k]); });
  OutFile out(cfg.out, "cdf.csv", m);
  *out << "x,cdf\n";
  for (std::size_t k = 0; k < xs.size(); ++k)
    *out << format_double(xs[k]) << ',' << format_double(f[k]) << '\n';
  out.close();
}

void run_cf_table(const ExperimentConfig& cfg, const ModelParams& model, unsigned workers,
                  RunManifest& m) {
  const limit::LimitParams lp(model);
  const auto ss = grid(cfg.s_min, cfg.s_max, cfg.s_step, "s_step");
  const auto ts = grid(cfg.t_min, cfg.t_max, cfg.t_step, "t_step");
  std::vector<std::complex<double>> phi(ss.size() * ts.size());
  parallel_for(phi.size(), workers, [&](std::size_t k) {
    phi[k] = limit::cf_joint(lp, ss[k / ts.size()], ts[k % ts.size()]);
  });
  OutFile out(cfg.out, "cf.csv", m);
  *out << "s,t,re,im\n";
  for (std::size_t k = 0; k < phi.size(); ++k)
    *out << format_double(ss[k / ts.size()]) << ',' << format_double(ts[k % ts.size()]) << ','
         << format_double(phi[k].real()) << ',' << format_double(phi[k].imag()) << '\n';
  out.close();
}

void run_tail_validate(const ExperimentConfig& cfg, const ModelParams& model, RunManifest& m) {
  tail::PseudoTailConfig tc;
  tc.steps = cfg.steps;
  tc.quantile = cfg.quantile;
  tc.m = cfg.window;
  tc.seed = cfg.seed;
  tc.keep_samples = true;
  const auto rep = tail::validate_pseudo_tail(model, tc);
  add_streams(m, cfg.seed, 1);

  const double mu = model.mu_a(), alpha = model.alpha();
  const double exceed = static_cast<double>(rep.events) / static_cast<double>(cfg.steps);
  json report;
  report["threshold"] = rep.threshold;
  report["events"] = rep.events;
  json recs = json::array();
  recs.push_back(record("tail_equivalence", std::pow(rep.threshold, alpha) * exceed * model.theta() / model.c(),
                        1.0, kNone, 0.15));
  recs.push_back(record("ks_w0_normal", rep.ks_w0, 0.0, kNone, 0.05));
  recs.push_back(record("mean_x1_over_x0", rep.ratio_mean, mu, rep.ratio_stderr, 0.02));
  recs.push_back(record("ks_x0_pareto", rep.ks_pareto, 0.0, kNone, kNone));
  recs.push_back(record("backward_exceedance", rep.backward_exceedance, std::pow(mu, alpha), kNone, kNone));
  for (std::size_t i = 0; i < rep.lag_ratio_means.size(); ++i)
    recs.push_back(record("mean_x" + std::to_string(i + 1) + "_over_x0", rep.lag_ratio_means[i],
                          std::pow(mu, static_cast<double>(i + 1)), kNone, kNone));
  for (const auto& [r, count] : rep.cluster_counts) {
    double expected = 0.0;
    for (int j = 1; j <= r; ++j) expected += 2.0 * std::pow(mu, alpha * j);
    recs.push_back(record("cluster_count_r" + std::to_string(r), count, expected, kNone, kNone));
  }
  report["records"] = recs;
  write_json(cfg.out, "tail_report.json", report, m);

  OutFile f(cfg.out, "tail_samples.csv", m);
  for (int i = -cfg.window; i <= cfg.window; ++i) *f << (i == -cfg.window ? "" : ",") << "x_" << i;
  for (int i = 0; i <= cfg.window; ++i) *f << ",w_" << i;
  *f << '\n';
  for (const auto& s : rep.samples) {
    for (std::size_t k = 0; k < s.x_scaled.size(); ++k) *f << (k ? "," : "") << format_double(s.x_scaled[k]);
    for (double w : s.w) *f << ',' << format_double(w);
    *f << '\n';
  }
  f.close();
}

void run_laplace_validate(const ExperimentConfig& cfg, const ModelParams& model, unsigned workers,
                          RunManifest& m) {
  tail::LaplaceConfig lc;
  lc.eps = cfg.laplace_eps;
  lc.s_values = cfg.s_values;
  lc.n = cfg.n;
  lc.reps = cfg.reps;
  lc.bootstrap = cfg.bootstrap;
  lc.seed = cfg.seed;
  lc.workers = workers;
  if (parse_scaling_mode(cfg.a_n_mode) == ScalingMode::empirical_quantile)
    lc.a_n = resolve_a_n(cfg, model, cfg.n, m);
  const auto rep = tail::laplace_functional_gap(model, lc);
  add_streams(m, cfg.seed, cfg.reps);

  json report;
  report["a_n"] = rep.a_n;
  report["eps"] = cfg.laplace_eps;
  json recs = json::array();
  for (const auto& line : rep.lines)
    recs.push_back(record("laplace_s=" + format_double(line.s), line.empirical, line.analytic,
                          line.stderr_boot, 3.0 * line.stderr_boot + 0.02));
  report["records"] = recs;
  write_json(cfg.out, "laplace_report.json", report, m);

  OutFile f(cfg.out, "laplace_counts.csv", m);
  *f << "rep,count\n";
  for (std::size_t r = 0; r < rep.counts.size(); ++r) *f << r << ',' << rep.counts[r] << '\n';
  f.close();
}

// Truncated moments of the exact Pareto law P(X > x) = x^-alpha on [1, inf).
double pareto_lower_moment(double alpha, double beta, double x) {
  return alpha * (std::pow(x, beta - alpha) - 1.0) / (beta - alpha);
}
double pareto_upper_moment(double alpha, double beta, double x) {
  return alpha * std::pow(x, beta - alpha) / (alpha - beta);
}

void run_karamata(const ExperimentConfig& cfg, const ModelParams& model, RunManifest& m) {
  const double alpha = model.alpha();
  const double x = cfg.karamata_x;
  const dist::ImmigrationLaw& imm = model.immigration();
  json recs = json::array();

  const auto form = [&](double beta) {
    return beta >= alpha ? dist::KaramataForm::lower : dist::KaramataForm::upper;
  };
  const auto survival = [&](double y) { return std::pow(y, -alpha); };
  const double beta = cfg.beta;
  const auto f = form(beta);
  const double limit = dist::karamata_limit(beta, alpha, f);
  const double pareto = dist::karamata_ratio(
      beta, alpha, x, survival,
      [&](double y) {
        return f == dist::KaramataForm::lower ? pareto_lower_moment(alpha, beta, y)
                                              : pareto_upper_moment(alpha, beta, y);
      },
      f);
  recs.push_back(record("pareto_ratio", pareto, limit, kNone, 0.01 * std::abs(limit)));

  // The immigration law itself: P(B > x) = c (floor x + 1)^-alpha and the
  // truncated moment summed exactly over the atoms k <= x (lower form only,
  // the upper moment is an infinite series).
  if (f == dist::KaramataForm::lower) {
    const auto k_max = static_cast<std::int64_t>(std::floor(x));
    const double immig = dist::karamata_ratio(
        beta, alpha, x, [&](double y) { return imm.survival_at_least(static_cast<std::int64_t>(std::floor(y)) + 1); },
        [&](double) {
          est::CompensatedSum s;
          for (std::int64_t k = 1; k <= k_max; ++k)
            s.add(std::pow(static_cast<double>(k), beta) *
                  (imm.survival_at_least(k) - imm.survival_at_least(k + 1)));
          return s.value();
        },
        f);
    recs.push_back(record("immigration_ratio", immig, limit, kNone, kNone));
  }

  // Stationary path at its own high quantile.
  const Trajectory traj = simulate_stationary(model, cfg.n, cfg.seed, 0);
  add_streams(m, cfg.seed, 1);
  std::vector<double> xs(traj.x.begin(), traj.x.end());
  std::sort(xs.begin(), xs.end());
  const double level = xs[static_cast<std::size_t>(cfg.quantile * static_cast<double>(xs.size() - 1))];
  double tail_count = 0.0, lower = 0.0, upper = 0.0;
  for (double v : xs) {
    if (v > level) {
      tail_count += 1.0;
      upper += std::pow(v, beta);
    } else {
      lower += std::pow(v, beta);
    }
  }
  const double denom = f == dist::KaramataForm::lower ? lower : upper;
  const double emp = denom > 0.0 ? std::pow(level, beta) * tail_count / denom : kNone;
  recs.push_back(record("stationary_path_ratio", emp, limit, kNone, kNone));

  json report;
  report["alpha"] = alpha;
  report["beta"] = beta;
  report["form"] = f == dist::KaramataForm::lower ? "lower" : "upper";
  report["x"] = x;
  report["path_level"] = level;
  report["records"] = recs;
  write_json(cfg.out, "karamata_report.json", report, m);
}

void write_manifest(const ExperimentConfig& cfg, const RunManifest& m) {
  json j;
  j["config"] = json(m.config);
  j["build_id"] = m.build_id;
  j["started_at"] = m.started_at;
  j["wall_seconds"] = m.wall_seconds;
  j["workers"] = m.workers;
  j["seed_rule"] = m.seed_rule;
  json seeds = json::array();
  for (const auto& [index, seed] : m.stream_seeds) seeds.push_back({{"stream", index}, {"seed", seed}});
  j["streams"] = seeds;
  json outs = json::array();
  for (const auto& o : m.outputs) {
    char crc[9];
    std::snprintf(crc, sizeof crc, "%08x", o.crc32);
    outs.push_back({{"file", o.name}, {"bytes", o.bytes}, {"crc32", crc}});
  }
  j["outputs"] = outs;
  j["notes"] = m.notes;
  const fs::path path = fs::path(cfg.out) / "manifest.json";
  std::ofstream f(path, std::ios::binary);
  f << j.dump(2) << '\n';
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number), "expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_config_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("config", "cannot read " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  const std::string head = trim(text);
  if (!head.empty() && head.front() == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    const json& cfg = j.contains("config") ? j["config"] : j;
    KeyValues kv;
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
      kv[it.key()] = it->is_string() ? it->get<std::string>() : it->dump();
    return kv;
  }
  return parse_key_values(text);
}

ExperimentConfig parse_config(const KeyValues& kv) {
  ExperimentConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "experiment") c.experiment = value;
    else if (key == "alpha") c.alpha = to_double(key, value);
    else if (key == "mu_a") c.mu_a = to_double(key, value);
    else if (key == "c") c.c = to_double(key, value);
    else if (key == "offspring") c.offspring = value;
    else if (key == "n") c.n = to_uint(key, value);
    else if (key == "reps") c.reps = to_uint(key, value);
    else if (key == "seed") c.seed = to_uint(key, value);
    else if (key == "a_n_mode") c.a_n_mode = value;
    else if (key == "init") c.init = value;
    else if (key == "samples") c.samples = to_uint(key, value);
    else if (key == "eps") c.eps = to_double(key, value);
    else if (key == "eps_target") c.eps_target = to_double(key, value);
    else if (key == "remainder") c.remainder = value;
    else if (key == "x_min") c.x_min = to_double(key, value);
    else if (key == "x_max") c.x_max = to_double(key, value);
    else if (key == "x_step") c.x_step = to_double(key, value);
    else if (key == "s_min") c.s_min = to_double(key, value);
    else if (key == "s_max") c.s_max = to_double(key, value);
    else if (key == "s_step") c.s_step = to_double(key, value);
    else if (key == "t_min") c.t_min = to_double(key, value);
    else if (key == "t_max") c.t_max = to_double(key, value);
    else if (key == "t_step") c.t_step = to_double(key, value);
    else if (key == "steps") c.steps = to_uint(key, value);
    else if (key == "quantile") c.quantile = to_double(key, value);
    else if (key == "window") c.window = static_cast<int>(to_uint(key, value));
    else if (key == "laplace_eps") c.laplace_eps = to_double(key, value);
    else if (key == "s_values") c.s_values = to_list(key, value);
    else if (key == "bootstrap") c.bootstrap = to_uint(key, value);
    else if (key == "beta") c.beta = to_double(key, value);
    else if (key == "karamata_x") c.karamata_x = to_double(key, value);
    else if (key == "out") c.out = value;
    else throw ConfigError(key, "unknown key");
  }

  if (std::find(experiments().begin(), experiments().end(), c.experiment) == experiments().end())
    throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");
  // Range checks belong to the module constructors; only the field is attached here.
  try {
    dist::OffspringLaw(dist::parse_offspring_family(c.offspring), 0.5);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("offspring", e.what());
  }
  try {
    dist::OffspringLaw(dist::OffspringFamily::poisson, c.mu_a);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("mu_a", e.what());
  }
  if (!(c.alpha > 1.0 && c.alpha < 2.0)) {
    try {
      limit::LimitParams(c.alpha, 0.5, 1.0);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("alpha", e.what());
    }
  }
  if (!(c.c > 0.0 && c.c < 1.0)) throw ConfigError("c", "immigration: c must lie in (0, 1)");
  try {
    parse_scaling_mode(c.a_n_mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("a_n_mode", e.what());
  }
  try {
    parse_init_mode(c.init);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("init", e.what());
  }
  try {
    limit::parse_remainder(c.remainder);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("remainder", e.what());
  }
  if (c.n < 1) throw ConfigError("n", "must be positive");
  if (c.reps < 1) throw ConfigError("reps", "must be positive");
  if (c.samples < 1) throw ConfigError("samples", "must be positive");
  if (c.eps < 0.0) throw ConfigError("eps", "must be non-negative (0 selects eps_target)");
  if (!(c.eps_target > 0.0)) throw ConfigError("eps_target", "must be positive");
  if (!(c.quantile > 0.0 && c.quantile < 1.0)) throw ConfigError("quantile", "must lie in (0, 1)");
  if (!(c.karamata_x > 1.0)) throw ConfigError("karamata_x", "must exceed 1");
  if (c.out.empty()) throw ConfigError("out", "empty output directory");
  return c;
}

KeyValues to_key_values(const ExperimentConfig& c) {
  return {
      {"experiment", c.experiment},
      {"alpha", format_double(c.alpha)},
      {"mu_a", format_double(c.mu_a)},
      {"c", format_double(c.c)},
      {"offspring", c.offspring},
      {"n", std::to_string(c.n)},
      {"reps", std::to_string(c.reps)},
      {"seed", std::to_string(c.seed)},
      {"a_n_mode", c.a_n_mode},
      {"init", c.init},
      {"samples", std::to_string(c.samples)},
      {"eps", format_double(c.eps)},
      {"eps_target", format_double(c.eps_target)},
      {"remainder", c.remainder},
      {"x_min", format_double(c.x_min)},
      {"x_max", format_double(c.x_max)},
      {"x_step", format_double(c.x_step)},
      {"s_min", format_double(c.s_min)},
      {"s_max", format_double(c.s_max)},
      {"s_step", format_double(c.s_step)},
      {"t_min", format_double(c.t_min)},
      {"t_max", format_double(c.t_max)},
      {"t_step", format_double(c.t_step)},
      {"steps", std::to_string(c.steps)},
      {"quantile", format_double(c.quantile)},
      {"window", std::to_string(c.window)},
      {"laplace_eps", format_double(c.laplace_eps)},
      {"s_values", join(c.s_values)},
      {"bootstrap", std::to_string(c.bootstrap)},
      {"beta", format_double(c.beta)},
      {"karamata_x", format_double(c.karamata_x)},
      {"out", c.out},
  };
}

std::uint32_t file_crc32(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  boost::crc_32_type crc;
  char buf[1 << 16];
  while (f) {
    f.read(buf, sizeof buf);
    crc.process_bytes(buf, static_cast<std::size_t>(f.gcount()));
  }
  return crc.checksum();
}

RunManifest run(const ExperimentConfig& config, unsigned workers) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest m;
  m.config = to_key_values(config);
  m.build_id = GWI_BUILD_ID;
  m.started_at = timestamp_utc();
  m.workers = std::max(1u, workers);
  m.seed_rule = "stream i uses mt19937_64 seeded with splitmix64(splitmix64(seed) ^ splitmix64(i + golden))";

  const ModelParams model = make_model(config);
  fs::create_directories(config.out);
  const std::string& e = config.experiment;
  if (e == "simulate") run_simulate(config, model, m);
  else if (e == "estimate") run_estimate(config, model, m.workers, m);
  else if (e == "limit-sample") run_limit_sample(config, model, m.workers, m);
  else if (e == "cdf-table") run_cdf_table(config, model, m.workers, m);
  else if (e == "cf-table") run_cf_table(config, model, m.workers, m);
  else if (e == "tail-validate") run_tail_validate(config, model, m);
  else if (e == "laplace-validate") run_laplace_validate(config, model, m.workers, m);
  else if (e == "karamata") run_karamata(config, model, m);
  else throw ConfigError("experiment", "unknown experiment '" + e + "'");

  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(config, m);
  return m;
}

std::vector<double> read_csv_column(const fs::path& path, const std::string& column) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error(path.string() + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string h;
    while (std::getline(ss, h, ',')) header.push_back(trim(h));
  }
  std::size_t col = 0;
  if (column.empty()) {
    if (header.size() != 1)
      throw std::runtime_error(path.string() + ": several columns, name one with --column");
  } else {
    const auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) throw std::runtime_error(path.string() + ": no column '" + column + "'");
    col = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<double> out;
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t k = 0; k <= col && std::getline(ss, cell, ','); ++k) {}
    const std::string t = trim(cell);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
      throw std::runtime_error(path.string() + ": non-numeric value '" + t + "'");
    // Undefined replications are written as nan; they carry no sample value.
    if (std::isfinite(v)) out.push_back(v);
  }
  return out;
}

CompareReport compare(const fs::path& a, const fs::path& b, const std::string& column_a,
                      const std::string& column_b) {
  const auto xa = read_csv_column(a, column_a);
  const auto xb = read_csv_column(b, column_b);
  if (xa.size() < 500 || xb.size() < 500)
    throw std::invalid_argument("compare: each sample needs at least 500 rows (got " +
                                std::to_string(xa.size()) + " and " + std::to_string(xb.size()) + ")");
  return {stats::ks_two_sample(xa, xb), xa.size(), xb.size()};
}

}  // namespace gwi::cli
