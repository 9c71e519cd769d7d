#include "sphqmc/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "sphqmc/metrics.hpp"
#include "sphqmc/parallel.hpp"
#include "sphqmc/spectral.hpp"

namespace sphqmc {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / pp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

double legendre_p(int l, double u) {
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = u;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * u * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double zonal_statistic(const Configuration& c, int l) {
  const double scale = std::sqrt(2.0 * l + 1.0);
  double y = 0.0;
  for (const auto& p : c.points) y += scale * legendre_p(l, p.z);
  return y;  // Int f dsigma = 0 for l >= 1
}

double evaluate_metric(const Configuration& c, const MetricSpec& spec,
                       std::uint64_t seed, std::uint64_t stream_id,
                       double* tail_out) {
  *tail_out = 0.0;
  if (spec.metric == "wce") {
    WceOptions opts;
    opts.tol = spec.tol;
    opts.threads = 1;
    opts.bernstein_tail = spec.s < 2.0;
    const WceResult r = wce_legendre(c, SmoothnessParam(spec.s), opts);
    *tail_out = r.tail_bound;
    return r.value;
  }
  if (spec.metric == "gt") {
    const HeatKernelEval r = g_of_t(c, spec.s, spec.tol);
    *tail_out = r.tail_bound;
    return r.value;
  }
  if (spec.metric == "capL2") {
    const std::size_t caps =
        spec.param > 0 ? static_cast<std::size_t>(spec.param) : 4096;
    RngStream rng(seed ^ 0x5CA1AB1EULL, stream_id);
    const CapL2Result r = cap_discrepancy_l2(c, caps, rng);
    *tail_out = r.std_error;
    return r.estimate;
  }
  if (spec.metric == "capLinf") {
    if (c.n() <= 300 && spec.param == 0.0) {
      return cap_discrepancy_linf(c, CapLinfMode::exact_small_n, nullptr, 1);
    }
    RngStream rng(seed ^ 0xD15C0B01ULL, stream_id);
    return cap_discrepancy_linf(c, CapLinfMode::randomized, &rng, 1);
  }
  if (spec.metric == "gensum") {
    return generalized_sum(c, SmoothnessParam(spec.s));
  }
  if (spec.metric == "energy") {
    return log_energy(c);
  }
  throw std::invalid_argument("unknown metric: " + spec.metric);
}

void format_record(const ReplicaRecord& r, std::string& out) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%zu,%llu,%s,%.17g,%.17g,%.17g,%.6f\n",
                r.kind.c_str(), r.n,
                static_cast<unsigned long long>(r.stream_id),
                r.metric.c_str(), r.s, r.value, r.tail_bound, r.seconds);
  out = buf;
}

}  // namespace

void ExperimentPlan::validate() const {
  if (version != 1) throw std::invalid_argument("plan: unsupported version");
  if (n_values.empty()) throw std::invalid_argument("plan: n_values empty");
  for (std::size_t n : n_values) {
    if (n < 1) throw std::invalid_argument("plan: n must be >= 1");
  }
  if (replicas < 1) throw std::invalid_argument("plan: replicas must be >= 1");
  if (metrics.empty()) throw std::invalid_argument("plan: metrics empty");
  for (const auto& m : metrics) {
    if (m.metric == "wce" || m.metric == "gensum") {
      if (!(m.s > 1.0)) {
        throw std::invalid_argument("plan: metric " + m.metric +
                                    " requires s > 1");
      }
    }
    if (m.metric == "wce" && !(m.tol > 0.0)) {
      throw std::invalid_argument("plan: wce requires tol > 0");
    }
  }
}

ExperimentPlan ExperimentPlan::from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ExperimentPlan p;
  p.version = j.value("version", 1);
  const auto& sampler = j.at("sampler");
  p.kind = sampler_kind_from_string(sampler.at("kind").get<std::string>());
  p.n_values = sampler.at("n_values").get<std::vector<std::size_t>>();
  p.replicas = j.at("replicas").get<std::size_t>();
  p.seed = j.value("seed", 0ULL);
  for (const auto& m : j.at("metrics")) {
    MetricSpec spec;
    spec.metric = m.at("metric").get<std::string>();
    spec.s = m.value("s", 2.0);
    spec.tol = m.value("tol", 1e-8);
    spec.param = m.value("param", 0.0);
    p.metrics.push_back(spec);
  }
  p.output_dir = j.value("output_dir", std::string());
  p.threads = j.value("threads", 0U);
  p.validate();
  return p;
}

ExperimentPlan ExperimentPlan::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open plan: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentPlan::to_json_text() const {
  nlohmann::json j;
  j["version"] = version;
  j["sampler"]["kind"] = to_string(kind);
  j["sampler"]["n_values"] = n_values;
  j["replicas"] = replicas;
  j["seed"] = seed;
  j["metrics"] = nlohmann::json::array();
  for (const auto& m : metrics) {
    j["metrics"].push_back({{"metric", m.metric},
                            {"s", m.s},
                            {"tol", m.tol},
                            {"param", m.param}});
  }
  j["output_dir"] = output_dir;
  j["threads"] = threads;
  return j.dump(2);
}

std::vector<ReplicaRecord> run_batch(const ExperimentPlan& plan) {
  plan.validate();
  const std::size_t n_cells = plan.n_values.size() * plan.replicas;
  const std::size_t n_metrics = plan.metrics.size();
  std::vector<ReplicaRecord> records(n_cells * n_metrics);
  std::vector<std::string> errors(n_cells);

  // In-order incremental writer: a cell's records are appended (and flushed)
  // once every earlier cell has finished, so the file contents are
  // independent of scheduling.
  std::mutex writer_mutex;
  std::vector<bool> done(n_cells, false);
  std::size_t write_next = 0;
  std::ofstream out;
  if (!plan.output_dir.empty()) {
    const std::string path = plan.output_dir + "/results.csv";
    out.open(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "kind,n,stream_id,metric,s,value,tail_bound,seconds\n";
    out.flush();
  }

  parallel_jobs(n_cells, plan.threads, [&](std::size_t cell) {
    const std::size_t n_idx = cell / plan.replicas;
    const std::size_t n = plan.n_values[n_idx];
    SamplerSpec spec{plan.kind, n, plan.seed, cell};
    const double t0 = now_seconds();
    try {
      const Configuration c = sample(spec);
      for (std::size_t mi = 0; mi < n_metrics; ++mi) {
        ReplicaRecord& r = records[cell * n_metrics + mi];
        r.kind = to_string(plan.kind);
        r.n = n;
        r.stream_id = cell;
        r.metric = plan.metrics[mi].metric;
        r.s = plan.metrics[mi].s;
        double tail = 0.0;
        const double t1 = now_seconds();
        r.value = evaluate_metric(c, plan.metrics[mi], plan.seed, cell, &tail);
        r.tail_bound = tail;
        r.seconds = now_seconds() - t1;
      }
    } catch (const std::exception& e) {
      for (std::size_t mi = 0; mi < n_metrics; ++mi) {
        ReplicaRecord& r = records[cell * n_metrics + mi];
        r.kind = to_string(plan.kind);
        r.n = n;
        r.stream_id = cell;
        r.metric = "error:" + plan.metrics[mi].metric;
        r.s = plan.metrics[mi].s;
        r.value = std::nan("");
        r.tail_bound = std::nan("");
        r.seconds = now_seconds() - t0;
      }
      errors[cell] = e.what();
    }
    if (out.is_open()) {
      std::lock_guard<std::mutex> lock(writer_mutex);
      done[cell] = true;
      while (write_next < n_cells && done[write_next]) {
        std::string line;
        for (std::size_t mi = 0; mi < n_metrics; ++mi) {
          format_record(records[write_next * n_metrics + mi], line);
          out << line;
        }
        out.flush();
        ++write_next;
      }
    }
  });
  return records;
}

void persist(const std::vector<ReplicaRecord>& records, std::ostream& os) {
  os << "kind,n,stream_id,metric,s,value,tail_bound,seconds\n";
  std::string line;
  for (const auto& r : records) {
    format_record(r, line);
    os << line;
  }
}

void persist_file(const std::vector<ReplicaRecord>& records,
                  const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  persist(records, f);
}

std::vector<ReplicaRecord> load_records(std::istream& is) {
  std::vector<ReplicaRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("kind,", 0) == 0) continue;  // header (possibly repeated)
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      const std::size_t next = line.find(',', pos);
      f.push_back(line.substr(pos, next == std::string::npos
                                       ? std::string::npos
                                       : next - pos));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (f.size() != 8) {
      throw std::runtime_error("records CSV: expected 8 fields at line " +
                               std::to_string(lineno));
    }
    try {
      ReplicaRecord r;
      r.kind = f[0];
      r.n = std::stoull(f[1]);
      r.stream_id = std::stoull(f[2]);
      r.metric = f[3];
      r.s = std::stod(f[4]);
      r.value = std::stod(f[5]);
      r.tail_bound = std::stod(f[6]);
      r.seconds = std::stod(f[7]);
      out.push_back(std::move(r));
    } catch (const std::exception&) {
      throw std::runtime_error("records CSV: parse failure at line " +
                               std::to_string(lineno));
    }
  }
  return out;
}

std::vector<ReplicaRecord> load_records_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return load_records(f);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty");
  std::sort(values.begin(), values.end());
  const double rank = std::ceil(q * static_cast<double>(values.size()));
  const std::size_t idx = static_cast<std::size_t>(
      std::clamp(rank - 1.0, 0.0, static_cast<double>(values.size() - 1)));
  return values[idx];
}

std::vector<CellSummary> summarize(const std::vector<ReplicaRecord>& records) {
  std::map<std::tuple<std::string, std::size_t, std::string, double>,
           std::vector<double>>
      groups;
  for (const auto& r : records) {
    groups[{r.kind, r.n, r.metric, r.s}].push_back(r.value);
  }
  std::vector<CellSummary> out;
  for (auto& [key, vals] : groups) {
    CellSummary s;
    s.kind = std::get<0>(key);
    s.n = std::get<1>(key);
    s.metric = std::get<2>(key);
    s.s = std::get<3>(key);
    s.count = vals.size();
    double sum = 0.0;
    for (double v : vals) sum += v;
    s.mean = sum / static_cast<double>(vals.size());
    double ss = 0.0;
    for (double v : vals) ss += (v - s.mean) * (v - s.mean);
    s.se = vals.size() > 1
               ? std::sqrt(ss / (static_cast<double>(vals.size() - 1) *
                                 static_cast<double>(vals.size())))
               : 0.0;
    s.q50 = quantile(vals, 0.5);
    s.q90 = quantile(vals, 0.9);
    s.q99 = quantile(vals, 0.99);
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_table(const std::vector<CellSummary>& cells) {
  std::ostringstream os;
  os << "kind               n      metric     s      count  mean          "
        "se            q50           q90           q99\n";
  char buf[256];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof(buf),
                  "%-18s %-6zu %-10s %-6.3g %-6zu %-13.6g %-13.6g %-13.6g "
                  "%-13.6g %-13.6g\n",
                  c.kind.c_str(), c.n, c.metric.c_str(), c.s, c.count, c.mean,
                  c.se, c.q50, c.q90, c.q99);
    os << buf;
  }
  return os.str();
}

std::string render_tsv(const std::vector<CellSummary>& cells, double eta) {
  std::ostringstream os;
  os << "n\tmedian\tbound_eta" << eta << "\n";
  char buf[128];
  for (const auto& c : cells) {
    if (c.metric != "wce") continue;
    double bound = std::nan("");
    if (c.n >= 3) {
      const double log_n = std::log(static_cast<double>(c.n));
      if (eta > 2.0 / log_n && (1.0 + eta) / (2.0 * kFourPi) >= 1.0 / log_n) {
        bound = std::exp(1.0) * std::sqrt((1.0 + eta) / (2.0 * kFourPi)) *
                std::sqrt(log_n) / static_cast<double>(c.n);
      }
    }
    std::snprintf(buf, sizeof(buf), "%zu\t%.10g\t%.10g\n", c.n, c.q50, bound);
    os << buf;
  }
  return os.str();
}

CltReport clt_variance_test(SamplerKind kind, std::size_t n,
                            std::size_t replicas, std::uint64_t seed,
                            unsigned threads, int zonal_l) {
  if (replicas < 1000) {
    throw std::invalid_argument("clt_variance_test: needs >= 1000 replicas");
  }
  if (zonal_l < 1) throw std::invalid_argument("clt_variance_test: l >= 1");

  // f = z when l = 1, the normalized zonal harmonic sqrt(2l+1) P_l(z)
  // otherwise; both are mean-zero against dsigma.
  std::vector<double> ys(replicas);
  parallel_jobs(replicas, threads, [&](std::size_t rep) {
    SamplerSpec spec{kind, n, seed, rep};
    const Configuration c = sample(spec);
    if (zonal_l == 1) {
      double y = 0.0;
      for (const auto& p : c.points) y += p.z;
      ys[rep] = y;
    } else {
      ys[rep] = zonal_statistic(c, zonal_l);
    }
  });

  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(replicas);
  double m2 = 0.0, m4 = 0.0;
  for (double y : ys) {
    const double d = y - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  const double var = m2 / static_cast<double>(replicas - 1);
  m4 /= static_cast<double>(replicas);
  const double r_d = static_cast<double>(replicas);
  const double var_of_var =
      std::max(0.0, (m4 - var * var * (r_d - 3.0) / (r_d - 1.0)) / r_d);

  CltReport rep;
  rep.n = n;
  rep.replicas = replicas;
  rep.zonal_l = zonal_l;
  rep.sample_var = var;
  rep.se_var = std::sqrt(var_of_var);

  // quadrature oracle
  const int nodes = std::max<int>(96, static_cast<int>(n / 2) + 24);
  std::vector<double> xq, wq;
  gauss_legendre(nodes, xq, wq);
  const double scale2 = 2.0 * zonal_l + 1.0;  // f = sqrt(2l+1) P_l
  double f2 = 0.0, khat = 0.0, kint = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double u = xq[i];
    const double pl = legendre_p(zonal_l, u);
    const double kernel =
        std::pow(0.5 * (1.0 + u), static_cast<double>(n) - 1.0);
    f2 += wq[i] * scale2 * pl * pl;
    khat += wq[i] * pl * kernel;
    kint += wq[i] * kernel;
  }
  f2 *= 0.5;    // Int f^2 dsigma
  khat *= 0.5;  // Funk-Hecke coefficient of the kernel at degree l
  const double n_d = static_cast<double>(n);
  if (zonal_l == 1) f2 = f2 / scale2;  // plain z, not sqrt(3) P_1

  if (kind == SamplerKind::iid_uniform) {
    rep.oracle_var = n_d * f2;
    rep.projection_identity_residual = 0.0;
  } else {
    rep.oracle_var = n_d * f2 - n_d * n_d * khat * f2;
    // Int |K(x,y)|^2 dA(y) = N / 4pi with |K|^2 = (N/4pi)^2 k(<x,y>)
    const double lhs = (n_d / kFourPi) * (n_d / kFourPi) * 2.0 * M_PI * kint;
    rep.projection_identity_residual = std::abs(lhs - n_d / kFourPi);
  }
  rep.z_score = (rep.sample_var - rep.oracle_var) /
                std::max(rep.se_var, 1e-300);
  rep.pass = std::abs(rep.z_score) <= 3.0;
  return rep;
}

MgfReport mgf_test(std::size_t n, const std::vector<double>& c_values,
                   std::size_t replicas, std::uint64_t seed,
                   unsigned threads) {
  if (replicas < 10000) {
    throw std::invalid_argument("mgf_test: needs >= 10^4 replicas");
  }
  std::vector<double> ys(replicas);
  parallel_jobs(replicas, threads, [&](std::size_t rep) {
    SamplerSpec spec{SamplerKind::spherical_eig, n, seed, rep};
    const Configuration c = sample(spec);
    double y = 0.0;
    for (const auto& p : c.points) y += p.z;
    ys[rep] = y;
  });

  MgfReport out;
  out.n = n;
  out.replicas = replicas;
  out.pass = true;
  const double z99 = 2.3263478740408408;  // one-sided 99%
  for (double c : c_values) {
    MgfCell cell;
    cell.c = c;
    double sum = 0.0;
    for (double y : ys) sum += std::exp(c * y);
    cell.empirical = sum / static_cast<double>(replicas);
    double ss = 0.0;
    for (double y : ys) {
      const double d = std::exp(c * y) - cell.empirical;
      ss += d * d;
    }
    cell.se = std::sqrt(ss / (static_cast<double>(replicas - 1) *
                              static_cast<double>(replicas)));
    cell.ucl99 = cell.empirical + z99 * cell.se;
    cell.bound = std::exp(c * c / 3.0);
    cell.pass = cell.ucl99 <= cell.bound * (1.0 + 1e-12);
    out.pass = out.pass && cell.pass;
    out.cells.push_back(cell);
  }
  return out;
}

HeadlineReport headline_check(std::size_t n, double eta, std::size_t replicas,
                              std::uint64_t seed, unsigned threads,
                              double tol) {
  if (!(tol <= 1e-8)) {
    throw std::invalid_argument("headline_check: needs wce^2 tol <= 1e-8");
  }
  HeadlineReport rep;
  rep.n = n;
  rep.eta = eta;
  rep.replicas = replicas;
  rep.threshold = 2.86e-3;
  rep.iid_median_ref = std::sqrt(1.0 / (kFourPi * static_cast<double>(n)));

  std::vector<double> values(replicas), tails(replicas);
  parallel_jobs(replicas, threads, [&](std::size_t repi) {
    SamplerSpec spec{SamplerKind::spherical_eig, n, seed, repi};
    const Configuration c = sample(spec);
    WceOptions opts;
    opts.tol = tol;
    opts.threads = 1;
    const WceResult r = wce_legendre(c, SmoothnessParam(2.0), opts);
    values[repi] = r.value;
    tails[repi] = r.tail_bound;
  });
  rep.sorted_values = values;
  std::sort(rep.sorted_values.begin(), rep.sorted_values.end());
  rep.median = quantile(values, 0.5);
  rep.exceed_count = 0;
  for (double v : values) {
    if (v > rep.threshold) ++rep.exceed_count;
  }
  rep.max_tail_bound = 0.0;
  for (double t : tails) rep.max_tail_bound = std::max(rep.max_tail_bound, t);
  return rep;
}

ScalingReport scaling_study(SamplerKind kind,
                            const std::vector<std::size_t>& n_values,
                            std::size_t replicas, double s,
                            std::uint64_t seed, unsigned threads, double tol) {
  if (n_values.size() < 3) {
    throw std::invalid_argument("scaling_study: needs >= 3 values of N");
  }
  ScalingReport rep;
  rep.n_values = n_values;
  rep.replicas = replicas;
  rep.s = s;

  std::vector<std::vector<double>> cells(n_values.size());
  for (auto& cell : cells) cell.resize(replicas);
  const std::size_t total = n_values.size() * replicas;
  parallel_jobs(total, threads, [&](std::size_t job) {
    const std::size_t ni = job / replicas;
    SamplerSpec spec{kind, n_values[ni], seed, job};
    const Configuration c = sample(spec);
    WceOptions opts;
    opts.tol = tol;
    opts.threads = 1;
    opts.bernstein_tail = s < 2.0;
    cells[ni][job % replicas] =
        wce_legendre(c, SmoothnessParam(s), opts).value;
  });

  const auto fit_slope = [&](const std::vector<double>& med) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(med.size());
    for (std::size_t i = 0; i < med.size(); ++i) {
      const double x = std::log(static_cast<double>(n_values[i]));
      const double y = std::log(med[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    if (std::abs(denom) < 1e-12) {
      throw std::runtime_error("scaling_study: degenerate fit");
    }
    return (m * sxy - sx * sy) / denom;
  };

  rep.medians.resize(n_values.size());
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    rep.medians[i] = quantile(cells[i], 0.5);
  }
  rep.slope = fit_slope(rep.medians);

  // bootstrap over replicas within each cell
  RngStream boot(seed ^ 0xB00757A9ULL, 0);
  std::vector<double> slopes;
  const int n_boot = 400;
  std::vector<double> med(n_values.size()), resampled(replicas);
  for (int b = 0; b < n_boot; ++b) {
    for (std::size_t i = 0; i < n_values.size(); ++i) {
      for (std::size_t r = 0; r < replicas; ++r) {
        const std::size_t pick = static_cast<std::size_t>(
            boot.uniform() * static_cast<double>(replicas));
        resampled[r] = cells[i][std::min(pick, replicas - 1)];
      }
      med[i] = quantile(resampled, 0.5);
    }
    slopes.push_back(fit_slope(med));
  }
  rep.slope_lo = quantile(slopes, 0.025);
  rep.slope_hi = quantile(slopes, 0.975);
  return rep;
}

}  // namespace sphqmc
