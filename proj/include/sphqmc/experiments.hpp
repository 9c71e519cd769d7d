#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sphqmc/samplers.hpp"

namespace sphqmc {

// One metric request.  `s` doubles as the heat time for metric "gt";
// `param` carries the cap count for "capL2" (0 = 4096 caps).
struct MetricSpec {
  std::string metric = "wce";  // wce | gt | capL2 | capLinf | gensum | energy
  double s = 2.0;
  double tol = 1e-8;
  double param = 0.0;
};

struct ExperimentPlan {
  int version = 1;
  SamplerKind kind = SamplerKind::iid_uniform;
  std::vector<std::size_t> n_values;
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  std::vector<MetricSpec> metrics;
  std::string output_dir;  // empty = no incremental persistence
  unsigned threads = 0;

  static ExperimentPlan from_json_text(const std::string& text);
  static ExperimentPlan from_json_file(const std::string& path);
  std::string to_json_text() const;
  void validate() const;
};

struct ReplicaRecord {
  std::string kind;
  std::size_t n = 0;
  std::uint64_t stream_id = 0;
  std::string metric;
  double s = 0.0;
  double value = 0.0;
  double tail_bound = 0.0;
  double seconds = 0.0;
};

// Executes every (n, replica) cell; stream_id enumerates cells, so replicas
// are deterministic per (seed, stream_id) for any thread count.  When the
// plan names an output directory, records are appended to results.csv in
// stream order with a flush per record.
std::vector<ReplicaRecord> run_batch(const ExperimentPlan& plan);

void persist(const std::vector<ReplicaRecord>& records, std::ostream& os);
void persist_file(const std::vector<ReplicaRecord>& records,
                  const std::string& path);
std::vector<ReplicaRecord> load_records(std::istream& is);
std::vector<ReplicaRecord> load_records_file(const std::string& path);

struct CellSummary {
  std::string kind;
  std::size_t n = 0;
  std::string metric;
  double s = 0.0;
  std::size_t count = 0;
  double mean = 0.0;
  double se = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;
};

std::vector<CellSummary> summarize(const std::vector<ReplicaRecord>& records);
// Nearest-rank quantile of a copy of `values`.
double quantile(std::vector<double> values, double q);

std::string render_table(const std::vector<CellSummary>& cells);
// Plot-ready TSV: n, median wce, and the explicit ensemble bound curve
// e sqrt((1+eta)/(8 pi)) sqrt(log n)/n.
std::string render_tsv(const std::vector<CellSummary>& cells, double eta);

// --- statistical test harness ----------------------------------------------

// Linear statistic y = sum_i f(x_i) - N Int f dsigma for f = z (zonal_l = 1)
// or the L2(dsigma)-normalized zonal harmonic sqrt(2l+1) P_l(z).
struct CltReport {
  std::size_t n = 0;
  std::size_t replicas = 0;
  int zonal_l = 1;
  double sample_var = 0.0;
  double se_var = 0.0;
  double oracle_var = 0.0;
  double projection_identity_residual = 0.0;
  double z_score = 0.0;
  bool pass = false;
};

// Sample variance of y over replicas against the exact finite-N value from
// the projection kernel |K_N|^2 = (N/4pi)^2 ((1+<x,y>)/2)^(N-1), computed by
// Gauss-Legendre quadrature.  kind iid_uniform uses the independence oracle.
CltReport clt_variance_test(SamplerKind kind, std::size_t n,
                            std::size_t replicas, std::uint64_t seed,
                            unsigned threads, int zonal_l = 1);

struct MgfCell {
  double c = 0.0;
  double empirical = 0.0;
  double se = 0.0;
  double ucl99 = 0.0;
  double bound = 0.0;
  bool pass = false;
};
struct MgfReport {
  std::size_t n = 0;
  std::size_t replicas = 0;
  std::vector<MgfCell> cells;
  bool pass = false;
};

// Tests E e^{c y} <= e^{c^2/3} for y = sum z_i over the spherical ensemble
// (the Moser-Trudinger moment bound at w = c z, |w|_{H^1}^2 = 8 pi c^2 / 3);
// PASS iff the one-sided 99% upper confidence limit stays below the bound.
MgfReport mgf_test(std::size_t n, const std::vector<double>& c_values,
                   std::size_t replicas, std::uint64_t seed, unsigned threads);

struct HeadlineReport {
  std::size_t n = 0;
  std::size_t replicas = 0;
  double eta = 0.0;
  double threshold = 0.0;       // 2.86e-3 at (N, eta) = (1000, 3)
  double median = 0.0;
  std::size_t exceed_count = 0;
  double iid_median_ref = 0.0;  // sqrt(1/(4 pi N))
  double max_tail_bound = 0.0;
  std::vector<double> sorted_values;  // empirical CDF support
};

// 200-replica reproduction of the explicit high-confidence bound at N=1000.
HeadlineReport headline_check(std::size_t n, double eta, std::size_t replicas,
                              std::uint64_t seed, unsigned threads,
                              double tol = 1e-8);

struct ScalingReport {
  std::vector<std::size_t> n_values;
  std::vector<double> medians;
  std::size_t replicas = 0;
  double s = 2.0;
  double slope = 0.0;
  double slope_lo = 0.0;  // bootstrap 95% interval
  double slope_hi = 0.0;
};

// Least-squares slope of log median wce(.; s) against log N with a bootstrap
// confidence interval.
ScalingReport scaling_study(SamplerKind kind,
                            const std::vector<std::size_t>& n_values,
                            std::size_t replicas, double s,
                            std::uint64_t seed, unsigned threads,
                            double tol = 1e-8);

}  // namespace sphqmc
