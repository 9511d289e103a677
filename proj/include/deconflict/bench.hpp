#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "deconflict/generators.hpp"
#include "deconflict/io_util.hpp"
#include "deconflict/log.hpp"
#include "deconflict/resolution.hpp"

namespace deconflict {

struct BenchOptions {
  ResolveOptions resolve;
  int parallel = 1;           ///< worker threads across instances
  bool redact_timing = false; ///< zero every time column for stable bytes
};

struct SuiteResult {
  std::vector<ProblemInstance> instances;
  std::vector<ResolutionReport> reports;
  std::string csv;
};

namespace bench_detail {

/// Runs `job(i)` for i in [0, count) on opts.parallel threads. Results are
/// indexed, so output order never depends on scheduling.
inline void parallel_for(int count, int threads,
                         const std::function<void(int)>& job) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
    });
  for (std::thread& t : pool) t.join();
}

inline std::string csv_time(double v, bool redact) {
  return format_fixed(redact ? 0.0 : v, 3);
}

/// Relative gap as a percentage with 3 decimals; empty when unbounded.
inline std::string csv_gap_pct(double gap) {
  if (!std::isfinite(gap)) return "";
  return format_fixed(100.0 * gap, 3);
}

struct Moments {
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.count = static_cast<int>(xs.size());
  if (m.count == 0) return m;
  double s = 0.0;
  for (double x : xs) s += x;
  m.mean = s / m.count;
  double v = 0.0;
  for (double x : xs) v += (x - m.mean) * (x - m.mean);
  m.stddev = std::sqrt(v / m.count);
  return m;
}

inline const StepRecord* find_step(const ResolutionReport& rep,
                                   const char* name) {
  for (const StepRecord& s : rep.steps)
    if (s.name == name) return &s;
  return nullptr;
}

/// Five cells per stage: objective, time_s, gap_pct, status, n_v. Stages the
/// pipeline never reached stay empty.
inline void append_step_cells(std::string& csv, const StepRecord* st,
                              bool redact) {
  if (st == nullptr) {
    csv += ",,,,,";
    return;
  }
  csv += ",";
  if (std::isfinite(st->objective)) csv += format_double(st->objective);
  csv += "," + csv_time(st->time_s, redact);
  csv += "," + csv_gap_pct(st->gap);
  csv += "," + st->status;
  csv += ",";
  if (st->viol >= 0) csv += std::to_string(st->viol);
}

}  // namespace bench_detail

/// Solves every instance and renders one CSV row per instance.
inline SuiteResult run_suite(std::vector<ProblemInstance> instances,
                             const BenchOptions& opts) {
  SuiteResult out;
  out.instances = std::move(instances);
  const int count = static_cast<int>(out.instances.size());
  out.reports.resize(count);
  bench_detail::parallel_for(count, opts.parallel, [&](int i) {
    out.reports[i] = resolve(out.instances[i], opts.resolve);
    const ResolutionReport& rep = out.reports[i];
    log_info("[bench] " + rep.instance_name + " status=" +
             to_string(rep.status) + " objective=" +
             format_double(rep.objective));
  });

  std::string csv =
      "instance,n,n_c,"
      "miqp_objective,miqp_time_s,miqp_gap_pct,miqp_status,miqp_n_v,"
      "miqcp_objective,miqcp_time_s,miqcp_gap_pct,miqcp_status,miqcp_n_v,"
      "nlp_objective,nlp_time_s,nlp_gap_pct,nlp_status,nlp_n_v,status\n";
  for (int i = 0; i < count; ++i) {
    const ResolutionReport& rep = out.reports[i];
    csv += rep.instance_name + "," +
           std::to_string(out.instances[i].size()) + "," +
           std::to_string(rep.initial_conflicts);
    for (const char* step : {"lb-miqp", "lb-miqcp", "ub-nlp"})
      bench_detail::append_step_cells(csv, bench_detail::find_step(rep, step),
                                      opts.redact_timing);
    csv += std::string(",") + to_string(rep.status) + "\n";
  }
  out.csv = std::move(csv);
  return out;
}

/// Circle suite over n in [n_min, n_max].
inline SuiteResult run_cp_suite(int n_min, int n_max, const BenchOptions& opts,
                                double d_nm = 5.0) {
  std::vector<ProblemInstance> instances;
  for (int n = n_min; n <= n_max; ++n)
    instances.push_back(generate_cp(n, d_nm));
  return run_suite(std::move(instances), opts);
}

/// Random circle suite: `per_size` instances of each size, seeded
/// seed0, seed0 + 1, ... per size. The CSV aggregates each size into one row
/// (counts per status, step-1 global solves, time/objective moments).
inline SuiteResult run_rcp_suite(const std::vector<int>& sizes, int per_size,
                                 std::uint64_t seed0, const BenchOptions& opts,
                                 double d_nm = 5.0) {
  std::vector<ProblemInstance> instances;
  for (int n : sizes)
    for (int k = 0; k < per_size; ++k)
      instances.push_back(generate_rcp(n, seed0 + k, d_nm));
  SuiteResult out = run_suite(std::move(instances), opts);

  std::string csv =
      "n,instances,global,global_step1,local,infeas,nosol,objective_mean,"
      "objective_std,gap_pct_mean,time_mean_s,time_std_s\n";
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    int n_global = 0, n_global1 = 0, n_local = 0, n_infeas = 0, n_nosol = 0;
    std::vector<double> objectives, gaps, times;
    for (int k = 0; k < per_size; ++k) {
      const ResolutionReport& rep = out.reports[s * per_size + k];
      switch (rep.status) {
        case ResolveStatus::global:
          ++n_global;
          if (rep.steps.size() == 1) ++n_global1;
          break;
        case ResolveStatus::local: ++n_local; break;
        case ResolveStatus::infeas: ++n_infeas; break;
        default: ++n_nosol; break;
      }
      if (rep.has_controls) objectives.push_back(rep.objective);
      if (std::isfinite(rep.gap)) gaps.push_back(100.0 * rep.gap);
      times.push_back(opts.redact_timing ? 0.0 : rep.total_time_s);
    }
    const bench_detail::Moments mo = bench_detail::moments(objectives);
    const bench_detail::Moments mg = bench_detail::moments(gaps);
    const bench_detail::Moments mt = bench_detail::moments(times);
    csv += std::to_string(sizes[s]) + "," + std::to_string(per_size) + "," +
           std::to_string(n_global) + "," + std::to_string(n_global1) + "," +
           std::to_string(n_local) + "," + std::to_string(n_infeas) + "," +
           std::to_string(n_nosol) + "," + format_double(mo.mean) + "," +
           format_double(mo.stddev) + "," + format_fixed(mg.mean, 3) + "," +
           bench_detail::csv_time(mt.mean, opts.redact_timing) + "," +
           bench_detail::csv_time(mt.stddev, opts.redact_timing) + "\n";
  }
  out.csv = std::move(csv);
  return out;
}

}  // namespace deconflict
