#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deconflict/deconflict.hpp"

namespace dc = deconflict;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoResolution = 2;  // infeas/nosol, or verification failed
constexpr int kExitInput = 3;
constexpr int kExitInternal = 4;

dc::ControlBounds parse_bounds(const std::string& spec) {
  dc::ControlBounds b;
  if (spec.empty()) return b;
  double q_lo = 0.0, q_hi = 0.0, th_lo = 0.0, th_hi = 0.0;
  if (std::sscanf(spec.c_str(), "%lf,%lf,%lf,%lf", &q_lo, &q_hi, &th_lo,
                  &th_hi) != 4)
    throw dc::InputError("--bounds expects q_lo,q_hi,theta_lo,theta_hi");
  b.q_lo = q_lo;
  b.q_hi = q_hi;
  b.theta_lo = th_lo;
  b.theta_hi = th_hi;
  b.validate();
  return b;
}

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    std::size_t next = spec.find(',', pos);
    if (next == std::string::npos) next = spec.size();
    try {
      out.push_back(std::stoi(spec.substr(pos, next - pos)));
    } catch (const std::exception&) {
      throw dc::InputError("expected a comma-separated list of integers");
    }
    pos = next + 1;
  }
  if (out.empty()) throw dc::InputError("empty size list");
  return out;
}

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty())
    std::fputs(content.c_str(), stdout);
  else
    dc::write_file(out_path, content);
}

struct SolveFlags {
  std::string bounds;
  std::string envelope = "verbatim";
  double time_limit_s = 300.0;
  long node_limit = 0;
  double gap_tol = 1e-6;
};

dc::ResolveOptions resolve_options(const SolveFlags& f) {
  dc::ResolveOptions opts;
  opts.bounds = parse_bounds(f.bounds);
  opts.build.envelope = f.envelope == "qbar" ? dc::EnvelopeVariant::qbar
                                             : dc::EnvelopeVariant::verbatim;
  opts.mip.time_limit_s = f.time_limit_s;
  opts.mip.node_limit = f.node_limit;
  opts.mip.mip_gap_tol = f.gap_tol;
  return opts;
}

void add_solve_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("--bounds", f.bounds,
                  "control bounds as q_lo,q_hi,theta_lo,theta_hi (radians)");
  cmd->add_option("--envelope", f.envelope,
                  "speed ring envelope secant variant")
      ->check(CLI::IsMember({"verbatim", "qbar"}));
  cmd->add_option("--time-limit", f.time_limit_s,
                  "wall-clock limit per lower-bounding stage, seconds");
  cmd->add_option("--node-limit", f.node_limit,
                  "search budget per lower-bounding stage, node solves; "
                  "truncation at a node budget is reproducible (0 = off)");
  cmd->add_option("--gap-tol", f.gap_tol, "relative optimality gap tolerance");
}

int cmd_generate(const std::string& kind, int n, std::uint64_t seed,
                 double d_nm, double radius_nm, const std::string& out_path) {
  dc::ProblemInstance inst;
  if (kind == "cp") {
    inst = dc::generate_cp(n, d_nm, radius_nm);
  } else {
    dc::GeneratorParams params;
    params.radius_nm = radius_nm;
    inst = dc::generate_rcp(n, seed, d_nm, params);
  }
  emit(dc::to_json(inst), out_path);
  return kExitOk;
}

int cmd_solve(const std::string& instance_path, const SolveFlags& flags,
              bool redact_timing, const std::string& out_path) {
  const dc::ProblemInstance inst = dc::load_instance(instance_path);
  const dc::ResolutionReport rep = dc::resolve(inst, resolve_options(flags));
  emit(dc::to_json(rep, redact_timing), out_path);
  std::fprintf(stderr, "%s: status=%s objective=%s gap=%s conflicts=%d\n",
               rep.instance_name.c_str(), dc::to_string(rep.status),
               rep.has_controls ? dc::format_double(rep.objective).c_str()
                                : "-",
               std::isfinite(rep.gap)
                   ? (dc::format_fixed(100.0 * rep.gap, 3) + "%").c_str()
                   : "-",
               rep.initial_conflicts);
  return rep.status == dc::ResolveStatus::global ||
                 rep.status == dc::ResolveStatus::local
             ? kExitOk
             : kExitNoResolution;
}

int cmd_verify(const std::string& instance_path,
               const std::string& report_path, const std::string& bounds) {
  const dc::ProblemInstance inst = dc::load_instance(instance_path);
  const std::vector<dc::ControlDecision> controls =
      dc::controls_from_report_json(dc::read_file(report_path));
  const dc::VerificationReport vr =
      dc::verify_controls(inst, controls, parse_bounds(bounds));
  std::printf("instance: %s\n", inst.name().c_str());
  std::printf("bound violations: %d\n", vr.bound_violations);
  std::printf("separation violations: %d\n", vr.separation_violations);
  std::printf("min margin_nm: %s", dc::format_double(vr.min_margin_nm).c_str());
  if (vr.worst_pair_i >= 0)
    std::printf(" (pair %d,%d)", vr.worst_pair_i, vr.worst_pair_j);
  std::printf("\nverdict: %s\n", vr.ok ? "ok" : "violated");
  return vr.ok ? kExitOk : kExitNoResolution;
}

int cmd_bench(const std::string& suite, int cp_min, int cp_max,
              const std::string& sizes_spec, int count, std::uint64_t seed,
              const SolveFlags& flags, int parallel, bool redact_timing,
              const std::string& out_path) {
  dc::BenchOptions opts;
  opts.resolve = resolve_options(flags);
  opts.parallel = parallel;
  opts.redact_timing = redact_timing;
  dc::SuiteResult result;
  if (suite == "cp") {
    if (cp_min < 2 || cp_max < cp_min)
      throw dc::InputError("cp suite needs 2 <= --min <= --max");
    result = dc::run_cp_suite(cp_min, cp_max, opts);
  } else {
    result = dc::run_rcp_suite(parse_int_list(sizes_spec), count, seed, opts);
  }
  emit(result.csv, out_path);
  return kExitOk;
}

int cmd_plot(const std::string& instance_path, const std::string& report_path,
             const std::string& out_path) {
  const dc::ProblemInstance inst = dc::load_instance(instance_path);
  std::string svg;
  if (report_path.empty()) {
    svg = dc::plot_svg(inst);
  } else {
    const std::vector<dc::ControlDecision> controls =
        dc::controls_from_report_json(dc::read_file(report_path));
    svg = dc::plot_svg(inst, &controls);
  }
  emit(svg, out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "deconflict: pairwise aircraft conflict resolution by small speed and "
      "heading adjustments.\nExit codes: 0 ok, 2 no resolution found or "
      "verification failed, 3 bad input, 4 internal error."};
  app.require_subcommand(1);

  std::string kind, out_path, instance_path, report_path, bounds;
  int n = 0;
  std::uint64_t seed = 1;
  double d_nm = 5.0, radius_nm = 200.0;

  CLI::App* gen = app.add_subcommand("generate", "write a benchmark instance");
  gen->add_option("--kind", kind, "cp (deterministic circle) or rcp (random)")
      ->required()
      ->check(CLI::IsMember({"cp", "rcp"}));
  gen->add_option("-n,--count", n, "number of aircraft")->required();
  gen->add_option("--seed", seed, "rcp generator seed");
  gen->add_option("--d", d_nm, "separation norm, NM");
  gen->add_option("--radius", radius_nm, "circle radius, NM");
  gen->add_option("-o,--out", out_path, "output file (default stdout)");

  SolveFlags solve_flags;
  bool redact_timing = false;
  CLI::App* solve = app.add_subcommand("solve", "resolve an instance");
  solve->add_option("instance", instance_path, "instance JSON file")
      ->required();
  add_solve_flags(solve, solve_flags);
  solve->add_flag("--redact-timing", redact_timing,
                  "write timing fields as 0 for byte-stable output");
  solve->add_option("-o,--out", out_path, "report file (default stdout)");

  CLI::App* verify =
      app.add_subcommand("verify", "check a report against its instance");
  verify->add_option("instance", instance_path, "instance JSON file")
      ->required();
  verify->add_option("report", report_path, "report JSON file")->required();
  verify->add_option("--bounds", bounds,
                     "control bounds as q_lo,q_hi,theta_lo,theta_hi");

  std::string suite = "cp", sizes_spec = "10";
  int cp_min = 4, cp_max = 10, count = 10, parallel = 1;
  SolveFlags bench_flags;
  bool bench_redact = false;
  CLI::App* bench =
      app.add_subcommand("bench", "run a benchmark suite, CSV output");
  bench->add_option("--suite", suite, "cp or rcp")
      ->check(CLI::IsMember({"cp", "rcp"}));
  bench->add_option("--min", cp_min, "cp: smallest instance");
  bench->add_option("--max", cp_max, "cp: largest instance");
  bench->add_option("--sizes", sizes_spec, "rcp: comma-separated sizes");
  bench->add_option("--count", count, "rcp: instances per size");
  bench->add_option("--seed", seed, "rcp: first instance seed");
  bench->add_option("--parallel", parallel, "worker threads");
  add_solve_flags(bench, bench_flags);
  bench->add_flag("--redact-timing", bench_redact,
                  "write timing columns as 0 for byte-stable output");
  bench->add_option("-o,--out", out_path, "CSV file (default stdout)");

  CLI::App* plot = app.add_subcommand("plot", "render an instance as SVG");
  plot->add_option("instance", instance_path, "instance JSON file")
      ->required();
  plot->add_option("--report", report_path,
                   "report JSON file; adds resolved velocity arrows");
  plot->add_option("-o,--out", out_path, "SVG file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (gen->parsed())
      return cmd_generate(kind, n, seed, d_nm, radius_nm, out_path);
    if (solve->parsed())
      return cmd_solve(instance_path, solve_flags, redact_timing, out_path);
    if (verify->parsed())
      return cmd_verify(instance_path, report_path, bounds);
    if (bench->parsed())
      return cmd_bench(suite, cp_min, cp_max, sizes_spec, count, seed,
                       bench_flags, parallel, bench_redact, out_path);
    if (plot->parsed()) return cmd_plot(instance_path, report_path, out_path);
  } catch (const dc::InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  } catch (const dc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitInput;
}
