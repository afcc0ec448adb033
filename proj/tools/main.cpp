#include "tblockgs/analysis.hpp"
#include "tblockgs/deblur.hpp"
#include "tblockgs/oracle.hpp"
#include "tblockgs/report.hpp"
#include "tblockgs/reproduce.hpp"
#include "tblockgs/sampling.hpp"
#include "tblockgs/solvers.hpp"
#include "tblockgs/synthgen.hpp"
#include "tblockgs/tensor.hpp"

#include <CLI11.hpp>

#include <glob.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace tblockgs;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::array<int, 3> parse_dims(const std::string& text) {
  std::array<int, 3> d{};
  char extra = 0;
  if (std::sscanf(text.c_str(), "%dx%dx%d%c", &d[0], &d[1], &d[2], &extra) != 3 ||
      d[0] < 1 || d[1] < 1 || d[2] < 1)
    throw UsageError("bad dims (expected like 30x20x30): " + text);
  return d;
}

BlurKernel parse_kernel(const std::string& spec) {
  const auto c1 = spec.find(':');
  const std::string name = spec.substr(0, c1);
  if (c1 == std::string::npos)
    throw UsageError("bad kernel spec (expected name:size[:sigma]): " + spec);
  const std::string rest = spec.substr(c1 + 1);
  const auto c2 = rest.find(':');
  const int k = std::stoi(rest.substr(0, c2));
  if (name == "gaussian") {
    const double sigma = c2 == std::string::npos ? 1.0 : std::stod(rest.substr(c2 + 1));
    return gaussian_kernel(k, sigma);
  }
  if (name == "avg" || name == "averaging") {
    if (c2 != std::string::npos)
      throw UsageError("averaging kernel takes only a size: " + spec);
    return averaging_kernel(k);
  }
  throw UsageError("unknown kernel type: " + name);
}

std::vector<std::string> glob_paths(const std::string& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), GLOB_TILDE, nullptr, &g);
  std::vector<std::string> paths;
  if (rc == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  if (rc != 0 && rc != GLOB_NOMATCH) throw std::runtime_error("glob failed: " + pattern);
  std::sort(paths.begin(), paths.end());
  return paths;
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) +
                       " is not `key = value`: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw UsageError("config line " + std::to_string(lineno) + " has empty key");
    entries.emplace_back(key, value);
  }
  return entries;
}

/// True when argv already carries --key (exactly or as --key=...).
bool flag_present(const std::vector<std::string>& args, const std::string& key) {
  const std::string bare = "--" + key;
  const std::string assigned = bare + "=";
  for (const std::string& a : args)
    if (a == bare || a.rfind(assigned, 0) == 0) return true;
  return false;
}

struct SynthOpts {
  std::string dims, x_dims, kind = "consistent", factor_case, out_dir = ".";
  unsigned long seed = 1;
  double noise = 1e-4;
};

struct SolveOpts {
  std::string solver, dims, x_dims, kind = "consistent", factor_case;
  std::string csv = "trace.csv", svg, residual_mode = "recompute";
  int block = 5;
  long iters = 1000, trace_every = 1;
  unsigned long seed = 1;
  double omega = 1.0, omega1 = 1.0, omega2 = 1.0, noise = 1e-4;
  bool timings = false;
};

struct AnalyzeOpts {
  std::string dims, x_dims, kind = "consistent", factor_case;
  int block = 5;
  unsigned long seed = 1;
  double omega = 1.0, omega1 = 1.0, omega2 = 1.0;
};

struct DeblurOpts {
  std::string frames, synthetic, solver = "trbags", out_dir = "deblur_out";
  std::vector<std::string> kernels;
  std::string residual_mode = "recompute";
  int block = 8;
  long iters = 2000;
  unsigned long seed = 1;
  double omega = 1.0, omega1 = 1.0, omega2 = 1.0;
  bool timings = false;
};

struct ReproduceOpts {
  std::string target, out_dir = "artifacts";
  unsigned long seed = 1;
  long iters = 0;
  bool full = false;
};

SyntheticSystem generate_plain(const std::string& dims, const std::string& x_dims,
                               const std::string& kind, unsigned long seed,
                               double noise) {
  if (dims.empty() || x_dims.empty())
    throw UsageError("this mode needs --dims and --x-dims");
  const auto d = parse_dims(dims);
  const auto xd = parse_dims(x_dims);
  if (xd[0] != d[1] || xd[2] != d[2])
    throw UsageError("conflicting dims: x must be " + std::to_string(d[1]) + "x*x" +
                     std::to_string(d[2]));
  Rng rng(seed);
  if (kind == "consistent") return make_consistent(d[0], d[1], xd[1], d[2], rng);
  if (kind == "inconsistent")
    return make_inconsistent(d[0], d[1], xd[1], d[2], rng, noise);
  throw UsageError("unknown kind (consistent|inconsistent): " + kind);
}

int run_synth(const SynthOpts& o) {
  SyntheticSystem sys;
  if (!o.factor_case.empty()) {
    Rng rng(o.seed);
    sys = make_factorized_case(parse_factor_case(o.factor_case), rng, o.noise);
  } else {
    sys = generate_plain(o.dims, o.x_dims, o.kind, o.seed, o.noise);
  }
  fs::create_directories(o.out_dir);
  const fs::path dir = o.out_dir;
  auto dump = [&dir](const std::string& name, const Tensor3& t) {
    const std::string path = (dir / name).string();
    write_tensor_text(path, t);
    std::cout << path << '\n';
  };
  if (!o.factor_case.empty()) {
    dump("u.t3", sys.u);
    dump("v.t3", sys.v);
  } else {
    dump("a.t3", sys.a);
  }
  dump("b.t3", sys.b);
  dump("x_gen.t3", sys.x_gen);
  if (frob_norm(sys.b_perp) > 0) dump("b_perp.t3", sys.b_perp);
  std::cout << "label = " << sys.label << '\n';
  return 0;
}

SolverConfig make_config(long iters, unsigned long seed, long trace_every,
                         const std::string& mode, double omega, double omega1,
                         double omega2) {
  SolverConfig cfg;
  cfg.max_iters = iters;
  cfg.seed = seed;
  cfg.trace_every = trace_every;
  cfg.omega = omega;
  cfg.omega1 = omega1;
  cfg.omega2 = omega2;
  if (mode == "recompute")
    cfg.residual_mode = ResidualMode::recompute;
  else if (mode == "incremental")
    cfg.residual_mode = ResidualMode::incremental;
  else
    throw UsageError("unknown residual mode (recompute|incremental): " + mode);
  return cfg;
}

void report_trace(const ConvergenceTrace& trace, const std::string& csv,
                  const std::string& svg, bool timings, const std::string& label) {
  if (trace.rows.empty()) throw std::runtime_error("solver produced no trace");
  write_trace_csv(trace, csv, /*zero_wall=*/!timings);
  std::cout << "csv = " << csv << '\n';
  if (!svg.empty()) {
    std::vector<PlotSeries> series;
    PlotSeries rel = trace_series(trace, TraceField::rel_err, label + " rel err");
    PlotSeries res = trace_series(trace, TraceField::res_err, label + " res err");
    if (!rel.points.empty()) series.push_back(std::move(rel));
    if (!res.points.empty()) series.push_back(std::move(res));
    if (series.empty())
      series.push_back(
          trace_series(trace, TraceField::raw_residual, label + " residual"));
    write_plot_svg(series, svg, label);
    std::cout << "svg = " << svg << '\n';
  }
  const TraceRow& last = trace.rows.back();
  std::cout << "iterations = " << last.k << '\n';
  if (trace.has_oracle) {
    std::cout << "final_rel_err = " << last.rel_err << '\n';
    std::cout << "final_res_err = " << last.res_err << '\n';
  }
  std::cout << "final_raw_residual = " << last.raw_residual << '\n';
  if (trace.diverged) std::cout << "diverged = 1\n";
}

int run_solve(const SolveOpts& o) {
  const SolverKind kind = parse_solver_kind(o.solver);
  const SolverConfig cfg = make_config(o.iters, o.seed, o.trace_every,
                                       o.residual_mode, o.omega, o.omega1, o.omega2);
  const bool factorized =
      kind == SolverKind::factrbgs || kind == SolverKind::factrbags;
  if (factorized) {
    if (o.factor_case.empty())
      throw UsageError("factorized solvers need --case (a Table-1 grid label)");
    Rng rng(o.seed);
    const SyntheticSystem sys =
        make_factorized_case(parse_factor_case(o.factor_case), rng, o.noise);
    const FactorDims d = factor_case_dims(parse_factor_case(o.factor_case));
    const Tensor3 zref = least_norm_solve(sys.u, sys.b).x_star;
    const Tensor3 xref = least_norm_solve(sys.v, zref).x_star;
    const BlockSet tu = BlockSet::partition(d.m1, o.block);
    const BlockSet tv = BlockSet::partition(d.n, o.block);
    const FactorizedOperator op{sys.u, sys.v};
    const FacSolveResult r = kind == SolverKind::factrbgs
                                 ? factrbgs(op, sys.b, tu, tv, cfg, &zref, &xref)
                                 : factrbags(op, sys.b, tu, tv, cfg, &zref, &xref);
    const std::string outer_csv =
        (fs::path(o.csv).parent_path() /
         (fs::path(o.csv).stem().string() + "_outer.csv"))
            .string();
    report_trace(r.inner, o.csv, o.svg, o.timings, o.solver + " inner");
    write_trace_csv(r.outer, outer_csv, !o.timings);
    std::cout << "outer_csv = " << outer_csv << '\n';
    return 0;
  }
  const SyntheticSystem sys =
      generate_plain(o.dims, o.x_dims, o.kind, o.seed, o.noise);
  const int n = sys.a.cols();
  const Tensor3 xref = sys.a.rows() >= n ? sys.x_gen
                                         : least_norm_solve(sys.a, sys.b).x_star;
  const BlockSet blocks = BlockSet::partition(n, o.block);
  const SolveResult r = kind == SolverKind::trbgs
                            ? trbgs(sys.a, sys.b, blocks, cfg, &xref)
                            : trbags(sys.a, sys.b, blocks, cfg, &xref);
  report_trace(r.trace, o.csv, o.svg, o.timings, o.solver);
  return 0;
}

int run_analyze(const AnalyzeOpts& o) {
  std::cout.precision(12);
  if (!o.factor_case.empty()) {
    Rng rng(o.seed);
    const SyntheticSystem sys =
        make_factorized_case(parse_factor_case(o.factor_case), rng);
    const FactorDims d = factor_case_dims(parse_factor_case(o.factor_case));
    const BlockSet tu = BlockSet::partition(d.m1, o.block);
    const BlockSet tv = BlockSet::partition(d.n, o.block);
    const ConvergenceConstants k =
        factorized_constants(sys.u, sys.v, tu, tv, o.omega1, o.omega2);
    std::cout << "alpha_u = " << k.alpha_u << '\n'
              << "alpha_v = " << k.alpha_v << '\n'
              << "alpha_max = " << k.alpha_max << '\n'
              << "alpha_min = " << k.alpha_min << '\n'
              << "beta_u = " << k.beta_u << '\n'
              << "beta_v = " << k.beta_v << '\n'
              << "beta_max = " << k.beta_max << '\n'
              << "beta_min = " << k.beta_min << '\n'
              << "gamma_v = " << k.gamma_v << '\n'
              << "sigma_sq_u = " << k.sigma_sq_u << '\n'
              << "sigma_sq_v = " << k.sigma_sq_v << '\n'
              << "kappa_sq_u = " << k.kappa_sq_u << '\n'
              << "kappa_sq_v = " << k.kappa_sq_v << '\n'
              << "sigma_max_sq_pinv_v = " << k.sigma_max_sq_pinv_v << '\n'
              << "c_min_u = " << k.c_min_u << '\n'
              << "c_min_v = " << k.c_min_v << '\n';
    return 0;
  }
  const SyntheticSystem sys =
      generate_plain(o.dims, o.x_dims, o.kind, o.seed, 1e-4);
  const BlockSet blocks = BlockSet::partition(sys.a.cols(), o.block);
  const ConvergenceConstants k = plain_constants(sys.a, blocks, o.omega);
  std::cout << "alpha = " << k.alpha << '\n'
            << "sigma_sq = " << k.sigma_sq << '\n'
            << "kappa_sq = " << k.kappa_sq << '\n'
            << "trbags_rate = " << k.trbags_rate << '\n';
  return 0;
}

int run_deblur(const DeblurOpts& o) {
  if (o.kernels.empty()) throw UsageError("deblur needs at least one --kernel");
  if (o.frames.empty() == o.synthetic.empty())
    throw UsageError("deblur needs exactly one of --frames or --synthetic");
  std::vector<BlurKernel> kernels;
  for (const std::string& spec : o.kernels) kernels.push_back(parse_kernel(spec));
  const SolverKind kind = parse_solver_kind(o.solver);
  const SolverConfig cfg = make_config(o.iters, o.seed, 1, o.residual_mode,
                                       o.omega, o.omega1, o.omega2);
  fs::create_directories(o.out_dir);
  const fs::path dir = o.out_dir;

  std::vector<Matrix> blurred;
  std::vector<Matrix> original;
  if (!o.synthetic.empty()) {
    const auto d = parse_dims(o.synthetic);
    Rng rng(o.seed);
    original = synthetic_video(d[0], d[1], d[2], rng);
    Tensor3 xt = refold_video(original);
    for (const BlurKernel& k : kernels)
      xt = tprod(build_blur_tensor(k, d[0], d[1]), xt);
    blurred = unrefold_video(xt, d[0], d[1], d[2]);
  } else {
    const std::vector<std::string> paths = glob_paths(o.frames);
    if (paths.empty()) throw UsageError("no frames match: " + o.frames);
    for (const std::string& p : paths) blurred.push_back(read_pgm(p));
  }

  const DeblurResult result = deblur(blurred, kernels, kind, cfg, o.block);

  auto dump = [&dir](const std::vector<Matrix>& fr, const std::string& stem) {
    for (std::size_t j = 0; j < fr.size(); ++j) {
      const std::string path =
          (dir / (stem + "_" + std::to_string(j) + ".pgm")).string();
      write_pgm(path, fr[j]);
      std::cout << path << '\n';
    }
  };
  if (!original.empty()) dump(original, "original");
  dump(blurred, "blurred");
  dump(result.frames, "recovered");
  report_trace(result.trace, (dir / "trace.csv").string(),
               (dir / "trace.svg").string(), o.timings, o.solver);
  if (result.factorized)
    write_trace_csv(result.outer, (dir / "trace_outer.csv").string(), !o.timings);

  if (!original.empty()) {
    double blur_dist = 0, rec_dist = 0;
    for (std::size_t j = 0; j < original.size(); ++j) {
      blur_dist += (blurred[j] - original[j]).squaredNorm();
      rec_dist += (result.frames[j] - original[j]).squaredNorm();
    }
    std::cout << "blurred_distance = " << std::sqrt(blur_dist) << '\n';
    std::cout << "recovered_distance = " << std::sqrt(rec_dist) << '\n';
  }
  return 0;
}

int run_reproduce(const ReproduceOpts& o) {
  ReproduceOptions opts;
  opts.out_dir = o.out_dir;
  opts.seed = o.seed;
  opts.iters = o.iters;
  opts.full = o.full;
  const std::vector<std::string> written = reproduce(o.target, opts);
  for (const std::string& p : written) std::cout << p << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"t-product tensor regression toolkit", "tblockgs"};
  app.require_subcommand(0, 1);
  std::string config_path;
  app.add_option("--config", config_path,
                 "defaults file with `key = value` lines; explicit flags win");

  SynthOpts so;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic system");
  synth->add_option("--dims", so.dims, "measurement dims m x n x p");
  synth->add_option("--x-dims", so.x_dims, "solution dims n x l x p");
  synth->add_option("--kind", so.kind, "consistent | inconsistent");
  synth->add_option("--case", so.factor_case, "factorized grid case label");
  synth->add_option("--seed", so.seed, "rng seed");
  synth->add_option("--noise", so.noise, "inconsistent perturbation scale");
  synth->add_option("--out-dir", so.out_dir, "output directory");

  SolveOpts vo;
  CLI::App* solve = app.add_subcommand("solve", "run a solver on a synthetic system");
  solve->add_option("--solver", vo.solver, "trbgs | trbags | factrbgs | factrbags")
      ->required();
  solve->add_option("--dims", vo.dims, "measurement dims m x n x p");
  solve->add_option("--x-dims", vo.x_dims, "solution dims n x l x p");
  solve->add_option("--kind", vo.kind, "consistent | inconsistent");
  solve->add_option("--case", vo.factor_case, "factorized grid case label");
  solve->add_option("--block", vo.block, "sampling block size");
  solve->add_option("--iters", vo.iters, "iteration count");
  solve->add_option("--seed", vo.seed, "rng seed");
  solve->add_option("--omega", vo.omega, "averaging step size");
  solve->add_option("--omega1", vo.omega1, "outer averaging step size");
  solve->add_option("--omega2", vo.omega2, "inner averaging step size");
  solve->add_option("--trace-every", vo.trace_every, "record cadence");
  solve->add_option("--residual-mode", vo.residual_mode, "recompute | incremental");
  solve->add_option("--csv", vo.csv, "trace output path");
  solve->add_option("--svg", vo.svg, "optional plot output path");
  solve->add_option("--noise", vo.noise, "inconsistent perturbation scale");
  solve->add_flag("--timings", vo.timings, "keep wall-clock column in the CSV");

  AnalyzeOpts ao;
  CLI::App* analyze = app.add_subcommand("analyze", "print convergence constants");
  analyze->add_option("--dims", ao.dims, "measurement dims m x n x p");
  analyze->add_option("--x-dims", ao.x_dims, "solution dims n x l x p");
  analyze->add_option("--kind", ao.kind, "consistent | inconsistent");
  analyze->add_option("--case", ao.factor_case, "factorized grid case label");
  analyze->add_option("--block", ao.block, "sampling block size");
  analyze->add_option("--seed", ao.seed, "rng seed");
  analyze->add_option("--omega", ao.omega, "averaging step size");
  analyze->add_option("--omega1", ao.omega1, "outer averaging step size");
  analyze->add_option("--omega2", ao.omega2, "inner averaging step size");

  DeblurOpts dbo;
  CLI::App* deb = app.add_subcommand("deblur", "recover video frames from circular blur");
  deb->add_option("--frames", dbo.frames, "glob of blurred PGM frames");
  deb->add_option("--synthetic", dbo.synthetic,
                  "generate rows x cols x frames test video instead");
  deb->add_option("--kernel", dbo.kernels,
                  "blur kernel spec, e.g. gaussian:5:1.0 or avg:5 (repeatable, "
                  "applied in order)");
  deb->add_option("--solver", dbo.solver, "trbgs | trbags | factrbgs | factrbags");
  deb->add_option("--block", dbo.block, "sampling block size");
  deb->add_option("--iters", dbo.iters, "iteration count");
  deb->add_option("--seed", dbo.seed, "rng seed");
  deb->add_option("--omega", dbo.omega, "averaging step size");
  deb->add_option("--omega1", dbo.omega1, "outer averaging step size");
  deb->add_option("--omega2", dbo.omega2, "inner averaging step size");
  deb->add_option("--residual-mode", dbo.residual_mode, "recompute | incremental");
  deb->add_option("--out-dir", dbo.out_dir, "output directory");
  deb->add_flag("--timings", dbo.timings, "keep wall-clock column in the CSV");

  ReproduceOpts ro;
  CLI::App* rep = app.add_subcommand("reproduce", "write experiment artifacts");
  rep->add_option("target", ro.target, "fig1..fig15 | appA | appB | appC | table1-grid")
      ->required();
  rep->add_option("--out-dir", ro.out_dir, "output directory");
  rep->add_option("--seed", ro.seed, "rng seed");
  rep->add_option("--iters", ro.iters, "override per-target iteration default");
  rep->add_flag("--full", ro.full, "run the deblurring target at full scale");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Merge config-file defaults: inject `--key=value` for keys the command
    // line does not already carry, after locating the chosen subcommand.
    std::string config_arg;
    std::string sub_name;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) {
        config_arg = args[i + 1];
        ++i;
      } else if (args[i].rfind("--config=", 0) == 0) {
        config_arg = args[i].substr(9);
      } else if (sub_name.empty() && !args[i].empty() && args[i][0] != '-') {
        sub_name = args[i];
      }
    }
    if (!config_arg.empty()) {
      if (sub_name.empty())
        throw UsageError("--config requires a subcommand");
      CLI::App* sub = nullptr;
      for (CLI::App* s : {synth, solve, analyze, deb, rep})
        if (s->get_name() == sub_name) sub = s;
      if (sub == nullptr) throw UsageError("unknown subcommand: " + sub_name);
      std::set<std::string> known;
      for (const CLI::Option* opt : sub->get_options())
        for (const std::string& ln : opt->get_lnames()) known.insert(ln);
      known.erase("help");
      for (const auto& [key, value] : read_config_file(config_arg)) {
        if (!known.count(key)) throw UsageError("unknown config key: " + key);
        if (!flag_present(args, key)) args.push_back("--" + key + "=" + value);
      }
    }

    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (*synth) return run_synth(so);
    if (*solve) return run_solve(vo);
    if (*analyze) return run_analyze(ao);
    if (*deb) return run_deblur(dbo);
    if (*rep) return run_reproduce(ro);
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
