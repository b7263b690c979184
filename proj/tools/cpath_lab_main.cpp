// cpath-lab: trace central paths of nonlinear semidefinite programs, compute
// analytic centers and limiting directions, and run the verification suite.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "cpath/lab.hpp"

namespace {

using namespace cpath;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;   // verification fail or solver failure
constexpr int kExitUsage = 2;  // bad flags or unreadable/invalid input

struct CommonOpts {
  std::string instance;
  double mu0 = 1e-1;
  double sigma = 0.1;
  double mu_min = 1e-7;
  double rho = 0.25;
  double tol = 1e-9;
  std::uint64_t seed = 42;
  std::string out;
  std::vector<double> xstar;
  std::vector<double> x0;
};

void apply_env_seed(CommonOpts& opts) {
  if (const char* env = std::getenv("CPATH_LAB_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') opts.seed = v;
  }
}

void print_matrix(std::ostream& os, const Mat& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j)
      os << (j ? " " : "  ") << format_double(m(i, j));
    os << "\n";
  }
}

void print_vec(std::ostream& os, const Vec& v) {
  os << "[";
  for (std::size_t i = 0; i < v.size(); ++i)
    os << (i ? ", " : "") << format_double(v[i]);
  os << "]";
}

// Registry instances come with everything; file instances need the reference
// point (and a start for tracing) on the command line.
BuiltinInstance resolve_instance(const CommonOpts& opts, bool need_xstar,
                                 bool need_x0) {
  const bool looks_like_file = opts.instance.find('/') != std::string::npos ||
                               opts.instance.find(".json") != std::string::npos;
  if (!looks_like_file) {
    try {
      BuiltinInstance b = builtin_instance(opts.instance);
      if (!opts.xstar.empty()) {
        // A user-supplied reference point invalidates the stored ground
        // truth; keep only the point and recompute everything else.
        if (opts.xstar.size() != b.inst.n)
          throw ValidationError("--xstar has wrong dimension");
        b.oracle = InstanceOracle{};
        b.oracle.xstar = opts.xstar;
      }
      if (!opts.x0.empty()) b.interior_x0 = opts.x0;
      return b;
    } catch (const NotFoundError&) {
      std::ifstream probe(opts.instance);
      if (!probe.good()) throw;
    }
  }
  std::ifstream in(opts.instance);
  if (!in.good())
    throw NotFoundError("instance source '" + opts.instance +
                        "' is neither a registry name nor a readable file");
  std::ostringstream buf;
  buf << in.rdbuf();
  BuiltinInstance b;
  b.qmi = qmi_from_json(buf.str());
  b.inst = make_instance(b.qmi);
  b.name = b.inst.name;
  if (need_xstar && opts.xstar.empty())
    throw ValidationError("file instances need --xstar for this command");
  if (!opts.xstar.empty()) {
    if (opts.xstar.size() != b.inst.n)
      throw ValidationError("--xstar has wrong dimension");
    b.oracle.xstar = opts.xstar;
  }
  if (need_x0) {
    if (opts.x0.empty())
      throw ValidationError("file instances need --x0 for this command");
    if (opts.x0.size() != b.inst.n)
      throw ValidationError("--x0 has wrong dimension");
    b.interior_x0 = opts.x0;
  }
  return b;
}

int cmd_list() {
  for (const auto& name : builtin_names()) std::cout << name << "\n";
  return kExitPass;
}

int cmd_check(const CommonOpts& opts, std::size_t points) {
  const BuiltinInstance b = resolve_instance(opts, false, false);
  Rng rng(opts.seed);
  bool all_pass = true;
  for (std::size_t p = 0; p < points; ++p) {
    Vec x(b.inst.n);
    for (auto& v : x) v = rng.uniform(-0.3, 0.3);
    const FdReport rep = fd_check(b.inst, x);
    for (const auto& e : rep.entries) {
      std::cout << "point " << p << "  " << e.oracle << "  max_rel_err "
                << format_double(e.max_rel_err) << "  "
                << (e.pass ? "ok" : "FAIL") << "\n";
      if (!e.pass) all_pass = false;
    }
  }
  std::cout << (all_pass ? "derivative check passed" : "derivative check FAILED")
            << "\n";
  return all_pass ? kExitPass : kExitFail;
}

int cmd_conditions(const CommonOpts& opts) {
  const BuiltinInstance b = resolve_instance(opts, true, false);
  const EigenSplit split = eigen_split(b.inst.eval_G(b.oracle.xstar));
  const MultiplierSetParam param =
      parametrize_multiplier_set(b.inst, b.oracle.xstar, split);
  const AnalyticCenterResult ac = analytic_center(b.inst, b.oracle.xstar, split);

  std::vector<PrimalDualTriplet> samples;
  samples.push_back(PrimalDualTriplet{b.oracle.xstar, ac.Y_a, ac.z_a});
  if (b.oracle.kkt_multiplier) samples.push_back(*b.oracle.kkt_multiplier);
  // Recover the center parameter to sample the multiplier set around it.
  const auto extra = sample_multipliers(b.inst, b.oracle.xstar, param,
                                        Vec(param.dim(), 0.0), 8, opts.seed);
  samples.insert(samples.end(), extra.begin(), extra.end());

  ConditionOptions copts;
  copts.seed = opts.seed;
  const ConditionReport rep = condition_report(b.inst, b.oracle.xstar, samples, copts);

  std::cout << "instance: " << b.name << "\n";
  std::cout << "strict complementarity: " << (rep.sc ? "yes" : "no")
            << "  (rank G* = " << rep.rank_G << ", rank Y = " << rep.rank_Y
            << ", m = " << b.inst.m << ")\n";
  std::cout << "nondegeneracy: " << (rep.nc ? "yes" : "no") << "  (rank "
            << rep.nc_rank << " of required " << rep.nc_required << ")\n";
  std::cout << "mfcq: ";
  switch (rep.mfcq.status) {
    case MfcqReport::Status::verified: std::cout << "yes"; break;
    case MfcqReport::Status::refuted: std::cout << "no"; break;
    case MfcqReport::Status::unknown: std::cout << "unknown"; break;
  }
  std::cout << "  (jacobian full rank: " << (rep.mfcq.jac_full_rank ? "yes" : "no");
  if (rep.mfcq.witness_d) {
    std::cout << ", witness ";
    print_vec(std::cout, *rep.mfcq.witness_d);
    std::cout << " with min eig " << format_double(rep.mfcq.witness_min_eig);
  }
  std::cout << ")\n";
  std::cout << "ssosc: " << (rep.ssosc.consistent ? "consistent" : "violated")
            << "  (subspace dim " << rep.ssosc.subspace_dim << ", min eig "
            << format_double(rep.ssosc.subspace_min_eig) << "; cone samples "
            << rep.ssosc.cone_samples << ", min value "
            << format_double(rep.ssosc.cone_samples_min) << "; multipliers "
            << rep.ssosc.multipliers_tested << ")\n";
  return kExitPass;
}

int cmd_trace(const CommonOpts& opts, const std::string& mode_name) {
  const BuiltinInstance b = resolve_instance(opts, true, true);
  const LabContext ctx = make_context(b);
  TraceOptions topts;
  topts.xstar = b.oracle.xstar;
  topts.accept_tol = opts.tol;
  if (mode_name == "barrier")
    topts.mode = TraceMode::barrier;
  else if (mode_name == "pdipm")
    topts.mode = TraceMode::pdipm;
  else
    topts.mode = TraceMode::hybrid;
  const PathTrace tr = trace_path(b.inst, opts.mu0, opts.sigma, opts.mu_min,
                                  b.interior_x0, topts);
  const std::string csv = trace_csv(ctx, tr);
  if (!opts.out.empty()) {
    std::ofstream out(opts.out);
    if (!out.good()) throw Error("cannot open output file " + opts.out);
    out << csv;
  } else {
    std::cout << csv;
  }
  std::cerr << "traced " << tr.points.size() << " points down to mu = "
            << format_double(tr.points.back().mu) << "\n";
  return kExitPass;
}

int cmd_analytic_center(const CommonOpts& opts) {
  const BuiltinInstance b = resolve_instance(opts, true, false);
  const EigenSplit split = eigen_split(b.inst.eval_G(b.oracle.xstar));
  const AnalyticCenterResult ac = analytic_center(b.inst, b.oracle.xstar, split);
  std::cout << "Y_a =\n";
  print_matrix(std::cout, ac.Y_a.mat());
  std::cout << "z_a = ";
  print_vec(std::cout, ac.z_a);
  std::cout << "\nlog det Y_a^EE = " << format_double(ac.logdet) << "\n";
  std::cout << "certificate v = ";
  print_vec(std::cout, ac.certificate_v);
  std::cout << "\ncertificate residual = " << format_double(ac.cert_residual)
            << "\n";
  return kExitPass;
}

int cmd_xistar(const CommonOpts& opts) {
  const BuiltinInstance b = resolve_instance(opts, true, false);
  const EigenSplit split = eigen_split(b.inst.eval_G(b.oracle.xstar));
  const AnalyticCenterResult ac = analytic_center(b.inst, b.oracle.xstar, split);
  const XiStarResult xi = xi_star(b.inst, b.oracle.xstar, split, ac.Y_a);
  std::cout << "xi* = ";
  print_vec(std::cout, xi.xi);
  std::cout << "\np* = " << xi.p_star << "\n";
  std::cout << "structured vs direct solver gap = "
            << format_double(xi.structured_vs_full) << "\n";
  std::cout << "stacked system residual = "
            << format_double(xi.full_system_residual) << "\n";

  // Residuals of the limit identities tying xi*, dY, and the center blocks.
  const std::size_t q = split.null_dim(), r = split.rstar;
  if (q > 0) {
    const Mat dgee =
        block_of(delta_G(b.inst, b.oracle.xstar, xi.xi), split, Block::EE);
    const Mat y_ee = block_of(ac.Y_a, split, Block::EE);
    std::cout << "|dG_EE(xi) Y_a_EE - I| = "
              << format_double(frob_norm(dgee * y_ee - Mat::identity(q))) << "\n";
  }
  if (r > 0) {
    const Mat g_ff = block_of(b.inst.eval_G(b.oracle.xstar), split, Block::FF);
    const Mat dyff = block_of(xi.dY, split, Block::FF);
    std::cout << "|dY_FF G*_FF - I| = "
              << format_double(frob_norm(dyff * g_ff - Mat::identity(r))) << "\n";
  }
  return kExitPass;
}

int cmd_verify(const CommonOpts& opts, bool all, unsigned jobs) {
  Schedule sched{opts.mu0, opts.sigma, opts.mu_min};
  std::vector<std::string> targets;
  if (all) {
    targets = {"deg-twin", "deg-cross", "deg-mixed", "nondeg-control", "deg-curve"};
  } else {
    targets = {opts.instance};
  }

  std::vector<VerificationReport> reports(targets.size());
  if (jobs > 1 && targets.size() > 1) {
    std::vector<std::future<VerificationReport>> futs;
    for (const auto& t : targets)
      futs.push_back(std::async(std::launch::async, [&, t] {
        return run_verification(t, sched, opts.rho, opts.seed);
      }));
    for (std::size_t i = 0; i < futs.size(); ++i) reports[i] = futs[i].get();
  } else {
    for (std::size_t i = 0; i < targets.size(); ++i)
      reports[i] = run_verification(targets[i], sched, opts.rho, opts.seed);
  }

  bool overall = true;
  std::ostringstream body;
  if (reports.size() == 1) {
    body << report_json(reports[0]) << "\n";
    overall = reports[0].overall;
  } else {
    body << "[\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      std::istringstream in(report_json(reports[i]));
      std::string line, indented;
      while (std::getline(in, line)) indented += "  " + line + "\n";
      if (!indented.empty()) indented.pop_back();
      body << indented << (i + 1 < reports.size() ? ",\n" : "\n");
      overall = overall && reports[i].overall;
    }
    body << "]\n";
  }
  if (!opts.out.empty()) {
    std::ofstream out(opts.out);
    if (!out.good()) throw Error("cannot open output file " + opts.out);
    out << body.str();
  } else {
    std::cout << body.str();
  }
  for (const auto& r : reports)
    std::cerr << r.instance << ": " << (r.overall ? "pass" : "FAIL") << "\n";
  return overall ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"central-path laboratory for nonlinear semidefinite programs"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string mode = "hybrid";
  std::size_t check_points = 5;
  bool verify_all = false;
  unsigned jobs = 1;

  auto add_common = [&](CLI::App* sub, bool with_schedule) {
    sub->add_option("--instance", opts.instance,
                    "registry name or QMI file path");
    sub->add_option("--seed", opts.seed, "seed for randomized probes");
    sub->add_option("--xstar", opts.xstar,
                    "reference KKT point (needed for file instances)")
        ->delimiter(',');
    sub->add_option("--x0", opts.x0, "interior start (file instances)")
        ->delimiter(',');
    sub->add_option("--out", opts.out, "output file path");
    if (with_schedule) {
      sub->add_option("--mu0", opts.mu0, "initial barrier parameter")
          ->check(CLI::PositiveNumber);
      sub->add_option("--sigma", opts.sigma, "geometric decrease factor")
          ->check(CLI::Range(1e-6, 0.999999));
      sub->add_option("--mu-min", opts.mu_min, "final barrier parameter")
          ->check(CLI::PositiveNumber);
      sub->add_option("--rho", opts.rho, "tube radius")->check(CLI::PositiveNumber);
      sub->add_option("--tol", opts.tol, "trace acceptance tolerance")
          ->check(CLI::PositiveNumber);
    }
  };

  CLI::App* c_list = app.add_subcommand("list-instances", "print the registry");
  CLI::App* c_check =
      app.add_subcommand("check", "finite-difference check of the oracles");
  add_common(c_check, false);
  c_check->add_option("--points", check_points, "number of seeded probe points");
  CLI::App* c_cond =
      app.add_subcommand("conditions", "report SC / NC / MFCQ / SSOSC status");
  add_common(c_cond, false);
  CLI::App* c_trace = app.add_subcommand("trace", "follow the central path");
  add_common(c_trace, true);
  c_trace->add_option("--mode", mode, "barrier | pdipm | hybrid")
      ->check(CLI::IsMember({"barrier", "pdipm", "hybrid"}));
  CLI::App* c_ac = app.add_subcommand("analytic-center",
                                      "analytic center of the multiplier set");
  add_common(c_ac, false);
  CLI::App* c_xi =
      app.add_subcommand("xistar", "limiting direction of the primal path");
  add_common(c_xi, false);
  CLI::App* c_verify =
      app.add_subcommand("verify", "run the full experiment battery");
  add_common(c_verify, true);
  c_verify->add_flag("--all", verify_all, "verify every fixed registry instance");
  c_verify->add_option("--jobs", jobs, "parallel instances for --all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  apply_env_seed(opts);

  const bool needs_instance = !c_list->parsed() && !(c_verify->parsed() && verify_all);
  if (needs_instance && opts.instance.empty()) {
    std::cerr << "error: --instance is required\n";
    return kExitUsage;
  }

  try {
    if (c_list->parsed()) return cmd_list();
    if (c_check->parsed()) return cmd_check(opts, check_points);
    if (c_cond->parsed()) return cmd_conditions(opts);
    if (c_trace->parsed()) return cmd_trace(opts, mode);
    if (c_ac->parsed()) return cmd_analytic_center(opts);
    if (c_xi->parsed()) return cmd_xistar(opts);
    if (c_verify->parsed()) return cmd_verify(opts, verify_all, jobs);
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
