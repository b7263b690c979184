#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpath/analytic.hpp"
#include "cpath/kkt.hpp"
#include "cpath/model.hpp"
#include "cpath/path.hpp"

namespace cpath {

struct ExpectedConditions {
  bool sc = true;
  bool nc = false;
  bool mfcq = true;
  bool ssosc = true;
};

// Ground truth attached to a registry instance. Closed-form members are
// optional; instances without them carry numeric oracles only (the planted
// KKT point plus a valid multiplier) and the rest is computed on demand.
struct InstanceOracle {
  Vec xstar;
  std::optional<PrimalDualTriplet> kkt_multiplier;  // some (Y, z) at xstar
  std::function<PrimalDualTriplet(double)> w_of_mu; // closed-form path, or null
  std::optional<SymMat> Y_a;
  std::optional<Vec> z_a;
  std::optional<Vec> xi_star;
  ExpectedConditions expected;
};

struct BuiltinInstance {
  std::string name;
  NsdpInstance inst;
  QmiData qmi;  // every builtin is a quadratic matrix-inequality instance
  InstanceOracle oracle;
  Vec interior_x0;  // strictly feasible start for tracing
};

// Fixed registry: deg-twin, deg-cross, deg-mixed, nondeg-control, deg-curve,
// and the seeded family rand-qmi(seed,k). Unknown names raise NotFoundError
// listing the registry. Oracles are self-verified at load.
BuiltinInstance builtin_instance(const std::string& name);
std::vector<std::string> builtin_names();  // fixed names plus the family stem

// Seeded degenerate generator with planted rank deficiency; also reachable
// through the registry as "rand-qmi(seed,k)".
BuiltinInstance make_rand_qmi(std::uint64_t seed, unsigned k);

struct Schedule {
  double mu0 = 1e-1;
  double sigma = 0.1;
  double mu_min = 1e-7;
};

// Everything the trace serializer and the experiments need about one
// instance: split at x*, analytic center, limiting direction. Computed
// numerically when the oracle lacks closed forms.
struct LabContext {
  BuiltinInstance builtin;
  EigenSplit split;
  SymMat Y_a{1};
  Vec z_a;
  Vec xi_star;
};

LabContext make_context(const BuiltinInstance& b);

struct TraceRow {
  std::size_t step;
  double mu;
  Vec x;
  double norm_d;
  double mu_over_normd;
  double dist_Y_Ya;
  double dist_z_za;
  double yEF_over_mu;
  double yFF_over_mu;
  double dir_err;
  double sigmin_A;
  double redform_mineig;
  double bkkt_res;
  std::size_t newton_iters;
};

std::vector<TraceRow> trace_rows(const LabContext& ctx, const PathTrace& trace);
std::string trace_csv(const LabContext& ctx, const PathTrace& trace);

struct Experiment {
  std::string name;
  // pass: "true", "false", or "na" (reported-only or skipped).
  std::string pass;
  std::vector<double> series;
  double bound = 0.0;
  std::string note;
};

struct VerificationReport {
  std::string instance;
  Schedule schedule;
  double rho = 0.25;
  std::uint64_t seed = 42;
  std::vector<Experiment> experiments;
  bool overall = false;
  PathTrace trace;
  std::vector<TraceRow> rows;
};

// Runs the full experiment battery on one registry instance: traces the
// path, then checks every asymptotic claim that admits a bounded-ratio or
// limit rendering on the grid. Conjectured limits are measured, not
// asserted.
VerificationReport run_verification(const std::string& name,
                                    const Schedule& schedule = {},
                                    double rho = 0.25,
                                    std::uint64_t seed = 42);

std::string report_json(const VerificationReport& rep);

// Shortest round-trip decimal rendering shared by the CSV and JSON writers.
std::string format_double(double v);

}  // namespace cpath
