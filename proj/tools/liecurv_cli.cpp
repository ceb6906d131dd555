// Command-line front end. Every subcommand emits a versioned JSON report
// (schema: schemas/report.schema.json) and maps outcomes to exit codes:
// 0 pass, 1 logical failure, 2 numerical / ambiguous rank, 3 usage.
//
// Reports are byte-identical for a fixed configuration and seed, except
// for fields named wall_time_s.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"

#include "liecurv/algebra.hpp"
#include "liecurv/bianchi.hpp"
#include "liecurv/errors.hpp"
#include "liecurv/geometry.hpp"
#include "liecurv/random.hpp"
#include "liecurv/roots.hpp"

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// JSON has no inf/nan literals; encode them as strings so every report
// stays schema-valid.
ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Shared option plumbing.

struct CommonOptions {
  std::vector<std::string> algebras;
  std::vector<std::string> tol_kvs;
  std::uint64_t seed = 2026;
  int threads = 1;
  std::string out_path;
  std::string config_path;
};

void add_common_flags(CLI::App& sub, CommonOptions& c, bool with_algebras) {
  if (with_algebras) {
    sub.add_option("--algebra", c.algebras, "Algebra names, e.g. su3 sp2 g2");
  }
  sub.add_option("--tol", c.tol_kvs, "Tolerance overrides as key=value");
  sub.add_option("--seed", c.seed, "Random seed");
  sub.add_option("--threads", c.threads, "Worker thread budget")
      ->check(CLI::PositiveNumber);
  sub.add_option("--out", c.out_path, "Write the JSON report to this path");
  sub.add_option("--config", c.config_path,
                 "JSON config file mirroring the flags; flags win");
}

ordered_json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw liecurv::InputError("cannot read config file: " + path);
  ordered_json cfg;
  try {
    in >> cfg;
  } catch (const std::exception& e) {
    throw liecurv::InputError(std::string("config file is not valid JSON: ") +
                              e.what());
  }
  if (!cfg.is_object()) {
    throw liecurv::InputError("config file must hold a JSON object");
  }
  return cfg;
}

// Fills `value` from the config unless the flag was given on the command
// line. Missing keys keep the built-in default.
template <class T>
void merge_config(const ordered_json& cfg, const char* key,
                  const CLI::App& sub, const std::string& flag, T& value) {
  if (sub.count(flag) > 0) return;
  if (!cfg.contains(key)) return;
  try {
    value = cfg.at(key).get<T>();
  } catch (const std::exception&) {
    throw liecurv::InputError(std::string("config field has the wrong type: ") +
                              key);
  }
}

struct ToleranceMap {
  std::map<std::string, double> values;

  double get(const std::string& key, double fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }
};

ToleranceMap parse_tols(const std::vector<std::string>& kvs,
                        std::initializer_list<const char*> allowed) {
  ToleranceMap out;
  for (const std::string& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size()) {
      throw liecurv::InputError("tolerance override must look like key=value: " +
                                kv);
    }
    const std::string key = kv.substr(0, eq);
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      throw liecurv::InputError("unknown tolerance key: " + key);
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
      out.values[key] = v;
    } catch (const std::exception&) {
      throw liecurv::InputError("bad tolerance value in: " + kv);
    }
  }
  return out;
}

std::vector<std::string> resolve_algebras(
    const std::vector<std::string>& requested,
    std::initializer_list<const char*> defaults) {
  std::vector<std::string> names(requested);
  if (names.empty()) names.assign(defaults.begin(), defaults.end());
  for (const std::string& n : names) {
    if (!liecurv::parse_algebra_name(n)) {
      throw liecurv::InputError("unknown algebra name: " + n);
    }
  }
  return names;
}

// Index-addressed worker pool. Results land in caller-owned slots, so the
// report is identical for every thread count.
void run_parallel(int count, int threads,
                  const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Writes the envelope to --out (summary on stdout) or to stdout (summary on
// stderr). Returns the exit code.
int finish(const std::string& command, const CommonOptions& c, bool pass,
           ordered_json results, const std::string& summary,
           Clock::time_point t0) {
  ordered_json envelope;
  envelope["schema_version"] = 1;
  envelope["command"] = command;
  envelope["seed"] = c.seed;
  envelope["threads"] = c.threads;
  envelope["status"] = pass ? "pass" : "fail";
  envelope["results"] = std::move(results);
  envelope["wall_time_s"] = seconds_since(t0);
  const std::string body = envelope.dump(2) + "\n";
  if (!c.out_path.empty()) {
    std::ofstream out(c.out_path);
    if (!out) {
      throw liecurv::InputError("cannot write report: " + c.out_path);
    }
    out << body;
    std::cout << summary;
  } else {
    std::cout << body;
    std::cerr << summary;
  }
  return pass ? 0 : 1;
}

std::uint64_t trial_seed(std::uint64_t seed, int index) {
  return seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1));
}

// ---------------------------------------------------------------------------
// identities: algebra invariant suite.

struct IdentityOptions {
  CommonOptions common;
  std::string from_json;
};

int run_identities(const IdentityOptions& opt, const CLI::App& sub) {
  const auto t0 = Clock::now();
  CommonOptions c = opt.common;
  std::string from_json = opt.from_json;
  if (!c.config_path.empty()) {
    const ordered_json cfg = load_config(c.config_path);
    merge_config(cfg, "algebra", sub, "--algebra", c.algebras);
    merge_config(cfg, "tol", sub, "--tol", c.tol_kvs);
    merge_config(cfg, "seed", sub, "--seed", c.seed);
    merge_config(cfg, "threads", sub, "--threads", c.threads);
    merge_config(cfg, "out", sub, "--out", c.out_path);
    merge_config(cfg, "from_json", sub, "--from-json", from_json);
  }
  const ToleranceMap tol = parse_tols(
      c.tol_kvs,
      {"jacobi", "orthonormality", "antisymmetry", "casimir", "coboundary"});

  std::vector<liecurv::LieAlgebra> algebras;
  if (!from_json.empty()) {
    if (!c.algebras.empty()) {
      throw liecurv::InputError("--from-json excludes --algebra");
    }
    std::ifstream in(from_json);
    if (!in) {
      throw liecurv::InputError("cannot read algebra document: " + from_json);
    }
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const std::exception& e) {
      throw liecurv::InputError(std::string("algebra document is not JSON: ") +
                                e.what());
    }
    liecurv::BuildOptions bopts;
    bopts.enforce_invariants = false;  // measure and report, do not throw
    algebras.push_back(liecurv::algebra_from_json(doc, bopts));
  } else {
    const std::vector<std::string> names = resolve_algebras(
        c.algebras, {"su2", "su3", "su4", "so5", "so7", "sp2", "sp3", "g2"});
    algebras.reserve(names.size());
    for (const std::string& n : names) {
      algebras.push_back(liecurv::build_algebra(n));
    }
  }

  struct Bound {
    const char* name;
    double value;
    double bound;
  };
  const int count = static_cast<int>(algebras.size());
  std::vector<ordered_json> rows(algebras.size());
  std::vector<std::string> failures(algebras.size());
  run_parallel(count, c.threads, [&](int i) {
    const liecurv::LieAlgebra& g = algebras[static_cast<std::size_t>(i)];
    const liecurv::ToleranceReport meas = liecurv::measure_tolerances(g);
    const double casimir = liecurv::casimir_residual(g);

    auto rng = liecurv::seeded_engine(trial_seed(c.seed, i));
    double worst_ad = 0.0;
    double worst_wedge = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd x =
          liecurv::random_gaussian(g.dim(), rng).normalized();
      worst_ad = std::max(
          worst_ad,
          (liecurv::coboundary(g, liecurv::ad(g, x)) - 0.5 * x).norm());
      const Eigen::VectorXd u =
          liecurv::random_gaussian(g.dim(), rng).normalized();
      const Eigen::VectorXd v =
          liecurv::random_gaussian(g.dim(), rng).normalized();
      worst_wedge =
          std::max(worst_wedge, (liecurv::coboundary(g, liecurv::wedge(u, v)) -
                                 liecurv::bracket(g, u, v))
                                    .norm());
    }

    const Bound checks[] = {
        {"jacobi", meas.jacobi, tol.get("jacobi", 1e-12)},
        {"orthonormality", meas.orthonormality, tol.get("orthonormality", 1e-10)},
        {"total_antisymmetry", meas.total_antisymmetry,
         tol.get("antisymmetry", 1e-12)},
        {"casimir", casimir, tol.get("casimir", 1e-9)},
        {"coboundary_ad", worst_ad, tol.get("coboundary", 1e-10)},
        {"coboundary_wedge", worst_wedge, tol.get("coboundary", 1e-10)},
    };
    ordered_json jchecks;
    ordered_json jfail = ordered_json::array();
    for (const Bound& b : checks) {
      jchecks[b.name] = {{"value", num(b.value)}, {"bound", b.bound}};
      if (!(b.value <= b.bound)) {
        jfail.push_back(b.name);
        if (failures[static_cast<std::size_t>(i)].empty()) {
          failures[static_cast<std::size_t>(i)] =
              g.id().name() + " " + b.name + " " + fmt(b.value) +
              " exceeds " + fmt(b.bound);
        }
      }
    }
    ordered_json row;
    row["algebra"] = g.id().name();
    row["dim"] = g.dim();
    row["checks"] = std::move(jchecks);
    row["failures"] = std::move(jfail);
    row["status"] = failures[static_cast<std::size_t>(i)].empty()
                        ? "pass"
                        : "fail";
    rows[static_cast<std::size_t>(i)] = std::move(row);
  });

  bool pass = true;
  std::string first_failure;
  std::ostringstream summary;
  ordered_json results = ordered_json::array();
  for (int i = 0; i < count; ++i) {
    const ordered_json& row = rows[static_cast<std::size_t>(i)];
    summary << row["algebra"].get<std::string>() << ": "
            << row["status"].get<std::string>() << "\n";
    if (!failures[static_cast<std::size_t>(i)].empty()) {
      pass = false;
      if (first_failure.empty()) {
        first_failure = failures[static_cast<std::size_t>(i)];
      }
    }
    results.push_back(row);
  }
  const int code =
      finish("identities", c, pass, std::move(results), summary.str(), t0);
  if (!first_failure.empty()) {
    std::cerr << "identities: first failing check: " << first_failure << "\n";
  }
  return code;
}

// ---------------------------------------------------------------------------
// proposition: nullspace verification.

struct PropositionOptions {
  CommonOptions common;
  bool restricted = false;
  bool unrestricted = false;
  bool both = false;
  bool gram = false;
  bool dense = false;
};

ordered_json nullspace_json(const liecurv::NullspaceReport& r) {
  ordered_json j;
  j["rows"] = r.rows;
  j["cols"] = r.cols;
  j["dimension"] = r.dimension;
  j["sv_gap"] = num(r.sv_gap);
  j["sigma_max"] = num(r.sigma_max);
  j["path"] = r.path;
  j["max_phi_norm"] = num(r.max_phi_norm);
  j["max_k_ad_residual"] = num(r.max_k_ad_residual);
  j["max_residual"] = num(r.max_residual);
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

std::string half_summary(const char* label, const liecurv::NullspaceReport& r,
                         int expected, bool show_expected) {
  std::ostringstream os;
  os << label << " " << r.dimension;
  if (show_expected) os << "/" << expected;
  os << " (gap " << fmt(r.sv_gap) << ", " << r.path << ")";
  return os.str();
}

int run_proposition(const PropositionOptions& opt, const CLI::App& sub) {
  const auto t0 = Clock::now();
  CommonOptions c = opt.common;
  bool gram = opt.gram;
  bool dense = opt.dense;
  std::string restriction = opt.restricted
                                ? "restricted"
                                : (opt.unrestricted ? "unrestricted" : "both");
  if (!c.config_path.empty()) {
    const ordered_json cfg = load_config(c.config_path);
    merge_config(cfg, "algebra", sub, "--algebra", c.algebras);
    merge_config(cfg, "tol", sub, "--tol", c.tol_kvs);
    merge_config(cfg, "seed", sub, "--seed", c.seed);
    merge_config(cfg, "threads", sub, "--threads", c.threads);
    merge_config(cfg, "out", sub, "--out", c.out_path);
    merge_config(cfg, "gram", sub, "--gram", gram);
    merge_config(cfg, "dense", sub, "--dense", dense);
    if (sub.count("--restricted") == 0 && sub.count("--unrestricted") == 0 &&
        sub.count("--both") == 0) {
      merge_config(cfg, "restriction", sub, "--both", restriction);
    }
  }
  if (restriction != "restricted" && restriction != "unrestricted" &&
      restriction != "both") {
    throw liecurv::InputError("restriction must be restricted, unrestricted "
                              "or both: " + restriction);
  }
  if (gram && dense) {
    throw liecurv::InputError("--gram excludes --dense");
  }
  const ToleranceMap tol =
      parse_tols(c.tol_kvs, {"residual", "classification", "gap"});

  const std::vector<std::string> names =
      resolve_algebras(c.algebras, {"su3", "sp2", "g2", "su4"});

  liecurv::NullspaceOptions nopts;
  nopts.threads = c.threads;
  nopts.policy.min_gap_ratio = tol.get("gap", nopts.policy.min_gap_ratio);
  nopts.residual_tol = tol.get("residual", nopts.residual_tol);
  if (gram) nopts.path = liecurv::NullspacePath::gram;
  if (dense) nopts.path = liecurv::NullspacePath::dense;
  liecurv::VerifyOptions vopts;
  vopts.nullspace = nopts;
  vopts.classification_tol = tol.get("classification", vopts.classification_tol);

  // Algebras run one after another: a single solve already spreads across
  // the thread budget and holds the peak working set.
  bool pass = true;
  std::ostringstream summary;
  ordered_json results = ordered_json::array();
  for (const std::string& name : names) {
    const auto ta = Clock::now();
    const liecurv::LieAlgebra g = liecurv::build_algebra(name);
    ordered_json row;
    std::string status;
    if (restriction == "both") {
      const liecurv::PropositionReport rep = liecurv::verify_proposition(g, vopts);
      row["algebra"] = rep.algebra;
      row["n"] = rep.n;
      row["hypothesis_satisfied"] = rep.hypothesis_satisfied;
      row["expected_unrestricted"] = rep.expected_unrestricted;
      row["expected_restricted"] = rep.expected_restricted;
      row["unrestricted"] = nullspace_json(rep.unrestricted);
      row["restricted"] = nullspace_json(rep.restricted);
      status = rep.status;
      summary << rep.algebra << ": " << status << "  "
              << half_summary("unrestricted", rep.unrestricted,
                              rep.expected_unrestricted,
                              rep.hypothesis_satisfied)
              << "  "
              << half_summary("restricted", rep.restricted,
                              rep.expected_restricted,
                              rep.hypothesis_satisfied);
    } else {
      const bool want_restricted = restriction == "restricted";
      liecurv::AssemblyOptions aopts;
      aopts.restricted = want_restricted;
      const liecurv::BianchiSystem sys = liecurv::assemble_system(g, aopts);
      const liecurv::NullspaceReport rep = liecurv::system_nullspace(sys, nopts);
      const bool hypothesis = g.dim() > 4;
      const int expected = want_restricted ? 0 : g.dim() * g.dim();
      bool ok = rep.dimension == expected;
      if (!want_restricted) {
        ok = ok && rep.max_phi_norm <= vopts.classification_tol &&
             rep.max_k_ad_residual <= vopts.classification_tol;
      }
      row["algebra"] = g.id().name();
      row["n"] = g.dim();
      row["hypothesis_satisfied"] = hypothesis;
      row[want_restricted ? "expected_restricted" : "expected_unrestricted"] =
          expected;
      row[want_restricted ? "restricted" : "unrestricted"] =
          nullspace_json(rep);
      status = hypothesis ? (ok ? "pass" : "fail") : "outside hypothesis";
      summary << g.id().name() << ": " << status << "  "
              << half_summary(restriction.c_str(), rep, expected, hypothesis);
    }
    row["status"] = status;
    row["wall_time_s"] = seconds_since(ta);
    summary << "  " << fmt(seconds_since(ta)) << " s\n";
    if (status == "fail") pass = false;
    results.push_back(std::move(row));
  }
  return finish("proposition", c, pass, std::move(results), summary.str(), t0);
}

// ---------------------------------------------------------------------------
// min-rank: minimal nonzero adjoint rank against the reference values.

int run_min_rank(const CommonOptions& opt, const CLI::App& sub) {
  const auto t0 = Clock::now();
  CommonOptions c = opt;
  if (!c.config_path.empty()) {
    const ordered_json cfg = load_config(c.config_path);
    merge_config(cfg, "algebra", sub, "--algebra", c.algebras);
    merge_config(cfg, "seed", sub, "--seed", c.seed);
    merge_config(cfg, "threads", sub, "--threads", c.threads);
    merge_config(cfg, "out", sub, "--out", c.out_path);
  }
  const std::vector<std::string> names = resolve_algebras(
      c.algebras, {"su3", "su4", "sp2", "sp3", "so7", "g2"});

  const int count = static_cast<int>(names.size());
  std::vector<ordered_json> rows(names.size());
  std::vector<bool> ok(names.size(), false);
  run_parallel(count, c.threads, [&](int i) {
    const liecurv::LieAlgebra g =
        liecurv::build_algebra(names[static_cast<std::size_t>(i)]);
    const liecurv::MinRankResult r = liecurv::min_adjoint_rank(g, c.seed);
    const bool row_ok =
        r.cartan_rank == r.expected_cartan_rank && r.computed == r.expected;
    ordered_json row;
    row["algebra"] = g.id().name();
    row["dim"] = r.dim;
    row["rank"] = r.cartan_rank;
    row["rank_ref"] = r.expected_cartan_rank;
    row["m"] = r.computed;
    row["m_ref"] = r.expected;
    row["square_rank"] = r.square_rank;
    row["cube_residual"] = num(r.cube_residual);
    row["status"] = row_ok ? "pass" : "fail";
    rows[static_cast<std::size_t>(i)] = std::move(row);
    ok[static_cast<std::size_t>(i)] = row_ok;
  });

  std::ostringstream table;
  table << std::left << std::setw(9) << "algebra" << std::right
        << std::setw(5) << "dim" << std::setw(6) << "rank" << std::setw(5)
        << "ref" << std::setw(5) << "m" << std::setw(5) << "ref"
        << "  status\n";
  bool pass = true;
  ordered_json results = ordered_json::array();
  for (int i = 0; i < count; ++i) {
    const ordered_json& r = rows[static_cast<std::size_t>(i)];
    table << std::left << std::setw(9) << r["algebra"].get<std::string>()
          << std::right << std::setw(5) << r["dim"].get<int>() << std::setw(6)
          << r["rank"].get<int>() << std::setw(5) << r["rank_ref"].get<int>()
          << std::setw(5) << r["m"].get<int>() << std::setw(5)
          << r["m_ref"].get<int>() << "  " << r["status"].get<std::string>()
          << "\n";
    pass = pass && ok[static_cast<std::size_t>(i)];
    results.push_back(r);
  }
  return finish("min-rank", c, pass, std::move(results), table.str(), t0);
}

// ---------------------------------------------------------------------------
// geometry: curvature spectrum, Weyl homogeneity, symmetry obstruction.

struct GeometryOptions {
  CommonOptions common;
  int n = 5;
  double lambda = 1.0;
  int epsilon = 1;
  std::vector<std::string> d_entries;
  std::string ab_family = "constant";
  int samples = 20;
  double box = 0.8;
  double scale = 1.0;
  double floor = 0.1;
};

liecurv::MetricParams geometry_params(const GeometryOptions& o) {
  liecurv::MetricParams p;
  p.n = o.n;
  p.lambda = o.lambda;
  p.epsilon = o.epsilon;
  p.conformal_scale = o.scale;
  p.f_floor = o.floor;
  if (o.ab_family == "constant") {
    p.family = liecurv::AbFamily::constant;
  } else if (o.ab_family == "sin-offset") {
    p.family = liecurv::AbFamily::sin_offset;
  } else {
    throw liecurv::InputError("ab family must be constant or sin-offset: " +
                              o.ab_family);
  }
  if (o.n < 2) throw liecurv::InputError("n must be at least 4");
  p.D = Eigen::MatrixXd::Zero(o.n - 1, o.n - 1);
  if (o.d_entries.empty()) {
    if (o.n >= 3) {
      p.D(0, 1) = 1.0;
      p.D(1, 0) = -1.0;
    }
  } else {
    for (const std::string& e : o.d_entries) {
      std::istringstream is(e);
      int i = 0, j = 0;
      double v = 0.0;
      char c1 = 0, c2 = 0;
      if (!(is >> i >> c1 >> j >> c2 >> v) || c1 != ',' || c2 != ',' ||
          !(is >> std::ws).eof()) {
        throw liecurv::InputError("twist entry must look like i,j,v: " + e);
      }
      if (i < 1 || j < 1 || i >= o.n || j >= o.n || i == j) {
        throw liecurv::InputError("twist entry indices must be distinct and "
                                  "between 1 and n-1: " + e);
      }
      p.D(i - 1, j - 1) = v;
      p.D(j - 1, i - 1) = -v;
    }
  }
  liecurv::validate_params(p);
  return p;
}

int run_geometry(const GeometryOptions& opt, const CLI::App& sub) {
  const auto t0 = Clock::now();
  GeometryOptions o = opt;
  CommonOptions& c = o.common;
  if (!c.config_path.empty()) {
    const ordered_json cfg = load_config(c.config_path);
    merge_config(cfg, "tol", sub, "--tol", c.tol_kvs);
    merge_config(cfg, "seed", sub, "--seed", c.seed);
    merge_config(cfg, "threads", sub, "--threads", c.threads);
    merge_config(cfg, "out", sub, "--out", c.out_path);
    merge_config(cfg, "n", sub, "--n", o.n);
    merge_config(cfg, "lambda", sub, "--lambda", o.lambda);
    merge_config(cfg, "epsilon", sub, "--epsilon", o.epsilon);
    merge_config(cfg, "d_entries", sub, "--d-entry", o.d_entries);
    merge_config(cfg, "ab_family", sub, "--ab-family", o.ab_family);
    merge_config(cfg, "samples", sub, "--samples", o.samples);
    merge_config(cfg, "box", sub, "--box", o.box);
    merge_config(cfg, "scale", sub, "--scale", o.scale);
    merge_config(cfg, "floor", sub, "--floor", o.floor);
  }
  const ToleranceMap tol = parse_tols(
      c.tol_kvs, {"spectrum", "certificate", "obstruction", "obstruction_abs"});
  const double tol_spectrum = tol.get("spectrum", 1e-6);
  const double tol_certificate = tol.get("certificate", 1e-6);
  const double tol_obstruction = tol.get("obstruction", 1e-4);
  const double tol_obstruction_abs = tol.get("obstruction_abs", 1e-7);
  if (o.samples < 2) {
    throw liecurv::InputError("need at least two sample points");
  }

  const liecurv::MetricParams p = geometry_params(o);
  const double kappa = liecurv::curvature_model_constant(p);

  int rejected = 0;
  const std::vector<Eigen::VectorXd> points =
      liecurv::sample_domain_points(p, o.samples, c.seed, o.box, &rejected);

  // Spectrum {kappa, 0, ..., 0} at every sampled point, relative to |kappa|.
  double spectrum_dev = 0.0;
  for (const Eigen::VectorXd& pt : points) {
    const Eigen::VectorXd s = liecurv::curvature_spectrum(p, pt);
    double dev = std::abs(s(0) - kappa);
    for (Eigen::Index k = 1; k < s.size(); ++k) {
      dev = std::max(dev, std::abs(s(k)));
    }
    spectrum_dev = std::max(spectrum_dev, dev / std::abs(kappa));
  }

  const double certificate = liecurv::weyl_homogeneity_certificate(p, points);

  // Covariant-derivative obstruction: every twist direction at the origin,
  // the first twist direction at each sampled point.
  ordered_json obstruction_rows = ordered_json::array();
  double max_rel = 0.0;
  double max_abs_zero_rhs = 0.0;
  bool obstruction_nonzero = false;
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(p.n);
  auto record = [&](const char* where, const Eigen::VectorXd& pt, int i) {
    const liecurv::ObstructionSample s = liecurv::nabla_R_obstruction(p, pt, i);
    ordered_json row;
    row["where"] = where;
    row["i"] = i;
    row["lhs"] = num(s.lhs);
    row["rhs"] = num(s.rhs);
    if (s.rhs != 0.0) {
      obstruction_nonzero = true;
      const double rel = std::abs(s.lhs - s.rhs) / std::abs(s.rhs);
      row["rel_err"] = num(rel);
      max_rel = std::max(max_rel, rel);
    } else {
      max_abs_zero_rhs = std::max(max_abs_zero_rhs, std::abs(s.lhs));
    }
    obstruction_rows.push_back(std::move(row));
  };
  for (int i = 2; i <= p.n - 1; ++i) record("origin", origin, i);
  for (const Eigen::VectorXd& pt : points) record("sample", pt, 2);

  const bool spectrum_ok = spectrum_dev <= tol_spectrum;
  const bool certificate_ok = certificate <= tol_certificate;
  const bool obstruction_ok =
      max_rel <= tol_obstruction && max_abs_zero_rhs <= tol_obstruction_abs;
  const bool pass = spectrum_ok && certificate_ok && obstruction_ok;

  ordered_json row;
  row["n"] = p.n;
  row["lambda"] = p.lambda;
  row["epsilon"] = p.epsilon;
  row["ab_family"] = o.ab_family;
  row["conformal_scale"] = p.conformal_scale;
  row["domain_floor"] = p.f_floor;
  row["box"] = o.box;
  row["model_constant"] = num(kappa);
  row["samples"] = o.samples;
  row["excluded_draws"] = rejected;
  if (rejected > 0) {
    row["exclusion_note"] = std::to_string(rejected) +
                            " draws fell below the domain floor and were "
                            "replaced";
  }
  row["spectrum_max_deviation"] = num(spectrum_dev);
  row["certificate"] = num(certificate);
  row["obstruction_nonzero"] = obstruction_nonzero;
  row["obstruction_max_rel_err"] = num(max_rel);
  row["obstruction_max_abs_zero_rhs"] = num(max_abs_zero_rhs);
  row["obstruction_samples"] = std::move(obstruction_rows);
  row["checks"] = {{"spectrum", spectrum_ok},
                   {"certificate", certificate_ok},
                   {"obstruction", obstruction_ok}};
  row["status"] = pass ? "pass" : "fail";

  std::ostringstream summary;
  summary << "spectrum deviation " << fmt(spectrum_dev) << " (tol "
          << fmt(tol_spectrum) << "); certificate " << fmt(certificate)
          << " (tol " << fmt(tol_certificate) << "); obstruction "
          << (obstruction_nonzero
                  ? "rel " + fmt(max_rel)
                  : "zero to " + fmt(max_abs_zero_rhs))
          << "; " << rejected << " draws excluded; "
          << (pass ? "pass" : "fail") << "\n";

  ordered_json results = ordered_json::array();
  results.push_back(std::move(row));
  return finish("geometry", c, pass, std::move(results), summary.str(), t0);
}

// ---------------------------------------------------------------------------
// export-algebra: interchange document for one algebra.

int run_export(const CommonOptions& opt, const CLI::App& sub) {
  CommonOptions c = opt;
  if (!c.config_path.empty()) {
    const ordered_json cfg = load_config(c.config_path);
    merge_config(cfg, "algebra", sub, "--algebra", c.algebras);
    merge_config(cfg, "out", sub, "--out", c.out_path);
  }
  if (c.algebras.size() != 1) {
    throw liecurv::InputError("export-algebra needs exactly one --algebra");
  }
  const std::vector<std::string> names = resolve_algebras(c.algebras, {});
  const liecurv::LieAlgebra g = liecurv::build_algebra(names.front());
  const std::string body = liecurv::to_json(g).dump(2) + "\n";
  if (!c.out_path.empty()) {
    std::ofstream out(c.out_path);
    if (!out) {
      throw liecurv::InputError("cannot write document: " + c.out_path);
    }
    out << body;
    std::cout << "wrote " << g.id().name() << " (dim " << g.dim() << ") to "
              << c.out_path << "\n";
  } else {
    std::cout << body;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification toolkit for adjoint-algebra curvature operators "
               "and twisted product metrics"};
  app.require_subcommand(1);

  IdentityOptions id_opt;
  CLI::App* id_sub = app.add_subcommand(
      "identities", "Check bracket, orthonormality, Casimir and coboundary "
                    "identities per algebra");
  add_common_flags(*id_sub, id_opt.common, true);
  id_sub->add_option("--from-json", id_opt.from_json,
                     "Load one algebra from an interchange document instead")
      ->excludes("--algebra");

  PropositionOptions prop_opt;
  CLI::App* prop_sub = app.add_subcommand(
      "proposition", "Solve the curvature-operator system and compare "
                     "nullspace dimensions against the expected values");
  add_common_flags(*prop_sub, prop_opt.common, true);
  CLI::Option* f_res = prop_sub->add_flag("--restricted", prop_opt.restricted,
                                          "Only the restricted system");
  CLI::Option* f_unres =
      prop_sub->add_flag("--unrestricted", prop_opt.unrestricted,
                         "Only the unrestricted system");
  CLI::Option* f_both =
      prop_sub->add_flag("--both", prop_opt.both,
                         "Both systems (default)");
  f_res->excludes(f_unres)->excludes(f_both);
  f_unres->excludes(f_both);
  CLI::Option* f_gram = prop_sub->add_flag("--gram", prop_opt.gram,
                                           "Force the Gram-matrix path");
  CLI::Option* f_dense = prop_sub->add_flag("--dense", prop_opt.dense,
                                            "Force the dense path");
  f_gram->excludes(f_dense);

  CommonOptions rank_opt;
  CLI::App* rank_sub = app.add_subcommand(
      "min-rank", "Minimal nonzero adjoint rank per algebra against the "
                  "reference values");
  add_common_flags(*rank_sub, rank_opt, true);

  GeometryOptions geo_opt;
  CLI::App* geo_sub = app.add_subcommand(
      "geometry", "Curvature spectrum, Weyl homogeneity certificate and "
                  "symmetry obstruction for the twisted product metric");
  add_common_flags(*geo_sub, geo_opt.common, false);
  geo_sub->add_option("--n", geo_opt.n, "Manifold dimension (>= 4)");
  geo_sub->add_option("--lambda", geo_opt.lambda, "Profile frequency (> 0)");
  geo_sub->add_option("--epsilon", geo_opt.epsilon,
                      "Profile sign, +1 (hyperbolic) or -1 (spherical)");
  geo_sub->add_option("--d-entry", geo_opt.d_entries,
                      "Twist entry i,j,v (1-based, skew-completed); default "
                      "1,2,1");
  geo_sub->add_option("--ab-family", geo_opt.ab_family,
                      "Profile coefficients: constant or sin-offset");
  geo_sub->add_option("--samples", geo_opt.samples,
                      "Number of sampled domain points");
  geo_sub->add_option("--box", geo_opt.box, "Sampling box half-width");
  geo_sub->add_option("--scale", geo_opt.scale, "Constant conformal scale");
  geo_sub->add_option("--floor", geo_opt.floor, "Domain floor on |f|");

  CommonOptions exp_opt;
  CLI::App* exp_sub = app.add_subcommand(
      "export-algebra", "Write one algebra as a JSON interchange document");
  add_common_flags(*exp_sub, exp_opt, true);

  int rc = 0;
  id_sub->callback([&] { rc = run_identities(id_opt, *id_sub); });
  prop_sub->callback([&] { rc = run_proposition(prop_opt, *prop_sub); });
  rank_sub->callback([&] { rc = run_min_rank(rank_opt, *rank_sub); });
  geo_sub->callback([&] { rc = run_geometry(geo_opt, *geo_sub); });
  exp_sub->callback([&] { rc = run_export(exp_opt, *exp_sub); });

  try {
    app.parse(argc, argv);
    return rc;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  } catch (const liecurv::AmbiguousRankError& e) {
    std::cerr << "error (ambiguous rank): " << e.what() << "\n";
    return 2;
  } catch (const liecurv::InputError& e) {
    std::cerr << "error (usage): " << e.what() << "\n";
    return 3;
  } catch (const liecurv::UnsupportedAlgebraError& e) {
    std::cerr << "error (usage): " << e.what() << "\n";
    return 3;
  } catch (const liecurv::NumericalError& e) {
    std::cerr << "error (numerical): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
