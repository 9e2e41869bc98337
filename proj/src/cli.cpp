#include "conic/cli.hpp"

#include "conic/certify.hpp"
#include "conic/conditioning.hpp"
#include "conic/image_solver.hpp"
#include "conic/instance.hpp"
#include "conic/kernel_solver.hpp"
#include "conic/oracle_solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace conic {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved: return "solved";
    case SolveStatus::no_converge: return "no_converge";
    case SolveStatus::infeasible_detected: return "infeasible_detected";
  }
  return "unknown";
}

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

bool trace_enabled() {
  const char* v = std::getenv("CONIC_LOG");
  return v != nullptr && std::string(v) == "trace";
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json support_json(const std::vector<Index>& s) {
  json arr = json::array();
  for (Index i : s) arr.push_back(i + 1);
  return arr;
}

json report_json(const SolveReport& r, bool timing) {
  json j;
  j["status"] = to_string(r.status);
  j["fo_iters"] = r.fo_iters;
  j["rescalings"] = r.rescalings;
  j["removals"] = r.removals;
  j["oracle_calls"] = r.oracle_calls;
  j["residual"] = r.residual;
  j["margin"] = r.margin;
  if (timing) j["wall_ms"] = r.wall_ms;
  json checks = json::array();
  for (const auto& b : r.bound_checks)
    checks.push_back({{"name", b.name}, {"bound", b.bound}, {"observed", b.observed}, {"pass", b.pass}});
  j["bound_checks"] = checks;
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

int exit_for(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved: return kExitSolved;
    case SolveStatus::no_converge: return kExitNoConverge;
    case SolveStatus::infeasible_detected: return kExitInfeasible;
  }
  return kExitNoConverge;
}

struct SolveArgs {
  std::string mode = "kernel";
  std::string support = "full";
  std::string fo;
  std::string input;
  std::string output;
  std::string oracle_cmd;
  Index dim = 0;
  std::optional<double> epsilon;
  std::optional<std::int64_t> max_rescalings;
  std::optional<std::int64_t> max_iters;
  std::optional<double> rho_known;
  std::uint64_t seed = 0;
  std::optional<double> tol;
  bool timing = false;
};

struct GenArgs {
  std::string kind;
  Index m = 2;
  Index n = 4;
  Index s = 2;
  double rho = 0.1;
  std::uint64_t seed = 0;
  std::string output;
};

struct CertifyArgs {
  std::string input;
  std::string cert;
  std::optional<double> tol;
};

struct BenchArgs {
  std::uint64_t seed = 0;
  int count = 24;
  int threads = 0;
  bool timing = false;
};

// One solve of a matrix instance in kernel or image mode.
struct MatrixSolve {
  SolveReport report;
  std::optional<CertificateFile> cert;
};

MatrixSolve solve_matrix(const Matrix& a, const std::string& mode, const std::string& support, const Limits& limits,
                         const std::string& fo, std::ostream* trace) {
  MatrixSolve out;
  if (mode == "kernel") {
    KernelOptions opts;
    opts.limits = limits;
    if (trace) {
      opts.observer = [trace](const KernelEvent& e) {
        json j;
        j["event"] = e.kind == KernelEventKind::dv_step ? "dv_step" : e.kind == KernelEventKind::rescale ? "rescale" : "removal";
        j["t"] = e.state.t;
        j["k"] = e.k;
        j["cosine"] = e.cosine;
        j["y_qnorm"] = e.y_qnorm_after;
        j["active"] = e.state.S.size();
        *trace << j.dump() << '\n';
      };
    }
    const KernelResult r = support == "max" ? max_support_kernel(a, opts) : full_support_kernel(a, opts);
    out.report = r.report;
    if (r.report.status == SolveStatus::solved) out.cert = CertificateFile{CertificateKind::kernel, r.certificate.x, r.certificate.support};
    return out;
  }
  ImageOptions opts;
  opts.limits = limits;
  if (!fo.empty()) opts.method = *first_order_method_by_name(fo);
  if (trace) {
    opts.observer = [trace](const ImageEvent& e) {
      json j;
      j["event"] = e.kind == ImageEventKind::rescale ? "rescale" : "removal";
      j["t"] = e.state.t;
      j["r"] = e.state.r;
      j["det_ratio"] = e.det_ratio;
      j["log_det"] = e.state.log_det_ledger;
      if (e.kind == ImageEventKind::rescale) j["fo_iterations"] = e.fo_iterations;
      if (e.kind == ImageEventKind::removal) j["removed"] = e.removed + 1;
      *trace << j.dump() << '\n';
    };
  }
  const ImageResult r = support == "max" ? max_support_image(a, opts) : full_support_image(a, opts);
  out.report = r.report;
  if (r.report.status == SolveStatus::solved) out.cert = CertificateFile{CertificateKind::image, r.certificate.y, r.certificate.support};
  return out;
}

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  std::ostream* trace = trace_enabled() ? &err : nullptr;
  std::string mode = args.mode;
  if (!args.oracle_cmd.empty()) mode = "oracle";

  if (!args.fo.empty()) {
    const bool dv = args.fo == "dv";
    if (mode == "kernel" || mode == "lp") {
      if (!dv) {
        err << "error: --fo " << args.fo << " does not apply to " << mode << " mode (it uses dv)\n";
        return kExitUsage;
      }
    } else if (dv) {
      err << "error: --fo dv applies to kernel mode only\n";
      return kExitUsage;
    }
  }
  const std::string fo = (mode == "image" && args.fo != "dv") ? args.fo : std::string();

  Limits limits;
  limits.max_rescalings = args.max_rescalings;
  limits.max_iterations = args.max_iters;
  limits.known_rho = args.rho_known;

  Matrix a;
  LPFeasibilityProblem lp;
  if (mode == "lp") {
    if (args.input.empty()) {
      err << "error: --input is required\n";
      return kExitUsage;
    }
    lp = parse_lp(read_file(args.input));
  } else if (!args.input.empty()) {
    a = parse_instance(read_file(args.input)).A;
  } else if (mode != "oracle") {
    err << "error: --input is required\n";
    return kExitUsage;
  }

  Index m = 0;
  if (mode == "lp") m = lp.A.rows();
  else if (mode == "oracle") m = args.input.empty() ? args.dim : a.rows();
  else m = a.rows();
  if (m < 1) {
    err << "error: oracle mode needs --dim or --input\n";
    return kExitUsage;
  }
  if (args.epsilon) {
    if (!(*args.epsilon > 0)) {
      err << "error: --epsilon must be positive\n";
      return kExitUsage;
    }
    if (*args.epsilon > default_epsilon(m))
      err << "warning: --epsilon " << *args.epsilon << " exceeds 1/(11m) = " << default_epsilon(m)
          << "; the per-rescale progress guarantee no longer holds\n";
    limits.epsilon = args.epsilon;
  }

  const auto start = Clock::now();
  json line;
  line["command"] = "solve";
  line["mode"] = mode;
  SolveReport report;
  std::optional<CertificateFile> cert;

  if (mode == "kernel" || mode == "image") {
    line["support"] = args.support;
    line["m"] = a.rows();
    line["n"] = a.cols();
    MatrixSolve s = solve_matrix(a, mode, args.support, limits, fo, trace);
    report = s.report;
    cert = s.cert;
  } else if (mode == "lp") {
    const HomogenizedLP h = reduce_lp_feasibility(lp);
    line["m"] = lp.A.rows();
    line["d"] = lp.A.cols();
    if (!is_integral(h.M)) {
      err << "error: lp mode needs integer A and b\n";
      return kExitUsage;
    }
    MatrixSolve s = solve_matrix(h.M, "kernel", "max", limits, "", trace);
    report = s.report;
    if (report.status == SolveStatus::solved) {
      const auto& sup = s.cert->support;
      const bool feasible = std::find(sup.begin(), sup.end(), h.t_index) != sup.end();
      line["feasible"] = feasible;
      if (feasible) {
        const Vector x = *recover_lp_solution(h, to_original_scale(h.M, s.cert->vector));
        line["x"] = vector_json(x);
        line["max_violation"] = (lp.A * x - lp.b).maxCoeff();
      }
    }
  } else {
    std::unique_ptr<SeparationOracle> oracle;
    if (!args.oracle_cmd.empty())
      oracle = std::make_unique<SubprocessOracle>(args.oracle_cmd, m);
    else
      oracle = std::make_unique<PolyhedralOracle>(a);
    line["m"] = m;
    OracleOptions oopts;
    if (trace) {
      oopts.observer = [trace](const ActiveSet& act, const Vector& q, const Vector& r) {
        json j;
        j["event"] = "oracle_step";
        j["active"] = act.vectors.size();
        j["queried"] = vector_json(q);
        j["returned"] = vector_json(r);
        *trace << j.dump() << '\n';
      };
    }
    const OracleResult r = strict_conic_feasibility(*oracle, limits, oopts);
    report = r.report;
    if (report.status == SolveStatus::solved) {
      line["y"] = vector_json(r.y);
      if (!args.input.empty()) {
        std::vector<Index> all(static_cast<std::size_t>(a.cols()));
        for (Index j = 0; j < a.cols(); ++j) all[j] = j;
        cert = CertificateFile{CertificateKind::image, r.y, all};
      }
    }
  }
  report.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();

  if (cert && (mode == "kernel" || mode == "image" || mode == "oracle")) {
    const CertReport chk = cert->kind == CertificateKind::kernel
                               ? check_kernel_certificate(a, cert->vector, cert->support, args.tol.value_or(default_kernel_tol(a)))
                               : check_image_certificate(a, cert->vector, cert->support, args.tol.value_or(default_image_tol(a)));
    line["certificate_valid"] = chk.valid;
    line["support"] = args.support;
    line["certificate_support"] = support_json(cert->support);
  }
  const json summary = report_json(report, args.timing);
  for (const auto& [k, v] : summary.items()) line[k] = v;
  line["seed"] = args.seed;

  if (cert && mode != "lp") {
    const std::string text = write_certificate(*cert);
    if (!args.output.empty()) {
      std::ofstream f(args.output);
      if (!f) {
        err << "error: cannot write " << args.output << '\n';
        return kExitUsage;
      }
      f << text;
    } else {
      out << text;
    }
  }
  out << line.dump() << '\n';

  if (trace) {
    json fin;
    fin["event"] = "finish";
    fin["status"] = to_string(report.status);
    fin["fo_iters"] = report.fo_iters;
    fin["rescalings"] = report.rescalings;
    fin["removals"] = report.removals;
    *trace << fin.dump() << '\n';
  }
  err << mode << ": " << to_string(report.status) << " after " << report.fo_iters << " first-order iterations, "
      << report.rescalings << " rescalings, " << report.removals << " removals";
  if (report.oracle_calls) err << ", " << report.oracle_calls << " oracle calls";
  err << '\n';
  for (const auto& b : report.bound_checks)
    if (!b.pass) err << "  bound check failed: " << b.name << " observed " << b.observed << " > " << b.bound << '\n';
  if (!report.message.empty()) err << "  " << report.message << '\n';
  return exit_for(report.status);
}

int cmd_gen(const GenArgs& args, std::ostream& out, std::ostream& err) {
  ConicInstance inst;
  std::vector<std::string> comments;
  if (args.kind == "kernel")
    inst = gen_kernel_feasible(args.m, args.n, args.rho, args.seed);
  else if (args.kind == "image")
    inst = gen_image_feasible(args.m, args.n, args.rho, args.seed);
  else
    inst = gen_degenerate(args.m, args.n, args.s, args.seed);
  comments.push_back("generator " + args.kind + " seed " + std::to_string(args.seed));
  if (inst.known_rho) comments.push_back("rho_known " + format_number(*inst.known_rho));
  if (inst.known_supports) {
    std::string s = "S", t = "T";
    for (Index i : inst.known_supports->S) s += " " + std::to_string(i + 1);
    for (Index i : inst.known_supports->T) t += " " + std::to_string(i + 1);
    comments.push_back(s);
    comments.push_back(t);
  }
  const std::string text = write_instance(inst.A, comments);
  if (args.output.empty()) {
    out << text;
  } else {
    std::ofstream f(args.output);
    if (!f) {
      err << "error: cannot write " << args.output << '\n';
      return kExitUsage;
    }
    f << text;
  }
  return kExitSolved;
}

int cmd_certify(const CertifyArgs& args, std::ostream& out, std::ostream& err) {
  const Matrix a = parse_instance(read_file(args.input)).A;
  const CertificateFile cert = parse_certificate(read_file(args.cert));
  const bool kernel = cert.kind == CertificateKind::kernel;
  const Index expected = kernel ? a.cols() : a.rows();
  json line;
  line["command"] = "certify";
  line["kind"] = kernel ? "kernel" : "image";
  CertReport rep;
  if (cert.vector.size() != expected) {
    rep.message = "vector has length " + std::to_string(cert.vector.size()) + ", expected " + std::to_string(expected);
  } else {
    for (Index i : cert.support)
      if (i >= a.cols()) throw ParseError(3, "support index exceeds the number of columns");
    rep = kernel ? check_kernel_certificate(a, cert.vector, cert.support, args.tol.value_or(default_kernel_tol(a)))
                 : check_image_certificate(a, cert.vector, cert.support, args.tol.value_or(default_image_tol(a)));
  }
  line["valid"] = rep.valid;
  line["residual"] = rep.residual;
  line["margin"] = rep.margin;
  line["message"] = rep.message;
  out << line.dump() << '\n';
  err << (rep.valid ? "valid: " : "invalid: ") << rep.message << '\n';
  return rep.valid ? kExitSolved : kExitCertInvalid;
}

struct BenchJob {
  int id;
  std::string mode;
  std::string support;
  ConicInstance inst;
};

struct BenchRow {
  std::string status;
  SolveReport report;
};

std::vector<BenchJob> bench_jobs(const BenchArgs& args) {
  std::mt19937_64 rng(args.seed);
  std::vector<BenchJob> jobs;
  for (int i = 0; i < args.count; ++i) {
    const Index m = 2 + static_cast<Index>(rng() % 3);
    const std::uint64_t s = rng();
    BenchJob job{i, "", "", {}};
    switch (i % 4) {
      case 0:
        job.mode = "kernel";
        job.support = "full";
        job.inst = gen_kernel_feasible(m, 2 * m + 2, 0.05, s);
        break;
      case 1:
        job.mode = "image";
        job.support = "full";
        job.inst = gen_image_feasible(m, 2 * m + 2, 0.05, s);
        break;
      case 2:
        job.mode = "kernel";
        job.support = "max";
        job.inst = gen_degenerate(m, 2 * m + 2, m, s);
        break;
      default:
        job.mode = "image";
        job.support = "max";
        job.inst = gen_degenerate(m, 2 * m + 2, m, s);
        break;
    }
    jobs.push_back(std::move(job));
  }
  return jobs;
}

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
  if (args.count < 0) {
    err << "error: --count must be nonnegative\n";
    return kExitUsage;
  }
  const std::vector<BenchJob> jobs = bench_jobs(args);
  std::vector<BenchRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const BenchJob& job = jobs[i];
      Limits limits;
      limits.known_rho = job.inst.known_rho;
      const auto start = Clock::now();
      try {
        MatrixSolve s = solve_matrix(job.inst.A, job.mode, job.support, limits, "", nullptr);
        rows[i].report = s.report;
        rows[i].status = to_string(s.report.status);
      } catch (const std::exception& e) {
        rows[i].status = "error";
        std::lock_guard<std::mutex> lock(err_mutex);
        err << "instance " << job.id << ": " << e.what() << '\n';
      }
      rows[i].report.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }
  };
  unsigned threads = args.threads > 0 ? static_cast<unsigned>(args.threads) : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(1, jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  out << "instance_id,mode,m,n,rho_known,status,fo_iters,rescalings,removals,residual,wall_ms\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const BenchJob& job = jobs[i];
    const SolveReport& r = rows[i].report;
    out << job.id << ',' << job.mode << '-' << job.support << ',' << job.inst.A.rows() << ',' << job.inst.A.cols() << ','
        << (job.inst.known_rho ? format_number(*job.inst.known_rho) : "NA") << ',' << rows[i].status << ',' << r.fo_iters
        << ',' << r.rescalings << ',' << r.removals << ',' << format_number(r.residual) << ','
        << (args.timing ? format_number(r.wall_ms) : "NA") << '\n';
  }
  return kExitSolved;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear conic feasibility solver"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve a kernel, image, LP or oracle instance");
  s->add_option("--mode", solve.mode, "kernel | image | lp | oracle")->check(CLI::IsMember({"kernel", "image", "lp", "oracle"}));
  s->add_option("--support", solve.support, "full | max")->check(CLI::IsMember({"full", "max"}));
  s->add_option("--fo", solve.fo, "First-order method")->check(CLI::IsMember({"vonneumann", "dv", "perceptron"}));
  s->add_option("--input", solve.input, "Instance file (LP file in lp mode)");
  s->add_option("--output", solve.output, "Write the certificate here instead of stdout");
  s->add_option("--oracle-cmd", solve.oracle_cmd, "Command of a subprocess separation oracle");
  s->add_option("--dim", solve.dim, "Ambient dimension for --oracle-cmd");
  s->add_option("--epsilon", solve.epsilon, "Override the step constant 1/(11m)");
  s->add_option("--max-rescalings", solve.max_rescalings, "Rescaling cap");
  s->add_option("--max-iters", solve.max_iters, "First-order iteration cap");
  s->add_option("--rho-known", solve.rho_known, "Known condition number, enables bound checks");
  s->add_option("--seed", solve.seed, "Recorded in the report; solvers are deterministic");
  s->add_option("--tol", solve.tol, "Certificate check tolerance");
  s->add_flag("--timing", solve.timing, "Include wall_ms in the report");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate an instance");
  g->add_option("kind", gen.kind, "kernel | image | degenerate")->required()->check(CLI::IsMember({"kernel", "image", "degenerate"}));
  g->add_option("--m", gen.m, "Rows");
  g->add_option("--n", gen.n, "Columns");
  g->add_option("--s", gen.s, "Kernel support size (degenerate)");
  g->add_option("--rho", gen.rho, "Condition target (kernel, image)");
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--output", gen.output, "Output file (stdout if omitted)");

  CertifyArgs cert;
  auto* c = app.add_subcommand("certify", "Check a certificate against an instance");
  c->add_option("--input", cert.input, "Instance file")->required();
  c->add_option("--cert", cert.cert, "Certificate file")->required();
  c->add_option("--tol", cert.tol, "Tolerance");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Run a generated benchmark and print CSV");
  b->add_option("--seed", bench.seed, "Random seed");
  b->add_option("--count", bench.count, "Number of instances");
  b->add_option("--threads", bench.threads, "Worker threads (0 = hardware)");
  b->add_flag("--timing", bench.timing, "Fill the wall_ms column");

  std::vector<const char*> argv;
  argv.push_back("conic");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitSolved : kExitUsage;
  }

  try {
    if (*s) return cmd_solve(solve, out, err);
    if (*g) return cmd_gen(gen, out, err);
    if (*c) return cmd_certify(cert, out, err);
    return cmd_bench(bench, out, err);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace conic
