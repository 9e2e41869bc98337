#include <doctest.h>

#include "conic/conditioning.hpp"
#include "conic/exact.hpp"
#include "conic/instance.hpp"
#include "conic/kernel_solver.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace conic;

namespace {
Matrix mat(Index m, Index n, std::initializer_list<double> v) {
  Matrix a(m, n);
  auto it = v.begin();
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = *it++;
  return a;
}

Matrix active_columns(const KernelState& s) {
  Matrix sub(s.a_hat.rows(), static_cast<Index>(s.S.size()));
  for (std::size_t i = 0; i < s.S.size(); ++i) sub.col(static_cast<Index>(i)) = s.a_hat.col(s.S[i]);
  return sub;
}
}  // namespace

TEST_CASE("rank-one stretch in matrix and metric form") {
  const Matrix a2 = rescale_columns(Matrix::Identity(2, 2), Vector::Unit(2, 0));
  CHECK(a2.isApprox(mat(2, 2, {2, 0, 0, 1})));

  const double eps = 1.0 / 22;
  const SymPosDef<double> q = rescale_metric(SymPosDef<double>::identity(2), Vector::Unit(2, 0), eps);
  const double s = (1 + 3.0 / 22) * (1 + 3.0 / 22);
  CHECK(q.matrix()(0, 0) == doctest::Approx(4 / s));
  CHECK(q.matrix()(1, 1) == doctest::Approx(1 / s));
  CHECK(std::abs(q.matrix()(0, 1)) < 1e-15);
  CHECK_THROWS_AS(rescale_metric(SymPosDef<double>::identity(2), Vector::Zero(2), eps), PreconditionError);
}

TEST_CASE("full support kernel examples") {
  SUBCASE("antipodal pair is solved at once") {
    const KernelResult r = full_support_kernel(mat(1, 2, {1, -1}));
    CHECK(r.report.status == SolveStatus::solved);
    CHECK(r.report.rescalings == 0);
    CHECK(r.report.fo_iters == 0);
    CHECK(r.certificate.x.isApprox(Vector::Ones(2)));
    CHECK(r.certificate.support == std::vector<Index>{0, 1});
  }
  SUBCASE("plus and minus unit vectors") {
    const KernelResult r = full_support_kernel(mat(2, 4, {1, -1, 0, 0, 0, 0, 1, -1}));
    CHECK(r.report.status == SolveStatus::solved);
    CHECK(r.report.rescalings == 0);
    CHECK(r.certificate.x.isApprox(Vector::Ones(4)));
  }
  SUBCASE("an image-feasible instance is reported as infeasible") {
    const KernelResult r = full_support_kernel(Matrix::Identity(2, 2));
    CHECK(r.report.status == SolveStatus::infeasible_detected);
  }
  SUBCASE("certificates live in normalized coordinates") {
    const Matrix a = mat(1, 2, {2, -8});
    const KernelResult r = full_support_kernel(a);
    REQUIRE(r.report.status == SolveStatus::solved);
    const Vector x = to_original_scale(a, r.certificate.x);
    CHECK(std::abs((a * x)(0)) < 1e-12);
  }
}

TEST_CASE("generated instance with condition about -0.1") {
  const ConicInstance inst = gen_kernel_feasible(3, 8, 0.1, 7);
  REQUIRE(inst.known_rho.has_value());
  CHECK(*inst.known_rho <= -0.1);
  KernelOptions opts;
  opts.limits.known_rho = inst.known_rho;
  const KernelResult r = full_support_kernel(inst.A, opts);
  REQUIRE(r.report.status == SolveStatus::solved);
  CHECK(r.certificate.residual <= 1e-8);
  CHECK(r.certificate.x.minCoeff() > 0);
  CHECK(r.report.rescalings <= 18);
  CHECK(r.report.all_bounds_pass());
}

TEST_CASE("kernel solver ledger invariants") {
  std::mt19937_64 rng(41);
  int rescales_seen = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Index m = 2 + static_cast<Index>(rng() % 3);
    const Index n = m + 2 + static_cast<Index>(rng() % 2);
    ConicInstance inst;
    inst.A = trial % 4 == 0 ? gen_kernel_feasible(m, n, 0.02, rng()).A : testsupport::lopsided_kernel_instance(m, n, 6, rng);
    const double eps = default_epsilon(m);
    bool ok_dv = true, ok_rescale = true, ok_guard = true, ok_monotone = true, ok_metric = true;
    Vector last_x;
    Matrix q_tracked = Matrix::Identity(m, m);
    KernelOptions opts;
    opts.observer = [&](const KernelEvent& e) {
      switch (e.kind) {
        case KernelEventKind::dv_step: {
          const double expected = e.y_qnorm_before * std::sqrt(std::max(0.0, 1 - e.cosine * e.cosine));
          ok_dv = ok_dv && std::abs(e.y_qnorm_after - expected) <= 1e-10 * e.y_qnorm_before;
          ok_monotone = ok_monotone && (last_x.size() != e.state.x.size() || (e.state.x - last_x).minCoeff() >= 0);
          break;
        }
        case KernelEventKind::rescale: {
          ++rescales_seen;
          const double ratio = e.y_qnorm_after / e.y_qnorm_before;
          ok_rescale = ok_rescale && std::abs(ratio - 2 / (1 + 3 * eps)) <= 1e-10 * ratio;
          ok_guard = ok_guard && e.min_cosine >= -eps - 1e-12;
          const Vector y_orig = active_columns(e.state) * e.state.x;
          q_tracked = rescale_metric(SymPosDef<double>(q_tracked), y_orig, eps).matrix();
          const Matrix q_state = e.state.metric();
          ok_metric = ok_metric && (q_state - q_tracked).norm() <= 1e-8 * q_tracked.norm();
          break;
        }
        case KernelEventKind::removal:
          break;
      }
      last_x = e.state.x;
    };
    const KernelResult r = full_support_kernel(inst.A, opts);
    CHECK(r.report.status == SolveStatus::solved);
    CHECK(ok_dv);
    CHECK(ok_rescale);
    CHECK(ok_guard);
    CHECK(ok_monotone);
    CHECK(ok_metric);
  }
  CHECK(rescales_seen >= 10);
}

TEST_CASE("positive projection whenever the aggregate is shorter than the symmetric condition") {
  std::mt19937_64 rng(42);
  int triggered = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Index m = 2;
    const Index n = 3 + static_cast<Index>(rng() % 3);
    Matrix a(m, n);
    for (Index j = 0; j < n; ++j) a.col(j) = testsupport::random_gaussian(rng, m).normalized();
    Matrix sym(m, 2 * n);
    sym << a, -a;
    const double rho = std::abs(goffin_oracle(sym));
    // x ≥ e close to the kernel so that ‖Ax‖ is small.
    const Matrix k = testsupport::gram_schmidt_kernel_projector(a);
    Vector x = Vector::Ones(n) + 3.0 * (k * testsupport::random_gaussian(rng, n)).cwiseAbs();
    x = x.cwiseMax(1.0);
    if ((a * x).norm() >= rho) continue;
    ++triggered;
    CHECK((kernel_projector(a).matrix * x).minCoeff() > 0);
  }
  CHECK(triggered > 0);
}

TEST_CASE("coordinate descent without rescaling respects its step bound") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const ConicInstance inst = gen_kernel_feasible(2, 5, 0.2, rng());
    KernelOptions opts;
    opts.rescaling = false;
    opts.limits.known_rho = inst.known_rho;
    const KernelResult r = full_support_kernel(inst.A, opts);
    REQUIRE(r.report.status == SolveStatus::solved);
    CHECK(r.report.rescalings == 0);
    CHECK(r.report.fo_iters <= coordinate_descent_step_bound(5, *inst.known_rho));
  }
}

TEST_CASE("max support kernel examples") {
  SUBCASE("worked degenerate instance") {
    const KernelResult r = max_support_kernel(mat(2, 3, {1, -1, 1, 0, 0, 1}));
    REQUIRE(r.report.status == SolveStatus::solved);
    CHECK(r.certificate.support == std::vector<Index>{0, 1});
    CHECK(r.certificate.x(0) == doctest::Approx(1.0));
    CHECK(r.certificate.x(1) == doctest::Approx(1.0));
    CHECK(r.certificate.x(2) == 0);
  }
  SUBCASE("identity has empty support") {
    const KernelResult r = max_support_kernel(Matrix::Identity(2, 2));
    REQUIRE(r.report.status == SolveStatus::solved);
    CHECK(r.certificate.support.empty());
    CHECK(r.certificate.x.isZero(0));
  }
  SUBCASE("antipodal pair has full support") {
    const KernelResult r = max_support_kernel(mat(1, 2, {1, -1}));
    REQUIRE(r.report.status == SolveStatus::solved);
    CHECK(r.certificate.support == std::vector<Index>{0, 1});
  }
  SUBCASE("zero columns belong to the support") {
    const KernelResult r = max_support_kernel(mat(2, 3, {1, 0, 0, 0, 0, 1}));
    REQUIRE(r.report.status == SolveStatus::solved);
    CHECK(r.certificate.support == std::vector<Index>{1});
  }
  SUBCASE("non-integer input is rejected") {
    CHECK_THROWS_AS(max_support_kernel(mat(1, 2, {0.5, -1})), PreconditionError);
  }
}

TEST_CASE("max support kernel only sets aside columns outside the support") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Index m = 2 + static_cast<Index>(seed % 3);
    const Index n = m + 3;
    const ConicInstance inst = gen_degenerate(m, n, 2 + static_cast<Index>(seed % 2), seed);
    const ExactSupports ex = exact_support_oracle(inst.A);
    const std::set<Index> s_star(ex.S.begin(), ex.S.end());
    bool flagged_ok = true;
    KernelOptions opts;
    opts.observer = [&](const KernelEvent& e) {
      for (std::size_t i = 0; i < e.state.S.size(); ++i)
        if (e.state.in_T[i] && s_star.count(e.state.S[i])) flagged_ok = false;
    };
    const KernelResult r = max_support_kernel(inst.A, opts);
    REQUIRE(r.report.status == SolveStatus::solved);
    CHECK(flagged_ok);
    CHECK(r.certificate.support == ex.S);
    CHECK(r.certificate.residual <= 1e-8 * static_cast<double>(n));
    CHECK(r.report.all_bounds_pass());
  }
}

TEST_CASE("a run stuck at rounding level stops early") {
  // θ ≈ 1.7e-9 here: setting aside the one column outside the support needs
  // a stretch that double precision cannot represent.
  const Matrix a = gen_degenerate(4, 10, 4, 200209).A;
  const KernelResult r = max_support_kernel(a);
  CHECK(r.report.fo_iters < 1'000'000);
  if (r.report.status == SolveStatus::solved)
    CHECK(r.certificate.support == exact_support_oracle(a).S);
  else
    CHECK(r.report.message == "aggregate stuck at rounding level");
}

TEST_CASE("iteration limits produce no_converge") {
  const ConicInstance inst = gen_kernel_feasible(3, 8, 0.01, 5);
  KernelOptions opts;
  opts.limits.max_iterations = 0;
  const KernelResult r = full_support_kernel(inst.A, opts);
  if (r.report.fo_iters == 0 && r.report.status != SolveStatus::solved) CHECK(r.report.status == SolveStatus::no_converge);
  CHECK_THROWS_AS(full_support_kernel(Matrix(0, 0)), PreconditionError);
}
