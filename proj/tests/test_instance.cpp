#include <doctest.h>

#include "conic/conditioning.hpp"
#include "conic/exact.hpp"
#include "conic/instance.hpp"
#include "conic/kernel_solver.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <random>

using namespace conic;

namespace {

int parse_error_line(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const ParseError& e) {
    return e.line;
  }
  return -1;
}

/// Exact check of a kernel witness: Ax = 0, x ≥ 0 and supp(x) = S.
bool kernel_witness_holds(const Matrix& a, const ExactSupports& ex) {
  const RationalMatrix q = to_rational(a);
  if (ex.x.size() != static_cast<std::size_t>(a.cols())) return false;
  for (const auto& row : q) {
    Rational acc = 0;
    for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * ex.x[j];
    if (acc != 0) return false;
  }
  for (Index j = 0; j < a.cols(); ++j) {
    const bool in_s = std::count(ex.S.begin(), ex.S.end(), j) > 0;
    if (ex.x[j] < 0 || (ex.x[j] > 0) != in_s) return false;
  }
  return true;
}

/// Exact check of an image witness: Aᵀy ≥ 0 with supp(Aᵀy) = T.
bool image_witness_holds(const Matrix& a, const ExactSupports& ex) {
  const RationalMatrix q = to_rational(a);
  if (ex.y.size() != static_cast<std::size_t>(a.rows())) return false;
  for (Index j = 0; j < a.cols(); ++j) {
    Rational acc = 0;
    for (Index i = 0; i < a.rows(); ++i) acc += q[i][j] * ex.y[i];
    const bool in_t = std::count(ex.T.begin(), ex.T.end(), j) > 0;
    if (acc < 0 || (acc > 0) != in_t) return false;
  }
  return true;
}

Matrix mat(Index m, Index n, std::initializer_list<double> v) {
  Matrix a(m, n);
  auto it = v.begin();
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = *it++;
  return a;
}

}  // namespace

TEST_CASE("parsing examples") {
  const ConicInstance id = parse_instance("2 2\n1 0\n0 1\n");
  CHECK(id.A == Matrix::Identity(2, 2));
  CHECK(id.is_integer);
  CHECK(id.provenance == Provenance::parsed);

  const ConicInstance pair = parse_instance("1 2\n1 -1\n");
  CHECK(pair.A == mat(1, 2, {1, -1}));

  const ConicInstance frac = parse_instance("# leading comment\n1 2\n\n0.25 +3e-1\n# trailing\n");
  CHECK(frac.A == mat(1, 2, {0.25, 0.3}));
  CHECK_FALSE(frac.is_integer);
  CHECK(parse_instance("1 1\r\n7\r\n").A(0, 0) == 7);
}

TEST_CASE("parse errors carry the offending line") {
  CHECK(parse_error_line("") == 1);
  CHECK(parse_error_line("2\n") == 1);
  CHECK(parse_error_line("0 2\n") == 1);
  CHECK(parse_error_line("2 x\n1 2\n3 4\n") == 1);
  CHECK(parse_error_line("2 2\n1 0 0\n0 1\n") == 2);
  CHECK(parse_error_line("2 2\n1 0\n0 x\n") == 3);
  CHECK(parse_error_line("2 2\n1 0\n0 nan\n") == 3);
  CHECK(parse_error_line("2 2\n1 0\n0 inf\n") == 3);
  CHECK(parse_error_line("2 2\n1 0\n") == 2);
  CHECK(parse_error_line("# c\n2 2\n1 0\n\n0 1 5\n") == 5);
  CHECK(parse_error_line("1 1\n1\n2\n") == 3);
}

TEST_CASE("instance files round-trip") {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<int> small(-9, 9);
  std::uniform_real_distribution<double> real(-5, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = 1 + static_cast<Index>(rng() % 5);
    const Index n = 1 + static_cast<Index>(rng() % 8);
    Matrix a(m, n);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) a(i, j) = trial % 2 ? small(rng) : real(rng);
    const std::string text = write_instance(a, {"trial " + std::to_string(trial)});
    const ConicInstance back = parse_instance(text);
    CHECK(back.A == a);  // bit-exact
    CHECK(back.is_integer == (trial % 2 == 1));
    CHECK(write_instance(back.A, {"trial " + std::to_string(trial)}) == text);
  }
  // A hand-written file maps to its canonical form.
  CHECK(write_instance(parse_instance("1 3\n  1.0   -0.50 2e1\n").A) == "1 3\n1 -0.5 20\n");
}

TEST_CASE("number formatting") {
  CHECK(format_number(0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(3) == "3");
  CHECK(format_number(-12) == "-12");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-0.5) == "-0.5");
  for (double v : {1e20, 1.0 / 3, 6.02214076e23, 5e-324})
    CHECK(parse_instance("1 1\n" + format_number(v) + "\n").A(0, 0) == v);
}

TEST_CASE("certificate files") {
  CertificateFile c;
  c.kind = CertificateKind::image;
  c.vector = (Vector(2) << 0.5, -0.25).finished();
  c.support = {1};
  const std::string text = write_certificate(c);
  CHECK(text == "image\n0.5 -0.25\n2\n");
  const CertificateFile back = parse_certificate(text);
  CHECK(back.kind == CertificateKind::image);
  CHECK(back.vector == c.vector);
  CHECK(back.support == c.support);

  const CertificateFile empty = parse_certificate("kernel\n0 0\n\n");
  CHECK(empty.support.empty());
  CHECK(empty.kind == CertificateKind::kernel);

  auto line_of = [](const std::string& t) {
    try {
      parse_certificate(t);
    } catch (const ParseError& e) {
      return e.line;
    }
    return -1;
  };
  CHECK(line_of("") == 1);
  CHECK(line_of("maybe\n1\n1\n") == 1);
  CHECK(line_of("kernel\n") == 2);
  CHECK(line_of("kernel\n1 q\n1\n") == 2);
  CHECK(line_of("kernel\n1 1\n0\n") == 3);
  CHECK(line_of("kernel\n1 1\n1\nextra\n") == 4);
}

TEST_CASE("generator examples") {
  const ConicInstance pair = gen_kernel_feasible(1, 2, 0.5, 3);
  CHECK(pair.A.cwiseAbs() == Matrix::Ones(1, 2));
  CHECK(pair.A.sum() == 0);
  REQUIRE(pair.known_rho.has_value());
  CHECK(*pair.known_rho == doctest::Approx(-1.0));

  const ConicInstance single = gen_image_feasible(1, 1, 0.5, 3);
  CHECK(single.A == Matrix::Ones(1, 1));

  const ConicInstance k = gen_kernel_feasible(2, 4, 0.3, 11);
  CHECK(goffin_oracle(k.A) <= -0.3 + 1e-12);

  const ConicInstance deg = gen_degenerate(2, 3, 2, 5);
  REQUIRE(deg.known_supports.has_value());
  CHECK(deg.known_supports->S.size() == 2);
  CHECK(deg.known_supports->T.size() == 1);
  CHECK(deg.is_integer);

  CHECK_THROWS_AS(gen_degenerate(1, 3, 2, 0), PreconditionError);
  CHECK_THROWS_AS(gen_degenerate(2, 3, 3, 0), PreconditionError);
}

TEST_CASE("generators are deterministic") {
  CHECK(gen_kernel_feasible(3, 7, 0.1, 42).A == gen_kernel_feasible(3, 7, 0.1, 42).A);
  CHECK(gen_image_feasible(3, 7, 0.1, 42).A == gen_image_feasible(3, 7, 0.1, 42).A);
  CHECK(gen_degenerate(3, 7, 3, 42).A == gen_degenerate(3, 7, 3, 42).A);
  CHECK(gen_kernel_feasible(3, 7, 0.1, 42).A != gen_kernel_feasible(3, 7, 0.1, 43).A);
}

TEST_CASE("generator certifications") {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 30; ++trial) {
    const Index m = 2 + static_cast<Index>(trial % 4);
    const Index n = m + 2 + static_cast<Index>(rng() % 4);
    // Random draws with ρ far below zero get rare as m grows.
    const double target = m <= 3 ? 0.02 + 0.1 * static_cast<double>(trial % 3) : 0.02;

    const ConicInstance k = gen_kernel_feasible(m, n, target, rng());
    for (Index j = 0; j < n; ++j) CHECK(k.A.col(j).norm() == doctest::Approx(1.0));
    if (m <= 3) {
      REQUIRE(k.known_rho.has_value());
      CHECK(*k.known_rho <= -target);
      CHECK(goffin_oracle(k.A) == doctest::Approx(*k.known_rho).epsilon(1e-9));
    }
    CHECK(full_support_kernel(k.A).report.status == SolveStatus::solved);

    const ConicInstance im = gen_image_feasible(m, n, target, rng());
    REQUIRE(im.known_rho.has_value());
    CHECK(*im.known_rho == target);
    for (Index j = 0; j < n; ++j) CHECK(im.A.col(j).norm() == doctest::Approx(1.0));
    if (m <= 3) CHECK(goffin_oracle(im.A) >= target - 1e-9);

    const Index mm = 2 + static_cast<Index>(trial % 3);
    const Index nn = mm + 2 + static_cast<Index>(trial % 4);
    const ConicInstance d = gen_degenerate(mm, nn, 2 + static_cast<Index>(trial % 2), rng());
    const ExactSupports ex = exact_support_oracle(d.A);
    REQUIRE(d.known_supports.has_value());
    CHECK(d.known_supports->S == ex.S);
    CHECK(d.known_supports->T == ex.T);
    CHECK(is_integral(d.A));
  }
}

TEST_CASE("exact support oracle examples") {
  const ExactSupports pair = exact_support_oracle(mat(1, 2, {1, -1}));
  CHECK(pair.S == std::vector<Index>{0, 1});
  CHECK(pair.T.empty());

  const ExactSupports id = exact_support_oracle(Matrix::Identity(2, 2));
  CHECK(id.S.empty());
  CHECK(id.T == std::vector<Index>{0, 1});

  const Matrix worked = mat(2, 3, {1, -1, 1, 0, 0, 1});
  const ExactSupports w = exact_support_oracle(worked);
  CHECK(w.S == std::vector<Index>{0, 1});
  CHECK(w.T == std::vector<Index>{2});
  CHECK(kernel_witness_holds(worked, w));
  CHECK(image_witness_holds(worked, w));

  CHECK_THROWS_AS(exact_support_oracle(Matrix::Ones(2, 13)), UnsupportedInstance);
}

TEST_CASE("exact support oracle is self-dual with exact witnesses") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 120; ++trial) {
    const Index m = 1 + static_cast<Index>(rng() % 4);
    const Index n = 1 + static_cast<Index>(rng() % 8);
    const Matrix a = testsupport::random_integer_matrix(rng, m, n, -3, 3);
    const ExactSupports ex = exact_support_oracle(a);
    std::vector<Index> all(ex.S);
    all.insert(all.end(), ex.T.begin(), ex.T.end());
    std::sort(all.begin(), all.end());
    CHECK(static_cast<Index>(all.size()) == n);
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    CHECK(kernel_witness_holds(a, ex));
    CHECK(image_witness_holds(a, ex));
  }
}

TEST_CASE("Fourier-Motzkin elimination") {
  // 0 ≤ v ≤ 1.
  const RationalMatrix g = {{Rational(1)}, {Rational(-1)}};
  auto sol = fourier_motzkin_solve(g, {Rational(1), Rational(0)});
  REQUIRE(sol.has_value());
  CHECK((*sol)[0] >= 0);
  CHECK((*sol)[0] <= 1);
  // v ≤ −1 and v ≥ 0.
  CHECK_FALSE(fourier_motzkin_solve(g, {Rational(-1), Rational(0)}).has_value());
  // v₁ + v₂ ≤ 1, −v₁ ≤ −1, −v₂ ≤ −1 is empty; dropping the first row is not.
  const RationalMatrix g2 = {{Rational(1), Rational(1)}, {Rational(-1), Rational(0)}, {Rational(0), Rational(-1)}};
  CHECK_FALSE(fourier_motzkin_solve(g2, {Rational(1), Rational(-1), Rational(-1)}).has_value());
  CHECK(fourier_motzkin_solve(g2, {Rational(2), Rational(-1), Rational(-1)}).has_value());
}

TEST_CASE("LP reduction examples") {
  SUBCASE("x ≤ 1 is feasible") {
    const HomogenizedLP h = reduce_lp_feasibility({mat(1, 1, {1}), Vector::Ones(1)});
    CHECK(h.M == mat(1, 4, {1, -1, 1, -1}));
    CHECK(h.t_index == 3);
    const Vector x = Vector::Ones(4);
    CHECK((h.M * x).isZero(0));
    const auto rec = recover_lp_solution(h, x);
    REQUIRE(rec.has_value());
    CHECK((*rec)(0) == 0);
    const KernelResult r = max_support_kernel(h.M);
    CHECK(std::count(r.certificate.support.begin(), r.certificate.support.end(), h.t_index) == 1);
  }
  SUBCASE("0·x ≤ −1 is infeasible") {
    const HomogenizedLP h = reduce_lp_feasibility({mat(1, 1, {0}), Vector::Constant(1, -1)});
    CHECK(h.M == mat(1, 4, {0, 0, 1, 1}));
    const ExactSupports ex = exact_support_oracle(h.M);
    CHECK(std::count(ex.S.begin(), ex.S.end(), h.t_index) == 0);
    CHECK_FALSE(exact_lp_feasible(mat(1, 1, {0}), Vector::Constant(1, -1)).has_value());
  }
  SUBCASE("x ≤ −1 and x ≥ 0 is infeasible") {
    const Matrix a = mat(2, 1, {1, -1});
    const Vector b = (Vector(2) << -1, 0).finished();
    const HomogenizedLP h = reduce_lp_feasibility({a, b});
    const ExactSupports ex = exact_support_oracle(h.M);
    CHECK(std::count(ex.S.begin(), ex.S.end(), h.t_index) == 0);
    const KernelResult r = max_support_kernel(h.M);
    CHECK(std::count(r.certificate.support.begin(), r.certificate.support.end(), h.t_index) == 0);
    CHECK_FALSE(exact_lp_feasible(a, b).has_value());
  }
  CHECK_THROWS_AS(reduce_lp_feasibility({mat(1, 1, {1}), Vector::Ones(2)}), PreconditionError);
  CHECK_FALSE(recover_lp_solution(reduce_lp_feasibility({mat(1, 1, {1}), Vector::Ones(1)}), Vector::Zero(4)).has_value());
}

TEST_CASE("LP files") {
  const LPFeasibilityProblem p = parse_lp("2 1\n1 -1\n-1 0\n");
  CHECK(p.A == mat(2, 1, {1, -1}));
  CHECK(p.b == (Vector(2) << -1, 0).finished());
  CHECK_THROWS_AS(parse_lp("2 1\n1 -1\n"), ParseError);
  CHECK_THROWS_AS(parse_lp("1 1\n1\n"), ParseError);
}

TEST_CASE("LP verdicts through the kernel route match exact elimination") {
  std::mt19937_64 rng(74);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 1 + static_cast<Index>(rng() % 2);
    const Index m = 2 + static_cast<Index>(rng() % 2);
    const Matrix a = testsupport::random_integer_matrix(rng, m, d, -2, 2);
    const Vector b = testsupport::random_integer_matrix(rng, m, 1, -2, 2).col(0);
    const bool truth = exact_lp_feasible(a, b).has_value();
    const HomogenizedLP h = reduce_lp_feasibility({a, b});
    const KernelResult r = max_support_kernel(h.M);
    REQUIRE(r.report.status == SolveStatus::solved);
    const bool verdict = std::count(r.certificate.support.begin(), r.certificate.support.end(), h.t_index) == 1;
    CHECK(verdict == truth);
    if (verdict) {
      const auto x = recover_lp_solution(h, to_original_scale(h.M, r.certificate.x));
      REQUIRE(x.has_value());
      CHECK(((a * *x) - b).maxCoeff() <= 1e-8);
    }
    (truth ? feasible : infeasible)++;
  }
  CHECK(feasible >= 5);
  CHECK(infeasible >= 5);
}
