#include "doctest.h"

#include <cmath>

#include "lab/control.hpp"
#include "lab/errors.hpp"
#include "lab/rng.hpp"
#include "lab/state.hpp"

#include "test_oracles.hpp"

using namespace lab;

namespace {

ClassParams default_params(double p = 2.0) {
  ClassParams params;
  params.p = p;
  params.alpha = 0.5;
  params.beta = 2.0;
  return params;
}

ControlField identity_control(const GridSpec& g, const ClassParams& params) {
  std::vector<double> ones1(g.ny - 1, 1.0), ones2(g.nx - 1, 1.0);
  return make_diagonal_control(ones1, ones2, g, params);
}

GridDomain interior_box(const GridSpec& g) {
  return rasterize(ShapeSpec::BoxMargin(0.5 * g.h()), g);
}

NodeField random_state(const GridSpec& g, const GridDomain& dom, Rng& rng,
                       double amp = 1.0) {
  NodeField y = zero_nodes(g);
  for (int n = 0; n < g.nodes(); ++n) {
    if (dom.mask[n]) y[n] = rng.uniform(-amp, amp);
  }
  return y;
}

}  // namespace

TEST_CASE("wp_norm: zero, analytic linear field, exact homogeneity") {
  const GridSpec g{129, 129};
  CHECK(wp_norm(g, zero_nodes(g), 2.0) == 0.0);

  NodeField y(g.nodes());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) y[g.node(i, j)] = g.x(i);
  }
  // grad = (1, 0): integral of |grad|^2 + |y|^2 over the unit box is 1 + 1/3.
  CHECK(wp_norm(g, y, 2.0) ==
        doctest::Approx(std::sqrt(1.0 + 1.0 / 3.0)).epsilon(0.02));

  NodeField cy = y;
  for (auto& v : cy) v *= -3.5;
  CHECK(wp_norm(g, cy, 2.0) == 3.5 * wp_norm(g, y, 2.0));
}

TEST_CASE("assemble_residual: zero everywhere for the zero problem") {
  const GridSpec g{9, 9};
  const ClassParams params = default_params();
  const GridDomain dom = interior_box(g);
  EllipticProblem prob{identity_control(g, params), zero_nodes(g), dom, params, {}};
  const NodeField r = assemble_residual(prob, zero_nodes(g));
  for (double v : r) CHECK(v == 0.0);
}

TEST_CASE("assemble_residual: reproduces the hand 5-point stencil at p=2, U=I") {
  const GridSpec g{5, 5};
  const double h = g.h();
  const ClassParams params = default_params();
  const GridDomain dom = interior_box(g);

  Rng rng(4311);
  NodeField y = random_state(g, dom, rng);
  NodeField f = zero_nodes(g);
  for (int n = 0; n < g.nodes(); ++n) f[n] = rng.uniform(-1.0, 1.0);

  EllipticProblem prob{identity_control(g, params), f, dom, params, {}};
  const NodeField r = assemble_residual(prob, y);

  // Independent hand assembly: r = (-Laplace_h y + y - f) * h^2 inside.
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int n = g.node(i, j);
      if (!dom.mask[n]) {
        CHECK(r[n] == 0.0);
        continue;
      }
      const double lap = (y[g.node(i - 1, j)] + y[g.node(i + 1, j)] +
                          y[g.node(i, j - 1)] + y[g.node(i, j + 1)] -
                          4.0 * y[n]) /
                         (h * h);
      const double expected = (-lap + y[n] - f[n]) * h * h;
      CHECK(r[n] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("energy: zero at zero and gradient matches the residual") {
  const GridSpec g{9, 9};
  for (double p : {2.0, 3.0, 4.0}) {
    const ClassParams params = default_params(p);
    const GridDomain dom = interior_box(g);
    Rng rng(17 + static_cast<std::uint64_t>(p));
    std::vector<double> p1(g.ny - 1), p2(g.nx - 1);
    for (auto& v : p1) v = rng.uniform(params.alpha, params.beta);
    for (auto& v : p2) v = rng.uniform(params.alpha, params.beta);
    const ControlField U = make_diagonal_control(p1, p2, g, params);
    NodeField f = zero_nodes(g);
    for (int n = 0; n < g.nodes(); ++n) f[n] = rng.uniform(-1.0, 1.0);
    EllipticProblem prob{U, f, dom, params, {}};

    CHECK(energy(prob, zero_nodes(g)) == 0.0);

    NodeField y = random_state(g, dom, rng);
    const NodeField r = assemble_residual(prob, y);
    // Central differences at 20 random inside coordinates.
    const double eps = 1e-5;
    for (int rep = 0; rep < 20; ++rep) {
      int n;
      do {
        n = rng.uniform_int(0, g.nodes() - 1);
      } while (!dom.mask[n]);
      NodeField yp = y, ym = y;
      yp[n] += eps;
      ym[n] -= eps;
      const double fd = (energy(prob, yp) - energy(prob, ym)) / (2.0 * eps);
      CHECK(fd == doctest::Approx(r[n]).epsilon(1e-6));
    }
  }
}

TEST_CASE("energy: rejects non-diagonal controls") {
  const GridSpec g{9, 9};
  const ClassParams params = default_params(3.0);
  const GridDomain dom = interior_box(g);
  ControlField U;
  U.grid = g;
  U.form = ControlField::Form::symmetric;
  U.a11.assign(g.cells(), 1.0);
  U.a22.assign(g.cells(), 1.0);
  U.a12.assign(g.cells(), 0.2);
  EllipticProblem prob{U, zero_nodes(g), dom, params, {}};
  CHECK_THROWS_AS(energy(prob, zero_nodes(g)), UnsupportedFormError);
}

TEST_CASE("solve_state: zero forcing gives the zero solution") {
  const GridSpec g{17, 17};
  for (double p : {2.0, 3.0}) {
    const ClassParams params = default_params(p);
    const GridDomain dom = rasterize(ShapeSpec::Disk(0.5, 0.5, 0.3), g);
    EllipticProblem prob{identity_control(g, params), zero_nodes(g), dom, params, {}};
    const StateField y = solve_state(prob);
    for (double v : y.values) CHECK(v == 0.0);
  }
}

TEST_CASE("solve_state: manufactured solution converges at second order") {
  // -div(grad y) + y = f with y* = sin(pi x1) sin(pi x2).
  auto l2_error = [](int n) {
    const GridSpec g{n, n};
    const ClassParams params = default_params(2.0);
    const GridDomain dom = rasterize(ShapeSpec::BoxMargin(0.5 * g.h()), g);
    NodeField f = zero_nodes(g);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        f[g.node(i, j)] = (2.0 * M_PI * M_PI + 1.0) * std::sin(M_PI * g.x(i)) *
                          std::sin(M_PI * g.y(j));
      }
    }
    std::vector<double> ones1(g.ny - 1, 1.0), ones2(g.nx - 1, 1.0);
    EllipticProblem prob{make_diagonal_control(ones1, ones2, g, params), f, dom,
                         params, {}};
    const StateField y = solve_state(prob);
    double err2 = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const double exact = std::sin(M_PI * g.x(i)) * std::sin(M_PI * g.y(j));
        const double d = y.values[g.node(i, j)] - (dom.mask[g.node(i, j)] ? exact : 0.0);
        err2 += d * d;
      }
    }
    return g.h() * std::sqrt(err2);
  };
  const double e33 = l2_error(33);
  const double e65 = l2_error(65);
  const double ratio = e33 / e65;
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("solve_state: p=4 single interior node matches the scalar root") {
  const GridSpec g{3, 3};
  const double h = g.h();
  const ClassParams params = default_params(4.0);
  const GridDomain dom = interior_box(g);
  const double fval = 3.0;
  NodeField f = zero_nodes(g);
  f[g.node(1, 1)] = fval;
  EllipticProblem prob{identity_control(g, params), f, dom, params, {}};
  const StateField y = solve_state(prob);

  // Hand-derived scalar equation: the four gradient edges contribute
  // 4 y^3 / h^4 and the mass term y^3, so (4/h^4 + 1) y^3 = f.
  const double c = 4.0 / (h * h * h * h) + 1.0;
  const double root = oracle::bisect([&](double t) { return c * t * t * t - fval; },
                                     0.0, 10.0);
  CHECK(y.values[g.node(1, 1)] == doctest::Approx(root).epsilon(1e-9));
}

TEST_CASE("solve_state: residual postcondition and determinism") {
  const GridSpec g{17, 17};
  for (double p : {2.0, 3.0, 4.0}) {
    const ClassParams params = default_params(p);
    const GridDomain dom = rasterize(ShapeSpec::Disk(0.5, 0.5, 0.35), g);
    Rng rng(1000 + static_cast<std::uint64_t>(p));
    std::vector<double> p1(g.ny - 1), p2(g.nx - 1);
    for (auto& v : p1) v = rng.uniform(params.alpha, params.beta);
    for (auto& v : p2) v = rng.uniform(params.alpha, params.beta);
    NodeField f = zero_nodes(g);
    for (int n = 0; n < g.nodes(); ++n) f[n] = rng.uniform(-2.0, 2.0);
    EllipticProblem prob{make_diagonal_control(p1, p2, g, params), f, dom, params, {}};

    const StateField a = solve_state(prob);
    const StateField b = solve_state(prob);
    CHECK(a.values == b.values);  // bit-identical
    CHECK(a.stats.residual_norm <= prob.options.tolerance * 2.0 * 1.0000001);
    const double rmax = max_abs(assemble_residual(prob, a.values));
    CHECK(rmax / (g.h() * g.h()) <=
          prob.options.tolerance * std::max(1.0, 2.0) + 1e-15);
    // Newton logs a nonincreasing energy path (ulp jitter allowed at the
    // residual-acceptance floor).
    for (std::size_t k = 1; k < a.stats.energy_log.size(); ++k) {
      CHECK(a.stats.energy_log[k] <=
            a.stats.energy_log[k - 1] +
                1e-12 * std::max(1.0, std::abs(a.stats.energy_log[k - 1])));
    }
  }
}

TEST_CASE("solve_state: Picard path handles symmetric coefficients at p=3") {
  const GridSpec g{9, 9};
  const ClassParams params = default_params(3.0);
  const GridDomain dom = interior_box(g);
  ControlField U;
  U.grid = g;
  U.form = ControlField::Form::symmetric;
  U.a11.assign(g.cells(), 1.0);
  U.a22.assign(g.cells(), 1.2);
  U.a12.assign(g.cells(), 0.15);
  CHECK(check_class(U, params, 500, 5).all_ok());
  NodeField f = zero_nodes(g);
  for (int n = 0; n < g.nodes(); ++n) f[n] = 1.0;
  EllipticProblem prob{U, f, dom, params, {}};
  const StateField y = solve_state(prob);
  CHECK(y.stats.method == "picard");
  const double rmax = max_abs(assemble_residual(prob, y.values));
  CHECK(rmax / (g.h() * g.h()) <= prob.options.tolerance * 1.0000001);
  const StateField y2 = solve_state(prob);
  CHECK(y.values == y2.values);
}

TEST_CASE("solve_state: uniqueness probe from two initial guesses") {
  const GridSpec g{17, 17};
  for (double p : {2.0, 3.0}) {
    const ClassParams params = default_params(p);
    const GridDomain dom = rasterize(ShapeSpec::Disk(0.5, 0.5, 0.35), g);
    Rng rng(77);
    NodeField f = zero_nodes(g);
    for (int n = 0; n < g.nodes(); ++n) f[n] = rng.uniform(-1.0, 1.0);
    EllipticProblem prob{identity_control(g, params), f, dom, params, {}};
    const StateField a = solve_state(prob);
    EllipticProblem prob2 = prob;
    prob2.options.initial_guess = random_state(g, dom, rng, 0.5);
    const StateField b = solve_state(prob2);
    NodeField d(g.nodes());
    for (int n = 0; n < g.nodes(); ++n) d[n] = a.values[n] - b.values[n];
    CHECK(wp_norm(g, d, p) <= 10.0 * prob.options.tolerance);
  }
}

TEST_CASE("discrete operator: monotone and coercive on seeded fields") {
  const GridSpec g{9, 9};
  const GridDomain dom = interior_box(g);
  for (double p : {2.0, 3.0, 4.0}) {
    const ClassParams params = default_params(p);
    Rng rng(31337 + static_cast<std::uint64_t>(p));
    std::vector<double> p1(g.ny - 1), p2(g.nx - 1);
    for (auto& v : p1) v = rng.uniform(params.alpha, params.beta);
    for (auto& v : p2) v = rng.uniform(params.alpha, params.beta);
    const ControlField U = make_diagonal_control(p1, p2, g, params);
    const double m = std::min(params.alpha, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
      NodeField y1 = random_state(g, dom, rng);
      NodeField y2 = random_state(g, dom, rng);
      const NodeField a1 = apply_operator(U, dom, y1, p);
      const NodeField a2 = apply_operator(U, dom, y2, p);
      double pair = 0.0;
      for (int n = 0; n < g.nodes(); ++n) pair += (a1[n] - a2[n]) * (y1[n] - y2[n]);
      CHECK(pair >= -1e-10);

      double coer = 0.0;
      for (int n = 0; n < g.nodes(); ++n) coer += a1[n] * y1[n];
      CHECK(coer >= m * std::pow(wp_norm(g, y1, p), p) - 1e-10);
    }
  }
}

TEST_CASE("apriori_check: holds for zero data and seeded problems") {
  const GridSpec g{17, 17};
  const GridDomain dom = rasterize(ShapeSpec::Disk(0.5, 0.5, 0.35), g);
  {
    const ClassParams params = default_params(2.0);
    EllipticProblem prob{identity_control(g, params), zero_nodes(g), dom, params, {}};
    const StateField y = solve_state(prob);
    const AprioriReport rep = apriori_check(y, prob.f, params);
    CHECK(rep.pass);
    CHECK(rep.lhs == 0.0);
  }
  for (double p : {2.0, 3.0}) {
    const ClassParams params = default_params(p);
    Rng rng(555 + static_cast<std::uint64_t>(p));
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> p1(g.ny - 1), p2(g.nx - 1);
      for (auto& v : p1) v = rng.uniform(params.alpha, params.beta);
      for (auto& v : p2) v = rng.uniform(params.alpha, params.beta);
      NodeField f = zero_nodes(g);
      for (int n = 0; n < g.nodes(); ++n) f[n] = rng.uniform(-3.0, 3.0);
      EllipticProblem prob{make_diagonal_control(p1, p2, g, params), f, dom, params,
                           {}};
      const StateField y = solve_state(prob);
      const AprioriReport report = apriori_check(y, f, params);
      CHECK(report.pass);
    }
  }
}

TEST_CASE("solve_state: non-convergence carries the last residual") {
  const GridSpec g{17, 17};
  const ClassParams params = default_params(3.0);
  const GridDomain dom = interior_box(g);
  NodeField f(g.nodes(), 1.0);
  EllipticProblem prob{identity_control(g, params), f, dom, params, {}};
  prob.options.max_iterations = 1;
  try {
    solve_state(prob);
    FAIL("expected SolverError");
  } catch (const SolverError& err) {
    CHECK(err.last_residual > 0.0);
  }
}
