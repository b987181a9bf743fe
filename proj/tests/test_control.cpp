#include "doctest.h"

#include <cmath>

#include "lab/control.hpp"
#include "lab/errors.hpp"
#include "lab/rng.hpp"

using namespace lab;

namespace {

ClassParams default_params(double p = 2.0) {
  ClassParams params;
  params.p = p;
  params.alpha = 0.5;
  params.beta = 2.0;
  return params;
}

ControlField random_diagonal(const GridSpec& g, const ClassParams& params, Rng& rng) {
  std::vector<double> p1(g.ny - 1), p2(g.nx - 1);
  for (auto& v : p1) v = rng.uniform(params.alpha, params.beta);
  for (auto& v : p2) v = rng.uniform(params.alpha, params.beta);
  return make_diagonal_control(p1, p2, g, params);
}

}  // namespace

TEST_CASE("make_diagonal_control: unit profiles give the identity field") {
  const GridSpec g{9, 9};
  const ClassParams params = default_params();
  std::vector<double> ones1(g.ny - 1, 1.0), ones2(g.nx - 1, 1.0);
  const ControlField U = make_diagonal_control(ones1, ones2, g, params);
  for (int c = 0; c < g.cells(); ++c) {
    CHECK(U.a11[c] == 1.0);
    CHECK(U.a22[c] == 1.0);
    CHECK(U.off(c) == 0.0);
  }
  const ClassReport rep = check_class(U, params, 200, 99);
  CHECK(rep.all_ok());
}

TEST_CASE("make_diagonal_control: a11 varies only along x2") {
  const GridSpec g{17, 17};
  const ClassParams params = default_params();
  std::vector<double> p1(g.ny - 1), p2(g.nx - 1, 1.0);
  for (int j = 0; j < g.ny - 1; ++j) {
    p1[j] = 0.5 + 1.5 * static_cast<double>(j) / (g.ny - 2);
  }
  const ControlField U = make_diagonal_control(p1, p2, g, params);
  for (int j = 0; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      CHECK(U.a11[g.cell(i, j)] == U.a11[g.cell(i - 1, j)]);
    }
  }
  // Axis-constant profiles make both rows divergence free; the weak
  // divergence must vanish exactly at interior nodes.
  const RowDivergence dv = row_divergence(U);
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      CHECK(dv.row1[g.node(i, j)] == 0.0);
      CHECK(dv.row2[g.node(i, j)] == 0.0);
    }
  }
}

TEST_CASE("make_diagonal_control: seeded feasible profiles pass check_class") {
  const GridSpec g{17, 17};
  for (double p : {2.0, 3.0, 4.0}) {
    const ClassParams params = default_params(p);
    Rng rng(2025);
    const ControlField U = random_diagonal(g, params, rng);
    const ClassReport rep = check_class(U, params, 1000, 77);
    CHECK(rep.all_ok());
  }
}

TEST_CASE("make_diagonal_control: empty feasible interval is an error") {
  const GridSpec g{9, 9};
  ClassParams params = default_params();
  params.xi_upper_const = 0.25;  // below alpha -> max(alpha, xi1) > min(beta, xi2)
  std::vector<double> ones1(g.ny - 1, 1.0), ones2(g.nx - 1, 1.0);
  CHECK_THROWS_AS(make_diagonal_control(ones1, ones2, g, params),
                  InfeasibleControlError);
}

TEST_CASE("project_box: feasible fields come back bit-identical") {
  const GridSpec g{17, 17};
  const ClassParams params = default_params();
  Rng rng(5);
  const ControlField U = random_diagonal(g, params, rng);
  const ControlField V = project_box(U, params);
  CHECK(U.a11 == V.a11);
  CHECK(U.a22 == V.a22);
}

TEST_CASE("project_box: clamps to the tight bound") {
  const GridSpec g{9, 9};
  ClassParams params = default_params();
  params.xi_upper_const = 2.0;
  std::vector<double> p1(g.ny - 1, 10.0), p2(g.nx - 1, 10.0);
  const ControlField U = make_diagonal_control(p1, p2, g, params);
  for (int c = 0; c < g.cells(); ++c) {
    CHECK(U.a11[c] == 2.0);
    CHECK(U.a22[c] == 2.0);
  }
}

TEST_CASE("project_box: idempotent and nonexpansive on general symmetric fields") {
  const GridSpec g{9, 9};
  const ClassParams params = default_params();
  Rng rng(31);
  ControlField U;
  U.grid = g;
  U.form = ControlField::Form::symmetric;
  U.a11.resize(g.cells());
  U.a22.resize(g.cells());
  U.a12.resize(g.cells());
  ControlField V = U;
  for (int c = 0; c < g.cells(); ++c) {
    U.a11[c] = rng.uniform(-5.0, 5.0);
    U.a22[c] = rng.uniform(-5.0, 5.0);
    U.a12[c] = rng.uniform(-5.0, 5.0);
    V.a11[c] = rng.uniform(-5.0, 5.0);
    V.a22[c] = rng.uniform(-5.0, 5.0);
    V.a12[c] = rng.uniform(-5.0, 5.0);
  }
  const ControlField PU = project_box(U, params);
  const ControlField PPU = project_box(PU, params);
  CHECK(PU.a11 == PPU.a11);
  CHECK(PU.a22 == PPU.a22);
  CHECK(PU.a12 == PPU.a12);

  const ControlField PV = project_box(V, params);
  for (int c = 0; c < g.cells(); ++c) {
    CHECK(std::abs(PU.a11[c] - PV.a11[c]) <= std::abs(U.a11[c] - V.a11[c]) + 1e-15);
    CHECK(std::abs(PU.a22[c] - PV.a22[c]) <= std::abs(U.a22[c] - V.a22[c]) + 1e-15);
    CHECK(std::abs(PU.a12[c] - PV.a12[c]) <= std::abs(U.a12[c] - V.a12[c]) + 1e-15);
  }
}

TEST_CASE("check_class: identity field has zero coercivity margin at alpha = 1") {
  const GridSpec g{9, 9};
  ClassParams params = default_params();
  params.alpha = 1.0;
  std::vector<double> ones1(g.ny - 1, 1.0), ones2(g.nx - 1, 1.0);
  const ControlField U = make_diagonal_control(ones1, ones2, g, params);
  for (double p : {2.0, 3.0, 4.0}) {
    ClassParams pp = params;
    pp.p = p;
    const ClassReport rep = check_class(U, pp, 50, 11);
    CHECK(rep.coercive_ok);
    // Equality case: the canonical witness e1 realizes margin 0; random
    // samples can wobble by one ulp through the two pow() routes.
    CHECK(std::abs(rep.coercive_margin) <= 1e-14);
  }
}

TEST_CASE("check_class: oversized off-diagonal entry fails growth with a cell index") {
  const GridSpec g{9, 9};
  const ClassParams params = default_params();
  ControlField U;
  U.grid = g;
  U.form = ControlField::Form::symmetric;
  U.a11.assign(g.cells(), 1.0);
  U.a22.assign(g.cells(), 1.0);
  U.a12.assign(g.cells(), 0.0);
  const int bad_cell = g.cell(3, 4);
  U.a12[bad_cell] = 1.5 * params.beta;
  const ClassReport rep = check_class(U, params, 100, 3);
  CHECK_FALSE(rep.growth_ok);
  CHECK(rep.worst_growth_cell == bad_cell);
}

TEST_CASE("check_class: diagonal monotonicity margin never goes below -1e-12") {
  const GridSpec g{9, 9};
  for (double p : {2.0, 2.5, 3.0, 4.0}) {
    const ClassParams params = default_params(p);
    Rng rng(static_cast<std::uint64_t>(p * 1000));
    const ControlField U = random_diagonal(g, params, rng);
    const ClassReport rep = check_class(U, params, 1000, 4242);
    CHECK(rep.monotone_margin >= -1e-12);
  }
}

TEST_CASE("check_class: report is reproducible from its seed") {
  const GridSpec g{9, 9};
  const ClassParams params = default_params(3.0);
  Rng rng(8);
  const ControlField U = random_diagonal(g, params, rng);
  const ClassReport a = check_class(U, params, 500, 909);
  const ClassReport b = check_class(U, params, 500, 909);
  CHECK(a.monotone_margin == b.monotone_margin);
  CHECK(a.coercive_margin == b.coercive_margin);
}

TEST_CASE("row_divergence: linear a11 has unit divergence density inside") {
  const GridSpec g{33, 33};
  ControlField U;
  U.grid = g;
  U.form = ControlField::Form::diagonal;
  U.a11.resize(g.cells());
  U.a22.assign(g.cells(), 0.0);
  for (int j = 0; j < g.ny - 1; ++j) {
    for (int i = 0; i < g.nx - 1; ++i) {
      U.a11[g.cell(i, j)] = g.cell_cx(i);  // a11 = x1 at cell centers
    }
  }
  const RowDivergence dv = row_divergence(U);
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      CHECK(dv.row1[g.node(i, j)] == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("row_divergence: constant symmetric field is divergence free inside") {
  const GridSpec g{17, 17};
  ControlField U;
  U.grid = g;
  U.form = ControlField::Form::symmetric;
  U.a11.assign(g.cells(), 1.3);
  U.a22.assign(g.cells(), 0.7);
  U.a12.assign(g.cells(), 0.4);
  const RowDivergence dv = row_divergence(U);
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      CHECK(dv.row1[g.node(i, j)] == 0.0);
      CHECK(dv.row2[g.node(i, j)] == 0.0);
    }
  }
}

TEST_CASE("control serialization carries the reduced profiles") {
  const GridSpec g{9, 9};
  const ClassParams params = default_params();
  Rng rng(64);
  const ControlField U = random_diagonal(g, params, rng);
  const std::string js = control_to_json(U, params);
  CHECK(js.find("\"form\": \"diagonal\"") != std::string::npos);
  CHECK(js.find("profile_a11_of_x2") != std::string::npos);
}
