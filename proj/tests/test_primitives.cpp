#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "memsim/quadrature.hpp"
#include "memsim/roots.hpp"
#include "memsim/signals.hpp"
#include "memsim/windows.hpp"

using namespace memsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("window values against closed forms") {
  const WindowSpec benderli{WindowKind::Benderli, 1, false};
  const WindowSpec joglekar{WindowKind::Joglekar, 1, false};
  const WindowSpec joglekar7{WindowKind::Joglekar, 7, false};
  const WindowSpec biolek{WindowKind::Biolek, 1, false};
  const WindowSpec shin{WindowKind::Shin, 1, false};

  for (double x : {0.0, 0.1, 0.25, 0.5, 0.8, 0.999, 1.0}) {
    CHECK_THAT(eval_window(benderli, x, 1), WithinAbs(x * (1 - x), 1e-15));
    CHECK_THAT(eval_window(joglekar, x, 1), WithinAbs(1 - std::pow(2 * x - 1, 2), 1e-15));
    CHECK_THAT(eval_window(joglekar7, x, -1), WithinAbs(1 - std::pow(2 * x - 1, 14), 1e-14));
    CHECK_THAT(eval_window(biolek, x, 1), WithinAbs(1 - x * x, 1e-15));
    CHECK_THAT(eval_window(biolek, x, -1), WithinAbs(1 - (x - 1) * (x - 1), 1e-15));
  }
  CHECK(eval_window(shin, 0.3, 1) == 1.0);
  CHECK(eval_window(shin, 1.0, 1) == 0.0);
  CHECK(eval_window(shin, 0.3, -1) == 1.0);
  CHECK(eval_window(shin, 0.0, -1) == 0.0);
}

TEST_CASE("windows stay in [0, 1] and reject states outside it") {
  for (WindowKind k : {WindowKind::Benderli, WindowKind::Joglekar, WindowKind::Biolek, WindowKind::Shin}) {
    const WindowSpec w{k, 3, false};
    for (int j = 0; j <= 1000; ++j) {
      const double x = j / 1000.0;
      for (int s : {-1, 1}) {
        const double f = eval_window(w, x, s);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
      }
    }
    CHECK_THROWS_AS(eval_window(w, -1e-12, 1), ValidationError);
    CHECK_THROWS_AS(eval_window(w, 1.0 + 1e-12, 1), ValidationError);
  }
}

TEST_CASE("Joglekar window near the edges keeps relative accuracy") {
  // 1 - (1 - 2x)^2 = 4x - 4x^2; direct subtraction loses everything at x = 1e-12.
  const WindowSpec w{WindowKind::Joglekar, 1, false};
  CHECK_THAT(eval_window(w, 1e-12, 1), WithinRel(4e-12 - 4e-24, 1e-10));
}

TEST_CASE("triangular sweep breakpoints and periodic sampling") {
  const Waveform w = triangular_sweep(2.0, -1.0, 10.0, 3);
  CHECK_THAT(w.period(), WithinAbs(0.6, 1e-15));
  CHECK_THAT(w.sample(0.1), WithinAbs(1.0, 1e-12));
  CHECK_THAT(w.sample(0.2), WithinAbs(2.0, 1e-12));
  CHECK_THAT(w.sample(0.35), WithinAbs(0.5, 1e-12));
  CHECK_THAT(w.sample(0.6 + 0.1), WithinAbs(1.0, 1e-12));
  CHECK_THAT(w.duration(), WithinAbs(1.8, 1e-15));
  CHECK_THAT(w.next_breakpoint_after(0.45), WithinAbs(0.5, 1e-15));
  CHECK_THAT(w.next_breakpoint_after(0.55), WithinAbs(0.6, 1e-12));
  CHECK_THAT(w.next_breakpoint_after(0.6), WithinAbs(0.8, 1e-12));

  const Waveform n = triangular_sweep(1.0, -1.0, 1.0, 1, StartPolarity::Negative);
  CHECK_THAT(n.sample(0.5), WithinAbs(-0.5, 1e-15));
  CHECK_THAT(w.negated().sample(0.2), WithinAbs(-2.0, 1e-12));
}

TEST_CASE("waveform construction is validated") {
  CHECK_THROWS_AS(triangular_sweep(1.0, -1.0, 0.0, 1), ValidationError);
  CHECK_THROWS_AS(triangular_sweep(1.0, 1.0, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(Waveform({{0.0, 0.0}, {1.0, 1.0}, {1.0, 2.0}}, 0.0, "dup"), ValidationError);
  CHECK_THROWS_AS(Waveform({{0.0, 0.0}, {1.0, 1.0}}, 1.0, "open"), ValidationError);
  const Waveform p = rectangular_pulse(0.7, 1.0);
  CHECK(p.sample(0.5) == 0.7);
  CHECK_THROWS_AS(p.sample(5.0), ValidationError);
}

TEST_CASE("adaptive quadrature on known integrals") {
  CHECK_THAT(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi).value,
             WithinRel(2.0, 1e-12));
  CHECK_THAT(integrate_adaptive([](double x) { return 1.0 / x; }, 1e-6, 1.0).value,
             WithinRel(std::log(1e6), 1e-10));
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return 1.0 / (x * x); }, 0.0, 1.0), NumericalError);
}

TEST_CASE("solve_scalar finds the real root of x^3 - 2x - 5") {
  const double root = 2.0945514815423265;  // Wallis' cubic
  auto f = [](double x) { return x * x * x - 2 * x - 5; };
  for (RootMethod m : {RootMethod::NewtonBisection, RootMethod::Bisection}) {
    const RootResult r = solve_scalar(f, 0.0, 3.0, 1e-14, 200, m);
    CHECK_THAT(r.root, WithinAbs(root, 1e-13));
  }
  const RootResult nb = solve_scalar(f, 0.0, 3.0, 1e-14, 200, RootMethod::NewtonBisection);
  const RootResult bi = solve_scalar(f, 0.0, 3.0, 1e-14, 200, RootMethod::Bisection);
  CHECK(nb.iterations < bi.iterations);
}

TEST_CASE("solve_scalar treats infinite residuals as side markers") {
  // Undefined above 1.5, where the residual reports +inf.
  auto f = [](double x) { return x > 1.5 ? INFINITY : x - 1.2; };
  CHECK_THAT(solve_scalar(f, 0.0, 3.0, 1e-14, 200).root, WithinAbs(1.2, 1e-12));
  CHECK_THROWS_AS(solve_scalar([](double x) { return x + 1; }, 0.0, 1.0, 1e-12, 50), ValidationError);
}
