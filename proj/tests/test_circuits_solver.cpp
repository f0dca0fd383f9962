#include <catch_amalgamated.hpp>

#include <cmath>

#include "memsim/circuits.hpp"
#include "memsim/eval.hpp"
#include "memsim/solver.hpp"

using namespace memsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Device linear_device(WindowKind k, double x0) {
  Device d = make_device("linear-" + std::string(to_string(k)));
  set_initial_state(d, x0);
  return d;
}

// Locate the sign change of f on [lo, hi] with n uniform cells; returns the cell midpoint.
template <class F>
double grid_root(F f, double lo, double hi, int n) {
  double a = lo, fa = f(lo);
  const double h = (hi - lo) / n;
  for (int j = 1; j <= n; ++j) {
    const double b = lo + j * h;
    const double fb = f(b);
    if ((fa <= 0.0) != (fb <= 0.0)) return 0.5 * (a + b);
    a = b;
    fa = fb;
  }
  FAIL("no sign change on the grid");
  return NAN;
}

}  // namespace

TEST_CASE("single linear device obeys Ohm's law with series resistance") {
  const Device d = linear_device(WindowKind::Joglekar, 0.3);
  const CircuitSystem sys = single_device_system(d, 500.0);
  const OperatingPoint op = sys.partition({0.3, 0.0}, 2.0);
  const double r = 16000.0 - 15900.0 * 0.3;
  CHECK_THAT(op.i, WithinRel(2.0 / (r + 500.0), 1e-14));
  CHECK_THAT(op.v_a, WithinRel(2.0 * r / (r + 500.0), 1e-14));
}

TEST_CASE("anti-serial split matches a 10^6-point grid scan") {
  LaihoParams p;
  p.a2 = 3e-8;
  p.b2 = 2.0;
  const Device d{"laiho", p};
  const State x{0.3, 0.6};
  const CircuitSystem sys = crs_system(d, d, x[0], x[1]);
  for (double v : {2.0, -1.5}) {
    // Branch-frame currents written out per orientation: A forward, B reversed.
    auto ia = [&](double va) { return sinh_current(p, x[0], va); };
    auto ib = [&](double vb) { return -sinh_current(p, x[1], -vb); };
    const double scan = grid_root([&](double va) { return ia(va) - ib(v - va); }, std::min(0.0, v), std::max(0.0, v),
                                  1'000'000);
    const OperatingPoint op = sys.partition(x, v);
    CHECK_THAT(op.v_a, WithinAbs(scan, std::abs(v) / 1e6));
    CHECK_THAT(op.v_a + op.v_b, WithinAbs(v, 1e-15));
    CHECK_THAT(op.i, WithinRel(ia(op.v_a), 1e-12));
    CHECK_THAT(op.i, WithinRel(ib(op.v_b), 1e-9));
  }
}

TEST_CASE("Pickett pair: warm-started Newton agrees with the nested solve and a grid scan") {
  PickettParams p;
  p.barrier_form = BarrierForm::Simmons;
  const Device d{"pickett", p};
  const State x{1.3e-9, 1.7e-9};
  const double v = 1.5, r_ext = 2400.0;

  const CircuitSystem cold = crs_system(d, d, x[0], x[1], r_ext);
  const OperatingPoint nested = cold.partition(x, v);  // first call: nested bisection route

  const CircuitSystem warm = crs_system(d, d, x[0], x[1], r_ext);
  warm.partition(x, 1.49);                            // seeds the gap-voltage guess
  const OperatingPoint newton = warm.partition(x, v);  // 2D Newton route
  CHECK_THAT(newton.v_a, WithinAbs(nested.v_a, 1e-10));
  CHECK_THAT(newton.i, WithinRel(nested.i, 1e-8));

  auto residual = [&](double va) {
    const double ia = cold.branch_current(0, x[0], va);
    return ia - cold.branch_current(1, x[1], v - va - ia * r_ext);
  };
  const double coarse = grid_root(residual, 0.0, v, 2000);
  const double cell = v / 2000;
  const double fine = grid_root(residual, coarse - cell, coarse + cell, 100000);
  CHECK_THAT(nested.v_a, WithinAbs(fine, 2 * cell / 100000));
  CHECK_THAT(nested.v_a + nested.v_b + nested.i * r_ext, WithinAbs(v, 1e-12));
}

TEST_CASE("reversed single device equals CRS member behind a 0-ohm resistor") {
  const Device d{"yakopcic", YakopcicParams{}};
  const Device zero{"short", Resistor{0.0}};
  const Waveform w = triangular_sweep(3.0, -3.0, 10.0, 1);
  const SolverConfig cfg;
  const Trace single = integrate(single_device_system(d, 0.0), w.negated(), w.duration(), cfg);
  const Trace pair = integrate(crs_system(zero, d, 0.0, 0.01), w, w.duration(), cfg);
  // Device B's own-frame drive is -w: same state history, mirrored branch current.
  CHECK(single.size() == pair.size());
  double worst = 0.0, i_scale = 0.0;
  for (std::size_t r = 0; r < std::min(single.size(), pair.size()); ++r) {
    worst = std::max(worst, std::abs(single.x[0][r] - pair.x[1][r]));
    i_scale = std::max(i_scale, std::abs(single.i[r]));
    CHECK_THAT(pair.i[r], WithinAbs(-single.i[r], 1e-12 * std::max(1e-12, std::abs(single.i[r]))));
  }
  CHECK(worst == 0.0);
}

TEST_CASE("pulse SET time of a windowless linear device matches K2 / V") {
  const Device d = linear_device(WindowKind::Shin, 0.0);
  KineticsOptions o;
  o.t_end = 10.0;
  const KineticsCurve c = kinetics_curve(d, {0.5, 1.0, 2.0}, o);
  for (const KineticsPoint& p : c.points) {
    REQUIRE(p.t_set);
    // The 1 ns ramp adds half a nanosecond.
    CHECK_THAT(*p.t_set, WithinRel(0.60125 / p.v_p + 0.5e-9, 1e-6));
  }
}

TEST_CASE("find_crossing reports no crossing below a threshold drive") {
  const Device d{"yakopcic", YakopcicParams{}};
  const CircuitSystem sys = single_device_system(d, 0.0);
  const Waveform w({{0.0, 0.0}, {1e-9, 1.1}, {50.0, 1.1}}, 0.0, "hold");
  const CrossingResult r = find_crossing(sys, w, 50.0, 0, 0.5, CrossingDirection::Rising, SolverConfig{});
  CHECK_FALSE(r.t);
}

TEST_CASE("sweep results are invariant under tolerance tightening and step refinement") {
  ChangParams p;
  p.sign_corrected = true;
  const Device d{"chang", p};
  const CircuitSystem sys = single_device_system(d, 0.0);
  const Waveform w = triangular_sweep(4.0, -4.0, 10.0, 1);
  SolverConfig base;
  const auto ref = extract_switching_voltages(integrate(sys, w, w.duration(), base));
  const auto tight = extract_switching_voltages(integrate(sys, w, w.duration(), base.tightened(10)));
  SolverConfig fine = base;
  fine.max_step = w.duration() / 1e5;
  const auto refined = extract_switching_voltages(integrate(sys, w, w.duration(), fine));
  REQUIRE(ref.v_set);
  REQUIRE(ref.v_reset);
  CHECK_THAT(*tight.v_set, WithinRel(*ref.v_set, 1e-3));
  CHECK_THAT(*refined.v_set, WithinRel(*ref.v_set, 1e-3));
  CHECK_THAT(*tight.v_reset, WithinRel(*ref.v_reset, 1e-3));
  CHECK_THAT(*refined.v_reset, WithinRel(*ref.v_reset, 1e-3));
}

TEST_CASE("trace rows satisfy the circuit constraints") {
  const Device d{"laiho", LaihoParams{}};
  const CircuitSystem sys = crs_system(d, d, 0.001, 1.0);
  const Waveform w = triangular_sweep(4.0, -4.0, 10.0, 1);
  const Trace tr = integrate(sys, w, w.duration(), SolverConfig{});
  const ConstraintReport rep = check_constraints(sys, tr);
  CHECK(rep.kirchhoff <= 1e-12);
  CHECK(rep.current <= 1e-12);
  CHECK(rep.degenerate_ok);
}

TEST_CASE("linear CRS with symmetric states has constant total resistance") {
  const Device d = linear_device(WindowKind::Joglekar, 0.001);
  const CircuitSystem sys = crs_system(d, d, 0.001, 0.999);
  const Waveform w = triangular_sweep(8.0, -8.0, 10.0, 1);
  const Trace tr = integrate(sys, w, w.duration(), SolverConfig{});
  const CrsReport rep = crs_analysis(tr);
  CHECK((rep.r_total_max - rep.r_total_min) / rep.r_total_min < 1e-6);
  CHECK_FALSE(rep.on_window);
  for (std::size_t r = 0; r < tr.size(); ++r) CHECK_THAT(tr.x[0][r] + tr.x[1][r], WithinAbs(1.0, 1e-9));
}

TEST_CASE("Benderli loop is point-symmetric, Biolek loop is not") {
  const Waveform w = triangular_sweep(10.0, -10.0, 10.0, 2);
  const Trace b = integrate(single_device_system(linear_device(WindowKind::Benderli, 0.002), 0.0), w, w.duration(),
                            SolverConfig{});
  CHECK(loop_symmetry_error(b) < 1e-3);
  const Waveform w16 = triangular_sweep(16.0, -16.0, 10.0, 2);
  const Trace bi = integrate(single_device_system(linear_device(WindowKind::Biolek, 0.0), 0.0), w16, w16.duration(),
                             SolverConfig{});
  CHECK(loop_symmetry_error(bi) > 0.1);
}

TEST_CASE("kinetics classification of synthetic curves") {
  KineticsCurve power, expo, thresh;
  for (double v : {0.5, 0.7, 1.0, 1.4, 2.0}) {
    power.points.push_back({v, 3.0 / v});
    expo.points.push_back({v, 1e3 * std::exp(-12.0 * v)});
    thresh.points.push_back({v, v <= 0.7 ? std::nullopt : std::optional<double>(std::exp(-5.0 * v))});
  }
  thresh.points.push_back({2.5, std::exp(-12.5)});
  const auto kp = classify_kinetics(power);
  CHECK(kp.kind == KineticsClass::PowerLaw);
  CHECK_THAT(kp.power_exponent, WithinAbs(-1.0, 1e-12));
  CHECK_THAT(*kp.decades_per_doubling, WithinAbs(std::log10(2.0), 1e-12));
  const auto ke = classify_kinetics(expo);
  CHECK(ke.kind == KineticsClass::ExponentialLike);
  CHECK_THAT(ke.semilog_slope, WithinAbs(-12.0, 1e-10));
  // t(0.5) / t(1.0) = exp(6): 6 / ln 10 decades.
  CHECK_THAT(*ke.decades_per_doubling, WithinAbs(6.0 / std::log(10.0), 1e-10));
  CHECK(classify_kinetics(thresh).kind == KineticsClass::Threshold);
}

TEST_CASE("normalization divides by the anchor time") {
  KineticsCurve c;
  for (double v : {0.5, 0.7, 1.0}) c.points.push_back({v, 2.0 / v});
  const KineticsCurve n = normalize_kinetics(c, 0.7);
  CHECK_THAT(*n.points[0].t_set, WithinRel(1.4, 1e-15));
  CHECK_THROWS_AS(normalize_kinetics(c, 0.8), ValidationError);
}

TEST_CASE("snapback detector on a synthetic trace") {
  Trace tr;
  tr.meta.devices = 1;
  const double va[] = {0.0, 0.5, 1.0, 1.5, 2.0, 1.0, 0.0};
  const double vd[] = {0.0, 0.5, 0.9, 0.6, 0.7, 0.5, 0.0};
  for (int r = 0; r < 7; ++r) tr.push(r, va[r], vd[r], 0.0, 0.0, 0.0, 0.0);
  const Snapback s = detect_snapback(tr, +1);
  CHECK_THAT(s.drop, WithinAbs(0.3, 1e-15));
  CHECK(s.v_applied == 1.5);
  CHECK(detect_snapback(tr, -1).drop == 0.0);
}

TEST_CASE("loop symmetry error is zero for a constructed odd I-V relation") {
  const Waveform w = triangular_sweep(1.0, -1.0, 1.0, 2);
  Trace tr;
  tr.meta.devices = 1;
  tr.meta.period = w.period();
  for (int j = 0; j <= 800; ++j) {
    const double t = w.duration() * j / 800;
    const double v = w.sample(std::min(t, w.duration() * (1 - 1e-15)));
    tr.push(t, v, v, 0.0, 0.5 * v + 0.2 * v * v * v, 0.0, 0.0);
  }
  CHECK(loop_symmetry_error(tr) < 1e-12);
}
