#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "memsim/device.hpp"
#include "memsim/linear_model.hpp"
#include "memsim/pickett_model.hpp"
#include "memsim/sinh_models.hpp"

using namespace memsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// R(x) = a - b x with the default 100 ohm / 16 kohm endpoints.
constexpr double kA = 16000.0, kB = 15900.0, kK1 = 1e4;

double k2_benderli(double x0) { return (kA * std::log(0.5 / x0) + (kA - kB) * std::log((1 - x0) / 0.5)) / kK1; }

// Simmons current in plain SI units (energies in J). Written out from the
// barrier equations independently of the eV-based library code.
double simmons_current_si(double w, double v, bool halved_field_share) {
  const double e = 1.602176634e-19, m = 9.1093837015e-31, h = 6.62607015e-34, eps0 = 8.8541878128e-12;
  const double phi0 = 0.95 * e, kappa = 5.0, area = 1e-14;
  const double lam = e * e * std::log(2.0) / (8 * std::numbers::pi * kappa * eps0 * w);
  const double ev = e * std::abs(v);
  const double w1 = 1.2 * lam * w / phi0;
  const double w2 = w1 + w * (1 - 9.2 * lam / (3 * phi0 + 4 * lam - 2 * ev));
  const double dw = w2 - w1;
  const double share = halved_field_share ? (w1 + w2) / (2 * w) : (w1 + w2) / w;
  const double phi = phi0 - ev * share - (1.15 * lam * w / dw) * std::log(w2 * (w - w1) / (w1 * (w - w2)));
  const double B = 4 * std::numbers::pi * dw * std::sqrt(2 * m) / h;
  const double j0 = e / (2 * std::numbers::pi * h);
  const double mag =
      j0 * area / (dw * dw) * (phi * std::exp(-B * std::sqrt(phi)) - (phi + ev) * std::exp(-B * std::sqrt(phi + ev)));
  return std::copysign(mag, v);
}

}  // namespace

TEST_CASE("linear model resistance and rate") {
  const LinearParams p;
  CHECK(resistance(p, 0.0) == 16000.0);
  CHECK(resistance(p, 1.0) == 100.0);
  const WindowSpec w{WindowKind::Biolek, 1, false};
  CHECK_THAT(state_rate(p, w, 0.5, 1e-3), WithinRel(1e4 * 1e-3 * 0.75, 1e-14));
  CHECK(state_rate(p, w, 0.5, 0.0) == 0.0);
  CHECK_THROWS_AS(resistance(p, 1.5), ValidationError);
}

TEST_CASE("set-time constant K2 matches closed forms") {
  const LinearParams p;
  // No window: (a/2 - b/8) / K1.
  CHECK_THAT(set_time_constant(p, {WindowKind::Shin, 1, false}, 0.0, 0.5), WithinRel(0.60125, 1e-12));
  CHECK_THAT(set_time_constant(p, {WindowKind::Benderli, 1, false}, 0.002, 0.5), WithinRel(k2_benderli(0.002), 1e-9));
  // Joglekar p = 1 is 4 x (1 - x).
  CHECK_THAT(set_time_constant(p, {WindowKind::Joglekar, 1, false}, 0.002, 0.5),
             WithinRel(k2_benderli(0.002) / 4, 1e-9));
  // Biolek p = 1, positive current: 1 - x^2.
  const double biolek = (kA * std::atanh(0.5) + 0.5 * kB * std::log(0.75)) / kK1;
  CHECK_THAT(set_time_constant(p, {WindowKind::Biolek, 1, false}, 0.0, 0.5), WithinRel(biolek, 1e-10));
  CHECK_THAT(analytic_set_time(p, {WindowKind::Shin, 1, false}, 2.0, 0.0, 0.5), WithinRel(0.60125 / 2, 1e-12));
  CHECK_THROWS_AS(set_time_constant(p, {WindowKind::Benderli, 1, false}, 0.0, 0.5), NumericalError);
  CHECK_THROWS_AS(analytic_set_time(p, {WindowKind::Shin, 1, false}, 0.0, 0.0, 0.5), ValidationError);
}

TEST_CASE("Pickett tunnel current matches an SI-unit oracle") {
  for (BarrierForm form : {BarrierForm::AsPrinted, BarrierForm::Simmons}) {
    PickettParams p;
    p.barrier_form = form;
    for (double w : {1.2e-9, 1.5e-9, 1.9e-9}) {
      for (double v : {0.05, 0.2, -0.3, 0.5}) {
        CHECK_THAT(tunnel_current(p, w, v), WithinRel(simmons_current_si(w, v, form == BarrierForm::Simmons), 1e-10));
      }
    }
  }
}

TEST_CASE("Pickett current is odd, grows with |V| and shrinks with the gap") {
  PickettParams p;
  p.barrier_form = BarrierForm::Simmons;
  CHECK(tunnel_current(p, 1.5e-9, 0.0) == 0.0);
  CHECK_THAT(tunnel_current(p, 1.5e-9, -0.3), WithinRel(-tunnel_current(p, 1.5e-9, 0.3), 1e-15));
  double last = 0.0;
  for (double v = 0.05; v <= 0.6; v += 0.05) {
    const double i = tunnel_current(p, 1.5e-9, v);
    CHECK(i > last);
    last = i;
  }
  CHECK(tunnel_current(p, 1.2e-9, 0.3) > tunnel_current(p, 1.8e-9, 0.3));
}

TEST_CASE("Pickett barrier reports its validity edge") {
  PickettParams p;
  CHECK_THROWS_AS(tunnel_current(p, 1.5e-9, 3.0), NonPhysicalRegime);
  try {
    tunnel_current(p, 1.5e-9, 3.0);
  } catch (const NonPhysicalRegime& e) {
    CHECK_FALSE(e.quantity().empty());
  }
}

TEST_CASE("Pickett gap rate follows the double-exponential law") {
  const PickettParams p;
  const double w = 1.5e-9;
  for (double i : {20e-6, 100e-6}) {
    const double off = p.f_off * std::sinh(i / p.i_off) * std::exp(-std::exp((w - p.a_off) / p.w_c - i / p.b) - w / p.w_c);
    CHECK_THAT(state_rate(p, w, i), WithinRel(off, 1e-12));
    const double on = -p.f_on * std::sinh(i / p.i_on) * std::exp(-std::exp((p.a_on - w) / p.w_c - i / p.b) - w / p.w_c);
    CHECK_THAT(state_rate(p, w, -i), WithinRel(on, 1e-12));
  }
  CHECK(state_rate(p, w, 0.0) == 0.0);
}

TEST_CASE("Pickett series-resistance loop: Newton and bisection agree") {
  PickettParams p;
  p.barrier_form = BarrierForm::Simmons;
  for (double v : {0.1, 0.4, -0.6, 1.0}) {
    const DeviceCurrent nb = solve_device_current(p, v, 1.6e-9, 1e-14, 0.0, RootMethod::NewtonBisection);
    const DeviceCurrent bi = solve_device_current(p, v, 1.6e-9, 1e-14, 0.0, RootMethod::Bisection);
    CHECK_THAT(nb.i, WithinRel(bi.i, 1e-10));
    CHECK_THAT(nb.v_g + nb.i * p.r_s, WithinAbs(v, 1e-12));
    CHECK_THAT(nb.i, WithinRel(tunnel_current(p, 1.6e-9, nb.v_g), 1e-15));
  }
}

TEST_CASE("Laiho equations") {
  LaihoParams p;
  p.a2 = 3e-8;
  p.b2 = 2.0;
  CHECK_THAT(sinh_current(p, 0.4, 0.5), WithinRel(1e-8 * 0.4 * std::sinh(1.5 * 0.5), 1e-15));
  CHECK_THAT(sinh_current(p, 0.4, -0.5), WithinRel(3e-8 * 0.4 * std::sinh(-1.0), 1e-15));
  // Biolek window for positive drive: 1 - x^2.
  CHECK_THAT(sinh_rate(p, 0.4, 0.5), WithinRel(0.2 * std::sinh(1.0) * (1 - 0.16), 1e-14));
  CHECK(sinh_current(p, 0.0, 2.0) == 0.0);
}

TEST_CASE("Chang equations, literal and sign-corrected") {
  ChangParams p;
  const double x = 0.3, v = 0.8;
  CHECK_THAT(sinh_current(p, x, v),
             WithinRel((1 - x) * 1e-6 * (1 - std::exp(v)) + x * 4e-6 * std::sinh(2 * v), 1e-14));
  CHECK_THAT(sinh_rate(p, x, v), WithinRel(0.05 * std::sinh(3 * v), 1e-15));
  p.sign_corrected = true;
  CHECK_THAT(sinh_current(p, x, v),
             WithinRel((1 - x) * 1e-6 * (1 - std::exp(-v)) + x * 4e-6 * std::sinh(2 * v), 1e-14));
  // Passive: current has the sign of the voltage for every state.
  for (double xx : {0.0, 0.5, 1.0})
    for (double vv : {-2.0, -0.1, 0.1, 2.0}) CHECK(sinh_current(p, xx, vv) * vv > 0.0);
}

TEST_CASE("Yakopcic threshold and window") {
  const YakopcicParams p;
  CHECK(yakopcic_threshold(p, 1.2) == 0.0);
  CHECK(yakopcic_threshold(p, -1.2) == 0.0);
  CHECK(sinh_rate(p, 0.5, 1.19) == 0.0);
  CHECK_THAT(yakopcic_threshold(p, 1.5), WithinRel(10 * (std::exp(1.5) - std::exp(1.2)), 1e-15));
  CHECK_THAT(yakopcic_threshold(p, -1.5), WithinRel(-10 * (std::exp(1.5) - std::exp(1.2)), 1e-15));
  // Continuous at both knees, exactly zero at the far ends.
  CHECK_THAT(yakopcic_window(p, 0.8), WithinAbs(1.0, 1e-15));
  CHECK_THAT(yakopcic_window(p, 0.2), WithinAbs(1.0, 1e-15));
  CHECK_THAT(yakopcic_window(p, 1.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(yakopcic_window(p, 0.0), WithinAbs(0.0, 1e-15));
}

TEST_CASE("model registry") {
  CHECK(model_ids().size() == 8);
  for (const auto& id : model_ids()) {
    const Device d = make_device(id);
    CHECK(d.id == id);
    CHECK_NOTHROW(validate(d));
  }
  CHECK_THROWS_AS(make_device("team"), ValidationError);
}
