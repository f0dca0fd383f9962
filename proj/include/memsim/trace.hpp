#pragma once

// Columnar time-series record of one simulation run.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace memsim {

struct SolverStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  double max_error_ratio = 0.0;   // largest accepted local error / tolerance
  double max_clamp_ratio = 0.0;   // largest post-step clamp / absolute tolerance
  std::size_t frozen_drive_steps = 0;  // steps below the time resolution of t
  std::size_t snapped_to_bound = 0;    // unresolvable collapses onto a state bound
};

struct TraceMetadata {
  std::string model_id;
  std::string waveform_label;
  double period = 0.0;
  int devices = 1;
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> upper{0.0, 0.0};
  std::array<int, 2> lrs_direction{1, 1};
  double r_ext = 0.0;
  std::string solver_hash;
  std::string config_hash;
  SolverStats stats;
};

struct Trace {
  std::vector<double> t;
  std::vector<double> v_applied;
  std::array<std::vector<double>, 2> v_device;
  std::vector<double> i;
  std::array<std::vector<double>, 2> x;
  TraceMetadata meta;

  std::size_t size() const noexcept { return t.size(); }
  int devices() const noexcept { return meta.devices; }

  void push(double tt, double va, double vd0, double vd1, double ii, double x0, double x1) {
    t.push_back(tt);
    v_applied.push_back(va);
    v_device[0].push_back(vd0);
    i.push_back(ii);
    x[0].push_back(x0);
    if (meta.devices == 2) {
      v_device[1].push_back(vd1);
      x[1].push_back(x1);
    }
  }

  /// State of device k mapped to [0, 1], 0 at the HRS end and 1 at the LRS end.
  double lrs_fraction(int k, std::size_t row) const {
    const double lo = meta.lower[k];
    const double hi = meta.upper[k];
    if (hi == lo) return 0.0;
    const double s = (x[k][row] - lo) / (hi - lo);
    return meta.lrs_direction[k] > 0 ? s : 1.0 - s;
  }
};

}  // namespace memsim
