#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace mwdet {

// Smooth coupling envelope g(t) = g * sech(2 g (t - center)). The pulse area
// satisfies 2 * integral g(t) dt = pi, i.e. one full swap on a resonant pair.
struct SechPulse {
  double amplitude = 0.0;  // rad/s, >= 0
  double center = 0.0;     // s

  SechPulse(double amplitude_, double center_) : amplitude(amplitude_), center(center_) {
    if (amplitude < 0.0) throw std::invalid_argument("sech pulse amplitude must be >= 0");
  }

  double value(double t) const { return amplitude / std::cosh(2.0 * amplitude * (t - center)); }
  // 1/e-ish temporal scale of the envelope argument.
  double width() const { return amplitude > 0.0 ? 1.0 / (2.0 * amplitude) : 0.0; }
};

enum class PulseShape { sech, gaussian };

inline std::string to_string(PulseShape s) { return s == PulseShape::sech ? "sech" : "gaussian"; }

// Incoming wavepacket amplitude E_in(t), normalized so the full-line integral
// of |E_in|^2 equals the mean photon number. The detection window [t1, t2] is
// fixed by the drive; shifting the pulse moves the envelope, not the window.
//
// Shapes and their scale parameter `width`:
//   sech:     E = sqrt(n/T) sech(2 (t - shift)/T),         width = T
//   gaussian: |E|^2 = n * exp(-(t-shift)^2/(2 s^2))/(s sqrt(2 pi)), width = s
// The coherence time (rms duration of |E|^2) is pi T/(4 sqrt(3)) for sech and
// s for gaussian, so shapes with equal coherence time are directly comparable.
struct InputPulse {
  PulseShape shape = PulseShape::sech;
  double mean_photons = 0.0;  // dimensionless
  double width = 0.0;         // s
  double shift = 0.0;         // s
  double t1 = 0.0, t2 = 0.0;  // window, s

  static constexpr double sech_tc_factor = 0.4534498410585544;  // pi/(4 sqrt(3))

  static InputPulse make(PulseShape shape, double n, double width, double shift = 0.0) {
    if (n < 0.0) throw std::invalid_argument("mean photon number must be >= 0");
    if (width <= 0.0) throw std::invalid_argument("pulse width must be > 0");
    InputPulse p;
    p.shape = shape;
    p.mean_photons = n;
    p.width = width;
    p.shift = shift;
    // Default window: +-5T for sech, the same multiple of the coherence time
    // for gaussian. Centered on the unshifted frame.
    double half = 5.0 * p.coherence_time() / sech_tc_factor;
    p.t1 = -half;
    p.t2 = half;
    return p;
  }

  double coherence_time() const {
    return shape == PulseShape::sech ? sech_tc_factor * width : width;
  }

  double intensity(double t) const {
    double u = t - shift;
    if (shape == PulseShape::sech) {
      double s = std::cosh(2.0 * u / width);
      return mean_photons / (width * s * s);
    }
    double s2 = width * width;
    return mean_photons * std::exp(-u * u / (2.0 * s2)) / (width * std::sqrt(2.0 * M_PI));
  }

  double amplitude(double t) const { return std::sqrt(intensity(t)); }

  // Running integral of |E_in|^2 from t1, evaluated in closed form so the
  // integrator sees exact values at stage times.
  double cumulative(double t) const {
    if (mean_photons == 0.0) return 0.0;
    if (shape == PulseShape::sech) {
      double a = std::tanh(2.0 * (t1 - shift) / width);
      double b = std::tanh(2.0 * (t - shift) / width);
      return 0.5 * mean_photons * (b - a);
    }
    double a = std::erf((t1 - shift) / (width * std::sqrt(2.0)));
    double b = std::erf((t - shift) / (width * std::sqrt(2.0)));
    return 0.5 * mean_photons * (b - a);
  }

  // n minus the in-window mass: the truncated tail that never impinges.
  double truncation_loss() const { return mean_photons - cumulative(t2); }
};

}  // namespace mwdet
