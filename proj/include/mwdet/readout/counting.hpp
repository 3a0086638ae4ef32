#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mwdet/errors.hpp"

namespace mwdet {

// Expected collected-photon numbers for the two spin states. N0 is the
// blocked (photon-present) branch, N1 the transmitting one; N0 <= N1 in the
// operating regime and `ordered()` flags violations rather than throwing.
struct CountModel {
  double n0 = 0.0;
  double n1 = 0.0;
  bool ordered() const { return n0 <= n1; }
};

// {TP, FP, TN, FN} of a binary detection event; rows are the true occupancy,
// so TP + FN = 1 and TN + FP = 1 by construction.
struct ConfusionMatrix {
  double tp = 0.0, fp = 0.0, tn = 0.0, fn = 0.0;
};

struct DetectionMetrics {
  double success = 0.0;    // P_s = q TP + p TN
  double mi_nats = 0.0;    // I(X;Y)
  double mi_ln2 = 0.0;     // same, in units of ln 2
  double dark_rate = std::numeric_limits<double>::quiet_NaN();  // FP / T0, 1/s
  double p = 0.5;          // prior of photon-absent
  double q = 0.5;          // prior of photon-present
};

namespace detail {

// Regularized incomplete gamma functions P(a,x) and Q(a,x) via the standard
// series / continued-fraction split (Lentz), with the prefactor kept in log
// space. Relative accuracy ~1e-14 over the range used here.
inline double gamma_p_series(double a, double x) {
  double ap = a, sum = 1.0 / a, del = sum;
  for (int n = 0; n < 10000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  double lg = std::lgamma(a);
  return sum * std::exp(-x + a * std::log(x) - lg);
}

inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 10000; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double regularized_gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("regularized_gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

inline double regularized_gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("regularized_gamma_p domain");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

}  // namespace detail

// P(X <= k) for X ~ Poisson(mean), through the upper regularized gamma
// identity; stable for the full (mean, k) range used by the thresholding.
inline double poisson_cdf(int k, double mean) {
  if (k < 0) throw PreconditionError("poisson_cdf: threshold must be >= 0");
  if (mean < 0.0) throw PreconditionError("poisson_cdf: mean must be >= 0");
  if (mean == 0.0) return 1.0;
  return detail::regularized_gamma_q(static_cast<double>(k) + 1.0, mean);
}

// Survival P(X > k) = 1 - CDF computed directly (no cancellation).
inline double poisson_survival(int k, double mean) {
  if (k < 0) throw PreconditionError("poisson_survival: threshold must be >= 0");
  if (mean < 0.0) throw PreconditionError("poisson_survival: mean must be >= 0");
  if (mean == 0.0) return 0.0;
  return detail::regularized_gamma_p(static_cast<double>(k) + 1.0, mean);
}

// Smallest k whose CDF under Poisson(mean) covers 1 - mass_eps.
inline int poisson_quantile_upper(double mean, double mass_eps = 1e-12) {
  if (mean <= 0.0) return 0;
  int k = static_cast<int>(mean + 10.0 * std::sqrt(mean) + 10.0);
  while (poisson_survival(k, mean) > mass_eps) k *= 2;
  int lo = 0, hi = k;
  while (lo < hi) {
    int mid = lo + (hi - lo) / 2;
    if (poisson_survival(mid, mean) > mass_eps)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

// Counts at or below the threshold report "photon present": TP is the CDF of
// the blocked branch, FP the CDF of the bright one.
inline ConfusionMatrix poisson_confusion(const CountModel& counts, int k) {
  if (k < 0) throw PreconditionError("poisson_confusion: negative threshold");
  ConfusionMatrix cm;
  cm.tp = poisson_cdf(k, counts.n0);
  cm.fp = poisson_cdf(k, counts.n1);
  cm.fn = poisson_survival(k, counts.n0);
  cm.tn = poisson_survival(k, counts.n1);
  return cm;
}

// P_s, mutual information (nats, with the 0 log 0 := 0 convention) and dark
// count rate FP/T0. Priors: q for photon-present, p = 1 - q for absent.
// T0 <= 0 leaves the dark rate unset (the protocol period is configuration).
inline DetectionMetrics detection_metrics(const ConfusionMatrix& cm, double p, double t0 = 0.0) {
  if (p < 0.0 || p > 1.0) throw PreconditionError("prior must lie in [0, 1]");
  const double q = 1.0 - p;

  DetectionMetrics m;
  m.p = p;
  m.q = q;
  m.success = q * cm.tp + p * cm.tn;

  auto term = [](double joint, double conditional, double marginal) {
    if (joint <= 0.0 || conditional <= 0.0 || marginal <= 0.0) return 0.0;
    return joint * std::log(conditional / marginal);
  };
  const double y_absent = p * cm.tn + q * cm.fn;   // P(report absent)
  const double y_present = p * cm.fp + q * cm.tp;  // P(report present)
  double mi = term(p * cm.tn, cm.tn, y_absent) + term(p * cm.fp, cm.fp, y_present) +
              term(q * cm.fn, cm.fn, y_absent) + term(q * cm.tp, cm.tp, y_present);
  m.mi_nats = std::max(0.0, mi);
  m.mi_ln2 = m.mi_nats / std::log(2.0);
  if (t0 > 0.0) m.dark_rate = cm.fp / t0;
  return m;
}

enum class ThresholdObjective { success_probability, mutual_information };

struct ThresholdChoice {
  int k = 0;
  ConfusionMatrix confusion;
  DetectionMetrics metrics;
};

// Exhaustive scan of k over [0, k_max], k_max covering 1 - 1e-12 of the
// bright-branch Poisson mass; ties break toward smaller k.
inline ThresholdChoice optimize_threshold(const CountModel& counts, double p,
                                          ThresholdObjective objective, double t0 = 0.0) {
  if (!(counts.n0 < counts.n1))
    throw PreconditionError("threshold optimization requires N0 < N1");
  const int k_max = poisson_quantile_upper(counts.n1, 1e-12);

  ThresholdChoice best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= k_max; ++k) {
    ConfusionMatrix cm = poisson_confusion(counts, k);
    DetectionMetrics m = detection_metrics(cm, p, t0);
    double value =
        objective == ThresholdObjective::success_probability ? m.success : m.mi_nats;
    if (value > best_value) {
      best_value = value;
      best = {k, cm, m};
    }
  }
  return best;
}

}  // namespace mwdet
