#include "lagmmse/sim.hpp"

#include <algorithm>
#include <cmath>

#include "lagmmse/errors.hpp"
#include "lagmmse/numerics.hpp"
#include "lagmmse/parallel.hpp"

namespace lagmmse::sim {

namespace {

struct FilterTrace {
  std::vector<double> m_f, p_f, m_p, p_p;
  void resize(std::size_t n) {
    m_f.resize(n);
    p_f.resize(n);
    m_p.resize(n);
    p_p.resize(n);
  }
};

// One predict/update sweep over observation increments; prior is the
// model's own stationary law.
void run_filter(const DiscreteKalmanModel& m, const std::vector<double>& y,
                FilterTrace& trace) {
  const std::size_t n = y.size();
  trace.resize(n);
  double mean = 0.0;
  double var = m.proc_noise / (1.0 - m.ar_coeff * m.ar_coeff);
  for (std::size_t k = 0; k < n; ++k) {
    trace.m_p[k] = mean;
    trace.p_p[k] = var;
    const double s = m.obs_gain * m.obs_gain * var + m.obs_noise;
    const double gain = var * m.obs_gain / s;
    mean += gain * (y[k] - m.obs_gain * mean);
    var *= (1.0 - gain * m.obs_gain);
    trace.m_f[k] = mean;
    trace.p_f[k] = var;
    mean *= m.ar_coeff;
    var = m.ar_coeff * m.ar_coeff * var + m.proc_noise;
  }
}

// Rauch-Tung-Striebel sweep for the smoothed mean at index `to`, using
// data up to index `from` (inclusive).
double rts_mean_at(const DiscreteKalmanModel& m, const FilterTrace& trace,
                   std::size_t from, std::size_t to) {
  double mean = trace.m_f[from];
  for (std::size_t t = from; t-- > to;) {
    const double c = trace.p_f[t] * m.ar_coeff / trace.p_p[t + 1];
    mean = trace.m_f[t] + c * (mean - trace.m_p[t + 1]);
  }
  return mean;
}

McEstimate reduce_path_means(const std::vector<double>& path_means) {
  const auto agg = numerics::mean_stderr(path_means);
  McEstimate est;
  est.value = agg.value;
  est.stderr_ = agg.stderr_;
  est.samples = agg.count;
  return est;
}

void enforce_budget(const McEstimate& est, const McConfig& mc, const char* what) {
  if (mc.target_stderr > 0.0 && est.stderr_ > mc.target_stderr) {
    throw McBudgetExceeded(std::string(what) +
                           ": standard error target unmet within the sample cap");
  }
}

}  // namespace

DiscreteKalmanModel discretize(const OuParams& params, double snr, double step) {
  if (!(step > 0.0)) throw InvalidParameter("step", "must be > 0");
  DiscreteKalmanModel m;
  m.ar_coeff = std::exp(-params.alpha * step);
  m.proc_noise = params.beta * params.beta *
                 (1.0 - m.ar_coeff * m.ar_coeff) / (2.0 * params.alpha);
  m.obs_gain = std::sqrt(snr) * step;
  m.obs_noise = step;
  return m;
}

OuPath simulate_ou(const OuParams& params, double snr, double step, std::size_t steps,
                   PhiloxStream& rng) {
  const DiscreteKalmanModel m = discretize(params, snr, step);
  OuPath path;
  path.step = step;
  path.x.resize(steps);
  path.y.resize(steps);
  const double sd_proc = std::sqrt(m.proc_noise);
  const double sd_obs = std::sqrt(m.obs_noise);
  double x = std::sqrt(params.beta * params.beta / (2.0 * params.alpha)) *
             rng.next_gaussian();
  for (std::size_t k = 0; k < steps; ++k) {
    path.x[k] = x;
    path.y[k] = m.obs_gain * x + sd_obs * rng.next_gaussian();
    x = m.ar_coeff * x + sd_proc * rng.next_gaussian();
  }
  return path;
}

double filter_variance_steady(const DiscreteKalmanModel& m) {
  double var = m.proc_noise / (1.0 - m.ar_coeff * m.ar_coeff);
  for (int i = 0; i < 2000000; ++i) {
    const double p_pred = m.ar_coeff * m.ar_coeff * var + m.proc_noise;
    const double s = m.obs_gain * m.obs_gain * p_pred + m.obs_noise;
    const double next = p_pred * (1.0 - p_pred * m.obs_gain * m.obs_gain / s);
    if (std::abs(next - var) < 1e-16 * std::max(1.0, var)) return next;
    var = next;
  }
  throw NonConvergence("filter_variance_steady: Riccati recursion did not settle");
}

double fixed_lag_variance(const DiscreteKalmanModel& m, std::size_t lag_steps) {
  const double p_f = filter_variance_steady(m);
  const double p_p = m.ar_coeff * m.ar_coeff * p_f + m.proc_noise;
  const double c = p_f * m.ar_coeff / p_p;
  double v = p_f;
  for (std::size_t i = 0; i < lag_steps; ++i) {
    const double next = p_f + c * c * (v - p_p);
    if (std::abs(next - v) < 1e-17) return next;
    v = next;
  }
  return v;
}

std::vector<double> kalman_fixed_lag_errors(const DiscreteKalmanModel& model,
                                            const OuPath& path, std::size_t lag_steps,
                                            std::size_t burn, std::size_t stride) {
  const std::size_t n = path.y.size();
  if (burn + lag_steps + 1 >= n) {
    throw InvalidParameter("burn", "path too short for the requested lag and burn-in");
  }
  FilterTrace trace;
  run_filter(model, path.y, trace);
  std::vector<double> errors;
  for (std::size_t j = burn; j + lag_steps < n; j += std::max<std::size_t>(1, stride)) {
    const double est = (lag_steps == 0) ? trace.m_f[j]
                                        : rts_mean_at(model, trace, j + lag_steps, j);
    const double e = est - path.x[j];
    errors.push_back(e * e);
  }
  return errors;
}

McEstimate fixed_lag_mse(const OuParams& truth, const OuParams& assumed, double snr,
                         double d, const McConfig& mc) {
  if (!(d >= 0.0)) throw InvalidParameter("d", "must be >= 0");
  if (mc.paths < 100) throw InvalidParameter("paths", "oracle requires >= 100 paths");
  if (mc.step > 1e-2) throw InvalidParameter("step", "OU oracle requires step <= 1e-2");
  const double tau_truth =
      std::sqrt(truth.alpha * truth.alpha + snr * truth.beta * truth.beta);
  const double tau_assumed =
      std::sqrt(assumed.alpha * assumed.alpha + snr * assumed.beta * assumed.beta);
  const double slow_rate = std::min({tau_truth, tau_assumed});

  std::size_t lag_steps;
  if (d == kInf) {
    lag_steps = static_cast<std::size_t>(std::ceil(8.0 / (2.0 * slow_rate * mc.step)));
  } else {
    lag_steps = static_cast<std::size_t>(std::llround(d / mc.step));
  }
  const std::size_t burn = static_cast<std::size_t>(
      std::ceil(10.0 / (std::min(truth.alpha, assumed.alpha) * mc.step)));
  const std::size_t stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(0.5 / (tau_truth * mc.step)));
  const std::size_t per_path =
      std::max<std::size_t>(4, (mc.sample_cap > 0 ? mc.sample_cap / mc.paths : 64));
  const std::size_t steps = burn + lag_steps + per_path * stride + 1;

  const DiscreteKalmanModel filter_model = discretize(assumed, snr, mc.step);
  std::vector<double> path_means(mc.paths);
  parallel_for(mc.paths, [&](std::size_t p) {
    PhiloxStream rng(mc.seed, p);
    const OuPath path = simulate_ou(truth, snr, mc.step, steps, rng);
    const auto errors = kalman_fixed_lag_errors(filter_model, path, lag_steps, burn, stride);
    path_means[p] = numerics::mean_stderr(errors).value;
  });
  const McEstimate est = reduce_path_means(path_means);
  enforce_budget(est, mc, "fixed_lag_mse");
  return est;
}

namespace {

struct JumpLayout {
  std::size_t n_neg = 0;    // steps before the jump
  std::size_t n_total = 0;  // full path length
  std::size_t idx_d = 0;    // index of time d
};

JumpLayout jump_layout(const OuParams& params, double d, double l, double step) {
  const double burn_time = 14.0 / params.alpha;
  JumpLayout lay;
  lay.n_neg = static_cast<std::size_t>(std::ceil(burn_time / step));
  const auto n_pos = static_cast<std::size_t>(std::ceil((d + l) / step));
  lay.n_total = lay.n_neg + n_pos + 1;
  lay.idx_d = lay.n_neg + static_cast<std::size_t>(std::llround(d / step));
  return lay;
}

double effective_lookback(const OuParams& params, double gamma, double l) {
  if (l != kInf) return l;
  const double tau = std::sqrt(params.alpha * params.alpha + gamma * params.beta * params.beta);
  return 10.0 / tau;
}

}  // namespace

McEstimate jump_error_mc(const OuParams& params, double snr_past, double gamma_future,
                         double d, double l, const McConfig& mc) {
  if (!(d >= 0.0) || !(l >= 0.0)) throw InvalidParameter("d", "d and l must be >= 0");
  l = effective_lookback(params, gamma_future, l);
  const JumpLayout lay = jump_layout(params, d, l, mc.step);
  const DiscreteKalmanModel past = discretize(params, snr_past, mc.step);
  const DiscreteKalmanModel future = discretize(params, gamma_future, mc.step);

  std::vector<double> samples(mc.paths);
  parallel_for(mc.paths, [&](std::size_t p) {
    PhiloxStream rng(mc.seed, p);
    // Simulate signal and piecewise observations in one sweep.
    std::vector<double> x(lay.n_total), y(lay.n_total);
    const double sd_proc = std::sqrt(past.proc_noise);
    const double sd_obs = std::sqrt(past.obs_noise);
    double state =
        std::sqrt(params.beta * params.beta / (2.0 * params.alpha)) * rng.next_gaussian();
    for (std::size_t k = 0; k < lay.n_total; ++k) {
      x[k] = state;
      const double gain = (k >= lay.n_neg) ? future.obs_gain : past.obs_gain;
      y[k] = gain * state + sd_obs * rng.next_gaussian();
      state = past.ar_coeff * state + sd_proc * rng.next_gaussian();
    }
    // Filter with the matching time-varying gain, then smooth back to d.
    FilterTrace trace;
    trace.resize(lay.n_total);
    double mean = 0.0;
    double var = params.beta * params.beta / (2.0 * params.alpha);
    for (std::size_t k = 0; k < lay.n_total; ++k) {
      trace.m_p[k] = mean;
      trace.p_p[k] = var;
      const double gain_k = (k >= lay.n_neg) ? future.obs_gain : past.obs_gain;
      const double s = gain_k * gain_k * var + past.obs_noise;
      const double kgain = var * gain_k / s;
      mean += kgain * (y[k] - gain_k * mean);
      var *= (1.0 - kgain * gain_k);
      trace.m_f[k] = mean;
      trace.p_f[k] = var;
      mean *= past.ar_coeff;
      var = past.ar_coeff * past.ar_coeff * var + past.proc_noise;
    }
    const double est = rts_mean_at(past, trace, lay.n_total - 1, lay.idx_d);
    const double e = est - x[lay.idx_d];
    samples[p] = e * e;
  });
  const McEstimate est = reduce_path_means(samples);
  enforce_budget(est, mc, "jump_error_mc");
  return est;
}

McEstimate jump_error_mc_mixture(const MixingMeasure& mix, double snr_past,
                                 double gamma_future, double d, double l,
                                 const McConfig& mc) {
  if (!(d >= 0.0) || !(l >= 0.0)) throw InvalidParameter("d", "d and l must be >= 0");
  const std::size_t n_comp = mix.alphas.size();
  double slowest = mix.alphas[0];
  for (double a : mix.alphas) slowest = std::min(slowest, a);
  const OuParams slow{slowest, 1.0, 0.0};
  l = effective_lookback(slow, gamma_future, l);
  const JumpLayout lay = jump_layout(slow, d, l, mc.step);

  std::vector<DiscreteKalmanModel> past(n_comp), future(n_comp);
  for (std::size_t c = 0; c < n_comp; ++c) {
    const OuParams comp{mix.alphas[c], 1.0, 0.0};
    past[c] = discretize(comp, snr_past, mc.step);
    future[c] = discretize(comp, gamma_future, mc.step);
  }

  std::vector<double> samples(mc.paths);
  parallel_for(mc.paths, [&](std::size_t p) {
    PhiloxStream rng(mc.seed, p);
    // Draw the active component, then simulate it.
    const double pick = rng.next_double();
    std::size_t active = 0;
    double cum = 0.0;
    for (std::size_t c = 0; c < n_comp; ++c) {
      cum += mix.weights[c];
      if (pick < cum) {
        active = c;
        break;
      }
      active = c;
    }
    std::vector<double> x(lay.n_total), y(lay.n_total);
    const auto& sim_model = past[active];
    const double sd_proc = std::sqrt(sim_model.proc_noise);
    const double sd_obs = std::sqrt(mc.step);
    double state =
        std::sqrt(1.0 / (2.0 * mix.alphas[active])) * rng.next_gaussian();
    for (std::size_t k = 0; k < lay.n_total; ++k) {
      x[k] = state;
      const double gain = (k >= lay.n_neg) ? future[active].obs_gain : sim_model.obs_gain;
      y[k] = gain * state + sd_obs * rng.next_gaussian();
      state = sim_model.ar_coeff * state + sd_proc * rng.next_gaussian();
    }
    // Bayesian bank: per-component filter plus innovation log-likelihood.
    std::vector<FilterTrace> traces(n_comp);
    std::vector<double> loglike(n_comp, 0.0);
    for (std::size_t c = 0; c < n_comp; ++c) {
      traces[c].resize(lay.n_total);
      double mean = 0.0;
      double var = 1.0 / (2.0 * mix.alphas[c]);
      for (std::size_t k = 0; k < lay.n_total; ++k) {
        const double gain_k = (k >= lay.n_neg) ? future[c].obs_gain : past[c].obs_gain;
        traces[c].m_p[k] = mean;
        traces[c].p_p[k] = var;
        const double s = gain_k * gain_k * var + mc.step;
        const double innov = y[k] - gain_k * mean;
        loglike[c] += -0.5 * (std::log(s) + innov * innov / s);
        const double kgain = var * gain_k / s;
        mean += kgain * innov;
        var *= (1.0 - kgain * gain_k);
        traces[c].m_f[k] = mean;
        traces[c].p_f[k] = var;
        mean *= past[c].ar_coeff;
        var = past[c].ar_coeff * past[c].ar_coeff * var + past[c].proc_noise;
      }
    }
    double ll_max = loglike[0];
    for (double v : loglike) ll_max = std::max(ll_max, v);
    double norm = 0.0, estimate = 0.0;
    for (std::size_t c = 0; c < n_comp; ++c) {
      const double w = mix.weights[c] * std::exp(loglike[c] - ll_max);
      norm += w;
      estimate += w * rts_mean_at(past[c], traces[c], lay.n_total - 1, lay.idx_d);
    }
    estimate /= norm;
    const double e = estimate - x[lay.idx_d];
    samples[p] = e * e;
  });
  const McEstimate est = reduce_path_means(samples);
  enforce_budget(est, mc, "jump_error_mc_mixture");
  return est;
}

}  // namespace lagmmse::sim
