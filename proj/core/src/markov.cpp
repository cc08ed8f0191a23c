#include "lagmmse/markov.hpp"

#include <algorithm>
#include <cmath>

#include "lagmmse/errors.hpp"
#include "lagmmse/numerics.hpp"
#include "lagmmse/parallel.hpp"
#include "lagmmse/rng.hpp"

namespace lagmmse::markov {

namespace {

void require_chain(const Dtmc& chain) {
  if (chain.values.empty() || chain.transition.size() != chain.values.size()) {
    throw InvalidParameter("transition", "chain is not square");
  }
  if (chain.stationary.size() != chain.values.size()) {
    throw InvalidParameter("stationary", "call validate() or with_stationary() first");
  }
}

// Strong connectivity on the positive-entry digraph.
bool strongly_connected(const std::vector<std::vector<double>>& p) {
  const std::size_t n = p.size();
  auto reachable = [&](bool transpose) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        const double w = transpose ? p[j][i] : p[i][j];
        if (w > 0.0 && !seen[j]) {
          seen[j] = true;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return reachable(false) && reachable(true);
}

std::vector<double> row_times(const std::vector<double>& mu,
                              const std::vector<std::vector<double>>& p) {
  const std::size_t n = mu.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j] += mu[i] * p[i][j];
  }
  return out;
}

double distribution_variance(const std::vector<double>& probs,
                             const std::vector<double>& values) {
  double mean = 0.0, second = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    mean += probs[i] * values[i];
    second += probs[i] * values[i] * values[i];
  }
  return second - mean * mean;
}

std::vector<std::vector<double>> matrix_power(const std::vector<std::vector<double>>& p,
                                              int k) {
  const std::size_t n = p.size();
  std::vector<std::vector<double>> acc(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) acc[i][i] = 1.0;
  for (int step = 0; step < k; ++step) {
    std::vector<std::vector<double>> next(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t m = 0; m < n; ++m) {
        if (acc[i][m] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) next[i][j] += acc[i][m] * p[m][j];
      }
    }
    acc = std::move(next);
  }
  return acc;
}

std::size_t sample_index(const std::vector<double>& probs, double u) {
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return probs.size() - 1;
}

}  // namespace

std::vector<double> stationary_distribution(
    const std::vector<std::vector<double>>& transition) {
  const std::size_t n = transition.size();
  if (n == 0) throw InvalidParameter("transition", "empty matrix");
  if (!strongly_connected(transition)) {
    throw ReducibleChain("stationary_distribution: chain is not irreducible");
  }
  std::vector<double> mu(n, 1.0 / static_cast<double>(n));
  for (int iter = 0; iter < 200000; ++iter) {
    std::vector<double> next = row_times(mu, transition);
    double total = 0.0;
    for (double v : next) total += v;
    for (double& v : next) v /= total;
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(next[i] - mu[i]));
    mu = std::move(next);
    if (diff < 1e-14) return mu;
  }
  throw NonConvergence("stationary_distribution: power iteration did not settle");
}

Dtmc with_stationary(Dtmc chain) {
  chain.stationary = stationary_distribution(chain.transition);
  return chain;
}

Dtmc reverse(const Dtmc& chain) {
  require_chain(chain);
  const std::size_t n = chain.values.size();
  Dtmc rev;
  rev.values = chain.values;
  rev.stationary = chain.stationary;
  rev.transition.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      rev.transition[i][j] =
          chain.stationary[j] * chain.transition[j][i] / chain.stationary[i];
    }
  }
  return rev;
}

double prediction_variance(const Dtmc& chain) {
  return k_step_prediction_variance(chain, 1);
}

double k_step_prediction_variance(const Dtmc& chain, int k) {
  require_chain(chain);
  if (k < 0) throw InvalidParameter("k", "must be >= 0");
  if (k == 0) return 0.0;
  const auto pk = matrix_power(chain.transition, k);
  double acc = 0.0;
  for (std::size_t i = 0; i < chain.values.size(); ++i) {
    acc += chain.stationary[i] * distribution_variance(pk[i], chain.values);
  }
  return acc;
}

double lmmse_infinite_snr(const Dtmc& chain, double d) {
  require_chain(chain);
  if (d >= 0.0) return 0.0;
  const double depth = -d;
  const int whole = static_cast<int>(std::floor(depth));
  const double frac = depth - whole;
  // With probability 1-frac the data gap spans `whole` symbols, otherwise
  // one more; each case is an exact k-step prediction.
  const double v_lo = k_step_prediction_variance(chain, whole);
  const double v_hi = k_step_prediction_variance(chain, whole + 1);
  return (1.0 - frac) * v_lo + frac * v_hi;
}

Posterior posterior_at(const Dtmc& chain,
                       const std::vector<std::vector<SymbolObservation>>& observations,
                       std::size_t target_index) {
  require_chain(chain);
  const std::size_t n = chain.values.size();
  const std::size_t len = observations.size();
  if (target_index >= len) throw InvalidParameter("target_index", "outside the window");

  auto emission = [&](std::size_t pos, std::size_t state) {
    double loglike = 0.0;
    for (const SymbolObservation& obs : observations[pos]) {
      if (obs.exposure <= 0.0) continue;
      const double mean = obs.exposure * std::sqrt(obs.snr) * chain.values[state];
      const double diff = obs.value - mean;
      loglike += -0.5 * diff * diff / obs.exposure;
    }
    return loglike;
  };

  // Forward pass in probability space with per-step renormalization; the
  // shared Gaussian normalizers cancel.
  std::vector<std::vector<double>> fwd(len, std::vector<double>(n));
  for (std::size_t pos = 0; pos < len; ++pos) {
    std::vector<double> loglikes(n);
    double ll_max = -1e300;
    for (std::size_t s = 0; s < n; ++s) {
      loglikes[s] = emission(pos, s);
      ll_max = std::max(ll_max, loglikes[s]);
    }
    double total = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      double prior = 0.0;
      if (pos == 0) {
        prior = chain.stationary[s];
      } else {
        for (std::size_t r = 0; r < n; ++r) prior += fwd[pos - 1][r] * chain.transition[r][s];
      }
      fwd[pos][s] = prior * std::exp(loglikes[s] - ll_max);
      total += fwd[pos][s];
    }
    for (std::size_t s = 0; s < n; ++s) fwd[pos][s] /= total;
  }

  // Backward pass from the end of the window down to the target.
  std::vector<double> bwd(n, 1.0);
  for (std::size_t pos = len - 1; pos > target_index; --pos) {
    std::vector<double> loglikes(n);
    double ll_max = -1e300;
    for (std::size_t s = 0; s < n; ++s) {
      loglikes[s] = emission(pos, s);
      ll_max = std::max(ll_max, loglikes[s]);
    }
    std::vector<double> next(n, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t s = 0; s < n; ++s) {
        next[r] += chain.transition[r][s] * std::exp(loglikes[s] - ll_max) * bwd[s];
      }
      total += next[r];
    }
    for (std::size_t r = 0; r < n; ++r) next[r] /= total;
    bwd = std::move(next);
  }

  Posterior post;
  post.probs.resize(n);
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    post.probs[s] = fwd[target_index][s] * bwd[s];
    total += post.probs[s];
  }
  for (std::size_t s = 0; s < n; ++s) post.probs[s] /= total;
  for (std::size_t s = 0; s < n; ++s) post.mean += post.probs[s] * chain.values[s];
  post.variance = distribution_variance(post.probs, chain.values);
  return post;
}

namespace {

// Window simulation shared by the MC estimators. Draw order is fixed and
// exposure independent (one uniform per transition, one gaussian per
// observation slot) so different exposures reuse common random numbers.
struct WindowSample {
  std::vector<std::size_t> states;
};

WindowSample simulate_window(const Dtmc& chain, std::size_t len, PhiloxStream& rng) {
  WindowSample w;
  w.states.resize(len);
  w.states[0] = sample_index(chain.stationary, rng.next_double());
  for (std::size_t pos = 1; pos < len; ++pos) {
    w.states[pos] =
        sample_index(chain.transition[w.states[pos - 1]], rng.next_double());
  }
  return w;
}

double observe(const Dtmc& chain, std::size_t state, double exposure, double snr,
               PhiloxStream& rng) {
  const double z = rng.next_gaussian();  // drawn even for zero exposure
  if (exposure <= 0.0) return 0.0;
  return exposure * std::sqrt(snr) * chain.values[state] + std::sqrt(exposure) * z;
}

sim::McEstimate reduce(const std::vector<double>& samples, const sim::McConfig& mc,
                       const char* what) {
  const auto agg = numerics::mean_stderr(samples);
  sim::McEstimate est;
  est.value = agg.value;
  est.stderr_ = agg.stderr_;
  est.samples = agg.count;
  if (mc.target_stderr > 0.0 && est.stderr_ > mc.target_stderr) {
    throw McBudgetExceeded(std::string(what) + ": stderr target unmet");
  }
  return est;
}

}  // namespace

sim::McEstimate hmm_window_variance(const Dtmc& chain, double gamma1, double gamma2,
                                    int hist_len, const sim::McConfig& mc, double snr,
                                    int target_offset, bool squared_residual,
                                    std::uint64_t stream_salt) {
  require_chain(chain);
  if (hist_len < 1) throw InvalidParameter("hist_len", "must be >= 1");
  if (gamma1 < 0.0 || gamma1 > 1.0 || gamma2 < 0.0 || gamma2 > 1.0) {
    throw InvalidParameter("gamma1", "exposures must lie in [0, 1]");
  }
  if (target_offset != 0 && target_offset != 1) {
    throw InvalidParameter("target_offset", "supported targets are 0 and +1");
  }
  const std::size_t len = static_cast<std::size_t>(hist_len) + 2;
  const std::size_t target = static_cast<std::size_t>(hist_len) + target_offset;

  std::vector<double> samples(mc.paths);
  parallel_for(mc.paths, [&](std::size_t p) {
    PhiloxStream rng(mc.seed, stream_salt * 0x100000000ull + p);
    const WindowSample w = simulate_window(chain, len, rng);
    std::vector<std::vector<SymbolObservation>> obs(len);
    for (std::size_t pos = 0; pos < len; ++pos) {
      double exposure = 1.0;
      if (pos == len - 2) exposure = gamma1;
      if (pos == len - 1) exposure = gamma2;
      const double value = observe(chain, w.states[pos], exposure, snr, rng);
      obs[pos].push_back({exposure, snr, value});
    }
    const Posterior post = posterior_at(chain, obs, target);
    if (squared_residual) {
      const double e = post.mean - chain.values[w.states[target]];
      samples[p] = e * e;
    } else {
      samples[p] = post.variance;
    }
  });
  return reduce(samples, mc, "hmm_window_variance");
}

sim::McEstimate lmmse_shifted(const Dtmc& chain, double d, int hist_len,
                              const sim::McConfig& mc, double snr,
                              bool squared_residual) {
  require_chain(chain);
  if (!(d > -1.0) || !(d < 1.0)) throw InvalidParameter("d", "must lie in (-1, 1)");
  const auto& rule = numerics::gauss_legendre(16);

  struct NodeJob {
    double gamma1, gamma2;
    int target;
    double weight;  // already scaled by the segment half-length
  };
  std::vector<NodeJob> jobs;
  auto add_segment = [&](double a, double b, auto&& make_job) {
    if (!(b > a)) return;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int i = 0; i < 16; ++i) {
      const double u = mid + half * rule.nodes[i];
      jobs.push_back(make_job(u, rule.weights[i] * half));
    }
  };

  if (d >= 0.0) {
    // lmmse(d) = int_0^d h(1, d-u) du + int_d^1 h(1+d-u, 0) du.
    add_segment(0.0, d, [&](double u, double w) {
      return NodeJob{1.0, d - u, 0, w};
    });
    add_segment(d, 1.0, [&](double u, double w) {
      return NodeJob{1.0 + d - u, 0.0, 0, w};
    });
  } else {
    // Mirror decomposition: a shift u < 1-|d| leaves the target symbol
    // partially exposed; beyond that only the previous symbol is seen and
    // the estimate is a one-step prediction.
    const double b = -d;
    add_segment(0.0, 1.0 - b, [&](double u, double w) {
      return NodeJob{1.0 + d - u, 0.0, 0, w};
    });
    add_segment(1.0 - b, 1.0, [&](double u, double w) {
      return NodeJob{2.0 + d - u, 0.0, 1, w};
    });
  }

  double value = 0.0, var_acc = 0.0;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto est = hmm_window_variance(chain, jobs[j].gamma1, jobs[j].gamma2, hist_len,
                                         mc, snr, jobs[j].target, squared_residual,
                                         /*stream_salt=*/j + 1);
    value += jobs[j].weight * est.value;
    var_acc += jobs[j].weight * jobs[j].weight * est.stderr_ * est.stderr_;
  }
  sim::McEstimate out;
  out.value = value;
  out.stderr_ = std::sqrt(var_acc);
  out.samples = jobs.size() * mc.paths;
  return out;
}

sim::McEstimate jump_window_variance(const Dtmc& chain, double snr_past,
                                     double gamma_future, double d, double l,
                                     int hist_len, const sim::McConfig& mc) {
  require_chain(chain);
  if (!(d >= 0.0) || !(l >= 0.0)) throw InvalidParameter("d", "d and l must be >= 0");
  if (l == kInf) l = 40.0;  // the chain mixes in a few steps; 40 symbols is past

  std::vector<double> samples(mc.paths);
  parallel_for(mc.paths, [&](std::size_t p) {
    PhiloxStream rng(mc.seed, p);
    const double shift = rng.next_double();
    // Symbol i occupies (i - 1 + shift, i + shift]. The window covers
    // indices touching (obs_start, d + l].
    const double obs_end = d + l;
    const int i_max = static_cast<int>(std::ceil(obs_end - shift));
    const int i_min = i_max - hist_len - static_cast<int>(std::ceil(obs_end)) - 2;
    const std::size_t len = static_cast<std::size_t>(i_max - i_min + 1);

    const WindowSample w = simulate_window(chain, len, rng);
    std::vector<std::vector<SymbolObservation>> obs(len);
    for (int i = i_min; i <= i_max; ++i) {
      const double lo = i - 1.0 + shift;
      const double hi = std::min(i + shift, obs_end);
      const std::size_t pos = static_cast<std::size_t>(i - i_min);
      // Split the observed part of the interval at the SNR jump (t = 0).
      const double mid = std::clamp(0.0, lo, hi);
      const double past_len = std::max(0.0, mid - lo);
      const double future_len = std::max(0.0, hi - mid);
      if (past_len > 0.0) {
        obs[pos].push_back(
            {past_len, snr_past, observe(chain, w.states[pos], past_len, snr_past, rng)});
      } else {
        rng.next_gaussian();  // keep the draw order exposure independent
      }
      if (future_len > 0.0) {
        obs[pos].push_back({future_len, gamma_future,
                            observe(chain, w.states[pos], future_len, gamma_future, rng)});
      } else {
        rng.next_gaussian();
      }
    }
    // Target symbol: the one whose interval contains time d.
    const int target_i = static_cast<int>(std::ceil(d - shift));
    const std::size_t target = static_cast<std::size_t>(target_i - i_min);
    const Posterior post = posterior_at(chain, obs, target);
    samples[p] = post.variance;
  });
  return reduce(samples, mc, "jump_window_variance");
}

Theorem2Report theorem2_report(const Dtmc& chain, const std::vector<double>& d_grid,
                               int hist_len, const sim::McConfig& mc, double snr) {
  require_chain(chain);
  const Dtmc rev = reverse(chain);
  Theorem2Report report;
  {
    ValidatedSpec spec = validate(chain);
    report.var0 = stationary_variance(spec);
  }
  const auto at_zero_fwd = lmmse_shifted(chain, 0.0, hist_len, mc, snr);
  const auto at_zero_rev = lmmse_shifted(rev, 0.0, hist_len, mc, snr);
  report.cmmse_fwd = at_zero_fwd.value;
  report.cmmse_fwd_se = at_zero_fwd.stderr_;
  report.cmmse_rev = at_zero_rev.value;
  report.cmmse_rev_se = at_zero_rev.stderr_;

  for (double d : d_grid) {
    Theorem2Row row;
    row.d = d;
    const auto fwd = lmmse_shifted(chain, d, hist_len, mc, snr);
    const auto rv = lmmse_shifted(rev, d, hist_len, mc, snr);
    row.fwd = fwd.value;
    row.fwd_se = fwd.stderr_;
    row.rev = rv.value;
    row.rev_se = rv.stderr_;
    row.fwd_inf_snr = lmmse_infinite_snr(chain, d);
    row.rev_inf_snr = lmmse_infinite_snr(rev, d);
    const double gap = std::abs(row.fwd - row.rev);
    const double combined = std::sqrt(row.fwd_se * row.fwd_se + row.rev_se * row.rev_se);
    row.significant = gap > 3.0 * combined;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace lagmmse::markov
