//! Monte Carlo asymptotics of the log-radius.
//!
//! The central quantity is the normalized growth rate
//!
//! ```text
//! beta_hat = log R_n / S_n,      S_n = Σ_{j=1}^n j^{-2α},
//! ```
//!
//! which for `α ≤ 1/2` and non-resonant energies concentrates around
//! `β(E, λ) = λ²/(2(4−E²)) = λ²/(8 sin²k)`. For `α > 1/2` the fourth moment
//! `E[R_n⁴]` stays bounded by an explicit convergent product, which this
//! module also measures. A term-by-term decomposition of `2·log R_n`
//! separates the deterministic drift from the martingale and oscillatory
//! corrections.

use crate::error::Error;
use crate::model::{DisorderRealization, EnergyPoint, ModelParams, derived_seed, sample_disorder};
use crate::prufer::{prufer_init, prufer_step};
use crate::stats::mean_and_stderr;
use rayon::prelude::*;

/// `β(E, λ) = λ²/(2(4−E²))`, identical to `λ²/(8 sin²k)`.
pub fn theoretical_beta(ep: &EnergyPoint, lambda: f64) -> f64 {
    lambda * lambda / (2.0 * (4.0 - ep.e * ep.e))
}

/// Exact partial sum `S_n = Σ_{j=1}^n j^{-2α}`.
pub fn normalizer(alpha: f64, n: usize) -> f64 {
    let p = -2.0 * alpha;
    (1..=n).map(|j| (j as f64).powf(p)).sum()
}

// ═══════════════════════════════════════════════════════════════════
//  Lyapunov estimation
// ═══════════════════════════════════════════════════════════════════

/// Monte Carlo estimate of the normalized log-radius growth rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovEstimate {
    pub energy: EnergyPoint,
    pub alpha: f64,
    pub lambda: f64,
    pub n: usize,
    pub realizations: usize,
    /// Mean over realizations of `log R_n / S_n`.
    pub beta_hat: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    /// The normalizer `S_n`.
    pub s_n: f64,
    /// Propagated from the energy point; resonant estimates are reported
    /// but not covered by the growth formula.
    pub resonant: bool,
}

/// `estimate_beta` with an explicit initial direction.
pub fn estimate_beta_from_angle(
    params: &ModelParams,
    ep: &EnergyPoint,
    n: usize,
    realizations: usize,
    master_seed: u64,
    theta0: f64,
) -> Result<LyapunovEstimate, Error> {
    if n < 1000 {
        return Err(Error::ChainTooShort(n));
    }
    if realizations == 0 {
        return Err(Error::InvalidParameter("need at least one realization".into()));
    }
    let s_n = normalizer(params.alpha, n);
    let betas: Vec<f64> = (0..realizations)
        .into_par_iter()
        .map(|i| {
            let r = sample_disorder(&params.disorder, derived_seed(master_seed, i as u64), n);
            let mut s = prufer_init(theta0, ep);
            for j in 1..n {
                let v = params.lambda * params.envelope(j) * r.value(j);
                s = prufer_step(&s, v, ep);
            }
            s.log_radius / s_n
        })
        .collect();
    let (beta_hat, stderr) = mean_and_stderr(&betas);
    Ok(LyapunovEstimate {
        energy: *ep,
        alpha: params.alpha,
        lambda: params.lambda,
        n,
        realizations,
        beta_hat,
        stderr,
        s_n,
        resonant: ep.resonant,
    })
}

/// Estimate `log R_n / S_n` averaged over disorder realizations, from the
/// default initial direction. Deterministic given `master_seed`, independent
/// of worker count.
pub fn estimate_beta(
    params: &ModelParams,
    ep: &EnergyPoint,
    n: usize,
    realizations: usize,
    master_seed: u64,
) -> Result<LyapunovEstimate, Error> {
    estimate_beta_from_angle(params, ep, n, realizations, master_seed, 0.0)
}

// ═══════════════════════════════════════════════════════════════════
//  Fourth-moment boundedness (α > 1/2)
// ═══════════════════════════════════════════════════════════════════

/// Empirical fourth-moment curve together with its explicit product bound.
#[derive(Debug, Clone, PartialEq)]
pub struct FourthMomentCurve {
    /// Log-spaced checkpoints `j`.
    pub grid: Vec<usize>,
    /// Empirical `E[R_j⁴]` at the checkpoints.
    pub empirical: Vec<f64>,
    /// Product bound `Π_{i<j}(1 + c·i^{-2α})` at the checkpoints.
    pub bound: Vec<f64>,
    /// Limit of the bound as `j → ∞` (the product converges for `α > 1/2`).
    pub bound_limit: f64,
    /// The per-step constant `c` in the bound.
    pub c_constant: f64,
}

impl FourthMomentCurve {
    /// Relative spread `max/min − 1` of the empirical curve over checkpoints
    /// in the final decade `[n/10, n]`.
    pub fn last_decade_variation(&self) -> f64 {
        let n = *self.grid.last().expect("non-empty grid");
        let lo = n / 10;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for (j, v) in self.grid.iter().zip(&self.empirical) {
            if *j >= lo {
                min = min.min(*v);
                max = max.max(*v);
            }
        }
        max / min - 1.0
    }
}

/// The explicit worst-case step constant for the fourth-moment recursion:
/// with `y = λB/|sin k|` the one-step factor obeys
/// `E[R⁴_{n+1} | F] ≤ (1 + c·n^{-2α})·R⁴_n` for
/// `c = (9/4)y² + (3√3/4)y³ + y⁴`, the coefficients being the exact maxima
/// of the trigonometric weights of the second, third and fourth order
/// terms.
pub fn fourth_moment_step_constant(params: &ModelParams, ep: &EnergyPoint) -> f64 {
    let y = (params.lambda * params.disorder.support_bound / ep.sin_k).abs();
    2.25 * y * y + 0.75 * 3.0f64.sqrt() * y * y * y + y.powi(4)
}

/// Track `E[R_j⁴]` on a log-spaced grid for a super-critical decay rate,
/// together with the explicit product bound.
pub fn fourth_moment_curve(
    params: &ModelParams,
    ep: &EnergyPoint,
    n: usize,
    realizations: usize,
    master_seed: u64,
) -> Result<FourthMomentCurve, Error> {
    if params.alpha <= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "fourth-moment tracking requires alpha > 1/2, got {}",
            params.alpha
        )));
    }
    if n < 10 || realizations == 0 {
        return Err(Error::InvalidParameter("need n >= 10 and at least one realization".into()));
    }

    let grid = log_grid(10, n, 25);
    let per_real: Vec<Vec<f64>> = (0..realizations)
        .into_par_iter()
        .map(|i| {
            let r = sample_disorder(&params.disorder, derived_seed(master_seed, i as u64), n);
            let mut s = prufer_init(0.0, ep);
            let mut out = Vec::with_capacity(grid.len());
            let mut next = 0;
            for j in 1..=n {
                while next < grid.len() && grid[next] == j {
                    out.push((4.0 * s.log_radius).exp());
                    next += 1;
                }
                if j < n {
                    let v = params.lambda * params.envelope(j) * r.value(j);
                    s = prufer_step(&s, v, ep);
                }
            }
            out
        })
        .collect();

    let empirical: Vec<f64> = (0..grid.len())
        .map(|g| per_real.iter().map(|row| row[g]).sum::<f64>() / realizations as f64)
        .collect();

    let c = fourth_moment_step_constant(params, ep);
    let p = -2.0 * params.alpha;
    let mut bound = Vec::with_capacity(grid.len());
    let mut log_bound = 0.0;
    let mut j = 1usize;
    for &g in &grid {
        while j < g {
            log_bound += (c * (j as f64).powf(p)).ln_1p();
            j += 1;
        }
        bound.push(log_bound.exp());
    }
    // Tail of the convergent product past the largest checkpoint computed
    // site by site, then an integral bound for the rest.
    let mut log_limit = log_bound;
    let tail_start = j.max(2);
    let tail_end = tail_start + 2_000_000;
    for i in tail_start..tail_end {
        log_limit += (c * (i as f64).powf(p)).ln_1p();
    }
    log_limit += c * (tail_end as f64).powf(p + 1.0) / (2.0 * params.alpha - 1.0);
    Ok(FourthMomentCurve {
        grid,
        empirical,
        bound,
        bound_limit: log_limit.exp(),
        c_constant: c,
    })
}

/// Log-spaced integer grid from `lo` to `hi` inclusive, deduplicated.
pub fn log_grid(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    assert!(lo >= 1 && hi >= lo && points >= 2);
    let (llo, lhi) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            (llo + t * (lhi - llo)).exp().round() as usize
        })
        .collect();
    out.dedup();
    out
}

// ═══════════════════════════════════════════════════════════════════
//  Decomposition of 2·log R_n
// ═══════════════════════════════════════════════════════════════════

/// Running sums of the term groups in the expansion of `2 log R_n`:
/// the deterministic drift, three martingale groups, the deterministic
/// oscillatory sum, and the cubic Taylor remainder. The six groups add up
/// to `2 log R_n` identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionTrace {
    /// `Σ E[V_j²]/(4 sin²k)`, the term that carries the growth.
    pub drift: f64,
    /// `Σ (V_j/sin k)·sin 2θ̄_j`.
    pub martingale_linear: f64,
    /// `Σ (V_j² − E[V_j²])/(4 sin²k)`.
    pub martingale_quadratic: f64,
    /// `Σ ((V_j² − E[V_j²])/sin²k)·(½cos 2θ̄_j + ¼cos 4θ̄_j)`.
    pub martingale_oscillatory: f64,
    /// `Σ (E[V_j²]/sin²k)·(½cos 2θ̄_j + ¼cos 4θ̄_j)`.
    pub oscillatory: f64,
    /// Everything of third order and beyond.
    pub cubic_remainder: f64,
    /// `2 log R_n` of the chain the trace followed.
    pub two_log_radius: f64,
    /// `S_n` for ratio reporting.
    pub s_n: f64,
    pub resonant: bool,
}

impl DecompositionTrace {
    pub fn sum_of_groups(&self) -> f64 {
        self.drift
            + self.martingale_linear
            + self.martingale_quadratic
            + self.martingale_oscillatory
            + self.oscillatory
            + self.cubic_remainder
    }

    /// Martingale group magnitudes relative to `S_n`.
    pub fn martingale_ratios(&self) -> [f64; 3] {
        [
            (self.martingale_linear / self.s_n).abs(),
            (self.martingale_quadratic / self.s_n).abs(),
            (self.martingale_oscillatory / self.s_n).abs(),
        ]
    }
}

/// Follow one realization and accumulate the term groups of the
/// log-expansion alongside the chain.
pub fn decomposition_trace(
    realization: &DisorderRealization,
    ep: &EnergyPoint,
    params: &ModelParams,
    n: usize,
) -> DecompositionTrace {
    assert!(realization.len() >= n, "realization shorter than requested chain");
    let sin2 = ep.sin_k * ep.sin_k;
    let mut t = DecompositionTrace {
        drift: 0.0,
        martingale_linear: 0.0,
        martingale_quadratic: 0.0,
        martingale_oscillatory: 0.0,
        oscillatory: 0.0,
        cubic_remainder: 0.0,
        two_log_radius: 0.0,
        s_n: normalizer(params.alpha, n),
        resonant: ep.resonant,
    };
    let mut s = prufer_init(0.0, ep);
    for j in 1..n {
        let a_j = params.envelope(j);
        let v = params.lambda * a_j * realization.value(j);
        let ev2 = params.lambda * params.lambda * a_j * a_j; // E[V_j²], unit variance
        let tb = s.theta_bar;
        let next = prufer_step(&s, v, ep);
        let log_m = 2.0 * (next.log_radius - s.log_radius);

        let c = v / ep.sin_k;
        let osc_weight = 0.5 * (2.0 * tb).cos() + 0.25 * (4.0 * tb).cos();
        let drift = ev2 / (4.0 * sin2);
        let m1 = c * (2.0 * tb).sin();
        let m2 = (v * v - ev2) / (4.0 * sin2);
        let m3 = (v * v - ev2) / sin2 * osc_weight;
        let osc = ev2 / sin2 * osc_weight;

        t.drift += drift;
        t.martingale_linear += m1;
        t.martingale_quadratic += m2;
        t.martingale_oscillatory += m3;
        t.oscillatory += osc;
        t.cubic_remainder += log_m - (drift + m1 + m2 + m3 + osc);
        s = next;
    }
    t.two_log_radius = 2.0 * s.log_radius;
    t
}

// ═══════════════════════════════════════════════════════════════════
//  Oscillatory sums
// ═══════════════════════════════════════════════════════════════════

/// Value of the normalized oscillatory sum for one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorySum {
    /// `Σ_{j≤n} E[V_j²](½cos 2θ̄_j + ¼cos 4θ̄_j) / S_n`.
    pub ratio: f64,
    /// At resonant quasi-momenta the ratio need not vanish; it is reported
    /// but not asserted against.
    pub resonant: bool,
}

/// The oscillatory phase average whose vanishing drives the growth formula.
pub fn oscillatory_sum_ratio(
    realization: &DisorderRealization,
    ep: &EnergyPoint,
    params: &ModelParams,
    n: usize,
) -> OscillatorySum {
    assert!(realization.len() >= n, "realization shorter than requested chain");
    let mut sum = 0.0;
    let mut s = prufer_init(0.0, ep);
    for j in 1..=n {
        let a_j = params.envelope(j);
        let ev2 = params.lambda * params.lambda * a_j * a_j;
        let tb = s.theta_bar;
        sum += ev2 * (0.5 * (2.0 * tb).cos() + 0.25 * (4.0 * tb).cos());
        if j < n {
            let v = params.lambda * a_j * realization.value(j);
            s = prufer_step(&s, v, ep);
        }
    }
    OscillatorySum { ratio: sum / normalizer(params.alpha, n), resonant: ep.resonant }
}

// ═══════════════════════════════════════════════════════════════════
//  Tests
// ═══════════════════════════════════════════════════════════════════
