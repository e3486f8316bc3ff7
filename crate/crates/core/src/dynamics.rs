//! Quantum dynamics on finite boxes: Abel-averaged transport moments,
//! eigenfunction correlators, Green's-function fractional moments, and the
//! stretched-exponential divergence witness.
//!
//! Everything runs through the spectral decomposition of a box: with
//! eigenpairs `(E_j, ψ_j)` and initial site `m₀`, the evolved state is
//! `e^{-itH} f(H) δ_{m₀} = Σ_j f(E_j) ψ_j(m₀) e^{-itE_j} ψ_j`, and the Abel
//! time average of position moments evaluates in closed form over pairs of
//! eigenstates.

use crate::error::Error;
use crate::model::{EnergyPoint, ModelParams, derived_seed, sample_disorder};
use crate::prufer::single_transfer;
use crate::spectrum::{BoxHamiltonian, EigenPair, solve_shifted_tridiag, sturm_count};
use crate::stats::{LinearFit, linear_fit, log_sum_exp, mean_and_stderr};
use rayon::prelude::*;

// ═══════════════════════════════════════════════════════════════════
//  Spectral evolution
// ═══════════════════════════════════════════════════════════════════

/// Spectral decomposition of the initial state `δ_{m₀}` over a full set of
/// box eigenpairs.
#[derive(Debug, Clone)]
pub struct SpectralEvolution {
    pub pairs: Vec<EigenPair>,
    pub site: usize,
    /// `c_j = ψ_j(m₀)`.
    pub coefficients: Vec<f64>,
}

impl SpectralEvolution {
    /// Build the evolution; the eigenbasis must be complete at the initial
    /// site (`Σ_j c_j² = 1`), which guards against passing a windowed set.
    pub fn new(pairs: Vec<EigenPair>, site: usize) -> Result<Self, Error> {
        let coefficients: Vec<f64> = pairs.iter().map(|p| p.vector[site]).collect();
        let total: f64 = coefficients.iter().map(|c| c * c).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "eigenbasis incomplete at site {site}: sum of squared coefficients {total}"
            )));
        }
        Ok(SpectralEvolution { pairs, site, coefficients })
    }

    pub fn sites(&self) -> usize {
        self.pairs[0].vector.len()
    }

    /// Real and imaginary parts of `e^{-itH} f(H) δ_{m₀}` on all sites.
    pub fn amplitude(&self, weight: &SpectralWeight, t: f64) -> (Vec<f64>, Vec<f64>) {
        let m = self.sites();
        let mut re = vec![0.0; m];
        let mut im = vec![0.0; m];
        for (pair, c) in self.pairs.iter().zip(&self.coefficients) {
            let f = weight.eval(pair.eigenvalue);
            if f == 0.0 {
                continue;
            }
            let (s, co) = (t * pair.eigenvalue).sin_cos();
            let wr = c * f * co;
            let wi = -c * f * s;
            for (n, psi) in pair.vector.iter().enumerate() {
                re[n] += wr * psi;
                im[n] += wi * psi;
            }
        }
        (re, im)
    }
}

/// Energy filter: a sharp indicator of an interval, or a C² bump equal to 1
/// on the core of the interval with quintic-smoothstep shoulders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralWeight {
    Indicator { lo: f64, hi: f64 },
    Bump { lo: f64, hi: f64, shoulder: f64 },
    One,
}

impl SpectralWeight {
    pub fn indicator(lo: f64, hi: f64) -> Self {
        SpectralWeight::Indicator { lo, hi }
    }

    /// Bump window: 1 on `[lo+shoulder, hi−shoulder]`, smooth C² roll-off to
    /// 0 at the interval ends.
    pub fn bump(lo: f64, hi: f64, shoulder: f64) -> Self {
        SpectralWeight::Bump { lo, hi, shoulder }
    }

    pub fn eval(&self, e: f64) -> f64 {
        match *self {
            SpectralWeight::One => 1.0,
            SpectralWeight::Indicator { lo, hi } => {
                if (lo..=hi).contains(&e) { 1.0 } else { 0.0 }
            }
            SpectralWeight::Bump { lo, hi, shoulder } => {
                if e <= lo || e >= hi {
                    return 0.0;
                }
                let up = smoothstep5(((e - lo) / shoulder).min(1.0));
                let down = smoothstep5(((hi - e) / shoulder).min(1.0));
                up * down
            }
        }
    }
}

fn smoothstep5(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

// ═══════════════════════════════════════════════════════════════════
//  Abel-averaged transport moments
// ═══════════════════════════════════════════════════════════════════

/// Precomputed quadratic form for the Abel-averaged moment of one
/// `(evolution, p, weight)` triple, reusable across times.
///
/// The time average `(2/T)∫ e^{-2t/T} e^{-it(E_j−E_k)} dt` evaluates to
/// `1/(1 + iT(E_j−E_k)/2)`; by the `(j,k)` symmetry of the weights only its
/// real part `1/(1 + T²(E_j−E_k)²/4)` survives, so
///
/// ```text
/// M(p, f, T) = Σ_{j,k} w_j w_k P_{jk} / (1 + T²(E_j−E_k)²/4),
/// w_j = f(E_j)·ψ_j(m₀),   P_{jk} = Σ_n n^p ψ_j(n) ψ_k(n).
/// ```
pub struct AbelMomentPlan {
    energies: Vec<f64>,
    weights: Vec<f64>,
    position_form: Vec<f64>,
    pub p: f64,
}

impl AbelMomentPlan {
    pub fn new(ev: &SpectralEvolution, p: f64, weight: &SpectralWeight) -> Self {
        let mut energies = Vec::new();
        let mut weights = Vec::new();
        let mut vectors: Vec<&[f64]> = Vec::new();
        for (pair, c) in ev.pairs.iter().zip(&ev.coefficients) {
            let f = weight.eval(pair.eigenvalue);
            if f != 0.0 {
                energies.push(pair.eigenvalue);
                weights.push(f * c);
                vectors.push(&pair.vector);
            }
        }
        let m = ev.sites();
        let np: Vec<f64> = (0..m).map(|n| (n as f64).powf(p)).collect();
        let j_count = energies.len();
        let mut position_form = vec![0.0; j_count * j_count];
        for j in 0..j_count {
            for k in j..j_count {
                let mut s = 0.0;
                for n in 0..m {
                    s += np[n] * vectors[j][n] * vectors[k][n];
                }
                position_form[j * j_count + k] = s;
                position_form[k * j_count + j] = s;
            }
        }
        AbelMomentPlan { energies, weights, position_form, p }
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Squared norm of the filtered initial state, `Σ_j w_j²`.
    pub fn mass(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// The `T → 0` limit of the moment: the static spread
    /// `‖|X|^{p/2} f(H) δ_{m₀}‖²` of the filtered initial state. A sharp
    /// energy window gives the state slow spatial tails, so this floor is
    /// not small; growth fits must clear it.
    pub fn static_moment(&self) -> f64 {
        let jc = self.energies.len();
        let mut total = 0.0;
        for j in 0..jc {
            for k in 0..jc {
                total += self.weights[j] * self.weights[k] * self.position_form[j * jc + k];
            }
        }
        total.max(0.0)
    }

    /// Evaluate the Abel moment at time `T`.
    pub fn at(&self, t: f64) -> Result<f64, Error> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("Abel time must be positive, got {t}")));
        }
        let jc = self.energies.len();
        let mut total = 0.0;
        for j in 0..jc {
            for k in 0..jc {
                let de = self.energies[j] - self.energies[k];
                let kernel = 1.0 / (1.0 + 0.25 * t * t * de * de);
                total += self.weights[j] * self.weights[k] * self.position_form[j * jc + k] * kernel;
            }
        }
        Ok(total.max(0.0))
    }
}

/// Closed-form Abel-averaged moment of order `p` over the energy window.
pub fn abel_moment(
    ev: &SpectralEvolution,
    p: f64,
    weight: &SpectralWeight,
    t: f64,
) -> Result<f64, Error> {
    AbelMomentPlan::new(ev, p, weight).at(t)
}

/// Reference evaluation of the same moment by adaptive quadrature of the
/// time integral, truncated at `t ≤ 20T` where the kernel has decayed to
/// `e^{-40}`. Slow; used to validate the closed form.
pub fn abel_moment_quadrature(
    ev: &SpectralEvolution,
    p: f64,
    weight: &SpectralWeight,
    t_cap: f64,
    tol: f64,
) -> Result<f64, Error> {
    if !(t_cap > 0.0) {
        return Err(Error::InvalidParameter(format!("Abel time must be positive, got {t_cap}")));
    }
    let m = ev.sites();
    let np: Vec<f64> = (0..m).map(|n| (n as f64).powf(p)).collect();
    let integrand = |t: f64| -> f64 {
        let (re, im) = ev.amplitude(weight, t);
        let spread: f64 = (0..m).map(|n| np[n] * (re[n] * re[n] + im[n] * im[n])).sum();
        (2.0 / t_cap) * (-2.0 * t / t_cap).exp() * spread
    };
    Ok(adaptive_simpson(&integrand, 0.0, 20.0 * t_cap, tol, 28))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// An Abel-moment curve over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCurve {
    pub p: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Number of sites of the underlying box, for the saturation guard.
    pub sites: usize,
    /// Squared norm of the filtered initial state; 1 for the full-band
    /// weight, smaller for a window.
    pub mass: f64,
    /// The `T → 0` static spread of the filtered state.
    pub static_value: f64,
}

/// Evaluate the moment on an increasing time grid.
pub fn moment_curve(
    ev: &SpectralEvolution,
    p: f64,
    weight: &SpectralWeight,
    times: &[f64],
) -> Result<MomentCurve, Error> {
    let plan = AbelMomentPlan::new(ev, p, weight);
    let values = times.iter().map(|t| plan.at(*t)).collect::<Result<Vec<_>, _>>()?;
    Ok(MomentCurve {
        p,
        times: times.to_vec(),
        values,
        sites: ev.sites(),
        mass: plan.mass(),
        static_value: plan.static_moment(),
    })
}

/// Saturation guard: fits use only times whose packet displacement stays
/// inside a quarter of the box, i.e. moment values at most
/// `mass · (L/4)^p` (the moment carries the filtered mass as a factor).
pub fn saturation_threshold(curve: &MomentCurve) -> f64 {
    curve.mass * ((curve.sites - 1) as f64 / 4.0).powf(curve.p)
}

/// Log-log slope of the moment curve over times in `fit_range`.
pub fn transport_exponent(curve: &MomentCurve, fit_range: (f64, f64)) -> Result<f64, Error> {
    let cap = saturation_threshold(curve);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, v) in curve.times.iter().zip(&curve.values) {
        if *t < fit_range.0 || *t > fit_range.1 {
            continue;
        }
        if *v > cap {
            return Err(Error::SaturatedRange);
        }
        if *v > 0.0 {
            xs.push(t.ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 5 {
        return Err(Error::WindowTooSmall { got: xs.len(), need: 5 });
    }
    Ok(linear_fit(&xs, &ys).slope)
}

/// Fit window for transport exponents: the latest `max_points` grid times
/// whose values sit below the saturation cap and at least five times above
/// the static floor, so the fitted slope measures spreading rather than the
/// initial profile or boundary reflections. `None` when fewer than five
/// points qualify.
pub fn growth_fit_range(curve: &MomentCurve, max_points: usize) -> Option<(f64, f64)> {
    let cap = saturation_threshold(curve);
    let floor = 5.0 * curve.static_value;
    let kept: Vec<f64> = curve
        .times
        .iter()
        .zip(&curve.values)
        .filter(|(_, v)| **v <= cap && **v >= floor)
        .map(|(t, _)| *t)
        .collect();
    if kept.len() < 5 {
        return None;
    }
    let take = kept.len().min(max_points.max(5));
    Some((kept[kept.len() - take], *kept.last().unwrap()))
}

// ═══════════════════════════════════════════════════════════════════
//  Eigenfunction correlators
// ═══════════════════════════════════════════════════════════════════

/// One correlator sample `Q(m, n; I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorRecord {
    pub m: usize,
    pub n: usize,
    pub q: f64,
}

/// `Q(m, n; I) = Σ_{E_j ∈ I} |ψ_j(m)|·|ψ_j(n)|`. On a finite box with
/// simple spectrum the supremum over unit-bounded spectral test functions is
/// attained by a sign choice, making this sum exact.
pub fn correlator(pairs: &[EigenPair], m: usize, n: usize, interval: (f64, f64)) -> CorrelatorRecord {
    let q = pairs
        .iter()
        .filter(|p| (interval.0..=interval.1).contains(&p.eigenvalue))
        .map(|p| (p.vector[m] * p.vector[n]).abs())
        .sum();
    CorrelatorRecord { m, n, q }
}

/// Ensemble decay of the squared correlator along a distance grid, with the
/// stretching-exponent identification.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorDecay {
    pub n_grid: Vec<usize>,
    pub mean_q2: Vec<f64>,
    pub stderr_q2: Vec<f64>,
    /// Slope of `log E[Q²]` against `n^{1−2α}`.
    pub slope_at_model_exponent: f64,
    /// Candidate exponent in `{0.2, …, 0.8}` with the best linear fit of
    /// `log E[Q²]` against `n^e`.
    pub best_exponent: f64,
    pub best_fit: LinearFit,
}

/// Measure `E[Q(m, n; I)²]` over disorder and fit the stretching exponent.
pub fn correlator_decay_experiment(
    params: &ModelParams,
    interval: (f64, f64),
    m: usize,
    n_grid: &[usize],
    l: usize,
    realizations: usize,
    master_seed: u64,
) -> Result<CorrelatorDecay, Error> {
    if params.alpha >= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "correlator decay experiment requires alpha < 1/2, got {}",
            params.alpha
        )));
    }
    if realizations < 30 {
        return Err(Error::InvalidParameter(format!(
            "need at least 30 realizations, got {realizations}"
        )));
    }
    let rows: Vec<Vec<f64>> = (0..realizations)
        .into_par_iter()
        .map(|i| {
            let r = sample_disorder(&params.disorder, derived_seed(master_seed, i as u64), l + 1);
            let box_h = crate::spectrum::build_box(&r, params, l).expect("length checked");
            let pairs = crate::spectrum::eigenpairs_in_window(&box_h, interval.0, interval.1)
                .expect("windowed diagonalization");
            n_grid
                .iter()
                .map(|&n| {
                    let q = correlator(&pairs, m, n, interval).q;
                    q * q
                })
                .collect()
        })
        .collect();

    let mut mean_q2 = Vec::with_capacity(n_grid.len());
    let mut stderr_q2 = Vec::with_capacity(n_grid.len());
    for g in 0..n_grid.len() {
        let col: Vec<f64> = rows.iter().map(|row| row[g]).collect();
        let (mean, se) = mean_and_stderr(&col);
        mean_q2.push(mean);
        stderr_q2.push(se);
    }

    let log_means: Vec<f64> = mean_q2.iter().map(|v| v.max(1e-300).ln()).collect();
    let xs_model: Vec<f64> = n_grid
        .iter()
        .map(|&n| (n as f64).powf(1.0 - 2.0 * params.alpha))
        .collect();
    let slope_at_model_exponent = linear_fit(&xs_model, &log_means).slope;

    let mut best_exponent = 0.0;
    let mut best_fit = LinearFit { slope: 0.0, intercept: 0.0, r2: -1.0 };
    for step in 2..=8 {
        let e = step as f64 / 10.0;
        let xs: Vec<f64> = n_grid.iter().map(|&n| (n as f64).powf(e)).collect();
        let fit = linear_fit(&xs, &log_means);
        if fit.r2 > best_fit.r2 {
            best_fit = fit;
            best_exponent = e;
        }
    }

    Ok(CorrelatorDecay {
        n_grid: n_grid.to_vec(),
        mean_q2,
        stderr_q2,
        slope_at_model_exponent,
        best_exponent,
        best_fit,
    })
}

// ═══════════════════════════════════════════════════════════════════
//  Green's function
// ═══════════════════════════════════════════════════════════════════

/// Column `G(·, src) = (H_L − E)^{-1} δ_src` by one pivoted tridiagonal
/// solve. Fails when `E` collides with a box eigenvalue (distance below
/// `1e-12`), in which case the caller resamples.
pub fn greens_column(box_h: &BoxHamiltonian, e: f64, src: usize) -> Result<Vec<f64>, Error> {
    let tol = 1e-12;
    let below = sturm_count(&box_h.diagonal, e - tol);
    let above = sturm_count(&box_h.diagonal, e + tol);
    if below != above {
        return Err(Error::EigenvalueCollision { e, tol });
    }
    let mut rhs = vec![0.0; box_h.size()];
    rhs[src] = 1.0;
    solve_shifted_tridiag(&box_h.diagonal, e, &mut rhs)?;
    Ok(rhs)
}

/// `|G(m, n)|^s` at real energy `E`, `s ∈ (0, 1)`.
pub fn greens_fractional_moment(
    box_h: &BoxHamiltonian,
    e: f64,
    s: f64,
    m: usize,
    n: usize,
) -> Result<f64, Error> {
    if !(0.0 < s && s < 1.0) {
        return Err(Error::InvalidParameter(format!("fractional order must be in (0,1), got {s}")));
    }
    let col = greens_column(box_h, e, n)?;
    Ok(col[m].abs().powf(s))
}

/// Ensemble mean of `|G(m, n)|^s` along a distance grid; realizations whose
/// box eigenvalues collide with `E` are skipped and counted.
#[derive(Debug, Clone, PartialEq)]
pub struct GreensDecay {
    pub n_grid: Vec<usize>,
    pub mean_gs: Vec<f64>,
    pub skipped: usize,
    /// Slope of `log E[|G|^s]` against `n^{1−2α}`.
    pub slope_at_model_exponent: f64,
    pub best_exponent: f64,
    pub best_fit: LinearFit,
}

pub fn greens_decay_experiment(
    params: &ModelParams,
    e: f64,
    s: f64,
    m: usize,
    n_grid: &[usize],
    l: usize,
    realizations: usize,
    master_seed: u64,
) -> Result<GreensDecay, Error> {
    if !(0.0 < s && s < 1.0) {
        return Err(Error::InvalidParameter(format!("fractional order must be in (0,1), got {s}")));
    }
    let rows: Vec<Option<Vec<f64>>> = (0..realizations)
        .into_par_iter()
        .map(|i| {
            let r = sample_disorder(&params.disorder, derived_seed(master_seed, i as u64), l + 1);
            let box_h = crate::spectrum::build_box(&r, params, l).expect("length checked");
            match greens_column(&box_h, e, m) {
                Ok(col) => Some(n_grid.iter().map(|&n| col[n].abs().powf(s)).collect()),
                Err(_) => None,
            }
        })
        .collect();

    let kept: Vec<&Vec<f64>> = rows.iter().flatten().collect();
    let skipped = realizations - kept.len();
    if kept.is_empty() {
        return Err(Error::EigenvalueCollision { e, tol: 1e-12 });
    }
    let mean_gs: Vec<f64> = (0..n_grid.len())
        .map(|g| kept.iter().map(|row| row[g]).sum::<f64>() / kept.len() as f64)
        .collect();

    let log_means: Vec<f64> = mean_gs.iter().map(|v| v.max(1e-300).ln()).collect();
    let xs_model: Vec<f64> = n_grid
        .iter()
        .map(|&n| (n as f64).powf(1.0 - 2.0 * params.alpha))
        .collect();
    let slope_at_model_exponent = linear_fit(&xs_model, &log_means).slope;

    let mut best_exponent = 0.0;
    let mut best_fit = LinearFit { slope: 0.0, intercept: 0.0, r2: -1.0 };
    for step in 2..=8 {
        let ex = step as f64 / 10.0;
        let xs: Vec<f64> = n_grid.iter().map(|&n| (n as f64).powf(ex)).collect();
        let fit = linear_fit(&xs, &log_means);
        if fit.r2 > best_fit.r2 {
            best_fit = fit;
            best_exponent = ex;
        }
    }

    Ok(GreensDecay {
        n_grid: n_grid.to_vec(),
        mean_gs,
        skipped,
        slope_at_model_exponent,
        best_exponent,
        best_fit,
    })
}

// ═══════════════════════════════════════════════════════════════════
//  Inverse fractional transfer moments
// ═══════════════════════════════════════════════════════════════════

/// Ensemble mean of `‖T_{[m,n]} X̂_m‖^{-s}` along a distance grid, where
/// `X̂_m` is the normalized orbit direction at site `m` started from
/// `(x_0, x_{-1}) = (1, 0)`.
pub fn inverse_transfer_moment(
    params: &ModelParams,
    ep: &EnergyPoint,
    s: f64,
    m: usize,
    n_grid: &[usize],
    realizations: usize,
    master_seed: u64,
) -> Result<Vec<f64>, Error> {
    if !(0.0 <= s && s < 1.0) {
        return Err(Error::InvalidParameter(format!("fractional order must be in [0,1), got {s}")));
    }
    let n_max = *n_grid.iter().max().expect("non-empty grid");
    let rows: Vec<Vec<f64>> = (0..realizations)
        .into_par_iter()
        .map(|i| {
            let r =
                sample_disorder(&params.disorder, derived_seed(master_seed, i as u64), n_max + 1);
            let mut w = [1.0f64, 0.0f64];
            // advance to site m without accumulating
            for j in 0..m {
                let v = params.lambda * params.envelope(j) * r.value(j);
                w = single_transfer(ep, v).apply(w);
                let nrm = w[0].hypot(w[1]);
                w = [w[0] / nrm, w[1] / nrm];
            }
            let mut log_norm = 0.0;
            let mut out = Vec::with_capacity(n_grid.len());
            let mut next = 0;
            for j in m..=n_max {
                let v = params.lambda * params.envelope(j) * r.value(j);
                w = single_transfer(ep, v).apply(w);
                let nrm = w[0].hypot(w[1]);
                log_norm += nrm.ln();
                w = [w[0] / nrm, w[1] / nrm];
                while next < n_grid.len() && n_grid[next] == j {
                    out.push((-s * log_norm).exp());
                    next += 1;
                }
            }
            out
        })
        .collect();
    Ok((0..n_grid.len())
        .map(|g| rows.iter().map(|row| row[g]).sum::<f64>() / realizations as f64)
        .collect())
}

// ═══════════════════════════════════════════════════════════════════
//  Stretched-exponential divergence witness
// ═══════════════════════════════════════════════════════════════════

/// The witness values are logarithms of `‖exp(|X|^p)·e^{-itH}ψ‖²` (the raw
/// quantity overflows any float for `p ≥ 1`), with the weight truncated at
/// the box edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessCurve {
    pub times: Vec<f64>,
    pub log_values: Vec<f64>,
    /// Running maximum of `log_values`.
    pub running_max: Vec<f64>,
}

/// Track `log ‖exp(|X|^p) e^{-itH} ψ‖²` for `ψ = P_I δ_0 / ‖P_I δ_0‖` over a
/// time grid. Divergence shows up as growth of the running maximum across
/// nested grids.
pub fn stretched_divergence_witness(
    pairs: &[EigenPair],
    interval: (f64, f64),
    p_pow: f64,
    times: &[f64],
) -> Result<WitnessCurve, Error> {
    if !(p_pow > 0.0) {
        return Err(Error::InvalidParameter(format!("weight power must be positive, got {p_pow}")));
    }
    let in_window: Vec<&EigenPair> = pairs
        .iter()
        .filter(|p| (interval.0..=interval.1).contains(&p.eigenvalue))
        .collect();
    let coeffs: Vec<f64> = in_window.iter().map(|p| p.vector[0]).collect();
    let norm2: f64 = coeffs.iter().map(|c| c * c).sum();
    if norm2 <= 0.0 || in_window.is_empty() {
        return Err(Error::EmptyProjection);
    }
    let m = pairs[0].vector.len();
    let log_weights: Vec<f64> = (0..m).map(|n| 2.0 * (n as f64).powf(p_pow)).collect();

    let mut log_values = Vec::with_capacity(times.len());
    for &t in times {
        let mut re = vec![0.0; m];
        let mut im = vec![0.0; m];
        for (pair, c) in in_window.iter().zip(&coeffs) {
            let (s, co) = (t * pair.eigenvalue).sin_cos();
            let wr = c * co;
            let wi = -c * s;
            for (n, psi) in pair.vector.iter().enumerate() {
                re[n] += wr * psi;
                im[n] += wi * psi;
            }
        }
        let terms: Vec<f64> = (0..m)
            .map(|n| {
                let a2 = (re[n] * re[n] + im[n] * im[n]) / norm2;
                if a2 > 0.0 { log_weights[n] + a2.ln() } else { f64::NEG_INFINITY }
            })
            .collect();
        log_values.push(log_sum_exp(&terms));
    }
    let mut running_max = Vec::with_capacity(log_values.len());
    let mut cur = f64::NEG_INFINITY;
    for v in &log_values {
        cur = cur.max(*v);
        running_max.push(cur);
    }
    Ok(WitnessCurve { times: times.to_vec(), log_values, running_max })
}

// ═══════════════════════════════════════════════════════════════════
//  Tests
// ═══════════════════════════════════════════════════════════════════
