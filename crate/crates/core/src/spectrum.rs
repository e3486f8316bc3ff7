//! Finite-box diagonalization and eigenfunction decay measurements.
//!
//! Boxes are the restriction of `H = Δ + λV` to sites `0..L` with Dirichlet
//! truncation: symmetric tridiagonal matrices with unit off-diagonals and
//! diagonal `V_n = λ a_n ω_n`. All eigenvalues are simple (nonzero
//! off-diagonals), which the eigensolver exploits: Sturm-sequence bisection
//! for eigenvalues, inverse iteration for vectors: deterministic and
//! O(L²) overall.

use crate::error::Error;
use crate::model::{DisorderRealization, EnergyPoint, ModelParams};
use crate::prufer::{PruferState, log_amplitude, prufer_init_from_x, prufer_step};
use crate::stats::{LinearFit, linear_fit};

// ═══════════════════════════════════════════════════════════════════
//  Box Hamiltonian
// ═══════════════════════════════════════════════════════════════════

/// `H` restricted to sites `0..L`: tridiagonal, unit off-diagonals,
/// diagonal `λ a_n ω_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxHamiltonian {
    pub diagonal: Vec<f64>,
}

impl BoxHamiltonian {
    /// Number of sites, `L + 1`.
    pub fn size(&self) -> usize {
        self.diagonal.len()
    }

    pub fn max_abs_potential(&self) -> f64 {
        self.diagonal.iter().fold(0.0f64, |m, d| m.max(d.abs()))
    }

    /// `y = Hx`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.size();
        let mut y = vec![0.0; m];
        for i in 0..m {
            let mut v = self.diagonal[i] * x[i];
            if i > 0 {
                v += x[i - 1];
            }
            if i + 1 < m {
                v += x[i + 1];
            }
            y[i] = v;
        }
        y
    }
}

/// Build the box over sites `0..=l` from one realization.
pub fn build_box(
    realization: &DisorderRealization,
    params: &ModelParams,
    l: usize,
) -> Result<BoxHamiltonian, Error> {
    if realization.len() < l + 1 {
        return Err(Error::LengthMismatch { len: realization.len(), needed: l + 1 });
    }
    let diagonal = (0..=l)
        .map(|n| params.lambda * params.envelope(n) * realization.value(n))
        .collect();
    Ok(BoxHamiltonian { diagonal })
}

// ═══════════════════════════════════════════════════════════════════
//  Sturm bisection + inverse iteration
// ═══════════════════════════════════════════════════════════════════

/// Number of eigenvalues of the box strictly below `x`, from the signs of
/// the Sturm pivot sequence (off-diagonals are all 1).
pub fn sturm_count(diagonal: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = f64::INFINITY;
    for d in diagonal {
        q = if q.abs() < 1e-300 {
            (d - x) - 1.0 / (1e-300f64).copysign(q)
        } else {
            (d - x) - 1.0 / q
        };
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin_bounds(diagonal: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let m = diagonal.len();
    for (i, d) in diagonal.iter().enumerate() {
        let row = if i == 0 || i + 1 == m { 1.0 } else { 2.0 };
        lo = lo.min(d - row);
        hi = hi.max(d + row);
    }
    (lo - 1e-8, hi + 1e-8)
}

/// `k`-th smallest eigenvalue (0-based) by bisection, accurate to machine
/// precision of the interval arithmetic (far below the 1e-10 contract).
fn eigenvalue_by_index(diagonal: &[f64], k: usize, lo: f64, hi: f64) -> f64 {
    let mut a = lo;
    let mut b = hi;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a < 1e-14 * mid.abs().max(1.0) {
            break;
        }
        if sturm_count(diagonal, mid) <= k {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// All eigenvalues in ascending order.
pub fn eigenvalues(box_h: &BoxHamiltonian) -> Vec<f64> {
    let (lo, hi) = gershgorin_bounds(&box_h.diagonal);
    (0..box_h.size())
        .map(|k| eigenvalue_by_index(&box_h.diagonal, k, lo, hi))
        .collect()
}

/// Solve `(T − shift) x = rhs` for the unit-off-diagonal tridiagonal `T`,
/// by Gaussian elimination with partial pivoting (one extra superdiagonal
/// of fill). Returns `Err` on a numerically singular pivot.
pub(crate) fn solve_shifted_tridiag(
    diagonal: &[f64],
    shift: f64,
    rhs: &mut [f64],
) -> Result<(), Error> {
    let m = diagonal.len();
    assert_eq!(rhs.len(), m);
    let mut p: Vec<f64> = diagonal.iter().map(|d| d - shift).collect();
    let mut q = vec![0.0f64; m];
    let mut r = vec![0.0f64; m];
    for i in 0..m - 1 {
        q[i] = 1.0;
    }

    for i in 0..m - 1 {
        // Row i+1 enters as (1, p[i+1], q[i+1]) across columns (i, i+1, i+2).
        if p[i].abs() >= 1.0 {
            let l = 1.0 / p[i];
            p[i + 1] -= l * q[i];
            q[i + 1] -= l * r[i];
            rhs[i + 1] -= l * rhs[i];
        } else {
            let (pi, qi, ri) = (p[i], q[i], r[i]);
            p[i] = 1.0;
            let bb = p[i + 1];
            let cc = q[i + 1];
            q[i] = bb;
            r[i] = cc;
            p[i + 1] = qi - pi * bb;
            q[i + 1] = ri - pi * cc;
            rhs.swap(i, i + 1);
            rhs[i + 1] -= pi * rhs[i];
        }
    }

    for i in (0..m).rev() {
        let mut v = rhs[i];
        if i + 1 < m {
            v -= q[i] * rhs[i + 1];
        }
        if i + 2 < m {
            v -= r[i] * rhs[i + 2];
        }
        if p[i].abs() < 1e-300 {
            return Err(Error::ConvergenceFailure { index: i });
        }
        rhs[i] = v / p[i];
    }
    Ok(())
}

/// One eigenvalue together with a unit-norm eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub eigenvalue: f64,
    pub vector: Vec<f64>,
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
    n
}

fn residual_norm(box_h: &BoxHamiltonian, pair: &EigenPair) -> f64 {
    let hx = box_h.apply(&pair.vector);
    hx.iter()
        .zip(&pair.vector)
        .map(|(y, x)| {
            let d = y - pair.eigenvalue * x;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn inverse_iteration(
    box_h: &BoxHamiltonian,
    eigenvalue: f64,
    index: usize,
) -> Result<Vec<f64>, Error> {
    let m = box_h.size();
    // Deterministic start vector, decorrelated across indices.
    let mut state = (index as u64).wrapping_mul(0x9E3779B97F4A7C15) ^ 0xD1B54A32D192ED03;
    let mut v: Vec<f64> = (0..m)
        .map(|_| {
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            (state.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    normalize(&mut v);

    let tol = 1e-8 * (2.0 + box_h.max_abs_potential());
    let mut shift = eigenvalue;
    for attempt in 0..12 {
        // Two solves per round: the second pass squares the suppression of
        // neighboring components, which a 2000-site basis needs to meet the
        // completeness contract at the initial site.
        let mut ok = true;
        for _ in 0..2 {
            if solve_shifted_tridiag(&box_h.diagonal, shift, &mut v).is_err() {
                ok = false;
                break;
            }
            normalize(&mut v);
        }
        if !ok {
            // dead-on singular shift: nudge and restart the sweep
            shift = eigenvalue + (attempt as f64 + 1.0) * 1e-13 * eigenvalue.abs().max(1.0);
            continue;
        }
        let pair = EigenPair { eigenvalue, vector: v.clone() };
        if residual_norm(box_h, &pair) <= tol {
            return Ok(v);
        }
    }
    Err(Error::ConvergenceFailure { index })
}

fn pairs_for_indices(
    box_h: &BoxHamiltonian,
    indices: std::ops::Range<usize>,
    lo: f64,
    hi: f64,
) -> Result<Vec<EigenPair>, Error> {
    let mut out = Vec::with_capacity(indices.len());
    for k in indices {
        let ev = eigenvalue_by_index(&box_h.diagonal, k, lo, hi);
        let vector = inverse_iteration(box_h, ev, k)?;
        out.push(EigenPair { eigenvalue: ev, vector });
    }
    // Orthogonalize the occasional near-degenerate neighbors.
    for i in 1..out.len() {
        if out[i].eigenvalue - out[i - 1].eigenvalue < 1e-7 {
            let proj: f64 = out[i]
                .vector
                .iter()
                .zip(&out[i - 1].vector)
                .map(|(a, b)| a * b)
                .sum();
            if proj.abs() > 1e-12 {
                let prev = out[i - 1].vector.clone();
                for (x, p) in out[i].vector.iter_mut().zip(&prev) {
                    *x -= proj * p;
                }
                normalize(&mut out[i].vector);
            }
        }
    }
    Ok(out)
}

/// Full diagonalization: all `L+1` eigenpairs in ascending order.
pub fn diagonalize(box_h: &BoxHamiltonian) -> Result<Vec<EigenPair>, Error> {
    let (lo, hi) = gershgorin_bounds(&box_h.diagonal);
    pairs_for_indices(box_h, 0..box_h.size(), lo, hi)
}

/// Eigenpairs with eigenvalue in `[e_lo, e_hi]`, ascending. Counting through
/// the Sturm sequence avoids computing anything outside the window.
pub fn eigenpairs_in_window(
    box_h: &BoxHamiltonian,
    e_lo: f64,
    e_hi: f64,
) -> Result<Vec<EigenPair>, Error> {
    let (lo, hi) = gershgorin_bounds(&box_h.diagonal);
    let first = sturm_count(&box_h.diagonal, e_lo);
    let last = sturm_count(&box_h.diagonal, e_hi);
    pairs_for_indices(box_h, first..last, lo, hi)
}

// ═══════════════════════════════════════════════════════════════════
//  Eigenfunction decay fits
// ═══════════════════════════════════════════════════════════════════

/// Which deterministic scale the amplitude logarithm is regressed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayScaling {
    /// `n^{1−2α}`, the sub-critical stretched-exponential scale.
    Stretched,
    /// `log n`, the critical power-law scale.
    Logarithmic,
}

/// Least-squares fit of `log A_n` over a window, where
/// `A_n = √(x_n² + x_{n-1}²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub scaling: DecayScaling,
    pub slope: f64,
    pub intercept: f64,
    pub fit_quality: f64,
    pub window: (usize, usize),
}

/// Default fit window: starts past the last amplitude maximum plus a margin
/// of 5% of the box, ends 5% before the right edge.
pub fn default_fit_window(pair: &EigenPair) -> (usize, usize) {
    let l = pair.vector.len() - 1;
    let mut argmax = 1;
    let mut best = f64::NEG_INFINITY;
    for n in 1..=l {
        let a = pair.vector[n].hypot(pair.vector[n - 1]);
        if a >= best {
            best = a;
            argmax = n;
        }
    }
    let margin = (l as f64 * 0.05).ceil() as usize;
    ((argmax + margin).min(l), l.saturating_sub(margin).max(1))
}

/// Fit the amplitude decay of one eigenpair on `[window.0, window.1]`.
pub fn decay_fit(
    pair: &EigenPair,
    alpha: f64,
    window: (usize, usize),
) -> Result<DecayFit, Error> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "decay fits apply to alpha in (0, 1/2], got {alpha}"
        )));
    }
    let l = pair.vector.len() - 1;
    let (start, end) = (window.0.max(1), window.1.min(l));
    if end < start || end - start + 1 < 20 {
        return Err(Error::WindowTooSmall {
            got: end.saturating_sub(start).saturating_add(1),
            need: 20,
        });
    }
    let scaling = if alpha < 0.5 { DecayScaling::Stretched } else { DecayScaling::Logarithmic };
    let mut xs = Vec::with_capacity(end - start + 1);
    let mut ys = Vec::with_capacity(end - start + 1);
    for n in start..=end {
        let a = pair.vector[n].hypot(pair.vector[n - 1]);
        if a <= 0.0 {
            continue;
        }
        let x = match scaling {
            DecayScaling::Stretched => (n as f64).powf(1.0 - 2.0 * alpha),
            DecayScaling::Logarithmic => (n as f64).ln(),
        };
        xs.push(x);
        ys.push(a.ln());
    }
    if xs.len() < 20 {
        return Err(Error::WindowTooSmall { got: xs.len(), need: 20 });
    }
    let LinearFit { slope, intercept, r2 } = linear_fit(&xs, &ys);
    Ok(DecayFit { scaling, slope, intercept, fit_quality: r2, window: (start, end) })
}

// ═══════════════════════════════════════════════════════════════════
//  Decaying direction
// ═══════════════════════════════════════════════════════════════════

/// Run the transfer chain with original-frame initial data `(x_1, x_0)` for
/// `n` sites and return the final polar state.
pub fn run_solution_chain(
    realization: &DisorderRealization,
    ep: &EnergyPoint,
    params: &ModelParams,
    x1: f64,
    x0: f64,
    n: usize,
) -> PruferState {
    assert!(realization.len() >= n);
    let mut s = prufer_init_from_x(x1, x0, ep);
    for j in 1..n {
        let v = params.lambda * params.envelope(j) * realization.value(j);
        s = prufer_step(&s, v, ep);
    }
    s
}

/// Result of the two-chain construction of the decaying initial direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayingDirection {
    /// Angle `ϑ∞ ∈ (−π/2, π/2]`; launching the solution with
    /// `(x_1, x_0) = (cos ϑ∞, sin ϑ∞)` selects the decaying branch.
    pub theta_inf: f64,
    /// `(site, r_site)` samples of the radius ratio `R⁽¹⁾/R⁽²⁾`.
    pub r_trace: Vec<(usize, f64)>,
    /// Set when the ratio diverges, in which case only `|ϑ∞| → π/2` can be
    /// concluded and `theta_inf` is reported as `±π/2`.
    pub diverged: bool,
}

/// Construct the decaying initial direction from the ratio of the two
/// coordinate chains, resolving the sign of `±arctan r∞` by a short probe
/// run along the same realization.
pub fn decaying_direction(
    realization: &DisorderRealization,
    ep: &EnergyPoint,
    params: &ModelParams,
    n_max: usize,
) -> Result<DecayingDirection, Error> {
    if realization.len() < n_max {
        return Err(Error::LengthMismatch { len: realization.len(), needed: n_max });
    }
    if n_max < 100 {
        return Err(Error::InvalidParameter("direction construction needs n_max >= 100".into()));
    }
    let record_at = crate::asymptotics::log_grid(8, n_max, 160);
    let mut c1 = prufer_init_from_x(1.0, 0.0, ep);
    let mut c2 = prufer_init_from_x(0.0, 1.0, ep);
    let mut r_trace = Vec::with_capacity(record_at.len());
    let mut next = 0;
    for j in 1..=n_max {
        while next < record_at.len() && record_at[next] == j {
            r_trace.push((j, (c1.log_radius - c2.log_radius).exp()));
            next += 1;
        }
        if j < n_max {
            let v = params.lambda * params.envelope(j) * realization.value(j);
            c1 = prufer_step(&c1, v, ep);
            c2 = prufer_step(&c2, v, ep);
        }
    }
    let log_r_inf = c1.log_radius - c2.log_radius;
    if log_r_inf > 18.0 * std::f64::consts::LN_10 {
        return Ok(DecayingDirection {
            theta_inf: std::f64::consts::FRAC_PI_2,
            r_trace,
            diverged: true,
        });
    }
    let r_inf = log_r_inf.exp();
    let magnitude = r_inf.atan();

    // Sign resolution: probe both candidates over a short prefix and keep
    // the one with the smaller radius.
    let n_probe = (n_max / 10).max(1000).min(n_max);
    let mut best = (f64::INFINITY, magnitude);
    for cand in [magnitude, -magnitude] {
        let s = run_solution_chain(realization, ep, params, cand.cos(), cand.sin(), n_probe);
        if s.log_radius < best.0 {
            best = (s.log_radius, cand);
        }
    }
    Ok(DecayingDirection { theta_inf: best.1, r_trace, diverged: false })
}

// ═══════════════════════════════════════════════════════════════════
//  Solution floor
// ═══════════════════════════════════════════════════════════════════

/// Minimum over `n ≤ n_max` of `A_n · n^κ` for the solution launched from
/// `(x_1, x_0) = (1, 0)`. A strictly positive floor at the κ dictated by the
/// second-moment growth witnesses the polynomial lower bound on solutions.
pub fn solution_floor(
    realization: &DisorderRealization,
    ep: &EnergyPoint,
    params: &ModelParams,
    n_max: usize,
    kappa: f64,
) -> f64 {
    assert!(realization.len() >= n_max);
    let mut s = prufer_init_from_x(1.0, 0.0, ep);
    let mut min_log = f64::INFINITY;
    for j in 1..=n_max {
        let log_floor = log_amplitude(&s, ep) + kappa * (j as f64).ln();
        min_log = min_log.min(log_floor);
        if j < n_max {
            let v = params.lambda * params.envelope(j) * realization.value(j);
            s = prufer_step(&s, v, ep);
        }
    }
    min_log.exp()
}

// ═══════════════════════════════════════════════════════════════════
//  Tests
// ═══════════════════════════════════════════════════════════════════

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{estimate_beta, normalizer, theoretical_beta};
    use crate::model::{DisorderSpec, RESONANCE_TOL, derived_seed, energy_point, sample_disorder};
    use std::f64::consts::PI;

    fn params(alpha: f64, lambda: f64) -> ModelParams {
        ModelParams::new(alpha, lambda, DisorderSpec::uniform()).unwrap()
    }

    fn free_box(l: usize) -> BoxHamiltonian {
        BoxHamiltonian { diagonal: vec![0.0; l + 1] }
    }

    #[test]
    fn free_box_spectrum_closed_form() {
        // L = 99: eigenvalues 2 cos(πj/101), j = 1..100.
        let l = 99;
        let evs = eigenvalues(&free_box(l));
        assert_eq!(evs.len(), l + 1);
        for (idx, ev) in evs.iter().enumerate() {
            let j = (l + 1 - idx) as f64; // ascending order ⇔ descending j
            let exact = 2.0 * (PI * j / (l as f64 + 2.0)).cos();
            assert!(
                (ev - exact).abs() < 1e-10,
                "index {idx}: {ev} vs closed form {exact}"
            );
        }
    }

    #[test]
    fn disordered_box_counts_and_symmetry_identities() {
        let p = params(0.3, 1.0);
        let l = 300;
        let r = sample_disorder(&p.disorder, 17, l + 1);
        let box_h = build_box(&r, &p, l).unwrap();
        let evs = eigenvalues(&box_h);
        assert_eq!(evs.len(), l + 1);

        // Trace identity.
        let trace: f64 = box_h.diagonal.iter().sum();
        let ev_sum: f64 = evs.iter().sum();
        assert!(
            (trace - ev_sum).abs() <= 1e-8 * l as f64,
            "trace {trace} vs eigenvalue sum {ev_sum}"
        );

        // Frobenius identity: Σ E² = Σ d² + 2L.
        let frob: f64 = box_h.diagonal.iter().map(|d| d * d).sum::<f64>() + 2.0 * l as f64;
        let ev_sq: f64 = evs.iter().map(|e| e * e).sum();
        assert!(
            (frob - ev_sq).abs() <= 1e-8 * l as f64,
            "frobenius {frob} vs Σ E² {ev_sq}"
        );

        // Simple spectrum: strictly increasing.
        assert!(evs.windows(2).all(|w| w[1] > w[0]));

        // Spectrum within the perturbed band.
        let vmax = box_h.max_abs_potential();
        assert!(evs.iter().all(|e| e.abs() <= 2.0 + vmax + 1e-9));
    }

    #[test]
    fn box_requires_long_enough_realization() {
        let p = params(0.3, 1.0);
        let r = sample_disorder(&p.disorder, 1, 50);
        assert!(matches!(
            build_box(&r, &p, 50),
            Err(Error::LengthMismatch { len: 50, needed: 51 })
        ));
    }

    #[test]
    fn eigenpairs_satisfy_residual_and_norm_contracts() {
        let p = params(0.3, 1.0);
        let l = 200;
        let r = sample_disorder(&p.disorder, 23, l + 1);
        let box_h = build_box(&r, &p, l).unwrap();
        let pairs = diagonalize(&box_h).unwrap();
        assert_eq!(pairs.len(), l + 1);
        let tol = 1e-8 * (2.0 + box_h.max_abs_potential());
        for pair in &pairs {
            let nrm: f64 = pair.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((nrm - 1.0).abs() < 1e-12);
            assert!(residual_norm(&box_h, pair) <= tol);
        }
    }

    #[test]
    fn free_box_eigenvectors_match_sine_modes() {
        let l = 60;
        let box_h = free_box(l);
        let pairs = diagonalize(&box_h).unwrap();
        let m = (l + 2) as f64;
        for (idx, pair) in pairs.iter().enumerate() {
            let j = (l + 1 - idx) as f64;
            let scale = (2.0 / m).sqrt();
            let mut dot = 0.0;
            for (n, x) in pair.vector.iter().enumerate() {
                dot += x * scale * (PI * j * (n as f64 + 1.0) / m).sin();
            }
            assert!(
                (dot.abs() - 1.0).abs() < 1e-8,
                "mode {idx} overlap {dot}"
            );
        }
    }

    #[test]
    fn window_restriction_agrees_with_full_diagonalization() {
        let p = params(0.3, 1.0);
        let l = 150;
        let r = sample_disorder(&p.disorder, 5, l + 1);
        let box_h = build_box(&r, &p, l).unwrap();
        let full = diagonalize(&box_h).unwrap();
        let windowed = eigenpairs_in_window(&box_h, -0.5, 0.5).unwrap();
        let expected: Vec<&EigenPair> = full
            .iter()
            .filter(|p| (-0.5..=0.5).contains(&p.eigenvalue))
            .collect();
        assert_eq!(windowed.len(), expected.len());
        for (w, f) in windowed.iter().zip(expected) {
            assert!((w.eigenvalue - f.eigenvalue).abs() < 1e-12);
        }
    }

    #[test]
    fn shifted_solver_inverts_apply() {
        let p = params(0.4, 1.0);
        let l = 80;
        let r = sample_disorder(&p.disorder, 9, l + 1);
        let box_h = build_box(&r, &p, l).unwrap();
        let shift = 0.37;
        let mut rhs: Vec<f64> = (0..=l).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let orig = rhs.clone();
        solve_shifted_tridiag(&box_h.diagonal, shift, &mut rhs).unwrap();
        let hx = box_h.apply(&rhs);
        for i in 0..=l {
            let back = hx[i] - shift * rhs[i];
            assert!((back - orig[i]).abs() < 1e-9, "site {i}: {back} vs {}", orig[i]);
        }
    }

    #[test]
    fn free_eigenfunction_fit_sees_no_decay() {
        let l = 400;
        let pairs = eigenpairs_in_window(&free_box(l), -0.2, 0.2).unwrap();
        let pair = &pairs[0];
        let fit = decay_fit(pair, 0.3, (20, l - 20)).unwrap();
        assert!(
            fit.slope.abs() < 5e-3,
            "free mode should not decay, slope {}",
            fit.slope
        );
        assert!(fit.fit_quality < 0.2, "r² should be near zero, got {}", fit.fit_quality);
    }

    #[test]
    fn decay_fit_recovers_planted_stretched_exponential() {
        // Synthetic eigenvector with a known log-amplitude slope against
        // n^{1-2α}; the fit must recover it.
        let l = 1200;
        let alpha = 0.3;
        let slope = -0.21;
        let vector: Vec<f64> = (0..=l)
            .map(|n| {
                let u = (n.max(1) as f64).powf(1.0 - 2.0 * alpha);
                (slope * u).exp()
            })
            .collect();
        let pair = EigenPair { eigenvalue: 0.0, vector };
        let fit = decay_fit(&pair, alpha, (60, l - 60)).unwrap();
        assert!((fit.slope - slope).abs() < 1e-3, "slope {}", fit.slope);
        assert!(fit.fit_quality > 0.999);
        assert_eq!(fit.scaling, DecayScaling::Stretched);
    }

    #[test]
    fn decay_fit_window_too_small() {
        let pair = EigenPair { eigenvalue: 0.0, vector: vec![1.0; 100] };
        assert!(matches!(
            decay_fit(&pair, 0.3, (10, 25)),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn default_window_skips_localization_center() {
        let l = 200;
        let mut vector = vec![0.0; l + 1];
        for (n, x) in vector.iter_mut().enumerate() {
            *x = (-0.1 * (n as f64 - 40.0).abs()).exp();
        }
        let pair = EigenPair { eigenvalue: 0.0, vector };
        let (start, end) = default_fit_window(&pair);
        assert!(start >= 40 + 10, "window must start past the center, got {start}");
        assert!(end <= l - 10);
    }

    #[test]
    fn direction_ratio_trace_is_cauchy() {
        let ep = energy_point(0.5, RESONANCE_TOL).unwrap();
        let p = params(0.5, 1.5);
        let n = 100_000;
        for seed in 0..5u64 {
            let r = sample_disorder(&p.disorder, derived_seed(900, seed), n);
            let dir = decaying_direction(&r, &ep, &p, n).unwrap();
            assert!(!dir.diverged);
            // Compare r at sites near m and 2m along the recorded trace.
            let value_at = |site: usize| -> f64 {
                dir.r_trace
                    .iter()
                    .min_by_key(|(s, _)| s.abs_diff(site))
                    .map(|(_, v)| *v)
                    .unwrap()
            };
            let early = (value_at(200) - value_at(100)).abs();
            let late = (value_at(n) - value_at(n / 2)).abs();
            assert!(
                late < early.max(0.05) + 1e-12,
                "ratio trace not settling: early {early}, late {late}"
            );
        }
    }

    #[test]
    fn decaying_direction_flips_growth_to_decay() {
        let ep = energy_point(0.5, RESONANCE_TOL).unwrap();
        let p = params(0.5, 1.5);
        let beta = theoretical_beta(&ep, p.lambda);
        let n = 100_000;
        let s_n = normalizer(p.alpha, n);
        let mut decay_rates = Vec::new();
        let mut generic_rates = Vec::new();
        for seed in 0..8u64 {
            let r = sample_disorder(&p.disorder, derived_seed(901, seed), n);
            let dir = decaying_direction(&r, &ep, &p, n).unwrap();
            let s_dec = run_solution_chain(
                &r,
                &ep,
                &p,
                dir.theta_inf.cos(),
                dir.theta_inf.sin(),
                n,
            );
            decay_rates.push(s_dec.log_radius / s_n);
            let generic = dir.theta_inf + std::f64::consts::FRAC_PI_2;
            let s_gen = run_solution_chain(&r, &ep, &p, generic.cos(), generic.sin(), n);
            generic_rates.push(s_gen.log_radius / s_n);
        }
        let mean_dec = decay_rates.iter().sum::<f64>() / decay_rates.len() as f64;
        let mean_gen = generic_rates.iter().sum::<f64>() / generic_rates.len() as f64;
        assert!(mean_dec < 0.0, "decaying chain should decay, got {mean_dec}");
        assert!(
            (mean_dec + beta).abs() <= 0.25 * beta,
            "decay rate {mean_dec} vs -β = {}",
            -beta
        );
        assert!(
            (mean_gen - beta).abs() <= 0.25 * beta,
            "generic rate {mean_gen} vs +β = {beta}"
        );
    }

    #[test]
    fn solution_floor_positive() {
        let ep = energy_point(0.5, RESONANCE_TOL).unwrap();
        let p = params(0.5, 1.0);
        let n = 100_000;
        // κ from the second-moment growth constant: b = λ²B²/sin²k worst case.
        let b = (p.lambda * p.disorder.support_bound / ep.sin_k).powi(2);
        let kappa = 0.5 * (b + 1.1);
        for seed in 0..50u64 {
            let r = sample_disorder(&p.disorder, derived_seed(902, seed), n);
            let floor = solution_floor(&r, &ep, &p, n, kappa);
            assert!(floor > 0.0, "seed {seed}: floor {floor}");
        }
    }

    #[test]
    fn solution_floor_trivial_cases() {
        let ep = energy_point(0.5, RESONANCE_TOL).unwrap();
        // λ = 0: amplitude bounded below, any κ ≥ 0 gives a positive floor.
        let free = params(0.5, 0.0);
        let r = sample_disorder(&free.disorder, 3, 10_000);
        assert!(solution_floor(&r, &ep, &free, 10_000, 0.0) > 0.0);

        // κ = 0 with a generically growing solution: the floor is attained
        // early and stays positive.
        let p = params(0.5, 1.0);
        let r2 = sample_disorder(&p.disorder, 4, 10_000);
        let floor = solution_floor(&r2, &ep, &p, 10_000, 0.0);
        assert!(floor > 0.0);
    }

    #[test]
    fn estimate_beta_consistency_with_spectrum_helpers() {
        // The solution chain launched from a rotated-frame unit direction
        // reproduces the estimate_beta growth rate.
        let ep = energy_point(0.5, RESONANCE_TOL).unwrap();
        let p = params(0.5, 1.5);
        let est = estimate_beta(&p, &ep, 50_000, 20, 77).unwrap();
        let beta = theoretical_beta(&ep, p.lambda);
        assert!((est.beta_hat - beta).abs() <= (0.15 * beta).max(4.0 * est.stderr));
    }
}
