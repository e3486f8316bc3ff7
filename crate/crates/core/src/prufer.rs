//! Transfer matrices, overflow-safe products, and the polar (Prüfer)
//! representation of solutions of the eigenvalue equation
//!
//! ```text
//! x_{n+1} + x_{n-1} + V_n x_n = E x_n,    n ≥ 1.
//! ```
//!
//! Writing the solution vector in the basis of free solutions
//! `(cos kn, sin kn)` turns each transfer step into a perturbation of the
//! identity, `Y_{n+1} = (I + (V_n/sin k) A_n) Y_n`, and the polar form
//! `ρ_n = y_n + i y_{n-1} = R_n e^{iθ_n}` evolves by one complex
//! multiplication per site. Everything here works on `log R_n` and the
//! rotated phase `θ̄_n = nk − θ_n`; the raw radius is never materialized.

use crate::error::Error;
use crate::model::EnergyPoint;

// ═══════════════════════════════════════════════════════════════════
//  Transfer matrices
// ═══════════════════════════════════════════════════════════════════

/// A single 2×2 transfer step, rows `(E−V, −1; 1, 0)`. Unimodular by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TransferMatrix {
    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Exact spectral norm of a 2×2 matrix from the closed-form largest
    /// singular value; no iteration involved.
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm_2x2(self.a, self.b, self.c, self.d)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn mul(&self, rhs: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

pub(crate) fn spectral_norm_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let frob2 = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    // σ_max² = (‖A‖_F² + √(‖A‖_F⁴ − 4 det²)) / 2, with the discriminant
    // factored to dodge cancellation.
    let disc = ((frob2 - 2.0 * det).max(0.0) * (frob2 + 2.0 * det)).sqrt();
    (0.5 * (frob2 + disc)).sqrt()
}

/// One transfer step at energy `E` and potential value `V`.
pub fn single_transfer(ep: &EnergyPoint, v: f64) -> TransferMatrix {
    TransferMatrix { a: ep.e - v, b: -1.0, c: 1.0, d: 0.0 }
}

/// Running product of transfer matrices with the norm factored out into a
/// separate logarithm, so that `10^6` growing steps never overflow.
///
/// The represented product is `e^{log_scale} · normalized`, and the
/// normalized factor is rescaled back into `[1, 2]` (spectral norm) whenever
/// it drifts out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferProduct {
    pub normalized: TransferMatrix,
    pub log_scale: f64,
    pub steps: u64,
}

impl TransferProduct {
    pub fn identity() -> Self {
        TransferProduct {
            normalized: TransferMatrix { a: 1.0, b: 0.0, c: 0.0, d: 1.0 },
            log_scale: 0.0,
            steps: 0,
        }
    }

    /// `log ‖product‖` (spectral norm).
    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.normalized.spectral_norm().ln()
    }

    /// Determinant of the represented product, `det(normalized)·e^{2·log_scale}`
    /// evaluated in log-safe form: returns `sign·exp(log|det|)`.
    pub fn det(&self) -> f64 {
        let d = self.normalized.det();
        d.signum() * (d.abs().ln() + 2.0 * self.log_scale).exp()
    }

    /// Apply the product to a vector, returning the image direction and the
    /// logarithm of its norm.
    pub fn apply_log(&self, v: [f64; 2]) -> ([f64; 2], f64) {
        let w = self.normalized.apply(v);
        let nrm = (w[0] * w[0] + w[1] * w[1]).sqrt();
        ([w[0] / nrm, w[1] / nrm], self.log_scale + nrm.ln())
    }
}

/// Left-multiply the running product by one more transfer step.
pub fn accumulate(prod: &TransferProduct, t: &TransferMatrix) -> TransferProduct {
    let mut m = t.mul(&prod.normalized);
    let mut log_scale = prod.log_scale;
    let norm = m.spectral_norm();
    if !(1.0..=2.0).contains(&norm) {
        m = TransferMatrix { a: m.a / norm, b: m.b / norm, c: m.c / norm, d: m.d / norm };
        log_scale += norm.ln();
    }
    TransferProduct { normalized: m, log_scale, steps: prod.steps + 1 }
}

// ═══════════════════════════════════════════════════════════════════
//  Prüfer variables
// ═══════════════════════════════════════════════════════════════════

/// Polar state of the rotated-frame solution at site `n`:
/// `log R_n` and `θ̄_n = nk − θ_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruferState {
    pub log_radius: f64,
    pub theta_bar: f64,
    pub n: usize,
}

/// Start a chain at site 1 from the unit direction `(cos θ0, sin θ0)` in the
/// rotated frame, so `R_1 = 1`.
///
/// The phase convention takes `θ_1 = θ0 mod 2π ∈ [0, 2π)` and
/// `θ̄_1 = k − θ_1` (two-argument arctangent of the initial vector).
pub fn prufer_init(theta0: f64, ep: &EnergyPoint) -> PruferState {
    let y1 = theta0.cos();
    let y0 = theta0.sin();
    let theta1 = y0.atan2(y1).rem_euclid(std::f64::consts::TAU);
    PruferState { log_radius: 0.0, theta_bar: ep.k - theta1, n: 1 }
}

/// Start a chain from original-frame initial data `(x_1, x_0)`, i.e.
/// `X_1 = (x_1, x_0)`. The rotated-frame vector is `Y_1 = Ψ_1^{-1} X_1`
/// with `Ψ_1 = (cos k, sin k; 1, 0)`, so initial radii need not be one.
pub fn prufer_init_from_x(x1: f64, x0: f64, ep: &EnergyPoint) -> PruferState {
    let y1 = x0;
    let y0 = (x1 - x0 * ep.k.cos()) / ep.sin_k;
    let r = (y1 * y1 + y0 * y0).sqrt();
    let theta1 = y0.atan2(y1).rem_euclid(std::f64::consts::TAU);
    PruferState { log_radius: r.ln(), theta_bar: ep.k - theta1, n: 1 }
}

/// Advance one site: the rotated-frame step is multiplication of
/// `ρ_n = R_n e^{iθ_n}` by `μ = 1 + c·sinθ̄cosθ̄ − i·c·cos²θ̄` with
/// `c = V/sin k`, giving
///
/// ```text
/// log R_{n+1} = log R_n + ½·log(1 + c·sin 2θ̄_n + c²·cos²θ̄_n)
/// θ̄_{n+1}    = θ̄_n + k − arg μ
/// ```
///
/// The phase branch is the continuous lift through the two-argument
/// arctangent of `μ`; it satisfies `tan(θ̄_{n+1} − k) = tan θ̄_n + c`
/// at every step. The squared radius factor is `|μ|²`, strictly positive
/// for every input, which the debug assertion pins down.
pub fn prufer_step(s: &PruferState, v: f64, ep: &EnergyPoint) -> PruferState {
    let c = v / ep.sin_k;
    let (sin_tb, cos_tb) = s.theta_bar.sin_cos();
    let re = 1.0 + c * sin_tb * cos_tb;
    let im = -c * cos_tb * cos_tb;
    let factor2 = re * re + im * im;
    debug_assert!(factor2 > 0.0, "one-step radius factor must stay positive");
    PruferState {
        log_radius: s.log_radius + 0.5 * factor2.ln(),
        theta_bar: s.theta_bar + ep.k - im.atan2(re),
        n: s.n + 1,
    }
}

/// Recover the original solution pair `(x_n, x_{n-1}) = R_n (cos θ̄_n, cos(θ̄_n − k))`.
///
/// Overflows for very long strongly-growing chains; use
/// [`log_amplitude`] when only `log √(x_n² + x_{n-1}²)` is required.
pub fn reconstruct_solution(s: &PruferState, ep: &EnergyPoint) -> (f64, f64) {
    let r = s.log_radius.exp();
    (r * s.theta_bar.cos(), r * (s.theta_bar - ep.k).cos())
}

/// `log √(x_n² + x_{n-1}²)` without leaving log scale.
pub fn log_amplitude(s: &PruferState, ep: &EnergyPoint) -> f64 {
    let c1 = s.theta_bar.cos();
    let c2 = (s.theta_bar - ep.k).cos();
    s.log_radius + 0.5 * (c1 * c1 + c2 * c2).ln()
}

/// Run a chain from `state` through the potential values `vs`, one step per
/// entry, returning the final state.
pub fn run_chain(mut state: PruferState, vs: &[f64], ep: &EnergyPoint) -> PruferState {
    for &v in vs {
        state = prufer_step(&state, v, ep);
    }
    state
}

// ═══════════════════════════════════════════════════════════════════
//  Norm comparison for unimodular products
// ═══════════════════════════════════════════════════════════════════

/// Upper bound for the norm of an unimodular matrix from its action on two
/// directions: `‖A‖ ≤ sin(|θ1−θ2|/2)^{-1} · max{‖Aθ̂1‖, ‖Aθ̂2‖}`.
///
/// `rn_theta1`, `rn_theta2` are the propagated norms from the two initial
/// angles. Requires `0 < |θ1−θ2| ≤ π/2`.
pub fn norm_upper_from_angles(
    rn_theta1: f64,
    rn_theta2: f64,
    theta1: f64,
    theta2: f64,
) -> Result<f64, Error> {
    let sep = (theta1 - theta2).abs();
    if sep <= 0.0 || sep > std::f64::consts::FRAC_PI_2 {
        return Err(Error::BadAngleSeparation(sep));
    }
    Ok(rn_theta1.max(rn_theta2) / (sep / 2.0).sin())
}

// ═══════════════════════════════════════════════════════════════════
//  Tests
// ═══════════════════════════════════════════════════════════════════
