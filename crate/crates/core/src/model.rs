//! Model parameters, the decaying envelope, disorder distributions and
//! reproducible sampling.
//!
//! The operator under study is `H = Δ + λV` on the half line, where the
//! random potential is modulated by the envelope `a_0 = 1`, `a_n = n^{-α}`:
//!
//! ```text
//! (H x)(n) = x_{n+1} + x_{n-1} + λ a_n ω_n x_n
//! ```
//!
//! with `(ω_n)` i.i.d., centered, variance one and bounded. Energies inside
//! the band `(-2, 2)` are parametrized by the quasi-momentum `k ∈ (0, π)`
//! through `E = 2 cos k`.

use crate::error::Error;
use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

/// Default guard keeping energies away from the band edges, where `1/sin k`
/// factors blow up.
pub const BAND_GUARD: f64 = 1e-2;

/// Default tolerance (on `k`) for flagging resonant quasi-momenta.
pub const RESONANCE_TOL: f64 = 1e-6;

/// The quasi-momenta excluded from the phase-averaging arguments.
pub const RESONANT_K: [f64; 3] = [
    std::f64::consts::FRAC_PI_4,
    std::f64::consts::FRAC_PI_2,
    3.0 * std::f64::consts::FRAC_PI_4,
];

// ═══════════════════════════════════════════════════════════════════
//  Disorder distributions
// ═══════════════════════════════════════════════════════════════════

/// Distribution family for the single-site variables `ω_n`.
///
/// Every variant is centered with unit variance and bounded support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisorderKind {
    /// Uniform on `[-√3, √3]`: bounded density `1/(2√3)`.
    Uniform,
    /// Fair coin on `{-1, +1}`. Has no density; experiments that lean on a
    /// bounded density are flagged degraded with this choice.
    Bernoulli,
}

/// A single-site disorder law together with its support and density bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderSpec {
    pub kind: DisorderKind,
    /// `B` with `|ω_n| ≤ B` almost surely.
    pub support_bound: f64,
    /// Upper bound for the density, when one exists.
    pub density_bound: Option<f64>,
}

const SQRT3: f64 = 1.732050807568877293527446341505872367_f64;

impl DisorderSpec {
    /// Uniform law on `[-√3, √3]` (the default).
    pub fn uniform() -> Self {
        DisorderSpec {
            kind: DisorderKind::Uniform,
            support_bound: SQRT3,
            density_bound: Some(1.0 / (2.0 * SQRT3)),
        }
    }

    /// Symmetric Bernoulli law on `{-1, +1}`.
    pub fn bernoulli() -> Self {
        DisorderSpec {
            kind: DisorderKind::Bernoulli,
            support_bound: 1.0,
            density_bound: None,
        }
    }

    /// Parse a distribution name as found in config files.
    pub fn from_name(name: &str) -> Result<Self, Error> {
        match name {
            "uniform" => Ok(Self::uniform()),
            "bernoulli" => Ok(Self::bernoulli()),
            other => Err(Error::UnsupportedDistribution(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            DisorderKind::Uniform => "uniform",
            DisorderKind::Bernoulli => "bernoulli",
        }
    }
}

impl Default for DisorderSpec {
    fn default() -> Self {
        Self::uniform()
    }
}

// ═══════════════════════════════════════════════════════════════════
//  Model parameters and the decay envelope
// ═══════════════════════════════════════════════════════════════════

/// Coupling, decay rate and disorder law of one model instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Decay rate `α > 0` of the envelope.
    pub alpha: f64,
    /// Coupling constant `λ`.
    pub lambda: f64,
    pub disorder: DisorderSpec,
}

impl ModelParams {
    pub fn new(alpha: f64, lambda: f64, disorder: DisorderSpec) -> Result<Self, Error> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "decay rate alpha must be positive and finite, got {alpha}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling lambda must be finite, got {lambda}"
            )));
        }
        Ok(ModelParams { alpha, lambda, disorder })
    }

    /// Envelope value `a_0 = 1`, `a_n = n^{-α}` for `n ≥ 1`.
    pub fn envelope(&self, n: usize) -> f64 {
        if n == 0 { 1.0 } else { (n as f64).powf(-self.alpha) }
    }
}

/// The deterministic envelope as a standalone value, for call sites that do
/// not carry full model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEnvelope {
    pub alpha: f64,
}

impl DecayEnvelope {
    pub fn new(alpha: f64) -> Result<Self, Error> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "decay rate alpha must be positive and finite, got {alpha}"
            )));
        }
        Ok(DecayEnvelope { alpha })
    }

    /// `a_0 = 1`, `a_n = n^{-α}` for `n ≥ 1`.
    pub fn value(&self, n: usize) -> f64 {
        if n == 0 { 1.0 } else { (n as f64).powf(-self.alpha) }
    }
}

// ═══════════════════════════════════════════════════════════════════
//  Energy points
// ═══════════════════════════════════════════════════════════════════

/// An energy inside the band together with its quasi-momentum `k` and a
/// resonance flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPoint {
    pub e: f64,
    /// `k = arccos(E/2) ∈ (0, π)`.
    pub k: f64,
    pub sin_k: f64,
    /// Set when `k` lies within tolerance of `π/4`, `π/2` or `3π/4`.
    /// Resonant energies are processed, but estimates carry the flag.
    pub resonant: bool,
}

impl EnergyPoint {
    /// Build an energy point with explicit band guard and resonance
    /// tolerance.
    pub fn with_guard(e: f64, guard: f64, tol: f64) -> Result<Self, Error> {
        if !e.is_finite() || e.abs() > 2.0 - guard {
            return Err(Error::OutsideBand { e, guard });
        }
        let k = (e / 2.0).acos();
        let resonant = RESONANT_K.iter().any(|rk| (k - rk).abs() < tol);
        Ok(EnergyPoint { e, k, sin_k: k.sin(), resonant })
    }

    /// Build an energy point with the default band guard.
    pub fn new(e: f64, tol: f64) -> Result<Self, Error> {
        Self::with_guard(e, BAND_GUARD, tol)
    }

    /// Default construction: default guard and resonance tolerance.
    pub fn from_energy(e: f64) -> Result<Self, Error> {
        Self::with_guard(e, BAND_GUARD, RESONANCE_TOL)
    }
}

/// `energy_point(E, tol)` with the default band guard.
pub fn energy_point(e: f64, tol: f64) -> Result<EnergyPoint, Error> {
    EnergyPoint::new(e, tol)
}

// ═══════════════════════════════════════════════════════════════════
//  Reproducible sampling
// ═══════════════════════════════════════════════════════════════════

/// One seeded sequence `ω_0, …, ω_{N-1}`.
///
/// Identical `(spec, seed, length)` reproduce identical values bit for bit,
/// across platforms and regardless of how many workers consume them.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub seed: u64,
    pub values: Vec<f64>,
}

impl DisorderRealization {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, n: usize) -> f64 {
        self.values[n]
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function. Used to decorrelate per-realization seeds
/// derived from one master seed, so that stream `i` never depends on how
/// many streams run in parallel or in which order.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for realization `index` in the stream family of `master_seed`.
pub fn derived_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index))
}

fn unit_f64(bits: u64) -> f64 {
    // 53 high bits -> [0, 1)
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draw `n` i.i.d. variables from `spec`, reproducibly.
pub fn sample_disorder(spec: &DisorderSpec, seed: u64, n: usize) -> DisorderRealization {
    let mut rng = Pcg64::seed_from_u64(seed);
    let values = (0..n)
        .map(|_| {
            let u = unit_f64(rng.next_u64());
            match spec.kind {
                DisorderKind::Uniform => (2.0 * u - 1.0) * SQRT3,
                DisorderKind::Bernoulli => {
                    if u < 0.5 { -1.0 } else { 1.0 }
                }
            }
        })
        .collect();
    DisorderRealization { seed, values }
}

/// Potential value `V_n = λ a_n ω_n`.
pub fn potential_value(
    r: &DisorderRealization,
    env: &DecayEnvelope,
    lambda: f64,
    n: usize,
) -> Result<f64, Error> {
    if n >= r.len() {
        return Err(Error::IndexOutOfRange { index: n, len: r.len() });
    }
    Ok(lambda * env.value(n) * r.value(n))
}

/// The full potential sequence `V_0 … V_{N-1}` of one realization.
pub fn potential_sequence(r: &DisorderRealization, params: &ModelParams) -> Vec<f64> {
    (0..r.len())
        .map(|n| params.lambda * params.envelope(n) * r.value(n))
        .collect()
}

// ═══════════════════════════════════════════════════════════════════
//  Tests
// ═══════════════════════════════════════════════════════════════════
