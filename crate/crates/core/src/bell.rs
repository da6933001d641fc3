//! CHSH test on plateau states.
//!
//! Each analyzer setting is encoded by a Hadamard-like gate on each qubit,
//! after which both qubits are read out in the charge basis. The correlation
//! `E = <sz sz>` is either evaluated directly or estimated from seeded shots
//! as `(N_same - N_diff) / shots`.

use std::f64::consts::{FRAC_PI_8, SQRT_2};
use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{CircuitParams, Qubit, WorkingPoint};
use crate::dynamics::gate_hadamard_like;
use crate::entangle::{evolve_state, nearest_plateau, plateau_window};
use crate::error::{Error, Result};
use crate::qmath::{pauli, StateVector, C64, I, NORM_TOL};

/// Largest CHSH value reachable by a local hidden-variable model.
pub const CLASSICAL_BOUND: f64 = 2.0;
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;

/// Analyzer angles `theta_j` and `theta_j'` for both qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyzerSettings {
    pub theta1: f64,
    pub theta1p: f64,
    pub theta2: f64,
    pub theta2p: f64,
}

impl Default for AnalyzerSettings {
    /// `{theta, theta'} = {3 pi/8, -pi/8}` on both qubits.
    fn default() -> Self {
        Self { theta1: 3.0 * FRAC_PI_8, theta1p: -FRAC_PI_8, theta2: 3.0 * FRAC_PI_8, theta2p: -FRAC_PI_8 }
    }
}

impl AnalyzerSettings {
    /// Angle pairs in CHSH order: `(t1, t2), (t1', t2), (t1, t2'), (t1', t2')`.
    pub fn pairs(&self) -> [(f64, f64); 4] {
        [
            (self.theta1, self.theta2),
            (self.theta1p, self.theta2),
            (self.theta1, self.theta2p),
            (self.theta1p, self.theta2p),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ShotCounts {
    pub n00: u64,
    pub n10: u64,
    pub n01: u64,
    pub n11: u64,
    pub seed: u64,
    pub shots: u64,
}

impl ShotCounts {
    pub fn n_same(&self) -> u64 {
        self.n00 + self.n11
    }

    pub fn n_diff(&self) -> u64 {
        self.n10 + self.n01
    }

    pub fn correlation(&self) -> f64 {
        (self.n_same() as f64 - self.n_diff() as f64) / self.shots as f64
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Analytic,
    Sampled {
        shots: u64,
        seed: u64,
    },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Sampled { .. } => "sampled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChshResult {
    pub te: f64,
    /// `E(t1, t2), E(t1', t2), E(t1, t2'), E(t1', t2')`.
    pub correlations: [f64; 4],
    pub f: f64,
    pub violated: bool,
    pub mode: Mode,
    /// Raw counts per angle pair in sampled mode.
    pub counts: Option<[ShotCounts; 4]>,
}

/// Flat CSV row of a [`ChshResult`].
#[derive(Clone, Debug, Serialize)]
pub struct ChshRow {
    pub te_ps: f64,
    #[serde(rename = "E11")]
    pub e11: f64,
    #[serde(rename = "E21")]
    pub e21: f64,
    #[serde(rename = "E12")]
    pub e12: f64,
    #[serde(rename = "E22")]
    pub e22: f64,
    pub f: f64,
    pub violated: bool,
    pub mode: &'static str,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

impl ChshResult {
    fn new(te: f64, correlations: [f64; 4], mode: Mode, counts: Option<[ShotCounts; 4]>) -> Self {
        let f = chsh_value(&correlations);
        Self { te, correlations, f, violated: f > CLASSICAL_BOUND, mode, counts }
    }

    pub fn row(&self) -> ChshRow {
        let [e11, e21, e12, e22] = self.correlations;
        let (shots, seed) = match self.mode {
            Mode::Analytic => (None, None),
            Mode::Sampled { shots, seed } => (Some(shots), Some(seed)),
        };
        ChshRow {
            te_ps: self.te,
            e11,
            e21,
            e12,
            e22,
            f: self.f,
            violated: self.violated,
            mode: self.mode.name(),
            shots,
            seed,
        }
    }
}

impl fmt::Display for ChshResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CHSH ({}) at t_e = {:.6} ps", self.mode.name(), self.te)?;
        for (name, e) in ["E(t1,t2)", "E(t1',t2)", "E(t1,t2')", "E(t1',t2')"].iter().zip(self.correlations) {
            writeln!(f, "  {name:<11} = {e:+.6}")?;
        }
        if let Mode::Sampled { shots, seed } = self.mode {
            writeln!(f, "  shots = {shots}, seed = {seed}")?;
        }
        write!(f, "  f = {:.6} ({})", self.f, if self.violated { "violated, f > 2" } else { "not violated" })
    }
}

pub fn write_csv<W: Write>(results: &[ChshResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(r.row())?;
    }
    w.flush()?;
    Ok(())
}

/// `|E1 + E2 + E3 - E4|`.
pub fn chsh_value(e: &[f64; 4]) -> f64 {
    (e[0] + e[1] + e[2] - e[3]).abs()
}

/// Applies the Hadamard-like gates at `theta1` and `theta2`.
pub fn encode(state: &StateVector, theta1: f64, theta2: f64) -> Result<StateVector> {
    let a = state.amplitudes();
    if a[1].norm() > NORM_TOL || a[2].norm() > NORM_TOL {
        log::warn!("encoding a state with |10>/|01> components");
    }
    let r1 = gate_hadamard_like(Qubit::One, theta1).explicit;
    let r2 = gate_hadamard_like(Qubit::Two, theta2).explicit;
    state.apply(&r1)?.apply(&r2)
}

/// Amplitudes `[a00, a10, a01, a11]` of `alpha |00> + beta |11>` after
/// encoding, in closed form.
pub fn encoded_coefficients(alpha: C64, beta: C64, theta1: f64, theta2: f64) -> [C64; 4] {
    let e = |x: f64| C64::from_polar(1.0, x);
    let s = theta1 + theta2;
    [
        (alpha - beta * e(s)) / 2.0,
        (-I * alpha * e(-theta1) - I * beta * e(theta2)) / 2.0,
        (-I * alpha * e(-theta2) - I * beta * e(theta1)) / 2.0,
        (beta - alpha * e(-s)) / 2.0,
    ]
}

/// `<psi| sz sz |psi>`.
pub fn correlation_analytic(state: &StateVector) -> Result<f64> {
    state.require_normalized()?;
    let zz = state.apply(&pauli::zz())?;
    Ok(state.inner(&zz).re.clamp(-1.0, 1.0))
}

/// Draws `shots` joint outcomes from the charge-basis distribution.
///
/// Uses ChaCha8 seeded with `seed` and one uniform `f64` per shot, mapped by
/// inverse CDF over `(p00, p10, p01, p11)`.
pub fn sample_counts(state: &StateVector, shots: u64, seed: u64) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::NoShots);
    }
    state.require_normalized()?;
    let p = state.probabilities();
    let total: f64 = p.iter().sum();
    let cdf = [p[0] / total, (p[0] + p[1]) / total, (p[0] + p[1] + p[2]) / total];
    let mut n = [0u64; 4];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..shots {
        let u: f64 = rng.gen();
        let idx = cdf.iter().position(|&c| u < c).unwrap_or(3);
        n[idx] += 1;
    }
    Ok(ShotCounts { n00: n[0], n10: n[1], n01: n[2], n11: n[3], seed, shots })
}

/// Counts and the estimator `(N_same - N_diff) / (N_same + N_diff)`.
pub fn correlation_sampled(state: &StateVector, shots: u64, seed: u64) -> Result<(ShotCounts, f64)> {
    let counts = sample_counts(state, shots, seed)?;
    Ok((counts, counts.correlation()))
}

/// CHSH value of an already prepared state. In sampled mode the `i`-th angle
/// pair uses seed `seed + i`.
pub fn chsh_for_state(state: &StateVector, te: f64, settings: &AnalyzerSettings, mode: Mode) -> Result<ChshResult> {
    let mut correlations = [0.0; 4];
    let mut counts = [ShotCounts { n00: 0, n10: 0, n01: 0, n11: 0, seed: 0, shots: 0 }; 4];
    for (i, (t1, t2)) in settings.pairs().into_iter().enumerate() {
        let encoded = encode(state, t1, t2)?;
        correlations[i] = match mode {
            Mode::Analytic => correlation_analytic(&encoded)?,
            Mode::Sampled { shots, seed } => {
                let (c, e) = correlation_sampled(&encoded, shots, seed.wrapping_add(i as u64))?;
                counts[i] = c;
                e
            }
        };
    }
    let counts = matches!(mode, Mode::Sampled { .. }).then_some(counts);
    Ok(ChshResult::new(te, correlations, mode, counts))
}

/// Prepares `|psi(t_e)>` from `|00>` at co-resonance and runs the CHSH test.
pub fn chsh(params: &CircuitParams, te: f64, settings: &AnalyzerSettings, mode: Mode) -> Result<ChshResult> {
    match nearest_plateau(params, te)? {
        Some(p) if (p.t_e - te).abs() <= plateau_window(params)? => {}
        _ => log::warn!("t_e = {te} ps is not at a concurrence plateau"),
    }
    let state = evolve_state(&StateVector::basis(0, 0), params, WorkingPoint::CoResonantBoth, te)?;
    chsh_for_state(&state, te, settings, mode)
}
