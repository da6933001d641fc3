//! Propagators and gates for the fixed-coupling circuit.
//!
//! Rotation conventions used throughout:
//!
//! * `rx(q, phi) = exp(+i phi sx^(q))`, the form produced by evolving under
//!   `-eps_J sx` (so a positive duration gives a positive angle),
//! * `rz(q, phi) = exp(-i phi sz^(q))`,
//! * `zz(chi) = exp(-i chi sz sz)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use crate::circuit::{embed, hamiltonian, CircuitParams, Qubit, WorkingPoint};
use crate::error::{Error, Result};
use crate::qmath::{pauli, ComplexMatrix, HermitianEigen, StateVector, C64, I};

pub mod sequence;

/// `exp(-i t H / hbar)` for a fixed working point, with the spectral
/// decomposition computed once.
#[derive(Clone, Debug)]
pub struct Propagator {
    eigen: HermitianEigen,
    hbar: f64,
}

impl Propagator {
    pub fn new(params: &CircuitParams, point: WorkingPoint) -> Result<Self> {
        let h = hamiltonian(params, point)?;
        Ok(Self { eigen: HermitianEigen::new(&h)?, hbar: params.hbar })
    }

    pub fn at(&self, t: f64) -> Result<ComplexMatrix> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("evolution time must be >= 0, got {t}")));
        }
        Ok(self.eigen.exp(C64::new(0.0, -t / self.hbar)))
    }
}

/// Exact propagator by diagonalizing the working-point Hamiltonian.
pub fn propagator_exact(params: &CircuitParams, point: WorkingPoint, t: f64) -> Result<ComplexMatrix> {
    Propagator::new(params, point)?.at(t)
}

/// Phase `xi` of the diagonal element `B = sqrt(1 - rho^2) e^{-i xi}`, on the
/// branch continuous in `x = eps_J nu t / hbar` with `xi(0) = 0`.
///
/// `tan(xi) = c tan(x)` with `c >= 0` keeps `xi` in the same quadrant as
/// `x`, so the principal `atan2` value is shifted by the multiple of `2 pi`
/// that brings it within `pi / 2` of `x`.
fn continuous_xi(c: f64, x: f64) -> f64 {
    let base = (c * x.sin()).atan2(x.cos());
    base + 2.0 * PI * ((x - base) / (2.0 * PI)).round()
}

/// Closed-form `exp(-i t H1 / hbar)` at the `Decouple(j)` point:
/// `A sx^(j) + B (|0_j 0_k><| + |1_j 1_k><|) + B* (|1_j 0_k><| + |0_j 1_k><|)`
/// with `A = i rho`, `B = sqrt(1 - rho^2) exp(-i xi)`.
pub fn closed_form_exact(params: &CircuitParams, j: Qubit, t: f64) -> Result<ComplexMatrix> {
    params.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("evolution time must be >= 0, got {t}")));
    }
    let eps = params.eps_j[j.index()];
    let zeta = params.zeta(j);
    let nu = (1.0 + (params.e12 / eps).powi(2)).sqrt();
    let x = eps * nu * t / params.hbar;
    let rho = x.sin() / nu;
    let xi = continuous_xi(2.0 * zeta / nu, x);
    let a = I * rho;
    let b = C64::from_polar((1.0 - rho * rho).max(0.0).sqrt(), -xi);

    let mut u = embed(&pauli::x(), j).scale(a);
    // |00>, |11> share qubit parity and pick up B; |10>, |01> pick up B*.
    for (idx, d) in [(0, b), (1, b.conj()), (2, b.conj()), (3, b)] {
        u[(idx, idx)] += d;
    }
    Ok(u)
}

/// A gate together with the physical time it takes.
#[derive(Clone, Debug)]
pub struct TimedGate {
    pub operator: ComplexMatrix,
    pub duration: f64,
}

pub fn rx(q: Qubit, phi: f64) -> ComplexMatrix {
    embed(&rx_single(phi), q)
}

pub fn rz(q: Qubit, phi: f64) -> ComplexMatrix {
    embed(&rz_single(phi), q)
}

pub fn sigma_x(q: Qubit) -> ComplexMatrix {
    embed(&pauli::x(), q)
}

pub fn zz(chi: f64) -> ComplexMatrix {
    let (m, p) = (C64::from_polar(1.0, -chi), C64::from_polar(1.0, chi));
    ComplexMatrix::diagonal(&[m, p, p, m])
}

fn rx_single(phi: f64) -> ComplexMatrix {
    let (c, s) = (C64::from(phi.cos()), I * phi.sin());
    ComplexMatrix::from_rows([[c, s], [s, c]])
}

fn rz_single(phi: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[C64::from_polar(1.0, -phi), C64::from_polar(1.0, phi)])
}

/// Decoupled single-qubit rotation `exp(i phi sx^(j))` and the time
/// `t = phi hbar / [eps_J (1 + 2 zeta^2)]` that realizes it at `Decouple(j)`.
pub fn gate_rx_effective(params: &CircuitParams, j: Qubit, phi: f64) -> Result<TimedGate> {
    params.validate()?;
    let zeta = params.check_decoupling(j)?;
    let duration = phi * params.hbar / (params.eps_j[j.index()] * (1.0 + 2.0 * zeta * zeta));
    Ok(TimedGate { operator: rx(j, phi), duration })
}

/// Effective rotation angle accumulated after `t` at `Decouple(j)`.
pub fn effective_rx_angle(params: &CircuitParams, j: Qubit, t: f64) -> f64 {
    let zeta = params.zeta(j);
    params.eps_j[j.index()] * t / params.hbar * (1.0 + 2.0 * zeta * zeta)
}

/// `|<to| U |from>|^2`.
pub fn transition_probability(u: &ComplexMatrix, from: &StateVector, to: &StateVector) -> Result<f64> {
    from.require_normalized()?;
    to.require_normalized()?;
    let out = from.apply(u)?;
    Ok(to.inner(&out).norm_sqr())
}

/// Diagonal far-detuned evolution
/// `exp(-i chi_12 sz sz) exp(-i chi_1 sz^(1)) exp(-i chi_2 sz^(2))`
/// with `chi_j = E_j t / hbar` and `chi_12 = E12 t / hbar`.
pub fn gate_rz12(params: &CircuitParams, t: f64) -> Result<ComplexMatrix> {
    params.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("evolution time must be >= 0, got {t}")));
    }
    let e = params.far_detuned_energies()?;
    let chi = |energy: f64| energy * t / params.hbar;
    Ok(&(&zz(chi(params.e12)) * &rz(Qubit::One, chi(e[0]))) * &rz(Qubit::Two, chi(e[1])))
}

/// Refocused z rotation `[R_z12(chi) sx^(k)]^2 = exp(-i phi sz^(j))`.
#[derive(Clone, Debug)]
pub struct RefocusedRz {
    pub gate: TimedGate,
    /// Far-detuned evolution time of each of the two halves.
    pub half_time: f64,
    /// True when `E_j` had to be reversed (via the gate voltage) to reach
    /// the requested sign of `phi` with a positive duration.
    pub reversed_bias: bool,
    /// Parameters used for the far-detuned halves.
    pub params: CircuitParams,
}

pub fn gate_rz_refocused(params: &CircuitParams, j: Qubit, phi: f64) -> Result<RefocusedRz> {
    params.validate()?;
    let mut biased = *params;
    let e_j = biased.far_detuned_energies()?[j.index()];
    if phi != 0.0 && e_j == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "refocused rotation on qubit {j} needs a nonzero far-detuned energy"
        )));
    }
    let reversed_bias = phi * e_j < 0.0;
    if reversed_bias {
        // E_j is odd in E_C^(j): the correction factor only sees squares.
        biased.ec_eff[j.index()] = -biased.ec_eff[j.index()];
    }
    let e_j = biased.far_detuned_energies()?[j.index()];
    let half_time = if phi == 0.0 { 0.0 } else { phi * biased.hbar / (2.0 * e_j) };
    let half = gate_rz12(&biased, half_time)?;
    let flip = sigma_x(j.other());
    let step = &half * &flip;
    Ok(RefocusedRz {
        gate: TimedGate { operator: &step * &step, duration: 2.0 * half_time },
        half_time,
        reversed_bias,
        params: biased,
    })
}

/// Hadamard-like encoding gate in both forms.
#[derive(Clone, Debug)]
pub struct HadamardLike {
    /// `R_z(-theta/2) R_x(-pi/4) R_z(theta/2)` built from the rotation gates.
    pub composed: ComplexMatrix,
    /// `1/sqrt2 [[1, -i e^{i theta}], [-i e^{-i theta}, 1]]` embedded on the qubit.
    pub explicit: ComplexMatrix,
}

/// Single-qubit explicit form of the Hadamard-like gate.
pub fn hadamard_like_matrix(theta: f64) -> ComplexMatrix {
    let h = C64::from(FRAC_1_SQRT_2);
    ComplexMatrix::from_rows([
        [h, -I * C64::from_polar(FRAC_1_SQRT_2, theta)],
        [-I * C64::from_polar(FRAC_1_SQRT_2, -theta), h],
    ])
}

pub fn gate_hadamard_like(j: Qubit, theta: f64) -> HadamardLike {
    let composed = &(&rz(j, -theta / 2.0) * &rx(j, -FRAC_PI_4)) * &rz(j, theta / 2.0);
    HadamardLike { composed, explicit: embed(&hadamard_like_matrix(theta), j) }
}

/// Quarter period `t0 = pi hbar / [2 eps_J (1 + 2 zeta^2)]` of the decoupled
/// flip on qubit `j`.
pub fn pi_pulse_time(params: &CircuitParams, j: Qubit) -> Result<f64> {
    Ok(gate_rx_effective(params, j, PI / 2.0)?.duration)
}

/// `t_x = (2 l + 1) t0`.
pub fn flip_pulse_duration(t0: f64, l: u32) -> f64 {
    (2 * l + 1) as f64 * t0
}

/// Longest delay between the two flips of a decoupling cycle that fits
/// into `budget`: `(budget - 2 t_x) / 2`.
pub fn max_delay_schedule(budget: f64, l: u32, t0: f64) -> Result<f64> {
    let pulses = 2.0 * flip_pulse_duration(t0, l);
    if !(budget >= pulses) {
        return Err(Error::BudgetTooSmall { budget, pulses });
    }
    Ok((budget - pulses) / 2.0)
}

/// Product-state helper: `|q1 q2>` as used in transition probabilities.
pub fn basis(q1: u8, q2: u8) -> StateVector {
    StateVector::basis(q1, q2)
}

/// `|1_j 0_k>` and `|0_j 0_k>` for the flip transition on qubit `j`.
pub fn flip_transition_states(j: Qubit) -> (StateVector, StateVector) {
    let from = match j {
        Qubit::One => basis(1, 0),
        Qubit::Two => basis(0, 1),
    };
    (from, basis(0, 0))
}

/// `|P_appr - P_ex|` for the flip transition at dimensionless time
/// `tau = eps_J t / hbar`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipComparison {
    pub tau: f64,
    pub p_appr: f64,
    pub p_ex: f64,
}

impl FlipComparison {
    pub fn diff(&self) -> f64 {
        (self.p_appr - self.p_ex).abs()
    }
}

/// Samples the flip transition under the decoupled gate and the exact
/// propagator on `steps + 1` evenly spaced points of `tau in [0, tau_max]`.
/// Works in natural units with `eps_J = 1`.
pub fn compare_flip_transition(zeta: f64, tau_max: f64, steps: usize) -> Result<Vec<FlipComparison>> {
    if !(0.0..1.0).contains(&zeta) || !(tau_max > 0.0) || steps == 0 {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= zeta < 1, tau_max > 0, steps > 0 (got {zeta}, {tau_max}, {steps})"
        )));
    }
    let params = CircuitParams::natural(1.0, 2.0 * zeta);
    let j = Qubit::One;
    let exact = Propagator::new(&params, WorkingPoint::Decouple(j))?;
    let (from, to) = flip_transition_states(j);
    (0..=steps)
        .map(|i| {
            let tau = tau_max * i as f64 / steps as f64;
            let appr = rx(j, effective_rx_angle(&params, j, tau));
            Ok(FlipComparison {
                tau,
                p_appr: transition_probability(&appr, &from, &to)?,
                p_ex: transition_probability(&exact.at(tau)?, &from, &to)?,
            })
        })
        .collect()
}
