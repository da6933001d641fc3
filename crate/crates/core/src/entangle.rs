//! Entanglement generated by the always-on coupling at co-resonance.
//!
//! Starting from `|00>` and evolving under
//! `H3 = -eps_J (sx^(1) + sx^(2)) + E12 sz sz`, the concurrence oscillates
//! quickly with `theta(t) = gamma sqrt(1 + zt^2)` and slowly with
//! `varrho(t) = 2 zt gamma`, where `gamma = 2 eps_J t / hbar` and
//! `zt = E12 / (2 eps_J)`. Whenever `sin theta = 0` the state is exactly
//! `alpha |00> + beta |11>` and the concurrence sits on a plateau of height
//! `|sin(E12 t / hbar)|`.

use std::f64::consts::PI;
use std::io::Write;

use crate::circuit::{CircuitParams, WorkingPoint};
use crate::dynamics::Propagator;
use crate::error::{Error, Result};
use crate::qmath::{pauli, StateVector, C64, ZERO};

/// Concurrence threshold above which a plateau state violates CHSH.
pub const BELL_THRESHOLD: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Pure-state concurrence `|<psi| sy sy |psi*>|`.
pub fn concurrence_pure(state: &StateVector) -> Result<f64> {
    state.require_normalized()?;
    let conj = StateVector::from_amplitudes(state.amplitudes().map(|a| a.conj()));
    let flipped = conj.apply(&pauli::yy())?;
    Ok(state.inner(&flipped).norm().min(1.0))
}

pub fn evolve_state(state: &StateVector, params: &CircuitParams, point: WorkingPoint, t: f64) -> Result<StateVector> {
    state.require_normalized()?;
    let u = Propagator::new(params, point)?.at(t)?;
    state.apply(&u)
}

/// Which algebraic form of `C_E(t) = 1/2 sqrt(P^2 + Q^2)` to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ClosedFormVariant {
    /// `Q = sin(2 theta) / sqrt(1 + zt^-2) - sin(varrho)`; exact.
    #[default]
    Corrected,
    /// `Q = sin^2(2 theta) / sqrt(1 + zt^-2) - sin(varrho)`. Deviates from
    /// the exact dynamics by up to a few percent.
    SquaredFastTerm,
}

fn require_symmetric(params: &CircuitParams) -> Result<()> {
    params.validate()?;
    if params.is_symmetric() {
        Ok(())
    } else {
        Err(Error::Asymmetric(params.eps_j[0], params.eps_j[1]))
    }
}

/// `zt = E12 / (2 eps_J)`.
pub fn zeta_tilde(params: &CircuitParams) -> f64 {
    params.e12 / (2.0 * params.eps_j[0])
}

pub fn concurrence_closed_form(params: &CircuitParams, t: f64) -> Result<f64> {
    concurrence_closed_form_with(params, t, ClosedFormVariant::Corrected)
}

pub fn concurrence_closed_form_with(params: &CircuitParams, t: f64, variant: ClosedFormVariant) -> Result<f64> {
    require_symmetric(params)?;
    let z = zeta_tilde(params);
    if z == 0.0 {
        return Ok(0.0);
    }
    let gamma = 2.0 * params.eps_j[0] * t / params.hbar;
    let theta = gamma * (1.0 + z * z).sqrt();
    let varrho = 2.0 * z * gamma;
    // 1 / (1 + zt^-2) written as zt^2 / (1 + zt^2) to stay finite as zt -> 0
    let inv_plus = 1.0 / (1.0 + z * z);
    let inv_minus = z * z / (1.0 + z * z);
    let p = theta.cos().powi(2) - varrho.cos() + theta.sin().powi(2) * (inv_plus - inv_minus);
    let fast = match variant {
        ClosedFormVariant::Corrected => (2.0 * theta).sin(),
        ClosedFormVariant::SquaredFastTerm => (2.0 * theta).sin().powi(2),
    };
    let q = fast * inv_minus.sqrt() - varrho.sin();
    Ok(0.5 * (p * p + q * q).sqrt())
}

/// How concurrence values of a trace are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ConcurrenceMethod {
    /// Propagate `|00>` and evaluate [`concurrence_pure`].
    #[default]
    Oracle,
    ClosedForm(ClosedFormVariant),
}

/// Spacing between plateau times, `pi hbar / [2 eps_J sqrt(1 + zt^2)]`.
pub fn plateau_spacing(params: &CircuitParams) -> Result<f64> {
    require_symmetric(params)?;
    let z = zeta_tilde(params);
    Ok(PI * params.hbar / (2.0 * params.eps_j[0] * (1.0 + z * z).sqrt()))
}

/// Half-width of the window around `t_e` inside which the concurrence is
/// expected to stay flat.
pub fn plateau_window(params: &CircuitParams) -> Result<f64> {
    Ok(0.02 * plateau_spacing(params)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcurrenceTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub is_plateau: Vec<bool>,
    pub eps_j: f64,
    pub e12: f64,
}

impl ConcurrenceTrace {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t_ps", "concurrence", "is_plateau"])?;
        for ((t, c), p) in self.times.iter().zip(&self.values).zip(&self.is_plateau) {
            w.write_record([t.to_string(), c.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples `C_E(t)` on `steps + 1` points of `[0, t_max]`.
pub fn concurrence_trace(
    params: &CircuitParams,
    t_max: f64,
    steps: usize,
    method: ConcurrenceMethod,
) -> Result<ConcurrenceTrace> {
    require_symmetric(params)?;
    if !(t_max > 0.0) || steps == 0 {
        return Err(Error::InvalidParameter(format!("need t_max > 0 and steps > 0 (got {t_max}, {steps})")));
    }
    let spacing = plateau_spacing(params)?;
    let window = plateau_window(params)?.max(0.5 * t_max / steps as f64);
    let propagator = Propagator::new(params, WorkingPoint::CoResonantBoth)?;
    let start = StateVector::basis(0, 0);
    let mut trace = ConcurrenceTrace {
        times: Vec::with_capacity(steps + 1),
        values: Vec::with_capacity(steps + 1),
        is_plateau: Vec::with_capacity(steps + 1),
        eps_j: params.eps_j[0],
        e12: params.e12,
    };
    for i in 0..=steps {
        let t = t_max * i as f64 / steps as f64;
        let c = match method {
            ConcurrenceMethod::Oracle => concurrence_pure(&start.apply(&propagator.at(t)?)?.renormalize()?)?,
            ConcurrenceMethod::ClosedForm(v) => concurrence_closed_form_with(params, t, v)?,
        };
        let k = (t / spacing).round();
        trace.times.push(t);
        trace.values.push(c);
        trace.is_plateau.push(k >= 1.0 && (t - k * spacing).abs() <= window);
    }
    Ok(trace)
}

/// Evolved state at a plateau time, `alpha |00> + beta |11>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateauState {
    /// Plateau index, `theta(t_e) = k pi`.
    pub k: u32,
    pub t_e: f64,
    /// Amplitude of `|00>`: `[(-1)^k + e^{-i E12 t_e / hbar}] / 2`.
    pub alpha: C64,
    /// Amplitude of `|11>`: `[(-1)^k - e^{-i E12 t_e / hbar}] / 2`.
    pub beta: C64,
    /// `2 |alpha beta| = |sin(E12 t_e / hbar)|`.
    pub concurrence: f64,
    /// Closest plateau to a zero of `cos(E12 t_e / hbar)`.
    pub maximal: bool,
}

impl PlateauState {
    fn new(params: &CircuitParams, k: u32, t_e: f64, spacing: f64) -> Self {
        let phase = params.e12 * t_e / params.hbar;
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let rot = C64::from_polar(1.0, -phase);
        let half_step = 0.5 * params.e12 * spacing / params.hbar;
        Self {
            k,
            t_e,
            alpha: (rot + sign) / 2.0,
            beta: (-rot + sign) / 2.0,
            concurrence: phase.sin().abs(),
            maximal: params.e12 > 0.0 && phase.cos().abs() <= half_step.sin(),
        }
    }

    pub fn state(&self) -> StateVector {
        StateVector::from_amplitudes([self.alpha, ZERO, ZERO, self.beta])
    }

    /// Amplitudes `[1 +- exp(+-i E12 t_e / hbar)] / 2` in the form they are
    /// usually quoted. They share `2 |alpha_+ alpha_-| = |sin(E12 t_e/hbar)|`
    /// with [`PlateauState::alpha`] / [`PlateauState::beta`] but carry the
    /// opposite relative phase, so they do not match the propagated state.
    pub fn quoted_alpha_pm(&self, params: &CircuitParams) -> (C64, C64) {
        let phase = params.e12 * self.t_e / params.hbar;
        ((1.0 + C64::from_polar(1.0, phase)) / 2.0, (1.0 - C64::from_polar(1.0, -phase)) / 2.0)
    }

    /// `|| psi(t_e) - (alpha |00> + beta |11>) ||` after removing the global
    /// phase, with `psi(t_e)` propagated from `|00>`.
    pub fn residual_distance(&self, params: &CircuitParams) -> Result<f64> {
        let evolved = evolve_state(&StateVector::basis(0, 0), params, WorkingPoint::CoResonantBoth, self.t_e)?;
        Ok(evolved.distance_up_to_phase(&self.state()))
    }
}

/// Plateau times `t_e = k * spacing` for `k = 1, 2, ...` up to `t_max`.
pub fn find_plateaus(params: &CircuitParams, t_max: f64) -> Result<Vec<PlateauState>> {
    let spacing = plateau_spacing(params)?;
    let mut out = Vec::new();
    let mut k = 1u32;
    while k as f64 * spacing <= t_max {
        out.push(PlateauState::new(params, k, k as f64 * spacing, spacing));
        k += 1;
    }
    Ok(out)
}

/// First plateau flagged maximal before `t_max`.
pub fn first_maximal_plateau(params: &CircuitParams, t_max: f64) -> Result<PlateauState> {
    find_plateaus(params, t_max)?.into_iter().find(|p| p.maximal).ok_or(Error::NoPlateau(t_max))
}

/// Plateau nearest to `t`, or `None` when `t` is closer to 0 than to the
/// first plateau.
pub fn nearest_plateau(params: &CircuitParams, t: f64) -> Result<Option<PlateauState>> {
    let spacing = plateau_spacing(params)?;
    let k = (t / spacing).round();
    if k < 1.0 {
        return Ok(None);
    }
    Ok(Some(PlateauState::new(params, k as u32, k * spacing, spacing)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::ONE;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn det_concurrence(s: &StateVector) -> f64 {
        let a = s.amplitudes();
        2.0 * (a[0] * a[3] - a[1] * a[2]).norm()
    }

    #[test]
    fn product_and_bell_states() {
        assert_eq!(concurrence_pure(&StateVector::basis(0, 0)).unwrap(), 0.0);
        let h = C64::from(FRAC_1_SQRT_2);
        let bell = StateVector::from_amplitudes([h, ZERO, ZERO, h]);
        assert!((concurrence_pure(&bell).unwrap() - 1.0).abs() < 1e-15);
        assert!(concurrence_pure(&StateVector::from_amplitudes([ONE, ONE, ZERO, ZERO])).is_err());
    }

    #[test]
    fn schmidt_form() {
        let alpha = C64::from_polar(0.6, 0.4);
        let beta = C64::from_polar(0.8, -1.1);
        let s = StateVector::from_amplitudes([alpha, ZERO, ZERO, beta]);
        assert!((concurrence_pure(&s).unwrap() - 2.0 * 0.6 * 0.8).abs() < 1e-15);
        assert!((concurrence_pure(&s).unwrap() - det_concurrence(&s)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_trivial_cases() {
        let p = CircuitParams::from_em_ratio(30.0, 0.25);
        assert!(concurrence_closed_form(&p, 0.0).unwrap().abs() < 1e-15);
        let p0 = CircuitParams::symmetric(30.0, 0.0);
        for t in [0.0, 13.0, 250.0] {
            assert_eq!(concurrence_closed_form(&p0, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn closed_form_requires_symmetry() {
        let mut p = CircuitParams::from_em_ratio(30.0, 0.25);
        p.eps_j[1] = 31.0;
        assert!(matches!(concurrence_closed_form(&p, 1.0), Err(Error::Asymmetric(..))));
        assert!(find_plateaus(&p, 100.0).is_err());
    }

    #[test]
    fn evolve_examples() {
        let p = CircuitParams::from_em_ratio(30.0, 0.5);
        let s = StateVector::basis(0, 0);
        let same = evolve_state(&s, &p, WorkingPoint::CoResonantBoth, 0.0).unwrap();
        assert!(same.distance_up_to_phase(&s) < 1e-15);
        let p0 = CircuitParams::symmetric(30.0, 0.0);
        for t in [5.0, 77.0, 512.0] {
            let e = evolve_state(&s, &p0, WorkingPoint::CoResonantBoth, t).unwrap();
            assert!(concurrence_pure(&e).unwrap() < 1e-10);
        }
    }

    #[test]
    fn plateau_list() {
        let p = CircuitParams::from_em_ratio(30.0, 0.25);
        let plateaus = find_plateaus(&p, 600.0).unwrap();
        let spacing = plateau_spacing(&p).unwrap();
        assert_eq!(plateaus.len(), (600.0 / spacing).floor() as usize);
        assert_eq!(plateaus[0].k, 1);
        for pl in &plateaus {
            let want = (p.e12 * pl.t_e / p.hbar).sin().abs();
            assert!((pl.concurrence - want).abs() < 1e-15);
            assert!((2.0 * (pl.alpha * pl.beta).norm() - want).abs() < 1e-12);
            assert!(((pl.alpha.norm_sqr() + pl.beta.norm_sqr()) - 1.0).abs() < 1e-12);
            assert!(pl.residual_distance(&p).unwrap() < 1e-10);
            let (ap, am) = pl.quoted_alpha_pm(&p);
            assert!((2.0 * (ap * am).norm() - want).abs() < 1e-12);
        }
        let maximal: Vec<_> = plateaus.iter().filter(|x| x.maximal).collect();
        assert_eq!(maximal.len(), 1);
        assert!(maximal[0].concurrence > 0.99);
    }

    #[test]
    fn nearest_plateau_lookup() {
        let p = CircuitParams::from_em_ratio(30.0, 0.25);
        let spacing = plateau_spacing(&p).unwrap();
        assert!(nearest_plateau(&p, 0.3 * spacing).unwrap().is_none());
        assert_eq!(nearest_plateau(&p, 3.2 * spacing).unwrap().unwrap().k, 3);
    }

    #[test]
    fn trace_shape_and_csv() {
        let p = CircuitParams::from_em_ratio(30.0, 0.5);
        let trace = concurrence_trace(&p, 600.0, 600, ConcurrenceMethod::Oracle).unwrap();
        assert_eq!(trace.values.len(), 601);
        assert!(trace.values[0] < 1e-12);
        assert!(trace.values.iter().all(|c| (0.0..=1.0).contains(c)));
        assert!(trace.is_plateau.iter().any(|&b| b));
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_ps,concurrence,is_plateau\n"));
        assert_eq!(text.lines().count(), 602);
        assert!(concurrence_trace(&p, 600.0, 0, ConcurrenceMethod::Oracle).is_err());
    }
}
