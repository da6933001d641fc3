//! Two capacitively coupled Cooper-pair boxes with SQUID-tunable Josephson
//! energies, truncated to the four lowest charge states.
//!
//! Energies are in ueV and times in ps unless a [`CircuitParams`] is built
//! with `hbar = 1`, in which case both are in matching natural units.

use std::f64::consts::PI;
use std::fmt;

use log::warn;

use crate::error::{Error, Result};
use crate::qmath::{kron, pauli, ComplexMatrix, C64};

pub mod units {
    /// Reduced Planck constant in ueV * ps.
    pub const HBAR_UEV_PS: f64 = 658.211_956_9;
    /// Boltzmann constant in ueV / K.
    pub const KB_UEV_PER_K: f64 = 86.173_33;
    /// Elementary charge in C.
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Joule to ueV.
    pub const UEV_PER_JOULE: f64 = 1e6 / ELEMENTARY_CHARGE;
}

/// Coupling ratio above which decoupling gates are flagged as inaccurate.
pub const ZETA_WARN: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Qubit {
    One,
    Two,
}

impl Qubit {
    pub fn other(self) -> Self {
        match self {
            Qubit::One => Qubit::Two,
            Qubit::Two => Qubit::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Qubit::One => 0,
            Qubit::Two => 1,
        }
    }

    /// Parses the 1-based label used in files and on the command line.
    pub fn from_label(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Qubit::One),
            2 => Ok(Qubit::Two),
            _ => Err(Error::InvalidParameter(format!("qubit must be 1 or 2, got {n}"))),
        }
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

/// Embeds a single-qubit operator on `q`, identity on the other qubit.
pub fn embed(op: &ComplexMatrix, q: Qubit) -> ComplexMatrix {
    let id = pauli::identity();
    match q {
        Qubit::One => kron(op, &id),
        Qubit::Two => kron(&id, op),
    }
    .expect("embed expects a 2x2 operator")
}

/// Energy-level description of the circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircuitParams {
    /// Single-junction Josephson energy per qubit.
    pub eps_j: [f64; 2],
    /// Applied flux per SQUID loop, in units of the flux quantum.
    pub flux: [f64; 2],
    /// Effective sz-sz coupling `E_m / 4`.
    pub e12: f64,
    /// Bias-dependent effective charging energy per qubit.
    pub ec_eff: [f64; 2],
    pub hbar: f64,
}

impl CircuitParams {
    /// Symmetric circuit in ueV / ps at co-resonance with open SQUIDs.
    pub fn symmetric(eps_j: f64, e12: f64) -> Self {
        Self { eps_j: [eps_j, eps_j], flux: [0.0, 0.0], e12, ec_eff: [0.0, 0.0], hbar: units::HBAR_UEV_PS }
    }

    /// Same as [`CircuitParams::symmetric`] but with `hbar = 1`.
    pub fn natural(eps_j: f64, e12: f64) -> Self {
        Self { hbar: 1.0, ..Self::symmetric(eps_j, e12) }
    }

    /// Symmetric circuit with the coupling given as `E_m / eps_J`.
    pub fn from_em_ratio(eps_j: f64, em_ratio: f64) -> Self {
        Self::symmetric(eps_j, em_ratio * eps_j / 4.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.eps_j.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return bad("eps_J must be positive and finite");
        }
        if !(self.e12 >= 0.0 && self.e12.is_finite()) {
            return bad("E12 must be non-negative and finite");
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return bad("hbar must be positive");
        }
        if self.flux.iter().chain(&self.ec_eff).any(|v| !v.is_finite()) {
            return bad("flux and E_C must be finite");
        }
        Ok(())
    }

    /// `zeta_j = E12 / (2 eps_J^(j))`.
    pub fn zeta(&self, q: Qubit) -> f64 {
        self.e12 / (2.0 * self.eps_j[q.index()])
    }

    /// Rejects `zeta_j >= 1` and logs a warning above [`ZETA_WARN`].
    pub fn check_decoupling(&self, q: Qubit) -> Result<f64> {
        let z = self.zeta(q);
        if z >= 1.0 {
            return Err(Error::InvalidParameter(format!("decoupling needs zeta < 1 on qubit {q}, got {z}")));
        }
        if z > ZETA_WARN {
            warn!("zeta = {z:.4} on qubit {q} exceeds {ZETA_WARN}; decoupled gates will be inaccurate");
        }
        Ok(z)
    }

    pub fn is_symmetric(&self) -> bool {
        self.eps_j[0] == self.eps_j[1]
    }

    /// SQUID Josephson energy `E_J^(j)` at the configured flux.
    pub fn josephson(&self, q: Qubit) -> f64 {
        effective_josephson(self.eps_j[q.index()], self.flux[q.index()])
    }

    /// Per-qubit `E_j` of the far-detuned Hamiltonian, including the
    /// `1 + varsigma_j^2 / (1 - varsigma_12^2)` correction.
    ///
    /// `varsigma_12 = E12 / E_C^(j)` is evaluated with each qubit's own
    /// charging energy.
    pub fn far_detuned_energies(&self) -> Result<[f64; 2]> {
        let mut out = [0.0; 2];
        for q in [Qubit::One, Qubit::Two] {
            let ec = self.ec_eff[q.index()];
            let ej = self.josephson(q);
            if ec == 0.0 {
                if ej.abs() > 1e-12 * self.eps_j[q.index()] {
                    return Err(Error::InvalidParameter(format!(
                        "far-detuned point needs E_C != 0 on qubit {q} while E_J = {ej}"
                    )));
                }
                continue;
            }
            let s12 = (self.e12 / ec).powi(2);
            if s12 >= 1.0 {
                return Err(Error::SingularCorrection { qubit: q.index() + 1, value: s12 });
            }
            let sj = (ej / (2.0 * ec)).powi(2);
            out[q.index()] = ec * (1.0 + sj / (1.0 - s12));
        }
        Ok(out)
    }
}

/// `E_J = 2 eps_J cos(pi Phi / Phi_0)`.
pub fn effective_josephson(eps_j: f64, flux_ratio: f64) -> f64 {
    2.0 * eps_j * (PI * flux_ratio).cos()
}

/// Named bias configurations; each selects one effective Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorkingPoint {
    /// Full two-level Hamiltonian with the configured `E_C^(j)` and flux.
    General,
    /// Co-resonance with only qubit `j`'s SQUID open:
    /// `-eps_J^(j) sx^(j) + E12 sz sz`.
    Decouple(Qubit),
    /// Far from co-resonance: `sum E_j sz^(j) + E12 sz sz`.
    FarDetuned,
    /// Co-resonance with both SQUIDs open:
    /// `-sum eps_J^(j) sx^(j) + E12 sz sz`.
    CoResonantBoth,
    /// Co-resonance with both SQUIDs frustrated: only `E12 sz sz` remains.
    Idle,
}

impl WorkingPoint {
    pub fn name(&self) -> &'static str {
        match self {
            WorkingPoint::General => "general",
            WorkingPoint::Decouple(_) => "decouple",
            WorkingPoint::FarDetuned => "far_detuned",
            WorkingPoint::CoResonantBoth => "coresonant",
            WorkingPoint::Idle => "idle",
        }
    }
}

pub fn hamiltonian(params: &CircuitParams, point: WorkingPoint) -> Result<ComplexMatrix> {
    params.validate()?;
    let sx = pauli::x();
    let sz = pauli::z();
    let coupling = pauli::zz().scale(C64::from(params.e12));
    let terms: Vec<ComplexMatrix> = match point {
        WorkingPoint::General => [Qubit::One, Qubit::Two]
            .into_iter()
            .flat_map(|q| {
                let ec = params.ec_eff[q.index()];
                let ej = params.josephson(q);
                [embed(&sz, q).scale((0.5 * ec).into()), embed(&sx, q).scale((-0.5 * ej).into())]
            })
            .collect(),
        WorkingPoint::Decouple(q) => {
            vec![embed(&sx, q).scale((-params.eps_j[q.index()]).into())]
        }
        WorkingPoint::FarDetuned => {
            let e = params.far_detuned_energies()?;
            [Qubit::One, Qubit::Two].into_iter().map(|q| embed(&sz, q).scale(e[q.index()].into())).collect()
        }
        WorkingPoint::CoResonantBoth => [Qubit::One, Qubit::Two]
            .into_iter()
            .map(|q| embed(&sx, q).scale((-params.eps_j[q.index()]).into()))
            .collect(),
        WorkingPoint::Idle => Vec::new(),
    };
    Ok(terms.iter().fold(coupling, |acc, t| acc.add(t).expect("4x4 terms")))
}

/// Capacitance-level description of the circuit (SI units, voltages in V).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacitanceParams {
    pub c_m: f64,
    /// Total capacitance attached to each box, `C_sigma_j`.
    pub c_sum: [f64; 2],
    pub c_g: [f64; 2],
    pub v_g: [f64; 2],
    pub c_p: [f64; 2],
    pub v_p: f64,
    /// Overrides the computed `E_{C_j}` (ueV) when set.
    pub e_cj_override: Option<[f64; 2]>,
}

impl CapacitanceParams {
    /// Network with no probe, gate voltages tuned to the requested charges.
    pub fn with_gate_charges(c_m: f64, c_sum: [f64; 2], c_g: [f64; 2], n_g: [f64; 2]) -> Self {
        let v_g = [0, 1].map(|j| 2.0 * units::ELEMENTARY_CHARGE * n_g[j] / c_g[j]);
        Self { c_m, c_sum, c_g, v_g, c_p: [0.0; 2], v_p: 0.0, e_cj_override: None }
    }

    /// `C_sigma = C_sigma_1 C_sigma_2 - C_m^2`.
    pub fn c_sigma(&self) -> f64 {
        self.c_sum[0] * self.c_sum[1] - self.c_m * self.c_m
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChargingEnergies {
    pub e_m: f64,
    pub e12: f64,
    /// `E_{C_j}`; note the cross index, qubit j uses `C_sigma_k` of the other box.
    pub e_cj: [f64; 2],
    pub n_g: [f64; 2],
    pub ec_eff: [f64; 2],
}

impl ChargingEnergies {
    /// Fills the energy fields of `base` with these values.
    pub fn apply_to(&self, base: CircuitParams) -> CircuitParams {
        CircuitParams { e12: self.e12, ec_eff: self.ec_eff, ..base }
    }
}

/// Charging energies (ueV) from the capacitance network.
///
/// `E_{C_j} = 4 e^2 C_sigma_k / C_sigma` with `k` the *other* box, and
/// `E_C^(j) = E_{C_j} (n_g_j - 1/2) + E_m (n_g_k / 2 - 1/4)`.
pub fn energies_from_capacitances(p: &CapacitanceParams) -> Result<ChargingEnergies> {
    let c_sigma = p.c_sigma();
    if !(c_sigma > 0.0) {
        return Err(Error::DegenerateCapacitance(c_sigma));
    }
    let e = units::ELEMENTARY_CHARGE;
    let four_e2 = 4.0 * e * e * units::UEV_PER_JOULE;
    let e_m = four_e2 * p.c_m / c_sigma;
    let e_cj = p.e_cj_override.unwrap_or([four_e2 * p.c_sum[1] / c_sigma, four_e2 * p.c_sum[0] / c_sigma]);
    let n_g = [0, 1].map(|j| (p.c_g[j] * p.v_g[j] + p.c_p[j] * p.v_p) / (2.0 * e));
    if n_g.iter().any(|n| !n.is_finite()) {
        return Err(Error::InvalidParameter("gate charge is not finite".into()));
    }
    let ec_eff = [0, 1].map(|j| {
        let k = 1 - j;
        e_cj[j] * (n_g[j] - 0.5) + e_m * (n_g[k] / 2.0 - 0.25)
    });
    Ok(ChargingEnergies { e_m, e12: e_m / 4.0, e_cj, n_g, ec_eff })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeFlags {
    /// `k_B T / E_J`.
    pub thermal_ratio: f64,
    /// `E_J / E_C`.
    pub charge_ratio: f64,
    /// `E_C / Delta`.
    pub gap_ratio: f64,
    pub thermal_ok: bool,
    pub charge_ok: bool,
    pub gap_ok: bool,
}

impl RegimeFlags {
    pub fn all_ok(&self) -> bool {
        self.thermal_ok && self.charge_ok && self.gap_ok
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeReport {
    pub temperature: f64,
    pub gap: f64,
    pub threshold: f64,
    pub qubits: [RegimeFlags; 2],
}

pub const DEFAULT_REGIME_THRESHOLD: f64 = 0.2;

/// Checks `k_B T << E_J << E_C << Delta` per qubit, reading each `<<` as
/// `ratio <= threshold`. Energies in ueV, temperature in K.
pub fn check_regime(
    josephson: [f64; 2],
    charging: [f64; 2],
    temperature: f64,
    gap: f64,
    threshold: f64,
) -> RegimeReport {
    let kt = units::KB_UEV_PER_K * temperature;
    let qubits = [0, 1].map(|j| {
        let thermal_ratio = kt / josephson[j].abs();
        let charge_ratio = josephson[j].abs() / charging[j].abs();
        let gap_ratio = charging[j].abs() / gap;
        RegimeFlags {
            thermal_ratio,
            charge_ratio,
            gap_ratio,
            thermal_ok: thermal_ratio <= threshold,
            charge_ok: charge_ratio <= threshold,
            gap_ok: gap_ratio <= threshold,
        }
    });
    RegimeReport { temperature, gap, threshold, qubits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::ONE;

    const AF: f64 = 1e-18;

    #[test]
    fn josephson_flux_dependence() {
        assert_eq!(effective_josephson(30.0, 0.0), 60.0);
        assert!(effective_josephson(30.0, 0.5).abs() < 1e-12);
        assert!((effective_josephson(30.0, 1.0 / 3.0) - 30.0).abs() < 1e-12);
    }

    #[test]
    fn decouple_without_coupling() {
        let p = CircuitParams::natural(1.0, 0.0);
        let h = hamiltonian(&p, WorkingPoint::Decouple(Qubit::One)).unwrap();
        let expected = embed(&pauli::x(), Qubit::One).scale((-1.0).into());
        assert!(h.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn em_ratio_quarter_coupling() {
        let p = CircuitParams::from_em_ratio(30.0, 0.25);
        assert!((p.e12 - 1.875).abs() < 1e-12);
        let h = hamiltonian(&p, WorkingPoint::CoResonantBoth).unwrap();
        assert!((h[(0, 0)].re - 1.875).abs() < 1e-12);
        assert!((h[(0, 1)].re + 30.0).abs() < 1e-12);
    }

    #[test]
    fn far_detuned_without_josephson_is_bare_charging() {
        let mut p = CircuitParams::symmetric(30.0, 2.0);
        p.flux = [0.5, 0.5];
        p.ec_eff = [40.0, -25.0];
        let e = p.far_detuned_energies().unwrap();
        assert!((e[0] - 40.0).abs() < 1e-12 && (e[1] + 25.0).abs() < 1e-12);
        let h = hamiltonian(&p, WorkingPoint::FarDetuned).unwrap();
        // |00>: E1 + E2 + E12
        assert!((h[(0, 0)].re - (40.0 - 25.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn far_detuned_correction_factor() {
        let mut p = CircuitParams::symmetric(5.0, 20.0);
        p.flux = [0.0, 0.0];
        p.ec_eff = [100.0, 50.0];
        let e = p.far_detuned_energies().unwrap();
        // varsigma_1 = 10/200, varsigma_12 = 20/100
        let want1 = 100.0 * (1.0 + 0.05f64.powi(2) / (1.0 - 0.04));
        let want2 = 50.0 * (1.0 + 0.1f64.powi(2) / (1.0 - 0.16));
        assert!((e[0] - want1).abs() < 1e-12);
        assert!((e[1] - want2).abs() < 1e-12);
    }

    #[test]
    fn far_detuned_singular_factor() {
        let mut p = CircuitParams::symmetric(5.0, 20.0);
        p.ec_eff = [20.0, 100.0];
        assert!(matches!(hamiltonian(&p, WorkingPoint::FarDetuned), Err(Error::SingularCorrection { qubit: 1, .. })));
    }

    #[test]
    fn idle_is_pure_coupling() {
        let p = CircuitParams::natural(1.0, 0.3);
        let h = hamiltonian(&p, WorkingPoint::Idle).unwrap();
        assert!(h.max_abs_diff(&pauli::zz().scale(0.3.into())) < 1e-15);
    }

    #[test]
    fn general_matches_expanded_form() {
        let mut p = CircuitParams::natural(0.7, 0.2);
        p.flux = [0.1, 0.3];
        p.ec_eff = [1.5, -0.4];
        let h = hamiltonian(&p, WorkingPoint::General).unwrap();
        let ej = [p.josephson(Qubit::One), p.josephson(Qubit::Two)];
        // |00> diagonal: (E_C1 + E_C2)/2 + E12
        assert!((h[(0, 0)].re - ((1.5 - 0.4) / 2.0 + 0.2)).abs() < 1e-14);
        // <10|H|00> = -E_J1/2
        assert!((h[(1, 0)].re + ej[0] / 2.0).abs() < 1e-14);
        assert!((h[(2, 0)].re + ej[1] / 2.0).abs() < 1e-14);
        assert!(h.is_hermitian(1e-15));
    }

    #[test]
    fn rejects_invalid_params() {
        let mut p = CircuitParams::natural(1.0, 0.1);
        p.eps_j[1] = 0.0;
        assert!(hamiltonian(&p, WorkingPoint::General).is_err());
        let p = CircuitParams::natural(1.0, -0.1);
        assert!(p.validate().is_err());
        let p = CircuitParams::natural(1.0, 2.5);
        assert!(p.check_decoupling(Qubit::One).is_err());
    }

    #[test]
    fn decoupled_capacitance_limit() {
        let p = CapacitanceParams::with_gate_charges(0.0, [600.0 * AF; 2], [10.0 * AF; 2], [0.3, 0.1]);
        let e = energies_from_capacitances(&p).unwrap();
        assert_eq!(e.e_m, 0.0);
        assert_eq!(e.e12, 0.0);
    }

    #[test]
    fn co_resonance_cancels_charging() {
        let p = CapacitanceParams::with_gate_charges(1.0 * AF, [600.0 * AF, 550.0 * AF], [10.0 * AF; 2], [0.5, 0.5]);
        let e = energies_from_capacitances(&p).unwrap();
        assert!((e.n_g[0] - 0.5).abs() < 1e-12);
        assert!(e.ec_eff[0].abs() < 1e-9 && e.ec_eff[1].abs() < 1e-9);
    }

    #[test]
    fn capacitance_reference_values() {
        // Frozen from direct evaluation of 4e^2 C / C_sigma in double precision.
        let p = CapacitanceParams::with_gate_charges(1.0 * AF, [600.0 * AF; 2], [10.0 * AF; 2], [0.5, 0.5]);
        let e = energies_from_capacitances(&p).unwrap();
        assert!((e.e_m - 1.780_201_205_003_346_9).abs() < 1e-9);
        assert!((e.e12 - 0.445_050_301_250_836_7).abs() < 1e-9);
        assert!((e.e_cj[0] - 1_068.120_723_002_008).abs() < 1e-6);
    }

    #[test]
    fn charging_uses_the_other_box() {
        let p = CapacitanceParams::with_gate_charges(1.0 * AF, [600.0 * AF, 300.0 * AF], [10.0 * AF; 2], [0.2, 0.4]);
        let e = energies_from_capacitances(&p).unwrap();
        // qubit 1 scales with C_sigma_2, which is the smaller one
        assert!(e.e_cj[0] < e.e_cj[1]);
        assert!((e.e_cj[1] / e.e_cj[0] - 2.0).abs() < 1e-12);
        let want = e.e_cj[0] * (0.2 - 0.5) + e.e_m * (0.4 / 2.0 - 0.25);
        assert!((e.ec_eff[0] - want).abs() < 1e-9);
    }

    #[test]
    fn degenerate_network() {
        let p = CapacitanceParams::with_gate_charges(600.0 * AF, [600.0 * AF; 2], [10.0 * AF; 2], [0.5, 0.5]);
        assert!(matches!(energies_from_capacitances(&p), Err(Error::DegenerateCapacitance(_))));
    }

    #[test]
    fn regime_flags() {
        let kt = units::KB_UEV_PER_K * 0.01;
        let r = check_regime([kt / 0.01; 2], [kt / 0.001; 2], 0.01, kt / 0.0001, 0.2);
        assert!(r.qubits.iter().all(RegimeFlags::all_ok));
        let r = check_regime([50.0; 2], [100.0; 2], 0.01, 1000.0, 0.2);
        assert!(!r.qubits[0].charge_ok);
        assert!(r.qubits[0].thermal_ok && r.qubits[0].gap_ok);
    }

    #[test]
    fn regime_thirty_millikelvin() {
        let r = check_regime([30.0; 2], [300.0; 2], 0.030, 3000.0, DEFAULT_REGIME_THRESHOLD);
        assert!((units::KB_UEV_PER_K * 0.030 - 2.585).abs() < 1e-3);
        assert!((r.qubits[0].thermal_ratio - 0.0862).abs() < 1e-4);
        assert!(r.qubits[0].thermal_ok);
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        let mut p = CircuitParams::symmetric(30.0, 3.0);
        p.ec_eff = [80.0, 60.0];
        p.flux = [0.2, 0.45];
        for wp in [
            WorkingPoint::General,
            WorkingPoint::Decouple(Qubit::One),
            WorkingPoint::Decouple(Qubit::Two),
            WorkingPoint::FarDetuned,
            WorkingPoint::CoResonantBoth,
            WorkingPoint::Idle,
        ] {
            let h = hamiltonian(&p, wp).unwrap();
            assert!(h.is_hermitian(1e-12), "{wp:?}");
            assert_eq!(h.dim(), 4);
        }
        assert_eq!(embed(&pauli::identity(), Qubit::Two)[(3, 3)], ONE);
    }
}
