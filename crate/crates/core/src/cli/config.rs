//! TOML run configuration.
//!
//! ```toml
//! [circuit]
//! eps_j = [30.0, 30.0]   # ueV
//! em_ratio = 0.25        # or e12 = 1.875 (ueV), not both
//! flux = [0.0, 0.0]      # Phi_x / Phi_0
//! ec_eff = [120.0, 100.0]
//!
//! [capacitance]          # optional; replaces e12 and ec_eff
//! c_m_af = 1.0
//! c_sum_af = [600.0, 600.0]
//! c_g_af = [50.0, 50.0]
//! n_g = [0.6, 0.6]
//!
//! [sweep]
//! zeta = [0.125, 0.1]
//! tau_max = 12.0
//! tau_steps = 2000
//! em_ratio = [0.25, 0.5]
//! t_max_ps = 600.0
//! t_steps = 6000
//!
//! [bell]
//! te = "auto"            # or a time in ps
//! mode = "both"          # analytic | sampled | both
//! shots = 10000
//! seed = 2024
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::bell::AnalyzerSettings;
use crate::circuit::{energies_from_capacitances, units, CapacitanceParams, CircuitParams};
use crate::error::{Error, Result};

const ATTOFARAD: f64 = 1e-18;

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub circuit: CircuitSection,
    pub capacitance: Option<CapacitanceSection>,
    pub sweep: SweepSection,
    pub bell: BellSection,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitSection {
    pub eps_j: [f64; 2],
    pub e12: Option<f64>,
    pub em_ratio: Option<f64>,
    pub flux: [f64; 2],
    pub ec_eff: [f64; 2],
    pub hbar: f64,
}

impl Default for CircuitSection {
    fn default() -> Self {
        Self {
            eps_j: [30.0, 30.0],
            e12: None,
            em_ratio: None,
            flux: [0.0, 0.0],
            ec_eff: [120.0, 100.0],
            hbar: units::HBAR_UEV_PS,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CapacitanceSection {
    pub c_m_af: f64,
    pub c_sum_af: [f64; 2],
    pub c_g_af: [f64; 2],
    pub n_g: [f64; 2],
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub zeta: Vec<f64>,
    pub tau_max: f64,
    pub tau_steps: usize,
    pub em_ratio: Vec<f64>,
    pub t_max_ps: f64,
    pub t_steps: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            zeta: vec![0.125, 0.1],
            tau_max: 12.0,
            tau_steps: 2000,
            em_ratio: vec![0.25, 0.5],
            t_max_ps: 600.0,
            t_steps: 6000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    Analytic,
    Sampled,
    #[default]
    Both,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum TeChoice {
    #[default]
    Auto,
    At(f64),
}

impl<'de> Deserialize<'de> for TeChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(t) => Ok(TeChoice::At(t)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for TeChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(TeChoice::Auto);
        }
        s.parse().map(TeChoice::At).map_err(|_| format!("expected \"auto\" or a time in ps, got {s:?}"))
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BellSection {
    pub te: TeChoice,
    pub mode: ModeChoice,
    pub shots: u64,
    pub seed: u64,
    /// `[theta1, theta1', theta2, theta2']`.
    pub angles: Option<[f64; 4]>,
}

impl Default for BellSection {
    fn default() -> Self {
        Self { te: TeChoice::Auto, mode: ModeChoice::Both, shots: 10_000, seed: 2024, angles: None }
    }
}

impl BellSection {
    pub fn settings(&self) -> AnalyzerSettings {
        match self.angles {
            Some([theta1, theta1p, theta2, theta2p]) => AnalyzerSettings { theta1, theta1p, theta2, theta2p },
            None => AnalyzerSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let c = &self.circuit;
        if c.e12.is_some() && c.em_ratio.is_some() {
            return bad("set either circuit.e12 or circuit.em_ratio, not both".into());
        }
        if self.capacitance.is_some() && (c.e12.is_some() || c.em_ratio.is_some()) {
            return bad("[capacitance] determines E12; drop circuit.e12 / circuit.em_ratio".into());
        }
        let s = &self.sweep;
        if let Some(z) = s.zeta.iter().find(|z| !(0.0..1.0).contains(*z)) {
            return bad(format!("sweep.zeta entries must lie in [0, 1), got {z}"));
        }
        if let Some(r) = s.em_ratio.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return bad(format!("sweep.em_ratio entries must be >= 0, got {r}"));
        }
        if !(s.tau_max > 0.0 && s.t_max_ps > 0.0) || s.tau_steps == 0 || s.t_steps == 0 {
            return bad("sweep ranges and step counts must be positive".into());
        }
        if self.bell.shots == 0 {
            return Err(Error::NoShots);
        }
        if let TeChoice::At(t) = self.bell.te {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("bell.te must be >= 0, got {t}"));
            }
        }
        self.circuit_params().map(|_| ())
    }

    pub fn circuit_params(&self) -> Result<CircuitParams> {
        let c = &self.circuit;
        let e12 = match (c.e12, c.em_ratio) {
            (Some(e), _) => e,
            (None, Some(r)) => r * c.eps_j[0] / 4.0,
            (None, None) => 0.25 * c.eps_j[0] / 4.0,
        };
        let mut params = CircuitParams { eps_j: c.eps_j, flux: c.flux, e12, ec_eff: c.ec_eff, hbar: c.hbar };
        if let Some(cap) = &self.capacitance {
            let net = CapacitanceParams::with_gate_charges(
                cap.c_m_af * ATTOFARAD,
                cap.c_sum_af.map(|x| x * ATTOFARAD),
                cap.c_g_af.map(|x| x * ATTOFARAD),
                cap.n_g,
            );
            params = energies_from_capacitances(&net)?.apply_to(params);
        }
        params.validate()?;
        Ok(params)
    }
}
