//! Timed pulse programs and their text format.
//!
//! Segments are listed in chronological order: the first segment acts first
//! on the state, so [`run_sequence`] multiplies each new segment on the left.
//!
//! Text format, one segment per line, `#` starts a comment:
//!
//! ```text
//! evolve <working_point> <qubit|both> <duration_ps>
//! gate   <name>          <qubit|both> [angle_rad]
//! ```
//!
//! Working points: `general`, `decouple`, `far_detuned`, `coresonant`,
//! `idle`. Only `decouple` takes a qubit. Gates: `x` (ideal flip, no angle),
//! `rx`, `rz`, `hl` (Hadamard-like, angle = theta) on a single qubit, and
//! `zz` on `both` (`exp(-i angle sz sz)`).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;

use crate::circuit::{CircuitParams, Qubit, WorkingPoint};
use crate::dynamics::{gate_hadamard_like, pi_pulse_time, rx, rz, sigma_x, zz, Propagator};
use crate::error::{Error, Result};
use crate::qmath::{fidelity_up_to_global_phase, ComplexMatrix, C64};

/// Unitarity tolerance for ideal gates.
pub const GATE_UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    X(Qubit),
    Rx(Qubit, f64),
    Rz(Qubit, f64),
    HadamardLike(Qubit, f64),
    Zz(f64),
    Custom(ComplexMatrix),
}

impl Gate {
    pub fn operator(&self) -> ComplexMatrix {
        match *self {
            Gate::X(q) => sigma_x(q),
            Gate::Rx(q, phi) => rx(q, phi),
            Gate::Rz(q, phi) => rz(q, phi),
            Gate::HadamardLike(q, theta) => gate_hadamard_like(q, theta).explicit,
            Gate::Zz(chi) => zz(chi),
            Gate::Custom(ref m) => m.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SegmentKind {
    Evolve { point: WorkingPoint, duration: f64 },
    Ideal(Gate),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSegment {
    pub kind: SegmentKind,
    pub label: String,
}

impl PulseSegment {
    pub fn evolve(point: WorkingPoint, duration: f64) -> Self {
        Self { kind: SegmentKind::Evolve { point, duration }, label: String::new() }
    }

    pub fn gate(gate: Gate) -> Self {
        Self { kind: SegmentKind::Ideal(gate), label: String::new() }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            SegmentKind::Evolve { duration, .. } if !(*duration >= 0.0 && duration.is_finite()) => {
                Err(Error::InvalidParameter(format!("negative or non-finite duration {duration}")))
            }
            SegmentKind::Ideal(g) if !g.operator().is_unitary(GATE_UNITARITY_TOL) => {
                Err(Error::InvalidParameter(format!("gate {:?} is not unitary", self.label)))
            }
            SegmentKind::Ideal(g) if g.operator().dim() != 4 => {
                Err(Error::Dimension("sequence gates must act on both qubits (4x4)".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSequence {
    pub segments: Vec<PulseSegment>,
    pub params: CircuitParams,
}

impl PulseSequence {
    pub fn new(params: CircuitParams) -> Self {
        Self { segments: Vec::new(), params }
    }

    pub fn push(&mut self, segment: PulseSegment) -> &mut Self {
        self.segments.push(segment);
        self
    }

    /// Sum of evolution times; ideal gates take no time.
    pub fn total_duration(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| match s.kind {
                SegmentKind::Evolve { duration, .. } => duration,
                SegmentKind::Ideal(_) => 0.0,
            })
            .sum()
    }

    /// True if some segment evolves with the transverse (sx) terms switched
    /// on, i.e. the sequence relies on the decoupling approximation.
    pub fn uses_transverse_evolution(&self) -> bool {
        self.segments.iter().any(|s| {
            matches!(
                s.kind,
                SegmentKind::Evolve {
                    point: WorkingPoint::Decouple(_) | WorkingPoint::CoResonantBoth | WorkingPoint::General,
                    ..
                }
            )
        })
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.segments {
            if !s.label.is_empty() {
                writeln!(out, "# {}", s.label).unwrap();
            }
            match &s.kind {
                SegmentKind::Evolve { point, duration } => {
                    let target = match point {
                        WorkingPoint::Decouple(q) => q.to_string(),
                        _ => "both".into(),
                    };
                    writeln!(out, "evolve {} {target} {duration:?}", point.name()).unwrap();
                }
                SegmentKind::Ideal(g) => {
                    let line = match *g {
                        Gate::X(q) => format!("gate x {q}"),
                        Gate::Rx(q, a) => format!("gate rx {q} {a:?}"),
                        Gate::Rz(q, a) => format!("gate rz {q} {a:?}"),
                        Gate::HadamardLike(q, a) => format!("gate hl {q} {a:?}"),
                        Gate::Zz(a) => format!("gate zz both {a:?}"),
                        Gate::Custom(_) => {
                            return Err(Error::InvalidParameter("custom gates have no text form".into()))
                        }
                    };
                    writeln!(out, "{line}").unwrap();
                }
            }
        }
        Ok(out)
    }

    pub fn parse(text: &str, params: CircuitParams) -> Result<Self> {
        let mut seq = Self::new(params);
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let segment = parse_line(line).map_err(|message| Error::Parse { line: n + 1, message })?;
            segment.validate().map_err(|e| Error::Parse { line: n + 1, message: e.to_string() })?;
            seq.push(segment);
        }
        Ok(seq)
    }
}

fn parse_number(tok: Option<&str>, what: &str) -> std::result::Result<f64, String> {
    let tok = tok.ok_or_else(|| format!("missing {what}"))?;
    tok.parse::<f64>().map_err(|_| format!("invalid {what} {tok:?}"))
}

fn parse_qubit(tok: Option<&str>) -> std::result::Result<Qubit, String> {
    match tok {
        Some("1") => Ok(Qubit::One),
        Some("2") => Ok(Qubit::Two),
        Some(other) => Err(format!("expected qubit 1 or 2, got {other:?}")),
        None => Err("missing qubit".into()),
    }
}

fn expect_both(tok: Option<&str>, what: &str) -> std::result::Result<(), String> {
    match tok {
        Some("both") => Ok(()),
        other => Err(format!("{what} acts on both qubits, got {other:?}")),
    }
}

fn parse_line(line: &str) -> std::result::Result<PulseSegment, String> {
    let mut toks = line.split_whitespace();
    let kind = toks.next().unwrap_or_default();
    let segment = match kind {
        "evolve" => {
            let name = toks.next().ok_or("missing working point")?;
            let target = toks.next();
            let point = match name {
                "decouple" => WorkingPoint::Decouple(parse_qubit(target)?),
                "general" | "far_detuned" | "coresonant" | "idle" => {
                    expect_both(target, name)?;
                    match name {
                        "general" => WorkingPoint::General,
                        "far_detuned" => WorkingPoint::FarDetuned,
                        "coresonant" => WorkingPoint::CoResonantBoth,
                        _ => WorkingPoint::Idle,
                    }
                }
                other => return Err(format!("unknown working point {other:?}")),
            };
            let duration = parse_number(toks.next(), "duration")?;
            PulseSegment::evolve(point, duration)
        }
        "gate" => {
            let name = toks.next().ok_or("missing gate name")?;
            let target = toks.next();
            let gate = match name {
                "x" => Gate::X(parse_qubit(target)?),
                "rx" => Gate::Rx(parse_qubit(target)?, parse_number(toks.next(), "angle")?),
                "rz" => Gate::Rz(parse_qubit(target)?, parse_number(toks.next(), "angle")?),
                "hl" => Gate::HadamardLike(parse_qubit(target)?, parse_number(toks.next(), "angle")?),
                "zz" => {
                    expect_both(target, "zz")?;
                    Gate::Zz(parse_number(toks.next(), "angle")?)
                }
                other => return Err(format!("unknown gate {other:?}")),
            };
            PulseSegment::gate(gate)
        }
        other => return Err(format!("expected 'evolve' or 'gate', got {other:?}")),
    };
    if let Some(extra) = toks.next() {
        return Err(format!("unexpected trailing token {extra:?}"));
    }
    Ok(segment)
}

/// Total unitary of the sequence, earliest segment acting first.
pub fn run_sequence(seq: &PulseSequence) -> Result<ComplexMatrix> {
    let mut total = ComplexMatrix::identity(4);
    for segment in &seq.segments {
        segment.validate()?;
        let u = match &segment.kind {
            SegmentKind::Evolve { point, duration } => Propagator::new(&seq.params, *point)?.at(*duration)?,
            SegmentKind::Ideal(g) => g.operator(),
        };
        total = &u * &total;
    }
    Ok(total)
}

/// What a sequence is supposed to implement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    Identity,
    /// Controlled-sz, `diag(1, 1, 1, -1)`.
    Cz,
    Rx(Qubit, f64),
    Rz(Qubit, f64),
}

impl Target {
    pub fn operator(&self) -> ComplexMatrix {
        match *self {
            Target::Identity => ComplexMatrix::identity(4),
            Target::Cz => {
                let one = C64::from(1.0);
                ComplexMatrix::diagonal(&[one, one, one, -one])
            }
            Target::Rx(q, phi) => rx(q, phi),
            Target::Rz(q, phi) => rz(q, phi),
        }
    }

    pub fn parse(name: &str, qubit: Qubit, angle: f64) -> Result<Self> {
        match name {
            "identity" => Ok(Target::Identity),
            "cz" => Ok(Target::Cz),
            "rx" => Ok(Target::Rx(qubit, angle)),
            "rz" => Ok(Target::Rz(qubit, angle)),
            other => Err(Error::InvalidParameter(format!("unknown target {other:?}"))),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Target::Identity => "identity".into(),
            Target::Cz => "cz".into(),
            Target::Rx(q, a) => format!("rx(q{q}, {a})"),
            Target::Rz(q, a) => format!("rz(q{q}, {a})"),
        }
    }
}

/// `1 - F` allowed for sequences that are exact algebraic identities.
pub const EXACT_INFIDELITY_TOL: f64 = 1e-9;
/// `1 - F` allowed for sequences relying on the decoupling approximation.
pub const APPROX_INFIDELITY_TOL: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct SequenceCheck {
    pub unitary: ComplexMatrix,
    pub total_duration: f64,
    pub fidelity: f64,
    pub unitarity_error: f64,
    pub approximate: bool,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn verify_sequence(seq: &PulseSequence, target: Target) -> Result<SequenceCheck> {
    let unitary = run_sequence(seq)?;
    let fidelity = fidelity_up_to_global_phase(&unitary, &target.operator())?;
    let approximate = seq.uses_transverse_evolution();
    let tolerance = if approximate { APPROX_INFIDELITY_TOL } else { EXACT_INFIDELITY_TOL };
    let unitarity_error = unitary.unitarity_error();
    Ok(SequenceCheck {
        total_duration: seq.total_duration(),
        passed: 1.0 - fidelity <= tolerance && unitarity_error <= 1e-10,
        unitary,
        fidelity,
        unitarity_error,
        approximate,
        tolerance,
    })
}

/// Knobs shared by the built-in sequences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuiltinOptions {
    /// Delay of the decoupling cycle (ps).
    pub tau: f64,
    /// Rotation angle for the single-qubit builtins (rad).
    pub angle: f64,
    /// Coupling ratio used by `rx-physical`.
    pub zeta: f64,
}

impl Default for BuiltinOptions {
    fn default() -> Self {
        Self { tau: 100.0, angle: PI / 3.0, zeta: 0.125 }
    }
}

pub const BUILTINS: [&str; 5] =
    ["decouple-identity", "decouple-identity-reversed", "cz", "rx-physical", "rz-refocused"];

/// Appends `[R_z12(chi) sx^(k)]^2` as gate/evolve segments.
fn push_refocused_rz(seq: &mut PulseSequence, j: Qubit, phi: f64) -> Result<()> {
    let e_j = seq.params.far_detuned_energies()?[j.index()];
    if e_j == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "refocused rotation on qubit {j} needs a nonzero far-detuned energy"
        )));
    }
    // One bias setting is shared by the whole sequence, so a rotation of the
    // opposite sign to E_j is reached through phi -+ pi (a global sign only).
    let phi_eff = if phi * e_j < 0.0 { phi - PI * phi.signum() } else { phi };
    let half = phi_eff * seq.params.hbar / (2.0 * e_j);
    let k = j.other();
    for _ in 0..2 {
        seq.push(PulseSegment::gate(Gate::X(k)).labeled(format!("refocus rz(q{j}, {phi})")));
        seq.push(PulseSegment::evolve(WorkingPoint::FarDetuned, half));
    }
    Ok(())
}

pub fn builtin(name: &str, params: &CircuitParams, opts: BuiltinOptions) -> Result<(PulseSequence, Target)> {
    params.validate()?;
    let j = Qubit::One;
    match name {
        "decouple-identity" | "decouple-identity-reversed" => {
            let mut seq = PulseSequence::new(*params);
            let delay = PulseSegment::evolve(WorkingPoint::Idle, opts.tau).labeled("U_d(tau)");
            let flip = PulseSegment::gate(Gate::X(j));
            let pair = if name == "decouple-identity" { [delay, flip] } else { [flip, delay] };
            for _ in 0..2 {
                for s in &pair {
                    seq.push(s.clone());
                }
            }
            Ok((seq, Target::Identity))
        }
        "cz" => {
            let mut p = *params;
            p.flux = [0.5, 0.5];
            if p.e12 == 0.0 {
                return Err(Error::InvalidParameter("cz builtin needs E12 > 0".into()));
            }
            let mut seq = PulseSequence::new(p);
            // U_d(-pi / 4 E12) needs negative time; it enters as an ideal gate.
            seq.push(PulseSegment::gate(Gate::Zz(-FRAC_PI_4)).labeled("U_d(-pi/4E12)"));
            push_refocused_rz(&mut seq, j.other(), FRAC_PI_4)?;
            push_refocused_rz(&mut seq, j, FRAC_PI_4)?;
            Ok((seq, Target::Cz))
        }
        "rx-physical" => {
            let mut p = *params;
            p.e12 = 2.0 * opts.zeta * p.eps_j[j.index()];
            let t0 = pi_pulse_time(&p, j)?;
            let mut seq = PulseSequence::new(p);
            seq.push(PulseSegment::evolve(WorkingPoint::Decouple(j), t0).labeled("physical flip"));
            Ok((seq, Target::Rx(j, FRAC_PI_2)))
        }
        "rz-refocused" => {
            let mut p = *params;
            p.flux = [0.5, 0.5];
            let mut seq = PulseSequence::new(p);
            push_refocused_rz(&mut seq, j, opts.angle)?;
            Ok((seq, Target::Rz(j, opts.angle)))
        }
        other => {
            Err(Error::InvalidParameter(format!("unknown builtin {other:?}; expected one of {}", BUILTINS.join(", "))))
        }
    }
}
