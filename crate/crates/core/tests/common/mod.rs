//! Reference implementations shared by the integration tests. Nothing here
//! goes through the library's linear algebra.
#![allow(dead_code)]

use josephson_bell::qmath::{ComplexMatrix, StateVector, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type M4 = [[C64; 4]; 4];

const Z: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn identity() -> M4 {
    let mut m = [[Z; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn mul(a: &M4, b: &M4) -> M4 {
    let mut m = [[Z; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

pub fn add(a: &M4, b: &M4) -> M4 {
    let mut m = *a;
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] += b[i][j];
        }
    }
    m
}

pub fn scale(a: &M4, s: C64) -> M4 {
    a.map(|row| row.map(|x| x * s))
}

/// Single-qubit operator on qubit `q` (0 or 1); qubit 0 is the low bit of
/// the basis index `|00>, |10>, |01>, |11>`.
pub fn on_qubit(q: usize, op: [[C64; 2]; 2]) -> M4 {
    let mut m = [[Z; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let other = 1 - q;
            if (i >> other) & 1 == (j >> other) & 1 {
                m[i][j] = op[(i >> q) & 1][(j >> q) & 1];
            }
        }
    }
    m
}

pub fn sx() -> [[C64; 2]; 2] {
    [[Z, ONE], [ONE, Z]]
}

pub fn sz() -> [[C64; 2]; 2] {
    [[ONE, Z], [Z, -ONE]]
}

pub fn szsz() -> M4 {
    let mut m = [[Z; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        let parity = (i & 1) ^ (i >> 1);
        row[i] = if parity == 0 { ONE } else { -ONE };
    }
    m
}

/// `-eps1 sx1 - eps2 sx2 + e12 sz sz`.
pub fn coupled_hamiltonian(eps1: f64, eps2: f64, e12: f64) -> M4 {
    let h = scale(&szsz(), e12.into());
    let h = add(&h, &scale(&on_qubit(0, sx()), (-eps1).into()));
    add(&h, &scale(&on_qubit(1, sx()), (-eps2).into()))
}

/// `exp(a)` by scaling and squaring with a 30-term Taylor series.
pub fn expm_taylor(a: &M4) -> M4 {
    let norm: f64 = a.iter().flatten().map(|x| x.norm()).sum();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let a = scale(a, (1.0 / 2f64.powi(s)).into());
    let mut term = identity();
    let mut sum = identity();
    for k in 1..30 {
        term = scale(&mul(&term, &a), (1.0 / k as f64).into());
        sum = add(&sum, &term);
    }
    for _ in 0..s {
        sum = mul(&sum, &sum);
    }
    sum
}

/// `exp(-i h t / hbar)`.
pub fn propagator(h: &M4, t: f64, hbar: f64) -> M4 {
    expm_taylor(&scale(h, -I * (t / hbar)))
}

pub fn to_matrix(m: &M4) -> ComplexMatrix {
    ComplexMatrix::from_rows(*m)
}

pub fn max_diff(a: &M4, b: &ComplexMatrix) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            d = d.max((a[i][j] - b[(i, j)]).norm());
        }
    }
    d
}

pub fn apply(m: &M4, v: &[C64; 4]) -> [C64; 4] {
    let mut out = [Z; 4];
    for i in 0..4 {
        out[i] = (0..4).map(|k| m[i][k] * v[k]).sum();
    }
    out
}

/// `2 |a00 a11 - a10 a01|`.
pub fn concurrence(v: &[C64; 4]) -> f64 {
    2.0 * (v[0] * v[3] - v[1] * v[2]).norm()
}

pub fn random_state(r: &mut impl Rng) -> StateVector {
    let raw: [C64; 4] = std::array::from_fn(|_| C64::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5));
    let n = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(raw.map(|a| a / n))
}

pub fn random_product_state(r: &mut impl Rng) -> StateVector {
    let qubit = |r: &mut dyn rand::RngCore| {
        let (th, ph): (f64, f64) = (r.gen::<f64>() * std::f64::consts::PI, r.gen::<f64>() * std::f64::consts::TAU);
        [C64::from((th / 2.0).cos()), C64::from_polar((th / 2.0).sin(), ph)]
    };
    let (a, b) = (qubit(r), qubit(r));
    StateVector::from_amplitudes([a[0] * b[0], a[1] * b[0], a[0] * b[1], a[1] * b[1]])
}

/// Haar-ish random SU(2) times a random phase.
pub fn random_unitary2(r: &mut impl Rng) -> [[C64; 2]; 2] {
    let tau = std::f64::consts::TAU;
    let (th, b, g, a) = (r.gen::<f64>() * tau, r.gen::<f64>() * tau, r.gen::<f64>() * tau, r.gen::<f64>() * tau);
    let p = C64::from_polar(1.0, a);
    [
        [p * C64::from_polar(th.cos(), b), p * C64::from_polar(th.sin(), g)],
        [-p * C64::from_polar(th.sin(), -g), p * C64::from_polar(th.cos(), -b)],
    ]
}

pub fn random_local_unitary(r: &mut impl Rng) -> M4 {
    mul(&on_qubit(0, random_unitary2(r)), &on_qubit(1, random_unitary2(r)))
}
