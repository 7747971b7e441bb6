//! Input states: Haar-random two-qubit density matrices of fixed rank and a
//! few analytic families (Bell-diagonal, Werner).
//!
//! A rank-`k` state is the two-qubit marginal of a Haar-random pure state on
//! `C² ⊗ C² ⊗ C^k`. The environment factor is a qubit for rank 2, a qutrit for
//! rank 3 and two qubits (dimension 4) for rank 4. Each state draws from its
//! own ChaCha stream keyed by the master seed and selected by the state index,
//! so any subset of an ensemble can be regenerated independently.

use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, Pauli, tensor_product, ZERO};

/// Rank of a sampled two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Rank {
    One = 1,
    Two = 2,
    Three = 3,
    Four = 4,
}

impl Rank {
    pub const ALL: [Rank; 4] = [Rank::One, Rank::Two, Rank::Three, Rank::Four];

    pub fn value(self) -> usize {
        self as usize
    }

    /// Dimension of the purifying environment.
    pub fn environment_dim(self) -> usize {
        self.value()
    }

    /// Dimension of the sampled pure state (4, 8, 12 or 16).
    pub fn purified_dim(self) -> usize {
        4 * self.environment_dim()
    }
}

impl TryFrom<u8> for Rank {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Rank::One),
            2 => Ok(Rank::Two),
            3 => Ok(Rank::Three),
            4 => Ok(Rank::Four),
            _ => Err(Error::Config(format!("rank must be 1, 2, 3 or 4 (got {v})"))),
        }
    }
}

impl From<Rank> for u8 {
    fn from(r: Rank) -> u8 {
        r as u8
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// An ensemble of random states: `count` draws of a fixed rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomStateSpec {
    pub rank: Rank,
    pub count: usize,
    pub master_seed: u64,
}

impl RandomStateSpec {
    pub fn new(rank: Rank, count: usize, master_seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("ensemble count must be positive".into()));
        }
        Ok(Self {
            rank,
            count,
            master_seed,
        })
    }

    /// Generator for state `index`. Ranks get distinct keys so ensembles of
    /// different rank built from one master seed do not share draws.
    pub fn rng_for(&self, index: usize) -> ChaCha8Rng {
        let key = splitmix64(self.master_seed ^ (self.rank.value() as u64).wrapping_mul(0xA076_1D64_78BD_642F));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(index as u64);
        rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Normalized vector of i.i.d. complex Gaussian amplitudes `a + ib`,
/// `a, b ~ N(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianAmplitudeVector {
    amplitudes: Vec<Complex64>,
}

impl GaussianAmplitudeVector {
    pub fn sample<R: rand::Rng + ?Sized>(dimension: usize, rng: &mut R) -> Self {
        loop {
            let raw: Vec<Complex64> = (0..dimension)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    Complex64::new(re, im)
                })
                .collect();
            let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                return Self {
                    amplitudes: raw.into_iter().map(|z| z / norm).collect(),
                };
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Two-qubit marginal, treating the vector as `|ψ⟩ ∈ C⁴ ⊗ C^env` with the
    /// environment index running fastest.
    pub fn two_qubit_marginal(&self) -> Result<DensityMatrix> {
        let dim = self.dimension();
        if dim % 4 != 0 || dim == 0 {
            return Err(Error::Dimension(format!(
                "cannot split a {dim}-dimensional vector into two qubits and an environment"
            )));
        }
        let env = dim / 4;
        let psi = &self.amplitudes;
        let mut rho = ComplexMatrix::zeros(4);
        for i in 0..4 {
            for j in i..4 {
                let mut acc = ZERO;
                for k in 0..env {
                    acc += psi[i * env + k] * psi[j * env + k].conj();
                }
                rho[(i, j)] = acc;
                rho[(j, i)] = acc.conj();
            }
        }
        // the trace is one up to rounding; renormalize so the invariant holds tightly
        let tr = rho.trace().re;
        Ok(DensityMatrix::from_matrix_unchecked(rho.scale(1.0 / tr)))
    }
}

/// Deterministic draw of state `index` from the ensemble.
pub fn sample_state(spec: &RandomStateSpec, index: usize) -> Result<DensityMatrix> {
    if index >= spec.count {
        return Err(Error::Config(format!(
            "state index {index} outside ensemble of {}",
            spec.count
        )));
    }
    let mut rng = spec.rng_for(index);
    GaussianAmplitudeVector::sample(spec.rank.purified_dim(), &mut rng).two_qubit_marginal()
}

/// `¼ (I + Σ C_ii σ_i ⊗ σ_i)`.
pub fn bell_diagonal(cxx: f64, cyy: f64, czz: f64) -> Result<DensityMatrix> {
    for (name, v) in [("C_xx", cxx), ("C_yy", cyy), ("C_zz", czz)] {
        check_range(name, v, -1.0, 1.0)?;
    }
    let weights = bell_diagonal_weights(cxx, cyy, czz);
    if weights.iter().any(|&w| w < -crate::linalg::PSD_SLACK) {
        return Err(Error::InvalidCorrelators(cxx, cyy, czz));
    }
    Ok(bell_diagonal_unchecked(cxx, cyy, czz))
}

/// Bell-basis populations of a Bell-diagonal state, in the order
/// Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
pub fn bell_diagonal_weights(cxx: f64, cyy: f64, czz: f64) -> [f64; 4] {
    [
        0.25 * (1.0 + cxx - cyy + czz),
        0.25 * (1.0 - cxx + cyy + czz),
        0.25 * (1.0 + cxx + cyy - czz),
        0.25 * (1.0 - cxx - cyy - czz),
    ]
}

pub(crate) fn bell_diagonal_unchecked(cxx: f64, cyy: f64, czz: f64) -> DensityMatrix {
    let mut m = ComplexMatrix::identity(4);
    for (p, c) in [(Pauli::X, cxx), (Pauli::Y, cyy), (Pauli::Z, czz)] {
        let pm = p.matrix();
        m.add_scaled(c, &tensor_product(&pm, &pm));
    }
    DensityMatrix::from_matrix_unchecked(m.scale(0.25))
}

/// `w |Φ⁺⟩⟨Φ⁺| + (1 − w) I/4`.
pub fn werner(w: f64) -> Result<DensityMatrix> {
    check_range("w", w, 0.0, 1.0)?;
    let mut m = phi_plus().into_matrix().scale(w);
    m.add_scaled((1.0 - w) / 4.0, &ComplexMatrix::identity(4));
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn phi_plus() -> DensityMatrix {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    DensityMatrix::from_matrix_unchecked(ComplexMatrix::outer(&[s, ZERO, ZERO, s]))
}

/// `ρ_A ⊗ ρ_B`.
pub fn product_state(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked(tensor_product(rho_a.matrix(), rho_b.matrix()))
}
