//! Non-Markovian dephasing and depolarizing channels.
//!
//! Both channels are Pauli channels `ρ ↦ Σ_i w_i σ_i ρ σ_i` with weights that
//! depend on the noise strength `p` and the non-Markovianity `α`:
//!
//! | kind         | `w_I`               | `w_x = w_y`          | `w_z`                  |
//! |--------------|---------------------|----------------------|------------------------|
//! | dephasing    | `(1 − αp)(1 − p)`   | 0                    | `(1 + α(1 − p)) p`     |
//! | depolarizing | `(1 − 3αp)(1 − p)`  | `(1 + 3α(1 − p)) p/3`| same as `w_x`          |
//!
//! The weights are the squared Kraus prefactors. For depolarizing noise with
//! `3αp > 1` the identity weight turns negative; the map is then applied with
//! the signed weight. It stays trace- and Hermiticity-preserving but is no
//! longer completely positive, so outputs may fail to be positive.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, ONE, ZERO, I};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Dephasing,
    Depolarizing,
}

impl ChannelKind {
    /// Upper end of the admissible noise range.
    pub fn p_max(self) -> f64 {
        match self {
            ChannelKind::Dephasing => 0.5,
            ChannelKind::Depolarizing => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::Depolarizing => "depolarizing",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dephasing" | "dph" => Ok(ChannelKind::Dephasing),
            "depolarizing" | "dp" => Ok(ChannelKind::Depolarizing),
            other => Err(Error::Config(format!("unknown channel kind `{other}`"))),
        }
    }
}

/// Whether the noise acts on qubit A only or independently on both qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sides {
    Single,
    Double,
}

impl Sides {
    pub fn as_str(self) -> &'static str {
        match self {
            Sides::Single => "single",
            Sides::Double => "double",
        }
    }
}

impl fmt::Display for Sides {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sides {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Sides::Single),
            "double" => Ok(Sides::Double),
            other => Err(Error::Config(format!("unknown sidedness `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub kind: ChannelKind,
    pub alpha: f64,
    pub sides: Sides,
}

impl ChannelConfig {
    pub fn new(kind: ChannelKind, alpha: f64, sides: Sides) -> Result<Self> {
        check_range("alpha", alpha, 0.0, 1.0)?;
        Ok(Self { kind, alpha, sides })
    }

    pub fn validate(&self) -> Result<()> {
        check_range("alpha", self.alpha, 0.0, 1.0)
    }

    pub fn weights(&self, p: f64) -> Result<PauliChannelWeights> {
        channel_weights(self, p)
    }

    /// Applies the channel on the configured side(s).
    pub fn apply(&self, rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
        match self.sides {
            Sides::Single => apply_single_sided(rho, self, p),
            Sides::Double => apply_double_sided(rho, self, p),
        }
    }
}

/// Signed weights of the Pauli conjugations `I, σ_x, σ_y, σ_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliChannelWeights {
    pub w_i: f64,
    pub w_x: f64,
    pub w_y: f64,
    pub w_z: f64,
}

impl PauliChannelWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [self.w_i, self.w_x, self.w_y, self.w_z]
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }

    /// True when some weight is negative, i.e. the map is not completely positive.
    pub fn has_negative(&self) -> bool {
        self.as_array().iter().any(|&w| w < 0.0)
    }

    /// Scaling of the Bloch vector of the noisy qubit along (x, y, z).
    pub fn bloch_contraction(&self) -> [f64; 3] {
        let [i, x, y, z] = self.as_array();
        [i + x - y - z, i - x + y - z, i - x - y + z]
    }
}

pub fn channel_weights(cfg: &ChannelConfig, p: f64) -> Result<PauliChannelWeights> {
    cfg.validate()?;
    check_range("p", p, 0.0, cfg.kind.p_max())?;
    let a = cfg.alpha;
    Ok(match cfg.kind {
        ChannelKind::Dephasing => PauliChannelWeights {
            w_i: (1.0 - a * p) * (1.0 - p),
            w_x: 0.0,
            w_y: 0.0,
            w_z: (1.0 + a * (1.0 - p)) * p,
        },
        ChannelKind::Depolarizing => {
            let w = (1.0 + 3.0 * a * (1.0 - p)) * p / 3.0;
            PauliChannelWeights {
                w_i: (1.0 - 3.0 * a * p) * (1.0 - p),
                w_x: w,
                w_y: w,
                w_z: w,
            }
        }
    })
}

// A single-qubit Pauli as a signed permutation: row r has `phase[r]` in column `perm[r]`.
#[derive(Clone, Copy)]
struct SignedPermutation {
    perm: [usize; 2],
    phase: [Complex64; 2],
}

const PAULI_PERMS: [SignedPermutation; 4] = [
    SignedPermutation { perm: [0, 1], phase: [ONE, ONE] },
    SignedPermutation { perm: [1, 0], phase: [ONE, ONE] },
    SignedPermutation {
        perm: [1, 0],
        phase: [Complex64::new(0.0, -1.0), I],
    },
    SignedPermutation {
        perm: [0, 1],
        phase: [ONE, Complex64::new(-1.0, 0.0)],
    },
];

/// `acc += w (σ_a ⊗ σ_b) m (σ_a ⊗ σ_b)†` for Pauli indices `a`, `b`.
fn accumulate_pauli_conjugation(acc: &mut ComplexMatrix, m: &ComplexMatrix, a: usize, b: usize, w: f64) {
    let (pa, pb) = (PAULI_PERMS[a], PAULI_PERMS[b]);
    let mut perm = [0usize; 4];
    let mut phase = [ZERO; 4];
    for qa in 0..2 {
        for qb in 0..2 {
            let r = 2 * qa + qb;
            perm[r] = 2 * pa.perm[qa] + pb.perm[qb];
            phase[r] = pa.phase[qa] * pb.phase[qb];
        }
    }
    for r in 0..4 {
        for c in 0..4 {
            acc[(r, c)] += phase[r] * phase[c].conj() * m[(perm[r], perm[c])] * w;
        }
    }
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!("two-qubit state expected, got dimension {}", rho.dim())));
    }
    Ok(())
}

/// `Σ_i w_i (σ_i ⊗ I) ρ (σ_i ⊗ I)`: noise on qubit A.
pub fn apply_single_sided(rho: &DensityMatrix, cfg: &ChannelConfig, p: f64) -> Result<DensityMatrix> {
    check_two_qubit(rho)?;
    let w = channel_weights(cfg, p)?.as_array();
    let mut out = ComplexMatrix::zeros(4);
    for (i, &wi) in w.iter().enumerate() {
        if wi != 0.0 {
            accumulate_pauli_conjugation(&mut out, rho.matrix(), i, 0, wi);
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// `Σ_{i,j} w_i w_j (σ_i ⊗ σ_j) ρ (σ_i ⊗ σ_j)`: independent noise on both qubits.
pub fn apply_double_sided(rho: &DensityMatrix, cfg: &ChannelConfig, p: f64) -> Result<DensityMatrix> {
    check_two_qubit(rho)?;
    let w = channel_weights(cfg, p)?.as_array();
    let mut out = ComplexMatrix::zeros(4);
    for (i, &wi) in w.iter().enumerate() {
        for (j, &wj) in w.iter().enumerate() {
            let wij = wi * wj;
            if wij != 0.0 {
                accumulate_pauli_conjugation(&mut out, rho.matrix(), i, j, wij);
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, tensor_product, Pauli, Subsystem};
    use crate::states::{bell_diagonal, phi_plus, sample_state, Rank, RandomStateSpec};
    use approx::assert_abs_diff_eq;

    fn cfg(kind: ChannelKind, alpha: f64, sides: Sides) -> ChannelConfig {
        ChannelConfig::new(kind, alpha, sides).unwrap()
    }

    // Reference implementation with explicit matrix products.
    fn apply_by_matrices(rho: &DensityMatrix, c: &ChannelConfig, p: f64) -> ComplexMatrix {
        let w = channel_weights(c, p).unwrap().as_array();
        let paulis: Vec<_> = Pauli::ALL.iter().map(|p| p.matrix()).collect();
        let mut out = ComplexMatrix::zeros(4);
        for i in 0..4 {
            let js: Vec<usize> = match c.sides {
                Sides::Single => vec![0],
                Sides::Double => (0..4).collect(),
            };
            for j in js {
                let wij = match c.sides {
                    Sides::Single => w[i],
                    Sides::Double => w[i] * w[j],
                };
                let k = tensor_product(&paulis[i], &paulis[j]);
                out.add_scaled(wij, &rho.matrix().conjugated_by(&k));
            }
        }
        out
    }

    #[test]
    fn weight_examples() {
        let w = channel_weights(&cfg(ChannelKind::Dephasing, 0.0, Sides::Single), 0.3).unwrap();
        assert_abs_diff_eq!(w.w_i, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(w.w_z, 0.3, epsilon = 1e-15);

        let w = channel_weights(&cfg(ChannelKind::Dephasing, 0.9, Sides::Single), 0.5).unwrap();
        assert_abs_diff_eq!(w.w_i, 0.275, epsilon = 1e-15);
        assert_abs_diff_eq!(w.w_z, 0.725, epsilon = 1e-15);
        assert_abs_diff_eq!(w.sum(), 1.0, epsilon = 1e-15);

        let w = channel_weights(&cfg(ChannelKind::Depolarizing, 1.0, Sides::Single), 0.5).unwrap();
        assert_abs_diff_eq!(w.w_i, -0.25, epsilon = 1e-15);
        for x in [w.w_x, w.w_y, w.w_z] {
            assert_abs_diff_eq!(x, 5.0 / 12.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(w.sum(), 1.0, epsilon = 1e-15);
        assert!(w.has_negative());
    }

    #[test]
    fn weights_sum_to_one_everywhere() {
        for kind in [ChannelKind::Dephasing, ChannelKind::Depolarizing] {
            for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
                for k in 0..=200 {
                    let p = kind.p_max() * k as f64 / 200.0;
                    let w = channel_weights(&cfg(kind, alpha, Sides::Single), p).unwrap();
                    assert!((w.sum() - 1.0).abs() < 1e-12);
                    if kind == ChannelKind::Dephasing {
                        assert!(!w.has_negative());
                        assert_eq!((w.w_x, w.w_y), (0.0, 0.0));
                    } else {
                        assert!(w.w_x >= 0.0 && w.w_x == w.w_y && w.w_y == w.w_z);
                    }
                }
            }
        }
    }

    #[test]
    fn range_errors() {
        let c = cfg(ChannelKind::Dephasing, 0.5, Sides::Single);
        assert!(channel_weights(&c, 0.51).is_err());
        assert!(channel_weights(&c, -0.01).is_err());
        assert!(channel_weights(&c, f64::NAN).is_err());
        let c = cfg(ChannelKind::Depolarizing, 0.5, Sides::Single);
        assert!(channel_weights(&c, 1.0).is_ok());
        assert!(channel_weights(&c, 1.01).is_err());
        assert!(ChannelConfig::new(ChannelKind::Dephasing, 1.1, Sides::Single).is_err());
        assert!(apply_single_sided(&DensityMatrix::maximally_mixed(2), &c, 0.1).is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let spec = RandomStateSpec::new(Rank::Two, 5, 1).unwrap();
        for i in 0..5 {
            let rho = sample_state(&spec, i).unwrap();
            for kind in [ChannelKind::Dephasing, ChannelKind::Depolarizing] {
                for sides in [Sides::Single, Sides::Double] {
                    let out = cfg(kind, 0.7, sides).apply(&rho, 0.0).unwrap();
                    assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
                }
            }
        }
    }

    #[test]
    fn signed_permutation_matches_matrix_products() {
        let spec = RandomStateSpec::new(Rank::Three, 10, 5).unwrap();
        for i in 0..10 {
            let rho = sample_state(&spec, i).unwrap();
            for kind in [ChannelKind::Dephasing, ChannelKind::Depolarizing] {
                for sides in [Sides::Single, Sides::Double] {
                    let c = cfg(kind, 0.6, sides);
                    let p = 0.37 * kind.p_max();
                    let fast = c.apply(&rho, p).unwrap();
                    assert!(fast.matrix().max_abs_diff(&apply_by_matrices(&rho, &c, p)) < 1e-14);
                }
            }
        }
    }

    #[test]
    fn dephased_bell_diagonal_matches_closed_form() {
        // single-sided: coherences scale by (1 - 2p), diagonal untouched
        let (cyy, czz, p) = (0.4, -0.4, 0.17);
        let rho = bell_diagonal(1.0, cyy, czz).unwrap();
        let out = apply_single_sided(&rho, &cfg(ChannelKind::Dephasing, 0.0, Sides::Single), p).unwrap();
        let a = -0.25 * (1.0 - cyy) * (-1.0 + 2.0 * p);
        let b = -0.25 * (1.0 + cyy) * (-1.0 + 2.0 * p);
        let expected = ComplexMatrix::from_real_rows(&[
            &[(1.0 + czz) / 4.0, 0.0, 0.0, a],
            &[0.0, (1.0 - czz) / 4.0, b, 0.0],
            &[0.0, b, (1.0 - czz) / 4.0, 0.0],
            &[a, 0.0, 0.0, (1.0 + czz) / 4.0],
        ])
        .unwrap();
        assert!(out.matrix().max_abs_diff(&expected) < 1e-15);

        // double-sided: X' = X (1 - 2p)
        let out = apply_double_sided(&rho, &cfg(ChannelKind::Dephasing, 0.0, Sides::Double), p).unwrap();
        let s = 1.0 - 2.0 * p;
        let expected = ComplexMatrix::from_real_rows(&[
            &[(1.0 + czz) / 4.0, 0.0, 0.0, a * s],
            &[0.0, (1.0 - czz) / 4.0, b * s, 0.0],
            &[0.0, b * s, (1.0 - czz) / 4.0, 0.0],
            &[a * s, 0.0, 0.0, (1.0 + czz) / 4.0],
        ])
        .unwrap();
        assert!(out.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn full_depolarization_of_bell_state() {
        let out = apply_single_sided(&phi_plus(), &cfg(ChannelKind::Depolarizing, 0.0, Sides::Single), 0.75).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-10);
    }

    #[test]
    fn double_sided_is_two_single_sided_applications() {
        let spec = RandomStateSpec::new(Rank::Four, 20, 8).unwrap();
        for i in 0..20 {
            let rho = sample_state(&spec, i).unwrap();
            for kind in [ChannelKind::Dephasing, ChannelKind::Depolarizing] {
                let c = cfg(kind, 0.8, Sides::Single);
                let p = 0.41 * kind.p_max();
                let on_a = apply_single_sided(&rho, &c, p).unwrap();
                // noise on B: swap qubits, act on A, swap back
                let swapped = swap_qubits(on_a.matrix());
                let both = apply_single_sided(&DensityMatrix::from_matrix_unchecked(swapped), &c, p).unwrap();
                let sequential = swap_qubits(both.matrix());
                let direct = apply_double_sided(&rho, &c, p).unwrap();
                assert!(direct.matrix().max_abs_diff(&sequential) < 1e-12);
            }
        }
    }

    fn swap_qubits(m: &ComplexMatrix) -> ComplexMatrix {
        let idx = |r: usize| (r % 2) * 2 + r / 2;
        let mut out = ComplexMatrix::zeros(4);
        for r in 0..4 {
            for c in 0..4 {
                out[(idx(r), idx(c))] = m[(r, c)];
            }
        }
        out
    }

    #[test]
    fn dephasing_keeps_diagonal() {
        let spec = RandomStateSpec::new(Rank::Two, 10, 2).unwrap();
        for i in 0..10 {
            let rho = sample_state(&spec, i).unwrap();
            for sides in [Sides::Single, Sides::Double] {
                let out = cfg(ChannelKind::Dephasing, 0.9, sides).apply(&rho, 0.33).unwrap();
                for d in 0..4 {
                    assert_abs_diff_eq!(out.matrix()[(d, d)].re, rho.matrix()[(d, d)].re, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn markovian_depolarizing_fully_randomizes_at_three_quarters() {
        // with these weights the Bloch contraction 1 - 4p/3 vanishes at p = 3/4, not p = 1
        let spec = RandomStateSpec::new(Rank::One, 10, 4).unwrap();
        let single = cfg(ChannelKind::Depolarizing, 0.0, Sides::Single);
        let double = cfg(ChannelKind::Depolarizing, 0.0, Sides::Double);
        for i in 0..10 {
            let rho = sample_state(&spec, i).unwrap();
            let out = apply_single_sided(&rho, &single, 0.75).unwrap();
            let expected = tensor_product(
                &ComplexMatrix::identity(2).scale(0.5),
                partial_trace(&rho, Subsystem::A).matrix(),
            );
            assert!(out.matrix().max_abs_diff(&expected) < 1e-12);
            let out = apply_double_sided(&rho, &double, 0.75).unwrap();
            assert!(out.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-12);

            // at p = 1 the Bloch vector is inverted and shrunk to a third
            let [x, y, z] = channel_weights(&single, 1.0).unwrap().bloch_contraction();
            for c in [x, y, z] {
                assert_abs_diff_eq!(c, -1.0 / 3.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn bloch_contraction_of_dephasing() {
        let w = channel_weights(&cfg(ChannelKind::Dephasing, 0.0, Sides::Single), 0.2).unwrap();
        let [x, y, z] = w.bloch_contraction();
        assert_abs_diff_eq!(x, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(y, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(z, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn parsing() {
        assert_eq!("Dephasing".parse::<ChannelKind>().unwrap(), ChannelKind::Dephasing);
        assert_eq!("double".parse::<Sides>().unwrap(), Sides::Double);
        assert!("amplitude".parse::<ChannelKind>().is_err());
    }
}
