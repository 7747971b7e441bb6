//! Quantum-correlation measures for two-qubit states.
//!
//! Entanglement is quantified by the logarithmic negativity of the partial
//! transpose on A. Quantum discord is the mutual information minus the
//! largest classical correlation obtainable with a rank-one projective
//! measurement on qubit B. The measurement axis is optimized with a coarse
//! `(θ, φ)` scan of the Bloch sphere followed by Nelder–Mead refinement from
//! the best scan points.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    binary_entropy, hermitian_eigenvalues_unchecked, partial_trace, partial_transpose, tensor_product,
    von_neumann_entropy, ComplexMatrix, DensityMatrix, Pauli, Subsystem,
};

/// Correlation measure evaluated along a noise sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    /// Logarithmic negativity, in ebits.
    #[serde(rename = "LN")]
    LogNegativity,
    /// Quantum discord with measurement on B, in bits.
    #[serde(rename = "QD")]
    Discord,
}

impl Measure {
    pub const ALL: [Measure; 2] = [Measure::LogNegativity, Measure::Discord];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::LogNegativity => "LN",
            Measure::Discord => "QD",
        }
    }

    pub fn evaluate(self, rho: &DensityMatrix, opt: &OptimizerSettings) -> f64 {
        match self {
            Measure::LogNegativity => log_negativity(rho),
            Measure::Discord => quantum_discord(rho, opt).discord,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LN" | "E" => Ok(Measure::LogNegativity),
            "QD" | "D" => Ok(Measure::Discord),
            other => Err(Error::Config(format!("unknown measure `{other}` (expected LN or QD)"))),
        }
    }
}

/// Sum of the magnitudes of the negative eigenvalues of `ρ^{T_A}`.
pub fn negativity(rho: &DensityMatrix) -> f64 {
    let pt = partial_transpose(rho.matrix(), Subsystem::A);
    hermitian_eigenvalues_unchecked(&pt)
        .into_iter()
        .filter(|&x| x < 0.0)
        .map(f64::abs)
        .sum()
}

/// `log₂(2N + 1)`.
pub fn log_negativity(rho: &DensityMatrix) -> f64 {
    (2.0 * negativity(rho) + 1.0).log2()
}

/// `S(ρ_A) + S(ρ_B) − S(ρ_AB)`.
pub fn mutual_information(rho: &DensityMatrix) -> f64 {
    let s_a = von_neumann_entropy(&partial_trace(rho, Subsystem::B));
    let s_b = von_neumann_entropy(&partial_trace(rho, Subsystem::A));
    s_a + s_b - von_neumann_entropy(rho)
}

/// Axis of a rank-one projective qubit measurement, in Bloch angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementBasis {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::Config(format!(
                "measurement angles (θ={theta}, φ={phi}) outside [0, π] × [0, 2π)"
            )));
        }
        Ok(Self { theta, phi })
    }

    /// Canonical angles for an arbitrary `(θ, φ)` pair.
    pub fn from_any_angles(theta: f64, phi: f64) -> Self {
        Self::from_axis(axis(theta, phi))
    }

    pub fn from_axis(n: [f64; 3]) -> Self {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let theta = (n[2] / norm).clamp(-1.0, 1.0).acos();
        let mut phi = n[1].atan2(n[0]);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    pub fn axis(&self) -> [f64; 3] {
        axis(self.theta, self.phi)
    }

    /// `Π₀ = (I + n·σ)/2`, `Π₁ = (I − n·σ)/2`.
    pub fn projectors(&self) -> [ComplexMatrix; 2] {
        let n = self.axis();
        let mut n_sigma = ComplexMatrix::zeros(2);
        for (p, c) in [(Pauli::X, n[0]), (Pauli::Y, n[1]), (Pauli::Z, n[2])] {
            n_sigma.add_scaled(c, &p.matrix());
        }
        let id = ComplexMatrix::identity(2);
        [(&id + &n_sigma).scale(0.5), (&id - &n_sigma).scale(0.5)]
    }
}

fn axis(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Measurement outcomes with probability below this contribute nothing.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-12;

/// `Σ_k p_k S(ρ_{A|k})` after measuring B along `basis`.
pub fn conditional_entropy_measured(rho: &DensityMatrix, basis: &MeasurementBasis) -> f64 {
    let id = ComplexMatrix::identity(2);
    basis
        .projectors()
        .iter()
        .map(|proj| {
            let lifted = tensor_product(&id, proj);
            let branch = &(&lifted * rho.matrix()) * &lifted;
            let p = branch.trace().re;
            if p < MIN_BRANCH_PROBABILITY {
                return 0.0;
            }
            let cond = partial_trace(&DensityMatrix::from_matrix_unchecked(branch.scale(1.0 / p)), Subsystem::B);
            p * von_neumann_entropy(&cond)
        })
        .sum()
}

/// Pauli expansion `ρ = ¼ (I + a·σ ⊗ I + I ⊗ b·σ + Σ T_ij σ_i ⊗ σ_j)`.
///
/// Measuring B along `n` leaves A in the state with Bloch vector
/// `(a ± T n) / (1 ± b·n)`, obtained with probability `(1 ± b·n)/2`, which
/// makes the conditional entropy a few dozen flops per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochForm {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub t: [[f64; 3]; 3],
}

impl BlochForm {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let paulis: Vec<ComplexMatrix> = Pauli::ALL.iter().map(|p| p.matrix()).collect();
        let coeff = |i: usize, j: usize| m.trace_product(&tensor_product(&paulis[i], &paulis[j])).re;
        let mut form = BlochForm {
            a: [0.0; 3],
            b: [0.0; 3],
            t: [[0.0; 3]; 3],
        };
        for i in 0..3 {
            form.a[i] = coeff(i + 1, 0);
            form.b[i] = coeff(0, i + 1);
            for j in 0..3 {
                form.t[i][j] = coeff(i + 1, j + 1);
            }
        }
        form
    }

    pub fn conditional_entropy(&self, n: [f64; 3]) -> f64 {
        let bn = self.b[0] * n[0] + self.b[1] * n[1] + self.b[2] * n[2];
        let mut tn = [0.0; 3];
        for (i, row) in self.t.iter().enumerate() {
            tn[i] = row[0] * n[0] + row[1] * n[1] + row[2] * n[2];
        }
        let mut total = 0.0;
        for sign in [1.0, -1.0] {
            let weight = 1.0 + sign * bn;
            let p = 0.5 * weight;
            if p < MIN_BRANCH_PROBABILITY {
                continue;
            }
            let v = [self.a[0] + sign * tn[0], self.a[1] + sign * tn[1], self.a[2] + sign * tn[2]];
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() / weight;
            total += p * binary_entropy(0.5 * (1.0 + r));
        }
        total
    }
}

/// Settings of the measurement-axis search used by [`quantum_discord`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    /// Polar grid points over `[0, π]`, poles included.
    pub theta_points: usize,
    /// Azimuthal grid points over `[0, 2π)`.
    pub phi_points: usize,
    /// Number of best grid points refined with Nelder–Mead.
    pub refine_starts: usize,
    /// Convergence tolerance on the conditional entropy, in bits.
    pub tolerance: f64,
    /// Iteration cap for each refinement.
    pub max_iterations: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            theta_points: 30,
            phi_points: 60,
            refine_starts: 3,
            tolerance: 1e-6,
            max_iterations: 200,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.theta_points < 2 || self.phi_points < 1 {
            return Err(Error::Config("optimizer grid needs θ ≥ 2 and φ ≥ 1 points".into()));
        }
        if self.refine_starts == 0 {
            return Err(Error::Config("optimizer needs at least one refinement start".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("optimizer tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscordResult {
    pub discord: f64,
    pub mutual_information: f64,
    pub classical_correlation: f64,
    pub optimal_basis: MeasurementBasis,
}

/// Quantum discord `I(ρ) − max_Π J(ρ)` with projective measurements on B.
///
/// Builds a [`DiscordOptimizer`] on every call; sweeps that evaluate many
/// states should build one optimizer and reuse it.
pub fn quantum_discord(rho: &DensityMatrix, opt: &OptimizerSettings) -> DiscordResult {
    DiscordOptimizer::new(*opt).discord(rho)
}

/// Measurement-axis search with the scan grid precomputed.
///
/// The scan covers the `θ × φ` grid of the settings. Since the axes `n` and
/// `−n` define the same measurement, grid points whose antipode is also on
/// the grid are evaluated once.
#[derive(Debug, Clone)]
pub struct DiscordOptimizer {
    settings: OptimizerSettings,
    scan: Vec<([f64; 3], [f64; 2])>,
    step: [f64; 2],
}

impl DiscordOptimizer {
    pub fn new(settings: OptimizerSettings) -> Self {
        let nt = settings.theta_points.max(2);
        let np = settings.phi_points.max(1);
        let d_theta = PI / (nt - 1) as f64;
        let d_phi = 2.0 * PI / np as f64;
        let even_phi = np % 2 == 0;
        let mut scan = Vec::with_capacity(nt * np);
        for i in 0..nt {
            let mirrored = 2 * i > nt - 1;
            let equator = 2 * i == nt - 1;
            if i == nt - 1 || (mirrored && even_phi) {
                continue;
            }
            let phis = if i == 0 {
                1
            } else if equator && even_phi {
                np / 2
            } else {
                np
            };
            let theta = i as f64 * d_theta;
            for j in 0..phis {
                let x = [theta, j as f64 * d_phi];
                scan.push((axis(x[0], x[1]), x));
            }
        }
        Self {
            settings,
            scan,
            step: [0.5 * d_theta, 0.5 * d_phi],
        }
    }

    pub fn settings(&self) -> &OptimizerSettings {
        &self.settings
    }

    /// Number of axes evaluated by the coarse scan.
    pub fn scan_len(&self) -> usize {
        self.scan.len()
    }

    pub fn discord(&self, rho: &DensityMatrix) -> DiscordResult {
        let s_a = von_neumann_entropy(&partial_trace(rho, Subsystem::B));
        let s_b = von_neumann_entropy(&partial_trace(rho, Subsystem::A));
        let s_ab = von_neumann_entropy(rho);
        let mutual_information = s_a + s_b - s_ab;

        let form = BlochForm::from_state(rho);
        let (min_cond, optimal_basis) = self.minimize_conditional_entropy(&form);
        let classical_correlation = s_a - min_cond;
        DiscordResult {
            discord: mutual_information - classical_correlation,
            mutual_information,
            classical_correlation,
            optimal_basis,
        }
    }

    /// Smallest measured conditional entropy and the axis attaining it.
    pub fn minimize_conditional_entropy(&self, form: &BlochForm) -> (f64, MeasurementBasis) {
        let starts = self.settings.refine_starts.clamp(1, self.scan.len());
        // keep the `starts` lowest scan values; ties resolved by scan order
        let mut best: Vec<(f64, [f64; 2])> = Vec::with_capacity(starts + 1);
        for &(n, x) in &self.scan {
            let v = form.conditional_entropy(n);
            if best.len() < starts || v < best[best.len() - 1].0 {
                let pos = best.partition_point(|b| b.0 <= v);
                best.insert(pos, (v, x));
                best.truncate(starts);
            }
        }

        let f = |x: [f64; 2]| form.conditional_entropy(axis(x[0], x[1]));
        let mut winner = best[0];
        for &(fx, x) in &best {
            let refined = nelder_mead(&f, x, fx, self.step, self.settings.tolerance, self.settings.max_iterations);
            if refined.0 < winner.0 {
                winner = refined;
            }
        }
        (winner.0, MeasurementBasis::from_any_angles(winner.1[0], winner.1[1]))
    }
}

/// Two-dimensional Nelder–Mead minimization with the standard coefficients.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(
    f: &F,
    x0: [f64; 2],
    f0: f64,
    step: [f64; 2],
    tol: f64,
    max_iter: usize,
) -> (f64, [f64; 2]) {
    let mut simplex = [
        (f0, x0),
        (0.0, [x0[0] + step[0], x0[1]]),
        (0.0, [x0[0], x0[1] + step[1]]),
    ];
    for v in simplex.iter_mut().skip(1) {
        v.0 = f(v.1);
    }
    let size_tol = tol.sqrt();
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let spread = simplex[2].0 - simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|v| (v.1[0] - simplex[0].1[0]).abs().max((v.1[1] - simplex[0].1[1]).abs()))
            .fold(0.0, f64::max);
        if spread < tol && diameter < size_tol {
            break;
        }
        let centroid = lerp(simplex[0].1, simplex[1].1, 0.5);
        let worst = simplex[2];
        let reflected = lerp(centroid, worst.1, -1.0);
        let fr = f(reflected);
        if fr < simplex[0].0 {
            let expanded = lerp(centroid, worst.1, -2.0);
            let fe = f(expanded);
            simplex[2] = if fe < fr { (fe, expanded) } else { (fr, reflected) };
        } else if fr < simplex[1].0 {
            simplex[2] = (fr, reflected);
        } else {
            let (target, ft) = if fr < worst.0 { (reflected, fr) } else { (worst.1, worst.0) };
            let contracted = lerp(centroid, target, 0.5);
            let fc = f(contracted);
            if fc < ft {
                simplex[2] = (fc, contracted);
            } else {
                let best = simplex[0].1;
                for v in simplex.iter_mut().skip(1) {
                    v.1 = lerp(best, v.1, 0.5);
                    v.0 = f(v.1);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    simplex[0]
}
