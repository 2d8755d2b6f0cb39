//! The unitary-family construction behind the non-overlap argument.
//!
//! Given `|φ⟩ = |a_0⟩` and `|ψ⟩ = α|a_0⟩ + β|a_1⟩` in dimension `N + 1`, we
//! build unitaries `U[m]` that fix `|a_0⟩` and send `|a_1⟩` to `|b[m]⟩`,
//! together with a measurement basis `{|d_n⟩}`, such that for every outcome
//! `n` either `⟨d_n|a_0⟩ = 0` or `⟨d_n|c[n]⟩ = 0` where `|c[m]⟩ = U[m]|ψ⟩`.
//!
//! Coordinates are those of the `d` basis (the standard basis). In them
//!
//! ```text
//! a_0  = (0, 1, …, 1, 0, …, 0) / √M                (M ones)
//! c[m] = γ e_0 + x Σ_{k=1..M, k≠m} e_k,   x = α√M / (M − 1)
//! γ²   = β² − α² / (M − 1)
//! ```
//!
//! for `m = 1..M`, with `U[m] = U[1]` for the remaining indices. `M` is the
//! smallest integer with `M ≥ 1/β²`, which is exactly what makes `γ²`
//! non-negative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{complete_to_unitary, CMatrix, CVector, NumericsError, Tolerances};
use crate::scenario::{Measurement, QuantumScenario, ScenarioError};
use num_complex::Complex64;

/// Distance from an integer below which `1/β²` is treated as that integer.
pub const INTEGER_GUARD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("β = {beta} is outside (0, 1]")]
    OutOfRange { beta: f64 },
    #[error("amplitudes α = {alpha}, β = {beta} are not a valid real pair")]
    InvalidAmplitudes { alpha: f64, beta: f64 },
    #[error("M = {m} exceeds N = {n}; the smallest workable N is {minimal_n}")]
    Infeasible { m: usize, n: usize, minimal_n: usize },
    #[error("outcome {n} satisfies neither disjunct (|⟨d|a0⟩| = {a0_overlap:e}, |⟨d|c⟩| = {c_overlap:e})")]
    ConditionViolated { n: usize, a0_overlap: f64, c_overlap: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("U[{m}] does not fix the given |φ⟩")]
    PhiNotFixed { m: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

pub type Result<T> = std::result::Result<T, ConstructionError>;

/// `⌈1/β²⌉`, snapping to an integer within [`INTEGER_GUARD`].
pub fn smallest_m(beta: f64) -> Result<usize> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(ConstructionError::OutOfRange { beta });
    }
    let target = 1.0 / (beta * beta);
    let nearest = target.round();
    let m = if (target - nearest).abs() <= INTEGER_GUARD {
        nearest
    } else {
        target.ceil()
    };
    Ok(m as usize)
}

/// Largest `|⟨φ|ψ⟩|²` for which the construction fits in dimension `N + 1`,
/// from `M ≤ N`: `(N − 1)/N`.
pub fn feasible_overlap_bound(n: usize) -> f64 {
    assert!(n >= 1, "N must be at least 1");
    (n as f64 - 1.0) / n as f64
}

/// Full construction bundle. Serializes to JSON with the same vector and
/// matrix encoding as scenario files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyConstruction {
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub gamma: f64,
    pub delta: f64,
    pub a0: CVector,
    pub a1: CVector,
    pub psi: CVector,
    pub d_basis: Vec<CVector>,
    pub b: Vec<CVector>,
    pub b_bar: Vec<CVector>,
    pub c: Vec<CVector>,
    #[serde(rename = "U")]
    pub u: Vec<CMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "holds")]
pub enum Disjunct {
    /// `⟨d_n|a_0⟩ = 0`.
    First { a0_overlap: f64 },
    /// `⟨d_n|c[n]⟩ = 0`.
    Second { c_overlap: f64 },
    Both { a0_overlap: f64, c_overlap: f64 },
}

impl Disjunct {
    pub fn first_holds(&self) -> bool {
        matches!(self, Disjunct::First { .. } | Disjunct::Both { .. })
    }

    pub fn second_holds(&self) -> bool {
        matches!(self, Disjunct::Second { .. } | Disjunct::Both { .. })
    }
}

/// Which side of the either-or condition holds for each outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCertificate {
    pub per_n: Vec<Disjunct>,
    pub overlap_sq: f64,
    pub feasible_overlap_bound: f64,
    pub bound_note: String,
}

/// Largest deviations from each construction invariant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionAudit {
    pub unitarity: f64,
    pub a0_fixed: f64,
    pub a0_b_overlap: f64,
    pub b_norm: f64,
    pub c_consistency: f64,
    pub c_from_unitary: f64,
}

impl ConstructionAudit {
    pub fn worst(&self) -> f64 {
        [
            self.unitarity,
            self.a0_fixed,
            self.a0_b_overlap,
            self.b_norm,
            self.c_consistency,
            self.c_from_unitary,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Builds the construction for `|ψ⟩ = α|a_0⟩ + β|a_1⟩` in dimension `N + 1`.
pub fn build_construction(alpha: f64, beta: f64, n: usize, tol: &Tolerances) -> Result<HardyConstruction> {
    if !(alpha >= 0.0) || !(beta > 0.0) || (alpha * alpha + beta * beta - 1.0).abs() > tol.norm {
        return Err(ConstructionError::InvalidAmplitudes { alpha, beta });
    }
    let m = smallest_m(beta)?;
    if m > n {
        return Err(ConstructionError::Infeasible { m, n, minimal_n: m });
    }
    let dim = n + 1;

    let mut a0 = CVector::zeros(dim);
    for k in 1..=m {
        a0[k] = real(1.0 / (m as f64).sqrt());
    }

    let (gamma, b_core, b_bar_core, c_core) = if m == 1 {
        // Orthogonal pair: |b⟩ = |d_0⟩ already separates the two states.
        let b = CVector::basis(dim, 0);
        let c = &a0.scale(real(alpha)) + &b.scale(real(beta));
        (beta, vec![b], vec![CVector::zeros(dim)], vec![c])
    } else {
        let mf = m as f64;
        let x = alpha * mf.sqrt() / (mf - 1.0);
        let gamma_sq = beta * beta - alpha * alpha / (mf - 1.0);
        let gamma = gamma_sq.max(0.0).sqrt();
        let mut bs = Vec::with_capacity(m);
        let mut bars = Vec::with_capacity(m);
        let mut cs = Vec::with_capacity(m);
        for hole in 1..=m {
            let mut c = CVector::zeros(dim);
            c[0] = real(gamma);
            for k in (1..=m).filter(|&k| k != hole) {
                c[k] = real(x);
            }
            let b = (&c - &a0.scale(real(alpha))).scale(real(1.0 / beta));
            let bar = if alpha > 0.0 {
                let mut residual = c.clone();
                residual[0] = real(0.0);
                (&residual.scale(real(1.0 / alpha)) - &a0).scale(real((mf - 1.0).sqrt()))
            } else {
                CVector::zeros(dim)
            };
            bs.push(b);
            bars.push(bar);
            cs.push(c);
        }
        (gamma, bs, bars, cs)
    };

    // Index m of the family: 1..=M use their own vectors, everything else reuses index 1.
    let pick = |k: usize| if (1..=m).contains(&k) { k - 1 } else { 0 };
    let b: Vec<CVector> = (0..dim).map(|k| b_core[pick(k)].clone()).collect();
    let b_bar: Vec<CVector> = (0..dim).map(|k| b_bar_core[pick(k)].clone()).collect();
    let c: Vec<CVector> = (0..dim).map(|k| c_core[pick(k)].clone()).collect();

    let a_basis = complete_to_unitary(dim, &[(0, a0.clone())], tol)?;
    let a1 = a_basis.column(1);
    let a_adj = a_basis.adjoint();
    let mut unitaries_core = Vec::with_capacity(b_core.len());
    for bm in &b_core {
        let target = complete_to_unitary(dim, &[(0, a0.clone()), (1, bm.clone())], tol)?;
        unitaries_core.push(&target * &a_adj);
    }
    let u: Vec<CMatrix> = (0..dim).map(|k| unitaries_core[pick(k)].clone()).collect();
    let psi = &a0.scale(real(alpha)) + &a1.scale(real(beta));

    let construction = HardyConstruction {
        alpha,
        beta,
        n,
        m,
        gamma,
        delta: gamma / beta,
        a0,
        a1,
        psi,
        d_basis: (0..dim).map(|k| CVector::basis(dim, k)).collect(),
        b,
        b_bar,
        c,
        u,
    };
    verify_condition(&construction, tol)?;
    Ok(construction)
}

/// Records, for every outcome `n`, which disjunct of the either-or condition
/// holds, using `U[n]|ψ⟩` recomputed from the stored matrices.
pub fn verify_condition(construction: &HardyConstruction, tol: &Tolerances) -> Result<ConditionCertificate> {
    let dim = construction.n + 1;
    if construction.d_basis.len() != dim || construction.u.len() != dim {
        return Err(ConstructionError::DimensionMismatch {
            expected: dim,
            found: construction.d_basis.len().min(construction.u.len()),
        });
    }
    let mut per_n = Vec::with_capacity(dim);
    for (n, d) in construction.d_basis.iter().enumerate() {
        let c_n = construction.u[n].mul_vec(&construction.psi)?;
        let a0_overlap = d.inner(&construction.a0).norm();
        let c_overlap = d.inner(&c_n).norm();
        let first = a0_overlap * a0_overlap <= tol.zero;
        let second = c_overlap * c_overlap <= tol.zero;
        per_n.push(match (first, second) {
            (true, true) => Disjunct::Both { a0_overlap, c_overlap },
            (true, false) => Disjunct::First { a0_overlap },
            (false, true) => Disjunct::Second { c_overlap },
            (false, false) => {
                return Err(ConstructionError::ConditionViolated { n, a0_overlap, c_overlap })
            }
        });
    }
    let bound = feasible_overlap_bound(construction.n);
    Ok(ConditionCertificate {
        per_n,
        overlap_sq: construction.alpha * construction.alpha,
        feasible_overlap_bound: bound,
        bound_note: format!(
            "construction requires M <= N, i.e. |<phi|psi>|^2 <= {bound}; \
             pairs with larger overlap need a larger dimension"
        ),
    })
}

impl HardyConstruction {
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// Largest deviations from every stored invariant.
    pub fn audit(&self) -> ConstructionAudit {
        let mut audit = ConstructionAudit {
            unitarity: 0.0,
            a0_fixed: 0.0,
            a0_b_overlap: 0.0,
            b_norm: 0.0,
            c_consistency: 0.0,
            c_from_unitary: 0.0,
        };
        for k in 0..self.dim() {
            let u = &self.u[k];
            audit.unitarity = audit.unitarity.max(u.unitarity_deviation());
            let fixed = u.mul_vec(&self.a0).expect("dimensions checked at build");
            audit.a0_fixed = audit.a0_fixed.max(fixed.max_abs_diff(&self.a0));
            audit.a0_b_overlap = audit.a0_b_overlap.max(self.a0.inner(&self.b[k]).norm());
            audit.b_norm = audit.b_norm.max((self.b[k].norm() - 1.0).abs());
            let expected = &self.a0.scale(real(self.alpha)) + &self.b[k].scale(real(self.beta));
            audit.c_consistency = audit.c_consistency.max(expected.max_abs_diff(&self.c[k]));
            let evolved = u.mul_vec(&self.psi).expect("dimensions checked at build");
            audit.c_from_unitary = audit.c_from_unitary.max(evolved.max_abs_diff(&self.c[k]));
        }
        audit
    }

    /// The same construction in coordinates rotated by the unitary `r`:
    /// every vector `v ↦ r v`, every matrix `U ↦ r U r†`.
    pub fn rotated(&self, r: &CMatrix) -> Result<HardyConstruction> {
        let v = |x: &CVector| r.mul_vec(x);
        let vs = |xs: &[CVector]| xs.iter().map(|x| r.mul_vec(x)).collect::<std::result::Result<Vec<_>, _>>();
        let r_adj = r.adjoint();
        Ok(HardyConstruction {
            a0: v(&self.a0)?,
            a1: v(&self.a1)?,
            psi: v(&self.psi)?,
            d_basis: vs(&self.d_basis)?,
            b: vs(&self.b)?,
            b_bar: vs(&self.b_bar)?,
            c: vs(&self.c)?,
            u: self.u.iter().map(|u| &(r * u) * &r_adj).collect(),
            ..self.clone()
        })
    }

    /// Construction for an arbitrary pair of distinct states of one system:
    /// `|a_0⟩ = |φ⟩` and `|a_1⟩` the normalized part of `|ψ⟩` orthogonal to
    /// it, with the phase of `⟨φ|ψ⟩` absorbed into `|ψ⟩`. The stored `psi`
    /// is the phase-adjusted state.
    pub fn for_pair(phi: &CVector, psi: &CVector, tol: &Tolerances) -> Result<HardyConstruction> {
        if phi.dim() != psi.dim() {
            return Err(ConstructionError::DimensionMismatch { expected: phi.dim(), found: psi.dim() });
        }
        phi.check_normalized(tol.norm)?;
        psi.check_normalized(tol.norm)?;
        let overlap = phi.inner(psi);
        let alpha = overlap.norm();
        let psi_adj = if alpha > 0.0 { psi.scale(overlap.conj() / alpha) } else { psi.clone() };
        let perp = &psi_adj - &phi.scale(real(alpha));
        let beta = perp.norm();
        if beta * beta <= tol.zero {
            return Err(ConstructionError::OutOfRange { beta });
        }
        let a1 = perp.scale(real(1.0 / beta));
        // Renormalize the amplitudes so α² + β² = 1 holds to rounding.
        let scale = (alpha * alpha + beta * beta).sqrt();
        let (alpha, beta) = (alpha / scale, beta / scale);
        let std = build_construction(alpha, beta, phi.dim() - 1, tol)?;
        let dim = phi.dim();
        let to = complete_to_unitary(dim, &[(0, phi.clone()), (1, a1)], tol)?;
        let from = complete_to_unitary(dim, &[(0, std.a0.clone()), (1, std.a1.clone())], tol)?;
        let rotated = std.rotated(&(&to * &from.adjoint()))?;
        verify_condition(&rotated, tol)?;
        Ok(rotated)
    }

    /// Scenario with preparations `phi` (= `a_0`) and `psi`, the family `U`
    /// with members `m=0..m=N`, and the measurement `D` with outcomes
    /// `D0..DN` onto the `d` basis.
    pub fn to_scenario(&self, tol: &Tolerances) -> Result<QuantumScenario> {
        Ok(QuantumScenario::builder(self.dim())
            .preparation("phi", self.a0.clone())
            .preparation("psi", self.psi.clone())
            .family("U", self.u.iter().enumerate().map(|(k, u)| (member_id(k), u.clone())))
            .measurement(
                "D",
                Measurement::new((0..self.dim()).map(outcome_label).collect(), self.d_basis.clone()),
            )
            .build(tol)?)
    }
}

pub fn member_id(k: usize) -> String {
    format!("m={k}")
}

pub fn outcome_label(k: usize) -> String {
    format!("D{k}")
}

/// The restricted variant: first `W` (taking `|φ⟩` to `|0⟩`), then
/// `Ũ[m] = W U[m] W†`, then `W†`, then the `d` measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedProtocol {
    pub phi: CVector,
    pub zero_state: CVector,
    #[serde(rename = "W")]
    pub w: CMatrix,
    #[serde(rename = "U_tilde")]
    pub u_tilde: Vec<CMatrix>,
}

impl RestrictedProtocol {
    /// `W† Ũ[m] W`.
    pub fn composite(&self, m: usize) -> CMatrix {
        &(&self.w.adjoint() * &self.u_tilde[m]) * &self.w
    }

    /// `W† Ũ[m]`, the part of the protocol after the intermediate time.
    pub fn tail(&self, m: usize) -> CMatrix {
        &self.w.adjoint() * &self.u_tilde[m]
    }

    /// Max entrywise `|W†Ũ[m]W − U[m]|` over all `m`.
    pub fn composite_deviation(&self, construction: &HardyConstruction) -> f64 {
        (0..self.u_tilde.len())
            .map(|m| self.composite(m).max_abs_diff(&construction.u[m]))
            .fold(0.0, f64::max)
    }

    /// Max `‖Ũ[m]|0⟩ − |0⟩‖_∞` over all `m`.
    pub fn zero_state_deviation(&self) -> f64 {
        self.u_tilde
            .iter()
            .map(|u| u.mul_vec(&self.zero_state).expect("square").max_abs_diff(&self.zero_state))
            .fold(0.0, f64::max)
    }

    /// Scenario for the protocol: preparations `phi`, `psi` (initial time)
    /// and `zero` (intermediate time); family `protocol` with the full
    /// composites `m=k`; family `tail` with `~m=k = W†Ũ[k]` acting from the
    /// intermediate time; measurement `D` as in the construction.
    pub fn to_scenario(&self, construction: &HardyConstruction, tol: &Tolerances) -> Result<QuantumScenario> {
        let dim = construction.dim();
        Ok(QuantumScenario::builder(dim)
            .preparation("phi", self.phi.clone())
            .preparation("psi", construction.psi.clone())
            .preparation("zero", self.zero_state.clone())
            .family("protocol", (0..dim).map(|k| (member_id(k), self.composite(k))))
            .family("tail", (0..dim).map(|k| (format!("~{}", member_id(k)), self.tail(k))))
            .measurement(
                "D",
                Measurement::new((0..dim).map(outcome_label).collect(), construction.d_basis.clone()),
            )
            .build(tol)?)
    }
}

/// Wraps a construction in the restricted protocol. `phi` must be fixed by
/// every `U[m]` (normally it is the construction's `a_0`).
pub fn build_restricted_protocol(
    phi: &CVector,
    zero_state: &CVector,
    construction: &HardyConstruction,
    tol: &Tolerances,
) -> Result<RestrictedProtocol> {
    let dim = construction.dim();
    for v in [phi, zero_state] {
        if v.dim() != dim {
            return Err(ConstructionError::DimensionMismatch { expected: dim, found: v.dim() });
        }
        v.check_normalized(tol.norm)?;
    }
    for (m, u) in construction.u.iter().enumerate() {
        if !u.mul_vec(phi)?.same_ray(phi, tol.zero) {
            return Err(ConstructionError::PhiNotFixed { m });
        }
    }
    let w = if phi == zero_state {
        CMatrix::identity(dim)
    } else {
        let from = complete_to_unitary(dim, &[(0, phi.clone())], tol)?;
        let to = complete_to_unitary(dim, &[(0, zero_state.clone())], tol)?;
        &to * &from.adjoint()
    };
    let w_adj = w.adjoint();
    let u_tilde = construction.u.iter().map(|u| &(&w * u) * &w_adj).collect();
    Ok(RestrictedProtocol {
        phi: phi.clone(),
        zero_state: zero_state.clone(),
        w,
        u_tilde,
    })
}

/// Product scenario `A ⊗ B` with the ancilla prepared in `|ancilla_index⟩`.
pub fn ancilla_scenario(
    scenario_a: &QuantumScenario,
    ancilla_dim: usize,
    ancilla_index: usize,
    tol: &Tolerances,
) -> Result<QuantumScenario> {
    Ok(scenario_a.tensor_with_ancilla(ancilla_dim, ancilla_index, tol)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha2: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub feasible: bool,
    pub bound: f64,
}

/// `α² = k / steps` for `k = 1..steps−1`; exact grid values, no accumulation.
pub fn alpha2_grid(steps: usize) -> Vec<f64> {
    (1..steps).map(|k| k as f64 / steps as f64).collect()
}

/// Attempts the full build-and-certify pipeline at every grid point.
/// Runs on the current rayon pool.
pub fn scan_feasibility(ns: &[usize], alpha2: &[f64], tol: &Tolerances) -> Vec<ScanRow> {
    let points: Vec<(usize, f64)> = ns
        .iter()
        .flat_map(|&n| alpha2.iter().map(move |&a2| (n, a2)))
        .collect();
    points
        .into_par_iter()
        .map(|(n, a2)| {
            let (alpha, beta) = (a2.sqrt(), (1.0 - a2).sqrt());
            let m = smallest_m(beta).unwrap_or(0);
            let feasible = build_construction(alpha, beta, n, tol).is_ok();
            ScanRow {
                n,
                alpha2: a2,
                m,
                feasible,
                bound: feasible_overlap_bound(n),
            }
        })
        .collect()
}

/// Largest feasible `α²` per `N`, in the order `N` first appears.
pub fn empirical_boundary(rows: &[ScanRow]) -> Vec<(usize, Option<f64>)> {
    let mut out: Vec<(usize, Option<f64>)> = Vec::new();
    for row in rows {
        let entry = match out.iter_mut().find(|(n, _)| *n == row.n) {
            Some(e) => e,
            None => {
                out.push((row.n, None));
                out.last_mut().expect("just pushed")
            }
        };
        if row.feasible {
            entry.1 = Some(entry.1.map_or(row.alpha2, |b: f64| b.max(row.alpha2)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn half() -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }

    #[test]
    fn smallest_m_examples() {
        assert_eq!(smallest_m(0.5f64.sqrt()).unwrap(), 2);
        assert_eq!(smallest_m(0.3f64.sqrt()).unwrap(), 4);
        assert_eq!(smallest_m(0.25f64.sqrt()).unwrap(), 4);
        assert_eq!(smallest_m(0.1f64.sqrt()).unwrap(), 10);
        assert_eq!(smallest_m(1.0).unwrap(), 1);
        assert!(matches!(smallest_m(0.0), Err(ConstructionError::OutOfRange { .. })));
        assert!(matches!(smallest_m(1.5), Err(ConstructionError::OutOfRange { .. })));
    }

    #[test]
    fn bound_values() {
        assert_eq!(feasible_overlap_bound(2), 0.5);
        assert!((feasible_overlap_bound(10) - 0.9).abs() < 1e-15);
        assert!(feasible_overlap_bound(1_000_000) > 0.999_99);
    }

    /// Independent check of the boundary case: the hand-written vectors for
    /// `α² = β² = 1/2`, `N = 2` (γ = 0) against the built ones.
    #[test]
    fn boundary_case_matches_hand_computation() {
        let c = build_construction(half(), half(), 2, &tol()).unwrap();
        assert_eq!(c.m, 2);
        assert!(c.gamma.abs() < 1e-15);
        let h = half();
        let a0 = CVector::from_real(&[0.0, h, h]);
        assert!(c.a0.max_abs_diff(&a0) < 1e-15);
        // c[1] = (0, 0, 1), c[2] = (0, 1, 0) with a hole at index m.
        assert!(c.c[1].max_abs_diff(&CVector::from_real(&[0.0, 0.0, 1.0])) < 1e-12);
        assert!(c.c[2].max_abs_diff(&CVector::from_real(&[0.0, 1.0, 0.0])) < 1e-12);
        assert_eq!(c.u[0], c.u[1]);
        for (n, d) in c.d_basis.iter().enumerate() {
            let first = d.inner(&a0).norm();
            let cn = c.u[n].mul_vec(&c.psi).unwrap();
            let second = d.inner(&cn).norm();
            assert!(first < 1e-10 || second < 1e-10, "n = {n}");
        }
        assert!(c.audit().worst() < 1e-10);
    }

    #[test]
    fn certificate_disjuncts() {
        let c = build_construction(0.6f64.sqrt(), 0.4f64.sqrt(), 5, &tol()).unwrap();
        assert_eq!(c.m, 3);
        let cert = verify_condition(&c, &tol()).unwrap();
        for (n, d) in cert.per_n.iter().enumerate() {
            if n == 0 || n > c.m {
                assert!(d.first_holds(), "n = {n}: {d:?}");
            } else {
                assert!(d.second_holds(), "n = {n}: {d:?}");
            }
        }
    }

    #[test]
    fn infeasible_reports_minimal_n() {
        let err = build_construction(0.7f64.sqrt(), 0.3f64.sqrt(), 3, &tol()).unwrap_err();
        assert_eq!(err, ConstructionError::Infeasible { m: 4, n: 3, minimal_n: 4 });
        assert!(build_construction(0.7f64.sqrt(), 0.3f64.sqrt(), 4, &tol()).is_ok());
    }

    #[test]
    fn orthogonal_pair_is_degenerate_case() {
        let c = build_construction(0.0, 1.0, 1, &tol()).unwrap();
        assert_eq!(c.m, 1);
        let cert = verify_condition(&c, &tol()).unwrap();
        assert_eq!(cert.per_n.len(), 2);
        assert!(c.audit().worst() < 1e-10);
    }

    #[test]
    fn invalid_amplitudes() {
        assert!(matches!(
            build_construction(0.5, 0.5, 4, &tol()),
            Err(ConstructionError::InvalidAmplitudes { .. })
        ));
    }

    #[test]
    fn random_d_basis_breaks_condition() {
        let mut c = build_construction(half(), half(), 2, &tol()).unwrap();
        // A fixed generic orthonormal basis (rotation about (1,1,1)).
        let r = crate::numerics::complete_to_unitary(
            3,
            &[(0, CVector::from_real(&[0.48, 0.6, 0.64]))],
            &tol(),
        )
        .unwrap();
        c.d_basis = (0..3).map(|k| r.column(k)).collect();
        assert!(matches!(
            verify_condition(&c, &tol()),
            Err(ConstructionError::ConditionViolated { .. })
        ));
    }

    #[test]
    fn restricted_protocol_identity_when_phi_is_zero_state() {
        let c = build_construction(half(), half(), 2, &tol()).unwrap();
        let p = build_restricted_protocol(&c.a0, &c.a0, &c, &tol()).unwrap();
        assert_eq!(p.w, CMatrix::identity(3));
        assert_eq!(p.u_tilde, c.u);
        let err = build_restricted_protocol(&c.psi, &c.a0, &c, &tol()).unwrap_err();
        assert!(matches!(err, ConstructionError::PhiNotFixed { .. }));
        let err = build_restricted_protocol(&CVector::basis(2, 0), &c.a0, &c, &tol()).unwrap_err();
        assert!(matches!(err, ConstructionError::DimensionMismatch { .. }));
    }

    #[test]
    fn restricted_protocol_generic_zero_state() {
        let c = build_construction(0.3f64.sqrt(), 0.7f64.sqrt(), 3, &tol()).unwrap();
        let zero = CVector::basis(4, 0);
        let p = build_restricted_protocol(&c.a0, &zero, &c, &tol()).unwrap();
        assert!(p.w.mul_vec(&c.a0).unwrap().max_abs_diff(&zero) < 1e-12);
        assert!(p.zero_state_deviation() < 1e-10);
        assert!(p.composite_deviation(&c) < 1e-10);
    }

    #[test]
    fn for_pair_handles_complex_phases() {
        let phi = CVector::new(vec![
            Complex64::new(0.0, 0.6),
            Complex64::new(0.8, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        let psi = CVector::new(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, -0.5),
        ]);
        let c = HardyConstruction::for_pair(&phi, &psi, &tol()).unwrap();
        assert!(c.a0.max_abs_diff(&phi) < 1e-12);
        assert!(c.psi.same_ray(&psi, 1e-12));
        assert!(c.audit().worst() < 1e-10);
    }

    #[test]
    fn ancilla_lifts_the_bound() {
        let s = build_construction(half(), half(), 2, &tol()).unwrap().to_scenario(&tol()).unwrap();
        let ab = ancilla_scenario(&s, 4, 1, &tol()).unwrap();
        assert_eq!(ab.dim(), 12);
        assert!(feasible_overlap_bound(ab.dim() - 1) > feasible_overlap_bound(s.dim() - 1));
    }

    #[test]
    fn scan_boundary_small() {
        let rows = scan_feasibility(&[2, 3], &alpha2_grid(20), &tol());
        let boundary = empirical_boundary(&rows);
        assert_eq!(boundary[0], (2, Some(0.5)));
        assert_eq!(boundary[1], (3, Some(0.65)));
    }

    #[test]
    fn bundle_json_round_trip() {
        let c = build_construction(half(), half(), 2, &tol()).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: HardyConstruction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        verify_condition(&back, &tol()).unwrap();
    }
}
