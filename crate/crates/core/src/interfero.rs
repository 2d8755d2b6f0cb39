//! Mach-Zehnder scenarios: the balanced interferometer and the variant with
//! an unbalanced source and a third beamsplitter in path `a_1`.
//!
//! Mode order is `(a_0, a_1)`, or `(a_0, a_1, b_0)` with BS3. The phase
//! shifter sits in `a_1` and is the only member family; BS2, BS3 and the
//! detectors are folded into the measurement basis, so outcome `B_k`
//! projects onto `V† |b_k⟩` with `V` the post-phase optics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{beamsplitter_5050, CMatrix, CVector, Tolerances};
use crate::scenario::{zero_structure, Measurement, QuantumScenario, ScenarioError, ZeroStructure};
use num_complex::Complex64;

pub const PHASE_FAMILY: &str = "phase";
pub const PHASE_ZERO: &str = "phi=0";
pub const PHASE_PI: &str = "phi=pi";
pub const DETECTOR: &str = "B";
pub const PSI: &str = "psi";
pub const PHI: &str = "phi";
pub const DEFAULT_UNBALANCED_ALPHA2: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterferoError {
    #[error("invalid interferometer configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

pub type Result<T> = std::result::Result<T, InterferoError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "pi")]
    Pi,
}

impl Phase {
    pub fn member(self) -> &'static str {
        match self {
            Phase::Zero => PHASE_ZERO,
            Phase::Pi => PHASE_PI,
        }
    }
}

impl std::str::FromStr for Phase {
    type Err = InterferoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" => Ok(Phase::Zero),
            "pi" | "π" => Ok(Phase::Pi),
            _ => Err(InterferoError::InvalidConfig(format!("phase must be 0 or pi, got `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MziConfig {
    pub alpha: f64,
    pub beta: f64,
    pub phase: Phase,
    pub with_bs3: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmissivity: Option<f64>,
}

impl MziConfig {
    /// Balanced source, no BS3.
    pub fn balanced(phase: Phase) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        MziConfig { alpha: h, beta: h, phase, with_bs3: false, transmissivity: None }
    }

    /// Unbalanced source `α|a_0⟩ + β|a_1⟩` with BS3 set to `T = α²/β²`.
    pub fn unbalanced(alpha2: f64, phase: Phase) -> Result<Self> {
        if !(alpha2 > 0.0 && alpha2 < 1.0) {
            return Err(InterferoError::InvalidConfig(format!("alpha2 = {alpha2} must lie in (0, 1)")));
        }
        let (alpha, beta) = (alpha2.sqrt(), (1.0 - alpha2).sqrt());
        Ok(MziConfig {
            alpha,
            beta,
            phase,
            with_bs3: true,
            transmissivity: Some((alpha * alpha / (beta * beta)).min(1.0)),
        })
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let bad = |m: String| Err(InterferoError::InvalidConfig(m));
        let (a, b) = (self.alpha, self.beta);
        if !(a > 0.0 && b > 0.0) {
            return bad(format!("amplitudes must be positive, got α = {a}, β = {b}"));
        }
        if (a * a + b * b - 1.0).abs() > tol.norm {
            return bad(format!("α² + β² = {} is not 1", a * a + b * b));
        }
        match (self.with_bs3, self.transmissivity) {
            (false, None) => Ok(()),
            (false, Some(_)) => bad("transmissivity given without BS3".into()),
            (true, None) => bad("BS3 requires a transmissivity".into()),
            (true, Some(t)) => {
                if !(0.0..=1.0).contains(&t) {
                    return bad(format!("transmissivity {t} outside [0, 1]"));
                }
                if a > b + tol.norm {
                    return bad(format!("BS3 needs α ≤ β, got α = {a}, β = {b}"));
                }
                if (t.sqrt() * b - a).abs() > tol.norm {
                    return bad(format!("√T·β = {} differs from α = {a}", t.sqrt() * b));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        if self.with_bs3 {
            3
        } else {
            2
        }
    }

    pub fn outcomes(&self) -> Vec<String> {
        let names: &[&str] = if self.with_bs3 { &["B0", "B1", "B2"] } else { &["B1", "B2"] };
        names.iter().map(|s| s.to_string()).collect()
    }
}

/// The four figures: 1 and 3 send in `|ψ⟩`, 2 and 4 send in `|a_0⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Figure {
    One,
    Two,
    Three,
    Four,
}

impl Figure {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Figure::One),
            2 => Ok(Figure::Two),
            3 => Ok(Figure::Three),
            4 => Ok(Figure::Four),
            _ => Err(InterferoError::InvalidConfig(format!("figure must be 1..4, got {n}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Figure::One => 1,
            Figure::Two => 2,
            Figure::Three => 3,
            Figure::Four => 4,
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Figure::One | Figure::Three => PSI,
            Figure::Two | Figure::Four => PHI,
        }
    }

    /// Config for this figure; `alpha2` only applies to figures 3 and 4.
    pub fn config(self, alpha2: Option<f64>, phase: Phase) -> Result<MziConfig> {
        match (self, alpha2) {
            (Figure::One | Figure::Two, None) => Ok(MziConfig::balanced(phase)),
            (Figure::One | Figure::Two, Some(_)) => Err(InterferoError::InvalidConfig(
                "alpha2 only applies to figures 3 and 4".into(),
            )),
            (_, a2) => MziConfig::unbalanced(a2.unwrap_or(DEFAULT_UNBALANCED_ALPHA2), phase),
        }
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Source state after BS1, in mode coordinates.
fn source_state(config: &MziConfig) -> CVector {
    let input = CVector::basis(2, 1);
    let bs1 = if config.with_bs3 {
        let (a, b) = (config.alpha, config.beta);
        CMatrix::from_real_rows(&[&[b, a], &[-a, b]])
    } else {
        beamsplitter_5050()
    };
    let out = bs1.mul_vec(&input).expect("2x2 on 2-vector");
    let mut entries = out.into_entries();
    entries.resize(config.dim(), re(0.0));
    CVector::new(entries)
}

fn detector_basis(config: &MziConfig) -> Vec<CVector> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match config.transmissivity.filter(|_| config.with_bs3) {
        None => vec![CVector::from_real(&[h, h]), CVector::from_real(&[h, -h])],
        Some(t) => {
            let (s, r) = (t.sqrt(), (1.0 - t).sqrt());
            vec![
                CVector::from_real(&[0.0, r, s]),
                CVector::from_real(&[h, h * s, -h * r]),
                CVector::from_real(&[h, -h * s, h * r]),
            ]
        }
    }
}

/// Scenario with preparations `psi` and `phi = a_0`, the phase family
/// `{phi=0, phi=pi}` and the detector measurement `B`.
pub fn build_mzi(config: &MziConfig, tol: &Tolerances) -> Result<QuantumScenario> {
    config.validate(tol)?;
    let dim = config.dim();
    let mut flip = vec![re(1.0); dim];
    flip[1] = re(-1.0);
    Ok(QuantumScenario::builder(dim)
        .preparation(PSI, source_state(config))
        .preparation(PHI, CVector::basis(dim, 0))
        .family(
            PHASE_FAMILY,
            [(PHASE_ZERO, CMatrix::identity(dim)), (PHASE_PI, CMatrix::diagonal(&flip))],
        )
        .measurement(DETECTOR, Measurement::new(config.outcomes(), detector_basis(config)))
        .build(tol)?)
}

pub fn mzi_zero_table(config: &MziConfig, tol: &Tolerances) -> Result<ZeroStructure> {
    Ok(zero_structure(&build_mzi(config, tol)?, tol)?)
}

/// Detector probabilities for one preparation at the configured phase.
pub fn detector_probabilities(
    config: &MziConfig,
    preparation: &str,
    tol: &Tolerances,
) -> Result<Vec<(String, f64)>> {
    let scenario = build_mzi(config, tol)?;
    Ok(scenario.evaluate(preparation, config.phase.member(), DETECTOR, tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn prob(table: &[(String, f64)], outcome: &str) -> f64 {
        table.iter().find(|(o, _)| o == outcome).unwrap().1
    }

    #[test]
    fn balanced_interferometer() {
        let t = detector_probabilities(&MziConfig::balanced(Phase::Zero), PSI, &tol()).unwrap();
        assert!((prob(&t, "B1") - 1.0).abs() < 1e-12);
        let t = detector_probabilities(&MziConfig::balanced(Phase::Pi), PSI, &tol()).unwrap();
        assert!((prob(&t, "B2") - 1.0).abs() < 1e-12);
        let t = detector_probabilities(&MziConfig::balanced(Phase::Pi), PHI, &tol()).unwrap();
        assert!((prob(&t, "B1") - 0.5).abs() < 1e-12);
    }

    #[test]
    fn balanced_zero_table() {
        let z = mzi_zero_table(&MziConfig::balanced(Phase::Zero), &tol()).unwrap();
        assert_eq!(z.len(), 2);
        assert!(z.contains(PSI, PHASE_ZERO, DETECTOR, "B2"));
        assert!(z.contains(PSI, PHASE_PI, DETECTOR, "B1"));
    }

    #[test]
    fn unbalanced_equalizes_amplitudes() {
        let c = MziConfig::unbalanced(0.2, Phase::Zero).unwrap();
        assert!((c.transmissivity.unwrap() - 0.25).abs() < 1e-15);
        // Amplitude on a'_1 after BS3 is √T·β.
        assert!((c.transmissivity.unwrap().sqrt() * c.beta - c.alpha).abs() < 1e-12);
        let z = mzi_zero_table(&c, &tol()).unwrap();
        for ph in [PHASE_ZERO, PHASE_PI] {
            assert!(z.contains(PHI, ph, DETECTOR, "B0"));
        }
        assert!(z.contains(PSI, PHASE_ZERO, DETECTOR, "B2"));
        assert!(z.contains(PSI, PHASE_PI, DETECTOR, "B1"));
        assert_eq!(z.len(), 4);
    }

    #[test]
    fn transparent_bs3_reduces_to_balanced() {
        let c = MziConfig::unbalanced(0.5, Phase::Zero).unwrap();
        assert_eq!(c.transmissivity, Some(1.0));
        let z = mzi_zero_table(&c, &tol()).unwrap();
        assert!(z.contains(PSI, PHASE_ZERO, DETECTOR, "B2"));
        assert!(z.contains(PSI, PHASE_PI, DETECTOR, "B1"));
        for p in [PSI, PHI] {
            for ph in [PHASE_ZERO, PHASE_PI] {
                assert!(z.contains(p, ph, DETECTOR, "B0"));
            }
        }
        assert_eq!(z.len(), 6);
    }

    #[test]
    fn probabilities_sum_to_one() {
        for a2 in [0.05, 0.2, 0.35, 0.5] {
            for phase in [Phase::Zero, Phase::Pi] {
                let c = MziConfig::unbalanced(a2, phase).unwrap();
                for p in [PSI, PHI] {
                    let total: f64 = detector_probabilities(&c, p, &tol()).unwrap().iter().map(|x| x.1).sum();
                    assert!((total - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(MziConfig::unbalanced(0.7, Phase::Zero).unwrap().validate(&tol()).is_err());
        let mut c = MziConfig::unbalanced(0.2, Phase::Zero).unwrap();
        c.transmissivity = Some(0.3);
        assert!(build_mzi(&c, &tol()).is_err());
        assert!(Figure::One.config(Some(0.2), Phase::Zero).is_err());
        assert!("half".parse::<Phase>().is_err());
    }

    #[test]
    fn phase_members_differ_by_sign_on_a1() {
        let s = build_mzi(&MziConfig::balanced(Phase::Zero), &tol()).unwrap();
        let (a, b) = (s.member(PHASE_ZERO).unwrap(), s.member(PHASE_PI).unwrap());
        assert_eq!(a[(0, 0)], b[(0, 0)]);
        assert_eq!(a[(1, 1)], -b[(1, 1)]);
    }
}
