//! Finite-dimensional quantum scenarios and their possibilistic structure.
//!
//! A scenario is a set of named preparations, families of unitaries (each
//! member identified by a string id such as `"phi=pi"` or `"m=3"`) and
//! maximal projective measurements. [`zero_structure`] enumerates every
//! (preparation, member, measurement, outcome) combination whose Born
//! probability vanishes; this is the data the proof engine works from.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    born_probabilities, gram_deviation, CMatrix, CVector, NumericsError, Tolerances,
};

/// Member id that always resolves to the identity, declared or not.
pub const IDENTITY_MEMBER: &str = "id";

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
    #[error(
        "probability {probability:e} for {entry} lies between the zero tolerance and the guard"
    )]
    AmbiguousZero { entry: ZeroEntry, probability: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        path: path.into(),
        reason: reason.into(),
    }
}

/// A maximal projective measurement: one basis vector per outcome label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measurement {
    pub outcomes: Vec<String>,
    pub basis: Vec<CVector>,
}

impl Measurement {
    pub fn new(outcomes: Vec<String>, basis: Vec<CVector>) -> Self {
        Measurement { outcomes, basis }
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o == label)
    }

    /// Measurement in the standard basis with the given labels.
    pub fn standard(outcomes: Vec<String>) -> Self {
        let dim = outcomes.len();
        let basis = (0..dim).map(|k| CVector::basis(dim, k)).collect();
        Measurement { outcomes, basis }
    }
}

/// Named preparations, unitary families and measurements on one Hilbert
/// space. Immutable once built; every invariant is checked by
/// [`QuantumScenario::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumScenario {
    dim: usize,
    preparations: IndexMap<String, CVector>,
    families: IndexMap<String, IndexMap<String, CMatrix>>,
    measurements: IndexMap<String, Measurement>,
}

/// One possibilistic zero: preparation, family member, measurement, outcome.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ZeroEntry {
    pub preparation: String,
    pub member: String,
    pub measurement: String,
    pub outcome: String,
}

impl std::fmt::Display for ZeroEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}, {}:{})",
            self.preparation, self.member, self.measurement, self.outcome
        )
    }
}

/// Every combination whose quantum probability is a possibilistic zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ZeroStructure {
    pub entries: Vec<ZeroEntry>,
}

impl ZeroStructure {
    pub fn contains(&self, preparation: &str, member: &str, measurement: &str, outcome: &str) -> bool {
        self.entries.iter().any(|e| {
            e.preparation == preparation
                && e.member == member
                && e.measurement == measurement
                && e.outcome == outcome
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ZeroEntry> {
        self.entries.iter()
    }
}

#[derive(Debug)]
pub struct ScenarioBuilder {
    dim: usize,
    preparations: IndexMap<String, CVector>,
    families: IndexMap<String, IndexMap<String, CMatrix>>,
    measurements: IndexMap<String, Measurement>,
}

impl ScenarioBuilder {
    pub fn preparation(mut self, name: impl Into<String>, state: CVector) -> Self {
        self.preparations.insert(name.into(), state);
        self
    }

    pub fn family<I, S>(mut self, name: impl Into<String>, members: I) -> Self
    where
        I: IntoIterator<Item = (S, CMatrix)>,
        S: Into<String>,
    {
        self.families.insert(
            name.into(),
            members.into_iter().map(|(id, m)| (id.into(), m)).collect(),
        );
        self
    }

    pub fn measurement(mut self, name: impl Into<String>, measurement: Measurement) -> Self {
        self.measurements.insert(name.into(), measurement);
        self
    }

    pub fn build(self, tol: &Tolerances) -> Result<QuantumScenario> {
        let scenario = QuantumScenario {
            dim: self.dim,
            preparations: self.preparations,
            families: self.families,
            measurements: self.measurements,
        };
        scenario.validate(tol)?;
        Ok(scenario)
    }
}

/// On-disk form of a scenario.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    pub dim: usize,
    #[serde(default)]
    pub preparations: IndexMap<String, CVector>,
    #[serde(default)]
    pub families: IndexMap<String, IndexMap<String, CMatrix>>,
    #[serde(default)]
    pub measurements: IndexMap<String, Measurement>,
}

impl QuantumScenario {
    pub fn builder(dim: usize) -> ScenarioBuilder {
        ScenarioBuilder {
            dim,
            preparations: IndexMap::new(),
            families: IndexMap::new(),
            measurements: IndexMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn preparations(&self) -> &IndexMap<String, CVector> {
        &self.preparations
    }

    pub fn families(&self) -> &IndexMap<String, IndexMap<String, CMatrix>> {
        &self.families
    }

    pub fn measurements(&self) -> &IndexMap<String, Measurement> {
        &self.measurements
    }

    pub fn preparation(&self, name: &str) -> Result<&CVector> {
        self.preparations
            .get(name)
            .ok_or_else(|| ScenarioError::UnknownName {
                kind: "preparation",
                name: name.to_owned(),
            })
    }

    pub fn measurement(&self, name: &str) -> Result<&Measurement> {
        self.measurements
            .get(name)
            .ok_or_else(|| ScenarioError::UnknownName {
                kind: "measurement",
                name: name.to_owned(),
            })
    }

    /// Declared member ids in family order, or just [`IDENTITY_MEMBER`] when
    /// the scenario declares no transformations.
    pub fn member_ids(&self) -> Vec<String> {
        let ids: Vec<String> = self
            .families
            .values()
            .flat_map(|members| members.keys().cloned())
            .collect();
        if ids.is_empty() {
            vec![IDENTITY_MEMBER.to_owned()]
        } else {
            ids
        }
    }

    /// Resolves a member id to its matrix. [`IDENTITY_MEMBER`] is always
    /// available.
    pub fn member(&self, id: &str) -> Result<CMatrix> {
        self.families
            .values()
            .find_map(|members| members.get(id).cloned())
            .or_else(|| (id == IDENTITY_MEMBER).then(|| CMatrix::identity(self.dim)))
            .ok_or_else(|| ScenarioError::UnknownName {
                kind: "family member",
                name: id.to_owned(),
            })
    }

    /// Name of the family declaring `id`, if any.
    pub fn family_of(&self, id: &str) -> Option<&str> {
        self.families
            .iter()
            .find(|(_, members)| members.contains_key(id))
            .map(|(name, _)| name.as_str())
    }

    /// Whether member `id` maps preparation `prep` to itself up to a global
    /// phase, within `tol.zero`.
    pub fn member_fixes(&self, id: &str, prep: &str, tol: &Tolerances) -> Result<bool> {
        let u = self.member(id)?;
        let v = self.preparation(prep)?;
        let out = u.mul_vec(v)?;
        Ok(v.same_ray(&out, tol.zero))
    }

    /// Checks every invariant, reporting the first violation with a path
    /// into the document layout (`/preparations/psi`, ...).
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if self.dim == 0 {
            return Err(invalid("/dim", "dimension must be positive"));
        }
        for (name, v) in &self.preparations {
            let path = format!("/preparations/{name}");
            if v.dim() != self.dim {
                return Err(invalid(path, format!("has {} entries, expected {}", v.dim(), self.dim)));
            }
            let deviation = (v.norm_sqr() - 1.0).abs();
            if deviation > tol.norm {
                return Err(invalid(path, format!("not normalized (|‖v‖² − 1| = {deviation:e})")));
            }
        }
        let mut seen_ids: IndexMap<&str, &str> = IndexMap::new();
        for (family, members) in &self.families {
            for (id, u) in members {
                let path = format!("/families/{family}/{id}");
                if let Some(other) = seen_ids.insert(id.as_str(), family.as_str()) {
                    return Err(invalid(path, format!("member id also declared in family `{other}`")));
                }
                if u.rows() != self.dim || u.cols() != self.dim {
                    return Err(invalid(
                        path,
                        format!("is {}×{}, expected {}×{}", u.rows(), u.cols(), self.dim, self.dim),
                    ));
                }
                let deviation = u.unitarity_deviation();
                if deviation > tol.unitary {
                    return Err(invalid(path, format!("not unitary (max |U†U − I| = {deviation:e})")));
                }
            }
        }
        for (name, m) in &self.measurements {
            let path = format!("/measurements/{name}");
            if m.outcomes.len() != self.dim || m.basis.len() != self.dim {
                return Err(invalid(
                    path,
                    format!(
                        "needs {} outcomes and basis vectors (maximal measurement), found {} and {}",
                        self.dim,
                        m.outcomes.len(),
                        m.basis.len()
                    ),
                ));
            }
            for (k, label) in m.outcomes.iter().enumerate() {
                if m.outcomes[..k].contains(label) {
                    return Err(invalid(format!("{path}/outcomes/{k}"), format!("duplicate outcome `{label}`")));
                }
            }
            for (k, b) in m.basis.iter().enumerate() {
                if b.dim() != self.dim {
                    return Err(invalid(
                        format!("{path}/basis/{k}"),
                        format!("has {} entries, expected {}", b.dim(), self.dim),
                    ));
                }
            }
            let deviation = gram_deviation(&m.basis);
            if deviation > tol.unitary {
                return Err(invalid(
                    format!("{path}/basis"),
                    format!("not orthonormal (max Gram deviation {deviation:e})"),
                ));
            }
        }
        Ok(())
    }

    pub fn to_doc(&self) -> ScenarioDoc {
        ScenarioDoc {
            schema_version: Some(SCENARIO_SCHEMA_VERSION),
            dim: self.dim,
            preparations: self.preparations.clone(),
            families: self.families.clone(),
            measurements: self.measurements.clone(),
        }
    }

    pub fn from_doc(doc: ScenarioDoc, tol: &Tolerances) -> Result<Self> {
        if let Some(v) = doc.schema_version {
            if v != SCENARIO_SCHEMA_VERSION {
                return Err(invalid("/schema_version", format!("unsupported version {v}")));
            }
        }
        QuantumScenario {
            dim: doc.dim,
            preparations: doc.preparations,
            families: doc.families,
            measurements: doc.measurements,
        }
        .validated(tol)
    }

    fn validated(self, tol: &Tolerances) -> Result<Self> {
        self.validate(tol)?;
        Ok(self)
    }

    pub fn from_json_str(text: &str, tol: &Tolerances) -> Result<Self> {
        let doc: ScenarioDoc = parse_json_with_path(text)?;
        Self::from_doc(doc, tol)
    }

    pub fn from_json_value(value: serde_json::Value, tol: &Tolerances) -> Result<Self> {
        let doc: ScenarioDoc = serde_path_to_error::deserialize(value).map_err(path_error)?;
        Self::from_doc(doc, tol)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_doc()).expect("scenario documents always serialize")
    }

    /// Outcome probabilities for `preparation` after `member`, measured by
    /// `measurement`.
    pub fn evaluate(
        &self,
        preparation: &str,
        member: &str,
        measurement: &str,
        tol: &Tolerances,
    ) -> Result<Vec<(String, f64)>> {
        let state = self.preparation(preparation)?;
        let u = self.member(member)?;
        let m = self.measurement(measurement)?;
        let evolved = crate::numerics::apply_unitary(&u, state, tol)?;
        let probs = born_probabilities(&evolved, &m.basis, tol)?;
        Ok(m.outcomes.iter().cloned().zip(probs).collect())
    }

    /// Scenario with `|x⟩ ↦ |x⟩ ⊗ |ancilla⟩` preparations, `U ⊗ I` members
    /// and product measurements `A ⊗ (standard basis of B)`.
    pub fn tensor_with_ancilla(
        &self,
        ancilla_dim: usize,
        ancilla_index: usize,
        tol: &Tolerances,
    ) -> Result<QuantumScenario> {
        if ancilla_index >= ancilla_dim {
            return Err(invalid(
                "/ancilla",
                format!("state index {ancilla_index} out of range for dimension {ancilla_dim}"),
            ));
        }
        let ket = CVector::basis(ancilla_dim, ancilla_index);
        let id_b = CMatrix::identity(ancilla_dim);
        let mut builder = QuantumScenario::builder(self.dim * ancilla_dim);
        for (name, v) in &self.preparations {
            builder = builder.preparation(format!("{name}|{ancilla_index}"), v.kron(&ket));
        }
        for (family, members) in &self.families {
            builder = builder.family(
                family.clone(),
                members.iter().map(|(id, u)| (id.clone(), u.kron(&id_b))),
            );
        }
        for (name, m) in &self.measurements {
            let mut outcomes = Vec::new();
            let mut basis = Vec::new();
            for (label, b) in m.outcomes.iter().zip(&m.basis) {
                for k in 0..ancilla_dim {
                    outcomes.push(format!("{label}|{k}"));
                    basis.push(b.kron(&CVector::basis(ancilla_dim, k)));
                }
            }
            builder = builder.measurement(name.clone(), Measurement::new(outcomes, basis));
        }
        builder.build(tol)
    }
}

pub(crate) fn path_error(err: serde_path_to_error::Error<serde_json::Error>) -> ScenarioError {
    let path = err.path().to_string();
    let path = if path == "." { "/".to_owned() } else { format!("/{}", path.replace('.', "/")) };
    invalid(path, err.into_inner().to_string())
}

pub(crate) fn parse_json_with_path<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(path_error)
}

/// Enumerates every combination with probability at most `tol.zero`.
///
/// Fails with [`ScenarioError::AmbiguousZero`] when any probability lands
/// strictly between `tol.zero` and `tol.zero_guard`.
pub fn zero_structure(scenario: &QuantumScenario, tol: &Tolerances) -> Result<ZeroStructure> {
    let mut entries = Vec::new();
    for prep in scenario.preparations.keys() {
        for member in scenario.member_ids() {
            for meas in scenario.measurements.keys() {
                for (outcome, p) in scenario.evaluate(prep, &member, meas, tol)? {
                    let entry = ZeroEntry {
                        preparation: prep.clone(),
                        member: member.clone(),
                        measurement: meas.clone(),
                        outcome,
                    };
                    if p <= tol.zero {
                        entries.push(entry);
                    } else if p < tol.zero_guard {
                        return Err(ScenarioError::AmbiguousZero { entry, probability: p });
                    }
                }
            }
        }
    }
    Ok(ZeroStructure { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn qubit_identity_scenario() -> QuantumScenario {
        QuantumScenario::builder(2)
            .preparation("zero", CVector::basis(2, 0))
            .measurement("Z", Measurement::standard(vec!["0".into(), "1".into()]))
            .build(&tol())
            .unwrap()
    }

    #[test]
    fn identity_scenario_zeros_other_outcomes() {
        let s = qubit_identity_scenario();
        let z = zero_structure(&s, &tol()).unwrap();
        assert_eq!(
            z.entries,
            vec![ZeroEntry {
                preparation: "zero".into(),
                member: IDENTITY_MEMBER.into(),
                measurement: "Z".into(),
                outcome: "1".into(),
            }]
        );
    }

    #[test]
    fn unknown_names_are_reported() {
        let s = qubit_identity_scenario();
        let err = s.evaluate("nope", IDENTITY_MEMBER, "Z", &tol()).unwrap_err();
        assert!(matches!(err, ScenarioError::UnknownName { kind: "preparation", .. }));
        let err = s.evaluate("zero", "phi=0", "Z", &tol()).unwrap_err();
        assert!(matches!(err, ScenarioError::UnknownName { kind: "family member", .. }));
    }

    #[test]
    fn ambiguous_zero_is_an_error() {
        let eps = 1e-7_f64;
        let v = CVector::from_real(&[(1.0 - eps).sqrt(), eps.sqrt()]);
        let s = QuantumScenario::builder(2)
            .preparation("near", v)
            .measurement("Z", Measurement::standard(vec!["0".into(), "1".into()]))
            .build(&tol())
            .unwrap();
        let err = zero_structure(&s, &tol()).unwrap_err();
        assert!(matches!(err, ScenarioError::AmbiguousZero { .. }));
    }

    #[test]
    fn global_phase_does_not_change_zeros() {
        let phase = Complex64::from_polar(1.0, 0.7);
        let s = QuantumScenario::builder(2)
            .preparation("zero", CVector::basis(2, 0).scale(phase))
            .measurement("Z", Measurement::standard(vec!["0".into(), "1".into()]))
            .build(&tol())
            .unwrap();
        assert_eq!(
            zero_structure(&s, &tol()).unwrap(),
            zero_structure(&qubit_identity_scenario(), &tol()).unwrap()
        );
    }

    #[test]
    fn loader_reports_paths() {
        let text = r#"{"dim": 2, "preparations": {"bad": [[1,0],[1,0]]}}"#;
        let err = QuantumScenario::from_json_str(text, &tol()).unwrap_err();
        assert_eq!(err.to_string().split(':').next().unwrap(), "/preparations/bad");

        let text = r#"{"dim": 2, "families": {"f": {"m": [[[1,0],[1,0]],[[0,0],[1,0]]]}}}"#;
        let err = QuantumScenario::from_json_str(text, &tol()).unwrap_err();
        assert!(err.to_string().starts_with("/families/f/m"), "{err}");

        let text = r#"{"dim": 2, "measurements": {"Z": {"outcomes": ["0"], "basis": [[[1,0],[0,0]]]}}}"#;
        let err = QuantumScenario::from_json_str(text, &tol()).unwrap_err();
        assert!(err.to_string().starts_with("/measurements/Z"), "{err}");

        let text = r#"{"dim": 2, "preparations": {"p": [[1,0],[0]]}}"#;
        let err = QuantumScenario::from_json_str(text, &tol()).unwrap_err();
        assert!(err.to_string().starts_with("/preparations/p"), "{err}");
    }

    #[test]
    fn duplicate_member_ids_rejected() {
        let err = QuantumScenario::builder(1)
            .family("a", [("m", CMatrix::identity(1))])
            .family("b", [("m", CMatrix::identity(1))])
            .build(&tol())
            .unwrap_err();
        assert!(err.to_string().starts_with("/families/b/m"), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let s = qubit_identity_scenario();
        let text = serde_json::to_string(&s.to_doc()).unwrap();
        assert_eq!(QuantumScenario::from_json_str(&text, &tol()).unwrap(), s);
    }

    #[test]
    fn ancilla_product_dimension_and_overlap() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = QuantumScenario::builder(2)
            .preparation("phi", CVector::basis(2, 0))
            .preparation("psi", CVector::from_real(&[h, h]))
            .measurement("Z", Measurement::standard(vec!["0".into(), "1".into()]))
            .build(&tol())
            .unwrap();
        let ab = a.tensor_with_ancilla(3, 1, &tol()).unwrap();
        assert_eq!(ab.dim(), 6);
        let overlap_a = a.preparation("phi").unwrap().inner(a.preparation("psi").unwrap()).norm();
        let overlap_ab = ab.preparation("phi|1").unwrap().inner(ab.preparation("psi|1").unwrap()).norm();
        assert!((overlap_a - overlap_ab).abs() < 1e-15);
    }
}
