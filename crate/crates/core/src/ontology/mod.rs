//! Finite ontological models and the assumptions about them as predicates.
//!
//! Everything possibilistic here is exact: an ontic state is in a support,
//! or can produce an outcome, iff the stored probability is strictly
//! positive. Floating tolerances only enter on the quantum side (through
//! the scenario's zero structure and the "leaves the state unchanged" test).

mod product;
mod set;

pub use product::{product_embed, separability_transfer, ProductModel, SeparabilityReport};
pub use set::OnticSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::Tolerances;
use crate::scenario::{zero_structure, QuantumScenario, ScenarioError, IDENTITY_MEMBER};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OntologyError {
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
    #[error("member `{member}` does not leave preparation `{preparation}` unchanged")]
    PreconditionNotApplicable { member: String, preparation: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

pub type Result<T> = std::result::Result<T, OntologyError>;

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> OntologyError {
    OntologyError::Invalid {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Labels of the ontic states λ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OnticSpace {
    labels: Vec<String>,
}

impl OnticSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(invalid(format!("/ontic_states/{i}"), format!("duplicate label `{l}`")));
            }
        }
        if labels.is_empty() {
            return Err(invalid("/ontic_states", "ontic space must be non-empty"));
        }
        Ok(OnticSpace { labels })
    }

    /// `prefix0, prefix1, …`
    pub fn numbered(prefix: &str, size: usize) -> Self {
        OnticSpace {
            labels: (0..size).map(|i| format!("{prefix}{i}")).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn labels_of(&self, set: &OnticSet) -> Vec<String> {
        set.iter().map(|i| self.labels[i].clone()).collect()
    }
}

/// A probability distribution over the ontic space.
#[derive(Clone, Debug, PartialEq)]
pub struct EpistemicState {
    distribution: Vec<f64>,
}

impl EpistemicState {
    pub fn new(distribution: Vec<f64>) -> Self {
        EpistemicState { distribution }
    }

    /// Uniform over `support`.
    pub fn uniform(size: usize, support: &[usize]) -> Self {
        let w = 1.0 / support.len() as f64;
        let mut distribution = vec![0.0; size];
        for &i in support {
            distribution[i] = w;
        }
        EpistemicState { distribution }
    }

    pub fn distribution(&self) -> &[f64] {
        &self.distribution
    }

    pub fn support(&self) -> OnticSet {
        OnticSet::from_indices(
            self.distribution.len(),
            self.distribution
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(i, _)| i),
        )
    }
}

/// Stochastic map on ontic states; `kernel[λ][λ']` is the probability of
/// moving from λ to λ'.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMap {
    kernel: Vec<Vec<f64>>,
}

impl TransitionMap {
    pub fn new(kernel: Vec<Vec<f64>>) -> Self {
        TransitionMap { kernel }
    }

    pub fn identity(size: usize) -> Self {
        Self::from_function(&(0..size).collect::<Vec<_>>())
    }

    /// Deterministic map λ ↦ `image[λ]`.
    pub fn from_function(image: &[usize]) -> Self {
        let n = image.len();
        TransitionMap {
            kernel: image
                .iter()
                .map(|&j| {
                    let mut row = vec![0.0; n];
                    row[j] = 1.0;
                    row
                })
                .collect(),
        }
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    /// Possible successors of λ.
    pub fn successors(&self, lambda: usize) -> OnticSet {
        let row = &self.kernel[lambda];
        OnticSet::from_indices(
            row.len(),
            row.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(i, _)| i),
        )
    }

    /// Possible images of every state in `set`.
    pub fn image(&self, set: &OnticSet) -> OnticSet {
        set.iter()
            .fold(OnticSet::empty(set.universe()), |acc, l| acc.union(&self.successors(l)))
    }

    pub fn compose(&self, then: &TransitionMap) -> TransitionMap {
        let n = self.kernel.len();
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in self.kernel.iter().enumerate() {
            for (k, &p) in row.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (j, &q) in then.kernel[k].iter().enumerate() {
                    out[i][j] += p * q;
                }
            }
        }
        TransitionMap { kernel: out }
    }
}

/// Outcome probabilities per ontic state for one measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseFunction {
    outcomes: Vec<String>,
    xi: Vec<Vec<f64>>,
}

impl ResponseFunction {
    /// `xi[λ][k]` is the probability of `outcomes[k]` given λ.
    pub fn new(outcomes: Vec<String>, xi: Vec<Vec<f64>>) -> Self {
        ResponseFunction { outcomes, xi }
    }

    /// Response that picks uniformly among `possible[λ]` (indices into `outcomes`).
    pub fn uniform_over(outcomes: Vec<String>, possible: &[Vec<usize>]) -> Self {
        let k = outcomes.len();
        let xi = possible
            .iter()
            .map(|set| {
                let mut row = vec![0.0; k];
                for &o in set {
                    row[o] = 1.0 / set.len() as f64;
                }
                row
            })
            .collect();
        ResponseFunction { outcomes, xi }
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn xi(&self) -> &[Vec<f64>] {
        &self.xi
    }

    /// States that can produce `outcome`; empty for labels never produced.
    pub fn possible_states(&self, outcome: &str) -> OnticSet {
        let n = self.xi.len();
        match self.outcomes.iter().position(|o| o == outcome) {
            Some(k) => OnticSet::from_indices(n, (0..n).filter(|&l| self.xi[l][k] > 0.0)),
            None => OnticSet::empty(n),
        }
    }

    /// Outcome labels possible from λ.
    pub fn possible_outcomes(&self, lambda: usize) -> Vec<&str> {
        self.outcomes
            .iter()
            .zip(&self.xi[lambda])
            .filter(|(_, &p)| p > 0.0)
            .map(|(o, _)| o.as_str())
            .collect()
    }
}

/// Ontic space, preparations, transitions per family member and responses
/// per measurement. Names refer to a [`QuantumScenario`] supplied at check
/// time (see [`OntologicalModel::validate_against`]).
#[derive(Clone, Debug, PartialEq)]
pub struct OntologicalModel {
    space: OnticSpace,
    preparations: IndexMap<String, EpistemicState>,
    transitions: IndexMap<String, TransitionMap>,
    responses: IndexMap<String, ResponseFunction>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Classification {
    PsiOntic,
    PsiEpistemic {
        first: String,
        second: String,
        overlap: Vec<String>,
    },
}

impl Classification {
    pub fn is_epistemic(&self) -> bool {
        matches!(self, Classification::PsiEpistemic { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndifferenceMode {
    /// Every state in the support is left exactly where it is.
    Pointwise,
    /// The support is mapped onto itself; individual states may move.
    SetPreservingOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum IndifferenceVerdict {
    Ok,
    Violation { lambda: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationDirection {
    /// Quantum probability is zero but some ontic state can produce the outcome.
    ModelAllowsQuantumZero,
    /// Quantum probability is nonzero but no ontic state in the support produces it.
    ModelForbidsQuantumPossible,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessViolation {
    pub preparation: String,
    pub member: String,
    pub measurement: String,
    pub outcome: String,
    pub direction: ViolationDirection,
}

impl OntologicalModel {
    pub fn new(
        space: OnticSpace,
        preparations: IndexMap<String, EpistemicState>,
        transitions: IndexMap<String, TransitionMap>,
        responses: IndexMap<String, ResponseFunction>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let model = OntologicalModel {
            space,
            preparations,
            transitions,
            responses,
        };
        model.validate(tol)?;
        Ok(model)
    }

    pub fn space(&self) -> &OnticSpace {
        &self.space
    }

    pub fn preparations(&self) -> &IndexMap<String, EpistemicState> {
        &self.preparations
    }

    pub fn transitions(&self) -> &IndexMap<String, TransitionMap> {
        &self.transitions
    }

    pub fn responses(&self) -> &IndexMap<String, ResponseFunction> {
        &self.responses
    }

    pub fn preparation(&self, name: &str) -> Result<&EpistemicState> {
        self.preparations.get(name).ok_or_else(|| OntologyError::UnknownName {
            kind: "preparation",
            name: name.to_owned(),
        })
    }

    /// Transition for a member; [`IDENTITY_MEMBER`] defaults to the identity.
    pub fn transition(&self, member: &str) -> Result<TransitionMap> {
        match self.transitions.get(member) {
            Some(t) => Ok(t.clone()),
            None if member == IDENTITY_MEMBER => Ok(TransitionMap::identity(self.space.size())),
            None => Err(OntologyError::UnknownName {
                kind: "transition",
                name: member.to_owned(),
            }),
        }
    }

    pub fn response(&self, measurement: &str) -> Result<&ResponseFunction> {
        self.responses.get(measurement).ok_or_else(|| OntologyError::UnknownName {
            kind: "response function",
            name: measurement.to_owned(),
        })
    }

    pub fn support(&self, preparation: &str) -> Result<OnticSet> {
        Ok(self.preparation(preparation)?.support())
    }

    fn validate(&self, tol: &Tolerances) -> Result<()> {
        let n = self.space.size();
        let check_dist = |path: String, row: &[f64]| -> Result<()> {
            if row.len() != n {
                return Err(invalid(path, format!("has {} entries, expected {n}", row.len())));
            }
            if let Some(p) = row.iter().find(|p| !(**p >= 0.0)) {
                return Err(invalid(path, format!("negative or NaN probability {p}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol.norm {
                return Err(invalid(path, format!("probabilities sum to {sum}")));
            }
            Ok(())
        };
        for (name, e) in &self.preparations {
            check_dist(format!("/preparations/{name}"), &e.distribution)?;
        }
        for (member, t) in &self.transitions {
            if t.kernel.len() != n {
                return Err(invalid(format!("/transitions/{member}"), format!("needs {n} rows")));
            }
            for (l, row) in t.kernel.iter().enumerate() {
                check_dist(format!("/transitions/{member}/{}", self.space.label(l)), row)?;
            }
        }
        for (meas, r) in &self.responses {
            if r.xi.len() != n {
                return Err(invalid(format!("/responses/{meas}"), format!("needs {n} rows")));
            }
            for (l, row) in r.xi.iter().enumerate() {
                let path = format!("/responses/{meas}/{}", self.space.label(l));
                if row.len() != r.outcomes.len() {
                    return Err(invalid(path, "row length differs from outcome list"));
                }
                if let Some(p) = row.iter().find(|p| !(**p >= 0.0)) {
                    return Err(invalid(path, format!("negative or NaN probability {p}")));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > tol.norm {
                    return Err(invalid(path, format!("outcome probabilities sum to {sum}")));
                }
            }
        }
        Ok(())
    }

    /// Every preparation, transition and response name must exist in the
    /// scenario, and response outcome labels must belong to the measurement.
    pub fn validate_against(&self, scenario: &QuantumScenario) -> Result<()> {
        for name in self.preparations.keys() {
            scenario.preparation(name)?;
        }
        for member in self.transitions.keys() {
            scenario.member(member)?;
        }
        for (meas, r) in &self.responses {
            let m = scenario.measurement(meas)?;
            if let Some(bad) = r.outcomes.iter().find(|o| m.outcome_index(o).is_none()) {
                return Err(OntologyError::UnknownName {
                    kind: "outcome",
                    name: format!("{meas}:{bad}"),
                });
            }
        }
        Ok(())
    }

    pub fn to_doc(&self) -> ModelDoc {
        let label = |i: usize| self.space.label(i).to_owned();
        let sparse = |row: &[f64], names: &dyn Fn(usize) -> String| -> IndexMap<String, f64> {
            row.iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(i, &p)| (names(i), p))
                .collect()
        };
        ModelDoc {
            schema_version: Some(MODEL_SCHEMA_VERSION),
            ontic_states: self.space.labels.clone(),
            preparations: self
                .preparations
                .iter()
                .map(|(n, e)| (n.clone(), sparse(&e.distribution, &label)))
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|(m, t)| {
                    let rows = t
                        .kernel
                        .iter()
                        .enumerate()
                        .map(|(l, row)| (label(l), sparse(row, &label)))
                        .collect();
                    (m.clone(), rows)
                })
                .collect(),
            responses: self
                .responses
                .iter()
                .map(|(m, r)| {
                    let outcome = |k: usize| r.outcomes[k].clone();
                    let rows = r
                        .xi
                        .iter()
                        .enumerate()
                        .map(|(l, row)| (label(l), sparse(row, &outcome)))
                        .collect();
                    (m.clone(), rows)
                })
                .collect(),
            outcomes: self
                .responses
                .iter()
                .map(|(m, r)| (m.clone(), r.outcomes.clone()))
                .collect(),
            scenario: None,
        }
    }

    pub fn from_doc(doc: ModelDoc, tol: &Tolerances) -> Result<Self> {
        if let Some(v) = doc.schema_version {
            if v != MODEL_SCHEMA_VERSION {
                return Err(invalid("/schema_version", format!("unsupported version {v}")));
            }
        }
        let space = OnticSpace::new(doc.ontic_states)?;
        let n = space.size();
        let index = |path: &str, l: &str| {
            space
                .index_of(l)
                .ok_or_else(|| invalid(format!("{path}/{l}"), "unknown ontic state"))
        };
        let dense = |path: &str, row: &IndexMap<String, f64>| -> Result<Vec<f64>> {
            let mut out = vec![0.0; n];
            for (l, &p) in row {
                out[index(path, l)?] = p;
            }
            Ok(out)
        };

        let mut preparations = IndexMap::new();
        for (name, row) in &doc.preparations {
            let path = format!("/preparations/{name}");
            preparations.insert(name.clone(), EpistemicState::new(dense(&path, row)?));
        }
        let mut transitions = IndexMap::new();
        for (member, rows) in &doc.transitions {
            let path = format!("/transitions/{member}");
            let mut kernel = vec![Vec::new(); n];
            for (l, row) in rows {
                kernel[index(&path, l)?] = dense(&format!("{path}/{l}"), row)?;
            }
            if let Some(missing) = kernel.iter().position(Vec::is_empty) {
                return Err(invalid(format!("{path}/{}", space.label(missing)), "missing row"));
            }
            transitions.insert(member.clone(), TransitionMap::new(kernel));
        }
        let mut responses = IndexMap::new();
        for (meas, rows) in &doc.responses {
            let path = format!("/responses/{meas}");
            let declared = doc.outcomes.get(meas);
            let mut outcomes: Vec<String> = declared.cloned().unwrap_or_default();
            for row in rows.values() {
                for o in row.keys() {
                    if !outcomes.contains(o) {
                        if declared.is_some() {
                            return Err(invalid(path.clone(), format!("outcome `{o}` is not declared")));
                        }
                        outcomes.push(o.clone());
                    }
                }
            }
            let mut xi = vec![Vec::new(); n];
            for (l, row) in rows {
                let mut dense_row = vec![0.0; outcomes.len()];
                for (o, &p) in row {
                    let k = outcomes.iter().position(|x| x == o).expect("collected above");
                    dense_row[k] = p;
                }
                xi[index(&path, l)?] = dense_row;
            }
            if let Some(missing) = xi.iter().position(Vec::is_empty) {
                return Err(invalid(format!("{path}/{}", space.label(missing)), "missing row"));
            }
            responses.insert(meas.clone(), ResponseFunction::new(outcomes, xi));
        }
        OntologicalModel::new(space, preparations, transitions, responses, tol)
    }

    pub fn from_json_str(text: &str, tol: &Tolerances) -> Result<(Self, Option<serde_json::Value>)> {
        let mut doc: ModelDoc = crate::scenario::parse_json_with_path(text)?;
        let scenario = doc.scenario.take();
        Ok((Self::from_doc(doc, tol)?, scenario))
    }
}

/// On-disk form of a model. Only nonzero probabilities are listed. The
/// optional `scenario` holds either a scenario document or a builder tag.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    pub ontic_states: Vec<String>,
    #[serde(default)]
    pub preparations: IndexMap<String, IndexMap<String, f64>>,
    #[serde(default)]
    pub transitions: IndexMap<String, IndexMap<String, IndexMap<String, f64>>>,
    #[serde(default)]
    pub responses: IndexMap<String, IndexMap<String, IndexMap<String, f64>>>,
    /// Outcome order per measurement; otherwise the order of first mention.
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub outcomes: IndexMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<serde_json::Value>,
}

/// States in the support of `preparation` that can produce `outcome` when
/// `member` is applied before `measurement`.
pub fn outcome_support(
    model: &OntologicalModel,
    preparation: &str,
    member: &str,
    measurement: &str,
    outcome: &str,
) -> Result<OnticSet> {
    let support = model.support(preparation)?;
    let transition = model.transition(member)?;
    let productive = model.response(measurement)?.possible_states(outcome);
    let n = model.space.size();
    Ok(OnticSet::from_indices(
        n,
        support
            .iter()
            .filter(|&l| !transition.successors(l).intersection(&productive).is_empty()),
    ))
}

pub fn supports_overlap(model: &OntologicalModel, a: &str, b: &str) -> Result<OnticSet> {
    Ok(model.support(a)?.intersection(&model.support(b)?))
}

/// ψ-epistemic iff some pair of distinct preparations has overlapping
/// supports. The witness is the first such pair in declaration order.
pub fn classify_model(model: &OntologicalModel) -> Classification {
    let supports: Vec<(&String, OnticSet)> = model
        .preparations
        .iter()
        .map(|(name, e)| (name, e.support()))
        .collect();
    for (i, (a, sa)) in supports.iter().enumerate() {
        for (b, sb) in &supports[i + 1..] {
            let overlap = sa.intersection(sb);
            if !overlap.is_empty() {
                return Classification::PsiEpistemic {
                    first: (*a).clone(),
                    second: (*b).clone(),
                    overlap: model.space.labels_of(&overlap),
                };
            }
        }
    }
    Classification::PsiOntic
}

/// Compares the model's possibilistic predictions with the quantum zero
/// structure for every preparation, member, measurement and outcome of the
/// scenario. An empty list means the model is possibilistically complete.
pub fn check_possibilistic_completeness(
    model: &OntologicalModel,
    scenario: &QuantumScenario,
    tol: &Tolerances,
) -> Result<Vec<CompletenessViolation>> {
    let zeros = zero_structure(scenario, tol)?;
    let mut violations = Vec::new();
    for prep in scenario.preparations().keys() {
        for member in scenario.member_ids() {
            for (meas, m) in scenario.measurements() {
                for outcome in &m.outcomes {
                    let possible = !outcome_support(model, prep, &member, meas, outcome)?.is_empty();
                    let quantum_zero = zeros.contains(prep, &member, meas, outcome);
                    let direction = match (quantum_zero, possible) {
                        (true, true) => ViolationDirection::ModelAllowsQuantumZero,
                        (false, false) => ViolationDirection::ModelForbidsQuantumPossible,
                        _ => continue,
                    };
                    violations.push(CompletenessViolation {
                        preparation: prep.clone(),
                        member: member.clone(),
                        measurement: meas.clone(),
                        outcome: outcome.clone(),
                        direction,
                    });
                }
            }
        }
    }
    Ok(violations)
}

/// Does the model implement `member` without disturbing the ontic states in
/// the support of `preparation`?
///
/// Only applicable when the member leaves the preparation's quantum state
/// unchanged up to a global phase.
pub fn check_ontic_indifference(
    model: &OntologicalModel,
    scenario: &QuantumScenario,
    member: &str,
    preparation: &str,
    mode: IndifferenceMode,
    tol: &Tolerances,
) -> Result<IndifferenceVerdict> {
    if !scenario.member_fixes(member, preparation, tol)? {
        return Err(OntologyError::PreconditionNotApplicable {
            member: member.to_owned(),
            preparation: preparation.to_owned(),
        });
    }
    let support = model.support(preparation)?;
    let transition = model.transition(member)?;
    let violation = |l: usize| IndifferenceVerdict::Violation {
        lambda: model.space.label(l).to_owned(),
    };
    match mode {
        IndifferenceMode::Pointwise => {
            let n = model.space.size();
            for l in support.iter() {
                if transition.successors(l) != OnticSet::from_indices(n, [l]) {
                    return Ok(violation(l));
                }
            }
        }
        IndifferenceMode::SetPreservingOnly => {
            for l in support.iter() {
                if !transition.successors(l).is_subset(&support) {
                    return Ok(violation(l));
                }
            }
            if let Some(l) = support.difference(&transition.image(&support)).first() {
                return Ok(violation(l));
            }
        }
    }
    Ok(IndifferenceVerdict::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{CMatrix, CVector};
    use crate::scenario::Measurement;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// One λ per preparation, deterministic responses.
    fn psi_ontic_model() -> OntologicalModel {
        let space = OnticSpace::numbered("l", 2);
        let preparations = [
            ("zero".to_owned(), EpistemicState::uniform(2, &[0])),
            ("one".to_owned(), EpistemicState::uniform(2, &[1])),
        ]
        .into_iter()
        .collect();
        let responses = [(
            "Z".to_owned(),
            ResponseFunction::uniform_over(vec!["0".into(), "1".into()], &[vec![0], vec![1]]),
        )]
        .into_iter()
        .collect();
        OntologicalModel::new(space, preparations, IndexMap::new(), responses, &tol()).unwrap()
    }

    fn qubit_scenario() -> QuantumScenario {
        QuantumScenario::builder(2)
            .preparation("zero", CVector::basis(2, 0))
            .preparation("one", CVector::basis(2, 1))
            .family(
                "gates",
                [("id", CMatrix::identity(2)), ("x", CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]))],
            )
            .measurement("Z", Measurement::standard(vec!["0".into(), "1".into()]))
            .build(&tol())
            .unwrap()
    }

    #[test]
    fn one_state_per_preparation_is_psi_ontic() {
        let m = psi_ontic_model();
        assert_eq!(classify_model(&m), Classification::PsiOntic);
        assert!(supports_overlap(&m, "zero", "one").unwrap().is_empty());
        assert_eq!(supports_overlap(&m, "zero", "zero").unwrap(), m.support("zero").unwrap());
    }

    #[test]
    fn never_produced_outcome_has_empty_support() {
        let m = psi_ontic_model();
        assert!(outcome_support(&m, "zero", "id", "Z", "1").unwrap().is_empty());
        assert!(outcome_support(&m, "zero", "id", "Z", "never").unwrap().is_empty());
    }

    #[test]
    fn completeness_reports_missing_transition() {
        let err = check_possibilistic_completeness(&psi_ontic_model(), &qubit_scenario(), &tol())
            .unwrap_err();
        assert!(matches!(err, OntologyError::UnknownName { kind: "transition", .. }));
    }

    #[test]
    fn completeness_and_directions() {
        let mut m = psi_ontic_model();
        m.transitions.insert("x".into(), TransitionMap::from_function(&[1, 0]));
        assert!(check_possibilistic_completeness(&m, &qubit_scenario(), &tol())
            .unwrap()
            .is_empty());
        // X implemented as the identity: both directions fail.
        m.transitions.insert("x".into(), TransitionMap::identity(2));
        let v = check_possibilistic_completeness(&m, &qubit_scenario(), &tol()).unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.iter().any(|x| x.direction == ViolationDirection::ModelAllowsQuantumZero));
        assert!(v.iter().any(|x| x.direction == ViolationDirection::ModelForbidsQuantumPossible));
    }

    #[test]
    fn empty_scenario_is_trivially_complete() {
        let s = QuantumScenario::builder(2).build(&tol()).unwrap();
        assert!(check_possibilistic_completeness(&psi_ontic_model(), &s, &tol())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn indifference_identity_ok_and_precondition() {
        let m = psi_ontic_model();
        let s = qubit_scenario();
        for prep in ["zero", "one"] {
            for mode in [IndifferenceMode::Pointwise, IndifferenceMode::SetPreservingOnly] {
                assert_eq!(
                    check_ontic_indifference(&m, &s, "id", prep, mode, &tol()).unwrap(),
                    IndifferenceVerdict::Ok
                );
            }
        }
        let err = check_ontic_indifference(&m, &s, "x", "zero", IndifferenceMode::Pointwise, &tol())
            .unwrap_err();
        assert!(matches!(err, OntologyError::PreconditionNotApplicable { .. }));
    }

    #[test]
    fn doc_round_trip_and_validation() {
        let m = psi_ontic_model();
        let text = serde_json::to_string(&m.to_doc()).unwrap();
        let (back, scenario) = OntologicalModel::from_json_str(&text, &tol()).unwrap();
        assert_eq!(back, m);
        assert!(scenario.is_none());

        let bad = r#"{"ontic_states": ["a", "b"], "preparations": {"p": {"a": 0.5}}}"#;
        let err = OntologicalModel::from_json_str(bad, &tol()).unwrap_err();
        assert!(err.to_string().starts_with("/preparations/p"), "{err}");
        let bad = r#"{"ontic_states": ["a"], "preparations": {"p": {"zz": 1.0}}}"#;
        let err = OntologicalModel::from_json_str(bad, &tol()).unwrap_err();
        assert!(err.to_string().starts_with("/preparations/p/zz"), "{err}");
        let bad = r#"{"ontic_states": ["a", "a"]}"#;
        assert!(OntologicalModel::from_json_str(bad, &tol()).is_err());
    }

    #[test]
    fn validate_against_checks_outcomes() {
        let mut m = psi_ontic_model();
        m.validate_against(&qubit_scenario()).unwrap();
        m.responses.insert(
            "Z".into(),
            ResponseFunction::uniform_over(vec!["0".into(), "2".into()], &[vec![0], vec![1]]),
        );
        assert!(m.validate_against(&qubit_scenario()).is_err());
    }
}
