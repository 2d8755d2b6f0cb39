//! Proof traces for non-overlap and their independent checker.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::expr::{entails, parse_assertion, Assertion, Atom, Entailment, Relation, SetExpr};
use super::NogoError;
use crate::numerics::{CMatrix, Tolerances};
use crate::scenario::{zero_structure, QuantumScenario, ZeroStructure};

pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// `Λ[p|o@m] = ∅` where the Born probability vanishes.
    QuantumZero,
    /// `Λ[p|o@m] = Λ[p|o]` for members that fix `p`.
    OnticIndifference,
    /// As above, only for the distinguished zero state.
    RestrictedOnticIndifference,
    /// `Λ[p|o@m] = Λ[p|o]` transported from the zero state through a fixed
    /// evolution `W` with `m = t·W`.
    Evolution,
    /// `Λ[p|o@m] ∩ Λ[q] = ∅` from `Λ[q|o@m] = ∅`.
    PossibilisticCompleteness,
    /// `Λ[p] = ⋃_o Λ[p|o]` over all outcomes of one measurement.
    OutcomeCoverage,
    /// Boolean consequence of the referenced steps.
    SetAlgebra,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::QuantumZero,
        Rule::OnticIndifference,
        Rule::RestrictedOnticIndifference,
        Rule::Evolution,
        Rule::PossibilisticCompleteness,
        Rule::OutcomeCoverage,
        Rule::SetAlgebra,
    ];

    fn collapses(self) -> bool {
        matches!(self, Rule::OnticIndifference | Rule::RestrictedOnticIndifference | Rule::Evolution)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Plain,
    Restricted,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "plain" => Ok(Variant::Plain),
            "restricted" => Ok(Variant::Restricted),
            _ => Err(format!("unknown variant `{s}` (plain, restricted)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    #[serde(rename = "assert")]
    pub assertion: String,
    pub rule: Rule,
    #[serde(default)]
    pub refs: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DisjunctKind {
    /// The outcome is impossible for `φ` itself.
    First,
    /// The outcome is impossible for the evolved `ψ`.
    Second,
}

/// Which disjunct the derivation used for an outcome, and under which member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub outcome: String,
    pub disjunct: DisjunctKind,
    pub member: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTrace {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_state: Option<String>,
    pub steps: Vec<Step>,
    pub conclusion: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub branches: Vec<Branch>,
}

fn default_schema() -> u32 {
    TRACE_SCHEMA_VERSION
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureSite {
    Step(usize),
    Conclusion,
}

/// The first step (or the conclusion) the checker could not license.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckFailure {
    pub site: FailureSite,
    pub reason: String,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.site {
            FailureSite::Step(i) => write!(f, "step {i}: {}", self.reason),
            FailureSite::Conclusion => write!(f, "conclusion: {}", self.reason),
        }
    }
}

impl std::error::Error for CheckFailure {}

/// A checked trace establishes `Λ[first] ∩ Λ[second] = ∅`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceVerdict {
    pub steps: usize,
    pub first: String,
    pub second: String,
}

struct Checker<'a> {
    scenario: &'a QuantumScenario,
    tol: &'a Tolerances,
    zeros: &'a ZeroStructure,
    variant: Variant,
    zero_state: Option<&'a str>,
    parsed: Vec<Assertion>,
    rules: Vec<Rule>,
    anchors: HashMap<String, String>,
    evolutions: HashMap<String, CMatrix>,
}

type Check = Result<(), String>;

fn context_parts(e: &SetExpr) -> Option<(&str, &str, &str)> {
    match e.as_atom()? {
        Atom::Context { prep, outcome, member } => Some((prep, outcome, member)),
        _ => None,
    }
}

fn collapsed_parts(e: &SetExpr) -> Option<(&str, &str)> {
    match e.as_atom()? {
        Atom::Collapsed { prep, outcome } => Some((prep, outcome)),
        _ => None,
    }
}

impl<'a> Checker<'a> {
    fn measurement_of(&self, outcome: &str) -> Result<String, String> {
        let hits: Vec<&String> = self
            .scenario
            .measurements()
            .iter()
            .filter(|(_, m)| m.outcome_index(outcome).is_some())
            .map(|(name, _)| name)
            .collect();
        match hits.as_slice() {
            [one] => Ok((*one).clone()),
            [] => Err(format!("unknown outcome `{outcome}`")),
            _ => Err(format!("outcome `{outcome}` is ambiguous across measurements")),
        }
    }

    fn member(&self, id: &str) -> Result<CMatrix, String> {
        self.scenario.member(id).map_err(|e| e.to_string())
    }

    fn known_prep(&self, p: &str) -> Check {
        self.scenario.preparation(p).map(|_| ()).map_err(|e| e.to_string())
    }

    /// Does `u` map preparation `p` onto the ray of preparation `q`?
    fn maps_ray(&self, u: &CMatrix, p: &str, q: &str) -> Result<bool, String> {
        let from = self.scenario.preparation(p).map_err(|e| e.to_string())?;
        let to = self.scenario.preparation(q).map_err(|e| e.to_string())?;
        let image = u.mul_vec(from).map_err(|e| e.to_string())?;
        Ok(image.same_ray(to, self.tol.zero))
    }

    /// All collapses of `p` must differ from the first one by a unitary,
    /// applied first, that fixes `p`.
    fn anchor_check(&mut self, p: &str, m: &str) -> Check {
        let anchor = self.anchors.entry(p.to_owned()).or_insert_with(|| m.to_owned()).clone();
        let relative = &self.member(&anchor)?.adjoint() * &self.member(m)?;
        if self.maps_ray(&relative, p, p)? {
            Ok(())
        } else {
            Err(format!("`{m}` does not act like `{anchor}` on `{p}`; the collapse is not licensed"))
        }
    }

    fn collapse_form<'e>(&self, a: &'e Assertion) -> Result<(&'e str, &'e str, &'e str), String> {
        let (p, o, m) = context_parts(&a.lhs).ok_or("left side must be a context atom Λ[p|o@m]")?;
        let (p2, o2) = collapsed_parts(&a.rhs).ok_or("right side must be a collapsed atom Λ[p|o]")?;
        if a.rel != Relation::Eq || p != p2 || o != o2 {
            return Err("expected Λ[p|o@m] = Λ[p|o] with matching p and o".into());
        }
        self.known_prep(p)?;
        self.measurement_of(o)?;
        self.member(m)?;
        Ok((p, o, m))
    }

    fn check_step(&mut self, index: usize, step: &Step, a: &Assertion) -> Check {
        for &r in &step.refs {
            if r >= index {
                return Err(format!("reference {r} does not point to an earlier step"));
            }
        }
        let no_refs = |what: &str| -> Check {
            if step.refs.is_empty() {
                Ok(())
            } else {
                Err(format!("{what} takes no references"))
            }
        };
        match step.rule {
            Rule::QuantumZero => {
                no_refs("QuantumZero")?;
                let (p, o, m) = context_parts(&a.lhs).ok_or("expected Λ[p|o@m] = ∅")?;
                if a.rel != Relation::Eq || a.rhs != SetExpr::Empty {
                    return Err("expected Λ[p|o@m] = ∅".into());
                }
                self.known_prep(p)?;
                self.member(m)?;
                let meas = self.measurement_of(o)?;
                if self.zeros.contains(p, m, &meas, o) {
                    Ok(())
                } else {
                    Err(format!("outcome `{o}` of `{meas}` is possible for `{p}` after `{m}`"))
                }
            }
            Rule::OnticIndifference => {
                no_refs("OnticIndifference")?;
                if self.variant == Variant::Restricted {
                    return Err("unrestricted ontic indifference is not available in the restricted variant".into());
                }
                let (p, _, m) = self.collapse_form(a)?;
                if !self.maps_ray(&self.member(m)?, p, p)? {
                    return Err(format!("`{m}` does not leave `{p}` unchanged"));
                }
                self.anchor_check(p, m)
            }
            Rule::RestrictedOnticIndifference => {
                no_refs("RestrictedOnticIndifference")?;
                let (p, _, m) = self.collapse_form(a)?;
                if Some(p) != self.zero_state {
                    return Err(format!("`{p}` is not the declared zero state"));
                }
                self.anchor_check(p, m)
            }
            Rule::Evolution => {
                if self.variant != Variant::Restricted {
                    return Err("Evolution is only used in the restricted variant".into());
                }
                let (p, o, m) = self.collapse_form(a)?;
                let z = self.zero_state.ok_or("no zero state declared")?;
                if p == z {
                    return Err("the zero state is collapsed by RestrictedOnticIndifference".into());
                }
                let [r] = step.refs.as_slice() else {
                    return Err("Evolution takes exactly one reference".into());
                };
                if self.rules[*r] != Rule::RestrictedOnticIndifference {
                    return Err(format!("step {r} is not a RestrictedOnticIndifference step"));
                }
                let prior = self.parsed[*r].clone();
                let (zp, zo, t) = self.collapse_form(&prior)?;
                let (zp, zo, t) = (zp.to_owned(), zo.to_owned(), t.to_owned());
                if zp != z || zo != o {
                    return Err(format!("step {r} does not collapse Λ[{z}|{o}]"));
                }
                let w = &self.member(&t)?.adjoint() * &self.member(m)?;
                if !self.maps_ray(&w, p, z)? {
                    return Err(format!("`{m}` is not `{t}` preceded by an evolution taking `{p}` to `{z}`"));
                }
                match self.evolutions.get(p) {
                    Some(w0) if w0.max_abs_diff(&w) > self.tol.unitary => {
                        Err(format!("evolution for `{p}` differs from the one used earlier"))
                    }
                    Some(_) => Ok(()),
                    None => {
                        self.evolutions.insert(p.to_owned(), w);
                        Ok(())
                    }
                }
            }
            Rule::PossibilisticCompleteness => {
                let form = "expected Λ[p|o@m] ∩ Λ[q] = ∅";
                let SetExpr::Inter(parts) = &a.lhs else { return Err(form.into()) };
                if parts.len() != 2 || a.rel != Relation::Eq || a.rhs != SetExpr::Empty {
                    return Err(form.into());
                }
                let (ctx, q) = match (parts[0].as_atom(), parts[1].as_atom()) {
                    (Some(c @ Atom::Context { .. }), Some(Atom::Support { prep })) => (c, prep),
                    (Some(Atom::Support { prep }), Some(c @ Atom::Context { .. })) => (c, prep),
                    _ => return Err(form.into()),
                };
                let Atom::Context { outcome, member, .. } = ctx else { unreachable!() };
                let [r] = step.refs.as_slice() else {
                    return Err("PossibilisticCompleteness takes exactly one reference".into());
                };
                let needed = Assertion::eq(SetExpr::Atom(Atom::context(q, outcome, member)), SetExpr::Empty);
                if self.parsed[*r] == needed {
                    Ok(())
                } else {
                    Err(format!("step {r} does not establish {needed}"))
                }
            }
            Rule::OutcomeCoverage => {
                let p = match a.lhs.as_atom() {
                    Some(Atom::Support { prep }) if a.rel == Relation::Eq => prep,
                    _ => return Err("expected Λ[p] = ⋃ ...".into()),
                };
                let parts: Vec<&SetExpr> = match &a.rhs {
                    SetExpr::Union(xs) => xs.iter().collect(),
                    x @ SetExpr::Atom(_) => vec![x],
                    _ => return Err("right side must be a union of atoms".into()),
                };
                let mut outcomes = Vec::new();
                let mut context_member: Option<&str> = None;
                let mut collapsed = 0;
                for x in &parts {
                    if let Some((q, o, m)) = context_parts(x) {
                        if context_member.is_some_and(|cm| cm != m) {
                            return Err("all context atoms must share one member".into());
                        }
                        context_member = Some(m);
                        self.member(m)?;
                        if q != p {
                            return Err(format!("atom for `{q}` in coverage of `{p}`"));
                        }
                        outcomes.push(o);
                    } else if let Some((q, o)) = collapsed_parts(x) {
                        collapsed += 1;
                        if q != p {
                            return Err(format!("atom for `{q}` in coverage of `{p}`"));
                        }
                        outcomes.push(o);
                    } else {
                        return Err("right side must be a union of atoms".into());
                    }
                }
                if collapsed > 0 && context_member.is_some() {
                    return Err("cannot mix collapsed and context atoms".into());
                }
                let meas = self.measurement_of(outcomes[0])?;
                for o in &outcomes {
                    if self.measurement_of(o)? != meas {
                        return Err("outcomes come from different measurements".into());
                    }
                }
                let declared = &self.scenario.measurement(&meas).map_err(|e| e.to_string())?.outcomes;
                let mut sorted: Vec<&str> = outcomes.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != outcomes.len() || sorted.len() != declared.len() {
                    return Err(format!("outcomes must cover `{meas}` exactly once each"));
                }
                if collapsed == 0 {
                    return no_refs("coverage over one context");
                }
                if step.refs.len() != outcomes.len() {
                    return Err("one collapse reference per outcome is required".into());
                }
                let mut covered: Vec<&str> = Vec::new();
                for &r in &step.refs {
                    if !self.rules[r].collapses() {
                        return Err(format!("step {r} is not a collapse step"));
                    }
                    match collapsed_parts(&self.parsed[r].rhs) {
                        Some((q, o)) if q == p && outcomes.contains(&o) && !covered.contains(&o) => covered.push(o),
                        _ => return Err(format!("step {r} does not collapse a distinct outcome of `{p}`")),
                    }
                }
                Ok(())
            }
            Rule::SetAlgebra => {
                let mut premises: Vec<Assertion> = step.refs.iter().map(|&r| self.parsed[r].clone()).collect();
                let mut atoms = a.atoms();
                for p in &premises {
                    atoms.extend(p.atoms());
                }
                for atom in atoms {
                    if !matches!(atom, Atom::Support { .. }) {
                        let prep = atom.prep().to_owned();
                        premises.push(Assertion {
                            lhs: SetExpr::Atom(atom),
                            rel: Relation::Subset,
                            rhs: SetExpr::Atom(Atom::Support { prep }),
                        });
                    }
                }
                match entails(&premises, a) {
                    Entailment::Valid => Ok(()),
                    Entailment::Invalid => Err("not a consequence of the referenced steps".into()),
                    Entailment::TooManyAtoms(k) => Err(format!("{k} atoms exceed the set-algebra limit")),
                    Entailment::NotAnEquation => Err("set algebra only derives = and ⊆".into()),
                }
            }
        }
    }
}

/// Validates every step against its rule, using only earlier steps and the
/// scenario's zero structure, then checks the conclusion.
pub fn check_trace(
    trace: &ProofTrace,
    scenario: &QuantumScenario,
    tol: &Tolerances,
) -> Result<Result<TraceVerdict, CheckFailure>, NogoError> {
    let zeros = zero_structure(scenario, tol)?;
    Ok(check_with_zeros(trace, scenario, &zeros, tol))
}

fn check_with_zeros(
    trace: &ProofTrace,
    scenario: &QuantumScenario,
    zeros: &ZeroStructure,
    tol: &Tolerances,
) -> Result<TraceVerdict, CheckFailure> {
    let mut checker = Checker {
        scenario,
        tol,
        zeros,
        variant: trace.variant,
        zero_state: trace.zero_state.as_deref(),
        parsed: Vec::new(),
        rules: Vec::new(),
        anchors: HashMap::new(),
        evolutions: HashMap::new(),
    };
    if let Some(z) = checker.zero_state {
        if scenario.preparation(z).is_err() {
            return Err(CheckFailure {
                site: FailureSite::Conclusion,
                reason: format!("declared zero state `{z}` is not a preparation"),
            });
        }
    }
    for (i, step) in trace.steps.iter().enumerate() {
        let fail = |reason: String| CheckFailure { site: FailureSite::Step(i), reason };
        let a = parse_assertion(&step.assertion).map_err(|e| fail(format!("parse error {e}")))?;
        checker.check_step(i, step, &a).map_err(fail)?;
        checker.parsed.push(a);
        checker.rules.push(step.rule);
    }
    let fail = |reason: &str| CheckFailure { site: FailureSite::Conclusion, reason: reason.to_owned() };
    let c = parse_assertion(&trace.conclusion).map_err(|e| fail(&format!("parse error {e}")))?;
    let form = "conclusion must read Λ[a] ∩ Λ[b] = ∅ for two distinct preparations";
    let (first, second) = match (&c.lhs, c.rel, &c.rhs) {
        (SetExpr::Inter(xs), Relation::Eq, SetExpr::Empty) if xs.len() == 2 => {
            match (xs[0].as_atom(), xs[1].as_atom()) {
                (Some(Atom::Support { prep: a }), Some(Atom::Support { prep: b })) if a != b => (a.clone(), b.clone()),
                _ => return Err(fail(form)),
            }
        }
        _ => return Err(fail(form)),
    };
    if checker.parsed.last() != Some(&c) {
        return Err(fail("conclusion is not the final proven step"));
    }
    Ok(TraceVerdict { steps: trace.steps.len(), first, second })
}

/// What to derive: `Λ[phi] ∩ Λ[psi] = ∅` using outcomes of `measurement`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationRequest {
    pub phi: String,
    pub psi: String,
    #[serde(default)]
    pub measurement: Option<String>,
    #[serde(default)]
    pub variant: Variant,
    /// Zero state for the restricted variant; defaults to `"zero"`.
    #[serde(default)]
    pub zero_state: Option<String>,
}

impl DerivationRequest {
    pub fn new(phi: &str, psi: &str) -> Self {
        DerivationRequest {
            phi: phi.to_owned(),
            psi: psi.to_owned(),
            measurement: None,
            variant: Variant::Plain,
            zero_state: None,
        }
    }

    pub fn restricted(mut self, zero_state: &str) -> Self {
        self.variant = Variant::Restricted;
        self.zero_state = Some(zero_state.to_owned());
        self
    }
}

struct Builder {
    steps: Vec<Step>,
}

impl Builder {
    fn push(&mut self, a: Assertion, rule: Rule, refs: Vec<usize>) -> usize {
        self.steps.push(Step { assertion: a.to_string(), rule, refs });
        self.steps.len() - 1
    }
}

fn ctx(p: &str, o: &str, m: &str) -> SetExpr {
    SetExpr::Atom(Atom::context(p, o, m))
}

fn col(p: &str, o: &str) -> SetExpr {
    SetExpr::Atom(Atom::collapsed(p, o))
}

fn sup(p: &str) -> SetExpr {
    SetExpr::Atom(Atom::support(p))
}

/// Replays the non-overlap argument on `scenario`: collapse the member
/// index, cover `Λ_φ` by outcomes, empty each piece against `Λ_ψ`, and
/// distribute. The result is run through [`check_trace`] before returning.
pub fn derive_nonoverlap(
    scenario: &QuantumScenario,
    request: &DerivationRequest,
    tol: &Tolerances,
) -> Result<ProofTrace, NogoError> {
    let (phi, psi) = (request.phi.as_str(), request.psi.as_str());
    scenario.preparation(phi)?;
    scenario.preparation(psi)?;
    if phi == psi {
        return Err(NogoError::InvalidRequest("the two preparations must differ".into()));
    }
    let meas = match &request.measurement {
        Some(m) => m.clone(),
        None => {
            // Use the first measurement for which the argument goes through.
            let mut last = None;
            for name in scenario.measurements().keys() {
                let mut r = request.clone();
                r.measurement = Some(name.clone());
                match derive_nonoverlap(scenario, &r, tol) {
                    Err(e @ NogoError::ConditionNotMet { .. }) => last = Some(e),
                    other => return other,
                }
            }
            return Err(last.unwrap_or_else(|| NogoError::InvalidRequest("the scenario has no measurement".into())));
        }
    };
    let outcomes = scenario.measurement(&meas)?.outcomes.clone();
    let zeros = zero_structure(scenario, tol)?;
    let members = scenario.member_ids();
    let mut b = Builder { steps: Vec::new() };
    let mut collapse_refs = Vec::new();
    let mut empties = Vec::new();
    let mut branches = Vec::new();

    let zero_state = match request.variant {
        Variant::Plain => None,
        Variant::Restricted => {
            let z = request.zero_state.clone().unwrap_or_else(|| "zero".to_owned());
            scenario.preparation(&z)?;
            if z == phi || z == psi {
                return Err(NogoError::InvalidRequest("the zero state must be a separate preparation".into()));
            }
            Some(z)
        }
    };

    match &zero_state {
        None => {
            let mut fixing = Vec::new();
            for m in &members {
                if scenario.member_fixes(m, phi, tol)? {
                    fixing.push(m.clone());
                }
            }
            for o in &outcomes {
                let find = |p: &str| fixing.iter().find(|m| zeros.contains(p, m, &meas, o)).cloned();
                let (kind, m) = match (find(phi), find(psi)) {
                    (Some(m), _) => (DisjunctKind::First, m),
                    (None, Some(m)) => (DisjunctKind::Second, m),
                    (None, None) => return Err(NogoError::ConditionNotMet { outcome: o.clone() }),
                };
                branches.push(Branch { outcome: o.clone(), disjunct: kind, member: m.clone() });
                let target = col(phi, o);
                let goal = Assertion::eq(SetExpr::Inter(vec![target.clone(), sup(psi)]), SetExpr::Empty);
                match kind {
                    DisjunctKind::First => {
                        let qz = b.push(Assertion::eq(ctx(phi, o, &m), SetExpr::Empty), Rule::QuantumZero, vec![]);
                        let oi = b.push(Assertion::eq(ctx(phi, o, &m), target), Rule::OnticIndifference, vec![]);
                        collapse_refs.push(oi);
                        empties.push(b.push(goal, Rule::SetAlgebra, vec![qz, oi]));
                    }
                    DisjunctKind::Second => {
                        let qz = b.push(Assertion::eq(ctx(psi, o, &m), SetExpr::Empty), Rule::QuantumZero, vec![]);
                        let oi = b.push(Assertion::eq(ctx(phi, o, &m), target), Rule::OnticIndifference, vec![]);
                        let pc = b.push(
                            Assertion::eq(SetExpr::Inter(vec![ctx(phi, o, &m), sup(psi)]), SetExpr::Empty),
                            Rule::PossibilisticCompleteness,
                            vec![qz],
                        );
                        collapse_refs.push(oi);
                        empties.push(b.push(goal, Rule::SetAlgebra, vec![oi, pc]));
                    }
                }
            }
        }
        Some(z) => {
            let state = |p: &str| scenario.preparation(p).cloned();
            let (phi_v, z_v) = (state(phi)?, state(z)?);
            let mats: Vec<(String, CMatrix)> =
                members.iter().map(|m| Ok((m.clone(), scenario.member(m)?))).collect::<Result<_, NogoError>>()?;
            let mut w_fixed: Option<CMatrix> = None;
            let mut anchor: Option<CMatrix> = None;
            for o in &outcomes {
                let mut found = None;
                'search: for kind in [DisjunctKind::First, DisjunctKind::Second] {
                    let p = if kind == DisjunctKind::First { phi } else { psi };
                    for (m, um) in &mats {
                        if !zeros.contains(p, m, &meas, o) {
                            continue;
                        }
                        for (t, ut) in &mats {
                            let w = &ut.adjoint() * um;
                            if !w.mul_vec(&phi_v)?.same_ray(&z_v, tol.zero) {
                                continue;
                            }
                            if w_fixed.as_ref().is_some_and(|w0| w0.max_abs_diff(&w) > tol.unitary) {
                                continue;
                            }
                            if let Some(a) = &anchor {
                                if !(&a.adjoint() * ut).mul_vec(&z_v)?.same_ray(&z_v, tol.zero) {
                                    continue;
                                }
                            }
                            found = Some((kind, m.clone(), t.clone(), w, ut.clone()));
                            break 'search;
                        }
                    }
                }
                let Some((kind, m, t, w, ut)) = found else {
                    return Err(NogoError::ConditionNotMet { outcome: o.clone() });
                };
                w_fixed.get_or_insert(w);
                anchor.get_or_insert(ut);
                branches.push(Branch { outcome: o.clone(), disjunct: kind, member: m.clone() });
                let target = col(phi, o);
                let goal = Assertion::eq(SetExpr::Inter(vec![target.clone(), sup(psi)]), SetExpr::Empty);
                let qz_prep = if kind == DisjunctKind::First { phi } else { psi };
                let qz = b.push(Assertion::eq(ctx(qz_prep, o, &m), SetExpr::Empty), Rule::QuantumZero, vec![]);
                let roi = b.push(Assertion::eq(ctx(z, o, &t), col(z, o)), Rule::RestrictedOnticIndifference, vec![]);
                let evo = b.push(Assertion::eq(ctx(phi, o, &m), target), Rule::Evolution, vec![roi]);
                collapse_refs.push(evo);
                let empty = match kind {
                    DisjunctKind::First => b.push(goal, Rule::SetAlgebra, vec![qz, evo]),
                    DisjunctKind::Second => {
                        let pc = b.push(
                            Assertion::eq(SetExpr::Inter(vec![ctx(phi, o, &m), sup(psi)]), SetExpr::Empty),
                            Rule::PossibilisticCompleteness,
                            vec![qz],
                        );
                        b.push(goal, Rule::SetAlgebra, vec![evo, pc])
                    }
                };
                empties.push(empty);
            }
        }
    }

    let cover = SetExpr::Union(outcomes.iter().map(|o| col(phi, o)).collect());
    let coverage = b.push(Assertion::eq(sup(phi), cover), Rule::OutcomeCoverage, collapse_refs);
    let conclusion = Assertion::eq(SetExpr::Inter(vec![sup(phi), sup(psi)]), SetExpr::Empty);
    let mut refs = vec![coverage];
    refs.extend(empties);
    b.push(conclusion.clone(), Rule::SetAlgebra, refs);
    let trace = ProofTrace {
        schema_version: TRACE_SCHEMA_VERSION,
        variant: request.variant,
        zero_state,
        steps: b.steps,
        conclusion: conclusion.to_string(),
        branches,
    };
    check_with_zeros(&trace, scenario, &zeros, tol).map_err(NogoError::Internal)?;
    Ok(trace)
}
