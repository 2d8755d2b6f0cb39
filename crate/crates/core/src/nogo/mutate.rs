//! Single-step corruptions of a proof trace. Every mutation listed here
//! breaks the step it touches, so a sound checker must reject each one.

use serde::{Deserialize, Serialize};

use super::expr::{parse_assertion, Atom, Relation, SetExpr};
use super::trace::{ProofTrace, Rule};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationKind {
    /// Justification replaced by a different rule.
    SwapRule { from: Rule, to: Rule },
    /// All references removed.
    DropRefs,
    /// One reference pointed at the step itself or a later step.
    ForwardRef { slot: usize, to: usize },
    /// `=` or `⊆` replaced by `≠`.
    Negate,
    /// An `∅` side replaced by the support of a preparation it mentions.
    EmptyToSupport,
    /// A non-empty right side replaced by `∅`.
    RhsToEmpty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mutation {
    pub step: usize,
    pub kind: MutationKind,
    pub trace: ProofTrace,
}

/// Every applicable single-step mutation of `trace`, in a fixed order.
/// Steps whose assertion does not parse are skipped.
pub fn mutations(trace: &ProofTrace) -> Vec<Mutation> {
    let mut out = Vec::new();
    let n = trace.steps.len();
    let mut push = |step: usize, kind: MutationKind, edit: &dyn Fn(&mut ProofTrace)| {
        let mut t = trace.clone();
        edit(&mut t);
        out.push(Mutation { step, kind, trace: t });
    };
    for (i, step) in trace.steps.iter().enumerate() {
        for &to in Rule::ALL.iter().filter(|&&r| r != step.rule) {
            push(i, MutationKind::SwapRule { from: step.rule, to }, &|t| t.steps[i].rule = to);
        }
        if !step.refs.is_empty() {
            push(i, MutationKind::DropRefs, &|t| t.steps[i].refs.clear());
            for slot in 0..step.refs.len() {
                for to in [i, (i + 1).min(n - 1).max(i)] {
                    push(i, MutationKind::ForwardRef { slot, to }, &|t| t.steps[i].refs[slot] = to);
                }
            }
        }
        let Ok(a) = parse_assertion(&step.assertion) else { continue };
        if a.rel != Relation::Neq {
            let mut b = a.clone();
            b.rel = Relation::Neq;
            let s = b.to_string();
            push(i, MutationKind::Negate, &|t| t.steps[i].assertion = s.clone());
        }
        let prep = a.atoms().first().map(|x| x.prep().to_owned());
        if let (SetExpr::Empty, Some(p)) = (&a.rhs, &prep) {
            let mut b = a.clone();
            b.rhs = SetExpr::Atom(Atom::support(p));
            let s = b.to_string();
            push(i, MutationKind::EmptyToSupport, &|t| t.steps[i].assertion = s.clone());
        }
        if a.rhs != SetExpr::Empty && step.rule != Rule::SetAlgebra {
            let mut b = a.clone();
            b.rhs = SetExpr::Empty;
            let s = b.to_string();
            push(i, MutationKind::RhsToEmpty, &|t| t.steps[i].assertion = s.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{build_construction, build_restricted_protocol};
    use crate::interfero::{build_mzi, MziConfig, Phase};
    use crate::nogo::trace::{check_trace, derive_nonoverlap, DerivationRequest};
    use crate::numerics::{CVector, Tolerances};
    use crate::scenario::QuantumScenario;

    fn cases() -> Vec<(QuantumScenario, ProofTrace)> {
        let tol = Tolerances::default();
        let mzi = build_mzi(&MziConfig::balanced(Phase::Zero), &tol).unwrap();
        let t = derive_nonoverlap(&mzi, &DerivationRequest::new("phi", "psi"), &tol).unwrap();
        let c = build_construction(0.5f64.sqrt(), 0.5f64.sqrt(), 2, &tol).unwrap();
        let cs = c.to_scenario(&tol).unwrap();
        let ct = derive_nonoverlap(&cs, &DerivationRequest::new("phi", "psi"), &tol).unwrap();
        let p = build_restricted_protocol(&c.a0, &CVector::basis(3, 0), &c, &tol).unwrap();
        let rs = p.to_scenario(&c, &tol).unwrap();
        let rt = derive_nonoverlap(&rs, &DerivationRequest::new("phi", "psi").restricted("zero"), &tol).unwrap();
        vec![(mzi, t), (cs, ct), (rs, rt)]
    }

    #[test]
    fn every_mutation_is_rejected() {
        let tol = Tolerances::default();
        for (scenario, trace) in cases() {
            let all = mutations(&trace);
            assert!(all.len() > 50);
            for m in all {
                let verdict = check_trace(&m.trace, &scenario, &tol).unwrap();
                assert!(verdict.is_err(), "accepted {:?} at step {}", m.kind, m.step);
            }
        }
    }
}
