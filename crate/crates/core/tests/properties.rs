use onticlab::builders::{resolve_builder, BUILDER_TAGS};
use onticlab::construction::{build_construction, smallest_m, verify_condition, HardyConstruction};
use onticlab::interfero::{build_mzi, MziConfig, Phase, PHI, PSI};
use onticlab::nogo::{
    check_trace, check_witness, derive_nonoverlap, feasibility_search, parse_assertion, Atom, Axiom,
    DerivationRequest, FeasibilityProblem, NogoError, ProofTrace, Relation, SearchOutcome, SetExpr,
};
use onticlab::ontology::{IndifferenceMode, OntologicalModel};
use onticlab::scenario::QuantumScenario;
use onticlab::toymodels::{martin_spekkens_mzi, spekkens_toy_bit};
use onticlab::Tolerances;
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn mzi() -> QuantumScenario {
    build_mzi(&MziConfig::balanced(Phase::Zero), &tol()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smallest_m_is_least_integer_with_m_beta2_at_least_one(beta2 in 0.01f64..1.0) {
        let m = smallest_m(beta2.sqrt()).unwrap();
        prop_assert!(m as f64 * beta2 >= 1.0 - 1e-9);
        prop_assert!(m == 1 || (m - 1) as f64 * beta2 < 1.0 + 1e-9);
    }

    #[test]
    fn feasible_constructions_certify(alpha2 in 0.01f64..0.95, extra in 0usize..3) {
        let beta = (1.0 - alpha2).sqrt();
        let n = smallest_m(beta).unwrap().max(2) + extra;
        let c = build_construction(alpha2.sqrt(), beta, n, &tol()).unwrap();
        prop_assert!(c.audit().worst() <= 1e-9);
        let cert = verify_condition(&c, &tol()).unwrap();
        prop_assert_eq!(cert.per_n.len(), n + 1);
        prop_assert!((c.a0.inner(&c.psi).norm_sqr() - alpha2).abs() <= 1e-9);
        prop_assert!(alpha2 <= cert.feasible_overlap_bound + 1e-9);
    }

    #[test]
    fn construction_json_round_trip(alpha2 in 0.05f64..0.5) {
        let c = build_construction(alpha2.sqrt(), (1.0 - alpha2).sqrt(), 2, &tol()).unwrap();
        let back: HardyConstruction = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert!(back.audit().worst() <= 1e-9);
        prop_assert_eq!(back.u.len(), c.u.len());
    }

    #[test]
    fn adding_axioms_keeps_unsat(mask in 0u8..16, k in 1usize..5) {
        let axioms: Vec<Axiom> = Axiom::ALL.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| *a).collect();
        let base = FeasibilityProblem::new(mzi(), PHI, PSI, k).with_axioms(axioms.clone());
        let sat = feasibility_search(&base, &tol()).unwrap().is_sat();
        let full = FeasibilityProblem::new(mzi(), PHI, PSI, k);
        if !sat {
            prop_assert!(!feasibility_search(&full, &tol()).unwrap().is_sat());
        }
        let open = base.overlap_required(false);
        if k >= 4 {
            prop_assert!(feasibility_search(&open, &tol()).unwrap().is_sat());
        }
    }
}

fn atom_strategy() -> impl Strategy<Value = Atom> {
    let name = prop::sample::select(vec!["phi", "psi", "a b", "x|y"]);
    let outcome = prop::sample::select(vec!["B1", "D0", "+"]);
    let member = prop::sample::select(vec!["m=1", "phi=pi", "id"]);
    prop_oneof![
        name.clone().prop_map(Atom::support),
        (name.clone(), outcome.clone(), member).prop_map(|(p, o, m)| Atom::context(p, o, m)),
        (name, outcome).prop_map(|(p, o)| Atom::collapsed(p, o)),
    ]
}

fn expr_strategy() -> impl Strategy<Value = SetExpr> {
    let leaf = prop_oneof![Just(SetExpr::Empty), atom_strategy().prop_map(SetExpr::Atom)];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(SetExpr::Inter),
            prop::collection::vec(inner, 2..4).prop_map(SetExpr::Union),
        ]
    })
}

proptest! {
    #[test]
    fn assertions_print_and_parse_back(lhs in expr_strategy(), rhs in expr_strategy(), rel in 0u8..3) {
        let rel = [Relation::Eq, Relation::Subset, Relation::Neq][rel as usize];
        let a = onticlab::nogo::Assertion { lhs, rel, rhs };
        let back = parse_assertion(&a.to_string()).unwrap();
        prop_assert_eq!(back.to_string(), a.to_string());
    }
}

#[test]
fn search_and_derivation_agree_on_every_builder() {
    for tag in BUILDER_TAGS {
        let inst = resolve_builder(tag, &tol()).unwrap();
        let mut req = DerivationRequest::new(&inst.phi, &inst.psi);
        if let Some(z) = &inst.zero_state {
            req = req.restricted(z);
        }
        let derived = match derive_nonoverlap(&inst.scenario, &req, &tol()) {
            Ok(t) => {
                assert!(check_trace(&t, &inst.scenario, &tol()).unwrap().is_ok());
                true
            }
            Err(NogoError::ConditionNotMet { .. }) => false,
            Err(e) => panic!("{tag}: {e}"),
        };
        for k in 1..=4 {
            let p = FeasibilityProblem::new(inst.scenario.clone(), &inst.phi, &inst.psi, k);
            let out = feasibility_search(&p, &tol()).unwrap();
            if derived {
                assert!(!out.is_sat(), "{tag}: trace checks but search found a model at K = {k}");
            }
        }
    }
}

#[test]
fn toy_bit_is_reachable_with_set_preserving_indifference() {
    let inst = resolve_builder("toybit", &tol()).unwrap();
    let strict = FeasibilityProblem::new(inst.scenario.clone(), &inst.phi, &inst.psi, 4);
    assert!(!feasibility_search(&strict, &tol()).unwrap().is_sat());
    let loose = strict.mode(IndifferenceMode::SetPreservingOnly);
    let SearchOutcome::Sat(sat) = feasibility_search(&loose, &tol()).unwrap() else {
        panic!("set-preserving indifference admits the toy bit")
    };
    let check = check_witness(&loose, &sat.witness, &tol()).unwrap();
    assert!(check.completeness_violations.is_empty() && check.indifference_violations.is_empty());
    assert!(check.classification.is_epistemic());
}

#[test]
fn witnesses_violate_exactly_the_dropped_axiom() {
    let s = build_construction(0.5f64.sqrt(), 0.5f64.sqrt(), 2, &tol()).unwrap().to_scenario(&tol()).unwrap();
    let p = FeasibilityProblem::new(s, "phi", "psi", 5).without(Axiom::OnticIndifference);
    let SearchOutcome::Sat(sat) = feasibility_search(&p, &tol()).unwrap() else { panic!("expected Sat") };
    let check = check_witness(&p, &sat.witness, &tol()).unwrap();
    assert!(check.completeness_violations.is_empty());
    assert!(!check.indifference_violations.is_empty());
    assert!(check.consistent_with(&p));
    let doc = serde_json::to_string(&sat.witness.to_doc()).unwrap();
    let (back, _) = OntologicalModel::from_json_str(&doc, &tol()).unwrap();
    assert_eq!(back, sat.witness);
}

#[test]
fn trace_json_is_stable() {
    let t = derive_nonoverlap(&mzi(), &DerivationRequest::new(PHI, PSI), &tol()).unwrap();
    let text = serde_json::to_string_pretty(&t).unwrap();
    let back: ProofTrace = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
    assert!(serde_json::from_str::<ProofTrace>(&text.replacen("\"rule\"", "\"rul\"", 1)).is_err());
}

#[test]
fn shipped_models_round_trip() {
    for model in [spekkens_toy_bit().model, martin_spekkens_mzi().model] {
        let doc = serde_json::to_value(model.to_doc()).unwrap();
        let (back, _) = OntologicalModel::from_json_str(&doc.to_string(), &tol()).unwrap();
        assert_eq!(back, model);
    }
}
