//! Two ψ-epistemic models that evade the no-go by violating ontic
//! indifference: the Spekkens toy bit and a field model of the
//! interferometer in which every path carries a phase variable.

use indexmap::IndexMap;

use crate::interfero::{self, MziConfig, Phase};
use crate::numerics::{CMatrix, CVector, Tolerances};
use crate::ontology::{
    EpistemicState, OnticSet, OnticSpace, OntologicalModel, ResponseFunction, TransitionMap,
};
use crate::scenario::{Measurement, QuantumScenario, IDENTITY_MEMBER};
use num_complex::Complex64;

pub const TOY_ZERO: &str = "zero";
pub const TOY_PLUS: &str = "plus";
pub const TOY_MINUS: &str = "minus";
pub const TOY_SWAP: &str = "swap";

/// Four ontic states; each preparation is uniform over two of them.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyBitModel {
    pub model: OntologicalModel,
}

impl ToyBitModel {
    /// Qubit scenario the toy bit mimics: `|0⟩, |+⟩, |−⟩`, the family
    /// `{id, swap = Z}` and the Z and X measurements.
    pub fn scenario(&self, tol: &Tolerances) -> QuantumScenario {
        toy_bit_scenario(tol)
    }
}

pub fn toy_bit_scenario(tol: &Tolerances) -> QuantumScenario {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
    QuantumScenario::builder(2)
        .preparation(TOY_ZERO, CVector::basis(2, 0))
        .preparation(TOY_PLUS, CVector::from_real(&[h, h]))
        .preparation(TOY_MINUS, CVector::from_real(&[h, -h]))
        .family("gates", [(IDENTITY_MEMBER, CMatrix::identity(2)), (TOY_SWAP, z)])
        .measurement("Z", Measurement::standard(vec!["0".into(), "1".into()]))
        .measurement(
            "X",
            Measurement::new(
                vec!["+".into(), "-".into()],
                vec![CVector::from_real(&[h, h]), CVector::from_real(&[h, -h])],
            ),
        )
        .build(tol)
        .expect("toy bit scenario is valid")
}

pub fn spekkens_toy_bit() -> ToyBitModel {
    let tol = Tolerances::default();
    let space = OnticSpace::new((1..=4).map(|i| format!("λ{i}")).collect()).expect("distinct labels");
    let preparations = [
        (TOY_ZERO, [0, 1]),
        (TOY_PLUS, [1, 2]),
        (TOY_MINUS, [0, 3]),
    ]
    .into_iter()
    .map(|(name, s)| (name.to_owned(), EpistemicState::uniform(4, &s)))
    .collect();
    let transitions = IndexMap::from([
        (IDENTITY_MEMBER.to_owned(), TransitionMap::identity(4)),
        (TOY_SWAP.to_owned(), TransitionMap::from_function(&[1, 0, 3, 2])),
    ]);
    let responses = IndexMap::from([
        (
            "Z".to_owned(),
            ResponseFunction::uniform_over(vec!["0".into(), "1".into()], &[vec![0], vec![0], vec![1], vec![1]]),
        ),
        (
            "X".to_owned(),
            ResponseFunction::uniform_over(vec!["+".into(), "-".into()], &[vec![1], vec![0], vec![0], vec![1]]),
        ),
    ]);
    let model = OntologicalModel::new(space, preparations, transitions, responses, &tol)
        .expect("toy bit model is valid");
    ToyBitModel { model }
}

/// One row of the BS2 update: `(n_0, θ_0, n_1, θ_1) ↦ (m_1, χ_1, m_2, χ_2)`,
/// occupations of paths `a_0, a_1` and `b_1, b_2`, phases as bits (1 = π).
pub type UpdateRow = ([u8; 4], [u8; 4]);

/// Deterministic local update at BS2. Equal input phases send all
/// occupation to `b_1`, opposite phases to `b_2`.
pub const BS2_UPDATE_TABLE: [UpdateRow; 16] = [
    ([0, 0, 0, 0], [0, 0, 0, 0]),
    ([0, 0, 0, 1], [0, 0, 0, 1]),
    ([0, 0, 1, 0], [1, 0, 0, 0]),
    ([0, 0, 1, 1], [0, 0, 1, 1]),
    ([0, 1, 0, 0], [0, 1, 0, 1]),
    ([0, 1, 0, 1], [0, 1, 0, 0]),
    ([0, 1, 1, 0], [0, 1, 1, 1]),
    ([0, 1, 1, 1], [1, 1, 0, 0]),
    ([1, 0, 0, 0], [1, 0, 0, 0]),
    ([1, 0, 0, 1], [0, 0, 1, 1]),
    ([1, 0, 1, 0], [2, 0, 0, 0]),
    ([1, 0, 1, 1], [0, 0, 2, 1]),
    ([1, 1, 0, 0], [0, 1, 1, 1]),
    ([1, 1, 0, 1], [1, 1, 0, 0]),
    ([1, 1, 1, 0], [0, 1, 2, 1]),
    ([1, 1, 1, 1], [2, 1, 0, 0]),
];

/// Interferometer model over occupation and phase of paths `a_0`, `a_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPathModel {
    pub model: OntologicalModel,
    /// States with exactly one occupied path.
    pub single_particle_sector: OnticSet,
}

impl FieldPathModel {
    /// The balanced interferometer scenario this model reproduces.
    pub fn scenario(&self, tol: &Tolerances) -> QuantumScenario {
        interfero::build_mzi(&MziConfig::balanced(Phase::Zero), tol).expect("balanced config is valid")
    }
}

fn field_index(v: [u8; 4]) -> usize {
    v.iter().fold(0, |acc, &x| acc * 2 + x as usize)
}

fn field_label(v: [u8; 4]) -> String {
    let ph = |b: u8| if b == 0 { "0" } else { "π" };
    format!("({},{},{},{})", v[0], ph(v[1]), v[2], ph(v[3]))
}

fn field_states() -> impl Iterator<Item = [u8; 4]> {
    (0..16u8).map(|i| [(i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1])
}

pub fn martin_spekkens_mzi() -> FieldPathModel {
    let tol = Tolerances::default();
    let space = OnticSpace::new(field_states().map(field_label).collect()).expect("distinct labels");
    let indices = |pred: &dyn Fn([u8; 4]) -> bool| -> Vec<usize> {
        field_states().filter(|&v| pred(v)).map(field_index).collect()
    };
    let sector = indices(&|v| v[0] + v[2] == 1);
    let phi = indices(&|v| v[0] == 1 && v[2] == 0);
    let psi = indices(&|v| v[0] + v[2] == 1 && v[1] == v[3]);
    let preparations = IndexMap::from([
        (interfero::PSI.to_owned(), EpistemicState::uniform(16, &psi)),
        (interfero::PHI.to_owned(), EpistemicState::uniform(16, &phi)),
    ]);
    let flip: Vec<usize> = field_states().map(|v| field_index([v[0], v[1], v[2], 1 - v[3]])).collect();
    let transitions = IndexMap::from([
        (interfero::PHASE_ZERO.to_owned(), TransitionMap::identity(16)),
        (interfero::PHASE_PI.to_owned(), TransitionMap::from_function(&flip)),
    ]);
    let mut possible = vec![Vec::new(); 16];
    for (input, output) in BS2_UPDATE_TABLE {
        let fired: Vec<usize> = [output[0], output[2]]
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(k, _)| k)
            .collect();
        possible[field_index(input)] = if fired.is_empty() { vec![0, 1] } else { fired };
    }
    let responses = IndexMap::from([(
        interfero::DETECTOR.to_owned(),
        ResponseFunction::uniform_over(vec!["B1".into(), "B2".into()], &possible),
    )]);
    let model = OntologicalModel::new(space, preparations, transitions, responses, &tol)
        .expect("field model is valid");
    FieldPathModel {
        model,
        single_particle_sector: OnticSet::from_indices(16, sector),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{
        check_ontic_indifference, check_possibilistic_completeness, classify_model, Classification,
        IndifferenceMode, IndifferenceVerdict,
    };

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn update_table_matches_rule() {
        for (i, (input, output)) in BS2_UPDATE_TABLE.iter().enumerate() {
            assert_eq!(field_index(*input), i);
            let [n0, t0, n1, t1] = *input;
            let total = n0 + n1;
            let m1 = if t0 == t1 { total } else { 0 };
            assert_eq!(*output, [m1, t0, total - m1, t0 ^ t1], "row {i}");
        }
    }

    #[test]
    fn toy_bit_supports_and_swap() {
        let t = spekkens_toy_bit();
        let m = &t.model;
        for p in [TOY_ZERO, TOY_PLUS, TOY_MINUS] {
            assert_eq!(m.support(p).unwrap().len(), 2);
        }
        let swap = m.transition(TOY_SWAP).unwrap();
        assert_eq!(swap.image(&m.support(TOY_PLUS).unwrap()), m.support(TOY_MINUS).unwrap());
        assert_eq!(swap.image(&m.support(TOY_ZERO).unwrap()), m.support(TOY_ZERO).unwrap());
        match classify_model(m) {
            Classification::PsiEpistemic { first, second, overlap } => {
                assert_eq!((first.as_str(), second.as_str()), (TOY_ZERO, TOY_PLUS));
                assert_eq!(overlap, vec!["λ2"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn toy_bit_checkers() {
        let t = spekkens_toy_bit();
        let s = t.scenario(&tol());
        assert!(check_possibilistic_completeness(&t.model, &s, &tol()).unwrap().is_empty());
        let v = check_ontic_indifference(&t.model, &s, TOY_SWAP, TOY_ZERO, IndifferenceMode::Pointwise, &tol())
            .unwrap();
        assert!(matches!(v, IndifferenceVerdict::Violation { .. }));
        let v = check_ontic_indifference(
            &t.model,
            &s,
            TOY_SWAP,
            TOY_ZERO,
            IndifferenceMode::SetPreservingOnly,
            &tol(),
        )
        .unwrap();
        assert_eq!(v, IndifferenceVerdict::Ok);
    }

    #[test]
    fn field_model_checkers() {
        let f = martin_spekkens_mzi();
        assert_eq!(f.single_particle_sector.len(), 8);
        let s = f.scenario(&tol());
        assert!(check_possibilistic_completeness(&f.model, &s, &tol()).unwrap().is_empty());
        let v = check_ontic_indifference(
            &f.model,
            &s,
            interfero::PHASE_PI,
            interfero::PHI,
            IndifferenceMode::Pointwise,
            &tol(),
        )
        .unwrap();
        assert!(matches!(v, IndifferenceVerdict::Violation { .. }));
        assert!(classify_model(&f.model).is_epistemic());
        let flip = f.model.transition(interfero::PHASE_PI).unwrap();
        assert_eq!(flip.compose(&flip), TransitionMap::identity(16));
    }
}
