//! Product models over `Λ_A × Λ_B` and the separability argument.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{
    EpistemicState, OnticSet, OnticSpace, OntologicalModel, ResponseFunction, Result,
    TransitionMap,
};
use crate::numerics::Tolerances;
use crate::scenario::IDENTITY_MEMBER;

/// A model on a product ontic space, remembering the factor sizes.
/// State `(a, b)` has index `a * size_b + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductModel {
    pub model: OntologicalModel,
    pub size_a: usize,
    pub size_b: usize,
}

impl ProductModel {
    pub fn new(model: OntologicalModel, size_a: usize, size_b: usize) -> Self {
        assert_eq!(model.space().size(), size_a * size_b, "factor sizes do not match the space");
        ProductModel { model, size_a, size_b }
    }

    pub fn project_a(&self, set: &OnticSet) -> OnticSet {
        OnticSet::from_indices(self.size_a, set.iter().map(|i| i / self.size_b))
    }

    pub fn project_b(&self, set: &OnticSet) -> OnticSet {
        OnticSet::from_indices(self.size_b, set.iter().map(|i| i % self.size_b))
    }

    pub fn rectangle(&self, a: &OnticSet, b: &OnticSet) -> OnticSet {
        OnticSet::from_indices(
            self.size_a * self.size_b,
            a.iter().flat_map(|i| b.iter().map(move |j| i * self.size_b + j)),
        )
    }

    /// Whether `set` equals the product of its two projections.
    pub fn is_rectangle(&self, set: &OnticSet) -> bool {
        *set == self.rectangle(&self.project_a(set), &self.project_b(set))
    }
}

fn with_identity(model: &OntologicalModel) -> IndexMap<String, TransitionMap> {
    let mut out = model.transitions().clone();
    out.entry(IDENTITY_MEMBER.to_owned())
        .or_insert_with(|| TransitionMap::identity(model.space().size()));
    out
}

/// Product of two independent models. Preparations, transitions and
/// responses are formed for every pair and named `"x|y"`; product outcome
/// labels are `"o|p"`.
pub fn product_embed(
    a: &OntologicalModel,
    b: &OntologicalModel,
    tol: &Tolerances,
) -> Result<ProductModel> {
    let (na, nb) = (a.space().size(), b.space().size());
    let labels = a
        .space()
        .labels()
        .iter()
        .flat_map(|la| b.space().labels().iter().map(move |lb| format!("({la},{lb})")))
        .collect();
    let space = OnticSpace::new(labels)?;

    let mut preparations = IndexMap::new();
    for (pa, ea) in a.preparations() {
        for (pb, eb) in b.preparations() {
            let dist = ea
                .distribution()
                .iter()
                .flat_map(|x| eb.distribution().iter().map(move |y| x * y))
                .collect();
            preparations.insert(format!("{pa}|{pb}"), EpistemicState::new(dist));
        }
    }

    let mut transitions = IndexMap::new();
    for (ma, ta) in with_identity(a) {
        for (mb, tb) in with_identity(b) {
            let mut kernel = vec![vec![0.0; na * nb]; na * nb];
            for i in 0..na {
                for j in 0..nb {
                    for (k, &p) in ta.kernel()[i].iter().enumerate() {
                        for (l, &q) in tb.kernel()[j].iter().enumerate() {
                            kernel[i * nb + j][k * nb + l] = p * q;
                        }
                    }
                }
            }
            transitions.insert(format!("{ma}|{mb}"), TransitionMap::new(kernel));
        }
    }

    let mut responses = IndexMap::new();
    for (ma, ra) in a.responses() {
        for (mb, rb) in b.responses() {
            let outcomes: Vec<String> = ra
                .outcomes()
                .iter()
                .flat_map(|oa| rb.outcomes().iter().map(move |ob| format!("{oa}|{ob}")))
                .collect();
            let mut xi = Vec::with_capacity(na * nb);
            for i in 0..na {
                for j in 0..nb {
                    xi.push(
                        ra.xi()[i]
                            .iter()
                            .flat_map(|x| rb.xi()[j].iter().map(move |y| x * y))
                            .collect(),
                    );
                }
            }
            responses.insert(format!("{ma}|{mb}"), ResponseFunction::new(outcomes, xi));
        }
    }

    let model = OntologicalModel::new(space, preparations, transitions, responses, tol)?;
    Ok(ProductModel::new(model, na, nb))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    /// `Λ_{x⊗1} ∩ Λ_{y⊗1} = ∅`.
    pub product_disjoint: bool,
    /// Both joint supports factorize as `Λ_A × Λ_B`.
    pub separable: bool,
    /// The two B factors share at least one state.
    pub shared_b_factor: bool,
    /// `Λ_x ∩ Λ_y = ∅` on the A factor.
    pub factor_a_disjoint: bool,
    /// The implication `product_disjoint ∧ separable ∧ shared_b_factor ⇒ factor_a_disjoint`.
    pub transfer_holds: bool,
}

/// Checks, by exact set computation, that disjoint joint supports of two
/// separable preparations force disjoint supports on the A factor.
pub fn separability_transfer(
    product: &ProductModel,
    first: &str,
    second: &str,
) -> Result<SeparabilityReport> {
    let s1 = product.model.support(first)?;
    let s2 = product.model.support(second)?;
    let product_disjoint = s1.intersection(&s2).is_empty();
    let separable = product.is_rectangle(&s1) && product.is_rectangle(&s2);
    let shared_b_factor = !product
        .project_b(&s1)
        .intersection(&product.project_b(&s2))
        .is_empty();
    let factor_a_disjoint = product
        .project_a(&s1)
        .intersection(&product.project_a(&s2))
        .is_empty();
    let premise = product_disjoint && separable && shared_b_factor;
    Ok(SeparabilityReport {
        product_disjoint,
        separable,
        shared_b_factor,
        factor_a_disjoint,
        transfer_holds: !premise || factor_a_disjoint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn factor(prefix: &str, size: usize, preps: &[(&str, &[usize])]) -> OntologicalModel {
        let preparations = preps
            .iter()
            .map(|(n, s)| (n.to_string(), EpistemicState::uniform(size, s)))
            .collect();
        OntologicalModel::new(
            OnticSpace::numbered(prefix, size),
            preparations,
            IndexMap::new(),
            IndexMap::new(),
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn product_sizes_and_supports() {
        let a = factor("l", 2, &[("phi", &[0, 1])]);
        let b = factor("m", 3, &[("1", &[0])]);
        let p = product_embed(&a, &b, &tol()).unwrap();
        assert_eq!(p.model.space().size(), 6);
        let s = p.model.support("phi|1").unwrap();
        assert_eq!(p.model.space().labels_of(&s), vec!["(l0,m0)", "(l1,m0)"]);
        assert_eq!(p.project_a(&s), a.support("phi").unwrap());
        assert!(p.is_rectangle(&s));
    }
}
