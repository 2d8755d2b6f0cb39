//! Named scenario instances, so tools can refer to the standard cases by tag.
//!
//! | tag | scenario | pair |
//! |---|---|---|
//! | `mzi-fig1` … `mzi-fig4` | interferometer (figures 3, 4 at α² = 0.2) | `phi`, `psi` |
//! | `toybit` | qubit analog of the toy bit | `zero`, `plus` |
//! | `construction[:α²:N]` | non-overlap construction, default `0.5:2` | `phi`, `psi` |
//! | `restricted[:α²:N]` | construction behind the conjugating protocol | `phi`, `psi`, zero state `zero` |

use thiserror::Error;

use crate::construction::{build_construction, build_restricted_protocol, ConstructionError};
use crate::interfero::{build_mzi, Figure, InterferoError, Phase, PHI, PSI};
use crate::numerics::{CVector, Tolerances};
use crate::scenario::{QuantumScenario, ScenarioError};
use crate::toymodels::{toy_bit_scenario, TOY_PLUS, TOY_ZERO};

pub const BUILDER_TAGS: [&str; 7] = [
    "mzi-fig1",
    "mzi-fig2",
    "mzi-fig3",
    "mzi-fig4",
    "toybit",
    "construction",
    "restricted",
];

#[derive(Debug, Error)]
pub enum BuilderError {
    #[error("unknown builder `{0}`; known: {known}", known = BUILDER_TAGS.join(", "))]
    UnknownTag(String),
    #[error("bad parameters in `{0}`: expected <tag>:<alpha2>:<N>")]
    BadParameters(String),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Interfero(#[from] InterferoError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// A scenario together with the pair of preparations the argument is about.
#[derive(Clone, Debug)]
pub struct Instance {
    pub tag: String,
    pub scenario: QuantumScenario,
    pub phi: String,
    pub psi: String,
    pub zero_state: Option<String>,
}

fn construction_params(tag: &str, rest: &str) -> Result<(f64, usize), BuilderError> {
    if rest.is_empty() {
        return Ok((0.5, 2));
    }
    let bad = || BuilderError::BadParameters(tag.to_owned());
    let (a, n) = rest.strip_prefix(':').and_then(|r| r.split_once(':')).ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?))
}

pub fn resolve_builder(tag: &str, tol: &Tolerances) -> Result<Instance, BuilderError> {
    let instance = |scenario, phi: &str, psi: &str, zero: Option<&str>| Instance {
        tag: tag.to_owned(),
        scenario,
        phi: phi.to_owned(),
        psi: psi.to_owned(),
        zero_state: zero.map(str::to_owned),
    };
    if let Some(n) = tag.strip_prefix("mzi-fig") {
        let figure = n
            .parse::<u8>()
            .map_err(|_| BuilderError::UnknownTag(tag.to_owned()))
            .and_then(|n| Figure::from_number(n).map_err(|_| BuilderError::UnknownTag(tag.to_owned())))?;
        let scenario = build_mzi(&figure.config(None, Phase::Zero)?, tol)?;
        return Ok(instance(scenario, PHI, PSI, None));
    }
    if tag == "toybit" {
        return Ok(instance(toy_bit_scenario(tol), TOY_ZERO, TOY_PLUS, None));
    }
    for (prefix, restricted) in [("construction", false), ("restricted", true)] {
        let Some(rest) = tag.strip_prefix(prefix) else { continue };
        let (alpha2, n) = construction_params(tag, rest)?;
        if !(alpha2 > 0.0 && alpha2 < 1.0) {
            return Err(BuilderError::BadParameters(tag.to_owned()));
        }
        let c = build_construction(alpha2.sqrt(), (1.0 - alpha2).sqrt(), n, tol)?;
        return Ok(if restricted {
            let p = build_restricted_protocol(&c.a0, &CVector::basis(c.dim(), 0), &c, tol)?;
            instance(p.to_scenario(&c, tol)?, "phi", "psi", Some("zero"))
        } else {
            instance(c.to_scenario(tol)?, "phi", "psi", None)
        });
    }
    Err(BuilderError::UnknownTag(tag.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nogo::{check_trace, derive_nonoverlap, DerivationRequest, NogoError};

    #[test]
    fn every_tag_resolves() {
        let tol = Tolerances::default();
        for tag in BUILDER_TAGS {
            let i = resolve_builder(tag, &tol).unwrap();
            i.scenario.preparation(&i.phi).unwrap();
            i.scenario.preparation(&i.psi).unwrap();
        }
        assert!(resolve_builder("construction:0.6:3", &tol).is_ok());
        assert!(matches!(resolve_builder("construction:0.7:3", &tol), Err(BuilderError::Construction(_))));
        assert!(matches!(resolve_builder("construction:x", &tol), Err(BuilderError::BadParameters(_))));
        assert!(matches!(resolve_builder("mzi-fig7", &tol), Err(BuilderError::UnknownTag(_))));
    }

    #[test]
    fn derivation_on_each_tag() {
        let tol = Tolerances::default();
        for tag in BUILDER_TAGS {
            let i = resolve_builder(tag, &tol).unwrap();
            let mut req = DerivationRequest::new(&i.phi, &i.psi);
            if let Some(z) = &i.zero_state {
                req = req.restricted(z);
            }
            match derive_nonoverlap(&i.scenario, &req, &tol) {
                Ok(t) => assert!(check_trace(&t, &i.scenario, &tol).unwrap().is_ok(), "{tag}"),
                Err(NogoError::ConditionNotMet { .. }) => assert_eq!(tag, "toybit"),
                Err(e) => panic!("{tag}: {e}"),
            }
        }
    }
}
