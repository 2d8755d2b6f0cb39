//! Exhaustive search for small possibilistic models with overlapping
//! supports.
//!
//! An ontic state is summarized by a row: the preparations whose support
//! contains it, the set of possible outcomes it yields for each measurement
//! (its response signature `R`), and for each member `m` the signature
//! `G(m)` of the state `m` sends it to. A model of size `k` is a set of `k`
//! distinct rows; labels are interchangeable, so rows are taken in
//! increasing index order and each model is visited once.
//!
//! Local constraints (quantum zeros, pointwise indifference) filter rows
//! up front. Global constraints are checked on the chosen set: every
//! nonzero quantum probability is realized, every `G(m)` is the signature
//! of some chosen state, and, if required, some state lies in both
//! supports. Transitions are deterministic maps.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::NogoError;
use crate::numerics::Tolerances;
use crate::ontology::{
    check_ontic_indifference, check_possibilistic_completeness, classify_model, Classification,
    CompletenessViolation, EpistemicState, IndifferenceMode, IndifferenceVerdict, OnticSpace,
    OntologicalModel, ResponseFunction, TransitionMap,
};
use crate::scenario::{zero_structure, QuantumScenario};

pub const DEFAULT_BUDGET: u64 = 10_000_000;
/// Upper bound on the number of locally consistent rows.
pub const MAX_ROWS: usize = 2_000_000;

pub const DETERMINISTIC_KERNEL_NOTE: &str =
    "transition kernels restricted to deterministic maps; Unsat is relative to that restriction and to the state budget";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axiom {
    OnticIndifference,
    PossibilisticCompleteness,
    OutcomeCoverage,
    ProductSeparability,
}

impl Axiom {
    pub const ALL: [Axiom; 4] = [
        Axiom::OnticIndifference,
        Axiom::PossibilisticCompleteness,
        Axiom::OutcomeCoverage,
        Axiom::ProductSeparability,
    ];
}

impl std::str::FromStr for Axiom {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "indifference" | "OnticIndifference" => Ok(Axiom::OnticIndifference),
            "completeness" | "PossibilisticCompleteness" => Ok(Axiom::PossibilisticCompleteness),
            "coverage" | "OutcomeCoverage" => Ok(Axiom::OutcomeCoverage),
            "separability" | "ProductSeparability" => Ok(Axiom::ProductSeparability),
            other => Err(format!(
                "unknown axiom `{other}` (indifference, completeness, coverage, separability)"
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FeasibilityProblem {
    pub scenario: QuantumScenario,
    pub phi: String,
    pub psi: String,
    pub require_overlap: bool,
    pub axioms: BTreeSet<Axiom>,
    /// Largest number of ontic states tried.
    pub max_states: usize,
    pub indifference_mode: IndifferenceMode,
    /// Maximum number of search nodes.
    pub budget: u64,
}

impl FeasibilityProblem {
    /// All axioms, overlap required, pointwise indifference.
    pub fn new(scenario: QuantumScenario, phi: &str, psi: &str, max_states: usize) -> Self {
        FeasibilityProblem {
            scenario,
            phi: phi.to_owned(),
            psi: psi.to_owned(),
            require_overlap: true,
            axioms: Axiom::ALL.into_iter().collect(),
            max_states,
            indifference_mode: IndifferenceMode::Pointwise,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn without(mut self, axiom: Axiom) -> Self {
        self.axioms.remove(&axiom);
        self
    }

    pub fn with_axioms(mut self, axioms: impl IntoIterator<Item = Axiom>) -> Self {
        self.axioms = axioms.into_iter().collect();
        self
    }

    pub fn overlap_required(mut self, required: bool) -> Self {
        self.require_overlap = required;
        self
    }

    pub fn mode(mut self, mode: IndifferenceMode) -> Self {
        self.indifference_mode = mode;
        self
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCount {
    pub lemma: String,
    pub fired: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SatReport {
    pub witness: OntologicalModel,
    pub states: usize,
    pub explored: u64,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnsatReport {
    pub max_states: usize,
    pub explored: u64,
    pub lemmas: Vec<LemmaCount>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Sat(SatReport),
    Unsat(UnsatReport),
}

impl SearchOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SearchOutcome::Sat(_))
    }
}

type Sig = u64;

#[derive(Clone, Debug)]
struct Row {
    members: u32,
    r: Sig,
    g: Vec<Sig>,
}

const LEMMAS: [&str; 5] = [
    "no locally consistent state lies in both supports",
    "some nonzero quantum probability cannot be realized by the remaining states",
    "some transition target signature cannot be provided by the remaining states",
    "no remaining state lies in both supports",
    "supports not preserved by any deterministic transition",
];

struct Space {
    preps: Vec<String>,
    members: Vec<String>,
    /// (measurement name, outcomes, first bit)
    measurements: Vec<(String, Vec<String>, usize)>,
    sigs: Vec<Sig>,
    /// `forbidden[p][m]`: outcome bits impossible for preparation `p` after `m`.
    forbidden: Vec<Vec<Sig>>,
    /// `fixes[m]`: mask of preparations member `m` leaves unchanged.
    fixes: Vec<u32>,
    /// Requirements `(p, m, bit)` for every nonzero probability.
    requirements: Vec<(usize, usize, usize)>,
    phi: usize,
    psi: usize,
}

impl Space {
    fn new(problem: &FeasibilityProblem, tol: &Tolerances) -> Result<Space, NogoError> {
        let s = &problem.scenario;
        let preps: Vec<String> = s.preparations().keys().cloned().collect();
        if preps.len() > 16 {
            return Err(NogoError::InvalidRequest("at most 16 preparations are supported".into()));
        }
        let index = |name: &str| {
            preps
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| NogoError::InvalidRequest(format!("unknown preparation `{name}`")))
        };
        let (phi, psi) = (index(&problem.phi)?, index(&problem.psi)?);
        let members = s.member_ids();
        let mut measurements = Vec::new();
        let mut bit = 0;
        for (name, m) in s.measurements() {
            measurements.push((name.clone(), m.outcomes.clone(), bit));
            bit += m.outcomes.len();
        }
        if bit > 64 {
            return Err(NogoError::InvalidRequest("at most 64 outcomes in total are supported".into()));
        }
        let mut sigs: Vec<Sig> = vec![0];
        for (_, outcomes, start) in &measurements {
            let n = outcomes.len();
            sigs = sigs
                .iter()
                .flat_map(|&base| (1..(1u64 << n)).map(move |sub| base | (sub << start)))
                .collect();
        }
        sigs.sort_unstable();
        let zeros = zero_structure(s, tol)?;
        let mut forbidden = vec![vec![0; members.len()]; preps.len()];
        let mut requirements = Vec::new();
        for (pi, p) in preps.iter().enumerate() {
            for (mi, m) in members.iter().enumerate() {
                for (meas, outcomes, start) in &measurements {
                    for (k, o) in outcomes.iter().enumerate() {
                        if zeros.contains(p, m, meas, o) {
                            forbidden[pi][mi] |= 1 << (start + k);
                        } else {
                            requirements.push((pi, mi, start + k));
                        }
                    }
                }
            }
        }
        let mut fixes = vec![0u32; members.len()];
        for (mi, m) in members.iter().enumerate() {
            for (pi, p) in preps.iter().enumerate() {
                if s.member_fixes(m, p, tol)? {
                    fixes[mi] |= 1 << pi;
                }
            }
        }
        Ok(Space { preps, members, measurements, sigs, forbidden, fixes, requirements, phi, psi })
    }

    fn forbidden_for(&self, mask: u32, m: usize) -> Sig {
        (0..self.preps.len()).filter(|p| mask >> p & 1 == 1).fold(0, |acc, p| acc | self.forbidden[p][m])
    }

    fn rows(&self, pointwise: bool) -> Result<Vec<Row>, NogoError> {
        let both = (1u32 << self.phi) | (1u32 << self.psi);
        let mut rows = Vec::new();
        let mut masks: Vec<u32> = (1..(1u32 << self.preps.len())).collect();
        // States in both supports first, then other supported states.
        masks.sort_by_key(|&m| (m & both != both, m));
        for mask in masks {
            for &r in &self.sigs {
                let mut options: Vec<Vec<Sig>> = Vec::with_capacity(self.members.len());
                for m in 0..self.members.len() {
                    let bad = self.forbidden_for(mask, m);
                    if pointwise && self.fixes[m] & mask != 0 {
                        options.push(if r & bad == 0 { vec![r] } else { vec![] });
                    } else {
                        // Leaving the state in place first keeps witnesses close to indifferent.
                        let mut o: Vec<Sig> = self.sigs.iter().copied().filter(|s| s & bad == 0).collect();
                        if let Some(k) = o.iter().position(|&s| s == r) {
                            o[..=k].rotate_right(1);
                        }
                        options.push(o);
                    }
                }
                let mut g = vec![0; self.members.len()];
                self.expand(&options, 0, &mut g, mask, r, &mut rows)?;
            }
        }
        // States that fewer fixing members move come first, so witnesses
        // violate indifference sparingly; moves under members that fix every
        // preparation weigh most. Overlapping states break ties.
        let all = (1u32 << self.preps.len()) - 1;
        let moves = |row: &Row, trivial: bool| {
            (0..self.members.len())
                .filter(|&m| self.fixes[m] & row.members != 0 && row.g[m] != row.r)
                .filter(|&m| !trivial || self.fixes[m] == all)
                .count()
        };
        rows.sort_by_cached_key(|row| (moves(row, true), row.members & both != both, moves(row, false)));
        for &r in &self.sigs {
            rows.push(Row { members: 0, r, g: vec![r; self.members.len()] });
        }
        Ok(rows)
    }

    fn expand(&self, options: &[Vec<Sig>], m: usize, g: &mut Vec<Sig>, mask: u32, r: Sig, out: &mut Vec<Row>) -> Result<(), NogoError> {
        if m == options.len() {
            if out.len() >= MAX_ROWS {
                return Err(NogoError::InvalidRequest(format!(
                    "more than {MAX_ROWS} candidate ontic states; the scenario is too large to search"
                )));
            }
            out.push(Row { members: mask, r, g: g.clone() });
            return Ok(());
        }
        for &s in &options[m] {
            g[m] = s;
            self.expand(options, m + 1, g, mask, r, out)?;
        }
        Ok(())
    }
}

/// Fixed-width bitset.
#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn or(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    fn subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn minus_count(&self, other: &Bits) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & !b).count_ones()).sum()
    }
}

struct Prepared {
    rows: Vec<Row>,
    cover: Vec<Bits>,
    needs: Vec<Bits>,
    provides: Vec<Bits>,
    overlap: Vec<bool>,
    suffix_cover: Vec<Bits>,
    suffix_provides: Vec<Bits>,
    suffix_overlap: Vec<bool>,
    all_requirements: Bits,
}

impl Prepared {
    fn new(space: &Space, rows: Vec<Row>) -> Prepared {
        let nreq = space.requirements.len();
        let sig_index = |s: Sig| space.sigs.binary_search(&s).expect("signature enumerated");
        let both = (1u32 << space.phi) | (1u32 << space.psi);
        let mut cover = Vec::with_capacity(rows.len());
        let mut needs = Vec::with_capacity(rows.len());
        let mut provides = Vec::with_capacity(rows.len());
        let mut overlap = Vec::with_capacity(rows.len());
        for row in &rows {
            let mut c = Bits::new(nreq);
            for (k, &(p, m, bit)) in space.requirements.iter().enumerate() {
                if row.members >> p & 1 == 1 && row.g[m] >> bit & 1 == 1 {
                    c.set(k);
                }
            }
            let mut n = Bits::new(space.sigs.len());
            for &g in &row.g {
                n.set(sig_index(g));
            }
            let mut pr = Bits::new(space.sigs.len());
            pr.set(sig_index(row.r));
            cover.push(c);
            needs.push(n);
            provides.push(pr);
            overlap.push(row.members & both == both);
        }
        let n = rows.len();
        let mut suffix_cover = vec![Bits::new(nreq); n + 1];
        let mut suffix_provides = vec![Bits::new(space.sigs.len()); n + 1];
        let mut suffix_overlap = vec![false; n + 1];
        for i in (0..n).rev() {
            suffix_cover[i] = suffix_cover[i + 1].or(&cover[i]);
            suffix_provides[i] = suffix_provides[i + 1].or(&provides[i]);
            suffix_overlap[i] = suffix_overlap[i + 1] || overlap[i];
        }
        let mut all_requirements = Bits::new(nreq);
        (0..nreq).for_each(|k| all_requirements.set(k));
        Prepared {
            rows,
            cover,
            needs,
            provides,
            overlap,
            suffix_cover,
            suffix_provides,
            suffix_overlap,
            all_requirements,
        }
    }
}

struct Shared<'a> {
    space: &'a Space,
    prepared: &'a Prepared,
    problem: &'a FeasibilityProblem,
    explored: AtomicU64,
    exhausted: AtomicBool,
    best_branch: AtomicUsize,
    lemmas: [AtomicU64; 5],
}

struct Node {
    chosen: Vec<usize>,
    cover: Bits,
    needs: Bits,
    provides: Bits,
    overlap: bool,
}

impl Shared<'_> {
    fn fire(&self, lemma: usize) {
        self.lemmas[lemma].fetch_add(1, Ordering::Relaxed);
    }

    fn satisfied(&self, node: &Node) -> bool {
        node.cover == self.prepared.all_requirements
            && node.needs.subset_of(&node.provides)
            && (node.overlap || !self.problem.require_overlap)
    }

    /// Depth-first over row sets extending `node`. Returns a satisfying
    /// set, or `None` if none exists (or the search was cut off).
    fn dfs(&self, branch: usize, node: &mut Node) -> Option<Vec<usize>> {
        if self.exhausted.load(Ordering::Relaxed) || self.best_branch.load(Ordering::Relaxed) < branch {
            return None;
        }
        if self.explored.fetch_add(1, Ordering::Relaxed) >= self.problem.budget {
            self.exhausted.store(true, Ordering::Relaxed);
            return None;
        }
        if self.satisfied(node) {
            if self.problem.indifference_mode == IndifferenceMode::SetPreservingOnly
                && self.problem.axioms.contains(&Axiom::OnticIndifference)
                && set_preserving_maps(self.space, &self.prepared.rows, &node.chosen).is_none()
            {
                self.fire(4);
            } else {
                return Some(node.chosen.clone());
            }
        }
        let remaining = self.problem.max_states - node.chosen.len();
        if remaining == 0 {
            return None;
        }
        let start = node.chosen.last().map_or(0, |&l| l + 1);
        let p = self.prepared;
        if node.cover.or(&p.suffix_cover[start]) != p.all_requirements {
            self.fire(1);
            return None;
        }
        if !node.needs.subset_of(&node.provides.or(&p.suffix_provides[start]))
            || node.needs.minus_count(&node.provides) as usize > remaining
        {
            self.fire(2);
            return None;
        }
        if self.problem.require_overlap && !node.overlap && !p.suffix_overlap[start] {
            self.fire(3);
            return None;
        }
        for j in start..p.rows.len() {
            let saved = (node.cover.clone(), node.needs.clone(), node.provides.clone(), node.overlap);
            node.chosen.push(j);
            node.cover = node.cover.or(&p.cover[j]);
            node.needs = node.needs.or(&p.needs[j]);
            node.provides = node.provides.or(&p.provides[j]);
            node.overlap |= p.overlap[j];
            let found = self.dfs(branch, node);
            node.chosen.pop();
            (node.cover, node.needs, node.provides, node.overlap) = saved;
            if found.is_some() {
                return found;
            }
            if self.exhausted.load(Ordering::Relaxed) {
                return None;
            }
        }
        None
    }
}

/// Deterministic maps `f_m` that send each state to one with signature
/// `G(m)` and preserve (onto) every support that `m` fixes.
fn set_preserving_maps(space: &Space, rows: &[Row], chosen: &[usize]) -> Option<Vec<Vec<usize>>> {
    let mut maps = Vec::with_capacity(space.members.len());
    for m in 0..space.members.len() {
        let mut f = vec![0usize; chosen.len()];
        if !assign_map(space, rows, chosen, m, 0, &mut f) {
            return None;
        }
        maps.push(f);
    }
    Some(maps)
}

fn assign_map(space: &Space, rows: &[Row], chosen: &[usize], m: usize, i: usize, f: &mut Vec<usize>) -> bool {
    let fixed = space.fixes[m];
    if i == chosen.len() {
        return (0..space.preps.len()).filter(|p| fixed >> p & 1 == 1).all(|p| {
            (0..chosen.len())
                .filter(|&k| rows[chosen[k]].members >> p & 1 == 1)
                .all(|k| (0..chosen.len()).any(|src| f[src] == k && rows[chosen[src]].members >> p & 1 == 1))
        });
    }
    let row = &rows[chosen[i]];
    let keep = row.members & fixed;
    for (k, &target) in chosen.iter().enumerate() {
        let t = &rows[target];
        if t.r == row.g[m] && t.members & keep == keep {
            f[i] = k;
            if assign_map(space, rows, chosen, m, i + 1, f) {
                return true;
            }
        }
    }
    false
}

fn witness(space: &Space, rows: &[Row], chosen: &[usize], maps: Option<Vec<Vec<usize>>>, tol: &Tolerances) -> OntologicalModel {
    let k = chosen.len();
    let labels = (1..=k).map(|i| format!("λ{i}")).collect();
    let space_o = OnticSpace::new(labels).expect("distinct labels");
    let preparations: IndexMap<String, EpistemicState> = space
        .preps
        .iter()
        .enumerate()
        .map(|(p, name)| {
            let support: Vec<usize> = (0..k).filter(|&i| rows[chosen[i]].members >> p & 1 == 1).collect();
            (name.clone(), EpistemicState::uniform(k, &support))
        })
        .collect();
    let transitions: IndexMap<String, TransitionMap> = space
        .members
        .iter()
        .enumerate()
        .map(|(m, name)| {
            let image: Vec<usize> = match &maps {
                Some(maps) => maps[m].clone(),
                None => (0..k)
                    .map(|i| {
                        let g = rows[chosen[i]].g[m];
                        if rows[chosen[i]].r == g {
                            i
                        } else {
                            (0..k).find(|&j| rows[chosen[j]].r == g).expect("closure holds at a solution")
                        }
                    })
                    .collect(),
            };
            (name.clone(), TransitionMap::from_function(&image))
        })
        .collect();
    let responses: IndexMap<String, ResponseFunction> = space
        .measurements
        .iter()
        .map(|(name, outcomes, start)| {
            let possible: Vec<Vec<usize>> = chosen
                .iter()
                .map(|&row| (0..outcomes.len()).filter(|o| rows[row].r >> (start + o) & 1 == 1).collect())
                .collect();
            (name.clone(), ResponseFunction::uniform_over(outcomes.clone(), &possible))
        })
        .collect();
    OntologicalModel::new(space_o, preparations, transitions, responses, tol).expect("witness is a valid model")
}

/// Searches for a possibilistic model with at most `max_states` ontic
/// states satisfying the problem's axioms. Every model in the search class
/// is possibilistically complete and covers outcomes by construction, so
/// those two axioms are always in force.
pub fn feasibility_search(problem: &FeasibilityProblem, tol: &Tolerances) -> Result<SearchOutcome, NogoError> {
    if problem.max_states == 0 {
        return Err(NogoError::InvalidRequest("the state budget must be at least 1".into()));
    }
    if problem.phi == problem.psi {
        return Err(NogoError::InvalidRequest("the two preparations must differ".into()));
    }
    let space = Space::new(problem, tol)?;
    let indifference = problem.axioms.contains(&Axiom::OnticIndifference);
    let pointwise = indifference && problem.indifference_mode == IndifferenceMode::Pointwise;
    let rows = space.rows(pointwise)?;
    let prepared = Prepared::new(&space, rows);
    let mut notes = vec![DETERMINISTIC_KERNEL_NOTE.to_owned()];
    if problem.axioms.contains(&Axiom::ProductSeparability) {
        notes.push("ProductSeparability constrains only product models; it is vacuous for a single system".into());
    }
    let shared = Shared {
        space: &space,
        prepared: &prepared,
        problem,
        explored: AtomicU64::new(0),
        exhausted: AtomicBool::new(false),
        best_branch: AtomicUsize::new(usize::MAX),
        lemmas: Default::default(),
    };
    let unsat = |shared: &Shared| {
        let lemmas = LEMMAS
            .iter()
            .zip(&shared.lemmas)
            .map(|(l, c)| LemmaCount { lemma: (*l).to_owned(), fired: c.load(Ordering::Relaxed) })
            .filter(|l| l.fired > 0)
            .collect();
        SearchOutcome::Unsat(UnsatReport {
            max_states: problem.max_states,
            explored: shared.explored.load(Ordering::Relaxed),
            lemmas,
            notes: notes.clone(),
        })
    };
    if problem.require_overlap && !prepared.suffix_overlap[0] {
        shared.fire(0);
        return Ok(unsat(&shared));
    }
    let nreq = space.requirements.len();
    let nsig = space.sigs.len();
    let results: Vec<(usize, Option<Vec<usize>>)> = (0..prepared.rows.len())
        .into_par_iter()
        .map(|branch| {
            if shared.best_branch.load(Ordering::Relaxed) < branch || shared.exhausted.load(Ordering::Relaxed) {
                return (branch, None);
            }
            let mut node = Node {
                chosen: vec![branch],
                cover: Bits::new(nreq).or(&prepared.cover[branch]),
                needs: Bits::new(nsig).or(&prepared.needs[branch]),
                provides: Bits::new(nsig).or(&prepared.provides[branch]),
                overlap: prepared.overlap[branch],
            };
            let found = shared.dfs(branch, &mut node);
            if found.is_some() {
                shared.best_branch.fetch_min(branch, Ordering::Relaxed);
            }
            (branch, found)
        })
        .collect();
    if let Some((_, Some(chosen))) = results.into_iter().find(|(_, r)| r.is_some()) {
        let maps = if indifference && problem.indifference_mode == IndifferenceMode::SetPreservingOnly {
            set_preserving_maps(&space, &prepared.rows, &chosen)
        } else {
            None
        };
        let model = witness(&space, &prepared.rows, &chosen, maps, tol);
        return Ok(SearchOutcome::Sat(SatReport {
            states: chosen.len(),
            witness: model,
            explored: shared.explored.load(Ordering::Relaxed),
            notes,
        }));
    }
    if shared.exhausted.load(Ordering::Relaxed) {
        return Err(NogoError::BudgetExceeded { explored: shared.explored.load(Ordering::Relaxed) });
    }
    Ok(unsat(&shared))
}

/// What the ontology checkers say about a search witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub completeness_violations: Vec<CompletenessViolation>,
    pub classification: Classification,
    /// `(member, preparation)` pairs where indifference fails.
    pub indifference_violations: Vec<(String, String)>,
    pub overlap_present: bool,
}

impl WitnessCheck {
    /// The witness reproduces the quantum possibilities and respects
    /// exactly the axioms that were imposed.
    pub fn consistent_with(&self, problem: &FeasibilityProblem) -> bool {
        let indifference_ok = self.indifference_violations.is_empty();
        self.completeness_violations.is_empty()
            && (!problem.require_overlap || self.overlap_present)
            && (problem.axioms.contains(&Axiom::OnticIndifference) == indifference_ok || !problem.require_overlap && indifference_ok)
    }
}

pub fn check_witness(problem: &FeasibilityProblem, model: &OntologicalModel, tol: &Tolerances) -> Result<WitnessCheck, NogoError> {
    let scenario = &problem.scenario;
    let completeness_violations = check_possibilistic_completeness(model, scenario, tol)?;
    let mut indifference_violations = Vec::new();
    for m in scenario.member_ids() {
        for p in scenario.preparations().keys() {
            if scenario.member_fixes(&m, p, tol)? {
                let v = check_ontic_indifference(model, scenario, &m, p, problem.indifference_mode, tol)?;
                if let IndifferenceVerdict::Violation { .. } = v {
                    indifference_violations.push((m.clone(), p.clone()));
                }
            }
        }
    }
    let overlap_present = !model.support(&problem.phi)?.intersection(&model.support(&problem.psi)?).is_empty();
    Ok(WitnessCheck {
        completeness_violations,
        classification: classify_model(model),
        indifference_violations,
        overlap_present,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interfero::{build_mzi, MziConfig, Phase};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn mzi_problem(k: usize) -> FeasibilityProblem {
        FeasibilityProblem::new(build_mzi(&MziConfig::balanced(Phase::Zero), &tol()).unwrap(), "phi", "psi", k)
    }

    #[test]
    fn full_axioms_unsat() {
        for k in 1..=6 {
            let out = feasibility_search(&mzi_problem(k), &tol()).unwrap();
            assert!(!out.is_sat(), "K = {k}");
        }
    }

    #[test]
    fn without_indifference_sat_and_witness_checks() {
        let p = mzi_problem(4).without(Axiom::OnticIndifference);
        let SearchOutcome::Sat(sat) = feasibility_search(&p, &tol()).unwrap() else { panic!("expected Sat") };
        let check = check_witness(&p, &sat.witness, &tol()).unwrap();
        assert!(check.completeness_violations.is_empty());
        assert!(check.classification.is_epistemic());
        assert!(!check.indifference_violations.is_empty());
        assert!(check.consistent_with(&p));
    }

    #[test]
    fn no_overlap_gives_ontic_witness() {
        let p = mzi_problem(6).overlap_required(false);
        let SearchOutcome::Sat(sat) = feasibility_search(&p, &tol()).unwrap() else { panic!("expected Sat") };
        let check = check_witness(&p, &sat.witness, &tol()).unwrap();
        assert!(check.completeness_violations.is_empty());
        assert!(check.indifference_violations.is_empty());
        assert_eq!(check.classification, Classification::PsiOntic);
    }

    #[test]
    fn set_preserving_mode_admits_overlap() {
        let p = mzi_problem(6).mode(IndifferenceMode::SetPreservingOnly);
        let out = feasibility_search(&p, &tol()).unwrap();
        if let SearchOutcome::Sat(sat) = out {
            let check = check_witness(&p, &sat.witness, &tol()).unwrap();
            assert!(check.completeness_violations.is_empty());
            assert!(check.indifference_violations.is_empty());
        }
    }

    #[test]
    fn tiny_budget_is_reported() {
        let p = mzi_problem(6).without(Axiom::OnticIndifference).budget(1);
        assert!(matches!(feasibility_search(&p, &tol()), Err(NogoError::BudgetExceeded { .. }) | Ok(SearchOutcome::Sat(_))));
    }
}
