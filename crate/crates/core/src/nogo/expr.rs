//! Set expressions over named ontic supports.
//!
//! ```text
//! assertion := expr rel expr
//! rel       := "=" | "⊆" | "<=" | "≠" | "!="
//! expr      := term (("∪" | "\/") term)*
//! term      := factor (("∩" | "/\") factor)*
//! factor    := "∅" | "{}" | atom | "(" expr ")"
//! atom      := ("Λ" | "L") "[" name ( "|" name ( "@" name )? )? "]"
//! name      := bare | '"' chars '"'
//! ```
//!
//! `Λ[p]` is the support of preparation `p`; `Λ[p|o@m]` the states in it
//! that can give outcome `o` when member `m` precedes the measurement;
//! `Λ[p|o]` the same set once it no longer depends on `m`. Bare names may
//! contain anything except whitespace and `[]|@()"`; other names are
//! double-quoted, with `\"` and `\\` escapes.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Support { prep: String },
    Context { prep: String, outcome: String, member: String },
    Collapsed { prep: String, outcome: String },
}

impl Atom {
    pub fn prep(&self) -> &str {
        match self {
            Atom::Support { prep } | Atom::Context { prep, .. } | Atom::Collapsed { prep, .. } => prep,
        }
    }

    pub fn support(prep: &str) -> Self {
        Atom::Support { prep: prep.to_owned() }
    }

    pub fn context(prep: &str, outcome: &str, member: &str) -> Self {
        Atom::Context { prep: prep.to_owned(), outcome: outcome.to_owned(), member: member.to_owned() }
    }

    pub fn collapsed(prep: &str, outcome: &str) -> Self {
        Atom::Collapsed { prep: prep.to_owned(), outcome: outcome.to_owned() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetExpr {
    Empty,
    Atom(Atom),
    Inter(Vec<SetExpr>),
    Union(Vec<SetExpr>),
}

impl SetExpr {
    pub fn atom(a: Atom) -> Self {
        SetExpr::Atom(a)
    }

    pub fn inter(parts: Vec<SetExpr>) -> Self {
        SetExpr::Inter(parts)
    }

    pub fn union(parts: Vec<SetExpr>) -> Self {
        SetExpr::Union(parts)
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            SetExpr::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Every atom in the expression, in order of appearance.
    pub fn atoms(&self, out: &mut Vec<Atom>) {
        match self {
            SetExpr::Empty => {}
            SetExpr::Atom(a) => out.push(a.clone()),
            SetExpr::Inter(xs) | SetExpr::Union(xs) => xs.iter().for_each(|x| x.atoms(out)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Subset,
    Neq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assertion {
    pub lhs: SetExpr,
    pub rel: Relation,
    pub rhs: SetExpr,
}

impl Assertion {
    pub fn eq(lhs: SetExpr, rhs: SetExpr) -> Self {
        Assertion { lhs, rel: Relation::Eq, rhs }
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.lhs.atoms(&mut out);
        self.rhs.atoms(&mut out);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at character {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ParseError {}

const SPECIAL: &[char] = &['[', ']', '|', '@', '(', ')', '"'];

fn write_name(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    let bare = !name.is_empty() && !name.chars().any(|c| c.is_whitespace() || SPECIAL.contains(&c) || c == '\\');
    if bare {
        f.write_str(name)
    } else {
        f.write_str("\"")?;
        for c in name.chars() {
            if c == '"' || c == '\\' {
                f.write_str("\\")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("\"")
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Λ[")?;
        match self {
            Atom::Support { prep } => write_name(f, prep)?,
            Atom::Context { prep, outcome, member } => {
                write_name(f, prep)?;
                f.write_str("|")?;
                write_name(f, outcome)?;
                f.write_str("@")?;
                write_name(f, member)?;
            }
            Atom::Collapsed { prep, outcome } => {
                write_name(f, prep)?;
                f.write_str("|")?;
                write_name(f, outcome)?;
            }
        }
        f.write_str("]")
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[SetExpr], op: &str| {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                if matches!(x, SetExpr::Inter(_) | SetExpr::Union(_)) {
                    write!(f, "({x})")?;
                } else {
                    write!(f, "{x}")?;
                }
            }
            Ok(())
        };
        match self {
            SetExpr::Empty => f.write_str("∅"),
            SetExpr::Atom(a) => write!(f, "{a}"),
            SetExpr::Inter(xs) => join(f, xs, "∩"),
            SetExpr::Union(xs) => join(f, xs, "∪"),
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.rel {
            Relation::Eq => "=",
            Relation::Subset => "⊆",
            Relation::Neq => "≠",
        };
        write!(f, "{} {rel} {}", self.lhs, self.rhs)
    }
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { chars: src.char_indices().collect(), pos: 0, src }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|(_, c)| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn rest(&self) -> &str {
        self.chars.get(self.pos).map_or("", |&(i, _)| &self.src[i..])
    }

    /// Consumes `token` (after whitespace) if it comes next.
    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.chars().count();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.err(format!("expected `{token}`"))
        }
    }

    fn assertion(&mut self) -> Result<Assertion, ParseError> {
        let lhs = self.expr()?;
        let rel = if self.eat("=") {
            Relation::Eq
        } else if self.eat("⊆") || self.eat("<=") {
            Relation::Subset
        } else if self.eat("≠") || self.eat("!=") {
            Relation::Neq
        } else {
            return self.err("expected a relation (=, ⊆, ≠)");
        };
        let rhs = self.expr()?;
        self.skip_ws();
        if self.pos != self.chars.len() {
            return self.err("trailing input");
        }
        Ok(Assertion { lhs, rel, rhs })
    }

    fn expr(&mut self) -> Result<SetExpr, ParseError> {
        let mut parts = vec![self.term()?];
        while self.eat("∪") || self.eat("\\/") {
            parts.push(self.term()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one part") } else { SetExpr::Union(parts) })
    }

    fn term(&mut self) -> Result<SetExpr, ParseError> {
        let mut parts = vec![self.factor()?];
        while self.eat("∩") || self.eat("/\\") {
            parts.push(self.factor()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one part") } else { SetExpr::Inter(parts) })
    }

    fn factor(&mut self) -> Result<SetExpr, ParseError> {
        if self.eat("∅") || self.eat("{}") {
            return Ok(SetExpr::Empty);
        }
        if self.eat("(") {
            let e = self.expr()?;
            self.expect(")")?;
            return Ok(e);
        }
        if self.eat("Λ[") || self.eat("L[") {
            return self.atom_body().map(SetExpr::Atom);
        }
        self.err("expected ∅, an atom Λ[...] or a parenthesized expression")
    }

    fn atom_body(&mut self) -> Result<Atom, ParseError> {
        let prep = self.name()?;
        if self.eat("]") {
            return Ok(Atom::Support { prep });
        }
        self.expect("|")?;
        let outcome = self.name()?;
        if self.eat("]") {
            return Ok(Atom::Collapsed { prep, outcome });
        }
        self.expect("@")?;
        let member = self.name()?;
        self.expect("]")?;
        Ok(Atom::Context { prep, outcome, member })
    }

    fn name(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let mut out = String::new();
        if self.peek() == Some('"') {
            self.pos += 1;
            loop {
                match self.peek() {
                    None => return self.err("unterminated quoted name"),
                    Some('"') => {
                        self.pos += 1;
                        return Ok(out);
                    }
                    Some('\\') => {
                        self.pos += 1;
                        match self.peek() {
                            Some(c @ ('"' | '\\')) => out.push(c),
                            _ => return self.err("bad escape in quoted name"),
                        }
                        self.pos += 1;
                    }
                    Some(c) => {
                        out.push(c);
                        self.pos += 1;
                    }
                }
            }
        }
        while let Some(c) = self.peek() {
            if c.is_whitespace() || SPECIAL.contains(&c) {
                break;
            }
            out.push(c);
            self.pos += 1;
        }
        if out.is_empty() {
            return self.err("expected a name");
        }
        Ok(out)
    }
}

pub fn parse_assertion(src: &str) -> Result<Assertion, ParseError> {
    Parser::new(src).assertion()
}

/// Maximum number of distinct atoms [`entails`] will enumerate.
pub const MAX_ATOMS: usize = 24;

/// Truth table of `expr` over all assignments, 64 assignments per word.
fn eval(expr: &SetExpr, atoms: &[Atom], columns: &[Vec<u64>], words: usize) -> Vec<u64> {
    match expr {
        SetExpr::Empty => vec![0; words],
        SetExpr::Atom(a) => columns[atoms.iter().position(|x| x == a).expect("collected")].clone(),
        SetExpr::Inter(xs) => xs.iter().fold(vec![u64::MAX; words], |acc, x| {
            acc.iter().zip(eval(x, atoms, columns, words)).map(|(a, b)| a & b).collect()
        }),
        SetExpr::Union(xs) => xs.iter().fold(vec![0; words], |acc, x| {
            acc.iter().zip(eval(x, atoms, columns, words)).map(|(a, b)| a | b).collect()
        }),
    }
}

/// Mask of assignments where the assertion holds pointwise.
fn holds(a: &Assertion, atoms: &[Atom], columns: &[Vec<u64>], words: usize) -> Vec<u64> {
    let l = eval(&a.lhs, atoms, columns, words);
    let r = eval(&a.rhs, atoms, columns, words);
    l.iter()
        .zip(&r)
        .map(|(&l, &r)| match a.rel {
            Relation::Eq => !(l ^ r),
            Relation::Subset => !l | r,
            Relation::Neq => unreachable!("filtered by caller"),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entailment {
    Valid,
    Invalid,
    TooManyAtoms(usize),
    NotAnEquation,
}

/// Whether `goal` holds in every algebra of sets in which `premises` hold.
///
/// Equations and inclusions between ∩/∪/∅ terms are valid over all set
/// algebras iff they hold pointwise, so it suffices to check every 0/1
/// membership assignment of the atoms. `≠` is never derivable this way.
pub fn entails(premises: &[Assertion], goal: &Assertion) -> Entailment {
    if goal.rel == Relation::Neq || premises.iter().any(|p| p.rel == Relation::Neq) {
        return Entailment::NotAnEquation;
    }
    let mut atoms: Vec<Atom> = Vec::new();
    for a in premises.iter().chain(std::iter::once(goal)).flat_map(|a| a.atoms()) {
        if !atoms.contains(&a) {
            atoms.push(a);
        }
    }
    let k = atoms.len();
    if k > MAX_ATOMS {
        return Entailment::TooManyAtoms(k);
    }
    let total: u64 = 1 << k;
    let words = total.div_ceil(64) as usize;
    let columns: Vec<Vec<u64>> = (0..k)
        .map(|j| {
            (0..words)
                .map(|w| {
                    let mut bits = 0u64;
                    for b in 0..64u64 {
                        let assignment = w as u64 * 64 + b;
                        if assignment < total && (assignment >> j) & 1 == 1 {
                            bits |= 1 << b;
                        }
                    }
                    bits
                })
                .collect()
        })
        .collect();
    let valid_bits = |w: usize| -> u64 {
        let start = w as u64 * 64;
        if total - start >= 64 {
            u64::MAX
        } else {
            (1u64 << (total - start)) - 1
        }
    };
    let mut premise_mask: Vec<u64> = (0..words).map(valid_bits).collect();
    for p in premises {
        for (m, h) in premise_mask.iter_mut().zip(holds(p, &atoms, &columns, words)) {
            *m &= h;
        }
    }
    let goal_mask = holds(goal, &atoms, &columns, words);
    if premise_mask.iter().zip(&goal_mask).all(|(&p, &g)| p & !g == 0) {
        Entailment::Valid
    } else {
        Entailment::Invalid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Assertion {
        parse_assertion(s).unwrap()
    }

    #[test]
    fn parses_and_prints() {
        let a = p("Λ[phi|B1@phi=0] ∩ Λ[psi] = ∅");
        assert_eq!(a.to_string(), "Λ[phi|B1@phi=0] ∩ Λ[psi] = ∅");
        let b = p("L[phi|B1@phi=0] /\\ L[psi] = {}");
        assert_eq!(a, b);
        let c = p("Λ[phi] = Λ[phi|B1] ∪ Λ[phi|B2]");
        assert_eq!(parse_assertion(&c.to_string()).unwrap(), c);
        let d = p("(Λ[a] ∪ Λ[b]) ∩ Λ[c] <= Λ[c]");
        assert_eq!(d.rel, Relation::Subset);
        assert_eq!(parse_assertion(&d.to_string()).unwrap(), d);
    }

    #[test]
    fn quoted_names_round_trip() {
        let a = Assertion::eq(SetExpr::Atom(Atom::context("x|1", "o|\"1\"", "m=0|id")), SetExpr::Empty);
        let text = a.to_string();
        assert_eq!(parse_assertion(&text).unwrap(), a);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_assertion("Λ[phi] ∩").is_err());
        assert!(parse_assertion("Λ[phi]").is_err());
        assert!(parse_assertion("Λ[] = ∅").is_err());
        assert!(parse_assertion("Λ[a] = ∅ junk").is_err());
    }

    #[test]
    fn distribution_is_valid() {
        let premises = [
            p("Λ[phi] = Λ[phi|B1] ∪ Λ[phi|B2]"),
            p("Λ[phi|B1] ∩ Λ[psi] = ∅"),
            p("Λ[phi|B2] ∩ Λ[psi] = ∅"),
        ];
        assert_eq!(entails(&premises, &p("Λ[phi] ∩ Λ[psi] = ∅")), Entailment::Valid);
        assert_eq!(entails(&premises[..2], &p("Λ[phi] ∩ Λ[psi] = ∅")), Entailment::Invalid);
        assert_eq!(entails(&[], &p("Λ[a] ∩ Λ[b] ⊆ Λ[a]")), Entailment::Valid);
        assert_eq!(entails(&[], &p("Λ[a] ≠ ∅")), Entailment::NotAnEquation);
    }
}
