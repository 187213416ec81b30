//! First-order queries over a relational schema: syntax, printing, parsing
//! and the static passes the compiler relies on.

mod parser;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

pub use parser::{parse_query, parse_query_raw};

/// Relation symbols with their arities. Equality is implicit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    relations: Vec<(String, usize)>,
}

impl Schema {
    pub fn new<S: Into<String>>(relations: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut schema = Schema::default();
        for (name, arity) in relations {
            schema.add(name.into(), arity)?;
        }
        Ok(schema)
    }

    pub fn add(&mut self, name: String, arity: usize) -> Result<usize> {
        if arity == 0 {
            return Err(Error::Semantic(format!("relation {name} must have arity at least 1")));
        }
        if self.index(&name).is_some() {
            return Err(Error::Semantic(format!("relation {name} declared twice")));
        }
        self.relations.push((name, arity));
        Ok(self.relations.len() - 1)
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|(n, _)| n == name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.index(name).map(|p| self.relations[p].1)
    }

    pub fn name(&self, p: usize) -> &str {
        &self.relations[p].0
    }

    pub fn arity_of(&self, p: usize) -> usize {
        self.relations[p].1
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(|(_, a)| *a).max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.relations.iter().map(|(n, a)| (n.as_str(), *a))
    }
}

/// Formulas over variables `x1, x2, …` (stored by index).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String, Vec<usize>),
    EqAtom(usize, usize),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Exists(usize, Box<Formula>),
    Forall(usize, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str, vars: &[usize]) -> Formula {
        Formula::Atom(name.to_string(), vars.to_vec())
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn exists(i: usize, f: Formula) -> Formula {
        Formula::Exists(i, Box::new(f))
    }

    pub fn forall(i: usize, f: Formula) -> Formula {
        Formula::Forall(i, Box::new(f))
    }

    pub fn free_vars(&self) -> BTreeSet<usize> {
        match self {
            Formula::Atom(_, vs) => vs.iter().copied().collect(),
            Formula::EqAtom(i, j) => [*i, *j].into_iter().collect(),
            Formula::And(l, r) | Formula::Or(l, r) => {
                let mut s = l.free_vars();
                s.extend(r.free_vars());
                s
            }
            Formula::Not(f) => f.free_vars(),
            Formula::Exists(i, f) | Formula::Forall(i, f) => {
                let mut s = f.free_vars();
                s.remove(i);
                s
            }
        }
    }

    /// The largest variable index occurring anywhere, bound or free.
    pub fn max_var(&self) -> usize {
        match self {
            Formula::Atom(_, vs) => vs.iter().copied().max().unwrap_or(0),
            Formula::EqAtom(i, j) => (*i).max(*j),
            Formula::And(l, r) | Formula::Or(l, r) => l.max_var().max(r.max_var()),
            Formula::Not(f) => f.max_var(),
            Formula::Exists(i, f) | Formula::Forall(i, f) => (*i).max(f.max_var()),
        }
    }

    fn any(&self, p: &impl Fn(&Formula) -> bool) -> bool {
        if p(self) {
            return true;
        }
        match self {
            Formula::Atom(..) | Formula::EqAtom(..) => false,
            Formula::And(l, r) | Formula::Or(l, r) => l.any(p) || r.any(p),
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.any(p),
        }
    }

    pub fn has_negation(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Not(_)))
    }

    pub fn has_forall(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Forall(..)))
    }

    /// Every negation sits directly on an equality atom.
    fn negates_only_equalities(&self) -> bool {
        !self.any(&|f| matches!(f, Formula::Not(g) if !matches!(**g, Formula::EqAtom(..))))
    }

    /// True if no variable occurs twice among relational atom positions.
    pub fn is_apart(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.apart_walk(&mut seen)
    }

    fn apart_walk(&self, seen: &mut BTreeSet<usize>) -> bool {
        match self {
            Formula::Atom(_, vs) => vs.iter().all(|v| seen.insert(*v)),
            Formula::EqAtom(..) => true,
            Formula::And(l, r) | Formula::Or(l, r) => l.apart_walk(seen) && r.apart_walk(seen),
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.apart_walk(seen),
        }
    }

    /// Renames free occurrences through `map`. Every bound variable moves to
    /// a fresh index taken from `*fresh`, so nothing can be captured.
    pub fn rename_free(&self, map: &dyn Fn(usize) -> usize, fresh: &mut usize) -> Formula {
        match self {
            Formula::Atom(r, vs) => Formula::Atom(r.clone(), vs.iter().map(|v| map(*v)).collect()),
            Formula::EqAtom(i, j) => Formula::EqAtom(map(*i), map(*j)),
            Formula::And(l, r) => Formula::and(l.rename_free(map, fresh), r.rename_free(map, fresh)),
            Formula::Or(l, r) => Formula::or(l.rename_free(map, fresh), r.rename_free(map, fresh)),
            Formula::Not(f) => Formula::not(f.rename_free(map, fresh)),
            Formula::Exists(i, f) | Formula::Forall(i, f) => {
                let b = *fresh;
                *fresh += 1;
                let bound = *i;
                let inner = f.rename_free(&|v| if v == bound { b } else { map(v) }, fresh);
                if matches!(self, Formula::Exists(..)) {
                    Formula::exists(b, inner)
                } else {
                    Formula::forall(b, inner)
                }
            }
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::EqAtom(..) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(r, vs) => {
                write!(f, "{r}(")?;
                for (k, v) in vs.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "x{v}")?;
                }
                write!(f, ")")
            }
            Formula::EqAtom(i, j) => write!(f, "x{i} ~ x{j}"),
            Formula::And(l, r) => write!(f, "({l} & {r})"),
            Formula::Or(l, r) => write!(f, "({l} | {r})"),
            Formula::Not(g) => {
                write!(f, "!")?;
                g.fmt_operand(f)
            }
            Formula::Exists(i, g) => {
                write!(f, "exists x{i} ")?;
                g.fmt_operand(f)
            }
            Formula::Forall(i, g) => {
                write!(f, "forall x{i} ")?;
                g.fmt_operand(f)
            }
        }
    }
}

/// A query `x_{i1}, …, x_{ik} . body`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Query {
    pub head: Vec<usize>,
    pub body: Formula,
    /// Number of variables: the largest index in head or body.
    pub n: usize,
}

impl Query {
    pub fn new(head: Vec<usize>, body: Formula) -> Result<Query> {
        if head.is_empty() {
            return Err(Error::Semantic("a query needs at least one answer variable".into()));
        }
        let free = body.free_vars();
        let mut seen = BTreeSet::new();
        for &v in &head {
            if !seen.insert(v) {
                return Err(Error::Semantic(format!("answer variable x{v} listed twice")));
            }
            if !free.contains(&v) {
                return Err(Error::Semantic(format!("answer variable x{v} is not free in the body")));
            }
        }
        let n = body.max_var().max(head.iter().copied().max().unwrap_or(0));
        Ok(Query { head, body, n })
    }

    /// Checks every atom against the schema.
    pub fn check(&self, schema: &Schema) -> Result<()> {
        check_atoms(&self.body, schema)
    }
}

fn check_atoms(f: &Formula, schema: &Schema) -> Result<()> {
    match f {
        Formula::Atom(r, vs) => match schema.arity(r) {
            None => Err(Error::Semantic(format!("unknown relation {r}"))),
            Some(a) if a != vs.len() => Err(Error::Semantic(format!(
                "relation {r} has arity {a}, used with {} arguments",
                vs.len()
            ))),
            Some(_) => Ok(()),
        },
        Formula::EqAtom(..) => Ok(()),
        Formula::And(l, r) | Formula::Or(l, r) => {
            check_atoms(l, schema)?;
            check_atoms(r, schema)
        }
        Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => check_atoms(g, schema),
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.head.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "x{v}")?;
        }
        write!(f, " . {}", self.body)
    }
}

/// Syntactic query classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueryClass {
    /// No negation, no universal quantifier.
    Positive,
    /// No negation.
    PositiveWithForall,
    /// Negation only directly on equality atoms.
    InequalityOnlyNegation,
    FullFO,
}

impl QueryClass {
    pub fn is_positive(self) -> bool {
        matches!(self, QueryClass::Positive | QueryClass::PositiveWithForall)
    }
}

pub fn classify(q: &Query) -> QueryClass {
    let b = &q.body;
    if !b.has_negation() {
        if b.has_forall() {
            QueryClass::PositiveWithForall
        } else {
            QueryClass::Positive
        }
    } else if b.negates_only_equalities() {
        QueryClass::InequalityOnlyNegation
    } else {
        QueryClass::FullFO
    }
}

/// Makes relational atoms variable-disjoint.
///
/// The first occurrence of a variable in an atom position is kept; every
/// later one is replaced by a fresh `w`, and its atom `A` becomes
/// `exists w (A' & x ~ w)`. The quantifier keeps the rewrite local to the
/// atom, so it is sound under negation and universal quantifiers.
pub fn normalize_vars(q: &Query) -> Query {
    let mut seen = BTreeSet::new();
    let mut fresh = q.n + 1;
    let body = apart(&q.body, &mut seen, &mut fresh);
    let n = body.max_var().max(q.n);
    Query {
        head: q.head.clone(),
        body,
        n,
    }
}

fn apart(f: &Formula, seen: &mut BTreeSet<usize>, fresh: &mut usize) -> Formula {
    match f {
        Formula::Atom(r, vs) => {
            let mut links = Vec::new();
            let renamed = vs
                .iter()
                .map(|&v| {
                    if seen.insert(v) {
                        v
                    } else {
                        let w = *fresh;
                        *fresh += 1;
                        seen.insert(w);
                        links.push((v, w));
                        w
                    }
                })
                .collect();
            let mut out = Formula::Atom(r.clone(), renamed);
            for &(v, w) in &links {
                out = Formula::and(out, Formula::EqAtom(v, w));
            }
            for &(_, w) in links.iter().rev() {
                out = Formula::exists(w, out);
            }
            out
        }
        Formula::EqAtom(..) => f.clone(),
        Formula::And(l, r) => {
            let l = apart(l, seen, fresh);
            Formula::and(l, apart(r, seen, fresh))
        }
        Formula::Or(l, r) => {
            let l = apart(l, seen, fresh);
            Formula::or(l, apart(r, seen, fresh))
        }
        Formula::Not(g) => Formula::not(apart(g, seen, fresh)),
        Formula::Exists(i, g) => Formula::exists(*i, apart(g, seen, fresh)),
        Formula::Forall(i, g) => Formula::forall(*i, apart(g, seen, fresh)),
    }
}
