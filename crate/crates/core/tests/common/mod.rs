#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use starcyl::io::{load, LoadOptions, StoredDatabase};
use starcyl::logic::{classify, Formula, Query, QueryClass, Schema};
use starcyl::{Const, Literal, ScaExpr, StarCylinder, StarTuple, Value};

pub const CONSTS: [&str; 3] = ["a", "b", "c"];

pub fn data(name: &str) -> StoredDatabase {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    load(path, LoadOptions::default()).expect("example data loads").db
}

pub fn k(s: &str) -> Const {
    Const::new(s)
}

pub fn c(s: &str) -> Value {
    Value::constant(s)
}

pub fn tup(entries: Vec<Value>, lits: Vec<Literal>) -> StarTuple {
    StarTuple::new(entries, lits).unwrap().expect("satisfiable")
}

pub fn cyl(dim: usize, rows: Vec<StarTuple>) -> StarCylinder {
    StarCylinder::from_tuples(dim, rows).unwrap()
}

/// What kind of literals and entries a generated tuple may carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Positive,
    Extended,
    /// Existential nulls `?1..=?nulls`, equalities only.
    Naive { nulls: u32 },
}

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn consts(&mut self, max: usize) -> Vec<Const> {
        let m = self.rng.gen_range(1..=max);
        CONSTS[..m].iter().map(|s| k(s)).collect()
    }

    pub fn value(&mut self, consts: &[Const], kind: Kind) -> Value {
        let roll = self.rng.gen_range(0..10);
        match kind {
            Kind::Naive { nulls } if nulls > 0 && roll < 3 => Value::Null(self.rng.gen_range(1..=nulls)),
            _ if roll < 6 && !consts.is_empty() => Value::Const(consts.choose(&mut self.rng).unwrap().clone()),
            _ => Value::Star,
        }
    }

    fn literal(&mut self, dim: usize, consts: &[Const], kind: Kind) -> Option<Literal> {
        let i = self.rng.gen_range(1..=dim);
        let j = (i + self.rng.gen_range(0..dim.max(2) - 1)) % dim + 1;
        let roll = self.rng.gen_range(0..3);
        match kind {
            Kind::Extended if roll == 2 && !consts.is_empty() => {
                Some(Literal::neq_const(i, consts.choose(&mut self.rng).unwrap().clone()))
            }
            _ if i == j => None,
            Kind::Extended if roll == 1 => Some(Literal::neq(i, j)),
            _ => Some(Literal::eq(i, j)),
        }
    }

    /// A random satisfiable star-tuple, or `None` if the draw was unsatisfiable.
    pub fn tuple(&mut self, dim: usize, consts: &[Const], kind: Kind) -> Option<StarTuple> {
        let entries = (0..dim).map(|_| self.value(consts, kind)).collect();
        let lits = if dim == 0 { 0 } else { self.rng.gen_range(0..=2) };
        let lits: Vec<Literal> = (0..lits).filter_map(|_| self.literal(dim, consts, kind)).collect();
        StarTuple::new(entries, lits).unwrap()
    }

    pub fn cylinder(&mut self, dim: usize, consts: &[Const], kind: Kind, max_rows: usize) -> StarCylinder {
        let rows = self.rng.gen_range(0..=max_rows);
        let tuples: Vec<StarTuple> = (0..rows).filter_map(|_| self.tuple(dim, consts, kind)).collect();
        StarCylinder::from_tuples(dim, tuples).unwrap()
    }

    pub fn schema(&mut self) -> Schema {
        let m = self.rng.gen_range(1..=3);
        let rels: Vec<(String, usize)> = (0..m)
            .map(|p| (format!("R{}", p + 1), self.rng.gen_range(1..=2 + usize::from(p == 2))))
            .collect();
        Schema::new(rels).unwrap()
    }

    pub fn relations(&mut self, schema: &Schema, consts: &[Const], kind: Kind, max_rows: usize) -> Vec<StarCylinder> {
        schema
            .iter()
            .map(|(_, a)| self.cylinder(a, consts, kind, max_rows))
            .collect()
    }

    /// A random query of exactly `class` (FullFO also accepts queries that
    /// only negate equalities). With `apart`, no variable is used by two
    /// relational atoms.
    pub fn query(&mut self, schema: &Schema, n: usize, class: QueryClass, apart: bool) -> Query {
        loop {
            let mut used = BTreeSet::new();
            let body = self.formula(schema, n, class, 3, apart, &mut used);
            let free: Vec<usize> = body.free_vars().into_iter().collect();
            let (body, free) = if free.is_empty() {
                let v = self.rng.gen_range(1..=n);
                (Formula::and(body, Formula::EqAtom(v, v)), vec![v])
            } else {
                (body, free)
            };
            let mut head = free.clone();
            head.shuffle(&mut self.rng);
            head.truncate(self.rng.gen_range(1..=free.len().min(3)));
            let q = Query::new(head, body).unwrap();
            let got = classify(&q);
            let ok = match class {
                QueryClass::FullFO => matches!(got, QueryClass::FullFO | QueryClass::InequalityOnlyNegation),
                other => got == other,
            };
            if ok {
                return q;
            }
        }
    }

    fn formula(
        &mut self,
        schema: &Schema,
        n: usize,
        class: QueryClass,
        depth: usize,
        apart: bool,
        used: &mut BTreeSet<usize>,
    ) -> Formula {
        let leaf = depth == 0 || self.rng.gen_range(0..4) == 0;
        if leaf {
            if self.rng.gen_range(0..4) > 0 {
                let p = self.rng.gen_range(0..schema.len());
                let arity = schema.arity_of(p);
                let vars: Option<Vec<usize>> = if apart {
                    let mut free: Vec<usize> = (1..=n).filter(|v| !used.contains(v)).collect();
                    free.shuffle(&mut self.rng);
                    (free.len() >= arity).then(|| free[..arity].to_vec())
                } else {
                    Some((0..arity).map(|_| self.rng.gen_range(1..=n)).collect())
                };
                if let Some(vars) = vars {
                    used.extend(vars.iter().copied());
                    return Formula::atom(schema.name(p), &vars);
                }
            }
            return Formula::EqAtom(self.rng.gen_range(1..=n), self.rng.gen_range(1..=n));
        }
        let negation = class == QueryClass::FullFO;
        let forall = class != QueryClass::Positive;
        let sub = |g: &mut Gen, used: &mut BTreeSet<usize>| g.formula(schema, n, class, depth - 1, apart, used);
        match self.rng.gen_range(0..6) {
            0 => Formula::and(sub(self, used), sub(self, used)),
            1 => Formula::or(sub(self, used), sub(self, used)),
            2 if negation => Formula::not(sub(self, used)),
            3 if forall => {
                let v = self.rng.gen_range(1..=n);
                Formula::forall(v, sub(self, used))
            }
            _ => {
                let v = self.rng.gen_range(1..=n);
                Formula::exists(v, sub(self, used))
            }
        }
    }

    /// A random expression over relations `0..rels` in dimension `dim`.
    pub fn expr(&mut self, dim: usize, rels: usize, depth: usize, complement: bool) -> ScaExpr {
        let col = |g: &mut Gen| g.rng.gen_range(1..=dim);
        if depth == 0 || self.rng.gen_range(0..4) == 0 {
            if dim >= 2 && self.rng.gen_range(0..5) == 0 {
                let i = col(self);
                let j = i % dim + 1;
                return ScaExpr::Diag(i, j);
            }
            return ScaExpr::Rel(self.rng.gen_range(0..rels));
        }
        let d = depth - 1;
        match self.rng.gen_range(0..7) {
            0 => ScaExpr::union(self.expr(dim, rels, d, complement), self.expr(dim, rels, d, complement)),
            1 => ScaExpr::intersect(self.expr(dim, rels, d, complement), self.expr(dim, rels, d, complement)),
            2 => {
                let i = col(self);
                ScaExpr::outer(i, self.expr(dim, rels, d, complement))
            }
            3 => {
                let i = col(self);
                ScaExpr::inner(i, self.expr(dim, rels, d, complement))
            }
            4 if dim >= 2 => {
                let i = col(self);
                let j = i % dim + 1;
                ScaExpr::swap(vec![(i, j)], self.expr(dim, rels, d, complement))
            }
            5 if complement => ScaExpr::complement(self.expr(dim, rels, d, complement)),
            _ => ScaExpr::intersect(self.expr(dim, rels, d, complement), self.expr(dim, rels, d, complement)),
        }
    }
}
