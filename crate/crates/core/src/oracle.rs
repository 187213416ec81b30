//! Brute-force finite-model semantics, used as ground truth in tests.
//!
//! Everything here works on explicit sets of constant tuples over a finite
//! universe `T`. Universal nulls range over `T`; fresh constants in `T`
//! stand in for the values outside the active domain.

use std::collections::{BTreeMap, BTreeSet};

use crate::compiler::{eval_dim, evaluate_query, EvalOptions, ScaExpr};
use crate::cylinder::StarCylinder;
use crate::error::{Error, Result};
use crate::logic::{normalize_vars, Formula, Query, Schema};
use crate::tuple::{Literal, StarTuple};
use crate::value::{Const, Value};

pub type Relation = BTreeSet<Vec<Const>>;

/// A finite structure: a universe and one explicit relation per schema
/// symbol, in schema order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub schema: Schema,
    pub universe: Vec<Const>,
    pub relations: Vec<Relation>,
}

/// `adom` followed by `fresh` reserved fresh constants.
pub fn universe(adom: impl IntoIterator<Item = Const>, fresh: usize) -> Vec<Const> {
    let mut u: BTreeSet<Const> = adom.into_iter().collect();
    u.extend((1..=fresh).map(Const::fresh));
    u.into_iter().collect()
}

fn holds(lit: &Literal, row: &[Const]) -> bool {
    match lit {
        Literal::Eq(i, j) => row[i - 1] == row[j - 1],
        Literal::NeqCol(i, j) => row[i - 1] != row[j - 1],
        Literal::NeqConst(i, a) => row[i - 1] != *a,
    }
}

fn ground_tuple(
    t: &StarTuple,
    universe: &[Const],
    null_value: &dyn Fn(u32) -> Option<Const>,
    out: &mut Relation,
) -> Result<()> {
    let mut columns: Vec<Vec<Const>> = Vec::with_capacity(t.dim());
    for v in t.entries() {
        columns.push(match v {
            Value::Const(a) => {
                if !universe.contains(a) {
                    return Err(Error::ConstantOutsideDomain(a.to_string()));
                }
                vec![a.clone()]
            }
            Value::Null(k) => vec![null_value(*k).ok_or_else(|| {
                Error::Semantic(format!("no value assigned to existential null ?{k}"))
            })?],
            Value::Star => universe.to_vec(),
        });
    }
    let mut idx = vec![0usize; columns.len()];
    loop {
        let row: Vec<Const> = idx.iter().zip(&columns).map(|(&k, col)| col[k].clone()).collect();
        if t.conditions().iter().all(|l| holds(l, &row)) {
            out.insert(row);
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(());
            }
            idx[pos] += 1;
            if idx[pos] < columns[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// The ordinary tuples over `universe` represented by `c`.
pub fn ground(c: &StarCylinder, universe: &[Const]) -> Result<Relation> {
    ground_with(c, universe, &|_| None)
}

/// Like [`ground`], with existential nulls replaced through `hom`.
pub fn ground_naive(c: &StarCylinder, hom: &BTreeMap<u32, Const>, universe: &[Const]) -> Result<Relation> {
    ground_with(c, universe, &|k| hom.get(&k).cloned())
}

fn ground_with(c: &StarCylinder, universe: &[Const], null_value: &dyn Fn(u32) -> Option<Const>) -> Result<Relation> {
    let mut out = Relation::new();
    for t in c {
        ground_tuple(t, universe, null_value, &mut out)?;
    }
    Ok(out)
}

/// `Tⁿ`.
pub fn full_space(universe: &[Const], n: usize) -> Relation {
    let mut out = Relation::new();
    let mut idx = vec![0usize; n];
    if n > 0 && universe.is_empty() {
        return out;
    }
    loop {
        out.insert(idx.iter().map(|&k| universe[k].clone()).collect());
        let mut pos = 0;
        loop {
            if pos == n {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < universe.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

impl Instance {
    /// The world obtained by grounding stored relations over `universe`,
    /// with existential nulls sent through `hom`.
    pub fn from_cylinders(
        schema: &Schema,
        relations: &[StarCylinder],
        hom: &BTreeMap<u32, Const>,
        universe: &[Const],
    ) -> Result<Instance> {
        let relations = relations
            .iter()
            .map(|r| ground_naive(r, hom, universe))
            .collect::<Result<Vec<_>>>()?;
        Ok(Instance {
            schema: schema.clone(),
            universe: universe.to_vec(),
            relations,
        })
    }

    fn relation(&self, name: &str) -> Result<&Relation> {
        let p = self
            .schema
            .index(name)
            .ok_or_else(|| Error::Semantic(format!("unknown relation {name}")))?;
        Ok(&self.relations[p])
    }

    /// `Rⁿ`: the relation padded with every value in the remaining columns.
    pub fn expanded(&self, p: usize, n: usize) -> Relation {
        let rest = full_space(&self.universe, n - self.schema.arity_of(p));
        let mut out = Relation::new();
        for t in &self.relations[p] {
            for s in &rest {
                let mut row = t.clone();
                row.extend(s.iter().cloned());
                out.insert(row);
            }
        }
        out
    }
}

fn satisfies(f: &Formula, inst: &Instance, nu: &mut Vec<Option<Const>>) -> Result<bool> {
    let val = |nu: &Vec<Option<Const>>, v: usize| -> Result<Const> {
        nu.get(v)
            .cloned()
            .flatten()
            .ok_or_else(|| Error::Semantic(format!("x{v} has no value")))
    };
    Ok(match f {
        Formula::Atom(r, vs) => {
            let row = vs.iter().map(|&v| val(nu, v)).collect::<Result<Vec<_>>>()?;
            inst.relation(r)?.contains(&row)
        }
        Formula::EqAtom(i, j) => val(nu, *i)? == val(nu, *j)?,
        Formula::And(l, r) => satisfies(l, inst, nu)? && satisfies(r, inst, nu)?,
        Formula::Or(l, r) => satisfies(l, inst, nu)? || satisfies(r, inst, nu)?,
        Formula::Not(g) => !satisfies(g, inst, nu)?,
        Formula::Exists(i, g) | Formula::Forall(i, g) => {
            let universal = matches!(f, Formula::Forall(..));
            if nu.len() <= *i {
                nu.resize(*i + 1, None);
            }
            let saved = nu[*i].clone();
            let mut result = universal;
            for a in &inst.universe {
                nu[*i] = Some(a.clone());
                if satisfies(g, inst, nu)? != universal {
                    result = !universal;
                    break;
                }
            }
            nu[*i] = saved;
            result
        }
    })
}

/// The answer to `q` on `inst`: head projections of all satisfying
/// valuations of the free variables.
pub fn eval_fo(q: &Query, inst: &Instance) -> Result<Relation> {
    let free: Vec<usize> = q.body.free_vars().into_iter().collect();
    let mut nu: Vec<Option<Const>> = vec![None; q.body.max_var().max(q.n) + 1];
    let mut out = Relation::new();
    for assignment in full_space(&inst.universe, free.len()) {
        for (&v, a) in free.iter().zip(&assignment) {
            nu[v] = Some(a.clone());
        }
        if satisfies(&q.body, inst, &mut nu)? {
            out.insert(q.head.iter().map(|&v| nu[v].clone().expect("head is free")).collect());
        }
    }
    Ok(out)
}

fn cylindrify_set(c: &Relation, i: usize, universe: &[Const]) -> Relation {
    let mut out = Relation::new();
    for t in c {
        for a in universe {
            let mut row = t.clone();
            row[i - 1] = a.clone();
            out.insert(row);
        }
    }
    out
}

/// Set-level cylindric algebra over `inst`, in dimension `n`. Inner
/// cylindrification is computed as `¬ c_i ¬`.
pub fn eval_ca_set(e: &ScaExpr, inst: &Instance, n: usize) -> Result<Relation> {
    let u = &inst.universe;
    Ok(match e {
        ScaExpr::Rel(p) => inst.expanded(*p, n),
        ScaExpr::Diag(i, j) => full_space(u, n)
            .into_iter()
            .filter(|t| t[i - 1] == t[j - 1])
            .collect(),
        ScaExpr::Union(l, r) => {
            let mut a = eval_ca_set(l, inst, n)?;
            a.extend(eval_ca_set(r, inst, n)?);
            a
        }
        ScaExpr::Intersect(l, r) => {
            let a = eval_ca_set(l, inst, n)?;
            let b = eval_ca_set(r, inst, n)?;
            a.intersection(&b).cloned().collect()
        }
        ScaExpr::Complement(g) => {
            let a = eval_ca_set(g, inst, n)?;
            full_space(u, n).difference(&a).cloned().collect()
        }
        ScaExpr::OuterCyl(i, g) => cylindrify_set(&eval_ca_set(g, inst, n)?, *i, u),
        ScaExpr::InnerCyl(i, g) => {
            let all = full_space(u, n);
            let neg: Relation = all.difference(&eval_ca_set(g, inst, n)?).cloned().collect();
            let cyl = cylindrify_set(&neg, *i, u);
            all.difference(&cyl).cloned().collect()
        }
        ScaExpr::Swap(ps, g) => eval_ca_set(g, inst, n)?
            .into_iter()
            .map(|mut t| {
                for &(i, j) in ps {
                    t.swap(i - 1, j - 1);
                }
                t
            })
            .collect(),
    })
}

/// Outcome of comparing star-cylinder evaluation against the oracle.
#[derive(Clone, Debug)]
pub struct Differential {
    pub universe: Vec<Const>,
    /// Grounded answer of the star-cylinder pipeline.
    pub got: Relation,
    /// Answer of the Tarskian evaluation on the grounded world.
    pub expected: Relation,
}

impl Differential {
    pub fn agrees(&self) -> bool {
        self.got == self.expected
    }
}

/// Evaluates `q` both ways over stored relations without existential
/// nulls. `fresh` defaults to one more than the dimension of `q` before
/// its variables are made apart.
pub fn differential(
    q: &Query,
    schema: &Schema,
    relations: &[StarCylinder],
    fresh: Option<usize>,
) -> Result<Differential> {
    let nq = normalize_vars(q);
    let result = evaluate_query(&nq, schema, relations, &EvalOptions::default())?;
    let adom: BTreeSet<Const> = relations.iter().flat_map(|r| r.constants()).collect();
    let fresh = fresh.unwrap_or(eval_dim(q, schema) + 1);
    let t = universe(adom, fresh);
    let got = ground(&result.answer, &t)?;
    let inst = Instance::from_cylinders(schema, relations, &BTreeMap::new(), &t)?;
    let expected = eval_fo(q, &inst)?;
    Ok(Differential {
        universe: t,
        got,
        expected,
    })
}
