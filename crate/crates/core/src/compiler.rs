//! Translation of queries into cylindric star algebra expressions, the
//! reverse translation, and evaluation.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::algebra::{
    complement, inner_cyl_extended, inner_cyl_positive, outer_cyl, star_diagonal, star_intersection,
    star_union_in, swap, EvalContext,
};
use crate::cylinder::{Flavor, StarCylinder};
use crate::error::{Error, Result};
use crate::logic::{Formula, Query, Schema};
use crate::value::Const;

/// Expressions of the cylindric star algebra. `Rel(p)` is the `p`-th
/// relation of the schema, horizontally expanded to the evaluation
/// dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ScaExpr {
    Rel(usize),
    Diag(usize, usize),
    Union(Box<ScaExpr>, Box<ScaExpr>),
    Intersect(Box<ScaExpr>, Box<ScaExpr>),
    Complement(Box<ScaExpr>),
    OuterCyl(usize, Box<ScaExpr>),
    InnerCyl(usize, Box<ScaExpr>),
    /// Simultaneous transposition of disjoint column pairs.
    Swap(Vec<(usize, usize)>, Box<ScaExpr>),
}

impl ScaExpr {
    pub fn union(l: ScaExpr, r: ScaExpr) -> ScaExpr {
        ScaExpr::Union(Box::new(l), Box::new(r))
    }

    pub fn intersect(l: ScaExpr, r: ScaExpr) -> ScaExpr {
        ScaExpr::Intersect(Box::new(l), Box::new(r))
    }

    pub fn complement(e: ScaExpr) -> ScaExpr {
        ScaExpr::Complement(Box::new(e))
    }

    pub fn outer(i: usize, e: ScaExpr) -> ScaExpr {
        ScaExpr::OuterCyl(i, Box::new(e))
    }

    pub fn inner(i: usize, e: ScaExpr) -> ScaExpr {
        ScaExpr::InnerCyl(i, Box::new(e))
    }

    pub fn swap(pairs: Vec<(usize, usize)>, e: ScaExpr) -> ScaExpr {
        ScaExpr::Swap(pairs, Box::new(e))
    }

    pub fn has_complement(&self) -> bool {
        match self {
            ScaExpr::Rel(_) | ScaExpr::Diag(..) => false,
            ScaExpr::Complement(_) => true,
            ScaExpr::Union(l, r) | ScaExpr::Intersect(l, r) => l.has_complement() || r.has_complement(),
            ScaExpr::OuterCyl(_, e) | ScaExpr::InnerCyl(_, e) | ScaExpr::Swap(_, e) => e.has_complement(),
        }
    }

    pub fn has_inner_cyl(&self) -> bool {
        match self {
            ScaExpr::Rel(_) | ScaExpr::Diag(..) => false,
            ScaExpr::InnerCyl(..) => true,
            ScaExpr::Union(l, r) | ScaExpr::Intersect(l, r) => l.has_inner_cyl() || r.has_inner_cyl(),
            ScaExpr::Complement(e) | ScaExpr::OuterCyl(_, e) | ScaExpr::Swap(_, e) => e.has_inner_cyl(),
        }
    }

    /// The largest column index mentioned.
    pub fn max_column(&self) -> usize {
        match self {
            ScaExpr::Rel(_) => 0,
            ScaExpr::Diag(i, j) => (*i).max(*j),
            ScaExpr::Union(l, r) | ScaExpr::Intersect(l, r) => l.max_column().max(r.max_column()),
            ScaExpr::Complement(e) => e.max_column(),
            ScaExpr::OuterCyl(i, e) | ScaExpr::InnerCyl(i, e) => (*i).max(e.max_column()),
            ScaExpr::Swap(ps, e) => ps
                .iter()
                .map(|(i, j)| (*i).max(*j))
                .max()
                .unwrap_or(0)
                .max(e.max_column()),
        }
    }

    /// Renders the expression with relation names from `schema`.
    pub fn render(&self, schema: &Schema) -> String {
        let mut s = String::new();
        self.render_into(schema, &mut s);
        s
    }

    fn render_into(&self, schema: &Schema, s: &mut String) {
        match self {
            ScaExpr::Rel(p) => s.push_str(schema.name(*p)),
            ScaExpr::Diag(i, j) => {
                let _ = write!(s, "d{i},{j}");
            }
            ScaExpr::Union(l, r) | ScaExpr::Intersect(l, r) => {
                s.push('(');
                l.render_into(schema, s);
                s.push_str(if matches!(self, ScaExpr::Union(..)) { " + " } else { " * " });
                r.render_into(schema, s);
                s.push(')');
            }
            ScaExpr::Complement(e) => {
                s.push_str("not(");
                e.render_into(schema, s);
                s.push(')');
            }
            ScaExpr::OuterCyl(i, e) | ScaExpr::InnerCyl(i, e) => {
                let op = if matches!(self, ScaExpr::OuterCyl(..)) { "c" } else { "i" };
                let _ = write!(s, "{op}{i}(");
                e.render_into(schema, s);
                s.push(')');
            }
            ScaExpr::Swap(ps, e) => {
                s.push_str("z[");
                for (k, (i, j)) in ps.iter().enumerate() {
                    if k > 0 {
                        s.push(' ');
                    }
                    let _ = write!(s, "{i}:{j}");
                }
                s.push_str("](");
                e.render_into(schema, s);
                s.push(')');
            }
        }
    }
}

/// Transpositions that move each `content` column to its `target`, grouped
/// into runs of pairwise disjoint pairs (each run is one simultaneous swap).
fn placement(moves: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let size = moves.iter().map(|&(c, t)| c.max(t)).max().unwrap_or(0);
    let mut at: Vec<usize> = (0..=size).collect();
    let mut where_is: Vec<usize> = (0..=size).collect();
    let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
    for &(content, target) in moves {
        let p = where_is[content];
        if p == target {
            continue;
        }
        let other = at[target];
        at.swap(p, target);
        where_is[content] = target;
        where_is[other] = p;
        let pair = (p.min(target), p.max(target));
        let fits = groups.last().is_some_and(|g| {
            g.iter()
                .all(|&(i, j)| i != pair.0 && i != pair.1 && j != pair.0 && j != pair.1)
        });
        match groups.last_mut() {
            Some(g) if fits => g.push(pair),
            _ => groups.push(vec![pair]),
        }
    }
    groups
}

fn wrap_swaps(e: ScaExpr, groups: Vec<Vec<(usize, usize)>>) -> ScaExpr {
    groups.into_iter().fold(e, |acc, g| ScaExpr::swap(g, acc))
}

fn compile_formula(f: &Formula, schema: &Schema) -> Result<ScaExpr> {
    Ok(match f {
        Formula::Atom(r, vs) => {
            let p = schema
                .index(r)
                .ok_or_else(|| Error::Semantic(format!("unknown relation {r}")))?;
            let moves: Vec<(usize, usize)> = vs.iter().enumerate().map(|(l, &v)| (l + 1, v)).collect();
            wrap_swaps(ScaExpr::Rel(p), placement(&moves))
        }
        Formula::EqAtom(i, j) => ScaExpr::Diag((*i).min(*j), (*i).max(*j)),
        Formula::And(l, r) => ScaExpr::intersect(compile_formula(l, schema)?, compile_formula(r, schema)?),
        Formula::Or(l, r) => ScaExpr::union(compile_formula(l, schema)?, compile_formula(r, schema)?),
        Formula::Not(g) => ScaExpr::complement(compile_formula(g, schema)?),
        Formula::Exists(i, g) => ScaExpr::outer(*i, compile_formula(g, schema)?),
        Formula::Forall(i, g) => ScaExpr::inner(*i, compile_formula(g, schema)?),
    })
}

/// Compiles a variable-apart query. Free variables outside the head are
/// cylindrified, and the head variables are moved to columns `1..=k`.
pub fn compile(q: &Query, schema: &Schema) -> Result<ScaExpr> {
    if !q.body.is_apart() {
        return Err(Error::Semantic(
            "query must be variable-apart (apply normalize_vars first)".into(),
        ));
    }
    q.check(schema)?;
    let mut e = compile_formula(&q.body, schema)?;
    let head: BTreeSet<usize> = q.head.iter().copied().collect();
    for v in q.body.free_vars() {
        if !head.contains(&v) {
            e = ScaExpr::outer(v, e);
        }
    }
    let moves: Vec<(usize, usize)> = q.head.iter().enumerate().map(|(l, &v)| (v, l + 1)).collect();
    Ok(wrap_swaps(e, placement(&moves)))
}

/// The column count used to evaluate `q` over `schema`.
pub fn eval_dim(q: &Query, schema: &Schema) -> usize {
    q.n.max(schema.max_arity()).max(q.head.len())
}

fn padding(n: usize, skip: &[usize]) -> Option<Formula> {
    (1..=n)
        .filter(|k| !skip.contains(k))
        .map(|k| Formula::EqAtom(k, k))
        .reduce(Formula::and)
}

fn with_padding(f: Formula, n: usize, skip: &[usize]) -> Formula {
    match padding(n, skip) {
        Some(p) => Formula::and(f, p),
        None => f,
    }
}

/// The reverse translation: a formula whose free variables are `x1..xn`
/// and whose answer set is the value of `e`. Swaps become capture-avoiding
/// renamings; bound variables may be moved above `n`.
pub fn sca_to_fo(e: &ScaExpr, schema: &Schema, n: usize) -> Formula {
    let mut fresh = n.max(e.max_column()) + 1;
    to_fo(e, schema, n, &mut fresh)
}

fn to_fo(e: &ScaExpr, schema: &Schema, n: usize, fresh: &mut usize) -> Formula {
    match e {
        ScaExpr::Rel(p) => {
            let ar = schema.arity_of(*p);
            let vars: Vec<usize> = (1..=ar).collect();
            with_padding(Formula::Atom(schema.name(*p).to_string(), vars.clone()), n, &vars)
        }
        ScaExpr::Diag(i, j) => with_padding(Formula::EqAtom(*i, *j), n, &[*i, *j]),
        ScaExpr::Union(l, r) => Formula::or(to_fo(l, schema, n, fresh), to_fo(r, schema, n, fresh)),
        ScaExpr::Intersect(l, r) => Formula::and(to_fo(l, schema, n, fresh), to_fo(r, schema, n, fresh)),
        ScaExpr::Complement(g) => Formula::not(to_fo(g, schema, n, fresh)),
        ScaExpr::OuterCyl(i, g) => Formula::and(
            Formula::exists(*i, to_fo(g, schema, n, fresh)),
            Formula::EqAtom(*i, *i),
        ),
        ScaExpr::InnerCyl(i, g) => Formula::and(
            Formula::forall(*i, to_fo(g, schema, n, fresh)),
            Formula::EqAtom(*i, *i),
        ),
        ScaExpr::Swap(ps, g) => {
            let inner = to_fo(g, schema, n, fresh);
            let map = |v: usize| {
                for &(i, j) in ps {
                    if v == i {
                        return j;
                    }
                    if v == j {
                        return i;
                    }
                }
                v
            };
            inner.rename_free(&map, fresh)
        }
    }
}

/// Evaluates `e` bottom-up over relations already expanded to `ctx.dim()`.
///
/// Inner cylindrification uses the positive operator on positive and naive
/// arguments and the sieve-based operator on extended ones.
pub fn evaluate(e: &ScaExpr, db: &[StarCylinder], ctx: &EvalContext) -> Result<StarCylinder> {
    Ok(match e {
        ScaExpr::Rel(p) => {
            let c = db
                .get(*p)
                .ok_or_else(|| Error::Semantic(format!("no relation with ordinal {p}")))?;
            if c.dim() != ctx.dim() {
                return Err(Error::DimensionMismatch {
                    left: ctx.dim(),
                    right: c.dim(),
                });
            }
            c.clone()
        }
        ScaExpr::Diag(i, j) => star_diagonal(ctx, *i, *j)?,
        ScaExpr::Union(l, r) => star_union_in(ctx, &evaluate(l, db, ctx)?, &evaluate(r, db, ctx)?)?,
        ScaExpr::Intersect(l, r) => star_intersection(&evaluate(l, db, ctx)?, &evaluate(r, db, ctx)?)?,
        ScaExpr::Complement(g) => {
            let c = evaluate(g, db, ctx)?;
            if c.flavor() == Flavor::Naive {
                return Err(Error::Unsupported(
                    "negation over existential nulls; use brute-force certain membership".into(),
                ));
            }
            complement(ctx, &c)?
        }
        ScaExpr::OuterCyl(i, g) => outer_cyl(&evaluate(g, db, ctx)?, *i)?,
        ScaExpr::InnerCyl(i, g) => {
            let c = evaluate(g, db, ctx)?;
            if c.flavor() == Flavor::Extended {
                inner_cyl_extended(ctx, &c, *i)?
            } else {
                inner_cyl_positive(&c, *i)?
            }
        }
        ScaExpr::Swap(ps, g) => swap(&evaluate(g, db, ctx)?, ps)?,
    })
}

/// Cylindrifies columns `k+1..` and keeps the first `k` columns.
pub fn project_answer(c: &StarCylinder, k: usize) -> Result<StarCylinder> {
    let mut c = c.clone();
    for j in (k + 1)..=c.dim() {
        c = outer_cyl(&c, j)?;
    }
    let rows = c
        .iter()
        .map(|t| t.truncated(k).expect("cylindrified columns are unconstrained"))
        .collect::<Vec<_>>();
    StarCylinder::from_tuples(k, rows)
}

/// Knobs for [`evaluate_query`].
#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Run `reduce` after unions.
    pub reduce: bool,
    /// Refuse sieve-based evaluation above this dimension.
    pub max_sieve_dim: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            reduce: false,
            max_sieve_dim: 8,
        }
    }
}

/// The result of evaluating a query: the compiled expression, its
/// `dim`-dimensional value, and the answer restricted to the head columns.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub expr: ScaExpr,
    pub dim: usize,
    pub full: StarCylinder,
    pub answer: StarCylinder,
}

/// Compiles `q` and evaluates it over stored relations (one per schema
/// symbol, in schema order, each of its own arity). The active domain is the
/// set of constants in the relations.
pub fn evaluate_query(
    q: &Query,
    schema: &Schema,
    relations: &[StarCylinder],
    opts: &EvalOptions,
) -> Result<Evaluation> {
    if relations.len() != schema.len() {
        return Err(Error::Semantic(format!(
            "expected {} relations, got {}",
            schema.len(),
            relations.len()
        )));
    }
    let expr = compile(q, schema)?;
    let dim = eval_dim(q, schema);
    let needs_sieve = expr.has_complement()
        || (expr.has_inner_cyl() && relations.iter().any(|r| r.flavor() == Flavor::Extended));
    if needs_sieve && dim > opts.max_sieve_dim {
        return Err(Error::Budget(format!(
            "query needs the sieve in dimension {dim}, above the cap {}",
            opts.max_sieve_dim
        )));
    }
    let adom: BTreeSet<Const> = relations.iter().flat_map(|r| r.constants()).collect();
    let ctx = EvalContext::new(dim, adom).with_reduce(opts.reduce);
    let db = relations
        .iter()
        .map(|r| r.expanded(dim))
        .collect::<Result<Vec<_>>>()?;
    let full = evaluate(&expr, &db, &ctx)?;
    let answer = project_answer(&full, q.head.len())?;
    Ok(Evaluation {
        expr,
        dim,
        full,
        answer,
    })
}
