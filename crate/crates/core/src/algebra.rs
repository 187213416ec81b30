//! The cylindric star algebra: union, intersection, outer and inner
//! cylindrification, diagonals, swaps, the sieve and complement.

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use crate::cylinder::{reduce, Flavor, StarCylinder};
use crate::error::{Error, Result};
use crate::tuple::{dominates, meet, normalize, Literal, StarTuple};
use crate::value::{Const, Value};

/// Ambient evaluation state: the dimension, the active domain and the
/// memoized sieve over them.
#[derive(Debug)]
pub struct EvalContext {
    dim: usize,
    adom: Vec<Const>,
    reduce_unions: bool,
    sieve: OnceLock<SieveIndex>,
}

#[derive(Debug)]
struct SieveIndex {
    rows: StarCylinder,
    /// For each column, the group id of every row under cylindrification of
    /// that column.
    groups: Vec<OnceLock<(Vec<usize>, usize)>>,
}

impl EvalContext {
    pub fn new(dim: usize, adom: impl IntoIterator<Item = Const>) -> Self {
        let adom: BTreeSet<Const> = adom.into_iter().collect();
        EvalContext {
            dim,
            adom: adom.into_iter().collect(),
            reduce_unions: false,
            sieve: OnceLock::new(),
        }
    }

    /// Run `reduce` after every union.
    pub fn with_reduce(mut self, on: bool) -> Self {
        self.reduce_unions = on;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adom(&self) -> &[Const] {
        &self.adom
    }

    pub fn reduces_unions(&self) -> bool {
        self.reduce_unions
    }

    /// Fails unless every constant of `c` is in the active domain.
    pub fn check_covers(&self, c: &StarCylinder) -> Result<()> {
        for a in c.constants() {
            if self.adom.binary_search(&a).is_err() {
                return Err(Error::ConstantOutsideDomain(a.to_string()));
            }
        }
        Ok(())
    }

    fn index(&self) -> &SieveIndex {
        self.sieve.get_or_init(|| SieveIndex {
            rows: build_sieve(self.dim, &self.adom),
            groups: (0..self.dim).map(|_| OnceLock::new()).collect(),
        })
    }

    /// Group ids of the sieve rows under cylindrification of column `col`,
    /// and the number of groups.
    fn groups(&self, col: usize) -> &(Vec<usize>, usize) {
        let index = self.index();
        index.groups[col - 1].get_or_init(|| {
            let mut ids: HashMap<StarTuple, usize> = HashMap::new();
            let of_row = index
                .rows
                .iter()
                .map(|s| {
                    let next = ids.len();
                    *ids.entry(s.cylindrify(col)).or_insert(next)
                })
                .collect();
            (of_row, ids.len())
        })
    }
}

impl Clone for EvalContext {
    fn clone(&self) -> Self {
        EvalContext {
            dim: self.dim,
            adom: self.adom.clone(),
            reduce_unions: self.reduce_unions,
            sieve: OnceLock::new(),
        }
    }
}

fn check_dims(c: &StarCylinder, d: &StarCylinder) -> Result<()> {
    if c.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            left: c.dim(),
            right: d.dim(),
        });
    }
    Ok(())
}

fn check_col(col: usize, dim: usize) -> Result<()> {
    if col == 0 || col > dim {
        return Err(Error::ColumnOutOfRange { index: col, dim });
    }
    Ok(())
}

/// `ḋ_ij`: all tuples whose `i`-th and `j`-th entries agree. For `i = j`
/// this is the full space.
pub fn star_diagonal(ctx: &EvalContext, i: usize, j: usize) -> Result<StarCylinder> {
    diagonal(ctx.dim, i, j)
}

pub(crate) fn diagonal(dim: usize, i: usize, j: usize) -> Result<StarCylinder> {
    check_col(i, dim)?;
    check_col(j, dim)?;
    if i == j {
        return Ok(StarCylinder::full(dim));
    }
    let t = normalize(vec![Value::Star; dim], [Literal::eq(i, j)])?
        .expect("a single equality over stars is satisfiable");
    Ok(StarCylinder::from_parts(dim, Flavor::Positive, vec![t]))
}

pub fn star_union(c: &StarCylinder, d: &StarCylinder) -> Result<StarCylinder> {
    check_dims(c, d)?;
    let flavor = c.flavor().join(d.flavor())?;
    let tuples = c.iter().chain(d.iter()).cloned().collect();
    Ok(StarCylinder::from_parts(c.dim(), flavor, tuples))
}

/// Union followed by `reduce` when the context asks for it.
pub fn star_union_in(ctx: &EvalContext, c: &StarCylinder, d: &StarCylinder) -> Result<StarCylinder> {
    let u = star_union(c, d)?;
    Ok(if ctx.reduce_unions { reduce(&u) } else { u })
}

/// All pairwise meets, unsatisfiable ones dropped.
pub fn star_intersection(c: &StarCylinder, d: &StarCylinder) -> Result<StarCylinder> {
    check_dims(c, d)?;
    let flavor = c.flavor().join(d.flavor())?;
    let mut tuples = Vec::new();
    for t in c {
        for u in d {
            if let Some(m) = meet(t, u)? {
                tuples.push(m);
            }
        }
    }
    Ok(StarCylinder::from_parts(c.dim(), flavor, tuples))
}

/// `ċ_i`: existential quantification of column `i`.
pub fn outer_cyl(c: &StarCylinder, i: usize) -> Result<StarCylinder> {
    check_col(i, c.dim())?;
    let tuples = c.iter().map(|t| t.cylindrify(i)).collect();
    Ok(StarCylinder::from_parts(c.dim(), c.flavor(), tuples))
}

/// `⊔̇_i` for positive and naive cylinders: the tuples that are already
/// unconstrained in column `i`.
pub fn inner_cyl_positive(c: &StarCylinder, i: usize) -> Result<StarCylinder> {
    check_col(i, c.dim())?;
    if c.flavor() == Flavor::Extended {
        return Err(Error::Unsupported(
            "positive inner cylindrification of an extended star-cylinder".into(),
        ));
    }
    let tuples = c
        .iter()
        .filter(|t| t.entry(i).is_star() && !t.conditions().iter().any(|l| l.mentions(i)))
        .cloned()
        .collect();
    Ok(StarCylinder::from_parts(c.dim(), c.flavor(), tuples))
}

/// Calls `f` with every set partition of `k` items, as a block id per item.
fn for_each_partition(k: usize, f: &mut impl FnMut(&[usize])) {
    // restricted growth strings
    let mut rgs = vec![0usize; k];
    loop {
        f(&rgs);
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            let max_prefix = rgs[..pos].iter().copied().max().map_or(0, |m| m + 1);
            if rgs[pos] < max_prefix {
                rgs[pos] += 1;
                for r in rgs.iter_mut().skip(pos + 1) {
                    *r = 0;
                }
                break;
            }
        }
    }
}

fn build_sieve(dim: usize, adom: &[Const]) -> StarCylinder {
    let choices: Vec<Value> = adom
        .iter()
        .cloned()
        .map(Value::Const)
        .chain(std::iter::once(Value::Star))
        .collect();
    let mut rows = Vec::new();
    let mut digits = vec![0usize; dim];
    loop {
        let entries: Vec<Value> = digits.iter().map(|&d| choices[d].clone()).collect();
        let stars: Vec<usize> = (0..dim).filter(|&k| entries[k].is_star()).collect();
        let mut base = Vec::new();
        for &k in &stars {
            for a in adom {
                base.push(Literal::NeqConst(k + 1, a.clone()));
            }
        }
        for_each_partition(stars.len(), &mut |blocks| {
            let mut lits = base.clone();
            for x in 0..stars.len() {
                for y in (x + 1)..stars.len() {
                    let (i, j) = (stars[x] + 1, stars[y] + 1);
                    lits.push(if blocks[x] == blocks[y] {
                        Literal::eq(i, j)
                    } else {
                        Literal::neq(i, j)
                    });
                }
            }
            let t = normalize(entries.clone(), lits)
                .expect("sieve literals are well-formed")
                .expect("a partition is consistent");
            rows.push(t);
        });

        let mut pos = 0;
        loop {
            if pos == dim {
                let flavor = if adom.is_empty() && dim <= 1 {
                    Flavor::Positive
                } else {
                    Flavor::Extended
                };
                return StarCylinder::from_parts(dim, flavor, rows);
            }
            digits[pos] += 1;
            if digits[pos] < choices.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// The sieve `Ȧ` of the context: a partition of the whole space into
/// star-tuples that decide every constant and every column equality.
pub fn sieve(ctx: &EvalContext) -> &StarCylinder {
    &ctx.index().rows
}

/// Marks the sieve rows whose denotation meets `c`. A sieve row meets a
/// cylinder over the active domain exactly when some tuple dominates it.
fn sieve_hits(ctx: &EvalContext, c: &StarCylinder, op: &str) -> Result<Vec<bool>> {
    if c.dim() != ctx.dim {
        return Err(Error::DimensionMismatch {
            left: ctx.dim,
            right: c.dim(),
        });
    }
    if c.flavor() == Flavor::Naive {
        return Err(Error::Unsupported(format!("{op} of a naive star-cylinder")));
    }
    ctx.check_covers(c)?;
    sieve(ctx)
        .iter()
        .map(|s| {
            for t in c {
                if dominates(s, t)? {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect()
}

/// `¬̇`: the sieve rows disjoint from `c`.
pub fn complement(ctx: &EvalContext, c: &StarCylinder) -> Result<StarCylinder> {
    let hits = sieve_hits(ctx, c, "complement")?;
    let rows = sieve(ctx)
        .iter()
        .zip(&hits)
        .filter(|(_, &h)| !h)
        .map(|(s, _)| s.clone())
        .collect();
    Ok(StarCylinder::from_parts(ctx.dim, Flavor::Extended, rows))
}

/// `c ⋒ Ȧ`, written with the sieve rows themselves (each non-empty meet of
/// a sieve row with a tuple over the active domain denotes that row).
pub fn refine(ctx: &EvalContext, c: &StarCylinder) -> Result<StarCylinder> {
    let hits = sieve_hits(ctx, c, "sieve refinement")?;
    let rows = sieve(ctx)
        .iter()
        .zip(&hits)
        .filter(|(_, &h)| h)
        .map(|(s, _)| s.clone())
        .collect();
    Ok(StarCylinder::from_parts(ctx.dim, Flavor::Extended, rows))
}

/// `ĉ_i`: universal quantification of column `i` for extended cylinders.
///
/// Keeps the rows `ṫ` of `c ⋒ Ȧ` such that `ċ_i({ṫ}) ⋒ Ȧ ⪯ c ⋒ Ȧ`. The sieve
/// rows meeting `ċ_i({ṫ})` are exactly those that coincide with `ṫ` once
/// column `i` is cylindrified, so the check reduces to a group lookup.
pub fn inner_cyl_extended(ctx: &EvalContext, c: &StarCylinder, i: usize) -> Result<StarCylinder> {
    check_col(i, ctx.dim)?;
    let hits = sieve_hits(ctx, c, "inner cylindrification")?;
    let (group_of, ngroups) = ctx.groups(i);
    let mut full = vec![true; *ngroups];
    for (k, &h) in hits.iter().enumerate() {
        if !h {
            full[group_of[k]] = false;
        }
    }
    let rows = sieve(ctx)
        .iter()
        .enumerate()
        .filter(|(k, _)| hits[*k] && full[group_of[*k]])
        .map(|(_, s)| s.clone())
        .collect();
    Ok(StarCylinder::from_parts(ctx.dim, Flavor::Extended, rows))
}

/// Column permutation swapping each pair simultaneously. Pairs must be
/// disjoint; `(i, i)` is a no-op.
pub fn swap(c: &StarCylinder, pairs: &[(usize, usize)]) -> Result<StarCylinder> {
    let map = swap_map(c.dim(), pairs)?;
    let tuples = c.iter().map(|t| t.permuted(&map)).collect();
    Ok(StarCylinder::from_parts(c.dim(), c.flavor(), tuples))
}

pub(crate) fn swap_map(dim: usize, pairs: &[(usize, usize)]) -> Result<Vec<usize>> {
    let mut map: Vec<usize> = (1..=dim).collect();
    let mut used = vec![false; dim];
    for &(i, j) in pairs {
        check_col(i, dim)?;
        check_col(j, dim)?;
        if i == j {
            continue;
        }
        if used[i - 1] || used[j - 1] {
            return Err(Error::OverlappingSwap(format!("{pairs:?}")));
        }
        used[i - 1] = true;
        used[j - 1] = true;
        map[i - 1] = j;
        map[j - 1] = i;
    }
    Ok(map)
}
