//! Existential nulls: possible-world homomorphisms, certain answers and the
//! small-scale decision procedures built on enumerating homomorphisms.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{refine, EvalContext};
use crate::compiler::{evaluate, evaluate_query, project_answer, EvalOptions, ScaExpr};
use crate::cylinder::{cyl_dominates, Flavor, StarCylinder};
use crate::error::{Error, Result};
use crate::logic::{classify, normalize_vars, Query, Schema};
use crate::tuple::{dominates, StarTuple};
use crate::value::{Const, Value};

/// A possible-world homomorphism: sends existential nulls to constants or
/// nulls, fixes constants and stars.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PwHom {
    map: BTreeMap<u32, Value>,
}

impl PwHom {
    pub fn new(map: BTreeMap<u32, Value>) -> Result<Self> {
        if map.values().any(Value::is_star) {
            return Err(Error::Semantic("a homomorphism cannot send a null to a star".into()));
        }
        Ok(PwHom { map })
    }

    /// A homomorphism into constants only.
    pub fn grounding(map: &BTreeMap<u32, Const>) -> Self {
        PwHom {
            map: map.iter().map(|(k, a)| (*k, Value::Const(a.clone()))).collect(),
        }
    }

    pub fn identity(nulls: impl IntoIterator<Item = u32>) -> Self {
        PwHom {
            map: nulls.into_iter().map(|k| (k, Value::Null(k))).collect(),
        }
    }

    pub fn get(&self, null: u32) -> Option<&Value> {
        self.map.get(&null)
    }

    fn apply(&self, v: &Value) -> Result<Value> {
        match v {
            Value::Null(k) => self
                .map
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Semantic(format!("homomorphism undefined on ?{k}"))),
            other => Ok(other.clone()),
        }
    }
}

/// `h(c)`: entrywise application, renormalized; tuples that become
/// unsatisfiable are dropped. The result is positive once no null is left.
pub fn apply_hom(h: &PwHom, c: &StarCylinder) -> Result<StarCylinder> {
    if c.flavor() == Flavor::Extended {
        return Err(Error::Unsupported("homomorphisms apply to naive star-cylinders".into()));
    }
    let mut rows = Vec::new();
    for t in c {
        for k in t.nulls() {
            h.apply(&Value::Null(k))?;
        }
        if let Some(u) = t.map_entries(|v| h.apply(v).expect("checked above"))? {
            rows.push(u);
        }
    }
    StarCylinder::from_tuples(c.dim(), rows)
}

/// `c↓`: the tuples without existential nulls.
pub fn downarrow(c: &StarCylinder) -> StarCylinder {
    let rows: Vec<StarTuple> = c.iter().filter(|t| !t.has_nulls()).cloned().collect();
    StarCylinder::new(c.dim(), Flavor::Positive, rows).expect("null-free naive tuples are positive")
}

/// Certain answers of a negation-free query: naive evaluation followed by
/// `↓`, restricted to the head columns.
pub fn certain_answer(q: &Query, schema: &Schema, relations: &[StarCylinder]) -> Result<StarCylinder> {
    if !classify(q).is_positive() {
        return Err(Error::Unsupported(
            "certain answers by naive evaluation need a negation-free query".into(),
        ));
    }
    let ev = evaluate_query(&normalize_vars(q), schema, relations, &EvalOptions::default())?;
    project_answer(&downarrow(&ev.full), q.head.len())
}

/// Calls `f` with every map from `nulls` into `targets`.
pub fn for_each_assignment<T: Clone>(
    nulls: &[u32],
    targets: &[T],
    f: &mut impl FnMut(&BTreeMap<u32, T>) -> Result<bool>,
) -> Result<bool> {
    if targets.is_empty() && !nulls.is_empty() {
        return Ok(true);
    }
    let mut idx = vec![0usize; nulls.len()];
    loop {
        let map: BTreeMap<u32, T> = nulls.iter().zip(&idx).map(|(&k, &i)| (k, targets[i].clone())).collect();
        if !f(&map)? {
            return Ok(false);
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(true);
            }
            idx[pos] += 1;
            if idx[pos] < targets.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn all_nulls(cs: &[StarCylinder]) -> Vec<u32> {
    cs.iter()
        .flat_map(|c| c.nulls())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn all_constants(cs: &[StarCylinder]) -> BTreeSet<Const> {
    cs.iter().flat_map(|c| c.constants()).collect()
}

fn check_budget(count: usize, budget: usize) -> Result<()> {
    if count > budget {
        return Err(Error::Budget(format!("{count} existential nulls, budget {budget}")));
    }
    Ok(())
}

/// Is the constant tuple `t` a certain answer of `q`?
///
/// Enumerates every homomorphism from the nulls of the database into the
/// active domain, the constants of `t`, and one fresh value per null, and
/// evaluates `q` in each resulting world with the full algebra. Any query
/// class is accepted because every world is null-free.
pub fn certain_membership_bruteforce(
    t: &[Const],
    q: &Query,
    schema: &Schema,
    relations: &[StarCylinder],
    budget: usize,
) -> Result<bool> {
    if t.len() != q.head.len() {
        return Err(Error::Semantic(format!(
            "tuple has {} values, the query returns {} columns",
            t.len(),
            q.head.len()
        )));
    }
    let nulls = all_nulls(relations);
    check_budget(nulls.len(), budget)?;
    let mut targets = all_constants(relations);
    targets.extend(t.iter().cloned());
    targets.extend((1..=nulls.len()).map(Const::fresh));
    let targets: Vec<Const> = targets.into_iter().collect();
    let probe = StarTuple::ground(t);
    let q = normalize_vars(q);
    for_each_assignment(&nulls, &targets, &mut |map| {
        let h = PwHom::grounding(map);
        let world = relations
            .iter()
            .map(|r| apply_hom(&h, r))
            .collect::<Result<Vec<_>>>()?;
        let ev = evaluate_query(&q, schema, &world, &EvalOptions::default())?;
        for u in &ev.answer {
            if dominates(&probe, u)? {
                return Ok(true);
            }
        }
        Ok(false)
    })
}

fn rep_targets(sub: &[StarCylinder], sup: &[StarCylinder]) -> Vec<Value> {
    let mut consts = all_constants(sub);
    consts.extend(all_constants(sup));
    consts.insert(Const::fresh(1));
    consts
        .into_iter()
        .map(Value::Const)
        .chain(all_nulls(sub).into_iter().map(Value::Null))
        .collect()
}

/// `Rep(c) ⊆ Rep(d)` for naive star-cylinders: is there a homomorphism `h`
/// on the nulls of `d` with `h(d) ⪯ c`?
pub fn rep_containment(c: &StarCylinder, d: &StarCylinder, budget: usize) -> Result<bool> {
    rep_containment_db(std::slice::from_ref(c), std::slice::from_ref(d), budget)
}

/// [`rep_containment`] for whole databases: one homomorphism must work for
/// every relation at once.
pub fn rep_containment_db(c: &[StarCylinder], d: &[StarCylinder], budget: usize) -> Result<bool> {
    if c.len() != d.len() {
        return Err(Error::Semantic("databases have different numbers of relations".into()));
    }
    for (x, y) in c.iter().zip(d) {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: y.dim(),
            });
        }
        for z in [x, y] {
            if z.flavor() == Flavor::Extended {
                return Err(Error::Unsupported("Rep containment of extended star-cylinders".into()));
            }
        }
    }
    let nulls = all_nulls(d);
    check_budget(nulls.len(), budget)?;
    let targets = rep_targets(c, d);
    let found = !for_each_assignment(&nulls, &targets, &mut |map| {
        let h = PwHom::new(map.clone())?;
        for (x, y) in c.iter().zip(d) {
            if !cyl_dominates(&apply_hom(&h, y)?, x)? {
                return Ok(true);
            }
        }
        Ok(false)
    })?;
    Ok(found)
}

/// Is the view `e1` over `c` contained in the view `e2` over `d`, in the
/// sense that for every world `h(c)` some world `g(d)` gives the same
/// answer? Relations must already be expanded to `dim`.
///
/// `h` ranges over the active domain plus one fresh value per null of `c`;
/// `g` additionally over one fresh value per null of `d`. Answers are
/// compared through the common sieve.
pub fn view_containment_bruteforce(
    e1: &ScaExpr,
    c: &[StarCylinder],
    e2: &ScaExpr,
    d: &[StarCylinder],
    dim: usize,
    budget: usize,
) -> Result<bool> {
    if e1.has_complement() || e2.has_complement() {
        return Err(Error::Unsupported("view containment needs positive expressions".into()));
    }
    let (nc, nd) = (all_nulls(c), all_nulls(d));
    check_budget(nc.len() + nd.len(), budget)?;
    let mut base = all_constants(c);
    base.extend(all_constants(d));
    let h_targets: Vec<Const> = base
        .iter()
        .cloned()
        .chain((1..=nc.len()).map(Const::fresh))
        .collect();
    let g_targets: Vec<Const> = h_targets
        .iter()
        .cloned()
        .chain((nc.len() + 1..=nc.len() + nd.len()).map(Const::fresh))
        .collect();
    let world = |db: &[StarCylinder], map: &BTreeMap<u32, Const>, e: &ScaExpr| -> Result<StarCylinder> {
        let h = PwHom::grounding(map);
        let w = db.iter().map(|r| apply_hom(&h, r)).collect::<Result<Vec<_>>>()?;
        evaluate(e, &w, &EvalContext::new(dim, []))
    };
    for_each_assignment(&nc, &h_targets, &mut |hmap| {
        let left = world(c, hmap, e1)?;
        let matched = !for_each_assignment(&nd, &g_targets, &mut |gmap| {
            let right = world(d, gmap, e2)?;
            let mut adom = left.constants();
            adom.extend(right.constants());
            let ctx = EvalContext::new(dim, adom);
            Ok(refine(&ctx, &left)? != refine(&ctx, &right)?)
        })?;
        Ok(matched)
    })
}
