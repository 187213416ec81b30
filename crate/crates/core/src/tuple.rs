//! Star-tuples, condition literals, normal form, dominance and meet.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::value::{Const, Value};

/// A condition literal over 1-based column positions.
///
/// `Eq` and `NeqCol` are always stored with the smaller column first; the
/// constructors take care of the orientation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Eq(usize, usize),
    NeqCol(usize, usize),
    NeqConst(usize, Const),
}

impl Literal {
    pub fn eq(i: usize, j: usize) -> Self {
        Literal::Eq(i.min(j), i.max(j))
    }

    pub fn neq(i: usize, j: usize) -> Self {
        Literal::NeqCol(i.min(j), i.max(j))
    }

    pub fn neq_const(i: usize, a: impl Into<Const>) -> Self {
        Literal::NeqConst(i, a.into())
    }

    pub fn mentions(&self, col: usize) -> bool {
        match self {
            Literal::Eq(i, j) | Literal::NeqCol(i, j) => *i == col || *j == col,
            Literal::NeqConst(i, _) => *i == col,
        }
    }

    /// True for the inequality literals that only extended star-cylinders may carry.
    pub fn is_inequality(&self) -> bool {
        !matches!(self, Literal::Eq(..))
    }

    fn max_column(&self) -> usize {
        match self {
            Literal::Eq(i, j) | Literal::NeqCol(i, j) => (*i).max(*j),
            Literal::NeqConst(i, _) => *i,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let (lo, hi) = match self {
            Literal::Eq(i, j) | Literal::NeqCol(i, j) => {
                if i == j {
                    return Err(Error::MalformedLiteral(format!(
                        "{self}: a literal must relate two distinct columns"
                    )));
                }
                ((*i).min(*j), (*i).max(*j))
            }
            Literal::NeqConst(i, _) => (*i, *i),
        };
        if lo == 0 || hi > dim {
            return Err(Error::ColumnOutOfRange {
                index: if lo == 0 { 0 } else { hi },
                dim,
            });
        }
        Ok(())
    }

    /// Applies a column renaming (`map[c - 1]` is the new position of column `c`).
    pub(crate) fn renamed(&self, map: &[usize]) -> Literal {
        match self {
            Literal::Eq(i, j) => Literal::eq(map[i - 1], map[j - 1]),
            Literal::NeqCol(i, j) => Literal::neq(map[i - 1], map[j - 1]),
            Literal::NeqConst(i, a) => Literal::NeqConst(map[i - 1], a.clone()),
        }
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Eq(i, j) => write!(f, "{i}={j}"),
            Literal::NeqCol(i, j) => write!(f, "{i}!={j}"),
            Literal::NeqConst(i, a) => write!(f, "{i}!={a}"),
        }
    }
}

/// A canonically ordered, duplicate-free set of literals.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConditionSet(Vec<Literal>);

impl ConditionSet {
    pub fn empty() -> Self {
        ConditionSet(Vec::new())
    }

    fn from_sorted(mut lits: Vec<Literal>) -> Self {
        lits.sort();
        lits.dedup();
        ConditionSet(lits)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Literal> {
        self.0.iter()
    }

    pub fn contains(&self, lit: &Literal) -> bool {
        self.0.binary_search(lit).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Literal] {
        &self.0
    }
}

impl fmt::Debug for ConditionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// A row over constants, existential nulls and stars together with a
/// satisfiable, logically closed condition set.
///
/// Values of this type are always in normal form: equality classes are
/// transitively closed and share one entry, inequalities are propagated to
/// every member of their classes, an inequality touching a constant-valued
/// class is rewritten to `NeqConst` on the other side, and `NeqConst` only
/// sits on star entries. Unsatisfiable combinations are never represented.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StarTuple {
    entries: Vec<Value>,
    cond: ConditionSet,
}

struct Classes {
    parent: Vec<usize>,
}

impl Classes {
    fn new(n: usize) -> Self {
        Classes {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut k: usize) -> usize {
        while self.parent[k] != k {
            self.parent[k] = self.parent[self.parent[k]];
            k = self.parent[k];
        }
        k
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Brings a raw row and literal set into normal form.
///
/// Returns `Ok(None)` when the row denotes the empty set, and `Err` for
/// structural problems (column out of range, a literal relating a column to
/// itself, inequalities over existential nulls).
pub fn normalize(
    entries: Vec<Value>,
    literals: impl IntoIterator<Item = Literal>,
) -> Result<Option<StarTuple>> {
    let n = entries.len();
    let lits: Vec<Literal> = literals.into_iter().collect();
    for l in &lits {
        l.validate(n)?;
    }
    if lits.is_empty() {
        return Ok(Some(StarTuple {
            entries,
            cond: ConditionSet::empty(),
        }));
    }

    let mut classes = Classes::new(n);
    for l in &lits {
        if let Literal::Eq(i, j) = l {
            classes.union(i - 1, j - 1);
        }
    }
    let root: Vec<usize> = (0..n).map(|k| classes.find(k)).collect();

    // The non-star value shared by each class (indexed by root), if any.
    let mut class_val: Vec<Option<Value>> = vec![None; n];
    for k in 0..n {
        if entries[k].is_star() {
            continue;
        }
        match &class_val[root[k]] {
            None => class_val[root[k]] = Some(entries[k].clone()),
            Some(v) if *v == entries[k] => {}
            Some(_) => return Ok(None),
        }
    }

    let mut neq_roots: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut neq_consts: BTreeSet<(usize, Const)> = BTreeSet::new();
    for l in &lits {
        match l {
            Literal::Eq(..) => {}
            Literal::NeqCol(i, j) => {
                let (ri, rj) = (root[i - 1], root[j - 1]);
                if ri == rj {
                    return Ok(None);
                }
                match (&class_val[ri], &class_val[rj]) {
                    (Some(Value::Const(a)), Some(Value::Const(b))) => {
                        if a == b {
                            return Ok(None);
                        }
                    }
                    (Some(Value::Const(a)), None) => {
                        neq_consts.insert((rj, a.clone()));
                    }
                    (None, Some(Value::Const(b))) => {
                        neq_consts.insert((ri, b.clone()));
                    }
                    (None, None) => {
                        neq_roots.insert((ri.min(rj), ri.max(rj)));
                    }
                    _ => return Err(Error::FlavorMismatch("naive", "extended")),
                }
            }
            Literal::NeqConst(i, a) => match &class_val[root[i - 1]] {
                Some(Value::Const(b)) => {
                    if a == b {
                        return Ok(None);
                    }
                }
                Some(_) => return Err(Error::FlavorMismatch("naive", "extended")),
                None => {
                    neq_consts.insert((root[i - 1], a.clone()));
                }
            },
        }
    }

    let entries: Vec<Value> = (0..n)
        .map(|k| class_val[root[k]].clone().unwrap_or(Value::Star))
        .collect();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if root[i] == root[j] {
                out.push(Literal::Eq(i + 1, j + 1));
            } else if neq_roots.contains(&(root[i].min(root[j]), root[i].max(root[j]))) {
                out.push(Literal::NeqCol(i + 1, j + 1));
            }
        }
    }
    for (r, a) in &neq_consts {
        for k in 0..n {
            if root[k] == *r {
                out.push(Literal::NeqConst(k + 1, a.clone()));
            }
        }
    }
    Ok(Some(StarTuple {
        entries,
        cond: ConditionSet::from_sorted(out),
    }))
}

impl StarTuple {
    /// Builds and normalizes a tuple; `None` if it is unsatisfiable.
    pub fn new(entries: Vec<Value>, literals: impl IntoIterator<Item = Literal>) -> Result<Option<Self>> {
        normalize(entries, literals)
    }

    /// The unconditional all-star tuple, denoting the full space.
    pub fn full(dim: usize) -> Self {
        StarTuple {
            entries: vec![Value::Star; dim],
            cond: ConditionSet::empty(),
        }
    }

    /// An ordinary tuple of constants.
    pub fn ground(values: &[Const]) -> Self {
        StarTuple {
            entries: values.iter().cloned().map(Value::Const).collect(),
            cond: ConditionSet::empty(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Value] {
        &self.entries
    }

    pub fn entry(&self, col: usize) -> &Value {
        &self.entries[col - 1]
    }

    pub fn conditions(&self) -> &ConditionSet {
        &self.cond
    }

    pub fn has_nulls(&self) -> bool {
        self.entries.iter().any(|v| matches!(v, Value::Null(_)))
    }

    pub fn has_inequalities(&self) -> bool {
        self.cond.iter().any(Literal::is_inequality)
    }

    /// Every constant mentioned by an entry or a literal.
    pub fn constants(&self) -> impl Iterator<Item = &Const> + '_ {
        self.entries
            .iter()
            .filter_map(Value::as_const)
            .chain(self.cond.iter().filter_map(|l| match l {
                Literal::NeqConst(_, a) => Some(a),
                _ => None,
            }))
    }

    pub fn nulls(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().filter_map(|v| match v {
            Value::Null(k) => Some(*k),
            _ => None,
        })
    }

    /// Outer cylindrification of a single tuple: column `col` becomes a star
    /// and every literal mentioning it is dropped. Sound because the
    /// condition set is closed.
    pub fn cylindrify(&self, col: usize) -> StarTuple {
        let mut entries = self.entries.clone();
        entries[col - 1] = Value::Star;
        let cond = self
            .cond
            .iter()
            .filter(|l| !l.mentions(col))
            .cloned()
            .collect();
        StarTuple {
            entries,
            cond: ConditionSet(cond),
        }
    }

    /// Moves column `c` to position `map[c - 1]`; `map` must be a permutation.
    pub(crate) fn permuted(&self, map: &[usize]) -> StarTuple {
        let mut entries = vec![Value::Star; self.dim()];
        for (k, v) in self.entries.iter().enumerate() {
            entries[map[k] - 1] = v.clone();
        }
        let cond = self.cond.iter().map(|l| l.renamed(map)).collect();
        StarTuple {
            entries,
            cond: ConditionSet::from_sorted(cond),
        }
    }

    /// Pads with star columns up to `dim`; conditions keep their positions.
    pub fn expanded(&self, dim: usize) -> StarTuple {
        let mut entries = self.entries.clone();
        entries.resize(dim, Value::Star);
        StarTuple {
            entries,
            cond: self.cond.clone(),
        }
    }

    /// Keeps the first `k` columns. The dropped columns must be unconstrained
    /// stars, otherwise `None`.
    pub fn truncated(&self, k: usize) -> Option<StarTuple> {
        if self.entries[k..].iter().any(|v| !v.is_star()) || self.cond.iter().any(|l| l.max_column() > k) {
            return None;
        }
        Some(StarTuple {
            entries: self.entries[..k].to_vec(),
            cond: self.cond.clone(),
        })
    }

    /// Replaces entries through `f` and renormalizes.
    pub fn map_entries(&self, f: impl Fn(&Value) -> Value) -> Result<Option<StarTuple>> {
        let entries = self.entries.iter().map(f).collect();
        normalize(entries, self.cond.iter().cloned())
    }
}

impl fmt::Debug for StarTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for StarTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        if !self.cond.is_empty() {
            write!(f, " | ")?;
            for (k, l) in self.cond.iter().enumerate() {
                if k > 0 {
                    write!(f, "; ")?;
                }
                write!(f, "{l}")?;
            }
        }
        write!(f, ")")
    }
}

fn check_dims(t: &StarTuple, u: &StarTuple) -> Result<()> {
    if t.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            left: t.dim(),
            right: u.dim(),
        });
    }
    Ok(())
}

/// The meet `t ⋏ u`: the greatest star-tuple dominated by both, or `None`
/// when their denotations are disjoint.
///
/// Existential nulls behave as fixed, pairwise distinct objects: two
/// different nulls (or a null and a constant) in one column clash, while a
/// star yields to the null.
pub fn meet(t: &StarTuple, u: &StarTuple) -> Result<Option<StarTuple>> {
    check_dims(t, u)?;
    if (t.has_nulls() || u.has_nulls()) && (t.has_inequalities() || u.has_inequalities()) {
        return Err(Error::FlavorMismatch("naive", "extended"));
    }
    let mut entries = Vec::with_capacity(t.dim());
    for (a, b) in t.entries.iter().zip(&u.entries) {
        let v = match (a, b) {
            (Value::Star, x) | (x, Value::Star) => x.clone(),
            (x, y) if x == y => x.clone(),
            _ => return Ok(None),
        };
        entries.push(v);
    }
    if t.cond.is_empty() && u.cond.is_empty() {
        return Ok(Some(StarTuple {
            entries,
            cond: ConditionSet::empty(),
        }));
    }
    normalize(
        entries,
        t.cond.iter().chain(u.cond.iter()).cloned(),
    )
}

/// Does the tuple `t` entail `i ≠ j`?
fn entails_neq_cols(t: &StarTuple, i: usize, j: usize) -> bool {
    match (t.entry(i), t.entry(j)) {
        (Value::Const(a), Value::Const(b)) => a != b,
        (Value::Const(a), Value::Star) => t.cond.contains(&Literal::NeqConst(j, a.clone())),
        (Value::Star, Value::Const(b)) => t.cond.contains(&Literal::NeqConst(i, b.clone())),
        (Value::Star, Value::Star) => t.cond.contains(&Literal::neq(i, j)),
        _ => false,
    }
}

fn entails_neq_const(t: &StarTuple, i: usize, a: &Const) -> bool {
    match t.entry(i) {
        Value::Const(b) => b != a,
        Value::Star => t.cond.contains(&Literal::NeqConst(i, a.clone())),
        Value::Null(_) => false,
    }
}

/// `t ⪯ u`: every ordinary tuple represented by `t` is represented by `u`.
///
/// Entries are compared with `a ⪯ a`, `⊥k ⪯ ⊥k`, `x ⪯ *`; every literal of
/// `u` must be entailed by `t` (equal entries or an explicit `Eq` for
/// equalities; distinct constants or the corresponding stored inequality for
/// inequalities).
pub fn dominates(t: &StarTuple, u: &StarTuple) -> Result<bool> {
    check_dims(t, u)?;
    for (a, b) in t.entries.iter().zip(&u.entries) {
        if !b.is_star() && a != b {
            return Ok(false);
        }
    }
    for l in u.cond.iter() {
        let ok = match l {
            Literal::Eq(i, j) => match (t.entry(*i), t.entry(*j)) {
                (Value::Star, Value::Star) => t.cond.contains(l),
                (x, y) => x == y && !x.is_star(),
            },
            Literal::NeqCol(i, j) => entails_neq_cols(t, *i, *j),
            Literal::NeqConst(i, a) => entails_neq_const(t, *i, a),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Value {
        Value::constant(s)
    }

    const S: Value = Value::Star;

    fn tup(entries: Vec<Value>, lits: Vec<Literal>) -> StarTuple {
        StarTuple::new(entries, lits).unwrap().expect("satisfiable")
    }

    #[test]
    fn constant_propagates_through_equality() {
        let t = tup(vec![c("a"), S, S], vec![Literal::eq(1, 2)]);
        assert_eq!(t.entries(), &[c("a"), c("a"), S]);
        assert!(t.conditions().contains(&Literal::eq(1, 2)));
    }

    #[test]
    fn equality_closure() {
        let t = tup(
            vec![c("a"), c("b"), S, S, S],
            vec![Literal::eq(3, 4), Literal::eq(4, 5)],
        );
        assert_eq!(
            t.conditions().as_slice(),
            &[Literal::eq(3, 4), Literal::eq(3, 5), Literal::eq(4, 5)]
        );
    }

    #[test]
    fn contradictions_are_unsat() {
        assert!(normalize(vec![S, S], vec![Literal::eq(1, 2), Literal::neq(1, 2)])
            .unwrap()
            .is_none());
        assert!(normalize(vec![c("a"), S], vec![Literal::eq(1, 2), Literal::neq_const(2, "a")])
            .unwrap()
            .is_none());
        assert!(normalize(vec![c("a"), c("b")], vec![Literal::eq(1, 2)])
            .unwrap()
            .is_none());
        assert!(normalize(vec![c("a"), S], vec![Literal::neq_const(1, "a")])
            .unwrap()
            .is_none());
    }

    #[test]
    fn structural_errors_are_not_unsat() {
        assert!(matches!(
            normalize(vec![S, S], vec![Literal::eq(1, 3)]),
            Err(Error::ColumnOutOfRange { .. })
        ));
        assert!(matches!(
            normalize(vec![S, S], vec![Literal::NeqCol(2, 2)]),
            Err(Error::MalformedLiteral(_))
        ));
        assert!(matches!(
            normalize(vec![Value::Null(1), S], vec![Literal::neq(1, 2)]),
            Err(Error::FlavorMismatch(..))
        ));
    }

    #[test]
    fn inequalities_are_closed_over_classes() {
        let t = tup(
            vec![S, S, S],
            vec![Literal::eq(1, 2), Literal::neq(2, 3), Literal::neq_const(1, "a")],
        );
        assert!(t.conditions().contains(&Literal::neq(1, 3)));
        assert!(t.conditions().contains(&Literal::neq_const(2, "a")));
        // inequality against a constant column becomes a constant inequality
        let u = tup(vec![c("a"), S], vec![Literal::neq(1, 2)]);
        assert_eq!(u.conditions().as_slice(), &[Literal::neq_const(2, "a")]);
        // satisfied literals disappear
        let w = tup(vec![c("a"), c("b")], vec![Literal::neq(1, 2), Literal::neq_const(1, "z")]);
        assert!(w.conditions().is_empty());
    }

    #[test]
    fn meet_example() {
        let t = tup(vec![c("a"), S, S, S, S], vec![Literal::eq(3, 4)]);
        let u = tup(vec![S, c("b"), S, S, S], vec![Literal::eq(4, 5)]);
        let m = meet(&t, &u).unwrap().unwrap();
        let expected = tup(
            vec![c("a"), c("b"), S, S, S],
            vec![Literal::eq(3, 4), Literal::eq(4, 5), Literal::eq(3, 5)],
        );
        assert_eq!(m, expected);
        assert!(dominates(&m, &t).unwrap());
        assert!(dominates(&m, &u).unwrap());
        assert_eq!(meet(&t, &StarTuple::full(5)).unwrap(), Some(t.clone()));
    }

    #[test]
    fn meet_clashes() {
        let t = tup(vec![c("a"), S], vec![]);
        let u = tup(vec![c("b"), S], vec![]);
        assert_eq!(meet(&t, &u).unwrap(), None);
        let n1 = tup(vec![Value::Null(1), S], vec![]);
        let n2 = tup(vec![Value::Null(2), S], vec![]);
        assert_eq!(meet(&n1, &n2).unwrap(), None);
        assert_eq!(meet(&n1, &t).unwrap(), None);
        assert_eq!(meet(&n1, &StarTuple::full(2)).unwrap(), Some(n1.clone()));
        let ext = tup(vec![S, S], vec![Literal::neq_const(2, "a")]);
        assert!(matches!(meet(&n1, &ext), Err(Error::FlavorMismatch(..))));
        assert!(matches!(
            meet(&t, &StarTuple::full(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dominance_basics() {
        let ab = tup(vec![c("a"), c("b")], vec![]);
        let a_star = tup(vec![c("a"), S], vec![]);
        assert!(dominates(&ab, &a_star).unwrap());
        assert!(!dominates(&a_star, &ab).unwrap());
        let free = StarTuple::full(2);
        let diag = tup(vec![S, S], vec![Literal::eq(1, 2)]);
        assert!(!dominates(&free, &diag).unwrap());
        assert!(dominates(&diag, &free).unwrap());
        let aa = tup(vec![c("a"), c("a")], vec![]);
        assert!(dominates(&aa, &diag).unwrap());
    }

    #[test]
    fn dominance_with_inequalities() {
        let t = tup(vec![c("a"), S], vec![Literal::neq_const(2, "a")]);
        let u = tup(vec![S, S], vec![Literal::neq(1, 2)]);
        assert!(dominates(&t, &u).unwrap());
        let v = tup(vec![c("a"), S], vec![]);
        assert!(!dominates(&v, &u).unwrap());
        let w = tup(vec![c("b"), S], vec![]);
        let x = tup(vec![S, S], vec![Literal::neq_const(1, "a")]);
        assert!(dominates(&w, &x).unwrap());
    }

    #[test]
    fn cylindrify_and_truncate() {
        let t = tup(
            vec![c("a"), c("b"), S, S, S],
            vec![Literal::eq(3, 4), Literal::eq(4, 5)],
        );
        let t = t.cylindrify(1).cylindrify(4);
        assert_eq!(t, tup(vec![S, c("b"), S, S, S], vec![Literal::eq(3, 5)]));
        assert_eq!(t.truncated(2), None);
        let u = tup(vec![c("a"), S, S], vec![]);
        assert_eq!(u.truncated(1).unwrap().entries(), &[c("a")]);
    }
}
