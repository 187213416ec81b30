//! Star-cylinders: finite sets of star-tuples of one dimension.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::tuple::{dominates, StarTuple};
use crate::value::Const;

/// Which kind of star-tuples a cylinder may hold.
///
/// `Positive` cylinders carry only equality literals and no existential
/// nulls; `Extended` ones may also carry inequalities; `Naive` ones may
/// carry existential nulls but only equality literals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    Positive,
    Extended,
    Naive,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Positive => "positive",
            Flavor::Extended => "extended",
            Flavor::Naive => "naive",
        }
    }

    /// The least flavor able to hold both arguments' tuples.
    pub fn join(self, other: Flavor) -> Result<Flavor> {
        match (self, other) {
            (Flavor::Positive, f) | (f, Flavor::Positive) => Ok(f),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(Error::FlavorMismatch(a.name(), b.name())),
        }
    }

    /// The least flavor of a single tuple.
    pub fn of_tuple(t: &StarTuple) -> Result<Flavor> {
        match (t.has_nulls(), t.has_inequalities()) {
            (false, false) => Ok(Flavor::Positive),
            (true, false) => Ok(Flavor::Naive),
            (false, true) => Ok(Flavor::Extended),
            (true, true) => Err(Error::FlavorMismatch("naive", "extended")),
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A finite, duplicate-free, canonically sorted set of normal-form
/// star-tuples of dimension `dim`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StarCylinder {
    dim: usize,
    flavor: Flavor,
    tuples: Vec<StarTuple>,
}

impl StarCylinder {
    /// Builds a cylinder of the given flavor, checking every tuple.
    pub fn new(dim: usize, flavor: Flavor, tuples: impl IntoIterator<Item = StarTuple>) -> Result<Self> {
        let tuples: Vec<StarTuple> = tuples.into_iter().collect();
        for t in &tuples {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: t.dim(),
                });
            }
            let tf = Flavor::of_tuple(t)?;
            if flavor.join(tf)? != flavor {
                return Err(Error::InvalidCylinder(format!(
                    "{flavor} cylinder cannot hold {tf} tuple {t}"
                )));
            }
        }
        Ok(Self::from_parts(dim, flavor, tuples))
    }

    /// Builds a cylinder with the least flavor that fits its tuples.
    pub fn from_tuples(dim: usize, tuples: impl IntoIterator<Item = StarTuple>) -> Result<Self> {
        let tuples: Vec<StarTuple> = tuples.into_iter().collect();
        let mut flavor = Flavor::Positive;
        for t in &tuples {
            flavor = flavor.join(Flavor::of_tuple(t)?)?;
        }
        Self::new(dim, flavor, tuples)
    }

    pub(crate) fn from_parts(dim: usize, flavor: Flavor, mut tuples: Vec<StarTuple>) -> Self {
        tuples.sort();
        tuples.dedup();
        StarCylinder { dim, flavor, tuples }
    }

    pub fn empty(dim: usize, flavor: Flavor) -> Self {
        StarCylinder {
            dim,
            flavor,
            tuples: Vec::new(),
        }
    }

    /// The cylinder denoting the whole space.
    pub fn full(dim: usize) -> Self {
        StarCylinder {
            dim,
            flavor: Flavor::Positive,
            tuples: vec![StarTuple::full(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn tuples(&self) -> &[StarTuple] {
        &self.tuples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, StarTuple> {
        self.tuples.iter()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &StarTuple) -> bool {
        self.tuples.binary_search(t).is_ok()
    }

    pub fn constants(&self) -> BTreeSet<Const> {
        self.tuples
            .iter()
            .flat_map(|t| t.constants().cloned())
            .collect()
    }

    pub fn nulls(&self) -> BTreeSet<u32> {
        self.tuples.iter().flat_map(|t| t.nulls()).collect()
    }

    /// Re-tags the cylinder with a wider flavor.
    pub fn with_flavor(self, flavor: Flavor) -> Result<Self> {
        if self.flavor.join(flavor)? != flavor {
            return Err(Error::FlavorMismatch(self.flavor.name(), flavor.name()));
        }
        Ok(StarCylinder { flavor, ..self })
    }

    /// Horizontal expansion: pads every tuple with star columns up to `dim`.
    pub fn expanded(&self, dim: usize) -> Result<Self> {
        if dim < self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: dim,
            });
        }
        Ok(StarCylinder {
            dim,
            flavor: self.flavor,
            tuples: self.tuples.iter().map(|t| t.expanded(dim)).collect(),
        })
    }
}

impl fmt::Debug for StarCylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.flavor, self.tuples)
    }
}

impl fmt::Display for StarCylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tuples {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a StarCylinder {
    type Item = &'a StarTuple;
    type IntoIter = std::slice::Iter<'a, StarTuple>;

    fn into_iter(self) -> Self::IntoIter {
        self.tuples.iter()
    }
}

fn check_dims(c: &StarCylinder, d: &StarCylinder) -> Result<()> {
    if c.dim != d.dim {
        return Err(Error::DimensionMismatch {
            left: c.dim,
            right: d.dim,
        });
    }
    Ok(())
}

/// `c ⪯ d`: every tuple of `c` is dominated by some tuple of `d`.
pub fn cyl_dominates(c: &StarCylinder, d: &StarCylinder) -> Result<bool> {
    check_dims(c, d)?;
    for t in &c.tuples {
        let mut found = false;
        for u in &d.tuples {
            if dominates(t, u)? {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Drops every tuple dominated by another tuple of the cylinder.
pub fn reduce(c: &StarCylinder) -> StarCylinder {
    let ts = &c.tuples;
    let keep: Vec<StarTuple> = ts
        .iter()
        .enumerate()
        .filter(|(k, t)| {
            !ts.iter().enumerate().any(|(m, u)| {
                m != *k
                    && dominates(t, u).unwrap_or(false)
                    && (m < *k || !dominates(u, t).unwrap_or(false))
            })
        })
        .map(|(_, t)| t.clone())
        .collect();
    StarCylinder {
        dim: c.dim,
        flavor: c.flavor,
        tuples: keep,
    }
}
