use std::fmt;
use std::sync::Arc;

/// A domain constant. Ordered and compared by its symbol.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Const(Arc<str>);

impl Const {
    pub fn new(symbol: &str) -> Self {
        Const(Arc::from(symbol))
    }

    /// The `k`-th reserved fresh constant. Fresh constants live in a namespace
    /// that the file format and the query parser never produce, so they can
    /// stand for "some element outside every finite active domain".
    pub fn fresh(k: usize) -> Self {
        Const(Arc::from(format!("#{k}").as_str()))
    }

    pub fn is_fresh(&self) -> bool {
        self.0.starts_with('#')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Const {
    fn from(s: &str) -> Self {
        Const::new(s)
    }
}

impl fmt::Debug for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One entry of a star-tuple.
///
/// `Null(k)` is the existential (naive) null `⊥k`; `Star` is the universal
/// null. Variant order gives the canonical sort: constants, then nulls, then
/// stars.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Const(Const),
    Null(u32),
    Star,
}

impl Value {
    pub fn constant(symbol: &str) -> Self {
        Value::Const(Const::new(symbol))
    }

    pub fn is_star(&self) -> bool {
        matches!(self, Value::Star)
    }

    pub fn as_const(&self) -> Option<&Const> {
        match self {
            Value::Const(c) => Some(c),
            _ => None,
        }
    }
}

impl From<Const> for Value {
    fn from(c: Const) -> Self {
        Value::Const(c)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Const(c) => write!(f, "{c}"),
            Value::Null(k) => write!(f, "?{k}"),
            Value::Star => f.write_str("*"),
        }
    }
}
