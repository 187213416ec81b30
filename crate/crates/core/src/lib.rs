//! Star-cylinders and the cylindric star algebra.
//!
//! A star-cylinder is a finite set of rows over constants, universal nulls
//! (`*`) and existential nulls (`?k`), each row carrying a condition set of
//! equalities and inequalities between columns and constants. Star-cylinders
//! represent infinite relations finitely, and first-order queries compile to
//! expressions over them that evaluate in polynomial time for a fixed query.

pub mod algebra;
pub mod compiler;
pub mod cylinder;
pub mod error;
pub mod io;
pub mod logic;
pub mod naive;
pub mod oracle;
pub mod tuple;
pub mod value;

pub use algebra::EvalContext;
pub use compiler::{compile, evaluate, evaluate_query, EvalOptions, Evaluation, ScaExpr};
pub use cylinder::{cyl_dominates, reduce, Flavor, StarCylinder};
pub use error::{Error, Result};
pub use io::{LoadOptions, StoredDatabase};
pub use logic::{classify, normalize_vars, parse_query, Formula, Query, QueryClass, Schema};
pub use tuple::{dominates, meet, normalize, ConditionSet, Literal, StarTuple};
pub use value::{Const, Value};
