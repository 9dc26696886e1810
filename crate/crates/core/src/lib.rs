//! Exact arithmetic over `F_q(t)` and a compiler from first-order ring
//! formulas to Diophantine systems.

pub mod artin;
pub mod builders;
pub mod corpus;
pub mod eval;
pub mod factor;
pub mod field;
pub mod formula;
pub mod lower;
pub mod orbit;
pub mod pheidas;
pub mod poly;
pub mod ratfunc;
pub mod sweep;
pub mod term;
pub mod text;

pub use artin::{artin_schreier_solve, AsOutcome, Obstruction};
pub use builders::{build_phi, build_pi, build_pi_root, PhiFamily, PhiPlan};
pub use eval::{eval_pe, EvalResult, Interpretation, SearchBounds, Verdict};
pub use factor::{factorize, is_irreducible, Factorization};
pub use field::{Field, FieldElem, FieldError};
pub use formula::RingFormula;
pub use lower::{single_polynomial, to_system};
pub use orbit::{direct_orbit, orbit_criterion, CriterionConfig};
pub use pheidas::{PheidasFormula, PheidasSentence};
pub use poly::{Poly, PolyError};
pub use ratfunc::{Place, RatFunc, Valuation};
pub use term::{RingTerm, Symbol};
