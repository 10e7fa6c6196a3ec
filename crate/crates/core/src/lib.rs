//! Generalized quadratic forms over real quadratic fields.
//!
//! Everything is exact: elements of `Q(sqrt(D))` carry rational coordinates and every
//! sign or definiteness decision is made without floating point. Floating point is
//! only used to size search intervals, which are then filtered exactly.

pub mod analysis;
pub mod field;
pub mod forms;
pub mod matrix;
pub mod paperlab;
pub mod search;

pub use analysis::{
    delta_lower_bound, generalized_delta, unit_scale_down, AnalysisError, DeltaCertificate,
    ScaledTarget,
};
pub use field::{
    arith, enumerate_totally_positive, int, rat, ArithOp, BasisKind, FieldContext, FieldElement,
    FieldError, Rational, TotallyPositiveListing,
};
pub use forms::{
    AssociatedForm, Atom, Definiteness, Flag, FormError, GeneralizedForm, QuadraticForm, Subform,
};
pub use search::{
    decompose, indecomposables_up_to, represent_bounded, represent_definite, universality_report,
    IndecomposableListing, RepresentationWitness, SearchError, SearchVerdict, Strategy,
    UniversalityReport,
};
