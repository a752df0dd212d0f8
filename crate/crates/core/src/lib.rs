//! Graph-expanded star products with separation of variables on Kähler
//! charts.
//!
//! The crate enumerates weighted acyclic graphs, evaluates each graph as a
//! multidifferential operator on a chart through jet arithmetic, and
//! assembles the results into star-product coefficients, order by order in
//! the deformation parameter. Verification routines check the algebraic
//! identities the construction is supposed to satisfy on concrete charts.

pub mod decor;
pub mod expr;
pub mod geometry;
pub mod graph;
pub mod jet;
pub mod operator;
pub mod series;
pub mod surgery;
pub mod verify;

pub use decor::{
    compatible_circuit_count, decorated_canonical_form, decorated_canonical_form_mod_sink,
    enumerate_compatible_circuits, enumerate_labelled_circuit_classes,
    enumerate_labelled_circuit_classes_mod_sink, enumerate_labellings, incidence_multi_indices,
    CircuitStructure, DecorError, DecoratedForm, DecoratedGraph, Labelling, MultiIndex,
};
pub use expr::{parse_expression, Expr, ParseError, ScalarField};
pub use geometry::{GeometryError, KahlerChart};
pub use graph::canon::{canonicalize, relabel, CanonicalForm, CanonicalInfo};
pub use graph::enumerate::{enumerate_classes, GraphClass, SignatureTable};
pub use graph::{Graph, GraphError};
pub use jet::{jet_space, Dir, Jet, JetError, JetMatrix};
pub use operator::{
    chart_signature_table, emit_operator, level_classes, multi_coefficient, slot_requirement,
    star_coefficient, star_coefficient_circuit_form, star_product, star_series, Arg, Evaluator,
    LevelStore, MemoryStore, OperatorError, StarOptions, SymbolicFormat,
};
pub use series::{Coefficient, FormalSeries, StarSeries};
pub use surgery::{bud, debud, defuse, fuse, EquivClass, SurgeryError};
pub use verify::{run_suite, suite, CheckReport, CheckThunk, DEFAULT_SEED};
