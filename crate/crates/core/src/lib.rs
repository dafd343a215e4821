//! Randomized isomorphism and equivalence tests for Gaussian DAG models.
//!
//! A DAG's model is probed through the vanishing of determinantal minors at
//! random points of its variety over a prime field. The deterministic
//! pattern machinery (skeleton plus immoralities) is kept alongside as an
//! exact reference.

pub mod canon;
pub mod ci;
pub mod classify;
pub mod dag;
pub mod error;
pub mod field;
pub mod isodag;
pub mod pattern;
pub mod variety;

pub use ci::{
    d_separated, implied_relations, imposed_minors, lies_below_ci, marginal_implied, toposorted_imposed,
    tree_reduced_generators, CiStatement, MinorSpec, TreeRelation, TreeRelationKind,
};
pub use classify::{
    canonical_pattern, classify_trees, enumerate_tree_dags, ClassReport, ClassifyMode, ClassifyOptions,
};
pub use dag::{Dag, DagJson, Permutation, TopoOrder};
pub use error::{Error, Result};
pub use field::{parse_rational, Field, Matrix, PrimeField, Rationals, DEFAULT_MODULUS};
pub use isodag::{
    choose_params, equiv_randomized, failure_bound, isodag_test, perm_witness, Answer, FailureBound, IsoParams,
    IsoVerdict, Mode,
};
pub use pattern::{pattern, pattern_isomorphic, Pattern};
pub use variety::{gaussian_ci, minor_eval, on_variety, sample_point, sem_covariance, SemParams, SymMatrix, SymPoint};
