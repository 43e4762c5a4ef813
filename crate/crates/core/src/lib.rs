//! Analogical schema ontologies from unsegmented relational stories.
//!
//! The pipeline: stories in predicate form ([`corpus`]) are cut into random
//! connected windows ([`windows`]), each window becomes a bag of role-path
//! equalities ([`transform`]), and bags are compressed into a concept DAG
//! by greedy description-length chunking ([`ontology`]). Two levels of
//! chunking give a schema ontology over stories ([`model`]) that retrieves
//! analogs while scoring only a fraction of the stored concepts; the
//! linear [`baseline`] scores every stored story.

pub mod bag;
pub mod baseline;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod model;
pub mod ontology;
pub mod rng;
pub mod transform;
pub mod windows;

pub use bag::FeatureBag;
pub use corpus::{Corpus, Statement, Story};
