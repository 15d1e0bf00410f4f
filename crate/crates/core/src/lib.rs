//! Explicit-state model checking of coalition abilities in asynchronous
//! multi-agent systems under imperfect information.
//!
//! The pipeline is: parse a model file ([`spec_lang`]), validate it into an
//! [`Amas`], build the explicit [`GlobalModel`] (optionally reduced with
//! [`por`]), then decide `<<A>>` formulas with [`verify`] or compare two models
//! against a user-supplied relation with [`bisim`].

pub mod amas;
pub mod bench;
pub mod bisim;
pub mod corpus;
pub mod joint;
pub mod model;
pub mod por;
pub mod spec_lang;
pub mod verify;

pub use amas::{ActionId, AgentId, Amas, Formula, PropId};
pub use model::{build_global_model, GlobalModel, GlobalState, Label, StateId};
