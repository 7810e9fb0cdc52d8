//! Tooling for four lexical-resource notations used in English to Indian
//! language resource building:
//!
//! * [`dict`]: the bilingual dictionary format (headword, numbered senses with
//!   gloss micro-syntax, example sentences),
//! * [`tlg`]: transfer-lexicon records (`HEADWORD::`, `MEANING::`, `TR_NAT::`,
//!   `FRAME_E::` ... fields) and parallel corpus extraction,
//! * [`anncorra`]: the linear dependency-tree notation
//!   (`rAma_ne/k1->i ... piyA::v:i`) with default attachment,
//! * [`sutra`]: core-meaning formulas (`viSaya[~~ < niSpAdana]`) and sense
//!   threads,
//!
//! plus a frame-based structural [`transfer`] engine and an on-disk treebank
//! [`corpus`] store.

pub mod anncorra;
pub mod corpus;
pub mod diag;
pub mod dict;
pub mod sutra;
pub mod tlg;
pub mod transfer;

pub use diag::{Diagnostic, Severity};
