//! Literature-based discovery toolkit.
//!
//! The crate is organised around the stages of a domain-pair discovery run:
//! loading a bibliographic corpus ([`corpus`]), turning its text into terms
//! ([`textprep`]) and weighted matrices ([`vectorspace`]), and then one of the
//! discovery pipelines ([`closed_abc`], [`crossbee`], [`open_concept`],
//! [`outlier`], [`rajolink`], [`linkpred`]). Shared ranking and evaluation
//! primitives live in [`ranking`] and [`evalkit`].

pub mod closed_abc;
pub mod corpus;
pub mod crossbee;
pub mod error;
pub mod evalkit;
pub mod linkpred;
pub mod open_concept;
pub mod outlier;
pub mod rajolink;
pub mod ranking;
pub mod resources;
pub mod textprep;
pub mod util;
pub mod vectorspace;

pub use error::{Error, Result};
pub use ranking::{RankedItem, RankedList, SortOrder};
