//! Core of the luxen visualization recommendation engine.
//!
//! The crate is `no_std` (it only needs `alloc`) and holds everything that is
//! pure computation: the columnar frame store and its metadata, the intent
//! language, visualization processing and scoring, the recommender and the
//! wflow / prune / schedule optimizations. File formats, threads, HTTP and
//! the CLI live in the `luxen` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aggregate;
pub mod counters;
pub mod datetime;
pub mod engine;
pub mod error;
pub mod frame;
pub mod geo;
pub mod intent;
pub mod metadata;
pub mod optimize;
pub mod predicate;
pub mod recommend;
pub mod value;
pub mod vis;

pub use counters::{CounterSnapshot, Counters};
pub use engine::{Engine, EngineConfig};
pub use error::{Error, Result};
pub use frame::{Column, ColumnData, Frame, HistoryEvent, HistoryKind, RowIndex, StorageType, Transform};
pub use intent::{Clause, IntentSpec};
pub use metadata::{ColumnMetadata, MetadataSet, SemanticType};
pub use recommend::{Dashboard, Recommendation};
pub use value::Value;
pub use vis::{CompiledVisSpec, Mark, Vis, VisData};
