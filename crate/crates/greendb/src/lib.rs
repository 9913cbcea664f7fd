//! GreenDB: a product-by-product sustainability data pipeline.
//!
//! The crate is organised along the pipeline's flow: a polite [`crawler`]
//! fetches merchant catalog pages and feeds them through durable
//! [`queue`]s into workers ([`worker`], [`topology`]) that cache raw HTML
//! and run structured-data [`extract`]ion, producing [`model`] product
//! records whose sustainability labels are resolved against the
//! [`labels`] registry. Everything lands in the single-file [`store`],
//! from which [`export`] produces CSV/JSONL datasets and distribution
//! statistics. The [`mock`] module hosts a deterministic merchant for
//! end-to-end verification on loopback.

pub mod crawler;
pub mod export;
pub mod extract;
pub mod fetch;
pub mod html;
pub mod labels;
pub mod mock;
pub mod model;
pub mod queue;
pub mod ratelimit;
pub mod robots;
pub mod store;
pub mod topology;
pub mod worker;

pub use model::{validate_gtin, GtinVerdict, ProductKey, ProductRecord};
pub use store::JournalStore;
