//! Sampling-pattern generators and dataset ingestion.

mod bernoulli;
mod graphs;
mod ingest;
mod spiky;

pub use bernoulli::{sample_bernoulli, PROBABILITY_SLACK};
pub use graphs::{circulant_band, random_regular, tensor_product, GraphKind, GraphSpec, REGULAR_RESTARTS};
pub use ingest::{density_filter, ingest_ratings, read_ratings, subsample_rows, IngestedPattern, RatingsFormat};
pub use spiky::{spiky_vector, spiky_weight, WeightFamilySpec};

pub(crate) use bernoulli::sample_with;
