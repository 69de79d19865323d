// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod api;
pub mod cli;
pub mod estimate;
pub mod ingest;
pub mod model;
pub mod portfolio;
pub mod retrofit;
pub mod uncertainty;
