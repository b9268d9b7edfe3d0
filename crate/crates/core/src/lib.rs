// `!(x > y)` is used on purpose so NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod signature;
pub mod lasso;
pub mod complex;
pub mod persistence;
pub mod ingest;
pub mod pipeline;
pub mod cli;
