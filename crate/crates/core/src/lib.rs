//! Lossless entropy-guided deduplication of tabular and image datasets, with
//! training directly on the weighted condensed samples it produces.

pub mod bitcodec;
pub mod gede;
pub mod mltrain;
pub mod imgpipe;
pub mod datasets;
