//! Entropy-guided generalized deduplication: per-record base/deviation
//! splitting with an optional set of weighted condensed samples.

mod bits;
mod condense;
mod container;
mod format;
mod search;
mod select;
mod size;

pub use bits::ceil_log2;
pub use condense::{cluster_condense, distinct_keys, CondensedSet};
pub use container::{decompress, get_condensed, random_access, CompressedDataset, ContainerHeader};
pub use format::{header_bits, ContainerReader, MAGIC, VERSION};
pub use search::{compress, compress_with, find_beta_for_fraction, BaseOrder, SearchStep, SearchTrace, Strategy};
pub use select::{cluster_candidates, select_cluster_bits, select_cluster_bits_with, ClusterBitOrder, ClusterBits};
pub use size::compressed_size;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bitcodec::CodecError;

#[derive(Debug, Error)]
pub enum GedeError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid bit positions: {0}")]
    InvalidPositions(String),
    #[error("corrupt container: {0}")]
    CorruptContainer(String),
    #[error("not an EGD1 container")]
    BadMagic,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
    #[error("container checksum mismatch")]
    ChecksumMismatch,
    #[error("container holds no condensed samples")]
    NoCondensedData,
    #[error("index {index} out of range for {len} records")]
    IndexOutOfRange { index: u64, len: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How the condensed samples are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CondensedMode {
    /// Appended to the dataset before base search and stored in the container.
    #[default]
    Stored,
    /// Only the cluster positions are stored; samples are rebuilt on request.
    OnDemand,
    None,
}

impl CondensedMode {
    pub fn code(self) -> u8 {
        match self {
            Self::Stored => 0,
            Self::OnDemand => 1,
            Self::None => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Stored),
            1 => Some(Self::OnDemand),
            2 => Some(Self::None),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Stored => "stored",
            Self::OnDemand => "on-demand",
            Self::None => "none",
        }
    }
}

impl fmt::Display for CondensedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CondensedMode {
    type Err = GedeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "stored" => Ok(Self::Stored),
            "on-demand" | "on_demand" | "ondemand" => Ok(Self::OnDemand),
            "none" => Ok(Self::None),
            other => Err(GedeError::InvalidConfig(format!("unknown condensed mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Number of cluster bits.
    pub beta: usize,
    /// Non-improving steps tolerated before the base search stops.
    pub tau: usize,
    pub condensed_mode: CondensedMode,
    /// Column holding the learning target. It is stored like any other
    /// column but excluded from the cluster key.
    pub target: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { beta: 8, tau: 8, condensed_mode: CondensedMode::Stored, target: None }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), GedeError> {
        if self.tau == 0 {
            return Err(GedeError::InvalidConfig("tau must be at least 1".into()));
        }
        if self.beta > u32::MAX as usize || self.tau > u32::MAX as usize {
            return Err(GedeError::InvalidConfig("beta and tau must fit in 32 bits".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_names_and_codes() {
        for m in [CondensedMode::Stored, CondensedMode::OnDemand, CondensedMode::None] {
            assert_eq!(m.as_str().parse::<CondensedMode>().unwrap(), m);
            assert_eq!(CondensedMode::from_code(m.code()), Some(m));
        }
        assert_eq!("on_demand".parse::<CondensedMode>().unwrap(), CondensedMode::OnDemand);
        assert!("lazy".parse::<CondensedMode>().is_err());
        assert_eq!(CondensedMode::from_code(3), None);
    }
}
