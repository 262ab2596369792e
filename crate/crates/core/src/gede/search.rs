use std::borrow::Cow;

use crate::bitcodec::{bit_entropy, encode_tabular, BitMatrix, CodecError, EntropyProfile};

use super::condense::{cluster_condense, Partition};
use super::container::CompressedDataset;
use super::select::{cluster_candidates, select_cluster_bits_with, ClusterBitOrder};
use super::size::compressed_size;
use super::{CondensedMode, GedeError, SearchConfig};

/// Order in which non-constant positions are offered to the base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseOrder {
    #[default]
    IncreasingEntropy,
    /// Reverse ranking, kept for comparisons.
    DecreasingEntropy,
}

/// Selection rules for both phases. The default is the entropy-guided
/// pairing: high-entropy cluster keys, low-entropy bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Strategy {
    pub cluster_order: ClusterBitOrder,
    pub base_order: BaseOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchStep {
    pub position: u32,
    pub n_b: u64,
    pub size: u64,
}

/// What the greedy base search visited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchTrace {
    pub constant_positions: Vec<u32>,
    pub initial_n_b: u64,
    pub initial_size: u64,
    pub steps: Vec<SearchStep>,
    /// Number of steps kept in the best base.
    pub best_prefix: usize,
}

impl SearchTrace {
    pub fn best_size(&self) -> u64 {
        self.visited_sizes().min().unwrap_or(self.initial_size)
    }

    pub fn visited_sizes(&self) -> impl Iterator<Item = u64> + '_ {
        std::iter::once(self.initial_size).chain(self.steps.iter().map(|s| s.size))
    }
}

pub fn compress(bm: &BitMatrix, cfg: &SearchConfig) -> Result<CompressedDataset, GedeError> {
    compress_with(bm, cfg, Strategy::default()).map(|(cd, _)| cd)
}

pub fn compress_with(
    bm: &BitMatrix,
    cfg: &SearchConfig,
    strategy: Strategy,
) -> Result<(CompressedDataset, SearchTrace), GedeError> {
    cfg.validate()?;
    let profile = match bit_entropy(bm) {
        Err(CodecError::EmptyDataset) => return Err(GedeError::EmptyDataset),
        other => other?,
    };
    let n = bm.n();
    let schema = bm.schema();
    if cfg.target.is_some_and(|t| t >= schema.len()) {
        return Err(GedeError::InvalidConfig(format!("target column {} outside schema", cfg.target.unwrap_or(0))));
    }

    let (all, weights, cluster_positions): (Cow<BitMatrix>, Vec<u64>, Vec<u32>) = match cfg.condensed_mode {
        CondensedMode::None => (Cow::Borrowed(bm), Vec::new(), Vec::new()),
        CondensedMode::OnDemand => {
            let cb = select_cluster_bits_with(&profile, schema, cfg.beta, strategy.cluster_order, cfg.target);
            (Cow::Borrowed(bm), Vec::new(), cb.positions)
        }
        CondensedMode::Stored => {
            let cb = select_cluster_bits_with(&profile, schema, cfg.beta, strategy.cluster_order, cfg.target);
            let cs = cluster_condense(bm, &cb)?;
            let condensed = encode_tabular(&cs.samples, schema)?;
            (Cow::Owned(bm.vstack(&condensed)?), cs.weights, cb.positions)
        }
    };
    let m = all.n() - n;

    let (base, trace) = greedy_base_search(&all, n, m, &profile, cfg.tau, strategy.base_order);
    let mut cd = CompressedDataset::materialize(
        &all,
        n,
        base,
        weights,
        cluster_positions,
        cfg.condensed_mode,
        cfg.beta as u32,
        cfg.tau as u32,
    );
    cd.set_target(cfg.target)?;
    debug_assert_eq!(cd.best_size(), trace.best_size());
    Ok((cd, trace))
}

/// Grows the base from the constant positions one position at a time,
/// keeping the smallest size seen, until `tau` consecutive steps fail to
/// improve or every original record has its own base.
fn greedy_base_search(
    all: &BitMatrix,
    n: usize,
    m: usize,
    profile: &EntropyProfile,
    tau: usize,
    order: BaseOrder,
) -> (Vec<u32>, SearchTrace) {
    let l_t = all.width() as u64;
    let constants = profile.constant_positions();
    let mut remaining: Vec<u32> =
        (0..l_t as u32).filter(|&p| !profile.is_constant(p as usize)).collect();
    remaining.sort_by(|&a, &b| {
        let (ha, hb) = (profile.entropy(a as usize), profile.entropy(b as usize));
        let by_h = match order {
            BaseOrder::IncreasingEntropy => ha.total_cmp(&hb),
            BaseOrder::DecreasingEntropy => hb.total_cmp(&ha),
        };
        by_h.then(a.cmp(&b))
    });

    let mut part = Partition::single(all.n());
    for &p in &constants {
        part.refine(all, p as usize);
    }
    let (n64, m64) = (n as u64, m as u64);
    let mut l_b = constants.len() as u64;
    let mut n_b = part.groups() as u64;
    let initial_n_b = n_b;
    let initial_size = compressed_size(n_b, l_b, l_t - l_b, n64, m64, 0);
    let mut best = initial_size;
    let mut best_prefix = 0;
    let mut plateau = 0;
    let mut steps = Vec::new();

    for (k, &p) in remaining.iter().enumerate() {
        part.refine(all, p as usize);
        n_b = part.groups() as u64;
        l_b += 1;
        let size = compressed_size(n_b, l_b, l_t - l_b, n64, m64, 0);
        steps.push(SearchStep { position: p, n_b, size });
        if size < best {
            best = size;
            best_prefix = k + 1;
            plateau = 0;
        } else {
            plateau += 1;
            if plateau >= tau || n_b >= n64 {
                break;
            }
        }
    }

    let mut base: Vec<u32> = constants.iter().chain(&remaining[..best_prefix]).copied().collect();
    base.sort_unstable();
    let trace = SearchTrace { constant_positions: constants, initial_n_b, initial_size, steps, best_prefix };
    (base, trace)
}

/// Smallest β whose cluster count reaches `target_fraction` of the records,
/// capped at the number of candidate positions.
pub fn find_beta_for_fraction(
    bm: &BitMatrix,
    target_fraction: f64,
    target: Option<usize>,
) -> Result<usize, GedeError> {
    if !(target_fraction > 0.0 && target_fraction <= 1.0) {
        return Err(GedeError::InvalidConfig(format!("fraction {target_fraction} not in (0, 1]")));
    }
    let profile = match bit_entropy(bm) {
        Err(CodecError::EmptyDataset) => return Err(GedeError::EmptyDataset),
        other => other?,
    };
    let n = bm.n() as f64;
    let candidates = cluster_candidates(&profile, bm.schema(), ClusterBitOrder::HighEntropyRounds, target);
    let mut part = Partition::single(bm.n());
    if 1.0 / n >= target_fraction {
        return Ok(0);
    }
    for (k, &p) in candidates.iter().enumerate() {
        part.refine(bm, p as usize);
        if part.groups() as f64 / n >= target_fraction {
            return Ok(k + 1);
        }
    }
    Ok(candidates.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcodec::{decode_tabular, ColumnSchema, Schema, Value};
    use crate::gede::{decompress, get_condensed};

    fn int_matrix(vals: &[i64], width: u32) -> BitMatrix {
        let s = Schema::new(vec![ColumnSchema::int("x", 0, width)]).unwrap();
        encode_tabular(&vals.iter().map(|&v| vec![Value::Int(v)]).collect::<Vec<_>>(), &s).unwrap()
    }

    fn cfg(beta: usize, tau: usize, mode: CondensedMode) -> SearchConfig {
        SearchConfig { beta, tau, condensed_mode: mode, target: None }
    }

    #[test]
    fn identical_rows_collapse_to_one_base() {
        let bm = int_matrix(&[5; 10], 8);
        let (cd, trace) = compress_with(&bm, &cfg(3, 4, CondensedMode::Stored), Strategy::default()).unwrap();
        assert_eq!(cd.n_b(), 1);
        assert_eq!(cd.base_positions(), (0..8).collect::<Vec<_>>().as_slice());
        // all positions constant: one cluster, weight n
        assert_eq!(cd.m(), 1);
        assert_eq!(cd.weights(), &[10]);
        // l_t + (n+m)·0 + m·⌈log2 10⌉
        assert_eq!(cd.best_size(), 8 + 4);
        assert!(trace.steps.is_empty());
        assert_eq!(decompress(&cd).unwrap(), bm);
    }

    #[test]
    fn single_record() {
        let bm = int_matrix(&[3], 4);
        let cd = compress(&bm, &cfg(2, 1, CondensedMode::None)).unwrap();
        assert_eq!(cd.n_b(), 1);
        assert_eq!(cd.l_d(), 0);
        assert_eq!(decompress(&cd).unwrap(), bm);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let bm = int_matrix(&[], 4);
        assert!(matches!(compress(&bm, &cfg(0, 1, CondensedMode::None)), Err(GedeError::EmptyDataset)));
    }

    #[test]
    fn tau_zero_is_invalid() {
        let bm = int_matrix(&[1, 2], 4);
        assert!(matches!(compress(&bm, &cfg(0, 0, CondensedMode::None)), Err(GedeError::InvalidConfig(_))));
    }

    #[test]
    fn random_rows_stop_after_one_failed_step() {
        // 64 distinct 16-bit rows with near-uniform bits
        let mut s = 0x1234_5678_9abc_def1u64;
        let mut vals = std::collections::BTreeSet::new();
        while vals.len() < 64 {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            vals.insert((s >> 48) as i64);
        }
        let vals: Vec<i64> = vals.into_iter().collect();
        let bm = int_matrix(&vals, 16);
        let (cd, trace) = compress_with(&bm, &cfg(0, 1, CondensedMode::None), Strategy::default()).unwrap();
        let failed = trace.steps.len() - trace.best_prefix;
        assert_eq!(failed, 1, "{trace:?}");
        assert_eq!(decompress(&cd).unwrap(), bm);
    }

    #[test]
    fn best_size_is_minimum_over_visited_prefixes() {
        let vals: Vec<i64> = (0..200).map(|i| (i * 37 % 11) + ((i % 3) << 6)).collect();
        let bm = int_matrix(&vals, 8);
        for tau in 1..6 {
            let (cd, trace) = compress_with(&bm, &cfg(2, tau, CondensedMode::Stored), Strategy::default()).unwrap();
            assert_eq!(cd.best_size(), trace.visited_sizes().min().unwrap());
            assert!(cd.best_size() <= trace.initial_size);
            let rows = decode_tabular(&decompress(&cd).unwrap(), None).unwrap();
            assert_eq!(rows, decode_tabular(&bm, None).unwrap());
        }
    }

    #[test]
    fn on_demand_matches_stored() {
        let vals: Vec<i64> = (0..300).map(|i| (i * 7919) % 251).collect();
        let bm = int_matrix(&vals, 8);
        let stored = compress(&bm, &cfg(3, 8, CondensedMode::Stored)).unwrap();
        let lazy = compress(&bm, &cfg(3, 8, CondensedMode::OnDemand)).unwrap();
        assert_eq!(lazy.m(), 0);
        let a = get_condensed(&stored).unwrap();
        let b = get_condensed(&lazy).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total_weight(), 300);
    }

    #[test]
    fn fraction_search_boundaries() {
        let vals: Vec<i64> = (0..16).collect();
        let bm = int_matrix(&vals, 4);
        assert_eq!(find_beta_for_fraction(&bm, 1.0, None).unwrap(), 4);
        assert_eq!(find_beta_for_fraction(&bm, 1.0 / 16.0, None).unwrap(), 0);
        assert_eq!(find_beta_for_fraction(&bm, 1.0 / 16.0 + 1e-9, None).unwrap(), 1);
        assert!(find_beta_for_fraction(&bm, 0.0, None).is_err());
    }
}
