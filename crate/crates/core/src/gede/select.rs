use std::cmp::Ordering;

use crate::bitcodec::{EntropyProfile, Schema};

/// Bit positions chosen as the clustering key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterBits {
    pub positions: Vec<u32>,
    pub beta: usize,
}

/// How cluster-key candidates are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterBitOrder {
    /// Round k holds the k-th most significant non-constant bit of every
    /// column; rounds are taken in order, each sorted by decreasing entropy.
    #[default]
    HighEntropyRounds,
    /// All non-constant bits by increasing entropy, ignoring significance.
    /// Only used for comparisons against the default.
    LowEntropy,
}

fn by_entropy_desc(profile: &EntropyProfile) -> impl Fn(&u32, &u32) -> Ordering + '_ {
    move |a, b| {
        profile
            .entropy(*b as usize)
            .total_cmp(&profile.entropy(*a as usize))
            .then(a.cmp(b))
    }
}

fn by_entropy_asc(profile: &EntropyProfile) -> impl Fn(&u32, &u32) -> Ordering + '_ {
    move |a, b| {
        profile
            .entropy(*a as usize)
            .total_cmp(&profile.entropy(*b as usize))
            .then(a.cmp(b))
    }
}

/// Every non-constant position in selection order. Selecting β bits takes
/// the first β entries, so keys for growing β refine each other. Bits of the
/// `target` column are never candidates.
pub fn cluster_candidates(
    profile: &EntropyProfile,
    schema: &Schema,
    order: ClusterBitOrder,
    target: Option<usize>,
) -> Vec<u32> {
    let excluded = target.map_or(0..0, |t| schema.column_range(t));
    match order {
        ClusterBitOrder::HighEntropyRounds => {
            let per_column: Vec<Vec<u32>> = (0..schema.len())
                .filter(|&c| Some(c) != target)
                .map(|c| {
                    schema
                        .column_range(c)
                        .filter(|&p| !profile.is_constant(p as usize))
                        .collect()
                })
                .collect();
            let rounds = per_column.iter().map(Vec::len).max().unwrap_or(0);
            let mut out = Vec::new();
            for k in 0..rounds {
                let mut round: Vec<u32> = per_column.iter().filter_map(|c| c.get(k).copied()).collect();
                round.sort_by(by_entropy_desc(profile));
                out.extend(round);
            }
            out
        }
        ClusterBitOrder::LowEntropy => {
            let mut all: Vec<u32> = (0..profile.len() as u32)
                .filter(|&p| !profile.is_constant(p as usize) && !excluded.contains(&p))
                .collect();
            all.sort_by(by_entropy_asc(profile));
            all
        }
    }
}

pub fn select_cluster_bits(
    profile: &EntropyProfile,
    schema: &Schema,
    beta: usize,
    target: Option<usize>,
) -> ClusterBits {
    select_cluster_bits_with(profile, schema, beta, ClusterBitOrder::HighEntropyRounds, target)
}

pub fn select_cluster_bits_with(
    profile: &EntropyProfile,
    schema: &Schema,
    beta: usize,
    order: ClusterBitOrder,
    target: Option<usize>,
) -> ClusterBits {
    let mut positions = cluster_candidates(profile, schema, order, target);
    positions.truncate(beta);
    ClusterBits { positions, beta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcodec::{bit_entropy, BitMatrix, ColumnSchema};

    /// Three 2-bit columns over 20 rows. MSB ones-counts 6, 1 and 2 give
    /// round-1 entropies 0.881, 0.286 and 0.469; every LSB is balanced.
    fn three_columns() -> (BitMatrix, Schema) {
        let schema = Schema::new(vec![
            ColumnSchema::int("a", 0, 2),
            ColumnSchema::int("b", 0, 2),
            ColumnSchema::int("c", 0, 2),
        ])
        .unwrap();
        let ones = [6usize, 1, 2];
        let bm = BitMatrix::from_fn(20, schema.clone(), |r, p| {
            let col = p / 2;
            if p % 2 == 0 {
                r < ones[col]
            } else {
                r % 2 == 0
            }
        });
        (bm, schema)
    }

    #[test]
    fn beta_zero_selects_nothing() {
        let (bm, schema) = three_columns();
        let p = bit_entropy(&bm).unwrap();
        assert!(select_cluster_bits(&p, &schema, 0, None).positions.is_empty());
    }

    #[test]
    fn first_round_sorted_by_decreasing_entropy() {
        let (bm, schema) = three_columns();
        let p = bit_entropy(&bm).unwrap();
        // round-1 entropies of positions 0, 2, 4
        let (h0, h2, h4) = (p.entropy(0), p.entropy(2), p.entropy(4));
        assert!(h0 > h4 && h4 > h2, "{h0} {h2} {h4}");
        let cb = select_cluster_bits(&p, &schema, 2, None);
        assert_eq!(cb.positions, vec![0, 4]);
        // β = d takes exactly one bit per column
        let cb = select_cluster_bits(&p, &schema, 3, None);
        assert_eq!(cb.positions, vec![0, 4, 2]);
        // second round: all LSBs are balanced, ties by position
        let cb = select_cluster_bits(&p, &schema, 6, None);
        assert_eq!(cb.positions, vec![0, 4, 2, 1, 3, 5]);
    }

    #[test]
    fn beta_beyond_candidates_returns_all_non_constant() {
        let schema = Schema::new(vec![ColumnSchema::int("a", 0, 3), ColumnSchema::int("b", 0, 2)]).unwrap();
        // column a: MSB constant 0; column b: all constant
        let bm = BitMatrix::from_fn(8, schema.clone(), |r, p| match p {
            1 => r % 2 == 0,
            2 => r % 4 < 2,
            _ => false,
        });
        let p = bit_entropy(&bm).unwrap();
        let cb = select_cluster_bits(&p, &schema, 100, None);
        assert_eq!(cb.positions, vec![1, 2]);
        assert_eq!(cb.beta, 100);
    }

    #[test]
    fn low_entropy_order_is_global_ascending() {
        let (bm, schema) = three_columns();
        let p = bit_entropy(&bm).unwrap();
        let c = cluster_candidates(&p, &schema, ClusterBitOrder::LowEntropy, None);
        assert_eq!(c, vec![2, 4, 0, 1, 3, 5]);
    }

    #[test]
    fn target_column_is_never_a_key() {
        let (bm, schema) = three_columns();
        let p = bit_entropy(&bm).unwrap();
        let cb = select_cluster_bits(&p, &schema, 6, Some(0));
        assert_eq!(cb.positions, vec![4, 2, 3, 5]);
        let c = cluster_candidates(&p, &schema, ClusterBitOrder::LowEntropy, Some(2));
        assert_eq!(c, vec![2, 0, 1, 3]);
    }
}
