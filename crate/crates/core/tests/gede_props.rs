use proptest::prelude::*;

use egd_core::bitcodec::{bit_entropy, encode_tabular, BitMatrix, ColumnSchema, Record, Schema, Value};
use egd_core::gede::{
    ceil_log2, cluster_candidates, compress, compress_with, compressed_size, decompress, distinct_keys,
    find_beta_for_fraction, get_condensed, random_access, ClusterBitOrder, CompressedDataset, CondensedMode,
    SearchConfig, Strategy as SearchStrategy,
};

#[derive(Debug, Clone)]
enum Col {
    Int(u32),
    F32,
    F64,
}

/// Tables whose columns draw from small value pools, so rows repeat and
/// share prefixes.
fn table() -> impl Strategy<Value = BitMatrix> {
    let col = prop_oneof![(1u32..=12).prop_map(Col::Int), Just(Col::F32), Just(Col::F64)];
    (prop::collection::vec(col, 1..=5), 1usize..=120, 1u64..=9).prop_flat_map(|(cols, n, pool)| {
        let d = cols.len();
        prop::collection::vec(any::<u64>(), n * d).prop_map(move |raw| {
            let schema = Schema::new(
                cols.iter()
                    .enumerate()
                    .map(|(c, k)| match k {
                        Col::Int(w) => ColumnSchema::int(format!("i{c}"), -3, *w),
                        Col::F32 => ColumnSchema::float32(format!("f{c}")),
                        Col::F64 => ColumnSchema::float64(format!("d{c}")),
                    })
                    .collect(),
            )
            .unwrap();
            let rows: Vec<Record> = raw
                .chunks(d)
                .map(|r| {
                    r.iter()
                        .zip(&cols)
                        .map(|(&v, k)| {
                            let p = v % pool;
                            match k {
                                Col::Int(w) => Value::Int(-3 + (p.wrapping_mul(0x9e37_79b9) & ((1u64 << w) - 1)) as i64),
                                Col::F32 => Value::F32(p as f32 * 0.375 - 1.0),
                                Col::F64 => Value::F64(f64::from_bits(0x4000_0000_0000_0000 ^ p.wrapping_mul(0x1234_5678_9abc))),
                            }
                        })
                        .collect()
                })
                .collect();
            encode_tabular(&rows, &schema).unwrap()
        })
    })
}

fn config() -> impl Strategy<Value = SearchConfig> {
    (0usize..=20, 1usize..=10, 0u8..3, any::<bool>()).prop_map(|(beta, tau, mode, target)| SearchConfig {
        beta,
        tau,
        condensed_mode: [CondensedMode::Stored, CondensedMode::OnDemand, CondensedMode::None][mode as usize],
        target: target.then_some(0),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn compression_is_lossless(bm in table(), cfg in config()) {
        let cd = compress(&bm, &cfg).unwrap();
        prop_assert_eq!(decompress(&cd).unwrap(), bm.clone());
        let parsed = CompressedDataset::from_bytes(&cd.to_bytes()).unwrap();
        prop_assert_eq!(decompress(&parsed).unwrap(), bm);
    }

    #[test]
    fn stored_size_follows_counters_and_is_best_visited(bm in table(), cfg in config()) {
        let (cd, trace) = compress_with(&bm, &cfg, SearchStrategy::default()).unwrap();
        let expected = compressed_size(cd.n_b(), u64::from(cd.l_b()), u64::from(cd.l_d()), cd.n(), cd.m(), 0);
        prop_assert_eq!(cd.best_size(), expected);
        prop_assert_eq!(cd.best_size(), trace.visited_sizes().min().unwrap());
        prop_assert!(cd.best_size() <= trace.initial_size);
        // every base id fits its field
        prop_assert!(cd.n_b() <= 1u64 << ceil_log2(cd.n_b()));
    }

    #[test]
    fn condensed_weights_cover_every_record(bm in table(), cfg in config()) {
        let cd = compress(&bm, &cfg).unwrap();
        match cd.mode() {
            CondensedMode::None => prop_assert!(get_condensed(&cd).is_err()),
            _ => {
                let cs = get_condensed(&cd).unwrap();
                prop_assert_eq!(cs.total_weight(), bm.n() as u64);
                prop_assert!(cs.weights.iter().all(|&w| w >= 1));
                prop_assert_eq!(cs.len(), distinct_keys(&bm, cd.cluster_positions()));
                if let Some(t) = cfg.target {
                    let range = bm.schema().column_range(t);
                    prop_assert!(cd.cluster_positions().iter().all(|p| !range.contains(p)));
                }
            }
        }
    }

    #[test]
    fn on_demand_samples_match_stored(bm in table(), beta in 0usize..=12) {
        let cfg = |mode| SearchConfig { beta, tau: 4, condensed_mode: mode, target: None };
        let stored = get_condensed(&compress(&bm, &cfg(CondensedMode::Stored)).unwrap()).unwrap();
        let lazy = get_condensed(&compress(&bm, &cfg(CondensedMode::OnDemand)).unwrap()).unwrap();
        prop_assert_eq!(stored, lazy);
    }

    #[test]
    fn random_access_matches_full_decode(bm in table(), cfg in config()) {
        let cd = compress(&bm, &cfg).unwrap();
        for i in 0..bm.n() {
            prop_assert_eq!(random_access(&cd, i as u64).unwrap(), bm.decode_row(i));
        }
        prop_assert!(random_access(&cd, bm.n() as u64).is_err());
    }

    #[test]
    fn any_corrupted_byte_is_rejected(bm in table(), cfg in config(), at in any::<prop::sample::Index>(), flip in 1u8..=255) {
        let mut bytes = compress(&bm, &cfg).unwrap().to_bytes();
        let i = at.index(bytes.len());
        bytes[i] ^= flip;
        prop_assert!(CompressedDataset::from_bytes(&bytes).is_err());
    }

    #[test]
    fn fraction_search_returns_smallest_sufficient_beta(bm in table(), frac in 0.01f64..=1.0) {
        let beta = find_beta_for_fraction(&bm, frac, None).unwrap();
        let profile = bit_entropy(&bm).unwrap();
        let cands = cluster_candidates(&profile, bm.schema(), ClusterBitOrder::HighEntropyRounds, None);
        let n = bm.n() as f64;
        let m = |b: usize| distinct_keys(&bm, &cands[..b]) as f64;
        if beta < cands.len() {
            prop_assert!(m(beta) / n >= frac);
        }
        if beta > 0 {
            prop_assert!(m(beta - 1) / n < frac);
        }
    }
}
