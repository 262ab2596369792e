use super::bits::ceil_log2;

/// Total compressed size in bits:
/// `n_b·l_b + (n+m)·(⌈log2 n_b⌉ + l_d) + m·⌈log2 n⌉ + s_params`.
pub fn compressed_size(n_b: u64, l_b: u64, l_d: u64, n: u64, m: u64, s_params: u64) -> u64 {
    let bases = n_b.saturating_mul(l_b);
    let deviations = n.saturating_add(m).saturating_mul(u64::from(ceil_log2(n_b)) + l_d);
    let weights = m.saturating_mul(u64::from(ceil_log2(n)));
    bases.saturating_add(deviations).saturating_add(weights).saturating_add(s_params)
}
