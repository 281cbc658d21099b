use std::collections::BTreeMap;

/// Zero-order entropy cost, in bits, of a symbol stream: `sum_s n_s log2(N / n_s)`.
///
/// Symbols are counted in a `BTreeMap` so the floating-point sum is
/// accumulated in a fixed order.
pub fn zero_order_bits(symbols: impl IntoIterator<Item = i32>) -> f64 {
    let mut hist: BTreeMap<i32, u64> = BTreeMap::new();
    let mut total = 0u64;
    for s in symbols {
        *hist.entry(s).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return 0.0;
    }
    let log_total = (total as f64).log2();
    hist.values().map(|&n| n as f64 * (log_total - (n as f64).log2())).sum()
}
