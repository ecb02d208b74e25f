//! Parallel sums with a fixed reduction order, so floating-point results do
//! not depend on how rayon schedules the work.

use rayon::prelude::*;

const CHUNK: usize = 4096;

pub(crate) fn ordered_sum(len: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let parts: Vec<f64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(len)).map(&f).sum())
        .collect();
    parts.iter().sum()
}

pub(crate) fn ordered_sum2(len: usize, f: impl Fn(usize) -> (f64, f64) + Sync) -> (f64, f64) {
    let parts: Vec<(f64, f64)> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            (c * CHUNK..((c + 1) * CHUNK).min(len))
                .map(&f)
                .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
        })
        .collect();
    parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_match_sequential_order_of_chunks() {
        let f = |i: usize| (i as f64).sin();
        let want: f64 = (0..3)
            .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(10_000)).map(f).sum::<f64>())
            .sum();
        assert_eq!(ordered_sum(10_000, f).to_bits(), want.to_bits());
        assert_eq!(ordered_sum(0, f), 0.0);
        assert_eq!(ordered_sum2(3, |i| (i as f64, 1.0)), (3.0, 3.0));
    }
}
