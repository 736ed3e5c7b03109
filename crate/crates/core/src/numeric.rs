//! Small numeric helpers shared across modules.

/// Pairwise (cascade) summation.
///
/// Splits at `n/2`, so summing a slice followed by an exact copy of
/// itself yields exactly twice the slice's sum. The group-normalized
/// loss relies on this: duplicating every record of a group must leave
/// that group's mean loss bit-identical.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Arithmetic mean via pairwise summation. Returns 0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Population variance (denominator n) via pairwise summation.
pub fn population_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    mean(&sq)
}

/// Squared Euclidean distance between two equal-length vectors.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_small_inputs() {
        let xs = [0.1, 0.2, 0.3, 0.4, 0.5];
        assert!((pairwise_sum(&xs) - 1.5).abs() < 1e-12);
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[2.5]), 2.5);
    }

    #[test]
    fn duplicated_block_sums_to_exactly_twice() {
        let xs = [0.1, 0.7, 1.3, 2.9, 0.003, 7.77, 1e-9];
        let mut doubled = xs.to_vec();
        doubled.extend_from_slice(&xs);
        // Bitwise: split point of the doubled slice is the block boundary
        // only when the length is even, which it is by construction.
        assert_eq!(pairwise_sum(&doubled), 2.0 * pairwise_sum(&xs));
        assert_eq!(mean(&doubled), mean(&xs));
    }
}
