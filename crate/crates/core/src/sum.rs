//! Compensated summation.

/// Neumaier summation. Callers feed terms in a canonical order (ascending
/// entries) so results do not depend on the input permutation.
pub(crate) fn neumaier<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in terms {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::neumaier;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let terms = [1.0, 1e-16, 1e-16, -1.0];
        let naive: f64 = terms.iter().sum();
        assert_eq!(naive, 0.0);
        assert!((neumaier(terms) - 2e-16).abs() < 1e-30);
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(neumaier(std::iter::empty()), 0.0);
    }
}
