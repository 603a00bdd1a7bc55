//! Correctly rounded floating-point summation (Shewchuk partials, with the
//! final half-way correction used by Python's `math.fsum`).
//!
//! Two sums of the same multiset of reals round to the same double no matter
//! how the terms were grouped, which is what lets a prefix-sum evaluation agree
//! bit for bit with a direct one.

/// Adds `x` into a list of non-overlapping partials, keeping the exact sum.
pub(crate) fn grow(partials: &mut Vec<f64>, mut x: f64) {
    let mut i = 0;
    for j in 0..partials.len() {
        let mut y = partials[j];
        if x.abs() < y.abs() {
            std::mem::swap(&mut x, &mut y);
        }
        let hi = x + y;
        let lo = y - (hi - x);
        if lo != 0.0 {
            partials[i] = lo;
            i += 1;
        }
        x = hi;
    }
    partials.truncate(i);
    partials.push(x);
}

/// Rounds the exact value of a partials list to the nearest double.
pub(crate) fn round(partials: &[f64]) -> f64 {
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    // no negative zeros
    hi + 0.0
}

/// Correctly rounded sum of an iterator of finite doubles.
pub(crate) fn fsum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials = Vec::new();
    for v in values {
        grow(&mut partials, v);
    }
    round(&partials)
}

/// Exact prefix sums: entry `k` represents the exact sum of the first `k`
/// values, stored as a flattened run of partials.
pub(crate) struct ExactPrefix {
    offsets: Vec<usize>,
    partials: Vec<f64>,
}

impl ExactPrefix {
    pub(crate) fn new<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let mut offsets = vec![0, 0];
        let mut flat = Vec::new();
        let mut running = Vec::new();
        for v in values {
            grow(&mut running, v);
            flat.extend_from_slice(&running);
            offsets.push(flat.len());
        }
        Self {
            offsets,
            partials: flat,
        }
    }

    fn prefix(&self, k: usize) -> &[f64] {
        &self.partials[self.offsets[k]..self.offsets[k + 1]]
    }

    /// Correctly rounded sum of values `lo..hi`, reusing `scratch`.
    pub(crate) fn range_sum(&self, lo: usize, hi: usize, scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        for &p in self.prefix(hi) {
            grow(scratch, p);
        }
        for &p in self.prefix(lo) {
            grow(scratch, -p);
        }
        round(scratch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cancellation_is_exact() {
        assert_eq!(fsum([1e100, 1.0, -1e100]), 1.0);
        assert_eq!(fsum([0.1; 10]), 1.0);
        assert_eq!(fsum(std::iter::empty()), 0.0);
    }

    #[test]
    fn half_way_rounds_to_even() {
        // 1 + 2^-53 + 2^-106 lies just above the midpoint, so it rounds up
        let v = [1.0, 2f64.powi(-53), 2f64.powi(-106)];
        assert_eq!(fsum(v), 1.0 + f64::EPSILON);
    }

    proptest! {
        #[test]
        fn range_sum_matches_direct(values in prop::collection::vec(-1e3f64..1e3, 1..60),
                                    a in 0usize..60, b in 0usize..60) {
            let n = values.len();
            let (a, b) = (a % (n + 1), b % (n + 1));
            let (lo, hi) = (a.min(b), a.max(b));
            let prefix = ExactPrefix::new(values.iter().copied());
            let mut scratch = Vec::new();
            let direct = fsum(values[lo..hi].iter().copied());
            prop_assert_eq!(prefix.range_sum(lo, hi, &mut scratch).to_bits(), direct.to_bits());
        }
    }
}
