//! Order-statistic primitives: truncated sums, truncated means, and the
//! truncated inner product.
//!
//! The truncated sum of a vector drops its `k` largest and `k` smallest
//! entries before summing. Deleting order statistics from both ends is what
//! makes the statistic robust: changing at most `k` coordinates of the input
//! moves the truncated sum by a bounded amount no matter how wild the new
//! values are, while an ordinary sum can be dragged anywhere by a single
//! coordinate.
//!
//! Stability guarantees implemented and tested here, for `2k < d`:
//!
//! * bounded drift: if `|x_i| <= M` for all `i`, then
//!   `|tsum_k(x) - sum(x)| <= 2kM`;
//! * replacement stability: if additionally `x'` differs from `x` in at most
//!   `k` coordinates, `|tsum_k(x) - tsum_k(x')| <= 6kM`, and symmetrically
//!   with `M = min(max|x|, max|x'|)`;
//! * inner-product stability: for any weights `w`,
//!   `|tip_k(w, x') - <w, x>| <= 8k * max|w_i x_i|`.

use crate::error::{Error, Result};

/// A finite real vector. Construction rejects NaN and infinities so that
/// every downstream inequality is meaningful.
#[derive(Clone, Debug, PartialEq)]
pub struct RealVec {
    values: Vec<f64>,
}

impl RealVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
        }
        Ok(RealVec { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<usize> for RealVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl AsRef<[f64]> for RealVec {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

fn check_truncation(len: usize, k: usize) -> Result<()> {
    if 2 * k >= len {
        return Err(Error::TruncationTooLarge { k, len });
    }
    Ok(())
}

/// Sort ascending. Ties are broken by the stable sort's original order; the
/// truncated sum is tie-invariant, so this only pins down determinism.
fn sorted_ascending(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite by construction"));
    s
}

/// Truncated sum: the sum of the entries of `x` after removing the `k`
/// largest and the `k` smallest. `tsum_k(x, 0)` is the plain sum.
pub fn tsum_k(x: &RealVec, k: usize) -> Result<f64> {
    check_truncation(x.len(), k)?;
    let s = sorted_ascending(x.as_slice());
    Ok(s[k..s.len() - k].iter().sum())
}

/// Truncated mean: `tsum_k(x) / (d - 2k)`.
pub fn tmean_k(x: &RealVec, k: usize) -> Result<f64> {
    let t = tsum_k(x, k)?;
    Ok(t / (x.len() - 2 * k) as f64)
}

/// Truncated inner product `<w, x>_k = tsum_k(w ⊙ x)`: the elementwise
/// products are summed after deleting the `k` largest and `k` smallest.
/// For `k = 0` this is the ordinary inner product.
pub fn trunc_inner_product(w: &RealVec, x: &RealVec, k: usize) -> Result<f64> {
    if w.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: w.len(),
            right: x.len(),
        });
    }
    check_truncation(x.len(), k)?;
    let products: Vec<f64> = w
        .as_slice()
        .iter()
        .zip(x.as_slice())
        .map(|(a, b)| a * b)
        .collect();
    let s = sorted_ascending(&products);
    Ok(s[k..s.len() - k].iter().sum())
}

/// Truncated sum over a plain slice of already-validated finite values.
/// Hot-path variant used by the classifier; sorts a scratch copy with the
/// branch-light total order (equivalent to the value order on finite data).
pub(crate) fn tsum_k_slice(values: &[f64], k: usize) -> f64 {
    debug_assert!(2 * k < values.len());
    let mut s = values.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    s[k..s.len() - k].iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rv(values: &[f64]) -> RealVec {
        RealVec::new(values.to_vec()).unwrap()
    }

    #[test]
    fn tsum_worked_example() {
        // removing the single largest (5) and smallest (1) leaves 1+2+3+4
        assert_eq!(
            tsum_k(&rv(&[1.0, 1.0, 2.0, 3.0, 4.0, 5.0]), 1).unwrap(),
            10.0
        );
    }

    #[test]
    fn tsum_k0_is_plain_sum() {
        let x = rv(&[0.5, -2.0, 3.25, 7.0]);
        assert_eq!(tsum_k(&x, 0).unwrap(), 0.5 - 2.0 + 3.25 + 7.0);
    }

    #[test]
    fn tsum_hand_sorted_case() {
        // sort(-7,0,1,2,3,9,100), drop two from each end, keep 1+2+3
        assert_eq!(
            tsum_k(&rv(&[-7.0, 0.0, 1.0, 2.0, 3.0, 9.0, 100.0]), 2).unwrap(),
            6.0
        );
    }

    #[test]
    fn tsum_rejects_empty_truncation() {
        let x = rv(&[1.0, 2.0]);
        assert!(matches!(
            tsum_k(&x, 1),
            Err(Error::TruncationTooLarge { k: 1, len: 2 })
        ));
        assert!(matches!(
            tsum_k(&rv(&[1.0]), 1),
            Err(Error::TruncationTooLarge { .. })
        ));
    }

    #[test]
    fn tmean_worked_examples() {
        assert_eq!(
            tmean_k(&rv(&[1.0, 1.0, 2.0, 3.0, 4.0, 5.0]), 1).unwrap(),
            2.5
        );
        let x = rv(&[4.0, 8.0, 6.0]);
        assert_eq!(tmean_k(&x, 0).unwrap(), 6.0);
        // constant vector is fixed by trimming
        assert_eq!(tmean_k(&rv(&[3.5, 3.5, 3.5, 3.5]), 1).unwrap(), 3.5);
    }

    #[test]
    fn trunc_inner_product_examples() {
        let w = rv(&[1.0, 1.0, 1.0, 1.0, 1.0]);
        let x = rv(&[5.0, -1.0, 2.0, 0.0, 3.0]);
        // products sort to (-1,0,2,3,5); drop one from each end: 0+2+3
        assert_eq!(trunc_inner_product(&w, &x, 1).unwrap(), 5.0);
        // k=0 reduces to the ordinary inner product
        assert_eq!(trunc_inner_product(&w, &x, 0).unwrap(), 9.0);
        // all-ones, length 6, k=2: keep d-2k = 2 unit products
        let ones = rv(&[1.0; 6]);
        assert_eq!(trunc_inner_product(&ones, &ones, 2).unwrap(), 2.0);
    }

    #[test]
    fn trunc_inner_product_rejects_mismatch() {
        let w = rv(&[1.0, 2.0]);
        let x = rv(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            trunc_inner_product(&w, &x, 0),
            Err(Error::LengthMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn realvec_rejects_nan_and_infinity() {
        assert!(matches!(
            RealVec::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(RealVec::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(matches!(RealVec::new(vec![]), Err(Error::EmptyVector)));
    }

    // ---- property tests -------------------------------------------------

    /// Vector entries spanning moderate and extreme magnitudes (up to 1e9).
    fn entry() -> impl Strategy<Value = f64> {
        prop_oneof![
            4 => -100.0..100.0f64,
            1 => -1e9..1e9f64,
            1 => Just(0.0),
        ]
    }

    fn vec_and_k() -> impl Strategy<Value = (Vec<f64>, usize)> {
        (5usize..40).prop_flat_map(|d| {
            (
                prop::collection::vec(entry(), d),
                0..(d.div_ceil(2).saturating_sub(1)).max(1),
            )
        })
    }

    /// Comparison slop for inequalities evaluated in floating point: both
    /// sides accumulate rounding proportional to the total mass involved.
    fn fp_slop(x: &[f64]) -> f64 {
        1e-12 * x.iter().map(|v| v.abs()).sum::<f64>().max(1.0)
    }

    proptest! {
        #[test]
        fn permutation_invariance((x, k) in vec_and_k(), seed in any::<u64>()) {
            let v = rv(&x);
            let base = tsum_k(&v, k).unwrap();
            let mut perm = x.clone();
            // deterministic shuffle from the seed
            let mut s = crate::rng::Stream::substream(seed, crate::rng::PURPOSE_AUX, 0);
            for i in (1..perm.len()).rev() {
                let j = (s.next_u64() % (i as u64 + 1)) as usize;
                perm.swap(i, j);
            }
            let shuffled = tsum_k(&rv(&perm), k).unwrap();
            prop_assert!((base - shuffled).abs() <= fp_slop(&x));
        }

        #[test]
        fn bounded_drift_2km((x, k) in vec_and_k()) {
            let v = rv(&x);
            let m = v.linf_norm();
            let total: f64 = x.iter().sum();
            let t = tsum_k(&v, k).unwrap();
            let bound = 2.0 * k as f64 * m;
            prop_assert!((t - total).abs() <= bound * (1.0 + 1e-12) + fp_slop(&x));
        }

        #[test]
        fn replacement_stability_6km((x, k) in vec_and_k(), raw in prop::collection::vec((any::<prop::sample::Index>(), entry()), 0..8)) {
            let v = rv(&x);
            let mut xp = x.clone();
            let mut touched = std::collections::BTreeSet::new();
            for (idx, val) in raw {
                if touched.len() == k {
                    break;
                }
                let i = idx.index(x.len());
                touched.insert(i);
                xp[i] = val;
            }
            prop_assume!(touched.len() <= k);
            let m = v.linf_norm();
            let a = tsum_k(&v, k).unwrap();
            let b = tsum_k(&rv(&xp), k).unwrap();
            let slop = fp_slop(&x) + fp_slop(&xp);
            let bound = 6.0 * k as f64 * m;
            prop_assert!((a - b).abs() <= bound * (1.0 + 1e-12) + slop);
            // symmetric form with the smaller sup-norm
            let m_min = m.min(rv(&xp).linf_norm());
            let bound_min = 6.0 * k as f64 * m_min;
            prop_assert!((a - b).abs() <= bound_min * (1.0 + 1e-12) + slop);
        }

        #[test]
        fn inner_product_stability_8km(
            (x, k) in vec_and_k(),
            w_raw in prop::collection::vec(entry(), 40),
            raw in prop::collection::vec((any::<prop::sample::Index>(), entry()), 0..8),
        ) {
            prop_assume!(k >= 1);
            let d = x.len();
            let w = rv(&w_raw[..d]);
            let mut xp = x.clone();
            let mut touched = std::collections::BTreeSet::new();
            for (idx, val) in raw {
                if touched.len() == k {
                    break;
                }
                let i = idx.index(d);
                touched.insert(i);
                xp[i] = val;
            }
            prop_assume!(touched.len() <= k);
            let plain: f64 = w.as_slice().iter().zip(&x).map(|(a, b)| a * b).sum();
            let trunc = trunc_inner_product(&w, &rv(&xp), k).unwrap();
            let scale = w
                .as_slice()
                .iter()
                .zip(&x)
                .map(|(a, b)| (a * b).abs())
                .fold(0.0f64, f64::max);
            let products: Vec<f64> = w.as_slice().iter().zip(&xp).map(|(a, b)| a * b).collect();
            let bound = 8.0 * k as f64 * scale;
            prop_assert!((trunc - plain).abs() <= bound * (1.0 + 1e-12) + fp_slop(&products) + 8.0 * k as f64 * scale * 1e-12);
        }

        #[test]
        fn monotone_in_each_coordinate((x, k) in vec_and_k(), idx in any::<prop::sample::Index>(), bump in 0.0..1e6f64) {
            let i = idx.index(x.len());
            let base = tsum_k(&rv(&x), k).unwrap();
            let mut up = x.clone();
            up[i] += bump;
            let bumped = tsum_k(&rv(&up), k).unwrap();
            prop_assert!(bumped >= base - fp_slop(&up));
        }
    }
}
