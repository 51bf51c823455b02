//! Per-drive mission bad-block counts.
//!
//! Counts are laid out deterministically (stratified inverse CDF) so that a
//! pool hits its quotas, median and conditional medians exactly; randomness
//! only decides which drive receives which count.
//!
//! Unmarked drives follow a survival curve S(x) = P(count ≥ x) over the
//! bad-block population, pinned at the median and at the conditional-median
//! anchors S(m_k) = S(k) / 2, log-linear in the count between anchors, and
//! descending to the marked-drive share at the marked threshold. Marked drives
//! take a half-normal tail above the threshold whose spread is bisected so the
//! population mean lands on the profile mean.

use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, Normal};

/// Half-gap of S around 0.5 at the median, so rounding of a finite pool can
/// never move the median to a neighbouring count.
const MEDIAN_MARGIN: f64 = 0.03;

/// Value at `x` of the curve through `anchors`, linear in ln(x).
fn log_interp(x: u64, anchors: &BTreeMap<u64, f64>) -> Option<f64> {
    if let Some(&v) = anchors.get(&x) {
        return Some(v);
    }
    let (&lo, &ylo) = anchors.range(..x).next_back()?;
    let (&hi, &yhi) = anchors.range(x..).next()?;
    let w = (x as f64 / lo as f64).ln() / (hi as f64 / lo as f64).ln();
    Some(ylo + (yhi - ylo) * w)
}

/// Survival anchors from the median and the conditional-median targets
/// (for k = 2..=5 prior bad blocks).
pub(crate) fn survival_anchors(median: u64, targets: &[f64; 4]) -> BTreeMap<u64, f64> {
    let median = median.max(1);
    let mut pinned = BTreeMap::from([(1u64, 1.0)]);
    if median >= 2 {
        pinned.insert(median, 0.5 + MEDIAN_MARGIN);
    }
    pinned.insert(median + 1, 0.5 - MEDIAN_MARGIN);

    let ks = [2u64, 3, 4, 5];
    let ms: Vec<u64> = targets
        .iter()
        .zip(ks)
        .map(|(&m, k)| (m.round() as u64).max(k + 1))
        .collect();

    // S(k) for prior counts that are not pinned is read off the curve, which
    // itself depends on the S(m_k) = S(k)/2 anchors: iterate to a fixed point.
    let mut est: BTreeMap<u64, f64> = BTreeMap::new();
    let with_targets = |est: &BTreeMap<u64, f64>| {
        let mut a = pinned.clone();
        for (&k, &m) in ks.iter().zip(&ms) {
            if let Some(&s) = pinned.get(&k).or(est.get(&k)) {
                a.entry(m).or_insert(s / 2.0);
            }
        }
        a
    };
    for _ in 0..500 {
        let a = with_targets(&est);
        let mut next = BTreeMap::new();
        for &k in &ks {
            if pinned.contains_key(&k) {
                continue;
            }
            let v = if ms.contains(&k) && a.contains_key(&k) {
                a[&k]
            } else {
                let mut others = a.clone();
                others.remove(&k);
                log_interp(k, &others).unwrap_or_else(|| *pinned.values().next_back().unwrap())
            };
            next.insert(k, v);
        }
        let done = next.len() == est.len()
            && next
                .iter()
                .all(|(k, v)| est.get(k).is_some_and(|e: &f64| (e - v).abs() < 1e-13));
        est = next;
        if done {
            break;
        }
    }
    let mut a = with_targets(&est);
    a.extend(est);
    a
}

/// Cumulative distribution of unmarked counts over 1..threshold, indexed by
/// `count - 1`; built from the population survival curve with `marked_share`
/// of the bad-block population sitting at or above `threshold`.
pub(crate) fn unmarked_cdf(
    median: u64,
    targets: &[f64; 4],
    marked_share: f64,
    threshold: u64,
) -> Vec<f64> {
    let threshold = threshold.max(2);
    let mut anchors: BTreeMap<u64, f64> = survival_anchors(median, targets)
        .into_iter()
        .filter(|&(x, _)| x < threshold)
        .collect();
    anchors.insert(threshold, marked_share);
    // Defensive shaping for unusual profiles: non-increasing, never below the
    // marked share (marked drives count towards S at every x below threshold).
    let mut running = 1.0f64;
    for v in anchors.values_mut() {
        running = running.min(*v).max(marked_share);
        *v = running;
    }
    let denom = 1.0 - marked_share;
    let surv_u = |x: u64| -> f64 {
        if denom <= 0.0 {
            return 0.0;
        }
        ((log_interp(x, &anchors).unwrap() - marked_share) / denom).clamp(0.0, 1.0)
    };
    // F(x) = P(count ≤ x) = 1 − S_u(x + 1)
    let mut cdf: Vec<f64> = (1..threshold).map(|x| 1.0 - surv_u(x + 1)).collect();
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

/// `n` counts at the stratified quantiles (i + ½)/n of `cdf`.
pub(crate) fn stratified_counts(cdf: &[f64], n: usize) -> Vec<u64> {
    (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            cdf.partition_point(|&f| f < u)
                .min(cdf.len().saturating_sub(1)) as u64
                + 1
        })
        .collect()
}

/// Stratified half-normal counts on [lo, hi] starting at `lo` with spread `sigma`.
fn half_normal_counts(n: usize, lo: u64, hi: u64, sigma: f64) -> Vec<u64> {
    if sigma <= 0.0 || hi <= lo {
        return vec![lo; n];
    }
    let z = Normal::standard();
    let top = z.cdf((hi - lo) as f64 / sigma) - 0.5;
    (0..n)
        .map(|i| {
            let q = (i as f64 + 0.5) / n as f64;
            let x = lo as f64 + sigma * z.inverse_cdf(0.5 + q * top);
            (x.round() as u64).clamp(lo, hi)
        })
        .collect()
}

/// Marked counts on [lo, hi] whose mean is as close to `target_mean` as the
/// range allows.
pub(crate) fn marked_counts(n: usize, lo: u64, hi: u64, target_mean: f64) -> Vec<u64> {
    let mean = |v: &[u64]| v.iter().sum::<u64>() as f64 / v.len().max(1) as f64;
    if n == 0 || target_mean <= lo as f64 {
        return vec![lo; n];
    }
    let (mut a, mut b) = (0.0, (hi - lo) as f64 + 1.0);
    while mean(&half_normal_counts(n, lo, hi, b)) < target_mean && b < 1e12 {
        a = b;
        b *= 4.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mean(&half_normal_counts(n, lo, hi, mid)) < target_mean {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-9 * b {
            break;
        }
    }
    let (ca, cb) = (
        half_normal_counts(n, lo, hi, a),
        half_normal_counts(n, lo, hi, b),
    );
    if (mean(&ca) - target_mean).abs() <= (mean(&cb) - target_mean).abs() {
        ca
    } else {
        cb
    }
}
