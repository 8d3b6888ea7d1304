//! Transport-sized views of raw series.

/// Default point budget per series in the cluster detail view.
pub const MAX_DETAIL_POINTS: usize = 500;

/// Reduces a series to at most `max_points` samples. The first and last
/// samples are always kept; the interior is split into equal windows and
/// each window contributes its minimum and maximum, in time order, so
/// isolated spikes survive decimation.
pub fn downsample(t: &[f64], v: &[f64], max_points: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(t.len(), v.len());
    let n = t.len();
    if n <= max_points || max_points < 4 {
        if n <= max_points {
            return (t.to_vec(), v.to_vec());
        }
        let keep = [0, n - 1];
        return (
            keep.iter().take(max_points).map(|&i| t[i]).collect(),
            keep.iter().take(max_points).map(|&i| v[i]).collect(),
        );
    }
    let interior = 1..n - 1;
    let windows = (max_points - 2) / 2;
    let len = interior.len();
    let mut picks = vec![0];
    for w in 0..windows {
        let start = interior.start + w * len / windows;
        let end = interior.start + (w + 1) * len / windows;
        if start >= end {
            continue;
        }
        let (mut lo, mut hi) = (start, start);
        for i in start..end {
            if v[i] < v[lo] {
                lo = i;
            }
            if v[i] > v[hi] {
                hi = i;
            }
        }
        let (a, b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        picks.push(a);
        if b != a {
            picks.push(b);
        }
    }
    picks.push(n - 1);
    (
        picks.iter().map(|&i| t[i]).collect(),
        picks.iter().map(|&i| v[i]).collect(),
    )
}
