//! Small numerical helpers shared across modules.
//!
//! Every reduction over grid samples goes through [`NeumaierSum`] in a fixed
//! iteration order, so results are reproducible bit-for-bit between runs.

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = NeumaierSum::new();
    acc.extend(values);
    acc.total()
}

/// `|x|^p` with fast paths for the exponents that dominate in practice.
#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        a.powf(p)
    }
}

/// `(Σ |v_i|^p · cell_volume)^{1/p}` over the cells selected by `mask`.
pub fn lp_norm(values: &[f64], p: f64, cell_volume: f64, mask: Option<&[bool]>) -> f64 {
    let mut acc = NeumaierSum::new();
    for (i, &v) in values.iter().enumerate() {
        if mask.map_or(true, |m| m[i]) {
            acc.add(abs_pow(v, p));
        }
    }
    let total = acc.total() * cell_volume;
    if p == 1.0 {
        total
    } else if p == 2.0 {
        total.sqrt()
    } else {
        total.powf(1.0 / p)
    }
}

/// Ordinary least-squares line `y = slope·x + intercept`.
///
/// Returns `None` for fewer than two points or degenerate abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mean_x = compensated_sum(xs.iter().copied()) / n as f64;
    let mean_y = compensated_sum(ys.iter().copied()) / n as f64;
    let sxx = compensated_sum(xs.iter().map(|x| (x - mean_x) * (x - mean_x)));
    let sxy = compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)));
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, mean_y - slope * mean_x))
}

/// Spearman rank correlation (average ranks for ties).
pub fn rank_correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let ra = ranks(a);
    let rb = ranks(b);
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let cov = compensated_sum(ra.iter().zip(&rb).map(|(x, y)| (x - mean) * (y - mean)));
    let va = compensated_sum(ra.iter().map(|x| (x - mean) * (x - mean)));
    let vb = compensated_sum(rb.iter().map(|y| (y - mean) * (y - mean)));
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // ranks are 1-based; tied block gets the mean rank
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let mut values = vec![1.0e16];
        values.extend(std::iter::repeat(1.0).take(1000));
        values.push(-1.0e16);
        assert_eq!(compensated_sum(values), 1000.0);
    }

    #[test]
    fn lp_norm_of_constant() {
        let v = [2.0, -2.0, 2.0, 9.0];
        let m = [true, true, true, false];
        assert!((lp_norm(&v, 2.0, 0.5, Some(&m)) - 6f64.sqrt()).abs() < 1e-15);
        assert!((lp_norm(&v, 3.0, 1.0, Some(&m)) - 24f64.powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn line_fit_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 2.0).collect();
        let (s, c) = fit_line(&xs, &ys).unwrap();
        assert!((s - 3.0).abs() < 1e-14 && (c + 2.0).abs() < 1e-14);
        assert!(fit_line(&[1.0], &[2.0]).is_none());
    }

    #[test]
    fn spearman_monotone_and_reversed() {
        let a = [1.0, 2.0, 5.0, 9.0];
        assert_eq!(rank_correlation(&a, &[0.1, 0.2, 0.3, 7.0]), Some(1.0));
        assert_eq!(rank_correlation(&a, &[4.0, 3.0, 2.0, 1.0]), Some(-1.0));
        assert!(rank_correlation(&a, &[1.0, 1.0, 1.0, 1.0]).is_none());
    }
}
