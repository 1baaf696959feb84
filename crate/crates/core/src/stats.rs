//! Shared statistical utilities: normal CDF/quantile, summary accumulators,
//! two-sample Kolmogorov-Smirnov distance, ordinary least squares.

use statrs::function::erf;

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    0.5 * erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile (inverse CDF), `p` in (0, 1).
pub fn inv_phi(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    std::f64::consts::SQRT_2 * erf::erf_inv(2.0 * p - 1.0)
}

/// P(sup_{s <= t} |B_s| >= a) for standard Brownian motion, by the
/// reflection image series. Converges fast for a/sqrt(t) not tiny.
pub fn sup_abs_tail(a: f64, t: f64) -> f64 {
    assert!(a >= 0.0 && t >= 0.0);
    if a == 0.0 {
        return 1.0;
    }
    if t == 0.0 {
        return 0.0;
    }
    let s = t.sqrt();
    let mut inside = 0.0;
    for k in -64i64..=64 {
        let k = k as f64;
        let term = phi((2.0 * k + 1.0) * a / s) - phi((2.0 * k - 1.0) * a / s);
        inside += if (k as i64).rem_euclid(2) == 0 { term } else { -term };
    }
    (1.0 - inside).clamp(0.0, 1.0)
}

/// Mean, standard error of the mean, and 95% CI from replicate-level values.
#[derive(Debug, Clone, Copy)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

impl Summary {
    pub fn from_slice(xs: &[f64]) -> Summary {
        let n = xs.len();
        assert!(n > 0, "summary of empty sample");
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let sd = var.sqrt();
        Summary { n, mean, sd, se: sd / (n as f64).sqrt() }
    }

    pub fn ci95(&self) -> (f64, f64) {
        (self.mean - 1.96 * self.se, self.mean + 1.96 * self.se)
    }
}

/// Two-sample Kolmogorov-Smirnov distance sup_x |F_a(x) - F_b(x)|.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical KS distance at significance `alpha` for a two-sample test.
pub fn ks_critical(alpha: f64, na: usize, nb: usize) -> f64 {
    // c(alpha) = sqrt(-ln(alpha/2)/2)
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}

/// Ordinary least squares fit y = intercept + slope * x.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Standard error of the slope (residual-based, n-2 dof).
    pub slope_se: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    assert!(n >= 2, "need at least two points to fit a line");
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let slope_se = if n > 2 { (ss_res / (nf - 2.0) / sxx).sqrt() } else { f64::NAN };
    LinearFit { slope, intercept, r2, slope_se }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantiles_round_trip() {
        assert!(inv_phi(0.5).abs() < 1e-12);
        assert!((inv_phi(0.975) - 1.959_963_984_540_054).abs() < 1e-6);
        assert!((phi(1.959_963_984_540_054) - 0.975).abs() < 1e-9);
        for &p in &[1e-9, 1e-4, 0.1, 0.3, 0.7, 0.9, 1.0 - 1e-4] {
            assert!((phi(inv_phi(p)) - p).abs() < 1e-8, "round trip failed at {p}");
        }
    }

    #[test]
    fn sup_abs_tail_limits() {
        assert!((sup_abs_tail(1e-9, 1.0) - 1.0).abs() < 1e-6);
        assert!(sup_abs_tail(10.0, 1.0) < 1e-12);
        // Single-barrier comparison: for large a the two-sided tail is close
        // to twice the one-sided reflection value 2*(1 - phi(a)).
        let a = 3.0;
        let one_sided = 2.0 * (1.0 - phi(a));
        let two_sided = sup_abs_tail(a, 1.0);
        assert!(two_sided >= one_sided);
        assert!(two_sided <= 2.0 * one_sided);
    }

    #[test]
    fn summary_and_ci() {
        let s = Summary::from_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert!((s.mean - 2.5).abs() < 1e-12);
        assert!((s.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let (lo, hi) = s.ci95();
        assert!(lo < 2.5 && hi > 2.5);
    }

    #[test]
    fn ks_detects_shift_and_vanishes_on_identical() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        assert!(ks_two_sample(&a, &a) < 1e-12);
        assert!(ks_two_sample(&a, &b) > 0.45);
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 + 3.0 * x).collect();
        let f = linear_fit(&xs, &ys);
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.intercept - 2.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }
}
