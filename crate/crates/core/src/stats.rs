//! Kolmogorov–Smirnov statistics.

/// Two-sample KS statistic `sup_x |F_a(x) - F_b(x)|`. Inputs need not be sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "KS needs nonempty samples");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
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

/// One-sample KS statistic against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    assert!(!sample.is_empty(), "KS needs a nonempty sample");
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Kolmogorov survival function `Q(l) = 2 sum_k (-1)^(k-1) exp(-2 k^2 l^2)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value of statistic `d` for effective size
/// `ne = n m / (n + m)` (or `n` for one sample), with Stephens' correction.
pub fn ks_p_value(d: f64, ne: f64) -> f64 {
    let en = ne.sqrt();
    kolmogorov_q((en + 0.12 + 0.11 / en) * d)
}

/// `n m / (n + m)`.
pub fn effective_size(n: usize, m: usize) -> f64 {
    (n as f64 * m as f64) / (n + m) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng_from_seed;
    use rand::Rng;

    #[test]
    fn identical_samples_have_zero_distance() {
        let a = [3.0, 1.0, 2.0];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
    }

    #[test]
    fn disjoint_samples_have_unit_distance() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0, 5.0]), 1.0);
    }

    #[test]
    fn constant_sample_distance_is_cdf_jump() {
        let b: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let d = ks_two_sample(&[0.25; 50], &b);
        assert!((d - 0.749).abs() < 1e-12, "{d}");
    }

    #[test]
    fn one_sample_uniform() {
        let mut rng = rng_from_seed(3);
        let x: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
        let d = ks_one_sample(&x, |v| v.clamp(0.0, 1.0));
        assert!(ks_p_value(d, 2000.0) > 0.01);
        let shifted: Vec<f64> = x.iter().map(|v| v * 0.8).collect();
        let d = ks_one_sample(&shifted, |v| v.clamp(0.0, 1.0));
        assert!(ks_p_value(d, 2000.0) < 1e-6);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Critical values of the limiting distribution.
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }
}
