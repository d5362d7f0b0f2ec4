//! Double averages of `log|phi(z) - phi(w)|` over the torus, circle sup-norms
//! and nonarchimedean log-radius ledgers.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::confmaps::{eval_log, hauptmodul_at_tau, AnalyticMap};
use crate::error::{Error, Result};
use crate::numeric::golden_max;
use crate::series::prime_factors;

const LOG_DOMAIN: f64 = 600.0;

#[derive(Clone, Debug, PartialEq)]
pub struct BcEstimate {
    pub value: f64,
    /// `|I(n) - I(n/2)|`.
    pub error_estimate: f64,
    pub grid_n: usize,
}

/// A sampled boundary point: the complex log of `phi(z)`, the value itself
/// when it is representable, the quadrature weight and the angle of `z`.
#[derive(Clone, Copy, Debug)]
struct Node {
    log: Complex64,
    value: Option<Complex64>,
    weight: f64,
    angle: f64,
}

fn node(m: &AnalyticMap, z: Complex64, weight: f64, angle: f64) -> Result<Node> {
    let log = eval_log(m, z)?;
    let value = if log.re < LOG_DOMAIN { Some(log.exp()) } else { None };
    Ok(Node { log, value, weight, angle })
}

/// `log|phi(z) - phi(w)|`, switching to `max + log|1 - ratio|` for huge values.
fn log_abs_diff(a: &Node, b: &Node) -> f64 {
    if let (Some(x), Some(y)) = (a.value, b.value) {
        return (x - y).norm().ln();
    }
    let (hi, lo) = if a.log.re >= b.log.re { (a, b) } else { (b, a) };
    hi.log.re + (1.0 - (lo.log - hi.log).exp()).norm().ln()
}

fn torus_sum(zs: &[Node], ws: &[Node], chord: impl Fn(&Node, &Node) -> f64 + Sync) -> Result<f64> {
    let rows: Vec<std::result::Result<f64, (usize, usize)>> = zs
        .par_iter()
        .enumerate()
        .map(|(j, a)| {
            let mut s = 0.0;
            for (k, b) in ws.iter().enumerate() {
                let g = log_abs_diff(a, b) - chord(a, b);
                if !g.is_finite() {
                    return Err((j, k));
                }
                s += a.weight * b.weight * g;
            }
            Ok(s)
        })
        .collect();
    let mut total = 0.0;
    for r in rows {
        total += r.map_err(|(j, k)| Error::NonFiniteSample(j, k))?;
    }
    Ok(total)
}

fn uniform_level(m: &AnalyticMap, n: usize) -> Result<f64> {
    let theta = |j: usize, shift: f64| 2.0 * PI * (j as f64 + 0.25 + shift) / n as f64;
    let w = 1.0 / n as f64;
    let zs = (0..n)
        .into_par_iter()
        .map(|j| node(m, Complex64::from_polar(1.0, theta(j, 0.0)), w, theta(j, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    let ws = (0..n)
        .into_par_iter()
        .map(|j| node(m, Complex64::from_polar(1.0, theta(j, 0.5)), w, theta(j, 0.5)))
        .collect::<Result<Vec<_>>>()?;
    torus_sum(&zs, &ws, |a, b| (2.0 * ((a.angle - b.angle) / 2.0).sin()).abs().ln())
}

/// Grading exponent of the mesh clustered at the cusp of the circle template.
pub const GRADING: f64 = 4.0;

fn kress_c(s: f64, p: f64) -> f64 {
    (1.0 / p - 0.5) * ((PI - s) / PI).powi(3) + (1.0 / p) * (s - PI) / PI + 0.5
}

fn kress_dc(s: f64, p: f64) -> f64 {
    -(1.0 / p - 0.5) * 3.0 * ((PI - s) / PI).powi(2) / PI + 1.0 / (p * PI)
}

/// Kress substitution on `[0, 2 pi]` with its derivative.
pub fn kress(s: f64, p: f64) -> (f64, f64) {
    let (c1, c2) = (kress_c(s, p), kress_c(2.0 * PI - s, p));
    let a = c1.powf(p);
    let b = c2.powf(p);
    let da = p * c1.powf(p - 1.0) * kress_dc(s, p);
    let db = -p * c2.powf(p - 1.0) * kress_dc(2.0 * PI - s, p);
    (2.0 * PI * a / (a + b), 2.0 * PI * (da * b - a * db) / ((a + b) * (a + b)))
}

/// `x(q(z))` at `z = -e^{i delta}` with the distance to the cusp kept exact.
pub fn circle_template_at_angle(delta: f64) -> Result<Complex64> {
    let arg = delta - (-2.0 * delta.sin()).atan2(3.0 - 2.0 * delta.cos());
    let s = (delta / 2.0).sin();
    let eps = Complex64::new(arg / (2.0 * PI), (24.0 * s * s).ln_1p() / (4.0 * PI));
    let tau = if eps.norm() < 0.25 { (0.5 + eps) / (-2.0 * eps) } else { 0.5 + eps };
    hauptmodul_at_tau(tau)
}

fn graded_level(n: usize) -> Result<f64> {
    let p = GRADING;
    let place = |s: f64| -> (f64, f64) {
        if s <= PI {
            kress(s, p)
        } else {
            let (v, dv) = kress(2.0 * PI - s, p);
            (-v, dv)
        }
    };
    let make = |s: f64| -> Result<Node> {
        let (delta, dv) = place(s);
        let value = circle_template_at_angle(delta)?;
        Ok(Node {
            log: value.ln(),
            value: Some(value),
            weight: dv / n as f64,
            angle: delta,
        })
    };
    let zs = (0..n)
        .into_par_iter()
        .map(|j| make(2.0 * PI * (j as f64 + 0.5) / n as f64))
        .collect::<Result<Vec<_>>>()?;
    let ws = (0..n - 1)
        .into_par_iter()
        .map(|k| make(2.0 * PI * (k as f64 + 1.0) / n as f64))
        .collect::<Result<Vec<_>>>()?;
    torus_sum(&zs, &ws, |a, b| (2.0 * ((a.angle - b.angle) / 2.0).sin()).abs().ln())
}

fn level(m: &AnalyticMap, n: usize) -> Result<f64> {
    match m {
        AnalyticMap::MobiusCircleX => graded_level(n),
        _ => uniform_level(m, n),
    }
}

/// `(1/4 pi^2) int int log|phi(z) - phi(w)| d theta d theta'` over the torus.
///
/// `log|z - w|` integrates to zero and is subtracted pointwise. The circle
/// template is sampled on a mesh graded towards its cusp at `z = -1`; every
/// other map on offset uniform grids.
pub fn bost_charles_integral(m: &AnalyticMap, grid_n: usize) -> Result<BcEstimate> {
    if grid_n < 64 || !grid_n.is_power_of_two() {
        return Err(Error::Precondition("grid_n must be a power of two, at least 64".into()));
    }
    let fine = level(m, grid_n)?;
    let coarse = level(m, grid_n / 2)?;
    Ok(BcEstimate { value: fine, error_estimate: (fine - coarse).abs(), grid_n })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupReport {
    pub value: f64,
    /// Angle of the maximizer on the unit circle.
    pub argmax: f64,
}

/// `max log|m(z)|` over `|z| = 1`.
pub fn sup_log_on_circle(m: &AnalyticMap, grid_n: usize) -> Result<SupReport> {
    if grid_n < 256 {
        return Err(Error::Precondition("sup_log_on_circle: grid_n must be at least 256".into()));
    }
    let h = 2.0 * PI / grid_n as f64;
    let f = |t: f64| eval_log(m, Complex64::from_polar(1.0, t)).map(|l| l.re);
    let samples = (0..grid_n).map(|k| f(h * (k as f64 + 0.5))).collect::<Result<Vec<_>>>()?;
    let mut peaks: Vec<usize> = (0..grid_n)
        .filter(|&k| {
            let prev = samples[(k + grid_n - 1) % grid_n];
            let next = samples[(k + 1) % grid_n];
            samples[k] >= prev && samples[k] >= next
        })
        .collect();
    peaks.sort_by(|a, b| samples[*b].total_cmp(&samples[*a]));
    peaks.truncate(3);
    let mut best = SupReport { value: f64::NEG_INFINITY, argmax: 0.0 };
    for k in peaks {
        let t = h * (k as f64 + 0.5);
        let (arg, val) = golden_max(t - h, t + h, 1e-12, |s| f(s).unwrap_or(f64::NEG_INFINITY));
        let (arg, val) = if val >= samples[k] { (arg, val) } else { (t, samples[k]) };
        if val > best.value {
            best = SupReport { value: val, argmax: arg.rem_euclid(2.0 * PI) };
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaceLedger {
    pub archimedean: Vec<(AnalyticMap, f64)>,
    pub nonarch_log_radius_sum: f64,
    pub per_prime_log_radii: Option<BTreeMap<u64, f64>>,
}

/// `log R_p = -(v_p(r) log p + log p/(p - 1))` for `p | r`.
pub fn padic_ledger_for_root(r: u64) -> Result<PlaceLedger> {
    if r == 0 {
        return Err(Error::Precondition("padic_ledger_for_root: r must be positive".into()));
    }
    let mut per = BTreeMap::new();
    for p in prime_factors(r) {
        let mut v = 0u32;
        let mut n = r;
        while n % p == 0 {
            n /= p;
            v += 1;
        }
        let lp = (p as f64).ln();
        per.insert(p, -(v as f64 * lp + lp / (p as f64 - 1.0)));
    }
    let sum = per.values().sum();
    Ok(PlaceLedger { archimedean: Vec::new(), nonarch_log_radius_sum: sum, per_prime_log_radii: Some(per) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_linear() {
        let r = bost_charles_integral(&AnalyticMap::identity(), 64).unwrap();
        assert!(r.value.abs() < 1e-12);
        let r = bost_charles_integral(&AnalyticMap::linear(Complex64::new(0.0, 2.5)), 128).unwrap();
        assert!((r.value - 2.5f64.ln()).abs() < 1e-12);
        assert!(bost_charles_integral(&AnalyticMap::identity(), 100).is_err());
    }

    #[test]
    fn polynomial_capacity() {
        // z + a z^2 with |a| < 1/2 is univalent on the disc; capacity of the image of the circle is 1
        let m = AnalyticMap::CustomSeries {
            coeffs: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.2, 0.1)],
        };
        let r = bost_charles_integral(&m, 256).unwrap();
        assert!(r.value.abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn rotation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base: Vec<Complex64> = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.3, 0.2),
            Complex64::new(0.4, -0.1),
            Complex64::new(0.1, 0.05),
        ];
        let reference = bost_charles_integral(&AnalyticMap::CustomSeries { coeffs: base.clone() }, 256).unwrap();
        for _ in 0..5 {
            let t: f64 = rng.gen_range(0.0..2.0 * PI);
            let rotated = base.iter().enumerate().map(|(k, c)| c * Complex64::from_polar(1.0, t * k as f64)).collect();
            let r = bost_charles_integral(&AnalyticMap::CustomSeries { coeffs: rotated }, 256).unwrap();
            assert!((r.value - reference.value).abs() < 1e-6);
        }
    }

    #[test]
    fn kress_is_monotone_onto() {
        let (v0, _) = kress(1e-12, GRADING);
        let (vpi, _) = kress(PI, GRADING);
        assert!(v0.abs() < 1e-9 && (vpi - PI).abs() < 1e-12);
        let mut prev = 0.0;
        for k in 1..100 {
            let s = PI * k as f64 / 100.0;
            let (v, dv) = kress(s, GRADING);
            assert!(v > prev && dv >= 0.0);
            let h = 1e-6;
            let fd = (kress(s + h, GRADING).0 - kress(s - h, GRADING).0) / (2.0 * h);
            assert!((fd - dv).abs() < 1e-6 * (1.0 + dv));
            prev = v;
        }
    }

    #[test]
    fn exact_cusp_path_matches_generic() {
        for delta in [0.05, 0.3, 1.0, 2.5, -0.7] {
            let z = -Complex64::from_polar(1.0, delta);
            let generic = crate::confmaps::eval_map(&AnalyticMap::MobiusCircleX, z).unwrap();
            let exact = circle_template_at_angle(delta).unwrap();
            assert!((generic - exact).norm() < 1e-9 * (1.0 + exact.norm()), "{delta}");
        }
        // The boundary meets the cusp along a horocycle: |x| stays near exp(-pi^2/3).
        for delta in [1e-9, 1e-7, 1e-5, -1e-6] {
            let n = circle_template_at_angle(delta).unwrap().norm();
            assert!((0.01..0.2).contains(&n), "{delta}: {n}");
        }
    }

    #[test]
    fn sup_examples() {
        assert!(sup_log_on_circle(&AnalyticMap::identity(), 256).unwrap().value.abs() < 1e-12);
        let s = sup_log_on_circle(&AnalyticMap::linear(Complex64::new(5.0, 0.0)), 256).unwrap();
        assert!((s.value - 5f64.ln()).abs() < 1e-12);
        let s = sup_log_on_circle(&AnalyticMap::MobiusCircleX, 1024).unwrap();
        let direct = (1..200).fold((0.2f64).ln(), |acc, n| acc + 24.0 * (0.2f64.powi(n)).ln_1p());
        assert!((s.value - direct).abs() < 1e-9);
        assert!(s.argmax < 1e-5 || (2.0 * PI - s.argmax) < 1e-5);
    }

    #[test]
    fn ledger_examples() {
        let l = padic_ledger_for_root(7).unwrap();
        let l7 = 7f64.ln();
        assert!((l.nonarch_log_radius_sum + l7 + l7 / 6.0).abs() < 1e-15);
        let l = padic_ledger_for_root(1).unwrap();
        assert_eq!(l.nonarch_log_radius_sum, 0.0);
        assert!(l.per_prime_log_radii.unwrap().is_empty());
        let l = padic_ledger_for_root(6).unwrap();
        let want = -6f64.ln() - 2f64.ln() - 3f64.ln() / 2.0;
        assert!((l.nonarch_log_radius_sum - want).abs() < 1e-14);
        let per = l.per_prime_log_radii.unwrap();
        assert!((per.values().sum::<f64>() - l.nonarch_log_radius_sum).abs() < 1e-15);
    }
}
