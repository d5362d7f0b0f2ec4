//! Entire maps with two prescribed critical values, and the circle and lune
//! templates composed with the level-2 Hauptmodul.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padiczeta::hauptmodul;
use crate::series::{rat, rat_int, rational_to_f64, ExactSeries, Rational, Series};
use crate::ComplexSeries;

const LOG_DOMAIN: f64 = 300.0;

#[derive(Clone, Debug, PartialEq)]
pub enum AnalyticMap {
    /// `(a+b)/2 (1 - cosh(z/s)) + s sinh(z/s)`, `s = sqrt(a b)`.
    Psi { alpha: Complex64, beta: Complex64 },
    /// `a (1 - sinh^2(sqrt(u (u - z tanh(u)/a))) / sinh^2(u))`.
    Phi { alpha: Complex64, beta: Complex64, u: Complex64 },
    /// `x(z / (2z + 3))`.
    MobiusCircleX,
    /// `x(29/63 (1 + z - sqrt(1 - c z + z^2)))`, `c = 82/841`.
    LuneX,
    /// `inner(r z)`.
    Scaled { inner: Box<AnalyticMap>, r: f64 },
    /// Polynomial with the given coefficients.
    CustomSeries { coeffs: Vec<Complex64> },
}

impl AnalyticMap {
    pub fn identity() -> Self {
        AnalyticMap::CustomSeries { coeffs: vec![Complex64::zero(), Complex64::one()] }
    }

    pub fn linear(c: Complex64) -> Self {
        AnalyticMap::CustomSeries { coeffs: vec![Complex64::zero(), c] }
    }

    pub fn psi(alpha: Complex64, beta: Complex64) -> Self {
        AnalyticMap::Psi { alpha, beta }
    }

    /// `phi_{alpha,beta}` on the principal branch `u = atanh(sqrt(alpha/beta))`.
    pub fn phi(alpha: Complex64, beta: Complex64) -> Result<Self> {
        if alpha.is_zero() || beta.is_zero() || alpha == beta {
            return Err(Error::Precondition("phi: need alpha, beta nonzero and distinct".into()));
        }
        let u = (alpha / beta).sqrt().atanh();
        Ok(AnalyticMap::Phi { alpha, beta, u })
    }

    pub fn scaled(self, r: f64) -> Self {
        AnalyticMap::Scaled { inner: Box::new(self), r }
    }
}

/// `x(q) = q prod (1 + q^n)^24` for `|q| < 1`.
pub fn hauptmodul_at(q: Complex64) -> Result<Complex64> {
    if !(q.norm() < 1.0) || !q.is_finite() {
        return Err(Error::Domain(q.norm()));
    }
    if q.is_zero() {
        return Ok(q);
    }
    let tau = q.ln() / Complex64::new(0.0, 2.0 * PI);
    hauptmodul_at_tau(tau)
}

/// `x` as a function of `tau` in the upper half plane.
///
/// Reduces modulo `Gamma_0(2)` and uses `x(tau) x(-1/(2 tau)) = 2^-12` near
/// the cusp at 0.
pub fn hauptmodul_at_tau(tau: Complex64) -> Result<Complex64> {
    let t = reduce_gamma0_2(tau)?;
    if t.im < 0.5 {
        let dual = -1.0 / (2.0 * t);
        let xd = product_at_tau(reduce_gamma0_2(dual)?);
        return Ok(1.0 / (4096.0 * xd));
    }
    Ok(product_at_tau(t))
}

fn reduce_gamma0_2(mut t: Complex64) -> Result<Complex64> {
    if !(t.im > 0.0) {
        return Err(Error::Domain(1.0));
    }
    for _ in 0..10_000 {
        t.re -= t.re.round();
        if (t - 0.5).norm() < 0.5 {
            t = t / (1.0 - 2.0 * t);
        } else if (t + 0.5).norm() < 0.5 {
            t = t / (1.0 + 2.0 * t);
        } else {
            return Ok(t);
        }
    }
    Ok(t)
}

fn product_at_tau(t: Complex64) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * PI) * t).exp();
    let aq = q.norm();
    let mut p = q;
    let mut qn = Complex64::one();
    for _ in 1..10_000 {
        qn *= q;
        p *= (1.0 + qn).powu(24);
        let tail = 24.0 * qn.norm() * aq / (1.0 - aq);
        if tail < 1e-17 {
            break;
        }
    }
    p
}

fn lune_inner(z: Complex64) -> Complex64 {
    let c: f64 = 82.0 / 841.0;
    let theta = (c / 2.0).acos();
    let z1 = Complex64::from_polar(1.0, theta);
    let z2 = z1.conj();
    (29.0 / 63.0) * (1.0 + z - (1.0 - z / z1).sqrt() * (1.0 - z / z2).sqrt())
}

pub fn eval_map(m: &AnalyticMap, z: Complex64) -> Result<Complex64> {
    match m {
        AnalyticMap::Psi { alpha, beta } => {
            let s = (alpha * beta).sqrt();
            let t = z / s;
            Ok((alpha + beta) / 2.0 * (1.0 - t.cosh()) + s * t.sinh())
        }
        AnalyticMap::Phi { alpha, u, .. } => {
            let w = u * (u - z * u.tanh() / alpha);
            let sh = w.sqrt().sinh();
            let su = u.sinh();
            Ok(alpha * (1.0 - sh * sh / (su * su)))
        }
        AnalyticMap::MobiusCircleX => hauptmodul_at(z / (2.0 * z + 3.0)),
        AnalyticMap::LuneX => hauptmodul_at(lune_inner(z)),
        AnalyticMap::Scaled { inner, r } => eval_map(inner, z * *r),
        AnalyticMap::CustomSeries { coeffs } => Ok(coeffs.iter().rev().fold(Complex64::zero(), |acc, c| acc * z + c)),
    }
}

/// Principal complex logarithm of `m(z)`, evaluated in the log domain where
/// the value would overflow.
pub fn eval_log(m: &AnalyticMap, z: Complex64) -> Result<Complex64> {
    match m {
        AnalyticMap::Psi { alpha, beta } => {
            let s = (alpha * beta).sqrt();
            let t = z / s;
            let half = (alpha + beta) / 2.0;
            if t.re > LOG_DOMAIN {
                return Ok(t - 2f64.ln() + (s - half).ln());
            }
            if t.re < -LOG_DOMAIN {
                return Ok(-t - 2f64.ln() + (-half - s).ln());
            }
            Ok(eval_map(m, z)?.ln())
        }
        AnalyticMap::Phi { alpha, u, .. } => {
            let v = (u * (u - z * u.tanh() / alpha)).sqrt();
            if v.re > LOG_DOMAIN {
                return Ok((-alpha).ln() + 2.0 * v - 4f64.ln() - 2.0 * u.sinh().ln());
            }
            Ok(eval_map(m, z)?.ln())
        }
        AnalyticMap::Scaled { inner, r } => eval_log(inner, z * *r),
        _ => Ok(eval_map(m, z)?.ln()),
    }
}

pub fn eval_log_abs(m: &AnalyticMap, z: Complex64) -> Result<f64> {
    Ok(eval_log(m, z)?.re)
}

fn to_complex(s: &ExactSeries) -> ComplexSeries {
    s.map(|c| Complex64::new(rational_to_f64(c), 0.0))
}

/// `z / (2z + 3)` composed into `x`, exactly.
pub fn circle_template_series(order: usize) -> Result<ExactSeries> {
    let mobius = Series::from_fn(order, |k| {
        if k == 0 {
            Rational::zero()
        } else {
            let num = if k % 2 == 1 { rat_int(1) } else { rat_int(-1) };
            num * Rational::from_integer(num_bigint::BigInt::from(2).pow(k as u32 - 1))
                / Rational::from_integer(num_bigint::BigInt::from(3).pow(k as u32))
        }
    });
    hauptmodul(order.max(5))?.truncate(order).compose(&mobius)
}

/// `29/63 (1 + z - sqrt(1 - c z + z^2))` exactly.
pub fn lune_inner_series(order: usize) -> Result<ExactSeries> {
    let mut quad = vec![Rational::zero(); order.max(3)];
    quad[1] = -rat(82, 841);
    quad[2] = rat_int(1);
    let root = Series::new(quad).truncate(order).binomial_power(&rat(1, 2))?;
    let mut lin = vec![Rational::zero(); order];
    lin[0] = rat_int(1);
    if order > 1 {
        lin[1] = rat_int(1);
    }
    Ok(Series::new(lin).sub(&root).scale(&rat(29, 63)))
}

pub fn lune_template_series(order: usize) -> Result<ExactSeries> {
    hauptmodul(order.max(5))?.truncate(order).compose(&lune_inner_series(order)?)
}

/// Taylor coefficients at 0 through `z^{order-1}`.
pub fn series_at_zero(m: &AnalyticMap, order: usize) -> Result<ComplexSeries> {
    if order < 2 {
        return Err(Error::Precondition("series_at_zero: order must be at least 2".into()));
    }
    match m {
        AnalyticMap::CustomSeries { coeffs } => {
            let mut c = coeffs.clone();
            c.resize(order.max(c.len()), Complex64::zero());
            Ok(Series::new(c).truncate(order))
        }
        AnalyticMap::Psi { alpha, beta } => {
            let s = (alpha * beta).sqrt();
            let half = (alpha + beta) / 2.0;
            let mut c = vec![Complex64::zero(); order];
            let mut fact = 1.0;
            let mut spow = Complex64::one();
            for (k, ck) in c.iter_mut().enumerate().skip(1) {
                fact *= k as f64;
                spow *= s;
                // cosh part for even k, sinh part for odd k
                *ck = if k % 2 == 0 { -half / (spow * fact) } else { s / (spow * fact) };
            }
            Ok(Series::new(c))
        }
        AnalyticMap::Phi { alpha, u, .. } => {
            // a^j [w^j] cosh(2 sqrt(w0 + w)) = sum_n 4^n/(2n)! binom(n, j) w0^{n-j} a^j
            let w0 = u * u;
            let a = -u * u.tanh() / alpha;
            let factor = -alpha / (2.0 * u.sinh() * u.sinh());
            let mut out = vec![Complex64::zero(); order];
            let mut lead = Complex64::one();
            for (j, o) in out.iter_mut().enumerate().skip(1) {
                let jf = j as f64;
                lead *= 4.0 * a / ((2.0 * jf - 1.0) * (2.0 * jf));
                let mut term = lead;
                let mut sum = term;
                for n in j..j + 4000 {
                    let nf = n as f64;
                    term *= 2.0 * w0 / ((2.0 * nf + 1.0) * (nf + 1.0 - jf));
                    sum += term;
                    if n > j + 8 && term.norm() <= 1e-18 * sum.norm() {
                        break;
                    }
                }
                *o = factor * sum;
            }
            Ok(Series::new(out))
        }
        AnalyticMap::MobiusCircleX => Ok(to_complex(&circle_template_series(order)?)),
        AnalyticMap::LuneX => Ok(to_complex(&lune_template_series(order)?)),
        AnalyticMap::Scaled { inner, r } => {
            let s = series_at_zero(inner, order)?;
            let mut rp = 1.0;
            Ok(Series::from_fn(order, |k| {
                let v = s.coeff(k) * rp;
                rp *= r;
                v
            }))
        }
    }
}

/// Composition of the quadratic maps `z - z^2/(4 beta_j)`, innermost
/// (deepest) first.
pub fn phi_by_iteration(alpha: Complex64, beta: Complex64, depth: usize, order: usize) -> Result<ComplexSeries> {
    if !(alpha.norm() < beta.norm()) || depth == 0 || order < 2 {
        return Err(Error::Precondition("phi_by_iteration: |alpha| < |beta|, depth >= 1, order >= 2".into()));
    }
    let build = |d: usize| -> Result<ComplexSeries> {
        let mut betas = Vec::with_capacity(d);
        let (mut a, mut b) = (alpha, beta);
        for _ in 0..d {
            betas.push(b);
            let s = (1.0 - a / b).sqrt();
            (a, b) = (2.0 * b * (1.0 - s), 2.0 * b * (1.0 + s));
        }
        let mut f: ComplexSeries = Series::variable(order);
        for b in betas.iter().rev() {
            f = f.sub(&f.mul(&f).scale(&(1.0 / (4.0 * b))));
        }
        Ok(f)
    };
    let f = build(depth)?;
    if depth >= 2 {
        let g = build(depth - 1)?;
        for (k, (x, y)) in f.coeffs().iter().zip(g.coeffs()).enumerate() {
            let delta = (x - y).norm();
            if delta > 1e-9 {
                return Err(Error::NonConvergence { index: k, delta });
            }
        }
    }
    Ok(f)
}

/// `|m'(0)|`.
pub fn conformal_size(m: &AnalyticMap) -> Result<f64> {
    Ok(series_at_zero(m, 2)?.coeff(1).norm())
}
