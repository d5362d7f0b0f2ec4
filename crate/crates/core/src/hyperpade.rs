//! Hypergeometric polynomials, the Padé remainder identity for `(1-x)^nu`,
//! the dihedral generating functions `A_nu`, `B_nu`, their logarithmic
//! limit and the Catalan family.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padiczeta::PadicApprox;
use crate::series::{binom_int, binom_rational, rat_int, valuation_p, ExactSeries, Rational, Series};

#[derive(Clone, Debug, PartialEq)]
pub struct HypergeometricParams {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

impl HypergeometricParams {
    pub fn new(a: Rational, b: Rational, c: Rational) -> Self {
        HypergeometricParams { a, b, c }
    }
}

/// Truncated `2F1(a, b; c; x)`. The series stops as soon as `a + k` or
/// `b + k` vanishes; a vanishing `c + k` before that is a pole.
pub fn hyper_2f1_poly(p: &HypergeometricParams, order: usize) -> Result<ExactSeries> {
    if order == 0 {
        return Err(Error::Precondition("hyper_2f1_poly: order must be positive".into()));
    }
    let mut coeffs = vec![Rational::zero(); order];
    coeffs[0] = Rational::one();
    let mut term = Rational::one();
    for k in 0..order - 1 {
        let kk = rat_int(k as i64);
        let ak = &p.a + &kk;
        let bk = &p.b + &kk;
        if ak.is_zero() || bk.is_zero() {
            break;
        }
        let ck = &p.c + &kk;
        if ck.is_zero() {
            return Err(Error::Pole(format!("c + {k} = 0")));
        }
        term = term * ak * bk / (ck * rat_int(k as i64 + 1));
        coeffs[k + 1] = term.clone();
    }
    Ok(Series::new(coeffs))
}

/// Formal `(1 - x)^nu` at `x = 0`.
pub fn one_minus_x_pow(nu: &Rational, order: usize) -> ExactSeries {
    Series::from_fn(order, |k| {
        let b = binom_rational(nu, k);
        if k % 2 == 1 {
            -b
        } else {
            b
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PadeReport {
    /// First power with a nonzero coefficient, `None` if zero through the order.
    pub remainder_valuation: Option<usize>,
    pub leading_coefficient: Rational,
}

/// `(-1)^m binom(n + nu, m + n + 1) / binom(m + n, m)`.
pub fn pade_leading_coefficient(m: usize, n: usize, nu: &Rational) -> Rational {
    let c = binom_rational(&(nu + rat_int(n as i64)), m + n + 1)
        / Rational::from_integer(binom_int((m + n) as u64, m as u64));
    if m % 2 == 1 {
        -c
    } else {
        c
    }
}

/// Expands `2F1(-nu-n, -m; -m-n; x) - (1-x)^nu 2F1(nu-m, -n; -m-n; x)`,
/// checks that it vanishes through `x^{m+n}` and that the next coefficient
/// equals [`pade_leading_coefficient`].
pub fn pade_identity_check(m: usize, n: usize, nu: &Rational, order: usize) -> Result<PadeReport> {
    if order < m + n + 2 {
        return Err(Error::Precondition(format!("pade_identity_check: order {order} < m + n + 2")));
    }
    let mi = rat_int(m as i64);
    let ni = rat_int(n as i64);
    let lower = -(&mi + &ni);
    let p = hyper_2f1_poly(&HypergeometricParams::new(-nu - &ni, -mi.clone(), lower.clone()), order)?;
    let q = hyper_2f1_poly(&HypergeometricParams::new(nu - &mi, -ni, lower), order)?;
    let lhs = p.sub(&one_minus_x_pow(nu, order).mul(&q));
    let deg = m + n;
    if let Some(v) = lhs.valuation() {
        if v <= deg {
            return Err(Error::IdentityFailure { power: v, detail: format!("coefficient {}", lhs.coeff(v)) });
        }
    }
    let leading = lhs.coeff(deg + 1).clone();
    let expected = pade_leading_coefficient(m, n, nu);
    if leading != expected {
        return Err(Error::IdentityFailure {
            power: deg + 1,
            detail: format!("leading coefficient {leading}, expected {expected}"),
        });
    }
    Ok(PadeReport { remainder_valuation: lhs.valuation(), leading_coefficient: leading })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DihedralPair {
    pub nu: Rational,
    pub x: Rational,
    pub a: ExactSeries,
    pub b: ExactSeries,
}

/// `[y^n] A_nu(x, y) = 2F1(-nu-n, -n; -2n; x) binom(2n, n)`.
fn dihedral_a(nu: &Rational, x: &Rational, order: usize) -> Result<ExactSeries> {
    let mut coeffs = Vec::with_capacity(order);
    for n in 0..order {
        let ni = rat_int(n as i64);
        let poly = hyper_2f1_poly(
            &HypergeometricParams::new(-nu - &ni, -ni.clone(), rat_int(-2 * n as i64)),
            n + 1,
        )?;
        let mut value = Rational::zero();
        for c in poly.coeffs().iter().rev() {
            value = value * x + c;
        }
        coeffs.push(value * Rational::from_integer(binom_int(2 * n as u64, n as u64)));
    }
    Ok(Series::new(coeffs))
}

pub fn dihedral_generators(nu: &Rational, x: &Rational, order: usize) -> Result<DihedralPair> {
    Ok(DihedralPair {
        nu: nu.clone(),
        x: x.clone(),
        a: dihedral_a(nu, x, order)?,
        b: dihedral_a(&-nu, x, order)?,
    })
}

/// Coefficient of `x^j y^n` in `A_nu` from the double-sum form.
pub fn dihedral_monomial(nu: &Rational, n: usize, j: usize) -> Rational {
    if j > n {
        return Rational::zero();
    }
    let k = n - j;
    let mut falling = Rational::one();
    for i in (k + 1)..=n {
        falling *= rat_int(i as i64) + nu;
    }
    let fact: BigInt = (1..=j as u64).map(BigInt::from).product();
    let c = falling / Rational::from_integer(fact) * Rational::from_integer(binom_int((n + k) as u64, k as u64));
    if j % 2 == 1 {
        -c
    } else {
        c
    }
}

/// `(1 - 4y + 2xy + x^2 y^2) f'' + 3(x^2 y + x - 2) f' + x^2 (1 - nu^2) f`,
/// truncated two orders below `f`.
pub fn dihedral_ode_residual(f: &ExactSeries, nu: &Rational, x: &Rational) -> Result<ExactSeries> {
    if f.order() < 3 {
        return Err(Error::Precondition("dihedral_ode_residual: order must be at least 3".into()));
    }
    let n = f.order() - 2;
    let d1 = f.differentiate();
    let d2 = d1.differentiate();
    let x2 = x * x;
    let quad = Series::new(vec![Rational::one(), rat_int(-4) + rat_int(2) * x, x2.clone()]);
    let lin = Series::new(vec![rat_int(3) * (x - rat_int(2)), rat_int(3) * &x2]);
    let pad = |s: &ExactSeries| {
        let mut v = s.coeffs().to_vec();
        v.resize(n.max(s.order()), Rational::zero());
        Series::new(v).truncate(n)
    };
    let t2 = pad(&quad).mul(&d2.truncate(n));
    let t1 = pad(&lin).mul(&d1.truncate(n));
    let t0 = f.truncate(n).scale(&(x2 * (Rational::one() - nu * nu)));
    Ok(t2.add(&t1).add(&t0))
}

/// `cos(nu w)/sqrt(Q)` and `sin(nu w)/sqrt(Q)` with
/// `w = arccos((x^2 y + x - 2) / (2 sqrt(1 - x)))` and
/// `Q = 1 - 4y + 2xy + x^2 y^2`, principal branches throughout.
pub fn companion_values(nu: f64, x: f64, y: Complex64) -> Result<(Complex64, Complex64)> {
    let quad = Complex64::new(1.0, 0.0) - 4.0 * y + 2.0 * x * y + x * x * y * y;
    if quad.norm() < 1e-12 {
        return Err(Error::Singularity(quad.norm()));
    }
    let root = Complex64::new(1.0 - x, 0.0).sqrt();
    let arg = (x * x * y + x - 2.0) / (2.0 * root);
    let w = arg.acos();
    let s = quad.sqrt();
    Ok(((nu * w).cos() / s, (nu * w).sin() / s))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogFamily {
    pub a: ExactSeries,
    pub b: ExactSeries,
}

/// The `nu -> 0` limit pair in `y`:
/// `A = Q^{-1/2}` and `B = 2A log(1 - x(1 + xy - sqrt Q)/2)` with
/// `Q = 1 - 4y + 2xy + x^2 y^2`.
pub fn log_family(x: &Rational, order: usize) -> Result<LogFamily> {
    if order < 2 {
        return Err(Error::Precondition("log_family: order must be at least 2".into()));
    }
    let mut u = vec![Rational::zero(); order];
    u[1] = rat_int(-4) + rat_int(2) * x;
    if order > 2 {
        u[2] = x * x;
    }
    let u = Series::new(u);
    let a = u.binomial_power(&crate::series::rat(-1, 2))?;
    let sqrt_q = u.binomial_power(&crate::series::rat(1, 2))?;
    // 1 + xy - sqrt(Q) vanishes at y = 0
    let mut inner = sqrt_q.neg();
    inner = inner.add(&Series::one(order));
    if order > 1 {
        let mut v = inner.into_coeffs();
        v[1] += x;
        inner = Series::new(v);
    }
    let arg = inner.scale(&(-x / rat_int(2)));
    let log = arg.log1p()?;
    let b = a.mul(&log).scale(&rat_int(2));
    Ok(LogFamily { a, b })
}

/// The `x = 2`, `y = iz` specialization:
/// `A = (1 - 4z^2)^{-1/2}`, `B = -2A arcsin(2z)`.
pub fn pi_family(order: usize) -> Result<LogFamily> {
    if order < 2 {
        return Err(Error::Precondition("pi_family: order must be at least 2".into()));
    }
    let a = Series::from_fn(order, |k| {
        if k % 2 == 1 {
            Rational::zero()
        } else {
            Rational::from_integer(binom_int(k as u64, k as u64 / 2))
        }
    });
    // arcsin(2z) = sum binom(2n,n) (2z)^{2n+1} / (4^n (2n+1)) = sum binom(2n,n) 2 z^{2n+1}/(2n+1)
    let asin = Series::from_fn(order, |k| {
        if k % 2 == 0 {
            Rational::zero()
        } else {
            let n = (k - 1) / 2;
            Rational::new(binom_int(2 * n as u64, n as u64) * 2, BigInt::from(k))
        }
    });
    let b = a.mul(&asin).scale(&rat_int(-2));
    Ok(LogFamily { a, b })
}

/// `H = B - pi A` for the pi specialization, in floating point.
pub fn pi_h_numeric(order: usize) -> Result<Series<f64>> {
    let fam = pi_family(order)?;
    Ok(fam.b.to_f64().sub(&fam.a.to_f64().scale(&std::f64::consts::PI)))
}

#[derive(Clone, Debug)]
pub struct CatalanFamily {
    /// Holomorphic solution of `L F = 0` with `F(0) = 1`.
    pub a: ExactSeries,
    /// Solution of `L F = 1 + 16x` with `F(0) = 0`, `F'(0) = 1`.
    pub b: ExactSeries,
    /// 2-adic coefficients of the solution regular on `|1 + 16x|_2 < 2^4`.
    pub d: Vec<PadicApprox>,
    /// `G_2` read off from `D = B - (G_2/2) A` at each coefficient.
    pub g2_candidates: Vec<PadicApprox>,
}

/// Coefficients of `L F` for
/// `L = x(1+16x)^2 d^2/dx^2 + (1+16x)^2 d/dx - 4`, via
/// `[x^n] L F = (n+1)^2 f_{n+1} + (32n^2 - 4) f_n + 256 (n-1)^2 f_{n-1}`.
pub fn catalan_operator(f: &ExactSeries) -> ExactSeries {
    let n_out = f.order().saturating_sub(1);
    Series::from_fn(n_out, |n| {
        let ni = n as i64;
        let mut s = rat_int((ni + 1) * (ni + 1)) * f.coeff(n + 1) + rat_int(32 * ni * ni - 4) * f.coeff(n);
        if n >= 1 {
            s += rat_int(256 * (ni - 1) * (ni - 1)) * f.coeff(n - 1);
        }
        s
    })
}

fn catalan_solve(order: usize, f0: Rational, rhs: impl Fn(usize) -> Rational) -> ExactSeries {
    let mut f = vec![Rational::zero(); order];
    f[0] = f0;
    for n in 0..order - 1 {
        let ni = n as i64;
        let mut s = rhs(n) - rat_int(32 * ni * ni - 4) * &f[n];
        if n >= 1 {
            s -= rat_int(256 * (ni - 1) * (ni - 1)) * &f[n - 1];
        }
        f[n + 1] = s / rat_int((ni + 1) * (ni + 1));
    }
    Series::new(f)
}

/// `(1 + 16x)^{1/2} 2F1(1/2, 1/2; 1; -16x)` as an explicit product.
pub fn catalan_a_explicit(order: usize) -> Result<ExactSeries> {
    let half = crate::series::rat(1, 2);
    let f = hyper_2f1_poly(&HypergeometricParams::new(half.clone(), half.clone(), Rational::one()), order)?;
    let f = Series::from_fn(order, |k| f.coeff(k) * rat_int(-16).pow(k as i32));
    let mut u = vec![Rational::zero(); order];
    if order > 1 {
        u[1] = rat_int(16);
    }
    Ok(Series::new(u).binomial_power(&half)?.mul(&f))
}

/// `-(w/4) 3F2(1,1,1; 3/2,3/2; w)` at `w = 1 + 16x`, expanded in `x`
/// 2-adically to absolute precision `prec` bits.
fn catalan_d_coefficients(order: usize, prec: i64) -> Vec<PadicApprox> {
    // t_k = 16^k (k!)^4 / ((2k+1)!)^2 has v_2(t_k) = 2k + 2 v_2(k!) >= 2k.
    // Coefficient of x^n: -(1/4) sum_k t_k binom(k+1, n) 16^n.
    let kmax = (prec.max(0) as usize) / 2 + order + 2;
    let mut t = Vec::with_capacity(kmax + 1);
    let mut tk = Rational::one();
    t.push(tk.clone());
    for k in 1..=kmax {
        let kk = BigInt::from(k as u64);
        let num = BigInt::from(16) * kk.pow(4);
        let den = (BigInt::from(2 * k as u64) * BigInt::from(2 * k as u64 + 1)).pow(2);
        tk = tk * Rational::new(num, den);
        t.push(tk.clone());
    }
    (0..order)
        .map(|n| {
            let mut s = Rational::zero();
            let start = n.saturating_sub(1);
            for (k, tk) in t.iter().enumerate().skip(start) {
                s += tk * Rational::from_integer(binom_int(k as u64 + 1, n as u64));
            }
            let val = -s * Rational::from_integer(BigInt::from(16).pow(n as u32)) / rat_int(4);
            // truncation error: omitted terms have v_2 >= 2(kmax+1) + 4n - 2
            let bound = 2 * (kmax as i64 + 1) + 4 * n as i64 - 2;
            PadicApprox::from_rational(&val, prec.min(bound))
        })
        .collect()
}

pub fn catalan_family(order: usize) -> Result<CatalanFamily> {
    if order < 4 {
        return Err(Error::Precondition("catalan_family: order must be at least 4".into()));
    }
    let a = catalan_solve(order, Rational::one(), |_| Rational::zero());
    let b = catalan_solve(order, Rational::zero(), |n| match n {
        0 => Rational::one(),
        1 => rat_int(16),
        _ => Rational::zero(),
    });
    let prec = 8 * order as i64 + 32;
    let d = catalan_d_coefficients(order, prec);
    let mut g2 = Vec::with_capacity(order);
    for n in 0..order {
        let bn = PadicApprox::from_rational(b.coeff(n), prec);
        let an = PadicApprox::from_rational(a.coeff(n), prec);
        if an.is_zero() {
            continue;
        }
        let cand = bn.sub(&d[n]).mul(&PadicApprox::from_rational(&rat_int(2), prec)).div(&an)?;
        g2.push(cand);
    }
    for (i, c) in g2.iter().enumerate().skip(1) {
        let needed = c.absolute_precision().min(g2[0].absolute_precision());
        if c.agreement(&g2[0]) < needed {
            return Err(Error::InconsistentG2 { index: i });
        }
    }
    Ok(CatalanFamily { a, b, d, g2_candidates: g2 })
}

/// `(p-1) v_p([y^n] A_{1/r}(x, .)) >= -n ((p-1) v_p(r) + 1)` for each `n < order`,
/// for every prime `p | r`. Returns the first failing `(p, n)`.
pub fn padic_disc_violation(r: u64, x: &Rational, order: usize) -> Result<Option<(u64, usize)>> {
    let nu = Rational::new(BigInt::one(), BigInt::from(r));
    let a = dihedral_generators(&nu, x, order)?.a;
    for p in crate::series::prime_factors(r) {
        let vr = valuation_p(&rat_int(r as i64), p).unwrap_or(0);
        for n in 0..order {
            if let Some(v) = valuation_p(a.coeff(n), p) {
                let lhs = (p as i64 - 1) * v;
                let rhs = -(n as i64) * ((p as i64 - 1) * vr + 1);
                if lhs < rhs {
                    return Ok(Some((p, n)));
                }
            }
        }
    }
    Ok(None)
}

/// Bivariate oracle: `[y^n z^n] (1 - xy)^nu / (1 - y - z + xyz)` by direct
/// two-variable expansion.
pub fn bivariate_diagonal(nu: &Rational, x: &Rational, order: usize) -> ExactSeries {
    // c[i][j] = [y^i z^j] 1/(1 - y - z + xyz)
    let mut c = vec![vec![Rational::zero(); order]; order];
    for i in 0..order {
        for j in 0..order {
            let mut v = if i == 0 && j == 0 { Rational::one() } else { Rational::zero() };
            if i > 0 {
                v += &c[i - 1][j];
            }
            if j > 0 {
                v += &c[i][j - 1];
            }
            if i > 0 && j > 0 {
                v -= x * &c[i - 1][j - 1];
            }
            c[i][j] = v;
        }
    }
    let pref: Vec<Rational> = (0..order)
        .map(|i| binom_rational(nu, i) * (-x).pow(i as i32))
        .collect();
    Series::from_fn(order, |n| (0..=n).fold(Rational::zero(), |acc, i| acc + &pref[i] * &c[n - i][n]))
}
