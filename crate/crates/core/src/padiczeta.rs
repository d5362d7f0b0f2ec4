//! 2-adic numbers at finite precision, the level-2 Hauptmodul, 2-stabilized
//! Eisenstein series and the values `zeta_2(1 + 2k)`.
//!
//! Positive `k` is computed two ways. Route A takes the Kummer limit of
//! `zeta*(1 + 2m)` over negative `m` converging to `k`; the Bernoulli factor
//! `(1 - 2^{n-1}) B_n` is evaluated as a 2-adic Riemann sum over odd
//! residues. Route B solves for the constant term that makes
//! `E*_{2k} E*_{-2k}` overconvergent in the Hauptmodul coordinate.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::series::{
    binom_int, check_denominator_type, rat, rat_int, DenominatorCheck, ExactSeries, Rational, Series,
};

/// A 2-adic number `2^valuation * unit` known modulo
/// `2^(valuation + precision)`. A zero `precision` means the value is only
/// known to vanish modulo `2^valuation`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicApprox {
    unit: BigInt,
    valuation: i64,
    precision: u32,
}

fn v2_int(n: &BigInt) -> i64 {
    n.trailing_zeros().map(|z| z as i64).unwrap_or(i64::MAX)
}

pub fn v2(r: &Rational) -> Option<i64> {
    if r.is_zero() {
        None
    } else {
        Some(v2_int(r.numer()) - v2_int(r.denom()))
    }
}

/// Inverse of an odd integer modulo `2^bits` by Newton iteration.
fn inverse_mod_pow2(a: &BigInt, bits: u32) -> BigInt {
    let modulus = BigInt::one() << bits;
    let a = a.mod_floor(&modulus);
    let mut x = BigInt::one();
    let mut good = 1u32;
    while good < bits {
        good *= 2;
        x = (&x * (BigInt::from(2) - &a * &x)).mod_floor(&modulus);
    }
    x.mod_floor(&modulus)
}

impl PadicApprox {
    pub fn zero_mod(abs_precision: i64) -> Self {
        PadicApprox { unit: BigInt::zero(), valuation: abs_precision, precision: 0 }
    }

    /// Reduce a rational to absolute precision `abs_precision`.
    pub fn from_rational(r: &Rational, abs_precision: i64) -> Self {
        let v = match v2(r) {
            Some(v) if v < abs_precision => v,
            _ => return Self::zero_mod(abs_precision),
        };
        let t = (abs_precision - v) as u32;
        let num = r.numer() >> v2_int(r.numer()) as usize;
        let den = r.denom() >> v2_int(r.denom()) as usize;
        let modulus = BigInt::one() << t;
        let unit = (num * inverse_mod_pow2(&den, t)).mod_floor(&modulus);
        PadicApprox { unit, valuation: v, precision: t }
    }

    pub fn is_zero(&self) -> bool {
        self.precision == 0
    }

    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.valuation)
        }
    }

    /// Lower bound for the valuation; exact unless zero at precision.
    pub fn valuation_lower_bound(&self) -> i64 {
        self.valuation
    }

    pub fn relative_precision(&self) -> u32 {
        self.precision
    }

    pub fn absolute_precision(&self) -> i64 {
        self.valuation + self.precision as i64
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    pub fn representative(&self) -> Rational {
        if self.is_zero() {
            return Rational::zero();
        }
        let u = Rational::from_integer(self.unit.clone());
        if self.valuation >= 0 {
            u * Rational::from_integer(BigInt::one() << self.valuation as usize)
        } else {
            u / Rational::from_integer(BigInt::one() << (-self.valuation) as usize)
        }
    }

    pub fn with_absolute_precision(&self, abs: i64) -> Self {
        Self::from_rational(&self.representative(), abs.min(self.absolute_precision()))
    }

    pub fn add(&self, o: &Self) -> Self {
        let abs = self.absolute_precision().min(o.absolute_precision());
        Self::from_rational(&(self.representative() + o.representative()), abs)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let abs = self.absolute_precision().min(o.absolute_precision());
        Self::from_rational(&(self.representative() - o.representative()), abs)
    }

    pub fn neg(&self) -> Self {
        Self::from_rational(&-self.representative(), self.absolute_precision())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let abs = (self.valuation + o.absolute_precision()).min(o.valuation + self.absolute_precision());
        Self::from_rational(&(self.representative() * o.representative()), abs)
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::DivisionByZero("2-adic divisor is zero at working precision".into()));
        }
        let inv_abs = -o.valuation + o.precision as i64;
        let inv = Self::from_rational(&(Rational::one() / o.representative()), inv_abs);
        Ok(self.mul(&inv))
    }

    /// `v_2(self - o)`, capped at the common absolute precision.
    pub fn agreement(&self, o: &Self) -> i64 {
        let cap = self.absolute_precision().min(o.absolute_precision());
        match v2(&(self.representative() - o.representative())) {
            Some(v) => v.min(cap),
            None => cap,
        }
    }

    /// Binary digits of the unit, most significant first.
    pub fn digit_string(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let s = self.unit.to_str_radix(2);
        format!("{}{}", "0".repeat(self.precision as usize - s.len()), s)
    }
}

impl fmt::Display for PadicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "O(2^{})", self.valuation)
        } else {
            write!(f, "2^{} * ...{} + O(2^{})", self.valuation, self.digit_string(), self.absolute_precision())
        }
    }
}

/// `x(q) = q prod (1 + q^n)^24`, truncated at `order`.
pub fn hauptmodul(order: usize) -> Result<ExactSeries> {
    if order < 5 {
        return Err(Error::Precondition("hauptmodul: order must be at least 5".into()));
    }
    let mut prod = Series::one(order);
    for n in 1..order {
        let factor = Series::from_fn(order, |k| {
            if k % n == 0 && k / n <= 24 {
                Rational::from_integer(binom_int(24, (k / n) as u64))
            } else {
                Rational::zero()
            }
        });
        prod = prod.mul(&factor);
    }
    Ok(prod.shift_up(1))
}

/// Compositional inverse `q(x)` of the Hauptmodul.
pub fn q_of_x(order: usize) -> Result<ExactSeries> {
    hauptmodul(order)?.reversion()
}

#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion {
    pub weight: i64,
    pub series: ExactSeries,
}

/// Sum of `d^e` over odd divisors `d` of `n`.
fn odd_divisor_power_sum(n: usize, e: i64) -> Rational {
    let mut s = Rational::zero();
    for d in (1..=n).step_by(2) {
        if n % d == 0 {
            s += if e >= 0 {
                Rational::from_integer(BigInt::from(d).pow(e as u32))
            } else {
                Rational::new(BigInt::one(), BigInt::from(d).pow((-e) as u32))
            };
        }
    }
    s
}

/// `E*_{2k} = constant + sum_n (sum_{d | n, d odd} d^{2k-1}) q^n`.
pub fn eisenstein_star(k: i64, order: usize, constant: Rational) -> Result<QExpansion> {
    if k == 0 {
        return Err(Error::Precondition("eisenstein_star: weight must be nonzero".into()));
    }
    let mut series = Series::from_fn(order, |n| if n == 0 { Rational::zero() } else { odd_divisor_power_sum(n, 2 * k - 1) });
    if order > 0 {
        let mut c = series.into_coeffs();
        c[0] = constant;
        series = Series::new(c);
    }
    Ok(QExpansion { weight: 2 * k, series })
}

/// The rational constant `zeta*(1 - 2k)/2` of `E*_{2k}` for `k > 0`.
pub fn eisenstein_constant(k: i64) -> Result<Rational> {
    if k <= 0 {
        return Err(Error::Precondition("eisenstein_constant: k must be positive".into()));
    }
    Ok(zeta_star_negative(2 * k as usize) / rat_int(2))
}

/// Bernoulli numbers `B_0..=B_n` by the Akiyama–Tanigawa algorithm
/// (`B_1 = +1/2`).
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut a: Vec<Rational> = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(rat(1, m as i64 + 1));
        for j in (1..=m).rev() {
            a[j - 1] = rat_int(j as i64) * (&a[j - 1] - &a[j]);
        }
        out.push(a[0].clone());
    }
    out
}

/// `zeta*(1 - n) = -(1 - 2^{n-1}) B_n / n` for even `n >= 2`.
pub fn zeta_star_negative(n: usize) -> Rational {
    let b = bernoulli_numbers(n).pop().unwrap_or_else(Rational::zero);
    let factor = Rational::one() - Rational::from_integer(BigInt::one() << (n - 1));
    -(factor * b) / rat_int(n as i64)
}

/// `(1 - 2^{n-1}) B_n` as the Riemann sum `2^{-N} sum_{a odd < 2^N} a^n`.
///
/// For even `n >= 4` the sum is accurate to about `2N - 3` bits; the
/// arithmetic is done modulo `2^128`.
pub fn deprived_bernoulli_riemann(n: u64, big_n: u32) -> PadicApprox {
    assert!(big_n >= 2 && big_n <= 60, "N out of range");
    let count: usize = 1usize << (big_n - 1);
    let sum = (0..count)
        .into_par_iter()
        .with_min_len(1 << 12)
        .map(|i| pow_u128(2 * i as u128 + 1, n))
        .reduce(|| 0u128, |a, b| a.wrapping_add(b));
    let value = Rational::new(BigInt::from(sum), BigInt::one() << big_n as usize);
    let abs = (2 * big_n as i64 - 4).min(128 - big_n as i64);
    PadicApprox::from_rational(&value, abs)
}

fn pow_u128(mut base: u128, mut e: u64) -> u128 {
    let mut acc: u128 = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.wrapping_mul(base);
        }
        base = base.wrapping_mul(base);
        e >>= 1;
    }
    acc
}

/// `zeta*(1 - n)` 2-adically to absolute precision `bits` via the Riemann sum,
/// confirmed by a second sum one level finer.
pub fn zeta_star_negative_padic(n: u64, bits: i64) -> Result<PadicApprox> {
    let vn = (n.trailing_zeros()) as i64;
    let need = bits + vn + 4;
    let big_n = (((need + 4) / 2) as u32).max(3);
    if big_n > 60 {
        return Err(Error::InsufficientPrecision { have: 2 * 60 - 4, need });
    }
    let a = deprived_bernoulli_riemann(n, big_n);
    let b = deprived_bernoulli_riemann(n, big_n + 1);
    let agree = a.agreement(&b);
    if agree < a.absolute_precision() {
        return Err(Error::InsufficientPrecision { have: agree, need: a.absolute_precision() });
    }
    let nn = PadicApprox::from_rational(&Rational::from_integer(BigInt::from(n)), 200);
    Ok(a.div(&nn)?.neg().with_absolute_precision(bits))
}

/// `zeta*(1 + 2m)` with `m = k - 2^t`, requires `2^t > k`.
pub fn route_a_approximant(k: i64, t: u32, bits: i64) -> Result<PadicApprox> {
    let m = k - (1i64 << t);
    if m >= 0 {
        return Err(Error::Precondition("route A approximant needs 2^t > k".into()));
    }
    zeta_star_negative_padic((-2 * m) as u64, bits)
}

/// Route A: `zeta_2(1 + 2k) = lim zeta*(1 + 2m)` over `m = k - 2^t < 0`.
pub fn zeta2_route_a(k: i64, bits: i64) -> Result<PadicApprox> {
    if k <= 0 {
        return Err(Error::Precondition("route A needs k > 0".into()));
    }
    let mut t = 2u32;
    while (1i64 << t) <= k {
        t += 1;
    }
    let eval = |t: u32| route_a_approximant(k, t, bits + 8);
    let mut prev = eval(t)?;
    loop {
        t += 1;
        if t > 58 {
            return Err(Error::InsufficientPrecision { have: prev.agreement(&eval(t - 1)?), need: bits });
        }
        let next = eval(t)?;
        // Kummer: one new bit per doubling step; demand a margin before accepting.
        if next.agreement(&prev) >= bits + 4 && t as i64 >= bits {
            return Ok(next.with_absolute_precision(bits));
        }
        prev = next;
    }
}

#[derive(Clone, Debug)]
pub struct RouteBReport {
    /// Candidates `-f_n/e_n` for `c = zeta_2(1+2k)/2`, indexed by `n`.
    pub candidates: Vec<(usize, Rational)>,
    /// Bits on which consecutive candidates agree.
    pub precisions: Vec<i64>,
}

/// `E*_{2k}(x)` and `E'_{-2k}(x)` in the Hauptmodul coordinate.
pub fn eisenstein_pair_in_x(k: i64, order: usize) -> Result<(ExactSeries, ExactSeries)> {
    let q = q_of_x(order.max(5))?.truncate(order);
    let e_pos = eisenstein_star(k, order, eisenstein_constant(k)?)?.series;
    let e_neg = eisenstein_star(-k, order, Rational::zero())?.series;
    Ok((e_pos.compose(&q)?, e_neg.compose(&q)?))
}

/// Route B: candidates for `c` from `h_n = c e_n + f_n` with
/// `H = E*_{2k} (c + E'_{-2k})` overconvergent.
pub fn zeta2_route_b_candidates(k: i64, order: usize) -> Result<RouteBReport> {
    let (e, ep) = eisenstein_pair_in_x(k, order)?;
    let f = e.mul(&ep);
    let mut candidates = Vec::new();
    for n in 1..order {
        if e.coeff(n).is_zero() {
            continue;
        }
        candidates.push((n, -(f.coeff(n) / e.coeff(n))));
    }
    let precisions = candidates
        .windows(2)
        .map(|w| v2(&(&w[1].1 - &w[0].1)).unwrap_or(i64::MAX))
        .collect();
    Ok(RouteBReport { candidates, precisions })
}

/// Route B to `bits` of absolute precision for `zeta_2(1 + 2k)`.
pub fn zeta2_route_b(k: i64, bits: i64) -> Result<PadicApprox> {
    let mut order = (bits.max(0) as usize) / 10 + 4;
    loop {
        let rep = zeta2_route_b_candidates(k, order)?;
        if let (Some(&p), Some((_, c))) = (rep.precisions.last(), rep.candidates.last()) {
            // value is 2c; precision of c is the agreement of the last two candidates
            if p - 1 >= bits + 1 {
                return Ok(PadicApprox::from_rational(&(c * rat_int(2)), bits));
            }
        }
        order += 2;
        if order > 400 {
            return Err(Error::InsufficientPrecision { have: 0, need: bits });
        }
    }
}

/// `zeta_2(1 + 2k)` modulo `2^bits` (absolute). Exact for `k < 0`; for
/// `k > 0` route B is returned after checking route A on the low bits.
pub fn zeta2(k: i64, bits: i64) -> Result<PadicApprox> {
    if k == 0 {
        return Err(Error::Precondition("zeta2: k must be nonzero".into()));
    }
    if k < 0 {
        return Ok(PadicApprox::from_rational(&zeta2_exact_negative(k)?, bits));
    }
    let b = zeta2_route_b(k, bits)?;
    let check_bits = bits.min(ROUTE_A_BITS);
    let a = zeta2_route_a(k, check_bits)?;
    let agree = a.agreement(&b);
    if agree < check_bits {
        return Err(Error::RouteDisagreement { agree, required: check_bits });
    }
    Ok(b)
}

/// Bits of route A cross-checked on every positive-`k` evaluation.
pub const ROUTE_A_BITS: i64 = 16;

/// `zeta*(1 + 2k)` for `k < 0`.
pub fn zeta2_exact_negative(k: i64) -> Result<Rational> {
    if k >= 0 {
        return Err(Error::Precondition("exact value needs k < 0".into()));
    }
    Ok(zeta_star_negative((-2 * k) as usize))
}

#[derive(Clone, Debug)]
pub struct HSeriesReport {
    pub e_star: ExactSeries,
    pub e_prime: ExactSeries,
    /// First non-integral coefficient of `E*_{2k}(x)` past the constant.
    pub integrality_failure: Option<usize>,
    /// `E'_{-2k}` against `[1, ..., (2k+1) n]`.
    pub type_single: DenominatorCheck,
    /// `E'_{-2k}` against `[1, ..., n]^{2k+1}`.
    pub type_power: DenominatorCheck,
    /// Smallest `v_2(coeff_n) + 12 n` over both series; nonnegative when the
    /// growth is consistent with radius `2^12`.
    pub growth_margin: i64,
    /// `v_2(h_n)` for `H = E*_{2k} (c + E'_{-2k})` with the route B constant.
    pub h_valuations: Vec<Option<i64>>,
}

pub fn h_series_and_types(k: i64, order: usize) -> Result<HSeriesReport> {
    if k <= 0 || order < 10 {
        return Err(Error::Precondition("h_series_and_types: k > 0 and order >= 10".into()));
    }
    let (e, ep) = eisenstein_pair_in_x(k, order)?;
    let integrality_failure = (1..order).find(|&n| !e.coeff(n).is_integer());
    let width = (2 * k + 1) as usize;
    let type_single = check_denominator_type(&ep, &[rat_int(width as i64)], 0, order - 1)?;
    let type_power = check_denominator_type(&ep, &vec![Rational::one(); width], 0, order - 1)?;
    let growth_margin = (1..order)
        .flat_map(|n| [v2(e.coeff(n)), v2(ep.coeff(n))].into_iter().flatten().map(move |v| v + 12 * n as i64))
        .min()
        .unwrap_or(i64::MAX);
    let c = zeta2_route_b_candidates(k, order)?
        .candidates
        .pop()
        .map(|(_, c)| c)
        .ok_or_else(|| Error::InsufficientPrecision { have: 0, need: 1 })?;
    let f = e.mul(&ep);
    let h_valuations = (0..order).map(|n| v2(&(&c * e.coeff(n) + f.coeff(n)))).collect();
    Ok(HSeriesReport { e_star: e, e_prime: ep, integrality_failure, type_single, type_power, growth_margin, h_valuations })
}

/// `v_2(z - p/q)`, capped at the precision of `z`.
pub fn distance_valuation(z: &PadicApprox, p: i64, q: i64) -> i64 {
    let r = PadicApprox::from_rational(&Rational::new(BigInt::from(p), BigInt::from(q)), z.absolute_precision());
    z.agreement(&r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanException {
    pub p: i64,
    pub q: i64,
    pub distance_valuation: i64,
    pub threshold_bits: f64,
}

/// Coprime `(p, q)`, `q > 0`, `max(|p|, q) <= max_height`, with
/// `|zeta_2(5) - p/q|_2 <= max(|p|, q)^{-20}`.
pub fn zeta5_inequality_scan(max_height: u64) -> Result<Vec<ScanException>> {
    if max_height == 0 || max_height > 1000 {
        return Err(Error::Precondition("zeta5_inequality_scan: 1 <= max_height <= 1000".into()));
    }
    let bits = (20.0 * (max_height as f64).log2()).ceil() as i64 + 8;
    let z = zeta2(2, bits)?;
    let found = scan_with(&z, max_height);
    let z2 = zeta2(2, 2 * bits)?;
    let confirmed = scan_with(&z2, max_height);
    if found != confirmed {
        return Err(Error::InsufficientPrecision { have: bits, need: 2 * bits });
    }
    Ok(found)
}

fn scan_with(z: &PadicApprox, h: u64) -> Vec<ScanException> {
    let h = h as i64;
    let mut out: Vec<ScanException> = (1..=h)
        .into_par_iter()
        .flat_map_iter(|q| {
            let z = z.clone();
            (-h..=h).filter_map(move |p| {
                if p.gcd(&q) != 1 {
                    return None;
                }
                let height = p.abs().max(q) as f64;
                let threshold = 20.0 * height.log2();
                let d = distance_valuation(&z, p, q);
                // |z - p/q|_2 = 2^{-d} <= height^{-20}
                if d as f64 >= threshold {
                    Some(ScanException { p, q, distance_valuation: d, threshold_bits: threshold })
                } else {
                    None
                }
            })
        })
        .collect();
    out.sort_by_key(|e| (e.q, e.p));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padic_roundtrip_and_ops() {
        let a = PadicApprox::from_rational(&rat(5, 3), 20);
        assert_eq!(a.valuation(), Some(0));
        assert_eq!(a.absolute_precision(), 20);
        let three = PadicApprox::from_rational(&rat_int(3), 20);
        let five = a.mul(&three);
        assert_eq!(five.agreement(&PadicApprox::from_rational(&rat_int(5), 40)), 20);
        let b = PadicApprox::from_rational(&rat(7, 8), 10);
        assert_eq!(b.valuation(), Some(-3));
        assert_eq!(b.relative_precision(), 13);
        let z = PadicApprox::from_rational(&rat_int(1024), 10);
        assert!(z.is_zero());
        assert!(a.div(&z).is_err());
        let q = a.div(&b).unwrap();
        assert_eq!(q.agreement(&PadicApprox::from_rational(&rat(40, 21), 100)), q.absolute_precision());
    }

    #[test]
    fn hauptmodul_and_inverse() {
        let x = hauptmodul(10).unwrap();
        assert_eq!(&x.coeffs()[..4], &[rat_int(0), rat_int(1), rat_int(24), rat_int(300)]);
        let q = q_of_x(10).unwrap();
        assert_eq!(&q.coeffs()[..5], &[rat_int(0), rat_int(1), rat_int(-24), rat_int(852), rat_int(-35744)]);
        assert_eq!(x.compose(&q).unwrap(), Series::variable(10));
    }

    #[test]
    fn hauptmodul_product_oracle() {
        // brute-force product of (1 + q^n)^24 by repeated multiplication by (1 + q^n)
        let order = 12;
        let mut c = vec![BigInt::zero(); order];
        c[1] = BigInt::one();
        for n in 1..order {
            for _ in 0..24 {
                for i in (n..order).rev() {
                    let add = c[i - n].clone();
                    c[i] += add;
                }
            }
        }
        let x = hauptmodul(order).unwrap();
        for i in 0..order {
            assert_eq!(x.coeff(i), &Rational::from_integer(c[i].clone()));
        }
    }

    #[test]
    fn eisenstein_examples() {
        let c = eisenstein_constant(2).unwrap();
        assert_eq!(c, rat(-7, 240));
        let e4 = eisenstein_star(2, 6, c).unwrap();
        assert_eq!(e4.series.coeff(1), &rat_int(1));
        assert_eq!(e4.series.coeff(3), &rat_int(28));
        assert_eq!(e4.series.coeff(2), &rat_int(1));
        assert_eq!(e4.weight, 4);
        let e = eisenstein_star(-2, 4, Rational::zero()).unwrap();
        assert_eq!(e.series.coeff(3), &(rat_int(1) + rat(1, 243)));
    }

    #[test]
    fn negative_zeta_values() {
        assert_eq!(zeta2_exact_negative(-1).unwrap(), rat(1, 12));
        assert_eq!(zeta2_exact_negative(-2).unwrap(), rat(-7, 120));
        let b = bernoulli_numbers(10);
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[10], rat(5, 66));
    }

    #[test]
    fn riemann_sum_matches_exact_bernoulli() {
        let b = bernoulli_numbers(120);
        for n in (4..=120).step_by(2) {
            let exact = (Rational::one() - Rational::from_integer(BigInt::one() << (n - 1))) * &b[n];
            for big_n in [8u32, 12, 20] {
                let approx = deprived_bernoulli_riemann(n as u64, big_n);
                let want = PadicApprox::from_rational(&exact, approx.absolute_precision());
                assert_eq!(approx.agreement(&want), approx.absolute_precision(), "n = {n}, N = {big_n}");
            }
        }
    }

    #[test]
    fn embedding_reproduces_q_expansion() {
        let order = 30;
        let (e, _) = eisenstein_pair_in_x(2, order).unwrap();
        let x = hauptmodul(order).unwrap();
        let back = e.compose(&x).unwrap();
        let direct = eisenstein_star(2, order, eisenstein_constant(2).unwrap()).unwrap().series;
        assert_eq!(back, direct);
    }

    #[test]
    fn e2_integrality() {
        let (e, _) = eisenstein_pair_in_x(1, 51).unwrap();
        assert!((1..51).all(|n| e.coeff(n).is_integer()));
    }

    #[test]
    fn routes_agree_for_zeta5() {
        let a = zeta2_route_a(2, 16).unwrap();
        let b = zeta2_route_b(2, 40).unwrap();
        assert!(a.agreement(&b) >= 16);
        assert_eq!(b.valuation(), Some(-3));
        assert_eq!(zeta2(-1, 10).unwrap(), PadicApprox::from_rational(&rat(1, 12), 10));
    }

    #[test]
    fn h_series_report_k2() {
        let h = h_series_and_types(2, 41).unwrap();
        assert_eq!(h.integrality_failure, None);
        assert!(h.type_power.ok);
        assert!(!h.type_single.ok);
        assert!(h.growth_margin >= 0);
        // constant of H is c * E*_4(0)
        let c = zeta2_route_b_candidates(2, 41).unwrap().candidates.pop().unwrap().1;
        assert_eq!(h.e_star.coeff(0), &rat(-7, 240));
        assert_eq!(h.h_valuations[0], v2(&(c * rat(-7, 240))));
        assert!(h.h_valuations[15].unwrap() > 100);
    }

    #[test]
    fn distance_of_exact_truncation() {
        let z = zeta2(2, 40).unwrap();
        let r = z.with_absolute_precision(8).representative();
        let (p, q) = (r.numer().clone(), r.denom().clone());
        let d = distance_valuation(&z, p.try_into().unwrap(), q.try_into().unwrap());
        assert!(d >= 8);
        let one = distance_valuation(&z, 1, 1);
        assert!(one < 40);
    }
}
