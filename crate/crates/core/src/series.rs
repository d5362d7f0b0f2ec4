//! Truncated power series over an arbitrary coefficient ring, exact lcm
//! tables and denominator types.
//!
//! A [`Series`] always carries its truncation order: `coeffs.len()` is the
//! exclusive upper power, and binary operations truncate to the smaller of
//! the two orders. Nothing is ever promoted silently.

use std::fmt;
use std::ops::Neg;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms.
pub type Rational = BigRational;

/// Coefficient ring usable in a [`Series`].
pub trait Coefficient: Clone + Num + Neg<Output = Self> + FromPrimitive + fmt::Debug {}
impl<T: Clone + Num + Neg<Output = T> + FromPrimitive + fmt::Debug> Coefficient for T {}

#[derive(Clone, PartialEq, Debug)]
pub struct Series<T> {
    coeffs: Vec<T>,
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

impl<T: Coefficient> Series<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Series { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Series { coeffs: vec![T::zero(); order] }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(T::one(), order)
    }

    pub fn constant(c: T, order: usize) -> Self {
        let mut s = Self::zero(order);
        if order > 0 {
            s.coeffs[0] = c;
        }
        s
    }

    /// The series `z`.
    pub fn variable(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order > 1 {
            s.coeffs[1] = T::one();
        }
        s
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize) -> T) -> Self {
        Series { coeffs: (0..order).map(f).collect() }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, n: usize) -> &T {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "truncate cannot raise the order");
        Series { coeffs: self.coeffs[..order].to_vec() }
    }

    /// Index of the first nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    pub fn map<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> Series<U> {
        Series { coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::from_fn(n, |i| self.coeffs[i].clone() + other.coeffs[i].clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::from_fn(n, |i| self.coeffs[i].clone() - other.coeffs[i].clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|a| a.clone() * c.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = vec![T::zero(); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Series { coeffs: out }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::one(self.order());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiply by `z^k`, keeping the order.
    pub fn shift_up(&self, k: usize) -> Self {
        Self::from_fn(self.order(), |i| if i >= k { self.coeffs[i - k].clone() } else { T::zero() })
    }

    /// Derivative; the order drops by one.
    pub fn differentiate(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self::from_fn(self.order() - 1, |i| self.coeffs[i + 1].clone() * from_usize::<T>(i + 1))
    }

    /// Antiderivative with the given constant; the order rises by one.
    pub fn integrate(&self, constant: T) -> Self {
        let mut coeffs = Vec::with_capacity(self.order() + 1);
        coeffs.push(constant);
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.clone() / from_usize::<T>(i + 1));
        }
        Series { coeffs }
    }

    /// `self(inner(z))` by Horner's scheme. Requires `inner(0) = 0`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if inner.order() > 0 && !inner.coeffs[0].is_zero() {
            return Err(Error::Precondition("compose: inner series has a nonzero constant term".into()));
        }
        let n = self.order().min(inner.order());
        let mut acc = Self::zero(n);
        for c in self.coeffs[..n].iter().rev() {
            acc = acc.mul(inner);
            acc.coeffs[0] = acc.coeffs[0].clone() + c.clone();
        }
        Ok(acc)
    }

    /// Multiplicative inverse. Requires a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        if self.order() == 0 || self.coeffs[0].is_zero() {
            return Err(Error::Precondition("reciprocal: series has zero constant term".into()));
        }
        let n = self.order();
        let a0 = self.coeffs[0].clone();
        let mut out: Vec<T> = Vec::with_capacity(n);
        out.push(T::one() / a0.clone());
        for k in 1..n {
            let mut s = T::zero();
            for j in 1..=k {
                s = s + self.coeffs[j].clone() * out[k - j].clone();
            }
            out.push(-s / a0.clone());
        }
        Ok(Series { coeffs: out })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.reciprocal()?))
    }

    /// Compositional inverse by Lagrange inversion:
    /// `[z^n] g = (1/n) [w^{n-1}] (w / f(w))^n`.
    pub fn reversion(&self) -> Result<Self> {
        let n = self.order();
        if n < 2 || !self.coeffs[0].is_zero() || self.coeffs[1].is_zero() {
            return Err(Error::Precondition(
                "reversion: series needs zero constant term and nonzero linear term".into(),
            ));
        }
        // f(w)/w, order n-1
        let quotient = Series { coeffs: self.coeffs[1..].to_vec() };
        let base = quotient.reciprocal()?;
        let mut out = vec![T::zero(); n];
        let mut power = Series::one(n - 1);
        for k in 1..n {
            power = power.mul(&base);
            out[k] = power.coeffs[k - 1].clone() / from_usize::<T>(k);
        }
        Ok(Series { coeffs: out })
    }

    /// Formal `(1 + u)^e` for `u(0) = 0` and a coefficient-ring exponent.
    pub fn binomial_power(&self, e: &T) -> Result<Self> {
        if self.order() > 0 && !self.coeffs[0].is_zero() {
            return Err(Error::Precondition("binomial_power: u(0) must vanish".into()));
        }
        let n = self.order();
        // (1+u) g' = e u' g, solved coefficientwise.
        let du = self.differentiate();
        let mut g = vec![T::zero(); n];
        if n == 0 {
            return Ok(Series { coeffs: g });
        }
        g[0] = T::one();
        for k in 0..n - 1 {
            let mut s = T::zero();
            for j in 0..=k {
                let uj1 = du.coeffs[j].clone();
                s = s + e.clone() * uj1 * g[k - j].clone();
            }
            for j in 1..=k {
                s = s - self.coeffs[j].clone() * g[k + 1 - j].clone() * from_usize::<T>(k + 1 - j);
            }
            g[k + 1] = s / from_usize::<T>(k + 1);
        }
        Ok(Series { coeffs: g })
    }

    /// `log(1 + u)` for `u(0) = 0`, by integrating `u'/(1+u)`.
    pub fn log1p(&self) -> Result<Self> {
        if self.order() == 0 {
            return Ok(Self::zero(0));
        }
        if !self.coeffs[0].is_zero() {
            return Err(Error::Precondition("log1p: u(0) must vanish".into()));
        }
        let one_plus = {
            let mut s = self.clone();
            s.coeffs[0] = T::one();
            s
        };
        let d = self.differentiate().div(&one_plus.truncate(self.order() - 1))?;
        Ok(d.integrate(T::zero()))
    }
}

fn from_usize<T: FromPrimitive>(n: usize) -> T {
    T::from_usize(n).expect("index representable in coefficient ring")
}

pub type ExactSeries = Series<Rational>;

impl ExactSeries {
    pub fn to_f64(&self) -> Series<f64> {
        self.map(rational_to_f64)
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // scale down huge operands before dividing
            let nb = r.numer().bits() as i64;
            let db = r.denom().bits() as i64;
            let shift_n = (nb - 900).max(0) as usize;
            let shift_d = (db - 900).max(0) as usize;
            let n = (r.numer() >> shift_n).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift_d).to_f64().unwrap_or(f64::NAN);
            n / d * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
        }
    }
}

static LCM_TABLE: OnceLock<Mutex<Vec<BigInt>>> = OnceLock::new();

/// `lcm(1, ..., n)`, memoized. Returns 1 for `n <= 1`.
pub fn lcm_upto(n: usize) -> BigInt {
    let table = LCM_TABLE.get_or_init(|| Mutex::new(vec![BigInt::one(), BigInt::one()]));
    let mut t = table.lock().unwrap_or_else(|e| e.into_inner());
    while t.len() <= n {
        let k = t.len();
        let next = t[k - 1].lcm(&BigInt::from(k));
        t.push(next);
    }
    t[n].clone()
}

/// The array `b` of a denominator type with its staircase indices.
///
/// Each column reads `0 = b_1 = ... = b_u < b_{u+1} = ... = b_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenominatorType {
    rows: Vec<Vec<Rational>>,
    u: Vec<usize>,
    column_values: Vec<Rational>,
    e: Option<Vec<u32>>,
}

impl DenominatorType {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Shape { column: 0, reason: "no rows".into() });
        }
        let r = rows[0].len();
        if rows.iter().any(|row| row.len() != r) {
            return Err(Error::Shape { column: 0, reason: "ragged rows".into() });
        }
        let mut u = Vec::with_capacity(r);
        let mut column_values = Vec::with_capacity(r);
        for j in 0..r {
            let col: Vec<&Rational> = rows.iter().map(|row| &row[j]).collect();
            if col.iter().any(|b| b.is_negative()) {
                return Err(Error::Shape { column: j, reason: "negative entry".into() });
            }
            let uj = col.iter().take_while(|b| b.is_zero()).count();
            let value = if uj < m { col[uj].clone() } else { Rational::zero() };
            if col[uj..].iter().any(|b| **b != value) {
                return Err(Error::Shape { column: j, reason: "nonzero entries not constant".into() });
            }
            u.push(uj);
            column_values.push(value);
        }
        Ok(DenominatorType { rows, u, column_values, e: None })
    }

    /// Build from per-column `(u_j, b_j)` pairs on `m` rows.
    pub fn from_columns(m: usize, columns: &[(usize, Rational)]) -> Result<Self> {
        let rows = (0..m)
            .map(|i| columns.iter().map(|(u, b)| if i < *u { Rational::zero() } else { b.clone() }).collect())
            .collect();
        Self::new(rows)
    }

    pub fn with_integration_exponents(mut self, e: Vec<u32>) -> Result<Self> {
        if e.len() != self.m() {
            return Err(Error::Shape { column: 0, reason: "e has wrong length".into() });
        }
        self.e = Some(e);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn r(&self) -> usize {
        self.u.len()
    }

    pub fn u_indices(&self) -> &[usize] {
        &self.u
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn integration_exponents(&self) -> Option<&[u32]> {
        self.e.as_deref()
    }

    fn row_sum(&self, i: usize) -> Rational {
        self.rows[i].iter().fold(Rational::zero(), |a, b| a + b)
    }

    /// `(1/m^2) sum (2i-1) sigma_i`.
    pub fn tau_row_form(&self) -> Rational {
        let m = self.m();
        let s = (0..m).fold(Rational::zero(), |acc, i| acc + rat_int(2 * i as i64 + 1) * self.row_sum(i));
        s / rat_int((m * m) as i64)
    }

    /// `sigma_m - (1/m^2) sum u_j^2 b_j`.
    pub fn tau_closed_form(&self) -> Rational {
        let m = self.m();
        let s = self
            .u
            .iter()
            .zip(&self.column_values)
            .fold(Rational::zero(), |acc, (u, b)| acc + rat_int((u * u) as i64) * b);
        self.row_sum(m - 1) - s / rat_int((m * m) as i64)
    }

    pub fn tau(&self) -> Rational {
        let closed = self.tau_closed_form();
        debug_assert_eq!(closed, self.tau_row_form());
        closed
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenominatorCheck {
    pub ok: bool,
    pub first_failure: Option<usize>,
}

/// Whether `a_n n^e prod_j [1, ..., floor(b_j n)]` is integral for `1 <= n <= upto`.
pub fn check_denominator_type(f: &ExactSeries, b_row: &[Rational], e: u32, upto: usize) -> Result<DenominatorCheck> {
    if upto >= f.order() {
        return Err(Error::Precondition(format!(
            "check_denominator_type: index {upto} not below truncation order {}",
            f.order()
        )));
    }
    for n in 1..=upto {
        let mut mult = BigInt::from(n).pow(e);
        for b in b_row {
            let k = (b.numer() * BigInt::from(n)).div_floor(b.denom());
            let k: usize = k.try_into().map_err(|_| Error::Precondition("b entry too large".into()))?;
            mult *= lcm_upto(k);
        }
        let scaled = f.coeff(n) * Rational::from_integer(mult);
        if !scaled.is_integer() {
            return Ok(DenominatorCheck { ok: false, first_failure: Some(n) });
        }
    }
    Ok(DenominatorCheck { ok: true, first_failure: None })
}

/// Generalized binomial coefficient `binom(t, j)` for rational `t`.
pub fn binom_rational(t: &Rational, j: usize) -> Rational {
    let mut acc = Rational::one();
    for i in 0..j {
        acc = acc * (t - rat_int(i as i64)) / rat_int(i as i64 + 1);
    }
    acc
}

pub fn binom_int(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `v_p(r)`, `None` for zero.
pub fn valuation_p(r: &Rational, p: u64) -> Option<i64> {
    if r.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let count = |n: &BigInt| {
        let mut n = n.clone();
        let mut v = 0i64;
        while (&n % &p).is_zero() {
            n /= &p;
            v += 1;
        }
        v
    };
    Some(count(r.numer()) - count(r.denom()))
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(v: &[(i64, i64)]) -> ExactSeries {
        Series::new(v.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    #[test]
    fn lcm_values() {
        assert_eq!(lcm_upto(0), BigInt::one());
        assert_eq!(lcm_upto(1), BigInt::one());
        assert_eq!(lcm_upto(5), BigInt::from(60));
        assert_eq!(lcm_upto(10), BigInt::from(2520));
    }

    #[test]
    fn lcm_matches_pairwise_fold() {
        let mut acc = BigInt::one();
        for n in 1..=64usize {
            acc = acc.lcm(&BigInt::from(n));
            assert_eq!(lcm_upto(n), acc);
        }
    }

    #[test]
    fn compose_with_identity() {
        let f = exact(&[(1, 1), (2, 3), (-5, 7), (1, 2), (0, 1)]);
        let id = Series::variable(5);
        assert_eq!(f.compose(&id).unwrap(), f);
    }

    #[test]
    fn compose_rejects_constant_inner() {
        let f = exact(&[(1, 1), (1, 1)]);
        let g = exact(&[(1, 1), (1, 1)]);
        assert!(matches!(f.compose(&g), Err(Error::Precondition(_))));
    }

    #[test]
    fn reversion_of_q_of_x() {
        let q = exact(&[(0, 1), (1, 1), (-24, 1), (852, 1), (-35744, 1)]);
        let inv = q.reversion().unwrap();
        let id = q.compose(&inv).unwrap();
        assert_eq!(id, Series::variable(5));
        assert_eq!(inv.compose(&q).unwrap(), Series::variable(5));
    }

    #[test]
    fn reversion_preconditions() {
        assert!(exact(&[(1, 1), (1, 1)]).reversion().is_err());
        assert!(exact(&[(0, 1), (0, 1), (1, 1)]).reversion().is_err());
        assert!(exact(&[(0, 1), (0, 1)]).reciprocal().is_err());
    }

    #[test]
    fn inverse_square_root_times_square_root() {
        // Binomial oracle: [z^{2n}] (1-4z^2)^{-1/2} = binom(2n, n), (1-4z^2)^{1/2} = -binom(2n,n)/(2n-1).
        let order = 21;
        let a = Series::from_fn(order, |k| {
            if k % 2 == 1 {
                Rational::zero()
            } else {
                Rational::from_integer(binom_int(k as u64, k as u64 / 2))
            }
        });
        let b = Series::from_fn(order, |k| {
            if k % 2 == 1 {
                Rational::zero()
            } else {
                let n = k as i64 / 2;
                -Rational::from_integer(binom_int(2 * n as u64, n as u64)) / rat_int(2 * n - 1)
            }
        });
        assert_eq!(a.mul(&b), Series::one(order));
        let u = Series::from_fn(order, |k| if k == 2 { rat_int(-4) } else { Rational::zero() });
        assert_eq!(u.binomial_power(&rat(-1, 2)).unwrap(), a);
        assert_eq!(u.binomial_power(&rat(1, 2)).unwrap(), b);
    }

    #[test]
    fn log1p_of_geometric() {
        // log(1/(1-z)) = sum z^n/n
        let u = Series::from_fn(10, |k| if k == 0 { Rational::zero() } else { Rational::one() });
        let l = u.log1p().unwrap();
        for n in 1..10 {
            assert_eq!(l.coeff(n), &rat(1, n as i64));
        }
    }

    #[test]
    fn tau_examples() {
        let col = vec![(1usize, rat_int(5))];
        let b = DenominatorType::from_columns(6, &col).unwrap();
        assert_eq!(b.tau(), rat(175, 36));
        assert_eq!(b.tau_row_form(), b.tau_closed_form());

        let zero = DenominatorType::new(vec![vec![Rational::zero(); 3]; 4]).unwrap();
        assert_eq!(zero.tau(), Rational::zero());

        let k = 3;
        let cols: Vec<_> = (1..=k).map(|j| (j, rat(1, j as i64))).collect();
        let pi = DenominatorType::from_columns(k + 1, &cols).unwrap();
        assert_eq!(pi.tau(), rat(35, 24));
        assert_eq!(pi.tau_row_form(), rat(35, 24));
    }

    #[test]
    fn staircase_violation() {
        let rows = vec![vec![rat_int(0)], vec![rat_int(2)], vec![rat_int(3)]];
        assert!(matches!(DenominatorType::new(rows), Err(Error::Shape { column: 0, .. })));
        let rows = vec![vec![rat_int(1)], vec![rat_int(0)]];
        assert!(DenominatorType::new(rows).is_err());
    }

    #[test]
    fn exponential_fails_type_at_four() {
        let mut fact = BigInt::one();
        let f = Series::from_fn(12, |n| {
            if n > 0 {
                fact *= BigInt::from(n);
            }
            Rational::new(BigInt::one(), fact.clone())
        });
        let chk = check_denominator_type(&f, &[rat_int(1)], 0, 10).unwrap();
        assert_eq!(chk, DenominatorCheck { ok: false, first_failure: Some(4) });
    }

    #[test]
    fn integer_series_pass_any_type() {
        let f = Series::from_fn(20, |n| rat_int(n as i64 * 7 - 3));
        for b in [vec![], vec![rat(1, 3)], vec![rat_int(2), rat(5, 2)]] {
            assert!(check_denominator_type(&f, &b, 0, 19).unwrap().ok);
        }
        assert!(check_denominator_type(&f, &[], 0, 20).is_err());
    }

    #[test]
    fn floor_rounding_of_fractional_b() {
        // 1/2 * n = 3 at n = 7; 1/lcm(1..3) = 1/6 passes, 1/12 fails.
        let f = Series::from_fn(8, |n| if n == 7 { rat(1, 6) } else { Rational::zero() });
        assert!(check_denominator_type(&f, &[rat(1, 2)], 0, 7).unwrap().ok);
        let g = Series::from_fn(8, |n| if n == 7 { rat(1, 12) } else { Rational::zero() });
        assert_eq!(check_denominator_type(&g, &[rat(1, 2)], 0, 7).unwrap().first_failure, Some(7));
        let h = Series::from_fn(8, |n| if n == 7 { rat(1, 42) } else { Rational::zero() });
        assert!(check_denominator_type(&h, &[rat(1, 2)], 1, 7).unwrap().ok);
    }

    #[test]
    fn float_series_share_the_code_path() {
        let f: Series<f64> = Series::new(vec![1.0, 1.0, 0.0, 0.0]);
        let g = f.reciprocal().unwrap();
        assert_eq!(g.coeffs(), &[1.0, -1.0, 1.0, -1.0]);
    }
}
