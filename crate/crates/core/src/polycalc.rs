//! Exact univariate polynomials over Q, plus the two transcendental
//! primitives the rest of the crate leans on: integrals of
//! `p(t) * exp(k t)` and real-root isolation on an open interval.
//!
//! Coefficients are stored in ascending degree order and kept normalized,
//! so the zero polynomial has an empty coefficient vector.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("operation is undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("empty interval: lower end must be below upper end")]
    EmptyInterval,
}

/// Shorthand for an exact rational from a numerator and denominator.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Lossy conversion used at the analysis boundary.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// Builds from ascending coefficients, dropping trailing zeros.
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        let mut p = Self { coeffs };
        p.normalize();
        p
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat_int(c)).collect())
    }

    /// `c0 + c1 z`
    pub fn linear(c0: BigRational, c1: BigRational) -> Self {
        Self::new(vec![c0, c1])
    }

    /// The monomial `z`.
    pub fn identity() -> Self {
        Self::linear(BigRational::zero(), BigRational::one())
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `z^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.to_float().eval(t)
    }

    pub fn to_float(&self) -> FloatPoly {
        FloatPoly::new(self.coeffs.iter().map(rat_to_f64).collect())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat_int(i as i64))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(BigRational::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push(c / rat_int(i as i64 + 1));
        }
        Self::new(out)
    }

    pub fn definite_integral(&self, a: &BigRational, b: &BigRational) -> BigRational {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// `p(z + c)`.
    pub fn shift(&self, c: &BigRational) -> Self {
        let lin = Self::linear(c.clone(), BigRational::one());
        let mut acc = Self::zero();
        for coeff in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Self::constant(coeff.clone());
        }
        acc
    }

    /// Euclidean division `self = q * d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self), PolyError> {
        let dd = d.degree().ok_or(PolyError::DivisionByZero)?;
        let lead = d.leading().expect("nonzero divisor").clone();
        let mut rem = self.coeffs.clone();
        let n = self.coeffs.len();
        if n <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![BigRational::zero(); n - dd];
        for i in (0..n - dd).rev() {
            let c = &rem[i + dd] / &lead;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Quotient when `d` divides `self` exactly.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        match self.div_rem(d) {
            Ok((q, r)) if r.is_zero() => Some(q),
            _ => None,
        }
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&(BigRational::one() / l)),
            None => Self::zero(),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("b is nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same distinct roots, all simple.
    pub fn square_free(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.exact_div(&g).expect("gcd divides p").monic()
    }

    /// Largest coefficient-wise absolute difference, as a float.
    pub fn coeff_distance(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|i| rat_to_f64(&(self.coeff(i) - other.coeff(i)).abs()))
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                1 if a.is_one() => write!(f, "t")?,
                1 => write!(f, "{a}*t")?,
                _ if a.is_one() => write!(f, "t^{i}")?,
                _ => write!(f, "{a}*t^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Float image of a [`Polynomial`], used wherever the analysis leaves
/// exact arithmetic.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FloatPoly {
    coeffs: Vec<f64>,
}

impl FloatPoly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    /// Taylor coefficients at `t`: entry `i` is `p^(i)(t) / i!`.
    pub fn taylor_at(&self, t: f64) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let next = c[j + 1];
                c[j] += t * next;
            }
        }
        c
    }

    /// `∫_a^b p(t) e^{k t} dt`.
    ///
    /// Uses the closed form `e^{kt} Σ (-1)^i p^(i)(t) / k^{i+1}` when
    /// `|k|·|b-a| >= 1`; otherwise integrates `p(a+s)` against a truncated
    /// exponential series whose tail is bounded below half an ulp of the
    /// integrand scale.
    pub fn exp_weighted_integral(&self, k: f64, a: f64, b: f64) -> f64 {
        if self.coeffs.is_empty() || a == b {
            return 0.0;
        }
        let h = b - a;
        if (k * h).abs() < SERIES_THRESHOLD {
            self.exp_weighted_series(k, a, h)
        } else {
            self.exp_closed_primitive(k, b) - self.exp_closed_primitive(k, a)
        }
    }

    fn exp_closed_primitive(&self, k: f64, t: f64) -> f64 {
        let taylor = self.taylor_at(t);
        // p^(i)(t) = i! * taylor[i]
        let mut sum = 0.0;
        let mut fact = 1.0;
        let mut kpow = k;
        for (i, c) in taylor.iter().enumerate() {
            if i > 0 {
                fact *= i as f64;
                kpow *= -k;
            }
            sum += c * fact / kpow;
        }
        (k * t).exp() * sum
    }

    fn exp_weighted_series(&self, k: f64, a: f64, h: f64) -> f64 {
        let c = self.taylor_at(a);
        // Tail of the exponential series after order J on [0, |h|].
        let kh = (k * h).abs();
        let mut order = 0usize;
        let mut bound = kh * kh.exp();
        while bound > 0.5 * f64::EPSILON && order < 64 {
            order += 1;
            bound *= kh / (order as f64 + 1.0);
        }
        let mut exp_coeffs = Vec::with_capacity(order + 1);
        let mut e = 1.0;
        for j in 0..=order {
            if j > 0 {
                e *= k / j as f64;
            }
            exp_coeffs.push(e);
        }
        let mut sum = 0.0;
        let mut hp = h;
        for n in 0..(c.len() + order) {
            let q: f64 = (0..=n)
                .filter(|&i| i < c.len() && n - i <= order)
                .map(|i| c[i] * exp_coeffs[n - i])
                .sum();
            sum += q * hp / (n as f64 + 1.0);
            hp *= h;
        }
        (k * a).exp() * sum
    }
}

/// `|k|·|b-a|` below which the series branch is used.
pub const SERIES_THRESHOLD: f64 = 1.0;

/// `∫_a^b p(t) e^{k t} dt` for an exact polynomial.
pub fn exp_weighted_integral(p: &Polynomial, k: f64, a: f64, b: f64) -> f64 {
    p.to_float().exp_weighted_integral(k, a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Simple,
    PossiblyMultiple,
}

/// Closed bracket `[lo, hi]` holding exactly one distinct real root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootBracket {
    pub lo: BigRational,
    pub hi: BigRational,
    pub multiplicity: Multiplicity,
}

impl RootBracket {
    pub fn midpoint(&self) -> f64 {
        rat_to_f64(&((&self.lo + &self.hi) / rat_int(2)))
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, t: &BigRational) -> bool {
        &self.lo <= t && t <= &self.hi
    }
}

pub fn default_root_width() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u64).pow(12))
}

struct Sturm {
    chain: Vec<Polynomial>,
}

impl Sturm {
    fn new(p: &Polynomial) -> Self {
        let mut chain = vec![p.clone(), p.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1]).expect("nonzero");
            if r.is_zero() {
                break;
            }
            chain.push(-&r);
        }
        Self { chain }
    }

    fn variations(&self, t: &BigRational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let v = p.eval(t);
            let s = if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            };
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Distinct roots in `(a, b)`; neither end may be a root.
    fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// Distinct real roots of `p` in the open interval `(a, b)`.
pub fn count_real_roots(p: &Polynomial, a: &BigRational, b: &BigRational) -> Result<usize, PolyError> {
    Ok(isolate_with(p, a, b, None)?.len())
}

/// Isolating brackets of width at most 1e-12 for all real roots in `(a, b)`.
pub fn isolate_real_roots(
    p: &Polynomial,
    a: &BigRational,
    b: &BigRational,
) -> Result<Vec<RootBracket>, PolyError> {
    isolate_with(p, a, b, Some(&default_root_width()))
}

pub fn isolate_real_roots_with_width(
    p: &Polynomial,
    a: &BigRational,
    b: &BigRational,
    width: &BigRational,
) -> Result<Vec<RootBracket>, PolyError> {
    isolate_with(p, a, b, Some(width))
}

fn isolate_with(
    p: &Polynomial,
    a: &BigRational,
    b: &BigRational,
    width: Option<&BigRational>,
) -> Result<Vec<RootBracket>, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if a >= b {
        return Err(PolyError::EmptyInterval);
    }
    let mut q = p.square_free();
    // Roots on the ends are outside the open interval.
    for end in [a, b] {
        let lin = Polynomial::linear(-end.clone(), BigRational::one());
        if q.eval(end).is_zero() {
            q = q.exact_div(&lin).expect("end is a root");
        }
    }
    if q.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let sturm = Sturm::new(&q);
    let two = rat_int(2);
    let mut isolated: Vec<(BigRational, BigRational)> = Vec::new();
    let mut stack = vec![(a.clone(), b.clone(), sturm.count(a, b))];
    while let Some((lo, hi, n)) = stack.pop() {
        match n {
            0 => {}
            1 => isolated.push((lo, hi)),
            _ => {
                let m = split_point(&q, &lo, &hi);
                let left = sturm.count(&lo, &m);
                stack.push((m.clone(), hi, n - left));
                stack.push((lo, m, left));
            }
        }
    }
    isolated.sort();
    let multiple = {
        let g = p.gcd(&p.derivative());
        (g.degree().unwrap_or(0) > 0).then(|| g.square_free())
    };
    let out = isolated
        .into_iter()
        .map(|(mut lo, mut hi)| {
            if let Some(w) = width {
                let mut slo = sign(&q.eval(&lo));
                while &(&hi - &lo) > w {
                    let m = (&lo + &hi) / &two;
                    let sm = sign(&q.eval(&m));
                    if sm == 0 {
                        lo = m.clone();
                        hi = m;
                        break;
                    }
                    if sm == slo {
                        lo = m;
                        slo = sm;
                    } else {
                        hi = m;
                    }
                }
            }
            let multiplicity = match &multiple {
                Some(g) if brackets_root(g, &lo, &hi) => Multiplicity::PossiblyMultiple,
                _ => Multiplicity::Simple,
            };
            RootBracket { lo, hi, multiplicity }
        })
        .collect();
    Ok(out)
}

fn sign(v: &BigRational) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// Interior point of `(lo, hi)` that is not a root of `q`.
fn split_point(q: &Polynomial, lo: &BigRational, hi: &BigRational) -> BigRational {
    let width = hi - lo;
    for den in 2i64.. {
        for num in 1..den {
            let m = lo + &width * rat(num, den);
            if !q.eval(&m).is_zero() {
                return m;
            }
        }
    }
    unreachable!("a nonzero polynomial has finitely many roots")
}

fn brackets_root(g: &Polynomial, lo: &BigRational, hi: &BigRational) -> bool {
    if g.eval(lo).is_zero() || g.eval(hi).is_zero() {
        return true;
    }
    lo < hi && Sturm::new(g).count(lo, hi) > 0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_eval(p: &Polynomial, t: &BigRational) -> BigRational {
        p.coeffs()
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (i, c)| {
                let mut pw = BigRational::one();
                for _ in 0..i {
                    pw *= t;
                }
                acc + c * pw
            })
    }

    #[test]
    fn eval_examples() {
        let half = Polynomial::linear(rat_int(1), rat(1, 2));
        assert_eq!(half.pow(2).eval(&rat_int(1)), rat(9, 4));
        assert_eq!(Polynomial::zero().eval(&rat(7, 3)), rat_int(0));
        let p = Polynomial::from_ints(&[0, -2, -1]);
        assert_eq!(p.eval(&rat_int(-1)), rat_int(1));
        assert_eq!(naive_eval(&p, &rat_int(-1)), rat_int(1));
    }

    #[test]
    fn zero_polynomial_has_no_degree() {
        assert_eq!(Polynomial::zero().degree(), None);
        assert_eq!(Polynomial::from_ints(&[3, 0, 0]).degree(), Some(0));
    }

    #[test]
    fn definite_integral_examples() {
        let m1 = rat_int(-1);
        let p1 = rat_int(1);
        assert_eq!(Polynomial::one().definite_integral(&m1, &p1), rat_int(2));
        assert_eq!(Polynomial::identity().definite_integral(&m1, &p1), rat_int(0));
        let p = Polynomial::linear(rat_int(1), rat(1, 2));
        assert_eq!(p.definite_integral(&m1, &p1), rat_int(2));
        let anti = p.antiderivative();
        assert_eq!(anti, Polynomial::new(vec![rat_int(0), rat_int(1), rat(1, 4)]));
    }

    #[test]
    fn div_rem_and_gcd() {
        // (t+1)^2 (t-2)
        let a = Polynomial::from_ints(&[1, 1]).pow(2);
        let p = &a * &Polynomial::from_ints(&[-2, 1]);
        let (q, r) = p.div_rem(&Polynomial::from_ints(&[1, 1])).unwrap();
        assert!(r.is_zero());
        assert_eq!(&q * &Polynomial::from_ints(&[1, 1]), p);
        assert_eq!(p.gcd(&p.derivative()), Polynomial::from_ints(&[1, 1]));
        assert_eq!(p.square_free(), Polynomial::from_ints(&[-2, -1, 1]));
        assert!(p.div_rem(&Polynomial::zero()).is_err());
    }

    #[test]
    fn shift_matches_composition() {
        let p = Polynomial::from_ints(&[-1, -2, 3]);
        let s = p.shift(&rat(1, 3));
        for t in [rat_int(0), rat(5, 7), rat_int(-2)] {
            assert_eq!(s.eval(&t), p.eval(&(&t + rat(1, 3))));
        }
    }

    #[test]
    fn exp_weighted_examples() {
        let t = Polynomial::identity();
        assert!(exp_weighted_integral(&t, 0.0, -1.0, 1.0).abs() < 1e-16);
        let e = std::f64::consts::E;
        let one = exp_weighted_integral(&Polynomial::one(), 1.0, -1.0, 1.0);
        assert!((one - (e - 1.0 / e)).abs() < 1e-14);
        let lin = exp_weighted_integral(&t, 1.0, -1.0, 1.0);
        assert!((lin - 2.0 / e).abs() < 1e-14);
    }

    #[test]
    fn exp_weighted_branches_agree_near_threshold() {
        let p = Polynomial::from_ints(&[-1, -2, 3, 1]).to_float();
        for k in [0.49, 0.4999, 0.5001, 0.51] {
            let series = p.exp_weighted_series(k, -1.0, 2.0);
            let closed = p.exp_closed_primitive(k, 1.0) - p.exp_closed_primitive(k, -1.0);
            assert!((series - closed).abs() < 1e-13, "k={k}: {series} vs {closed}");
        }
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let p = Polynomial::from_ints(&[2, -1, 5]).to_float();
        for k in [0.0, 0.3, -4.0] {
            let f = p.exp_weighted_integral(k, -0.5, 0.8);
            let r = p.exp_weighted_integral(k, 0.8, -0.5);
            assert!((f + r).abs() < 1e-14);
        }
    }

    #[test]
    fn isolate_examples() {
        let (m1, p1) = (rat_int(-1), rat_int(1));
        let roots = isolate_real_roots(&Polynomial::from_ints(&[0, -2, -1]), &m1, &p1).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].contains(&rat_int(0)));

        let none = isolate_real_roots(&Polynomial::from_ints(&[1, 0, -1]), &m1, &p1).unwrap();
        assert!(none.is_empty());

        let q = isolate_real_roots(&Polynomial::from_ints(&[-1, -2, 3]), &m1, &p1).unwrap();
        assert_eq!(q.len(), 1);
        assert!(q[0].contains(&rat(-1, 3)));
        assert!(q[0].width() <= default_root_width());
        assert_eq!(q[0].multiplicity, Multiplicity::Simple);
    }

    #[test]
    fn isolate_rejects_zero() {
        let r = isolate_real_roots(&Polynomial::zero(), &rat_int(-1), &rat_int(1));
        assert_eq!(r, Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn double_root_flagged() {
        // (t - 1/4)^2 (t + 1/2)
        let a = Polynomial::linear(rat(-1, 4), rat_int(1));
        let p = &a.pow(2) * &Polynomial::linear(rat(1, 2), rat_int(1));
        let roots = isolate_real_roots(&p, &rat_int(-1), &rat_int(1)).unwrap();
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].multiplicity, Multiplicity::Simple);
        assert_eq!(roots[1].multiplicity, Multiplicity::PossiblyMultiple);
        assert!(roots[1].contains(&rat(1, 4)));
    }

    #[test]
    fn many_close_roots() {
        let mut p = Polynomial::one();
        for j in 1..=6 {
            p = &p * &Polynomial::linear(rat(-j, 10), rat_int(1));
        }
        let roots = isolate_real_roots(&p, &rat_int(0), &rat_int(1)).unwrap();
        assert_eq!(roots.len(), 6);
        for (j, r) in roots.iter().enumerate() {
            assert!(r.contains(&rat(j as i64 + 1, 10)));
        }
    }
}
