//! Arbitrary-precision real and complex scalars.
//!
//! Reals are MPFR floats ([`BigReal`]); [`BigComplex`] is a plain pair of
//! them. All working values are created at [`PrecisionContext::prec`], which
//! includes [`GUARD_DIGITS`] extra decimal digits on top of the requested
//! precision; values are rounded back to `digits` only when serialized.

use std::f64::consts::{LN_10, LOG2_10, PI};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{OnceLock, RwLock};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::{BigReal, Error, Result};

pub const MIN_DIGITS: u32 = 30;
pub const DEFAULT_DIGITS: u32 = 120;
/// Extra decimal digits carried internally by every context.
pub const GUARD_DIGITS: u32 = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrecisionContext {
    digits: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self {
            digits: DEFAULT_DIGITS,
        }
    }
}

impl TryFrom<u32> for PrecisionContext {
    type Error = Error;

    fn try_from(digits: u32) -> Result<Self> {
        Self::new(digits)
    }
}

impl From<PrecisionContext> for u32 {
    fn from(ctx: PrecisionContext) -> u32 {
        ctx.digits
    }
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::PrecisionTooLow(digits));
        }
        Ok(Self { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary working precision, guard digits included.
    pub fn prec(&self) -> u32 {
        digits_to_bits(self.digits + GUARD_DIGITS)
    }

    pub fn zero(&self) -> BigReal {
        Float::new(self.prec())
    }

    pub fn one(&self) -> BigReal {
        Float::with_val(self.prec(), 1)
    }

    pub fn int(&self, v: i64) -> BigReal {
        Float::with_val(self.prec(), v)
    }

    pub fn real(&self, v: f64) -> BigReal {
        Float::with_val(self.prec(), v)
    }

    pub fn ratio(&self, num: i64, den: i64) -> BigReal {
        Float::with_val(self.prec(), Rational::from((num, den)))
    }

    /// `10^exp` at working precision.
    pub fn pow10(&self, exp: i64) -> BigReal {
        pow10(exp, self.prec())
    }

    /// `10^-(digits - loss)`: the tolerance left after losing `loss` digits.
    pub fn tol(&self, loss: u32) -> BigReal {
        self.pow10(-(i64::from(self.digits) - i64::from(loss)))
    }

    /// Parses a decimal string (`"3.25"`, `"-1.5e-7"`) or a fraction (`"-1/2"`).
    pub fn parse(&self, s: &str) -> Result<BigReal> {
        parse_real(s, self.prec())
    }

    pub fn complex(&self, re: f64, im: f64) -> BigComplex {
        BigComplex::new(self.real(re), self.real(im))
    }
}

pub fn digits_to_bits(digits: u32) -> u32 {
    (f64::from(digits) * LOG2_10).ceil() as u32 + 4
}

pub fn pow10(exp: i64, prec: u32) -> BigReal {
    let ten = Float::with_val(prec, 10);
    ten.pow(exp as i32)
}

pub fn parse_real(s: &str, prec: u32) -> Result<BigReal> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_real(num, prec)?;
        let den = parse_real(den, prec)?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(num / den);
    }
    Float::parse(s)
        .map(|p| Float::with_val(prec, p))
        .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

/// Decimal string with `digits` significant digits, round-to-nearest.
pub fn to_decimal(x: &BigReal, digits: u32) -> String {
    x.to_string_radix(10, Some(digits as usize))
}

/// Base-10 logarithm of `|x|` as an `f64`, `-inf` for zero.
pub fn log10_abs(x: &BigReal) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    // to_f64 underflows below ~1e-308, so go through the exponent
    let exp = x.get_exp().unwrap_or(0);
    let mant = Float::with_val(64, x >> exp).abs().to_f64();
    mant.log10() + f64::from(exp) * std::f64::consts::LOG10_2
}

#[derive(Clone, PartialEq)]
pub struct BigComplex {
    pub re: BigReal,
    pub im: BigReal,
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {:+}i)", self.re.to_f64(), self.im.to_f64())
    }
}

/// Serialized as `{"re": "...", "im": "..."}` decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexDecimal {
    pub re: String,
    pub im: String,
}

impl BigComplex {
    pub fn new(re: BigReal, im: BigReal) -> Self {
        Self { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Self::new(Float::new(prec), Float::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        Self::from_real(Float::with_val(prec, 1))
    }

    pub fn from_real(re: BigReal) -> Self {
        let im = Float::new(re.prec());
        Self { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigReal {
        Float::with_val(self.prec(), (&self.re * &self.re) + (&self.im * &self.im))
    }

    pub fn abs(&self) -> BigReal {
        self.re.clone().hypot(&self.im)
    }

    /// Principal argument in `(-π, π]`.
    pub fn arg(&self) -> BigReal {
        self.im.clone().atan2(&self.re)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn scale(&self, k: &BigReal) -> Self {
        let p = self.prec();
        Self::new(Float::with_val(p, &self.re * k), Float::with_val(p, &self.im * k))
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        Self::new(-self.im.clone(), self.re.clone())
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let modulus = self.re.clone().exp();
        let (sin, cos) = self.im.clone().sin_cos(Float::new(p));
        Self::new(modulus.clone() * cos, modulus * sin)
    }

    pub fn to_decimal(&self, digits: u32) -> ComplexDecimal {
        ComplexDecimal {
            re: to_decimal(&self.re, digits),
            im: to_decimal(&self.im, digits),
        }
    }

    pub fn from_decimal(d: &ComplexDecimal, prec: u32) -> Result<Self> {
        Ok(Self::new(parse_real(&d.re, prec)?, parse_real(&d.im, prec)?))
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Self::new(Float::with_val(prec, &self.re), Float::with_val(prec, &self.im))
    }
}

impl Add<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec();
        BigComplex::new(
            Float::with_val(p, &self.re + &rhs.re),
            Float::with_val(p, &self.im + &rhs.im),
        )
    }
}

impl Sub<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec();
        BigComplex::new(
            Float::with_val(p, &self.re - &rhs.re),
            Float::with_val(p, &self.im - &rhs.im),
        )
    }
}

impl Mul<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec();
        let re = Float::with_val(p, (&self.re * &rhs.re) - (&self.im * &rhs.im));
        let im = Float::with_val(p, (&self.re * &rhs.im) + (&self.im * &rhs.re));
        BigComplex::new(re, im)
    }
}

impl Div<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn div(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec();
        let den = rhs.norm_sqr();
        let re = Float::with_val(p, (&self.re * &rhs.re) + (&self.im * &rhs.im));
        let im = Float::with_val(p, (&self.im * &rhs.re) - (&self.re * &rhs.im));
        BigComplex::new(re / &den, im / &den)
    }
}

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex::new(-self.re, -self.im)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex { (&self).$m(&rhs) }
        }
        impl $tr<&BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: &BigComplex) -> BigComplex { (&self).$m(rhs) }
        }
        impl $tr<BigComplex> for &BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex { self.$m(&rhs) }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul, Div div);

pub fn pi(ctx: &PrecisionContext) -> BigReal {
    pi_prec(ctx.prec())
}

pub fn pi_prec(prec: u32) -> BigReal {
    Float::with_val(prec, Constant::Pi)
}

/// `e^{iθ}`.
pub fn exp_i(theta: &BigReal, ctx: &PrecisionContext) -> BigComplex {
    let (sin, cos) = Float::with_val(ctx.prec(), theta).sin_cos(ctx.zero());
    BigComplex::new(cos, sin)
}

/// Principal-branch logarithm; the imaginary part lies in `(-π, π]`.
pub fn complex_log(z: &BigComplex, ctx: &PrecisionContext) -> Result<BigComplex> {
    complex_log_prec(z, ctx.prec())
}

fn complex_log_prec(z: &BigComplex, prec: u32) -> Result<BigComplex> {
    if z.is_zero() {
        return Err(Error::Domain("logarithm of zero".into()));
    }
    let modulus = Float::with_val(prec, &z.re).hypot(&z.im);
    let arg = Float::with_val(prec, &z.im).atan2(&z.re);
    Ok(BigComplex::new(modulus.ln(), arg))
}

/// `n^{-s}`.
pub fn pow_int_neg_s(n: u64, s: &BigComplex, ctx: &PrecisionContext) -> BigComplex {
    let ln_n = Float::with_val(ctx.prec(), n).ln();
    pow_from_log(&ln_n, s)
}

/// `x^{-s}` given `ln x` for real `x > 0`; works at the precision of `ln_x`.
pub fn pow_from_log(ln_x: &BigReal, s: &BigComplex) -> BigComplex {
    let p = ln_x.prec();
    let modulus = (-Float::with_val(p, &s.re * ln_x)).exp();
    let phase = Float::with_val(p, &s.im * ln_x);
    let (sin, cos) = phase.sin_cos(Float::new(p));
    BigComplex::new(Float::with_val(p, &modulus * &cos), -(modulus * sin))
}

/// `n^{-s}` for `n = 0..=nmax`, or `None` where `n = 0` or `gcd(n, modulus) > 1`.
///
/// Only primes go through `exp`/`sin_cos`; composites reuse complete
/// multiplicativity via their smallest prime factor.
pub fn neg_powers(nmax: usize, s: &BigComplex, modulus: u64, prec: u32) -> Vec<Option<BigComplex>> {
    let mut spf = vec![0usize; nmax + 1];
    for p in 2..=nmax {
        if spf[p] == 0 {
            let mut m = p;
            while m <= nmax {
                if spf[m] == 0 {
                    spf[m] = p;
                }
                m += p;
            }
        }
    }
    let s = s.with_prec(prec);
    let mut out: Vec<Option<BigComplex>> = vec![None; nmax + 1];
    if nmax >= 1 {
        out[1] = Some(BigComplex::one(prec));
    }
    for n in 2..=nmax {
        let p = spf[n];
        if modulus > 1 && modulus % p as u64 == 0 {
            continue;
        }
        let value = if p == n {
            pow_from_log(&Float::with_val(prec, n as u64).ln(), &s)
        } else {
            match (&out[p], &out[n / p]) {
                (Some(a), Some(b)) => a * b,
                _ => continue,
            }
        };
        out[n] = Some(value);
    }
    out
}

/// `Γ(z)` for complex `z` off the non-positive integers, using reflection
/// for `Re z < 1/2`.
pub fn gamma(z: &BigComplex, ctx: &PrecisionContext) -> Result<BigComplex> {
    if z.re >= 0.5 {
        return Ok(log_gamma(z, ctx)?.exp());
    }
    let prec = ctx.prec();
    if z.im.is_zero() && z.re.is_integer() {
        return Err(Error::Domain("Γ has a pole at non-positive integers".into()));
    }
    // Γ(z) = π / (sin(πz) Γ(1 - z))
    let pi = pi_prec(prec);
    let x = Float::with_val(prec, &z.re * &pi);
    let y = Float::with_val(prec, &z.im * &pi);
    let (sin_x, cos_x) = x.sin_cos(Float::new(prec));
    let (sinh_y, cosh_y) = y.sinh_cosh(Float::new(prec));
    let sin_pz = BigComplex::new(sin_x * cosh_y, cos_x * sinh_y);
    let one_minus = BigComplex::new(Float::with_val(prec, 1 - &z.re), -z.im.clone());
    let g = log_gamma(&one_minus, ctx)?.exp();
    Ok(&BigComplex::from_real(pi) / &(&sin_pz * &g))
}

/// Exact Bernoulli numbers `B_{2k}`, `k ≥ 1`, grown on demand and shared.
fn bernoulli_cache() -> &'static RwLock<Vec<Rational>> {
    static CACHE: OnceLock<RwLock<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(Vec::new()))
}

/// `B_{2k}` as an exact rational (`B_2 = 1/6`, `B_4 = -1/30`, ...).
pub fn bernoulli_2k(k: usize) -> Rational {
    assert!(k >= 1, "B_2k is indexed from k = 1");
    {
        let cache = bernoulli_cache().read().expect("bernoulli cache poisoned");
        if k <= cache.len() {
            return cache[k - 1].clone();
        }
    }
    let mut cache = bernoulli_cache().write().expect("bernoulli cache poisoned");
    if k > cache.len() {
        let want = k.max(2 * cache.len()).max(64);
        *cache = bernoulli_table(want);
    }
    cache[k - 1].clone()
}

/// Integer-only tangent-number recurrence, then
/// `B_{2k} = (-1)^{k-1} 2k T_k / (4^k (4^k - 1))`.
fn bernoulli_table(n: usize) -> Vec<Rational> {
    let mut t: Vec<Integer> = vec![Integer::new(); n + 1];
    t[1] = Integer::from(1);
    for k in 2..=n {
        t[k] = Integer::from(&t[k - 1] * (k as u64 - 1));
    }
    for k in 2..=n {
        for j in k..=n {
            let next = Integer::from(&t[j - 1] * (j as u64 - k as u64))
                + Integer::from(&t[j] * (j as u64 - k as u64 + 2));
            t[j] = next;
        }
    }
    (1..=n)
        .map(|k| {
            let four_k = Integer::from(1) << (2 * k as u32);
            let den = Integer::from(&four_k * Integer::from(&four_k - 1u32));
            let num = Integer::from(&t[k] * (2 * k as u64));
            let b = Rational::from((num, den));
            if k % 2 == 0 {
                -b
            } else {
                b
            }
        })
        .collect()
}

/// Principal-branch `log Γ(z)` for `Re z > 0`.
///
/// Shifts `z` right until Stirling's series reaches the target accuracy,
/// then subtracts `log Π (z + j)` with the branch fixed by the summed
/// arguments of the factors.
pub fn log_gamma(z: &BigComplex, ctx: &PrecisionContext) -> Result<BigComplex> {
    if z.re <= 0 {
        return Err(Error::Domain("log_gamma requires Re(z) > 0".into()));
    }
    let target_digits = f64::from(ctx.digits() + GUARD_DIGITS + 10);
    // Stirling's smallest term is about exp(-2π|w|).
    let radius = target_digits * LN_10 / (2.0 * PI) + 1.0;
    let prec = ctx.prec() + 32;
    let z = z.with_prec(prec);

    let zr = z.re.to_f64();
    let zi = z.im.to_f64();
    let shift = if zr.hypot(zi) >= radius {
        0
    } else {
        (radius - zr).ceil().max(0.0) as u64
    };

    let w = if shift == 0 {
        z.clone()
    } else {
        BigComplex::new(Float::with_val(prec, &z.re + shift), z.im.clone())
    };
    let mut result = stirling(&w, target_digits, prec)?;

    if shift > 0 {
        let mut product = BigComplex::one(prec);
        let mut arg_sum = 0.0f64;
        for j in 0..shift {
            let factor = BigComplex::new(Float::with_val(prec, &z.re + j), z.im.clone());
            arg_sum += zi.atan2(zr + j as f64);
            product = &product * &factor;
        }
        let mut log_product = complex_log_prec(&product, prec)?;
        let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
        let winding = ((arg_sum - log_product.im.to_f64()) / (2.0 * PI)).round();
        log_product.im += Float::with_val(prec, &two_pi * winding);
        result = &result - &log_product;
    }
    let out = ctx.prec();
    Ok(result.with_prec(out))
}

fn stirling(w: &BigComplex, target_digits: f64, prec: u32) -> Result<BigComplex> {
    let ln_w = complex_log_prec(w, prec)?;
    let half = Float::with_val(prec, 0.5);
    let w_minus_half = BigComplex::new(Float::with_val(prec, &w.re - &half), w.im.clone());
    let half_ln_two_pi = (Float::with_val(prec, Constant::Pi) * 2u32).ln() * &half;

    let mut sum = &(&w_minus_half * &ln_w) - w;
    sum.re += &half_ln_two_pi;

    let inv_w = &BigComplex::one(prec) / w;
    let inv_w2 = &inv_w * &inv_w;
    let mut power = inv_w;
    let scale = log10_abs(&sum.abs()).max(0.0);
    let max_terms = (4.0 * target_digits) as usize + 16;
    for k in 1..=max_terms {
        let coeff = Float::with_val(prec, bernoulli_2k(k))
            / Float::with_val(prec, (2 * k as u64) * (2 * k as u64 - 1));
        let term = power.scale(&coeff);
        sum = &sum + &term;
        if log10_abs(&term.abs()) < scale - target_digits {
            return Ok(sum);
        }
        power = &power * &inv_w2;
    }
    Err(Error::PrecisionFault(
        "Stirling series did not reach the target accuracy".into(),
    ))
}
