//! Generalized Gram points and critical-line zeros of `Z(t, χ)`.
//!
//! Both are located in two stages: a cheap pass at [`MIN_DIGITS`] that
//! brackets the root to about 20 digits, then a short secant polish at the
//! requested precision inside a tiny bracket.

use std::f64::consts::PI;

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::characters::RealPrimitiveCharacter;
use crate::lref::{hardy_z, theta};
use crate::mpnum::{log10_abs, parse_real, pi_prec, to_decimal, PrecisionContext, MIN_DIGITS};
use crate::{BigReal, Error, Result};

/// Digits the low-precision stage resolves before handing over.
const COARSE_DIGITS: u32 = 20;

fn coarse_ctx() -> PrecisionContext {
    PrecisionContext::new(MIN_DIGITS).expect("minimum precision is valid")
}

/// Finds a root of `f` in `[lo, hi]` to `target_digits` (absolute, relative to
/// `max(1, |root|)`): a few bisection steps, then secant steps with a
/// bisection fallback whenever the secant leaves the bracket or stalls.
pub fn refine_root<F>(
    mut f: F,
    lo: &BigReal,
    hi: &BigReal,
    target_digits: u32,
    ctx: &PrecisionContext,
) -> Result<BigReal>
where
    F: FnMut(&BigReal) -> Result<BigReal>,
{
    let prec = ctx.prec();
    let (mut a, mut b) = (Float::with_val(prec, lo), Float::with_val(prec, hi));
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut fa = f(&a)?;
    let fb = f(&b)?;
    if fa.is_zero() {
        return Ok(a);
    }
    if fb.is_zero() {
        return Ok(b);
    }
    if fa.is_sign_negative() == fb.is_sign_negative() {
        return Err(Error::NotBracketed);
    }
    let scale = a.clone().abs().max(&b.clone().abs()).max(&ctx.one());
    let tol = Float::with_val(prec, &scale * ctx.pow10(-i64::from(target_digits)));

    // secant history: the last two evaluated points
    let mut x0 = a.clone();
    let mut f0 = fa.clone();
    let mut x1 = b.clone();
    let mut f1 = fb;
    let max_iter = 64 + 4 * target_digits as usize;
    for iter in 0..max_iter {
        let width = Float::with_val(prec, &b - &a);
        if width <= tol {
            break;
        }
        let mid = Float::with_val(prec, &a + &b) / 2u32;
        let mut x = if iter < 3 || f1 == f0 {
            mid.clone()
        } else {
            let slope = Float::with_val(prec, &f1 - &f0) / Float::with_val(prec, &x1 - &x0);
            Float::with_val(prec, &x1 - Float::with_val(prec, &f1 / &slope))
        };
        if x <= a || x >= b || x.is_nan() {
            x = mid;
        }
        let step = Float::with_val(prec, &x - &x1).abs();
        let fx = f(&x)?;
        if fx.is_zero() {
            return Ok(x);
        }
        if fx.is_sign_negative() == fa.is_sign_negative() {
            a = x.clone();
            fa = fx.clone();
        } else {
            b = x.clone();
        }
        x0 = std::mem::replace(&mut x1, x);
        f0 = std::mem::replace(&mut f1, fx);
        if iter >= 3 && step <= tol {
            return Ok(x1);
        }
    }
    Ok(x1)
}

/// Solves `(t/2) log(qt/(2πe)) = y` for `t` in double precision.
fn asymptotic_inverse(q: u64, y: f64) -> f64 {
    let mut t = 10.0f64.max(y);
    for _ in 0..60 {
        let g = 0.5 * t * (q as f64 * t / (2.0 * PI * std::f64::consts::E)).ln() - y;
        let dg = 0.5 * (q as f64 * t / (2.0 * PI)).ln();
        let next = (t - g / dg.max(0.1)).max(1.0);
        if (next - t).abs() < 1e-12 * t {
            return next;
        }
        t = next;
    }
    t
}

/// Stationary point `t*` of θ: the start of its increasing branch.
pub fn theta_turning_point(chi: &RealPrimitiveCharacter) -> Result<f64> {
    let c = coarse_ctx();
    let eval = |t: f64| theta(chi, &c.real(t), &c).map(|v| v.to_f64());
    // coarse scan, then golden-section on the bracketing cell
    let step = 0.05;
    let mut best = (0.0, eval(0.0)?);
    let mut t = step;
    while t <= 20.0 {
        let v = eval(t)?;
        if v < best.1 {
            best = (t, v);
        } else if v > best.1 + 1.0 {
            break;
        }
        t += step;
    }
    let (mut lo, mut hi) = ((best.0 - step).max(0.0), best.0 + step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..40 {
        let x1 = hi - ratio * (hi - lo);
        let x2 = lo + ratio * (hi - lo);
        if eval(x1)? < eval(x2)? {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Expands `[lo, hi]` around `seed` until `f(lo) < 0 < f(hi)`, never
/// going below `floor`. `f` must be increasing on `[floor, ∞)`.
fn bracket_increasing<F>(mut f: F, seed: f64, floor: f64, width: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut lo = (seed - width).max(floor);
    let mut hi = (seed + width).max(floor + width);
    let mut step = width;
    for _ in 0..60 {
        let fl = f(lo)?;
        if fl <= 0.0 {
            break;
        }
        if lo <= floor {
            return Err(Error::Bracketing(format!(
                "target lies below the turning point {floor}"
            )));
        }
        step *= 2.0;
        lo = (lo - step).max(floor);
    }
    step = width;
    for _ in 0..60 {
        if f(hi)? >= 0.0 {
            return Ok((lo, hi));
        }
        step *= 2.0;
        hi += step;
    }
    Err(Error::Bracketing("bracket expansion did not converge".into()))
}

fn gram_point_from(
    chi: &RealPrimitiveCharacter,
    m: u64,
    turning: f64,
    ctx: &PrecisionContext,
) -> Result<BigReal> {
    let c = coarse_ctx();
    let target_c = pi_prec(c.prec()) * m;
    let f_coarse = |t: &BigReal| -> Result<BigReal> { Ok(theta(chi, t, &c)? - &target_c) };
    let seed = asymptotic_inverse(chi.modulus(), (m as f64 + 0.125) * PI).max(turning);
    let (lo, hi) = bracket_increasing(
        |t| Ok(f_coarse(&c.real(t))?.to_f64()),
        seed,
        turning,
        0.5,
    )?;
    let rough = refine_root(f_coarse, &c.real(lo), &c.real(hi), COARSE_DIGITS, &c)?;

    let target = pi_prec(ctx.prec()) * m;
    let f_fine = |t: &BigReal| -> Result<BigReal> { Ok(theta(chi, t, ctx)? - &target) };
    polish(f_fine, &rough, ctx)
}

/// High-precision polish of a root known to about [`COARSE_DIGITS`] digits.
fn polish<F>(mut f: F, rough: &BigReal, ctx: &PrecisionContext) -> Result<BigReal>
where
    F: FnMut(&BigReal) -> Result<BigReal>,
{
    let x = Float::with_val(ctx.prec(), rough);
    let scale = x.clone().abs().max(&ctx.one());
    let mut delta = Float::with_val(ctx.prec(), &scale * ctx.pow10(-i64::from(COARSE_DIGITS) + 2));
    for _ in 0..20 {
        let lo = Float::with_val(ctx.prec(), &x - &delta);
        let hi = Float::with_val(ctx.prec(), &x + &delta);
        match refine_root(&mut f, &lo, &hi, ctx.digits() + 5, ctx) {
            Err(Error::NotBracketed) => delta *= 16u32,
            other => return other,
        }
    }
    Err(Error::Bracketing("could not re-bracket at working precision".into()))
}

/// `g_m`: the solution of `θ(t, χ) = mπ` on the increasing branch of θ.
pub fn gram_point(chi: &RealPrimitiveCharacter, m: u64, ctx: &PrecisionContext) -> Result<BigReal> {
    gram_point_from(chi, m, theta_turning_point(chi)?, ctx)
}

#[derive(Clone, Debug)]
pub struct GramEntry {
    pub m: u64,
    pub value: BigReal,
    /// `|θ(g_m) − mπ|`.
    pub residual: BigReal,
}

#[derive(Clone, Debug)]
pub struct GramTable {
    pub d: i64,
    pub digits: u32,
    pub entries: Vec<GramEntry>,
}

/// `g_0, …, g_{M-1}`.
pub fn gram_table(chi: &RealPrimitiveCharacter, count: usize, ctx: &PrecisionContext) -> Result<GramTable> {
    if count == 0 {
        return Err(Error::InvalidArgument("a Gram table needs M >= 1".into()));
    }
    let turning = theta_turning_point(chi)?;
    let entries = (0..count as u64)
        .into_par_iter()
        .map(|m| {
            let value = gram_point_from(chi, m, turning, ctx)?;
            let residual = (theta(chi, &value, ctx)? - pi_prec(ctx.prec()) * m).abs();
            Ok(GramEntry { m, value, residual })
        })
        .collect::<Result<Vec<_>>>()?;
    for w in entries.windows(2) {
        if w[1].value <= w[0].value {
            return Err(Error::PrecisionFault(format!(
                "Gram points not increasing at m = {}",
                w[1].m
            )));
        }
    }
    Ok(GramTable {
        d: chi.discriminant(),
        digits: ctx.digits(),
        entries,
    })
}

impl GramTable {
    pub fn values(&self) -> Vec<BigReal> {
        self.entries.iter().map(|e| e.value.clone()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct ZeroEntry {
    pub m: usize,
    pub value: BigReal,
    pub achieved_digits: u32,
}

#[derive(Clone, Debug)]
pub struct ZeroTable {
    pub d: i64,
    pub digits: u32,
    pub entries: Vec<ZeroEntry>,
}

impl ZeroTable {
    pub fn values(&self) -> Vec<BigReal> {
        self.entries.iter().map(|e| e.value.clone()).collect()
    }
}

/// Sign of `Z` at double-precision `t`, from a [`MIN_DIGITS`] evaluation.
fn coarse_z(chi: &RealPrimitiveCharacter, t: f64, c: &PrecisionContext) -> Result<f64> {
    Ok(hardy_z(chi, &c.real(t), c)?.to_f64())
}

/// Sign-change brackets of `Z` inside `[a, b]`, subdividing 16, 32, … up to
/// `max_pieces` pieces while none is seen.
fn sign_changes(
    chi: &RealPrimitiveCharacter,
    a: (f64, f64),
    b: (f64, f64),
    max_pieces: usize,
    c: &PrecisionContext,
) -> Result<Vec<(f64, f64)>> {
    if a.1.signum() != b.1.signum() {
        return Ok(vec![(a.0, b.0)]);
    }
    let mut pieces = 16;
    while pieces <= max_pieces {
        let mut found = Vec::new();
        let mut prev = a;
        for j in 1..=pieces {
            let t = if j == pieces {
                b.0
            } else {
                a.0 + (b.0 - a.0) * j as f64 / pieces as f64
            };
            let z = if j == pieces { b.1 } else { coarse_z(chi, t, c)? };
            if z.signum() != prev.1.signum() {
                found.push((prev.0, t));
            }
            prev = (t, z);
        }
        if !found.is_empty() {
            return Ok(found);
        }
        pieces *= 2;
    }
    Ok(Vec::new())
}

/// Largest subdivision tried on a Gram interval showing no sign change.
pub const MAX_SUBDIVISION: usize = 256;
/// Gram intervals past `g_M` searched for a point where the count agrees.
pub const CONSENSUS_WINDOW: usize = 16;

/// The first `count` zeros `0 < γ_1 < γ_2 < …` of `Z(t, χ)`, found by
/// scanning `(0, g_0]` and successive Gram intervals.
///
/// Past `g_{count}` the scan continues until some `g_m` has exactly `m`
/// zeros below it. If none of the next [`CONSENSUS_WINDOW`] Gram points
/// agrees, a close pair may have been missed and
/// [`Error::ZeroCountMismatch`] is returned.
pub fn find_zeros(chi: &RealPrimitiveCharacter, count: usize, ctx: &PrecisionContext) -> Result<ZeroTable> {
    if count == 0 {
        return Err(Error::InvalidArgument("find_zeros needs M >= 1".into()));
    }
    let c = coarse_ctx();
    let turning = theta_turning_point(chi)?;
    let gram = |m: u64| -> Result<f64> { Ok(gram_point_from(chi, m, turning, &c)?.to_f64()) };

    let start = 1e-3;
    let mut left = (start, coarse_z(chi, start, &c)?);
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut m = 0u64;
    // Gram's law fails now and then, so N(g_m) = m is only demanded at some
    // Gram point within CONSENSUS_WINDOW of g_count; a persistent deficit
    // means a missed close pair.
    loop {
        let g = gram(m)?;
        let right = (g, coarse_z(chi, g, &c)?);
        brackets.extend(sign_changes(chi, left, right, MAX_SUBDIVISION, &c)?);
        left = right;
        let m_us = m as usize;
        if m_us >= count {
            let below = brackets.iter().filter(|(_, hi)| *hi <= g).count();
            if below == m_us && brackets.len() >= count {
                break;
            }
            if m_us >= count + CONSENSUS_WINDOW {
                return Err(Error::ZeroCountMismatch {
                    expected: m_us,
                    found: below,
                });
            }
        }
        m += 1;
    }
    brackets.truncate(count);

    let target = ctx.digits().saturating_sub(10);
    let entries = brackets
        .into_par_iter()
        .enumerate()
        .map(|(i, (lo, hi))| {
            let f_coarse = |t: &BigReal| hardy_z(chi, t, &c);
            let rough = refine_root(f_coarse, &c.real(lo), &c.real(hi), COARSE_DIGITS, &c)?;
            let value = polish(|t: &BigReal| hardy_z(chi, t, ctx), &rough, ctx)?;
            let achieved = certify_zero(chi, &value, target, ctx)?;
            Ok(ZeroEntry {
                m: i + 1,
                value,
                achieved_digits: achieved,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZeroTable {
        d: chi.discriminant(),
        digits: ctx.digits(),
        entries,
    })
}

/// Largest `k ≤ target` (stepping down by 5) such that `Z` changes sign on
/// `[γ − δ, γ + δ]` with `δ = 10^{-(k - 5)}`.
fn certify_zero(chi: &RealPrimitiveCharacter, gamma: &BigReal, target: u32, ctx: &PrecisionContext) -> Result<u32> {
    let mut k = target;
    while k > 5 {
        let delta = ctx.pow10(-(i64::from(k) - 5));
        let lo = hardy_z(chi, &Float::with_val(ctx.prec(), gamma - &delta), ctx)?;
        let hi = hardy_z(chi, &Float::with_val(ctx.prec(), gamma + &delta), ctx)?;
        if lo.is_sign_negative() != hi.is_sign_negative() || lo.is_zero() || hi.is_zero() {
            return Ok(k);
        }
        k = k.saturating_sub(5);
    }
    Err(Error::PrecisionFault(format!(
        "no sign change of Z around t = {}",
        gamma.to_f64()
    )))
}

#[derive(Serialize, Deserialize)]
struct GramRecord {
    m: u64,
    value: String,
    residual: String,
}

#[derive(Serialize, Deserialize)]
struct GramFile {
    d: i64,
    digits: u32,
    entries: Vec<GramRecord>,
}

#[derive(Serialize, Deserialize)]
struct ZeroRecord {
    m: usize,
    value: String,
    achieved_digits: u32,
}

#[derive(Serialize, Deserialize)]
struct ZeroFile {
    d: i64,
    digits: u32,
    entries: Vec<ZeroRecord>,
}

fn residual_string(x: &BigReal) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let l = log10_abs(x);
    format!("1e{}", l.ceil() as i64)
}

fn working_ctx(digits: u32) -> Result<PrecisionContext> {
    PrecisionContext::new(digits)
}

impl GramTable {
    pub fn to_json(&self) -> Result<String> {
        let file = GramFile {
            d: self.d,
            digits: self.digits,
            entries: self
                .entries
                .iter()
                .map(|e| GramRecord {
                    m: e.m,
                    value: to_decimal(&e.value, self.digits),
                    residual: residual_string(&e.residual),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Parses a table; residual strings are upper bounds and read back as such.
    pub fn from_json(s: &str) -> Result<Self> {
        let file: GramFile = serde_json::from_str(s)?;
        let prec = working_ctx(file.digits)?.prec();
        let entries = file
            .entries
            .into_iter()
            .map(|r| {
                Ok(GramEntry {
                    m: r.m,
                    value: parse_real(&r.value, prec)?,
                    residual: parse_real(&r.residual, prec)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d: file.d,
            digits: file.digits,
            entries,
        })
    }
}

impl ZeroTable {
    pub fn to_json(&self) -> Result<String> {
        let file = ZeroFile {
            d: self.d,
            digits: self.digits,
            entries: self
                .entries
                .iter()
                .map(|e| ZeroRecord {
                    m: e.m,
                    value: to_decimal(&e.value, self.digits),
                    achieved_digits: e.achieved_digits,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ZeroFile = serde_json::from_str(s)?;
        let prec = working_ctx(file.digits)?.prec();
        let entries = file
            .entries
            .into_iter()
            .map(|r| {
                Ok(ZeroEntry {
                    m: r.m,
                    value: parse_real(&r.value, prec)?,
                    achieved_digits: r.achieved_digits,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d: file.d,
            digits: file.digits,
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpnum::pi;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    fn chi(d: i64) -> RealPrimitiveCharacter {
        RealPrimitiveCharacter::from_discriminant(d).unwrap()
    }

    #[test]
    fn refine_root_simple_functions() {
        let c = ctx(50);
        let r = refine_root(|t| Ok(t.clone() - 2u32), &c.int(0), &c.int(4), 45, &c).unwrap();
        assert!((r - 2u32).abs() < c.tol(5));
        let r = refine_root(|t| Ok(t.clone().sin()), &c.int(3), &c.int(4), 45, &c).unwrap();
        // contract: error below 10^-target relative to max(1, |endpoints|) = 4
        assert!((r - pi(&c)).abs() < c.tol(5) * 4u32);
        assert!(matches!(
            refine_root(|t| Ok(t.clone() + 1u32), &c.int(0), &c.int(4), 45, &c),
            Err(Error::NotBracketed)
        ));
    }

    #[test]
    fn turning_point_is_a_minimum() {
        let t4 = theta_turning_point(&chi(-4)).unwrap();
        let c = ctx(30);
        let at = |t: f64| theta(&chi(-4), &c.real(t), &c).unwrap().to_f64();
        assert!(t4 > 0.5 && t4 < 3.0);
        assert!(at(t4) < 0.0);
        assert!(at(t4) <= at(t4 - 0.01) && at(t4) <= at(t4 + 0.01));
    }

    #[test]
    fn first_gram_points() {
        let c = ctx(40);
        let g0 = gram_point(&chi(-4), 0, &c).unwrap();
        assert_eq!(&to_decimal(&g0, 5), "3.3697");
        assert!(theta(&chi(-4), &g0, &c).unwrap().abs() < c.tol(20));
        let g0_3 = gram_point(&chi(-3), 0, &c).unwrap();
        assert_eq!(&to_decimal(&g0_3, 5), "4.8301");
    }

    #[test]
    fn gram_table_matches_refine_root_oracle() {
        let c = ctx(40);
        let table = gram_table(&chi(-4), 3, &c).unwrap();
        assert_eq!(table.entries.len(), 3);
        for e in &table.entries {
            assert!(e.residual < c.tol(20));
        }
        assert!(table.entries[0].value < table.entries[1].value);
        // independent bracket (5, 9) around g_1 solved by plain bisection+secant
        let pi_c = pi(&c);
        let g1 = refine_root(
            |t| Ok(theta(&chi(-4), t, &c)? - &pi_c),
            &c.int(5),
            &c.int(9),
            c.digits() - 5,
            &c,
        )
        .unwrap();
        assert!((g1 - &table.entries[1].value).abs() < c.tol(20));
        assert_eq!(&to_decimal(&table.entries[1].value, 5), "8.2856");
    }

    #[test]
    fn first_zeros_and_certificates() {
        let c = ctx(40);
        let zeros = find_zeros(&chi(-4), 3, &c).unwrap();
        assert!(to_decimal(&zeros.entries[0].value, 20).starts_with("6.020948"));
        for w in zeros.entries.windows(2) {
            assert!(w[0].value < w[1].value);
        }
        for e in &zeros.entries {
            assert!(e.achieved_digits >= c.digits() - 20);
            let delta = c.pow10(-(i64::from(e.achieved_digits) - 5));
            let lo = hardy_z(&chi(-4), &Float::with_val(c.prec(), &e.value - &delta), &c).unwrap();
            let hi = hardy_z(&chi(-4), &Float::with_val(c.prec(), &e.value + &delta), &c).unwrap();
            assert!(lo * hi < 0);
        }
        let z3 = find_zeros(&chi(-3), 1, &c).unwrap();
        assert!(to_decimal(&z3.entries[0].value, 20).starts_with("8.039737"));
    }

    #[test]
    fn json_round_trip() {
        let c = ctx(35);
        let table = gram_table(&chi(-3), 2, &c).unwrap();
        let json = table.to_json().unwrap();
        let back = GramTable::from_json(&json).unwrap();
        assert_eq!(back.to_json().unwrap(), json);
        let zeros = find_zeros(&chi(-3), 1, &c).unwrap();
        let json = zeros.to_json().unwrap();
        assert_eq!(ZeroTable::from_json(&json).unwrap().to_json().unwrap(), json);
    }
}
