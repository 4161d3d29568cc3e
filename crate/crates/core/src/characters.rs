//! Real primitive Dirichlet characters, realised as Kronecker symbols
//! `n ↦ (d/n)` for a fundamental discriminant `d`.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::mpnum::{pi, BigComplex, PrecisionContext};
use crate::{Error, Result};

/// Kronecker symbol `(d/n)`, defined for every pair of integers.
pub fn kronecker_symbol(d: i64, n: i64) -> i8 {
    let d = i128::from(d);
    let mut n = i128::from(n);
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut sign = 1i8;
    if n < 0 {
        n = -n;
        if d < 0 {
            sign = -sign;
        }
    }
    let twos = n.trailing_zeros();
    n >>= twos;
    if twos > 0 {
        if d % 2 == 0 {
            return 0;
        }
        // (d/2) = -1 exactly when d ≡ ±3 (mod 8)
        if twos % 2 == 1 && matches!(d.rem_euclid(8), 3 | 5) {
            sign = -sign;
        }
    }
    sign * jacobi(d, n)
}

/// Jacobi symbol for odd positive `n`.
fn jacobi(a: i128, n: i128) -> i8 {
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut result = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

fn is_squarefree(m: i64) -> bool {
    let m = m.unsigned_abs();
    if m == 0 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= m {
        if m % (k * k) == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Checks the fundamental-discriminant conditions, returning the reason on failure.
pub fn check_fundamental_discriminant(d: i64) -> std::result::Result<(), &'static str> {
    if d == 0 || d == 1 {
        return Err("the trivial discriminants 0 and 1 have no character of modulus >= 3");
    }
    match d.rem_euclid(4) {
        1 if is_squarefree(d) => Ok(()),
        1 => Err("d ≡ 1 (mod 4) but d is not squarefree"),
        0 => {
            let m = d / 4;
            match m.rem_euclid(4) {
                2 | 3 if is_squarefree(m) => Ok(()),
                2 | 3 => Err("d = 4m but m is not squarefree"),
                _ => Err("d = 4m requires m ≡ 2 or 3 (mod 4)"),
            }
        }
        _ => Err("d must be ≡ 0 or 1 (mod 4)"),
    }
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    check_fundamental_discriminant(d).is_ok()
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A real primitive character `χ = (d/·)` of modulus `q = |d|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CharacterRecord")]
pub struct RealPrimitiveCharacter {
    d: i64,
    q: u64,
    /// Parity bit: `χ(-1) = (-1)^a`.
    a: u8,
    values: Vec<i8>,
}

#[derive(Deserialize)]
struct CharacterRecord {
    d: i64,
    q: u64,
    a: u8,
    values: Vec<i8>,
}

impl TryFrom<CharacterRecord> for RealPrimitiveCharacter {
    type Error = Error;

    fn try_from(r: CharacterRecord) -> Result<Self> {
        let chi = Self::from_discriminant(r.d)?;
        if chi.q != r.q || chi.a != r.a || chi.values != r.values {
            return Err(Error::InvalidArgument(format!(
                "stored character data disagrees with the Kronecker symbol for d = {}",
                r.d
            )));
        }
        Ok(chi)
    }
}

impl RealPrimitiveCharacter {
    pub fn from_discriminant(d: i64) -> Result<Self> {
        check_fundamental_discriminant(d).map_err(|why| Error::NotFundamental(d, why))?;
        let q = d.unsigned_abs();
        let values: Vec<i8> = (0..q as i64).map(|n| kronecker_symbol(d, n)).collect();
        let minus_one = kronecker_symbol(d, -1);
        let a = if minus_one == 1 { 0 } else { 1 };
        Ok(Self { d, q, a, values })
    }

    pub fn discriminant(&self) -> i64 {
        self.d
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn parity(&self) -> u8 {
        self.a
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// `χ(n)`, extended to all integers by periodicity.
    pub fn chi(&self, n: i64) -> i8 {
        self.values[n.rem_euclid(self.q as i64) as usize]
    }

    pub fn is_coprime(&self, n: u64) -> bool {
        gcd(n, self.q) == 1
    }

    /// Gauss sum `τ(χ) = Σ_{n=1}^{q} χ(n) e^{2πin/q}`.
    pub fn gauss_sum(&self, ctx: &PrecisionContext) -> BigComplex {
        let prec = ctx.prec();
        let two_pi_over_q = pi(ctx) * 2u32 / Float::with_val(prec, self.q);
        let mut re = ctx.zero();
        let mut im = ctx.zero();
        for n in 1..=self.q {
            let c = self.chi(n as i64);
            if c == 0 {
                continue;
            }
            let angle = Float::with_val(prec, &two_pi_over_q * n);
            let (sin, cos) = angle.sin_cos(ctx.zero());
            if c > 0 {
                re += cos;
                im += sin;
            } else {
                re -= cos;
                im -= sin;
            }
        }
        BigComplex::new(re, im)
    }

    /// Root number `ε(χ) = τ(χ) / (i^a √q)`.
    pub fn epsilon_factor(&self, ctx: &PrecisionContext) -> BigComplex {
        let tau = self.gauss_sum(ctx);
        let sqrt_q = Float::with_val(ctx.prec(), self.q).sqrt();
        let rotated = if self.a == 1 {
            // divide by i
            BigComplex::new(tau.im, -tau.re)
        } else {
            tau
        };
        BigComplex::new(rotated.re / &sqrt_q, rotated.im / &sqrt_q)
    }
}
