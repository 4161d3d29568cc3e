//! Interpolation systems, approximants `F(s) = Σ a_n n^{-s}` and zero discovery.
//!
//! Two node types are supported. With known critical-line zeros `1/2 + iγ_m`
//! both the real and imaginary parts of `F` are forced to vanish (`2M`
//! equations). With Gram points only `Im F(1/2 + ig_m) = 0` is imposed (`M`
//! equations), mirroring `Im L(1/2 + ig_m, χ) = 0` there.
//! In both cases the first `k` retained coefficients are pinned to `χ(n)`.

use std::fmt;

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::characters::{gcd, RealPrimitiveCharacter};
use crate::gramzero::{refine_root, GramTable, ZeroTable};
use crate::lref::{l_value, theta};
use crate::mpnum::{
    exp_i, log10_abs, neg_powers, parse_real, to_decimal, BigComplex, PrecisionContext,
};
use crate::solve::{solve_big, DenseMatrix, SolveOptions, SolveReport};
use crate::{BigMatrix, BigReal, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Nodes are critical-line zeros; real and imaginary rows.
    FullZeros,
    /// Nodes are Gram points; imaginary rows only.
    GramImag,
}

impl Method {
    /// Equations contributed by each node.
    pub fn rows_per_node(self) -> usize {
        match self {
            Method::FullZeros => 2,
            Method::GramImag => 1,
        }
    }

    pub fn min_k(self) -> usize {
        match self {
            Method::FullZeros => 1,
            Method::GramImag => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::FullZeros => "full_zeros",
            Method::GramImag => "gram_imag",
        })
    }
}

/// Which naturals may carry coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexPolicy {
    /// Only `n` with `gcd(n, q) = 1`; the supported path.
    Coprime,
    /// Every natural `1..=N`; reproduces the unconstrained failure mode.
    AllNaturals,
}

/// The first `count` naturals coprime to `q`.
pub fn coprime_indices(q: u64, count: usize) -> Result<Vec<u64>> {
    if q < 3 {
        return Err(Error::InvalidArgument(format!("modulus {q} is below 3")));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one index".into()));
    }
    Ok((1u64..).filter(|&n| gcd(n, q) == 1).take(count).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexScheme {
    pub q: u64,
    pub k: usize,
    pub policy: IndexPolicy,
    /// `I`: all retained indices, ascending; `N = |I|`.
    pub indices: Vec<u64>,
}

impl IndexScheme {
    /// `N = k + 2M` for zero nodes, `N = k + M` for Gram nodes.
    pub fn new(q: u64, method: Method, nodes: usize, k: usize, policy: IndexPolicy) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidArgument("need at least one node".into()));
        }
        if k < method.min_k() {
            return Err(Error::InvalidArgument(format!(
                "k = {k} is below {} for the {method} method: the right-hand side would vanish",
                method.min_k()
            )));
        }
        let n = k + method.rows_per_node() * nodes;
        let indices = match policy {
            IndexPolicy::Coprime => coprime_indices(q, n)?,
            IndexPolicy::AllNaturals => (1..=n as u64).collect(),
        };
        Ok(Self { q, k, policy, indices })
    }

    pub fn n(&self) -> usize {
        self.indices.len()
    }

    /// `J`: the pinned indices.
    pub fn fixed(&self) -> &[u64] {
        &self.indices[..self.k]
    }

    /// `I \ J`: the unknowns.
    pub fn free(&self) -> &[u64] {
        &self.indices[self.k..]
    }

    pub fn max_index(&self) -> u64 {
        *self.indices.last().expect("scheme is nonempty")
    }

    fn power_filter(&self) -> u64 {
        match self.policy {
            IndexPolicy::Coprime => self.q,
            IndexPolicy::AllNaturals => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InterpolationSystem {
    pub matrix: BigMatrix,
    pub rhs: Vec<BigReal>,
    pub scheme: IndexScheme,
    pub nodes: Vec<BigReal>,
    pub method: Method,
    pub d: i64,
}

/// Assembles `A x = b` for either method. Row `m` (and `M + m` for zero
/// nodes) encodes the node `x_m`; `b = −(contribution of the pinned columns)`.
pub fn build_system(
    chi: &RealPrimitiveCharacter,
    method: Method,
    nodes: &[BigReal],
    k: usize,
    policy: IndexPolicy,
    ctx: &PrecisionContext,
) -> Result<InterpolationSystem> {
    let scheme = IndexScheme::new(chi.modulus(), method, nodes.len(), k, policy)?;
    let m = nodes.len();
    let size = method.rows_per_node() * m;
    if scheme.free().len() != size {
        return Err(Error::DimensionMismatch(format!(
            "{} unknowns for {size} equations",
            scheme.free().len()
        )));
    }
    let prec = ctx.prec();
    let nmax = scheme.max_index() as usize;
    let half = ctx.ratio(1, 2);

    // per node: (real row, real rhs, imaginary row, imaginary rhs)
    let rows: Vec<(Vec<BigReal>, BigReal, Vec<BigReal>, BigReal)> = nodes
        .par_iter()
        .map(|x| {
            let s = BigComplex::new(half.clone(), Float::with_val(prec, x));
            let powers = neg_powers(nmax, &s, scheme.power_filter(), prec);
            let p = |n: u64| powers[n as usize].as_ref().expect("retained index has a power");
            let re_row = scheme.free().iter().map(|&n| p(n).re.clone()).collect();
            let im_row = scheme.free().iter().map(|&n| p(n).im.clone()).collect();
            let mut b_re = ctx.zero();
            let mut b_im = ctx.zero();
            for &n in scheme.fixed() {
                let c = chi.chi(n as i64);
                b_re -= Float::with_val(prec, &p(n).re * c);
                b_im -= Float::with_val(prec, &p(n).im * c);
            }
            (re_row, b_re, im_row, b_im)
        })
        .collect();

    let mut matrix_rows = Vec::with_capacity(size);
    let mut rhs = Vec::with_capacity(size);
    if method == Method::FullZeros {
        for (re, b, _, _) in &rows {
            matrix_rows.push(re.clone());
            rhs.push(b.clone());
        }
    }
    for (_, _, im, b) in rows {
        matrix_rows.push(im);
        rhs.push(b);
    }
    Ok(InterpolationSystem {
        matrix: DenseMatrix::from_rows(matrix_rows)?,
        rhs,
        scheme,
        nodes: nodes.to_vec(),
        method,
        d: chi.discriminant(),
    })
}

/// Zero-node system: `2M` equations from `M` ordinates, `k ≥ 1`.
pub fn build_system_full(
    chi: &RealPrimitiveCharacter,
    zeros: &[BigReal],
    k: usize,
    ctx: &PrecisionContext,
) -> Result<InterpolationSystem> {
    build_system(chi, Method::FullZeros, zeros, k, IndexPolicy::Coprime, ctx)
}

/// Gram-node system: `M` equations from `M` Gram points, `k ≥ 2`.
pub fn build_system_gram(
    chi: &RealPrimitiveCharacter,
    gram_points: &[BigReal],
    k: usize,
    ctx: &PrecisionContext,
) -> Result<InterpolationSystem> {
    build_system(chi, Method::GramImag, gram_points, k, IndexPolicy::Coprime, ctx)
}

/// A finite Dirichlet series with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Approximant {
    pub d: i64,
    pub method: Method,
    /// Number of nodes `M`.
    pub nodes: usize,
    pub k: usize,
    pub digits: u32,
    pub policy: IndexPolicy,
    /// FNV-1a digest of the node decimal strings.
    pub node_digest: String,
    /// `(n, a_n)` ascending in `n`.
    pub coefficients: Vec<(u64, BigReal)>,
}

fn node_digest(nodes: &[BigReal], digits: u32) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for x in nodes {
        for byte in to_decimal(x, digits).bytes().chain(std::iter::once(b';')) {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

/// Pins `a_n = χ(n)` on `J` and places the solved values on `I \ J`.
pub fn assemble_approximant(
    system: &InterpolationSystem,
    solution: &[BigReal],
    chi: &RealPrimitiveCharacter,
    ctx: &PrecisionContext,
) -> Result<Approximant> {
    let free = system.scheme.free();
    if solution.len() != free.len() {
        return Err(Error::DimensionMismatch(format!(
            "solution has {} entries, expected {}",
            solution.len(),
            free.len()
        )));
    }
    let mut coefficients: Vec<(u64, BigReal)> = system
        .scheme
        .fixed()
        .iter()
        .map(|&n| (n, ctx.int(i64::from(chi.chi(n as i64)))))
        .collect();
    coefficients.extend(free.iter().copied().zip(solution.iter().cloned()));
    Ok(Approximant {
        d: chi.discriminant(),
        method: system.method,
        nodes: system.nodes.len(),
        k: system.scheme.k,
        digits: ctx.digits(),
        policy: system.scheme.policy,
        node_digest: node_digest(&system.nodes, ctx.digits()),
        coefficients,
    })
}

/// Builds, solves and assembles in one step.
pub fn build_approximant(
    chi: &RealPrimitiveCharacter,
    method: Method,
    nodes: &[BigReal],
    k: usize,
    policy: IndexPolicy,
    opts: &SolveOptions,
    ctx: &PrecisionContext,
) -> Result<(Approximant, SolveReport<BigReal>)> {
    let system = build_system(chi, method, nodes, k, policy, ctx)?;
    let (x, report) = solve_big(&system.matrix, &system.rhs, opts, ctx)?;
    Ok((assemble_approximant(&system, &x, chi, ctx)?, report))
}

impl Approximant {
    pub fn max_index(&self) -> u64 {
        self.coefficients.last().map_or(1, |(n, _)| *n)
    }

    fn power_filter(&self) -> u64 {
        match self.policy {
            IndexPolicy::Coprime => self.d.unsigned_abs(),
            IndexPolicy::AllNaturals => 1,
        }
    }

    /// `a_n`, zero off the support.
    pub fn coefficient(&self, n: u64) -> Option<&BigReal> {
        self.coefficients
            .binary_search_by_key(&n, |(m, _)| *m)
            .ok()
            .map(|i| &self.coefficients[i].1)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ApproximantFile {
            d: self.d,
            method: self.method,
            m: self.nodes,
            k: self.k,
            digits: self.digits,
            policy: self.policy,
            node_digest: self.node_digest.clone(),
            coefficients: self
                .coefficients
                .iter()
                .map(|(n, a)| CoefficientRecord {
                    n: *n,
                    value: to_decimal(a, self.digits),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ApproximantFile = serde_json::from_str(s)?;
        let prec = PrecisionContext::new(file.digits)?.prec();
        let coefficients = file
            .coefficients
            .into_iter()
            .map(|c| Ok((c.n, parse_real(&c.value, prec)?)))
            .collect::<Result<Vec<_>>>()?;
        if coefficients.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument("coefficient indices must ascend".into()));
        }
        Ok(Self {
            d: file.d,
            method: file.method,
            nodes: file.m,
            k: file.k,
            digits: file.digits,
            policy: file.policy,
            node_digest: file.node_digest,
            coefficients,
        })
    }

    /// Plot data: one `n,a_n` line per coefficient.
    pub fn coefficients_csv(&self) -> String {
        let mut out = String::from("n,a_n\n");
        for (n, a) in &self.coefficients {
            out.push_str(&format!("{n},{}\n", to_decimal(a, 20)));
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct CoefficientRecord {
    n: u64,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct ApproximantFile {
    d: i64,
    method: Method,
    #[serde(rename = "M")]
    m: usize,
    k: usize,
    digits: u32,
    policy: IndexPolicy,
    node_digest: String,
    coefficients: Vec<CoefficientRecord>,
}

/// `F(s) = Σ a_n n^{-s}`.
pub fn evaluate(f: &Approximant, s: &BigComplex, ctx: &PrecisionContext) -> BigComplex {
    let prec = ctx.prec();
    let powers = neg_powers(f.max_index() as usize, s, f.power_filter(), prec);
    let mut sum = BigComplex::zero(prec);
    for (n, a) in &f.coefficients {
        if let Some(p) = &powers[*n as usize] {
            sum = &sum + &p.scale(a);
        }
    }
    sum
}

/// `(F(s), F'(s))` with `F'(s) = −Σ a_n log(n) n^{-s}`.
pub fn evaluate_with_derivative(
    f: &Approximant,
    s: &BigComplex,
    ctx: &PrecisionContext,
) -> (BigComplex, BigComplex) {
    let prec = ctx.prec();
    let powers = neg_powers(f.max_index() as usize, s, f.power_filter(), prec);
    let mut value = BigComplex::zero(prec);
    let mut deriv = BigComplex::zero(prec);
    for (n, a) in &f.coefficients {
        if let Some(p) = &powers[*n as usize] {
            let term = p.scale(a);
            if *n > 1 {
                let ln_n = Float::with_val(prec, *n).ln();
                deriv = &deriv - &term.scale(&ln_n);
            }
            value = &value + &term;
        }
    }
    (value, deriv)
}

/// Per-node violation of the interpolation conditions: `|F(1/2 + iγ_m)|` for
/// zero nodes (where `L` vanishes), `|Im F(1/2 + ig_m)|` for Gram nodes.
pub fn node_residuals(
    f: &Approximant,
    system: &InterpolationSystem,
    ctx: &PrecisionContext,
) -> Vec<BigReal> {
    let half = ctx.ratio(1, 2);
    system
        .nodes
        .par_iter()
        .map(|x| {
            let s = BigComplex::new(half.clone(), Float::with_val(ctx.prec(), x));
            let v = evaluate(f, &s, ctx);
            match system.method {
                Method::FullZeros => v.abs(),
                Method::GramImag => v.im.abs(),
            }
        })
        .collect()
}

/// One row of an error table.
#[derive(Clone, Debug)]
pub struct ErrorRow {
    pub label: String,
    pub s: BigComplex,
    pub error: BigReal,
}

/// The twenty standard sample points, as `(label, Re s, Im s)`.
pub const STANDARD_SAMPLE_POINTS: [(&str, &str, &str); 20] = [
    ("-4 + 100i", "-4", "100"),
    ("-3 + 300i", "-3", "300"),
    ("-2 + 500i", "-2", "500"),
    ("-1 + 640i", "-1", "640"),
    ("-1/2 + 100i", "-1/2", "100"),
    ("-1/2 + 300i", "-1/2", "300"),
    ("-1/2 + 500i", "-1/2", "500"),
    ("-1/2 + 640i", "-1/2", "640"),
    ("100i", "0", "100"),
    ("300i", "0", "300"),
    ("500i", "0", "500"),
    ("640i", "0", "640"),
    ("1/2 + 100i", "1/2", "100"),
    ("1/2 + 300i", "1/2", "300"),
    ("1/2 + 500i", "1/2", "500"),
    ("1/2 + 640i", "1/2", "640"),
    ("1 + 100i", "1", "100"),
    ("2 + 300i", "2", "300"),
    ("3 + 500i", "3", "500"),
    ("4 + 640i", "4", "640"),
];

pub fn standard_points(ctx: &PrecisionContext) -> Vec<(String, BigComplex)> {
    STANDARD_SAMPLE_POINTS
        .iter()
        .map(|(label, re, im)| {
            let s = BigComplex::new(
                ctx.parse(re).expect("table entry parses"),
                ctx.parse(im).expect("table entry parses"),
            );
            (label.to_string(), s)
        })
        .collect()
}

/// `|L(s, χ) − F(s)|` at each labelled point.
pub fn error_table(
    f: &Approximant,
    chi: &RealPrimitiveCharacter,
    points: &[(String, BigComplex)],
    ctx: &PrecisionContext,
) -> Result<Vec<ErrorRow>> {
    points
        .par_iter()
        .map(|(label, s)| {
            let l = l_value(chi, s, ctx)?;
            let v = evaluate(f, s, ctx);
            Ok(ErrorRow {
                label: label.clone(),
                s: s.clone(),
                error: (&l.value - &v).abs(),
            })
        })
        .collect()
}

pub fn error_table_csv(rows: &[ErrorRow]) -> String {
    let mut out = String::from("s,re,im,abs_error\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.label,
            to_decimal(&r.s.re, 12),
            to_decimal(&r.s.im, 12),
            to_decimal(&r.error, 6)
        ));
    }
    out
}

/// Where discovery seeds come from.
pub enum Search<'a> {
    /// Validation: seed at each reference zero `1/2 + iγ_m`.
    FromReference(&'a ZeroTable),
    /// Discovery: seed at sign changes of `Re(e^{iθ(t)} F(1/2 + it))` across
    /// consecutive Gram points.
    GramIntervals(&'a GramTable),
}

#[derive(Clone, Debug)]
pub struct DiscoveredZero {
    pub label: String,
    /// Newton limit, when it converged.
    pub zero: Option<BigComplex>,
    /// Ordinate of the matched reference zero.
    pub reference: Option<(usize, BigReal)>,
    /// `zero − (1/2 + iγ_ref)`.
    pub offset: Option<BigComplex>,
    pub iterations: usize,
    pub converged: bool,
}

impl DiscoveredZero {
    /// `|offset|`, or `None` without a reference or convergence.
    pub fn offset_abs(&self) -> Option<BigReal> {
        self.offset.as_ref().map(|o| o.abs())
    }

    /// `ρ_m + a + bi`: the reference zero plus the offset.
    pub fn describe(&self) -> String {
        match (&self.offset, &self.zero) {
            (Some(o), _) => format!(
                "0 = F({} {:+.6e} {:+.6e}i)",
                self.label,
                o.re.to_f64(),
                o.im.to_f64()
            ),
            (None, Some(z)) => format!("0 = F({} + {}i)", to_decimal(&z.re, 20), to_decimal(&z.im, 20)),
            _ => format!("{}: no convergence after {} steps", self.label, self.iterations),
        }
    }
}

const NEWTON_MAX_STEPS: usize = 60;

/// Complex Newton on `F` from `seed`; converged when the step is below
/// `10^{-(digits - 25)}`.
pub fn newton_zero(f: &Approximant, seed: &BigComplex, ctx: &PrecisionContext) -> (Option<BigComplex>, usize) {
    let tol = log10_abs(&ctx.tol(25));
    let mut s = seed.with_prec(ctx.prec());
    for step in 1..=NEWTON_MAX_STEPS {
        let (v, dv) = evaluate_with_derivative(f, &s, ctx);
        if v.is_zero() {
            return (Some(s), step);
        }
        if dv.is_zero() {
            return (None, step);
        }
        let delta = &v / &dv;
        s = &s - &delta;
        let size = log10_abs(&delta.abs());
        if !size.is_finite() && size > 0.0 {
            return (None, step);
        }
        if size < tol {
            return (Some(s), step);
        }
    }
    (None, NEWTON_MAX_STEPS)
}

fn nearest_reference(reference: Option<&ZeroTable>, t: &BigReal) -> Option<(usize, BigReal)> {
    let table = reference?;
    table
        .entries
        .iter()
        .min_by(|a, b| {
            let da = Float::with_val(t.prec(), &a.value - t).abs();
            let db = Float::with_val(t.prec(), &b.value - t).abs();
            da.partial_cmp(&db).expect("finite ordinates")
        })
        .map(|e| (e.m, e.value.clone()))
}

fn offset_from(zero: &BigComplex, gamma: &BigReal, ctx: &PrecisionContext) -> BigComplex {
    let rho = BigComplex::new(ctx.ratio(1, 2), Float::with_val(ctx.prec(), gamma));
    zero - &rho
}

/// `Re(e^{iθ(t)} F(1/2 + it))`, the rotated approximant on the critical line.
fn rotated(f: &Approximant, chi: &RealPrimitiveCharacter, t: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let s = BigComplex::new(ctx.ratio(1, 2), Float::with_val(ctx.prec(), t));
    let v = &exp_i(&theta(chi, t, ctx)?, ctx) * &evaluate(f, &s, ctx);
    Ok(v.re)
}

/// Newton-refined zeros of `F`, seeded per `search`. Per-seed failures are
/// reported with `converged = false`. `reference` supplies offsets in
/// discovery mode.
pub fn discover_zeros(
    f: &Approximant,
    chi: &RealPrimitiveCharacter,
    search: Search<'_>,
    reference: Option<&ZeroTable>,
    ctx: &PrecisionContext,
) -> Result<Vec<DiscoveredZero>> {
    match search {
        Search::FromReference(table) => Ok(table
            .entries
            .par_iter()
            .map(|e| {
                let seed = BigComplex::new(ctx.ratio(1, 2), Float::with_val(ctx.prec(), &e.value));
                let (zero, iterations) = newton_zero(f, &seed, ctx);
                let offset = zero.as_ref().map(|z| offset_from(z, &e.value, ctx));
                DiscoveredZero {
                    label: format!("ρ_{}", e.m),
                    converged: zero.is_some(),
                    zero,
                    reference: Some((e.m, e.value.clone())),
                    offset,
                    iterations,
                }
            })
            .collect()),
        Search::GramIntervals(gram) => {
            let points = gram.values();
            let mut brackets = Vec::new();
            let mut prev = (points[0].clone(), rotated(f, chi, &points[0], ctx)?);
            for g in &points[1..] {
                let next = (g.clone(), rotated(f, chi, g, ctx)?);
                brackets.extend(rotated_sign_changes(f, chi, &prev, &next, ctx)?);
                prev = next;
            }
            brackets
                .par_iter()
                .enumerate()
                .map(|(i, (lo, hi))| {
                    let t = refine_root(|t| rotated(f, chi, t, ctx), lo, hi, 12, ctx)?;
                    let seed = BigComplex::new(ctx.ratio(1, 2), t.clone());
                    let (zero, iterations) = newton_zero(f, &seed, ctx);
                    let reference = zero.as_ref().and_then(|z| nearest_reference(reference, &z.im));
                    let offset = match (&zero, &reference) {
                        (Some(z), Some((_, g))) => Some(offset_from(z, g, ctx)),
                        _ => None,
                    };
                    let label = match &reference {
                        Some((m, _)) => format!("ρ_{m}"),
                        None => format!("zero #{}", i + 1),
                    };
                    Ok(DiscoveredZero {
                        label,
                        converged: zero.is_some(),
                        zero,
                        reference,
                        offset,
                        iterations,
                    })
                })
                .collect()
        }
    }
}

/// Subdivides `[a, b]` (16, 32, … up to 256 pieces) until sign changes of the
/// rotated approximant appear, when the endpoints agree in sign.
fn rotated_sign_changes(
    f: &Approximant,
    chi: &RealPrimitiveCharacter,
    a: &(BigReal, BigReal),
    b: &(BigReal, BigReal),
    ctx: &PrecisionContext,
) -> Result<Vec<(BigReal, BigReal)>> {
    if a.1.is_sign_negative() != b.1.is_sign_negative() {
        return Ok(vec![(a.0.clone(), b.0.clone())]);
    }
    let width = Float::with_val(ctx.prec(), &b.0 - &a.0);
    let mut pieces = 16u32;
    while pieces <= 256 {
        let mut found = Vec::new();
        let mut prev = a.clone();
        for j in 1..=pieces {
            let next = if j == pieces {
                b.clone()
            } else {
                let t = Float::with_val(ctx.prec(), &a.0 + Float::with_val(ctx.prec(), &width * j) / pieces);
                let v = rotated(f, chi, &t, ctx)?;
                (t, v)
            };
            if next.1.is_sign_negative() != prev.1.is_sign_negative() {
                found.push((prev.0.clone(), next.0.clone()));
            }
            prev = next;
        }
        if !found.is_empty() {
            return Ok(found);
        }
        pieces *= 2;
    }
    Ok(Vec::new())
}
