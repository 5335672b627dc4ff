//! Markov generators on a finite state space and their structural transforms.
//!
//! A [`Generator`] stores a dense row-major rate matrix. Off-diagonal rates are
//! the only data; diagonals are always recomputed as the negative row sum of
//! the off-diagonal entries, so every constructor yields exact zero row sums.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for row sums, normalization and reversibility checks.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Largest state count accepted by [`permutation_family`].
pub const MAX_PERMUTATION_DIM: usize = 6;

/// A strictly positive probability vector on the state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates positivity and normalization (within [`DEFAULT_TOL`]).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tol(probs, DEFAULT_TOL)
    }

    pub fn with_tol(probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "entry {i} is {p}, expected a positive finite value"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self { probs })
    }

    /// Normalizes a vector of positive masses.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        Self::new(masses.iter().map(|m| m / total).collect())
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(Self { probs: vec![1.0 / dim as f64; dim] })
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn get(&self, x: usize) -> f64 {
        self.probs[x]
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

/// A Markov generator: non-negative off-diagonal rates, zero row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    dim: usize,
    rates: Vec<f64>,
}

impl Generator {
    /// The all-zeros generator.
    pub fn zeros(dim: usize) -> Self {
        Self { dim, rates: vec![0.0; dim * dim] }
    }

    /// Builds a generator from an off-diagonal rate function. The caller
    /// guarantees the rates are finite and non-negative.
    pub(crate) fn from_fn(dim: usize, mut rate: impl FnMut(usize, usize) -> f64) -> Self {
        let mut g = Self::zeros(dim);
        for x in 0..dim {
            for y in 0..dim {
                if x != y {
                    g.rates[x * dim + y] = rate(x, y);
                }
            }
        }
        g.fix_diagonal();
        g
    }

    /// Validates a dense matrix including its diagonal; see [`validate_generator`].
    pub fn from_rows(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        validate_generator(rows, tol)
    }

    /// Like [`Generator::from_rows`] but ignores whatever is on the diagonal.
    pub fn from_off_diagonal_rows(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let dim = check_square(rows)?;
        let mut g = Self::zeros(dim);
        for (x, row) in rows.iter().enumerate() {
            for (y, &v) in row.iter().enumerate() {
                if x == y {
                    continue;
                }
                g.rates[x * dim + y] = checked_rate(x, y, v, tol)?;
            }
        }
        g.fix_diagonal();
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rates[x * self.dim + y]
    }

    /// Row-major view of all entries, diagonal included.
    pub fn as_slice(&self) -> &[f64] {
        &self.rates
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rates.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// True when every off-diagonal rate is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.rates.iter().all(|&r| r == 0.0)
    }

    /// Iterator over `(x, y, rate)` for all off-diagonal positions.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let d = self.dim;
        (0..d)
            .flat_map(move |x| (0..d).map(move |y| (x, y)))
            .filter(|(x, y)| x != y)
            .map(move |(x, y)| (x, y, self.rates[x * d + y]))
    }

    /// Largest absolute entrywise difference, diagonals included.
    pub fn max_abs_diff(&self, other: &Generator) -> f64 {
        self.rates
            .iter()
            .zip(&other.rates)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Convex (or any non-negative) combination `Σ c_i G_i`.
    pub fn combination(coeffs: &[f64], members: &[Generator]) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyInput)?;
        if coeffs.len() != members.len() {
            return Err(Error::DimensionMismatch { expected: members.len(), got: coeffs.len() });
        }
        let dim = first.dim;
        let mut out = Self::zeros(dim);
        for (&c, g) in coeffs.iter().zip(members) {
            ensure_dim(dim, g.dim)?;
            if c < 0.0 {
                return Err(Error::InvalidParameter(format!("negative coefficient {c}")));
            }
            for (o, r) in out.rates.iter_mut().zip(&g.rates) {
                *o += c * r;
            }
        }
        out.fix_diagonal();
        Ok(out)
    }

    pub(crate) fn fix_diagonal(&mut self) {
        let d = self.dim;
        for x in 0..d {
            let row = &mut self.rates[x * d..(x + 1) * d];
            row[x] = 0.0;
            let s: f64 = row.iter().sum();
            row[x] = -s;
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rates.chunks(self.dim) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.6}")).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

impl Serialize for Generator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Generator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Generator::from_off_diagonal_rows(&rows, DEFAULT_TOL).map_err(serde::de::Error::custom)
    }
}

fn check_square(rows: &[Vec<f64>]) -> Result<usize> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NonSquare { rows: n, row, cols: r.len() });
        }
    }
    Ok(n)
}

fn checked_rate(x: usize, y: usize, v: f64, tol: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::NonFinite(x, y));
    }
    if v < -tol {
        return Err(Error::NegativeRate(x, y));
    }
    Ok(v.max(0.0))
}

pub(crate) fn ensure_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Checks a dense matrix and returns it as a [`Generator`].
///
/// Off-diagonals in `[-tol, 0)` are clamped to zero. Each row must sum to
/// zero within `tol` (scaled by the row's total off-diagonal rate when that
/// exceeds one); the stored diagonal is then recomputed so the row sums are
/// exactly zero.
pub fn validate_generator(rows: &[Vec<f64>], tol: f64) -> Result<Generator> {
    let dim = check_square(rows)?;
    let mut g = Generator::zeros(dim);
    for (x, row) in rows.iter().enumerate() {
        let mut abs = 0.0;
        for (y, &v) in row.iter().enumerate() {
            if x == y {
                if !v.is_finite() {
                    return Err(Error::NonFinite(x, y));
                }
                continue;
            }
            let r = checked_rate(x, y, v, tol)?;
            g.rates[x * dim + y] = r;
            abs += r;
        }
        let sum: f64 = row.iter().sum();
        if sum.abs() > tol * abs.max(1.0) {
            return Err(Error::RowSumViolation(x));
        }
    }
    g.fix_diagonal();
    Ok(g)
}

/// The π-dual: off-diagonal `(x, y)` entry is `π(y)/π(x) · L(y, x)`.
pub fn pi_dual(l: &Generator, pi: &Distribution) -> Result<Generator> {
    ensure_dim(l.dim(), pi.dim())?;
    Ok(Generator::from_fn(l.dim(), |x, y| pi.get(y) / pi.get(x) * l.get(y, x)))
}

/// Largest detailed-balance violation `|π(x)L(x,y) − π(y)L(y,x)|` over x ≠ y.
pub fn detailed_balance_residual(l: &Generator, pi: &Distribution) -> Result<f64> {
    ensure_dim(l.dim(), pi.dim())?;
    let d = l.dim();
    let mut worst = 0.0f64;
    for x in 0..d {
        for y in (x + 1)..d {
            let r = (pi.get(x) * l.get(x, y) - pi.get(y) * l.get(y, x)).abs();
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

pub fn is_reversible(l: &Generator, pi: &Distribution, tol: f64) -> Result<bool> {
    Ok(detailed_balance_residual(l, pi)? <= tol)
}

/// Exponent of a power mean, including the limiting cases `±∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerExponent {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl PowerExponent {
    pub fn new(p: f64) -> Self {
        if p == f64::INFINITY {
            Self::PosInfinity
        } else if p == f64::NEG_INFINITY {
            Self::NegInfinity
        } else {
            Self::Finite(p)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Self::NegInfinity => f64::NEG_INFINITY,
            Self::Finite(p) => p,
            Self::PosInfinity => f64::INFINITY,
        }
    }

    /// Two-point power mean with equal weights.
    pub fn mean2(self, a: f64, b: f64) -> f64 {
        if a == b {
            return a;
        }
        match self {
            Self::NegInfinity => a.min(b),
            Self::PosInfinity => a.max(b),
            Self::Finite(0.0) => (a * b).sqrt(),
            Self::Finite(p) if p < 0.0 => {
                if a == 0.0 || b == 0.0 {
                    0.0
                } else {
                    (0.5 * (a.powf(p) + b.powf(p))).powf(1.0 / p)
                }
            }
            Self::Finite(p) => (0.5 * (a.powf(p) + b.powf(p))).powf(1.0 / p),
        }
    }
}

impl FromStr for PowerExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(Self::PosInfinity),
            "-inf" | "-infinity" => Ok(Self::NegInfinity),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|p| !p.is_nan())
                .map(Self::new)
                .ok_or_else(|| Error::InvalidParameter(format!("bad power exponent `{s}`"))),
        }
    }
}

impl fmt::Display for PowerExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegInfinity => f.write_str("-inf"),
            Self::PosInfinity => f.write_str("inf"),
            Self::Finite(p) => write!(f, "{p}"),
        }
    }
}

/// Power-mean reversiblization `P_p` of `l` with respect to `pi`.
///
/// Power means are positively homogeneous, so the mean of `L(x,y)` and
/// `L_π(x,y)` equals `m/π(x)` where `m` is the mean of the two probability
/// flows `π(x)L(x,y)` and `π(y)L(y,x)`. Computing through the symmetric flow
/// keeps the output reversible to rounding.
pub fn power_mean_reversiblization(
    l: &Generator,
    pi: &Distribution,
    p: PowerExponent,
) -> Result<Generator> {
    ensure_dim(l.dim(), pi.dim())?;
    let d = l.dim();
    let mut out = Generator::zeros(d);
    for x in 0..d {
        for y in (x + 1)..d {
            let m = p.mean2(pi.get(x) * l.get(x, y), pi.get(y) * l.get(y, x));
            out.rates[x * d + y] = m / pi.get(x);
            out.rates[y * d + x] = m / pi.get(y);
        }
    }
    out.fix_diagonal();
    Ok(out)
}

/// An ordered, non-empty list of generators on one state space.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct GeneratorFamily {
    members: Vec<Generator>,
}

impl GeneratorFamily {
    pub fn new(members: Vec<Generator>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyFamily)?;
        let dim = first.dim();
        for g in &members {
            ensure_dim(dim, g.dim())?;
        }
        if members.iter().all(Generator::is_zero) {
            return Err(Error::DegenerateFamily);
        }
        Ok(Self { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn members(&self) -> &[Generator] {
        &self.members
    }

    pub fn get(&self, i: usize) -> Result<&Generator> {
        self.members.get(i).ok_or(Error::IndexOutOfRange { index: i, len: self.len() })
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Generator> {
        self.members.iter()
    }
}

impl<'a> IntoIterator for &'a GeneratorFamily {
    type Item = &'a Generator;
    type IntoIter = std::slice::Iter<'a, Generator>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// All `dim!` generators `P − I` with `P` a permutation matrix, identity first,
/// in lexicographic order of the permutations.
pub fn permutation_family(dim: usize) -> Result<GeneratorFamily> {
    if dim > MAX_PERMUTATION_DIM {
        return Err(Error::DimensionTooLarge(dim));
    }
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("permutation family needs dim >= 2, got {dim}")));
    }
    let mut perms = Vec::new();
    let mut current: Vec<usize> = (0..dim).collect();
    loop {
        perms.push(current.clone());
        if !next_permutation(&mut current) {
            break;
        }
    }
    let members = perms
        .into_iter()
        .map(|sigma| Generator::from_fn(dim, |x, y| if sigma[x] == y { 1.0 } else { 0.0 }))
        .collect();
    GeneratorFamily::new(members)
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("successor exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Scale `λ·m(m−1)/2` shared by every uniformizable basis generator.
fn uniformizable_scale(m: usize, lambda: f64) -> f64 {
    lambda * (m * (m - 1)) as f64 / 2.0
}

/// Basis of the λ-uniformizable μ-reversible generators.
///
/// Returns one generator per pair `x < y` (in lexicographic pair order) with
/// `L(x,y) = λ·m(m−1)/2` and `L(y,x) = λ·m(m−1)/2 · μ(x)/μ(y)`, followed by
/// the zero generator.
pub fn uniformizable_basis(mu: &Distribution, lambda: f64) -> Result<GeneratorFamily> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let m = mu.dim();
    if m < 2 {
        return Err(Error::InvalidParameter("uniformizable basis needs at least 2 states".into()));
    }
    let c = uniformizable_scale(m, lambda);
    let mut members = Vec::with_capacity(m * (m - 1) / 2 + 1);
    for x in 0..m {
        for y in (x + 1)..m {
            members.push(Generator::from_fn(m, |a, b| {
                if (a, b) == (x, y) {
                    c
                } else if (a, b) == (y, x) {
                    c * mu.get(x) / mu.get(y)
                } else {
                    0.0
                }
            }));
        }
    }
    members.push(Generator::zeros(m));
    GeneratorFamily::new(members)
}

/// Convex weights expressing `l` in the basis of [`uniformizable_basis`].
///
/// The last weight belongs to the zero generator. Fails when `l` is not
/// μ-reversible or not λ-uniformizable (some `|L(x,x)| > λ`).
pub fn uniformizable_weights(
    l: &Generator,
    mu: &Distribution,
    lambda: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    ensure_dim(mu.dim(), l.dim())?;
    let m = mu.dim();
    if !is_reversible(l, mu, tol)? {
        return Err(Error::InvalidParameter("generator is not reversible with respect to mu".into()));
    }
    if (0..m).any(|x| -l.get(x, x) > lambda * (1.0 + tol)) {
        return Err(Error::InvalidParameter(format!("generator is not {lambda}-uniformizable")));
    }
    let c = uniformizable_scale(m, lambda);
    let mut w = Vec::with_capacity(m * (m - 1) / 2 + 1);
    for x in 0..m {
        for y in (x + 1)..m {
            w.push(l.get(x, y) / c);
        }
    }
    let rest = 1.0 - w.iter().sum::<f64>();
    w.push(rest.max(0.0));
    Ok(w)
}
