//! f-divergences between Markov generators.
//!
//! `D_f(M || L) = Σ_x π(x) Σ_{y≠x} L(x,y) f(M(x,y) / L(x,y))`.
//!
//! Zero rates follow the perspective-function limits: a term with
//! `L(x,y) = M(x,y) = 0` contributes nothing, and a term with `L(x,y) = 0 <
//! M(x,y)` contributes `M(x,y) · lim_{t→∞} f(t)/t`, which is `+∞` for KL and
//! for α > 1. With this rule `D_f(M||L) = D_{f*}(L||M)` holds for every pair,
//! and the per-edge minimizers agree with the power-mean closed forms.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{ensure_dim, Distribution, Generator, PowerExponent};

/// A non-negative real number or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct ExtNonneg(f64);

impl ExtNonneg {
    pub const ZERO: Self = Self(0.0);
    pub const INFINITY: Self = Self(f64::INFINITY);

    /// Returns `None` for negative or NaN inputs.
    pub fn new(value: f64) -> Option<Self> {
        (value >= 0.0).then_some(Self(value))
    }

    /// Clamps tiny negative round-off to zero; NaN becomes `+∞`.
    pub(crate) fn clamped(value: f64) -> Self {
        if value.is_nan() {
            Self::INFINITY
        } else {
            Self(value.max(0.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// The finite value, or [`Error::InfiniteDivergence`].
    pub fn finite(self) -> Result<f64> {
        if self.is_finite() {
            Ok(self.0)
        } else {
            Err(Error::InfiniteDivergence)
        }
    }
}

impl Add for ExtNonneg {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Mul<f64> for ExtNonneg {
    type Output = Self;

    /// Scaling by a non-negative factor; `0 · ∞ = 0`.
    fn mul(self, k: f64) -> Self {
        if k == 0.0 {
            Self::ZERO
        } else {
            Self(self.0 * k)
        }
    }
}

impl Sum for ExtNonneg {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, Add::add)
    }
}

impl fmt::Display for ExtNonneg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "{}", self.0)
        } else {
            f.write_str("inf")
        }
    }
}

impl Serialize for ExtNonneg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

/// Scaling of the total-variation generator `f(t) = s·|t − 1|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TvScale {
    One,
    Half,
}

impl TvScale {
    pub fn value(self) -> f64 {
        match self {
            TvScale::One => 1.0,
            TvScale::Half => 0.5,
        }
    }
}

/// A convex `f` with `f(1) = 0` selecting a divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceSpec {
    /// `f(t) = (t^α − αt − (1−α)) / (α(α−1))`, α ∉ {0, 1}.
    Alpha(f64),
    /// `f(t) = t ln t − t + 1`.
    Kl,
    /// `f(t) = −ln t + t − 1`, the conjugate of [`DivergenceSpec::Kl`].
    ReverseKl,
    /// `f(t) = (√t − 1)²`.
    SquaredHellinger,
    /// `f(t) = s·|t − 1|`.
    TotalVariation(TvScale),
}

impl DivergenceSpec {
    pub fn alpha(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha == 0.0 || alpha == 1.0 {
            return Err(Error::InvalidDivergence(format!("alpha must be finite and not 0 or 1, got {alpha}")));
        }
        Ok(Self::Alpha(alpha))
    }

    /// The χ²-type member of the α family (α = 2), `f(t) = (t − 1)²/2`.
    pub fn chi_squared() -> Self {
        Self::Alpha(2.0)
    }

    /// `f(t)` for `t ≥ 0`.
    pub fn eval_f(&self, t: f64) -> Result<ExtNonneg> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::NegativeArgument(t));
        }
        Ok(ExtNonneg::clamped(self.f(t)))
    }

    /// Raw `f(t)`, `t ≥ 0`, possibly `+∞` at zero.
    pub(crate) fn f(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.f_at_0().value();
        }
        if t == f64::INFINITY {
            return f64::INFINITY;
        }
        match *self {
            Self::Alpha(a) => (t.powf(a) - a * t - (1.0 - a)) / (a * (a - 1.0)),
            Self::Kl => t * t.ln() - t + 1.0,
            Self::ReverseKl => -t.ln() + t - 1.0,
            Self::SquaredHellinger => {
                let r = t.sqrt() - 1.0;
                r * r
            }
            Self::TotalVariation(s) => s.value() * (t - 1.0).abs(),
        }
    }

    /// `f(0)`, the limit from the right.
    pub fn f_at_0(&self) -> ExtNonneg {
        match *self {
            Self::Alpha(a) if a > 0.0 => ExtNonneg(1.0 / a),
            Self::Alpha(_) | Self::ReverseKl => ExtNonneg::INFINITY,
            Self::Kl | Self::SquaredHellinger => ExtNonneg(1.0),
            Self::TotalVariation(s) => ExtNonneg(s.value()),
        }
    }

    /// `lim_{t→∞} f(t)/t`, which equals `f*(0)`.
    pub fn slope_at_infinity(&self) -> f64 {
        match *self {
            Self::Alpha(a) if a > 1.0 => f64::INFINITY,
            Self::Alpha(a) => 1.0 / (1.0 - a),
            Self::Kl => f64::INFINITY,
            Self::ReverseKl | Self::SquaredHellinger => 1.0,
            Self::TotalVariation(s) => s.value(),
        }
    }

    /// Right derivative `f'_+(t)` for `t ≥ 0`; may be `−∞` at zero.
    pub fn f_right_derivative(&self, t: f64) -> f64 {
        match *self {
            Self::Alpha(a) => {
                if t == 0.0 {
                    if a < 1.0 {
                        f64::NEG_INFINITY
                    } else {
                        -1.0 / (a - 1.0)
                    }
                } else {
                    (t.powf(a - 1.0) - 1.0) / (a - 1.0)
                }
            }
            Self::Kl => t.ln(),
            Self::ReverseKl => 1.0 - 1.0 / t,
            Self::SquaredHellinger => 1.0 - 1.0 / t.sqrt(),
            Self::TotalVariation(s) => {
                if t < 1.0 {
                    -s.value()
                } else {
                    s.value()
                }
            }
        }
    }

    pub fn strictly_convex(&self) -> bool {
        !matches!(self, Self::TotalVariation(_))
    }

    /// The spec of `f*(t) = t f(1/t)`.
    pub fn conjugate(&self) -> Self {
        match *self {
            Self::Alpha(a) => Self::Alpha(1.0 - a),
            Self::Kl => Self::ReverseKl,
            Self::ReverseKl => Self::Kl,
            Self::SquaredHellinger => Self::SquaredHellinger,
            Self::TotalVariation(s) => Self::TotalVariation(s),
        }
    }

    /// Exponent `p` such that the f-projection is the `P_p` reversiblization
    /// and weighted centroids are entrywise weighted `p`-power means of the
    /// members' projections. `None` for specs without a closed form.
    pub fn closed_form_exponent(&self) -> Option<f64> {
        match *self {
            Self::Alpha(a) => Some(1.0 - a),
            Self::Kl => Some(0.0),
            Self::ReverseKl => Some(1.0),
            Self::SquaredHellinger => Some(0.5),
            Self::TotalVariation(_) => None,
        }
    }

    /// `L·f(M/L)` with the zero-rate limits described in the module docs.
    #[inline]
    pub(crate) fn perspective(&self, m: f64, l: f64) -> f64 {
        if l > 0.0 {
            l * self.f(m / l)
        } else if m > 0.0 {
            m * self.slope_at_infinity()
        } else {
            0.0
        }
    }

    /// Right derivative in `m` of [`Self::perspective`].
    #[inline]
    pub(crate) fn perspective_right_derivative(&self, m: f64, l: f64) -> f64 {
        if l > 0.0 {
            self.f_right_derivative(m / l)
        } else {
            self.slope_at_infinity()
        }
    }
}

impl fmt::Display for DivergenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Alpha(a) => write!(f, "alpha:{a}"),
            Self::Kl => f.write_str("kl"),
            Self::ReverseKl => f.write_str("rkl"),
            Self::SquaredHellinger => f.write_str("hellinger2"),
            Self::TotalVariation(TvScale::One) => f.write_str("tv"),
            Self::TotalVariation(TvScale::Half) => f.write_str("tv-half"),
        }
    }
}

impl FromStr for DivergenceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "kl" => Ok(Self::Kl),
            "rkl" => Ok(Self::ReverseKl),
            "hellinger2" => Ok(Self::SquaredHellinger),
            "tv" => Ok(Self::TotalVariation(TvScale::One)),
            "tv-half" => Ok(Self::TotalVariation(TvScale::Half)),
            "chi2" => Ok(Self::chi_squared()),
            other => match other.strip_prefix("alpha:") {
                Some(v) => {
                    let a = v
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidDivergence(format!("bad alpha value `{v}`")))?;
                    Self::alpha(a)
                }
                None => Err(Error::InvalidDivergence(format!("unknown divergence `{s}`"))),
            },
        }
    }
}

impl Serialize for DivergenceSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DivergenceSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `D_f(M || L)` with respect to `pi`.
pub fn divergence(
    spec: &DivergenceSpec,
    m: &Generator,
    l: &Generator,
    pi: &Distribution,
) -> Result<ExtNonneg> {
    ensure_dim(pi.dim(), m.dim())?;
    ensure_dim(pi.dim(), l.dim())?;
    let d = pi.dim();
    let mut total = 0.0;
    for x in 0..d {
        let mut row = 0.0;
        for y in 0..d {
            if x != y {
                row += spec.perspective(m.get(x, y), l.get(x, y));
            }
        }
        total += pi.get(x) * row;
    }
    Ok(ExtNonneg::clamped(total))
}

/// `|D_f(M||L) − D_{f*}(L||M)|`; both sides must be finite.
pub fn conjugate_duality_check(
    spec: &DivergenceSpec,
    m: &Generator,
    l: &Generator,
    pi: &Distribution,
) -> Result<f64> {
    let forward = divergence(spec, m, l, pi)?.finite()?;
    let backward = divergence(&spec.conjugate(), l, m, pi)?.finite()?;
    Ok((forward - backward).abs())
}

/// Convenience for [`PowerExponent`] built from a closed-form exponent.
pub(crate) fn exponent_of(spec: &DivergenceSpec) -> Option<PowerExponent> {
    spec.closed_form_exponent().map(PowerExponent::new)
}
