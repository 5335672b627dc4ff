//! f-projections onto the π-reversible generators and weighted information
//! centroids of a family.
//!
//! For `M` π-reversible the weighted objective `Σ_i w_i D_f(M || L_i)`
//! separates over unordered pairs `{x, y}`. Writing `a = π(x)M(x,y) =
//! π(y)M(y,x)` for the common probability flow and `β_i = π(x)L_i(x,y)`,
//! `β'_i = π(y)L_i(y,x)`, each pair contributes
//!
//! ```text
//! Φ(a) = Σ_i w_i [ β_i f(a/β_i) + β'_i f(a/β'_i) ]
//! ```
//!
//! which is convex in `a`. [`weighted_centroid_generic`] minimizes every `Φ`
//! by bisection on the sign of its right derivative;
//! [`weighted_centroid_closed`] uses the power-mean closed forms available for
//! the α family, KL and squared Hellinger.

use serde::Serialize;

use crate::divergence::{divergence, exponent_of, DivergenceSpec, ExtNonneg};
use crate::error::{Error, Result};
use crate::generator::{
    ensure_dim, is_reversible, power_mean_reversiblization, Distribution, Generator,
    GeneratorFamily, PowerExponent,
};

/// Tolerance on the simplex constraint of [`WeightVector`].
pub const WEIGHT_TOL: f64 = 1e-12;

/// A point of the probability simplex; also the finite-support prior of the
/// probabilist.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidWeights(format!("entry {i} is {v}")));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidWeights(format!("entries sum to {s}")));
        }
        Ok(Self { w })
    }

    /// Wraps a vector known to lie on the simplex up to round-off.
    pub(crate) fn from_simplex_point(w: Vec<f64>) -> Self {
        debug_assert!(w.iter().all(|v| *v >= 0.0));
        Self { w }
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(Self { w: vec![1.0 / n as f64; n] })
    }

    /// The standard unit vector `e_i`.
    pub fn unit(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        Ok(Self { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.w[i]
    }
}

/// Lower and upper endpoints of a non-unique per-edge argmin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatInterval {
    pub lower: Generator,
    pub upper: Generator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentroidResult {
    pub centroid: Generator,
    /// `D_f(centroid || L_i)` for every member.
    pub per_member_divergence: Vec<ExtNonneg>,
    /// Present for divergences whose per-edge minimizer can be an interval.
    pub flat_interval: Option<FlatInterval>,
}

impl CentroidResult {
    fn build(
        spec: &DivergenceSpec,
        centroid: Generator,
        family: &GeneratorFamily,
        pi: &Distribution,
        flat_interval: Option<FlatInterval>,
    ) -> Result<Self> {
        let per_member_divergence = family
            .iter()
            .map(|l| divergence(spec, &centroid, l, pi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { centroid, per_member_divergence, flat_interval })
    }

    /// `Σ_i w_i D_f(centroid || L_i)`.
    pub fn weighted_value(&self, w: &WeightVector) -> ExtNonneg {
        self.per_member_divergence.iter().zip(w.as_slice()).map(|(d, &wi)| *d * wi).sum()
    }
}

fn check_inputs(family: &GeneratorFamily, pi: &Distribution, w: &WeightVector) -> Result<()> {
    ensure_dim(pi.dim(), family.dim())?;
    if w.len() != family.len() {
        return Err(Error::DimensionMismatch { expected: family.len(), got: w.len() });
    }
    let supported = family.iter().zip(w.as_slice()).any(|(l, &wi)| wi > 0.0 && !l.is_zero());
    if supported {
        Ok(())
    } else {
        Err(Error::DegenerateFamily)
    }
}

/// The f-projection `argmin_{M π-reversible} D_f(M || L)`.
///
/// Closed-form specs map to a power-mean reversiblization; total variation
/// returns `P_{−∞}` as the representative of its flat argmin (see
/// [`f_projection_result`] for the full interval).
pub fn f_projection(spec: &DivergenceSpec, l: &Generator, pi: &Distribution) -> Result<Generator> {
    match (exponent_of(spec), spec) {
        (Some(p), _) => power_mean_reversiblization(l, pi, p),
        (None, DivergenceSpec::TotalVariation(_)) => {
            power_mean_reversiblization(l, pi, PowerExponent::NegInfinity)
        }
        (None, _) => {
            let family = GeneratorFamily::new(vec![l.clone()])?;
            let w = WeightVector::unit(1, 0)?;
            Ok(weighted_centroid_generic(spec, &family, pi, &w, &GenericOptions::default())?.centroid)
        }
    }
}

/// [`f_projection`] packaged with the divergence to `L` and, for total
/// variation, the argmin interval `[P_{−∞}, P_{+∞}]`.
pub fn f_projection_result(
    spec: &DivergenceSpec,
    l: &Generator,
    pi: &Distribution,
) -> Result<CentroidResult> {
    if l.is_zero() {
        ensure_dim(pi.dim(), l.dim())?;
        let zero = Generator::zeros(l.dim());
        return Ok(CentroidResult {
            centroid: zero.clone(),
            per_member_divergence: vec![ExtNonneg::ZERO],
            flat_interval: (!spec.strictly_convex())
                .then(|| FlatInterval { lower: zero.clone(), upper: zero }),
        });
    }
    let family = GeneratorFamily::new(vec![l.clone()])?;
    let centroid = f_projection(spec, l, pi)?;
    let flat = if spec.strictly_convex() {
        None
    } else {
        Some(FlatInterval {
            lower: power_mean_reversiblization(l, pi, PowerExponent::NegInfinity)?,
            upper: power_mean_reversiblization(l, pi, PowerExponent::PosInfinity)?,
        })
    };
    CentroidResult::build(spec, centroid, &family, pi, flat)
}

/// Weighted power mean of non-negative values with exponent `p`; weights of
/// the supplied terms sum to one.
fn weighted_power_mean(terms: &[(f64, f64)], p: f64) -> f64 {
    if p <= 0.0 && terms.iter().any(|&(_, m)| m == 0.0) {
        return 0.0;
    }
    if p == 0.0 {
        terms.iter().map(|&(w, m)| w * m.ln()).sum::<f64>().exp()
    } else if p == 1.0 {
        terms.iter().map(|&(w, m)| w * m).sum()
    } else {
        terms.iter().map(|&(w, m)| w * m.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Closed-form weighted f-centroid.
///
/// With `p` the spec's [closed-form exponent](DivergenceSpec::closed_form_exponent)
/// and `m_i = P_p(L_i)`, every off-diagonal entry of the centroid is the
/// weighted `p`-power mean of the `m_i` entries (the weighted geometric mean
/// when `p = 0`). Members with zero weight do not enter the mean; for
/// `p ≤ 0` a zero entry on a weighted member forces a zero centroid entry.
pub fn weighted_centroid_closed(
    spec: &DivergenceSpec,
    family: &GeneratorFamily,
    pi: &Distribution,
    w: &WeightVector,
) -> Result<CentroidResult> {
    let p = spec
        .closed_form_exponent()
        .ok_or_else(|| Error::UnsupportedSpec(format!("no closed-form centroid for {spec}")))?;
    check_inputs(family, pi, w)?;
    let exponent = PowerExponent::new(p);
    let d = pi.dim();
    let mut flows = vec![0.0; d * d];
    let mut terms = Vec::with_capacity(family.len());
    for x in 0..d {
        for y in (x + 1)..d {
            terms.clear();
            for (l, &wi) in family.iter().zip(w.as_slice()) {
                if wi > 0.0 {
                    let m = exponent.mean2(pi.get(x) * l.get(x, y), pi.get(y) * l.get(y, x));
                    terms.push((wi, m));
                }
            }
            flows[x * d + y] = weighted_power_mean(&terms, p);
        }
    }
    let centroid = Generator::from_fn(d, |x, y| {
        let a = if x < y { flows[x * d + y] } else { flows[y * d + x] };
        a / pi.get(x)
    });
    CentroidResult::build(spec, centroid, family, pi, None)
}

/// Controls for the per-edge bisection in [`weighted_centroid_generic`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenericOptions {
    /// Relative width at which a bracket is accepted.
    pub tol: f64,
    /// Bisection and bracket-doubling budget per edge.
    pub max_iter: usize,
    /// Overrides the initial upper bracket `max(β_i, β'_i) + 1`.
    pub initial_upper: Option<f64>,
}

impl Default for GenericOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200, initial_upper: None }
    }
}

/// One weighted term of `Φ` for a single unordered pair.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EdgeTerm {
    pub weight: f64,
    pub forward: f64,
    pub backward: f64,
}

/// The weighted terms of `Φ` for pair `(x, y)`, skipping zero weights.
pub(crate) fn edge_terms(
    family: &GeneratorFamily,
    pi: &Distribution,
    w: &WeightVector,
    x: usize,
    y: usize,
) -> Vec<EdgeTerm> {
    family
        .iter()
        .zip(w.as_slice())
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(l, &wi)| EdgeTerm {
            weight: wi,
            forward: pi.get(x) * l.get(x, y),
            backward: pi.get(y) * l.get(y, x),
        })
        .collect()
}

/// Initial upper bracket shared by the bisection and the grid oracle.
pub(crate) fn edge_bracket(terms: &[EdgeTerm]) -> f64 {
    terms.iter().fold(0.0f64, |m, t| m.max(t.forward).max(t.backward)) + 1.0
}

/// `Φ(a)` for one edge.
pub(crate) fn edge_objective(spec: &DivergenceSpec, terms: &[EdgeTerm], a: f64) -> f64 {
    terms
        .iter()
        .map(|t| t.weight * (spec.perspective(a, t.forward) + spec.perspective(a, t.backward)))
        .sum()
}

fn edge_right_derivative(spec: &DivergenceSpec, terms: &[EdgeTerm], a: f64) -> f64 {
    terms
        .iter()
        .map(|t| {
            t.weight
                * (spec.perspective_right_derivative(a, t.forward)
                    + spec.perspective_right_derivative(a, t.backward))
        })
        .sum()
}

/// Per-edge argmin `[lower, upper]` of `Φ` (equal endpoints when unique).
fn edge_argmin(
    spec: &DivergenceSpec,
    terms: &[EdgeTerm],
    opts: &GenericOptions,
) -> Result<(f64, f64)> {
    if terms.iter().all(|t| t.forward == 0.0 && t.backward == 0.0) {
        return Ok((0.0, 0.0));
    }
    // Any positive flow against a zero rate costs +∞ when f grows superlinearly.
    if spec.slope_at_infinity().is_infinite()
        && terms.iter().any(|t| t.forward == 0.0 || t.backward == 0.0)
    {
        return Ok((0.0, 0.0));
    }

    let deriv = |a: f64| edge_right_derivative(spec, terms, a);
    let scale = edge_bracket(terms);
    let mut hi = opts.initial_upper.unwrap_or(scale);
    let mut budget = opts.max_iter;
    while deriv(hi) <= 0.0 {
        if budget == 0 || !hi.is_finite() {
            return Err(Error::ToleranceNotReached(opts.max_iter));
        }
        hi *= 2.0;
        budget -= 1;
    }

    // Absolute resolution for minimizers at (or extremely close to) zero.
    let floor = scale * 1e-6;
    // Smallest a with Φ'_+(a) ≥ 0 (strict: > 0) within the bracket (0, hi].
    let boundary = |strict: bool| -> Result<f64> {
        let (mut lo, mut up) = (0.0f64, hi);
        for _ in 0..opts.max_iter {
            if up - lo <= opts.tol * up.max(floor) {
                return Ok(0.5 * (lo + up));
            }
            let mid = 0.5 * (lo + up);
            let g = deriv(mid);
            let inside = if strict { g > 0.0 } else { g >= 0.0 };
            if inside {
                up = mid;
            } else {
                lo = mid;
            }
        }
        if up - lo <= opts.tol * up.max(floor) {
            Ok(0.5 * (lo + up))
        } else {
            Err(Error::ToleranceNotReached(opts.max_iter))
        }
    };

    let lower = boundary(false)?;
    if spec.strictly_convex() {
        return Ok((lower, lower));
    }
    let upper = boundary(true)?;
    Ok((lower, upper.max(lower)))
}

/// Weighted f-centroid by per-edge scalar minimization.
///
/// Works for any spec. When the right derivative of `Φ` vanishes on an
/// interval (total variation) the midpoint is returned and the endpoints are
/// reported in [`CentroidResult::flat_interval`].
pub fn weighted_centroid_generic(
    spec: &DivergenceSpec,
    family: &GeneratorFamily,
    pi: &Distribution,
    w: &WeightVector,
    opts: &GenericOptions,
) -> Result<CentroidResult> {
    check_inputs(family, pi, w)?;
    let d = pi.dim();
    let mut lower = vec![0.0; d * d];
    let mut upper = vec![0.0; d * d];
    for x in 0..d {
        for y in (x + 1)..d {
            let terms = edge_terms(family, pi, w, x, y);
            let (lo, up) = edge_argmin(spec, &terms, opts)?;
            lower[x * d + y] = lo;
            upper[x * d + y] = up;
        }
    }
    let assemble = |flows: &dyn Fn(usize) -> f64| {
        Generator::from_fn(d, |x, y| {
            let k = if x < y { x * d + y } else { y * d + x };
            flows(k) / pi.get(x)
        })
    };
    let centroid = assemble(&|k| 0.5 * (lower[k] + upper[k]));
    let flat = (!spec.strictly_convex()).then(|| FlatInterval {
        lower: assemble(&|k| lower[k]),
        upper: assemble(&|k| upper[k]),
    });
    CentroidResult::build(spec, centroid, family, pi, flat)
}

/// Closed form when the spec has one, per-edge bisection otherwise.
pub fn weighted_centroid(
    spec: &DivergenceSpec,
    family: &GeneratorFamily,
    pi: &Distribution,
    w: &WeightVector,
) -> Result<CentroidResult> {
    if spec.closed_form_exponent().is_some() {
        weighted_centroid_closed(spec, family, pi, w)
    } else {
        weighted_centroid_generic(spec, family, pi, w, &GenericOptions::default())
    }
}

/// `|D_f(M||L) − D_f(M^f||L) − D_f(M||M^f)|` for π-reversible `M`, where
/// `M^f` is the f-projection of `L`.
pub fn pythagorean_residual(
    spec: &DivergenceSpec,
    m: &Generator,
    l: &Generator,
    pi: &Distribution,
) -> Result<f64> {
    if !matches!(spec, DivergenceSpec::Alpha(_)) {
        return Err(Error::UnsupportedSpec(format!("pythagorean identity needs an alpha divergence, got {spec}")));
    }
    let scale = m.as_slice().iter().fold(1.0f64, |s, v| s.max(v.abs()));
    if !is_reversible(m, pi, 1e-10 * scale)? {
        return Err(Error::InvalidParameter("M must be pi-reversible".into()));
    }
    let proj = f_projection(spec, l, pi)?;
    let full = divergence(spec, m, l, pi)?.finite()?;
    let to_proj = divergence(spec, &proj, l, pi)?.finite()?;
    let rest = divergence(spec, m, &proj, pi)?.finite()?;
    Ok((full - to_proj - rest).abs())
}
