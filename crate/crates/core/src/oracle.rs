//! Brute-force reference computations for small instances.
//!
//! Nothing here shares code with the solver beyond the objective definitions:
//! the dual is maximized by exhaustive simplex enumeration, edge minimizers by
//! a dense scan, and pure values through the closed-form projections.

use rayon::prelude::*;
use serde::Serialize;

use crate::centroid::{edge_bracket, edge_objective, edge_terms, f_projection, WeightVector};
use crate::divergence::{divergence, DivergenceSpec};
use crate::error::{Error, Result};
use crate::generator::{Distribution, Generator, GeneratorFamily};
use crate::solver::dual_objective;

/// Largest family size accepted by [`oracle_dual_max`].
pub const MAX_GRID_MEMBERS: usize = 3;

/// Grid resolution, plus an optional `[lo, hi]` range for scalar scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    resolution: f64,
    bounds: Option<(f64, f64)>,
}

impl GridSpec {
    pub fn new(resolution: f64) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidParameter(format!("resolution must be positive, got {resolution}")));
        }
        Ok(Self { resolution, bounds: None })
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
            return Err(Error::InvalidParameter(format!("invalid scan bounds [{lo}, {hi}]")));
        }
        self.bounds = Some((lo, hi));
        Ok(self)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    fn divisions(&self, span: f64) -> usize {
        ((span / self.resolution).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualMax {
    pub weights: WeightVector,
    pub value: f64,
    pub grid_points: usize,
}

/// Barycentric grid points `k/K` of the simplex, in lexicographic order.
fn simplex_grid(n: usize, k: usize) -> Vec<Vec<f64>> {
    let kf = k as f64;
    match n {
        1 => vec![vec![1.0]],
        2 => (0..=k).map(|i| vec![i as f64 / kf, (k - i) as f64 / kf]).collect(),
        _ => (0..=k)
            .flat_map(|i| {
                (0..=k - i).map(move |j| vec![i as f64 / kf, j as f64 / kf, (k - i - j) as f64 / kf])
            })
            .collect(),
    }
}

/// Maximizes the dual over a simplex grid with step `grid.resolution()`.
///
/// Ties go to the earliest grid point. Points where the centroid is
/// degenerate are skipped.
pub fn oracle_dual_max(
    spec: &DivergenceSpec,
    family: &GeneratorFamily,
    pi: &Distribution,
    grid: &GridSpec,
) -> Result<DualMax> {
    let n = family.len();
    if n > MAX_GRID_MEMBERS {
        return Err(Error::TooManyMembers(n));
    }
    let points = simplex_grid(n, grid.divisions(1.0));
    let values: Vec<Option<f64>> = points
        .par_iter()
        .map(|w| {
            let w = WeightVector::from_simplex_point(w.clone());
            match dual_objective(spec, family, pi, &w) {
                Ok(s) => Ok(Some(s.dual_value)),
                Err(Error::DegenerateFamily) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    let (i, value) = best.ok_or(Error::DegenerateFamily)?;
    Ok(DualMax {
        weights: WeightVector::from_simplex_point(points[i].clone()),
        value,
        grid_points: points.len(),
    })
}

/// Grid minimizers of `Φ` per edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeScan {
    /// First grid point attaining the minimum on each edge.
    pub argmin: Generator,
    /// Smallest and largest grid points within round-off of the minimum.
    pub plateau_lower: Generator,
    pub plateau_upper: Generator,
}

/// Scans `a ↦ Φ(a)` on each unordered pair over `[0, max β + 1]` (or
/// `grid.bounds()`) and assembles the grid minimizers.
pub fn oracle_edge_scan(
    spec: &DivergenceSpec,
    family: &GeneratorFamily,
    pi: &Distribution,
    w: &WeightVector,
    grid: &GridSpec,
) -> Result<EdgeScan> {
    crate::generator::ensure_dim(family.dim(), pi.dim())?;
    crate::generator::ensure_dim(family.len(), w.len())?;
    let d = pi.dim();
    let mut arg = vec![0.0; d * d];
    let mut lower = vec![0.0; d * d];
    let mut upper = vec![0.0; d * d];
    for x in 0..d {
        for y in (x + 1)..d {
            let terms = edge_terms(family, pi, w, x, y);
            let (lo, hi) = grid.bounds().unwrap_or((0.0, edge_bracket(&terms)));
            let k = grid.divisions(hi - lo);
            let step = (hi - lo) / k as f64;
            let values: Vec<f64> = (0..=k)
                .into_par_iter()
                .map(|i| edge_objective(spec, &terms, lo + i as f64 * step))
                .collect();
            let (imin, vmin) = values
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
            let slack = 1e-12 * vmin.abs().max(1.0);
            let first = values.iter().position(|&v| v <= vmin + slack).unwrap_or(imin);
            let last = values.iter().rposition(|&v| v <= vmin + slack).unwrap_or(imin);
            let at = |i: usize| lo + i as f64 * step;
            arg[x * d + y] = at(imin);
            lower[x * d + y] = at(first);
            upper[x * d + y] = at(last);
        }
    }
    let assemble = |flows: &[f64]| {
        Generator::from_fn(d, |x, y| {
            let k = if x < y { x * d + y } else { y * d + x };
            flows[k] / pi.get(x)
        })
    };
    Ok(EdgeScan { argmin: assemble(&arg), plateau_lower: assemble(&lower), plateau_upper: assemble(&upper) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureValues {
    /// `max_i D_f(M^f(L_i, π) || L_i)`.
    pub v_underline: f64,
    pub per_index: Vec<f64>,
}

/// Maximin value of the pure-strategy game.
pub fn oracle_pure_values(
    spec: &DivergenceSpec,
    family: &GeneratorFamily,
    pi: &Distribution,
) -> Result<PureValues> {
    if !spec.strictly_convex() {
        return Err(Error::UnsupportedSpec(format!("pure values need a strictly convex f, got {spec}")));
    }
    let per_index = family
        .iter()
        .map(|l| divergence(spec, &f_projection(spec, l, pi)?, l, pi)?.finite())
        .collect::<Result<Vec<_>>>()?;
    let v_underline = per_index.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PureValues { v_underline, per_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centroid::{weighted_centroid_generic, GenericOptions};
    use crate::divergence::TvScale;
    use crate::generator::{pi_dual, power_mean_reversiblization, PowerExponent, DEFAULT_TOL};

    fn two_state() -> (GeneratorFamily, Distribution) {
        let pi = Distribution::uniform(2).unwrap();
        let l = Generator::from_rows(&[vec![-1.0, 1.0], vec![3.0, -3.0]], DEFAULT_TOL).unwrap();
        let dual = pi_dual(&l, &pi).unwrap();
        (GeneratorFamily::new(vec![l, dual]).unwrap(), pi)
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(simplex_grid(2, 10).len(), 11);
        assert_eq!(simplex_grid(3, 10).len(), 66);
        for p in simplex_grid(3, 7) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn flat_dual_picks_first_point() {
        let (family, pi) = two_state();
        let spec = DivergenceSpec::Kl;
        let grid = GridSpec::new(0.1).unwrap();
        let r = oracle_dual_max(&spec, &family, &pi, &grid).unwrap();
        assert_eq!(r.weights.as_slice(), &[0.0, 1.0]);
        let l = &family.members()[0];
        let d = divergence(&spec, &f_projection(&spec, l, &pi).unwrap(), l, &pi).unwrap().value();
        assert!((r.value - d).abs() < 1e-12);
    }

    #[test]
    fn too_many_members() {
        let pi = Distribution::uniform(2).unwrap();
        let l = Generator::from_rows(&[vec![-1.0, 1.0], vec![3.0, -3.0]], DEFAULT_TOL).unwrap();
        let family = GeneratorFamily::new(vec![l; 4]).unwrap();
        let err = oracle_dual_max(&DivergenceSpec::Kl, &family, &pi, &GridSpec::new(0.1).unwrap());
        assert_eq!(err.unwrap_err(), Error::TooManyMembers(4));
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(0.0).is_err());
        assert!(GridSpec::new(f64::NAN).is_err());
        assert!(GridSpec::new(0.1).unwrap().with_bounds(2.0, 1.0).is_err());
    }

    #[test]
    fn edge_scan_matches_bisection() {
        let (family, pi) = two_state();
        let w = WeightVector::new(vec![0.4, 0.6]).unwrap();
        let grid = GridSpec::new(1e-5).unwrap();
        for spec in [DivergenceSpec::Kl, DivergenceSpec::Alpha(2.0), DivergenceSpec::SquaredHellinger] {
            let scan = oracle_edge_scan(&spec, &family, &pi, &w, &grid).unwrap();
            let gen = weighted_centroid_generic(&spec, &family, &pi, &w, &GenericOptions::default()).unwrap();
            assert!(scan.argmin.max_abs_diff(&gen.centroid) < 1e-4, "{spec}");
        }
    }

    #[test]
    fn tv_plateau_brackets_flat_interval() {
        let (family, pi) = two_state();
        let spec = DivergenceSpec::TotalVariation(TvScale::One);
        let w = WeightVector::new(vec![0.5, 0.5]).unwrap();
        let scan = oracle_edge_scan(&spec, &family, &pi, &w, &GridSpec::new(1e-4).unwrap()).unwrap();
        let l = &family.members()[0];
        let lo = power_mean_reversiblization(l, &pi, PowerExponent::NegInfinity).unwrap();
        let hi = power_mean_reversiblization(l, &pi, PowerExponent::PosInfinity).unwrap();
        assert!(scan.plateau_lower.max_abs_diff(&lo) < 2e-4);
        assert!(scan.plateau_upper.max_abs_diff(&hi) < 2e-4);
    }

    #[test]
    fn pure_values_of_bisection_family() {
        let (family, pi) = two_state();
        let r = oracle_pure_values(&DivergenceSpec::Alpha(2.0), &family, &pi).unwrap();
        assert!((r.per_index[0] - r.per_index[1]).abs() < 1e-12);
        assert_eq!(r.v_underline, r.per_index[0].max(r.per_index[1]));
        let tv = oracle_pure_values(&DivergenceSpec::TotalVariation(TvScale::One), &family, &pi);
        assert!(matches!(tv, Err(Error::UnsupportedSpec(_))));
    }
}
