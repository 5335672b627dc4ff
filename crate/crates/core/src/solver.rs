//! The game layer: Lagrangian dual over the simplex, the projected
//! subgradient loop for the mixed-strategy equilibrium, and Chebyshev-center
//! diagnostics.
//!
//! The dual function is `w ↦ Σ_i w_i D_f(M_w || L_i)` where `M_w` is the
//! `w`-weighted centroid. Its negation `h` is convex, and
//! `g_i = D_f(M_v || L_ref) − D_f(M_v || L_i)` is a subgradient of `h` at `v`
//! for any reference index.

use serde::Serialize;

use crate::centroid::{f_projection, weighted_centroid, CentroidResult, WeightVector};
use crate::divergence::{divergence, DivergenceSpec, TvScale};
use crate::error::{Error, Result};
use crate::generator::{Distribution, Generator, GeneratorFamily};

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn simplex_project(v: &[f64]) -> Result<WeightVector> {
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidWeights("non-finite entry".into()));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    let mut w: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    // Absorb round-off so the result sums to one.
    let s: f64 = w.iter().sum();
    if s > 0.0 && s != 1.0 {
        w.iter_mut().for_each(|x| *x /= s);
    }
    Ok(WeightVector::from_simplex_point(w))
}

/// Dual and primal values of the Chebyshev-center problem at one weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualObjectiveState {
    pub weights: WeightVector,
    pub centroid: CentroidResult,
    /// `Σ_i w_i D_f(centroid || L_i)`, the negation of `h(w)`.
    pub dual_value: f64,
    /// `max_i D_f(centroid || L_i)`.
    pub primal_value: f64,
    pub gap: f64,
}

impl DualObjectiveState {
    pub fn divergences(&self) -> Vec<f64> {
        self.centroid.per_member_divergence.iter().map(|d| d.value()).collect()
    }
}

pub fn dual_objective(
    spec: &DivergenceSpec,
    family: &GeneratorFamily,
    pi: &Distribution,
    w: &WeightVector,
) -> Result<DualObjectiveState> {
    let centroid = weighted_centroid(spec, family, pi, w)?;
    let dual_value = centroid.weighted_value(w).finite()?;
    let primal_value = centroid
        .per_member_divergence
        .iter()
        .map(|d| d.finite())
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(DualObjectiveState {
        weights: w.clone(),
        centroid,
        dual_value,
        primal_value,
        gap: primal_value - dual_value,
    })
}

fn subgradient_from(divs: &[f64], ref_index: usize) -> Vec<f64> {
    let r = divs[ref_index];
    divs.iter().map(|d| r - d).collect()
}

/// Subgradient of `h` at `v`; `ref_index` defaults to the last member.
pub fn subgradient(
    spec: &DivergenceSpec,
    family: &GeneratorFamily,
    pi: &Distribution,
    v: &WeightVector,
    ref_index: Option<usize>,
) -> Result<Vec<f64>> {
    let r = resolve_ref(ref_index, family.len())?;
    let state = dual_objective(spec, family, pi, v)?;
    let divs = finite_divergences(&state, 0)?;
    Ok(subgradient_from(&divs, r))
}

fn resolve_ref(ref_index: Option<usize>, n: usize) -> Result<usize> {
    let r = ref_index.unwrap_or(n - 1);
    if r >= n {
        return Err(Error::IndexOutOfRange { index: r, len: n });
    }
    Ok(r)
}

fn finite_divergences(state: &DualObjectiveState, iteration: usize) -> Result<Vec<f64>> {
    state
        .centroid
        .per_member_divergence
        .iter()
        .map(|d| d.finite().map_err(|_| Error::NonFiniteIterate(iteration)))
        .collect()
}

/// Default multiplier in [`estimate_b`].
pub const DEFAULT_B_SAFETY: f64 = 4.0;

/// Empirical bound on `‖g‖²`: `safety · n · (max_i D_f(M_{w0} || L_i))²`.
pub fn estimate_b(
    spec: &DivergenceSpec,
    family: &GeneratorFamily,
    pi: &Distribution,
    w0: &WeightVector,
    safety: f64,
) -> Result<f64> {
    let state = dual_objective(spec, family, pi, w0)?;
    Ok(b_from_state(&state, safety))
}

fn b_from_state(state: &DualObjectiveState, safety: f64) -> f64 {
    let n = state.weights.len() as f64;
    safety * n * state.primal_value * state.primal_value
}

/// Stepsize `√(n / (t·B))`.
pub fn auto_stepsize(n: usize, t: usize, b: f64) -> f64 {
    (n as f64 / (t as f64 * b)).sqrt()
}

/// Parameters of [`solve_game`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Number of iterations `t`.
    pub iters: usize,
    /// Constant stepsize; `None` derives `√(n/(tB̂))` and re-derives it
    /// whenever `B̂` is doubled.
    pub eta: Option<f64>,
    /// Starting weights; uniform when `None`.
    pub w0: Option<WeightVector>,
    /// Reference member of the subgradient; last member when `None`.
    pub ref_index: Option<usize>,
    /// Record a trace row every `trace_every` iterations (0 disables).
    pub trace_every: usize,
    /// Stop once the gap at the averaged iterate drops to this value.
    pub epsilon: Option<f64>,
    pub b_safety: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            iters: 1000,
            eta: None,
            w0: None,
            ref_index: None,
            trace_every: 1,
            epsilon: None,
            b_safety: DEFAULT_B_SAFETY,
        }
    }
}

impl SolveOptions {
    pub fn with_iters(iters: usize) -> Self {
        Self { iters, ..Self::default() }
    }
}

/// One row of the convergence trace, evaluated at the running average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub dual: f64,
    pub primal: f64,
    pub gap: f64,
}

/// Outcome of the projected subgradient run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    /// Average of the iterates `w^(1..t)`.
    pub weights_avg: WeightVector,
    /// Last iterate `w^(t)`.
    pub weights_last: WeightVector,
    /// Centroid at the averaged weights.
    pub centroid: Generator,
    /// Dual value at the averaged weights (the game value estimate).
    pub value: f64,
    /// Largest member divergence from the centroid.
    pub chebyshev_radius: f64,
    pub gap: f64,
    /// Gap at the starting weights.
    pub initial_gap: f64,
    pub divergences: Vec<f64>,
    /// `D_f(centroid || L_i) − chebyshev_radius`.
    pub slackness: Vec<f64>,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    /// Stepsize in effect at the end of the run.
    pub stepsize: f64,
    /// Final bound on `‖g‖²` after any doublings.
    pub b_estimate: f64,
    /// Number of times `B̂` was doubled.
    pub b_doublings: usize,
    /// Largest `‖g‖²` seen along the run.
    pub max_subgradient_sq: f64,
}

impl EquilibriumReport {
    /// `h(w̄) = −value`.
    pub fn h(&self) -> f64 {
        -self.value
    }

    fn from_state(
        state: DualObjectiveState,
        weights_last: WeightVector,
        initial_gap: f64,
        run: RunStats,
    ) -> Self {
        let divergences = state.divergences();
        let slackness = divergences.iter().map(|d| d - state.primal_value).collect();
        Self {
            weights_avg: state.weights,
            weights_last,
            centroid: state.centroid.centroid,
            value: state.dual_value,
            chebyshev_radius: state.primal_value,
            gap: state.gap,
            initial_gap,
            divergences,
            slackness,
            iterations: run.iterations,
            trace: run.trace,
            stepsize: run.stepsize,
            b_estimate: run.b,
            b_doublings: run.doublings,
            max_subgradient_sq: run.max_g_sq,
        }
    }
}

struct RunStats {
    iterations: usize,
    trace: Vec<TraceRow>,
    stepsize: f64,
    b: f64,
    doublings: usize,
    max_g_sq: f64,
}

fn trace_row(iteration: usize, s: &DualObjectiveState) -> TraceRow {
    TraceRow { iteration, dual: s.dual_value, primal: s.primal_value, gap: s.gap }
}

/// Projected subgradient ascent on the dual over the simplex.
///
/// Each iteration computes the centroid at `w^(i−1)`, takes
/// `v = w^(i−1) − η g(w^(i−1))` and projects back onto the simplex. The report
/// is evaluated at the average of `w^(1), …, w^(t)`.
pub fn solve_game(
    spec: &DivergenceSpec,
    family: &GeneratorFamily,
    pi: &Distribution,
    opts: &SolveOptions,
) -> Result<EquilibriumReport> {
    let n = family.len();
    if opts.iters == 0 {
        return Err(Error::InvalidParameter("iteration count must be at least 1".into()));
    }
    let w0 = match &opts.w0 {
        Some(w) if w.len() != n => {
            return Err(Error::DimensionMismatch { expected: n, got: w.len() })
        }
        Some(w) => w.clone(),
        None => WeightVector::uniform(n)?,
    };
    let r = resolve_ref(opts.ref_index, n)?;
    if let Some(eta) = opts.eta {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParameter(format!("stepsize must be positive, got {eta}")));
        }
    }

    let start = dual_objective(spec, family, pi, &w0)?;
    finite_divergences(&start, 0)?;
    let initial_gap = start.gap;
    let mut b = b_from_state(&start, opts.b_safety);
    let idle = RunStats { iterations: 0, trace: Vec::new(), stepsize: 0.0, b, doublings: 0, max_g_sq: 0.0 };
    if n == 1 || b == 0.0 {
        // Nothing to move: one strategy, or every divergence is already zero.
        let mut run = idle;
        if opts.trace_every > 0 {
            run.trace.push(trace_row(0, &start));
        }
        return Ok(EquilibriumReport::from_state(start, w0, initial_gap, run));
    }

    let t = opts.iters;
    let mut eta = opts.eta.unwrap_or_else(|| auto_stepsize(n, t, b));
    let mut w = w0;
    let mut state = start;
    let mut sum = vec![0.0; n];
    let mut trace = Vec::new();
    let mut doublings = 0;
    let mut max_g_sq = 0.0f64;
    let mut done = 0;

    for i in 1..=t {
        let divs = finite_divergences(&state, i)?;
        let g = subgradient_from(&divs, r);
        let g_sq: f64 = g.iter().map(|x| x * x).sum();
        max_g_sq = max_g_sq.max(g_sq);
        while g_sq > b {
            b *= 2.0;
            doublings += 1;
            if opts.eta.is_none() {
                eta = auto_stepsize(n, t, b);
            }
        }
        let v: Vec<f64> = w.as_slice().iter().zip(&g).map(|(wi, gi)| wi - eta * gi).collect();
        w = simplex_project(&v)?;
        for (s, wi) in sum.iter_mut().zip(w.as_slice()) {
            *s += wi;
        }
        done = i;

        let record = opts.trace_every > 0 && (i % opts.trace_every == 0 || i == t);
        if record || opts.epsilon.is_some() {
            let avg = averaged(&sum, i);
            let s = dual_objective(spec, family, pi, &avg)?;
            if record {
                trace.push(trace_row(i, &s));
            }
            if opts.epsilon.is_some_and(|eps| s.gap <= eps) {
                break;
            }
        }
        if i < t {
            state = dual_objective(spec, family, pi, &w)?;
        }
    }

    let avg = averaged(&sum, done);
    let final_state = dual_objective(spec, family, pi, &avg)?;
    finite_divergences(&final_state, done)?;
    let run = RunStats { iterations: done, trace, stepsize: eta, b, doublings, max_g_sq };
    Ok(EquilibriumReport::from_state(final_state, w, initial_gap, run))
}

fn averaged(sum: &[f64], count: usize) -> WeightVector {
    let mut avg: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
    let total: f64 = avg.iter().sum();
    avg.iter_mut().for_each(|x| *x /= total);
    WeightVector::from_simplex_point(avg)
}

/// Checks `h(w̄) − h* ≤ n/(2ηt) + ηB/2` (plus `1e-9` slack).
pub fn regret_check(report: &EquilibriumReport, b: f64, eta: f64, n: usize, t: usize, h_star: f64) -> bool {
    report.h() - h_star <= regret_bound(b, eta, n, t) + 1e-9
}

/// `n/(2ηt) + ηB/2`.
pub fn regret_bound(b: f64, eta: f64, n: usize, t: usize) -> f64 {
    n as f64 / (2.0 * eta * t as f64) + eta * b / 2.0
}

/// Chebyshev radius of a converged run.
pub fn chebyshev_radius(report: &EquilibriumReport, epsilon: f64) -> Result<f64> {
    if report.gap > epsilon {
        return Err(Error::NotConverged { gap: report.gap, tol: epsilon });
    }
    Ok(report.chebyshev_radius)
}

/// Default tolerance on `v̄ − v̲` in [`pure_nash_check`].
pub const PURE_NASH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureNashOutcome {
    pub exists: bool,
    /// `(M^f(L_l, π), l)` when a saddle point exists.
    pub saddle: Option<(Generator, usize)>,
    /// Every index whose self-projection value is within tolerance of the max.
    pub maximizers: Vec<usize>,
    /// Maximin value `max_i D_f(M^f(L_i,π) || L_i)`.
    pub maximin: f64,
    /// Best certified upper bound on the minimax value.
    pub minimax: f64,
    pub per_index: Vec<f64>,
}

/// Decides whether the pure-strategy game has a saddle point.
///
/// The maximin value is `v̲ = max_i D_f(M^f(L_i) || L_i)`. The minimax value
/// `v̄` is bounded above both by the primal value of a [`solve_game`] run and
/// by `max_j D_f(M^f(L_l) || L_j)` for each maximizer `l`; the smaller bound is
/// used, and a saddle point exists iff `v̄ − v̲ ≤ tol`.
pub fn pure_nash_check(
    spec: &DivergenceSpec,
    family: &GeneratorFamily,
    pi: &Distribution,
    tol: f64,
    solve: &SolveOptions,
) -> Result<PureNashOutcome> {
    if !spec.strictly_convex() {
        return Err(Error::UnsupportedSpec(format!("pure Nash check needs a strictly convex f, got {spec}")));
    }
    let projections = family
        .iter()
        .map(|l| f_projection(spec, l, pi))
        .collect::<Result<Vec<_>>>()?;
    let per_index = family
        .iter()
        .zip(&projections)
        .map(|(l, m)| divergence(spec, m, l, pi)?.finite())
        .collect::<Result<Vec<_>>>()?;
    let maximin = per_index.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let maximizers: Vec<usize> =
        (0..family.len()).filter(|&i| per_index[i] >= maximin - tol).collect();

    let mut minimax = f64::INFINITY;
    let mut best = None;
    for &l in &maximizers {
        let radius = family
            .iter()
            .map(|g| divergence(spec, &projections[l], g, pi).and_then(|d| d.finite()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if radius < minimax {
            minimax = radius;
            best = Some(l);
        }
    }
    if family.len() > 1 {
        let report = solve_game(spec, family, pi, solve)?;
        minimax = minimax.min(report.chebyshev_radius);
    }
    let exists = minimax - maximin <= tol;
    let saddle = if exists {
        best.map(|l| (projections[l].clone(), l))
    } else {
        None
    };
    Ok(PureNashOutcome { exists, saddle, maximizers, maximin, minimax, per_index })
}

/// Rejects members that are not `P − I` with `P` stochastic and zero-diagonal.
pub fn check_jump_class(family: &GeneratorFamily, tol: f64) -> Result<()> {
    for (i, l) in family.iter().enumerate() {
        for x in 0..l.dim() {
            if (l.get(x, x) + 1.0).abs() > tol {
                return Err(Error::ClassViolation(i));
            }
        }
    }
    Ok(())
}

/// Total-variation distance from the centroid after `t` iterations to a
/// reference centroid, for each requested `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateProbe {
    pub reference_iters: usize,
    pub reference_weights: WeightVector,
    pub points: Vec<(usize, f64)>,
    /// `(i, gap)` rows of the longest probed run.
    pub gap_trace: Vec<(usize, f64)>,
}

/// Measures how fast the centroid at the averaged weights approaches the
/// centroid of a long reference run (`t_ref = ref_factor · max t`).
pub fn tv_centroid_convergence_probe(
    spec: &DivergenceSpec,
    family: &GeneratorFamily,
    pi: &Distribution,
    t_list: &[usize],
    ref_factor: usize,
    base: &SolveOptions,
) -> Result<RateProbe> {
    if !spec.strictly_convex() {
        return Err(Error::UnsupportedSpec(format!("rate probe needs a strictly convex f, got {spec}")));
    }
    check_jump_class(family, 1e-9)?;
    let t_max = t_list.iter().copied().max().ok_or(Error::EmptyInput)?;
    let reference_iters = t_max.saturating_mul(ref_factor.max(1));
    let reference = solve_game(
        spec,
        family,
        pi,
        &SolveOptions { iters: reference_iters, trace_every: 0, epsilon: None, ..base.clone() },
    )?;
    let tv = DivergenceSpec::TotalVariation(TvScale::Half);
    let mut points = Vec::with_capacity(t_list.len());
    let mut gap_trace = Vec::new();
    for &t in t_list {
        let opts = SolveOptions {
            iters: t,
            epsilon: None,
            trace_every: if t == t_max { base.trace_every } else { 0 },
            ..base.clone()
        };
        let report = solve_game(spec, family, pi, &opts)?;
        let dist = divergence(&tv, &report.centroid, &reference.centroid, pi)?.finite()?;
        points.push((t, dist));
        if t == t_max {
            gap_trace = report.trace.iter().map(|r| (r.iteration, r.gap)).collect();
        }
    }
    Ok(RateProbe { reference_iters, reference_weights: reference.weights_avg, points, gap_trace })
}

/// Least-squares slope of `log(distance)` against `log(t)`.
pub fn log_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|&(t, d)| ((t as f64).ln(), d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{pi_dual, DEFAULT_TOL};

    #[test]
    fn simplex_projection_examples() {
        assert_eq!(simplex_project(&[0.5, 0.5]).unwrap().as_slice(), &[0.5, 0.5]);
        assert_eq!(simplex_project(&[1.0, 1.0]).unwrap().as_slice(), &[0.5, 0.5]);
        let w = simplex_project(&[1.2, -0.2]).unwrap();
        assert!((w.get(0) - 1.0).abs() < 1e-15 && w.get(1) == 0.0);
        assert_eq!(simplex_project(&[]).unwrap_err(), Error::EmptyInput);
        let w = simplex_project(&[0.3]).unwrap();
        assert_eq!(w.as_slice(), &[1.0]);
    }

    fn bisection_family() -> (GeneratorFamily, Distribution) {
        let pi = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let l = Generator::from_off_diagonal_rows(
            &[vec![0.0, 1.0, 2.0], vec![0.5, 0.0, 0.3], vec![1.2, 0.7, 0.0]],
            DEFAULT_TOL,
        )
        .unwrap();
        let dual = pi_dual(&l, &pi).unwrap();
        (GeneratorFamily::new(vec![l, dual]).unwrap(), pi)
    }

    #[test]
    fn bisection_family_has_zero_subgradient_and_gap() {
        let (family, pi) = bisection_family();
        let spec = DivergenceSpec::Alpha(2.0);
        let w = WeightVector::new(vec![0.3, 0.7]).unwrap();
        let g = subgradient(&spec, &family, &pi, &w, None).unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-12));
        let s = dual_objective(&spec, &family, &pi, &w).unwrap();
        assert!(s.gap.abs() < 1e-12);
        let proj = f_projection(&spec, &family.members()[0], &pi).unwrap();
        let d = divergence(&spec, &proj, &family.members()[0], &pi).unwrap().value();
        assert!((s.dual_value - d).abs() < 1e-12);

        let b = estimate_b(&spec, &family, &pi, &w, DEFAULT_B_SAFETY).unwrap();
        assert!((b - 4.0 * 2.0 * d * d).abs() < 1e-10 * b);

        let report = solve_game(&spec, &family, &pi, &SolveOptions::with_iters(10)).unwrap();
        assert!(report.weights_avg.as_slice().iter().all(|w| (w - 0.5).abs() < 1e-15));
        assert!(report.gap.abs() < 1e-12);
        assert!((report.value - d).abs() < 1e-12);
        assert!((chebyshev_radius(&report, 1e-9).unwrap() - d).abs() < 1e-12);
    }

    #[test]
    fn identical_reversible_members_return_immediately() {
        let pi = Distribution::uniform(2).unwrap();
        let m = Generator::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]], DEFAULT_TOL).unwrap();
        let family = GeneratorFamily::new(vec![m.clone(), m]).unwrap();
        let spec = DivergenceSpec::Kl;
        let w0 = WeightVector::uniform(2).unwrap();
        assert_eq!(estimate_b(&spec, &family, &pi, &w0, 4.0).unwrap(), 0.0);
        let r = solve_game(&spec, &family, &pi, &SolveOptions::with_iters(50)).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn single_member_game() {
        let pi = Distribution::uniform(2).unwrap();
        let l = Generator::from_rows(&[vec![-1.0, 1.0], vec![3.0, -3.0]], DEFAULT_TOL).unwrap();
        let family = GeneratorFamily::new(vec![l.clone()]).unwrap();
        let spec = DivergenceSpec::Kl;
        let r = solve_game(&spec, &family, &pi, &SolveOptions::with_iters(5)).unwrap();
        assert_eq!(r.weights_avg.as_slice(), &[1.0]);
        let proj = f_projection(&spec, &l, &pi).unwrap();
        assert!(r.centroid.max_abs_diff(&proj) < 1e-15);
        let pn = pure_nash_check(&spec, &family, &pi, PURE_NASH_TOL, &SolveOptions::default()).unwrap();
        assert!(pn.exists);
        assert_eq!(pn.saddle.map(|s| s.1), Some(0));
    }

    #[test]
    fn pure_nash_on_bisection_family() {
        let (family, pi) = bisection_family();
        let pn = pure_nash_check(
            &DivergenceSpec::Kl,
            &family,
            &pi,
            PURE_NASH_TOL,
            &SolveOptions::with_iters(100),
        )
        .unwrap();
        assert!(pn.exists);
        assert_eq!(pn.maximizers, vec![0, 1]);
    }

    #[test]
    fn pure_nash_rejects_tv() {
        let (family, pi) = bisection_family();
        let err = pure_nash_check(
            &DivergenceSpec::TotalVariation(TvScale::One),
            &family,
            &pi,
            1e-6,
            &SolveOptions::default(),
        );
        assert!(matches!(err, Err(Error::UnsupportedSpec(_))));
    }

    #[test]
    fn not_converged_radius() {
        let (family, pi) = bisection_family();
        let mut r = solve_game(&DivergenceSpec::Kl, &family, &pi, &SolveOptions::with_iters(3)).unwrap();
        r.gap = 0.5;
        assert!(matches!(chebyshev_radius(&r, 1e-6), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn bad_options_are_rejected() {
        let (family, pi) = bisection_family();
        let spec = DivergenceSpec::Kl;
        let zero = SolveOptions { iters: 0, ..SolveOptions::default() };
        assert!(solve_game(&spec, &family, &pi, &zero).is_err());
        let eta = SolveOptions { eta: Some(-1.0), ..SolveOptions::default() };
        assert!(solve_game(&spec, &family, &pi, &eta).is_err());
        let r = SolveOptions { ref_index: Some(2), ..SolveOptions::default() };
        assert!(matches!(solve_game(&spec, &family, &pi, &r), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn jump_class_guard() {
        let pi = Distribution::uniform(2).unwrap();
        let swap = Generator::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]], DEFAULT_TOL).unwrap();
        let lazy = Generator::from_rows(&[vec![-0.5, 0.5], vec![1.0, -1.0]], DEFAULT_TOL).unwrap();
        let ok = GeneratorFamily::new(vec![swap.clone()]).unwrap();
        assert!(check_jump_class(&ok, 1e-12).is_ok());
        let bad = GeneratorFamily::new(vec![swap, lazy]).unwrap();
        assert_eq!(check_jump_class(&bad, 1e-12).unwrap_err(), Error::ClassViolation(1));
        let probe = tv_centroid_convergence_probe(
            &DivergenceSpec::Kl,
            &bad,
            &pi,
            &[10],
            2,
            &SolveOptions::default(),
        );
        assert_eq!(probe.unwrap_err(), Error::ClassViolation(1));
    }

    #[test]
    fn slope_fit() {
        let pts = [(100, 1e-1), (1000, 1e-1 / 10f64.sqrt()), (10000, 1e-2)];
        assert!((log_log_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert!(log_log_slope(&[(10, 0.0), (100, 0.0)]).is_none());
    }
}
