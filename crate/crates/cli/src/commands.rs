use entgame::solver::{log_log_slope, PURE_NASH_TOL};
use entgame::{
    detailed_balance_residual, divergence, dual_objective, f_projection_result, oracle_dual_max,
    oracle_edge_scan, oracle_pure_values, pi_dual, power_mean_reversiblization, pure_nash_check,
    solve_game, solver, tv_centroid_convergence_probe, weighted_centroid, weighted_centroid_closed,
    weighted_centroid_generic, DivergenceSpec, DualObjectiveState, Error, ExtNonneg, FlatInterval,
    Generator, GenericOptions, GridSpec, PowerExponent, SolveOptions, WeightVector,
};
use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::instance::{self, Instance};
use crate::{Command, Common, OracleCommand, SolveArgs};

/// Option keys recognized in an instance's `options` map.
const KNOWN_OPTIONS: &[&str] = &[
    "iters", "eta", "w0", "epsilon", "trace_every", "ref_index", "weights", "resolution", "t_list",
    "ref_factor", "p", "m", "l", "index", "nash_tol", "method", "mu", "lambda",
];

pub struct Report {
    pub document: Value,
    pub converged: bool,
}

struct Ctx {
    inst: Instance,
    spec: Option<DivergenceSpec>,
    params: Map<String, Value>,
    warnings: Vec<String>,
}

fn domain(context: &str) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError::domain(context, e)
}

impl Ctx {
    fn spec(&self) -> Result<&DivergenceSpec, CliError> {
        self.spec.as_ref().ok_or_else(|| {
            CliError::parse(Some("divergence".into()), "no divergence given in the instance or via --divergence".into())
        })
    }

    /// Flag value, else `options.<key>`, else nothing; records the choice.
    fn pick<T: DeserializeOwned + serde::Serialize>(&mut self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.inst.options.get(key) {
                Some(raw) => Some(
                    serde_json::from_value(raw.clone())
                        .map_err(|e| CliError::parse(Some(format!("options.{key}")), e.to_string()))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.params.insert(key.into(), serde_json::to_value(v).expect("serializable"));
        }
        Ok(v)
    }

    fn pick_or<T: DeserializeOwned + serde::Serialize>(&mut self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        match self.pick(flag, key)? {
            Some(v) => Ok(v),
            None => {
                self.params.insert(key.into(), serde_json::to_value(&default).expect("serializable"));
                Ok(default)
            }
        }
    }

    fn index(&self, i: usize, what: &str) -> Result<usize, CliError> {
        if i >= self.inst.family.len() {
            return Err(CliError::parse(
                Some(format!("--{what}")),
                format!("index {i} out of range for {} generators", self.inst.family.len()),
            ));
        }
        Ok(i)
    }

    fn selected(&mut self, flag: Option<usize>) -> Result<Vec<usize>, CliError> {
        match self.pick(flag, "index")? {
            Some(i) => Ok(vec![self.index(i, "index")?]),
            None => Ok((0..self.inst.family.len()).collect()),
        }
    }

    /// Weights from a flag string or an options entry (string or array).
    fn weights(&mut self, flag: Option<String>, key: &str) -> Result<WeightVector, CliError> {
        let n = self.inst.family.len();
        let path = format!("options.{key}");
        let parsed = match flag {
            Some(s) => parse_weights(&s, n).map_err(|m| CliError::parse(Some(format!("--{}", key.replace('_', "-"))), m))?,
            None => match self.inst.options.get(key) {
                None => WeightVector::uniform(n).map_err(domain("weights"))?,
                Some(Value::String(s)) => parse_weights(s, n).map_err(|m| CliError::parse(Some(path), m))?,
                Some(raw) => {
                    let v: Vec<f64> = serde_json::from_value(raw.clone())
                        .map_err(|e| CliError::parse(Some(path.clone()), e.to_string()))?;
                    check_len(&v, n).map_err(|m| CliError::parse(Some(path.clone()), m))?;
                    WeightVector::new(v).map_err(|e| CliError::parse(Some(path), e.to_string()))?
                }
            },
        };
        self.params.insert(key.into(), serde_json::to_value(&parsed).expect("serializable"));
        Ok(parsed)
    }

    fn solve_options(&mut self, args: &SolveArgs, default_iters: usize) -> Result<SolveOptions, CliError> {
        let iters = self.pick_or(args.iters, "iters", default_iters)?;
        let eta = match self.pick(args.eta.clone().map(Value::String), "eta")? {
            None => None,
            Some(Value::String(s)) if s == "auto" => None,
            Some(Value::String(s)) => Some(
                s.parse::<f64>()
                    .map_err(|_| CliError::parse(Some("eta".into()), format!("expected a number or auto, got {s:?}")))?,
            ),
            Some(Value::Number(x)) => x.as_f64(),
            Some(other) => return Err(CliError::parse(Some("options.eta".into()), format!("unexpected {other}"))),
        };
        if eta.is_none() {
            self.params.insert("eta".into(), json!("auto"));
        }
        let w0 = self.weights(args.w0.clone(), "w0")?;
        let epsilon = self.pick(args.epsilon, "epsilon")?;
        let trace_every = self.pick_or(args.trace_every, "trace_every", 1)?;
        let ref_index = match self.pick(args.ref_index, "ref_index")? {
            Some(r) => Some(self.index(r, "ref-index")?),
            None => None,
        };
        Ok(SolveOptions { iters, eta, w0: Some(w0), ref_index, trace_every, epsilon, ..SolveOptions::default() })
    }

    fn labelled<T: Into<Value>>(&self, i: usize, key: &str, v: T) -> Value {
        json!({ "index": i, "label": self.inst.label(i), key: v.into() })
    }
}

fn check_len(v: &[f64], n: usize) -> Result<(), String> {
    if v.len() != n {
        return Err(format!("expected {n} weights, got {}", v.len()));
    }
    Ok(())
}

/// `uniform`, `e:<i>` (zero-based) or a comma-separated list.
pub fn parse_weights(s: &str, n: usize) -> Result<WeightVector, String> {
    let s = s.trim();
    if s == "uniform" {
        return WeightVector::uniform(n).map_err(|e| e.to_string());
    }
    if let Some(i) = s.strip_prefix("e:") {
        let i: usize = i.parse().map_err(|_| format!("bad index in {s:?}"))?;
        return WeightVector::unit(n, i).map_err(|e| e.to_string());
    }
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad weight {x:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    check_len(&v, n)?;
    WeightVector::new(v).map_err(|e| e.to_string())
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or_else(|| Value::String(v.to_string()))
}

fn gen(g: &Generator) -> Value {
    serde_json::to_value(g).expect("generator serializes")
}

fn ext(v: ExtNonneg) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn flat_json(flat: &Option<FlatInterval>) -> Value {
    match flat {
        Some(f) => json!({ "lower": gen(&f.lower), "upper": gen(&f.upper) }),
        None => Value::Null,
    }
}

fn equilibrium_results(ctx: &Ctx, state: &DualObjectiveState) -> Map<String, Value> {
    let divs = state.divergences();
    let mut m = Map::new();
    m.insert("weights".into(), serde_json::to_value(&state.weights).unwrap());
    m.insert("centroid".into(), gen(&state.centroid.centroid));
    m.insert("value".into(), num(state.dual_value));
    m.insert("chebyshev_radius".into(), num(state.primal_value));
    m.insert("gap".into(), num(state.gap));
    m.insert(
        "divergences".into(),
        divs.iter().enumerate().map(|(i, d)| ctx.labelled(i, "value", num(*d))).collect(),
    );
    m.insert("slackness".into(), divs.iter().map(|d| num(d - state.primal_value)).collect());
    m
}

pub fn dispatch(cmd: &Command, source: &str, text: &str, argv: &[String]) -> Result<Report, CliError> {
    let common: &Common = cmd.common();
    let doc = instance::parse_document(text)?;
    let inst = instance::build(doc, common.tol)?;
    let spec = match &common.divergence {
        Some(s) => Some(s.parse::<DivergenceSpec>().map_err(|e| CliError::parse(Some("--divergence".into()), e.to_string()))?),
        None => inst.divergence,
    };
    let mut warnings: Vec<String> = inst
        .options
        .keys()
        .filter(|k| !KNOWN_OPTIONS.contains(&k.as_str()))
        .map(|k| format!("unknown option {k:?} ignored"))
        .collect();
    warnings.sort();
    let mut ctx = Ctx { inst, spec, params: Map::new(), warnings };
    ctx.params.insert("tol".into(), num(common.tol));

    let mut trace = Vec::new();
    let mut converged = true;
    let (name, results) = match cmd {
        Command::Validate { .. } => ("validate", validate(&ctx)?),
        Command::Dual { index, .. } => ("dual", dual(&mut ctx, *index)?),
        Command::Reversiblize { p, index, .. } => ("reversiblize", reversiblize(&mut ctx, p.clone(), *index)?),
        Command::Divergence { m, l, .. } => ("divergence", divergence_cmd(&mut ctx, *m, *l)?),
        Command::Project { index, .. } => ("project", project(&mut ctx, *index)?),
        Command::Centroid { weights, method, .. } => ("centroid", centroid(&mut ctx, weights.clone(), method)?),
        Command::Solve { solve, .. } => {
            let (results, rows, ok) = solve_cmd(&mut ctx, solve)?;
            trace = rows;
            converged = ok;
            ("solve", results)
        }
        Command::PureNash { solve, nash_tol, .. } => ("pure-nash", pure_nash(&mut ctx, solve, *nash_tol)?),
        Command::ProbeRate { solve, t_list, ref_factor, .. } => {
            let (results, rows) = probe_rate(&mut ctx, solve, t_list.clone(), *ref_factor)?;
            trace = rows;
            ("probe-rate", results)
        }
        Command::Oracle { which } => match which {
            OracleCommand::Dual { resolution, .. } => ("oracle dual", oracle_dual(&mut ctx, *resolution)?),
            OracleCommand::Edge { resolution, weights, .. } => {
                ("oracle edge", oracle_edge(&mut ctx, *resolution, weights.clone())?)
            }
            OracleCommand::Pure { .. } => ("oracle pure", oracle_pure(&ctx)?),
        },
    };

    let digest = format!("{:x}", Sha256::digest(text.as_bytes()));
    let document = json!({
        "command": { "name": name, "argv": argv, "parameters": ctx.params },
        "inputs": {
            "source": source,
            "sha256": digest,
            "states": ctx.inst.pi.dim(),
            "members": ctx.inst.family.len(),
            "labels": ctx.inst.labels,
            "divergence": ctx.spec.as_ref().map(|s| s.to_string()),
        },
        "results": results,
        "trace": trace,
        "warnings": ctx.warnings,
        "metadata": { "tool": "entgame", "version": env!("CARGO_PKG_VERSION") },
    });
    Ok(Report { document, converged })
}

fn validate(ctx: &Ctx) -> Result<Value, CliError> {
    let pi = &ctx.inst.pi;
    let tol = ctx.params["tol"].as_f64().unwrap();
    let members = ctx
        .inst
        .family
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let residual = detailed_balance_residual(g, pi).map_err(domain("validate"))?;
            let scale = g.as_slice().iter().fold(1.0f64, |s, v| s.max(v.abs()));
            Ok(json!({
                "index": i,
                "label": ctx.inst.label(i),
                "reversible": residual <= tol * scale,
                "detailed_balance_residual": num(residual),
                "zero": g.is_zero(),
            }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(json!({ "valid": true, "pi": pi.probs(), "generators": members }))
}

fn dual(ctx: &mut Ctx, index: Option<usize>) -> Result<Value, CliError> {
    let items = ctx
        .selected(index)?
        .into_iter()
        .map(|i| {
            let d = pi_dual(&ctx.inst.family.members()[i], &ctx.inst.pi).map_err(domain("dual"))?;
            Ok(ctx.labelled(i, "dual", gen(&d)))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(json!({ "generators": items }))
}

fn reversiblize(ctx: &mut Ctx, p: Option<String>, index: Option<usize>) -> Result<Value, CliError> {
    let raw = ctx
        .pick(p.map(Value::String), "p")?
        .ok_or_else(|| CliError::parse(Some("--p".into()), "an exponent is required".into()))?;
    let p: PowerExponent = match &raw {
        Value::String(s) => s.parse().map_err(|e: Error| CliError::parse(Some("p".into()), e.to_string()))?,
        Value::Number(x) => PowerExponent::new(x.as_f64().unwrap()),
        other => return Err(CliError::parse(Some("options.p".into()), format!("unexpected {other}"))),
    };
    let items = ctx
        .selected(index)?
        .into_iter()
        .map(|i| {
            let r = power_mean_reversiblization(&ctx.inst.family.members()[i], &ctx.inst.pi, p)
                .map_err(domain("reversiblize"))?;
            Ok(ctx.labelled(i, "reversiblization", gen(&r)))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(json!({ "p": p.to_string(), "generators": items }))
}

fn divergence_cmd(ctx: &mut Ctx, m: Option<usize>, l: Option<usize>) -> Result<Value, CliError> {
    let spec = *ctx.spec()?;
    let n = ctx.inst.family.len();
    let mi = ctx.pick_or(m, "m", 0)?;
    let li = ctx.pick_or(l, "l", if n > 1 { 1 } else { 0 })?;
    let (mi, li) = (ctx.index(mi, "m")?, ctx.index(li, "l")?);
    let members = ctx.inst.family.members();
    let pi = &ctx.inst.pi;
    let value = divergence(&spec, &members[mi], &members[li], pi).map_err(domain("divergence"))?;
    let pairwise = members
        .iter()
        .map(|a| members.iter().map(|b| divergence(&spec, a, b, pi).map(ext)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(domain("divergence"))?;
    Ok(json!({
        "m": { "index": mi, "label": ctx.inst.label(mi) },
        "l": { "index": li, "label": ctx.inst.label(li) },
        "value": ext(value),
        "pairwise": pairwise,
    }))
}

fn project(ctx: &mut Ctx, index: Option<usize>) -> Result<Value, CliError> {
    let spec = *ctx.spec()?;
    let items = ctx
        .selected(index)?
        .into_iter()
        .map(|i| {
            let r = f_projection_result(&spec, &ctx.inst.family.members()[i], &ctx.inst.pi)
                .map_err(domain("project"))?;
            Ok(json!({
                "index": i,
                "label": ctx.inst.label(i),
                "projection": gen(&r.centroid),
                "value": ext(r.per_member_divergence[0]),
                "flat_interval": flat_json(&r.flat_interval),
            }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(json!({ "generators": items }))
}

fn centroid(ctx: &mut Ctx, weights: Option<String>, method_flag: &str) -> Result<Value, CliError> {
    let spec = *ctx.spec()?;
    let w = ctx.weights(weights, "weights")?;
    let method = if method_flag == "auto" {
        ctx.pick_or(None, "method", "auto".to_string())?
    } else {
        ctx.pick_or(Some(method_flag.to_string()), "method", String::new())?
    };
    let (fam, pi) = (&ctx.inst.family, &ctx.inst.pi);
    let r = match method.as_str() {
        "auto" => weighted_centroid(&spec, fam, pi, &w),
        "closed" => weighted_centroid_closed(&spec, fam, pi, &w),
        "generic" => weighted_centroid_generic(&spec, fam, pi, &w, &GenericOptions::default()),
        other => {
            return Err(CliError::parse(Some("--method".into()), format!("expected auto, closed or generic, got {other:?}")))
        }
    }
    .map_err(domain("centroid"))?;
    let divs: Vec<Value> = r
        .per_member_divergence
        .iter()
        .enumerate()
        .map(|(i, d)| ctx.labelled(i, "value", ext(*d)))
        .collect();
    Ok(json!({
        "weights": w,
        "centroid": gen(&r.centroid),
        "value": ext(r.weighted_value(&w)),
        "divergences": divs,
        "flat_interval": flat_json(&r.flat_interval),
    }))
}

fn trace_rows(rows: &[solver::TraceRow]) -> Vec<Value> {
    rows.iter()
        .map(|r| json!({ "iteration": r.iteration, "dual": num(r.dual), "primal": num(r.primal), "gap": num(r.gap) }))
        .collect()
}

fn solve_cmd(ctx: &mut Ctx, args: &SolveArgs) -> Result<(Value, Vec<Value>, bool), CliError> {
    let spec = *ctx.spec()?;
    let opts = ctx.solve_options(args, 1000)?;
    let report = solve_game(&spec, &ctx.inst.family, &ctx.inst.pi, &opts).map_err(domain("solve"))?;
    let state = dual_objective(&spec, &ctx.inst.family, &ctx.inst.pi, &report.weights_avg).map_err(domain("solve"))?;
    let mut results = equilibrium_results(ctx, &state);
    results.insert("weights_last".into(), serde_json::to_value(&report.weights_last).unwrap());
    results.insert("initial_gap".into(), num(report.initial_gap));
    results.insert("iterations".into(), json!(report.iterations));
    results.insert("stepsize".into(), num(report.stepsize));
    results.insert("b_estimate".into(), num(report.b_estimate));
    results.insert("b_doublings".into(), json!(report.b_doublings));
    results.insert(
        "regret_bound".into(),
        if report.iterations > 0 {
            num(solver::regret_bound(report.b_estimate, report.stepsize, ctx.inst.family.len(), report.iterations))
        } else {
            num(0.0)
        },
    );
    let converged = match opts.epsilon {
        Some(eps) if report.gap > eps => {
            ctx.warnings.push(format!("gap {} did not reach epsilon {eps}", report.gap));
            false
        }
        _ => true,
    };
    results.insert("converged".into(), json!(converged));
    Ok((Value::Object(results), trace_rows(&report.trace), converged))
}

fn pure_nash(ctx: &mut Ctx, args: &SolveArgs, nash_tol: Option<f64>) -> Result<Value, CliError> {
    let spec = *ctx.spec()?;
    let tol = ctx.pick_or(nash_tol, "nash_tol", PURE_NASH_TOL)?;
    let opts = ctx.solve_options(args, 10_000)?;
    let opts = SolveOptions { trace_every: 0, ..opts };
    let r = pure_nash_check(&spec, &ctx.inst.family, &ctx.inst.pi, tol, &opts).map_err(domain("pure-nash"))?;
    let saddle = r.saddle.as_ref().map(|(m, i)| json!({ "index": i, "label": ctx.inst.label(*i), "centroid": gen(m) }));
    Ok(json!({
        "exists": r.exists,
        "saddle": saddle,
        "maximizers": r.maximizers.iter().map(|&i| json!({ "index": i, "label": ctx.inst.label(i) })).collect::<Vec<_>>(),
        "maximin": num(r.maximin),
        "minimax": num(r.minimax),
        "per_index": r.per_index.iter().map(|&v| num(v)).collect::<Vec<_>>(),
    }))
}

fn probe_rate(
    ctx: &mut Ctx,
    args: &SolveArgs,
    t_list: Option<String>,
    ref_factor: Option<usize>,
) -> Result<(Value, Vec<Value>), CliError> {
    let spec = *ctx.spec()?;
    let t_list: Vec<usize> = match t_list {
        Some(s) => s
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|_| CliError::parse(Some("--t-list".into()), format!("bad count {x:?}"))))
            .collect::<Result<_, _>>()?,
        None => ctx.pick(None, "t_list")?.unwrap_or_else(|| vec![100, 1_000, 10_000]),
    };
    ctx.params.insert("t_list".into(), json!(t_list));
    let ref_factor = ctx.pick_or(ref_factor, "ref_factor", 100)?;
    let base = ctx.solve_options(args, 1)?;
    let probe = tv_centroid_convergence_probe(&spec, &ctx.inst.family, &ctx.inst.pi, &t_list, ref_factor, &base)
        .map_err(domain("probe-rate"))?;
    let slope = log_log_slope(&probe.points);
    let rows = probe.gap_trace.iter().map(|&(i, g)| json!({ "iteration": i, "gap": num(g) })).collect();
    Ok((
        json!({
            "reference_iters": probe.reference_iters,
            "reference_weights": probe.reference_weights,
            "distance": probe.points.iter().map(|&(t, d)| json!({ "t": t, "distance": num(d) })).collect::<Vec<_>>(),
            "slope": slope.map(num),
        }),
        rows,
    ))
}

fn grid(ctx: &mut Ctx, flag: Option<f64>, default: f64) -> Result<GridSpec, CliError> {
    let r = ctx.pick_or(flag, "resolution", default)?;
    GridSpec::new(r).map_err(|e| CliError::parse(Some("resolution".into()), e.to_string()))
}

fn oracle_dual(ctx: &mut Ctx, resolution: Option<f64>) -> Result<Value, CliError> {
    let spec = *ctx.spec()?;
    let grid = grid(ctx, resolution, 1e-3)?;
    let best = oracle_dual_max(&spec, &ctx.inst.family, &ctx.inst.pi, &grid).map_err(domain("oracle dual"))?;
    let state = dual_objective(&spec, &ctx.inst.family, &ctx.inst.pi, &best.weights).map_err(domain("oracle dual"))?;
    let mut results = equilibrium_results(ctx, &state);
    results.insert("grid_points".into(), json!(best.grid_points));
    Ok(Value::Object(results))
}

fn oracle_edge(ctx: &mut Ctx, resolution: Option<f64>, weights: Option<String>) -> Result<Value, CliError> {
    let spec = *ctx.spec()?;
    let grid = grid(ctx, resolution, 1e-5)?;
    let w = ctx.weights(weights, "weights")?;
    let scan = oracle_edge_scan(&spec, &ctx.inst.family, &ctx.inst.pi, &w, &grid).map_err(domain("oracle edge"))?;
    let divs = ctx
        .inst
        .family
        .iter()
        .enumerate()
        .map(|(i, l)| divergence(&spec, &scan.argmin, l, &ctx.inst.pi).map(|d| ctx.labelled(i, "value", ext(d))))
        .collect::<Result<Vec<_>, _>>()
        .map_err(domain("oracle edge"))?;
    Ok(json!({
        "weights": w,
        "centroid": gen(&scan.argmin),
        "divergences": divs,
        "flat_interval": { "lower": gen(&scan.plateau_lower), "upper": gen(&scan.plateau_upper) },
    }))
}

fn oracle_pure(ctx: &Ctx) -> Result<Value, CliError> {
    let spec = *ctx.spec()?;
    let r = oracle_pure_values(&spec, &ctx.inst.family, &ctx.inst.pi).map_err(domain("oracle pure"))?;
    Ok(json!({
        "maximin": num(r.v_underline),
        "per_index": r.per_index.iter().map(|&v| num(v)).collect::<Vec<_>>(),
    }))
}
