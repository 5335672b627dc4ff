use entgame::{Distribution, DivergenceSpec, Generator, GeneratorFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Instance file layout. Diagonal entries may be `null`; they are always
/// recomputed from the off-diagonal rates.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub pi: Vec<f64>,
    pub generators: Vec<Vec<Vec<Option<f64>>>>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub divergence: Option<String>,
    #[serde(default)]
    pub options: Map<String, Value>,
}

#[derive(Debug)]
pub struct Instance {
    pub pi: Distribution,
    pub family: GeneratorFamily,
    pub labels: Vec<String>,
    pub divergence: Option<DivergenceSpec>,
    pub options: Map<String, Value>,
}

impl Instance {
    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }
}

pub fn parse_document(text: &str) -> Result<InstanceDocument, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::parse(if path == "." { None } else { Some(path) }, e.into_inner().to_string())
    })
}

pub fn build(doc: InstanceDocument, tol: f64) -> Result<Instance, CliError> {
    let pi = Distribution::with_tol(doc.pi, tol).map_err(|e| CliError::parse(Some("pi".into()), e.to_string()))?;
    let mut members = Vec::with_capacity(doc.generators.len());
    for (i, rows) in doc.generators.iter().enumerate() {
        let path = format!("generators[{i}]");
        let has_diagonal = rows.iter().enumerate().all(|(x, r)| r.get(x).is_some_and(|v| v.is_some()));
        let mut dense = Vec::with_capacity(rows.len());
        for (x, row) in rows.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (y, v) in row.iter().enumerate() {
                match v {
                    Some(v) => out.push(*v),
                    None if x == y => out.push(0.0),
                    None => {
                        return Err(CliError::parse(
                            Some(format!("{path}[{x}][{y}]")),
                            "only diagonal entries may be null".into(),
                        ))
                    }
                }
            }
            dense.push(out);
        }
        let g = if has_diagonal {
            Generator::from_rows(&dense, tol)
        } else {
            Generator::from_off_diagonal_rows(&dense, tol)
        }
        .map_err(|e| CliError::parse(Some(path.clone()), e.to_string()))?;
        if g.dim() != pi.dim() {
            return Err(CliError::parse(
                Some(path),
                format!("generator has {} states but pi has {}", g.dim(), pi.dim()),
            ));
        }
        members.push(g);
    }
    let family = GeneratorFamily::new(members).map_err(|e| CliError::parse(Some("generators".into()), e.to_string()))?;
    let labels = match doc.labels {
        Some(l) if l.len() != family.len() => {
            return Err(CliError::parse(
                Some("labels".into()),
                format!("{} labels for {} generators", l.len(), family.len()),
            ))
        }
        Some(l) => l,
        None => (1..=family.len()).map(|i| format!("L{i}")).collect(),
    };
    let divergence = doc
        .divergence
        .map(|s| s.parse::<DivergenceSpec>())
        .transpose()
        .map_err(|e| CliError::parse(Some("divergence".into()), e.to_string()))?;
    Ok(Instance { pi, family, labels, divergence, options: doc.options })
}

/// Random instance document: `members` generators on `states` states with
/// rates in `[0.1, 2)` and a random stationary law.
pub fn random_document(members: usize, states: usize, seed: u64) -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masses: Vec<f64> = (0..states).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = masses.iter().sum();
    let pi: Vec<f64> = masses.iter().map(|m| m / total).collect();
    let generators: Vec<Vec<Vec<Value>>> = (0..members)
        .map(|_| {
            (0..states)
                .map(|x| {
                    (0..states)
                        .map(|y| if x == y { Value::Null } else { Value::from(rng.gen_range(0.1..2.0)) })
                        .collect()
                })
                .collect()
        })
        .collect();
    serde_json::json!({ "pi": pi, "generators": generators })
}

/// Parses `"NxD"` into `(members, states)`.
pub fn parse_shape(s: &str) -> Result<(usize, usize), String> {
    let (n, d) = s.split_once('x').ok_or_else(|| format!("expected MEMBERSxSTATES, got {s:?}"))?;
    let n: usize = n.trim().parse().map_err(|_| format!("bad member count in {s:?}"))?;
    let d: usize = d.trim().parse().map_err(|_| format!("bad state count in {s:?}"))?;
    if n == 0 || d < 2 {
        return Err(format!("need at least one member and two states, got {s:?}"));
    }
    Ok((n, d))
}
