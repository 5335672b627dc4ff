#![allow(dead_code)]

use entgame::{Distribution, Generator, GeneratorFamily, DEFAULT_TOL};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_pi(rng: &mut TestRng, dim: usize) -> Distribution {
    let masses: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.1..1.0)).collect();
    Distribution::from_masses(&masses).unwrap()
}

/// Generator with every off-diagonal rate drawn from `[lo, hi)`.
pub fn random_generator(rng: &mut TestRng, dim: usize, lo: f64, hi: f64) -> Generator {
    let rows: Vec<Vec<f64>> = (0..dim)
        .map(|x| (0..dim).map(|y| if x == y { 0.0 } else { rng.gen_range(lo..hi) }).collect())
        .collect();
    Generator::from_off_diagonal_rows(&rows, DEFAULT_TOL).unwrap()
}

/// π-reversible generator built from random symmetric edge flows.
pub fn random_reversible(rng: &mut TestRng, pi: &Distribution, lo: f64, hi: f64) -> Generator {
    let d = pi.dim();
    let mut rows = vec![vec![0.0; d]; d];
    for x in 0..d {
        for y in (x + 1)..d {
            let flow = rng.gen_range(lo..hi);
            rows[x][y] = flow / pi.get(x);
            rows[y][x] = flow / pi.get(y);
        }
    }
    Generator::from_off_diagonal_rows(&rows, DEFAULT_TOL).unwrap()
}

pub fn random_family(rng: &mut TestRng, n: usize, dim: usize) -> GeneratorFamily {
    GeneratorFamily::new((0..n).map(|_| random_generator(rng, dim, 0.1, 2.0)).collect()).unwrap()
}

pub fn random_weights(rng: &mut TestRng, n: usize) -> entgame::WeightVector {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    entgame::WeightVector::new(raw.iter().map(|v| v / s).collect()).unwrap()
}

/// `P − I` where `P` has zero diagonal and random off-diagonal rows summing to one.
pub fn random_jump_generator(rng: &mut TestRng, dim: usize) -> Generator {
    let rows: Vec<Vec<f64>> = (0..dim)
        .map(|x| {
            let raw: Vec<f64> = (0..dim).map(|y| if x == y { 0.0 } else { rng.gen_range(0.05..1.0) }).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|v| v / s).collect()
        })
        .collect();
    Generator::from_off_diagonal_rows(&rows, DEFAULT_TOL).unwrap()
}

pub struct Fixture {
    pub pi: Distribution,
    pub family: GeneratorFamily,
    pub spec: entgame::DivergenceSpec,
    pub options: serde_json::Value,
}

/// Loads a document from the workspace `fixtures/` directory.
pub fn load_fixture(name: &str) -> Fixture {
    let path = format!("{}/../../fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let pi = Distribution::new(serde_json::from_value(doc["pi"].clone()).unwrap()).unwrap();
    let members: Vec<Vec<Vec<f64>>> = serde_json::from_value(doc["generators"].clone()).unwrap();
    let family = GeneratorFamily::new(
        members.iter().map(|rows| Generator::from_rows(rows, DEFAULT_TOL).unwrap()).collect(),
    )
    .unwrap();
    let spec = doc["divergence"].as_str().unwrap().parse().unwrap();
    Fixture { pi, family, spec, options: doc["options"].clone() }
}
