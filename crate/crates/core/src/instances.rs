//! Coverage instances from SNAP edge lists, plus synthetic generators.
//!
//! Source nodes of the edge list become sets (sellers) and target nodes
//! become vertices. A vertex is worth its in-degree and a set's base cost is
//! its out-degree; costs are then scaled by `κ ~ U[s, s²]`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::valuation::{singleton_values, CoverageInstance, Valuation};

/// A directed graph read as a bipartite set/vertex incidence.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BipartiteGraph {
    /// Original ids of source nodes, ascending.
    pub sources: Vec<u64>,
    /// Original ids of target nodes, ascending.
    pub targets: Vec<u64>,
    /// Per source: indices into `targets`, ascending.
    pub out: Vec<Vec<usize>>,
    /// Per target.
    pub in_degree: Vec<usize>,
}

impl BipartiteGraph {
    /// Duplicate edges are dropped.
    pub fn from_edges<I: IntoIterator<Item = (u64, u64)>>(edges: I) -> Self {
        let mut adj: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
        let mut targets = BTreeSet::new();
        for (u, v) in edges {
            adj.entry(u).or_default().insert(v);
            targets.insert(v);
        }
        let targets: Vec<u64> = targets.into_iter().collect();
        let mut in_degree = vec![0; targets.len()];
        let mut sources = Vec::with_capacity(adj.len());
        let mut out = Vec::with_capacity(adj.len());
        for (u, vs) in adj {
            let row: Vec<usize> = vs.iter().map(|v| targets.binary_search(v).expect("target indexed")).collect();
            for &t in &row {
                in_degree[t] += 1;
            }
            sources.push(u);
            out.push(row);
        }
        BipartiteGraph { sources, targets, out, in_degree }
    }

    pub fn num_edges(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }
}

/// Parses `# comment` lines and `<int> <int>` edges. Blank lines are skipped.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<BipartiteGraph> {
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut fields = t.split_whitespace();
        let parse = |f: Option<&str>| -> Result<u64> {
            let f = f.ok_or_else(|| Error::Parse { line: idx + 1, msg: "expected two node ids".into() })?;
            f.parse().map_err(|_| Error::Parse { line: idx + 1, msg: format!("`{}` is not a node id", f) })
        };
        let u = parse(fields.next())?;
        let v = parse(fields.next())?;
        if fields.next().is_some() {
            return Err(Error::Parse { line: idx + 1, msg: "more than two fields".into() });
        }
        edges.push((u, v));
    }
    Ok(BipartiteGraph::from_edges(edges))
}

pub fn parse_edge_str(text: &str) -> Result<BipartiteGraph> {
    parse_edge_list(text.as_bytes())
}

/// Whether `κ` is drawn once per instance or once per seller.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaMode {
    #[default]
    PerInstance,
    PerSeller,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub s: f64,
    pub instances: usize,
    pub seed: u64,
    #[serde(default)]
    pub kappa: KappaMode,
}

impl ExperimentConfig {
    pub fn new(n: usize, s: f64, instances: usize, seed: u64) -> Self {
        ExperimentConfig { n, s, instances, seed, kappa: KappaMode::PerInstance }
    }
}

/// Seed for instance `index` under `seed`; independent of evaluation order
/// and stable across toolchains.
pub fn instance_seed(seed: u64, index: u64) -> u64 {
    crate::splitmix64(crate::splitmix64(seed) ^ index)
}

fn draw_kappa<R: Rng>(rng: &mut R, s: f64) -> f64 {
    if s == 1.0 {
        1.0
    } else {
        rng.gen_range(s..=s * s)
    }
}

/// Samples `cfg.n` set nodes without replacement and builds the coverage
/// instance over the vertices they touch, with costs `κ · out-degree`.
pub fn build_instance(graph: &BipartiteGraph, cfg: &ExperimentConfig, index: u64) -> Result<(CoverageInstance, Vec<f64>)> {
    if !(cfg.s >= 1.0 && cfg.s.is_finite()) {
        return input(format!("cost scale s must be at least 1, got {}", cfg.s));
    }
    if cfg.n == 0 {
        return input("sample size must be positive");
    }
    if cfg.n > graph.sources.len() {
        return Err(Error::Capacity(format!("sample size {} exceeds the {} set nodes", cfg.n, graph.sources.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(cfg.seed, index));
    let mut picked = rand::seq::index::sample(&mut rng, graph.sources.len(), cfg.n).into_vec();
    picked.sort_unstable();

    let mut local: BTreeMap<usize, usize> = BTreeMap::new();
    for &p in &picked {
        for &t in &graph.out[p] {
            let next = local.len();
            local.entry(t).or_insert(next);
        }
    }
    let mut values = vec![0.0; local.len()];
    for (&t, &v) in &local {
        values[v] = graph.in_degree[t] as f64;
    }
    let covers: Vec<Vec<usize>> = picked.iter().map(|&p| graph.out[p].iter().map(|t| local[t]).collect()).collect();
    let base: Vec<f64> = picked.iter().map(|&p| graph.out[p].len() as f64).collect();
    let costs = match cfg.kappa {
        KappaMode::PerInstance => {
            let k = draw_kappa(&mut rng, cfg.s);
            base.iter().map(|b| k * b).collect()
        }
        KappaMode::PerSeller => base.iter().map(|b| draw_kappa(&mut rng, cfg.s) * b).collect(),
    };
    Ok((CoverageInstance::new(covers, values)?, costs))
}

/// `|{i : f(i|∅) > c_i}| / n`.
pub fn active_fraction(oracle: &dyn Valuation, costs: &[f64]) -> f64 {
    let n = oracle.num_sellers();
    if n == 0 {
        return 0.0;
    }
    let active = singleton_values(oracle).iter().zip(costs).filter(|(f, c)| f > c).count();
    active as f64 / n as f64
}

/// `n` sets over `3n` vertices with values in `[0, 10]`; each set covers
/// between 1 and 6 random vertices; costs uniform in `[0, 1.5 f(i|∅)]`.
pub fn random_instance(n: usize, seed: u64) -> Result<(CoverageInstance, Vec<f64>)> {
    if n == 0 {
        return input("random instances need at least one seller");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 3 * n;
    let values: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..=10.0)).collect();
    let covers: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=m.min(6));
            rand::seq::index::sample(&mut rng, m, k).into_vec()
        })
        .collect();
    let inst = CoverageInstance::new(covers, values)?;
    let costs = singleton_values(&inst).into_iter().map(|f| rng.gen_range(0.0..=1.5 * f)).collect();
    Ok((inst, costs))
}

/// A heavy-tailed random digraph standing in for a SNAP vote network when the
/// real file is not available: out-degrees are geometric with the given mean
/// and targets are drawn with Zipf weights.
pub fn synthetic_graph(sources: usize, targets: usize, mean_out_degree: f64, seed: u64) -> Result<BipartiteGraph> {
    if targets == 0 || !(mean_out_degree >= 1.0) {
        return input("synthetic graph needs targets and a mean out-degree of at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (1..=targets).map(|r| 1.0 / r as f64).collect();
    let zipf = WeightedIndex::new(&weights).map_err(|e| Error::Input(e.to_string()))?;
    let p = 1.0 / mean_out_degree;
    let mut edges = Vec::new();
    for u in 0..sources as u64 {
        let mut d = 1;
        while d < targets && !rng.gen_bool(p) {
            d += 1;
        }
        for _ in 0..d {
            edges.push((u, (sources + zipf.sample(&mut rng)) as u64));
        }
    }
    Ok(BipartiteGraph::from_edges(edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::{marginal, SellerId, SellerSet};

    #[test]
    fn parses_comments_and_dedups() {
        let g = parse_edge_str("# hdr\n1 2\n1 3\n").unwrap();
        assert_eq!(g.sources, vec![1]);
        assert_eq!(g.out, vec![vec![0, 1]]);
        let g = parse_edge_str("1 2\n1 2\n").unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(parse_edge_str("").unwrap(), BipartiteGraph::default());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_edge_str("# ok\n1 2\n3 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{:?}", other),
        }
        assert!(matches!(parse_edge_str("1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_str("1 2 3\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_graph_cannot_build() {
        let g = BipartiteGraph::default();
        assert!(matches!(build_instance(&g, &ExperimentConfig::new(1, 1.0, 1, 0), 0), Err(Error::Capacity(_))));
    }

    #[test]
    fn unit_scale_uses_degrees() {
        let g = parse_edge_str("1 10\n1 11\n2 11\n3 12\n4 1\n").unwrap();
        let (inst, costs) = build_instance(&g, &ExperimentConfig::new(4, 1.0, 1, 9), 0).unwrap();
        assert_eq!(costs, vec![2.0, 1.0, 1.0, 1.0]);
        // Target 11 has in-degree 2.
        assert_eq!(marginal(&inst, SellerId(1), &SellerSet::new()).unwrap(), 2.0);
    }

    #[test]
    fn kappa_within_range_and_deterministic() {
        let g = synthetic_graph(50, 40, 4.0, 1).unwrap();
        let cfg = ExperimentConfig::new(10, 2.0, 1, 5);
        let (a, ca) = build_instance(&g, &cfg, 3).unwrap();
        let (b, cb) = build_instance(&g, &cfg, 3).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(ca, cb);
        let unit = build_instance(&g, &ExperimentConfig::new(10, 1.0, 1, 5), 3).unwrap().1;
        for (c, u) in ca.iter().zip(&unit) {
            if *u > 0.0 {
                let k = c / u;
                assert!((2.0..=4.0 + 1e-12).contains(&k));
            }
        }
    }

    #[test]
    fn active_fraction_examples() {
        let c = CoverageInstance::new(vec![vec![0, 1], vec![1, 2]], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(active_fraction(&c, &[4.0, 1.0]), 0.5);
        assert_eq!(active_fraction(&c, &[0.0, 0.0]), 1.0);
        assert_eq!(active_fraction(&c, &[9.0, 9.0]), 0.0);
    }

    #[test]
    fn random_instances_are_seeded() {
        let (a, ca) = random_instance(1, 4).unwrap();
        assert_eq!(a.num_sellers(), 1);
        let (b, cb) = random_instance(1, 4).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(ca, cb);
        assert!(random_instance(0, 0).is_err());
    }
}
