//! Monotone submodular valuation oracles.
//!
//! Every oracle implements [`Valuation`]: a set function `f` over sellers
//! `0..n` with `f(∅) = 0`. Greedy loops do not call [`Valuation::eval`]
//! repeatedly; they open an [`Evaluator`], a per-run scratch object that
//! tracks a growing (or shrinking) tentative set and answers marginal queries
//! incrementally. Oracles themselves are immutable and can be shared across
//! threads; evaluators are single-owner.

use std::fmt;
use std::hash::Hash;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::TOLERANCE;

/// Index of a seller in `0..n`. Ordered by index; lexicographic tie-breaking
/// everywhere in the crate uses this order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SellerId(pub usize);

impl SellerId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for SellerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A duplicate-free, sorted set of sellers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<SellerId>", into = "Vec<SellerId>")]
pub struct SellerSet(Vec<SellerId>);

impl SellerSet {
    pub fn new() -> Self {
        SellerSet(Vec::new())
    }

    /// All sellers `0..n`.
    pub fn full(n: usize) -> Self {
        SellerSet((0..n).map(SellerId).collect())
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices.into_iter().map(SellerId).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: SellerId) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Inserts `i`; returns `false` if it was already present.
    pub fn insert(&mut self, i: SellerId) -> bool {
        match self.0.binary_search(&i) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, i);
                true
            }
        }
    }

    pub fn remove(&mut self, i: SellerId) -> bool {
        match self.0.binary_search(&i) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = SellerId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[SellerId] {
        &self.0
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().map(|s| s.0).collect()
    }

    pub fn is_subset(&self, other: &SellerSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Sum of `weights[i]` over members.
    pub fn total(&self, weights: &[f64]) -> f64 {
        self.iter().map(|i| weights[i.0]).sum()
    }

    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(last) if last.0 >= n => input(format!("seller {} out of range for n = {}", last, n)),
            _ => Ok(()),
        }
    }
}

impl From<Vec<SellerId>> for SellerSet {
    fn from(mut v: Vec<SellerId>) -> Self {
        v.sort_unstable();
        v.dedup();
        SellerSet(v)
    }
}

impl From<SellerSet> for Vec<SellerId> {
    fn from(s: SellerSet) -> Self {
        s.0
    }
}

impl FromIterator<SellerId> for SellerSet {
    fn from_iter<I: IntoIterator<Item = SellerId>>(iter: I) -> Self {
        SellerSet::from(iter.into_iter().collect::<Vec<_>>())
    }
}

impl fmt::Display for SellerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", i)?;
        }
        write!(f, "}}")
    }
}

/// Counts value and marginal queries issued against an oracle.
#[derive(Debug, Default)]
pub struct QueryCounter(AtomicU64);

impl QueryCounter {
    #[inline]
    pub fn bump(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// A monotone submodular set function over sellers `0..n` with `f(∅) = 0`.
pub trait Valuation: Send + Sync {
    fn num_sellers(&self) -> usize;

    /// `f(S)` for a duplicate-free member list. Callers are responsible for
    /// bounds; use [`value`] for a checked query.
    fn eval(&self, members: &[SellerId]) -> f64;

    /// Opens an incremental evaluator positioned at the empty set.
    fn evaluator(&self) -> Box<dyn Evaluator + '_>;

    /// Number of value and marginal queries answered so far.
    fn query_count(&self) -> u64;

    /// Welfare-maximizing subset of `candidates` at `prices`, when the oracle
    /// has enough structure to solve it in closed form. Ties go to the
    /// lexicographically-least minimal-cardinality maximizer.
    fn structured_demand(&self, _candidates: &SellerSet, _prices: &[f64]) -> Option<SellerSet> {
        None
    }
}

impl<V: Valuation + ?Sized> Valuation for &V {
    fn num_sellers(&self) -> usize {
        (**self).num_sellers()
    }
    fn eval(&self, members: &[SellerId]) -> f64 {
        (**self).eval(members)
    }
    fn evaluator(&self) -> Box<dyn Evaluator + '_> {
        (**self).evaluator()
    }
    fn query_count(&self) -> u64 {
        (**self).query_count()
    }
    fn structured_demand(&self, candidates: &SellerSet, prices: &[f64]) -> Option<SellerSet> {
        (**self).structured_demand(candidates, prices)
    }
}

impl<V: Valuation + ?Sized> Valuation for Box<V> {
    fn num_sellers(&self) -> usize {
        (**self).num_sellers()
    }
    fn eval(&self, members: &[SellerId]) -> f64 {
        (**self).eval(members)
    }
    fn evaluator(&self) -> Box<dyn Evaluator + '_> {
        (**self).evaluator()
    }
    fn query_count(&self) -> u64 {
        (**self).query_count()
    }
    fn structured_demand(&self, candidates: &SellerSet, prices: &[f64]) -> Option<SellerSet> {
        (**self).structured_demand(candidates, prices)
    }
}

/// Scratch state tracking a tentative set `S` for one run.
pub trait Evaluator {
    fn members(&self) -> &SellerSet;

    /// `f(S)`.
    fn value(&self) -> f64;

    /// `f(i | S)` for `i ∉ S`.
    fn gain(&mut self, i: SellerId) -> f64;

    fn insert(&mut self, i: SellerId);

    fn remove(&mut self, i: SellerId);

    /// Sellers whose gain may have changed because of the most recent
    /// `insert`/`remove`. `None` means "possibly all of them".
    fn touched(&self) -> Option<&[SellerId]> {
        None
    }
}

/// Checked `f(S)`.
pub fn value(oracle: &dyn Valuation, set: &SellerSet) -> Result<f64> {
    set.check_bounds(oracle.num_sellers())?;
    Ok(oracle.eval(set.as_slice()))
}

/// Checked `f(i | S)`, computed incrementally through an evaluator.
pub fn marginal(oracle: &dyn Valuation, i: SellerId, set: &SellerSet) -> Result<f64> {
    let n = oracle.num_sellers();
    set.check_bounds(n)?;
    if i.0 >= n {
        return input(format!("seller {} out of range for n = {}", i, n));
    }
    if set.contains(i) {
        return input(format!("seller {} already in the set", i));
    }
    let mut ev = oracle.evaluator();
    for j in set.iter() {
        ev.insert(j);
    }
    Ok(ev.gain(i))
}

/// `f(i | ∅)` for every seller.
pub fn singleton_values(oracle: &dyn Valuation) -> Vec<f64> {
    let mut ev = oracle.evaluator();
    (0..oracle.num_sellers()).map(|i| ev.gain(SellerId(i))).collect()
}

// ---------------------------------------------------------------------------
// Coverage

/// Serialized form of a coverage instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageSpec {
    pub n_sets: usize,
    pub covers: Vec<Vec<usize>>,
    pub vertex_values: Vec<f64>,
}

/// Weighted coverage: `f(S)` is the total value of vertices covered by at
/// least one selected set.
#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "CoverageSpec", into = "CoverageSpec")]
pub struct CoverageInstance {
    covers: Vec<Vec<u32>>,
    vertex_values: Vec<f64>,
    sets_of: Vec<Vec<SellerId>>,
    queries: QueryCounter,
}

impl CoverageInstance {
    pub fn new(covers: Vec<Vec<usize>>, vertex_values: Vec<f64>) -> Result<Self> {
        let m = vertex_values.len();
        if m > u32::MAX as usize {
            return input("too many vertices");
        }
        if let Some(v) = vertex_values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return input(format!("vertex value {} is not a finite nonnegative real", v));
        }
        let mut sets_of = vec![Vec::new(); m];
        let mut packed = Vec::with_capacity(covers.len());
        for (i, cover) in covers.into_iter().enumerate() {
            let mut c: Vec<u32> = Vec::with_capacity(cover.len());
            for v in cover {
                if v >= m {
                    return input(format!("set {} covers vertex {} but only {} vertices exist", i, v, m));
                }
                c.push(v as u32);
            }
            c.sort_unstable();
            c.dedup();
            for &v in &c {
                sets_of[v as usize].push(SellerId(i));
            }
            packed.push(c);
        }
        Ok(CoverageInstance { covers: packed, vertex_values, sets_of, queries: QueryCounter::default() })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_values.len()
    }

    pub fn cover(&self, i: SellerId) -> impl Iterator<Item = usize> + '_ {
        self.covers[i.0].iter().map(|&v| v as usize)
    }

    pub fn vertex_values(&self) -> &[f64] {
        &self.vertex_values
    }

    pub fn to_spec(&self) -> CoverageSpec {
        CoverageSpec {
            n_sets: self.covers.len(),
            covers: self.covers.iter().map(|c| c.iter().map(|&v| v as usize).collect()).collect(),
            vertex_values: self.vertex_values.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl Clone for CoverageInstance {
    fn clone(&self) -> Self {
        CoverageInstance {
            covers: self.covers.clone(),
            vertex_values: self.vertex_values.clone(),
            sets_of: self.sets_of.clone(),
            queries: QueryCounter::default(),
        }
    }
}

impl TryFrom<CoverageSpec> for CoverageInstance {
    type Error = Error;

    fn try_from(spec: CoverageSpec) -> Result<Self> {
        if spec.n_sets != spec.covers.len() {
            return input(format!("n_sets = {} but {} cover lists given", spec.n_sets, spec.covers.len()));
        }
        CoverageInstance::new(spec.covers, spec.vertex_values)
    }
}

impl From<CoverageInstance> for CoverageSpec {
    fn from(c: CoverageInstance) -> Self {
        c.to_spec()
    }
}

impl Valuation for CoverageInstance {
    fn num_sellers(&self) -> usize {
        self.covers.len()
    }

    fn eval(&self, members: &[SellerId]) -> f64 {
        self.queries.bump();
        let mut seen = vec![false; self.vertex_values.len()];
        let mut total = 0.0;
        for i in members {
            for &v in &self.covers[i.0] {
                let v = v as usize;
                if !seen[v] {
                    seen[v] = true;
                    total += self.vertex_values[v];
                }
            }
        }
        total
    }

    fn evaluator(&self) -> Box<dyn Evaluator + '_> {
        Box::new(CoverageEvaluator {
            inst: self,
            count: vec![0; self.vertex_values.len()],
            value: 0.0,
            members: SellerSet::new(),
            touched: Vec::new(),
        })
    }

    fn query_count(&self) -> u64 {
        self.queries.get()
    }
}

/// Keeps, per vertex, the number of selected sets covering it, so a marginal
/// query costs `O(|cover(i)|)`.
struct CoverageEvaluator<'a> {
    inst: &'a CoverageInstance,
    count: Vec<u32>,
    value: f64,
    members: SellerSet,
    touched: Vec<SellerId>,
}

impl Evaluator for CoverageEvaluator<'_> {
    fn members(&self) -> &SellerSet {
        &self.members
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn gain(&mut self, i: SellerId) -> f64 {
        self.inst.queries.bump();
        let mut g = 0.0;
        for &v in &self.inst.covers[i.0] {
            if self.count[v as usize] == 0 {
                g += self.inst.vertex_values[v as usize];
            }
        }
        g
    }

    fn insert(&mut self, i: SellerId) {
        self.touched.clear();
        if !self.members.insert(i) {
            return;
        }
        for &v in &self.inst.covers[i.0] {
            let v = v as usize;
            if self.count[v] == 0 {
                self.value += self.inst.vertex_values[v];
                self.touched.extend_from_slice(&self.inst.sets_of[v]);
            }
            self.count[v] += 1;
        }
    }

    fn remove(&mut self, i: SellerId) {
        self.touched.clear();
        if !self.members.remove(i) {
            return;
        }
        for &v in &self.inst.covers[i.0] {
            let v = v as usize;
            self.count[v] -= 1;
            if self.count[v] == 0 {
                self.value -= self.inst.vertex_values[v];
                self.touched.extend_from_slice(&self.inst.sets_of[v]);
            }
        }
    }

    fn touched(&self) -> Option<&[SellerId]> {
        Some(&self.touched)
    }
}

// ---------------------------------------------------------------------------
// Additive

/// Modular valuation `f(S) = Σ w_i`. Mostly useful in tests.
#[derive(Debug)]
pub struct Additive {
    weights: Vec<f64>,
    queries: QueryCounter,
}

impl Additive {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return input("additive weights must be finite and nonnegative");
        }
        Ok(Additive { weights, queries: QueryCounter::default() })
    }
}

impl Valuation for Additive {
    fn num_sellers(&self) -> usize {
        self.weights.len()
    }

    fn eval(&self, members: &[SellerId]) -> f64 {
        self.queries.bump();
        members.iter().map(|i| self.weights[i.0]).sum()
    }

    fn evaluator(&self) -> Box<dyn Evaluator + '_> {
        Box::new(AdditiveEvaluator { oracle: self, members: SellerSet::new(), value: 0.0 })
    }

    fn query_count(&self) -> u64 {
        self.queries.get()
    }
}

struct AdditiveEvaluator<'a> {
    oracle: &'a Additive,
    members: SellerSet,
    value: f64,
}

impl Evaluator for AdditiveEvaluator<'_> {
    fn members(&self) -> &SellerSet {
        &self.members
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn gain(&mut self, i: SellerId) -> f64 {
        self.oracle.queries.bump();
        self.oracle.weights[i.0]
    }
    fn insert(&mut self, i: SellerId) {
        if self.members.insert(i) {
            self.value += self.oracle.weights[i.0];
        }
    }
    fn remove(&mut self, i: SellerId) {
        if self.members.remove(i) {
            self.value -= self.oracle.weights[i.0];
        }
    }
    fn touched(&self) -> Option<&[SellerId]> {
        Some(&[])
    }
}

// ---------------------------------------------------------------------------
// Adversarial family

/// The `L + 2` seller instance on which a descending auction with an exact
/// demand oracle and an adversarial schedule ends far from optimal.
///
/// Sellers `0..L` are "regular", sellers `L` and `L + 1` are "special"
/// (1-based: `1..=L` and `L+1`, `L+2`). `f(S) = |S|` when `S` contains no
/// special seller, otherwise `f(S) = L`.
#[derive(Debug)]
pub struct AdversarialFamily {
    l: usize,
    queries: QueryCounter,
}

impl AdversarialFamily {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            return input("family parameter L must be positive");
        }
        Ok(AdversarialFamily { l, queries: QueryCounter::default() })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn specials(&self) -> [SellerId; 2] {
        [SellerId(self.l), SellerId(self.l + 1)]
    }

    pub fn is_special(&self, i: SellerId) -> bool {
        i.0 >= self.l
    }

    /// `1/L` for regular sellers and `L − 2` for the two special ones.
    pub fn bids(&self) -> Vec<f64> {
        let l = self.l as f64;
        let mut b = vec![1.0 / l; self.l];
        b.extend([l - 2.0, l - 2.0]);
        b
    }
}

impl Valuation for AdversarialFamily {
    fn num_sellers(&self) -> usize {
        self.l + 2
    }

    fn eval(&self, members: &[SellerId]) -> f64 {
        self.queries.bump();
        if members.iter().any(|&i| self.is_special(i)) {
            self.l as f64
        } else {
            members.len() as f64
        }
    }

    fn evaluator(&self) -> Box<dyn Evaluator + '_> {
        Box::new(FamilyEvaluator { family: self, members: SellerSet::new(), specials: 0 })
    }

    fn query_count(&self) -> u64 {
        self.queries.get()
    }

    fn structured_demand(&self, candidates: &SellerSet, prices: &[f64]) -> Option<SellerSet> {
        // Either a set of regular sellers (value 1 each) or a single special
        // seller (value L); mixing never helps since extra members add cost
        // and no value.
        let mut regular = SellerSet::new();
        let mut regular_welfare = 0.0;
        let mut best_special: Option<SellerId> = None;
        for i in candidates.iter() {
            if self.is_special(i) {
                if best_special.map_or(true, |j| prices[i.0] < prices[j.0]) {
                    best_special = Some(i);
                }
            } else if 1.0 - prices[i.0] > TOLERANCE {
                regular_welfare += 1.0 - prices[i.0];
                regular.insert(i);
            }
        }
        let Some(j) = best_special else {
            return Some(regular);
        };
        let special_welfare = self.l as f64 - prices[j.0];
        if special_welfare > regular_welfare + TOLERANCE {
            Some(SellerSet::from_iter([j]))
        } else if special_welfare < regular_welfare - TOLERANCE || regular.len() <= 1 {
            // A one-member regular set wins the lexicographic tie since
            // regular indices precede special ones.
            Some(regular)
        } else {
            Some(SellerSet::from_iter([j]))
        }
    }
}

struct FamilyEvaluator<'a> {
    family: &'a AdversarialFamily,
    members: SellerSet,
    specials: usize,
}

impl FamilyEvaluator<'_> {
    fn current(&self) -> f64 {
        if self.specials > 0 {
            self.family.l as f64
        } else {
            self.members.len() as f64
        }
    }
}

impl Evaluator for FamilyEvaluator<'_> {
    fn members(&self) -> &SellerSet {
        &self.members
    }
    fn value(&self) -> f64 {
        self.current()
    }
    fn gain(&mut self, i: SellerId) -> f64 {
        self.family.queries.bump();
        if self.specials > 0 {
            0.0
        } else if self.family.is_special(i) {
            self.family.l as f64 - self.members.len() as f64
        } else {
            1.0
        }
    }
    fn insert(&mut self, i: SellerId) {
        if self.members.insert(i) && self.family.is_special(i) {
            self.specials += 1;
        }
    }
    fn remove(&mut self, i: SellerId) {
        if self.members.remove(i) && self.family.is_special(i) {
            self.specials -= 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Noisy wrapper

/// Bounded multiplicative noise around a base oracle:
/// `F(S) = f(S) · m(S)` with `m(S) ∈ [1 − ε, 1 + ε]` derived from a hash of
/// `(seed, sorted members)`. The same set always yields the same value.
#[derive(Debug)]
pub struct NoisyOracle<V> {
    base: V,
    epsilon: f64,
    seed: u64,
    queries: QueryCounter,
}

impl<V: Valuation> NoisyOracle<V> {
    pub fn new(base: V, epsilon: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return input(format!("noise level {} must lie in [0, 1)", epsilon));
        }
        Ok(NoisyOracle { base, epsilon, seed, queries: QueryCounter::default() })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn base(&self) -> &V {
        &self.base
    }

    /// The perturbation factor `m(S)` for sorted members.
    pub fn factor(&self, sorted_members: &[SellerId]) -> f64 {
        if self.epsilon == 0.0 {
            return 1.0;
        }
        let mut h = crate::splitmix64(self.seed);
        for i in sorted_members {
            h = crate::splitmix64(h ^ i.0 as u64);
        }
        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
        1.0 + self.epsilon * (2.0 * u - 1.0)
    }

    fn noisy(&self, sorted_members: &[SellerId]) -> f64 {
        self.queries.bump();
        self.base.eval(sorted_members) * self.factor(sorted_members)
    }
}

impl<V: Valuation> Valuation for NoisyOracle<V> {
    fn num_sellers(&self) -> usize {
        self.base.num_sellers()
    }

    fn eval(&self, members: &[SellerId]) -> f64 {
        if members.windows(2).all(|w| w[0] < w[1]) {
            self.noisy(members)
        } else {
            let set = SellerSet::from(members.to_vec());
            self.noisy(set.as_slice())
        }
    }

    fn evaluator(&self) -> Box<dyn Evaluator + '_> {
        Box::new(NoisyEvaluator { oracle: self, members: SellerSet::new(), current: 0.0 })
    }

    fn query_count(&self) -> u64 {
        self.queries.get()
    }
}

/// Recomputes `F` from scratch: `F` is not submodular, so there is no useful
/// incremental structure, and a fresh evaluation keeps `F(S)` a pure
/// function of `S`.
struct NoisyEvaluator<'a, V> {
    oracle: &'a NoisyOracle<V>,
    members: SellerSet,
    current: f64,
}

impl<V: Valuation> Evaluator for NoisyEvaluator<'_, V> {
    fn members(&self) -> &SellerSet {
        &self.members
    }
    fn value(&self) -> f64 {
        self.current
    }
    fn gain(&mut self, i: SellerId) -> f64 {
        let mut with = self.members.clone();
        with.insert(i);
        self.oracle.noisy(with.as_slice()) - self.current
    }
    fn insert(&mut self, i: SellerId) {
        if self.members.insert(i) {
            self.current = self.oracle.noisy(self.members.as_slice());
        }
    }
    fn remove(&mut self, i: SellerId) {
        if self.members.remove(i) {
            self.current = self.oracle.noisy(self.members.as_slice());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_sets() -> CoverageInstance {
        // A -> {v1, v2}, B -> {v2, v3}, values (1, 2, 3)
        CoverageInstance::new(vec![vec![0, 1], vec![1, 2]], vec![1.0, 2.0, 3.0]).unwrap()
    }

    fn set(ix: &[usize]) -> SellerSet {
        SellerSet::from_indices(ix.iter().copied())
    }

    #[test]
    fn coverage_values() {
        let c = two_sets();
        assert_eq!(value(&c, &SellerSet::new()).unwrap(), 0.0);
        assert_eq!(value(&c, &set(&[0, 1])).unwrap(), 6.0);
        assert_eq!(marginal(&c, SellerId(0), &set(&[1])).unwrap(), 1.0);
        assert_eq!(marginal(&c, SellerId(1), &SellerSet::new()).unwrap(), 5.0);
    }

    #[test]
    fn marginal_rejects_member_and_out_of_range() {
        let c = two_sets();
        assert!(matches!(marginal(&c, SellerId(1), &set(&[1])), Err(Error::Input(_))));
        assert!(matches!(value(&c, &set(&[5])), Err(Error::Input(_))));
        assert!(matches!(marginal(&c, SellerId(7), &SellerSet::new()), Err(Error::Input(_))));
    }

    #[test]
    fn coverage_rejects_dangling_vertex() {
        assert!(CoverageInstance::new(vec![vec![0, 3]], vec![1.0, 1.0]).is_err());
        assert!(CoverageInstance::new(vec![vec![0]], vec![-1.0]).is_err());
    }

    #[test]
    fn coverage_json_round_trip() {
        let c = two_sets();
        let text = c.to_json().unwrap();
        assert_eq!(text, r#"{"n_sets":2,"covers":[[0,1],[1,2]],"vertex_values":[1.0,2.0,3.0]}"#);
        let back = CoverageInstance::from_json(&text).unwrap();
        assert_eq!(back.eval(&[SellerId(0), SellerId(1)]), 6.0);
        assert!(CoverageInstance::from_json(r#"{"n_sets":3,"covers":[[0]],"vertex_values":[1.0]}"#).is_err());
    }

    #[test]
    fn evaluator_touched_lists_sets_sharing_new_vertices() {
        let c = two_sets();
        let mut ev = c.evaluator();
        ev.insert(SellerId(0));
        let mut t: Vec<_> = ev.touched().unwrap().to_vec();
        t.sort();
        t.dedup();
        assert_eq!(t, vec![SellerId(0), SellerId(1)]);
        ev.remove(SellerId(0));
        assert_eq!(ev.value(), 0.0);
        assert_eq!(ev.gain(SellerId(1)), 5.0);
    }

    #[test]
    fn family_matches_case_definition() {
        // L = 3, 1-based {1, 2, 4} -> 0-based {0, 1, 3}: contains a special.
        let fam = AdversarialFamily::new(3).unwrap();
        assert_eq!(value(&fam, &set(&[0, 1, 3])).unwrap(), 3.0);
        assert_eq!(marginal(&fam, SellerId(0), &set(&[3])).unwrap(), 0.0);
        assert_eq!(fam.bids(), vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0, 1.0]);
        for l in 1..=5usize {
            let fam = AdversarialFamily::new(l).unwrap();
            let n = l + 2;
            for mask in 0u32..(1 << n) {
                let s: SellerSet = (0..n).filter(|i| mask >> i & 1 == 1).map(SellerId).collect();
                let special = s.iter().any(|i| i.0 >= l);
                let expected = if special { l as f64 } else { s.len() as f64 };
                assert_eq!(fam.eval(s.as_slice()), expected);
                let mut ev = fam.evaluator();
                for i in s.iter() {
                    ev.insert(i);
                }
                assert_eq!(ev.value(), expected);
            }
        }
    }

    #[test]
    fn family_structured_demand() {
        let fam = AdversarialFamily::new(3).unwrap();
        // Initial prices f(i | ∅): everything ties at zero welfare.
        let p = vec![1.0, 1.0, 1.0, 3.0, 3.0];
        let d = fam.structured_demand(&SellerSet::full(5), &p).unwrap();
        assert!(d.is_empty());
        let p = vec![0.5, 0.5, 1.0, 2.5, 3.0];
        let d = fam.structured_demand(&SellerSet::full(5), &p).unwrap();
        assert_eq!(d, set(&[0, 1]));
    }

    #[test]
    fn noisy_zero_noise_is_exact_and_deterministic() {
        let c = two_sets();
        let exact = NoisyOracle::new(&c, 0.0, 9).unwrap();
        assert_eq!(exact.eval(&[SellerId(0), SellerId(1)]), 6.0);
        let noisy = NoisyOracle::new(&c, 0.1, 9).unwrap();
        let a = noisy.eval(&[SellerId(1), SellerId(0)]);
        let b = noisy.eval(&[SellerId(0), SellerId(1)]);
        assert_eq!(a, b);
        assert!((5.4..=6.6).contains(&a));
        assert!(NoisyOracle::new(&c, 1.0, 0).is_err());
    }

    #[test]
    fn query_counter_counts_gains() {
        let c = two_sets();
        let before = c.query_count();
        let mut ev = c.evaluator();
        ev.gain(SellerId(0));
        ev.gain(SellerId(1));
        assert_eq!(c.query_count() - before, 2);
    }
}
