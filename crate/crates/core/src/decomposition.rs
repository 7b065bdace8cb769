//! Signal-space decompositions `W ⤳ V₁ × … × V_p`.
//!
//! Each [`AggregationMap`] is a total labeled projection `𝒜_k : W → V_k`; its
//! fibres are the classes of an equivalence relation on `W`. A
//! [`Decomposition`] is a family of such maps whose label tuples identify
//! every symbol uniquely.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::machine::Trace;

/// Default cap on the number of traces [`ProductSet::materialize`] and
/// [`RestrictionDomain::materialize`] will produce.
pub const DEFAULT_MATERIALIZE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationMap {
    labels: Vec<String>,
    assignment: Vec<usize>,
    preimages: Vec<Vec<usize>>,
}

impl AggregationMap {
    /// `labels` is `V_k`; `assignment[ω]` is the label index of symbol ω.
    pub fn new(labels: Vec<String>, assignment: Vec<usize>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(labels.len());
        for label in &labels {
            if seen.insert(label.as_str(), ()).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        let mut preimages = vec![Vec::new(); labels.len()];
        for (symbol, &label) in assignment.iter().enumerate() {
            let Some(class) = preimages.get_mut(label) else {
                return Err(Error::PartialMap(symbol));
            };
            class.push(symbol);
        }
        if let Some(unused) = preimages.iter().position(Vec::is_empty) {
            return Err(Error::UnusedLabel(labels[unused].clone()));
        }
        Ok(AggregationMap { labels, assignment, preimages })
    }

    /// Builds a map from per-symbol label names; `V_k` is ordered by first
    /// appearance.
    pub fn from_labels<S: AsRef<str>>(per_symbol: &[S]) -> Self {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        let assignment = per_symbol
            .iter()
            .map(|l| {
                let l = l.as_ref();
                *index.entry(l).or_insert_with(|| {
                    labels.push(l.to_owned());
                    labels.len() - 1
                })
            })
            .collect();
        Self::new(labels, assignment).expect("labels drawn from the assignment are all used")
    }

    /// The map `ω ↦ ω`, labeled with the symbol names.
    pub fn identity<S: AsRef<str>>(symbols: &[S]) -> Self {
        Self::from_labels(symbols)
    }

    /// Every symbol mapped to the single label `label`.
    pub fn constant(num_symbols: usize, label: &str) -> Self {
        Self::from_labels(&vec![label; num_symbols])
    }

    pub fn num_symbols(&self) -> usize {
        self.assignment.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_name(&self, label: usize) -> &str {
        &self.labels[label]
    }

    pub fn label_id(&self, name: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_owned()))
    }

    /// `𝒜_k(ω)`.
    pub fn label_of(&self, symbol: usize) -> Result<usize> {
        self.assignment
            .get(symbol)
            .copied()
            .ok_or(Error::SymbolIndex { index: symbol, size: self.assignment.len() })
    }

    /// `𝒜_k⁻¹(θ)`, in symbol order.
    pub fn preimage(&self, label: usize) -> Result<&[usize]> {
        self.preimages
            .get(label)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownLabel(format!("#{label}")))
    }

    /// Elementwise image `v_k = 𝒜_k(w)`; keeps the start time.
    pub fn aggregate_trace(&self, w: &Trace) -> Result<Trace> {
        let symbols = w.symbols.iter().map(|&s| self.label_of(s)).collect::<Result<_>>()?;
        Ok(Trace::new(w.start, symbols))
    }

    /// `𝒜_k⁻¹(v)` in per-position product form.
    pub fn preimage_trace(&self, v: &Trace) -> Result<ProductSet> {
        let positions = v
            .symbols
            .iter()
            .map(|&l| self.preimage(l).map(<[usize]>::to_vec))
            .collect::<Result<_>>()?;
        Ok(ProductSet { start: v.start, positions })
    }
}

/// A set of equal-length traces given as a product of per-position symbol
/// sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSet {
    pub start: usize,
    pub positions: Vec<Vec<usize>>,
}

impl ProductSet {
    /// Number of traces in the product, saturating at `u128::MAX`.
    pub fn count(&self) -> u128 {
        self.positions
            .iter()
            .fold(1u128, |acc, p| acc.saturating_mul(p.len() as u128))
    }

    pub fn contains(&self, w: &Trace) -> bool {
        w.start == self.start
            && w.symbols.len() == self.positions.len()
            && w.symbols.iter().zip(&self.positions).all(|(s, p)| p.contains(s))
    }

    pub fn materialize(&self, cap: usize) -> Result<Vec<Trace>> {
        let count = self.count();
        if count > cap as u128 {
            return Err(Error::Overflow { requested: count, cap });
        }
        let mut out = vec![Vec::with_capacity(self.positions.len())];
        for position in &self.positions {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    position.iter().map(move |&s| {
                        let mut next = prefix.clone();
                        next.push(s);
                        next
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(|symbols| Trace::new(self.start, symbols)).collect())
    }
}

/// Two distinct symbols sharing the same label in every map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsistencyWitness {
    pub first: usize,
    pub second: usize,
}

impl fmt::Display for ConsistencyWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "symbols #{} and #{} carry identical label tuples", self.first, self.second)
    }
}

/// Checks that the label tuple `(𝒜_1(ω), …, 𝒜_p(ω))` is injective in ω.
///
/// The outer error is a structural problem (no maps, or maps over different
/// alphabets); the inner one reports the first colliding pair in symbol order.
pub fn check_consistency(maps: &[AggregationMap]) -> Result<std::result::Result<(), ConsistencyWitness>> {
    let Some(first) = maps.first() else {
        return Err(Error::EmptyDecomposition);
    };
    let n = first.num_symbols();
    if let Some(bad) = maps.iter().find(|m| m.num_symbols() != n) {
        return Err(Error::AlphabetMismatch { expected: n, found: bad.num_symbols() });
    }
    let mut owner: HashMap<Vec<usize>, usize> = HashMap::with_capacity(n);
    for symbol in 0..n {
        let tuple: Vec<usize> = maps.iter().map(|m| m.assignment[symbol]).collect();
        if let Some(&other) = owner.get(&tuple) {
            return Ok(Err(ConsistencyWitness { first: other, second: symbol }));
        }
        owner.insert(tuple, symbol);
    }
    Ok(Ok(()))
}

/// A consistent family of aggregation maps over one alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    maps: Vec<AggregationMap>,
}

impl Decomposition {
    pub fn new(maps: Vec<AggregationMap>) -> Result<Self> {
        check_consistency(&maps)?.map_err(Error::Inconsistent)?;
        Ok(Decomposition { maps })
    }

    /// The single identity map; consistent for any alphabet.
    pub fn identity<S: AsRef<str>>(symbols: &[S]) -> Self {
        Decomposition { maps: vec![AggregationMap::identity(symbols)] }
    }

    pub fn maps(&self) -> &[AggregationMap] {
        &self.maps
    }

    /// `p`, the number of aggregation maps.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn num_symbols(&self) -> usize {
        self.maps[0].num_symbols()
    }

    /// `𝒟_𝒜(w) = ∪_k 𝒜_k⁻¹(𝒜_k(w))`, one product per map.
    pub fn restriction_domain(&self, w: &Trace) -> Result<RestrictionDomain> {
        let parts = self
            .maps
            .iter()
            .map(|m| m.preimage_trace(&m.aggregate_trace(w)?))
            .collect::<Result<_>>()?;
        Ok(RestrictionDomain { parts })
    }

    /// `∩_k 𝒜_k⁻¹(𝒜_k(w))` in product form; equals `{w}` by consistency.
    pub fn intersect_preimages(&self, w: &Trace) -> Result<ProductSet> {
        let mut positions: Vec<BTreeSet<usize>> = Vec::new();
        for (k, m) in self.maps.iter().enumerate() {
            let part = m.preimage_trace(&m.aggregate_trace(w)?)?;
            if k == 0 {
                positions = part.positions.into_iter().map(|p| p.into_iter().collect()).collect();
            } else {
                for (acc, p) in positions.iter_mut().zip(part.positions) {
                    let p: BTreeSet<usize> = p.into_iter().collect();
                    acc.retain(|s| p.contains(s));
                }
            }
        }
        Ok(ProductSet {
            start: w.start,
            positions: positions.into_iter().map(|p| p.into_iter().collect()).collect(),
        })
    }
}

/// A union of product sets; see [`Decomposition::restriction_domain`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionDomain {
    pub parts: Vec<ProductSet>,
}

impl RestrictionDomain {
    pub fn contains(&self, w: &Trace) -> bool {
        self.parts.iter().any(|p| p.contains(w))
    }

    /// Distinct member traces, in lexicographic order.
    pub fn materialize(&self, cap: usize) -> Result<BTreeSet<Trace>> {
        let total = self.parts.iter().fold(0u128, |acc, p| acc.saturating_add(p.count()));
        if total > cap as u128 {
            return Err(Error::Overflow { requested: total, cap });
        }
        let mut out = BTreeSet::new();
        for part in &self.parts {
            out.extend(part.materialize(cap)?);
        }
        Ok(out)
    }
}
