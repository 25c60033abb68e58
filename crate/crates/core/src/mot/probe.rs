//! Pairwise swap probes of c-cyclical monotonicity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A support point `(x, T(x), T^2(x))` of a candidate plan.
pub type MongeTriple = [f64; 3];

/// Exchange of coordinates between two support triples.
pub trait SwapTemplate: Send + Sync {
    fn name(&self) -> &'static str;
    fn apply(&self, a: &MongeTriple, b: &MongeTriple) -> (MongeTriple, MongeTriple);
}

/// Exchanges one coordinate; every two-triple rearrangement is one of these.
pub struct CoordinateSwap {
    name: &'static str,
    index: usize,
}

impl SwapTemplate for CoordinateSwap {
    fn name(&self) -> &'static str {
        self.name
    }

    fn apply(&self, a: &MongeTriple, b: &MongeTriple) -> (MongeTriple, MongeTriple) {
        let (mut a2, mut b2) = (*a, *b);
        std::mem::swap(&mut a2[self.index], &mut b2[self.index]);
        (a2, b2)
    }
}

pub struct SwapRegistry {
    templates: BTreeMap<&'static str, Arc<dyn SwapTemplate>>,
}

impl SwapRegistry {
    pub fn empty() -> Self {
        SwapRegistry {
            templates: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, t: Arc<dyn SwapTemplate>) {
        self.templates.insert(t.name(), t);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SwapTemplate>> {
        self.templates
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "swap template",
                name: name.to_string(),
                available: self
                    .templates
                    .keys()
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }

    pub fn all(&self) -> Vec<Arc<dyn SwapTemplate>> {
        self.templates.values().cloned().collect()
    }
}

impl Default for SwapRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        for (name, index) in [("first", 0), ("second", 1), ("third", 2)] {
            r.register(Arc::new(CoordinateSwap { name, index }));
        }
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub template: String,
    pub original: [MongeTriple; 2],
    pub swapped: [MongeTriple; 2],
    /// `c(original) - c(swapped)`, positive for a violation.
    pub gap: f64,
}

/// Default tolerance on the cost decrease.
pub const PROBE_TOL: f64 = 1e-10;

/// All pairs `i < j` and templates for which swapping lowers the total cost by more than `tol`.
pub fn probe_cyclical_monotonicity<C>(
    cost: C,
    triples: &[MongeTriple],
    swaps: &[Arc<dyn SwapTemplate>],
    tol: f64,
) -> Vec<Violation>
where
    C: Fn(&MongeTriple) -> f64 + Sync,
{
    let base: Vec<f64> = triples.par_iter().map(&cost).collect();
    let n = triples.len();
    let per_i: Vec<Vec<Violation>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for j in i + 1..n {
                for s in swaps {
                    let (a, b) = s.apply(&triples[i], &triples[j]);
                    if a == triples[i] && b == triples[j] {
                        continue;
                    }
                    let gap = base[i] + base[j] - cost(&a) - cost(&b);
                    if gap > tol {
                        out.push(Violation {
                            i,
                            j,
                            template: s.name().to_string(),
                            original: [triples[i], triples[j]],
                            swapped: [a, b],
                            gap,
                        });
                    }
                }
            }
            out
        })
        .collect();
    per_i.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_triples_never_violate() {
        let t = [1.0, 2.0, 15.0];
        let v = probe_cyclical_monotonicity(
            |x: &MongeTriple| x.iter().sum::<f64>().recip(),
            &[t, t],
            &SwapRegistry::default().all(),
            PROBE_TOL,
        );
        assert!(v.is_empty());
    }

    #[test]
    fn detects_a_submodular_pair() {
        // cost rewarding mismatched first coordinates: swapping helps
        let c = |x: &MongeTriple| (x[0] - x[1]).powi(2);
        let v = probe_cyclical_monotonicity(
            c,
            &[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],
            &[SwapRegistry::default().get("first").unwrap()],
            PROBE_TOL,
        );
        assert_eq!(v.len(), 1);
        assert!((v[0].gap - 2.0).abs() < 1e-15);
    }
}
