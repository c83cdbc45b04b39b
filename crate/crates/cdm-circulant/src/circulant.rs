//! Circulant graphs `Cay(Z_n; S)`: construction from generators,
//! neighborhoods, connectivity, edge lists, and multiplier-based
//! canonicalization of 5-valent connection sets to `{±1, ±c, n/2}`.
//!
//! Vertices are the residues `0..n-1`; labels (which live in `1..=n`) are a
//! different kind of value and belong to [`crate::labeler`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::arith::{gcd, units};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("order must be at least 2, got {0}")]
    OrderTooSmall(u64),
    #[error("generator {generator} out of range 1..{n}")]
    GeneratorOutOfRange { n: u64, generator: u64 },
    #[error("vertex {vertex} out of range 0..{n}")]
    VertexOutOfRange { n: u64, vertex: u64 },
    #[error("canonicalization needs valency 5 over an even order with n/2 in the set; got valency {valency} over order {n}")]
    NotFiveValentWithInvolution { n: u64, valency: usize },
}

/// A circulant graph given by its order and inverse-closed connection set.
///
/// The set never contains 0 and is closed under `s -> n - s`, so the graph
/// is simple and undirected. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CirculantSpec {
    n: u64,
    set: BTreeSet<u64>,
}

impl CirculantSpec {
    /// Builds a spec from an order and a list of generators. The stored
    /// connection set is the inverse closure of the input.
    pub fn new(n: u64, generators: &[u64]) -> Result<Self, SpecError> {
        if n < 2 {
            return Err(SpecError::OrderTooSmall(n));
        }
        let mut set = BTreeSet::new();
        for &g in generators {
            if g == 0 || g >= n {
                return Err(SpecError::GeneratorOutOfRange { n, generator: g });
            }
            set.insert(g);
            set.insert(n - g);
        }
        Ok(Self { n, set })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn valency(&self) -> usize {
        self.set.len()
    }

    pub fn connection_set(&self) -> &BTreeSet<u64> {
        &self.set
    }

    /// The set `{x} ∪ {x + s : s ∈ S}` of size valency + 1.
    pub fn closed_neighborhood(&self, x: u64) -> Result<BTreeSet<u64>, SpecError> {
        if x >= self.n {
            return Err(SpecError::VertexOutOfRange { n: self.n, vertex: x });
        }
        let mut nb: BTreeSet<u64> = self.set.iter().map(|&s| (x + s) % self.n).collect();
        nb.insert(x);
        Ok(nb)
    }

    /// Connected exactly when the connection set generates `Z_n`, i.e. the
    /// gcd of `n` and every element of `S` is 1.
    pub fn is_connected(&self) -> bool {
        self.set.iter().fold(self.n, |g, &s| gcd(g, s)) == 1
    }

    /// Every undirected edge once, in lexicographic order.
    pub fn edge_list(&self) -> Vec<(u64, u64)> {
        let mut edges = BTreeSet::new();
        for x in 0..self.n {
            for &s in &self.set {
                let y = (x + s) % self.n;
                edges.insert((x.min(y), x.max(y)));
            }
        }
        edges.into_iter().collect()
    }

    /// Graphviz DOT rendering of the edge list.
    pub fn to_dot(&self) -> String {
        let set: Vec<String> = self.set.iter().map(|s| s.to_string()).collect();
        let mut out = String::new();
        let _ = writeln!(out, "graph circulant_{} {{", self.n);
        let _ = writeln!(out, "  // Cay(Z_{}; {{{}}})", self.n, set.join(", "));
        let _ = writeln!(out, "  layout=circo;");
        for (u, v) in self.edge_list() {
            let _ = writeln!(out, "  {u} -- {v};");
        }
        out.push_str("}\n");
        out
    }
}

/// A 5-valent presentation `{±1, ±c, n/2}` with `1 < c < n/2`, reached from
/// some spec by the unit multiplier `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalForm {
    pub n: u64,
    pub c: u64,
    /// Unit `q` with `q·S = {±1, ±c, n/2}` for the source spec.
    pub multiplier: u64,
}

impl CanonicalForm {
    /// The canonical spec `Cay(Z_n; {±1, ±c, n/2})`.
    pub fn spec(&self) -> CirculantSpec {
        CirculantSpec::new(self.n, &[1, self.c, self.n / 2])
            .expect("canonical parameters are in range")
    }
}

pub(crate) fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    (a as u128 * b as u128 % n as u128) as u64
}

/// All distinct canonical pairs `(n, c)` reachable from a 5-valent spec by
/// some unit multiplier, each reported with the smallest multiplier that
/// reaches it, ascending in `c`.
///
/// Every unit is tried because distinct multipliers can land on distinct
/// `c`, and a later classification must consider each representative. The
/// list is empty exactly when neither generator pair of `S = {±a, ±b, n/2}`
/// is coprime to `n`.
pub fn canonical_forms_valency5(spec: &CirculantSpec) -> Result<Vec<CanonicalForm>, SpecError> {
    let n = spec.n();
    if spec.valency() != 5 || n % 2 != 0 || !spec.connection_set().contains(&(n / 2)) {
        return Err(SpecError::NotFiveValentWithInvolution {
            n,
            valency: spec.valency(),
        });
    }
    let mut reached: BTreeMap<u64, u64> = BTreeMap::new();
    for q in units(n) {
        let image: BTreeSet<u64> = spec
            .connection_set()
            .iter()
            .map(|&s| mul_mod(q, s, n))
            .collect();
        if !image.contains(&1) {
            continue;
        }
        // The image is inverse-closed, contains 1, n-1 and n/2 (q is odd),
        // so the remaining pair is {c, n-c} for a unique 1 < c < n/2.
        let c = image
            .iter()
            .copied()
            .filter(|&v| v != 1 && v != n - 1 && v != n / 2)
            .min()
            .expect("five distinct elements leave a pair");
        debug_assert!(c > 1 && 2 * c < n && image.contains(&(n - c)));
        reached.entry(c).or_insert(q);
    }
    Ok(reached
        .into_iter()
        .map(|(c, multiplier)| CanonicalForm { n, c, multiplier })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn spec(n: u64, gens: &[u64]) -> CirculantSpec {
        CirculantSpec::new(n, gens).unwrap()
    }

    #[test]
    fn inverse_closure() {
        let s = spec(24, &[1, 5, 12]);
        let want: BTreeSet<u64> = [1, 5, 12, 19, 23].into_iter().collect();
        assert_eq!(s.connection_set(), &want);

        let k4 = spec(4, &[1, 2]);
        let want: BTreeSet<u64> = [1, 2, 3].into_iter().collect();
        assert_eq!(k4.connection_set(), &want);

        let matching = spec(6, &[3]);
        let want: BTreeSet<u64> = [3].into_iter().collect();
        assert_eq!(matching.connection_set(), &want);
    }

    #[test]
    fn rejects_bad_generators() {
        assert!(CirculantSpec::new(1, &[1]).is_err());
        assert!(CirculantSpec::new(8, &[0]).is_err());
        assert!(CirculantSpec::new(8, &[8]).is_err());
    }

    #[test]
    fn closed_neighborhoods() {
        let s = spec(8, &[1, 3, 4]);
        let nb = s.closed_neighborhood(0).unwrap();
        let want: BTreeSet<u64> = [0, 1, 3, 4, 5, 7].into_iter().collect();
        assert_eq!(nb, want);

        let k4 = spec(4, &[1, 2]);
        let nb = k4.closed_neighborhood(2).unwrap();
        let want: BTreeSet<u64> = [0, 1, 2, 3].into_iter().collect();
        assert_eq!(nb, want);

        let s = spec(24, &[1, 5, 12]);
        let nb = s.closed_neighborhood(10).unwrap();
        let want: BTreeSet<u64> = [10, 11, 15, 22, 5, 9].into_iter().collect();
        assert_eq!(nb, want);

        assert!(s.closed_neighborhood(24).is_err());
    }

    #[test]
    fn connectivity() {
        assert!(spec(24, &[1, 5, 12]).is_connected());
        assert!(!spec(8, &[2, 4, 6]).is_connected());
        assert!(spec(4, &[1, 2]).is_connected());
        assert!(!spec(6, &[3]).is_connected());
    }

    #[test]
    fn edge_counts() {
        assert_eq!(spec(4, &[1, 2]).edge_list().len(), 6);
        assert_eq!(spec(6, &[3]).edge_list().len(), 3);
        assert_eq!(spec(24, &[1, 5, 12]).edge_list().len(), 60);
    }

    #[test]
    fn canonical_identity_multiplier() {
        let forms = canonical_forms_valency5(&spec(24, &[1, 5, 12])).unwrap();
        assert_eq!(forms.len(), 1);
        assert_eq!(forms[0], CanonicalForm { n: 24, c: 5, multiplier: 1 });
    }

    #[test]
    fn canonical_multiplier_scan() {
        // 5*5 = 25 ≡ 1 and 5*7 = 35 ≡ 11 (mod 24).
        let forms = canonical_forms_valency5(&spec(24, &[5, 7, 12])).unwrap();
        assert!(forms.contains(&CanonicalForm { n: 24, c: 11, multiplier: 5 }));
    }

    #[test]
    fn canonical_rejects_wrong_valency() {
        let six = spec(12, &[2, 3, 4]);
        assert_eq!(six.valency(), 6);
        assert!(canonical_forms_valency5(&six).is_err());
    }

    #[test]
    fn canonical_empty_without_coprime_generator() {
        // S = {±2, ±4, 6} over n = 12: both generator pairs share a factor
        // with n, so no multiplier reaches {±1, ±c, 6}.
        let s = spec(12, &[2, 4, 6]);
        assert!(canonical_forms_valency5(&s).unwrap().is_empty());
    }

    #[test]
    fn five_valent_sets_contain_the_involution() {
        for n in (6..=40u64).step_by(2) {
            for a in 1..n / 2 {
                for b in (a + 1)..n / 2 {
                    let s = spec(n, &[a, b, n / 2]);
                    if s.valency() != 5 {
                        continue;
                    }
                    let self_inverse: Vec<u64> = s
                        .connection_set()
                        .iter()
                        .copied()
                        .filter(|&v| (2 * v) % n == 0)
                        .collect();
                    assert_eq!(self_inverse, vec![n / 2]);
                }
            }
        }
    }

    #[test]
    fn canonical_image_is_exact() {
        for (n, gens) in [(24u64, vec![1u64, 5, 12]), (24, vec![5, 7, 12]), (30, vec![1, 4, 15])] {
            let s = spec(n, &gens);
            for form in canonical_forms_valency5(&s).unwrap() {
                let image: BTreeSet<u64> = s
                    .connection_set()
                    .iter()
                    .map(|&v| mul_mod(form.multiplier, v, n))
                    .collect();
                let want: BTreeSet<u64> =
                    [1, form.c, n / 2, n - form.c, n - 1].into_iter().collect();
                assert_eq!(image, want);
            }
        }
    }

    #[test]
    fn canonical_nonempty_iff_coprime_pair() {
        for n in (6..=30u64).step_by(2) {
            for a in 1..n / 2 {
                for b in (a + 1)..n / 2 {
                    let s = spec(n, &[a, b, n / 2]);
                    if s.valency() != 5 {
                        continue;
                    }
                    let coprime = gcd(a, n) == 1 || gcd(b, n) == 1;
                    let forms = canonical_forms_valency5(&s).unwrap();
                    assert_eq!(!forms.is_empty(), coprime, "n={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn multiplier_action_preserves_edge_count() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.random_range(6..=100u64);
            let a = rng.random_range(1..n);
            let b = rng.random_range(1..n);
            let s = spec(n, &[a, b]);
            let us = units(n);
            let q = us[rng.random_range(0..us.len())];
            let mapped: Vec<u64> = s
                .connection_set()
                .iter()
                .map(|&v| mul_mod(q, v, n))
                .collect();
            let t = spec(n, &mapped);
            assert_eq!(t.valency(), s.valency());
            assert_eq!(t.edge_list().len(), s.edge_list().len());
        }
    }

    #[test]
    fn dot_export_lists_every_edge() {
        let s = spec(6, &[1, 3]);
        let dot = s.to_dot();
        assert!(dot.starts_with("graph circulant_6 {"));
        assert_eq!(dot.matches(" -- ").count(), s.edge_list().len());
    }
}
