//! `(N,k)`-strongly-selective families.
//!
//! A family `S_0..S_{s-1}` of subsets of `[N]` is `(N,k)`-selective when
//! every `z` of every `Z ⊆ [N]` with `|Z| ≤ k` is isolated by some set:
//! `S_i ∩ Z = {z}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Size bound `C·k²·max(1, log₂N)` satisfied by [`build_ssf`].
pub const SIZE_CONSTANT: f64 = 2.0;

/// Samples drawn by the randomized check.
pub const SAMPLED_CHECKS: usize = 100_000;

/// Exhaustive verification is used up to this many candidate sets `Z`.
const EXHAUSTIVE_LIMIT: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsfFamily {
    #[serde(rename = "N")]
    pub id_bound: u32,
    pub k: u32,
    pub sets: Vec<Vec<u32>>,
}

impl SsfFamily {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("family serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SsfFamily = serde_json::from_str(text)?;
        for set in &f.sets {
            if set.iter().any(|&v| v == 0 || v > f.id_bound) {
                return Err(Error::invalid(format!("set element outside [1, {}]", f.id_bound)));
            }
        }
        Ok(f)
    }

    /// Indices of the sets containing `id`, in schedule order.
    pub fn slots_of(&self, id: u32) -> Vec<u64> {
        self.sets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.binary_search(&id).is_ok())
            .map(|(i, _)| i as u64)
            .collect()
    }

    /// The documented size bound for this `(N, k)`.
    pub fn size_bound(id_bound: u32, k: u32) -> f64 {
        let log = (id_bound as f64).log2().max(1.0);
        SIZE_CONSTANT * (k as f64).powi(2) * log
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn subset_count(n: u64, k: u64) -> u64 {
    (1..=k.min(n)).map(|j| binomial(n, j)).fold(0u64, |a, b| a.saturating_add(b))
}

struct Membership {
    masks: Vec<Vec<u64>>,
}

impl Membership {
    fn new(family: &SsfFamily) -> Self {
        let words = (family.id_bound as usize + 64) / 64;
        let masks = family
            .sets
            .iter()
            .map(|set| {
                let mut m = vec![0u64; words];
                for &v in set {
                    m[v as usize / 64] |= 1 << (v % 64);
                }
                m
            })
            .collect();
        Membership { masks }
    }

    fn contains(&self, set: usize, v: u32) -> bool {
        self.masks[set][v as usize / 64] >> (v % 64) & 1 == 1
    }

    /// Whether every element of `z` is isolated by some set.
    fn isolates_all(&self, z: &[u32]) -> bool {
        let mut isolated = 0usize;
        let mut seen = vec![false; z.len()];
        for set in 0..self.masks.len() {
            let mut hit = None;
            let mut count = 0;
            for (k, &v) in z.iter().enumerate() {
                if self.contains(set, v) {
                    count += 1;
                    hit = Some(k);
                    if count > 1 {
                        break;
                    }
                }
            }
            if count == 1 {
                let k = hit.unwrap();
                if !seen[k] {
                    seen[k] = true;
                    isolated += 1;
                    if isolated == z.len() {
                        return true;
                    }
                }
            }
        }
        false
    }
}

fn for_each_subset(n: u32, k: u32, f: &mut dyn FnMut(&[u32]) -> bool) -> bool {
    fn rec(start: u32, n: u32, k: u32, cur: &mut Vec<u32>, f: &mut dyn FnMut(&[u32]) -> bool) -> bool {
        if !cur.is_empty() && !f(cur) {
            return false;
        }
        if cur.len() as u32 == k {
            return true;
        }
        for v in start..=n {
            cur.push(v);
            let ok = rec(v + 1, n, k, cur, f);
            cur.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    rec(1, n, k, &mut Vec::new(), f)
}

/// Exhaustive check over every `Z` with `|Z| ≤ k`.
pub fn verify_ssf_exhaustive(family: &SsfFamily) -> bool {
    let m = Membership::new(family);
    let k = family.k.min(family.id_bound);
    for_each_subset(family.id_bound, k, &mut |z| m.isolates_all(z))
}

/// Randomized check over `samples` sets `Z` of size exactly `min(k, N)`.
pub fn verify_ssf_sampled(family: &SsfFamily, samples: usize, seed: u64) -> bool {
    let m = Membership::new(family);
    let k = family.k.min(family.id_bound) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = Vec::with_capacity(k);
    for _ in 0..samples {
        z.clear();
        while z.len() < k {
            let v = rng.gen_range(1..=family.id_bound);
            if !z.contains(&v) {
                z.push(v);
            }
        }
        if !m.isolates_all(&z) {
            return false;
        }
    }
    true
}

/// Selectivity check: exhaustive when feasible, otherwise randomized.
pub fn verify_ssf(family: &SsfFamily) -> bool {
    if family.id_bound == 0 {
        return false;
    }
    let exhaustive = (family.id_bound <= 20 && family.k <= 4)
        || subset_count(family.id_bound as u64, family.k as u64) <= EXHAUSTIVE_LIMIT;
    if exhaustive {
        verify_ssf_exhaustive(family)
    } else {
        verify_ssf_sampled(family, SAMPLED_CHECKS, 0x5eed)
    }
}

fn primes_from(start: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut p = start.max(2);
    while out.len() < count {
        if (2..).take_while(|d| d * d <= p).all(|d| p % d != 0) {
            out.push(p);
        }
        p += 1;
    }
    out
}

/// Residue-class family over primes `≥ q`: a difference below `N` has fewer
/// than `log_q N` prime factors `≥ q`, so enough primes always leave one
/// prime separating `z` from the other `k − 1` elements.
fn residue_family(id_bound: u32, k: u32, q: u64) -> Vec<Vec<u32>> {
    let n = id_bound as u64;
    let mut per_diff = 0;
    let mut x = n.saturating_sub(1);
    while x >= q {
        x /= q;
        per_diff += 1;
    }
    let count = (k as usize - 1) * per_diff + 1;
    let mut sets = Vec::new();
    for p in primes_from(q, count) {
        for r in 0..p {
            let set: Vec<u32> = (1..=id_bound).filter(|&v| v as u64 % p == r).collect();
            if !set.is_empty() {
                sets.push(set);
            }
        }
    }
    sets
}

/// Builds an `(N,k)`-ssf; `k > N` is clamped to `N`.
///
/// Residue construction over the cheapest prime range, pruned greedily
/// while exhaustive verification is affordable; the `N` singletons are
/// used whenever they are smaller.
pub fn build_ssf(id_bound: u32, k: u32) -> SsfFamily {
    assert!(id_bound >= 1 && k >= 1, "build_ssf needs N >= 1 and k >= 1");
    let k = k.min(id_bound);
    let singletons = SsfFamily { id_bound, k, sets: (1..=id_bound).map(|v| vec![v]).collect() };
    if k == 1 {
        return SsfFamily { id_bound, k, sets: vec![(1..=id_bound).collect()] };
    }
    if k == id_bound {
        return singletons;
    }
    let mut best: Option<Vec<Vec<u32>>> = None;
    let mut q = 2;
    while q <= id_bound as u64 {
        let cand = residue_family(id_bound, k, q);
        if best.as_ref().is_none_or(|b| cand.len() < b.len()) {
            best = Some(cand);
        }
        q = primes_from(q + 1, 1)[0];
    }
    let mut sets = best.unwrap_or_default();
    if sets.len() >= singletons.sets.len() {
        return singletons;
    }
    if subset_count(id_bound as u64, k as u64) <= 50_000 {
        let mut i = sets.len();
        while i > 0 {
            i -= 1;
            let mut trial = sets.clone();
            trial.remove(i);
            if verify_ssf_exhaustive(&SsfFamily { id_bound, k, sets: trial.clone() }) {
                sets = trial;
            }
        }
    }
    if sets.len() >= singletons.sets.len() {
        return singletons;
    }
    SsfFamily { id_bound, k, sets }
}
