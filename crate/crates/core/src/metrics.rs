//! Distribution comparison metrics and synthetic counting statistics.
//!
//! Outcome keys are any ordered type: an OAM value `i64`, a `(Polarization, i64)`
//! pair, or a pair of two-photon modes. Keys missing from a distribution carry
//! zero probability, so two distributions with different supports can always
//! be compared.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};

/// Name of the generator behind [`sample_counts`], recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

const NORMALIZATION_TOL: f64 = 1e-9;

/// A discrete probability distribution over ordered outcome keys.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist<K: Ord> {
    probs: BTreeMap<K, f64>,
    sub_normalized: bool,
}

impl<K: Ord + Clone> ProbDist<K> {
    /// Builds a normalized distribution. Probabilities must be nonnegative and
    /// sum to one within 1e-9.
    pub fn new(probs: BTreeMap<K, f64>) -> Result<Self> {
        check_nonnegative(&probs)?;
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::validation(
                "distribution",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
        Ok(Self {
            probs,
            sub_normalized: false,
        })
    }

    /// Builds a distribution whose mass may fall short of one, such as the
    /// coincidence events behind a beam splitter.
    pub fn sub_normalized(probs: BTreeMap<K, f64>) -> Result<Self> {
        check_nonnegative(&probs)?;
        let total: f64 = probs.values().sum();
        if total > 1.0 + NORMALIZATION_TOL {
            return Err(Error::validation(
                "distribution",
                format!("probabilities sum to {total}, which exceeds 1"),
            ));
        }
        Ok(Self {
            probs,
            sub_normalized: true,
        })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (K, f64)>) -> Result<Self> {
        Self::new(accumulate(pairs))
    }

    pub fn is_sub_normalized(&self) -> bool {
        self.sub_normalized
    }

    /// Probability of `key`, zero when absent.
    pub fn get(&self, key: &K) -> f64 {
        self.probs.get(key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.probs.iter().map(|(k, &p)| (k, p))
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.probs.keys()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn as_map(&self) -> &BTreeMap<K, f64> {
        &self.probs
    }

    /// Rescales to unit mass.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::EmptyDistribution);
        }
        Ok(Self {
            probs: self
                .probs
                .iter()
                .map(|(k, &p)| (k.clone(), p / total))
                .collect(),
            sub_normalized: false,
        })
    }

    /// Relabels outcomes, summing probabilities of keys that collide.
    pub fn map_keys<K2: Ord + Clone>(&self, mut f: impl FnMut(&K) -> K2) -> ProbDist<K2> {
        ProbDist {
            probs: accumulate(self.probs.iter().map(|(k, &p)| (f(k), p))),
            sub_normalized: self.sub_normalized,
        }
    }

    pub(crate) fn from_map_unchecked(probs: BTreeMap<K, f64>, sub_normalized: bool) -> Self {
        Self {
            probs,
            sub_normalized,
        }
    }
}

fn accumulate<K: Ord>(pairs: impl IntoIterator<Item = (K, f64)>) -> BTreeMap<K, f64> {
    let mut map = BTreeMap::new();
    for (k, p) in pairs {
        *map.entry(k).or_insert(0.0) += p;
    }
    map
}

fn check_nonnegative<K>(probs: &BTreeMap<K, f64>) -> Result<()> {
    match probs.values().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        Some(p) => Err(Error::validation(
            "distribution",
            format!("probability {p} is negative or not finite"),
        )),
        None => Ok(()),
    }
}

fn union_keys<'a, K: Ord + Clone>(p: &'a ProbDist<K>, q: &'a ProbDist<K>) -> Vec<&'a K> {
    let mut keys: Vec<&K> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    keys
}

/// Bhattacharyya-type similarity `(Σ √(P P′))² / (ΣP ΣP′)`.
///
/// Sub-normalized inputs are handled by the denominator, which amounts to
/// comparing both after renormalization.
pub fn similarity<K: Ord + Clone>(p: &ProbDist<K>, q: &ProbDist<K>) -> Result<f64> {
    let (tp, tq) = (p.total(), q.total());
    if tp <= 0.0 || tq <= 0.0 {
        return Err(Error::EmptyDistribution);
    }
    let overlap: f64 = union_keys(p, q)
        .into_iter()
        .map(|k| (p.get(k) * q.get(k)).sqrt())
        .sum();
    Ok((overlap * overlap / (tp * tq)).min(1.0))
}

/// Total variation distance, half the L1 distance, after renormalizing both inputs.
pub fn tvd<K: Ord + Clone>(p: &ProbDist<K>, q: &ProbDist<K>) -> Result<f64> {
    let (tp, tq) = (p.total(), q.total());
    if tp <= 0.0 || tq <= 0.0 {
        return Err(Error::EmptyDistribution);
    }
    let l1: f64 = union_keys(p, q)
        .into_iter()
        .map(|k| (p.get(k) / tp - q.get(k) / tq).abs())
        .sum();
    Ok(0.5 * l1)
}

/// Counts recorded over a number of shots. For sub-normalized sources the
/// unrecorded shots are the missing mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRecord<K: Ord> {
    pub counts: BTreeMap<K, u64>,
    pub shots: u64,
}

impl<K: Ord + Clone> CountRecord<K> {
    pub fn new(counts: BTreeMap<K, u64>, shots: u64) -> Result<Self> {
        let recorded: u64 = counts.values().sum();
        if recorded > shots {
            return Err(Error::validation(
                "counts",
                format!("{recorded} recorded counts exceed {shots} shots"),
            ));
        }
        Ok(Self { counts, shots })
    }

    pub fn get(&self, key: &K) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn recorded(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Every count multiplied by `factor` (shots included).
    pub fn scaled(&self, factor: u64) -> Self {
        Self {
            counts: self
                .counts
                .iter()
                .map(|(k, &c)| (k.clone(), c * factor))
                .collect(),
            shots: self.shots * factor,
        }
    }

    /// Empirical frequencies normalized by the recorded counts.
    pub fn frequencies(&self) -> Result<ProbDist<K>> {
        let total = self.recorded();
        if total == 0 {
            return Err(Error::EmptyDistribution);
        }
        Ok(ProbDist::from_map_unchecked(
            self.counts
                .iter()
                .map(|(k, &c)| (k.clone(), c as f64 / total as f64))
                .collect(),
            false,
        ))
    }
}

/// Draws a multinomial sample of `shots` events from `dist` with a seeded
/// generator. Mass missing from a sub-normalized distribution goes unrecorded.
pub fn sample_counts<K: Ord + Clone>(dist: &ProbDist<K>, shots: u64, seed: u64) -> Result<CountRecord<K>> {
    if shots == 0 {
        return Err(Error::validation("shots", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining_shots = shots;
    let mut remaining_mass = 1.0_f64;
    let mut counts = BTreeMap::new();
    for (key, p) in dist.iter() {
        if remaining_shots == 0 {
            break;
        }
        let conditional = if remaining_mass > 0.0 {
            (p / remaining_mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let drawn = Binomial::new(remaining_shots, conditional)
            .map_err(|e| Error::validation("distribution", e.to_string()))?
            .sample(&mut rng);
        if drawn > 0 {
            counts.insert(key.clone(), drawn);
        }
        remaining_shots -= drawn;
        remaining_mass -= p;
    }
    Ok(CountRecord { counts, shots })
}

/// Poisson standard deviation `√count` for every recorded outcome.
pub fn poisson_sigma<K: Ord + Clone>(record: &CountRecord<K>) -> BTreeMap<K, f64> {
    record
        .counts
        .iter()
        .map(|(k, &c)| (k.clone(), (c as f64).sqrt()))
        .collect()
}

/// Seed for the `index`-th parallel task, derived with a SplitMix64 step so
/// that streams do not overlap for neighbouring indices.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// JSON-serializable comparison report.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MetricsReport {
    pub similarity: f64,
    pub tvd: f64,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub rng: &'static str,
}

impl MetricsReport {
    pub fn compare<K: Ord + Clone>(
        p: &ProbDist<K>,
        q: &ProbDist<K>,
        shots: Option<u64>,
        seed: Option<u64>,
    ) -> Result<Self> {
        Ok(Self {
            similarity: similarity(p, q)?,
            tvd: tvd(p, q)?,
            shots,
            seed,
            rng: RNG_ALGORITHM,
        })
    }
}
