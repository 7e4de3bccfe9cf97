//! Seeded generation and evaluation of NK-family fitness landscapes with a
//! globally shared shape policy.
//!
//! Fitness of a search policy `g` under shape policy `e` is the mean of N
//! per-locus contributions. The contribution of locus `i` depends on
//! `g[i]`, on K other search bits, and on E shape bits; which bits those
//! are is drawn once from the landscape seed and never changes.
//!
//! Everything here is a pure function of [`LandscapeConfig`]. The exact
//! generation procedure is a compatibility contract (the verification
//! oracle re-derives it independently):
//!
//! 1. A `ChaCha8Rng` is seeded with `seed` via `seed_from_u64`.
//! 2. For each locus `i` in `0..N`, in order: the K search neighbors are
//!    sampled without replacement from `{0..N} \ {i}` by a partial
//!    Fisher-Yates shuffle, then the E shape neighbors from `{0..Z}` the
//!    same way. Each shuffle step draws one `next_u64` and maps it to
//!    `0..m` by the multiply-shift `(x * m) >> 64`. Selection order is
//!    the stored neighbor order.
//! 3. The contribution value for `(locus, row)` is a counter-based hash
//!    of `(seed, locus, row)` (SplitMix64 finalizer chain) mapped to
//!    [0, 1) with 53-bit resolution. No sequential state.
//!
//! Contribution tables are materialized only while `2^(K+1+E) <= 2^20`;
//! larger landscapes evaluate values on demand. Both paths compute the
//! same function, so results are bit-identical either way.

use crate::bits::BitString;
use crate::{ConfigError, EnumerationTooLarge};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{self, Write};

/// Largest row count that still gets a materialized contribution table.
const TABLE_ROW_LIMIT: u64 = 1 << 20;

/// Largest N accepted by the exhaustive enumeration helpers.
pub const ENUMERATION_LIMIT: usize = 20;

/// Parameters defining a landscape.
///
/// * `n` — search policy length (loci).
/// * `k` — epistasis degree: other search bits coupled to each locus.
/// * `z` — shape policy length.
/// * `e` — malleability degree: shape bits coupled to each locus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LandscapeConfig {
    pub n: usize,
    pub k: usize,
    pub z: usize,
    pub e: usize,
    pub seed: u64,
}

impl LandscapeConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::ZeroLoci);
        }
        if self.k + 1 > self.n {
            return Err(ConfigError::KTooLarge {
                k: self.k,
                n: self.n,
            });
        }
        if self.e > self.z {
            return Err(ConfigError::ETooLarge {
                e: self.e,
                z: self.z,
            });
        }
        let bits = self.k + 1 + self.e;
        if bits > 63 {
            return Err(ConfigError::RowIndexTooWide { bits });
        }
        Ok(())
    }
}

/// An immutable fitness landscape. Safe to share read-only across threads.
#[derive(Debug, Clone)]
pub struct Landscape {
    cfg: LandscapeConfig,
    /// Per locus: the K coupled search loci, in sampled order.
    search_neighbors: Vec<Vec<usize>>,
    /// Per locus: the E coupled shape bits, in sampled order.
    shape_neighbors: Vec<Vec<usize>>,
    /// Contribution rows per locus: 2^(K+1+E).
    rows: u64,
    /// Row-major `[locus][row]` contribution cache, when small enough.
    table: Option<Vec<f64>>,
}

/// SplitMix64 finalizer; the avalanche step of the contribution hash.
#[inline]
fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^= x >> 31;
    x
}

/// Uniform draw from `0..m` using one raw 64-bit output (multiply-shift).
#[inline]
fn uniform_below(rng: &mut ChaCha8Rng, m: usize) -> usize {
    ((rng.next_u64() as u128 * m as u128) >> 64) as usize
}

/// Sample `count` distinct entries of `pool` by partial Fisher-Yates,
/// consuming one draw per selection. Selection order is preserved.
fn sample_distinct(rng: &mut ChaCha8Rng, mut pool: Vec<usize>, count: usize) -> Vec<usize> {
    debug_assert!(count <= pool.len());
    for j in 0..count {
        let pick = j + uniform_below(rng, pool.len() - j);
        pool.swap(j, pick);
    }
    pool.truncate(count);
    pool
}

/// Counter-based uniform variate in [0, 1) for `(seed, locus, row)`.
#[inline]
pub(crate) fn contribution_value(seed: u64, locus: u64, row: u64) -> f64 {
    let mut h = seed;
    h = mix64(h ^ mix64(locus.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    h = mix64(h ^ mix64(row.wrapping_add(0xd1b5_4a32_d192_ed03)));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Packs `(self_bit, neighbor_bits..., shape_bits...)` into a row index,
/// leftmost bit most significant.
pub fn pack_index(self_bit: bool, neighbor_bits: &[bool], shape_bits: &[bool]) -> u64 {
    let mut acc = self_bit as u64;
    for &b in neighbor_bits {
        acc = (acc << 1) | b as u64;
    }
    for &b in shape_bits {
        acc = (acc << 1) | b as u64;
    }
    acc
}

impl Landscape {
    /// Generates the landscape for `cfg`. Identical configs yield
    /// bit-identical landscapes, across processes and platforms.
    pub fn generate(cfg: LandscapeConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        Self::generate_with_table_limit(cfg, TABLE_ROW_LIMIT)
    }

    fn generate_with_table_limit(cfg: LandscapeConfig, limit: u64) -> Result<Self, ConfigError> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut search_neighbors = Vec::with_capacity(cfg.n);
        let mut shape_neighbors = Vec::with_capacity(cfg.n);
        for i in 0..cfg.n {
            let pool: Vec<usize> = (0..cfg.n).filter(|&j| j != i).collect();
            search_neighbors.push(sample_distinct(&mut rng, pool, cfg.k));
            shape_neighbors.push(sample_distinct(&mut rng, (0..cfg.z).collect(), cfg.e));
        }

        let rows = 1u64 << (cfg.k + 1 + cfg.e);
        let table = if rows <= limit {
            let mut t = Vec::with_capacity(cfg.n * rows as usize);
            for i in 0..cfg.n {
                for r in 0..rows {
                    t.push(contribution_value(cfg.seed, i as u64, r));
                }
            }
            Some(t)
        } else {
            None
        };

        Ok(Landscape {
            cfg,
            search_neighbors,
            shape_neighbors,
            rows,
            table,
        })
    }

    pub fn config(&self) -> &LandscapeConfig {
        &self.cfg
    }

    pub fn n(&self) -> usize {
        self.cfg.n
    }

    pub fn z(&self) -> usize {
        self.cfg.z
    }

    /// Contribution rows per locus: 2^(K+1+E).
    pub fn rows_per_locus(&self) -> u64 {
        self.rows
    }

    pub fn search_neighbors(&self, locus: usize) -> &[usize] {
        &self.search_neighbors[locus]
    }

    pub fn shape_neighbors(&self, locus: usize) -> &[usize] {
        &self.shape_neighbors[locus]
    }

    /// Row index selected by `(g, e)` at `locus`.
    pub fn row_index(&self, locus: usize, g: &BitString, e: &BitString) -> u64 {
        let mut acc = g.get(locus) as u64;
        for &j in &self.search_neighbors[locus] {
            acc = (acc << 1) | g.get(j) as u64;
        }
        for &j in &self.shape_neighbors[locus] {
            acc = (acc << 1) | e.get(j) as u64;
        }
        acc
    }

    /// Fitness contribution of `locus` under `(g, e)`, in [0, 1].
    pub fn contribution(&self, locus: usize, g: &BitString, e: &BitString) -> f64 {
        assert_eq!(g.len(), self.cfg.n, "search policy length mismatch");
        assert_eq!(e.len(), self.cfg.z, "shape policy length mismatch");
        assert!(locus < self.cfg.n);
        let row = self.row_index(locus, g, e);
        match &self.table {
            Some(t) => t[locus * self.rows as usize + row as usize],
            None => contribution_value(self.cfg.seed, locus as u64, row),
        }
    }

    /// Mean of the N contributions; always in [0, 1].
    pub fn evaluate(&self, g: &BitString, e: &BitString) -> f64 {
        assert_eq!(g.len(), self.cfg.n, "search policy length mismatch");
        assert_eq!(e.len(), self.cfg.z, "shape policy length mismatch");
        let sum: f64 = (0..self.cfg.n).map(|i| self.contribution(i, g, e)).sum();
        sum / self.cfg.n as f64
    }

    /// Exhaustive best search policy under a fixed shape policy.
    /// Ties go to the numerically smallest policy.
    pub fn brute_force_optimum(
        &self,
        e: &BitString,
    ) -> Result<(BitString, f64), EnumerationTooLarge> {
        self.check_enumeration_guard()?;
        let mut best_g = BitString::zeros(self.cfg.n);
        let mut best_f = f64::NEG_INFINITY;
        for value in 0..1u64 << self.cfg.n {
            let g = BitString::from_index(value, self.cfg.n);
            let f = self.evaluate(&g, e);
            if f > best_f {
                best_f = f;
                best_g = g;
            }
        }
        Ok((best_g, best_f))
    }

    /// Number of search policies strictly fitter than all N single-bit
    /// neighbors under a fixed shape policy. Exact ties count as
    /// non-optima.
    pub fn count_local_optima(&self, e: &BitString) -> Result<usize, EnumerationTooLarge> {
        self.check_enumeration_guard()?;
        let mut count = 0;
        for value in 0..1u64 << self.cfg.n {
            let g = BitString::from_index(value, self.cfg.n);
            let f = self.evaluate(&g, e);
            let is_optimum = (0..self.cfg.n).all(|i| f > self.evaluate(&g.flipped(i), e));
            if is_optimum {
                count += 1;
            }
        }
        Ok(count)
    }

    fn check_enumeration_guard(&self) -> Result<(), EnumerationTooLarge> {
        if self.cfg.n > ENUMERATION_LIMIT {
            Err(EnumerationTooLarge {
                n: self.cfg.n,
                max: ENUMERATION_LIMIT,
            })
        } else {
            Ok(())
        }
    }

    /// Writes the interaction map as `locus,neighbor_kind,index` CSV rows.
    pub fn dump_interaction_map<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "locus,neighbor_kind,index")?;
        for i in 0..self.cfg.n {
            for &j in &self.search_neighbors[i] {
                writeln!(w, "{i},search,{j}")?;
            }
            for &j in &self.shape_neighbors[i] {
                writeln!(w, "{i},shape,{j}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn cfg(n: usize, k: usize, z: usize, e: usize, seed: u64) -> LandscapeConfig {
        LandscapeConfig { n, k, z, e, seed }
    }

    #[test]
    fn pack_index_worked_examples() {
        let bits = |s: &str| -> Vec<bool> { s.chars().map(|c| c == '1').collect() };
        assert_eq!(pack_index(false, &bits("110"), &[]), 6);
        assert_eq!(pack_index(false, &bits("101"), &bits("010")), 42);
        assert_eq!(pack_index(false, &bits("000000"), &bits("0000")), 0);
    }

    #[test]
    fn rejects_invalid_configs() {
        assert_eq!(
            Landscape::generate(cfg(0, 0, 4, 0, 1)).unwrap_err(),
            ConfigError::ZeroLoci
        );
        assert_eq!(
            Landscape::generate(cfg(12, 12, 12, 0, 1)).unwrap_err(),
            ConfigError::KTooLarge { k: 12, n: 12 }
        );
        assert_eq!(
            Landscape::generate(cfg(12, 3, 4, 5, 1)).unwrap_err(),
            ConfigError::ETooLarge { e: 5, z: 4 }
        );
    }

    #[test]
    fn neighbor_rows_have_expected_shape() {
        let ls = Landscape::generate(cfg(12, 0, 12, 0, 7)).unwrap();
        for i in 0..12 {
            assert!(ls.search_neighbors(i).is_empty());
            assert!(ls.shape_neighbors(i).is_empty());
        }

        let ls = Landscape::generate(cfg(12, 11, 12, 12, 7)).unwrap();
        for i in 0..12 {
            let mut sn = ls.search_neighbors(i).to_vec();
            sn.sort_unstable();
            let expected: Vec<usize> = (0..12).filter(|&j| j != i).collect();
            assert_eq!(sn, expected);
            let mut zn = ls.shape_neighbors(i).to_vec();
            zn.sort_unstable();
            assert_eq!(zn, (0..12).collect::<Vec<_>>());
        }
    }

    #[test]
    fn neighbors_distinct_and_self_excluded() {
        for seed in 0..20 {
            let ls = Landscape::generate(cfg(9, 4, 7, 3, seed)).unwrap();
            for i in 0..9 {
                let sn = ls.search_neighbors(i);
                assert_eq!(sn.len(), 4);
                assert!(!sn.contains(&i));
                let mut dedup = sn.to_vec();
                dedup.sort_unstable();
                dedup.dedup();
                assert_eq!(dedup.len(), 4);
                let zn = ls.shape_neighbors(i);
                assert_eq!(zn.len(), 3);
                let mut dedup = zn.to_vec();
                dedup.sort_unstable();
                dedup.dedup();
                assert_eq!(dedup.len(), 3);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = Landscape::generate(cfg(6, 3, 6, 3, 99)).unwrap();
        let b = Landscape::generate(cfg(6, 3, 6, 3, 99)).unwrap();
        assert_eq!(a.search_neighbors, b.search_neighbors);
        assert_eq!(a.shape_neighbors, b.shape_neighbors);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let i = rng.gen_range(0..6);
            let g = BitString::random(6, &mut rng);
            let e = BitString::random(6, &mut rng);
            assert_eq!(
                a.contribution(i, &g, &e).to_bits(),
                b.contribution(i, &g, &e).to_bits()
            );
        }
    }

    #[test]
    fn lazy_and_materialized_paths_agree() {
        let config = cfg(8, 4, 6, 3, 123);
        let eager = Landscape::generate_with_table_limit(config, TABLE_ROW_LIMIT).unwrap();
        let lazy = Landscape::generate_with_table_limit(config, 0).unwrap();
        assert!(eager.table.is_some());
        assert!(lazy.table.is_none());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let g = BitString::random(8, &mut rng);
            let e = BitString::random(6, &mut rng);
            assert_eq!(
                eager.evaluate(&g, &e).to_bits(),
                lazy.evaluate(&g, &e).to_bits()
            );
        }
    }

    #[test]
    fn contributions_lie_in_unit_interval() {
        let ls = Landscape::generate(cfg(10, 5, 8, 4, 3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let g = BitString::random(10, &mut rng);
            let e = BitString::random(8, &mut rng);
            for i in 0..10 {
                let c = ls.contribution(i, &g, &e);
                assert!((0.0..=1.0).contains(&c));
            }
            let f = ls.evaluate(&g, &e);
            assert!((0.0..=1.0).contains(&f));
        }
    }

    #[test]
    fn k0_e0_contribution_depends_only_on_own_bit() {
        let ls = Landscape::generate(cfg(6, 0, 6, 0, 11)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = BitString::random(6, &mut rng);
        let e = BitString::random(6, &mut rng);
        for locus in 0..6 {
            let base = ls.contribution(locus, &g, &e);
            for other in 0..6 {
                if other != locus {
                    assert_eq!(ls.contribution(locus, &g.flipped(other), &e), base);
                }
            }
        }
    }

    #[test]
    fn e0_fitness_ignores_shape_policy() {
        let ls = Landscape::generate(cfg(8, 3, 6, 0, 21)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let g = BitString::random(8, &mut rng);
            let e1 = BitString::random(6, &mut rng);
            let e2 = BitString::random(6, &mut rng);
            assert_eq!(ls.evaluate(&g, &e1), ls.evaluate(&g, &e2));
        }
    }

    #[test]
    fn n1_fitness_is_the_single_contribution() {
        let ls = Landscape::generate(cfg(1, 0, 2, 1, 31)).unwrap();
        let e = BitString::zeros(2);
        for v in 0..2 {
            let g = BitString::from_index(v, 1);
            assert_eq!(ls.evaluate(&g, &e), ls.contribution(0, &g, &e));
        }
    }

    #[test]
    fn k0_e0_optimum_is_per_locus_argmax() {
        let ls = Landscape::generate(cfg(10, 0, 4, 0, 41)).unwrap();
        let e = BitString::zeros(4);
        let (best_g, best_f) = ls.brute_force_optimum(&e).unwrap();
        let mut expected = BitString::zeros(10);
        for i in 0..10 {
            let zero = ls.contribution(i, &BitString::zeros(10), &e);
            let one = ls.contribution(i, &BitString::zeros(10).flipped(i), &e);
            expected.set(i, one > zero);
        }
        assert_eq!(best_g, expected);
        assert!((best_f - ls.evaluate(&expected, &e)).abs() == 0.0);
    }

    #[test]
    fn brute_force_beats_random_sampling() {
        let ls = Landscape::generate(cfg(10, 5, 4, 2, 51)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let e = BitString::random(4, &mut rng);
        let (_, best_f) = ls.brute_force_optimum(&e).unwrap();
        for _ in 0..1000 {
            let g = BitString::random(10, &mut rng);
            assert!(best_f >= ls.evaluate(&g, &e));
        }
    }

    #[test]
    fn enumeration_guard_refuses_large_n() {
        let ls = Landscape::generate(cfg(21, 0, 0, 0, 1)).unwrap();
        let e = BitString::zeros(0);
        assert!(ls.brute_force_optimum(&e).is_err());
        assert!(ls.count_local_optima(&e).is_err());
    }

    #[test]
    fn k0_has_single_local_optimum() {
        for seed in 0..10 {
            let ls = Landscape::generate(cfg(10, 0, 0, 0, seed)).unwrap();
            assert_eq!(ls.count_local_optima(&BitString::zeros(0)).unwrap(), 1);
        }
    }

    #[test]
    fn row_index_is_bijective_over_bit_tuples() {
        let ls = Landscape::generate(cfg(6, 2, 4, 1, 61)).unwrap();
        // At fixed locus, distinct (self, neighbors, shape) tuples must give
        // distinct rows covering 0..2^(K+1+E).
        let mut seen = vec![false; 1 << 4];
        for v in 0..1u64 << 4 {
            let tuple = BitString::from_index(v, 4);
            let mut g = BitString::zeros(6);
            g.set(0, tuple.get(0));
            for (pos, &j) in ls.search_neighbors(0).iter().enumerate() {
                g.set(j, tuple.get(1 + pos));
            }
            let mut e = BitString::zeros(4);
            e.set(ls.shape_neighbors(0)[0], tuple.get(3));
            let row = ls.row_index(0, &g, &e) as usize;
            assert!(!seen[row], "row {row} produced twice");
            seen[row] = true;
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn interaction_map_dump_is_well_formed() {
        let ls = Landscape::generate(cfg(4, 2, 3, 1, 71)).unwrap();
        let mut out = Vec::new();
        ls.dump_interaction_map(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("locus,neighbor_kind,index"));
        assert_eq!(lines.count(), 4 * (2 + 1));
    }
}
