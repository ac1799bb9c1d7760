//! Exact counting and uniform sampling of symmetric chain decompositions.
//!
//! The layered counter grows decompositions outward from the middle. After
//! `k` steps every chain through the outer levels `L_lo` and `L_hi` spans
//! both, and the map `σ` from a chain's top (index in `L_hi`) to its bottom
//! (index in `L_lo`) is all that the remaining steps can see. Step `k`
//! glues `L_lo` to `L_hi` along `σ`, forms the three-level poset
//! `L_{lo-1} < glued < L_{hi+1}`, and picks one of its decompositions. Counts
//! of completions are therefore memoized on `σ`, one table per stage.
//!
//! [`count_scd_oracle`] is an independent whole-poset backtracking count
//! used to cross-check the layered tables.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{Read as _, Write as _};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gadget::{for_each_gadget_scd, gadget_support, SliceLabels, ThreeLevelPoset, YLabel};
use crate::limits::Limits;
use crate::permanent::{count_perfect_matchings, for_each_perfect_matching, Bigraph};
use crate::poset::{level_bigraph, Element, GradedPoset, LevelBigraph};
use crate::scd::{Chain, Scd};

/// Number of symmetric chain decompositions of a three-level poset, as the
/// number of perfect matchings of its gadget.
pub fn count_scd_threelevel(p3: &ThreeLevelPoset, limits: &Limits) -> Result<BigUint> {
    count_perfect_matchings(&gadget_support(p3), limits)
}

/// Calls `f` with every decomposition of `p3` as `(x, y, z)` triples, by
/// direct search: an injective choice of middle vertex for each `x`, then a
/// matching of `Z` onto the chosen middle vertices. Does not go through the
/// gadget.
pub fn for_each_threelevel_scd_direct<F>(p3: &ThreeLevelPoset, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[(u32, u32, u32)]) -> ControlFlow<()>,
{
    struct Search<'a, F> {
        p3: &'a ThreeLevelPoset,
        below: Vec<Option<u32>>,
        above: Vec<Option<u32>>,
        f: F,
    }

    impl<F: FnMut(&[(u32, u32, u32)]) -> ControlFlow<()>> Search<'_, F> {
        fn pick_y(&mut self, x: usize) -> ControlFlow<()> {
            if x == self.p3.a() {
                return self.pick_z(0);
            }
            for &y in &self.p3.x_up()[x] {
                if self.below[y as usize].is_none() {
                    self.below[y as usize] = Some(x as u32);
                    self.pick_y(x + 1)?;
                    self.below[y as usize] = None;
                }
            }
            ControlFlow::Continue(())
        }

        fn pick_z(&mut self, z: usize) -> ControlFlow<()> {
            if z == self.p3.a() {
                let mut triples: Vec<(u32, u32, u32)> = self
                    .above
                    .iter()
                    .enumerate()
                    .filter_map(|(y, top)| {
                        top.map(|z| (self.below[y].expect("chosen"), y as u32, z))
                    })
                    .collect();
                triples.sort_unstable();
                return (self.f)(&triples);
            }
            for &y in &self.p3.z_down()[z] {
                let y = y as usize;
                if self.below[y].is_some() && self.above[y].is_none() {
                    self.above[y] = Some(z as u32);
                    self.pick_z(z + 1)?;
                    self.above[y] = None;
                }
            }
            ControlFlow::Continue(())
        }
    }

    let mut s = Search {
        p3,
        below: vec![None; p3.b()],
        above: vec![None; p3.b()],
        f: &mut f,
    };
    s.pick_y(0)
}

/// Direct backtracking count of the decompositions of `p3`.
pub fn count_threelevel_direct(p3: &ThreeLevelPoset) -> u64 {
    let mut count = 0u64;
    let _ = for_each_threelevel_scd_direct(p3, |_| {
        count += 1;
        ControlFlow::Continue(())
    });
    count
}

/// Whole-poset backtracking count, independent of the layered machinery.
///
/// Levels are filled bottom-up in canonical order. Every element either
/// extends a chain arriving from the level below (which must continue, since
/// a chain starting at rank `k` ends exactly at rank `M - k`) or starts a new
/// chain, which is allowed only at ranks `k <= M - k`. The set of open chain
/// tops at a level boundary determines the rest, so counts are memoized on it.
pub fn count_scd_oracle(poset: &GradedPoset, limits: &Limits) -> Result<BigUint> {
    let len = poset.len() as u64;
    if len > limits.oracle_max_elements {
        return Err(Error::budget(
            "oracle element",
            len,
            limits.oracle_max_elements,
        ));
    }
    let mut memo = HashMap::new();
    Ok(BigUint::from(oracle_level(poset, 0, &[], &mut memo)))
}

type OracleMemo = HashMap<(usize, Vec<(Element, usize)>), u128>;

/// Completions from level `k` given the chains arriving from level `k - 1`,
/// as `(top, end rank)`.
fn oracle_level(
    poset: &GradedPoset,
    k: usize,
    open: &[(Element, usize)],
    memo: &mut OracleMemo,
) -> u128 {
    let total_rank = poset.total_rank();
    if k > total_rank {
        return open.is_empty() as u128;
    }
    let level = poset.level(k);
    if open.len() > level.len() {
        return 0;
    }
    let starts = level.len() - open.len();
    if starts > 0 && k > total_rank - k {
        return 0;
    }
    let key = (k, open.to_vec());
    if let Some(&c) = memo.get(&key) {
        return c;
    }
    let mut used = vec![false; open.len()];
    let mut ends = Vec::with_capacity(level.len());
    let count = oracle_assign(poset, k, open, &mut used, starts, &mut ends, memo);
    memo.insert(key, count);
    count
}

fn oracle_assign(
    poset: &GradedPoset,
    k: usize,
    open: &[(Element, usize)],
    used: &mut [bool],
    starts: usize,
    ends: &mut Vec<usize>,
    memo: &mut OracleMemo,
) -> u128 {
    let level = poset.level(k);
    let p = ends.len();
    if p == level.len() {
        let next: Vec<(Element, usize)> = level
            .iter()
            .zip(ends.iter())
            .filter(|&(_, &end)| end > k)
            .map(|(&e, &end)| (e, end))
            .collect();
        return oracle_level(poset, k + 1, &next, memo);
    }
    let e = level[p];
    let mut total = 0;
    for c in 0..open.len() {
        if !used[c] && poset.covers(open[c].0, e) {
            used[c] = true;
            ends.push(open[c].1);
            total += oracle_assign(poset, k, open, used, starts, ends, memo);
            ends.pop();
            used[c] = false;
        }
    }
    let fresh = p - used.iter().filter(|&&u| u).count();
    if fresh < starts {
        ends.push(poset.total_rank() - k);
        total += oracle_assign(poset, k, open, used, starts, ends, memo);
        ends.pop();
    }
    total
}

/// One gluing step: levels `lo..=hi` are already decomposed.
#[derive(Clone, Debug)]
struct Step {
    lo: usize,
    hi: usize,
    /// `(L_{lo-1}, L_lo)`.
    below: LevelBigraph,
    /// `(L_hi, L_{hi+1})`.
    above: LevelBigraph,
}

/// Reachable endpoint maps at one stage with their completion counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stage {
    /// Each `σ` maps an index in `L_hi` to an index in `L_lo`; sorted.
    pub states: Vec<Vec<u32>>,
    pub counts: Vec<BigUint>,
}

impl Stage {
    fn lookup(&self, sigma: &[u32]) -> Option<&BigUint> {
        self.states
            .binary_search_by(|s| s.as_slice().cmp(sigma))
            .ok()
            .map(|i| &self.counts[i])
    }
}

/// Options for [`LayeredCounter::build`].
#[derive(Clone, Debug, Default)]
pub struct CountOptions {
    /// Directory holding per-stage tables; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
    /// Processes states in a shuffled order (results must not change).
    pub shuffle_seed: Option<u64>,
}

/// Memoized completion counts for every reachable stage state.
pub struct LayeredCounter<'p> {
    poset: &'p GradedPoset,
    limits: Limits,
    steps: Vec<Step>,
    stages: Vec<Stage>,
    total: BigUint,
}

impl<'p> LayeredCounter<'p> {
    pub fn build(poset: &'p GradedPoset, limits: &Limits, opts: &CountOptions) -> Result<Self> {
        let steps = plan_steps(poset, limits)?;
        let mut counter = LayeredCounter {
            poset,
            limits: limits.clone(),
            steps,
            stages: Vec::new(),
            total: BigUint::zero(),
        };
        let cached = match &opts.cache_dir {
            Some(dir) => counter.load_cache(dir)?,
            None => false,
        };
        if !cached {
            counter.compute(opts.shuffle_seed)?;
            if let Some(dir) = &opts.cache_dir {
                counter.save_cache(dir)?;
            }
        }
        counter.total = if counter.steps.is_empty() {
            BigUint::from(counter.stages[0].states.len())
        } else {
            counter.stages[0].counts.iter().sum()
        };
        Ok(counter)
    }

    pub fn poset(&self) -> &GradedPoset {
        self.poset
    }

    /// Total number of symmetric chain decompositions.
    pub fn total(&self) -> &BigUint {
        &self.total
    }

    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    /// Stages `0..num_steps()` (one stage when there are no steps). The
    /// completion count of a state at the last stored stage is the number of
    /// decompositions of its final glued poset.
    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// `(lo, hi)` of the levels already decomposed at stage `k`.
    pub fn stage_span(&self, k: usize) -> (usize, usize) {
        match self.steps.get(k) {
            Some(s) => (s.lo, s.hi),
            None => initial_span(self.poset.total_rank()),
        }
    }

    /// The three-level poset formed at stage `k` from state `sigma`,
    /// labelled with host elements.
    pub fn glued_poset(&self, k: usize, sigma: &[u32]) -> Result<ThreeLevelPoset> {
        let step = self.steps.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            len: self.steps.len(),
        })?;
        glue(self.poset, step, sigma, true)
    }

    /// Number of completions of `sigma` at stage `k`, if reachable.
    pub fn completions(&self, k: usize, sigma: &[u32]) -> Option<&BigUint> {
        self.stages.get(k)?.lookup(sigma)
    }

    fn weight_after(&self, k: usize, next: &[u32]) -> Result<BigUint> {
        if k + 1 >= self.steps.len() {
            return Ok(BigUint::one());
        }
        self.stages[k + 1]
            .lookup(next)
            .cloned()
            .ok_or_else(|| Error::Internal("successor state missing from table".into()))
    }

    fn compute(&mut self, shuffle: Option<u64>) -> Result<()> {
        let mut rng = shuffle.map(ChaCha8Rng::seed_from_u64);
        let initial = initial_states(self.poset, &self.limits)?;
        if self.steps.is_empty() {
            let counts = vec![BigUint::one(); initial.len()];
            self.stages = vec![Stage {
                states: initial,
                counts,
            }];
            return Ok(());
        }
        let mut layers = vec![initial];
        for k in 0..self.steps.len() - 1 {
            let mut order = layers[k].clone();
            if let Some(rng) = rng.as_mut() {
                order.shuffle(rng);
            }
            let step = &self.steps[k];
            let poset = self.poset;
            let found: Vec<Vec<Vec<u32>>> = order
                .par_iter()
                .map(|sigma| {
                    let p3 = glue(poset, step, sigma, false)?;
                    let mut next = BTreeSet::new();
                    let _ = for_each_gadget_scd(&p3, |triples| {
                        next.insert(successor(triples, p3.a()));
                        ControlFlow::Continue(())
                    });
                    Ok(next.into_iter().collect())
                })
                .collect::<Result<_>>()?;
            let merged: BTreeSet<Vec<u32>> = found.into_iter().flatten().collect();
            if merged.len() > self.limits.max_states {
                return Err(Error::budget(
                    "state",
                    merged.len() as u64,
                    self.limits.max_states as u64,
                ));
            }
            layers.push(merged.into_iter().collect());
        }
        let last = self.steps.len() - 1;
        let mut stages: Vec<Stage> = Vec::with_capacity(layers.len());
        for k in (0..=last).rev() {
            let states = std::mem::take(&mut layers[k]);
            let step = &self.steps[k];
            let poset = self.poset;
            let limits = &self.limits;
            let next = stages.last();
            let counts = states
                .par_iter()
                .map(|sigma| {
                    let p3 = glue(poset, step, sigma, false)?;
                    match next {
                        None => count_scd_threelevel(&p3, limits),
                        Some(next) => {
                            let mut sum = BigUint::zero();
                            let mut missing = false;
                            let _ = for_each_gadget_scd(&p3, |triples| {
                                match next.lookup(&successor(triples, p3.a())) {
                                    Some(c) => sum += c,
                                    None => missing = true,
                                }
                                ControlFlow::Continue(())
                            });
                            if missing {
                                return Err(Error::Internal(
                                    "successor state missing from table".into(),
                                ));
                            }
                            Ok(sum)
                        }
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            stages.push(Stage { states, counts });
        }
        stages.reverse();
        self.stages = stages;
        Ok(())
    }

    /// Draws a uniformly random decomposition: each step's extension is
    /// chosen with probability proportional to its number of completions.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Scd> {
        if self.total.is_zero() {
            return Err(Error::NoScd);
        }
        let first = &self.stages[0];
        let mut pick = rng.gen_biguint_below(&self.total);
        let mut idx = first.states.len() - 1;
        for (i, _) in first.states.iter().enumerate() {
            let w = if self.steps.is_empty() {
                BigUint::one()
            } else {
                first.counts[i].clone()
            };
            if pick < w {
                idx = i;
                break;
            }
            pick -= w;
        }
        let mut sigma = first.states[idx].clone();
        let mut builder = ChainBuilder::new(self.poset, &sigma);
        for k in 0..self.steps.len() {
            let step = &self.steps[k];
            let p3 = glue(self.poset, step, &sigma, false)?;
            let here = if k + 1 >= self.steps.len() {
                count_scd_threelevel(&p3, &self.limits)?
            } else {
                self.stages[k].counts[self.stages[k]
                    .states
                    .binary_search(&sigma)
                    .map_err(|_| Error::Internal("state missing from table".into()))?]
                .clone()
            };
            let mut pick = rng.gen_biguint_below(&here);
            let mut chosen = None;
            let mut failure = None;
            let _ = for_each_gadget_scd(&p3, |triples| {
                let next = successor(triples, p3.a());
                match self.weight_after(k, &next) {
                    Ok(w) if pick < w => {
                        chosen = Some((triples.to_vec(), next));
                        ControlFlow::Break(())
                    }
                    Ok(w) => {
                        pick -= w;
                        ControlFlow::Continue(())
                    }
                    Err(e) => {
                        failure = Some(e);
                        ControlFlow::Break(())
                    }
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            let (triples, next) =
                chosen.ok_or_else(|| Error::Internal("sampling weights do not add up".into()))?;
            builder.apply(self.poset, step, &triples);
            sigma = next;
        }
        Ok(builder.finish())
    }

    /// Calls `f` with every decomposition, reconstructed step by step.
    pub fn for_each_scd<F>(&self, mut f: F) -> Result<ControlFlow<()>>
    where
        F: FnMut(&Scd) -> ControlFlow<()>,
    {
        for sigma in &self.stages[0].states {
            let builder = ChainBuilder::new(self.poset, sigma);
            if self.walk(0, sigma, builder, &mut f)?.is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    fn walk<F>(
        &self,
        k: usize,
        sigma: &[u32],
        builder: ChainBuilder,
        f: &mut F,
    ) -> Result<ControlFlow<()>>
    where
        F: FnMut(&Scd) -> ControlFlow<()>,
    {
        if k == self.steps.len() {
            return Ok(f(&builder.finish()));
        }
        let step = &self.steps[k];
        let p3 = glue(self.poset, step, sigma, false)?;
        let mut options = Vec::new();
        let _ = for_each_gadget_scd(&p3, |triples| {
            options.push(triples.to_vec());
            ControlFlow::Continue(())
        });
        for triples in options {
            let mut b = builder.clone();
            b.apply(self.poset, step, &triples);
            let next = successor(&triples, p3.a());
            if self.walk(k + 1, &next, b, f)?.is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    fn cache_path(&self, dir: &Path) -> PathBuf {
        let digest =
            Sha256::digest(format!("scdkit-layers-v1:{}", self.poset.descriptor()).as_bytes());
        dir.join(hex::encode(digest))
    }

    fn load_cache(&mut self, dir: &Path) -> Result<bool> {
        let base = self.cache_path(dir);
        let wanted = self.steps.len().max(1);
        let mut stages = Vec::with_capacity(wanted);
        for k in 0..wanted {
            let path = base.join(format!("stage_{k}.bin"));
            let Ok(mut file) = fs::File::open(&path) else {
                return Ok(false);
            };
            let mut bytes = Vec::new();
            file.read_to_end(&mut bytes)?;
            match decode_stage(&bytes, &self.poset.descriptor(), k) {
                Some(stage) => stages.push(stage),
                None => return Ok(false),
            }
        }
        self.stages = stages;
        Ok(true)
    }

    fn save_cache(&self, dir: &Path) -> Result<()> {
        let base = self.cache_path(dir);
        fs::create_dir_all(&base)?;
        for (k, stage) in self.stages.iter().enumerate() {
            let path = base.join(format!("stage_{k}.bin"));
            let tmp = base.join(format!("stage_{k}.bin.tmp"));
            let mut file = fs::File::create(&tmp)?;
            file.write_all(&encode_stage(stage, &self.poset.descriptor(), k))?;
            file.sync_all()?;
            fs::rename(&tmp, &path)?;
        }
        Ok(())
    }
}

const CACHE_MAGIC: &[u8; 8] = b"SCDKSTG1";

/// Layout (little endian): magic, descriptor length `u32` and bytes, stage
/// `u32`, state length `u32`, state count `u64`, then per state the `σ`
/// entries as `u32`, the count's byte length `u32` and its bytes.
fn encode_stage(stage: &Stage, descriptor: &str, k: usize) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&(descriptor.len() as u32).to_le_bytes());
    out.extend_from_slice(descriptor.as_bytes());
    out.extend_from_slice(&(k as u32).to_le_bytes());
    let width = stage.states.first().map_or(0, Vec::len);
    out.extend_from_slice(&(width as u32).to_le_bytes());
    out.extend_from_slice(&(stage.states.len() as u64).to_le_bytes());
    for (sigma, count) in stage.states.iter().zip(&stage.counts) {
        for &v in sigma {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let bytes = count.to_bytes_le();
        out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        out.extend_from_slice(&bytes);
    }
    out
}

fn decode_stage(bytes: &[u8], descriptor: &str, k: usize) -> Option<Stage> {
    struct Cursor<'a>(&'a [u8]);
    impl<'a> Cursor<'a> {
        fn take(&mut self, n: usize) -> Option<&'a [u8]> {
            if self.0.len() < n {
                return None;
            }
            let (head, tail) = self.0.split_at(n);
            self.0 = tail;
            Some(head)
        }
        fn u32(&mut self) -> Option<u32> {
            Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
        }
        fn u64(&mut self) -> Option<u64> {
            Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
        }
    }
    let mut c = Cursor(bytes);
    if c.take(8)? != CACHE_MAGIC {
        return None;
    }
    let dlen = c.u32()? as usize;
    if c.take(dlen)? != descriptor.as_bytes() || c.u32()? as usize != k {
        return None;
    }
    let width = c.u32()? as usize;
    let n = c.u64()? as usize;
    let mut stage = Stage {
        states: Vec::with_capacity(n.min(1 << 20)),
        counts: Vec::with_capacity(n.min(1 << 20)),
    };
    for _ in 0..n {
        let sigma = (0..width).map(|_| c.u32()).collect::<Option<Vec<_>>>()?;
        let len = c.u32()? as usize;
        stage.states.push(sigma);
        stage.counts.push(BigUint::from_bytes_le(c.take(len)?));
    }
    (c.0.is_empty() && stage.states.is_sorted()).then_some(stage)
}

/// Levels decomposed before the first step.
fn initial_span(total_rank: usize) -> (usize, usize) {
    let m = total_rank / 2;
    (m, m + total_rank % 2)
}

fn plan_steps(poset: &GradedPoset, limits: &Limits) -> Result<Vec<Step>> {
    let (mut lo, mut hi) = initial_span(poset.total_rank());
    let mut steps = Vec::new();
    while lo > 0 {
        steps.push(Step {
            lo,
            hi,
            below: level_bigraph(poset, lo - 1, limits)?,
            above: level_bigraph(poset, hi, limits)?,
        });
        lo -= 1;
        hi += 1;
    }
    Ok(steps)
}

/// Stage-0 states: the identity on the middle level for even total rank,
/// or every perfect matching between the two middle levels for odd.
fn initial_states(poset: &GradedPoset, limits: &Limits) -> Result<Vec<Vec<u32>>> {
    let (lo, hi) = initial_span(poset.total_rank());
    if lo == hi {
        return Ok(vec![(0..poset.level(lo).len() as u32).collect()]);
    }
    let g = level_bigraph(poset, lo, limits)?;
    let bigraph = Bigraph::new(
        g.up.len(),
        g.down
            .iter()
            .map(|d| d.iter().map(|&i| i as usize).collect())
            .collect(),
    );
    let mut states = Vec::new();
    let mut over = false;
    let _ = for_each_perfect_matching(&bigraph, |m| {
        if states.len() == limits.max_states {
            over = true;
            return ControlFlow::Break(());
        }
        states.push(m.iter().map(|&i| i as u32).collect());
        ControlFlow::Continue(())
    });
    if over {
        return Err(Error::budget(
            "state",
            limits.max_states as u64 + 1,
            limits.max_states as u64,
        ));
    }
    states.sort_unstable();
    Ok(states)
}

/// The glued three-level poset for `sigma` at `step`. Middle vertex `j` is
/// the chain whose top is `L_hi[j]` and bottom `L_lo[σ(j)]`.
fn glue(
    poset: &GradedPoset,
    step: &Step,
    sigma: &[u32],
    labelled: bool,
) -> Result<ThreeLevelPoset> {
    let mut inv = vec![u32::MAX; sigma.len()];
    for (j, &i) in sigma.iter().enumerate() {
        inv[i as usize] = j as u32;
    }
    let x_up = step
        .below
        .up
        .iter()
        .map(|ys| ys.iter().map(|&i| inv[i as usize]).collect())
        .collect();
    let z_down = step.above.down.clone();
    let p3 = ThreeLevelPoset::new(sigma.len(), x_up, z_down)?;
    if !labelled {
        return Ok(p3);
    }
    let (lo_level, hi_level) = (poset.level(step.lo), poset.level(step.hi));
    let y = sigma
        .iter()
        .enumerate()
        .map(|(j, &i)| {
            if step.lo == step.hi {
                YLabel::Single(hi_level[j])
            } else {
                YLabel::Glued {
                    bottom: lo_level[i as usize],
                    top: hi_level[j],
                }
            }
        })
        .collect();
    Ok(p3.with_labels(SliceLabels {
        x: poset.level(step.lo - 1).to_vec(),
        y,
        z: poset.level(step.hi + 1).to_vec(),
    }))
}

/// The next endpoint map: `z ↦ x` for every triple.
fn successor(triples: &[(u32, u32, u32)], a: usize) -> Vec<u32> {
    let mut next = vec![0u32; a];
    for &(x, _, z) in triples {
        next[z as usize] = x;
    }
    next
}

/// Chains in progress, indexed by their top in `L_hi`.
#[derive(Clone)]
struct ChainBuilder {
    open: Vec<Vec<Element>>,
    done: Vec<Chain>,
}

impl ChainBuilder {
    fn new(poset: &GradedPoset, sigma: &[u32]) -> Self {
        let (lo, hi) = initial_span(poset.total_rank());
        let open = sigma
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                if lo == hi {
                    vec![poset.level(hi)[j]]
                } else {
                    vec![poset.level(lo)[i as usize], poset.level(hi)[j]]
                }
            })
            .collect();
        ChainBuilder {
            open,
            done: Vec::new(),
        }
    }

    fn apply(&mut self, poset: &GradedPoset, step: &Step, triples: &[(u32, u32, u32)]) {
        let mut extended = vec![false; self.open.len()];
        let mut next = vec![Vec::new(); triples.len()];
        let (xs, zs) = (poset.level(step.lo - 1), poset.level(step.hi + 1));
        for &(x, y, z) in triples {
            extended[y as usize] = true;
            let mid = &self.open[y as usize];
            let mut chain = Vec::with_capacity(mid.len() + 2);
            chain.push(xs[x as usize]);
            chain.extend_from_slice(mid);
            chain.push(zs[z as usize]);
            next[z as usize] = chain;
        }
        for (j, chain) in self.open.drain(..).enumerate() {
            if !extended[j] {
                self.done.push(Chain(chain));
            }
        }
        self.open = next;
    }

    fn finish(mut self) -> Scd {
        self.done.extend(self.open.into_iter().map(Chain));
        Scd::new(self.done)
    }
}

/// Exact number of decompositions by the layered procedure.
pub fn count_scd_layered(poset: &GradedPoset, limits: &Limits) -> Result<BigUint> {
    Ok(
        LayeredCounter::build(poset, limits, &CountOptions::default())?
            .total()
            .clone(),
    )
}

/// One uniformly random decomposition, reproducible from `seed`.
pub fn sample_scd_uniform(poset: &GradedPoset, seed: u64, limits: &Limits) -> Result<Scd> {
    let counter = LayeredCounter::build(poset, limits, &CountOptions::default())?;
    counter.sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// `count` samples from one seeded stream.
pub fn sample_many(counter: &LayeredCounter<'_>, seed: u64, count: usize) -> Result<Vec<Scd>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| counter.sample(&mut rng)).collect()
}
