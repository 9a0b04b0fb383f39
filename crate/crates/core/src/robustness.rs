// Copyright 2026 The stvopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Bootstrap evaluation of strategies: resample respondents, replay fixed
//! plans, and compute optimal plans sample by sample.

use crate::allocator::StrategyPlan;
use crate::engine::{replay_with_additions, run_election};
use crate::error::{Error, Result};
use crate::model::{CandidateIdx, ElectionConfig, RespondentSet, WeightedBallotSet};
use crate::optimizer::{optimal_topk_strategy, Category, Goal, GoalKind};
use crate::reducer::remove_irrelevant;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BootstrapConfig {
    pub samples: usize,
    pub seed: u64,
    /// Ballots available to each per-sample strategy.
    pub budget: u64,
    /// Goal applied to every candidate; the subject is bound per candidate.
    pub goal: GoalKind,
}

impl BootstrapConfig {
    pub fn new(samples: usize, seed: u64, budget: u64, goal: GoalKind) -> Result<Self> {
        if samples == 0 {
            return Err(Error::Config("bootstrap needs at least one sample".into()));
        }
        if let GoalKind::TopK(0) = goal {
            return Err(Error::Config("goal positions must be at least 1".into()));
        }
        Ok(BootstrapConfig { samples, seed, budget, goal })
    }

    pub fn positions(&self) -> usize {
        match self.goal {
            GoalKind::Win => 1,
            GoalKind::TopK(p) => p,
        }
    }
}

/// Seed of sample `index`: the SplitMix64 finalizer applied to
/// `seed + (index + 1) * 0x9E3779B97F4A7C15` (wrapping).
pub fn sample_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws as many respondents as the source holds, with replacement, each
/// keeping its weight.
pub fn resample(respondents: &RespondentSet, sample_seed: u64) -> RespondentSet {
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    let n = respondents.len();
    let drawn = (0..n)
        .map(|_| respondents.respondents[rng.gen_range(0..n)].clone())
        .collect();
    RespondentSet {
        candidates: respondents.candidates.clone(),
        respondents: drawn,
    }
}

/// [`resample`] collapsed into ballot types.
pub fn bootstrap_sample(respondents: &RespondentSet, sample_seed: u64) -> Result<WeightedBallotSet> {
    resample(respondents, sample_seed).to_ballot_set()
}

fn goal_slots(ballots: &WeightedBallotSet, plan: &StrategyPlan, config: &ElectionConfig, p: usize) -> Result<Vec<CandidateIdx>> {
    let outcome = replay_with_additions(ballots, plan, config)?;
    Ok(outcome.order.iter().copied().take(p).collect())
}

/// How often each candidate lands in the goal positions across samples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EfficacyTable {
    pub candidates: Vec<String>,
    pub positions: usize,
    pub samples: usize,
    pub hits: Vec<usize>,
}

impl EfficacyTable {
    fn empty(candidates: Vec<String>, positions: usize) -> Self {
        let hits = vec![0; candidates.len()];
        EfficacyTable { candidates, positions, samples: 0, hits }
    }

    fn record(&mut self, slots: &[CandidateIdx]) {
        self.samples += 1;
        for &c in slots {
            self.hits[c] += 1;
        }
    }

    fn merge(mut self, other: EfficacyTable) -> Self {
        self.samples += other.samples;
        for (a, b) in self.hits.iter_mut().zip(other.hits) {
            *a += b;
        }
        self
    }

    pub fn frequency(&self, c: CandidateIdx) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.hits[c] as f64 / self.samples as f64
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.hits.len()).map(|c| self.frequency(c)).collect()
    }
}

fn candidate_ids(respondents: &RespondentSet) -> Vec<String> {
    respondents.candidates.iter().map(|c| c.id.clone()).collect()
}

/// Replays a fixed plan on every bootstrap sample.
pub fn strategy_efficacy(
    plan: &StrategyPlan,
    respondents: &RespondentSet,
    election: &ElectionConfig,
    config: &BootstrapConfig,
) -> Result<EfficacyTable> {
    let ids = candidate_ids(respondents);
    let p = config.positions();
    let tables: Result<Vec<EfficacyTable>> = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let sample = bootstrap_sample(respondents, sample_seed(config.seed, i))?;
            let mut t = EfficacyTable::empty(ids.clone(), p);
            t.record(&goal_slots(&sample, plan, election, p)?);
            Ok(t)
        })
        .collect();
    Ok(tables?
        .into_iter()
        .fold(EfficacyTable::empty(ids, p), EfficacyTable::merge))
}

/// Per-candidate summary of the optimal strategies found across samples.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CandidateStrategies {
    /// Samples where the candidate was outside the goal positions.
    pub needed: usize,
    /// Of those, samples where the budget sufficed.
    pub feasible: usize,
    /// Samples whose search space exceeded the optimizer's limit; counted
    /// in `needed` but neither feasible nor infeasible.
    pub unresolved: usize,
    /// Signature (ids of the candidates receiving first-place additions)
    /// to sample count.
    pub signatures: BTreeMap<String, usize>,
    pub categories: BTreeMap<String, usize>,
    pub total_cost: u64,
}

impl CandidateStrategies {
    fn merge(&mut self, other: &CandidateStrategies) {
        self.needed += other.needed;
        self.feasible += other.feasible;
        self.unresolved += other.unresolved;
        self.total_cost += other.total_cost;
        for (k, v) in &other.signatures {
            *self.signatures.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.categories {
            *self.categories.entry(k.clone()).or_default() += v;
        }
    }

    pub fn average_cost(&self) -> Option<f64> {
        (self.feasible > 0).then(|| self.total_cost as f64 / self.feasible as f64)
    }

    /// Feasible share of the samples whose search completed.
    pub fn feasibility_rate(&self) -> Option<f64> {
        let decided = self.needed - self.unresolved;
        (decided > 0).then(|| self.feasible as f64 / decided as f64)
    }

    /// Signature shares in percent over the feasible samples.
    pub fn percentages(&self) -> BTreeMap<String, f64> {
        self.signatures
            .iter()
            .map(|(k, &v)| (k.clone(), 100.0 * v as f64 / self.feasible as f64))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrategyDistribution {
    pub candidates: Vec<String>,
    pub per_candidate: Vec<CandidateStrategies>,
}

/// Removal counts across samples.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ReductionStats {
    pub removed: Vec<usize>,
}

impl ReductionStats {
    /// Fraction of samples in which at least `min_removed` candidates were
    /// removed.
    pub fn success_rate(&self, min_removed: usize) -> f64 {
        if self.removed.is_empty() {
            return 0.0;
        }
        let hit = self.removed.iter().filter(|&&r| r >= min_removed).count();
        hit as f64 / self.removed.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BootstrapReport {
    pub distribution: StrategyDistribution,
    /// Goal-position frequencies with no strategy applied.
    pub baseline: EfficacyTable,
    pub reduction: ReductionStats,
}

/// Names the candidates that receive additions as first choice, largest
/// share first.
pub fn plan_signature(plan: &StrategyPlan, ids: &[String]) -> String {
    let mut by_first: BTreeMap<CandidateIdx, u64> = BTreeMap::new();
    for (ballot, &count) in &plan.additions {
        if let Some(c) = ballot.first() {
            *by_first.entry(c).or_default() += count;
        }
    }
    let mut order: Vec<(CandidateIdx, u64)> = by_first.into_iter().collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    order.iter().map(|&(c, _)| ids[c].as_str()).collect::<Vec<_>>().join("")
}

fn category_key(categories: &std::collections::BTreeSet<Category>) -> String {
    let names: Vec<&str> = categories.iter().map(|&c| crate::io::category_name(c)).collect();
    names.join("+")
}

struct SampleResult {
    baseline: Vec<CandidateIdx>,
    removed: usize,
    per_candidate: Vec<CandidateStrategies>,
}

fn analyse_sample(
    sample: &WeightedBallotSet,
    ids: &[String],
    election: &ElectionConfig,
    config: &BootstrapConfig,
) -> Result<SampleResult> {
    let p = config.positions();
    let n = sample.num_candidates();
    let outcome = run_election(sample, election)?;
    let baseline: Vec<CandidateIdx> = outcome.order.iter().copied().take(p).collect();
    let removed = remove_irrelevant(sample, config.budget, election)?.removed_count();
    let mut per_candidate = vec![CandidateStrategies::default(); n];
    for (c, row) in per_candidate.iter_mut().enumerate() {
        if baseline.contains(&c) {
            continue;
        }
        row.needed = 1;
        let goal = Goal { subject: c, kind: config.goal, max_budget: config.budget };
        match optimal_topk_strategy(sample, &goal, election) {
            Ok(found) => {
                row.feasible = 1;
                row.total_cost = found.cost;
                row.signatures.insert(plan_signature(&found.plan, ids), 1);
                row.categories.insert(category_key(&found.categories), 1);
            }
            Err(Error::Infeasible { .. }) => {}
            Err(Error::SearchTooLarge { .. }) => row.unresolved = 1,
            Err(e) => return Err(e),
        }
    }
    Ok(SampleResult { baseline, removed, per_candidate })
}

/// For each sample: the no-strategy outcome, the number of removable
/// candidates at the budget, and the optimal plan of every candidate
/// outside the goal positions.
pub fn per_sample_optimal(
    respondents: &RespondentSet,
    election: &ElectionConfig,
    config: &BootstrapConfig,
) -> Result<BootstrapReport> {
    let ids = candidate_ids(respondents);
    let p = config.positions();
    let results: Result<Vec<SampleResult>> = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let sample = bootstrap_sample(respondents, sample_seed(config.seed, i))?;
            analyse_sample(&sample, &ids, election, config)
        })
        .collect();
    let mut baseline = EfficacyTable::empty(ids.clone(), p);
    let mut per_candidate = vec![CandidateStrategies::default(); ids.len()];
    let mut reduction = ReductionStats::default();
    for r in results? {
        baseline.record(&r.baseline);
        reduction.removed.push(r.removed);
        for (acc, row) in per_candidate.iter_mut().zip(&r.per_candidate) {
            acc.merge(row);
        }
    }
    Ok(BootstrapReport {
        distribution: StrategyDistribution { candidates: ids, per_candidate },
        baseline,
        reduction,
    })
}
