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

//! Fixtures and brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use stvopt::allocator::{optimize_budget, StrategyPlan};
use stvopt::engine::{replay_with_additions, run_election, Tabulator};
use stvopt::model::{compute_quota, frac, int, ElectionConfig, RankedBallot, WeightedBallotSet};
use stvopt::optimizer::detect_case_a;
use stvopt::reducer::{remove_irrelevant_with, ReduceOptions, RemovalRule};
use stvopt::structure::Structure;

/// The nine ballot types of the 2020 San Francisco District 7 count.
pub fn sf_ballots() -> WeightedBallotSet {
    WeightedBallotSet::from_rows(
        &["E", "M", "N"],
        &[
            (&["E", "M", "N"], 5237),
            (&["E", "N", "M"], 3316),
            (&["E"], 5566),
            (&["M", "E", "N"], 4050),
            (&["M", "N", "E"], 5708),
            (&["M"], 1894),
            (&["N", "E", "M"], 2251),
            (&["N", "M", "E"], 6909),
            (&["N"], 1695),
        ],
    )
    .unwrap()
}

/// One seat; ties go to M, then E, then N.
pub fn sf_config() -> ElectionConfig {
    ElectionConfig::new(1, 3).with_tie_break(vec![1, 0, 2])
}

fn weighted_rows(ids: &[&str], rows: &[(&[&str], i64, i64)]) -> WeightedBallotSet {
    let mut set = WeightedBallotSet::from_rows(ids, &[]).unwrap();
    for (ranking, num, den) in rows {
        let ballot = set.ballot_from_ids(ranking).unwrap();
        set.add(ballot, frac(*num, *den)).unwrap();
    }
    set
}

/// Four candidates, two seats, 100 voters. First preferences A 30, B 25,
/// C 23, D 22; D's ballots move 10/3/9 to A/B/C; A wins with 40 and its
/// surplus of 6 moves 1 to B and 5 to C; C then wins with 37 against 29.
/// Adding two `[D]` ballots makes C the first elimination instead.
pub fn example_original() -> WeightedBallotSet {
    weighted_rows(
        &["A", "B", "C", "D"],
        &[
            (&["A", "B"], 20, 3),
            (&["A", "C"], 70, 3),
            (&["B", "A"], 15, 1),
            (&["B", "D"], 10, 1),
            (&["C", "A"], 4, 1),
            (&["C", "B", "A"], 5, 1),
            (&["C", "B", "D"], 10, 1),
            (&["C", "D"], 4, 1),
            (&["D", "A", "C"], 10, 1),
            (&["D", "B"], 3, 1),
            (&["D", "C"], 9, 1),
        ],
    )
}

/// Four candidates, two seats, 100 voters. First preferences A 23, B 25,
/// C 30, D 22; D's ballots move 13/9/0 to A/B/C and A wins with 36.
pub fn flip_original() -> WeightedBallotSet {
    weighted_rows(
        &["A", "B", "C", "D"],
        &[
            (&["A", "B"], 5, 1),
            (&["A", "D", "C"], 18, 1),
            (&["B"], 25, 1),
            (&["C"], 30, 1),
            (&["D", "B"], 9, 1),
            (&["D", "A", "B"], 13, 3),
            (&["D", "A", "C"], 26, 3),
        ],
    )
}

/// [`flip_original`] after one `[A, D, C]` voter switches to
/// `[D, A, C]`: A 22 is eliminated, D wins with 40 and passes 2 to B and 4
/// to C, and C wins with exactly the quota.
pub fn flip_changed() -> WeightedBallotSet {
    let set = flip_original();
    let from = set.ballot_from_ids(&["A", "D", "C"]).unwrap();
    let to = set.ballot_from_ids(&["D", "A", "C"]).unwrap();
    let rest = set.weight_of(&from) - int(1);
    let mut out = WeightedBallotSet::new(set.candidates().to_vec()).unwrap();
    for (b, w) in set.iter() {
        if *b != from {
            out.add(b.clone(), w.clone()).unwrap();
        }
    }
    out.add(from, rest).unwrap();
    out.add(to, int(1)).unwrap();
    out
}

/// Random instance: `n` candidates, up to `types` distinct ballots with
/// integer weights in `1..=max_weight`.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    types: usize,
    max_weight: i64,
) -> WeightedBallotSet {
    let ids: Vec<String> = (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect();
    let mut set = WeightedBallotSet::new(
        ids.iter()
            .map(|s| stvopt::model::Candidate::new(s.as_str()))
            .collect(),
    )
    .unwrap();
    let count = rng.gen_range(1..=types);
    for _ in 0..count {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let len = rng.gen_range(1..=n);
        perm.truncate(len);
        let w = rng.gen_range(1..=max_weight);
        set.add(RankedBallot(perm), int(w)).unwrap();
    }
    set
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every ballot type an addition may use, up to structural equivalence: a
/// ranking of all `n` candidates behaves like its first `n - 1` entries, so
/// only rankings of length `0..n` are listed (length 0 is padding).
pub fn addition_types(n: usize) -> Vec<RankedBallot> {
    let mut out = vec![RankedBallot::empty()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    let max_len = if n == 1 { 1 } else { n - 1 };
    for _ in 0..max_len {
        let mut next = Vec::new();
        for prefix in &frontier {
            for c in 0..n {
                if !prefix.contains(&c) {
                    let mut p = prefix.clone();
                    p.push(c);
                    out.push(RankedBallot(p.clone()));
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Every multiset of `types` with at most `max` elements, as count vectors.
pub fn multisets(types: usize, max: usize) -> Vec<Vec<(usize, u64)>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        start: usize,
        types: usize,
        left: usize,
        current: &mut Vec<(usize, u64)>,
        out: &mut Vec<Vec<(usize, u64)>>,
    ) {
        out.push(current.clone());
        if left == 0 {
            return;
        }
        for t in start..types {
            for c in 1..=left as u64 {
                current.push((t, c));
                rec(t + 1, types, left - c as usize, current, out);
                current.pop();
            }
        }
    }
    rec(0, types, max, &mut current, &mut out);
    out
}

/// Cheapest cost of every structure reachable with at most `budget` added
/// ballots, by exhaustive replay.
pub fn brute_force_costs(
    ballots: &WeightedBallotSet,
    config: &ElectionConfig,
    budget: usize,
) -> BTreeMap<Structure, u64> {
    let types = addition_types(ballots.num_candidates());
    let sets = multisets(types.len(), budget);
    let found: Vec<(Structure, u64)> = sets
        .par_iter()
        .map(|ms| {
            let mut plan = StrategyPlan::empty();
            for &(t, c) in ms {
                plan.add(types[t].clone(), c);
            }
            let merged = plan.apply(ballots).unwrap();
            let s = run_election(&merged, config).unwrap().structure();
            (s, plan.cost())
        })
        .collect();
    let mut best: BTreeMap<Structure, u64> = BTreeMap::new();
    for (s, c) in found {
        let e = best.entry(s).or_insert(c);
        if c < *e {
            *e = c;
        }
    }
    best
}

/// Every addition plan of at most `budget` ballots, with its cost.
pub fn all_plans(n: usize, budget: usize) -> Vec<StrategyPlan> {
    let types = addition_types(n);
    multisets(types.len(), budget)
        .into_iter()
        .map(|ms| {
            let mut plan = StrategyPlan::empty();
            for (t, c) in ms {
                plan.add(types[t].clone(), c);
            }
            plan
        })
        .collect()
}

/// Random instance whose last `weak` candidates hold only a few first
/// choices, so a bottom group is often removable.
pub fn instance_with_weak_tail(
    rng: &mut ChaCha8Rng,
    n: usize,
    weak: usize,
    types: usize,
) -> WeightedBallotSet {
    let ids: Vec<String> = (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect();
    let mut set = WeightedBallotSet::new(
        ids.iter()
            .map(|s| stvopt::model::Candidate::new(s.as_str()))
            .collect(),
    )
    .unwrap();
    let strong = n - weak;
    for t in 0..types.max(strong) {
        let first = if t < strong { t } else { rng.gen_range(0..n) };
        let mut rest: Vec<usize> = (0..n).filter(|&c| c != first).collect();
        rest.shuffle(rng);
        rest.truncate(rng.gen_range(0..n));
        let mut ranking = vec![first];
        ranking.extend(rest);
        let w = if first < strong {
            rng.gen_range(8..=30)
        } else {
            rng.gen_range(1..=3)
        };
        set.add(RankedBallot(ranking), int(w)).unwrap();
    }
    set
}

/// Order of the survivors in an outcome, as original indices.
pub fn survivor_order(order: &[usize], survivors: &[usize]) -> Vec<usize> {
    order.iter().copied().filter(|c| survivors.contains(c)).collect()
}

/// Respondent records with unit weights: first choices drawn from
/// `popularity`, later choices from the same weights without repeats, and
/// between one and `max_len` candidates ranked.
pub fn respondents_from_popularity(
    rng: &mut ChaCha8Rng,
    popularity: &[f64],
    count: usize,
    max_len: usize,
) -> stvopt::RespondentSet {
    use rand::distributions::{Distribution, WeightedIndex};
    let n = popularity.len();
    let candidates = (0..n)
        .map(|i| stvopt::Candidate::new(((b'A' + i as u8) as char).to_string()))
        .collect();
    let respondents = (0..count)
        .map(|r| {
            let len = rng.gen_range(1..=max_len.min(n));
            let mut left: Vec<f64> = popularity.to_vec();
            let mut ranking = Vec::new();
            for _ in 0..len {
                let c = WeightedIndex::new(&left).unwrap().sample(rng);
                ranking.push(c);
                left[c] = 0.0;
                if left.iter().all(|&w| w == 0.0) {
                    break;
                }
            }
            stvopt::Respondent {
                id: format!("r{r}"),
                weight: int(1),
                ballot: RankedBallot(ranking),
            }
        })
        .collect();
    stvopt::RespondentSet { candidates, respondents }
}

/// Thirteen candidates: five contenders and a tail of eight minor ones.
pub const LONG_TAIL: [f64; 13] = [
    0.26, 0.22, 0.17, 0.12, 0.10, 0.024, 0.022, 0.02, 0.018, 0.016, 0.014, 0.012, 0.01,
];

pub fn long_tail_respondents(seed: u64) -> stvopt::RespondentSet {
    respondents_from_popularity(&mut rng(seed), &LONG_TAIL, 800, 4)
}

/// Respondent records built from `(ranking, copies)` rows, one record per
/// copy, unit weights.
pub fn respondents_from_rows(ids: &[&str], rows: &[(&[&str], usize)]) -> stvopt::RespondentSet {
    let set = WeightedBallotSet::from_rows(ids, &[]).unwrap();
    let mut respondents = Vec::new();
    for (ranking, copies) in rows {
        let ballot = set.ballot_from_ids(ranking).unwrap();
        for _ in 0..*copies {
            respondents.push(stvopt::Respondent {
                id: format!("r{}", respondents.len()),
                weight: int(1),
                ballot: ballot.clone(),
            });
        }
    }
    stvopt::RespondentSet {
        candidates: set.candidates().to_vec(),
        respondents,
    }
}

/// The San Francisco profile at one fiftieth scale plus two minor
/// candidates. E can only win cheaply by lending first places to N, which
/// knocks M out ahead of N.
pub fn spoiler_respondents() -> stvopt::RespondentSet {
    respondents_from_rows(
        &["E", "M", "N", "X", "Y"],
        &[
            (&["E", "M", "N"], 105),
            (&["E", "N", "M"], 66),
            (&["E"], 111),
            (&["M", "E", "N"], 81),
            (&["M", "N", "E"], 114),
            (&["M"], 38),
            (&["N", "E", "M"], 45),
            (&["N", "M", "E"], 138),
            (&["N"], 34),
            (&["X", "E"], 9),
            (&["Y", "M"], 7),
        ],
    )
}

/// Random seat count in `1..n` and a shuffled tie-break order.
pub fn random_config(rng: &mut impl Rng, n: usize) -> ElectionConfig {
    let seats = rng.gen_range(1..n.max(2));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    ElectionConfig::new(seats, n).with_tie_break(order)
}

/// Same as [`random_instance`] but with some fractional weights.
pub fn fractional_instance(rng: &mut ChaCha8Rng, n: usize) -> WeightedBallotSet {
    let base = random_instance(rng, n, 7, 25);
    let mut out = WeightedBallotSet::new(base.candidates().to_vec()).unwrap();
    for (b, w) in base.iter() {
        let den = rng.gen_range(1..=4);
        out.add(b.clone(), w * frac(1, den)).unwrap();
    }
    out
}

/// Steps a count round by round and checks that active, exhausted and
/// retired weight always add up to the total.
pub fn conservation_holds(ballots: &WeightedBallotSet, config: &ElectionConfig) -> bool {
    let quota = compute_quota(ballots, config).unwrap();
    let mut tab = Tabulator::new(ballots, config, quota);
    loop {
        let accounted = tab.active_weight() + tab.exhausted() + tab.retired();
        if &accounted != tab.total() {
            return false;
        }
        match tab.next_decision() {
            Some((c, kind)) => tab.resolve(c, kind),
            None => return true,
        }
    }
}

/// Every entry but the last is an election loser.
fn losers_then_winner(ballot: &RankedBallot, winners: &[usize]) -> bool {
    let r = ballot.ranking();
    r.iter().take(r.len().saturating_sub(1)).all(|c| !winners.contains(c))
}

/// Brute-forces every plan of up to three ballots on `instances` random
/// profiles. For each subject whose cheapest winning plans are all free of
/// the transfer-only win pattern, checks that one of them uses only ballots
/// listing losers followed by a single winner. Returns the number of
/// subjects examined and a description of each failure.
pub fn optimal_form_cases(seed: u64, instances: usize) -> (usize, Vec<String>) {
    let mut rng = rng(seed);
    let mut examined = 0;
    let mut failures = Vec::new();
    for _ in 0..instances {
        let n = rng.gen_range(3..5);
        let set = random_instance(&mut rng, n, 5, 20);
        let config = random_config(&mut rng, n);
        let plans = all_plans(n, 3);
        let outcomes: Vec<_> = plans
            .iter()
            .map(|p| replay_with_additions(&set, p, &config).unwrap())
            .collect();
        for subject in 0..n {
            let best = plans
                .iter()
                .zip(&outcomes)
                .filter(|(_, o)| o.winners.contains(&subject))
                .map(|(p, _)| p.cost())
                .min();
            let Some(best) = best else { continue };
            if best == 0 {
                continue;
            }
            let optimal: Vec<_> = plans
                .iter()
                .zip(&outcomes)
                .filter(|(p, o)| p.cost() == best && o.winners.contains(&subject))
                .collect();
            let any_case_a = optimal
                .iter()
                .any(|(p, o)| detect_case_a(&set, p, o, &config).unwrap().detected);
            if any_case_a {
                continue;
            }
            examined += 1;
            let has_form = optimal
                .iter()
                .any(|(p, o)| p.additions.keys().all(|b| losers_then_winner(b, &o.winners)));
            if !has_form {
                failures.push(format!("{set:?} {config:?} subject {subject}"));
            }
        }
    }
    (examined, failures)
}

/// Runs the removal rule on random instances with a weak tail until
/// `instances` of them lose at least one candidate, then replays every
/// addition multiset within the budget on the full and reduced profiles.
/// Returns the number of instances tested and how many showed a change in
/// the survivors' relative order.
pub fn removal_violations(rule: RemovalRule, aggressive: bool, instances: usize) -> (usize, usize) {
    let mut rng = rng(21);
    let mut tested = 0;
    let mut bad = 0;
    let shapes = [(4usize, 3usize), (5, 2), (6, 1)];
    let mut attempts = 0;
    while tested < instances && attempts < instances * 50 {
        attempts += 1;
        let (n, budget) = shapes[attempts % shapes.len()];
        let set = instance_with_weak_tail(&mut rng, n, 2, 6);
        let cfg = ElectionConfig::new(1 + attempts % 2, n);
        let options = ReduceOptions { rule, aggressive, ..ReduceOptions::default() };
        let report = remove_irrelevant_with(&set, budget as u64, &cfg, &options).unwrap();
        if report.removed_count() == 0 || !report.pre_resolved.is_empty() {
            continue;
        }
        tested += 1;
        let plans = all_plans(n, budget);
        let found = plans
            .par_iter()
            .filter(|plan| {
                let full = replay_with_additions(&set, plan, &cfg).unwrap();
                let reduced = replay_with_additions(
                    &report.surviving_ballots,
                    &report.project_plan(plan),
                    &report.config,
                )
                .unwrap();
                let lifted: Vec<usize> = reduced.order.iter().map(|&c| report.survivors[c]).collect();
                survivor_order(&full.order, &report.survivors) != lifted
            })
            .count();
        if found > 0 {
            bad += 1;
        }
    }
    (tested, bad)
}

/// Compares the allocator against the brute-force minimum for every
/// reachable structure on `instances` random profiles (three or four
/// candidates, budgets one to four). Returns the number of structures
/// checked and a description of each mismatch.
pub fn allocator_mismatches(seed: u64, instances: usize) -> (usize, Vec<String>) {
    let mut rng = rng(seed);
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for i in 0..instances {
        let n = if i % 2 == 0 { 3 } else { 4 };
        let set = random_instance(&mut rng, n, 6, 30);
        let k = 1 + i % (n - 1);
        let cfg = ElectionConfig::new(k, n);
        let budget = 1 + (i % 4);
        let best = brute_force_costs(&set, &cfg, budget);
        for (structure, cost) in &best {
            checked += 1;
            match optimize_budget(&set, structure, budget as u64, &cfg) {
                Ok(plan) => {
                    let out = replay_with_additions(&set, &plan, &cfg).unwrap();
                    if out.structure() != *structure {
                        mismatches.push(format!("instance {i}: {} plan realizes another structure", structure.format(&set)));
                    } else if plan.cost() != *cost {
                        mismatches.push(format!(
                            "instance {i}: {} brute {cost} got {} plan {:?}",
                            structure.format(&set),
                            plan.cost(),
                            plan.describe(&set)
                        ));
                    }
                }
                Err(e) => mismatches.push(format!("instance {i}: {} brute {cost} got error {e}", structure.format(&set))),
            }
        }
    }
    (checked, mismatches)
}
