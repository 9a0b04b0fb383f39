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

mod common;

use stvopt::allocator::StrategyPlan;
use stvopt::engine::{replay_with_additions, run_election};
use stvopt::model::{ElectionConfig, RankedBallot};
use stvopt::optimizer::{optimal_topk_strategy, Goal, GoalKind};
use stvopt::robustness::*;
use stvopt::Error;

fn boot(samples: usize, seed: u64, budget: u64, goal: GoalKind) -> BootstrapConfig {
    BootstrapConfig::new(samples, seed, budget, goal).unwrap()
}

#[test]
fn rejects_zero_samples() {
    assert!(BootstrapConfig::new(0, 1, 5, GoalKind::Win).is_err());
}

#[test]
fn resampling_is_deterministic() {
    let r = common::long_tail_respondents(3);
    let a = resample(&r, sample_seed(9, 4));
    let b = resample(&r, sample_seed(9, 4));
    assert_eq!(a, b);
    assert_eq!(a.len(), r.len());
    assert_ne!(a, resample(&r, sample_seed(9, 5)));
    assert_ne!(sample_seed(1, 0), sample_seed(2, 0));
}

#[test]
fn pipeline_is_deterministic() {
    let r = common::spoiler_respondents();
    let cfg = ElectionConfig::new(1, 5);
    let b = boot(12, 77, 30, GoalKind::Win);
    let first = per_sample_optimal(&r, &cfg, &b).unwrap();
    let second = per_sample_optimal(&r, &cfg, &b).unwrap();
    assert_eq!(first, second);
}

#[test]
fn single_respondent_is_reproduced() {
    let r = common::respondents_from_rows(&["A", "B"], &[(&["B", "A"], 1)]);
    for i in 0..20 {
        assert_eq!(resample(&r, sample_seed(5, i)), r);
    }
}

#[test]
fn first_choice_means_within_three_standard_errors() {
    let r = common::long_tail_respondents(11);
    let n = r.len() as f64;
    let k = r.candidates.len();
    let mut source = vec![0.0; k];
    for x in &r.respondents {
        source[x.ballot.first().unwrap()] += 1.0 / n;
    }
    let draws = 1000;
    let mut mean = vec![0.0; k];
    for i in 0..draws {
        for x in &resample(&r, sample_seed(2024, i)).respondents {
            mean[x.ballot.first().unwrap()] += 1.0 / (n * draws as f64);
        }
    }
    for c in 0..k {
        let se = (source[c] * (1.0 - source[c]) / n).sqrt() / (draws as f64).sqrt();
        assert!(
            (mean[c] - source[c]).abs() <= 3.0 * se,
            "candidate {c}: mean {} source {} se {se}",
            mean[c],
            source[c]
        );
    }
}

#[test]
fn landslide_winner_always_wins() {
    let r = common::respondents_from_rows(
        &["A", "B", "C"],
        &[(&["A"], 300), (&["B", "A"], 60), (&["C", "B"], 40)],
    );
    let cfg = ElectionConfig::new(1, 3);
    let t = strategy_efficacy(&StrategyPlan::empty(), &r, &cfg, &boot(200, 1, 0, GoalKind::Win)).unwrap();
    assert_eq!(t.samples, 200);
    assert_eq!(t.frequency(0), 1.0);
    assert_eq!(t.frequency(1) + t.frequency(2), 0.0);
}

#[test]
fn knife_edge_plan_is_uncertain() {
    let r = common::respondents_from_rows(&["A", "B"], &[(&["A"], 400), (&["B"], 401)]);
    let cfg = ElectionConfig::new(1, 2);
    let plan = StrategyPlan::single(RankedBallot(vec![0]), 2);
    let t = strategy_efficacy(&plan, &r, &cfg, &boot(200, 8, 2, GoalKind::Win)).unwrap();
    let f = t.frequency(0);
    assert!(f > 0.0 && f < 1.0, "frequency {f}");
    assert!((t.frequency(0) + t.frequency(1) - 1.0).abs() < 1e-12);
}

#[test]
fn full_data_plan_fails_on_some_samples() {
    let r = common::long_tail_respondents(7);
    let cfg = ElectionConfig::new(1, 13);
    let full = r.to_ballot_set().unwrap();
    let order = run_election(&full, &cfg).unwrap().order;
    let subject = order[2];
    let goal = Goal { subject, kind: GoalKind::TopK(2), max_budget: 40 };
    let found = optimal_topk_strategy(&full, &goal, &cfg).unwrap();
    assert!(found.cost > 0);
    let t = strategy_efficacy(&found.plan, &r, &cfg, &boot(200, 4, 40, GoalKind::TopK(2))).unwrap();
    let f = t.frequency(subject);
    assert!(f > 0.0 && f < 1.0, "frequency {f}");
    let slots: usize = t.hits.iter().sum();
    assert_eq!(slots, 2 * t.samples);
}

#[test]
fn zero_budget_leaves_distribution_empty() {
    let r = common::spoiler_respondents();
    let cfg = ElectionConfig::new(1, 5);
    let b = boot(40, 6, 0, GoalKind::TopK(2));
    let report = per_sample_optimal(&r, &cfg, &b).unwrap();
    for row in &report.distribution.per_candidate {
        assert_eq!(row.feasible, 0);
        assert!(row.signatures.is_empty());
        assert_eq!(row.average_cost(), None);
    }
    let none = strategy_efficacy(&StrategyPlan::empty(), &r, &cfg, &b).unwrap();
    assert_eq!(report.baseline, none);
}

#[test]
fn spoiler_signature_dominates() {
    let r = common::spoiler_respondents();
    let cfg = ElectionConfig::new(1, 5);
    let report = per_sample_optimal(&r, &cfg, &boot(100, 3, 40, GoalKind::Win)).unwrap();
    let e = &report.distribution.per_candidate[0];
    assert!(e.feasible > 20);
    let pct = e.percentages();
    let total: f64 = pct.values().sum();
    assert!((total - 100.0).abs() < 1e-9);
    let (top, share) = pct
        .iter()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    assert_eq!(top, "N");
    assert!(*share > 50.0, "share {share}");
}

#[test]
fn per_sample_plans_meet_their_goal() {
    let r = common::spoiler_respondents();
    let cfg = ElectionConfig::new(1, 5);
    for i in 0..25 {
        let sample = bootstrap_sample(&r, sample_seed(13, i)).unwrap();
        for subject in 0..5 {
            let goal = Goal { subject, kind: GoalKind::TopK(2), max_budget: 30 };
            match optimal_topk_strategy(&sample, &goal, &cfg) {
                Ok(s) => {
                    assert!(s.cost <= 30);
                    let o = replay_with_additions(&sample, &s.plan, &cfg).unwrap();
                    assert!(o.position_of(subject) < 2);
                }
                Err(Error::Infeasible { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn selfish_ballots_never_hurt_any_sample() {
    let r = common::spoiler_respondents();
    let cfg = ElectionConfig::new(1, 5);
    for i in 0..60 {
        let sample = bootstrap_sample(&r, sample_seed(21, i)).unwrap();
        let base = run_election(&sample, &cfg).unwrap();
        for subject in 0..5 {
            for t in 1..=5 {
                let plan = StrategyPlan::single(RankedBallot(vec![subject]), t);
                let with = replay_with_additions(&sample, &plan, &cfg).unwrap();
                for p in 1..=2 {
                    if base.position_of(subject) < p {
                        assert!(with.position_of(subject) < p, "sample {i} subject {subject} t {t}");
                    }
                }
            }
        }
    }
}

#[test]
fn long_tail_reduction_rate() {
    let r = common::long_tail_respondents(7);
    let cfg = ElectionConfig::new(1, 13);
    let report = per_sample_optimal(&r, &cfg, &boot(30, 1, 40, GoalKind::TopK(2))).unwrap();
    assert_eq!(report.reduction.removed.len(), 30);
    assert!(report.reduction.success_rate(7) >= 0.95);
    for row in &report.distribution.per_candidate {
        assert!(row.feasible + row.unresolved <= row.needed);
    }
}
