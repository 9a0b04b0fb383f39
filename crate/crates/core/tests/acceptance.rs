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

//! Acceptance suite. Runs each criterion once and prints one line per
//! criterion; the process exits non-zero when any of them fails.

mod common;

use rand::Rng;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};
use stvopt::allocator::StrategyPlan;
use stvopt::constraints::generate_constraints;
use stvopt::engine::{replay_with_additions, run_election, RoundKind, Tabulator};
use stvopt::model::{compute_quota, int, ElectionConfig, RankedBallot, WeightedBallotSet};
use stvopt::optimizer::{optimal_topk_strategy, selfish_win_strategy, Goal, GoalKind};
use stvopt::reducer::{sequence_bounds, RemovalRule};
use stvopt::robustness::{per_sample_optimal, BootstrapConfig};
use stvopt::structure::{
    enumerate_all_sequences, enumerate_bounded_sequences, enumerate_feasible_sequences,
    feasible_sequence_bound, permutations, Sequence, Structure,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn ids(set: &WeightedBallotSet, order: &[usize]) -> String {
    order.iter().map(|&c| set.candidate_id(c)).collect::<Vec<_>>().join(">")
}

fn sf_tally() -> Outcome {
    let start = Instant::now();
    let set = common::sf_ballots();
    let cfg = common::sf_config();
    let out = run_election(&set, &cfg).map_err(|e| e.to_string())?;
    let first = &out.rounds[0].tallies_before;
    check(
        first[&0] == int(14119) && first[&1] == int(11652) && first[&2] == int(10855),
        "first-round tallies differ",
    )?;
    check(out.rounds[0].resolved == 2 && out.rounds[0].kind == RoundKind::Elimination, "N is not eliminated first")?;
    let second = &out.rounds[1].tallies_before;
    check(second[&1] == int(18561) && second[&0] == int(16370), "second-round tallies differ")?;
    check(out.winners == vec![1], "M does not win")?;

    let quota = compute_quota(&set, &cfg).map_err(|e| e.to_string())?;
    let mut tab = Tabulator::new(&set, &cfg, quota);
    tab.resolve(1, RoundKind::Elimination);
    check(*tab.tally(0) == int(18169) && *tab.tally(2) == int(16563), "counterfactual tallies differ")?;
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("E 14119 / M 11652 / N 10855; M 18561 vs E 16370; without M: E 18169 / N 16563 ({elapsed:?})"))
}

fn sf_strategies() -> Outcome {
    let set = common::sf_ballots();
    let cfg = common::sf_config();
    let goal = Goal { subject: 0, kind: GoalKind::TopK(1), max_budget: 3000 };
    let spoiler = optimal_topk_strategy(&set, &goal, &cfg).map_err(|e| e.to_string())?;
    check(spoiler.cost == 798, format!("optimal cost {}", spoiler.cost))?;
    check(spoiler.plan == StrategyPlan::single(RankedBallot(vec![2]), 798), "optimal plan is not 798 x [N]")?;
    let selfish = selfish_win_strategy(&set, 0, 3000, &cfg).map_err(|e| e.to_string())?;
    check(selfish.cost == 2192, format!("self-vote cost {}", selfish.cost))?;
    let ratio = spoiler.cost as f64 / selfish.cost as f64;
    check((ratio - 0.364).abs() < 5e-4, format!("ratio {ratio:.4}"))?;
    Ok(format!("798 x [N] vs 2192 x [E], ratio {ratio:.3}"))
}

fn worked_example_orders() -> Outcome {
    let cfg = ElectionConfig::new(2, 4);
    let order = |set: &WeightedBallotSet| -> Result<String, String> {
        let out = run_election(set, &cfg).map_err(|e| e.to_string())?;
        Ok(ids(set, &out.order))
    };
    let original = common::example_original();
    let got = order(&original)?;
    check(got == "A>C>B>D", format!("original order {got}"))?;
    let d = original.ballot_from_ids(&["D"]).map_err(|e| e.to_string())?;
    let boosted = original.merged_with(&[(d, int(2))]).map_err(|e| e.to_string())?;
    let got = order(&boosted)?;
    check(got == "B>A>D>C", format!("order after two [D] ballots {got}"))?;
    let before = order(&common::flip_original())?;
    let after = order(&common::flip_changed())?;
    check(before == "A>B>C>D" && after == "D>C>B>A", format!("flip {before} -> {after}"))?;
    Ok("A>C>B>D, B>A>D>C after +2 x [D], A>B>C>D -> D>C>B>A".into())
}

fn allocator_oracle() -> Outcome {
    let (checked, mismatches) = common::allocator_mismatches(404, 200);
    check(mismatches.is_empty(), format!("{} mismatches, first: {}", mismatches.len(), mismatches.first().map_or("", |m| m)))?;
    Ok(format!("200 instances, {checked} reachable structures, all at the brute-force minimum"))
}

fn reducer_oracle() -> Outcome {
    let (tested, bad) = common::removal_violations(RemovalRule::Exhaustive, false, 100);
    check(tested >= 100, format!("only {tested} instances had a removable group"))?;
    check(bad == 0, format!("{bad} instances with order changes"))?;
    Ok(format!("{tested} instances, every multiset within budget, 0 violations"))
}

fn sequence_space() -> Outcome {
    let mut got: Vec<String> = enumerate_all_sequences(4).iter().map(|s| s.to_string()).collect();
    got.sort();
    let mut want: Vec<String> = ["WWWW", "WWLW", "WLLW", "WLWW", "LWWW", "LWLW", "LLWW", "LLLW"]
        .iter()
        .map(|s| Sequence::parse(s).unwrap().to_string())
        .collect();
    want.sort();
    check(got == want, format!("four-candidate sequences {got:?}"))?;
    for n in 2..=8 {
        for k in 1..n {
            let count = enumerate_feasible_sequences(n, k).len() as u128;
            check(count <= feasible_sequence_bound(n, k), format!("n={n} k={k}: {count} sequences"))?;
        }
    }
    let set = common::sf_ballots();
    let cfg = common::sf_config().with_quota(int(1_000_000));
    let bounds = sequence_bounds(&set, 0, &cfg).map_err(|e| e.to_string())?;
    let seqs = enumerate_bounded_sequences(3, 1, bounds.max_wins, bounds.min_initial_losses);
    check(
        seqs == vec![Sequence::parse("LLW").unwrap()],
        format!("unreachable quota leaves {:?}", seqs.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
    )?;
    Ok("8 sequences for n=4; feasible counts within bound for n <= 8; unreachable quota leaves LLW".into())
}

fn constraint_agreement() -> Outcome {
    let mut rng = common::rng(7_000);
    let structures: Vec<Structure> = permutations(&[0, 1, 2])
        .into_iter()
        .flat_map(|order| {
            enumerate_all_sequences(3)
                .into_iter()
                .map(move |seq| Structure::new(order.clone(), seq).unwrap())
        })
        .collect();
    let mut disagreements = 0;
    for _ in 0..1000 {
        let set = common::random_instance(&mut rng, 3, 6, 30);
        let cfg = common::random_config(&mut rng, 3);
        let quota = compute_quota(&set, &cfg).map_err(|e| e.to_string())?;
        let truth = run_election(&set, &cfg).map_err(|e| e.to_string())?.structure();
        for s in &structures {
            if generate_constraints(s, &quota).evaluate(&set, &cfg) != (*s == truth) {
                disagreements += 1;
            }
        }
    }
    check(disagreements == 0, format!("{disagreements} disagreements"))?;
    Ok(format!("1000 profiles x {} structures, 0 disagreements", structures.len()))
}

fn property_suites() -> Outcome {
    let mut rng = common::rng(8_000);
    for i in 0..1000 {
        let n = rng.gen_range(2..7);
        let set = common::fractional_instance(&mut rng, n);
        let cfg = common::random_config(&mut rng, n);
        check(common::conservation_holds(&set, &cfg), format!("conservation fails on instance {i}"))?;
    }
    for i in 0..10_000 {
        let n = rng.gen_range(2..7);
        let set = common::random_instance(&mut rng, n, 8, 30);
        let cfg = common::random_config(&mut rng, n);
        let out = run_election(&set, &cfg).map_err(|e| e.to_string())?;
        let outside = out
            .rounds
            .iter()
            .any(|r| r.kind == RoundKind::QuotaWin && r.position >= cfg.seats);
        check(!outside, format!("quota winner outside the top seats on instance {i}"))?;
    }
    for i in 0..1000 {
        let n = rng.gen_range(2..6);
        let set = common::random_instance(&mut rng, n, 6, 20);
        let cfg = common::random_config(&mut rng, n);
        let subject = rng.gen_range(0..n);
        let t = rng.gen_range(0..=5u64);
        let before = run_election(&set, &cfg).map_err(|e| e.to_string())?.position_of(subject);
        let plan = StrategyPlan::single(RankedBallot(vec![subject]), t);
        let after = replay_with_additions(&set, &plan, &cfg).map_err(|e| e.to_string())?.position_of(subject);
        check(after <= before, format!("self-votes lowered the subject on pair {i}"))?;
    }
    let (examined, failures) = common::optimal_form_cases(5_300, 150);
    check(failures.is_empty(), format!("{} optimal-form failures", failures.len()))?;
    check(examined >= 20, format!("only {examined} optimal-form cases"))?;
    Ok(format!(
        "conservation on 1000, quota winners on 10000, self-votes on 1000 pairs, optimal form on {examined} subjects"
    ))
}

fn long_tail() -> Outcome {
    let start = Instant::now();
    let respondents = common::long_tail_respondents(7);
    let budget = respondents.len() as u64 * 5 / 100;
    let cfg = ElectionConfig::new(1, 13);
    let boot = BootstrapConfig::new(200, 1, budget, GoalKind::TopK(2)).map_err(|e| e.to_string())?;
    let report = per_sample_optimal(&respondents, &cfg, &boot).map_err(|e| e.to_string())?;
    let rate = report.reduction.success_rate(7);
    let elapsed = start.elapsed();
    check(report.reduction.removed.len() == 200, "missing samples")?;
    check(rate >= 0.95, format!("removal rate {rate:.3}"))?;
    check(elapsed < Duration::from_secs(600), format!("took {elapsed:?}"))?;
    let unresolved: usize = report.distribution.per_candidate.iter().map(|r| r.unresolved).sum();
    Ok(format!(
        "budget {budget}, >= 7 removed in {:.1}% of 200 samples, {unresolved} unresolved searches, {:.1} s",
        rate * 100.0,
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("San Francisco tally", sf_tally),
        ("San Francisco strategies", sf_strategies),
        ("worked example orders", worked_example_orders),
        ("allocator vs brute force", allocator_oracle),
        ("reducer soundness", reducer_oracle),
        ("sequence space", sequence_space),
        ("constraints vs engine", constraint_agreement),
        ("property suites", property_suites),
        ("long-tail bootstrap", long_tail),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match result {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
