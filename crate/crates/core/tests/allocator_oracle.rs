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

#[test]
fn optimize_budget_matches_exhaustive_minimum() {
    let (checked, mismatches) = common::allocator_mismatches(11, 40);
    for m in &mismatches {
        println!("{m}");
    }
    println!("checked {checked}, mismatches {}", mismatches.len());
    assert!(mismatches.is_empty());
}
