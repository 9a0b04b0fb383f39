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

//! Error type shared by the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ballot set has no weight")]
    EmptyBallotSet,
    #[error("unknown candidate: {0}")]
    UnknownCandidate(String),
    #[error("duplicate candidate in ranking: {0}")]
    DuplicateCandidate(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid structure: {0}")]
    Structure(String),
    #[error("no feasible plan within budget {budget}")]
    Infeasible { budget: u64 },
    #[error("search space of {structures} structures exceeds the limit of {limit}")]
    SearchTooLarge { structures: u128, limit: u128 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
