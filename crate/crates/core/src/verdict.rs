use std::fmt;

use serde::{Deserialize, Serialize};

/// Outcome of an exclusion argument.
///
/// `Contradiction` means the arithmetic refutes the assumed maximal
/// singularity or cycle; `Consistent` means the numbers do not refute it;
/// `NoVerdict` means the precondition of the argument was not met.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Contradiction,
    Consistent,
    NoVerdict,
}

impl Verdict {
    pub fn is_contradiction(self) -> bool {
        self == Verdict::Contradiction
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Contradiction => "CONTRADICTION",
            Verdict::Consistent => "CONSISTENT",
            Verdict::NoVerdict => "NO_VERDICT",
        })
    }
}
