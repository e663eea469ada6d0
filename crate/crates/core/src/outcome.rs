use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Acc,
    Rej,
}

impl Verdict {
    pub fn from_bool(accept: bool) -> Self {
        if accept {
            Verdict::Acc
        } else {
            Verdict::Rej
        }
    }

    pub fn is_acc(self) -> bool {
        self == Verdict::Acc
    }
}

/// The verifier's output `(d, z)`: an accepted sample or a rejection.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SampleOutcome {
    Acc(Bits),
    Rej,
}

impl SampleOutcome {
    pub fn verdict(&self) -> Verdict {
        match self {
            SampleOutcome::Acc(_) => Verdict::Acc,
            SampleOutcome::Rej => Verdict::Rej,
        }
    }

    pub fn sample(&self) -> Option<&Bits> {
        match self {
            SampleOutcome::Acc(z) => Some(z),
            SampleOutcome::Rej => None,
        }
    }

    pub fn is_acc(&self) -> bool {
        matches!(self, SampleOutcome::Acc(_))
    }
}

impl fmt::Display for SampleOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleOutcome::Acc(z) => write!(f, "(Acc, {z})"),
            SampleOutcome::Rej => f.write_str("(Rej, _)"),
        }
    }
}
