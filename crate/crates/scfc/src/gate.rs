//! Deployment gate: map a verdict to a process exit status.

use crate::capability::Verdict;

/// Exit status contract: 0 pass, 1 fail, 2 usage or input error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass,
    Fail,
    UsageError,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::Fail => 1,
            ExitStatus::UsageError => 2,
        }
    }
}

/// Pass iff the verdict clears the gate; `strict` raises the bar to
/// Excellent.
pub fn exit_status(verdict: Verdict, strict: bool) -> ExitStatus {
    match verdict {
        Verdict::Excellent => ExitStatus::Pass,
        Verdict::Capable => {
            if strict {
                ExitStatus::Fail
            } else {
                ExitStatus::Pass
            }
        }
        Verdict::Unacceptable => ExitStatus::Fail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_gate_passes_capable_and_excellent() {
        assert_eq!(exit_status(Verdict::Excellent, false), ExitStatus::Pass);
        assert_eq!(exit_status(Verdict::Capable, false), ExitStatus::Pass);
        assert_eq!(exit_status(Verdict::Unacceptable, false), ExitStatus::Fail);
    }

    #[test]
    fn strict_gate_requires_excellent() {
        assert_eq!(exit_status(Verdict::Excellent, true), ExitStatus::Pass);
        assert_eq!(exit_status(Verdict::Capable, true), ExitStatus::Fail);
        assert_eq!(exit_status(Verdict::Unacceptable, true), ExitStatus::Fail);
    }

    #[test]
    fn codes_follow_the_contract() {
        assert_eq!(ExitStatus::Pass.code(), 0);
        assert_eq!(ExitStatus::Fail.code(), 1);
        assert_eq!(ExitStatus::UsageError.code(), 2);
    }
}
