//! Script interpreter: applies moves to a diagram and checks assertions.

use std::fmt;

use thiserror::Error;

use crate::diagram::{KirbyDiagram, MoveError, Side};
use crate::homology::AbelianGroup;
use crate::textio::{Command, CountKind, MoveScript};

/// Invariants after one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepReport {
    /// 1-based step index.
    pub step: usize,
    pub command: String,
    pub euler: i64,
    pub signature: i64,
    pub h1_plus: AbelianGroup,
}

impl fmt::Display for StepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step={} command={:?} euler={} signature={} h1_plus={:?}",
            self.step,
            self.command,
            self.euler,
            self.signature,
            self.h1_plus.to_string()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptRun {
    pub diagram: KirbyDiagram,
    /// One entry per step when tracing was requested.
    pub trace: Vec<StepReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Failure {
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error("expected {expected}, found {actual}")]
    Assertion { what: String, expected: String, actual: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step} (`{command}`): {failure}")]
pub struct ScriptError {
    pub step: usize,
    pub command: String,
    pub failure: Failure,
}

impl ScriptError {
    pub fn is_assertion(&self) -> bool {
        matches!(self.failure, Failure::Assertion { .. })
    }
}

/// Boundary homology as asserted by scripts: the upper boundary after the
/// 3-handles are attached, or the lower boundary of a dual diagram.
pub fn asserted_homology(d: &KirbyDiagram, side: Side) -> Result<AbelianGroup, MoveError> {
    let h = d.boundary_homology(side)?;
    Ok(match side {
        Side::Plus => h.capped(),
        Side::Minus => h.group,
    })
}

fn check<T: PartialEq + fmt::Display>(what: &str, expected: T, actual: T) -> Result<(), Failure> {
    if expected == actual {
        Ok(())
    } else {
        Err(Failure::Assertion { what: what.into(), expected: expected.to_string(), actual: actual.to_string() })
    }
}

/// Applies one command.
pub fn apply_command(d: &KirbyDiagram, c: &Command) -> Result<KirbyDiagram, Failure> {
    let next = match c {
        Command::Slide { moving, over, sign } => d.handle_slide(moving, over, *sign)?,
        Command::BlowUp { sign, id } => match id {
            Some(id) => d.blow_up_with_id(*sign, id)?,
            None => d.blow_up(*sign),
        },
        Command::TwistBlowUp { sign, strands, id } => {
            let s: Vec<(&str, i64)> = strands.iter().map(|(c, m)| (c.as_str(), *m)).collect();
            match id {
                Some(id) => d.twist_blow_up_with_id(*sign, &s, id)?,
                None => d.twist_blow_up(*sign, &s)?,
            }
        }
        Command::BlowDown { id } => d.blow_down(id)?,
        Command::Swap { id } => d.zero_dot_swap(id)?,
        Command::AddPair { kind, ids } => match ids {
            Some(ids) => {
                let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
                d.add_cancelling_pair_with_ids(*kind, &refs)?
            }
            None => d.add_cancelling_pair(*kind),
        },
        Command::Cancel { dotted, framed } => d.cancel_pair(dotted.as_deref(), framed)?,
        Command::Dualize => d.dualize()?,
        Command::AssertHomology { side, group } => {
            check(&format!("H1 of the {side} boundary"), group.clone(), asserted_homology(d, *side)?)?;
            d.clone()
        }
        Command::AssertEuler(n) => {
            check("Euler characteristic", *n, d.euler_char())?;
            d.clone()
        }
        Command::AssertSignature(n) => {
            check("signature", *n, d.signature())?;
            d.clone()
        }
        Command::AssertGeom { a, b, geom, .. } => d.assert_geometric(a, b, *geom)?,
        Command::AssertCount { what, n } => {
            let actual = match what {
                CountKind::Components => d.len(),
                CountKind::Three => d.three_handles,
                CountKind::Four => d.four_handles,
                CountKind::Hidden1 => d.hidden_one_handles,
            };
            check(&format!("{what} count"), *n, actual)?;
            d.clone()
        }
    };
    Ok(next)
}

/// Runs `s` on `d`, stopping at the first failing step. With `trace`, the
/// invariants after every step are recorded.
pub fn run_script(d: &KirbyDiagram, s: &MoveScript, trace: bool) -> Result<ScriptRun, ScriptError> {
    let mut cur = d.clone();
    let mut reports = Vec::new();
    for (i, c) in s.commands.iter().enumerate() {
        cur = apply_command(&cur, c).map_err(|failure| ScriptError {
            step: i + 1,
            command: c.to_string(),
            failure,
        })?;
        if trace {
            reports.push(StepReport {
                step: i + 1,
                command: c.to_string(),
                euler: cur.euler_char(),
                signature: cur.signature(),
                h1_plus: asserted_homology(&cur, Side::Plus).expect("upper boundary always exists"),
            });
        }
    }
    Ok(ScriptRun { diagram: cur, trace: reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::{parse_diagram, parse_script};

    #[test]
    fn add_and_cancel_pair_is_empty() {
        let d = KirbyDiagram::new("empty");
        let s = parse_script("addpair 12\nassert-euler 1\ncancel d1 h1\nassert-euler 1\nassert-count components 0\n")
            .unwrap();
        let run = run_script(&d, &s, true).unwrap();
        assert!(run.diagram.is_empty());
        assert_eq!(run.trace.len(), 5);
        assert!(run.trace.iter().all(|r| r.euler == 1));
    }

    #[test]
    fn dotted_slide_is_refused_at_its_step() {
        let d = parse_diagram("diagram d\ncomponent x dotted\ncomponent y framed 0\n").unwrap();
        let s = parse_script("assert-euler 1\nslide x y\n").unwrap();
        let e = run_script(&d, &s, false).unwrap_err();
        assert_eq!(e.step, 2);
        assert!(matches!(e.failure, Failure::Move(MoveError::ForbiddenMove { .. })));
    }

    #[test]
    fn failed_assertion() {
        let d = parse_diagram("diagram d\ncomponent a framed 2\n").unwrap();
        let s = parse_script("assert-homology plus Z/3\n").unwrap();
        let e = run_script(&d, &s, false).unwrap_err();
        assert!(e.is_assertion());
        assert!(e.to_string().contains("expected Z/3, found Z/2"));
    }

    #[test]
    fn deterministic_reports() {
        let d = parse_diagram("diagram d\ncomponent a framed 2\ncomponent b framed 1\nlink a b 1\n").unwrap();
        let s = parse_script("slide a b +\nblowup -1\nslide b a -\n").unwrap();
        let one = run_script(&d, &s, true).unwrap();
        let two = run_script(&d, &s, true).unwrap();
        let render = |r: &ScriptRun| r.trace.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("\n");
        assert_eq!(render(&one), render(&two));
    }
}
