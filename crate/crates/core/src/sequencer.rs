//! Protocol builders: expand the named array operations into phase lists with
//! per-column line choreography.

use crate::bitcell::{BitLine, BlrLevel, Logic, PhaseKind, PhaseLines};
use crate::error::ArrayError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    Write,
    Read,
    XorTwoStep,
    Toggle,
    Erase,
}

/// One phase of a protocol: the operation and the lines of every column.
/// Word lines are row-shared, so all entries carry the same `wl1`/`wl2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseStep {
    pub kind: PhaseKind,
    pub columns: Vec<PhaseLines>,
}

impl PhaseStep {
    fn uniform(kind: PhaseKind, lines: PhaseLines, cols: usize) -> Self {
        PhaseStep {
            kind,
            columns: vec![lines; cols],
        }
    }

    /// Row-shared word line levels, if every column agrees.
    pub fn word_lines(&self) -> Result<(Logic, Logic), ArrayError> {
        let first = self
            .columns
            .first()
            .ok_or_else(|| ArrayError::Geometry("phase with zero columns".into()))?;
        for (col, lines) in self.columns.iter().enumerate() {
            if lines.wl1 != first.wl1 || lines.wl2 != first.wl2 {
                return Err(ArrayError::SharedLineConflict { col });
            }
        }
        Ok((first.wl1, first.wl2))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protocol {
    pub kind: ProtocolKind,
    pub phases: Vec<PhaseStep>,
    /// Array cycles consumed. The two XOR steps (with the N sample) count as a
    /// single array cycle.
    pub cycle_cost: u32,
    /// Target row for normal-mode write/read; `None` for mask-driven protocols.
    pub row: Option<usize>,
}

impl Protocol {
    pub fn phase_count(&self) -> usize {
        self.phases.len()
    }

    pub fn columns(&self) -> usize {
        self.phases.first().map_or(0, |p| p.columns.len())
    }

    pub fn phase_kinds(&self) -> Vec<PhaseKind> {
        self.phases.iter().map(|p| p.kind).collect()
    }

    /// Operand vector carried on DL during the XOR/erase phases.
    pub fn operand(&self) -> Option<Vec<Logic>> {
        self.phases
            .iter()
            .find(|p| p.kind == PhaseKind::ConditionalReset)
            .map(|p| p.columns.iter().map(|l| l.dl).collect())
    }

    /// Bits driven by a write protocol.
    pub fn written_bits(&self) -> Option<Vec<Logic>> {
        self.phases
            .iter()
            .find(|p| p.kind == PhaseKind::Write)
            .map(|p| {
                p.columns
                    .iter()
                    .map(|l| Logic::from_bool(l.bl == BitLine::Drive1))
                    .collect()
            })
    }
}

fn check_operand(operand_b: &[Logic]) -> Result<(), ArrayError> {
    if operand_b.is_empty() {
        return Err(ArrayError::Geometry("operand vector is empty".into()));
    }
    if operand_b.iter().any(|b| !b.is_known()) {
        return Err(ArrayError::OperandX);
    }
    Ok(())
}

fn xor_phases(operand_b: &[Logic]) -> Vec<PhaseStep> {
    let cols = operand_b.len();
    vec![
        PhaseStep::uniform(PhaseKind::SampleN, PhaseLines::sample_n(), cols),
        PhaseStep {
            kind: PhaseKind::ConditionalReset,
            columns: operand_b
                .iter()
                .map(|&b| PhaseLines::conditional_reset(b))
                .collect(),
        },
        PhaseStep {
            kind: PhaseKind::ConditionalFlip,
            columns: operand_b
                .iter()
                .map(|&b| PhaseLines::conditional_flip(b))
                .collect(),
        },
    ]
}

pub fn build_xor_protocol(operand_b: &[Logic]) -> Result<Protocol, ArrayError> {
    check_operand(operand_b)?;
    Ok(Protocol {
        kind: ProtocolKind::XorTwoStep,
        phases: xor_phases(operand_b),
        cycle_cost: 1,
        row: None,
    })
}

pub fn build_toggle_protocol(num_columns: usize) -> Result<Protocol, ArrayError> {
    let ones = vec![Logic::L1; num_columns];
    check_operand(&ones)?;
    Ok(Protocol {
        kind: ProtocolKind::Toggle,
        phases: xor_phases(&ones),
        cycle_cost: 1,
        row: None,
    })
}

/// Step 1 only, with every column's operand forced high.
pub fn build_erase_protocol(num_columns: usize) -> Result<Protocol, ArrayError> {
    let ones = vec![Logic::L1; num_columns];
    check_operand(&ones)?;
    let mut phases = xor_phases(&ones);
    phases.truncate(2);
    Ok(Protocol {
        kind: ProtocolKind::Erase,
        phases,
        cycle_cost: 1,
        row: None,
    })
}

pub fn build_write_protocol(row: usize, bits: &[Logic]) -> Result<Protocol, ArrayError> {
    if bits.is_empty() {
        return Err(ArrayError::Geometry("write of zero columns".into()));
    }
    if bits.iter().any(|b| !b.is_known()) {
        return Err(ArrayError::OperandX);
    }
    Ok(Protocol {
        kind: ProtocolKind::Write,
        phases: vec![PhaseStep {
            kind: PhaseKind::Write,
            columns: bits.iter().map(|&b| PhaseLines::write(b)).collect(),
        }],
        cycle_cost: 1,
        row: Some(row),
    })
}

pub fn build_read_protocol(row: usize, num_columns: usize) -> Result<Protocol, ArrayError> {
    if num_columns == 0 {
        return Err(ArrayError::Geometry("read of zero columns".into()));
    }
    Ok(Protocol {
        kind: ProtocolKind::Read,
        phases: vec![PhaseStep::uniform(
            PhaseKind::Read,
            PhaseLines::read(),
            num_columns,
        )],
        cycle_cost: 1,
        row: Some(row),
    })
}

/// Column lines of a phase, for display and trace dumps.
pub fn describe_blr(level: BlrLevel) -> &'static str {
    match level {
        BlrLevel::Gnd => "0",
        BlrLevel::Vdd => "1",
        BlrLevel::Neg => "Negative voltage",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Logic::{L0, L1};

    #[test]
    fn xor_lines_for_b_one() {
        let p = build_xor_protocol(&[L1]).unwrap();
        assert_eq!(
            p.phase_kinds(),
            [
                PhaseKind::SampleN,
                PhaseKind::ConditionalReset,
                PhaseKind::ConditionalFlip
            ]
        );
        let s1 = p.phases[1].columns[0];
        let s2 = p.phases[2].columns[0];
        assert_eq!((s1.dl, s1.blr), (L1, BlrLevel::Neg));
        assert_eq!((s2.dl, s2.blr), (L1, BlrLevel::Vdd));
        assert_eq!(p.cycle_cost, 1);
    }

    #[test]
    fn xor_lines_for_b_zero_and_mixed() {
        let p = build_xor_protocol(&[L0]).unwrap();
        for step in &p.phases[1..] {
            assert_eq!(
                (step.columns[0].dl, step.columns[0].blr),
                (L0, BlrLevel::Gnd)
            );
        }
        let mixed = build_xor_protocol(&[L1, L0]).unwrap();
        let one = build_xor_protocol(&[L1]).unwrap();
        let zero = build_xor_protocol(&[L0]).unwrap();
        for i in 0..3 {
            assert_eq!(mixed.phases[i].columns[0], one.phases[i].columns[0]);
            assert_eq!(mixed.phases[i].columns[1], zero.phases[i].columns[0]);
        }
        assert_eq!(mixed.operand().unwrap(), vec![L1, L0]);
    }

    #[test]
    fn xor_rejects_unknown_operand() {
        assert_eq!(
            build_xor_protocol(&[L1, Logic::X]),
            Err(ArrayError::OperandX)
        );
    }

    #[test]
    fn toggle_is_xor_with_ones() {
        for cols in [1, 4] {
            let t = build_toggle_protocol(cols).unwrap();
            let x = build_xor_protocol(&vec![L1; cols]).unwrap();
            assert_eq!(t.kind, ProtocolKind::Toggle);
            assert_eq!(t.phases, x.phases);
            assert_eq!(t.cycle_cost, x.cycle_cost);
        }
        assert!(build_toggle_protocol(0).is_err());
    }

    #[test]
    fn erase_is_step_one_only() {
        let e = build_erase_protocol(3).unwrap();
        assert_eq!(
            e.phase_kinds(),
            [PhaseKind::SampleN, PhaseKind::ConditionalReset]
        );
        assert!(e.phases[1]
            .columns
            .iter()
            .all(|l| l.dl == L1 && l.blr == BlrLevel::Neg));
        let x = build_xor_protocol(&[L1; 3]).unwrap();
        assert_eq!(e.phases[..], x.phases[..2]);
    }

    #[test]
    fn every_phase_is_legal_for_its_kind() {
        let protos = [
            build_xor_protocol(&[L1, L0, L1]).unwrap(),
            build_toggle_protocol(3).unwrap(),
            build_erase_protocol(3).unwrap(),
            build_write_protocol(0, &[L1, L0, L0]).unwrap(),
            build_read_protocol(0, 3).unwrap(),
        ];
        for p in protos {
            for step in &p.phases {
                step.word_lines().unwrap();
                for lines in &step.columns {
                    lines.check_kind(step.kind).unwrap();
                }
            }
        }
    }
}
