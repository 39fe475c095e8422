//! Behavioral state machine for a single 9T bitcell.
//!
//! The cell is the 6T core (storage nodes `Vx`/`Vy`) plus three devices:
//! `M9` isolates the right access path so `M2` alone can copy `Vy` onto the
//! dynamic node `N`, and the `M7`/`M8` stack connects `Vx` to the column line
//! `BLR` under control of `N` (gate of `M7`) and `DL` (gate of `M8`).
//!
//! Every phase is a pure function `CellState -> CellState`. Line choreography
//! is checked by [`PhaseLines::validate`] before a phase is applied.

use std::fmt;

use crate::error::CellError;

/// Three-valued logic level used for storage nodes and control lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Logic {
    #[default]
    L0,
    L1,
    X,
}

impl Logic {
    pub fn from_bool(bit: bool) -> Self {
        if bit {
            Logic::L1
        } else {
            Logic::L0
        }
    }

    /// `None` for `X`.
    pub fn to_bool(self) -> Option<bool> {
        match self {
            Logic::L0 => Some(false),
            Logic::L1 => Some(true),
            Logic::X => None,
        }
    }

    pub fn not(self) -> Self {
        match self {
            Logic::L0 => Logic::L1,
            Logic::L1 => Logic::L0,
            Logic::X => Logic::X,
        }
    }

    pub fn xor(self, other: Logic) -> Self {
        match (self.to_bool(), other.to_bool()) {
            (Some(a), Some(b)) => Logic::from_bool(a ^ b),
            _ => Logic::X,
        }
    }

    pub fn is_known(self) -> bool {
        self != Logic::X
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(Logic::L0),
            '1' => Some(Logic::L1),
            'x' | 'X' => Some(Logic::X),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Logic::L0 => '0',
            Logic::L1 => '1',
            Logic::X => 'X',
        }
    }
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl From<bool> for Logic {
    fn from(bit: bool) -> Self {
        Logic::from_bool(bit)
    }
}

/// Default retention of node `N`, in phases.
pub const DEFAULT_N_TTL: u32 = 4;

/// Capacitive node `N`: holds the sampled `Vy` for a limited number of phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DynNode {
    value: Logic,
    age: u32,
    ttl: u32,
}

impl DynNode {
    pub fn unknown(ttl: u32) -> Self {
        assert!(ttl > 0, "node N ttl must be positive");
        DynNode {
            value: Logic::X,
            age: 0,
            ttl,
        }
    }

    /// Effective value: `X` once the retention window has elapsed.
    pub fn read(&self) -> Logic {
        if self.age > self.ttl {
            Logic::X
        } else {
            self.value
        }
    }

    /// Stored value, ignoring expiry.
    pub fn raw(&self) -> Logic {
        self.value
    }

    pub fn age(&self) -> u32 {
        self.age
    }

    pub fn ttl(&self) -> u32 {
        self.ttl
    }

    fn sample(self, value: Logic) -> Self {
        DynNode {
            value,
            age: 0,
            ..self
        }
    }

    fn tick(self) -> Self {
        DynNode {
            age: self.age.saturating_add(1),
            ..self
        }
    }

    fn invalidate(self) -> Self {
        DynNode {
            value: Logic::X,
            age: 0,
            ..self
        }
    }
}

/// Voltage on the `BLR` column line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlrLevel {
    Gnd,
    Vdd,
    /// Negative pulse used by the conditional reset.
    Neg,
}

/// State of a bit line (`BL` or `BLB`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitLine {
    Precharged,
    Drive0,
    Drive1,
}

impl BitLine {
    fn is_driven(self) -> bool {
        self != BitLine::Precharged
    }
}

/// Which cell operation a phase performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseKind {
    SampleN,
    ConditionalReset,
    ConditionalFlip,
    Write,
    Read,
}

impl PhaseKind {
    pub fn name(self) -> &'static str {
        match self {
            PhaseKind::SampleN => "sample_n",
            PhaseKind::ConditionalReset => "conditional_reset",
            PhaseKind::ConditionalFlip => "conditional_flip",
            PhaseKind::Write => "write",
            PhaseKind::Read => "read",
        }
    }
}

/// Line voltages seen by one cell during one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseLines {
    pub wl1: Logic,
    pub wl2: Logic,
    pub dl: Logic,
    pub blr: BlrLevel,
    pub bl: BitLine,
    pub blb: BitLine,
}

impl PhaseLines {
    /// Everything off, bit lines precharged.
    pub const IDLE: PhaseLines = PhaseLines {
        wl1: Logic::L0,
        wl2: Logic::L0,
        dl: Logic::L0,
        blr: BlrLevel::Gnd,
        bl: BitLine::Precharged,
        blb: BitLine::Precharged,
    };

    pub fn sample_n() -> Self {
        PhaseLines {
            wl1: Logic::L1,
            ..Self::IDLE
        }
    }

    pub fn conditional_reset(dl: Logic) -> Self {
        PhaseLines {
            dl,
            blr: if dl == Logic::L1 {
                BlrLevel::Neg
            } else {
                BlrLevel::Gnd
            },
            ..Self::IDLE
        }
    }

    pub fn conditional_flip(dl: Logic) -> Self {
        PhaseLines {
            dl,
            blr: if dl == Logic::L1 {
                BlrLevel::Vdd
            } else {
                BlrLevel::Gnd
            },
            ..Self::IDLE
        }
    }

    pub fn write(bit: Logic) -> Self {
        let (bl, blb) = if bit == Logic::L1 {
            (BitLine::Drive1, BitLine::Drive0)
        } else {
            (BitLine::Drive0, BitLine::Drive1)
        };
        PhaseLines {
            wl1: Logic::L1,
            wl2: Logic::L1,
            bl,
            blb,
            ..Self::IDLE
        }
    }

    pub fn read() -> Self {
        PhaseLines {
            wl1: Logic::L1,
            wl2: Logic::L1,
            ..Self::IDLE
        }
    }

    /// Checks the electrical legality of the assignment on its own.
    pub fn validate(&self) -> Result<(), CellError> {
        if !(self.wl1.is_known() && self.wl2.is_known() && self.dl.is_known()) {
            return Err(CellError::IllegalLines("control line driven to X"));
        }
        if self.blr == BlrLevel::Neg && self.wl1 != Logic::L0 {
            return Err(CellError::IllegalLines("negative BLR requires WL1 low"));
        }
        let driven = self.bl.is_driven() || self.blb.is_driven();
        if driven && !(self.wl1 == Logic::L1 && self.wl2 == Logic::L1) {
            return Err(CellError::IllegalLines(
                "driven bit lines require WL1 and WL2 high",
            ));
        }
        if driven && self.bl == self.blb {
            return Err(CellError::IllegalLines(
                "bit lines must be driven differentially",
            ));
        }
        Ok(())
    }

    /// Checks that the lines realise `kind`. Returns the written bit for writes.
    pub fn check_kind(&self, kind: PhaseKind) -> Result<(), CellError> {
        self.validate()?;
        let ok = match kind {
            PhaseKind::SampleN => {
                self.wl1 == Logic::L1
                    && self.wl2 == Logic::L0
                    && !self.bl.is_driven()
                    && !self.blb.is_driven()
                    && self.blr == BlrLevel::Gnd
            }
            PhaseKind::ConditionalReset => {
                self.wl1 == Logic::L0
                    && self.wl2 == Logic::L0
                    && (self.blr == BlrLevel::Neg) == (self.dl == Logic::L1)
                    && self.blr != BlrLevel::Vdd
            }
            PhaseKind::ConditionalFlip => {
                self.wl1 == Logic::L0
                    && self.wl2 == Logic::L0
                    && (self.blr == BlrLevel::Vdd) == (self.dl == Logic::L1)
                    && self.blr != BlrLevel::Neg
            }
            PhaseKind::Write => {
                self.wl1 == Logic::L1 && self.wl2 == Logic::L1 && self.bl.is_driven()
            }
            PhaseKind::Read => {
                self.wl1 == Logic::L1
                    && self.wl2 == Logic::L1
                    && !self.bl.is_driven()
                    && !self.blb.is_driven()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(CellError::PhaseMismatch(kind.name()))
        }
    }
}

/// Complete behavioral state of one 9T cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellState {
    pub vx: Logic,
    pub vy: Logic,
    pub n: DynNode,
    /// Hold time spent with `Vx = 0`.
    pub stress0: u64,
    /// Hold time spent with `Vx = 1`.
    pub stress1: u64,
}

impl CellState {
    pub fn init(bit: Logic) -> Result<Self, CellError> {
        Self::init_with_ttl(bit, DEFAULT_N_TTL)
    }

    pub fn init_with_ttl(bit: Logic, ttl: u32) -> Result<Self, CellError> {
        if !bit.is_known() {
            return Err(CellError::InvalidBit);
        }
        Ok(CellState {
            vx: bit,
            vy: bit.not(),
            n: DynNode::unknown(ttl),
            stress0: 0,
            stress1: 0,
        })
    }

    /// WL1 high, WL2 low: `M2` copies `Vy` onto `N`.
    pub fn sample_n(self) -> Self {
        CellState {
            n: self.n.sample(self.vy),
            ..self
        }
    }

    /// Step 1 of XOR. With `DL = 1` the negative `BLR` pulls `Vx` to 0 through
    /// `M7`/`M8` whatever the gate of `M7` holds.
    pub fn conditional_reset(self, dl: Logic) -> Result<Self, CellError> {
        match dl {
            Logic::L1 => {
                if !self.n.read().is_known() {
                    return Err(CellError::StaleNode {
                        phase: PhaseKind::ConditionalReset.name(),
                    });
                }
                Ok(CellState {
                    vx: Logic::L0,
                    vy: Logic::L1,
                    n: self.n.tick(),
                    ..self
                })
            }
            Logic::L0 => Ok(CellState {
                n: self.n.tick(),
                ..self
            }),
            Logic::X => Err(CellError::InvalidBit),
        }
    }

    /// Step 2 of XOR. `BLR = VDD` pulls `Vx` up only when `N` (gate of `M7`)
    /// and `DL` (gate of `M8`) are both high.
    pub fn conditional_flip(self, dl: Logic) -> Result<Self, CellError> {
        match dl {
            Logic::L1 => {
                let n = self.n.read();
                if !n.is_known() {
                    return Err(CellError::StaleNode {
                        phase: PhaseKind::ConditionalFlip.name(),
                    });
                }
                let (vx, vy) = if n == Logic::L1 {
                    (Logic::L1, Logic::L0)
                } else {
                    (self.vx, self.vy)
                };
                Ok(CellState {
                    vx,
                    vy,
                    n: self.n.tick(),
                    ..self
                })
            }
            Logic::L0 => Ok(CellState {
                n: self.n.tick(),
                ..self
            }),
            Logic::X => Err(CellError::InvalidBit),
        }
    }

    /// Normal-mode differential write. The write current through `M2`/`M9`
    /// disturbs `N`, so it is invalidated.
    pub fn write(self, bit: Logic) -> Result<Self, CellError> {
        if !bit.is_known() {
            return Err(CellError::InvalidBit);
        }
        Ok(CellState {
            vx: bit,
            vy: bit.not(),
            n: self.n.invalidate(),
            ..self
        })
    }

    pub fn read(&self) -> Logic {
        self.vx
    }

    pub fn accumulate_stress(self, dt: u64) -> Self {
        match self.vx {
            Logic::L1 => CellState {
                stress1: self.stress1 + dt,
                ..self
            },
            _ => CellState {
                stress0: self.stress0 + dt,
                ..self
            },
        }
    }

    pub fn total_stress(&self) -> u64 {
        self.stress0 + self.stress1
    }

    /// Gate state of `M7` as listed in the XOR node table.
    pub fn m7_on(&self) -> bool {
        self.n.read() == Logic::L1
    }

    /// Applies one phase after checking the line assignment matches `kind`.
    /// Reads leave the state unchanged; use [`CellState::read`] for the value.
    pub fn apply_phase(self, kind: PhaseKind, lines: &PhaseLines) -> Result<Self, CellError> {
        lines.check_kind(kind)?;
        match kind {
            PhaseKind::SampleN => Ok(self.sample_n()),
            PhaseKind::ConditionalReset => self.conditional_reset(lines.dl),
            PhaseKind::ConditionalFlip => self.conditional_flip(lines.dl),
            PhaseKind::Write => {
                let bit = if lines.bl == BitLine::Drive1 {
                    Logic::L1
                } else {
                    Logic::L0
                };
                self.write(bit)
            }
            PhaseKind::Read => Ok(self),
        }
    }

    /// Runs sample, reset and flip with operand `b`.
    pub fn xor_sequence(self, b: Logic) -> Result<Self, CellError> {
        if !b.is_known() {
            return Err(CellError::InvalidBit);
        }
        self.apply_phase(PhaseKind::SampleN, &PhaseLines::sample_n())?
            .apply_phase(
                PhaseKind::ConditionalReset,
                &PhaseLines::conditional_reset(b),
            )?
            .apply_phase(PhaseKind::ConditionalFlip, &PhaseLines::conditional_flip(b))
    }
}
