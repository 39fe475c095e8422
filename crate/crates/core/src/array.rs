//! R x C array of 9T cells with row-shared word lines, column-shared
//! `DL`/`BLR`/`BL`/`BLB`, and the operand-B registers below each column.

use crate::bitcell::{CellState, Logic, PhaseKind, DEFAULT_N_TTL};
use crate::bits::BitMatrix;
use crate::error::ArrayError;
use crate::sequencer::{
    build_erase_protocol, build_read_protocol, build_toggle_protocol, build_write_protocol,
    build_xor_protocol, Protocol, ProtocolKind,
};

pub const DEFAULT_ROWS: usize = 64;
pub const DEFAULT_COLS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Normal,
    Xor,
}

/// Rows whose word lines are activated for an operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowMask {
    selected: Vec<bool>,
}

impl RowMask {
    pub fn all(rows: usize) -> Self {
        RowMask {
            selected: vec![true; rows],
        }
    }

    pub fn none(rows: usize) -> Self {
        RowMask {
            selected: vec![false; rows],
        }
    }

    pub fn from_rows(rows: usize, indices: &[usize]) -> Result<Self, ArrayError> {
        let mut mask = Self::none(rows);
        for &i in indices {
            if i >= rows {
                return Err(ArrayError::RowOutOfRange { row: i, rows });
            }
            mask.selected[i] = true;
        }
        Ok(mask)
    }

    pub fn from_bools(selected: Vec<bool>) -> Self {
        RowMask { selected }
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn is_selected(&self, row: usize) -> bool {
        self.selected.get(row).copied().unwrap_or(false)
    }

    pub fn count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.selected.len())
            .filter(|&i| self.selected[i])
            .collect()
    }
}

/// Phases and cycles consumed by one protocol execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExecStats {
    pub phases: usize,
    pub cycles: u32,
}

/// Unselected cells on driven columns during an XOR-mode operation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HazardReport {
    pub sites: Vec<(usize, usize)>,
}

impl HazardReport {
    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayState {
    rows: usize,
    cols: usize,
    cells: Vec<CellState>,
    operand_b: Vec<Logic>,
    mode: Mode,
    /// Parity of toggles applied since the last write/erase of the whole array.
    toggle_parity: bool,
    toggle_count: u64,
    phases_executed: u64,
    cycles_executed: u64,
}

impl ArrayState {
    pub fn new(rows: usize, cols: usize) -> Result<Self, ArrayError> {
        Self::with_ttl(rows, cols, DEFAULT_N_TTL)
    }

    pub fn with_ttl(rows: usize, cols: usize, ttl: u32) -> Result<Self, ArrayError> {
        if rows == 0 || cols == 0 {
            return Err(ArrayError::Geometry(format!("{rows}x{cols} array")));
        }
        if ttl == 0 {
            return Err(ArrayError::Geometry("node N ttl must be positive".into()));
        }
        let cell = CellState::init_with_ttl(Logic::L0, ttl).expect("L0 is a valid bit");
        Ok(ArrayState {
            rows,
            cols,
            cells: vec![cell; rows * cols],
            operand_b: vec![Logic::X; cols],
            mode: Mode::Normal,
            toggle_parity: false,
            toggle_count: 0,
            phases_executed: 0,
            cycles_executed: 0,
        })
    }

    /// Array whose stored bits equal `image` (initialisation, not a protocol).
    pub fn from_image(image: &BitMatrix) -> Result<Self, ArrayError> {
        let mut a = Self::new(image.rows(), image.cols())?;
        for r in 0..image.rows() {
            for c in 0..image.cols() {
                a.cells[r * a.cols + c] =
                    CellState::init(Logic::from_bool(image.get(r, c))).expect("known bit");
            }
        }
        Ok(a)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn operand_b(&self) -> &[Logic] {
        &self.operand_b
    }

    pub fn toggle_parity(&self) -> bool {
        self.toggle_parity
    }

    pub fn toggle_count(&self) -> u64 {
        self.toggle_count
    }

    pub fn phases_executed(&self) -> u64 {
        self.phases_executed
    }

    pub fn cycles_executed(&self) -> u64 {
        self.cycles_executed
    }

    pub fn cell(&self, row: usize, col: usize) -> &CellState {
        &self.cells[row * self.cols + col]
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    /// Stored (physical) bits.
    pub fn image(&self) -> BitMatrix {
        BitMatrix::from_fn(self.rows, self.cols, |r, c| self.cell(r, c).vx == Logic::L1)
    }

    fn check_row(&self, row: usize) -> Result<(), ArrayError> {
        if row >= self.rows {
            return Err(ArrayError::RowOutOfRange {
                row,
                rows: self.rows,
            });
        }
        Ok(())
    }

    fn check_mask(&self, mask: &RowMask) -> Result<(), ArrayError> {
        if mask.len() != self.rows {
            return Err(ArrayError::Geometry(format!(
                "mask has {} rows, array has {}",
                mask.len(),
                self.rows
            )));
        }
        if mask.count() == 0 {
            return Err(ArrayError::MaskEmpty);
        }
        Ok(())
    }

    /// Loads the bottom-of-column operand registers.
    pub fn load_operand_b(&mut self, b: &[Logic]) -> Result<(), ArrayError> {
        if b.len() != self.cols {
            return Err(ArrayError::Geometry(format!(
                "operand B has {} entries, array has {} columns",
                b.len(),
                self.cols
            )));
        }
        if b.iter().any(|v| !v.is_known()) {
            return Err(ArrayError::OperandX);
        }
        self.operand_b = b.to_vec();
        Ok(())
    }

    /// Executes `protocol` on the rows in `mask`.
    ///
    /// Each phase reads the pre-phase state of every cell and commits all
    /// post-phase states together. Rows outside the mask keep their word lines
    /// low and are left untouched.
    pub fn execute(
        &mut self,
        protocol: &Protocol,
        mask: &RowMask,
    ) -> Result<ExecStats, ArrayError> {
        self.check_mask(mask)?;
        if protocol.columns() != self.cols {
            return Err(ArrayError::Geometry(format!(
                "protocol drives {} columns, array has {}",
                protocol.columns(),
                self.cols
            )));
        }
        self.mode = match protocol.kind {
            ProtocolKind::Write | ProtocolKind::Read => Mode::Normal,
            _ => Mode::Xor,
        };
        let selected = mask.indices();
        for step in &protocol.phases {
            step.word_lines()?;
            let mut next = self.cells.clone();
            for &r in &selected {
                for (c, lines) in step.columns.iter().enumerate() {
                    let idx = r * self.cols + c;
                    next[idx] =
                        self.cells[idx]
                            .apply_phase(step.kind, lines)
                            .map_err(|source| ArrayError::Cell {
                                row: r,
                                col: c,
                                source,
                            })?;
                }
            }
            self.cells = next;
            self.phases_executed += 1;
        }
        self.cycles_executed += u64::from(protocol.cycle_cost);
        Ok(ExecStats {
            phases: protocol.phase_count(),
            cycles: protocol.cycle_cost,
        })
    }

    /// XORs operand `b` into every selected row; results overwrite operand A.
    pub fn xor_parallel(&mut self, mask: &RowMask, b: &[Logic]) -> Result<ExecStats, ArrayError> {
        self.check_mask(mask)?;
        self.load_operand_b(b)?;
        self.xor_loaded(mask)
    }

    /// XOR with the operand already held in the column registers.
    pub fn xor_loaded(&mut self, mask: &RowMask) -> Result<ExecStats, ArrayError> {
        let protocol = build_xor_protocol(&self.operand_b)?;
        self.execute(&protocol, mask)
    }

    pub fn toggle_all(&mut self) -> Result<ExecStats, ArrayError> {
        let protocol = build_toggle_protocol(self.cols)?;
        let stats = self.execute(&protocol, &RowMask::all(self.rows))?;
        self.toggle_parity = !self.toggle_parity;
        self.toggle_count += 1;
        Ok(stats)
    }

    pub fn erase_all(&mut self) -> Result<ExecStats, ArrayError> {
        let protocol = build_erase_protocol(self.cols)?;
        let stats = self.execute(&protocol, &RowMask::all(self.rows))?;
        self.toggle_parity = false;
        Ok(stats)
    }

    pub fn write_row(&mut self, row: usize, bits: &[Logic]) -> Result<ExecStats, ArrayError> {
        self.check_row(row)?;
        if bits.len() != self.cols {
            return Err(ArrayError::Geometry(format!(
                "row of {} bits, array has {} columns",
                bits.len(),
                self.cols
            )));
        }
        let protocol = build_write_protocol(row, bits)?;
        self.execute(&protocol, &RowMask::from_rows(self.rows, &[row])?)
    }

    pub fn write_row_bools(&mut self, row: usize, bits: &[bool]) -> Result<ExecStats, ArrayError> {
        let logic: Vec<Logic> = bits.iter().map(|&b| Logic::from_bool(b)).collect();
        self.write_row(row, &logic)
    }

    pub fn read_row(&mut self, row: usize) -> Result<Vec<Logic>, ArrayError> {
        self.check_row(row)?;
        let protocol = build_read_protocol(row, self.cols)?;
        self.execute(&protocol, &RowMask::from_rows(self.rows, &[row])?)?;
        debug_assert!(protocol.phases.iter().all(|p| p.kind == PhaseKind::Read));
        Ok((0..self.cols).map(|c| self.cell(row, c).read()).collect())
    }

    pub fn read_row_bools(&mut self, row: usize) -> Result<Vec<bool>, ArrayError> {
        Ok(self
            .read_row(row)?
            .into_iter()
            .map(|l| l == Logic::L1)
            .collect())
    }

    /// Writes every row of `image` in normal mode and clears the toggle parity.
    pub fn load_image(&mut self, image: &BitMatrix) -> Result<(), ArrayError> {
        if image.rows() > self.rows || image.cols() != self.cols {
            return Err(ArrayError::Geometry(format!(
                "{}x{} image into {}x{} array",
                image.rows(),
                image.cols(),
                self.rows,
                self.cols
            )));
        }
        for r in 0..image.rows() {
            self.write_row_bools(r, &image.row(r))?;
        }
        self.toggle_parity = false;
        Ok(())
    }

    /// Adds `dt` of hold time to every cell.
    pub fn hold(&mut self, dt: u64) {
        for cell in &mut self.cells {
            *cell = cell.accumulate_stress(dt);
        }
    }

    /// Unselected rows that share a driven column (`B = 1`, so `DL` high and
    /// `BLR` negative during step 1). The ideal-selectivity model leaves these
    /// cells untouched; the report lists where that assumption is load-bearing.
    pub fn check_disturb_hazards(&self, mask: &RowMask, b: &[Logic]) -> HazardReport {
        let mut sites = Vec::new();
        for r in 0..self.rows {
            if mask.is_selected(r) {
                continue;
            }
            for (c, &bit) in b.iter().enumerate().take(self.cols) {
                if bit == Logic::L1 {
                    sites.push((r, c));
                }
            }
        }
        HazardReport { sites }
    }
}
