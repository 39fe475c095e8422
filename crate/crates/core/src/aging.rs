//! Duty-cycle imprint model.
//!
//! Each cell accumulates hold time on the side it stores (`stress0` while
//! holding 0, `stress1` while holding 1). A cell that never changes value
//! ages one-sidedly; periodic whole-array toggling balances the two sides.
//! The stored data is recovered through the array's toggle-parity bit.

use std::fmt::Write as _;

use crate::array::ArrayState;
use crate::bitcell::CellState;
use crate::bits::BitMatrix;
use crate::error::{AgingError, ArrayError};
use crate::sequencer::build_erase_protocol;

/// `|stress1 - stress0| / (stress1 + stress0)`, or 0 for a cell with no hold time.
pub fn asymmetry(cell: &CellState) -> f64 {
    let total = cell.total_stress();
    if total == 0 {
        return 0.0;
    }
    cell.stress1.abs_diff(cell.stress0) as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImprintReport {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `(stress0, stress1)` per cell.
    pub stress: Vec<(u64, u64)>,
    /// Row-major asymmetry per cell.
    pub asymmetry: Vec<f64>,
    pub max_asymmetry: f64,
    pub mean_asymmetry: f64,
    /// Toggles issued by the schedule.
    pub toggles: u64,
    pub total_time: u64,
}

impl ImprintReport {
    pub fn from_array(a: &ArrayState, toggles: u64, total_time: u64) -> Self {
        let stress: Vec<(u64, u64)> = a.cells().iter().map(|c| (c.stress0, c.stress1)).collect();
        let asym: Vec<f64> = a.cells().iter().map(asymmetry).collect();
        let max_asymmetry = asym.iter().copied().fold(0.0, f64::max);
        let mean_asymmetry = asym.iter().sum::<f64>() / asym.len() as f64;
        ImprintReport {
            rows: a.rows(),
            cols: a.cols(),
            stress,
            asymmetry: asym,
            max_asymmetry,
            mean_asymmetry,
            toggles,
            total_time,
        }
    }

    pub fn cell_asymmetry(&self, row: usize, col: usize) -> f64 {
        self.asymmetry[row * self.cols + col]
    }

    /// CSV `row,col,stress0,stress1,asymmetry`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,col,stress0,stress1,asymmetry\n");
        for r in 0..self.rows {
            for c in 0..self.cols {
                let i = r * self.cols + c;
                let (s0, s1) = self.stress[i];
                let _ = writeln!(s, "{r},{c},{s0},{s1},{:.6}", self.asymmetry[i]);
            }
        }
        s
    }
}

/// Holds the array for `total_time`, toggling every `toggle_period` time
/// units (no toggle at t = 0 or at the end). A trailing partial period is
/// held without a further toggle.
pub fn run_hold_schedule(
    a: &mut ArrayState,
    total_time: u64,
    toggle_period: Option<u64>,
) -> Result<ImprintReport, AgingError> {
    if total_time == 0 {
        return Err(AgingError::Schedule("total time must be positive".into()));
    }
    if toggle_period == Some(0) {
        return Err(AgingError::Schedule(
            "toggle period must be positive".into(),
        ));
    }
    let period = toggle_period.unwrap_or(total_time);
    let mut t = 0;
    let mut toggles = 0;
    while t < total_time {
        let dt = period.min(total_time - t);
        a.hold(dt);
        t += dt;
        if t < total_time {
            a.toggle_all()?;
            toggles += 1;
        }
    }
    Ok(ImprintReport::from_array(a, toggles, total_time))
}

/// Row as originally written: stored bits XOR `inverted`.
pub fn logical_read_with_polarity(
    a: &mut ArrayState,
    row: usize,
    inverted: bool,
) -> Result<Vec<bool>, ArrayError> {
    Ok(a.read_row_bools(row)?
        .into_iter()
        .map(|b| b ^ inverted)
        .collect())
}

/// [`logical_read_with_polarity`] using the array's own toggle parity.
pub fn logical_read(a: &mut ArrayState, row: usize) -> Result<Vec<bool>, ArrayError> {
    let parity = a.toggle_parity();
    logical_read_with_polarity(a, row, parity)
}

/// Logical image of the whole array (non-destructive reads of every row).
pub fn logical_image(a: &mut ArrayState) -> Result<BitMatrix, ArrayError> {
    let rows = (0..a.rows())
        .map(|r| logical_read(a, r))
        .collect::<Result<Vec<_>, _>>()?;
    BitMatrix::from_rows(&rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EraseLatency {
    pub phases: usize,
    pub cycles: u32,
    /// Whether every cell read 0 afterwards.
    pub all_zero: bool,
}

/// Erases the array and reports the cost; the phase count is that of one
/// erase protocol whatever the array size.
pub fn measure_erase(a: &mut ArrayState) -> Result<EraseLatency, ArrayError> {
    let stats = a.erase_all()?;
    debug_assert_eq!(stats.phases, build_erase_protocol(a.cols())?.phase_count());
    let all_zero = (0..a.rows()).all(|r| a.image().row_popcount(r) == 0);
    Ok(EraseLatency {
        phases: stats.phases,
        cycles: stats.cycles,
        all_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pattern(rows: usize, cols: usize, seed: u64) -> BitMatrix {
        BitMatrix::from_fn(rows, cols, |r, c| {
            (seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> ((r * cols + c) % 61)) & 1 == 1
        })
    }

    #[test]
    fn no_toggle_is_fully_imprinted() {
        let mut a = ArrayState::from_image(&pattern(4, 8, 3)).unwrap();
        let rep = run_hold_schedule(&mut a, 1000, None).unwrap();
        assert_eq!(rep.toggles, 0);
        assert!(rep.asymmetry.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn midpoint_toggle_balances() {
        let img = pattern(4, 8, 5);
        let mut a = ArrayState::from_image(&img).unwrap();
        let rep = run_hold_schedule(&mut a, 1000, Some(500)).unwrap();
        assert_eq!(rep.toggles, 1);
        assert_eq!(rep.max_asymmetry, 0.0);
        assert!(a.toggle_parity());
        assert_eq!(logical_image(&mut a).unwrap(), img);
    }

    #[test]
    fn polarity_reads() {
        let img = pattern(2, 8, 9);
        let mut a = ArrayState::from_image(&img).unwrap();
        assert_eq!(
            logical_read_with_polarity(&mut a, 0, false).unwrap(),
            img.row(0)
        );
        a.toggle_all().unwrap();
        let raw = a.read_row_bools(0).unwrap();
        assert_eq!(raw, img.not().row(0));
        assert_eq!(logical_read(&mut a, 0).unwrap(), img.row(0));
        a.toggle_all().unwrap();
        assert_eq!(a.read_row_bools(0).unwrap(), img.row(0));
    }

    #[test]
    fn erase_cost_is_constant() {
        for (r, c) in [(1, 1), (8, 8), (64, 64), (256, 16)] {
            let mut a = ArrayState::from_image(&pattern(r, c, 1)).unwrap();
            let e = measure_erase(&mut a).unwrap();
            assert_eq!(e.phases, 2);
            assert_eq!(e.cycles, 1);
            assert!(e.all_zero);
        }
    }

    #[test]
    fn bad_schedule() {
        let mut a = ArrayState::new(2, 2).unwrap();
        assert!(run_hold_schedule(&mut a, 0, None).is_err());
        assert!(run_hold_schedule(&mut a, 10, Some(0)).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut a = ArrayState::from_image(&pattern(2, 3, 2)).unwrap();
        let csv = run_hold_schedule(&mut a, 10, None).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "row,col,stress0,stress1,asymmetry");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("0,0,"));
    }

    /// Brute-force oracle: walk the piecewise-constant timeline of one cell.
    fn oracle_asymmetry(bit: bool, total: u64, period: u64) -> f64 {
        let (mut s0, mut s1) = (0u64, 0u64);
        let mut v = bit;
        for t in 0..total {
            if t > 0 && t % period == 0 {
                v = !v;
            }
            if v {
                s1 += 1;
            } else {
                s0 += 1;
            }
        }
        s1.abs_diff(s0) as f64 / total as f64
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn asymmetry_bounded_by_period(seed in any::<u64>(), period in 1u64..20, k in 1u64..6, extra in 0u64..19) {
            let total = 2 * k * period + extra % period;
            let img = pattern(3, 5, seed);
            let mut a = ArrayState::from_image(&img).unwrap();
            let rep = run_hold_schedule(&mut a, total, Some(period)).unwrap();
            prop_assert!(rep.max_asymmetry <= period as f64 / total as f64 + 1e-12);
            for r in 0..3 {
                for c in 0..5 {
                    let want = oracle_asymmetry(img.get(r, c), total, period);
                    prop_assert!((rep.cell_asymmetry(r, c) - want).abs() < 1e-12);
                }
            }
            prop_assert_eq!(logical_image(&mut a).unwrap(), img);
        }
    }
}
