//! The two fixed cell topologies and their nodal current equations.

use super::device::MosModel;
use super::params::{DeviceParams, Transistor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    Cell6T,
    Cell9T,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::Cell6T => "6t",
            Topology::Cell9T => "9t",
        }
    }
}

/// Voltages applied to the cell's control and data lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bias {
    pub wl1: f64,
    pub wl2: f64,
    pub dl: f64,
    pub blr: f64,
    pub bl: f64,
    pub blb: f64,
}

impl Bias {
    /// Word lines off, bit lines precharged, XOR port idle.
    pub fn hold(vdd: f64) -> Self {
        Bias {
            wl1: 0.0,
            wl2: 0.0,
            dl: 0.0,
            blr: 0.0,
            bl: vdd,
            blb: vdd,
        }
    }

    /// Both word lines on, bit lines clamped at vdd.
    pub fn read(vdd: f64) -> Self {
        Bias {
            wl1: vdd,
            wl2: vdd,
            ..Self::hold(vdd)
        }
    }

    pub fn lowest(&self) -> f64 {
        [0.0, self.blr, self.bl, self.blb]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn highest(&self, vdd: f64) -> f64 {
        [vdd, self.blr, self.bl, self.blb]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeVoltages {
    pub vx: f64,
    pub vy: f64,
    pub n: f64,
}

/// Net current flowing into each storage node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCurrents {
    pub ix: f64,
    pub iy: f64,
    pub i_n: f64,
}

/// Bisection on a non-increasing function with `f(lo) >= 0 >= f(hi)`.
/// Returns the root estimate and the residual there.
pub(crate) fn bisect_decreasing(
    mut lo: f64,
    mut hi: f64,
    tol_current: f64,
    f: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let mut best = (lo, f(lo));
    if best.1.abs() <= tol_current {
        return best;
    }
    let f_hi = f(hi);
    if f_hi.abs() < best.1.abs() {
        best = (hi, f_hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm.abs() <= tol_current {
            break;
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best
}

/// Current from terminal `a` to terminal `b` through two devices in series
/// whose shared node has no other connection.
pub(crate) fn series_flow(
    upper: &MosModel,
    upper_gate: f64,
    lower: &MosModel,
    lower_gate: f64,
    a: f64,
    b: f64,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    // current a -> p minus p -> b falls as the shared node p rises
    let kcl = |p: f64| upper.flow(upper_gate, a, p) - lower.flow(lower_gate, p, b);
    let (p, _) = bisect_decreasing(lo, hi, 0.0, kcl);
    0.5 * (upper.flow(upper_gate, a, p) + lower.flow(lower_gate, p, b))
}

/// Hard-coded netlist of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellNetlist {
    pub topology: Topology,
}

impl CellNetlist {
    pub const SIX_T: CellNetlist = CellNetlist {
        topology: Topology::Cell6T,
    };
    pub const NINE_T: CellNetlist = CellNetlist {
        topology: Topology::Cell9T,
    };

    pub fn new(topology: Topology) -> Self {
        CellNetlist { topology }
    }

    pub fn has_node_n(&self) -> bool {
        self.topology == Topology::Cell9T
    }

    /// Current into `Vx`.
    pub fn current_vx(&self, p: &DeviceParams, b: &Bias, vx: f64, vy: f64, n: f64) -> f64 {
        let m1 = p.model(Transistor::M1);
        let m3 = p.model(Transistor::M3);
        let m5 = p.model(Transistor::M5);
        let mut i = m5.flow(vy, p.vdd, vx) - m3.flow(vy, vx, 0.0) + m1.flow(b.wl1, b.bl, vx);
        if self.topology == Topology::Cell9T {
            let m7 = p.model(Transistor::M7);
            let m8 = p.model(Transistor::M8);
            i += series_flow(&m8, b.dl, &m7, n, b.blr, vx);
        }
        i
    }

    /// Current into `Vy` with node `N` at `n` (9T).
    pub fn current_vy(&self, p: &DeviceParams, b: &Bias, vx: f64, vy: f64, n: f64) -> f64 {
        let m2 = p.model(Transistor::M2);
        let m4 = p.model(Transistor::M4);
        let m6 = p.model(Transistor::M6);
        let access_source = match self.topology {
            Topology::Cell6T => b.blb,
            Topology::Cell9T => n,
        };
        m6.flow(vx, p.vdd, vy) - m4.flow(vx, vy, 0.0) + m2.flow(b.wl1, access_source, vy)
    }

    /// Current into `Vy` when `N` is the internal node of the M9/M2 stack
    /// (both word lines asserted).
    pub fn current_vy_series(&self, p: &DeviceParams, b: &Bias, vx: f64, vy: f64) -> f64 {
        match self.topology {
            Topology::Cell6T => self.current_vy(p, b, vx, vy, 0.0),
            Topology::Cell9T => {
                let m2 = p.model(Transistor::M2);
                let m4 = p.model(Transistor::M4);
                let m6 = p.model(Transistor::M6);
                let m9 = p.model(Transistor::M9);
                m6.flow(vx, p.vdd, vy) - m4.flow(vx, vy, 0.0)
                    + series_flow(&m9, b.wl2, &m2, b.wl1, b.blb, vy)
            }
        }
    }

    /// Current into `Vy`, choosing the series form whenever M9 is gated on.
    pub fn current_vy_dc(&self, p: &DeviceParams, b: &Bias, vx: f64, vy: f64, n: f64) -> f64 {
        if self.topology == Topology::Cell9T && b.wl2 > 0.0 {
            self.current_vy_series(p, b, vx, vy)
        } else {
            self.current_vy(p, b, vx, vy, n)
        }
    }

    /// Current into node `N` (zero for the 6T cell).
    pub fn current_n(&self, p: &DeviceParams, b: &Bias, vy: f64, n: f64) -> f64 {
        match self.topology {
            Topology::Cell6T => 0.0,
            Topology::Cell9T => {
                let m2 = p.model(Transistor::M2);
                let m9 = p.model(Transistor::M9);
                m9.flow(b.wl2, b.blb, n) - m2.flow(b.wl1, n, vy)
            }
        }
    }

    pub fn currents(&self, p: &DeviceParams, b: &Bias, v: NodeVoltages) -> NodeCurrents {
        NodeCurrents {
            ix: self.current_vx(p, b, v.vx, v.vy, v.n),
            iy: self.current_vy(p, b, v.vx, v.vy, v.n),
            i_n: self.current_n(p, b, v.vy, v.n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hold_currents_match_between_topologies() {
        let p = DeviceParams::default();
        let b = Bias::hold(p.vdd);
        for i in 0..=20 {
            for j in 0..=20 {
                let vx = p.vdd * i as f64 / 20.0;
                let vy = p.vdd * j as f64 / 20.0;
                let six = CellNetlist::SIX_T;
                let nine = CellNetlist::NINE_T;
                assert_eq!(
                    six.current_vx(&p, &b, vx, vy, 0.0),
                    nine.current_vx(&p, &b, vx, vy, 0.0)
                );
                assert_eq!(
                    six.current_vy_dc(&p, &b, vx, vy, 0.0),
                    nine.current_vy_dc(&p, &b, vx, vy, 0.0)
                );
            }
        }
    }

    #[test]
    fn series_stack_conserves_current() {
        let p = DeviceParams::default();
        let m8 = p.model(Transistor::M8);
        let m7 = p.model(Transistor::M7);
        let i = series_flow(&m8, 0.8, &m7, 0.8, 0.8, 0.1);
        assert!(i > 0.0);
        // weaker than either device alone with the full drop across it
        assert!(i < m7.flow(0.8, 0.8, 0.1));
        assert_eq!(series_flow(&m8, 0.0, &m7, 0.8, 0.0, 0.5), 0.0);
    }

    #[test]
    fn bisection_finds_linear_root() {
        let (x, r) = bisect_decreasing(-1.0, 1.0, 1e-15, |x| 0.25 - x);
        assert!((x - 0.25).abs() < 1e-12);
        assert!(r.abs() <= 1e-12);
    }
}
