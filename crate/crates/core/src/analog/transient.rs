//! Fixed-step RK4 transients of the two XOR steps.

use super::netlist::{Bias, CellNetlist, NodeVoltages};
use super::params::DeviceParams;
use crate::error::AnalogError;

pub const DEFAULT_DT: f64 = 1e-12;
pub const DEFAULT_DURATION: f64 = 200e-12;
/// Step-1 BLR pulse used when none is given.
pub const DEFAULT_BLR_PULSE: f64 = -0.4;
/// Allowed excursion beyond the supply/BLR window before a run is declared unstable.
pub const TRACE_MARGIN_V: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct TransientResult {
    pub time: Vec<f64>,
    pub vx: Vec<f64>,
    pub vy: Vec<f64>,
    pub n: Vec<f64>,
    pub flip_detected: bool,
    pub flip_time: Option<f64>,
}

impl TransientResult {
    pub fn final_state(&self) -> NodeVoltages {
        let last = self.time.len() - 1;
        NodeVoltages {
            vx: self.vx[last],
            vy: self.vy[last],
            n: self.n[last],
        }
    }

    /// CSV with header `time_s,vx_v,vy_v,n_v`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time_s,vx_v,vy_v,n_v\n");
        for i in 0..self.time.len() {
            s.push_str(&format!(
                "{:.6e},{:.6},{:.6},{:.6}\n",
                self.time[i], self.vx[i], self.vy[i], self.n[i]
            ));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientConfig {
    pub duration: f64,
    pub dt: f64,
}

impl Default for TransientConfig {
    fn default() -> Self {
        TransientConfig {
            duration: DEFAULT_DURATION,
            dt: DEFAULT_DT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Falling,
    Rising,
}

fn derivative(net: &CellNetlist, p: &DeviceParams, b: &Bias, v: NodeVoltages) -> NodeVoltages {
    let i = net.currents(p, b, v);
    NodeVoltages {
        vx: i.ix / p.c_vx,
        vy: i.iy / p.c_vy,
        n: i.i_n / p.c_n,
    }
}

fn axpy(v: NodeVoltages, h: f64, d: NodeVoltages) -> NodeVoltages {
    NodeVoltages {
        vx: v.vx + h * d.vx,
        vy: v.vy + h * d.vy,
        n: v.n + h * d.n,
    }
}

fn integrate(
    p: &DeviceParams,
    bias: &Bias,
    start: NodeVoltages,
    cfg: TransientConfig,
    direction: Direction,
) -> Result<TransientResult, AnalogError> {
    p.validate()?;
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(AnalogError::Invalid(format!(
            "dt = {} must be positive",
            cfg.dt
        )));
    }
    if !(cfg.duration >= cfg.dt) {
        return Err(AnalogError::Invalid(format!(
            "duration {} shorter than one step",
            cfg.duration
        )));
    }
    let net = CellNetlist::NINE_T;
    let steps = (cfg.duration / cfg.dt).round() as usize;
    let floor = [bias.blr, 0.0, start.vx, start.vy, start.n]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
        - TRACE_MARGIN_V;
    let ceil = p.vdd + TRACE_MARGIN_V;
    let half = 0.5 * p.vdd;

    let mut out = TransientResult {
        time: Vec::with_capacity(steps + 1),
        vx: Vec::with_capacity(steps + 1),
        vy: Vec::with_capacity(steps + 1),
        n: Vec::with_capacity(steps + 1),
        flip_detected: false,
        flip_time: None,
    };
    let mut v = start;
    let mut crossing = None;
    let h = cfg.dt;
    for step in 0..=steps {
        let t = step as f64 * h;
        for x in [v.vx, v.vy, v.n] {
            if !x.is_finite() || x < floor || x > ceil {
                return Err(AnalogError::StepSize { time_s: t, dt_s: h });
            }
        }
        if let (None, Some(&prev)) = (crossing, out.vx.last()) {
            let crossed = match direction {
                Direction::Falling => prev >= half && v.vx < half,
                Direction::Rising => prev <= half && v.vx > half,
            };
            if crossed {
                let frac = (prev - half) / (prev - v.vx);
                crossing = Some(t - h + frac * h);
            }
        }
        out.time.push(t);
        out.vx.push(v.vx);
        out.vy.push(v.vy);
        out.n.push(v.n);
        if step == steps {
            break;
        }
        let k1 = derivative(&net, p, bias, v);
        let k2 = derivative(&net, p, bias, axpy(v, 0.5 * h, k1));
        let k3 = derivative(&net, p, bias, axpy(v, 0.5 * h, k2));
        let k4 = derivative(&net, p, bias, axpy(v, h, k3));
        v = NodeVoltages {
            vx: v.vx + h / 6.0 * (k1.vx + 2.0 * k2.vx + 2.0 * k3.vx + k4.vx),
            vy: v.vy + h / 6.0 * (k1.vy + 2.0 * k2.vy + 2.0 * k3.vy + k4.vy),
            n: v.n + h / 6.0 * (k1.n + 2.0 * k2.n + 2.0 * k3.n + k4.n),
        };
    }
    let settled = match direction {
        Direction::Falling => v.vx < 0.1 * p.vdd,
        Direction::Rising => v.vx > 0.9 * p.vdd,
    };
    out.flip_detected = crossing.is_some() && settled;
    out.flip_time = if out.flip_detected { crossing } else { None };
    Ok(out)
}

/// Cell state right after the `N` sample of an XOR with operand A = `a`.
pub fn sampled_state(p: &DeviceParams, a: bool) -> NodeVoltages {
    let (vx, vy) = if a { (p.vdd, 0.0) } else { (0.0, p.vdd) };
    NodeVoltages { vx, vy, n: vy }
}

/// Step 1 (conditional reset): word lines low, `DL = dl`, `BLR` at
/// `blr_voltage` when `dl` is set and ground otherwise.
pub fn simulate_step1_transient(
    p: &DeviceParams,
    a: bool,
    blr_voltage: f64,
    dl: bool,
    cfg: TransientConfig,
) -> Result<TransientResult, AnalogError> {
    if blr_voltage > 0.0 {
        return Err(AnalogError::Invalid(format!(
            "step 1 BLR pulse must be <= 0 V, got {blr_voltage}"
        )));
    }
    let bias = Bias {
        dl: if dl { p.vdd } else { 0.0 },
        blr: if dl { blr_voltage } else { 0.0 },
        ..Bias::hold(p.vdd)
    };
    integrate(p, &bias, sampled_state(p, a), cfg, Direction::Falling)
}

/// Step 2 (conditional flip) from a post-step-1 state: `DL` and `BLR` both at
/// vdd when `dl` is set.
pub fn simulate_step2_transient(
    p: &DeviceParams,
    start: NodeVoltages,
    dl: bool,
    cfg: TransientConfig,
) -> Result<TransientResult, AnalogError> {
    let level = if dl { p.vdd } else { 0.0 };
    let bias = Bias {
        dl: level,
        blr: level,
        ..Bias::hold(p.vdd)
    };
    integrate(p, &bias, start, cfg, Direction::Rising)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> TransientConfig {
        TransientConfig::default()
    }

    #[test]
    fn step1_one_one_flips() {
        let p = DeviceParams::default();
        let r = simulate_step1_transient(&p, true, DEFAULT_BLR_PULSE, true, cfg()).unwrap();
        assert!(r.flip_detected);
        assert!(r.final_state().vx < 0.1 * p.vdd);
        assert!(r.flip_time.unwrap() > 0.0);
    }

    #[test]
    fn step1_operand_zero_holds() {
        let p = DeviceParams::default();
        let r = simulate_step1_transient(&p, true, 0.0, false, cfg()).unwrap();
        assert!(!r.flip_detected);
        assert!(r.flip_time.is_none());
        assert!((r.final_state().vx - p.vdd).abs() < 1e-3);
    }

    #[test]
    fn deeper_pulse_flips_faster() {
        let p = DeviceParams::default();
        let t = |v: f64| {
            simulate_step1_transient(&p, true, v, true, cfg())
                .unwrap()
                .flip_time
                .unwrap()
        };
        assert!(t(-0.5) < t(-0.3));
    }

    #[test]
    fn halving_dt_barely_moves_flip_time() {
        let p = DeviceParams::default();
        let coarse = simulate_step1_transient(&p, true, DEFAULT_BLR_PULSE, true, cfg())
            .unwrap()
            .flip_time
            .unwrap();
        let fine = simulate_step1_transient(
            &p,
            true,
            DEFAULT_BLR_PULSE,
            true,
            TransientConfig {
                dt: DEFAULT_DT / 2.0,
                ..cfg()
            },
        )
        .unwrap()
        .flip_time
        .unwrap();
        assert!(((coarse - fine) / fine).abs() < 0.01, "{coarse} {fine}");
    }

    #[test]
    fn step2_cases() {
        let p = DeviceParams::default();
        // A = 0, B = 1
        let s1 = simulate_step1_transient(&p, false, DEFAULT_BLR_PULSE, true, cfg()).unwrap();
        assert!(!s1.flip_detected);
        let s2 = simulate_step2_transient(&p, s1.final_state(), true, cfg()).unwrap();
        assert!(s2.flip_detected);
        assert!(s2.final_state().vx > 0.9 * p.vdd);
        // A = 1, B = 1
        let s1 = simulate_step1_transient(&p, true, DEFAULT_BLR_PULSE, true, cfg()).unwrap();
        let s2 = simulate_step2_transient(&p, s1.final_state(), true, cfg()).unwrap();
        assert!(!s2.flip_detected);
        assert!(s2.final_state().vx < 0.1 * p.vdd);
    }

    #[test]
    fn step2_without_drive_is_identity() {
        let p = DeviceParams::default();
        for a in [false, true] {
            let s1 = simulate_step1_transient(&p, a, 0.0, false, cfg()).unwrap();
            let start = s1.final_state();
            let end = simulate_step2_transient(&p, start, false, cfg())
                .unwrap()
                .final_state();
            assert!((end.vx - start.vx).abs() < 1e-3);
            assert!((end.vy - start.vy).abs() < 1e-3);
            assert!((end.n - start.n).abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = DeviceParams::default();
        assert!(simulate_step1_transient(&p, true, 0.2, true, cfg()).is_err());
        let bad = TransientConfig { dt: 0.0, ..cfg() };
        assert!(simulate_step1_transient(&p, true, -0.4, true, bad).is_err());
    }

    #[test]
    fn huge_step_is_reported() {
        let p = DeviceParams::default();
        let r = simulate_step1_transient(
            &p,
            true,
            -0.6,
            true,
            TransientConfig {
                duration: 200e-12,
                dt: 20e-12,
            },
        );
        assert!(matches!(r, Err(AnalogError::StepSize { .. })));
    }

    #[test]
    fn csv_header() {
        let p = DeviceParams::default();
        let r = simulate_step1_transient(
            &p,
            true,
            0.0,
            false,
            TransientConfig {
                duration: 2e-12,
                dt: 1e-12,
            },
        )
        .unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("time_s,vx_v,vy_v,n_v\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
