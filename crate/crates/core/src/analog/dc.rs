//! DC operating points and voltage-transfer curves.

use super::netlist::{bisect_decreasing, Bias, CellNetlist};
use super::params::DeviceParams;
use crate::error::AnalogError;

/// KCL tolerance for every DC solve, amperes.
pub const KCL_TOL: f64 = 1e-12;

pub const MIN_VTC_POINTS: usize = 100;

/// Which storage node is forced; the other one is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptNode {
    /// Force `Vx`, solve `Vy` (the inverter built from M4/M6 plus its access path).
    Vx,
    /// Force `Vy`, solve `Vx` (M3/M5 plus M1 and the XOR port).
    Vy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vtc {
    pub swept: SweptNode,
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    /// Largest |KCL residual| over the sweep.
    pub max_residual: f64,
}

/// Solves the free storage node for one forced input voltage.
pub fn solve_output(
    netlist: &CellNetlist,
    params: &DeviceParams,
    bias: &Bias,
    swept: SweptNode,
    input: f64,
    n_floating: f64,
) -> Result<(f64, f64), AnalogError> {
    let lo = bias.lowest().min(input);
    let hi = bias.highest(params.vdd).max(input);
    let kcl = |v: f64| match swept {
        SweptNode::Vx => netlist.current_vy_dc(params, bias, input, v, n_floating),
        SweptNode::Vy => netlist.current_vx(params, bias, v, input, n_floating),
    };
    let (v, residual) = bisect_decreasing(lo, hi, KCL_TOL * 1e-2, kcl);
    if residual.abs() >= KCL_TOL {
        return Err(AnalogError::NoConvergence {
            input_v: input,
            residual_a: residual,
        });
    }
    Ok((v, residual))
}

/// Sweeps `swept` over `[start, stop]` on `points` evenly spaced values.
pub fn solve_vtc(
    netlist: &CellNetlist,
    params: &DeviceParams,
    bias: &Bias,
    swept: SweptNode,
    range: (f64, f64),
    points: usize,
) -> Result<Vtc, AnalogError> {
    params.validate()?;
    if points < MIN_VTC_POINTS {
        return Err(AnalogError::Invalid(format!(
            "VTC grid needs at least {MIN_VTC_POINTS} points, got {points}"
        )));
    }
    let (start, stop) = range;
    let step = (stop - start) / (points - 1) as f64;
    let mut input = Vec::with_capacity(points);
    let mut output = Vec::with_capacity(points);
    let mut max_residual: f64 = 0.0;
    for i in 0..points {
        let vin = if i == points - 1 {
            stop
        } else {
            start + step * i as f64
        };
        let (vout, r) = solve_output(netlist, params, bias, swept, vin, 0.0)?;
        input.push(vin);
        output.push(vout);
        max_residual = max_residual.max(r.abs());
    }
    Ok(Vtc {
        swept,
        input,
        output,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analog::netlist::Topology;

    fn hold_vtc(topology: Topology, points: usize) -> Vtc {
        let p = DeviceParams::default();
        solve_vtc(
            &CellNetlist::new(topology),
            &p,
            &Bias::hold(p.vdd),
            SweptNode::Vx,
            (0.0, p.vdd),
            points,
        )
        .unwrap()
    }

    #[test]
    fn rails() {
        let p = DeviceParams::default();
        let v = hold_vtc(Topology::Cell9T, 101);
        assert!((v.output[0] - p.vdd).abs() < 1e-9);
        assert!(v.output[100].abs() < 1e-9);
        assert!(v.max_residual < KCL_TOL);
    }

    #[test]
    fn monotone_non_increasing() {
        for topology in [Topology::Cell6T, Topology::Cell9T] {
            let v = hold_vtc(topology, 200);
            assert!(v.output.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
    }

    #[test]
    fn rejects_coarse_grid() {
        let p = DeviceParams::default();
        let err = solve_vtc(
            &CellNetlist::NINE_T,
            &p,
            &Bias::hold(p.vdd),
            SweptNode::Vx,
            (0.0, p.vdd),
            50,
        );
        assert!(err.is_err());
    }

    #[test]
    fn unique_crossing_matches_fine_bisection() {
        // the grid bracket of out == in contains the root found by direct
        // bisection on g(v) = out(v) - v at 10x grid density
        let p = DeviceParams::default();
        let net = CellNetlist::NINE_T;
        let b = Bias::hold(p.vdd);
        let v = hold_vtc(Topology::Cell9T, 200);
        let crossings: Vec<usize> = (0..v.input.len() - 1)
            .filter(|&i| {
                let a = v.output[i] - v.input[i];
                let c = v.output[i + 1] - v.input[i + 1];
                a >= 0.0 && c < 0.0
            })
            .collect();
        assert_eq!(crossings.len(), 1);
        let i = crossings[0];
        let (x0, x1) = (v.input[i], v.input[i + 1]);

        let g = |x: f64| solve_output(&net, &p, &b, SweptNode::Vx, x, 0.0).unwrap().0 - x;
        let fine = 2000;
        let mut lo = 0.0;
        let mut hi = p.vdd;
        for k in 0..fine {
            let a = p.vdd * k as f64 / fine as f64;
            let c = p.vdd * (k + 1) as f64 / fine as f64;
            if g(a) >= 0.0 && g(c) < 0.0 {
                lo = a;
                hi = c;
                break;
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if g(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!(
            x0 - 1e-9 <= lo && lo <= x1 + 1e-9,
            "{lo} outside [{x0}, {x1}]"
        );
    }
}
