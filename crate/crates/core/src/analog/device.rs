//! Long-channel square-law MOSFET.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MosKind {
    N,
    P,
}

/// Square-law parameters of one device instance. `vt` is a magnitude for
/// both polarities; `k` already includes the width multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosModel {
    pub kind: MosKind,
    pub k: f64,
    pub vt: f64,
    pub lambda: f64,
}

/// NMOS drain current for `vds >= 0`.
fn forward_nmos(vgs: f64, vds: f64, k: f64, vt: f64, lambda: f64) -> f64 {
    let vov = vgs - vt;
    if vov <= 0.0 {
        return 0.0;
    }
    let clm = 1.0 + lambda * vds;
    if vds < vov {
        k * (vov * vds - 0.5 * vds * vds) * clm
    } else {
        0.5 * k * vov * vov * clm
    }
}

/// Drain-to-source current for terminal voltages referred to the source.
///
/// Cutoff below threshold, triode for `vds < vgs - vt`, saturation above.
/// Negative `vds` swaps drain and source, and PMOS mirrors NMOS, so the
/// returned sign is always the direction of conventional current from the
/// drain terminal to the source terminal.
pub fn mosfet_current(vgs: f64, vds: f64, model: &MosModel) -> f64 {
    match model.kind {
        MosKind::N => nmos_signed(vgs, vds, model.k, model.vt, model.lambda),
        MosKind::P => -nmos_signed(-vgs, -vds, model.k, model.vt, model.lambda),
    }
}

fn nmos_signed(vgs: f64, vds: f64, k: f64, vt: f64, lambda: f64) -> f64 {
    if vds >= 0.0 {
        forward_nmos(vgs, vds, k, vt, lambda)
    } else {
        // the lower terminal is the real source
        -forward_nmos(vgs - vds, -vds, k, vt, lambda)
    }
}

impl MosModel {
    /// Current flowing through the channel from terminal `a` to terminal `b`.
    pub fn flow(&self, gate: f64, a: f64, b: f64) -> f64 {
        mosfet_current(gate - b, a - b, self)
    }
}
