//! Device parameters and the flat `key = value` parameter file format.

use std::fmt::Write as _;

use super::device::{MosKind, MosModel};
use crate::error::AnalogError;

/// The nine devices of the 9T cell. The 6T cell uses `M1`..`M6`.
///
/// | device | role                         | gate | channel        |
/// |--------|------------------------------|------|----------------|
/// | M1     | left access                  | WL1  | BL - Vx        |
/// | M2     | right access                 | WL1  | Vy - N (6T: Vy - BLB) |
/// | M3     | pull-down, Vx side           | Vy   | Vx - GND       |
/// | M4     | pull-down, Vy side           | Vx   | Vy - GND       |
/// | M5     | pull-up, Vx side (PMOS)      | Vy   | VDD - Vx       |
/// | M6     | pull-up, Vy side (PMOS)      | Vx   | VDD - Vy       |
/// | M7     | XOR port, upper              | N    | Vx - P         |
/// | M8     | XOR port, lower              | DL   | P - BLR        |
/// | M9     | isolation to BLB             | WL2  | N - BLB        |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transistor {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
    M8,
    M9,
}

impl Transistor {
    pub const ALL: [Transistor; 9] = [
        Transistor::M1,
        Transistor::M2,
        Transistor::M3,
        Transistor::M4,
        Transistor::M5,
        Transistor::M6,
        Transistor::M7,
        Transistor::M8,
        Transistor::M9,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn kind(self) -> MosKind {
        match self {
            Transistor::M5 | Transistor::M6 => MosKind::P,
            _ => MosKind::N,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    pub vdd: f64,
    /// Threshold of the 6T core and M9 NMOS devices.
    pub vt_n: f64,
    /// Threshold magnitude of the PMOS pull-ups.
    pub vt_p: f64,
    /// Threshold of the M7/M8 XOR-port devices.
    pub vt_xor: f64,
    /// Transconductance per unit width, A/V^2.
    pub k_n: f64,
    pub k_p: f64,
    /// Channel-length modulation, 1/V. Zero disables it.
    pub lambda: f64,
    pub widths: [f64; 9],
    /// Per-device threshold offsets (Monte Carlo mismatch), V.
    pub vt_shift: [f64; 9],
    pub c_vx: f64,
    pub c_vy: f64,
    pub c_n: f64,
    pub sigma_vt: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            vdd: 0.8,
            vt_n: 0.3,
            vt_p: 0.3,
            vt_xor: 0.05,
            k_n: 2e-4,
            k_p: 2e-4,
            lambda: 0.0,
            //        M1   M2   M3   M4   M5   M6   M7   M8   M9
            widths: [1.0, 1.0, 2.0, 2.0, 0.5, 0.5, 8.0, 8.0, 6.0],
            vt_shift: [0.0; 9],
            c_vx: 1e-15,
            c_vy: 1e-15,
            c_n: 1e-15,
            sigma_vt: 0.025,
        }
    }
}

const WIDTH_KEYS: [&str; 9] = [
    "w_m1", "w_m2", "w_m3", "w_m4", "w_m5", "w_m6", "w_m7", "w_m8", "w_m9",
];

impl DeviceParams {
    pub fn validate(&self) -> Result<(), AnalogError> {
        let bad = |msg: String| Err(AnalogError::InvalidParams(msg));
        let finite = [
            self.vdd,
            self.vt_n,
            self.vt_p,
            self.vt_xor,
            self.k_n,
            self.k_p,
            self.lambda,
            self.c_vx,
            self.c_vy,
            self.c_n,
            self.sigma_vt,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("non-finite value".into());
        }
        if self.vdd <= 0.0 {
            return bad(format!("vdd = {} must be positive", self.vdd));
        }
        for (name, vt) in [
            ("vt_n", self.vt_n),
            ("vt_p", self.vt_p),
            ("vt_xor", self.vt_xor),
        ] {
            if vt.abs() >= self.vdd {
                return bad(format!("|{name}| = {} must be below vdd", vt.abs()));
            }
        }
        if self.k_n <= 0.0 || self.k_p <= 0.0 {
            return bad("transconductance must be positive".into());
        }
        if self.lambda < 0.0 {
            return bad("lambda must be non-negative".into());
        }
        if let Some(i) = self
            .widths
            .iter()
            .position(|w| !(*w > 0.0 && w.is_finite()))
        {
            return bad(format!("width of M{} must be positive", i + 1));
        }
        if self.c_vx <= 0.0 || self.c_vy <= 0.0 || self.c_n <= 0.0 {
            return bad("node capacitances must be positive".into());
        }
        if self.sigma_vt < 0.0 {
            return bad("sigma_vt must be non-negative".into());
        }
        if self.vt_shift.iter().any(|v| !v.is_finite()) {
            return bad("non-finite threshold shift".into());
        }
        Ok(())
    }

    pub fn model(&self, t: Transistor) -> MosModel {
        let i = t.index();
        let (k, vt) = match t {
            Transistor::M5 | Transistor::M6 => (self.k_p, self.vt_p),
            Transistor::M7 | Transistor::M8 => (self.k_n, self.vt_xor),
            _ => (self.k_n, self.vt_n),
        };
        MosModel {
            kind: t.kind(),
            k: k * self.widths[i],
            vt: vt + self.vt_shift[i],
            lambda: self.lambda,
        }
    }

    pub fn width(&self, t: Transistor) -> f64 {
        self.widths[t.index()]
    }

    pub fn set_width(&mut self, t: Transistor, w: f64) {
        self.widths[t.index()] = w;
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "vdd = {}", self.vdd);
        let _ = writeln!(s, "vt_n = {}", self.vt_n);
        let _ = writeln!(s, "vt_p = {}", self.vt_p);
        let _ = writeln!(s, "vt_xor = {}", self.vt_xor);
        let _ = writeln!(s, "k_n = {:e}", self.k_n);
        let _ = writeln!(s, "k_p = {:e}", self.k_p);
        let _ = writeln!(s, "lambda = {}", self.lambda);
        for (key, w) in WIDTH_KEYS.iter().zip(self.widths) {
            let _ = writeln!(s, "{key} = {w}");
        }
        let _ = writeln!(s, "c_vx = {:e}", self.c_vx);
        let _ = writeln!(s, "c_vy = {:e}", self.c_vy);
        let _ = writeln!(s, "c_n = {:e}", self.c_n);
        let _ = writeln!(s, "sigma_vt = {}", self.sigma_vt);
        s
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<Self, AnalogError> {
        let mut p = DeviceParams::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                AnalogError::InvalidParams(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| {
                AnalogError::InvalidParams(format!(
                    "line {}: '{}' is not a number",
                    lineno + 1,
                    value.trim()
                ))
            })?;
            match key {
                "vdd" => p.vdd = value,
                "vt_n" => p.vt_n = value,
                "vt_p" => p.vt_p = value,
                "vt_xor" => p.vt_xor = value,
                "vt" => {
                    p.vt_n = value;
                    p.vt_p = value;
                }
                "k_n" => p.k_n = value,
                "k_p" => p.k_p = value,
                "k" => {
                    p.k_n = value;
                    p.k_p = value;
                }
                "lambda" => p.lambda = value,
                "c_vx" => p.c_vx = value,
                "c_vy" => p.c_vy = value,
                "c_n" => p.c_n = value,
                "sigma_vt" => p.sigma_vt = value,
                other => match WIDTH_KEYS.iter().position(|k| *k == other) {
                    Some(i) => p.widths[i] = value,
                    None => {
                        return Err(AnalogError::InvalidParams(format!(
                            "line {}: unknown key '{other}'",
                            lineno + 1
                        )))
                    }
                },
            }
        }
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_xor_port_is_strong() {
        let p = DeviceParams::default();
        p.validate().unwrap();
        assert!(p.width(Transistor::M7) > 1.0 && p.width(Transistor::M8) > 1.0);
    }

    #[test]
    fn kv_roundtrip() {
        let mut p = DeviceParams::default();
        p.vdd = 0.9;
        p.set_width(Transistor::M9, 3.5);
        p.c_n = 2.5e-15;
        assert_eq!(DeviceParams::from_kv(&p.to_kv()).unwrap(), p);
    }

    #[test]
    fn kv_errors() {
        assert!(DeviceParams::from_kv("vdd 0.8").is_err());
        assert!(DeviceParams::from_kv("vdd = fast").is_err());
        assert!(DeviceParams::from_kv("bogus = 1").is_err());
        assert!(DeviceParams::from_kv("vt_n = 0.9").is_err());
        assert!(DeviceParams::from_kv("w_m3 = 0").is_err());
        let p = DeviceParams::from_kv("# comment\nvdd = 1.0 # trailing\n\nk = 1e-4\n").unwrap();
        assert_eq!((p.vdd, p.k_n, p.k_p), (1.0, 1e-4, 1e-4));
    }
}
