//! Monte Carlo threshold-voltage mismatch.
//!
//! Every trial perturbs each device threshold by an independent
//! `Normal(0, sigma_vt)` draw. Trial `i` seeds its own ChaCha stream from
//! `(seed, i)`, so serial and parallel runs agree bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::margins::{compute_snm, compute_wnm, SnmMode};
use super::netlist::{CellNetlist, Topology};
use super::params::DeviceParams;
use super::transient::{simulate_step1_transient, simulate_step2_transient, TransientConfig};
use crate::error::AnalogError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McExperiment {
    /// Step 1 with A = 1, B = 1; success is a flip.
    Step1 {
        blr: f64,
        cfg: TransientConfig,
    },
    /// Step 1 then step 2 with A = 0, B = 1; success is a flip in step 2.
    Step2 {
        blr: f64,
        cfg: TransientConfig,
    },
    Snm {
        topology: Topology,
        mode: SnmMode,
    },
    Wnm {
        topology: Topology,
    },
}

impl McExperiment {
    pub fn name(&self) -> &'static str {
        match self {
            McExperiment::Step1 { .. } => "step1",
            McExperiment::Step2 { .. } => "step2",
            McExperiment::Snm {
                mode: SnmMode::Hold,
                ..
            } => "hold_snm",
            McExperiment::Snm {
                mode: SnmMode::Read,
                ..
            } => "read_snm",
            McExperiment::Wnm { .. } => "wnm",
        }
    }

    /// Runs the experiment once; returns (success, observed value).
    fn run(&self, p: &DeviceParams) -> Result<(bool, Option<f64>), AnalogError> {
        match *self {
            McExperiment::Step1 { blr, cfg } => {
                let r = simulate_step1_transient(p, true, blr, true, cfg)?;
                Ok((r.flip_detected, r.flip_time))
            }
            McExperiment::Step2 { blr, cfg } => {
                let s1 = simulate_step1_transient(p, false, blr, true, cfg)?;
                let r = simulate_step2_transient(p, s1.final_state(), true, cfg)?;
                Ok((r.flip_detected, r.flip_time))
            }
            McExperiment::Snm { topology, mode } => {
                let v = compute_snm(&CellNetlist::new(topology), p, mode)?;
                Ok((v > 0.0, Some(v)))
            }
            McExperiment::Wnm { topology } => match compute_wnm(&CellNetlist::new(topology), p) {
                Ok(v) => Ok((v > 0.0, Some(v))),
                Err(AnalogError::NoFlipDetected) => Ok((false, None)),
                Err(e) => Err(e),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McTrial {
    pub index: usize,
    pub vt_shift: [f64; 9],
    pub success: bool,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub experiment: &'static str,
    pub trials: usize,
    pub successes: usize,
    pub sigma_vt: f64,
    pub seed: u64,
    /// Nearest-rank quantiles of the observed values at
    /// `QUANTILE_LEVELS`; empty when no trial produced a value.
    pub quantiles: Vec<(f64, f64)>,
    pub records: Vec<McTrial>,
}

pub const QUANTILE_LEVELS: [f64; 5] = [0.0, 0.05, 0.5, 0.95, 1.0];

impl McSummary {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Per-trial CSV: `trial,success,value`.
    pub fn trials_csv(&self) -> String {
        let mut s = String::from("trial,success,value\n");
        for t in &self.records {
            let value = t.value.map_or(String::from("nan"), |v| format!("{v:.6e}"));
            s.push_str(&format!("{},{},{}\n", t.index, u8::from(t.success), value));
        }
        s
    }

    /// Summary CSV: `stat,value`.
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("stat,value\n");
        s.push_str(&format!("experiment,{}\n", self.experiment));
        s.push_str(&format!("trials,{}\n", self.trials));
        s.push_str(&format!("sigma_vt,{}\n", self.sigma_vt));
        s.push_str(&format!("seed,{}\n", self.seed));
        s.push_str(&format!("successes,{}\n", self.successes));
        s.push_str(&format!("success_rate,{:.6}\n", self.success_rate()));
        for (q, v) in &self.quantiles {
            s.push_str(&format!("q{:02},{:.6e}\n", (q * 100.0).round() as u32, v));
        }
        s
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Threshold offsets for trial `index`.
pub fn trial_shifts(seed: u64, index: usize, sigma_vt: f64) -> [f64; 9] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let normal = Normal::new(0.0, sigma_vt).expect("sigma_vt validated non-negative");
    let mut shifts = [0.0; 9];
    for s in &mut shifts {
        *s = normal.sample(&mut rng);
    }
    shifts
}

pub fn monte_carlo(
    experiment: McExperiment,
    base: &DeviceParams,
    trials: usize,
    sigma_vt: f64,
    seed: u64,
) -> Result<McSummary, AnalogError> {
    base.validate()?;
    if trials == 0 {
        return Err(AnalogError::Invalid(
            "monte carlo needs at least one trial".into(),
        ));
    }
    if !(sigma_vt >= 0.0 && sigma_vt.is_finite()) {
        return Err(AnalogError::Invalid(format!("sigma_vt = {sigma_vt}")));
    }
    let records = (0..trials)
        .into_par_iter()
        .map(|index| {
            let vt_shift = trial_shifts(seed, index, sigma_vt);
            let mut p = base.clone();
            for (dst, s) in p.vt_shift.iter_mut().zip(vt_shift) {
                *dst += s;
            }
            let (success, value) = experiment.run(&p)?;
            Ok(McTrial {
                index,
                vt_shift,
                success,
                value,
            })
        })
        .collect::<Result<Vec<_>, AnalogError>>()?;

    let successes = records.iter().filter(|t| t.success).count();
    let mut values: Vec<f64> = records.iter().filter_map(|t| t.value).collect();
    values.sort_by(f64::total_cmp);
    let quantiles = if values.is_empty() {
        Vec::new()
    } else {
        QUANTILE_LEVELS
            .iter()
            .map(|&q| (q, quantile(&values, q)))
            .collect()
    };
    Ok(McSummary {
        experiment: experiment.name(),
        trials,
        successes,
        sigma_vt,
        seed,
        quantiles,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analog::transient::DEFAULT_BLR_PULSE;

    fn step1() -> McExperiment {
        McExperiment::Step1 {
            blr: DEFAULT_BLR_PULSE,
            cfg: TransientConfig::default(),
        }
    }

    #[test]
    fn zero_sigma_reproduces_nominal() {
        let p = DeviceParams::default();
        let nominal = simulate_step1_transient(
            &p,
            true,
            DEFAULT_BLR_PULSE,
            true,
            TransientConfig::default(),
        )
        .unwrap()
        .flip_time;
        let mc = monte_carlo(step1(), &p, 8, 0.0, 1).unwrap();
        assert_eq!(mc.successes, 8);
        assert!(mc.records.iter().all(|t| t.value == nominal));
    }

    #[test]
    fn same_seed_same_summary() {
        let p = DeviceParams::default();
        let a = monte_carlo(step1(), &p, 20, 0.025, 7).unwrap();
        let b = monte_carlo(step1(), &p, 20, 0.025, 7).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo(step1(), &p, 20, 0.025, 8).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn shifts_depend_only_on_seed_and_index() {
        assert_eq!(trial_shifts(3, 5, 0.02), trial_shifts(3, 5, 0.02));
        assert_ne!(trial_shifts(3, 5, 0.02), trial_shifts(3, 6, 0.02));
    }

    #[test]
    fn shift_statistics() {
        let n = 4000;
        let all: Vec<f64> = (0..n).flat_map(|i| trial_shifts(11, i, 0.025)).collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        let var = all.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / all.len() as f64;
        assert!(mean.abs() < 1e-3);
        assert!((var.sqrt() - 0.025).abs() < 1e-3);
    }

    #[test]
    fn quantiles_nearest_rank() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.5), 2.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(monte_carlo(step1(), &DeviceParams::default(), 0, 0.0, 0).is_err());
    }
}
