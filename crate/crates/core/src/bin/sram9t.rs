use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sram9t::aging::{logical_image, measure_erase, run_hold_schedule};
use sram9t::analog::transient::{DEFAULT_BLR_PULSE, DEFAULT_DT, DEFAULT_DURATION};
use sram9t::analog::{
    compute_snm, compute_wnm, monte_carlo, simulate_step1_transient, simulate_step2_transient,
    CellNetlist, DeviceParams, McExperiment, SnmMode, Topology, TransientConfig,
};
use sram9t::bits::bits_to_string;
use sram9t::error::{AgingError, AnalogError, ArrayError, TraceError, WorkloadError};
use sram9t::trace::{run_program, TraceProgram};
use sram9t::workloads::{bnn_oracle, otp_decrypt, otp_encrypt, xor_oracle, BnnLayer};
use sram9t::{ArrayState, BitMatrix, Logic, RowMask};

#[derive(Parser, Debug)]
#[command(name = "sram9t", version, about = "9T SRAM XOR array simulator")]
struct Cli {
    /// Device parameter file (`key = value` lines).
    #[arg(long, global = true, env = "SRAM9T_PARAMS")]
    params: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Execute a trace file.
    Run { trace: PathBuf },
    /// Parallel XOR on a random array, checked against a software XOR.
    XorDemo {
        #[arg(long, default_value_t = 8)]
        rows: usize,
        #[arg(long, default_value_t = 8)]
        cols: usize,
    },
    /// Binarized dense layer on the array, checked against ±1 arithmetic.
    BnnDemo {
        #[arg(long, default_value_t = 64)]
        rows: usize,
        #[arg(long, default_value_t = 64)]
        cols: usize,
        #[arg(long, default_value_t = 1)]
        layers: usize,
    },
    /// One-time pad over a random message.
    OtpDemo {
        #[arg(long, default_value_t = 1024)]
        bytes: usize,
        #[arg(long, default_value_t = 64)]
        rows: usize,
        #[arg(long, default_value_t = 64)]
        cols: usize,
    },
    /// Static noise margin.
    Snm {
        #[arg(long, value_enum, default_value_t = CellArg::NineT)]
        cell: CellArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Hold)]
        mode: ModeArg,
    },
    /// Write noise margin.
    Wnm {
        #[arg(long, value_enum, default_value_t = CellArg::NineT)]
        cell: CellArg,
    },
    /// Step-1 (conditional reset) transient.
    TransientStep1 {
        #[arg(long, default_value_t = 1)]
        a: u8,
        #[arg(long, default_value_t = 1)]
        b: u8,
        #[arg(long, default_value_t = DEFAULT_BLR_PULSE, allow_hyphen_values = true)]
        blr: f64,
        #[command(flatten)]
        time: TimeArgs,
    },
    /// Step-2 (conditional flip) transient, started from the step-1 end state.
    TransientStep2 {
        #[arg(long, default_value_t = 0)]
        a: u8,
        #[arg(long, default_value_t = 1)]
        b: u8,
        #[arg(long, default_value_t = DEFAULT_BLR_PULSE, allow_hyphen_values = true)]
        blr: f64,
        #[command(flatten)]
        time: TimeArgs,
    },
    /// Monte Carlo threshold mismatch.
    Mc {
        #[arg(long, value_enum, default_value_t = McArg::Step1)]
        experiment: McArg,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Threshold sigma in volts; the parameter file value when omitted.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, value_enum, default_value_t = CellArg::NineT)]
        cell: CellArg,
        #[arg(long, default_value_t = DEFAULT_BLR_PULSE, allow_hyphen_values = true)]
        blr: f64,
        /// Summary CSV path (summary goes to stderr when omitted).
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        time: TimeArgs,
    },
    /// Hold a random array with periodic toggling and report imprint asymmetry.
    Aging {
        #[arg(long, default_value_t = 8)]
        rows: usize,
        #[arg(long, default_value_t = 8)]
        cols: usize,
        #[arg(long, default_value_t = 1000)]
        total_time: u64,
        /// Toggle period; no toggling when omitted.
        #[arg(long)]
        period: Option<u64>,
    },
}

#[derive(clap::Args, Debug, Clone, Copy)]
struct TimeArgs {
    /// Simulated time, picoseconds.
    #[arg(long, default_value_t = DEFAULT_DURATION * 1e12)]
    duration_ps: f64,
    /// RK4 step, picoseconds.
    #[arg(long, default_value_t = DEFAULT_DT * 1e12)]
    dt_ps: f64,
}

impl TimeArgs {
    fn config(self) -> TransientConfig {
        TransientConfig {
            duration: self.duration_ps * 1e-12,
            dt: self.dt_ps * 1e-12,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum CellArg {
    #[value(name = "6t")]
    SixT,
    #[value(name = "9t")]
    NineT,
}

impl CellArg {
    fn topology(self) -> Topology {
        match self {
            CellArg::SixT => Topology::Cell6T,
            CellArg::NineT => Topology::Cell9T,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModeArg {
    Hold,
    Read,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum McArg {
    Step1,
    Step2,
    HoldSnm,
    ReadSnm,
    Wnm,
}

/// Failure classes, one exit code each.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(String),
    Protocol(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Protocol(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m)
            | Failure::Parse(m)
            | Failure::Protocol(m)
            | Failure::Numerical(m) => m,
        }
    }
}

impl From<TraceError> for Failure {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::Parse { .. } => Failure::Parse(e.to_string()),
            TraceError::Protocol { .. } => Failure::Protocol(e.to_string()),
            TraceError::Io { .. } => Failure::Usage(e.to_string()),
        }
    }
}

impl From<ArrayError> for Failure {
    fn from(e: ArrayError) -> Self {
        match e {
            ArrayError::Geometry(_) | ArrayError::RowOutOfRange { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Protocol(e.to_string()),
        }
    }
}

impl From<WorkloadError> for Failure {
    fn from(e: WorkloadError) -> Self {
        match e {
            WorkloadError::Dimension(_) => Failure::Usage(e.to_string()),
            WorkloadError::Array(a) => a.into(),
        }
    }
}

impl From<AgingError> for Failure {
    fn from(e: AgingError) -> Self {
        match e {
            AgingError::Schedule(_) => Failure::Usage(e.to_string()),
            AgingError::Array(a) => a.into(),
        }
    }
}

impl From<AnalogError> for Failure {
    fn from(e: AnalogError) -> Self {
        match e {
            AnalogError::InvalidParams(_) | AnalogError::Invalid(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn load_params(path: Option<&Path>) -> Result<DeviceParams, Failure> {
    match path {
        None => Ok(DeviceParams::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            DeviceParams::from_kv(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(e.to_string())),
    }
}

fn bit(v: u8, name: &str) -> Result<bool, Failure> {
    match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(Failure::Usage(format!("--{name} must be 0 or 1"))),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> BitMatrix {
    BitMatrix::from_fn(rows, cols, |_, _| rng.random())
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random()).collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    let out = cli.out.as_deref();
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    match cli.command {
        Cmd::Run { trace } => {
            let text = std::fs::read_to_string(&trace)
                .map_err(|e| Failure::Usage(format!("{}: {e}", trace.display())))?;
            let program = TraceProgram::parse(&text)?;
            let mut buf = Vec::new();
            run_program(&program, Path::new("."), &mut buf)?;
            emit(out, &String::from_utf8_lossy(&buf))
        }
        Cmd::XorDemo { rows, cols } => {
            let image = random_matrix(&mut rng, rows, cols);
            let b = random_bits(&mut rng, cols);
            let mut sel = random_bits(&mut rng, rows);
            if !sel.iter().any(|&s| s) {
                sel[0] = true;
            }
            let mask = RowMask::from_bools(sel.clone());
            let mut a = ArrayState::from_image(&image)?;
            let logic: Vec<Logic> = b.iter().map(|&x| Logic::from_bool(x)).collect();
            let stats = a.xor_parallel(&mask, &logic)?;
            let expected =
                BitMatrix::from_fn(rows, cols, |r, c| image.get(r, c) ^ (sel[r] && b[c]));
            let result = a.image();
            let mut s = String::new();
            s.push_str(&format!("operand B: {}\n", bits_to_string(&b)));
            s.push_str(&format!("mask: {}\n", bits_to_string(&sel)));
            s.push_str(&format!(
                "phases: {} cycles: {}\n",
                stats.phases, stats.cycles
            ));
            s.push_str("before:\n");
            s.push_str(&image.to_text());
            s.push_str("after:\n");
            s.push_str(&result.to_text());
            s.push_str(&format!("oracle match: {}\n", result == expected));
            emit(out, &s)
        }
        Cmd::BnnDemo { rows, cols, layers } => {
            let mut a = ArrayState::new(rows, cols)?;
            let mut s = String::from("layer,neuron,pre_activation,output\n");
            let mut all_match = true;
            let mut xor_phases = 0;
            for l in 0..layers {
                let w = random_matrix(&mut rng, rows, cols);
                let x = random_bits(&mut rng, cols);
                let layer = BnnLayer::new(w.clone());
                let res = layer.forward(&mut a, &x)?;
                all_match &= res.pre_activations == bnn_oracle(&w, &x);
                xor_phases += res.xor_stats.phases;
                for (n, (&v, &o)) in res.pre_activations.iter().zip(&res.outputs).enumerate() {
                    s.push_str(&format!("{l},{n},{v},{}\n", u8::from(o)));
                }
            }
            emit(out, &s)?;
            println!("xor phases: {xor_phases}");
            println!("oracle match: {all_match}");
            Ok(())
        }
        Cmd::OtpDemo { bytes, rows, cols } => {
            let msg: Vec<u8> = (0..bytes).map(|_| rng.random()).collect();
            let key: Vec<u8> = (0..bytes).map(|_| rng.random()).collect();
            let mut a = ArrayState::new(rows, cols)?;
            let ct = otp_encrypt(&mut a, &msg, &key)?;
            let pt = otp_decrypt(&mut a, &ct, &key)?;
            let hex: String = ct.iter().map(|b| format!("{b:02x}")).collect();
            emit(out, &format!("{hex}\n"))?;
            println!("oracle match: {}", ct == xor_oracle(&msg, &key));
            println!("roundtrip: {}", pt == msg);
            Ok(())
        }
        Cmd::Snm { cell, mode } => {
            let p = load_params(cli.params.as_deref())?;
            let mode = match mode {
                ModeArg::Hold => SnmMode::Hold,
                ModeArg::Read => SnmMode::Read,
            };
            let topo = cell.topology();
            let v = compute_snm(&CellNetlist::new(topo), &p, mode)?;
            emit(
                out,
                &format!(
                    "mode,cell,value_v\n{},{},{:.6}\n",
                    mode.name(),
                    topo.name(),
                    v
                ),
            )
        }
        Cmd::Wnm { cell } => {
            let p = load_params(cli.params.as_deref())?;
            let topo = cell.topology();
            let v = compute_wnm(&CellNetlist::new(topo), &p)?;
            emit(
                out,
                &format!("mode,cell,value_v\nwrite,{},{v:.6}\n", topo.name()),
            )
        }
        Cmd::TransientStep1 { a, b, blr, time } => {
            let p = load_params(cli.params.as_deref())?;
            let r = simulate_step1_transient(&p, bit(a, "a")?, blr, bit(b, "b")?, time.config())?;
            emit(out, &r.to_csv())?;
            report_flip(r.flip_time);
            Ok(())
        }
        Cmd::TransientStep2 { a, b, blr, time } => {
            let p = load_params(cli.params.as_deref())?;
            let (a, b) = (bit(a, "a")?, bit(b, "b")?);
            let s1 = simulate_step1_transient(&p, a, blr, b, time.config())?;
            let r = simulate_step2_transient(&p, s1.final_state(), b, time.config())?;
            emit(out, &r.to_csv())?;
            report_flip(r.flip_time);
            Ok(())
        }
        Cmd::Mc {
            experiment,
            trials,
            sigma,
            cell,
            blr,
            summary,
            time,
        } => {
            let p = load_params(cli.params.as_deref())?;
            let cfg = time.config();
            let topology = cell.topology();
            let exp = match experiment {
                McArg::Step1 => McExperiment::Step1 { blr, cfg },
                McArg::Step2 => McExperiment::Step2 { blr, cfg },
                McArg::HoldSnm => McExperiment::Snm {
                    topology,
                    mode: SnmMode::Hold,
                },
                McArg::ReadSnm => McExperiment::Snm {
                    topology,
                    mode: SnmMode::Read,
                },
                McArg::Wnm => McExperiment::Wnm { topology },
            };
            let sigma = sigma.unwrap_or(p.sigma_vt);
            let mc = monte_carlo(exp, &p, trials, sigma, cli.seed)?;
            emit(out, &mc.trials_csv())?;
            match summary {
                Some(path) => emit(Some(&path), &mc.summary_csv())?,
                None => eprint!("{}", mc.summary_csv()),
            }
            Ok(())
        }
        Cmd::Aging {
            rows,
            cols,
            total_time,
            period,
        } => {
            let image = random_matrix(&mut rng, rows, cols);
            let mut a = ArrayState::from_image(&image)?;
            let rep = run_hold_schedule(&mut a, total_time, period)?;
            let intact = logical_image(&mut a)? == image;
            let erase = measure_erase(&mut a)?;
            emit(out, &rep.to_csv())?;
            println!("toggles: {}", rep.toggles);
            println!("max asymmetry: {:.6}", rep.max_asymmetry);
            println!("mean asymmetry: {:.6}", rep.mean_asymmetry);
            println!("logical data intact: {intact}");
            println!(
                "erase phases: {} all zero: {}",
                erase.phases, erase.all_zero
            );
            Ok(())
        }
    }
}

fn report_flip(t: Option<f64>) {
    match t {
        Some(t) => eprintln!("flip at {:.3} ps", t * 1e12),
        None => eprintln!("no flip"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
