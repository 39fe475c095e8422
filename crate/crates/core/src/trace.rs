//! Text trace programs: one command per line, space separated, `#` starts a
//! comment.
//!
//! ```text
//! INIT <rows> <cols>
//! LOADROW <row> <bits>      normal-mode write of one row
//! LOADB <bits>              load the column operand registers
//! MASK <rows>|*             e.g. `0,2,5-7`; `*` selects all rows (the default)
//! XOR                       parallel XOR of the loaded operand into masked rows
//! TOGGLE                    invert the whole array
//! ERASE                     clear the whole array
//! READROW <row>             print the stored bits of a row
//! DUMP <path>               write the array image (.hex, .bin, otherwise text)
//! ```

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::array::{ArrayState, RowMask};
use crate::bitcell::Logic;
use crate::bits::{bits_to_string, parse_bit_string};
use crate::error::{ArrayError, TraceError};
use crate::sequencer::{
    build_erase_protocol, build_read_protocol, build_toggle_protocol, build_write_protocol,
    build_xor_protocol, Protocol, ProtocolKind,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaskSpec {
    All,
    Rows(Vec<usize>),
}

impl MaskSpec {
    pub fn to_mask(&self, rows: usize) -> Result<RowMask, ArrayError> {
        match self {
            MaskSpec::All => Ok(RowMask::all(rows)),
            MaskSpec::Rows(r) => RowMask::from_rows(rows, r),
        }
    }

    fn from_mask(mask: &RowMask) -> Self {
        if mask.count() == mask.len() {
            MaskSpec::All
        } else {
            MaskSpec::Rows(mask.indices())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Init { rows: usize, cols: usize },
    LoadRow { row: usize, bits: Vec<bool> },
    LoadB(Vec<bool>),
    Mask(MaskSpec),
    Xor,
    Toggle,
    Erase,
    ReadRow(usize),
    Dump(PathBuf),
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Init { rows, cols } => write!(f, "INIT {rows} {cols}"),
            Command::LoadRow { row, bits } => write!(f, "LOADROW {row} {}", bits_to_string(bits)),
            Command::LoadB(bits) => write!(f, "LOADB {}", bits_to_string(bits)),
            Command::Mask(MaskSpec::All) => f.write_str("MASK *"),
            Command::Mask(MaskSpec::Rows(rows)) => {
                let list: Vec<String> = rows.iter().map(usize::to_string).collect();
                write!(f, "MASK {}", list.join(","))
            }
            Command::Xor => f.write_str("XOR"),
            Command::Toggle => f.write_str("TOGGLE"),
            Command::Erase => f.write_str("ERASE"),
            Command::ReadRow(row) => write!(f, "READROW {row}"),
            Command::Dump(path) => write!(f, "DUMP {}", path.display()),
        }
    }
}

/// Parsed program. `lines[i]` is the 1-based source line of `commands[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceProgram {
    pub rows: usize,
    pub cols: usize,
    pub commands: Vec<Command>,
    pub lines: Vec<usize>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> TraceError {
    TraceError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_usize(tok: &str, what: &str, line: usize) -> Result<usize, TraceError> {
    tok.parse().map_err(|_| {
        parse_err(
            line,
            format!("{what} '{tok}' is not a non-negative integer"),
        )
    })
}

fn parse_bits(tok: &str, cols: usize, line: usize) -> Result<Vec<bool>, TraceError> {
    let bits = parse_bit_string(tok).map_err(|m| parse_err(line, m))?;
    if bits.len() != cols {
        return Err(parse_err(
            line,
            format!(
                "bit string has {} bits, array has {cols} columns",
                bits.len()
            ),
        ));
    }
    Ok(bits)
}

fn parse_mask(tok: &str, rows: usize, line: usize) -> Result<MaskSpec, TraceError> {
    if tok == "*" {
        return Ok(MaskSpec::All);
    }
    let mut out = Vec::new();
    for part in tok.split(',') {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (parse_usize(a, "row", line)?, parse_usize(b, "row", line)?),
            None => {
                let r = parse_usize(part, "row", line)?;
                (r, r)
            }
        };
        if lo > hi {
            return Err(parse_err(line, format!("empty row range '{part}'")));
        }
        if hi >= rows {
            return Err(parse_err(
                line,
                format!("row {hi} out of range for {rows} rows"),
            ));
        }
        out.extend(lo..=hi);
    }
    Ok(MaskSpec::Rows(out))
}

fn expect_args(toks: &[&str], n: usize, line: usize) -> Result<(), TraceError> {
    if toks.len() != n + 1 {
        return Err(parse_err(
            line,
            format!("{} takes {n} argument(s), got {}", toks[0], toks.len() - 1),
        ));
    }
    Ok(())
}

impl TraceProgram {
    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut geometry: Option<(usize, usize)> = None;
        let mut commands = Vec::new();
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = content.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            let keyword = toks[0].to_ascii_uppercase();
            let cmd = match (keyword.as_str(), geometry) {
                ("INIT", None) => {
                    expect_args(&toks, 2, line)?;
                    let rows = parse_usize(toks[1], "rows", line)?;
                    let cols = parse_usize(toks[2], "cols", line)?;
                    if rows == 0 || cols == 0 {
                        return Err(parse_err(line, "array dimensions must be positive"));
                    }
                    geometry = Some((rows, cols));
                    Command::Init { rows, cols }
                }
                ("INIT", Some(_)) => return Err(parse_err(line, "INIT may appear only once")),
                (_, None) => return Err(parse_err(line, "INIT must precede all other commands")),
                ("LOADROW", Some((rows, cols))) => {
                    expect_args(&toks, 2, line)?;
                    let row = parse_usize(toks[1], "row", line)?;
                    if row >= rows {
                        return Err(parse_err(
                            line,
                            format!("row {row} out of range for {rows} rows"),
                        ));
                    }
                    Command::LoadRow {
                        row,
                        bits: parse_bits(toks[2], cols, line)?,
                    }
                }
                ("LOADB", Some((_, cols))) => {
                    expect_args(&toks, 1, line)?;
                    Command::LoadB(parse_bits(toks[1], cols, line)?)
                }
                ("MASK", Some((rows, _))) => {
                    expect_args(&toks, 1, line)?;
                    Command::Mask(parse_mask(toks[1], rows, line)?)
                }
                ("XOR", Some(_)) => {
                    expect_args(&toks, 0, line)?;
                    Command::Xor
                }
                ("TOGGLE", Some(_)) => {
                    expect_args(&toks, 0, line)?;
                    Command::Toggle
                }
                ("ERASE", Some(_)) => {
                    expect_args(&toks, 0, line)?;
                    Command::Erase
                }
                ("READROW", Some((rows, _))) => {
                    expect_args(&toks, 1, line)?;
                    let row = parse_usize(toks[1], "row", line)?;
                    if row >= rows {
                        return Err(parse_err(
                            line,
                            format!("row {row} out of range for {rows} rows"),
                        ));
                    }
                    Command::ReadRow(row)
                }
                ("DUMP", Some(_)) => {
                    expect_args(&toks, 1, line)?;
                    Command::Dump(PathBuf::from(toks[1]))
                }
                (other, Some(_)) => {
                    return Err(parse_err(line, format!("unknown command '{other}'")))
                }
            };
            commands.push(cmd);
            lines.push(line);
        }
        let (rows, cols) = geometry.ok_or_else(|| parse_err(1, "empty trace (missing INIT)"))?;
        Ok(TraceProgram {
            rows,
            cols,
            commands,
            lines,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.commands {
            s.push_str(&c.to_string());
            s.push('\n');
        }
        s
    }

    /// Program that initialises a `rows x cols` array and runs `protocols`.
    pub fn from_protocols(rows: usize, cols: usize, protocols: &[(Protocol, RowMask)]) -> Self {
        let mut commands = vec![Command::Init { rows, cols }];
        for (p, m) in protocols {
            commands.extend(protocol_commands(p, m));
        }
        let lines = (1..=commands.len()).collect();
        TraceProgram {
            rows,
            cols,
            commands,
            lines,
        }
    }

    /// The array protocols the program issues, with the rows each targets.
    pub fn protocols(&self) -> Result<Vec<(Protocol, RowMask)>, TraceError> {
        let mut b: Option<Vec<Logic>> = None;
        let mut mask = MaskSpec::All;
        let mut out = Vec::new();
        for (cmd, &line) in self.commands.iter().zip(&self.lines) {
            let proto = |e: ArrayError| TraceError::Protocol { line, source: e };
            let single = |row: usize| RowMask::from_rows(self.rows, &[row]).map_err(proto);
            match cmd {
                Command::Init { .. } | Command::Dump(_) => {}
                Command::LoadRow { row, bits } => {
                    let bits: Vec<Logic> = bits.iter().map(|&x| Logic::from_bool(x)).collect();
                    out.push((
                        build_write_protocol(*row, &bits).map_err(proto)?,
                        single(*row)?,
                    ));
                }
                Command::LoadB(bits) => {
                    b = Some(bits.iter().map(|&x| Logic::from_bool(x)).collect());
                }
                Command::Mask(m) => mask = m.clone(),
                Command::Xor => {
                    let ops = b.clone().ok_or(TraceError::Protocol {
                        line,
                        source: ArrayError::OperandX,
                    })?;
                    out.push((
                        build_xor_protocol(&ops).map_err(proto)?,
                        mask.to_mask(self.rows).map_err(proto)?,
                    ));
                }
                Command::Toggle => out.push((
                    build_toggle_protocol(self.cols).map_err(proto)?,
                    RowMask::all(self.rows),
                )),
                Command::Erase => out.push((
                    build_erase_protocol(self.cols).map_err(proto)?,
                    RowMask::all(self.rows),
                )),
                Command::ReadRow(row) => out.push((
                    build_read_protocol(*row, self.cols).map_err(proto)?,
                    single(*row)?,
                )),
            }
        }
        Ok(out)
    }
}

/// Trace commands issuing `protocol` on `mask`.
pub fn protocol_commands(protocol: &Protocol, mask: &RowMask) -> Vec<Command> {
    let bools = |v: Vec<Logic>| v.into_iter().map(|l| l == Logic::L1).collect();
    match protocol.kind {
        ProtocolKind::XorTwoStep => vec![
            Command::LoadB(bools(protocol.operand().unwrap_or_default())),
            Command::Mask(MaskSpec::from_mask(mask)),
            Command::Xor,
        ],
        ProtocolKind::Toggle => vec![Command::Toggle],
        ProtocolKind::Erase => vec![Command::Erase],
        ProtocolKind::Write => vec![Command::LoadRow {
            row: protocol.row.unwrap_or(0),
            bits: bools(protocol.written_bits().unwrap_or_default()),
        }],
        ProtocolKind::Read => vec![Command::ReadRow(protocol.row.unwrap_or(0))],
    }
}

/// Writes the array image; the format follows the extension.
pub fn dump_image(a: &ArrayState, path: &Path) -> std::io::Result<()> {
    let image = a.image();
    match path.extension().and_then(|e| e.to_str()) {
        Some("hex") => std::fs::write(path, image.to_hex()),
        Some("bin") => std::fs::write(path, image.to_packed_bytes()),
        _ => std::fs::write(path, image.to_text()),
    }
}

/// Executes `program`, printing READROW results to `out`. Relative DUMP paths
/// are resolved against `base_dir`.
pub fn run_program(
    program: &TraceProgram,
    base_dir: &Path,
    out: &mut dyn Write,
) -> Result<ArrayState, TraceError> {
    let mut a = ArrayState::new(program.rows, program.cols).map_err(|e| TraceError::Protocol {
        line: program.lines.first().copied().unwrap_or(1),
        source: e,
    })?;
    let mut mask = MaskSpec::All;
    for (cmd, &line) in program.commands.iter().zip(&program.lines) {
        let proto = |e: ArrayError| TraceError::Protocol { line, source: e };
        let io = |e: std::io::Error| TraceError::Io { line, source: e };
        match cmd {
            Command::Init { .. } => {}
            Command::LoadRow { row, bits } => {
                a.write_row_bools(*row, bits).map_err(proto)?;
            }
            Command::LoadB(bits) => {
                let b: Vec<Logic> = bits.iter().map(|&x| Logic::from_bool(x)).collect();
                a.load_operand_b(&b).map_err(proto)?;
            }
            Command::Mask(m) => mask = m.clone(),
            Command::Xor => {
                let m = mask.to_mask(a.rows()).map_err(proto)?;
                a.xor_loaded(&m).map_err(proto)?;
            }
            Command::Toggle => {
                a.toggle_all().map_err(proto)?;
            }
            Command::Erase => {
                a.erase_all().map_err(proto)?;
            }
            Command::ReadRow(row) => {
                let bits = a.read_row_bools(*row).map_err(proto)?;
                writeln!(out, "{}", bits_to_string(&bits)).map_err(io)?;
            }
            Command::Dump(path) => {
                let path = if path.is_absolute() {
                    path.clone()
                } else {
                    base_dir.join(path)
                };
                dump_image(&a, &path).map_err(io)?;
            }
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitMatrix;
    use proptest::prelude::*;

    fn run(text: &str) -> Result<(ArrayState, String), TraceError> {
        let prog = TraceProgram::parse(text)?;
        let mut out = Vec::new();
        let a = run_program(&prog, Path::new("."), &mut out)?;
        Ok((a, String::from_utf8(out).unwrap()))
    }

    #[test]
    fn single_cell_xor() {
        let (_, out) = run("INIT 1 1\nLOADROW 0 1\nLOADB 1\nMASK 0\nXOR\nREADROW 0\n").unwrap();
        assert_eq!(out, "0\n");
    }

    #[test]
    fn double_toggle_restores() {
        let (_, out) = run(
            "# demo\nINIT 2 4\nLOADROW 1 1011\nTOGGLE\nREADROW 1\nTOGGLE   # again\nREADROW 1\n",
        )
        .unwrap();
        assert_eq!(out, "0100\n1011\n");
    }

    #[test]
    fn mask_defaults_to_all_rows() {
        let (a, _) = run("INIT 3 2\nLOADROW 0 10\nLOADROW 2 01\nLOADB 11\nXOR\n").unwrap();
        assert_eq!(a.image(), BitMatrix::from_text("01\n11\n10\n").unwrap());
    }

    #[test]
    fn parse_errors_carry_lines() {
        let cases = [
            ("INIT 1 2\nLOADROW 0 1x\n", 2),
            ("INIT 1 2\nLOADROW 0 111\n", 2),
            ("LOADB 1\n", 1),
            ("INIT 2 2\n\nMASK 0-5\n", 3),
            ("INIT 2 2\nFROB\n", 2),
            ("INIT 2 2\nINIT 2 2\n", 2),
            ("INIT 2 2\nREADROW 2\n", 2),
            ("INIT 2 2\nXOR now\n", 2),
            ("INIT 0 2\n", 1),
            ("# nothing\n", 1),
        ];
        for (text, want) in cases {
            match TraceProgram::parse(text) {
                Err(TraceError::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn xor_without_operand_is_a_protocol_error() {
        match run("INIT 1 2\n# B never loaded\nXOR\n") {
            Err(TraceError::Protocol {
                line: 3,
                source: ArrayError::OperandX,
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mask_ranges() {
        let p = TraceProgram::parse("INIT 8 1\nMASK 0,2-4,7\n").unwrap();
        assert_eq!(
            p.commands[1],
            Command::Mask(MaskSpec::Rows(vec![0, 2, 3, 4, 7]))
        );
    }

    #[test]
    fn dump_formats() {
        let dir = tempfile::tempdir().unwrap();
        let prog = TraceProgram::parse(
            "INIT 2 9\nLOADROW 0 100000001\nDUMP a.hex\nDUMP a.bin\nDUMP a.txt\n",
        )
        .unwrap();
        run_program(&prog, dir.path(), &mut Vec::new()).unwrap();
        let hex = std::fs::read_to_string(dir.path().join("a.hex")).unwrap();
        assert_eq!(hex, "8080\n0000\n");
        assert_eq!(
            std::fs::read(dir.path().join("a.bin")).unwrap(),
            vec![0x80, 0x80, 0, 0]
        );
        let txt = std::fs::read_to_string(dir.path().join("a.txt")).unwrap();
        assert_eq!(txt, "100000001\n000000000\n");
    }

    fn arb_protocol(rows: usize, cols: usize) -> impl Strategy<Value = (Protocol, RowMask)> {
        let bits = proptest::collection::vec(any::<bool>(), cols);
        let mask = proptest::collection::vec(any::<bool>(), rows)
            .prop_filter("non-empty", |m| m.iter().any(|&b| b));
        (0u8..5, bits, mask, 0..rows).prop_map(move |(k, bits, sel, row)| {
            let logic: Vec<Logic> = bits.iter().map(|&b| Logic::from_bool(b)).collect();
            let one = RowMask::from_rows(rows, &[row]).unwrap();
            match k {
                0 => (
                    build_xor_protocol(&logic).unwrap(),
                    RowMask::from_bools(sel),
                ),
                1 => (build_toggle_protocol(cols).unwrap(), RowMask::all(rows)),
                2 => (build_erase_protocol(cols).unwrap(), RowMask::all(rows)),
                3 => (build_write_protocol(row, &logic).unwrap(), one),
                _ => (build_read_protocol(row, cols).unwrap(), one),
            }
        })
    }

    proptest! {
        #[test]
        fn protocols_roundtrip_through_text(ps in proptest::collection::vec(arb_protocol(5, 6), 0..12)) {
            let prog = TraceProgram::from_protocols(5, 6, &ps);
            let reparsed = TraceProgram::parse(&prog.to_text()).unwrap();
            prop_assert_eq!(&reparsed, &prog);
            prop_assert_eq!(reparsed.protocols().unwrap(), ps);
        }
    }
}
