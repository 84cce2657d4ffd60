//! The `acg` command line.
//!
//! Exit codes: 0 when every check is proved, 1 when some check is unknown
//! (or a benchmark verdict differs from its golden file), 2 on input
//! errors, 3 when the analysis gives up.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};

use crate::content::Mode;
use crate::engine::{analyze, AnalysisError, AnalysisOptions, AnalysisResult, Verdict};
use crate::frontend::{parse_constraint, parse_program, Program};
use crate::oracle::{count_orderings, soundness_enumerate, Limits, OrderingProblem};
use crate::relax::{trans_star, RelaxMode};
use crate::scalar::{Dbm, Interval, ScalarDomain};

pub const EXIT_PROVED: i32 = 0;
pub const EXIT_UNKNOWN: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GAVE_UP: i32 = 3;

/// Name of the expected-verdict file that `bench` compares against.
pub const GOLDEN: &str = "verdicts.golden";

#[derive(Parser, Debug)]
#[command(name = "acg", version, about = "Array content graph analyzer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Analyze one program and report its checks.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = DomainArg::Dbm)]
        domain: DomainArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Naive)]
        mode: ModeArg,
        #[arg(long, default_value_t = 2)]
        widen_delay: usize,
        /// Print the state at the entry of every block.
        #[arg(long)]
        dump_states: bool,
        /// Check the result against exhaustive concrete runs.
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value_t = RelaxArg::Cheap)]
        relax: RelaxArg,
    },
    /// Analyze every `.acg` file of a directory in both modes.
    Bench { dir: PathBuf },
    /// Count the orderings of `init_rand_m`'s segment bounds.
    Orderings {
        m: usize,
        #[arg(long)]
        distinguish_zero: bool,
    },
    /// Resolution closure of a constraint list. Constraints above a `---`
    /// line are the interesting ones.
    RelaxPoly { file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Interval,
    Dbm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Naive,
    Sparse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RelaxArg {
    Exact,
    Cheap,
}

/// Text written to standard output and error, and the exit code.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunReport {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl RunReport {
    fn fail(code: i32, msg: impl std::fmt::Display) -> RunReport {
        RunReport {
            stdout: String::new(),
            stderr: format!("acg: {msg}\n"),
            code,
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run_cli<I, T>(argv: I) -> RunReport
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PROVED };
            let text = e.render().to_string();
            return if e.use_stderr() {
                RunReport {
                    stderr: text,
                    code,
                    ..RunReport::default()
                }
            } else {
                RunReport {
                    stdout: text,
                    code,
                    ..RunReport::default()
                }
            };
        }
    };
    match cli.command {
        Command::Analyze {
            file,
            domain,
            mode,
            widen_delay,
            dump_states,
            oracle,
            relax,
        } => {
            let opts = AnalysisOptions {
                mode: match mode {
                    ModeArg::Naive => Mode::Naive,
                    ModeArg::Sparse => Mode::Sparse,
                },
                relax: match relax {
                    RelaxArg::Exact => RelaxMode::Exact,
                    RelaxArg::Cheap => RelaxMode::Cheap,
                },
                widen_delay,
                ..AnalysisOptions::default()
            };
            let flags = Flags { dump_states, oracle };
            match domain {
                DomainArg::Dbm => cmd_analyze::<Dbm>(&file, &opts, flags),
                DomainArg::Interval => cmd_analyze::<Interval>(&file, &opts, flags),
            }
        }
        Command::Bench { dir } => cmd_bench(&dir),
        Command::Orderings { m, distinguish_zero } => {
            if m == 0 {
                return RunReport::fail(EXIT_INPUT, "m must be at least 1");
            }
            RunReport {
                stdout: format!("{}\n", count_orderings(&OrderingProblem::new(m, distinguish_zero))),
                ..RunReport::default()
            }
        }
        Command::RelaxPoly { file } => cmd_relax_poly(&file),
    }
}

#[derive(Clone, Copy)]
struct Flags {
    dump_states: bool,
    oracle: bool,
}

pub fn load(path: &Path) -> Result<Program, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_program(&src).map_err(|e| format!("{}:{e}", path.display()))
}

fn error_code(e: &AnalysisError) -> i32 {
    match e {
        AnalysisError::BadCheckBound { .. } => EXIT_INPUT,
        AnalysisError::Normalize { .. } | AnalysisError::VisitCap { .. } => EXIT_GAVE_UP,
    }
}

fn secs(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64())
}

/// `CHECK label#n: VERDICT` lines, numbering checks per label from 1.
pub fn check_lines<D: ScalarDomain>(r: &AnalysisResult<D>) -> Vec<String> {
    let mut seen: std::collections::BTreeMap<&str, usize> = Default::default();
    r.checks
        .iter()
        .map(|c| {
            let k = seen.entry(c.check.label.as_str()).or_insert(0);
            *k += 1;
            format!("CHECK {}#{}: {}", c.check.label, k, c.verdict)
        })
        .collect()
}

fn cmd_analyze<D: ScalarDomain>(file: &Path, opts: &AnalysisOptions, flags: Flags) -> RunReport {
    let prog = match load(file) {
        Ok(p) => p,
        Err(e) => return RunReport::fail(EXIT_INPUT, e),
    };
    let start = Instant::now();
    let result = match analyze::<D>(&prog, opts) {
        Ok(r) => r,
        Err(e) => return RunReport::fail(error_code(&e), e),
    };
    let elapsed = start.elapsed();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "OPTIONS domain={} mode={:?} relax={:?} widen-delay={}",
        D::NAME,
        opts.mode,
        opts.relax,
        opts.widen_delay
    );
    for line in check_lines(&result) {
        let _ = writeln!(out, "{line}");
    }
    let st = &result.stats;
    let _ = writeln!(out, "TIME bounds {}", secs(st.bounds_time));
    let _ = writeln!(out, "TIME fixpoint {}", secs(st.fixpoint_time));
    let _ = writeln!(out, "TIME narrowing {}", secs(st.narrowing_time));
    let _ = writeln!(out, "TIME checks {}", secs(st.check_time));
    let _ = writeln!(out, "TIME analyze {}", secs(elapsed));
    if flags.dump_states {
        for b in &prog.blocks {
            if let Some(s) = result.state(&b.label) {
                let _ = writeln!(out, "STATE {}", b.label);
                out.push_str(&s.dump());
            }
        }
    }
    let mut code = if result.all_proved() { EXIT_PROVED } else { EXIT_UNKNOWN };
    if flags.oracle {
        let e = soundness_enumerate(&prog, &result, &Limits::default());
        let _ = writeln!(
            out,
            "ORACLE states={} violations={}{}",
            e.states,
            e.violations.len(),
            if e.partial { " partial" } else { "" }
        );
        for v in e.violations.iter().take(10) {
            let _ = writeln!(out, "VIOLATION {}: {}", v.state, v.reason);
        }
        if !e.violations.is_empty() {
            code = EXIT_GAVE_UP;
        }
    }
    RunReport {
        stdout: out,
        stderr: String::new(),
        code,
    }
}

/// One row of the benchmark table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRow {
    pub name: String,
    pub naive: Result<(Verdict, Duration), String>,
    pub sparse: Result<(Verdict, Duration), String>,
}

fn bench_one(prog: &Program, mode: Mode) -> Result<(Verdict, Duration), String> {
    let opts = AnalysisOptions {
        mode,
        ..AnalysisOptions::default()
    };
    let start = Instant::now();
    let r = analyze::<Dbm>(prog, &opts).map_err(|e| e.to_string())?;
    let v = if r.all_proved() { Verdict::Proved } else { Verdict::Unknown };
    Ok((v, start.elapsed()))
}

/// The `.acg` files of a directory, sorted by name.
pub fn corpus(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let rd = std::fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut files: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "acg"))
        .collect();
    files.sort();
    Ok(files)
}

/// `name naive sparse` lines, skipping blanks and `#` comments.
pub fn read_golden(text: &str) -> Vec<(String, Verdict, Verdict)> {
    let verdict = |s: &str| match s {
        "PROVED" => Some(Verdict::Proved),
        "UNKNOWN" => Some(Verdict::Unknown),
        _ => None,
    };
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .filter_map(|l| {
            let w: Vec<&str> = l.split_whitespace().collect();
            match w[..] {
                [name, a, b] => Some((name.to_string(), verdict(a)?, verdict(b)?)),
                _ => None,
            }
        })
        .collect()
}

fn cmd_bench(dir: &Path) -> RunReport {
    let files = match corpus(dir) {
        Ok(f) if !f.is_empty() => f,
        Ok(_) => return RunReport::fail(EXIT_INPUT, format!("{}: no .acg files", dir.display())),
        Err(e) => return RunReport::fail(EXIT_INPUT, e),
    };
    let mut progs = Vec::new();
    for f in &files {
        match load(f) {
            Ok(p) => progs.push((f.file_stem().unwrap().to_string_lossy().into_owned(), p)),
            Err(e) => return RunReport::fail(EXIT_INPUT, e),
        }
    }
    let rows: Vec<BenchRow> = progs
        .iter()
        .map(|(name, p)| BenchRow {
            name: name.clone(),
            naive: bench_one(p, Mode::Naive),
            sparse: bench_one(p, Mode::Sparse),
        })
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "{:<20} {:>12} {:>12}", "benchmark", "naive", "sparse");
    let cell = |r: &Result<(Verdict, Duration), String>| match r {
        Ok((Verdict::Proved, d)) => format!("{} ", secs(*d)),
        Ok((Verdict::Unknown, d)) => format!("{}†", secs(*d)),
        Err(_) => "error ".into(),
    };
    for r in &rows {
        let _ = writeln!(out, "{:<20} {:>12} {:>12}", r.name, cell(&r.naive), cell(&r.sparse));
    }
    let mut err = String::new();
    let mut code = EXIT_PROVED;
    for r in &rows {
        for (m, res) in [("naive", &r.naive), ("sparse", &r.sparse)] {
            if let Err(e) = res {
                let _ = writeln!(err, "acg: {} ({m}): {e}", r.name);
                code = EXIT_GAVE_UP;
            }
        }
    }
    if let Ok(text) = std::fs::read_to_string(dir.join(GOLDEN)) {
        let mut mismatches = 0;
        for (name, naive, sparse) in read_golden(&text) {
            let Some(r) = rows.iter().find(|r| r.name == name) else {
                let _ = writeln!(err, "acg: golden entry `{name}` has no program");
                mismatches += 1;
                continue;
            };
            let got = |x: &Result<(Verdict, Duration), String>| x.as_ref().ok().map(|(v, _)| *v);
            if got(&r.naive) != Some(naive) || got(&r.sparse) != Some(sparse) {
                let _ = writeln!(err, "acg: {name}: expected {naive}/{sparse}");
                mismatches += 1;
            }
        }
        let _ = writeln!(out, "GOLDEN {}", if mismatches == 0 { "match" } else { "MISMATCH" });
        if mismatches > 0 && code == EXIT_PROVED {
            code = EXIT_UNKNOWN;
        }
    }
    RunReport { stdout: out, stderr: err, code }
}

fn cmd_relax_poly(file: &Path) -> RunReport {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return RunReport::fail(EXIT_INPUT, format!("{}: {e}", file.display())),
    };
    let (mut seeds, mut rest) = (Vec::new(), Vec::new());
    let mut below = false;
    for (n, line) in text.lines().enumerate() {
        let l = line.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if l == "---" {
            below = true;
            continue;
        }
        match parse_constraint(l) {
            Ok(c) if below => rest.push(c),
            Ok(c) => seeds.push(c),
            Err(e) => return RunReport::fail(EXIT_INPUT, format!("{}:{}: {e}", file.display(), n + 1)),
        }
    }
    let mut out = String::new();
    for c in trans_star(&seeds, &rest) {
        let _ = writeln!(out, "{c}");
    }
    RunReport {
        stdout: out,
        stderr: String::new(),
        code: EXIT_PROVED,
    }
}

/// Entry point for the binary: runs with the process arguments, prints, and
/// returns the exit code.
pub fn main_with_args() -> i32 {
    let r = run_cli(std::env::args_os());
    print!("{}", r.stdout);
    let _ = std::io::stdout().flush();
    eprint!("{}", r.stderr);
    r.code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bench_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks")
    }

    fn run(args: &[&str]) -> RunReport {
        run_cli(std::iter::once("acg").chain(args.iter().copied()))
    }

    fn scratch(name: &str, text: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("acg-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn analyze_reports_checks_and_times() {
        let f = bench_dir().join("copy.acg");
        let r = run(&["analyze", f.to_str().unwrap(), "--domain", "dbm", "--mode", "sparse"]);
        assert_eq!(r.code, EXIT_PROVED, "{}", r.stderr);
        let lines: Vec<&str> = r.stdout.lines().collect();
        assert!(lines[0].starts_with("OPTIONS domain=dbm mode=Sparse"));
        assert_eq!(lines[1], "CHECK tail#1: PROVED");
        for phase in ["bounds", "fixpoint", "narrowing", "checks", "analyze"] {
            let l = lines.iter().find(|l| l.starts_with(&format!("TIME {phase} "))).unwrap();
            let t = l.rsplit(' ').next().unwrap();
            assert_eq!(t.split('.').nth(1).map(str::len), Some(3), "{l}");
        }
    }

    #[test]
    fn unknown_and_missing_files() {
        let f = bench_dir().join("first_nonnull.acg");
        let r = run(&["analyze", f.to_str().unwrap(), "--mode", "naive"]);
        assert_eq!(r.code, EXIT_UNKNOWN);
        assert!(r.stdout.contains("UNKNOWN"));
        let r = run(&["analyze", "missing.acg"]);
        assert_eq!(r.code, EXIT_INPUT);
        assert!(r.stderr.starts_with("acg: missing.acg"));
        let bad = scratch("bad.acg", "array A;\nh:\n  oops\n");
        assert_eq!(run(&["analyze", bad.to_str().unwrap()]).code, EXIT_INPUT);
        assert_eq!(run(&["analyze"]).code, EXIT_INPUT);
        assert_eq!(run(&["frobnicate"]).code, EXIT_INPUT);
    }

    #[test]
    fn check_numbering_is_per_label() {
        let f = bench_dir().join("partition_hp08.acg");
        let r = run(&["analyze", f.to_str().unwrap()]);
        let checks: Vec<&str> = r.stdout.lines().filter(|l| l.starts_with("CHECK")).collect();
        assert_eq!(checks, ["CHECK move#1: PROVED", "CHECK done#1: PROVED", "CHECK done#2: PROVED"]);
    }

    #[test]
    fn dump_and_oracle_flags() {
        let f = bench_dir().join("copy.acg");
        let r = run(&["analyze", f.to_str().unwrap(), "--dump-states", "--oracle", "--relax", "exact"]);
        assert_eq!(r.code, EXIT_PROVED, "{}", r.stdout);
        assert!(r.stdout.contains("STATE guard\nφ: "));
        assert!(r.stdout.contains("ORACLE states="));
        assert!(r.stdout.contains(" violations=0"));
    }

    #[test]
    fn bad_check_bound_is_an_input_error() {
        let f = scratch("bound.acg", "array A;\nvar i, x;\nh:\n  x = A[i]\n  end\ncheck h: forall [0, x) of A : a >= 0\n");
        let r = run(&["analyze", f.to_str().unwrap()]);
        assert_eq!(r.code, EXIT_INPUT);
        assert!(r.stderr.contains("not a segment bound"));
    }

    #[test]
    fn orderings_counts() {
        assert_eq!(run(&["orderings", "2"]).stdout, "30\n");
        assert_eq!(run(&["orderings", "2", "--distinguish-zero"]).stdout, "45\n");
        assert_eq!(run(&["orderings", "0"]).code, EXIT_INPUT);
    }

    #[test]
    fn relax_poly_file() {
        let f = scratch(
            "poly.txt",
            "# interesting\nx - y >= 0\n---\ny - z >= 0\nz + w >= 0\n",
        );
        let r = run(&["relax-poly", f.to_str().unwrap()]);
        assert_eq!(r.code, EXIT_PROVED, "{}", r.stderr);
        assert!(r.stdout.lines().any(|l| l.contains('x')));
        let f = scratch("poly_bad.txt", "x >=\n");
        let r = run(&["relax-poly", f.to_str().unwrap()]);
        assert_eq!(r.code, EXIT_INPUT);
        assert!(r.stderr.contains(":1:"));
    }

    #[test]
    fn golden_parsing() {
        let g = read_golden("# c\ncopy PROVED PROVED\n\nx PROVED UNKNOWN # note\nbroken PROVED\n");
        assert_eq!(
            g,
            [
                ("copy".to_string(), Verdict::Proved, Verdict::Proved),
                ("x".to_string(), Verdict::Proved, Verdict::Unknown)
            ]
        );
    }

    #[test]
    fn bench_flags_golden_mismatch() {
        let dir = std::env::temp_dir().join(format!("acg-bench-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::copy(bench_dir().join("copy.acg"), dir.join("copy.acg")).unwrap();
        std::fs::write(dir.join(GOLDEN), "copy PROVED PROVED\n").unwrap();
        let r = run(&["bench", dir.to_str().unwrap()]);
        assert_eq!(r.code, EXIT_PROVED);
        assert!(r.stdout.contains("GOLDEN match"));
        std::fs::write(dir.join(GOLDEN), "copy PROVED UNKNOWN\n").unwrap();
        let r = run(&["bench", dir.to_str().unwrap()]);
        assert_eq!(r.code, EXIT_UNKNOWN);
        assert!(r.stdout.contains("GOLDEN MISMATCH"));
        assert_eq!(run(&["bench", "/nonexistent"]).code, EXIT_INPUT);
    }
}
