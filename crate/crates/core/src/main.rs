use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use inclab::energies::{
    additive_energy, bipartite_additive_energy, line_energy, multiplicative_energy, EnergyKind, EnergyReport, LineSet,
    ScalarSet,
};
use inclab::incidence::{count_incidences_product, enumerate_rich_lines, grid_points, Band, DEFAULT_RICH_POINT_CAP};
use inclab::structure::{elekes_report, structure_report, StructureParams};
use inclab::sweep::{build, run_sweep, Construction, SweepSpec};
use inclab::verify::{run_all, run_criterion, CRITERIA, DEFAULT_SEED};
use inclab::{Configuration, Error, Point, Rational};

#[derive(Parser)]
#[command(name = "inclab", version, about = "Exact incidence, energy and structure computations")]
struct Cli {
    /// worker threads for the parallel counters
    #[arg(long, global = true, env = "INCLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a configuration and write it as JSON
    Gen {
        #[arg(long)]
        construction: Construction,
        #[arg(long)]
        n: u64,
        /// exponent P/Q, family construction only
        #[arg(long)]
        alpha: Option<Rational>,
        #[command(flatten)]
        out: Out,
    },
    /// Per-line incidence counts of a configuration, as CSV
    Inc {
        config: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Energies of a configuration, a line file or a set file, as JSON
    Energy {
        /// configuration file; additive and multiplicative use A, bipartite uses A and B
        config: Option<PathBuf>,
        /// JSON list of {"c", "d"} lines
        #[arg(long, conflicts_with = "config")]
        lines: Option<PathBuf>,
        /// JSON list of rationals
        #[arg(long, conflicts_with_all = ["config", "lines"])]
        set: Option<PathBuf>,
        /// second set for the bipartite energy
        #[arg(long, requires = "set")]
        set_b: Option<PathBuf>,
        /// repeatable; defaults to line for lines and configurations, additive for sets
        #[arg(long)]
        kind: Vec<EnergyKind>,
        #[command(flatten)]
        out: Out,
    },
    /// Lines through at least r points, as CSV
    Rich {
        /// JSON list of {"x", "y"} points, or a configuration (its grid A × B is used)
        points: PathBuf,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Parallel and concurrent family report, as JSON
    Structure {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        min_size: usize,
        /// richness band LO:HI (HI may be empty); defaults to a factor 4 around the median
        #[arg(long)]
        band: Option<Band>,
        /// keep lines with at least P/Q·|A| points of A × A instead of using a band
        #[arg(long, conflicts_with = "band")]
        alpha: Option<Rational>,
        #[command(flatten)]
        out: Out,
    },
    /// Run a sweep spec; rows as CSV, exponent fits as JSON
    Sweep {
        spec: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Run the numbered checks and print a pass/fail table
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Out {
    /// write here instead of stdout
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// run only these criteria
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
}

impl Out {
    fn writer(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> inclab::Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn energy_reports(
    config: Option<&Path>,
    lines: Option<&Path>,
    set: Option<&Path>,
    set_b: Option<&Path>,
    kinds: &[EnergyKind],
) -> inclab::Result<Vec<EnergyReport>> {
    let (a, b, l): (Option<ScalarSet>, Option<ScalarSet>, Option<LineSet>) = match (config, lines, set) {
        (Some(p), _, _) => {
            let cfg: Configuration = read_json(p)?;
            (Some(cfg.a), Some(cfg.b), Some(cfg.lines))
        }
        (_, Some(p), _) => (None, None, Some(read_json(p)?)),
        (_, _, Some(p)) => (Some(read_json(p)?), set_b.map(read_json).transpose()?, None),
        _ => return Err(Error::Input("give a configuration, --lines or --set".into())),
    };
    let default = if l.is_some() { EnergyKind::Line } else { EnergyKind::Additive };
    let kinds = if kinds.is_empty() { vec![default] } else { kinds.to_vec() };
    let missing = |what: &str| Error::Input(format!("no {what} in the input"));
    kinds
        .iter()
        .map(|kind| match kind {
            EnergyKind::Additive => additive_energy(a.as_ref().ok_or_else(|| missing("set"))?),
            EnergyKind::Multiplicative => multiplicative_energy(a.as_ref().ok_or_else(|| missing("set"))?),
            EnergyKind::Bipartite => bipartite_additive_energy(
                a.as_ref().ok_or_else(|| missing("set"))?,
                b.as_ref().ok_or_else(|| missing("second set"))?,
            ),
            EnergyKind::Line => Ok(line_energy(l.as_ref().ok_or_else(|| missing("lines"))?)),
        })
        .collect()
}

fn read_points(path: &Path) -> inclab::Result<Vec<Point>> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(points) = serde_json::from_str::<Vec<Point>>(&text) {
        return Ok(points);
    }
    let cfg: Configuration = serde_json::from_str(&text)?;
    Ok(grid_points(&cfg.a, &cfg.b))
}

fn verify(args: &VerifyArgs) -> inclab::Result<bool> {
    let outcomes = if args.only.is_empty() {
        run_all(args.seed)
    } else {
        let mut v = Vec::new();
        for &id in &args.only {
            v.push(run_criterion(id, args.seed).ok_or_else(|| {
                Error::Input(format!("no criterion {id}; there are {}", CRITERIA.len()))
            })?);
        }
        v
    };
    let mut out = io::stdout().lock();
    for o in &outcomes {
        writeln!(out, "{:>2}  {}  {:<38} {}", o.id, if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail)?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    writeln!(out, "{} passed, {failed} failed", outcomes.len() - failed)?;
    Ok(failed == 0)
}

fn run(cli: Cli) -> inclab::Result<bool> {
    match cli.command {
        Command::Gen { construction, n, alpha, out } => {
            let cfg = build(construction, n, alpha.as_ref())?;
            let mut w = out.writer()?;
            writeln!(w, "{}", cfg.to_json())?;
            w.flush()?;
        }
        Command::Inc { config, out } => {
            let cfg: Configuration = read_json(&config)?;
            let profile = count_incidences_product(&cfg.a, &cfg.b, &cfg.lines);
            let s = profile.summary();
            let mut w = out.writer()?;
            profile.write_csv(&mut w)?;
            w.flush()?;
            let line = format!("total {} min {} max {} median {}", s.total, s.min, s.max, s.median);
            if out.out.is_some() {
                println!("{line}");
            } else {
                eprintln!("{line}");
            }
        }
        Command::Energy { config, lines, set, set_b, kind, out } => {
            let reports =
                energy_reports(config.as_deref(), lines.as_deref(), set.as_deref(), set_b.as_deref(), &kind)?;
            let mut w = out.writer()?;
            match reports.as_slice() {
                [one] => writeln!(w, "{}", one.to_json())?,
                many => writeln!(w, "{}", serde_json::to_string_pretty(many)?)?,
            }
            w.flush()?;
        }
        Command::Rich { points, r, out } => {
            let rich = enumerate_rich_lines(&read_points(&points)?, r, DEFAULT_RICH_POINT_CAP)?;
            let mut w = out.writer()?;
            rich.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Structure { config, min_size, band, alpha, out } => {
            let cfg: Configuration = read_json(&config)?;
            let report = match alpha {
                Some(alpha) => elekes_report(&cfg.a, &cfg.lines, &alpha)?,
                None => structure_report(&cfg, StructureParams { min_size, band })?,
            };
            let mut w = out.writer()?;
            writeln!(w, "{}", report.to_json())?;
            w.flush()?;
        }
        Command::Sweep { spec, out } => {
            let spec: SweepSpec = read_json(&spec)?;
            let result = run_sweep(&spec)?;
            let mut w = out.writer()?;
            result.write_csv(&mut w)?;
            w.flush()?;
            let fits = serde_json::to_string_pretty(&result.fits)?;
            if out.out.is_some() {
                println!("{fits}");
            } else {
                eprintln!("{fits}");
            }
        }
        Command::Verify(args) => return verify(&args),
    }
    Ok(true)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
fn dispatch<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return 2;
        }
    }
    match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(dispatch(std::env::args_os()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use inclab::build_elekes;

    fn path_arg(p: &Path) -> String {
        p.to_str().unwrap().to_string()
    }

    #[test]
    fn gen_then_inc_matches_in_process() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("cfg.json");
        let csv = dir.path().join("inc.csv");
        assert_eq!(dispatch(["inclab", "gen", "--construction", "elekes", "--n", "64", "-o", &path_arg(&cfg)]), 0);
        assert_eq!(dispatch(["inclab", "inc", &path_arg(&cfg), "-o", &path_arg(&csv)]), 0);

        let direct = build_elekes(64).unwrap();
        let mut expected = Vec::new();
        count_incidences_product(&direct.a, &direct.b, &direct.lines).write_csv(&mut expected).unwrap();
        assert_eq!(std::fs::read(&csv).unwrap(), expected);
        assert_eq!(std::fs::read_to_string(&cfg).unwrap().trim_end(), direct.to_json());
        let total: u64 = String::from_utf8(expected)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
            .sum();
        assert_eq!(total, 128);
    }

    #[test]
    fn two_lines_have_energy_six() {
        let dir = tempfile::tempdir().unwrap();
        let lines = dir.path().join("two-lines.json");
        let out = dir.path().join("e.json");
        std::fs::write(&lines, r#"[{"c": "1", "d": "0"}, {"c": "2", "d": "0"}]"#).unwrap();
        assert_eq!(dispatch(["inclab", "energy", "--kind", "line", "--lines", &path_arg(&lines), "-o", &path_arg(&out)]), 0);
        let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(report["value"], "6");
        assert_eq!(report["kind"], "line");
    }

    #[test]
    fn malformed_input_exits_two() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, "{not json").unwrap();
        assert_eq!(dispatch(["inclab", "inc", &path_arg(&bad)]), 2);
        assert_eq!(dispatch(["inclab", "inc", &path_arg(&dir.path().join("missing.json"))]), 2);
        assert_eq!(dispatch(["inclab", "gen", "--construction", "elekes", "--n", "100"]), 2);
        assert_eq!(dispatch(["inclab", "gen", "--construction", "family", "--n", "4096"]), 2);
        assert_eq!(dispatch(["inclab", "gen", "--construction", "family", "--n", "4096", "--alpha", "5/0"]), 2);
        assert_eq!(dispatch(["inclab", "structure", "x.json", "--band", "9"]), 2);
        assert_eq!(dispatch(["inclab", "frobnicate"]), 2);
        assert_eq!(dispatch(["inclab", "verify", "--only", "99"]), 2);
        let horizontal = dir.path().join("flat.json");
        std::fs::write(&horizontal, r#"[{"c": "0", "d": "1"}]"#).unwrap();
        assert_eq!(dispatch(["inclab", "energy", "--lines", &path_arg(&horizontal)]), 2);
    }

    #[test]
    fn verify_exit_codes() {
        assert_eq!(dispatch(["inclab", "verify", "--only", "1,9"]), 0);
    }

    #[test]
    fn sweep_and_structure_write_files() {
        let dir = tempfile::tempdir().unwrap();
        let spec = dir.path().join("spec.json");
        let csv = dir.path().join("sweep.csv");
        std::fs::write(
            &spec,
            r#"{"construction": "family", "alpha": "5/12", "n_values": [4096, 65536, 1048576], "measurements": ["incidences"]}"#,
        )
        .unwrap();
        assert_eq!(dispatch(["inclab", "sweep", &path_arg(&spec), "-o", &path_arg(&csv)]), 0);
        let text = std::fs::read_to_string(&csv).unwrap();
        assert_eq!(text.lines().next(), Some("construction,n,alpha,metric,value"));
        assert_eq!(text.lines().count(), 4);
        assert!(text.contains("family,4096,5/12,incidences,"));

        let cfg = dir.path().join("geo.json");
        let rep = dir.path().join("geo-report.json");
        assert_eq!(dispatch(["inclab", "gen", "--construction", "geometric", "--n", "64", "-o", &path_arg(&cfg)]), 0);
        assert_eq!(dispatch(["inclab", "structure", &path_arg(&cfg), "--alpha", "1/2", "-o", &path_arg(&rep)]), 0);
        let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
        assert_eq!(report["t"], "1");
        assert_eq!(report["e_times_s"], "23969");
        assert_eq!(report["elekes"]["k"], 33);
    }

    #[test]
    fn rich_accepts_points_and_configurations() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("cfg.json");
        let csv = dir.path().join("rich.csv");
        std::fs::write(&cfg, r#"{"name": "grid", "n": 9, "alpha": "1/2", "A": ["0", "1", "2"], "B": ["0", "1", "2"], "lines": []}"#)
            .unwrap();
        assert_eq!(dispatch(["inclab", "rich", &path_arg(&cfg), "--r", "3", "-o", &path_arg(&csv)]), 0);
        assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 9);
    }
}
