use clap::{Parser, Subcommand, ValueEnum};
use mandrel::audit::audit_placement;
use mandrel::dplut::build_dplut;
use mandrel::format::{
    library_hash, parse_dplut, parse_library_with, parse_params, parse_placement, serialize_dplut,
    serialize_library, serialize_placement, serialize_report, verify_table_hash,
};
use mandrel::generate::{generate, GenConfig};
use mandrel::legalize::{legalize, placement_conflicts, LegalizeReport, Mode};
use mandrel::library::{Library, Params};
use mandrel::placement::Placement;
use mandrel::profile::{build_profiles, LibraryProfile};
use mandrel::render::render_svg;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Parameter file applied as defaults under every library read.
const PARAMS_ENV: &str = "MANDREL_PARAMS";

fn write_stdout(args: fmt::Arguments<'_>) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_fmt(args).and_then(|()| out.write_all(b"\n")) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            // The consumer closed the pipe; die the way the signal would
            // have killed us.
            std::process::exit(141);
        }
        eprintln!("error: stdout: {e}");
        std::process::exit(2);
    }
}

macro_rules! outln {
    ($($t:tt)*) => {
        write_stdout(format_args!($($t)*))
    };
}

/// Placement legalization for self-aligned double patterning rows.
#[derive(Parser)]
#[command(name = "mandrel", version, about)]
struct Cli {
    /// Treat library warnings as errors.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print per-cell coloring counts, rail relations, and boundary classes.
    Profile { library: PathBuf },
    /// Build the pairwise solution table and write it to a file.
    Dplut {
        library: PathBuf,
        /// Table output path.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Resolve boundary conflicts in a placement.
    Legalize {
        library: PathBuf,
        placement: PathBuf,
        /// ub spreads rows as far as needed; b keeps row extents fixed.
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Reuse a previously built table instead of rebuilding it.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Report output path.
        #[arg(short, long)]
        out: PathBuf,
        /// Also write the legalized placement.
        #[arg(long)]
        out_placement: Option<PathBuf>,
    },
    /// Draw a colored placement as SVG.
    Render {
        library: PathBuf,
        placement: PathBuf,
        /// SVG output path.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Generate a seeded synthetic library and placement.
    Gen {
        #[arg(long, default_value_t = 1000)]
        cells: usize,
        /// 0 targets about 25 cells per row.
        #[arg(long, default_value_t = 0)]
        rows: usize,
        #[arg(long, default_value_t = 0.7)]
        util: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        lib_cells: usize,
        /// Relative weights for same, diff, and free rail-relation cells.
        #[arg(long, default_value = "1,1,2", value_parser = parse_mix)]
        pg_mix: (u32, u32, u32),
        /// Mix same and diff cells within rows, making them unsolvable.
        #[arg(long)]
        pg_infeasible: bool,
        #[arg(long)]
        out_library: PathBuf,
        #[arg(long)]
        out_placement: PathBuf,
    },
    /// Audit a placement and list every spacing violation.
    Check {
        library: PathBuf,
        placement: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ub,
    B,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Ub => Mode::Ub,
            ModeArg::B => Mode::B,
        }
    }
}

fn parse_mix(s: &str) -> Result<(u32, u32, u32), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [a, b, c] = parts[..] else {
        return Err("expected three comma-separated weights".into());
    };
    let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("{t}: {e}"));
    Ok((parse(a)?, parse(b)?, parse(c)?))
}

struct AppError(String);

impl AppError {
    fn at(path: &Path, e: impl fmt::Display) -> AppError {
        AppError(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn read_file(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| AppError::at(path, e))
}

fn write_file(path: &Path, content: &str) -> Result<(), AppError> {
    fs::write(path, content).map_err(|e| AppError::at(path, e))
}

/// Reads a library, layering parameters as built-in defaults, then the
/// file named by MANDREL_PARAMS, then the library's own directives.
fn load_library(path: &Path, strict: bool) -> Result<Library, AppError> {
    let base = match std::env::var_os(PARAMS_ENV) {
        Some(p) => {
            let ppath = PathBuf::from(p);
            parse_params(&read_file(&ppath)?, Params::default())
                .map_err(|e| AppError::at(&ppath, e))?
        }
        None => Params::default(),
    };
    let (lib, warnings) =
        parse_library_with(&read_file(path)?, strict, base).map_err(|e| AppError::at(path, e))?;
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(lib)
}

fn load_profiled(path: &Path, strict: bool) -> Result<(Library, LibraryProfile), AppError> {
    let lib = load_library(path, strict)?;
    let profile = build_profiles(&lib).map_err(|e| AppError::at(path, e))?;
    Ok((lib, profile))
}

/// Rejects instances the library cannot interpret before any pass that
/// would index colorings by the placement's say-so.
fn validate_placement(
    pl: &Placement,
    profile: &LibraryProfile,
    path: &Path,
) -> Result<(), AppError> {
    for row in &pl.rows {
        for pc in &row.cells {
            let Some(idx) = profile.index_of(&pc.cell) else {
                return Err(AppError(format!(
                    "{}: instance {} uses unknown cell {}",
                    path.display(),
                    pc.instance,
                    pc.cell
                )));
            };
            let count = profile.profiles[idx].colorings.len();
            if let Some(c) = pc.coloring {
                if c >= count {
                    return Err(AppError(format!(
                        "{}: instance {}: coloring {c} out of range ({count} candidates)",
                        path.display(),
                        pc.instance
                    )));
                }
            }
        }
    }
    Ok(())
}

fn load_placement(path: &Path, profile: &LibraryProfile) -> Result<Placement, AppError> {
    let pl = parse_placement(&read_file(path)?).map_err(|e| AppError::at(path, e))?;
    validate_placement(&pl, profile, path)?;
    Ok(pl)
}

fn pct(before: i64, after: i64) -> f64 {
    if before == 0 {
        0.0
    } else {
        (after - before) as f64 / before as f64 * 100.0
    }
}

fn print_summary(r: &LegalizeReport) {
    outln!("mode {}", r.mode);
    outln!("conflicts {} -> {}", r.conflicts_before, r.conflicts_after);
    outln!("flips {} spread {}", r.flips, r.total_spread);
    outln!(
        "area {} -> {} ({:+.2}%)",
        r.area_before,
        r.area_after,
        pct(r.area_before, r.area_after)
    );
    outln!(
        "hpwl {} -> {} ({:+.2}%)",
        r.hpwl_before,
        r.hpwl_after,
        pct(r.hpwl_before, r.hpwl_after)
    );
    if !r.unsolvable_pg_rows.is_empty() {
        let rows: Vec<String> = r.unsolvable_pg_rows.iter().map(|x| x.to_string()).collect();
        outln!("unsolvable pg rows {}", rows.join(" "));
    }
}

fn run(cli: Cli) -> Result<ExitCode, AppError> {
    match cli.command {
        Command::Profile { library } => {
            let (_, profile) = load_profiled(&library, cli.strict)?;
            for p in &profile.profiles {
                outln!(
                    "cell {} colorings {} pg {} abut {} {} clearance {} {}",
                    p.cell.name,
                    p.colorings.len(),
                    p.pg,
                    p.abut_left,
                    p.abut_right,
                    p.s_b_left,
                    p.s_b_right
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Dplut { library, out } => {
            let (lib, profile) = load_profiled(&library, cli.strict)?;
            let start = Instant::now();
            let table = build_dplut(&profile, library_hash(&lib));
            let built = start.elapsed();
            write_file(&out, &serialize_dplut(&table))?;
            outln!("cells {}", table.len());
            outln!("non-empty entries {}", table.non_empty_entries());
            eprintln!("built in {:.2}s", built.as_secs_f64());
            Ok(ExitCode::SUCCESS)
        }
        Command::Legalize {
            library,
            placement,
            mode,
            table,
            out,
            out_placement,
        } => {
            let (lib, profile) = load_profiled(&library, cli.strict)?;
            let table = match table {
                Some(tpath) => {
                    let t =
                        parse_dplut(&read_file(&tpath)?).map_err(|e| AppError::at(&tpath, e))?;
                    verify_table_hash(&t, &lib).map_err(|e| AppError::at(&tpath, e))?;
                    t
                }
                None => build_dplut(&profile, library_hash(&lib)),
            };
            let pl = load_placement(&placement, &profile)?;
            let (legal, report) = legalize(&pl, &profile, &table, mode.into())
                .map_err(|e| AppError::at(&placement, e))?;
            write_file(&out, &serialize_report(&report))?;
            if let Some(path) = out_placement {
                write_file(&path, &serialize_placement(&legal))?;
            }
            print_summary(&report);
            Ok(ExitCode::SUCCESS)
        }
        Command::Render {
            library,
            placement,
            out,
        } => {
            let (_, profile) = load_profiled(&library, cli.strict)?;
            let pl = load_placement(&placement, &profile)?;
            let svg = render_svg(&pl, &profile).map_err(|e| AppError::at(&placement, e))?;
            write_file(&out, &svg)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen {
            cells,
            rows,
            util,
            seed,
            lib_cells,
            pg_mix,
            pg_infeasible,
            out_library,
            out_placement,
        } => {
            let cfg = GenConfig {
                cells,
                rows,
                util,
                seed,
                lib_cells,
                pg_mix,
                pg_infeasible,
            };
            let g = generate(&cfg).map_err(|e| AppError(e.to_string()))?;
            write_file(&out_library, &serialize_library(&g.library))?;
            write_file(&out_placement, &serialize_placement(&g.placement))?;
            let profile = build_profiles(&g.library).map_err(|e| AppError(e.to_string()))?;
            let table = build_dplut(&profile, library_hash(&g.library));
            outln!(
                "conflicts {}",
                placement_conflicts(&g.placement, &profile, &table)
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { library, placement } => {
            let (_, profile) = load_profiled(&library, cli.strict)?;
            let pl = load_placement(&placement, &profile)?;
            let violations = audit_placement(&pl, &profile, profile.s_dp);
            for v in &violations {
                outln!("violation: {v}");
            }
            outln!("violations {}", violations.len());
            Ok(if violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
