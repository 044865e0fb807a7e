//! Command-line surface: argument parsing, dispatch, and exit codes.
//! Exit 0 on success, 1 when a verdict check fails (census mismatch or a
//! false positive), 2 on usage errors.

use std::ffi::OsString;
use std::path::PathBuf;

use asm_galois_core::aut::{AutElement, Subgroup};
use asm_galois_core::galois::{analyze, fiber};
use asm_galois_core::geom::{Hyperplane, Line3};
use clap::{Parser, Subcommand, ValueEnum};

use crate::driver::{self, DriverError, Workspace};
use crate::report;

#[derive(Parser)]
#[command(
    name = "asm-galois",
    version,
    about = "Decide which lines of P^3 are Galois lines for the curve (x^q - x)(y^q - y) = c"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every line of the plane at infinity over F_q
    Classify {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        c: u64,
        /// write the text table here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze one line given by two hyperplanes (packed coefficients)
    CheckLine {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        c: u64,
        /// first hyperplane, e.g. 0,0,1,0 for Z = 0
        #[arg(long)]
        h1: String,
        /// second hyperplane
        #[arg(long)]
        h2: String,
        /// tower level the coefficients live on
        #[arg(long, default_value_t = 1)]
        level: usize,
    },
    /// Compute one projection fiber of a line over a pencil member
    Fiber {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        c: u64,
        /// the line as two hyperplanes separated by ';', e.g. 0,1,0,0;0,0,1,0
        #[arg(long)]
        line: String,
        /// pencil member (lambda, mu) over the base field, e.g. 1,0
        #[arg(long)]
        base: String,
        /// tower level to search for fiber points
        #[arg(long, default_value_t = 1)]
        ext: usize,
    },
    /// Print the automorphism group of the curve
    Aut {
        #[arg(long)]
        q: u64,
        /// list every element instead of just the order and generators
        #[arg(long)]
        table: bool,
    },
    /// Run every check and emit a full report
    Report {
        /// run all sections (the default; kept for explicitness)
        #[arg(long)]
        full: bool,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        c: u64,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// how many negative-control lines to sample
        #[arg(long, default_value_t = 200)]
        negatives: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_packed_list(what: &'static str, s: &str, n: usize) -> Result<Vec<u64>, DriverError> {
    let vals: Result<Vec<u64>, _> = s.split(',').map(|t| t.trim().parse::<u64>()).collect();
    let vals = vals.map_err(|e| DriverError::BadSpec {
        what,
        detail: format!("{:?}: {}", s, e),
    })?;
    if vals.len() != n {
        return Err(DriverError::BadSpec {
            what,
            detail: format!("expected {} comma-separated values, got {}", n, vals.len()),
        });
    }
    Ok(vals)
}

fn parse_hyperplane(
    ws: &Workspace,
    what: &'static str,
    s: &str,
    level: usize,
) -> Result<Hyperplane, DriverError> {
    let vals = parse_packed_list(what, s, 4)?;
    let ctx = ws.params().ctx(level)?.clone();
    let card = ctx.cardinality();
    for &v in &vals {
        if v >= card {
            return Err(DriverError::BadSpec {
                what,
                detail: format!("coefficient {} is not below the field size {}", v, card),
            });
        }
    }
    let coeffs: [_; 4] = std::array::from_fn(|i| ctx.from_packed(vals[i]));
    Ok(Hyperplane::new(coeffs)?)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), DriverError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| DriverError::BadSpec {
            what: "output path",
            detail: e.to_string(),
        }),
        None => {
            print!("{}", content);
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<(), DriverError> {
    match command {
        Command::Classify { q, c, out } => {
            let ws = Workspace::new(q, c)?;
            let census = driver::classify_plane_lines(&ws)?;
            emit(&out, &report::census_text(q, c, &census))
        }
        Command::CheckLine { q, c, h1, h2, level } => {
            let ws = Workspace::new(q, c)?;
            let h1 = parse_hyperplane(&ws, "h1", &h1, level)?;
            let h2 = parse_hyperplane(&ws, "h2", &h2, level)?;
            let line = Line3::from_hyperplanes(&h1, &h2)?;
            let an = analyze(ws.params(), &line)?;
            println!(
                "galois: {}\ndegree: {}\nstabilizer order: {}\ngroup: {}\nclassification: {}",
                if an.is_galois { "yes" } else { "no" },
                an.degree,
                an.stabilizer.order(),
                report::group_type_label(&an.group_type),
                report::classification_label(an.classification),
            );
            Ok(())
        }
        Command::Fiber {
            q,
            c,
            line,
            base,
            ext,
        } => {
            let ws = Workspace::new(q, c)?;
            let (s1, s2) = line.split_once(';').ok_or(DriverError::BadSpec {
                what: "line",
                detail: "expected two hyperplanes separated by ';'".into(),
            })?;
            let h1 = parse_hyperplane(&ws, "line", s1, 1)?;
            let h2 = parse_hyperplane(&ws, "line", s2, 1)?;
            let line = Line3::from_hyperplanes(&h1, &h2)?;
            let member = parse_packed_list("base", &base, 2)?;
            let ctx = ws.params().base_ctx().clone();
            let lambda = ctx.from_packed(member[0]);
            let mu = ctx.from_packed(member[1]);
            let fb = fiber(ws.params(), &line, &lambda, &mu, ext)?;
            println!(
                "degree: {}\nsection multiplicity at level {}: {}\ncomplete: {}",
                fb.degree, ext, fb.section_multiplicity, fb.complete
            );
            for fp in &fb.points {
                println!("  {:?} with ramification index {}", fp.point, fp.ramification_index);
            }
            Ok(())
        }
        Command::Aut { q, table } => {
            let ws = Workspace::new(q, 1)?;
            let ctx = ws.params().base_ctx().clone();
            let group = asm_galois_core::aut::full_group(&ctx);
            println!("order {}", group.order());

            // a multiplicative generator of the scaling torus
            let mult_gen = ctx
                .iter_elements()
                .find(|g| {
                    if g.is_zero() {
                        return false;
                    }
                    let mut pow = g.clone();
                    let mut n = 1u64;
                    while !pow.is_one() {
                        pow = &pow * g;
                        n += 1;
                    }
                    n == ctx.cardinality() - 1
                })
                .expect("every finite field has a primitive element");
            let mut gens = vec![AutElement::new(
                mult_gen.clone(),
                ctx.zero(),
                ctx.zero(),
                false,
            )?];
            // translations need one basis vector per prime-field coordinate
            let alg = ctx.generator();
            for i in 0..ctx.e() {
                let step = alg.pow(i as u128);
                gens.push(AutElement::new(ctx.one(), step.clone(), ctx.zero(), false)?);
                gens.push(AutElement::new(ctx.one(), ctx.zero(), step, false)?);
            }
            gens.push(AutElement::new(ctx.one(), ctx.zero(), ctx.zero(), true)?);
            let span = Subgroup::generate(&gens);
            println!(
                "generators (gamma, a, b, swap), spanning the whole group: {}",
                span.order() == group.order()
            );
            let rows: &[AutElement] = if table { group.elements() } else { &gens };
            println!("gamma  a      b      swap");
            for g in rows {
                println!(
                    "{:<6} {:<6} {:<6} {}",
                    g.gamma().packed(),
                    g.translation_x().packed(),
                    g.translation_y().packed(),
                    g.swaps()
                );
            }
            Ok(())
        }
        Command::Report {
            full: _,
            q,
            c,
            seed,
            format,
            negatives,
            out,
        } => {
            let with_timing = matches!(format, Format::Text);
            let rep = driver::full_report(q, c, seed, negatives, with_timing)?;
            let content = match format {
                Format::Json => report::to_json(&rep)?,
                Format::Csv => report::to_csv(&rep),
                Format::Text => report::to_text(&rep),
            };
            emit(&out, &content)
        }
    }
}

fn exit_code(err: &DriverError) -> i32 {
    match err {
        DriverError::CountMismatch { .. } | DriverError::FalsePositive { .. } => 1,
        DriverError::UnsupportedQ(_) | DriverError::BadConstant(..) | DriverError::BadSpec { .. } => 2,
        _ => 1,
    }
}

pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e);
            exit_code(&e)
        }
    }
}
