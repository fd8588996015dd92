//! Command-line front end. Every command reads and writes canonical JSON.
//!
//! Exit codes: `0` success, `1` a verification failed (the report with its
//! witnesses is printed), `2` the input could not be used.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::amorphic::{
    aut_group, construct, generalized_affine_constants, is_amorphic, latin_params, recover_spec,
    table_region, DegreeSpec,
};
use crate::calgebra::{
    table_check, verify_associativity, verify_axioms, CAlgebra, CheckResult, VerificationReport,
};
use crate::duality::{characters, dual_algebra, verify_selfduality};
use crate::error::{Error, Result};
use crate::fusion::{fission, fuse, fuse_all, Fusion, Partition, DEFAULT_FUSE_CAP};
use crate::qfield::{parse_rational, Rational};
use crate::realization::{build_plane, matrix_algebra, AffinePlane};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "amorphic",
    version,
    about = "Amorphic C-algebras in exact arithmetic"
)]
pub struct Cli {
    /// Worker threads for parallel checks (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Algebra JSON file, or `-` for stdin.
    #[arg(long = "in", value_name = "FILE")]
    pub input: String,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the result here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the amorphic algebra of a degree spec.
    Build {
        /// Inline JSON `{"D": [...], "epsilon": ±1}`, a file, or `-`.
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        out: Output,
    },
    /// Build the generalized affine algebra for a square `n`.
    BuildGenaffine {
        #[arg(long)]
        n: String,
        #[arg(long, allow_hyphen_values = true)]
        eps: i8,
        #[command(flatten)]
        out: Output,
    },
    /// Realize the affine algebra of a plane by matrix arithmetic.
    Realize {
        #[arg(long, conflicts_with = "plane", required_unless_present = "plane")]
        q: Option<u64>,
        /// Incidence file `{"q": .., "lines": [[..]]}`.
        #[arg(long)]
        plane: Option<String>,
        /// Also write the plane's incidence file.
        #[arg(long)]
        plane_out: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Check the axioms and associativity, optionally more.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        amorphic: bool,
        #[arg(long)]
        table: bool,
    },
    /// Fuse along a partition.
    Fuse {
        #[command(flatten)]
        input: Input,
        /// `{"classes": [[..], ..]}` inline, a file, or `-`.
        #[arg(long)]
        partition: String,
        #[command(flatten)]
        out: Output,
    },
    /// Fuse along every partition that keeps the identity alone.
    FuseAll {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_FUSE_CAP)]
        cap: usize,
    },
    /// Find a homogeneous parent that fuses back to the input.
    Fission {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        d: String,
        #[arg(long)]
        parent_out: Option<PathBuf>,
        #[arg(long)]
        partition_out: Option<PathBuf>,
    },
    /// Automorphism group, with random elements checked exactly.
    Aut {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Table-algebra region membership for `A_eps(nu, d)`.
    TableRegion {
        #[arg(long)]
        nu: usize,
        #[arg(long, allow_hyphen_values = true)]
        eps: i8,
        #[arg(long)]
        d: String,
    },
    /// Recover the degree multiset and sign.
    Recover {
        #[command(flatten)]
        input: Input,
    },
    /// Latin-square parameters.
    Latin {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        require_square: bool,
    },
    /// Character table (eigenmatrices P and Q).
    Characters {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Dual algebra on the characters.
    Dual {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Self-duality checks for a homogeneous amorphic table algebra.
    Selfdual {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Outcome {
    Done(Value),
    Failed(Value),
}

fn read_source(src: &str) -> Result<String> {
    if src == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else if src.trim_start().starts_with('{') {
        Ok(src.to_string())
    } else {
        Ok(std::fs::read_to_string(src)?)
    }
}

fn load_algebra(input: &Input) -> Result<CAlgebra> {
    CAlgebra::from_json(&read_source(&input.input)?)
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{}", crate::canonical_json(v))?;
    Ok(())
}

fn emit(v: Value, out: &Output) -> Result<Outcome> {
    match &out.out {
        Some(path) => {
            write_json(path, &v)?;
            Ok(Outcome::Done(
                json!({ "written": path.display().to_string() }),
            ))
        }
        None => Ok(Outcome::Done(v)),
    }
}

fn report(r: VerificationReport) -> Outcome {
    let passed = r.passed();
    let v = json!({ "passed": passed, "checks": r.checks });
    if passed {
        Outcome::Done(v)
    } else {
        Outcome::Failed(v)
    }
}

fn parse_d(s: &str) -> Result<Rational> {
    Ok(parse_rational(s)?)
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Qfield(_) => "field",
        Error::Malformed(_) => "malformed",
        Error::AxiomViolated { .. } => "axiom",
        Error::InvalidSpec(_) => "invalid-spec",
        Error::Trivial(_) => "trivial",
        Error::NotAmorphic(_) => "not-amorphic",
        Error::BadEpsilon(_) => "bad-epsilon",
        Error::InvalidPartition(_) => "invalid-partition",
        Error::StarNotPreserved(_) => "star-not-preserved",
        Error::Precondition(_) => "precondition",
        Error::CapExceeded { .. } => "cap-exceeded",
        Error::Plane(_) => "plane",
        Error::NotInSpan(_) => "not-in-span",
        Error::Characters(_) => "characters",
        Error::Json(_) => "json",
        Error::Io(_) => "io",
    }
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Build { spec, out } => {
            let spec: DegreeSpec = serde_json::from_str(&read_source(&spec)?)?;
            emit(construct(&spec)?.to_json_value(), &out)
        }
        Command::BuildGenaffine { n, eps, out } => {
            let n = parse_d(&n)?;
            emit(generalized_affine_constants(&n, eps)?.to_json_value(), &out)
        }
        Command::Realize {
            q,
            plane,
            plane_out,
            out,
        } => {
            let plane = match (q, plane) {
                (Some(q), _) => build_plane(q)?,
                (None, Some(file)) => AffinePlane::from_json(&read_source(&file)?)?,
                (None, None) => return Err(Error::Precondition("give --q or --plane".into())),
            };
            if let Some(path) = plane_out {
                std::fs::write(&path, plane.to_json() + "\n")?;
            }
            emit(matrix_algebra(&plane)?.to_json_value(), &out)
        }
        Command::Verify {
            input,
            amorphic,
            table,
        } => {
            let a = load_algebra(&input)?;
            let mut r = verify_axioms(&a);
            r.extend(verify_associativity(&a));
            if amorphic {
                r.extend(is_amorphic(&a));
            }
            if table {
                r.checks.push(table_check(&a));
            }
            Ok(report(r))
        }
        Command::Fuse {
            input,
            partition,
            out,
        } => {
            let a = load_algebra(&input)?;
            let p = Partition::from_json(&read_source(&partition)?, a.dim(), a.identity())?;
            match fuse(&a, &p)? {
                Fusion::Closed(f) => emit(f.to_json_value(), &out),
                Fusion::NotClosed(w) => {
                    Ok(Outcome::Failed(json!({ "passed": false, "not_closed": w })))
                }
            }
        }
        Command::FuseAll { input, cap } => {
            let a = load_algebra(&input)?;
            let s = fuse_all(&a, cap)?;
            let ok = s.all_closed_and_amorphic();
            let v = serde_json::to_value(&s)?;
            Ok(if ok {
                Outcome::Done(v)
            } else {
                Outcome::Failed(v)
            })
        }
        Command::Fission {
            input,
            d,
            parent_out,
            partition_out,
        } => {
            let a = load_algebra(&input)?;
            let f = fission(&a, &parse_d(&d)?)?;
            let parent = f.parent.to_json_value();
            let partition = serde_json::to_value(&f.partition)?;
            if let Some(path) = parent_out {
                write_json(&path, &parent)?;
            }
            if let Some(path) = partition_out {
                write_json(&path, &partition)?;
            }
            Ok(Outcome::Done(json!({
                "epsilon": f.epsilon,
                "mapping": f.mapping,
                "nu": f.nu,
                "parent": parent,
                "partition": partition,
            })))
        }
        Command::Aut {
            input,
            samples,
            seed,
        } => {
            let a = load_algebra(&input)?;
            let g = aut_group(&a)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut check = CheckResult::new("sampled-automorphisms");
            for _ in 0..samples {
                let perm = g.sample(a.dim(), &mut rng);
                if let Some((r, s, t)) = a.first_violation(&perm) {
                    check.fail(
                        vec![r, s, t],
                        format!("permutation {perm:?} moves this constant"),
                        None,
                    );
                }
            }
            let ok = check.passed && g.generators_preserve;
            let v = json!({ "group": g, "samples": samples, "check": check, "passed": ok });
            Ok(if ok {
                Outcome::Done(v)
            } else {
                Outcome::Failed(v)
            })
        }
        Command::TableRegion { nu, eps, d } => {
            let r = table_region(nu, eps, &parse_d(&d)?)?;
            Ok(Outcome::Done(serde_json::to_value(&r)?))
        }
        Command::Recover { input } => {
            let a = load_algebra(&input)?;
            Ok(Outcome::Done(serde_json::to_value(recover_spec(&a)?)?))
        }
        Command::Latin {
            input,
            require_square,
        } => {
            let a = load_algebra(&input)?;
            let lp = latin_params(&a, require_square)?;
            let ok = lp.check.passed;
            let v = serde_json::to_value(&lp)?;
            Ok(if ok {
                Outcome::Done(v)
            } else {
                Outcome::Failed(v)
            })
        }
        Command::Characters { input, seed, out } => {
            let a = load_algebra(&input)?;
            emit(serde_json::to_value(characters(&a, seed)?)?, &out)
        }
        Command::Dual { input, seed, out } => {
            let a = load_algebra(&input)?;
            let (dual, _) = dual_algebra(&a, seed)?;
            emit(dual.to_json_value(), &out)
        }
        Command::Selfdual { input, seed } => {
            let a = load_algebra(&input)?;
            let sd = verify_selfduality(&a, seed)?;
            let passed = sd.report.passed();
            let v = json!({
                "passed": passed,
                "checks": sd.report.checks,
                "dual_degrees": sd.eigen.dual_degrees,
                "p_symmetric": sd.p_symmetric,
            });
            Ok(if passed {
                Outcome::Done(v)
            } else {
                Outcome::Failed(v)
            })
        }
    }
}

/// Runs the tool on `args` (including the program name), writing results
/// to `stdout`. Returns the exit code.
pub fn run_with<I, T, W>(args: I, stdout: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            eprint!("{e}");
            let v = json!({ "error": { "kind": "usage", "message": e.to_string().trim() } });
            let _ = writeln!(stdout, "{}", crate::canonical_json(&v));
            return EXIT_INPUT;
        }
    };
    let outcome = match cli.jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
        {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Error::Precondition(format!(
                "cannot start thread pool: {e}"
            ))),
        },
        None => dispatch(cli.command),
    };
    let (code, v) = match outcome {
        Ok(Outcome::Done(v)) => (EXIT_OK, v),
        Ok(Outcome::Failed(v)) => (EXIT_FAILED, v),
        Err(e) => (
            EXIT_INPUT,
            json!({ "error": { "kind": error_kind(&e), "message": e.to_string() } }),
        ),
    };
    let _ = writeln!(stdout, "{}", crate::canonical_json(&v));
    code
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(args, &mut lock)
}
