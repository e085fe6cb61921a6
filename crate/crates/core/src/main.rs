use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};

use handlesplit::generate::{generate, GeneratorSpec};
use handlesplit::io::{self, serialize_datum, serialize_decomposition, serialize_script};
use handlesplit::oracle::brute_force_distance;
use handlesplit::{
    cancel_pair, dimension_profile, generic_disjoint, global_split, realize_configuration, rearrange_pair,
    rearrange_point, replay_script, split_interior, trajectory, value, Configuration, Error, Flags, Kind,
    MorseDatum, PointId, Value,
};

#[derive(Parser)]
#[command(name = "handlesplit", version, about = "Rewriting engine for embedded Morse functions on cobordisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate datum files.
    Validate {
        files: Vec<PathBuf>,
        /// Worker threads for independent files.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the dimension profile of a critical point type.
    Profile {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
    },
    /// Decide whether genericity forces two points to be unconnected.
    Disjoint {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        z: u32,
        #[arg(long)]
        w: u32,
    },
    /// Move one point, or two points, to new values (`--set id=p/q`).
    Rearrange {
        file: PathBuf,
        #[arg(long = "set", required = true)]
        sets: Vec<String>,
        #[command(flatten)]
        out: Outputs,
    },
    /// Cancel a pair of critical points.
    Cancel {
        file: PathBuf,
        #[arg(long)]
        z: u32,
        #[arg(long)]
        w: u32,
        #[command(flatten)]
        out: Outputs,
    },
    /// Split an interior point into two boundary points.
    Split {
        file: PathBuf,
        #[arg(long)]
        z: u32,
        #[command(flatten)]
        out: Outputs,
    },
    /// Run the handle-splitting pipeline.
    NormalForm {
        file: PathBuf,
        #[arg(long)]
        out_decomp: Option<PathBuf>,
        #[command(flatten)]
        out: Outputs,
    },
    /// Generate a random valid datum.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        min_points: usize,
        #[arg(long, default_value_t = 8)]
        max_points: usize,
        #[arg(long, default_value_t = 0.3)]
        edge_density: f64,
        /// Do not assert absence of closed components.
        #[arg(long)]
        no_flags: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the rearrangement driver with a breadth-first search.
    Oracle {
        file: PathBuf,
        #[arg(long = "set", required = true)]
        sets: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        bound: usize,
    },
    /// Replay a move script and print the resulting datum.
    Replay {
        file: PathBuf,
        script: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct Outputs {
    /// Write the resulting datum here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the move script here.
    #[arg(long)]
    out_script: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Move(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_move_failure() {
            Failure::Move(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type CliResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<MorseDatum, Failure> {
    io::load_datum(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_sets(sets: &[String]) -> Result<Vec<(PointId, Value)>, Failure> {
    sets.iter()
        .map(|s| {
            let bad = || Failure::Input(format!("`{s}` is not id=p/q"));
            let (id, v) = s.split_once('=').ok_or_else(bad)?;
            let id = id.parse().map_err(|_| bad())?;
            Ok((PointId(id), value::parse(v).ok_or_else(bad)?))
        })
        .collect()
}

fn finish(out: &Outputs, d: &MorseDatum, script: &[handlesplit::MoveRecord]) -> CliResult {
    if let Some(p) = &out.out_script {
        emit(Some(p), &serialize_script(script))?;
    }
    emit(out.out.as_deref(), &serialize_datum(d))
}

fn validate(files: &[PathBuf], jobs: usize) -> CliResult {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<(), String>>>> = Mutex::new(vec![None; files.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(files.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = files.get(i) else { break };
                let r = match load(path) {
                    Ok(_) => Ok(()),
                    Err(Failure::Input(m) | Failure::Move(m)) => Err(m),
                };
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let mut failed = false;
    for (path, r) in files.iter().zip(results.into_inner().unwrap()) {
        match r.expect("every file is processed") {
            Ok(()) => println!("ok {}", path.display()),
            Err(m) => {
                failed = true;
                eprintln!("{m}");
            }
        }
    }
    if failed {
        Err(Failure::Input("validation failed".into()))
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Validate { files, jobs } => validate(&files, jobs),
        Command::Profile { kind, k, n } => {
            let kind = Kind::parse(&kind).ok_or_else(|| Failure::Input(format!("unknown kind `{kind}`")))?;
            let p = dimension_profile(kind, k, n)?;
            let names = ["Ms-Omega", "Mu-Omega", "Ws-Y", "Wu-Y", "Ws_Y", "Wu_Y"];
            for (name, dim) in names.iter().zip(p.as_array()) {
                match dim {
                    Some(d) => println!("{name} {d}"),
                    None => println!("{name} empty"),
                }
            }
            Ok(())
        }
        Command::Disjoint { file, z, w } => {
            let d = load(&file)?;
            let (pz, pw) = (d.point(PointId(z))?, d.point(PointId(w))?);
            let disjoint = generic_disjoint(pz, pw, d.ambient);
            println!("generic_disjoint {disjoint}");
            println!("can_rearrange {}", trajectory::can_rearrange(&d, PointId(z), PointId(w))?);
            Ok(())
        }
        Command::Rearrange { file, sets, out } => {
            let d = load(&file)?;
            let (next, rec) = match parse_sets(&sets)?.as_slice() {
                [(z, a)] => rearrange_point(&d, *z, a.clone())?,
                [(z, a), (w, b)] => rearrange_pair(&d, *z, *w, a.clone(), b.clone())?,
                _ => return Err(Failure::Input("give one or two --set arguments".into())),
            };
            finish(&out, &next, &[rec])
        }
        Command::Cancel { file, z, w, out } => {
            let d = load(&file)?;
            let (next, rec) = cancel_pair(&d, PointId(z), PointId(w))?;
            finish(&out, &next, &[rec])
        }
        Command::Split { file, z, out } => {
            let d = load(&file)?;
            let (next, rec) = split_interior(&d, PointId(z))?;
            finish(&out, &next, &[rec])
        }
        Command::NormalForm { file, out_decomp, out } => {
            let d = load(&file)?;
            let (next, dec, script) = global_split(&d)?;
            let report = serialize_decomposition(&dec);
            match &out_decomp {
                Some(p) => emit(Some(p), &report)?,
                None => eprint!("{report}"),
            }
            finish(&out, &next, &script)
        }
        Command::Generate {
            seed,
            n,
            m,
            min_points,
            max_points,
            edge_density,
            no_flags,
            out,
        } => {
            let mut spec = GeneratorSpec::new(seed, n, m, max_points);
            spec.min_points = min_points;
            spec.edge_density = edge_density;
            if no_flags {
                spec.flags = Flags::none();
            }
            emit(out.as_deref(), &serialize_datum(&generate(&spec)?))
        }
        Command::Oracle { file, sets, bound } => {
            let d = load(&file)?;
            let mut target: Configuration = d.configuration();
            target.extend(parse_sets(&sets)?);
            let dist = brute_force_distance(&d, &target, bound)?;
            match dist {
                Some(k) => println!("bfs reachable in {k} moves"),
                None => println!("bfs unreachable"),
            }
            match realize_configuration(&d, &target) {
                Ok((_, script)) => println!("realize ok in {} moves", script.len()),
                Err(e) => println!("realize refused: {e}"),
            }
            Ok(())
        }
        Command::Replay { file, script, out } => {
            let d = load(&file)?;
            let script = io::parse_script(&read(&script)?)
                .map_err(|e| Failure::Input(format!("{}: {e}", script.display())))?;
            emit(out.as_deref(), &serialize_datum(&replay_script(&d, &script)?))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Move(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
