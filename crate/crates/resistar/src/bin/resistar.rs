//! Command-line front end: build stores, classify point files, run the
//! evaluation protocol, count simplices, and slice to 3D meshes.
//!
//! Exit codes: 0 success, 2 usage error, 3 data or contract error.

use clap::{Parser, Subcommand, ValueEnum};
use resistar::{
    auto_q, build_store, count_simplices, export_json, export_obj, scan, slice, BoundaryStore,
    BuildOptions, Classifier, Error, EvalConfig, GridSpec, Hyperplane, Label, Oracle, OracleSpec,
    Variant, DEFAULT_DELTA,
};
use std::fs;
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "resistar",
    about = "Recursive simplex star approximation of an oracle-defined boundary in [0,1]^d",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Cube,
    Kuhn,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Cube => Variant::Cube,
            VariantArg::Kuhn => Variant::Kuhn,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshFormat {
    Obj,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build a boundary store from an oracle spec (JSON file).
    Build {
        /// JSON oracle spec: {"kind": "sphere", "center": [..], "radius": ..} etc.
        #[arg(long)]
        oracle: String,
        /// dimension of the domain [0,1]^d
        #[arg(long)]
        d: usize,
        /// grid vertices per axis
        #[arg(long)]
        ng: usize,
        /// dichotomy depth; default ceil(log2(ng)) + 2
        #[arg(long)]
        q: Option<u32>,
        #[arg(long, value_enum, default_value = "cube")]
        variant: VariantArg,
        /// extra dichotomies on multi-axis Kuhn edges
        #[arg(long)]
        diagonal_boost: bool,
        /// output store file (binary)
        #[arg(long)]
        out: String,
    },
    /// Classify points from a CSV file (one comma-separated point per line).
    /// Writes one label per line: -1, 0, or 1.
    Classify {
        #[arg(long)]
        store: String,
        #[arg(long)]
        points: String,
        #[arg(long)]
        out: String,
        /// zero-band radius around recursive barycentres
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        /// label (-1 or 1) reported when the store has no boundary points
        #[arg(long, allow_hyphen_values = true)]
        fallback: Option<i8>,
    },
    /// Run a scan from an EvalConfig JSON file and write the CSV report.
    /// CSV columns: d, n_g, variant, q, boundary_cubes, boundary_points,
    /// simplices, build_oracle_calls, samples, zero_labels,
    /// resistar_error_pct, nearest_vertex_error_pct,
    /// resistar_domain_error_pct, nearest_vertex_domain_error_pct; slope
    /// fits follow as "# slope,d,variant,metric,slope,r2" lines.
    Evaluate {
        #[arg(long)]
        config: String,
        /// output CSV path; stdout when omitted
        #[arg(long)]
        out: Option<String>,
    },
    /// Report store statistics and the exact simplex count as JSON.
    Count {
        #[arg(long)]
        store: String,
    },
    /// Slice the resistar with d-3 hyperplanes into a 3D polygon mesh.
    Slice {
        #[arg(long)]
        store: String,
        /// axis-aligned plane as axis=value, repeatable (d-3 times)
        #[arg(long = "plane")]
        planes: Vec<String>,
        #[arg(long, value_enum, default_value = "obj")]
        format: MeshFormat,
        #[arg(long)]
        out: String,
    },
}

fn read_store(path: &str) -> Result<BoundaryStore, Error> {
    let mut f = fs::File::open(path).map_err(Error::Io)?;
    BoundaryStore::read_binary(&mut f)
}

fn parse_plane(s: &str) -> Result<Hyperplane, String> {
    let (axis, value) = s
        .split_once('=')
        .ok_or_else(|| format!("plane '{s}' is not axis=value"))?;
    let axis: usize = axis
        .trim()
        .parse()
        .map_err(|_| format!("plane axis '{axis}' is not an integer"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("plane value '{value}' is not a number"))?;
    Ok(Hyperplane::Axis { axis, value })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Build {
            oracle,
            d,
            ng,
            q,
            variant,
            diagonal_boost,
            out,
        } => {
            let text = fs::read_to_string(&oracle).map_err(Error::Io)?;
            let spec: OracleSpec =
                serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
            let oracle = Oracle::new(spec)?;
            let g = GridSpec::new(d, ng)?;
            let mut opts = BuildOptions::new(q.unwrap_or_else(|| auto_q(ng)));
            opts.diagonal_q_boost = diagonal_boost;
            let store = build_store(&oracle, &g, variant.into(), opts)?;
            let mut f = fs::File::create(&out).map_err(Error::Io)?;
            store.write_binary(&mut f)?;
            eprintln!(
                "built {} store: {} boundary cubes, {} boundary points, {} oracle calls",
                store.variant.as_str(),
                store.cubes.len(),
                store.per_cube_point_total(),
                oracle.call_count()
            );
            Ok(())
        }
        Command::Classify {
            store,
            points,
            out,
            delta,
            fallback,
        } => {
            let store = read_store(&store)?;
            let d = store.grid.d;
            let fallback = fallback.map(Label::from_i8).transpose()?;
            let cl = Classifier::new(store, delta, fallback)?;
            let text = fs::read_to_string(&points).map_err(Error::Io)?;
            let mut labels = String::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let x: Vec<f64> = line
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| {
                        Error::Format(format!("line {}: {e}", lineno + 1))
                    })?;
                if x.len() != d {
                    return Err(Error::Format(format!(
                        "line {}: expected {d} coordinates, got {}",
                        lineno + 1,
                        x.len()
                    )));
                }
                labels.push_str(&format!("{}\n", cl.classify(&x)?.as_i8()));
            }
            fs::write(&out, labels).map_err(Error::Io)
        }
        Command::Evaluate { config, out } => {
            let text = fs::read_to_string(&config).map_err(Error::Io)?;
            let cfg: EvalConfig =
                serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
            let report = scan(&cfg)?;
            let csv = report.to_csv();
            match out {
                Some(path) => fs::write(&path, csv).map_err(Error::Io),
                None => {
                    std::io::stdout()
                        .write_all(csv.as_bytes())
                        .map_err(Error::Io)
                }
            }
        }
        Command::Count { store } => {
            let store = read_store(&store)?;
            let record = serde_json::json!({
                "d": store.grid.d,
                "n_g": store.grid.n_g,
                "variant": store.variant.as_str(),
                "boundary_cubes": store.cubes.len(),
                "boundary_points": store.per_cube_point_total(),
                "unique_edges": store.unique_edge_count(),
                "simplices": count_simplices(&store)?,
            });
            println!("{record:#}");
            Ok(())
        }
        Command::Slice {
            store,
            planes,
            format,
            out,
        } => {
            let store = read_store(&store)?;
            let planes: Vec<Hyperplane> = planes
                .iter()
                .map(|s| parse_plane(s))
                .collect::<std::result::Result<_, _>>()
                .map_err(Error::Format)?;
            let mesh = slice(&store, &planes)?;
            let text = match format {
                MeshFormat::Obj => export_obj(&mesh),
                MeshFormat::Json => export_json(&mesh)?,
            };
            fs::write(&out, text).map_err(Error::Io)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits with code 2 on usage errors
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
