//! `snets`: surface net extraction from labeled volumes.
//!
//! Subcommands cover the full workflow: `gen` synthesizes labeled sphere
//! volumes, `info` inspects them, `extract` writes a .snet mesh cache,
//! `smooth` and `triangulate` consume the cache, `pipeline` chains all
//! stages, and `bench` times them. Machine-readable stdout lines use stable
//! `key value` form.

mod bench;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use surfacenets::extract::ExtractOptions;
use surfacenets::mesh::{read_snet, write_obj, write_ply, write_snet};
use surfacenets::{
    build_label_set, extract_with_stats, gen_spheres, load_volume, oracle::oracle_extract,
    save_volume, smooth, triangulate, ConstraintMode, LabelSelector, LabeledVolume,
    SmoothingParams, SphereSpec, SurfaceNetMesh, TriangulationStrategy,
};

#[derive(Parser)]
#[command(name = "snets", version, about = "Surface net extraction from labeled volumes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic volume of labeled spheres.
    Gen(GenArgs),
    /// Print volume header fields and the label histogram.
    Info(InfoArgs),
    /// Extract a surface net into a .snet mesh cache.
    Extract(ExtractArgs),
    /// Smooth a cached .snet mesh without re-extracting.
    Smooth(SmoothArgs),
    /// Triangulate a cached .snet mesh to .ply or .obj.
    Triangulate(TriangulateArgs),
    /// Extract, smooth, and triangulate in one run.
    Pipeline(PipelineArgs),
    /// Time pipeline stages across thread counts and write a CSV report.
    Bench(BenchArgs),
}

fn parse_dims(s: &str) -> Result<(u32, u32, u32), String> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("expected MxNxO, got `{s}`"));
    }
    let p = |t: &str| t.parse::<u32>().map_err(|_| format!("bad dimension `{t}`"));
    Ok((p(parts[0])?, p(parts[1])?, p(parts[2])?))
}

fn parse_spacing(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split('x').collect();
    let p = |t: &str| t.parse::<f64>().map_err(|_| format!("bad spacing `{t}`"));
    match parts.len() {
        1 => {
            let v = p(parts[0])?;
            Ok((v, v, v))
        }
        3 => Ok((p(parts[0])?, p(parts[1])?, p(parts[2])?)),
        _ => Err(format!("expected S or SXxSYxSZ, got `{s}`")),
    }
}

fn parse_radius(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected MIN:MAX, got `{s}`"))?;
    let p = |t: &str| t.parse::<f64>().map_err(|_| format!("bad radius `{t}`"));
    Ok((p(lo)?, p(hi)?))
}

/// Newtype so clap treats the comma list as one value, not repeated args.
#[derive(Clone)]
struct ThreadList(Vec<usize>);

fn parse_threads_list(s: &str) -> Result<ThreadList, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad thread count `{t}`")))
        .collect::<Result<_, _>>()
        .map(ThreadList)
}

#[derive(Args)]
struct GenArgs {
    /// Grid point dimensions, MxNxO.
    #[arg(long, value_parser = parse_dims)]
    dims: (u32, u32, u32),
    /// Voxel spacing, uniform S or per-axis SXxSYxSZ.
    #[arg(long, value_parser = parse_spacing, default_value = "1")]
    spacing: (f64, f64, f64),
    /// Number of spheres; sphere s is labeled label-start + s.
    #[arg(long)]
    spheres: u32,
    /// Sphere radius range MIN:MAX, in grid index units.
    #[arg(long, value_parser = parse_radius)]
    radius: (f64, f64),
    #[arg(long, default_value_t = 1)]
    label_start: u32,
    #[arg(long)]
    seed: u64,
    /// Output header path; the raw payload lands next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InfoArgs {
    volume: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    /// Four-pass parallel extraction.
    Fast,
    /// Brute-force reference extraction (single-threaded).
    Oracle,
}

#[derive(Args)]
struct ExtractArgs {
    volume: PathBuf,
    /// Label selection: `all`, or values/inclusive ranges like `1,2,5-9`.
    #[arg(long, value_parser = LabelSelector::parse, default_value = "all")]
    labels: LabelSelector,
    /// Output .snet path.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 means detected core count.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Disable the row-trim acceleration (output is identical).
    #[arg(long)]
    no_trim: bool,
    #[arg(long, value_enum, default_value_t = Engine::Fast)]
    engine: Engine,
    /// Print per-pass instrumentation counters and timings.
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct SmoothArgs {
    mesh: PathBuf,
    #[arg(long, default_value_t = 25)]
    iterations: u32,
    #[arg(long, default_value_t = 0.5)]
    lambda: f32,
    #[arg(long, default_value = "sphere")]
    constraint: ConstraintMode,
    #[arg(long, default_value_t = 1.0)]
    factor: f32,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct TriangulateArgs {
    mesh: PathBuf,
    #[arg(long, default_value = "shortest_diagonal")]
    strategy: TriangulationStrategy,
    /// Output path; format chosen by extension (.ply or .obj).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct PipelineArgs {
    volume: PathBuf,
    #[arg(long, value_parser = LabelSelector::parse, default_value = "all")]
    labels: LabelSelector,
    #[arg(long, default_value_t = 25)]
    iterations: u32,
    #[arg(long, default_value_t = 0.5)]
    lambda: f32,
    #[arg(long, default_value = "sphere")]
    constraint: ConstraintMode,
    #[arg(long, default_value_t = 1.0)]
    factor: f32,
    #[arg(long, default_value = "shortest_diagonal")]
    strategy: TriangulationStrategy,
    /// Output path; format chosen by extension (.ply or .obj).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    no_trim: bool,
}

#[derive(Args)]
struct BenchArgs {
    volume: PathBuf,
    #[arg(long, value_parser = LabelSelector::parse, default_value = "all")]
    labels: LabelSelector,
    /// Comma-separated worker counts, e.g. `1,2,4`.
    #[arg(long, value_parser = parse_threads_list, default_value = "1")]
    threads: ThreadList,
    /// Timed runs per thread count (after one warm-up).
    #[arg(long, default_value_t = 3)]
    repeat: u32,
    #[arg(long, default_value_t = 25)]
    iterations: u32,
    #[arg(long, default_value_t = 0.5)]
    lambda: f32,
    #[arg(long, default_value = "shortest_diagonal")]
    strategy: TriangulationStrategy,
    #[arg(long)]
    no_trim: bool,
    /// CSV report path.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    // Die quietly when a downstream pipe closes (e.g. `snets info | head`)
    // instead of panicking on the failed print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Info(args) => cmd_info(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Smooth(args) => cmd_smooth(args),
        Command::Triangulate(args) => cmd_triangulate(args),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::Bench(args) => cmd_bench(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let spec = SphereSpec {
        count: args.spheres,
        radius_range: args.radius,
        label_start: args.label_start,
        seed: args.seed,
    };
    let vol = gen_spheres(args.dims, args.spacing, spec)?;
    save_volume(&vol, &args.out)?;
    let (m, n, o) = vol.dims();
    println!("dims {m}x{n}x{o}");
    println!("spheres {}", args.spheres);
    println!("seed {}", args.seed);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_info(args: InfoArgs) -> Result<()> {
    let vol = load_volume(&args.volume)?;
    let (m, n, o) = vol.dims();
    let (sx, sy, sz) = vol.spacing();
    let (ox, oy, oz) = vol.origin();
    println!("dims {m}x{n}x{o}");
    println!("spacing {sx} {sy} {sz}");
    println!("origin {ox} {oy} {oz}");
    println!("dtype {}", vol.scalars().width().name());
    println!("labels {}", vol.labels_present().len());
    for (value, count) in vol.histogram() {
        println!("label {value} count {count}");
    }
    Ok(())
}

/// Resolves the selection against the volume; `None` means nothing matched
/// and the caller should emit an empty mesh with a warning, exit 0.
fn resolve_selection(
    vol: &LabeledVolume,
    selector: &LabelSelector,
) -> Result<Option<surfacenets::SelectedLabelSet>> {
    let values = selector.resolve(vol);
    let present: Vec<(u32, u64)> = vol.histogram();
    let any_present = values
        .iter()
        .any(|v| present.binary_search_by_key(v, |&(s, _)| s).is_ok());
    if values.is_empty() || !any_present {
        eprintln!("warning: label selection matches nothing; writing empty mesh");
        return Ok(None);
    }
    Ok(Some(build_label_set(&values)?))
}

fn run_extract(
    vol: &LabeledVolume,
    selector: &LabelSelector,
    threads: usize,
    trim: bool,
    engine: Engine,
    stats: bool,
) -> Result<SurfaceNetMesh> {
    let Some(set) = resolve_selection(vol, selector)? else {
        return Ok(SurfaceNetMesh::empty(vol.spacing()));
    };
    if engine == Engine::Oracle {
        return Ok(oracle_extract(vol, &set));
    }
    let opts = ExtractOptions { threads, trim };
    let (mesh, st) = extract_with_stats(vol, &set, &opts)?;
    if stats {
        for (p, ps) in st.passes.iter().enumerate() {
            println!(
                "pass{} rows {} examined {} emitted {} seconds {:.6}",
                p + 1,
                ps.rows_visited,
                ps.items_examined,
                ps.outputs_emitted,
                ps.seconds
            );
        }
        println!("stencil_entries {}", st.emitted.stencil_entries);
    }
    Ok(mesh)
}

fn cmd_extract(args: ExtractArgs) -> Result<()> {
    let vol = load_volume(&args.volume)?;
    let mesh = run_extract(
        &vol,
        &args.labels,
        args.threads,
        !args.no_trim,
        args.engine,
        args.stats,
    )?;
    write_snet(&mesh, &args.out)?;
    println!("points {}", mesh.num_points());
    println!("quads {}", mesh.num_quads());
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_smooth(args: SmoothArgs) -> Result<()> {
    let mesh = read_snet(&args.mesh)?;
    let params = SmoothingParams {
        iterations: args.iterations,
        lambda: args.lambda,
        constraint_mode: args.constraint,
        constraint_factor: args.factor,
    };
    let out = smooth(mesh, &params, args.threads);
    write_snet(&out, &args.out)?;
    println!("points {}", out.num_points());
    println!("iterations {}", args.iterations);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn write_triangles(mesh: &surfacenets::TriangleMesh, out: &PathBuf) -> Result<()> {
    match out.extension().and_then(|e| e.to_str()) {
        Some("ply") => write_ply(mesh, out)?,
        Some("obj") => write_obj(mesh, out)?,
        other => bail!(
            "unsupported output extension {:?} for {}; use .ply or .obj",
            other,
            out.display()
        ),
    }
    Ok(())
}

fn cmd_triangulate(args: TriangulateArgs) -> Result<()> {
    let mesh = read_snet(&args.mesh)?;
    let tri = triangulate(&mesh, args.strategy, args.threads);
    write_triangles(&tri, &args.out)?;
    println!("triangles {}", tri.triangles.len());
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    let vol = load_volume(&args.volume)?;
    let mesh = run_extract(
        &vol,
        &args.labels,
        args.threads,
        !args.no_trim,
        Engine::Fast,
        false,
    )?;
    let params = SmoothingParams {
        iterations: args.iterations,
        lambda: args.lambda,
        constraint_mode: args.constraint,
        constraint_factor: args.factor,
    };
    let smoothed = smooth(mesh, &params, args.threads);
    let tri = triangulate(&smoothed, args.strategy, args.threads);
    write_triangles(&tri, &args.out)?;
    println!("points {}", smoothed.num_points());
    println!("triangles {}", tri.triangles.len());
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let vol = load_volume(&args.volume)?;
    let Some(set) = resolve_selection(&vol, &args.labels)? else {
        bail!("benchmark needs a non-empty label selection");
    };
    let params = SmoothingParams {
        iterations: args.iterations,
        lambda: args.lambda,
        ..SmoothingParams::default()
    };
    let report = bench::run_benchmark(
        &vol,
        &set,
        &args.threads.0,
        args.repeat,
        !args.no_trim,
        &params,
        args.strategy,
    )?;
    std::fs::write(&args.out, report.to_csv())
        .with_context(|| format!("writing {}", args.out.display()))?;
    for row in &report.rows {
        println!(
            "threads {} extract_s {:.6} total_s {:.6} speedup {}",
            row.threads,
            row.extract_s(),
            row.total_s(),
            row.speedup.map_or("n/a".to_string(), |s| format!("{s:.3}")),
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}
