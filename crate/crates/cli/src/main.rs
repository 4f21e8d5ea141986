use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use meshkit::grid::{load_classic_tables, Grid, GridSpec};
use meshkit::io::{write_gmsh, write_partition_svg};
use meshkit::meshgen::{build_halo, generate_partitions, MeshOptions};
use meshkit::partition::{checkerboard_partition, equal_regions_partition, Distribution};
use meshkit::Error;

#[derive(Parser)]
#[command(
    name = "meshkit",
    version,
    about = "Grids, meshes and partitions on the sphere"
)]
struct Cli {
    /// JSON file of classic reduced Gaussian tables, {"<N>": [pl...]}
    #[arg(long, global = true, value_name = "FILE")]
    pl_table: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Describe a grid
    Grids {
        /// Grid name (O32, F16, L64x33, ...) or JSON spec file
        grid: String,
        /// Name, type, classification, size, ny and uid (default)
        #[arg(long)]
        info: bool,
        /// One "n x y lon lat" line per point
        #[arg(long)]
        points: bool,
        /// Canonical JSON spec
        #[arg(long)]
        json: bool,
    },
    /// Generate a partitioned mesh
    Meshgen {
        grid: String,
        #[arg(long, default_value_t = 1)]
        partitions: usize,
        #[arg(long, value_enum, default_value_t = Partitioner::EqualRegions)]
        partitioner: Partitioner,
        #[arg(long, default_value_t = 0)]
        halo: usize,
        /// Write only this partition
        #[arg(long)]
        part: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Output file; with several partitions, the stem of `<stem>.<k>.<ext>`
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Close global grids with triangles around a node at each pole
        #[arg(long)]
        pole_elements: bool,
    },
    /// Partition a grid and plot or dump the result
    Partition {
        grid: String,
        #[arg(long, default_value_t = 1)]
        partitions: usize,
        #[arg(long, value_enum, default_value_t = Partitioner::EqualRegions)]
        partitioner: Partitioner,
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Partitioner {
    #[value(alias = "equal_regions")]
    EqualRegions,
    Checkerboard,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Gmsh,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Gmsh => "msh",
            Format::Json => "json",
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::InvalidSpec(_)
        | Error::InvalidArgument(_)
        | Error::Index { .. } => 2,
        Error::UnsupportedGrid(_) => 3,
        _ => 1,
    }
}

fn load_grid(arg: &str) -> Result<Grid, Error> {
    let path = Path::new(arg);
    if arg.ends_with(".json") || path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("{arg}: {e}")))?;
        return Grid::from_spec(GridSpec::from_json_str(&text)?);
    }
    Grid::from_name(arg)
}

fn partition(grid: &Grid, parts: usize, kind: Partitioner) -> Result<Distribution, Error> {
    match kind {
        Partitioner::EqualRegions => equal_regions_partition(grid, parts),
        Partitioner::Checkerboard => checkerboard_partition(grid, parts),
    }
}

fn info(grid: &Grid) -> String {
    let mut out = String::new();
    let name = grid.name().unwrap_or_else(|| "-".into());
    writeln!(out, "name: {name}").unwrap();
    writeln!(out, "type: {}", grid.spec().kind.as_str()).unwrap();
    writeln!(
        out,
        "classification: {}",
        grid.classify().names().join(", ")
    )
    .unwrap();
    writeln!(out, "size: {}", grid.size()).unwrap();
    if let Some(s) = grid.structured() {
        writeln!(out, "ny: {}", s.ny()).unwrap();
    }
    writeln!(out, "uid: {}", grid.uid()).unwrap();
    out
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    log::debug!("writing {}", path.display());
    std::fs::write(path, text)?;
    Ok(())
}

fn numbered(output: Option<&Path>, k: usize, format: Format) -> PathBuf {
    let base = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("mesh"));
    let stem = match base.extension() {
        Some(ext) if ext == format.extension() => base.with_extension(""),
        _ => base,
    };
    PathBuf::from(format!("{}.{k}.{}", stem.display(), format.extension()))
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(path) = &cli.pl_table {
        let n = load_classic_tables(path)?;
        log::debug!("registered {n} classic tables from {}", path.display());
    }
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    match cli.command {
        Command::Grids {
            grid,
            info: show_info,
            points,
            json,
        } => {
            let grid = load_grid(&grid)?;
            if show_info || !(points || json) {
                stdout.write_all(info(&grid).as_bytes())?;
            }
            if json {
                writeln!(stdout, "{}", grid.spec().canonical())?;
            }
            if points {
                let mut out = std::io::BufWriter::new(&mut stdout);
                for n in 0..grid.size() {
                    let xy = grid.xy(n)?;
                    let ll = grid.lonlat(n)?;
                    writeln!(out, "{n} {} {} {} {}", xy.x, xy.y, ll.lon, ll.lat)?;
                }
                out.flush()?;
            }
        }
        Command::Meshgen {
            grid,
            partitions,
            partitioner,
            halo,
            part,
            format,
            output,
            pole_elements,
        } => {
            let grid = load_grid(&grid)?;
            let dist = partition(&grid, partitions, partitioner)?;
            if let Some(k) = part {
                if k >= partitions {
                    return Err(Error::InvalidArgument(format!(
                        "part {k} not below {partitions}"
                    )));
                }
            }
            let mut meshes = generate_partitions(&grid, &dist, MeshOptions { pole_elements })?;
            let render = |m: &meshkit::mesh::Mesh| match format {
                Format::Gmsh => write_gmsh(m),
                Format::Json => format!("{}\n", m.to_json()),
            };
            let selected: Vec<usize> = match part {
                Some(k) => vec![k],
                None => (0..partitions).collect(),
            };
            for &k in &selected {
                build_halo(&mut meshes[k], halo)?;
                log::debug!(
                    "part {k}: {} nodes, {} cells",
                    meshes[k].nodes.size(),
                    meshes[k].cells.size()
                );
            }
            if selected.len() == 1 {
                let text = render(&meshes[selected[0]]);
                match &output {
                    Some(path) => write_file(path, &text)?,
                    None => stdout.write_all(text.as_bytes())?,
                }
            } else {
                for &k in &selected {
                    write_file(&numbered(output.as_deref(), k, format), &render(&meshes[k]))?;
                }
            }
        }
        Command::Partition {
            grid,
            partitions,
            partitioner,
            svg,
            json,
        } => {
            let grid = load_grid(&grid)?;
            let dist = partition(&grid, partitions, partitioner)?;
            if let Some(path) = &svg {
                write_file(path, &write_partition_svg(&grid, &dist)?)?;
            }
            if let Some(path) = &json {
                write_file(path, &format!("{}\n", dist.to_json()))?;
            }
            if svg.is_none() && json.is_none() {
                stdout.write_all(dist.to_text().as_bytes())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let debug = std::env::var("MESHKIT_DEBUG").is_ok_and(|v| v.trim() == "1");
    env_logger::Builder::new()
        .filter_level(if debug {
            log::LevelFilter::Debug
        } else {
            log::LevelFilter::Warn
        })
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("meshkit: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
