//! Command-line front end.
//!
//! ```text
//! mlenhance [enhance] --preset sharpen in.png out.png
//! mlenhance --config my.cfg --set curve.high.a=30 in.ppm out.ppm
//! mlenhance --benchmark --bench-sizes 1 --bench-windows 3,5
//! mlenhance --verify
//! ```
//!
//! Exit codes: 0 success, 2 unreadable input, 64 bad flags or parameters,
//! 70 failed invariant (including a failed `--verify`), 1 anything else.

pub mod bench;
pub mod io;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::config::{apply_setting, parse_config};
use crate::error::Error;
use crate::pipeline::{enhance_detailed, preset_config, EnhanceConfig, EnhanceReport, Preset};
use crate::plane::ImagePlane;
use crate::reference::verify_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INVARIANT: i32 = 70;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormArg {
    Exact,
    Fast,
}

#[derive(Debug, Parser)]
#[command(name = "mlenhance", version, about = "Multi-layer edge-aware image enhancement")]
struct Args {
    /// INPUT OUTPUT (optionally preceded by the word `enhance`).
    #[arg(value_name = "PATH")]
    paths: Vec<PathBuf>,

    /// smooth, sharpen, denoise-sharpen or identity.
    #[arg(long, conflicts_with = "config")]
    preset: Option<Preset>,

    /// Flat `key = value` config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one config key; repeatable, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// luma or rgb.
    #[arg(long)]
    color: Option<String>,

    /// Window radius r (window is (2r+1)×(2r+1)).
    #[arg(long, value_name = "R")]
    window: Option<usize>,

    /// Patch radius q.
    #[arg(long, value_name = "Q")]
    patch: Option<usize>,

    /// Photometric smoothing h of the first level.
    #[arg(long, value_name = "H")]
    h: Option<f64>,

    /// Number of filter levels k.
    #[arg(long, value_name = "K")]
    levels: Option<usize>,

    #[arg(long, value_enum)]
    norm: Option<NormArg>,

    /// closed, trace, invmean or a positive number.
    #[arg(long)]
    alpha: Option<String>,

    #[arg(long, value_enum)]
    mask: Option<Switch>,

    /// Write base, band and high layers here (signed layers offset by 0.5).
    #[arg(long, value_name = "DIR")]
    dump_layers: Option<PathBuf>,

    #[arg(long, value_name = "PATH")]
    dump_mask: Option<PathBuf>,

    /// Write level-1 degrees divided by the valid neighbor count.
    #[arg(long, value_name = "PATH")]
    dump_degrees: Option<PathBuf>,

    /// Time enhancement on synthetic noise images and print a table.
    #[arg(long)]
    benchmark: bool,

    /// Benchmark image sizes in megapixels.
    #[arg(long, value_delimiter = ',', value_name = "MP", requires = "benchmark")]
    bench_sizes: Vec<f64>,

    /// Benchmark window side lengths (odd).
    #[arg(long, value_delimiter = ',', value_name = "SIDE", requires = "benchmark")]
    bench_windows: Vec<usize>,

    #[arg(long, default_value_t = 1, value_name = "N", requires = "benchmark")]
    bench_repeats: usize,

    /// Run the dense-reference oracle checks on built-in fixtures.
    #[arg(long, conflicts_with = "benchmark")]
    verify: bool,

    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Invariant(String),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Input(_) => EXIT_INPUT,
            Failure::Invariant(_) => EXIT_INVARIANT,
            Failure::Other(_) => EXIT_FAILURE,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Config { .. } | Error::UnknownPreset(_) => {
                Failure::Usage(e.to_string())
            }
            Error::EmptyImage | Error::UnsupportedChannels(_) => Failure::Input(e.to_string()),
            other => Failure::Invariant(other.to_string()),
        }
    }
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(args) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}\n\nFor usage, try '--help'."),
                Failure::Input(m) | Failure::Invariant(m) => eprintln!("error: {m}"),
                Failure::Other(e) => eprintln!("error: {e:#}"),
            }
            f.code()
        }
    }
}

fn execute(args: Args) -> Result<(), Failure> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be >= 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Other(e.into()))?;
        return pool.install(|| dispatch(args));
    }
    dispatch(args)
}

fn dispatch(args: Args) -> Result<(), Failure> {
    if args.verify {
        return verify();
    }
    if args.benchmark {
        return benchmark(&args);
    }
    let (input, output) = io_paths(&args.paths)?;
    let cfg = build_config(&args, false)?;
    let image = io::read_image(input).map_err(|e| Failure::Input(format!("{e:#}")))?;
    let report = enhance_detailed(&image, &cfg)?;
    io::write_image(output, &report.image).map_err(Failure::Other)?;
    write_dumps(&args, &cfg, &report).map_err(Failure::Other)
}

fn io_paths(paths: &[PathBuf]) -> Result<(&Path, &Path), Failure> {
    let rest = match paths {
        [first, rest @ ..] if first.as_os_str() == "enhance" && rest.len() == 2 => rest,
        other => other,
    };
    match rest {
        [input, output] => Ok((input, output)),
        _ => Err(Failure::Usage("expected INPUT and OUTPUT paths".into())),
    }
}

fn build_config(args: &Args, default_sharpen: bool) -> Result<EnhanceConfig, Failure> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(p), None) => preset_config(*p),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        (None, None) if default_sharpen => preset_config(Preset::Sharpen),
        _ => return Err(Failure::Usage("exactly one of --preset or --config is required".into())),
    };
    let mut settings: Vec<(String, String)> = Vec::new();
    let mut push = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            settings.push((k.to_string(), v));
        }
    };
    push("levels", args.levels.map(|v| v.to_string()));
    push("window", args.window.map(|v| v.to_string()));
    push("patch", args.patch.map(|v| v.to_string()));
    push("h", args.h.map(|v| v.to_string()));
    push(
        "norm",
        args.norm.map(|n| match n {
            NormArg::Exact => "exact".to_string(),
            NormArg::Fast => "fast".to_string(),
        }),
    );
    push("alpha", args.alpha.clone());
    push(
        "mask",
        args.mask.map(|s| match s {
            Switch::On => "on".to_string(),
            Switch::Off => "off".to_string(),
        }),
    );
    push("color", args.color.clone());
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        settings.push((k.trim().to_string(), v.trim().to_string()));
    }
    for (k, v) in &settings {
        apply_setting(&mut cfg, k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn offset_signed(p: &ImagePlane) -> ImagePlane {
    p.map(|v| v + 0.5)
}

fn write_dumps(args: &Args, cfg: &EnhanceConfig, report: &EnhanceReport) -> anyhow::Result<()> {
    const SUFFIXES: [&str; 3] = ["_r", "_g", "_b"];
    let suffix = |i: usize| if report.planes.len() == 1 { "" } else { SUFFIXES[i] };
    let with_suffix = |path: &Path, i: usize| -> PathBuf {
        if report.planes.len() == 1 {
            return path.to_path_buf();
        }
        let stem = path.file_stem().unwrap_or_default().to_string_lossy();
        let ext = path.extension().map(|e| e.to_string_lossy().into_owned());
        let name = match ext {
            Some(ext) => format!("{stem}{}.{ext}", SUFFIXES[i]),
            None => format!("{stem}{}", SUFFIXES[i]),
        };
        path.with_file_name(name)
    };
    for (i, plane) in report.planes.iter().enumerate() {
        if let Some(dir) = &args.dump_layers {
            std::fs::create_dir_all(dir)?;
            let layers = &plane.layers;
            io::write_plane(&dir.join(format!("base{}.png", suffix(i))), &layers.base)?;
            for (b, band) in layers.bands.iter().enumerate() {
                let name = format!("{}{}.png", cfg.layer_name(b + 1), suffix(i));
                io::write_plane(&dir.join(name), &offset_signed(band))?;
            }
            io::write_plane(&dir.join(format!("high{}.png", suffix(i))), &offset_signed(&layers.high))?;
        }
        if let Some(path) = &args.dump_mask {
            io::write_plane(&with_suffix(path, i), plane.mask.as_plane())?;
        }
        if let Some(path) = &args.dump_degrees {
            io::write_plane(&with_suffix(path, i), &plane.normalized_degrees)?;
        }
    }
    Ok(())
}

fn benchmark(args: &Args) -> Result<(), Failure> {
    let cfg = build_config(args, true)?;
    let windows = if args.bench_windows.is_empty() {
        bench::DEFAULT_WINDOWS.to_vec()
    } else {
        args.bench_windows.clone()
    };
    if let Some(w) = windows.iter().find(|&&w| w < 3 || w % 2 == 0) {
        return Err(Failure::Usage(format!("benchmark window side must be odd and >= 3, got {w}")));
    }
    let sizes = if args.bench_sizes.is_empty() {
        bench::DEFAULT_SIZES_MP.to_vec()
    } else {
        args.bench_sizes.clone()
    };
    if let Some(s) = sizes.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
        return Err(Failure::Usage(format!("benchmark size must be > 0, got {s}")));
    }
    let rows = bench::run_grid(&cfg, &windows, &sizes, args.bench_repeats)?;
    print!("{}", bench::format_table(&rows));
    Ok(())
}

fn verify() -> Result<(), Failure> {
    let checks = verify_suite();
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("{} checks, {} failed", checks.len(), failed);
    if failed > 0 {
        return Err(Failure::Invariant(format!("{failed} verification checks failed")));
    }
    Ok(())
}
