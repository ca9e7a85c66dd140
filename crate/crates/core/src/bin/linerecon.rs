//! Command-line front end: synthetic scenes, staged or one-shot
//! reconstruction, evaluation and the cube detection experiment.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Args, Command, FromArgMatches, Parser, Subcommand};

use linerecon::eval::{compare_surfaces, cube_experiment, SummaryOptions};
use linerecon::lineio::synth::{synth_cube, synth_room, RoomSpec};
use linerecon::lineio::{load_line_cloud, save_line_cloud, LineCloud};
use linerecon::pipeline::{arrange, detect, reconstruct, Detection, PipelineConfig, Settings, CONFIG_KEYS};
use linerecon::ransac::PlanesDocument;
use linerecon::surface::{load_mesh, save_mesh};

#[derive(Parser)]
#[command(name = "linerecon", version, about = "Piecewise-planar surface reconstruction from 3D line segments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Detect and fuse planes; writes a planes document.
    Detect {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Build the cell complex of detected planes; writes a complex dump.
    Arrange {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        planes: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Full run from a line cloud to a mesh (.off or .obj).
    Reconstruct {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Use these planes instead of detecting them.
        #[arg(long)]
        planes: Option<PathBuf>,
        /// Run report (JSON).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Wall-clock seconds per stage (JSON).
        #[arg(long)]
        timings: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Precision and completeness of a mesh against ground truth.
    Eval {
        #[arg(long)]
        recon: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Summary (JSON); printed when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Histogram of precision distances (CSV).
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Write a synthetic line cloud.
    #[command(subcommand)]
    Synth(SynthCmd),
    /// Mean recovered cube faces over a noise by outlier grid.
    CubeGrid {
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35])]
        noise: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0, 10, 20, 30, 40, 50])]
        outliers: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        /// Table (CSV); printed when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Subcommand)]
enum SynthCmd {
    /// Edges of the cube [-1, 1]^3 seen from 26 viewpoints.
    Cube {
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        outliers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Furnished 4 x 5 x 2.5 m room with its ground-truth surface.
    Room {
        #[arg(long, default_value_t = 0.01)]
        noise: f64,
        /// Outlier count; defaults to 10 % of the clean segment count.
        #[arg(long)]
        outliers: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// Ground-truth mesh (.off or .obj).
        #[arg(long)]
        truth: Option<PathBuf>,
    },
}

/// `--config FILE` plus one flag per configuration key. Flags win over the file.
struct ConfigArgs {
    file: Option<PathBuf>,
    flags: Settings,
    errors: Vec<String>,
}

impl FromArgMatches for ConfigArgs {
    fn from_arg_matches(m: &ArgMatches) -> Result<Self, clap::Error> {
        let mut flags = Settings::default();
        let mut errors = Vec::new();
        for key in CONFIG_KEYS {
            if let Some(v) = m.get_one::<String>(key) {
                if let Err(e) = flags.set(key, v) {
                    errors.push(e.to_string());
                }
            }
        }
        Ok(ConfigArgs { file: m.get_one::<PathBuf>("config").cloned(), flags, errors })
    }

    fn update_from_arg_matches(&mut self, m: &ArgMatches) -> Result<(), clap::Error> {
        *self = Self::from_arg_matches(m)?;
        Ok(())
    }
}

impl Args for ConfigArgs {
    fn augment_args(cmd: Command) -> Command {
        let cmd = cmd.arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("Settings file of `key = value` lines"),
        );
        CONFIG_KEYS.iter().fold(cmd, |cmd, &key| {
            cmd.arg(Arg::new(key).long(key).value_name("VALUE").action(ArgAction::Set).help_heading("Settings"))
        })
    }

    fn augment_args_for_update(cmd: Command) -> Command {
        Self::augment_args(cmd)
    }
}

enum Failure {
    Usage(String),
    Runtime { stage: &'static str, message: String },
}

fn runtime(stage: &'static str) -> impl Fn(&dyn Display) -> Failure {
    move |e| Failure::Runtime { stage, message: e.to_string() }
}

impl ConfigArgs {
    fn resolve(&self, base: Settings) -> Result<PipelineConfig, Failure> {
        if let Some(e) = self.errors.first() {
            return Err(Failure::Usage(e.clone()));
        }
        let mut settings = base;
        if let Some(path) = &self.file {
            let file = Settings::load(path).map_err(|e| Failure::Usage(e.to_string()))?;
            settings.merge(&file);
        }
        settings.merge(&self.flags);
        let config = settings.to_config().map_err(|e| Failure::Usage(e.to_string()))?;
        if config.threads > 0 {
            // the global pool can only be set once per process
            let _ = rayon::ThreadPoolBuilder::new().num_threads(config.threads).build_global();
        }
        Ok(config)
    }
}

/// Output files written so far, removed again if the command fails.
#[derive(Default)]
struct Outputs(Vec<PathBuf>);

impl Outputs {
    fn write(&mut self, path: &Path, text: &str, stage: &'static str) -> Result<(), Failure> {
        self.0.push(path.to_path_buf());
        std::fs::write(path, text).map_err(|e| Failure::Runtime { stage, message: format!("{}: {e}", path.display()) })
    }

    fn track(&mut self, path: &Path) {
        self.0.push(path.to_path_buf());
    }

    fn discard(&self) {
        for p in &self.0 {
            let _ = std::fs::remove_file(p);
        }
    }
}

fn load_cloud(path: &Path) -> Result<LineCloud, Failure> {
    load_line_cloud(path).map_err(|e| runtime("load")(&e))
}

fn load_planes(path: &Path, cloud: &LineCloud) -> Result<Detection, Failure> {
    let doc = PlanesDocument::load(path).map_err(|e| runtime("load")(&e))?;
    Detection::from_document(&doc, cloud).map_err(|e| runtime("load")(&e))
}

fn run(cmd: Cmd, out: &mut Outputs) -> Result<(), Failure> {
    match cmd {
        Cmd::Detect { input, output, config } => {
            let config = config.resolve(Settings::default())?;
            let cloud = load_cloud(&input)?;
            let d = detect(&cloud, &config).map_err(|e| runtime(e.stage())(&e))?;
            out.write(&output, &d.to_document().to_json(), "detect")?;
            eprintln!("{} planes detected, {} after fusion", d.detected, d.state.plane_count());
        }
        Cmd::Arrange { input, planes, output, config } => {
            let config = config.resolve(Settings::default())?;
            let cloud = load_cloud(&input)?;
            let d = load_planes(&planes, &cloud)?;
            let complex = arrange(&cloud, &d.state, &config).map_err(|e| runtime(e.stage())(&e))?;
            out.write(&output, &complex.dump(), "arrange")?;
            eprintln!("{} cells, {} faces", complex.cell_count(), complex.faces().len());
        }
        Cmd::Reconstruct { input, output, planes, report, timings, config } => {
            let config = config.resolve(Settings::default())?;
            let cloud = load_cloud(&input)?;
            let planes = planes.map(|p| load_planes(&p, &cloud)).transpose()?;
            let r = reconstruct(&cloud, &config, planes).map_err(|e| runtime(e.stage())(&e))?;
            out.track(&output);
            save_mesh(&r.mesh, &output).map_err(|e| runtime("write")(&e))?;
            if let Some(p) = report {
                out.write(&p, &r.report.to_json(), "write")?;
            }
            if let Some(p) = timings {
                out.write(&p, &r.timings.to_json(), "write")?;
            }
            let v = &r.report.validation;
            eprintln!(
                "{} planes, {} faces, watertight {}, self-intersections {}",
                r.report.planes_fused,
                v.faces,
                v.is_watertight(),
                v.self_intersections
            );
        }
        Cmd::Eval { recon, truth, samples, seed, output, histogram } => {
            let r = load_mesh(&recon).map_err(|e| runtime("load")(&e))?;
            let t = load_mesh(&truth).map_err(|e| runtime("load")(&e))?;
            let cmp = compare_surfaces(&r, &t, samples, seed, &SummaryOptions::default())
                .map_err(|e| runtime("eval")(&e))?;
            let mut json = serde_json::to_string_pretty(&cmp).expect("summary serializes");
            json.push('\n');
            match output {
                Some(p) => out.write(&p, &json, "write")?,
                None => print!("{json}"),
            }
            if let Some(p) = histogram {
                out.write(&p, &cmp.precision.histogram_csv(), "write")?;
            }
        }
        Cmd::Synth(SynthCmd::Cube { noise, outliers, seed, output }) => {
            if !(noise >= 0.0) {
                return Err(Failure::Usage("noise must be nonnegative".into()));
            }
            out.track(&output);
            save_line_cloud(&synth_cube(noise, outliers, seed), &output).map_err(|e| runtime("write")(&e))?;
        }
        Cmd::Synth(SynthCmd::Room { noise, outliers, seed, output, truth }) => {
            let mut spec = RoomSpec::furnished(noise, seed);
            spec.outliers = match outliers {
                Some(n) => n,
                None => {
                    let (clean, _) = synth_room(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
                    clean.segments.len() / 10
                }
            };
            let (cloud, mesh) = synth_room(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
            out.track(&output);
            save_line_cloud(&cloud, &output).map_err(|e| runtime("write")(&e))?;
            if let Some(p) = truth {
                out.track(&p);
                save_mesh(&mesh, &p).map_err(|e| runtime("write")(&e))?;
            }
        }
        Cmd::CubeGrid { noise, outliers, runs, output, config } => {
            let mut base = Settings::default();
            for (k, v) in [("epsilon", "0.06"), ("n-iter", "100")] {
                base.set(k, v).expect("known key");
            }
            let config = config.resolve(base)?;
            let grid = cube_experiment(&noise, &outliers, runs, &config.detect, config.seed);
            match output {
                Some(p) => out.write(&p, &grid.to_csv(), "write")?,
                None => print!("{}", grid.to_csv()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let mut out = Outputs::default();
    match run(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            out.discard();
            match f {
                Failure::Usage(m) => {
                    eprintln!("error: {m}");
                    ExitCode::from(2)
                }
                Failure::Runtime { stage, message } => {
                    eprintln!("error [{stage}]: {message}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
