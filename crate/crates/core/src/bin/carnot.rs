use anyhow::{Context, Result};
use carnot::algebra::ScalarMode;
use carnot::commands::{self, Builder, ColorOptions, Common, EmbedOptions, FrameOptions, NetOptions, OscillatorOptions, SweepOptions};
use carnot::embed::Layout;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "carnot", about = "Carnot group nets, frames, oscillators and snowflake embeddings")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = ScalarArg::Rational)]
    scalar: ScalarArg,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalarArg {
    Rational,
    F64,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Orthogonal,
    Shared,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check Jacobi, grading and nilpotency of an algebra spec.
    Validate { spec: PathBuf },
    /// Greedy maximal net with separation, covering and volume checks.
    Net(NetArgs),
    /// Color a net so same-colored points are far apart.
    Color {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, default_value_t = 3.0)]
        factor: f64,
    },
    /// Extend the frame e1 on a flat-torus cloud.
    ExtendFrame {
        #[arg(long, default_value_t = 2000)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        torus_dim: usize,
        #[arg(long, default_value_t = 2.0)]
        k: f64,
        #[arg(long, default_value_t = 2490)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        write_frame: bool,
    },
    /// Exact Veronese wedge and the pasted oscillator.
    Oscillator {
        #[arg(long, default_value = "h3")]
        group: String,
        #[arg(long, default_value_t = 4.0)]
        radius: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 200)]
        exact_points: usize,
        #[arg(long, default_value_t = 1e-2)]
        h: f64,
        #[arg(long, default_value_t = 0.9)]
        threshold: f64,
    },
    /// Build an embedding of the discrete Heisenberg ball.
    Embed {
        #[arg(value_enum)]
        builder: BuilderArg,
        #[command(flatten)]
        embed: EmbedArgs,
    },
    /// Distortion of an embedding against d^(1-eps).
    Distortion {
        #[arg(long, value_enum, default_value_t = BuilderArg::Assouad)]
        builder: BuilderArg,
        #[command(flatten)]
        embed: EmbedArgs,
    },
    /// Distortion over several epsilons with a log-log slope fit.
    Sweep {
        #[arg(long, value_enum, default_value_t = BuilderArg::Assouad)]
        builder: BuilderArg,
        #[command(flatten)]
        embed: EmbedArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.125, 0.0625, 0.03125])]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 0.35)]
        slope_min: f64,
        #[arg(long, default_value_t = 0.65)]
        slope_max: f64,
    },
    /// Collect artifacts from the output directory into one report.
    Report,
}

#[derive(Args)]
struct NetArgs {
    #[arg(long, default_value = "h3")]
    group: String,
    #[arg(long, default_value_t = 8.0)]
    radius: f64,
    #[arg(long, default_value_t = 2.0)]
    delta: f64,
    #[arg(long, default_value_t = 3000)]
    points: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuilderArg {
    Assouad,
    Weierstrass,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long, default_value_t = 8.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.125)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    a: u32,
    #[arg(long, value_enum, default_value_t = LayoutArg::Orthogonal)]
    layout: LayoutArg,
    #[arg(long, default_value_t = -10)]
    m1: i32,
    #[arg(long, default_value_t = 250)]
    m2: i32,
}

impl NetArgs {
    fn into_opts(self) -> NetOptions {
        NetOptions { group: self.group, radius: self.radius, delta: self.delta, points: self.points }
    }
}

impl EmbedArgs {
    fn into_opts(self, builder: BuilderArg) -> EmbedOptions {
        EmbedOptions {
            builder: match builder {
                BuilderArg::Assouad => Builder::Assouad,
                BuilderArg::Weierstrass => Builder::Weierstrass,
            },
            radius: self.radius,
            epsilon: self.epsilon,
            a: self.a,
            layout: match self.layout {
                LayoutArg::Orthogonal => Layout::Orthogonal,
                LayoutArg::Shared => Layout::Shared,
            },
            m1: self.m1,
            m2: self.m2,
        }
    }
}

fn print(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let common = Common {
        seed: cli.seed,
        scalar: match cli.scalar {
            ScalarArg::Rational => ScalarMode::ExactRational,
            ScalarArg::F64 => ScalarMode::Floating,
        },
        tol: cli.tol,
        out: cli.out,
    };
    match cli.cmd {
        Cmd::Validate { spec } => {
            let v = commands::validate(&common, &spec).with_context(|| format!("validating {}", spec.display()))?;
            print(&v)?;
        }
        Cmd::Net(args) => print(&commands::net(&common, &args.into_opts())?)?,
        Cmd::Color { net, factor } => print(&commands::color(&common, &ColorOptions { net: net.into_opts(), factor })?)?,
        Cmd::ExtendFrame { points, torus_dim, k, dim, count, write_frame } => {
            let opts = FrameOptions { points, torus_dim, k, dim, count, write_frame };
            print(&commands::extend_frame_cmd(&common, &opts)?.0)?;
        }
        Cmd::Oscillator { group, radius, samples, exact_points, h, threshold } => {
            let opts = OscillatorOptions { group, radius, samples, exact_points, h, threshold };
            print(&commands::oscillator(&common, &opts)?)?;
        }
        Cmd::Embed { builder, embed } => print(&commands::embed(&common, &embed.into_opts(builder))?)?,
        Cmd::Distortion { builder, embed } => print(&commands::distortion_cmd(&common, &embed.into_opts(builder))?.0)?,
        Cmd::Sweep { builder, embed, epsilons, slope_min, slope_max } => {
            let opts = SweepOptions { embed: embed.into_opts(builder), epsilons, window: (slope_min, slope_max) };
            print(&commands::sweep(&common, &opts)?.0)?;
        }
        Cmd::Report => {
            let (_, summary) = commands::report(&common)?;
            println!("{summary}");
        }
    }
    Ok(())
}
