use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ppsim::BellKind;
use ppsim_cli::angles::parse_angle_list;
use ppsim_cli::{
    output_path, run, write_output, AngleSpec, CliError, Format, Protocol, RunConfig,
    OUTPUT_DIR_ENV,
};

/// Entanglement simulation with PPS-modulated classical fields.
#[derive(Debug, Parser)]
#[command(name = "ppsim", version)]
struct Cli {
    /// Run from a JSON config instead of a subcommand.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory for output files when --out is not given.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Args)]
struct Common {
    /// Field characteristic.
    #[arg(long, default_value_t = 3)]
    p: u32,
    /// Extension degree.
    #[arg(long, default_value_t = 2)]
    s: u32,
    /// Ascending monic coefficients, e.g. 2,1,1 for x^2+x+2.
    #[arg(long, value_delimiter = ',')]
    poly: Option<Vec<u32>>,
    /// Output file; stdout when neither this nor --out-dir is set.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, default_value_t = ppsim::DEFAULT_TOLERANCE)]
    tolerance: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    #[value(name = "psi+")]
    PsiPlus,
    #[value(name = "psi-")]
    PsiMinus,
    #[value(name = "phi+")]
    PhiPlus,
    #[value(name = "phi-")]
    PhiMinus,
}

impl From<VariantArg> for BellKind {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::PsiPlus => BellKind::PsiPlus,
            VariantArg::PsiMinus => BellKind::PsiMinus,
            VariantArg::PhiPlus => BellKind::PhiPlus,
            VariantArg::PhiMinus => BellKind::PhiMinus,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the PPS set and its verification report.
    Gen(Common),
    /// Run closure, balance, orthogonality and Gram checks.
    Verify(Common),
    /// Bell correlation over a grid or at given angles.
    Bell {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "psi+")]
        variant: VariantArg,
        /// Two comma-separated angles (radians or pi fractions).
        #[arg(long, allow_hyphen_values = true)]
        angles: Option<String>,
        /// Antilog exponents j of the field labels alpha^j.
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<usize>>,
        /// Grid points per angle.
        #[arg(long, default_value_t = 16)]
        grid: usize,
    },
    /// N-party GHZ correlation over a grid or at given angles.
    Ghz {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        parties: usize,
        #[arg(long, allow_hyphen_values = true)]
        angles: Option<String>,
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<usize>>,
        #[arg(long, default_value_t = 16)]
        grid: usize,
    },
    /// CHSH functional at a, a', b, b'.
    Chsh {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "psi+")]
        variant: VariantArg,
        /// a,a',b,b' (default pi/4,-pi/4,0,pi/2).
        #[arg(long, allow_hyphen_values = true)]
        angles: Option<String>,
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<usize>>,
    },
    /// Ensemble-averaged density matrix of a Bell state, or GHZ with --parties.
    Density {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "psi+")]
        variant: VariantArg,
        #[arg(long)]
        parties: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<usize>>,
    },
    /// NOT gate per slot against the coefficient law.
    NotDemo {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        /// Antilog exponent of the field label.
        #[arg(long)]
        label: Option<usize>,
    },
    /// Sequence and term counts for F = 2..parties.
    Resources {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        parties: Option<usize>,
    },
}

fn base(protocol: Protocol, c: Common) -> RunConfig {
    let mut cfg = RunConfig::new(protocol).with_field(c.p, c.s);
    cfg.poly = c.poly;
    cfg.output = c.out;
    cfg.format = c.format.map(|f| match f {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    });
    cfg.tolerance = c.tolerance;
    cfg
}

fn angle_specs(raw: Option<String>) -> Result<Option<Vec<AngleSpec>>, CliError> {
    raw.map(|r| {
        parse_angle_list(&r)
            .map(|v| v.into_iter().map(AngleSpec::Radians).collect())
            .map_err(CliError::Usage)
    })
    .transpose()
}

fn to_config(cmd: Command) -> Result<RunConfig, CliError> {
    Ok(match cmd {
        Command::Gen(c) => base(Protocol::Gen, c),
        Command::Verify(c) => base(Protocol::Verify, c),
        Command::Bell {
            common,
            variant,
            angles,
            labels,
            grid,
        } => {
            let mut cfg = base(Protocol::Bell, common);
            cfg.variant = Some(variant.into());
            cfg.angles = angle_specs(angles)?;
            cfg.labels = labels;
            cfg.grid = grid;
            cfg
        }
        Command::Ghz {
            common,
            parties,
            angles,
            labels,
            grid,
        } => {
            let mut cfg = base(Protocol::Ghz, common);
            cfg.parties = Some(parties);
            cfg.angles = angle_specs(angles)?;
            cfg.labels = labels;
            cfg.grid = grid;
            cfg
        }
        Command::Chsh {
            common,
            variant,
            angles,
            labels,
        } => {
            let mut cfg = base(Protocol::Chsh, common);
            cfg.variant = Some(variant.into());
            cfg.angles = angle_specs(angles)?;
            cfg.labels = labels;
            cfg
        }
        Command::Density {
            common,
            variant,
            parties,
            labels,
        } => {
            let mut cfg = base(Protocol::Density, common);
            cfg.variant = Some(variant.into());
            cfg.parties = parties;
            cfg.labels = labels;
            cfg
        }
        Command::NotDemo {
            common,
            alpha,
            beta,
            label,
        } => {
            let mut cfg = base(Protocol::NotDemo, common);
            cfg.alpha = alpha;
            cfg.beta = beta;
            cfg.labels = label.map(|l| vec![l]);
            cfg
        }
        Command::Resources { common, parties } => {
            let mut cfg = base(Protocol::Resources, common);
            cfg.parties = parties;
            cfg
        }
    })
}

fn load_config(cli: Cli) -> Result<(RunConfig, Option<PathBuf>), CliError> {
    let cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either --config or a subcommand, not both".into(),
            ))
        }
        (Some(path), None) => {
            let text = fs::read_to_string(&path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            RunConfig::from_json(&text)?
        }
        (None, Some(cmd)) => to_config(cmd)?,
        (None, None) => return Err(CliError::Usage("no subcommand; see --help".into())),
    };
    Ok((cfg, cli.out_dir))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (cfg, out_dir) = load_config(cli)?;
    let outcome = run(&cfg)?;
    match output_path(&cfg, out_dir.as_deref()) {
        Some(path) => {
            write_output(&path, &outcome.content)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(outcome.content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    match outcome.failure {
        Some(f) => Err(f.into()),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ppsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
