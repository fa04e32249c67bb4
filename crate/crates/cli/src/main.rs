use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod manifest;

#[derive(Parser, Debug)]
#[command(name = "ldpc-noc", version, about = "LDPC decoding on a statically routed torus NoC")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Bundled code name, a name found in the data directory, or a file path.
    #[arg(long, global = true, default_value = "wimax_2304_r12")]
    pub code: String,
    /// Code file format; inferred from the extension when omitted.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Side of the torus; the PE count is its square.
    #[arg(long = "torus-n", global = true, default_value_t = 5)]
    pub torus_n: usize,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1.15)]
    pub alpha: f64,
    #[arg(long, global = true, default_value_t = 10)]
    pub itmax: u32,
    /// Fixed-point format `n_m`: n bits, m of them fractional.
    #[arg(long, global = true, default_value = "8_1")]
    pub quant: String,
    /// Comma-separated Eb/N0 values in dB.
    #[arg(long, global = true, value_delimiter = ',', default_value = "2.0")]
    pub snr: Vec<f64>,
    #[arg(long = "min-errors", global = true, default_value_t = 100)]
    pub min_errors: u64,
    #[arg(long = "max-frames", global = true, default_value_t = 10_000)]
    pub max_frames: u64,
    /// Directory for machine-readable outputs.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for frame-parallel work; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Cycles between the last input of a check and its first output.
    #[arg(long = "pe-delay", global = true, default_value_t = ldpc_noc::noc::DEFAULT_PE_DELAY)]
    pub pe_delay: u64,
    /// Directory searched for code files by name.
    #[arg(long = "data-dir", global = true, env = "LDPC_NOC_DATA")]
    pub data_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Alist,
    Qc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    /// Fixed-point layered normalized min-sum.
    Nms,
    /// Double-precision layered normalized min-sum.
    NmsFloat,
    /// Double-precision flooding sum-product.
    Spa,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the size and message count of a code.
    Inspect,
    /// Map the checks onto the PEs.
    Partition,
    /// Simulate one decoding iteration on the torus.
    Simulate,
    /// Generate the configuration image.
    Genconfig {
        /// Round FIFO depths up to powers of two.
        #[arg(long)]
        pow2_depths: bool,
    },
    /// Plan and verify switching between two codes while decoding.
    Switch(SwitchArgs),
    /// Monte Carlo bit error rate.
    Ber {
        #[arg(long, value_enum, default_value = "nms")]
        decoder: DecoderKind,
        /// Also compare these fixed-point formats at the first SNR.
        #[arg(long = "compare-quant", value_delimiter = ',')]
        compare_quant: Vec<String>,
    },
    /// Throughput estimate `N f / (k_i it)`.
    Throughput(ThroughputArgs),
    /// Partition, simulate, generate the configuration and check it by
    /// replaying decoding against the golden decoder.
    Pipeline {
        /// PE count instead of --torus-n; must be a perfect square.
        #[arg(long)]
        pes: Option<usize>,
        #[arg(long)]
        pow2_depths: bool,
    },
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct SwitchArgs {
    /// Configuration image of the outgoing code.
    #[arg(long)]
    pub from: Option<PathBuf>,
    /// Configuration image of the incoming code.
    #[arg(long)]
    pub to: Option<PathBuf>,
    /// Iteration length of the outgoing code, instead of --from.
    #[arg(long)]
    pub k1: Option<u64>,
    /// Iteration length of the incoming code, instead of --to.
    #[arg(long)]
    pub k2: Option<u64>,
    /// Buffer size to verify; defaults to the smallest feasible one.
    #[arg(long)]
    pub buffer: Option<u64>,
    /// Unused words between the two codes in the buffer.
    #[arg(long, default_value_t = 0)]
    pub gap: u64,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct ThroughputArgs {
    /// Cycles per iteration; taken from --config when omitted.
    #[arg(long = "k-i")]
    pub k_i: Option<u64>,
    /// Configuration image supplying the iteration length.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Clock frequency in Hz.
    #[arg(long = "f-clk", default_value_t = 300e6)]
    pub f_clk: f64,
    /// Block length; taken from the code when omitted.
    #[arg(long = "n-bits")]
    pub n_bits: Option<usize>,
    /// Measured mean iterations for the average throughput.
    #[arg(long = "avg-iterations")]
    pub avg_iterations: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Runs the command; `Ok(false)` means an embedded verification failed.
fn run(cli: &Cli) -> Result<bool> {
    let g = &cli.global;
    match &cli.command {
        Command::Inspect => commands::inspect(g),
        Command::Partition => commands::partition(g),
        Command::Simulate => commands::simulate(g),
        Command::Genconfig { pow2_depths } => commands::genconfig(g, *pow2_depths),
        Command::Switch(a) => commands::switch(g, a),
        Command::Ber { decoder, compare_quant } => commands::ber(g, *decoder, compare_quant),
        Command::Throughput(a) => commands::throughput(g, a),
        Command::Pipeline { pes, pow2_depths } => commands::pipeline(g, *pes, *pow2_depths),
    }
}
