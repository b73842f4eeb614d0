//! Command-line driver: every experiment the library supports, as a seeded
//! subcommand emitting a machine-readable report.
//!
//! Reports embed the resolved configuration (command, seed, and every
//! numeric parameter) so a report file is self-describing; the worker count
//! and output path are deliberately excluded because they never influence
//! the result. Identical configuration and seed produce byte-identical
//! reports at any worker count.
//!
//! Exit codes: 0 on success, 1 on usage problems (bad flags, unreadable
//! input, out-of-domain parameters), 2 when a loaded artifact or a verified
//! invariant is broken (malformed class, failed decode, violated
//! postcondition).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use adlkit::bounds::{cover_to_rep_bound, labeled_joint, realizable_joint, rep_estimate, LossSpec};
use adlkit::chain::{build_chain_compressor, chain_variance_bound};
use adlkit::compressor::{
    amplify, ball_compressor, median_boost, verify_estimator, Compressor, EstimatorReport,
};
use adlkit::core::{
    second_moment_top_eig, EmpiricalDistribution, FiniteFunctionClass, Matrix, RandomStream,
};
use adlkit::cover::{
    exact_cover, greedy_cover, greedy_packing, vc_dimension, NormSpec, EXACT_COVER_MAX,
};
use adlkit::separation::{verify_separation, SeparationReport};
use adlkit::sketch::{sketch_codeword_bits_bound, sketch_codeword_len, sketch_once};
use adlkit::{AdlError, Result};

#[derive(Parser, Debug)]
#[command(
    name = "adlkit",
    version,
    about = "Seeded experiments on bit-budgeted compressors for finite function classes"
)]
pub struct Cli {
    /// Root seed for all randomness.
    #[arg(long, global = true, env = "ADLKIT_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormArg {
    /// Per-point sup norm.
    Sup,
    /// Per-point Euclidean norm.
    Euclidean,
}

impl NormArg {
    fn spec(self) -> NormSpec {
        match self {
            NormArg::Sup => NormSpec::sup(),
            NormArg::Euclidean => NormSpec::euclidean(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LossArg {
    /// Sup distance clipped at B.
    Absolute,
    /// Squared sup distance clipped at B.
    Squared,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Moment and code-length check of the raw sketch on a seeded vector.
    SketchVerify {
        /// Vector dimension.
        #[arg(long, default_value_t = 8)]
        d: usize,
        /// Vector norm (the ball radius the codec is sized for).
        #[arg(long = "M", default_value_t = 1.0)]
        radius: f64,
        /// Number of sketches.
        #[arg(long, default_value_t = 200_000)]
        trials: usize,
    },
    /// Verify the ball compressor, optionally amplified or median-boosted.
    Ball {
        /// Class file; when omitted, a seeded singleton class of norm M in
        /// R^d is generated.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Dimension of the generated vector (ignored with --input).
        #[arg(long, default_value_t = 8)]
        d: usize,
        /// Ball radius; with --input, defaults to the largest point norm.
        #[arg(long = "M")]
        radius: Option<f64>,
        /// Per-direction standard deviation target.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Amplify to accuracy eps (averages ceil(1/eps^2) copies).
        #[arg(long)]
        eps: Option<f64>,
        /// Median-boost across k copies.
        #[arg(long)]
        k: Option<usize>,
        /// Hypothesis to verify.
        #[arg(long, default_value_t = 0)]
        hypothesis: usize,
        /// Monte Carlo trials (at least 1000).
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
    },
    /// Covering numbers per scale, with packing lower bounds.
    Cover {
        /// Class file.
        #[arg(long)]
        input: PathBuf,
        /// Scales, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, value_enum, default_value_t = NormArg::Sup)]
        norm: NormArg,
        /// Force the greedy net even when the exact search is feasible.
        #[arg(long)]
        greedy: bool,
    },
    /// VC dimension of a binary scalar class.
    Vc {
        /// Class file.
        #[arg(long)]
        input: PathBuf,
    },
    /// Build the multiscale cover chain and verify the chain compressor.
    Chain {
        /// Class file (values must lie in [0, 1]).
        #[arg(long)]
        input: PathBuf,
        /// Scale exponent in (0, 1].
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, value_enum, default_value_t = NormArg::Sup)]
        norm: NormArg,
        /// Hypothesis to verify.
        #[arg(long, default_value_t = 0)]
        hypothesis: usize,
        /// Monte Carlo trials (at least 1000).
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
    /// Hadamard-cube separation: covers collapse, sketch cost does not.
    Separation {
        /// Cube dimension.
        #[arg(long, default_value_t = 4)]
        d: usize,
        /// Embedding exponent in (0, 1].
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Cover scales, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.05, 0.01])]
        eps: Vec<f64>,
        /// Monte Carlo trials for the sketch cost (at least 1000).
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
    },
    /// Measured representativeness against the description-length bound.
    Repbound {
        /// Class file (values must lie in [0, 1] for the budget chain).
        #[arg(long)]
        input: PathBuf,
        /// Sample sizes, comma separated (each at least 2).
        #[arg(long, value_delimiter = ',', default_values_t = vec![10, 40, 160])]
        m: Vec<usize>,
        /// Target hypothesis supplying the realizable labels.
        #[arg(long, default_value_t = 0)]
        target: usize,
        #[arg(long, value_enum, default_value_t = LossArg::Absolute)]
        loss: LossArg,
        /// Loss clip bound B.
        #[arg(long = "B", default_value_t = 1.0)]
        clip: f64,
        /// Failure probability for the high-probability term (omitted: mean
        /// bound only).
        #[arg(long)]
        delta: Option<f64>,
        /// Chain exponent used for the description budget.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Monte Carlo trials per sample size.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

/// Parse, run, and translate the outcome into the documented exit codes.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 for broken artifacts and violated invariants, 1 for everything else.
pub fn exit_code(err: &AdlError) -> u8 {
    match err {
        AdlError::InvalidClass { .. }
        | AdlError::NonSymmetric { .. }
        | AdlError::Decode { .. }
        | AdlError::DecodeDuringTrial { .. }
        | AdlError::InvariantViolated { .. } => 2,
        _ => 1,
    }
}

/// Execute one parsed invocation and write its report.
pub fn run(cli: &Cli) -> Result<()> {
    let text = match cli.workers {
        Some(workers) => {
            if workers == 0 {
                return Err(AdlError::InvalidParameter {
                    detail: "worker count must be at least 1".to_string(),
                });
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| AdlError::InvalidParameter {
                    detail: format!("could not build worker pool: {e}"),
                })?;
            pool.install(|| execute(cli))?
        }
        None => execute(cli)?,
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Cmd::SketchVerify { d, radius, trials } => {
            let report = run_sketch_verify(cli.seed, *d, *radius, *trials)?;
            render(cli.format, &report, |r| r.csv())
        }
        Cmd::Ball {
            input,
            d,
            radius,
            sigma,
            eps,
            k,
            hypothesis,
            trials,
        } => {
            let report = run_ball(
                cli.seed,
                input.as_deref(),
                *d,
                *radius,
                *sigma,
                *eps,
                *k,
                *hypothesis,
                *trials,
            )?;
            render(cli.format, &report, |r| r.csv())
        }
        Cmd::Cover {
            input,
            eps,
            norm,
            greedy,
        } => {
            let report = run_cover(cli.seed, input, eps, *norm, *greedy)?;
            render(cli.format, &report, |r| r.csv())
        }
        Cmd::Vc { input } => {
            let report = run_vc(cli.seed, input)?;
            render(cli.format, &report, |r| r.csv())
        }
        Cmd::Chain {
            input,
            a,
            norm,
            hypothesis,
            trials,
        } => {
            let report = run_chain(cli.seed, input, *a, *norm, *hypothesis, *trials)?;
            render(cli.format, &report, |r| r.csv())
        }
        Cmd::Separation {
            d,
            alpha,
            eps,
            trials,
        } => {
            let report = run_separation(cli.seed, *d, *alpha, eps, *trials)?;
            render(cli.format, &report, |r| r.csv())
        }
        Cmd::Repbound {
            input,
            m,
            target,
            loss,
            clip,
            delta,
            a,
            trials,
        } => {
            let report = run_repbound(
                cli.seed, input, m, *target, *loss, *clip, *delta, *a, *trials,
            )?;
            render(cli.format, &report, |r| r.csv())
        }
    }
}

fn render<T: Serialize>(format: Format, report: &T, csv: impl Fn(&T) -> String) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        Format::Csv => Ok(csv(report)),
    }
}

fn comment_block(pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (key, value) in pairs {
        let _ = writeln!(out, "# {key}={value}");
    }
    out
}

fn load_class_and_weights(
    path: &std::path::Path,
) -> Result<(FiniteFunctionClass, EmpiricalDistribution)> {
    let loaded = adlkit::core::load_class(path)?;
    let dist = match loaded.weights {
        Some(w) => w,
        None => EmpiricalDistribution::uniform(loaded.class.num_points()),
    };
    Ok((loaded.class, dist))
}

/// Deterministic direction of exact norm `radius` in `R^d` (all-zero when
/// the radius is 0).
fn seeded_vector(rng: &mut RandomStream, d: usize, radius: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if radius == 0.0 || norm == 0.0 {
        return vec![0.0; d];
    }
    for x in w.iter_mut() {
        *x *= radius / norm;
    }
    w
}

// ---------------------------------------------------------------------------
// sketch-verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct SketchVerifyConfig {
    pub command: &'static str,
    pub seed: u64,
    pub d: usize,
    #[serde(rename = "M")]
    pub radius: f64,
    pub trials: usize,
}

#[derive(Serialize)]
pub struct SketchVerifyReport {
    pub config: SketchVerifyConfig,
    /// The sketched vector itself, for reproduction.
    pub w: Vec<f64>,
    pub bias_max: f64,
    pub max_bias_z: f64,
    pub lambda_max: f64,
    /// Analytic envelope `1/4 + 2 |w|^2`.
    pub lambda_bound: f64,
    pub mean_bits: f64,
    /// Analytic expected-code-length envelope at this dimension and radius.
    pub bits_bound: f64,
}

impl SketchVerifyReport {
    fn csv(&self) -> String {
        let mut out = comment_block(&[
            ("command", self.config.command.to_string()),
            ("seed", self.config.seed.to_string()),
            ("d", self.config.d.to_string()),
            ("M", self.config.radius.to_string()),
            ("trials", self.config.trials.to_string()),
        ]);
        out.push_str("bias_max,max_bias_z,lambda_max,lambda_bound,mean_bits,bits_bound\n");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            self.bias_max,
            self.max_bias_z,
            self.lambda_max,
            self.lambda_bound,
            self.mean_bits,
            self.bits_bound
        );
        out
    }
}

fn run_sketch_verify(
    seed: u64,
    d: usize,
    radius: f64,
    trials: usize,
) -> Result<SketchVerifyReport> {
    if d == 0 {
        return Err(AdlError::InvalidParameter {
            detail: "dimension must be at least 1".to_string(),
        });
    }
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(AdlError::InvalidParameter {
            detail: format!("M must be nonnegative and finite, got {radius}"),
        });
    }
    if trials == 0 {
        return Err(AdlError::InvalidParameter {
            detail: "need at least one trial".to_string(),
        });
    }
    let root = RandomStream::from_seed(seed);
    let w = seeded_vector(&mut root.substream(0), d, radius);

    let mut s1 = vec![0.0f64; d];
    let mut s2 = vec![0.0f64; d];
    let mut bits_total: u64 = 0;
    let mut draw = root.substream(1);
    for _ in 0..trials {
        let o = sketch_once(&w, &mut draw)?;
        let v = o.value as f64;
        s1[o.index] += v;
        s2[o.index] += v * v;
        bits_total += sketch_codeword_len(&o, d) as u64;
    }

    let nf = trials as f64;
    let mut bias_max = 0.0f64;
    let mut max_bias_z = 0.0f64;
    for i in 0..d {
        let mean = s1[i] / nf;
        let var = (s2[i] / nf - mean * mean).max(0.0);
        let bias = (mean - w[i]).abs();
        bias_max = bias_max.max(bias);
        if bias > 0.0 {
            let std_err = (var / nf).sqrt();
            max_bias_z = max_bias_z.max(if std_err > 0.0 {
                bias / std_err
            } else {
                f64::INFINITY
            });
        }
    }
    let u: Vec<f64> = s1.iter().map(|s| s / nf).collect();
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut v = if i == j { s2[i] / nf } else { 0.0 };
            v -= u[i] * w[j] + w[i] * u[j];
            v += w[i] * w[j];
            m.set(i, j, v);
        }
    }
    let lambda_max = second_moment_top_eig(&m)?;
    let norm_sq: f64 = w.iter().map(|x| x * x).sum();

    Ok(SketchVerifyReport {
        config: SketchVerifyConfig {
            command: "sketch-verify",
            seed,
            d,
            radius,
            trials,
        },
        w,
        bias_max,
        max_bias_z,
        lambda_max,
        lambda_bound: 0.25 + 2.0 * norm_sq,
        mean_bits: bits_total as f64 / nf,
        bits_bound: sketch_codeword_bits_bound(d, radius),
    })
}

// ---------------------------------------------------------------------------
// ball
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct BallConfig {
    pub command: &'static str,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub d: usize,
    #[serde(rename = "M")]
    pub radius: f64,
    pub sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub hypothesis: usize,
    pub trials: usize,
}

#[derive(Serialize)]
pub struct BallReport {
    pub config: BallConfig,
    /// Sketch copies averaged inside the base compressor.
    pub copies: usize,
    pub estimator: EstimatorReport,
}

impl BallReport {
    fn csv(&self) -> String {
        let mut out = comment_block(&[
            ("command", self.config.command.to_string()),
            ("seed", self.config.seed.to_string()),
            (
                "input",
                self.config.input.clone().unwrap_or_else(|| "-".to_string()),
            ),
            ("d", self.config.d.to_string()),
            ("M", self.config.radius.to_string()),
            ("sigma", self.config.sigma.to_string()),
            ("hypothesis", self.config.hypothesis.to_string()),
            ("trials", self.config.trials.to_string()),
        ]);
        out.push_str(
            "copies,claimed_sigma,claimed_bits,bias_max,max_bias_z,lambda_max,confidence_radius,mean_bits\n",
        );
        let e = &self.estimator;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            self.copies,
            e.claimed_sigma,
            e.claimed_bits,
            e.bias_max,
            e.max_bias_z,
            e.lambda_max,
            e.confidence_radius,
            e.mean_bits
        );
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn run_ball(
    seed: u64,
    input: Option<&std::path::Path>,
    d_flag: usize,
    radius_flag: Option<f64>,
    sigma: f64,
    eps: Option<f64>,
    k: Option<usize>,
    hypothesis: usize,
    trials: usize,
) -> Result<BallReport> {
    let root = RandomStream::from_seed(seed);
    let (class, dist, radius) = match input {
        Some(path) => {
            let (class, dist) = load_class_and_weights(path)?;
            let max_norm = (0..class.num_hypotheses())
                .flat_map(|h| (0..class.num_points()).map(move |x| (h, x)))
                .map(|(h, x)| {
                    class
                        .point_vector(h, x)
                        .iter()
                        .map(|v| v * v)
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(0.0, f64::max);
            (class, dist, radius_flag.unwrap_or(max_norm))
        }
        None => {
            let radius = radius_flag.unwrap_or(1.0);
            if d_flag == 0 {
                return Err(AdlError::InvalidParameter {
                    detail: "dimension must be at least 1".to_string(),
                });
            }
            if !(radius.is_finite() && radius >= 0.0) {
                return Err(AdlError::InvalidParameter {
                    detail: format!("M must be nonnegative and finite, got {radius}"),
                });
            }
            let w = seeded_vector(&mut root.substream(0), d_flag, radius);
            let class = FiniteFunctionClass::new(1, 1, d_flag, w)?;
            (class, EmpiricalDistribution::uniform(1), radius)
        }
    };

    let base = ball_compressor(radius, class.dim(), sigma)?.with_num_points(class.num_points());
    let copies = base.copies();
    let mut compressor: Box<dyn Compressor> = Box::new(base);
    if let Some(eps) = eps {
        compressor = Box::new(amplify(compressor, eps)?);
    }
    if let Some(k) = k {
        compressor = Box::new(median_boost(compressor, k)?);
    }
    let estimator = verify_estimator(
        compressor.as_ref(),
        &class,
        &dist,
        hypothesis,
        trials,
        &root.substream(1),
    )?;

    Ok(BallReport {
        config: BallConfig {
            command: "ball",
            seed,
            input: input.map(|p| p.display().to_string()),
            d: class.dim(),
            radius,
            sigma,
            eps,
            k,
            hypothesis,
            trials,
        },
        copies,
        estimator,
    })
}

// ---------------------------------------------------------------------------
// cover
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct CoverConfig {
    pub command: &'static str,
    pub seed: u64,
    pub input: String,
    pub eps: Vec<f64>,
    pub norm: NormArg,
    pub greedy: bool,
}

#[derive(Serialize)]
pub struct CoverRow {
    pub eps: f64,
    pub size: usize,
    /// Hypothesis indices of the chosen centers.
    pub members: Vec<usize>,
    /// Certified lower bound from a 2-eps packing (equals `size` when the
    /// cover is exact).
    pub lower_bound: usize,
    /// "exact" when the size is the true covering number, otherwise "upper".
    pub certified: &'static str,
}

#[derive(Serialize)]
pub struct CoverReport {
    pub config: CoverConfig,
    pub num_hypotheses: usize,
    pub rows: Vec<CoverRow>,
}

impl CoverReport {
    fn csv(&self) -> String {
        let mut out = comment_block(&[
            ("command", self.config.command.to_string()),
            ("seed", self.config.seed.to_string()),
            ("input", self.config.input.clone()),
            ("norm", format!("{:?}", self.config.norm).to_lowercase()),
            ("greedy", self.config.greedy.to_string()),
        ]);
        out.push_str("eps,size,lower_bound,certified\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.eps, r.size, r.lower_bound, r.certified
            );
        }
        out
    }
}

fn run_cover(
    seed: u64,
    input: &std::path::Path,
    eps_list: &[f64],
    norm: NormArg,
    greedy: bool,
) -> Result<CoverReport> {
    let (class, dist) = load_class_and_weights(input)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(AdlError::InvalidParameter {
                detail: format!("eps must be nonnegative and finite, got {eps}"),
            });
        }
        let exact_feasible = !greedy && class.num_hypotheses() <= EXACT_COVER_MAX;
        let (members, certified) = if exact_feasible {
            (exact_cover(&class, &dist, eps, norm.spec())?, "exact")
        } else {
            (greedy_cover(&class, &dist, eps, norm.spec())?, "upper")
        };
        let lower_bound = if certified == "exact" {
            members.len()
        } else {
            greedy_packing(&class, &dist, 2.0 * eps, norm.spec())?
                .len()
                .min(members.len())
        };
        rows.push(CoverRow {
            eps,
            size: members.len(),
            members,
            lower_bound,
            certified,
        });
    }
    Ok(CoverReport {
        config: CoverConfig {
            command: "cover",
            seed,
            input: input.display().to_string(),
            eps: eps_list.to_vec(),
            norm,
            greedy,
        },
        num_hypotheses: class.num_hypotheses(),
        rows,
    })
}

// ---------------------------------------------------------------------------
// vc
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct VcConfig {
    pub command: &'static str,
    pub seed: u64,
    pub input: String,
}

#[derive(Serialize)]
pub struct VcReport {
    pub config: VcConfig,
    pub num_hypotheses: usize,
    pub num_points: usize,
    pub vc: usize,
}

impl VcReport {
    fn csv(&self) -> String {
        let mut out = comment_block(&[
            ("command", self.config.command.to_string()),
            ("seed", self.config.seed.to_string()),
            ("input", self.config.input.clone()),
        ]);
        out.push_str("num_hypotheses,num_points,vc\n");
        let _ = writeln!(
            out,
            "{},{},{}",
            self.num_hypotheses, self.num_points, self.vc
        );
        out
    }
}

fn run_vc(seed: u64, input: &std::path::Path) -> Result<VcReport> {
    let (class, _) = load_class_and_weights(input)?;
    let vc = vc_dimension(&class)?;
    Ok(VcReport {
        config: VcConfig {
            command: "vc",
            seed,
            input: input.display().to_string(),
        },
        num_hypotheses: class.num_hypotheses(),
        num_points: class.num_points(),
        vc,
    })
}

// ---------------------------------------------------------------------------
// chain
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct ChainConfig {
    pub command: &'static str,
    pub seed: u64,
    pub input: String,
    pub a: f64,
    pub norm: NormArg,
    pub hypothesis: usize,
    pub trials: usize,
}

#[derive(Serialize)]
pub struct ChainReport {
    pub config: ChainConfig,
    pub n_max: usize,
    pub zero_prob: f64,
    /// Exact expected code length from the per-scale accounting.
    pub expected_bits: f64,
    /// Analytic variance envelope (claimed sigma squared).
    pub variance_envelope: f64,
    pub scales: Vec<adlkit::chain::ScaleRow>,
    pub measured: EstimatorReport,
}

impl ChainReport {
    fn csv(&self) -> String {
        let mut out = comment_block(&[
            ("command", self.config.command.to_string()),
            ("seed", self.config.seed.to_string()),
            ("input", self.config.input.clone()),
            ("a", self.config.a.to_string()),
            ("norm", format!("{:?}", self.config.norm).to_lowercase()),
            ("hypothesis", self.config.hypothesis.to_string()),
            ("trials", self.config.trials.to_string()),
            ("zero_prob", self.zero_prob.to_string()),
            ("expected_bits", self.expected_bits.to_string()),
            ("variance_envelope", self.variance_envelope.to_string()),
            ("measured_mean_bits", self.measured.mean_bits.to_string()),
            ("measured_lambda_max", self.measured.lambda_max.to_string()),
        ]);
        out.push_str("n,eps,prob,cover_size,codeword_bits\n");
        for s in &self.scales {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.n, s.eps, s.prob, s.cover_size, s.codeword_bits
            );
        }
        out
    }
}

fn run_chain(
    seed: u64,
    input: &std::path::Path,
    a: f64,
    norm: NormArg,
    hypothesis: usize,
    trials: usize,
) -> Result<ChainReport> {
    let (class, dist) = load_class_and_weights(input)?;
    let use_exact = class.num_hypotheses() <= EXACT_COVER_MAX;
    let chain = adlkit::cover::build_cover_chain(&class, &dist, norm.spec(), use_exact)?;
    let compressor = build_chain_compressor(&class, &chain, a)?;
    let root = RandomStream::from_seed(seed);
    let measured = verify_estimator(
        &compressor,
        &class,
        &dist,
        hypothesis,
        trials,
        &root.substream(1),
    )?;
    Ok(ChainReport {
        config: ChainConfig {
            command: "chain",
            seed,
            input: input.display().to_string(),
            a,
            norm,
            hypothesis,
            trials,
        },
        n_max: chain.n_max(),
        zero_prob: compressor.zero_prob(),
        expected_bits: compressor.expected_bits(),
        variance_envelope: chain_variance_bound(&chain, a),
        scales: compressor.scale_table(),
        measured,
    })
}

// ---------------------------------------------------------------------------
// separation
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct SeparationConfig {
    pub command: &'static str,
    pub seed: u64,
    pub d: usize,
    pub alpha: f64,
    pub eps: Vec<f64>,
    pub trials: usize,
}

#[derive(Serialize)]
pub struct SeparationCliReport {
    pub config: SeparationConfig,
    pub report: SeparationReport,
}

impl SeparationCliReport {
    fn csv(&self) -> String {
        let mut out = comment_block(&[
            ("command", self.config.command.to_string()),
            ("seed", self.config.seed.to_string()),
            ("trials", self.config.trials.to_string()),
        ]);
        out.push_str("d,alpha,n,eps,cover_size,sketch_bits_at_sigma1\n");
        for c in &self.report.covers {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.report.d,
                self.report.alpha,
                self.report.n,
                c.eps,
                c.size,
                self.report.sketch.mean_bits
            );
        }
        out
    }
}

fn run_separation(
    seed: u64,
    d: usize,
    alpha: f64,
    eps: &[f64],
    trials: usize,
) -> Result<SeparationCliReport> {
    let root = RandomStream::from_seed(seed);
    let report = verify_separation(d, alpha, eps, trials, &root.substream(1))?;
    Ok(SeparationCliReport {
        config: SeparationConfig {
            command: "separation",
            seed,
            d,
            alpha,
            eps: eps.to_vec(),
            trials,
        },
        report,
    })
}

// ---------------------------------------------------------------------------
// repbound
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct RepboundConfig {
    pub command: &'static str,
    pub seed: u64,
    pub input: String,
    pub m: Vec<usize>,
    pub target: usize,
    pub label_source: &'static str,
    pub loss: LossArg,
    #[serde(rename = "B")]
    pub clip: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub a: f64,
    pub trials: usize,
}

#[derive(Serialize)]
pub struct RepboundRow {
    pub m: usize,
    pub bound: f64,
    pub measured_rep: f64,
    pub std_err: f64,
}

#[derive(Serialize)]
pub struct RepboundReport {
    pub config: RepboundConfig,
    /// Exact expected bits of the chain compressor on this class: the
    /// description budget the bound is evaluated at.
    pub budget_bits: f64,
    pub lipschitz: f64,
    pub rows: Vec<RepboundRow>,
}

impl RepboundReport {
    fn csv(&self) -> String {
        let mut out = comment_block(&[
            ("command", self.config.command.to_string()),
            ("seed", self.config.seed.to_string()),
            ("input", self.config.input.clone()),
            ("target", self.config.target.to_string()),
            ("label_source", self.config.label_source.to_string()),
            ("loss", format!("{:?}", self.config.loss).to_lowercase()),
            ("B", self.config.clip.to_string()),
            ("a", self.config.a.to_string()),
            ("trials", self.config.trials.to_string()),
            ("budget_bits", self.budget_bits.to_string()),
        ]);
        out.push_str("m,bound,measured_rep,std_err\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.m, r.bound, r.measured_rep, r.std_err);
        }
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn run_repbound(
    seed: u64,
    input: &std::path::Path,
    m_list: &[usize],
    target: usize,
    loss_arg: LossArg,
    clip: f64,
    delta: Option<f64>,
    a: f64,
    trials: usize,
) -> Result<RepboundReport> {
    let loaded = adlkit::core::load_class(input)?;
    let class = loaded.class;
    let dist = loaded
        .weights
        .unwrap_or_else(|| EmpiricalDistribution::uniform(class.num_points()));
    let loss = match loss_arg {
        LossArg::Absolute => LossSpec::absolute_clipped(clip)?,
        LossArg::Squared => LossSpec::squared_clipped(clip)?,
    };
    let use_exact = class.num_hypotheses() <= EXACT_COVER_MAX;
    let chain = adlkit::cover::build_cover_chain(&class, &dist, NormSpec::sup(), use_exact)?;
    let budget = build_chain_compressor(&class, &chain, a)?.expected_bits();
    // A labels array in the class file supplies the joint distribution's
    // labels; otherwise they are copied from the target hypothesis.
    let (joint, label_source) = match &loaded.labels {
        Some(labels) => (labeled_joint(&class, &dist, labels)?, "file-labels"),
        None => (realizable_joint(&class, &dist, target)?, "realizable"),
    };

    let root = RandomStream::from_seed(seed);
    let mut rows = Vec::with_capacity(m_list.len());
    for (i, &m) in m_list.iter().enumerate() {
        let bound = cover_to_rep_bound(budget, m, loss.lipschitz(), loss.bound(), delta)?;
        let est = rep_estimate(
            &class,
            &joint,
            &loss,
            m,
            trials,
            &root.substream(2 + i as u64),
        )?;
        rows.push(RepboundRow {
            m,
            bound,
            measured_rep: est.mean_rep,
            std_err: est.std_err,
        });
    }
    Ok(RepboundReport {
        config: RepboundConfig {
            command: "repbound",
            seed,
            input: input.display().to_string(),
            m: m_list.to_vec(),
            target,
            label_source,
            loss: loss_arg,
            clip,
            delta,
            a,
            trials,
        },
        budget_bits: budget,
        lipschitz: loss.lipschitz(),
        rows,
    })
}
