use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dnastore::capacity::{self, TornCase};
use dnastore::channel::{fragment_stats, torn_transmit, transmit, NoiseSpec, TornSpec};
use dnastore::cluster_recon::{cluster_reads, reconstruct, score_clustering, LshParams, ReconstructMode};
use dnastore::codec_index::{bits_to_bytes, bytes_to_bits, IndexCodec, IndexLayout, InnerCodeSpec, OuterCodeSpec};
use dnastore::codec_linear::{decode_linear, edge_probe, gen_codebook, rank_probe, DEFAULT_EPSILON};
use dnastore::harness::{self, num, Execution, ExperimentConfig, Figure, OutputFormat, SweepSpec, Table};
use dnastore::sampling::SamplingSpec;
use dnastore::{Alphabet, RandomStream, ReadPool, Sequence};
use rand::Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "dnastore", version, about = "DNA storage channel simulator, capacity calculator and codec lab")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Run a JSON experiment config instead of a subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CapacityKind {
    NoiseFree,
    Bsc,
    Bec,
    MultiBec,
    MultiBsc,
    TornGeometric,
    TornUniform,
    TornFixed,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one capacity expression; prints {rate, regime, conditions}.
    Capacity {
        #[arg(long, value_enum)]
        channel: CapacityKind,
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        #[arg(long, default_value_t = 4.0)]
        beta: f64,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
        #[arg(long, default_value = "fixed:1")]
        sampling: SamplingSpec<f64>,
    },
    /// Storage/recovery rate pairs over coverage depth λ.
    Tradeoff {
        #[arg(long, default_value_t = 4.0)]
        beta: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,3,4,5")]
        lambda: Vec<f64>,
    },
    /// Push a random pool (or a torn sequence) through the channel.
    Simulate {
        #[arg(long = "M", alias = "m", default_value_t = 16)]
        m: usize,
        #[arg(long = "L", alias = "l", default_value_t = 32)]
        l: usize,
        #[arg(long, default_value = "binary")]
        alphabet: Alphabet,
        #[arg(long, default_value = "fixed:1")]
        sampling: SamplingSpec<f64>,
        #[arg(long, default_value = "id")]
        noise: NoiseSpec,
        /// Torn-paper spec such as `geom:0.01,del=const:0.2`; uses --n.
        #[arg(long)]
        torn: Option<String>,
        #[arg(long, default_value_t = 1 << 16)]
        n: usize,
        /// Input pool instead of a random one.
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    Codec {
        #[command(subcommand)]
        action: CodecAction,
    },
    /// Cluster a read pool and reconstruct one sequence per cluster.
    Cluster {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "quaternary")]
        alphabet: Alphabet,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        h: Option<usize>,
        #[arg(long)]
        bands: Option<usize>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value = "sub")]
        mode: ReconstructMode,
        /// Ground-truth origin per read, one integer per line.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    Probe {
        #[command(subcommand)]
        probe: ProbeCmd,
    },
    /// Evaluate a figure's closed forms on a grid.
    Sweep {
        #[arg(long, default_value = "capacity")]
        figure: String,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        beta: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum SchemeArg {
    Index,
    Linear,
}

#[derive(Args)]
struct CodecArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::Index)]
    scheme: SchemeArg,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    l: usize,
    #[arg(long, default_value = "binary")]
    alphabet: Alphabet,
    /// Outer code `n,k[,field_bits]`.
    #[arg(long)]
    outer: Option<OuterCodeSpec>,
    #[arg(long, default_value = "none")]
    inner: InnerCodeSpec,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    num_messages: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Erasure probability q0 assumed by the linear decoder.
    #[arg(long, default_value_t = 0.0)]
    q0: f64,
}

#[derive(Subcommand)]
enum CodecAction {
    /// Message bytes (MSB first) → read pool; for `linear`, the file holds the message number.
    Encode {
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long = "in")]
        input: PathBuf,
    },
    Decode {
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Encode a random message, transmit, decode; repeated `--trials` times.
    Trial {
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long, default_value = "fixed:1")]
        sampling: SamplingSpec<f64>,
        #[arg(long, default_value = "id")]
        noise: NoiseSpec,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum ProbeCmd {
    /// Full-rank frequency of random B×(1−δ)B binary matrices.
    Rank {
        #[arg(long, value_delimiter = ',', default_value = "100")]
        b: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        delta: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Consistency frequency of independently erased read pairs.
    Edges {
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "10")]
        l: Vec<usize>,
        #[arg(long, default_value_t = 100_000)]
        pairs: usize,
    },
}

/// Outcome of a command: "ran, but decoding failed" maps to exit code 2.
enum Outcome {
    Ok,
    DecodeFailed,
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_table(cli: &Cli, table: &Table) -> Result<()> {
    write_out(cli.out.as_deref(), &table.render(cli.format.into())?)
}

fn index_codec(a: &CodecArgs) -> Result<IndexCodec> {
    let outer = a.outer.context("index scheme needs --outer n,k")?;
    Ok(IndexCodec::new(IndexLayout::new(a.m, a.l, a.alphabet)?, outer, a.inner)?)
}

fn linear_codebook(a: &CodecArgs, seed: u64) -> Result<dnastore::codec_linear::LinearCodebook> {
    let b = a.b.context("linear scheme needs --b")?;
    let messages = a.num_messages.context("linear scheme needs --num-messages")?;
    // the codebook is shared by encoder and decoder through the seed
    let mut rng = RandomStream::new(seed, "codebook").rng();
    Ok(gen_codebook(a.m, a.l, b, messages, &mut rng)?)
}

fn run_config(cli: &Cli, path: &Path) -> Result<Outcome> {
    let cfg = ExperimentConfig::load(path)?;
    let exec = harness::execute(&cfg)?;
    let table = exec.table();
    let out = cli.out.clone().or(cfg.output.clone());
    write_out(out.as_deref(), &table.render(cli.format.into())?)?;
    if let Execution::Trials(run) = &exec {
        eprintln!("{}", serde_json::to_string(&run.summary)?);
        for w in &run.summary.warnings {
            eprintln!("warning: {w}");
        }
        if matches!(cfg.experiment, harness::Experiment::CodecTrial(_)) && run.summary.successes < run.summary.trials {
            return Ok(Outcome::DecodeFailed);
        }
    }
    Ok(Outcome::Ok)
}

fn capacity_cmd(kind: CapacityKind, p: f64, beta: f64, gamma: f64, sampling: &SamplingSpec<f64>) -> Result<Value> {
    let q0 = sampling.q0();
    let r = match kind {
        CapacityKind::NoiseFree => capacity::cap_noise_free(q0, beta),
        CapacityKind::Bsc => capacity::cap_bsc(q0, p, beta),
        CapacityKind::Bec => capacity::cap_bec(q0, p, beta),
        CapacityKind::MultiBec => capacity::cap_multi_bec(sampling, p, beta)?,
        CapacityKind::MultiBsc => capacity::cap_multi_bsc(sampling, p, beta)?,
        CapacityKind::TornGeometric => capacity::cap_torn(TornCase::Geometric { beta })?,
        CapacityKind::TornUniform => capacity::cap_torn(TornCase::Uniform { gamma })?,
        CapacityKind::TornFixed => capacity::cap_torn(TornCase::Fixed { beta })?,
    };
    Ok(serde_json::to_value(r)?)
}

fn random_pool(alphabet: Alphabet, m: usize, l: usize, stream: &RandomStream) -> Result<ReadPool> {
    let mut rng = stream.rng();
    let size = alphabet.size() as u8;
    let reads = (0..m)
        .map(|_| Sequence::new(alphabet, (0..l).map(|_| rng.random_range(0..size)).collect()))
        .collect::<dnastore::Result<Vec<_>>>()?;
    Ok(ReadPool::fixed(alphabet, reads)?)
}

fn codec_cmd(cli: &Cli, action: &CodecAction) -> Result<Outcome> {
    let master = RandomStream::new(cli.seed, "cli-codec");
    match action {
        CodecAction::Encode { codec, input } => {
            let bytes = fs::read(input)?;
            let pool = match codec.scheme {
                SchemeArg::Index => {
                    let c = index_codec(codec)?;
                    let mut bits = bytes_to_bits(&bytes);
                    if bits.len() > c.message_bits() {
                        bail!("message has {} bits, codec carries {}", bits.len(), c.message_bits());
                    }
                    bits.resize(c.message_bits(), false);
                    c.encode(&bits)?
                }
                SchemeArg::Linear => {
                    let msg: usize = String::from_utf8(bytes)?.trim().parse()?;
                    linear_codebook(codec, cli.seed)?.encode(msg)?
                }
            };
            write_out(cli.out.as_deref(), &pool.to_text())?;
            Ok(Outcome::Ok)
        }
        CodecAction::Decode { codec, input } => {
            let pool = ReadPool::load(codec.alphabet, input, false)?;
            match codec.scheme {
                SchemeArg::Index => {
                    let report = index_codec(codec)?.decode(&pool)?;
                    eprintln!(
                        "erasures={} substitutions={} inner_failures={}",
                        report.erasures,
                        report.substitutions,
                        report.inner_failures()
                    );
                    match report.message {
                        Some(bits) => {
                            let bytes = bits_to_bytes(&bits);
                            match cli.out.as_deref() {
                                Some(p) => fs::write(p, bytes)?,
                                None => std::io::stdout().write_all(&bytes)?,
                            }
                            Ok(Outcome::Ok)
                        }
                        None => Ok(Outcome::DecodeFailed),
                    }
                }
                SchemeArg::Linear => {
                    let book = linear_codebook(codec, cli.seed)?;
                    let out = decode_linear(&pool, &book, codec.q0, codec.epsilon)?;
                    match out.decoded {
                        Some(msg) => {
                            write_out(cli.out.as_deref(), &format!("{msg}\n"))?;
                            Ok(Outcome::Ok)
                        }
                        None => {
                            eprintln!("candidates={} underdetermined={}", out.candidates.len(), out.underdetermined);
                            Ok(Outcome::DecodeFailed)
                        }
                    }
                }
            }
        }
        CodecAction::Trial { codec, sampling, noise, trials } => {
            let mut table = Table::new(&["trial", "success", "reads"]);
            let mut failures = 0;
            for t in 0..*trials as u64 {
                let stream = master.derive(t);
                let (ok, reads) = match codec.scheme {
                    SchemeArg::Index => {
                        let c = index_codec(codec)?;
                        let mut rng = stream.child("message").rng();
                        let msg: Vec<bool> = (0..c.message_bits()).map(|_| rng.random()).collect();
                        let pool = c.encode(&msg)?;
                        let tr = transmit(&pool, sampling, noise, &mut stream.child("channel").rng())?;
                        (c.decode(&tr.output)?.message.as_deref() == Some(&msg[..]), tr.output.len())
                    }
                    SchemeArg::Linear => {
                        let book = linear_codebook(codec, stream.child("codebook").fingerprint())?;
                        let sent = stream.child("message").rng().random_range(0..book.num_messages());
                        let tr = transmit(&book.encode(sent)?, sampling, noise, &mut stream.child("channel").rng())?;
                        let out = decode_linear(&tr.output, &book, sampling.q0(), codec.epsilon)?;
                        (out.decoded == Some(sent), tr.output.len())
                    }
                };
                failures += usize::from(!ok);
                table.push(vec![json!(t), json!(ok), json!(reads)]);
            }
            emit_table(cli, &table)?;
            Ok(if failures > 0 { Outcome::DecodeFailed } else { Outcome::Ok })
        }
    }
}

fn cluster_cmd(cli: &Cli, cmd: &Command) -> Result<()> {
    let Command::Cluster { input, alphabet, k, h, bands, rows, tau, mode, truth } = cmd else {
        unreachable!()
    };
    let pool = ReadPool::load(*alphabet, input, false)?;
    let mut params = LshParams::defaults(*alphabet);
    params.k = k.unwrap_or(params.k);
    params.h = h.unwrap_or(params.h);
    params.bands = bands.unwrap_or(params.bands);
    params.rows = rows.unwrap_or(params.rows);
    params.tau = tau.unwrap_or(params.tau);
    params.seed = cli.seed;
    let assign = cluster_reads(&pool.reads, &params)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let mut clusters = String::new();
    for (i, c) in assign.ids.iter().enumerate() {
        clusters.push_str(&format!("{i} {c}\n"));
    }
    fs::write(dir.join("clusters.txt"), clusters)?;
    let recon = assign
        .members()
        .iter()
        .map(|m| {
            let reads: Vec<Sequence> = m.iter().map(|&i| pool.reads[i].clone()).collect();
            reconstruct(&reads, *alphabet, *mode)
        })
        .collect::<dnastore::Result<Vec<_>>>()?;
    ReadPool::variable(*alphabet, recon)?.save(dir.join("reconstructed.txt"))?;
    let mut metrics = json!({ "reads": pool.len(), "clusters": assign.count });
    if let Some(t) = truth {
        let origin = fs::read_to_string(t)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let s = score_clustering(&assign, &origin)?;
        metrics["precision"] = num(s.precision);
        metrics["recall"] = num(s.recall);
        metrics["accuracy"] = num(s.accuracy);
    }
    fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(&metrics)? + "\n")?;
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(cfg) = &cli.config {
        return run_config(cli, cfg);
    }
    let Some(cmd) = &cli.command else {
        bail!("give a subcommand or --config <file>");
    };
    match cmd {
        Command::Capacity { channel, p, beta, gamma, sampling } => {
            let v = capacity_cmd(*channel, *p, *beta, *gamma, sampling)?;
            write_out(cli.out.as_deref(), &(serde_json::to_string_pretty(&v)? + "\n"))?;
        }
        Command::Tradeoff { beta, lambda } => {
            let mut t = Table::new(&["lambda", "storage_rate", "recovery_rate"]);
            for &l in lambda {
                let r = capacity::tradeoff_region(l, *beta);
                t.push(vec![num(l), num(r.storage), num(r.recovery)]);
            }
            emit_table(cli, &t)?;
        }
        Command::Simulate { m, l, alphabet, sampling, noise, torn, n, input } => {
            let stream = RandomStream::new(cli.seed, "cli-simulate");
            let output = if let Some(spec) = torn {
                let spec = TornSpec::parse(spec, *n)?;
                let seq = random_pool(Alphabet::Binary, 1, *n, &stream.child("input"))?.reads.remove(0);
                let tr = torn_transmit(&seq, &spec, &mut stream.child("channel").rng())?;
                let st = fragment_stats(tr.fragments(), *n);
                eprintln!("fragments={} coverage_long={} reorder_cost={}", tr.fragments().len(), st.coverage_long, st.reorder_cost);
                tr.output
            } else {
                let pool = match input {
                    Some(p) => ReadPool::load(*alphabet, p, true)?,
                    None => random_pool(*alphabet, *m, *l, &stream.child("input"))?,
                };
                transmit(&pool, sampling, noise, &mut stream.child("channel").rng())?.output
            };
            write_out(cli.out.as_deref(), &output.to_text())?;
        }
        Command::Codec { action } => return codec_cmd(cli, action),
        Command::Cluster { .. } => cluster_cmd(cli, cmd)?,
        Command::Probe { probe } => {
            let stream = RandomStream::new(cli.seed, "cli-probe");
            match probe {
                ProbeCmd::Rank { b, delta, trials } => {
                    let mut t = Table::new(&["b", "delta", "trials", "full_rank_fraction"]);
                    for &bb in b {
                        for &d in delta {
                            let mut rng = stream.child(&format!("{bb}/{d}")).rng();
                            let f = rank_probe(bb, d, *trials, &mut rng)?;
                            t.push(vec![json!(bb), num(d), json!(trials), num(f)]);
                        }
                    }
                    emit_table(cli, &t)?;
                }
                ProbeCmd::Edges { p, l, pairs } => {
                    let mut t = Table::new(&["p", "l", "pairs", "observed", "expected", "z"]);
                    for &pp in p {
                        for &ll in l {
                            let mut rng = stream.child(&format!("{pp}/{ll}")).rng();
                            let e = edge_probe(pp, ll, *pairs, &mut rng)?;
                            t.push(vec![num(pp), json!(ll), json!(pairs), num(e.observed), num(e.expected), num(e.z_score())]);
                        }
                    }
                    emit_table(cli, &t)?;
                }
            }
        }
        Command::Sweep { figure, p, beta, lambda } => {
            let figure: Figure = figure.parse()?;
            let spec = SweepSpec { figure, p: p.clone(), beta: beta.clone(), lambda: lambda.clone() };
            emit_table(cli, &harness::sweep(&spec)?)?;
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    // usage errors exit 1 so that 2 always means "ran, but decoding failed"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::DecodeFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
