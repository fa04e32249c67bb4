use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use ldpc_noc::channel::{quantization_sweep, run_ber, throughput_mbps, to_csv, StopRule};
use ldpc_noc::codes::standard::{builtin, builtin_names};
use ldpc_noc::codes::{build_check_graph, load_code, message_count, CodeFormat, ParityCheckMatrix};
use ldpc_noc::config::{
    gen_config, min_buffer_size, simulate_upload, Alignment, ConfigImage, ConfigOptions, UploadOptions, UploadPlan,
};
use ldpc_noc::decoder::{decode_layered_nms, DecodeParams, FixedPoint, FloatingPoint, QFormat};
use ldpc_noc::mapper::{cutset, partition_kway, partition_random, Mapping, WeightedGraph};
use ldpc_noc::noc::{build_schedule, simulate_iteration, NocTrace, Replayer, Topology};
use ldpc_noc::{FixedLayeredDecoder, FloatLayeredDecoder, SpaDecoder};

use crate::manifest::{write, write_json, RunManifest};
use crate::{DecoderKind, Format, Global, SwitchArgs, ThroughputArgs};

/// Seeds averaged for the random-partition baseline.
const BASELINE_SEEDS: u64 = 20;
/// Frames decoded by the pipeline's replay check.
const SMOKE_FRAMES: u64 = 5;

fn load(g: &Global) -> Result<ParityCheckMatrix> {
    let format = g.format.map(|f| match f {
        Format::Alist => CodeFormat::Alist,
        Format::Qc => CodeFormat::Qc,
    });
    let path = Path::new(&g.code);
    if path.is_file() {
        return load_code(path, format).with_context(|| format!("loading {}", path.display()));
    }
    let dir = g.data_dir.clone().unwrap_or_else(ldpc_noc::codes::standard::data_dir);
    for ext in ["qc", "alist"] {
        let p = dir.join(format!("{}.{ext}", g.code));
        if p.is_file() {
            return load_code(&p, format).with_context(|| format!("loading {}", p.display()));
        }
    }
    if builtin_names().contains(&g.code.as_str()) {
        return Ok(builtin(&g.code)?);
    }
    bail!(
        "no code '{}': not a file, not in {}, and not one of {}",
        g.code,
        dir.display(),
        builtin_names().join(", ")
    )
}

fn params(g: &Global) -> Result<DecodeParams> {
    let p = DecodeParams {
        alpha: g.alpha,
        it_max: g.itmax,
        format: g.quant.parse::<QFormat>()?,
        early_stop: true,
    };
    p.validate()?;
    Ok(p)
}

#[derive(Serialize)]
struct CodeSummary {
    label: String,
    n: usize,
    m: usize,
    n_d: usize,
    layers: usize,
    messages: usize,
    check_pairs: usize,
    design_rate: f64,
}

fn summarize(h: &ParityCheckMatrix) -> CodeSummary {
    CodeSummary {
        label: h.label().to_string(),
        n: h.n_cols(),
        m: h.n_rows(),
        n_d: h.max_row_degree(),
        layers: h.layers().map_or(0, <[_]>::len),
        messages: message_count(h),
        check_pairs: build_check_graph(h).edge_count(),
        design_rate: h.design_rate(),
    }
}

pub fn inspect(g: &Global) -> Result<bool> {
    let h = load(g)?;
    let s = summarize(&h);
    println!("code        {}", s.label);
    println!("N           {}", s.n);
    println!("M           {}", s.m);
    println!("N_d         {}", s.n_d);
    println!("layers      {}", s.layers);
    println!("|E|         {} messages per iteration", s.messages);
    println!("check pairs {}", s.check_pairs);
    println!("rate        {:.4}", s.design_rate);
    if let Some(dir) = &g.out {
        write_json(dir, "inspect.json", &RunManifest::new("inspect", g, Some(&h), json!({})), &s)?;
    }
    Ok(true)
}

struct Partitioned {
    h: ParityCheckMatrix,
    graph: WeightedGraph,
    mapping: Mapping,
    cut: u64,
    baseline: f64,
}

fn partitioned(g: &Global, p: usize) -> Result<Partitioned> {
    let h = load(g).context("load")?;
    let graph = WeightedGraph::from_message_chains(&h).context("partition")?;
    let mut mapping = partition_kway(&graph, p, g.seed).context("partition")?;
    mapping.apply_serving_order(&h).context("partition")?;
    let cut = cutset(&graph, &mapping);
    let baseline = (0..BASELINE_SEEDS)
        .map(|s| partition_random(&graph, p, g.seed.wrapping_add(s)).map(|m| cutset(&graph, &m)))
        .sum::<ldpc_noc::Result<u64>>()
        .context("partition")? as f64
        / BASELINE_SEEDS as f64;
    Ok(Partitioned {
        h,
        graph,
        mapping,
        cut,
        baseline,
    })
}

pub fn partition(g: &Global) -> Result<bool> {
    let p = g.torus_n * g.torus_n;
    let r = partitioned(g, p)?;
    println!("PEs {p}, k-way cutset {}, random baseline {:.1} (mean of {BASELINE_SEEDS} seeds)", r.cut, r.baseline);
    println!("sizes {:?}", r.mapping.sizes());
    if let Some(dir) = &g.out {
        let m = RunManifest::new("partition", g, Some(&r.h), json!({}));
        write_json(dir, "mapping.json", &m, &r.mapping)?;
        write_json(
            dir,
            "partition.json",
            &m,
            &json!({ "cutset": r.cut, "random_baseline": r.baseline, "total_messages": r.graph.total_edge_weight() }),
        )?;
    }
    Ok(true)
}

struct Simulated {
    part: Partitioned,
    trace: NocTrace,
}

fn simulated(g: &Global, n: usize) -> Result<Simulated> {
    let part = partitioned(g, n * n)?;
    let schedule = build_schedule(&part.h, &part.mapping)
        .context("schedule")?
        .with_pe_delay(g.pe_delay);
    let topo = Topology::new(n).context("simulate")?;
    let trace = simulate_iteration(&topo, &schedule, g.seed).context("simulate")?;
    Ok(Simulated { part, trace })
}

pub fn simulate(g: &Global) -> Result<bool> {
    let s = simulated(g, g.torus_n)?;
    let sum = s.trace.summary()?;
    println!(
        "{}x{} torus: k_i {} (lower bound {}), PE cycles {}, {} network / {} bypass messages",
        sum.n,
        sum.n,
        sum.k_i,
        s.trace.k_lower_bound(),
        sum.pe_cycles,
        sum.network_messages,
        sum.bypass_messages
    );
    println!("max FIFO occupancy (N S E W L) {:?}, trace {}", sum.max_fifo_occupancy, sum.digest);
    if let Some(dir) = &g.out {
        let m = RunManifest::new("simulate", g, Some(&s.part.h), json!({}));
        write_json(dir, "trace.json", &m, &s.trace)?;
        write_json(dir, "summary.json", &m, &sum)?;
    }
    Ok(true)
}

fn write_image(dir: &Path, m: &RunManifest, img: &ConfigImage) -> Result<()> {
    write_json(dir, "config.json", m, img)?;
    let mut bin = Vec::new();
    img.write_binary(&mut bin)?;
    write(dir, "config.bin", &bin)
}

pub fn genconfig(g: &Global, pow2_depths: bool) -> Result<bool> {
    let s = simulated(g, g.torus_n)?;
    let img = gen_config(&s.trace, &s.part.mapping, &s.part.h, ConfigOptions { pow2_depths })
        .context("genconfig")?;
    println!(
        "image: {} nodes, {} RM words each, N_pc {}, N_d {}, FIFO depths (N S E W L) {:?}",
        img.nodes.len(),
        img.k_i,
        img.n_pc,
        img.n_d,
        img.max_fifo_depth()
    );
    if let Some(dir) = &g.out {
        let m = RunManifest::new("genconfig", g, Some(&s.part.h), json!({ "pow2_depths": pow2_depths }));
        write_image(dir, &m, &img)?;
        write_json(dir, "mapping.json", &m, &s.part.mapping)?;
        write_json(dir, "trace.json", &m, &s.trace)?;
    }
    Ok(true)
}

/// Reads a configuration image written by this tool, bare or stamped.
fn read_image(path: &Path) -> Result<ConfigImage> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let body = v.get("result").cloned().unwrap_or(v);
    serde_json::from_value(body).with_context(|| format!("{} is not a configuration image", path.display()))
}

pub fn switch(g: &Global, a: &SwitchArgs) -> Result<bool> {
    let k_of = |path: &Option<std::path::PathBuf>, k: Option<u64>, which: &str| -> Result<(u64, Option<usize>)> {
        match (path, k) {
            (Some(p), _) => {
                let img = read_image(p)?;
                Ok((img.iteration_cycles(), Some(img.n)))
            }
            (None, Some(k)) => Ok((k, None)),
            (None, None) => bail!("give --{which} <image> or --k{}", if which == "from" { 1 } else { 2 }),
        }
    };
    let (k1, n1) = k_of(&a.from, a.k1, "from")?;
    let (k2, n2) = k_of(&a.to, a.k2, "to")?;
    if let (Some(x), Some(y)) = (n1, n2) {
        if x != y {
            bail!("images are for {x}x{x} and {y}x{y} tori");
        }
    }
    let n = n1.or(n2).unwrap_or(g.torus_n) as u64;
    let bound = min_buffer_size(k1, k2, n);
    let opts = UploadOptions { gap: a.gap };
    let b = a.buffer.unwrap_or_else(|| UploadPlan::unchecked(k1, k2, n, 0, opts).min_b);
    let plan = UploadPlan::unchecked(k1, k2, n, b, opts);
    let report = simulate_upload(&plan, Alignment::Worst);
    let pass = report.pass();
    println!("k1 {k1}, k2 {k2}, bus width {n}: buffer bound {bound} words (with gap {}: {})", a.gap, plan.min_b);
    println!(
        "B {b}: w1 {} w2 {} w3 {} (sum {}), planner says {}",
        plan.w1,
        plan.w2,
        plan.w3,
        plan.w1 + plan.w2 + plan.w3,
        if plan.feasible { "feasible" } else { "infeasible" }
    );
    println!(
        "simulated over {} bus alignments: C1 intact {}, C2 ready {}, no stall {}",
        report.tried.len(),
        report.c1_intact,
        report.c2_ready,
        report.no_stall
    );
    match &report.first_violation {
        Some((cycle, what)) => println!("FAIL at cycle {cycle} (alignment {}): {what}", report.alignment),
        None => println!("PASS"),
    }
    if let Some(dir) = &g.out {
        let m = RunManifest::new("switch", g, None, serde_json::to_value(a)?);
        let mut brief = report.clone();
        brief.events.clear();
        write_json(dir, "switch.json", &m, &json!({ "plan": plan, "report": brief, "pass": pass }))?;
    }
    Ok(pass)
}

pub fn ber(g: &Global, kind: DecoderKind, compare: &[String]) -> Result<bool> {
    let h = load(g)?;
    let p = params(g)?;
    if g.snr.is_empty() {
        bail!("--snr needs at least one value");
    }
    let stop = StopRule {
        min_bit_errors: g.min_errors,
        max_frames: g.max_frames,
    };
    let points = match kind {
        DecoderKind::Nms => run_ber(&FixedLayeredDecoder::new(&h, FixedPoint::new(p.format, p.alpha)?, p)?, &g.snr, stop, g.seed)?,
        DecoderKind::NmsFloat => {
            run_ber(&FloatLayeredDecoder::new(&h, FloatingPoint::new(p.alpha)?, p)?, &g.snr, stop, g.seed)?
        }
        DecoderKind::Spa => run_ber(&SpaDecoder::new(&h, p)?, &g.snr, stop, g.seed)?,
    };
    println!("{:>7} {:>8} {:>10} {:>10} {:>10} {:>6}", "snr_db", "frames", "bit_err", "ber", "fer", "iters");
    for q in &points {
        println!(
            "{:>7.2} {:>8} {:>10} {:>10.3e} {:>10.3e} {:>6.2}",
            q.snr_db, q.frames, q.bit_errors, q.ber, q.fer, q.avg_iterations
        );
    }
    let sweep = if compare.is_empty() {
        None
    } else {
        let formats = compare.iter().map(|s| s.parse::<QFormat>()).collect::<ldpc_noc::Result<Vec<_>>>()?;
        let rows = quantization_sweep(&h, &formats, g.snr[0], &p, stop, g.seed)?;
        for r in &rows {
            println!("format {}: BER {:.3e} over {} frames at {} dB", r.format, r.point.ber, r.point.frames, g.snr[0]);
        }
        Some(rows)
    };
    if let Some(dir) = &g.out {
        let m = RunManifest::new("ber", g, Some(&h), json!({ "decoder": kind, "compare_quant": compare }));
        write(dir, "ber.csv", to_csv(&points)?.as_bytes())?;
        write_json(dir, "ber.json", &m, &json!({ "points": points, "quantization": sweep }))?;
    }
    Ok(true)
}

pub fn throughput(g: &Global, a: &ThroughputArgs) -> Result<bool> {
    let k_i = match (a.k_i, &a.config) {
        (Some(k), _) => k,
        (None, Some(p)) => read_image(p)?.iteration_cycles(),
        (None, None) => bail!("give --k-i or --config"),
    };
    let n_bits = match a.n_bits {
        Some(n) => n,
        None => load(g)?.n_cols(),
    };
    let worst = throughput_mbps(n_bits, a.f_clk, k_i, f64::from(g.itmax))?;
    println!("N {n_bits}, f {:.1} MHz, k_i {k_i}", a.f_clk / 1e6);
    println!("worst case ({} iterations): {worst:.1} Mb/s", g.itmax);
    let avg = match a.avg_iterations {
        Some(it) => {
            let t = throughput_mbps(n_bits, a.f_clk, k_i, it)?;
            println!("average ({it} iterations): {t:.1} Mb/s");
            Some(t)
        }
        None => None,
    };
    if let Some(dir) = &g.out {
        let m = RunManifest::new("throughput", g, None, serde_json::to_value(a)?);
        write_json(dir, "throughput.json", &m, &json!({ "worst_mbps": worst, "average_mbps": avg }))?;
    }
    Ok(true)
}

#[derive(Serialize)]
struct PipelineReport {
    code: CodeSummary,
    torus_n: usize,
    pes: usize,
    cutset: u64,
    random_baseline: f64,
    network_messages: usize,
    bypass_messages: usize,
    k_i: u64,
    k_lower_bound: u64,
    pe_cycles: u64,
    iteration_cycles: u64,
    fifo_depths: [u32; 5],
    trace_digest: String,
    replay_frames: u64,
    replay_mismatches: u64,
    worst_throughput_mbps_300mhz: Option<f64>,
    pass: bool,
}

pub fn pipeline(g: &Global, pes: Option<usize>, pow2_depths: bool) -> Result<bool> {
    let n = match pes {
        Some(p) => Topology::for_pe_count(p).context("partition")?.side(),
        None => g.torus_n,
    };
    let s = simulated(g, n)?;
    let h = &s.part.h;
    let img = gen_config(&s.trace, &s.part.mapping, h, ConfigOptions { pow2_depths }).context("genconfig")?;
    let p = params(g)?;
    let replayer = Replayer::new(h, &s.part.mapping, &s.trace, &img, p).context("replay")?;
    let snr = g.snr.first().copied().unwrap_or(2.0);
    let mut mismatches = 0;
    for f in 0..SMOKE_FRAMES {
        let llr = ldpc_noc::channel::awgn_llrs(h.n_cols(), h.design_rate(), snr, ldpc_noc::seed::derive(g.seed, f))
            .context("replay")?;
        let got = replayer.decode(&llr).context("replay")?;
        let want = decode_layered_nms(h, &llr, &p).context("replay")?;
        mismatches += u64::from(got != want);
    }
    let sum = s.trace.summary()?;
    let cycles = img.iteration_cycles();
    let report = PipelineReport {
        code: summarize(h),
        torus_n: n,
        pes: n * n,
        cutset: s.part.cut,
        random_baseline: s.part.baseline,
        network_messages: sum.network_messages,
        bypass_messages: sum.bypass_messages,
        k_i: img.k_i,
        k_lower_bound: s.trace.k_lower_bound(),
        pe_cycles: img.pe_cycles,
        iteration_cycles: cycles,
        fifo_depths: img.max_fifo_depth(),
        trace_digest: sum.digest,
        replay_frames: SMOKE_FRAMES,
        replay_mismatches: mismatches,
        worst_throughput_mbps_300mhz: throughput_mbps(h.n_cols(), 300e6, cycles, f64::from(g.itmax)).ok(),
        pass: mismatches == 0,
    };
    println!("{} on {n}x{n}", report.code.label);
    println!("cutset {} (random baseline {:.1})", report.cutset, report.random_baseline);
    println!(
        "messages: {} network, {} bypass; k_i {} (bound {}), iteration {} cycles",
        report.network_messages, report.bypass_messages, report.k_i, report.k_lower_bound, cycles
    );
    println!("FIFO depths (N S E W L) {:?}", report.fifo_depths);
    if let Some(t) = report.worst_throughput_mbps_300mhz {
        println!("throughput at 300 MHz, {} iterations: {t:.1} Mb/s", g.itmax);
    }
    println!(
        "replay check: {}/{SMOKE_FRAMES} frames match the golden decoder: {}",
        SMOKE_FRAMES - mismatches,
        if report.pass { "PASS" } else { "FAIL" }
    );
    if let Some(dir) = &g.out {
        let m = RunManifest::new("pipeline", g, Some(h), json!({ "torus_n": n, "pow2_depths": pow2_depths }));
        write_json(dir, "mapping.json", &m, &s.part.mapping)?;
        write_json(dir, "trace.json", &m, &s.trace)?;
        write_image(dir, &m, &img)?;
        write_json(dir, "report.json", &m, &report)?;
    }
    Ok(report.pass)
}
