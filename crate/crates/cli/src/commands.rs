use std::fs::{self, File};
use std::io::BufWriter;

use anyhow::{bail, ensure, Context, Result};
use rangeann::datatools::{frequency_distribution, percent_captured, FrequencyTable};
use rangeann::eval::{
    brute_force_range, pareto_frontier, read_benchmark_csv, run_benchmark_detailed,
    write_benchmark_csv, BenchmarkRecord, RangeGroundTruth,
};
use rangeann::synth::{synth_clustered, SynthParams};
use rangeann::{
    build_index, io, par, BuildParams, DistanceKind, EarlyStopConfig, PointSet,
    QuantizedPointSet, RangeIndex, RangeParams, StopMetric, Strategy,
};

use crate::{
    AnalyzeFreqArgs, AnalyzeRadiusArgs, BuildArgs, Cli, Command, DataArgs, GtArgs, ParetoArgs,
    SearchArgs, SynthArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads.unwrap_or_else(par::default_threads);
    let (result, _) = par::with_threads(threads, move || match cli.command {
        Command::Build(args) => build(args),
        Command::Gt(args) => gt(args),
        Command::Search(args) => search(args, threads),
        Command::AnalyzeRadius(args) => analyze_radius(args),
        Command::AnalyzeFreq(args) => analyze_freq(args),
        Command::Synth(args) => synth(args),
        Command::Pareto(args) => pareto(args),
    });
    result
}

fn load(args: &DataArgs) -> Result<PointSet> {
    let metric: DistanceKind = args.metric.parse()?;
    io::read_points(&args.data, metric)
        .with_context(|| format!("reading points from {}", args.data.display()))
}

fn load_queries(path: &std::path::Path, points: &PointSet) -> Result<PointSet> {
    let queries = io::read_points(path, points.metric())
        .with_context(|| format!("reading queries from {}", path.display()))?;
    ensure!(
        queries.dim() == points.dim(),
        "queries have dimension {}, points have {}",
        queries.dim(),
        points.dim()
    );
    Ok(queries)
}

fn create(path: &std::path::Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn build(args: BuildArgs) -> Result<()> {
    let points = load(&args.data)?;
    let params = BuildParams {
        max_degree: args.max_degree,
        build_beam: args.build_beam,
        alpha: args.alpha,
        seed: args.seed,
        parallel: !args.sequential,
    };
    let t0 = std::time::Instant::now();
    let graph = build_index(&points, &params)?;
    io::save_graph(&graph, &args.out)?;
    println!(
        "built graph over {} points in {:.2}s: R={} L={} alpha={} avg degree {:.2}, start {:?}",
        points.len(),
        t0.elapsed().as_secs_f64(),
        params.max_degree,
        params.build_beam,
        params.alpha,
        graph.edge_count() as f64 / graph.len().max(1) as f64,
        graph.start()
    );
    Ok(())
}

fn gt(args: GtArgs) -> Result<()> {
    let points = load(&args.data)?;
    let queries = load_queries(&args.queries, &points)?;
    let gt = brute_force_range(&points, &queries, args.radius)?;
    io::write_gt(&gt, &args.out)?;
    let table = frequency_distribution(&gt);
    println!(
        "{} queries, {} results at radius {}",
        gt.num_queries(),
        gt.total(),
        args.radius
    );
    print_table(&table);
    Ok(())
}

fn search(args: SearchArgs, threads: usize) -> Result<()> {
    let points = load(&args.data)?;
    let queries = load_queries(&args.queries, &points)?;
    let graph = io::load_graph(&args.graph)?;
    let gt = io::read_gt(&args.gt, args.radius)?;
    ensure!(
        gt.num_queries() == queries.len(),
        "ground truth has {} queries, query file has {}",
        gt.num_queries(),
        queries.len()
    );
    let strategies = args
        .strategy
        .iter()
        .map(|s| s.parse::<Strategy>())
        .collect::<rangeann::Result<Vec<_>>>()?;
    let early_stop = if args.early_stop {
        let Some(esr) = args.esr else {
            bail!("--early-stop needs --esr");
        };
        EarlyStopConfig {
            enabled: true,
            visit_limit: args.vl,
            threshold: esr,
            metric: args.es_metric.parse::<StopMetric>()?,
        }
    } else {
        EarlyStopConfig::disabled()
    };

    let quantized = if args.quantize {
        Some(QuantizedPointSet::quantize(&points)?)
    } else {
        None
    };
    let mut index = RangeIndex::new(&graph, &points)?;
    if let Some(qp) = &quantized {
        index = index.with_quantized(qp)?;
    }

    let mut sweep = Vec::new();
    for &strategy in &strategies {
        for &beam in &args.beams {
            let mut params = RangeParams::new(args.radius, beam, strategy).with_early_stop(early_stop);
            params.lambda = args.lambda;
            sweep.push(params);
        }
    }
    let runs = run_benchmark_detailed(&index, &queries, &gt, &sweep, threads)?;
    let records: Vec<BenchmarkRecord> = runs.iter().map(|(r, _)| *r).collect();
    write_benchmark_csv(&records, create(&args.out)?)?;

    if let Some(dir) = &args.dump_dir {
        fs::create_dir_all(dir)?;
        for (record, batch) in &runs {
            let dumped = RangeGroundTruth {
                radius: args.radius,
                results: batch.results.iter().map(|r| r.neighbors.clone()).collect(),
            };
            let name = format!(
                "{}_b{}_es{}.bin",
                record.strategy, record.beam, record.early_stop as u8
            );
            io::write_gt(&dumped, dir.join(name))?;
        }
    }

    println!("strategy  b       qps          ap      dist_comps  visits/q  second/q  stopped");
    for (r, batch) in &runs {
        let t = &batch.totals;
        let per_q = |x: u64| x as f64 / t.queries.max(1) as f64;
        println!(
            "{:<9} {:<7} {:<12.1} {:<7.4} {:<11} {:<9.1} {:<9.1} {}",
            r.strategy,
            r.beam,
            r.qps,
            r.ap,
            r.distance_computations,
            per_q(t.initial_visits + t.second_phase_visits),
            per_q(t.second_phase_visits),
            t.early_stopped
        );
    }
    let mut frontier = Vec::new();
    for &strategy in &strategies {
        let own: Vec<BenchmarkRecord> = records
            .iter()
            .filter(|r| r.strategy == strategy)
            .copied()
            .collect();
        frontier.extend(pareto_frontier(&own));
    }
    println!("pareto frontier:");
    for r in &frontier {
        println!("  {} b={} qps={:.1} ap={:.4}", r.strategy, r.beam, r.qps, r.ap);
    }
    if let Some(path) = &args.pareto_out {
        write_benchmark_csv(&frontier, create(path)?)?;
    }
    Ok(())
}

fn analyze_radius(args: AnalyzeRadiusArgs) -> Result<()> {
    let points = load(&args.data)?;
    let queries = load_queries(&args.queries, &points)?;
    let radii = if !args.radii.is_empty() {
        args.radii.clone()
    } else {
        let (Some(lo), Some(hi)) = (args.rmin, args.rmax) else {
            bail!("give either --radii or both --rmin and --rmax");
        };
        ensure!(args.steps >= 2 && lo <= hi, "need --steps >= 2 and --rmin <= --rmax");
        (0..args.steps)
            .map(|k| lo + (hi - lo) * k as f32 / (args.steps - 1) as f32)
            .collect()
    };
    let curve = percent_captured(&points, &queries, &radii, args.sample, args.seed)?;
    curve.write_csv(create(&args.out)?)?;
    for ((r, f), norm) in curve
        .radii
        .iter()
        .zip(&curve.fraction)
        .zip(curve.normalized_radii())
    {
        println!("r={r:<12} normalized={norm:<6.3} captured={:.6}%", f * 100.0);
    }
    Ok(())
}

fn analyze_freq(args: AnalyzeFreqArgs) -> Result<()> {
    // bucketing only needs the counts, not the radius
    let gt = io::read_gt(&args.gt, f32::INFINITY)?;
    let table = frequency_distribution(&gt);
    table.write_csv(create(&args.out)?)?;
    print_table(&table);
    Ok(())
}

fn print_table(table: &FrequencyTable) {
    for (label, count) in FrequencyTable::labels().iter().zip(table.counts) {
        println!("  {label:>9}: {count}");
    }
    if table.has_overflow() {
        println!("  >100000: {} (overflow)", table.overflow);
    }
}

fn synth(args: SynthArgs) -> Result<()> {
    let ds = synth_clustered(&SynthParams::new(
        args.n,
        args.dim,
        args.clusters,
        args.spread,
        args.seed,
    ))?;
    io::write_points(&ds.points, &args.data_out)?;
    io::write_points(&ds.queries, &args.queries_out)?;
    let mut w = csv::Writer::from_writer(create(&args.out)?);
    w.write_record(["name", "radius"])?;
    for (name, r) in ["sparse", "medium", "dense"].iter().zip(ds.radii.as_array()) {
        w.write_record([name.to_string(), r.to_string()])?;
    }
    w.flush()?;
    println!(
        "{} points, {} queries, dim {}; radii sparse={} medium={} dense={}",
        ds.points.len(),
        ds.queries.len(),
        args.dim,
        ds.radii.sparse,
        ds.radii.medium,
        ds.radii.dense
    );
    Ok(())
}

fn pareto(args: ParetoArgs) -> Result<()> {
    let file = File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let records = read_benchmark_csv(file)?;
    let frontier = pareto_frontier(&records);
    write_benchmark_csv(&frontier, create(&args.out)?)?;
    println!("{} of {} records on the frontier", frontier.len(), records.len());
    Ok(())
}
