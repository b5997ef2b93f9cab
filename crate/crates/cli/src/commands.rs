use std::io::Write;
use std::time::Instant;

use obcut_core::dataio::{
    load_dense, load_sparse, make_blobs, normalize, save_result, write_trace, DenseOptions,
    NormalizationMode, NormalizationSpec, RunRecord,
};
use obcut_core::graph_cut::{enumerate_partitions, verify_equivalence};
use obcut_core::metrics::Scores;
use obcut_core::solver::fit_with_observer;
use obcut_core::types::ORTHONORMAL_TOL;
use obcut_core::{BipartiteGraph, DMatrix, Dataset, FitResult, SolverConfig, SolverState, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{fmt_value, loglog_slope, pm, table, Output};
use crate::{Cli, Command, DataArgs, Failure, SolverArgs};

/// Largest `|cut + 2·trace|` accepted by `verify`.
const IDENTITY_TOL: f64 = 1e-9;

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Fit {
            data,
            solver,
            variant,
        } => cmd_fit(cli, data, solver, *variant, out),
        Command::Sweep {
            data,
            solver,
            lambdas,
            anchor_grid,
        } => cmd_sweep(cli, data, solver, lambdas, anchor_grid, out),
        Command::Ablate { data, solver } => cmd_ablate(cli, data, solver, out),
        Command::Verify {
            samples,
            anchors,
            k,
            trials,
            budget,
        } => cmd_verify(cli, *samples, *anchors, *k, *trials, *budget, out),
        Command::Scale {
            sizes,
            dim,
            k,
            anchors,
            iters,
            lambda,
            separation,
            noise,
        } => {
            let plan = ScalePlan {
                sizes,
                dim: *dim,
                k: *k,
                anchors: *anchors,
                iters: *iters,
                lambda: *lambda,
                separation: *separation,
                noise: *noise,
            };
            cmd_scale(cli, &plan, out)
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::usage(format!("writing output: {e}")))
}

struct Loaded {
    data: Dataset,
    spec: NormalizationSpec,
    description: String,
}

fn load(args: &DataArgs) -> Result<Loaded, Failure> {
    let (raw, description) = if let Some(path) = &args.source.data {
        if !args.delimiter.is_ascii() {
            return Err(Failure::usage("delimiter must be a single ASCII character"));
        }
        let options = DenseOptions {
            delimiter: args.delimiter as u8,
            has_header: args.header,
            label_column: args.label_column,
        };
        (load_dense(path, &options)?, path.display().to_string())
    } else if let Some(path) = &args.source.sparse {
        (load_sparse(path)?, path.display().to_string())
    } else if let Some((n, k, d)) = args.source.blobs {
        let data = make_blobs(n, k, d, args.separation, args.noise, args.data_seed)?;
        let name = format!(
            "blobs {n}x{k} in {d}D (separation {}, noise {}, seed {})",
            args.separation, args.noise, args.data_seed
        );
        (data, name)
    } else {
        return Err(Failure::usage("one of --data, --sparse or --blobs is required"));
    };
    let (data, spec) = normalize(&raw, args.normalize);
    Ok(Loaded {
        data,
        spec,
        description,
    })
}

fn normalization_name(mode: NormalizationMode) -> &'static str {
    match mode {
        NormalizationMode::MinMax => "min-max",
        NormalizationMode::ZScore => "z-score",
        NormalizationMode::L2 => "l2",
        NormalizationMode::None => "none",
    }
}

fn resolve_k(solver: &SolverArgs, data: &Dataset) -> Result<usize, Failure> {
    solver
        .k
        .or_else(|| data.num_classes())
        .ok_or_else(|| Failure::usage("--k is required when the data has no labels"))
}

struct Run {
    seed: u64,
    result: FitResult,
    scores: Option<Scores>,
    violations: Vec<String>,
}

impl Run {
    fn objective(&self) -> f64 {
        self.result
            .state
            .objective_trace
            .last()
            .copied()
            .unwrap_or(self.result.state.initial_objective)
    }
}

/// Feasibility of every block plus per-iteration descent, checked after each iteration.
fn check_state(state: &SolverState, config: &SolverConfig, out: &mut Vec<String>) {
    let it = state.iteration;
    for v in state.graph.validate() {
        out.push(format!("iteration {it}: graph {v:?}"));
    }
    let err = state.embedding.orthonormality_error();
    if err > ORTHONORMAL_TOL {
        out.push(format!("iteration {it}: HᵀH deviates from I by {err:e}"));
    }
    let trace = &state.objective_trace;
    if let Some(&value) = trace.last() {
        let previous = if trace.len() >= 2 {
            trace[trace.len() - 2]
        } else {
            state.initial_objective
        };
        if value > previous + 1e-6 * (1.0 + value.abs()) {
            out.push(format!("iteration {it}: objective rose from {previous} to {value}"));
        }
        let bound = -config.lambda * (state.graph.num_samples() * state.graph.num_anchors()) as f64;
        if value < bound - 1e-9 {
            out.push(format!("iteration {it}: objective {value} below the bound {bound}"));
        }
    }
}

fn run_once(data: &Dataset, config: &SolverConfig, variant: Variant) -> Result<Run, Failure> {
    let mut violations = Vec::new();
    let result = fit_with_observer(data, config, variant, |state| {
        check_state(state, config, &mut violations)
    })?;
    let scores = match data.labels() {
        Some(labels) => Some(Scores::compute(result.indicator.assignments(), labels)?),
        None => None,
    };
    Ok(Run {
        seed: config.seed,
        result,
        scores,
        violations,
    })
}

fn run_repeats(
    cli: &Cli,
    data: &Dataset,
    solver: &SolverArgs,
    k: usize,
    variant: Variant,
    tweak: impl Fn(&mut SolverConfig),
) -> Result<Vec<Run>, Failure> {
    (0..cli.repeats)
        .map(|r| {
            let mut config = solver.config(k, cli.seed + r);
            tweak(&mut config);
            run_once(data, &config, variant)
        })
        .collect()
}

fn save_runs(output: &Output, prefix: &str, runs: &[Run], loaded: &Loaded, variant: Variant, solver: &SolverArgs, k: usize) -> Result<(), Failure> {
    if output.path("").is_none() {
        return Ok(());
    }
    output.ensure()?;
    for run in runs {
        let config = solver.config(k, run.seed);
        let record = RunRecord::from_fit(&run.result, &config, variant, run.scores, Some(loaded.spec.clone()));
        if let Some(path) = output.path(&format!("{prefix}run-{}.json", run.seed)) {
            save_result(&record, path)?;
        }
        if let Some(path) = output.path(&format!("{prefix}trace-{}.txt", run.seed)) {
            write_trace(&run.result.state.objective_trace, path)?;
        }
    }
    Ok(())
}

fn collect_violations(runs: &[Run], label: &str, into: &mut Vec<String>) {
    for run in runs {
        for v in &run.violations {
            into.push(format!("{label} seed {}: {v}", run.seed));
        }
    }
}

fn summary_rows(runs: &[Run]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    if runs.iter().all(|r| r.scores.is_some()) {
        let metric = |f: fn(&Scores) -> f64| -> Vec<f64> {
            runs.iter().map(|r| f(r.scores.as_ref().unwrap())).collect()
        };
        rows.push(vec!["NMI".into(), pm(&metric(|s| s.nmi))]);
        rows.push(vec!["ACC".into(), pm(&metric(|s| s.acc))]);
        rows.push(vec!["PUR".into(), pm(&metric(|s| s.purity))]);
    }
    let objectives: Vec<f64> = runs.iter().map(Run::objective).collect();
    let iterations: Vec<f64> = runs.iter().map(|r| r.result.iterations_run as f64).collect();
    rows.push(vec!["objective".into(), pm(&objectives)]);
    rows.push(vec!["iterations".into(), pm(&iterations)]);
    let converged = runs.iter().filter(|r| r.result.converged).count();
    rows.push(vec!["converged".into(), format!("{converged}/{}", runs.len())]);
    let warnings: usize = runs.iter().map(|r| r.result.warnings.len()).sum();
    rows.push(vec!["warnings".into(), warnings.to_string()]);
    rows
}

fn header(loaded: &Loaded, mode: NormalizationMode) -> String {
    format!(
        "data: {} (N={}, d={}), normalization {}\n",
        loaded.description,
        loaded.data.len(),
        loaded.data.dim(),
        normalization_name(mode)
    )
}

fn seeds(cli: &Cli) -> String {
    format!("seeds {}..{}", cli.seed, cli.seed + cli.repeats - 1)
}

fn finish(violations: Vec<String>) -> Result<(), Failure> {
    if violations.is_empty() {
        return Ok(());
    }
    for v in &violations {
        eprintln!("invariant violated: {v}");
    }
    Err(Failure::verify(format!("{} invariant violations", violations.len())))
}

fn cmd_fit(cli: &Cli, args: &DataArgs, solver: &SolverArgs, variant: Variant, out: &mut dyn Write) -> Result<(), Failure> {
    let loaded = load(args)?;
    let k = resolve_k(solver, &loaded.data)?;
    let runs = run_repeats(cli, &loaded.data, solver, k, variant, |_| {})?;
    let output = Output::new(cli.out_dir.as_deref(), "fit");
    save_runs(&output, "", &runs, &loaded, variant, solver, k)?;

    let mut text = header(&loaded, args.normalize);
    text.push_str(&format!(
        "variant {}, k={k}, M={}, lambda={}, repeats {}, {}\n\n",
        variant.name(),
        solver.anchors,
        solver.lambda,
        cli.repeats,
        seeds(cli)
    ));
    text.push_str(&table(&["metric".into(), "mean ± std".into()], &summary_rows(&runs)));
    emit(out, &text)?;
    output.write("summary.txt", &text)?;

    let mut violations = Vec::new();
    collect_violations(&runs, variant.name(), &mut violations);
    finish(violations)
}

fn default_lambdas() -> Vec<f64> {
    (-5..=5).map(|e| 10f64.powi(e)).collect()
}

fn cmd_sweep(
    cli: &Cli,
    args: &DataArgs,
    solver: &SolverArgs,
    lambdas: &[f64],
    anchor_grid: &[usize],
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let lambdas = if lambdas.is_empty() { default_lambdas() } else { lambdas.to_vec() };
    if let Some(bad) = lambdas.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(Failure::usage(format!("lambda values must be positive, got {bad}")));
    }
    let anchors = if anchor_grid.is_empty() { vec![solver.anchors] } else { anchor_grid.to_vec() };
    let loaded = load(args)?;
    let k = resolve_k(solver, &loaded.data)?;

    // cells[l][m] = None when the configuration was rejected
    let mut cells: Vec<Vec<Option<Vec<Run>>>> = Vec::new();
    let mut notes = Vec::new();
    let mut violations = Vec::new();
    for &lambda in &lambdas {
        let mut row = Vec::new();
        for &m in &anchors {
            let mut probe = solver.config(k, cli.seed);
            probe.lambda = lambda;
            probe.anchors = m;
            let check = probe.validate().and_then(|_| {
                if m > loaded.data.len() {
                    Err(obcut_core::Error::InvalidConfig(format!(
                        "M = {m} anchors exceeds N = {} samples",
                        loaded.data.len()
                    )))
                } else {
                    Ok(())
                }
            });
            if let Err(e) = check {
                notes.push(format!("lambda={lambda} M={m} rejected: {e}"));
                row.push(None);
                continue;
            }
            let runs = run_repeats(cli, &loaded.data, solver, k, Variant::LaLg, |c| {
                c.lambda = lambda;
                c.anchors = m;
            })?;
            collect_violations(&runs, &format!("lambda={lambda} M={m}"), &mut violations);
            row.push(Some(runs));
        }
        cells.push(row);
    }

    let output = Output::new(cli.out_dir.as_deref(), "sweep");
    let labeled = loaded.data.labels().is_some();
    type Column = (&'static str, fn(&Run) -> f64);
    let mut metrics: Vec<Column> = Vec::new();
    if labeled {
        metrics.push(("nmi", |r| r.scores.unwrap().nmi));
        metrics.push(("acc", |r| r.scores.unwrap().acc));
        metrics.push(("pur", |r| r.scores.unwrap().purity));
    }
    metrics.push(("objective", Run::objective));

    let mut text = header(&loaded, args.normalize);
    text.push_str(&format!("k={k}, repeats {}, {}; cells hold the mean\n", cli.repeats, seeds(cli)));
    let mut long = String::from("# lambda M metric mean std\n");
    for (name, value) in &metrics {
        let mut head = vec![format!("{name}: lambda \\ M")];
        head.extend(anchors.iter().map(|m| m.to_string()));
        let mut rows = Vec::new();
        for (l, &lambda) in lambdas.iter().enumerate() {
            let mut row = vec![format!("{lambda:e}")];
            for (c, &m) in anchors.iter().enumerate() {
                match &cells[l][c] {
                    Some(runs) => {
                        let values: Vec<f64> = runs.iter().map(value).collect();
                        let (mean, std) = crate::mean_std(&values);
                        row.push(fmt_value(mean));
                        long.push_str(&format!("{lambda:e} {m} {name} {mean:.17e} {std:.17e}\n"));
                    }
                    None => row.push("rejected".into()),
                }
            }
            rows.push(row);
        }
        let grid = table(&head, &rows);
        output.write(&format!("grid-{name}.txt"), &grid)?;
        text.push('\n');
        text.push_str(&grid);
    }
    for note in &notes {
        text.push_str(&format!("note: {note}\n"));
    }
    emit(out, &text)?;
    output.write("summary.txt", &text)?;
    output.write("cells.txt", &long)?;
    finish(violations)
}

fn file_name(variant: Variant) -> &'static str {
    match variant {
        Variant::LaLg => "la-lg",
        Variant::FaLg => "fa-lg",
        Variant::FaFg => "fa-fg",
        Variant::TwoStep => "two-step",
    }
}

fn cmd_ablate(cli: &Cli, args: &DataArgs, solver: &SolverArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let loaded = load(args)?;
    let k = resolve_k(solver, &loaded.data)?;
    let output = Output::new(cli.out_dir.as_deref(), "ablate");
    let labeled = loaded.data.labels().is_some();
    let mut head: Vec<String> = vec!["variant".into()];
    if labeled {
        head.extend(["NMI", "ACC", "PUR"].map(String::from));
    }
    head.extend(["objective", "iterations"].map(String::from));

    let mut rows = Vec::new();
    let mut means = Vec::new();
    let mut violations = Vec::new();
    for variant in Variant::ALL {
        let runs = run_repeats(cli, &loaded.data, solver, k, variant, |_| {})?;
        save_runs(&output, &format!("{}-", file_name(variant)), &runs, &loaded, variant, solver, k)?;
        collect_violations(&runs, variant.name(), &mut violations);
        let mut row = vec![variant.name().to_string()];
        if labeled {
            let s: Vec<Scores> = runs.iter().map(|r| r.scores.unwrap()).collect();
            row.push(pm(&s.iter().map(|s| s.nmi).collect::<Vec<_>>()));
            row.push(pm(&s.iter().map(|s| s.acc).collect::<Vec<_>>()));
            row.push(pm(&s.iter().map(|s| s.purity).collect::<Vec<_>>()));
        }
        let objectives: Vec<f64> = runs.iter().map(Run::objective).collect();
        means.push(crate::mean_std(&objectives).0);
        row.push(pm(&objectives));
        row.push(pm(&runs.iter().map(|r| r.result.iterations_run as f64).collect::<Vec<_>>()));
        rows.push(row);
    }

    let mut text = header(&loaded, args.normalize);
    text.push_str(&format!(
        "k={k}, M={}, lambda={}, repeats {}, {}\n\n",
        solver.anchors,
        solver.lambda,
        cli.repeats,
        seeds(cli)
    ));
    text.push_str(&table(&head, &rows));
    let holds = means[0] <= means[2];
    text.push_str(&format!(
        "\nLA+LG mean objective {} FA+FG mean objective\n",
        if holds { "<=" } else { ">" }
    ));
    emit(out, &text)?;
    output.write("summary.txt", &text)?;
    finish(violations)
}

/// Random row-stochastic graph; roughly a third of the entries are zero.
pub fn random_graph(rng: &mut impl Rng, n: usize, m: usize) -> BipartiteGraph {
    let mut w = DMatrix::from_fn(n, m, |_, _| {
        if rng.random::<f64>() < 1.0 / 3.0 {
            0.0
        } else {
            rng.random::<f64>()
        }
    });
    for i in 0..n {
        if w.row(i).sum() == 0.0 {
            let j = rng.random_range(0..m);
            w[(i, j)] = 1.0;
        }
        let s = w.row(i).sum();
        w.row_mut(i).unscale_mut(s);
    }
    BipartiteGraph::from_raw(w)
}

fn cmd_verify(
    cli: &Cli,
    n: usize,
    m: usize,
    k: usize,
    trials: usize,
    budget: u128,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    if n == 0 || m == 0 || k == 0 || trials == 0 {
        return Err(Failure::usage("samples, anchors, k and trials must be positive"));
    }
    let count = match enumerate_partitions(n, m, k, budget) {
        Ok(iter) => iter.count(),
        Err(obcut_core::Error::BudgetExceeded { required, budget }) => {
            return Err(Failure::usage(format!(
                "k^(N+M) = {required} partitions exceeds the budget of {budget}; \
                 try smaller sizes such as -n 5 -m 3 -k 2, or raise --budget"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    if count == 0 {
        return Err(Failure::usage(format!(
            "no partition of {n} samples and {m} anchors into {k} nonempty paired clusters"
        )));
    }

    let head: Vec<String> = ["trial", "min cut", "max trace", "residual", "agree"].map(String::from).to_vec();
    let mut rows = Vec::new();
    let mut agree = 0;
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(cli.seed.wrapping_add(trial as u64));
        let graph = random_graph(&mut rng, n, m);
        let report = verify_equivalence(&graph, k, budget)?;
        let ok = report.optimizers_agree();
        agree += usize::from(ok);
        worst = worst.max(report.max_abs_identity_residual);
        rows.push(vec![
            trial.to_string(),
            format!("{:.12}", report.min_cut),
            format!("{:.12}", report.max_trace),
            format!("{:.3e}", report.max_abs_identity_residual),
            if ok { "yes" } else { "NO" }.to_string(),
        ]);
    }
    let mut text = format!("N={n} M={m} k={k}, {count} partitions per trial, seed {}\n\n", cli.seed);
    text.push_str(&table(&head, &rows));
    text.push_str(&format!(
        "\noptimizer sets agree in {agree}/{trials} trials; max |cut + 2 trace| = {worst:.3e}\n"
    ));
    emit(out, &text)?;
    Output::new(cli.out_dir.as_deref(), "verify").write("verify.txt", &text)?;
    if agree < trials {
        return Err(Failure::verify(format!("optimizer sets differ in {} trials", trials - agree)));
    }
    if worst > IDENTITY_TOL {
        return Err(Failure::verify(format!("identity residual {worst:e} exceeds {IDENTITY_TOL:e}")));
    }
    Ok(())
}

struct ScalePlan<'a> {
    sizes: &'a [usize],
    dim: usize,
    k: usize,
    anchors: usize,
    iters: usize,
    lambda: f64,
    separation: f64,
    noise: f64,
}

fn cmd_scale(cli: &Cli, plan: &ScalePlan, out: &mut dyn Write) -> Result<(), Failure> {
    if plan.sizes.is_empty() || plan.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::usage("--sizes must be nonempty and strictly ascending"));
    }
    if plan.sizes[0] < plan.k || plan.iters == 0 {
        return Err(Failure::usage("each size must be at least k and --iters positive"));
    }
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut plot = String::from("# N seconds\n");
    let mut violations = Vec::new();
    for &size in plan.sizes {
        let raw = make_blobs(size / plan.k, plan.k, plan.dim, plan.separation, plan.noise, cli.seed)?;
        let (data, _) = normalize(&raw, NormalizationMode::MinMax);
        let config = SolverConfig {
            anchors: plan.anchors,
            lambda: plan.lambda,
            max_outer_iters: plan.iters,
            outer_tol: f64::MIN_POSITIVE,
            seed: cli.seed,
            ..SolverConfig::new(plan.k)
        };
        let started = Instant::now();
        let run = run_once(&data, &config, Variant::LaLg)?;
        let seconds = started.elapsed().as_secs_f64();
        collect_violations(std::slice::from_ref(&run), &format!("N={}", data.len()), &mut violations);
        let n = data.len();
        points.push((n as f64, seconds));
        plot.push_str(&format!("{n} {seconds:.6}\n"));
        rows.push(vec![
            n.to_string(),
            format!("{seconds:.3}"),
            run.result.iterations_run.to_string(),
            format!("{:.4}", seconds / run.result.iterations_run.max(1) as f64),
        ]);
    }
    let head: Vec<String> = ["N", "seconds", "iterations", "s/iteration"].map(String::from).to_vec();
    let mut text = format!(
        "d={}, k={}, M={}, lambda={}, {} outer iterations, seed {}\n\n",
        plan.dim, plan.k, plan.anchors, plan.lambda, plan.iters, cli.seed
    );
    text.push_str(&table(&head, &rows));
    match loglog_slope(&points) {
        Some(s) => text.push_str(&format!("\nlog-log slope {s:.3}\n")),
        None => text.push_str("\nlog-log slope n/a (needs at least two sizes)\n"),
    }
    emit(out, &text)?;
    let output = Output::new(cli.out_dir.as_deref(), "scale");
    output.write("scale.txt", &plot)?;
    output.write("summary.txt", &text)?;
    finish(violations)
}
