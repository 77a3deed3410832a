use std::path::{Path, PathBuf};
use std::time::Instant;

use deeponet_lab::bounds::{
    evaluate, hoeffding_mc_check, verify_cover_bruteforce, verify_perturbation, BoundInputs,
    Theorem,
};
use deeponet_lab::datagen::{
    build_adr_dataset, generate, read_dataset_csv, write_dataset_csv, AdrConfig, DatasetOptions,
    GeneratorConfig, GrfPrior,
};
use deeponet_lab::deeponet::{gradcheck, Checkpoint, DeepOnet, TrainConfig, Trainer};
use deeponet_lab::nn::{HiddenActivation, MlpSpec, OutputActivation};
use deeponet_lab::scaling::{check_monotonic, emit_plot_data, run_suite_with, ExperimentPlan};
use serde::{Deserialize, Serialize};

use crate::args::{
    BoundArgs, Check, ExperimentArgs, GenDataArgs, GlobalArgs, TrainArgs, VerifyArgs, Which,
};
use crate::config::{
    echo_config, failed, load, load_or_default, require, usage, write_json, CliResult,
};

fn default_generator() -> GeneratorConfig {
    GeneratorConfig::Adr {
        grf: GrfPrior::default(),
        pde: AdrConfig::default(),
        options: DatasetOptions::new(40, 100, 0),
    }
}

fn options_mut(config: &mut GeneratorConfig) -> &mut DatasetOptions {
    match config {
        GeneratorConfig::Adr { options, .. } | GeneratorConfig::Pendulum { options, .. } => options,
    }
}

pub fn gen_data(global: &GlobalArgs, args: &GenDataArgs) -> CliResult {
    let mut config = match &global.config {
        Some(p) => load(p)?,
        None => default_generator(),
    };
    let options = options_mut(&mut config);
    if let Some(seed) = global.seed {
        options.seed = seed;
    }
    if let Some(n) = args.functions {
        options.num_functions = n;
    }
    if let Some(n) = args.points_per_function {
        options.points_per_function = n;
    }
    if let Some(s) = args.noise_std {
        options.noise_std = s;
    }
    echo_config(&global.out_dir, "gen-data", &config)?;

    let data = generate(&config).map_err(|e| match e {
        deeponet_lab::Error::Config(_) | deeponet_lab::Error::Input(_) => usage(e),
        _ => failed(e),
    })?;
    let path = global.out_dir.join(&args.name);
    write_dataset_csv(&data, &path).map_err(failed)?;
    println!(
        "wrote {} rows ({} sensors, label bound {:.6}) to {}",
        data.len(),
        data.sensor_dim(),
        data.label_bound(),
        path.display()
    );
    Ok(())
}

/// Training run: the data, the architecture and the optimisation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRun {
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default = "default_width")]
    pub width: usize,
    /// Weight layers per net.
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_hidden")]
    pub hidden_activation: HiddenActivation,
    #[serde(default = "default_output")]
    pub output_activation: OutputActivation,
    #[serde(default)]
    pub init_seed: u64,
    #[serde(default)]
    pub resume: Option<PathBuf>,
    #[serde(flatten)]
    pub train: TrainConfig,
}

fn default_q() -> usize {
    8
}
fn default_width() -> usize {
    32
}
fn default_depth() -> usize {
    5
}
fn default_hidden() -> HiddenActivation {
    HiddenActivation::Relu
}
fn default_output() -> OutputActivation {
    OutputActivation::Tanh
}

impl Default for TrainRun {
    fn default() -> Self {
        TrainRun {
            data: None,
            q: default_q(),
            width: default_width(),
            depth: default_depth(),
            hidden_activation: default_hidden(),
            output_activation: default_output(),
            init_seed: 0,
            resume: None,
            train: TrainConfig::default(),
        }
    }
}

fn fresh_model(run: &TrainRun, sensors: usize, point_dim: usize) -> CliResult<DeepOnet> {
    let spec = |input| {
        MlpSpec::uniform(
            input,
            run.width,
            run.depth,
            run.q,
            run.hidden_activation,
            run.output_activation,
        )
        .map_err(usage)
    };
    DeepOnet::init(spec(sensors)?, spec(point_dim)?, run.init_seed).map_err(usage)
}

pub fn train(global: &GlobalArgs, args: &TrainArgs) -> CliResult {
    let mut run: TrainRun = load_or_default(global.config.as_deref())?;
    if let Some(seed) = global.seed {
        run.init_seed = seed;
        run.train.seed = seed;
    }
    if let Some(d) = &args.data {
        run.data = Some(d.clone());
    }
    if let Some(e) = args.epochs {
        run.train.epochs = e;
    }
    if let Some(r) = &args.resume {
        run.resume = Some(r.clone());
    }
    let data_path = run
        .data
        .clone()
        .ok_or_else(|| usage("train needs a dataset (--data or \"data\" in the config)"))?;
    let data = read_dataset_csv(&data_path).map_err(usage)?;
    echo_config(&global.out_dir, "train", &run)?;

    let mut trainer = match &run.resume {
        Some(path) => {
            let ckpt = Checkpoint::load(path).map_err(usage)?;
            let trainer = Trainer::from_checkpoint(ckpt).map_err(usage)?;
            let m = trainer.model();
            if m.sensor_dim() != data.sensor_dim() || m.point_dim() != data.point_dim() {
                return Err(usage(format!(
                    "checkpoint expects {} sensors and {}-d points, the dataset has {} and {}",
                    m.sensor_dim(),
                    m.point_dim(),
                    data.sensor_dim(),
                    data.point_dim()
                )));
            }
            trainer
        }
        None => {
            let model = fresh_model(&run, data.sensor_dim(), data.point_dim())?;
            Trainer::new(model, run.train.lr, run.train.seed).with_init_seed(run.init_seed)
        }
    };

    let start = Instant::now();
    let outcome = trainer.run(&data, &run.train);
    // whatever was trained is kept, even when training stopped early
    let ckpt_path = global.out_dir.join("checkpoint.json");
    trainer.checkpoint().save(&ckpt_path).map_err(failed)?;
    write_loss_csv(&global.out_dir.join("loss.csv"), trainer.loss_curve())?;
    outcome.map_err(failed)?;
    println!(
        "trained {} epochs in {:.1} s; final loss {}; checkpoint {}",
        trainer.epochs_done(),
        start.elapsed().as_secs_f64(),
        trainer
            .loss_curve()
            .last()
            .map_or("n/a".to_string(), |l| format!("{l:.6e}")),
        ckpt_path.display()
    );
    Ok(())
}

fn write_loss_csv(path: &Path, curve: &[f64]) -> CliResult {
    let mut w = csv::Writer::from_path(path).map_err(failed)?;
    w.write_record(["epoch", "loss"]).map_err(failed)?;
    for (i, l) in curve.iter().enumerate() {
        w.write_record([(i + 1).to_string(), l.to_string()])
            .map_err(failed)?;
    }
    w.flush().map_err(failed)
}

pub fn experiment(global: &GlobalArgs, args: &ExperimentArgs) -> CliResult {
    let mut plan: ExperimentPlan = require(global.config.as_deref(), "experiment")?;
    if let Some(seed) = global.seed {
        plan.data_seed = seed;
    }
    if let Some(e) = args.epochs {
        plan.epochs = e;
    }
    let cells = plan.cells().map_err(usage)?;
    println!("{:>6} {:>10} {:>6} {:>8}", "q", "n", "width", "params");
    for c in &cells {
        println!("{:>6} {:>10} {:>6} {:>8}", c.q, c.n, c.width, c.param_count);
    }
    if args.dry_run {
        return Ok(());
    }
    echo_config(&global.out_dir, "experiment", &plan)?;

    let suite = run_suite_with(&plan, global.threads, |r| {
        eprintln!(
            "cell q={} n={} seed={}: {} ({:.1} s)",
            r.q,
            r.n,
            r.seed,
            match (&r.failure, r.best_loss) {
                (Some(f), _) => format!("failed: {f}"),
                (None, Some(b)) => format!("best loss {b:.6e}"),
                (None, None) => "no epochs".to_string(),
            },
            r.wall_time_s
        )
    })
    .map_err(usage)?;
    let files = emit_plot_data(&suite, &global.out_dir).map_err(failed)?;
    let verdict = check_monotonic(&suite);
    println!(
        "majority monotone: {}; mean improvement from smallest to largest q: {}; outputs in {}",
        verdict.majority_monotone,
        verdict
            .mean_improvement
            .map_or("n/a".to_string(), |v| format!("{v:.6e}")),
        files.suite.display()
    );
    if !verdict.excluded.is_empty() {
        return Err(failed(format!(
            "{} cells failed and were excluded from the verdict",
            verdict.excluded.len()
        )));
    }
    Ok(())
}

pub fn bound(global: &GlobalArgs, args: &BoundArgs) -> CliResult {
    let mut inputs: BoundInputs = require(global.config.as_deref(), "bound")?;
    if let Some(n) = args.n {
        inputs.n = n;
    }
    inputs.validate().map_err(usage)?;
    echo_config(&global.out_dir, "bound", &inputs)?;
    let which = match args.theorem {
        Which::General => vec![Theorem::General],
        Which::Sigmoid => vec![Theorem::Sigmoid],
        Which::Both => vec![Theorem::General, Theorem::Sigmoid],
    };
    let reports = which
        .into_iter()
        .map(|t| evaluate(&inputs, t).map_err(usage))
        .collect::<CliResult<Vec<_>>>()?;
    write_json(&global.out_dir.join("bound-report.json"), &reports)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&reports).map_err(failed)?
    );
    Ok(())
}

/// Settings of the verification checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub seed: u64,
    pub gradient_cases: usize,
    pub gradient_tolerance: f64,
    pub perturbation_trials: usize,
    pub perturbation_theta: f64,
    pub cover_probes: usize,
    pub hoeffding_trials: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            gradient_cases: 50,
            gradient_tolerance: 1e-6,
            perturbation_trials: 1000,
            perturbation_theta: 0.05,
            cover_probes: 10_000,
            hoeffding_trials: 100_000,
        }
    }
}

#[derive(Debug, Serialize)]
struct CheckReport {
    check: &'static str,
    holds: bool,
    observed: f64,
    bound: f64,
    detail: serde_json::Value,
}

fn run_check(check: Check, config: &VerifyConfig, broken: bool) -> CliResult<Vec<CheckReport>> {
    let seed = config.seed;
    Ok(match check {
        Check::Gradients => {
            let tamper = |g: &mut [f64]| g.iter_mut().for_each(|x| *x *= 1.5);
            let tamper: Option<gradcheck::Tamper<'_>> = broken.then_some(&tamper);
            let r = gradcheck::check_random_models(
                config.gradient_cases,
                seed,
                config.gradient_tolerance,
                tamper,
            )
            .map_err(failed)?;
            vec![CheckReport {
                check: "gradients",
                holds: r.holds,
                observed: r.max_relative_error,
                bound: r.tolerance,
                detail: to_json(&r)?,
            }]
        }
        Check::Perturbation => {
            let pde = AdrConfig {
                nx: 21,
                nt: 21,
                ..AdrConfig::default()
            };
            let mut options = DatasetOptions::new(10, 5, seed);
            options.points_per_function = 20;
            let data = build_adr_dataset(&GrfPrior::new(0.2), &pde, &options).map_err(failed)?;
            let spec = |input| {
                MlpSpec::new(
                    vec![input, 16, 4],
                    HiddenActivation::Relu,
                    OutputActivation::Sigmoid,
                )
                .map_err(failed)
            };
            let model = DeepOnet::init(spec(10)?, spec(2)?, seed).map_err(failed)?;
            let r = verify_perturbation(
                &model,
                config.perturbation_theta,
                &data,
                config.perturbation_trials,
                seed,
            )
            .map_err(failed)?;
            vec![CheckReport {
                check: "perturbation",
                holds: r.holds,
                observed: r.max_observed,
                bound: r.bound,
                detail: to_json(&r)?,
            }]
        }
        Check::Cover => {
            let mut out = Vec::new();
            for dim in [1, 2] {
                for theta in [0.25, 0.5] {
                    let r = verify_cover_bruteforce(dim, 1.0, theta, config.cover_probes, seed)
                        .map_err(failed)?;
                    out.push(CheckReport {
                        check: "cover",
                        holds: r.holds,
                        observed: r.centers as f64,
                        bound: r.lemma_count,
                        detail: to_json(&r)?,
                    });
                }
            }
            out
        }
        Check::Hoeffding => {
            let mut out = Vec::new();
            for (i, (n, t)) in [(10, 0.1), (10, 0.2), (50, 0.05), (50, 0.1), (100, 0.1)]
                .into_iter()
                .enumerate()
            {
                let r =
                    hoeffding_mc_check(0.0, 1.0, n, t, config.hoeffding_trials, seed + i as u64)
                        .map_err(failed)?;
                out.push(CheckReport {
                    check: "hoeffding",
                    holds: r.holds,
                    observed: r.empirical_tail,
                    bound: r.bound,
                    detail: to_json(&r)?,
                });
            }
            out
        }
    })
}

fn to_json(value: &impl Serialize) -> CliResult<serde_json::Value> {
    serde_json::to_value(value).map_err(failed)
}

pub fn verify(global: &GlobalArgs, args: &VerifyArgs) -> CliResult {
    let mut config: VerifyConfig = load_or_default(global.config.as_deref())?;
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    echo_config(&global.out_dir, "verify", &config)?;
    let checks = if args.checks.is_empty() {
        vec![
            Check::Gradients,
            Check::Perturbation,
            Check::Cover,
            Check::Hoeffding,
        ]
    } else {
        args.checks.clone()
    };
    let mut reports = Vec::new();
    for check in checks {
        reports.extend(run_check(check, &config, args.inject_broken_gradient)?);
    }
    for r in &reports {
        println!(
            "[{}] {}: observed {:.4e}, bound {:.4e}",
            if r.holds { "PASS" } else { "FAIL" },
            r.check,
            r.observed,
            r.bound
        );
    }
    write_json(&global.out_dir.join("verify-report.json"), &reports)?;
    let mut failing: Vec<&str> = reports
        .iter()
        .filter(|r| !r.holds)
        .map(|r| r.check)
        .collect();
    failing.dedup();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(failed(format!(
            "verification failed: {}",
            failing.join(", ")
        )))
    }
}
