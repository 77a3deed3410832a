//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//!
//! Runs as a plain binary (`harness = false`) so the lines print in order and the
//! process exits non-zero when any criterion fails.
#![allow(
    clippy::needless_range_loop,
    clippy::excessive_precision,
    clippy::type_complexity
)]

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use deeponet_lab::bounds::{
    hoeffding_mc_check, q_lower_bound_general, q_lower_bound_sigmoid, verify_cover_bruteforce,
    verify_perturbation, BoundInputs,
};
use deeponet_lab::datagen::{
    build_adr_dataset, solve_adr, unit_grid, AdrConfig, DatasetOptions, GrfConfig, GrfPrior,
};
use deeponet_lab::deeponet::{gradcheck, DeepOnet};
use deeponet_lab::nn::{AdamState, HiddenActivation, MlpSpec, OutputActivation};
use deeponet_lab::rng;
use deeponet_lab::scaling::{
    check_monotonic, deeponet_param_count, emit_plot_data, make_plan, run_suite_with,
    size_architecture, Anchor, ExperimentPlan, Exponent, MonotonicityVerdict, SuiteResult,
};
use rand::Rng as _;

const GRAD_REL_TOL: f64 = 1e-6;
const GRAD_TIME: Duration = Duration::from_secs(10);
const ADAM_TOL: f64 = 1e-12;
const ADR_EXACT_TOL: f64 = 1e-10;
const ADR_RATIO: (f64, f64) = (3.0, 5.0);
const ADR_TIME: Duration = Duration::from_secs(30);
const PENDULUM_SMALL_ANGLE_TOL: f64 = 1e-4;
const PENDULUM_RATIO: (f64, f64) = (12.0, 20.0);
const GRF_DRAWS: usize = 10_000;
const GRF_COV_TOL: f64 = 0.05;
const GRF_VAR_TOL: f64 = 0.05;
const COVER_PROBES: usize = 10_000;
const ORACLE_DIGITS: i32 = 12;
const PLAN_REL_TOL: f64 = 0.01;
const PARAM_REL_TOL: f64 = 0.05;
const PERTURBATION_TRIALS: usize = 1000;
const HOEFFDING_TRIALS: usize = 100_000;
const HOEFFDING_SIGMAS: f64 = 3.0;

struct Verdict {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }
}

fn run(id: &str, name: &str, check: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into());
        Verdict::new(false, format!("panicked: {msg}"))
    });
    let tag = if verdict.pass { "PASS" } else { "FAIL" };
    println!(
        "[{tag}] {id:>3} {name}: {} ({:.1} s)",
        verdict.detail,
        start.elapsed().as_secs_f64()
    );
    for note in &verdict.notes {
        println!("        {note}");
    }
    verdict.pass
}

fn gradient_correctness() -> Verdict {
    let start = Instant::now();
    let report = gradcheck::check_random_models(50, 2024, GRAD_REL_TOL, None).unwrap();
    let elapsed = start.elapsed();
    Verdict::new(
        report.holds && elapsed < GRAD_TIME,
        format!(
            "max rel err {:.2e} < {GRAD_REL_TOL:e} over {} coordinates of 50 models ({} skipped at ReLU kinks), {:.2} s < 10 s",
            report.max_relative_error,
            report.coordinates_checked,
            report.coordinates_skipped,
            elapsed.as_secs_f64()
        ),
    )
}

fn adam_reference() -> Verdict {
    // Two steps from x = 1 with gradients 0.5 and -0.25:
    //   m1 = 0.05, v1 = 2.5e-4, x1 = 1 - 1e-3 * 0.5 / (0.5 + 1e-8)
    //   m2 = 0.02, v2 = 3.1225e-4, x2 = x1 - 1e-3 * (0.02 / 0.19) / (sqrt(3.1225e-4 / 0.001999) + 1e-8)
    let expected = [
        (0.99900000001999999996, 0.05, 0.00025),
        (0.9987336629870784616, 0.02, 0.00031225),
    ];
    let mut x = [1.0];
    let mut adam = AdamState::new(1);
    let mut worst = 0.0f64;
    for (g, (xe, me, ve)) in [0.5, -0.25].into_iter().zip(expected) {
        adam.step(&mut x, &[g]).unwrap();
        worst = worst
            .max((x[0] - xe).abs())
            .max((adam.m[0] - me).abs())
            .max((adam.v[0] - ve).abs());
    }
    Verdict::new(
        worst <= ADAM_TOL,
        format!("max |x, m, v - hand value| = {worst:.1e} <= {ADAM_TOL:e}"),
    )
}

fn adr_solver() -> Verdict {
    let start = Instant::now();
    let config = AdrConfig {
        diffusion: 0.0,
        reaction: 0.0,
        ..AdrConfig::default()
    };
    let f = GrfConfig::new(config.x_grid(), GrfPrior::default())
        .unwrap()
        .sampler()
        .unwrap()
        .sample(&mut rng::seeded(31));
    let sol = solve_adr(&f, &config).unwrap();
    let t = config.t_grid();
    let mut exact_err = 0.0f64;
    for i in 1..config.nx - 1 {
        for (j, &tj) in t.iter().enumerate() {
            exact_err = exact_err.max((sol.u[[i, j]] - f[i] * tj).abs());
        }
    }
    let (d1, d2) = common::adr_successive_differences(21, 0.01, 0.01);
    let ratio = d1 / d2;
    let elapsed = start.elapsed();
    Verdict::new(
        exact_err <= ADR_EXACT_TOL
            && (ADR_RATIO.0..=ADR_RATIO.1).contains(&ratio)
            && elapsed < ADR_TIME,
        format!(
            "(a) D=k=0 max |u - f t| = {exact_err:.1e} <= {ADR_EXACT_TOL:e}; (b) self-convergence ratio {ratio:.3} in [3, 5] (21/41/81 nodes, D=k=0.01); {:.2} s < 30 s",
            elapsed.as_secs_f64()
        ),
    )
}

fn pendulum_solver() -> Verdict {
    let err = common::pendulum_small_angle_error();
    let (d1, d2) = common::pendulum_successive_differences(11);
    let ratio = d1 / d2;
    Verdict::new(
        err <= PENDULUM_SMALL_ANGLE_TOL && (PENDULUM_RATIO.0..=PENDULUM_RATIO.1).contains(&ratio),
        format!(
            "small-angle max error {err:.1e} <= {PENDULUM_SMALL_ANGLE_TOL:e}; RK4 self-convergence ratio {ratio:.2} in [12, 20]"
        ),
    )
}

/// Second moments `E[f_i f_j]` of `GRF_DRAWS` samples.
fn empirical_second_moments(config: &GrfConfig, seed: u64) -> Vec<Vec<f64>> {
    let sampler = config.sampler().unwrap();
    let n = config.grid.len();
    let mut acc = vec![vec![0.0; n]; n];
    let mut rng = rng::seeded(seed);
    for _ in 0..GRF_DRAWS {
        let f = sampler.sample(&mut rng);
        for i in 0..n {
            for j in 0..n {
                acc[i][j] += f[i] * f[j];
            }
        }
    }
    acc.iter_mut()
        .flatten()
        .for_each(|v| *v /= GRF_DRAWS as f64);
    acc
}

fn grf_statistics() -> Verdict {
    let smooth = GrfConfig::new(unit_grid(10), GrfPrior::new(0.2)).unwrap();
    let cov = empirical_second_moments(&smooth, 5);
    let kernel = smooth.covariance();
    let mut cov_err = 0.0f64;
    for (i, row) in cov.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            cov_err = cov_err.max((c - kernel[(i, j)]).abs());
        }
    }

    let rough = GrfConfig::new(unit_grid(40), GrfPrior::default()).unwrap();
    let m = empirical_second_moments(&rough, 6);
    let var_err = (0..40).map(|i| (m[i][i] - 1.0).abs()).fold(0.0, f64::max);
    let corr = (0..40)
        .flat_map(|i| (0..40).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| m[i][j].abs())
        .fold(0.0, f64::max);
    Verdict::new(
        cov_err <= GRF_COV_TOL && var_err <= GRF_VAR_TOL,
        format!(
            "l=0.2, 10 nodes: max |cov - k_l| = {cov_err:.4} <= {GRF_COV_TOL}; l=1e-3, 40 nodes: max |var - 1| = {var_err:.4} <= {GRF_VAR_TOL} (max |off-diagonal| {corr:.4}); {GRF_DRAWS} draws"
        ),
    )
}

fn covering_lemma() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for dim in [1, 2] {
        for theta in [0.25, 0.5] {
            let c = verify_cover_bruteforce(dim, 1.0, theta, COVER_PROBES, 77).unwrap();
            pass &= c.holds;
            parts.push(format!(
                "d={dim} θ={theta}: {} centers <= {}, max dist {:.3}",
                c.centers, c.lemma_count, c.max_probe_distance
            ));
        }
    }
    Verdict::new(
        pass,
        format!("{} ({COVER_PROBES} probes each)", parts.join("; ")),
    )
}

fn random_record(rng: &mut rng::Rng) -> BoundInputs {
    let w = rng.random_range(1.0..50.0);
    let mut i = common::inputs(
        10f64.powf(rng.random_range(0.0..9.0)),
        rng.random_range(0.01..2.0),
        rng.random_range(0.01..0.99),
        rng.random_range(0.1..5.0),
        rng.random_range(1..200_000),
        rng.random_range(1..200_000),
        w,
        w,
        1.0,
    );
    if rng.random::<bool>() {
        i.alpha = Some(rng.random_range(0.05..0.95));
    }
    i
}

fn bound_evaluators() -> Verdict {
    let mut rng = rng::seeded(404);
    let records: Vec<BoundInputs> = (0..20).map(|_| random_record(&mut rng)).collect();

    // (a) exact doubling
    let mut doubling_failures = 0;
    for r in &records {
        let mut big = r.clone();
        big.n *= 16.0;
        for eval in [q_lower_bound_general, q_lower_bound_sigmoid] {
            if eval(&big).unwrap().q_lower != 2.0 * eval(r).unwrap().q_lower {
                doubling_failures += 1;
            }
        }
    }

    // (b) extended-precision oracle
    let digits = |got: f64, want: f64| {
        (got - want).abs() <= 0.5 * 10f64.powi(1 - ORACLE_DIGITS) * want.abs()
    };
    let mut worst_rel = 0.0f64;
    let mut oracle_failures = 0;
    for (eval, cases) in [
        (
            q_lower_bound_general as fn(&BoundInputs) -> _,
            common::general_oracle_inputs(),
        ),
        (q_lower_bound_sigmoid, common::sigmoid_oracle_inputs()),
    ] {
        for (inputs, want) in cases {
            let got = eval(&inputs).unwrap().q_lower;
            worst_rel = worst_rel.max((got - want).abs() / want);
            if !digits(got, want) {
                oracle_failures += 1;
            }
        }
    }

    // (c) monotone sweeps in W, d and delta from every random record
    let mut violations = 0;
    let mut comparisons = 0;
    for r in &records {
        for eval in [q_lower_bound_general, q_lower_bound_sigmoid] {
            let mut sweep = |mutate: &dyn Fn(&mut BoundInputs, usize)| {
                let mut prev = f64::INFINITY;
                for step in 0..12 {
                    let mut x = r.clone();
                    mutate(&mut x, step);
                    let q = eval(&x).unwrap().q_lower;
                    comparisons += 1;
                    if q > prev {
                        violations += 1;
                    }
                    prev = q;
                }
            };
            sweep(&|x, k| {
                x.class.w_b *= 1.5f64.powi(k as i32);
                x.class.w_t = x.class.w_b;
            });
            sweep(&|x, k| {
                x.class.d_b += 1000 * k as u64;
                x.class.d_t += 700 * k as u64;
            });
            sweep(&|x, k| x.delta += (0.999 - x.delta) * k as f64 / 12.0);
        }
    }

    Verdict::new(
        doubling_failures == 0 && oracle_failures == 0 && violations == 0,
        format!(
            "(a) 16n doubling exact in {}/40 evaluations; (b) 10 oracle records, worst rel err {worst_rel:.1e} ({oracle_failures} below {ORACLE_DIGITS} digits); (c) {violations} violations in {comparisons} sweep points",
            40 - doubling_failures
        ),
    )
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn plan_fidelity() -> Verdict {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    let mut check = |anchor: Anchor, e: Exponent, table: &[(u64, u64)]| {
        let qs: Vec<u64> = table.iter().map(|p| p.0).collect();
        for ((_, n), (_, want)) in make_plan(anchor, &qs, e).unwrap().iter().zip(table) {
            worst = worst.max(rel(*n as f64, *want as f64));
            pairs += 1;
        }
    };
    let table2 = [(6, 11650), (8, 65511), (10, 249906), (12, 746215)];
    let table3 = [
        (5, 10000),
        (10, 40000),
        (15, 90000),
        (40, 640000),
        (45, 810000),
        (50, 1000000),
    ];
    let table4 = [
        (10, 31623),
        (15, 58000),
        (40, 252982),
        (45, 301870),
        (50, 353553),
    ];
    check(Anchor { q: 6, n: 11650 }, Exponent::Sixth, &table2);
    check(Anchor { q: 5, n: 10000 }, Exponent::Half, &table3);
    check(Anchor { q: 10, n: 31623 }, Exponent::TwoThirds, &table4);
    // The q = 5 row of the 2/3 table is the shared starting size n = 10^4, which is
    // also the anchor of the 1/2 table; the 2/3 ratio itself would give 11180 there.
    let start = make_plan(Anchor { q: 5, n: 10000 }, &[5], Exponent::Half).unwrap()[0].1;
    worst = worst.max(rel(start as f64, 10000.0));
    pairs += 1;
    let off_ratio = make_plan(Anchor { q: 10, n: 31623 }, &[5], Exponent::TwoThirds).unwrap()[0].1;

    let w5 = size_architecture(18010, 5, 5, 40, 2).unwrap();
    let exact = deeponet_param_count(w5, 5, 5, 40, 2);

    let counts = [
        (18112, 6),
        (18316, 8),
        (18520, 10),
        (18724, 12),
        (18010, 5),
        (18568, 15),
        (18719, 40),
        (18714, 45),
        (18760, 50),
    ];
    let mut worst_param = 0.0f64;
    for (target, q) in counts {
        for budget in [target, 18010] {
            let w = size_architecture(budget, q, 5, 40, 2).unwrap();
            let got = deeponet_param_count(w, q, 5, 40, 2);
            worst_param = worst_param.max(rel(got as f64, budget as f64));
        }
    }

    let mut v = Verdict::new(
        worst <= PLAN_REL_TOL && exact == 18010 && w5 == 50 && worst_param <= PARAM_REL_TOL,
        format!(
            "{pairs} table pairs within {:.3}% (<= 1%); q=5 -> w={w5}, {exact} params; all table cells within {:.2}% (<= 5%) of their budget and of 18010",
            100.0 * worst,
            100.0 * worst_param
        ),
    );
    v.notes.push(format!(
        "the q=5 row of the q/n^(2/3) table is matched as the shared start n=10^4; its own anchor gives {off_ratio}"
    ));
    v
}

fn perturbation_lemma() -> Verdict {
    let pde = AdrConfig {
        nx: 21,
        nt: 21,
        ..AdrConfig::default()
    };
    let mut options = DatasetOptions::new(10, 5, 9);
    options.points_per_function = 20;
    let data = build_adr_dataset(&GrfPrior::new(0.2), &pde, &options).unwrap();
    let spec = |input| {
        MlpSpec::new(
            vec![input, 16, 4],
            HiddenActivation::Relu,
            OutputActivation::Sigmoid,
        )
        .unwrap()
    };
    let model = DeepOnet::init(spec(10), spec(2), 12).unwrap();
    let theta = 0.05;
    let c = verify_perturbation(&model, theta, &data, PERTURBATION_TRIALS, 13).unwrap();
    Verdict::new(
        c.holds,
        format!(
            "{} violations in {} trials at θ={theta}; max risk increase {:.3e} vs bound {:.3e} (analytic J = {:.3e})",
            c.violations, c.trials, c.max_observed, c.bound, c.j
        ),
    )
}

fn hoeffding() -> Verdict {
    let settings = [(10, 0.1), (10, 0.2), (50, 0.05), (50, 0.1), (100, 0.1)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (n, t)) in settings.into_iter().enumerate() {
        let c = hoeffding_mc_check(0.0, 1.0, n, t, HOEFFDING_TRIALS, 100 + i as u64).unwrap();
        let ok = c.empirical_tail <= c.bound + HOEFFDING_SIGMAS * c.std_error;
        pass &= ok;
        parts.push(format!(
            "n={n} t={t}: {:.4} <= {:.4}",
            c.empirical_tail, c.bound
        ));
    }
    Verdict::new(
        pass,
        format!(
            "{} (+3 s.e., {HOEFFDING_TRIALS} trials each)",
            parts.join("; ")
        ),
    )
}

fn scaling_plan(exponent: Exponent) -> ExperimentPlan {
    let mut plan = ExperimentPlan::new(exponent, Anchor { q: 4, n: 4000 }, vec![4, 8, 16], 8000);
    plan.epochs = 60;
    plan.seeds = vec![0, 1, 2];
    plan.pde = AdrConfig {
        diffusion: 0.01,
        reaction: 0.01,
        ..AdrConfig::default()
    };
    plan
}

fn run_scaling(plan: &ExperimentPlan, label: &str) -> (SuiteResult, MonotonicityVerdict) {
    let suite = run_suite_with(plan, None, |r| {
        eprintln!(
            "        [{label}] q={} n={} seed={} best={:?} ({:.0} s){}",
            r.q,
            r.n,
            r.seed,
            r.best_loss,
            r.wall_time_s,
            r.failure
                .as_deref()
                .map(|f| format!(" FAILED: {f}"))
                .unwrap_or_default()
        )
    })
    .unwrap();
    let out = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("scaling-{label}"));
    emit_plot_data(&suite, &out).unwrap();
    let verdict = check_monotonic(&suite);
    (suite, verdict)
}

fn describe(verdict: &MonotonicityVerdict) -> String {
    verdict
        .per_seed
        .iter()
        .map(|s| {
            let losses: Vec<String> = s
                .best_losses
                .iter()
                .map(|(q, l)| format!("q{q}={l:.5}"))
                .collect();
            format!(
                "seed {}: {} {}",
                s.seed,
                losses.join(" "),
                if s.monotone {
                    "monotone"
                } else {
                    "not monotone"
                }
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn scaling_law() -> Verdict {
    let plan_a = scaling_plan(Exponent::Half);
    let plan_b = scaling_plan(Exponent::TwoThirds);
    let cells_a = plan_a.cells().unwrap();
    let cells_b = plan_b.cells().unwrap();
    let (suite_a, va) = run_scaling(&plan_a, "q2");
    let (suite_b, vb) = run_scaling(&plan_b, "q1.5");
    let failed = suite_a
        .results
        .iter()
        .chain(&suite_b.results)
        .filter(|r| r.failed())
        .count();

    let ia = va.mean_improvement.unwrap_or(f64::NAN);
    let ib = vb.mean_improvement.unwrap_or(f64::NAN);
    let pass_a = va.majority_monotone;
    let pass_b = !vb.majority_monotone || ib < 0.5 * ia;
    let mut v = Verdict::new(
        pass_a && pass_b && failed == 0,
        format!(
            "(a) n=250q^2 majority monotone: {}; (b) n=4000(q/4)^1.5 majority monotone: {}, improvement q4->q16 {ib:.5} vs half of (a)'s {:.5}; {failed} failed cells",
            va.majority_monotone,
            vb.majority_monotone,
            0.5 * ia
        ),
    );
    let fmt_cells = |cells: &[deeponet_lab::scaling::CellSpec]| {
        cells
            .iter()
            .map(|c| format!("q={} n={} w={} params={}", c.q, c.n, c.width, c.param_count))
            .collect::<Vec<_>>()
            .join(", ")
    };
    v.notes.push(format!("(a) cells: {}", fmt_cells(&cells_a)));
    v.notes.push(format!("(a) {}", describe(&va)));
    v.notes.push(format!("(b) cells: {}", fmt_cells(&cells_b)));
    v.notes.push(format!("(b) {}", describe(&vb)));
    v
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let filter = args.iter().find(|a| !a.starts_with('-')).cloned();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, &str, fn() -> Verdict); 11] = [
        ("1", "gradient correctness", gradient_correctness),
        ("2", "adam reference", adam_reference),
        ("3", "adr solver", adr_solver),
        ("4", "pendulum solver", pendulum_solver),
        ("5", "grf statistics", grf_statistics),
        ("6", "covering lemma", covering_lemma),
        ("7", "bound evaluators", bound_evaluators),
        ("8", "plan and table fidelity", plan_fidelity),
        ("9", "perturbation lemma", perturbation_lemma),
        ("10", "hoeffding monte carlo", hoeffding),
        ("11", "desk-scale scaling law", scaling_law),
    ];
    let mut failures = 0;
    for (id, name, check) in criteria {
        if filter.as_deref().is_some_and(|f| f != id) {
            continue;
        }
        if !run(id, name, check) {
            failures += 1;
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
