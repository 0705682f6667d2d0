use serde_json::{json, Value};
use thiserror::Error;

use urn_engine::analytic::{
    efficiency_otto, mean_heats_otto, mean_heats_ring, mean_work_otto, work_statistics_ring,
    OttoSpec, RingSpec,
};
use urn_engine::continuum::{
    continuum_heats, max_reversible_work_levels, reversible_work, CarnotEndpoints,
};
use urn_engine::frontier::{optimize, sample_region, CycleKind, Mode, OptimizerOptions};
use urn_engine::montecarlo::{
    compare_to_analytic, exact_work_distribution, run_ensemble, run_ensemble_with_workers,
    MAX_ENUMERATED_RESERVOIRS,
};
use urn_engine::thermo::{
    beta_from_occupancy, carnot_efficiency, entropy_equally_spaced, entropy_s, log_degeneracy,
    occupancy, InverseTemperature,
};
use urn_engine::urn::EngineRing;

use crate::args::*;
use crate::output::{object, Outcome, Table};

#[derive(Debug, Error)]
pub enum CliError {
    /// Flag combinations clap cannot express.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] urn_engine::Error),
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Analytic(AnalyticCommand::Otto(a)) => analytic_otto(a),
        Command::Analytic(AnalyticCommand::Ring(a)) => analytic_ring(a),
        Command::Analytic(AnalyticCommand::Variance(a)) => analytic_variance(a),
        Command::Thermo(ThermoCommand::Beta(a)) => thermo_beta(a),
        Command::Thermo(ThermoCommand::Occupancy(a)) => thermo_occupancy(a),
        Command::Thermo(ThermoCommand::Entropy(a)) => thermo_entropy(a),
        Command::Thermo(ThermoCommand::Degeneracy(a)) => thermo_degeneracy(a),
        Command::Simulate(a) => simulate(a),
        Command::Continuum(ContinuumCommand::Heats(a)) => continuum_heats_cmd(a),
        Command::Continuum(ContinuumCommand::Reversible(a)) => continuum_reversible(a),
        Command::Continuum(ContinuumCommand::Wmax(a)) => continuum_wmax(a),
        Command::Frontier(a) => frontier(a),
        Command::Region(a) => region(a),
    }
}

fn single(
    command: &'static str,
    inputs: Vec<(&'static str, Value)>,
    fields: Vec<(&'static str, Value)>,
) -> Outcome {
    Outcome {
        command,
        inputs,
        outputs: object(&fields),
        seed: None,
        table: Table::single(&fields),
    }
}

fn regime(work: f64) -> &'static str {
    if work > 0.0 {
        "engine"
    } else if work < 0.0 {
        "heat_pump"
    } else {
        "idle"
    }
}

fn baths(b: &Baths) -> Result<(InverseTemperature, InverseTemperature)> {
    Ok((
        InverseTemperature::new(b.beta_l)?,
        InverseTemperature::new(b.beta_h)?,
    ))
}

fn analytic_otto(a: OttoArgs) -> Result<Outcome> {
    let spec = OttoSpec::from_counts(a.eps_l, a.eps_h, a.total, a.n_l, a.n_h)?;
    let (q_l, q_h) = mean_heats_otto(&spec);
    let work = mean_work_otto(&spec);
    let eta = efficiency_otto(a.eps_l, a.eps_h)?;
    let beta_l = beta_from_occupancy(a.n_l, a.total, a.eps_l).ok();
    let beta_h = beta_from_occupancy(a.n_h, a.total, a.eps_h).ok();
    let eta_carnot = match (beta_l, beta_h) {
        (Some(l), Some(h)) => carnot_efficiency(l, h).ok(),
        _ => None,
    };
    let pump = work < 0.0;
    let var = work_statistics_ring(&spec.to_ring(true))?.variance;
    Ok(single(
        "analytic otto",
        vec![
            ("eps_l", json!(a.eps_l)),
            ("eps_h", json!(a.eps_h)),
            ("N", json!(a.total)),
            ("n_l", json!(a.n_l)),
            ("n_h", json!(a.n_h)),
        ],
        vec![
            ("Q_l", json!(q_l)),
            ("Q_h", json!(q_h)),
            ("W", json!(work)),
            ("eta", json!(eta)),
            ("regime", json!(regime(work))),
            ("cop", json!(pump.then(|| 1.0 / eta))),
            ("beta_l", json!(beta_l.map(|b| b.value()))),
            ("beta_h", json!(beta_h.map(|b| b.value()))),
            ("eta_carnot", json!(eta_carnot)),
            (
                "cop_carnot",
                json!(eta_carnot.filter(|_| pump).map(|e| 1.0 / e)),
            ),
            ("var_W", json!(var)),
        ],
    ))
}

fn ring_spec(a: &RingArgs) -> Result<RingSpec> {
    match (&a.f, a.beta_l, a.beta_h) {
        (Some(f), None, None) => Ok(RingSpec::bernoulli(&a.eps, f)?),
        (None, Some(bl), Some(bh)) => Ok(RingSpec::equilibrium(
            &a.eps,
            InverseTemperature::new(bl)?,
            InverseTemperature::new(bh)?,
        )?),
        _ => Err(CliError::Usage(
            "give either --f or both --beta-l and --beta-h".into(),
        )),
    }
}

fn ring_inputs(a: &RingArgs) -> Vec<(&'static str, Value)> {
    vec![
        ("eps", json!(a.eps)),
        ("f", json!(a.f)),
        ("beta_l", json!(a.beta_l)),
        ("beta_h", json!(a.beta_h)),
    ]
}

fn analytic_ring(a: RingArgs) -> Result<Outcome> {
    let spec = ring_spec(&a)?;
    let h = mean_heats_ring(&spec);
    let stats = work_statistics_ring(&spec)?;
    Ok(single(
        "analytic ring",
        ring_inputs(&a),
        vec![
            ("m", json!(spec.m())),
            ("Q_low", json!(h.q_low)),
            ("Q_high", json!(h.q_high)),
            ("W", json!(h.work)),
            ("eta", json!(h.efficiency())),
            ("regime", json!(regime(h.work))),
            ("var_W", json!(stats.variance)),
        ],
    ))
}

fn analytic_variance(a: RingArgs) -> Result<Outcome> {
    let spec = ring_spec(&a)?;
    let stats = work_statistics_ring(&spec)?;
    let (outcomes, exact_mean, exact_var) = if spec.len() <= MAX_ENUMERATED_RESERVOIRS {
        let dist = exact_work_distribution(&spec)?;
        let mean: f64 = dist.iter().map(|(w, p)| w * p).sum();
        let var: f64 = dist.iter().map(|(w, p)| p * (w - mean).powi(2)).sum();
        (Some(dist.len()), Some(mean), Some(var))
    } else {
        (None, None, None)
    };
    Ok(single(
        "analytic variance",
        ring_inputs(&a),
        vec![
            ("mean_W", json!(stats.mean)),
            ("var_W", json!(stats.variance)),
            ("ratio", json!(stats.ratio())),
            ("enumerated_outcomes", json!(outcomes)),
            ("enumerated_mean_W", json!(exact_mean)),
            ("enumerated_var_W", json!(exact_var)),
        ],
    ))
}

fn thermo_beta(a: BetaArgs) -> Result<Outcome> {
    let b = beta_from_occupancy(a.n, a.total, a.eps)?;
    Ok(single(
        "thermo beta",
        vec![
            ("n", json!(a.n)),
            ("N", json!(a.total)),
            ("eps", json!(a.eps)),
        ],
        vec![
            ("beta", json!(b.value())),
            ("temperature", json!(b.temperature())),
            ("negative_temperature", json!(b.is_negative_temperature())),
        ],
    ))
}

fn thermo_occupancy(a: OccupancyArgs) -> Result<Outcome> {
    Ok(single(
        "thermo occupancy",
        vec![("x", json!(a.x))],
        vec![("f", json!(occupancy(a.x)))],
    ))
}

fn thermo_entropy(a: EntropyArgs) -> Result<Outcome> {
    let s = match a.levels {
        Some(l) if l < 2 => {
            return Err(CliError::Usage("--levels must be at least 2".into()));
        }
        Some(l) => entropy_equally_spaced(a.x, l),
        None => entropy_s(a.x, a.y.unwrap_or(a.x)).value(),
    };
    Ok(single(
        "thermo entropy",
        vec![
            ("x", json!(a.x)),
            ("y", json!(a.y)),
            ("levels", json!(a.levels)),
        ],
        vec![("s", json!(s))],
    ))
}

fn thermo_degeneracy(a: DegeneracyArgs) -> Result<Outcome> {
    Ok(single(
        "thermo degeneracy",
        vec![("N", json!(a.total)), ("n", json!(a.n))],
        vec![("ln_degeneracy", json!(log_degeneracy(a.total, a.n)?))],
    ))
}

fn simulate(a: SimulateArgs) -> Result<Outcome> {
    let (eps, excited) = match (&a.eps, &a.n, a.eps_l, a.eps_h, a.n_l, a.n_h) {
        (Some(eps), Some(n), None, None, None, None) => (eps.clone(), n.clone()),
        (None, None, Some(el), Some(eh), Some(nl), Some(nh)) => (vec![el, eh], vec![nl, nh]),
        _ => {
            return Err(CliError::Usage(
                "give --eps-l, --eps-h, --n-l, --n-h or --eps with --n".into(),
            ))
        }
    };
    let ring = EngineRing::two_level(&eps, &excited, a.total)?;
    let stats = match a.workers {
        Some(w) => run_ensemble_with_workers(&ring, a.trials, a.seed, w)?,
        None => run_ensemble(&ring, a.trials, a.seed)?,
    };
    let report = compare_to_analytic(&stats, &RingSpec::from_ring(&ring)?)?;
    let tv = report.enumeration.as_ref().map(|e| e.total_variation);

    let fields = vec![
        ("trials", json!(stats.trials)),
        ("mean_W", json!(stats.mean_w)),
        ("var_W", json!(stats.var_w)),
        ("stderr_W", json!(stats.stderr_w)),
        ("analytic_mean_W", json!(report.analytic_mean)),
        ("analytic_var_W", json!(report.analytic_variance)),
        ("z_mean", json!(report.z_mean)),
        ("z_var", json!(report.z_variance)),
        ("total_variation", json!(tv)),
        (
            "conservation_violations",
            json!(stats.conservation_violations),
        ),
        (
            "max_conservation_residual",
            json!(stats.max_conservation_residual),
        ),
    ];
    let mut outputs = object(&fields);
    outputs["mean_Q"] = json!(stats.mean_q);
    outputs["histogram"] = serde_json::to_value(&stats.histogram).expect("serializable");
    outputs["enumeration"] = serde_json::to_value(&report.enumeration).expect("serializable");
    Ok(Outcome {
        command: "simulate",
        inputs: vec![
            ("eps", json!(eps)),
            ("n", json!(excited)),
            ("N", json!(a.total)),
            ("trials", json!(a.trials)),
            ("seed", json!(a.seed)),
            ("workers", json!(a.workers)),
        ],
        outputs,
        seed: Some(a.seed),
        table: Table::single(&fields),
    })
}

fn continuum_heats_cmd(a: ContinuumHeatsArgs) -> Result<Outcome> {
    let (bl, bh) = baths(&a.baths)?;
    let four = |v: &Vec<f64>, flag: &str| -> Result<[f64; 4]> {
        <[f64; 4]>::try_from(v.as_slice())
            .map_err(|_| CliError::Usage(format!("--{flag} needs exactly four values")))
    };
    let ep = match (&a.eps, &a.reduced) {
        (Some(e), None) => {
            let [l1, lm, h1, hm] = four(e, "eps")?;
            CarnotEndpoints::from_altitudes(bl, bh, l1, lm, h1, hm)?
        }
        (None, Some(r)) => {
            let [l1, lm, h1, hm] = four(r, "reduced")?;
            CarnotEndpoints::from_reduced(bl, bh, l1, lm, h1, hm)?
        }
        _ => return Err(CliError::Usage("give either --eps or --reduced".into())),
    };
    let h = continuum_heats(&ep);
    Ok(single(
        "continuum heats",
        vec![
            ("beta_l", json!(a.baths.beta_l)),
            ("beta_h", json!(a.baths.beta_h)),
            ("eps", json!(a.eps)),
            ("reduced", json!(a.reduced)),
        ],
        vec![
            ("Q_l", json!(h.q_l)),
            ("Q_h", json!(h.q_h)),
            ("W", json!(h.work)),
            ("eta", json!(h.eta)),
            ("eta_carnot", json!(carnot_efficiency(bl, bh).ok())),
            ("entropy_production", json!(h.entropy_production(&ep))),
            ("eps_config", json!(ep.altitudes())),
            ("reduced_config", json!([ep.l1, ep.lm, ep.h1, ep.hm])),
        ],
    ))
}

fn continuum_reversible(a: ReversibleArgs) -> Result<Outcome> {
    let (bl, bh) = baths(&a.baths)?;
    let rev = reversible_work(bl, bh, bl.value() * a.eps_l1, bl.value() * a.eps_lm)?;
    let h = continuum_heats(&rev.endpoints);
    Ok(single(
        "continuum reversible",
        vec![
            ("beta_l", json!(a.baths.beta_l)),
            ("beta_h", json!(a.baths.beta_h)),
            ("eps_l1", json!(a.eps_l1)),
            ("eps_lm", json!(a.eps_lm)),
        ],
        vec![
            ("W", json!(rev.work)),
            ("eta", json!(rev.eta)),
            (
                "entropy_production",
                json!(h.entropy_production(&rev.endpoints)),
            ),
            ("eps_config", json!(rev.endpoints.altitudes())),
        ],
    ))
}

fn continuum_wmax(a: WmaxArgs) -> Result<Outcome> {
    let (bl, bh) = baths(&a.baths)?;
    if a.levels < 2 {
        return Err(CliError::Usage("--levels must be at least 2".into()));
    }
    Ok(single(
        "continuum wmax",
        vec![
            ("beta_l", json!(a.baths.beta_l)),
            ("beta_h", json!(a.baths.beta_h)),
            ("levels", json!(a.levels)),
        ],
        vec![("W_max", json!(max_reversible_work_levels(bl, bh, a.levels)))],
    ))
}

fn frontier(a: FrontierArgs) -> Result<Outcome> {
    let (bl, bh) = baths(&a.baths)?;
    let mode: Mode = a.mode.into();
    let opts = OptimizerOptions {
        tol_w: a.tol_w,
        budget: a.budget,
        starts: a.starts,
        eps_max: a.eps_max,
        reduced_max: a.reduced_max,
        seed: a.seed,
    };
    let header = vec![
        "target_W",
        "status",
        "eta",
        "cop",
        "W",
        "residual",
        "evaluations",
        "start",
        "eps_config",
    ];
    let mut rows = Vec::new();
    for w in a.w_grid.values() {
        let row = match optimize(a.m, bl, bh, w, mode, &opts) {
            Ok(p) => vec![
                json!(w),
                json!("ok"),
                json!(p.eta),
                json!((w < 0.0).then(|| p.cop())),
                json!(p.work),
                json!(p.residual),
                json!(p.evaluations),
                json!(p.start),
                json!(p.eps_config),
            ],
            Err(urn_engine::Error::Infeasible(_)) => {
                let mut row = vec![json!(w), json!("infeasible")];
                row.extend(std::iter::repeat_n(Value::Null, header.len() - 2));
                row
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(row);
    }
    let points: Vec<Value> = rows
        .iter()
        .map(|r| {
            Value::Object(
                header
                    .iter()
                    .zip(r)
                    .map(|(h, v)| (h.to_string(), v.clone()))
                    .collect(),
            )
        })
        .collect();
    let m = match a.m {
        CycleKind::Carnot => json!("inf"),
        CycleKind::SubReservoirs(m) => json!(m),
    };
    Ok(Outcome {
        command: "frontier",
        inputs: vec![
            ("m", m),
            ("beta_l", json!(a.baths.beta_l)),
            ("beta_h", json!(a.baths.beta_h)),
            ("w_grid", json!(a.w_grid.to_string())),
            ("mode", json!(mode)),
            ("tol_w", json!(a.tol_w)),
            ("budget", json!(a.budget)),
            ("starts", json!(a.starts)),
            ("eps_max", json!(a.eps_max)),
            ("reduced_max", json!(a.reduced_max)),
            ("seed", json!(a.seed)),
        ],
        outputs: json!({ "points": points }),
        seed: Some(a.seed),
        table: Table { header, rows },
    })
}

fn region(a: RegionArgs) -> Result<Outcome> {
    let (bl, bh) = baths(&a.baths)?;
    let pts = sample_region(a.m, bl, bh, a.samples, a.eps_max, a.seed)?;
    let header = vec!["W", "eta", "Q_h", "flagged", "eps_config"];
    let rows: Vec<Vec<Value>> = pts
        .iter()
        .map(|p| {
            vec![
                json!(p.work),
                json!(p.eta),
                json!(p.q_high),
                json!(p.flagged),
                json!(p.eps),
            ]
        })
        .collect();
    let max_w = pts.iter().map(|p| p.work).fold(f64::NEG_INFINITY, f64::max);
    let flagged = pts.iter().filter(|p| p.flagged).count();
    Ok(Outcome {
        command: "region",
        inputs: vec![
            ("m", json!(a.m)),
            ("beta_l", json!(a.baths.beta_l)),
            ("beta_h", json!(a.baths.beta_h)),
            ("samples", json!(a.samples)),
            ("eps_max", json!(a.eps_max)),
            ("seed", json!(a.seed)),
        ],
        outputs: json!({
            "max_W": max_w,
            "flagged": flagged,
            "points": pts,
        }),
        seed: Some(a.seed),
        table: Table { header, rows },
    })
}
