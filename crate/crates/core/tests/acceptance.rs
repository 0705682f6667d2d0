//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails that is not listed in `KNOWN`.
// Reference values are printed to four places and compared as such.
#![allow(clippy::approx_constant)]

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use urn_engine::analytic::{
    efficiency_otto, mean_heats_otto, mean_heats_ring, mean_work_otto, work_statistics_ring,
    OttoSpec, RingSpec,
};
use urn_engine::continuum::{
    continuum_heats, max_reversible_work, max_reversible_work_levels, reversible_work,
    CarnotEndpoints,
};
use urn_engine::frontier::{
    carnot_frontier, maximize_work, optimize, sample_region, Mode, OptimizerOptions,
};
use urn_engine::montecarlo::{
    compare_to_analytic, exact_work_distribution, run_ensemble, run_ensemble_with_workers,
};
use urn_engine::streams::stream;
use urn_engine::thermo::{
    beta_from_occupancy, carnot_efficiency, entropy_equally_spaced, entropy_s1, log_degeneracy,
    occupancy, InverseTemperature,
};
use urn_engine::urn::{EngineRing, Group, Reservoir};

/// Criteria that fail for reasons analysed outside the code base; they are
/// reported but do not fail the run.
const KNOWN: &[(&str, &str)] = &[(
    "AC1",
    "exact populations give eta_C = 0.69440; the 0.6957 target comes from the rounded betas",
)];

struct Report {
    failed: Vec<&'static str>,
    known: usize,
}

impl Report {
    fn line(&mut self, id: &'static str, pass: bool, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{id:<6} {tag}  {detail}");
        if !pass {
            match KNOWN.iter().find(|k| k.0 == id) {
                Some((_, why)) => {
                    println!("      known deviation: {why}");
                    self.known += 1;
                }
                None => self.failed.push(id),
            }
        }
    }
}

fn beta(x: f64) -> InverseTemperature {
    InverseTemperature::new(x).unwrap()
}

fn near(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn ac1(r: &mut Report) {
    let spec = OttoSpec::from_counts(1.0, 2.0, 10_000, 2000, 3000).unwrap();
    let w = mean_work_otto(&spec);
    let eta = efficiency_otto(1.0, 2.0).unwrap();
    let bl = beta_from_occupancy(2000, 10_000, 1.0).unwrap();
    let bh = beta_from_occupancy(3000, 10_000, 2.0).unwrap();
    let ec = carnot_efficiency(bl, bh).unwrap();
    let core =
        w == 0.1 && eta == 0.5 && near(bl.value(), 1.3863, 5e-4) && near(bh.value(), 0.4236, 5e-4);
    let ec_ok = near(ec, 0.6957, 1e-3);
    r.line(
        "AC1",
        core && ec_ok,
        format!(
            "Otto engine: W={w} eta={eta} beta_l={:.4} beta_h={:.4} eta_C={ec:.5} (target 0.6957+-0.001: {})",
            bl.value(),
            bh.value(),
            if ec_ok { "ok" } else { "miss" }
        ),
    );
}

fn ac2(r: &mut Report) {
    let spec = OttoSpec::from_counts(1.0, 2.0, 10_000, 3000, 2000).unwrap();
    let (_, q_h) = mean_heats_otto(&spec);
    let w = mean_work_otto(&spec);
    let cop = q_h / -w;
    let bl = beta_from_occupancy(3000, 10_000, 1.0).unwrap();
    let bh = beta_from_occupancy(2000, 10_000, 2.0).unwrap();
    let carnot_cop = 1.0 / carnot_efficiency(bl, bh).unwrap();
    let pass = cop == 2.0
        && near(bl.value(), 0.8473, 5e-4)
        && near(bh.value(), 0.6931, 5e-4)
        && near(carnot_cop, 5.49, 0.05);
    r.line(
        "AC2",
        pass,
        format!(
            "heat pump: COP={cop} beta_l={:.4} beta_h={:.4} Carnot COP={carnot_cop:.4}",
            bl.value(),
            bh.value()
        ),
    );
}

fn ac3(r: &mut Report) {
    let b1 = beta_from_occupancy(7000, 10_000, 1.0).unwrap().value();
    let b2 = beta_from_occupancy(8000, 10_000, 2.0).unwrap().value();
    let bl = beta_from_occupancy(4500, 10_000, 1.0).unwrap();
    let bh = beta_from_occupancy(5500, 10_000, 2.0).unwrap();
    let spec = OttoSpec::from_counts(1.0, 2.0, 10_000, 4500, 5500).unwrap();
    let w = mean_work_otto(&spec);
    let eta = efficiency_otto(1.0, 2.0).unwrap();
    let ec = carnot_efficiency(bl, bh).unwrap();
    let pass = near(b1, -0.8473, 5e-4)
        && near(b2, -0.6931, 5e-4)
        && near(bl.value(), 0.2007, 5e-4)
        && near(bh.value(), -0.1003, 5e-4)
        && near(w, 0.1, 1e-15)
        && eta == 0.5
        && ec == 1.0;
    r.line(
        "AC3",
        pass,
        format!(
            "negative temperatures: beta(eps=1)={b1:.4} beta(eps=2)={b2:.4}; mixed beta_l={:.4} beta_h={:.4} W={w:.6} eta={eta} max eta={ec}",
            bl.value(),
            bh.value()
        ),
    );
}

fn ac4(r: &mut Report) {
    let spec = RingSpec::bernoulli(&[1.0, 2.0], &[0.2, 0.3]).unwrap();
    let dist = exact_work_distribution(&spec).unwrap();
    let mean: f64 = dist.iter().map(|(w, p)| w * p).sum();
    let var: f64 = dist.iter().map(|(w, p)| p * (w - mean).powi(2)).sum();
    let closed = work_statistics_ring(&spec).unwrap();

    let ring = EngineRing::two_level(&[1.0, 2.0], &[2000, 3000], 10_000).unwrap();
    let start = Instant::now();
    let stats = run_ensemble_with_workers(&ring, 1_000_000, 42, 1).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let cmp = compare_to_analytic(&stats, &spec).unwrap();
    let (zm, zv) = (cmp.z_mean.unwrap(), cmp.z_variance.unwrap());
    let pass = near(mean, 0.1, 1e-15)
        && near(var, 0.37, 1e-15)
        && near(closed.mean, mean, 1e-15)
        && near(closed.variance, var, 1e-15)
        && zm.abs() < 4.0
        && zv.abs() < 4.0
        && secs < 10.0;
    r.line(
        "AC4",
        pass,
        format!(
            "ring vs simulation: enumerated mean={mean:.6} var={var:.6}; 1e6 trials mean={:.5} var={:.5} z=({zm:.2}, {zv:.2}) in {secs:.2}s on one worker",
            stats.mean_w, stats.var_w
        ),
    );
}

fn ac5(r: &mut Report) {
    let (bl, bh) = (beta(1.38), beta(0.42));
    let ec = carnot_efficiency(bl, bh).unwrap();
    // Reversible cycle through ε_l1 = 1, ε_lm = 1.1; the hot endpoints follow.
    let rev = reversible_work(bl, bh, 1.38 * 1.0, 1.38 * 1.1).unwrap();
    let heats = continuum_heats(&rev.endpoints);
    let [_, _, eh1, ehm] = rev.endpoints.altitudes();
    let sigma = heats.entropy_production(&rev.endpoints);
    let eta = heats.eta.unwrap();

    let raw = CarnotEndpoints::from_altitudes(bl, bh, 1.0, 1.1, 3.6, 3.3).unwrap();
    let raw_heats = continuum_heats(&raw);

    let pass = near(heats.work, 0.049, 2e-3)
        && near(eta, ec, 1e-6)
        && sigma.abs() <= 1e-10
        && near(eh1, 3.6, 0.05)
        && near(ehm, 3.3, 0.05);
    r.line(
        "AC5",
        pass,
        format!(
            "reversible cycle: W={:.5} eta={eta:.7} eta_C={ec:.7} entropy={sigma:.1e} hot endpoints=({eh1:.4}, {ehm:.4}); with hot endpoints rounded to (3.6, 3.3): W={:.5} eta={:.7}",
            heats.work,
            raw_heats.work,
            raw_heats.eta.unwrap()
        ),
    );
}

fn ac6(r: &mut Report) {
    let (bl, bh) = (beta(1.38), beta(0.42));
    let wmax = max_reversible_work(bl, bh);

    let opt = maximize_work(1, bl, bh, &OptimizerOptions::default()).unwrap();
    let mut grid: f64 = 0.0;
    for i in 1..=1000 {
        for j in 1..=1000 {
            let eps = [f64::from(i) * 0.01, f64::from(j) * 0.01];
            let f = [occupancy(1.38 * eps[0]), occupancy(0.42 * eps[1])];
            grid = grid.max((eps[1] - eps[0]) * (f[1] - f[0]));
        }
    }

    let mut entropy_ok = true;
    let mut worst: f64 = 0.0;
    for levels in [2u32, 3, 5] {
        let target = f64::from(levels).ln();
        let sup = (1..=8)
            .flat_map(|k| [10f64.powi(-k), -(10f64.powi(-k))])
            .chain([0.5, 1.0, 3.0, -2.0])
            .map(|x| entropy_equally_spaced(x, levels))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((sup - target).abs());
        entropy_ok &= near(sup, target, 1e-6);
    }
    let pass = near(wmax, 1.149, 1e-3)
        && near(opt.work, 0.20, 4e-3)
        && (opt.work - grid).abs() <= 0.01 * grid
        && entropy_ok;
    r.line(
        "AC6",
        pass,
        format!(
            "maximal work: (T_h-T_l)ln2={wmax:.5}; Otto optimizer={:.5} grid={grid:.5}; ladder entropy sup error={worst:.1e}; three-level W_max={:.4}",
            opt.work,
            max_reversible_work_levels(bl, bh, 3)
        ),
    );
}

fn ac7(r: &mut Report) {
    let ep = CarnotEndpoints::from_altitudes(beta(0.2), beta(-0.1), 0.3, 0.3, 14.0, 0.3).unwrap();
    let h = continuum_heats(&ep);
    let eta = h.eta.unwrap();
    let pass = near(h.work, 2.48, 0.03) && near(eta, 0.997, 1e-3);
    r.line(
        "AC7",
        pass,
        format!(
            "negative-temperature hot bath: W={:.4} eta={eta:.5}",
            h.work
        ),
    );
}

/// Ring between fixed altitudes `a < b`: the low group climbs from `a`, the
/// high group descends from `b`, every step `(b − a)/m`.
fn refinement_ring(m: usize, a: f64, b: f64) -> RingSpec {
    let d = (b - a) / m as f64;
    let mut eps: Vec<f64> = (0..m).map(|i| a + d * i as f64).collect();
    eps.extend((0..m).map(|i| b - d * i as f64));
    RingSpec::equilibrium(&eps, beta(1.38), beta(0.42)).unwrap()
}

fn ac8(r: &mut Report) {
    let ms = [2usize, 4, 8, 16, 32, 64];
    let ratios: Vec<f64> = ms
        .iter()
        .map(|&m| {
            work_statistics_ring(&refinement_ring(m, 1.0, 4.0))
                .unwrap()
                .ratio()
                .unwrap()
        })
        .collect();
    let decreasing = ratios.windows(2).all(|p| p[1] < p[0]);
    let finest = (ratios[4] / ratios[5]).log2();
    // Least-squares slope of ln(ratio) against ln(Δ) over all refinements.
    let xs: Vec<f64> = ms.iter().map(|&m| (3.0 / m as f64).ln()).collect();
    let ys: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let (mx, my) = (
        xs.iter().sum::<f64>() / xs.len() as f64,
        ys.iter().sum::<f64>() / ys.len() as f64,
    );
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let pass = decreasing && near(finest, 1.0, 0.2);
    r.line(
        "AC8",
        pass,
        format!(
            "fluctuations: var/mean for m=2..64 = {:?}; order from finest refinement={finest:.3} (fit over all m={slope:.3})",
            ratios.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
}

fn ac9(r: &mut Report) {
    let ln3 = log_degeneracy(3, 1).unwrap();
    let (total, n) = (1_000_000u64, 200_000u64);
    let d = log_degeneracy(total, n + 1).unwrap() - log_degeneracy(total, n).unwrap();
    let b = beta_from_occupancy(n, total, 1.0).unwrap().value();
    let pass = ln3 == 3f64.ln() && (d - b).abs() <= 1e-5;
    r.line(
        "AC9",
        pass,
        format!(
            "degeneracy: ln W(3,1)={ln3} (ln 3 = {}); |dlnW - beta eps|={:.2e} at N=1e6",
            3f64.ln(),
            (d - b).abs()
        ),
    );
}

fn ac10(r: &mut Report) {
    let mut rng = stream(2024, 0);
    let reservoirs: Vec<Reservoir> = (0..6)
        .map(|k| {
            let pop: Vec<(f64, u64)> = (0..4)
                .map(|j| (rng.random_range(0.0..3.0), 5 + j))
                .collect();
            let group = if k < 3 { Group::Low } else { Group::High };
            Reservoir::new(rng.random_range(0.01..10.0), pop, group).unwrap()
        })
        .collect();
    let ring = EngineRing::new(reservoirs).unwrap();
    let stats = run_ensemble(&ring, 1_000_000, 8).unwrap();
    let conservation = stats.conservation_violations == 0;

    let mut round_trip: f64 = 0.0;
    for total in [10u64, 10_000, 1_000_000] {
        for n in [1, total / 7, total / 2, total - 1] {
            for eps in [0.01, 1.0, 37.0] {
                let b = beta_from_occupancy(n, total, eps).unwrap().value();
                round_trip = round_trip.max((occupancy(b * eps) - n as f64 / total as f64).abs());
            }
        }
    }

    let mut evenness: f64 = 0.0;
    let mut smax = f64::NEG_INFINITY;
    for i in -5000..=5000 {
        let x = f64::from(i) * 0.01;
        let s = entropy_s1(x).value();
        evenness = evenness.max((s - entropy_s1(-x).value()).abs());
        smax = smax.max(s);
    }

    let two = EngineRing::two_level(&[0.5, 1.5, 4.0, 2.0], &[30, 25, 60, 40], 100).unwrap();
    let one = run_ensemble_with_workers(&two, 200_000, 9, 1).unwrap();
    let eight = run_ensemble_with_workers(&two, 200_000, 9, 8).unwrap();
    let deterministic = one == eight;

    let mut reduction: f64 = 0.0;
    for (el, eh, nl, nh) in [
        (1.0, 2.0, 2000, 3000),
        (0.3, 7.0, 9000, 100),
        (2.0, 2.5, 0, 10_000),
    ] {
        let spec = OttoSpec::from_counts(el, eh, 10_000, nl, nh).unwrap();
        let ring = mean_heats_ring(&spec.to_ring(true));
        let (q_l, q_h) = mean_heats_otto(&spec);
        reduction = reduction
            .max((ring.q_low - q_l).abs())
            .max((ring.q_high - q_h).abs())
            .max((ring.work - mean_work_otto(&spec)).abs());
    }

    let pass = conservation
        && round_trip <= 1e-12
        && evenness <= 1e-14
        && near(smax, 2f64.ln(), 1e-15)
        && deterministic
        && reduction <= 1e-14;
    r.line(
        "AC10",
        pass,
        format!(
            "properties: conservation violations={} in 1e6 trials; occupancy round trip={round_trip:.1e}; s evenness={evenness:.1e} max={smax:.12}; 1 vs 8 workers identical={deterministic}; m=1 reduction={reduction:.1e}",
            stats.conservation_violations
        ),
    );
}

fn fig4(r: &mut Report) {
    let (bl, bh) = (beta(1.38), beta(0.42));
    let ec = carnot_efficiency(bl, bh).unwrap();
    let opts = OptimizerOptions::default();

    let mut ordered = true;
    let mut rows = Vec::new();
    for w in [0.05, 0.1, 0.15] {
        let etas: Vec<f64> = ["1", "2", "3", "inf"]
            .iter()
            .map(|k| {
                optimize(k.parse().unwrap(), bl, bh, w, Mode::Max, &opts)
                    .unwrap()
                    .eta
            })
            .collect();
        ordered &= etas.windows(2).all(|p| p[1] >= p[0] - 1e-6) && etas[3] <= ec + 1e-9;
        rows.push(format!(
            "W={w}: {}",
            etas.iter()
                .map(|e| format!("{e:.4}"))
                .collect::<Vec<_>>()
                .join(" <= ")
        ));
    }
    r.line(
        "ORDER",
        ordered,
        format!("max eta ordered in m=1,2,3,inf: {}", rows.join("; ")),
    );

    let pts = sample_region(1, bl, bh, 100_000, 10.0, 1).unwrap();
    let wmax = pts.iter().map(|p| p.work).fold(f64::NEG_INFINITY, f64::max);
    let frontier = optimize("1".parse().unwrap(), bl, bh, 0.1, Mode::Max, &opts)
        .unwrap()
        .eta;
    let sampled = pts
        .iter()
        .filter(|p| !p.flagged && (p.work - 0.1).abs() < 1e-3)
        .filter_map(|p| p.eta)
        .fold(f64::NEG_INFINITY, f64::max);
    let flagged = pts.iter().filter(|p| p.flagged).count();
    let envelope = near(wmax, 0.2, 0.004) && sampled <= frontier + 1e-3;
    r.line(
        "REGION",
        envelope,
        format!(
            "m=1 region from 1e5 samples: max W={wmax:.4}; best sampled eta near W=0.1 is {sampled:.4} vs frontier {frontier:.4}; {flagged} points flagged"
        ),
    );

    let ws = [0.2, 0.4, 0.8];
    let etas: Vec<f64> = ws
        .iter()
        .map(|&w| carnot_frontier(bl, bh, w, Mode::Min, &opts).unwrap().eta)
        .collect();
    let slope = ws.iter().zip(&etas).map(|(w, e)| w * e).sum::<f64>()
        / ws.iter().map(|w| w * w).sum::<f64>();
    let mean = etas.iter().sum::<f64>() / 3.0;
    let ss_res: f64 = ws
        .iter()
        .zip(&etas)
        .map(|(w, e)| (e - slope * w).powi(2))
        .sum();
    let ss_tot: f64 = etas.iter().map(|e| (e - mean).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    r.line(
        "MINETA",
        r2 > 0.95,
        format!(
            "continuum min eta at W=0.2,0.4,0.8: {etas:.4?}; fit through origin slope={slope:.4} R^2={r2:.6}"
        ),
    );
}

fn main() -> ExitCode {
    let mut r = Report {
        failed: Vec::new(),
        known: 0,
    };
    ac1(&mut r);
    ac2(&mut r);
    ac3(&mut r);
    ac4(&mut r);
    ac5(&mut r);
    ac6(&mut r);
    ac7(&mut r);
    ac8(&mut r);
    ac9(&mut r);
    ac10(&mut r);
    fig4(&mut r);
    println!(
        "acceptance: {} unexpected failure(s), {} known deviation(s)",
        r.failed.len(),
        r.known
    );
    if r.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", r.failed.join(", "));
        ExitCode::FAILURE
    }
}
