//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use ehfbl::bounds::{
    achievable_log_m, awgn_dispersion, eh_capacity, error_budget, make_schedule,
    mc_moments, quadrature_moments, split_blocklength, theorem1_closed_form, ChannelParams,
};
use ehfbl::codec::{berry_esseen_check, monte_carlo, SimConfig};
use ehfbl::ehmodel::HarvestModel;
use ehfbl::numerics::{std_normal_quantile, LOG2_E};
use std::process::Command;
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn params(noise_var: f64, harvest_mean: f64) -> ChannelParams {
    ChannelParams::new(noise_var, harvest_mean).unwrap()
}

fn closed_form_identities() -> Outcome {
    let mut failures = Vec::new();
    let c = eh_capacity(&params(2.5, 2.5));
    if c != 0.5 {
        failures.push(format!("capacity {c} != 0.5"));
    }
    let v = awgn_dispersion(1.0, 1.0).unwrap();
    let want = 0.375 * LOG2_E * LOG2_E;
    if (v - want).abs() > 1e-12 {
        failures.push(format!("dispersion {v} vs {want}"));
    }
    let q = std_normal_quantile(0.5).unwrap();
    if q.abs() > 1e-12 {
        failures.push(format!("quantile(0.5) = {q}"));
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("C = {c}, V(1,1) = {v:.15}, q(0.5) = {q}")
        } else {
            failures.join("; ")
        },
    )
}

fn moment_consistency() -> Outcome {
    let sets = [(1.0, 1.0), (1.0, 0.1), (0.5, 4.0), (2.0, 30.0), (1.0, 1e-3)];
    let mut worst_z: f64 = 0.0;
    let mut failures = Vec::new();
    for (i, &(nv, ey)) in sets.iter().enumerate() {
        let p = params(nv, ey);
        let q = match quadrature_moments(&p, 0.0, 64) {
            Ok(q) => q,
            Err(e) => {
                failures.push(format!("set {i}: {e}"));
                continue;
            }
        };
        let c = eh_capacity(&p);
        let v = ey / (ey + nv) * LOG2_E * LOG2_E;
        if (q.mean_bits - c).abs() > 1e-9 {
            failures.push(format!("set {i}: mean {} vs {c}", q.mean_bits));
        }
        if (q.var_bits2 / v - 1.0).abs() > 1e-6 {
            failures.push(format!("set {i}: variance {} vs {v}", q.var_bits2));
        }
        let mc = mc_moments(&p, 0.0, 1_000_000, 1000 + i as u64).unwrap();
        for (name, m, qv, se) in [
            ("mean", mc.set.mean_bits, q.mean_bits, mc.se_mean),
            ("variance", mc.set.var_bits2, q.var_bits2, mc.se_var),
            ("abs3", mc.set.abs3_bits3, q.abs3_bits3, mc.se_abs3),
        ] {
            let z = (m - qv).abs() / se;
            worst_z = worst_z.max(z);
            if z > 5.0 {
                failures.push(format!("set {i}: MC {name} {m} vs {qv} ({z:.2} SE)"));
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("5 parameter sets, largest MC deviation {worst_z:.2} SE"))
    } else {
        Err(failures.join("; "))
    }
}

fn error_event_dominance() -> Outcome {
    // (harvest, noise_var, n, a)
    let configs = [
        (HarvestModel::Exponential { mean: 1.0 }, 1.0, 64, 1.0),
        (HarvestModel::Exponential { mean: 1.0 }, 1.0, 50, 1.0),
        (HarvestModel::Exponential { mean: 1.0 }, 1.0, 80, 1.0),
        (HarvestModel::Exponential { mean: 1.0 }, 1.0, 96, 1.2),
        (HarvestModel::Exponential { mean: 3.0 }, 0.5, 60, 1.0),
        (HarvestModel::Uniform { mean: 1.0, width: 2.0 }, 1.0, 64, 1.0),
        (HarvestModel::Uniform { mean: 1.0, width: 2.0 }, 2.0, 40, 1.0),
        (HarvestModel::Uniform { mean: 1.0, width: 1.0 }, 1.0, 32, 1.0),
        (HarvestModel::BernoulliScaled { mean: 1.0, p: 0.25 }, 1.0, 90, 1.5),
        (HarvestModel::BernoulliScaled { mean: 2.0, p: 0.5 }, 1.0, 70, 1.3),
    ];
    let trials = 20_000;
    let mut failures = Vec::new();
    let mut worst: f64 = f64::NEG_INFINITY;
    for (i, (model, nv, n, a)) in configs.into_iter().enumerate() {
        let p = params(nv, model.mean());
        let var_y = model.variance();
        let m = quadrature_moments(&p, var_y, 64).unwrap();
        let sched = make_schedule(n, a, &p).unwrap();
        let b = error_budget(4.0, &sched, &m, var_y, &p).unwrap();
        for (name, v) in [("E0", b.e0), ("E1", b.e1), ("E2", b.e2)] {
            if !(v > 0.01 && v < 0.9) {
                failures.push(format!("config {i}: {name} bound {v} outside (0.01, 0.9)"));
            }
        }
        let sim = SimConfig::new(p, model, sched, 16).unwrap();
        let mc = monte_carlo(&sim, trials, 500 + i as u64).unwrap();
        for (name, est, bound) in [("E0", &mc.e0, b.e0), ("E1", &mc.e1, b.e1), ("E2", &mc.e2, b.e2)] {
            let slack = est.rate - bound - 3.0 * est.std_error();
            worst = worst.max(est.rate - bound);
            if slack > 0.0 {
                failures.push(format!(
                    "config {i}: Pr({name}) = {} exceeds bound {bound} by more than 3 SE",
                    est.rate
                ));
            }
        }
    }
    if failures.is_empty() {
        Ok(format!(
            "10 configurations x {trials} trials, max(rate - bound) = {worst:.4}"
        ))
    } else {
        Err(failures.join("; "))
    }
}

fn berry_esseen_envelope() -> Outcome {
    let p = params(1.0, 1.0);
    let m = quadrature_moments(&p, 0.0, 64).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [16, 64, 256] {
        let r = berry_esseen_check(&p, &m, n, 100_000, 77 + n).unwrap();
        ok &= r.holds();
        parts.push(format!(
            "n={n}: D={:.4} <= {:.4}+{:.4}",
            r.sup_distance, r.envelope, r.dkw
        ));
    }
    check(ok, parts.join(", "))
}

fn union_bound_end_to_end() -> Outcome {
    let p = params(1.0, 1.0);
    let sched = make_schedule(128, 1.0, &p).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for model in [HarvestModel::Exponential { mean: 1.0 }, HarvestModel::Constant { mean: 1.0 }] {
        let var_y = model.variance();
        let m = quadrature_moments(&p, var_y, 64).unwrap();
        let budget = error_budget(4.0, &sched, &m, var_y, &p).unwrap().total();
        let sim = SimConfig::new(p, model, sched, 16).unwrap();
        let mc = monte_carlo(&sim, 10_000, 31).unwrap();
        let applies = budget < 1.0;
        let holds = !applies || mc.error.rate <= budget + 3.0 * mc.error.std_error();
        ok &= holds;
        parts.push(format!(
            "{}: error {:.4} (se {:.4}) vs budget {budget:.4}{}",
            model.kind(),
            mc.error.rate,
            mc.error.std_error(),
            if applies { "" } else { " (vacuous)" }
        ));
    }
    check(ok, parts.join(", "))
}

fn theorem_scaling() -> Outcome {
    let p = params(1.0, 1.0);
    let c = eh_capacity(&p);
    let (eps, a) = (0.1, 1.0);
    let model = HarvestModel::Constant { mean: 1.0 };
    let var_y = model.variance();
    let m = quadrature_moments(&p, var_y, 64).unwrap();
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    let mut backoffs = Vec::new();
    for n_hat in [10_000u64, 100_000, 1_000_000, 10_000_000] {
        let rep = match theorem1_closed_form(n_hat, eps, a, &m, var_y, &p) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("n_hat={n_hat}: {e}"));
                continue;
            }
        };
        let nh = n_hat as f64;
        let bound = rep.expression_bits().unwrap();
        let backoff = (c - bound / nh) * nh.sqrt() / nh.ln().powf(a);
        backoffs.push(format!("{n_hat}: {backoff:.3}"));
        if !(c / 2.0..=2.0 * c).contains(&backoff) {
            failures.push(format!("n_hat={n_hat}: backoff {backoff} outside [C/2, 2C]"));
        }
        let (n, _) = split_blocklength(n_hat, a).unwrap();
        let sched = make_schedule(n, a, &p).unwrap();
        let ach = achievable_log_m(eps, &sched, &m, var_y, &p).unwrap();
        match (rep.log_m_bits, ach.log_m_bits) {
            (Some(cf), Some(ex)) => {
                if cf > ex {
                    // The sharp √V variant is informational only.
                    let sharp = rep.sharp_log_m_bits.unwrap_or(f64::NAN);
                    failures.push(format!(
                        "n_hat={n_hat}: closed form {cf:.1} > achievable {ex:.1} (sharp variant {sharp:.1})"
                    ));
                }
                parts.push(format!("{n_hat}: {cf:.0} <= {ex:.0}"));
            }
            (None, None) => parts.push(format!("{n_hat}: both infeasible")),
            (cf, ex) => failures.push(format!(
                "n_hat={n_hat}: feasibility disagrees ({cf:?} vs {ex:?})"
            )),
        }
    }
    let summary = format!("backoff (allowed [{}, {}]) {}", c / 2.0, 2.0 * c, backoffs.join(", "));
    if failures.is_empty() {
        Ok(format!("{summary}; closed form vs achievable {}", parts.join(", ")))
    } else {
        Err(format!("{summary}; {}", failures.join("; ")))
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{
            "channel": {"noise_var": 1.0, "harvest_mean": 1.0},
            "harvest": {"kind": "exponential"},
            "n": [64, 128, 1000],
            "eps": [0.2, 0.5],
            "a": [1.0],
            "messages": 8,
            "trials": 2000,
            "seed": 12345
        }"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "8", "1", "8"] {
        let out = dir.path().join(format!("out{}.csv", outputs.len()));
        let status = Command::new(env!("CARGO_BIN_EXE_ehfbl"))
            .args(["sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .env("EHFBL_THREADS", threads)
            .status()
            .unwrap();
        if !status.success() {
            return Err(format!("sweep with {threads} threads exited with {status}"));
        }
        outputs.push(std::fs::read(&out).unwrap());
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    check(
        same && !outputs[0].is_empty(),
        format!("4 runs at 1 and 8 threads, {} bytes each", outputs[0].len()),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("closed-form identities", closed_form_identities),
        ("moment consistency", moment_consistency),
        ("error-event bound dominance", error_event_dominance),
        ("Berry-Esseen envelope", berry_esseen_envelope),
        ("end-to-end union bound", union_bound_end_to_end),
        ("backoff scaling", theorem_scaling),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS [{secs:.1}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL [{secs:.1}s] {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
