//! Acceptance suite. Prints one PASS/FAIL line per property and exits
//! nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use red_core::denoise::{
    default_fd_step, homogeneity_residual, jacobian_spectral_radius_estimate, BoxFilter, Denoiser, GaussianFilter,
};
use red_core::experiment::{run_parallel, Comparison, RunConfig, Settings, SolverKind, TaskKind, TaskSpec};
use red_core::image::add_gaussian_noise;
use red_core::ops::{compose, make_blur, Decimation, Identity, Operator};
use red_core::red::RedProblem;
use red_core::solve::{
    fp_step, run_wpm, sr1_weighting, wpm_step, RankOneSign, SolverConfig, SolverEvent, SolverTrace, Weighting,
    WeightingRule,
};
use red_core::{Dims, Image, Kernel};

type Check = Result<String, String>;

fn fail_if(cond: bool, detail: String) -> Check {
    if cond {
        Err(detail)
    } else {
        Ok(detail)
    }
}

/// Runs both chains independently. Also reports the single-step gap from a
/// shared iterate, which isolates the CG error from its propagation.
fn fp_wpm_equivalence() -> Check {
    let (p, y, _) = deblur_instance();
    let cfg = SolverConfig::default();
    let b = Weighting::scaled_identity(p.alpha()).unwrap();
    let (mut xf, mut xw) = (y.clone(), y);
    let (mut worst_chain, mut worst_single, mut first_bad) = (0.0f64, 0.0f64, None);
    for k in 1..=20 {
        let bound = 10.0 * cfg.cg_tol * xf.norm();
        let next_f = fp_step(&p, &xf, &cfg).map_err(|e| e.to_string())?;
        let single = wpm_step(&p, &xf, &b, 1.0, &cfg).map_err(|e| e.to_string())?;
        xw = wpm_step(&p, &xw, &b, 1.0, &cfg).map_err(|e| e.to_string())?;
        xf = next_f;
        let chain = xf.distance(&xw) / bound;
        worst_chain = worst_chain.max(chain);
        worst_single = worst_single.max(xf.distance(&single) / bound);
        if chain > 1.0 && first_bad.is_none() {
            first_bad = Some(k);
        }
    }
    let detail = format!("20 steps, worst distance/bound {worst_chain:.3} (single step {worst_single:.3})");
    match first_bad {
        Some(k) => Err(format!("{detail}; bound first exceeded at step {k}")),
        None => Ok(detail),
    }
}

fn gradient_finite_differences() -> Check {
    let (deblur, _, _) = deblur_instance();
    let sr_task = TaskSpec::protocol(TaskKind::SuperResolution);
    let sr_clean = camera48();
    let sr = red_core::experiment::degrade(&sr_task, &sr_clean).unwrap();
    let sr_problem =
        RedProblem::new(sr.operator, sr.measurement, 5.0, 0.01, Arc::new(Denoiser::gaussian(5, 1.0).unwrap())).unwrap();

    let mut r = rng(2);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let p = if i < 5 { &deblur } else { &sr_problem };
        let x = uniform_image(p.dims(), 0.0, 255.0, &mut r);
        let v = normal_image(p.dims(), &mut r);
        let h = 1.0;
        let ep = p.objective(&x.lin_comb(1.0, &v, h)).unwrap();
        let em = p.objective(&x.lin_comb(1.0, &v, -h)).unwrap();
        let fd = (ep - em) / (2.0 * h);
        let analytic = p.gradient(&x).unwrap().dot(&v);
        let rel = (fd - analytic).abs() / analytic.abs();
        worst = worst.max(rel);
    }
    fail_if(worst > 1e-5, format!("10 points, worst relative error {worst:.3e}"))
}

fn sr1_secant() -> Check {
    let dims = Dims::new(16, 16);
    let mut r = rng(3);
    let zero = Image::zeros(dims);
    let (mut taken, mut worst) = (0, 0.0f64);
    while taken < 100 {
        let s = normal_image(dims, &mut r);
        let mut m = normal_image(dims, &mut r).lin_comb(1.0, &s, 0.5);
        if s.dot(&m) < 0.0 {
            m = m.scaled(-1.0);
        }
        let up = sr1_weighting(2, &s, &zero, &m, &zero, 0.02, 1.25, 1e-8).map_err(|e| e.to_string())?;
        if up.fallback.is_some() || up.weighting.rank_one().is_none() {
            return Err(format!("pair {taken}: rank-one branch not taken ({:?})", up.fallback));
        }
        let res = up.weighting.apply(&s).distance(&m) / m.norm();
        worst = worst.max(res);
        taken += 1;
    }
    fail_if(worst > 1e-9, format!("100 pairs, worst ‖Bs−m‖/‖m‖ {worst:.3e}"))
}

fn denoiser_assumptions() -> Check {
    let bundled: Vec<(&str, Denoiser)> = vec![
        ("gaussian 5/1.0", Denoiser::new(GaussianFilter::new(5, 1.0).unwrap())),
        ("gaussian 3/0.5", Denoiser::new(GaussianFilter::new(3, 0.5).unwrap())),
        ("box 3", Denoiser::new(BoxFilter::new(3).unwrap())),
        ("box 5", Denoiser::new(BoxFilter::new(5).unwrap())),
    ];
    let mut r = rng(4);
    let (mut worst_h, mut worst_rho) = (0.0f64, 0.0f64);
    for (name, d) in &bundled {
        for trial in 0..3 {
            let x = uniform_image(Dims::new(32, 32), 0.0, 255.0, &mut r);
            for c in [0.99, 0.999, 1.001, 1.01] {
                let h = homogeneity_residual(d, &x, c).map_err(|e| e.to_string())?;
                worst_h = worst_h.max(h);
                if h > 1e-8 {
                    return Err(format!("{name}: homogeneity residual {h:.3e} at c = {c}"));
                }
            }
            let rho =
                jacobian_spectral_radius_estimate(d, &x, 60, default_fd_step(&x), trial).map_err(|e| e.to_string())?;
            worst_rho = worst_rho.max(rho);
            if rho > 1.0 + 1e-6 {
                return Err(format!("{name}: spectral radius estimate {rho}"));
            }
        }
    }
    Ok(format!("{} denoisers, worst homogeneity {worst_h:.3e}, worst radius {worst_rho:.9}", bundled.len()))
}

fn operator_suite() -> Check {
    let asym = Kernel::from_taps(3, vec![0.05, 0.1, 0.0, 0.2, 0.3, 0.05, 0.0, 0.25, 0.05]).unwrap();
    let mut ops: Vec<(String, Operator)> = Vec::new();
    for dims in [Dims::new(36, 36), Dims::new(30, 36)] {
        let kernels = [
            ("uniform 9", Kernel::uniform(9).unwrap()),
            ("gaussian 9/1.6", Kernel::gaussian(9, 1.6).unwrap()),
            ("gaussian 7/1.6", Kernel::gaussian(7, 1.6).unwrap()),
            ("asymmetric 3", asym.clone()),
        ];
        for (name, k) in kernels {
            ops.push((format!("blur {name} {dims}"), Arc::new(make_blur(k, dims).unwrap())));
        }
        ops.push((format!("identity {dims}"), Arc::new(Identity::new(dims))));
        for (f, o) in [(2, 0), (2, 1), (3, 0), (3, 2)] {
            ops.push((format!("decimation {f}+{o} {dims}"), Arc::new(Decimation::with_offset(f, o, dims).unwrap())));
        }
        let b1: Operator = Arc::new(make_blur(Kernel::gaussian(7, 1.6).unwrap(), dims).unwrap());
        let b2: Operator = Arc::new(make_blur(asym.clone(), dims).unwrap());
        let dec: Operator = Arc::new(Decimation::new(3, dims).unwrap());
        ops.push((format!("decimate∘blur {dims}"), Arc::new(compose(dec, b1.clone()).unwrap())));
        ops.push((format!("blur∘blur {dims}"), Arc::new(compose(b2, b1).unwrap())));
    }

    let mut r = rng(5);
    let (mut worst_adj, mut worst_fourier, mut circulant) = (0.0f64, 0.0f64, 0);
    for (name, op) in &ops {
        for _ in 0..3 {
            let x = normal_image(op.input_dims(), &mut r);
            let y = normal_image(op.output_dims(), &mut r);
            let lhs = op.apply(&x).unwrap().dot(&y);
            let rhs = x.dot(&op.adjoint_apply(&y).unwrap());
            let rel = (lhs - rhs).abs() / (x.norm() * y.norm());
            worst_adj = worst_adj.max(rel);
            if rel > 1e-8 {
                return Err(format!("{name}: adjoint mismatch {rel:.3e}"));
            }
            if let Some(sym) = op.circulant_symbol() {
                let fwd = sym.apply(&x);
                let adj = sym.apply_adjoint(&x);
                let e1 = fwd.distance(&op.apply(&x).unwrap()) / op.apply(&x).unwrap().norm();
                let e2 = adj.distance(&op.adjoint_apply(&x).unwrap()) / op.adjoint_apply(&x).unwrap().norm();
                worst_fourier = worst_fourier.max(e1.max(e2));
                if e1.max(e2) > 1e-8 {
                    return Err(format!("{name}: Fourier and spatial paths differ by {:.3e}", e1.max(e2)));
                }
            }
        }
        circulant += usize::from(op.circulant_symbol().is_some());
    }
    Ok(format!(
        "{} operators ({circulant} circulant), worst adjoint {worst_adj:.3e}, worst Fourier {worst_fourier:.3e}",
        ops.len()
    ))
}

struct Benchmarks {
    deblur: Result<Vec<SolverTrace>, String>,
    sr: Result<Vec<SolverTrace>, String>,
}

fn run_benchmarks() -> Benchmarks {
    let clean = camera128();
    let task = TaskSpec::protocol(TaskKind::DeblurUniform).with_seed(7);
    let deblur_cfgs: Vec<_> = SolverKind::ALL
        .into_iter()
        .map(|s| RunConfig::new(task.clone(), s, 0.02, "gaussian:5:1.0".parse().unwrap()).with_budget(200))
        .collect();

    let sr_settings = Settings::from_file(repo_path("configs/sr_scaled.toml")).expect("configs/sr_scaled.toml");
    let sr_clean = camera48();
    let sr_cfgs: Result<Vec<_>, _> = SolverKind::ALL.into_iter().map(|s| sr_settings.run_config(s)).collect();

    let collect = |rs: Vec<red_core::Result<red_core::experiment::ExperimentOutput>>| {
        rs.into_iter().map(|r| r.map(|o| o.trace).map_err(|e| e.to_string())).collect::<Result<Vec<_>, _>>()
    };
    std::thread::scope(|s| {
        let sr = s.spawn(|| match sr_cfgs {
            Ok(cfgs) => collect(run_parallel(&cfgs, Some(&sr_clean))),
            Err(e) => Err(e.to_string()),
        });
        let deblur = collect(run_parallel(&deblur_cfgs, Some(&clean)));
        Benchmarks { deblur, sr: sr.join().unwrap() }
    })
}

fn strict_ordering(label: &str, traces: &[SolverTrace], require_fp_full_budget: bool) -> Check {
    let refs: Vec<_> = traces.iter().collect();
    let table = Comparison::new(&refs, 0, 0.1).map_err(|e| e.to_string())?;
    let get = |s: &str| table.row(s).and_then(|r| r.evals_to_match);
    let (fp, apg, wpm) = (get("fp"), get("apg"), get("wpm"));
    let summary = format!(
        "{label}: target {:.3} dB, evals to match fp={} apg={} wpm={}",
        table.target_psnr,
        fp.map_or("-".into(), |v| v.to_string()),
        apg.map_or("-".into(), |v| v.to_string()),
        wpm.map_or("-".into(), |v| v.to_string())
    );
    let (Some(fp), Some(apg), Some(wpm)) = (fp, apg, wpm) else {
        return Err(format!("{summary} (a solver never matched)"));
    };
    let mut problems = Vec::new();
    if !(wpm < apg && apg < fp) {
        problems.push("ordering wpm < apg < fp violated".to_string());
    }
    if require_fp_full_budget {
        if fp != 200 {
            problems.push(format!("fp matched at {fp}, not at its full budget of 200"));
        }
        if !(wpm as f64 <= 0.6 * apg as f64 || wpm as f64 <= 0.4 * fp as f64) {
            problems.push(format!("wpm={wpm} exceeds both 60% of apg and 40% of fp"));
        }
    }
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", problems.join("; ")))
    }
}

fn ordering_benchmark(b: &Benchmarks) -> Check {
    let deblur = b.deblur.as_ref().map_err(|e| format!("deblur run failed: {e}"))?;
    let sr = b.sr.as_ref().map_err(|e| format!("super-resolution run failed: {e}"))?;
    match (strict_ordering("deblur", deblur, true), strict_ordering("super-resolution", sr, false)) {
        (Ok(a), Ok(b)) => Ok(format!("{a} | {b}")),
        (a, b) => Err(format!("{} | {}", a.unwrap_or_else(|e| e), b.unwrap_or_else(|e| e))),
    }
}

fn safeguard(b: &Benchmarks) -> Check {
    let deblur = b.deblur.as_ref().map_err(|e| format!("deblur run failed: {e}"))?;
    let wpm = deblur.iter().find(|t| t.solver == "wpm").ok_or("no wpm trace")?;
    if wpm.step_halvings() != 0 {
        return Err(format!("benchmark wpm halved its step {} times", wpm.step_halvings()));
    }

    let (p, y, _) = deblur_instance();
    let eps = 1e-2;
    let cfg = SolverConfig {
        weighting: WeightingRule::Fixed(Weighting::scaled_identity(1e-4 * p.alpha()).unwrap()),
        safeguard_epsilon: eps,
        ..SolverConfig::with_budget(60)
    };
    let out = run_wpm(&p, &y, &cfg, None).map_err(|e| format!("adversarial run failed: {e}"))?;
    let t = &out.trace;
    if t.step_halvings() == 0 {
        return Err("adversarial weighting never triggered a halving".into());
    }
    let mut prev = p.objective(&y).unwrap();
    for r in &t.records {
        if r.objective - prev > eps * r.objective {
            return Err(format!(
                "accepted step at iteration {} grew the objective by {:.3e}",
                r.iteration,
                r.objective - prev
            ));
        }
        prev = r.objective;
    }
    for e in &t.events {
        if let SolverEvent::StepHalved { objective_before, rejected_objective, .. } = e {
            if rejected_objective - objective_before <= eps * rejected_objective {
                return Err("a halving was recorded for a step within the growth bound".into());
            }
        }
    }
    Ok(format!(
        "benchmark wpm: 0 halvings; adversarial run: {} halvings, status {}, all accepted steps within bound",
        t.step_halvings(),
        t.status.map_or("none".into(), |s| s.to_string())
    ))
}

fn dense_oracles() -> Check {
    let hi = Dims::new(8, 8);
    let blur: Operator = Arc::new(make_blur(Kernel::gaussian(3, 0.8).unwrap(), hi).unwrap());
    let sr: Operator = Arc::new(
        compose(
            Arc::new(Decimation::new(2, hi).unwrap()),
            Arc::new(make_blur(Kernel::gaussian(5, 1.0).unwrap(), hi).unwrap()),
        )
        .unwrap(),
    );
    let n = hi.len();
    let mut r = rng(8);
    let mut worst = 0.0f64;
    let mut track = |label: &str, e: f64| -> Result<(), String> {
        worst = worst.max(e);
        if e > 1e-6 {
            Err(format!("{label}: relative error {e:.3e}"))
        } else {
            Ok(())
        }
    };

    for (name, op) in [("blur", blur), ("super-resolution", sr)] {
        let clean = uniform_image(hi, 0.0, 255.0, &mut r);
        let (sigma, alpha) = (3.0, 0.3);
        let y = add_gaussian_noise(&op.apply(&clean).unwrap(), sigma, 1).unwrap();
        let d = Arc::new(Denoiser::gaussian(3, 0.7).unwrap());
        let p = RedProblem::new(op.clone(), y.clone(), sigma, alpha, d.clone()).unwrap();

        let h = Dense::of_operator(op.as_ref());
        let w = Dense::of_denoiser(&d, hi);
        let ht = h.transpose();
        let i_minus_w = Dense::identity(n).combine(1.0, &w, -1.0);
        let x = uniform_image(hi, 0.0, 255.0, &mut r);
        let xv = x.data();

        let resid: Vec<f64> = h.mul_vec(xv).iter().zip(y.data()).map(|(a, b)| a - b).collect();
        let prior = 0.5 * dot(xv, &i_minus_w.mul_vec(xv));
        let objective = dot(&resid, &resid) / (2.0 * sigma * sigma) + alpha * prior;
        let prior_grad: Vec<f64> = i_minus_w.mul_vec(xv).iter().map(|v| alpha * v).collect();
        let grad: Vec<f64> = ht.mul_vec(&resid).iter().zip(&prior_grad).map(|(a, b)| a / (sigma * sigma) + b).collect();

        track(&format!("{name} prior"), rel_err(&[p.prior_value(&x).unwrap()], &[prior]))?;
        track(&format!("{name} objective"), rel_err(&[p.objective(&x).unwrap()], &[objective]))?;
        track(&format!("{name} prior gradient"), rel_err(p.prior_gradient(&x).unwrap().data(), &prior_grad))?;
        track(&format!("{name} gradient"), rel_err(p.gradient(&x).unwrap().data(), &grad))?;

        for sign in [RankOneSign::Positive, RankOneSign::Negative] {
            let u = normal_image(hi, &mut r);
            let tau = 0.5 + 2.0 * u.norm_sq();
            let wgt = Weighting::with_rank_one(tau, u, sign).unwrap();
            let bd = Dense::of_weighting(&wgt, n);
            let v = normal_image(hi, &mut r);
            track(&format!("{name} weighting {sign:?}"), rel_err(wgt.apply(&v).data(), &bd.mul_vec(v.data())))?;

            let a = 0.7;
            let cfg = SolverConfig { cg_tol: 1e-13, cg_max_iters: 1000, ..SolverConfig::default() };
            let step = wpm_step(&p, &x, &wgt, a, &cfg).map_err(|e| e.to_string())?;
            let s = a / (sigma * sigma);
            let system = ht.matmul(&h).combine(s, &bd, 1.0);
            let bx = bd.mul_vec(xv);
            let hty = ht.mul_vec(y.data());
            let rhs: Vec<f64> = (0..n).map(|i| s * hty[i] + bx[i] - a * prior_grad[i]).collect();
            let expected = system.solve(&rhs);
            track(&format!("{name} wpm step {sign:?}"), rel_err(step.data(), &expected))?;
        }
    }
    Ok(format!("blur and super-resolution instances, worst relative error {worst:.3e}"))
}

fn report(name: &str, limit: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = f();
    let took = start.elapsed();
    let (ok, mut detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let in_time = took <= limit;
    if !in_time {
        detail.push_str(&format!("; runtime limit {:.0} s exceeded", limit.as_secs_f64()));
    }
    let pass = ok && in_time;
    println!("{} {name}: {detail} [{:.2} s]", if pass { "PASS" } else { "FAIL" }, took.as_secs_f64());
    pass
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut all = true;
    all &= report("fp_wpm_equivalence", secs(10), fp_wpm_equivalence);
    all &= report("gradient_finite_differences", secs(5), gradient_finite_differences);
    all &= report("sr1_secant_condition", secs(1), sr1_secant);
    all &= report("denoiser_assumptions", secs(10), denoiser_assumptions);
    all &= report("adjoint_and_fourier", secs(5), operator_suite);

    let start = Instant::now();
    let benchmarks = run_benchmarks();
    let bench_time = start.elapsed();
    all &= report("convergence_ordering", secs(120).saturating_sub(bench_time), || ordering_benchmark(&benchmarks));
    all &= report("safeguard", secs(120), || safeguard(&benchmarks));
    all &= report("dense_oracles", secs(5), dense_oracles);
    println!("benchmark runs took {:.2} s", bench_time.as_secs_f64());

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
