//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, nonzero exit
//! status if any criterion fails or overruns its time limit.

// `ensure!` negates float comparisons, so a NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use orlicz_core::convexity::{
    modulus_of_convexity, strict_convexity_harness, uniform_convexity_harness, FiberSpace, LiftRoute,
};
use orlicz_core::duality::{embed, isometry_check, represent, AscentBudget};
use orlicz_core::{
    EventClass, LpExponent, ModuleElement, ModuleOrliczContext, NormFlavor, OrliczContext, ProbSpace, RandomFunctional,
    RandomVariable, RnModule, Tabulated, Tail, YoungFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONJUGATE_TOL: f64 = 1e-9;
const BICONJUGATE_TOL: f64 = 1e-9;
const BICONJUGATE_TABLE_TOL: f64 = 1e-4;
const LUXEMBURG_TOL: f64 = 1e-9;
const ORLICZ_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 1e-4;
const HOLDER_TOL: f64 = 1e-9;
const ISOMETRY_TOL: f64 = 1e-4;
const REPRESENT_TOL: f64 = 1e-9;
const XG_TOL: f64 = 1e-12;
const MODULUS_TOL: f64 = 1e-4;
const VANISHING_TOL: f64 = 1e-6;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a == b) || (a - b).abs() <= tol * b.abs().max(1.0)
}

fn uniform(m: usize) -> ProbSpace {
    ProbSpace::uniform(m).unwrap()
}

fn random_space(rng: &mut ChaCha8Rng, m: usize) -> ProbSpace {
    let masses: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    ProbSpace::normalized(&masses).unwrap()
}

fn random_values(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(-scale..scale)).collect()
}

fn random_exponent(rng: &mut ChaCha8Rng) -> LpExponent {
    match rng.random_range(0..4) {
        0 => LpExponent::ONE,
        1 => LpExponent::TWO,
        2 => LpExponent::INFINITY,
        _ => LpExponent::new(rng.random_range(1.1..5.0)).unwrap(),
    }
}

fn random_field(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| random_values(rng, n, 3.0)).collect()
}

fn lp(weights: &[f64], values: &[f64], p: f64) -> f64 {
    weights
        .iter()
        .zip(values)
        .map(|(w, v)| w * v.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

fn fiber_norm(v: &[f64], p: LpExponent) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else {
        v.iter()
            .map(|x| x.abs().powf(p.value()))
            .sum::<f64>()
            .powf(1.0 / p.value())
    }
}

fn finite_families(rng: &mut ChaCha8Rng) -> YoungFunction {
    match rng.random_range(0..3) {
        0 => YoungFunction::power(rng.random_range(1.2..4.0)).unwrap(),
        1 => YoungFunction::scaled_power(rng.random_range(0.3..3.0), rng.random_range(1.2..4.0)).unwrap(),
        _ => YoungFunction::piecewise(vec![0.5, 2.0], vec![0.5, 1.0, 3.0], false).unwrap(),
    }
}

fn conjugation_closed_forms() -> Result<String, String> {
    let mut worst = 0.0f64;
    for p in [1.5f64, 2.0, 3.0, 4.0] {
        let q = p / (p - 1.0);
        let psi = YoungFunction::power(p)
            .unwrap()
            .conjugate()
            .map_err(|e| e.to_string())?;
        for i in 1..=100 {
            let s = 0.05 * i as f64;
            let exact = p.powf(1.0 - q) / q * s.powf(q);
            let got = psi.evaluate(s).map_err(|e| e.to_string())?;
            worst = worst.max((got - exact).abs() / exact.max(1.0));
            ensure!(close(got, exact, CONJUGATE_TOL), "p = {p}, s = {s}: {got} vs {exact}");
        }
    }
    let one = YoungFunction::power(1.0)
        .unwrap()
        .conjugate()
        .map_err(|e| e.to_string())?;
    ensure!(
        one == YoungFunction::linear_jump(1.0).unwrap(),
        "conjugate of t is {one:?}"
    );
    Ok(format!(
        "max relative error {worst:.1e}; conjugate of Power(1) is LinearJump(1)"
    ))
}

fn biconjugation() -> Result<String, String> {
    let grid: Vec<f64> = (0..=80).map(|i| i as f64 * 0.0625).collect();
    let table = Tabulated::sample(
        &(0..=60).map(|i| i as f64 * 0.1).collect::<Vec<_>>(),
        |t| t.powf(2.5) / 2.5,
        Tail::Linear,
    )
    .map_err(|e| e.to_string())?;
    let cases: Vec<(YoungFunction, f64)> = vec![
        (YoungFunction::power(1.0).unwrap(), BICONJUGATE_TOL),
        (YoungFunction::power(1.5).unwrap(), BICONJUGATE_TOL),
        (YoungFunction::power(2.0).unwrap(), BICONJUGATE_TOL),
        (YoungFunction::power(3.0).unwrap(), BICONJUGATE_TOL),
        (YoungFunction::scaled_power(0.7, 2.5).unwrap(), BICONJUGATE_TOL),
        (YoungFunction::scaled_power(2.0, 1.0).unwrap(), BICONJUGATE_TOL),
        (YoungFunction::linear_jump(1.5).unwrap(), BICONJUGATE_TOL),
        (
            YoungFunction::piecewise(vec![1.0, 2.5], vec![0.5, 1.0, 4.0], false).unwrap(),
            BICONJUGATE_TOL,
        ),
        (
            YoungFunction::piecewise(vec![1.0, 3.0], vec![0.0, 2.0], true).unwrap(),
            BICONJUGATE_TOL,
        ),
        (YoungFunction::Tabulated(table), BICONJUGATE_TABLE_TOL),
    ];
    let mut worst = 0.0f64;
    for (phi, tol) in &cases {
        let back = phi
            .conjugate()
            .and_then(|psi| psi.conjugate())
            .map_err(|e| format!("{phi:?}: {e}"))?;
        for &t in &grid {
            let (a, b) = (phi.evaluate(t), back.evaluate(t));
            match (a, b) {
                (Ok(a), Ok(b)) if a.is_finite() || b.is_finite() => {
                    worst = worst.max((a - b).abs() / a.abs().max(1.0));
                    ensure!(close(b, a, *tol), "{phi:?} at {t}: {a} vs {b}");
                }
                (Ok(_), Ok(_)) | (Err(_), Err(_)) => {}
                (a, b) => return Err(format!("{phi:?} at {t}: {a:?} vs {b:?}")),
            }
        }
    }
    Ok(format!("{} families, max relative error {worst:.1e}", cases.len()))
}

fn norm_identities() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut lux_err, mut orl_err) = (0.0f64, 0.0f64);
    for instance in 0..200 {
        let m = rng.random_range(1..=8);
        let space = random_space(&mut rng, m);
        let p: f64 = rng.random_range(1.1..6.0);
        let q = p / (p - 1.0);
        let ctx = OrliczContext::new(YoungFunction::power(p).unwrap(), space.clone()).unwrap();
        let (norm_lux, norm_orl, base) = if instance % 2 == 0 {
            let xi = random_values(&mut rng, m, 5.0);
            let rv = RandomVariable::new(xi.clone());
            (
                ctx.luxemburg_norm(&rv),
                ctx.orlicz_norm(&rv),
                lp(space.weights(), &xi, p),
            )
        } else {
            let n = rng.random_range(1..=4);
            let exps: Vec<LpExponent> = (0..m).map(|_| random_exponent(&mut rng)).collect();
            let module = RnModule::new(space.clone(), n, exps.clone()).unwrap();
            let mctx = ModuleOrliczContext::new(ctx.clone(), module).unwrap();
            let x = random_field(&mut rng, m, n);
            let norms: Vec<f64> = x.iter().zip(&exps).map(|(v, e)| fiber_norm(v, *e)).collect();
            let el = ModuleElement::new(x);
            (
                mctx.module_norm(&el, NormFlavor::Luxemburg),
                mctx.module_norm(&el, NormFlavor::Orlicz),
                lp(space.weights(), &norms, p),
            )
        };
        let (lux, orl) = (
            norm_lux.map_err(|e| e.to_string())?,
            norm_orl.map_err(|e| e.to_string())?,
        );
        let expected_orl = p.powf(1.0 / p) * q.powf(1.0 / q) * base;
        lux_err = lux_err.max((lux - base).abs() / base.max(1e-300));
        orl_err = orl_err.max((orl - expected_orl).abs() / expected_orl.max(1e-300));
        ensure!(
            close(lux, base, LUXEMBURG_TOL),
            "instance {instance}: Luxemburg {lux} vs {base}"
        );
        ensure!(
            close(orl, expected_orl, ORLICZ_TOL),
            "instance {instance}: Orlicz {orl} vs {expected_orl}"
        );
    }
    Ok(format!(
        "200 instances, max relative error Luxemburg {lux_err:.1e}, Orlicz {orl_err:.1e}"
    ))
}

fn oracle_agreement() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut jumps = 0;
    for instance in 0..50 {
        let m = rng.random_range(1..=3);
        let space = random_space(&mut rng, m);
        let phi = match instance % 5 {
            0 => {
                jumps += 1;
                YoungFunction::linear_jump(rng.random_range(0.5..2.0)).unwrap()
            }
            1 => YoungFunction::piecewise(vec![1.0], vec![0.5, 2.0], false).unwrap(),
            _ => finite_families(&mut rng),
        };
        let ctx = OrliczContext::new(phi.clone(), space).unwrap();
        let xi = RandomVariable::new(random_values(&mut rng, m, 3.0));
        let amemiya = ctx.orlicz_norm(&xi).map_err(|e| e.to_string())?;
        let oracle = ctx.orlicz_norm_oracle(&xi).map_err(|e| e.to_string())?.value;
        let rel = (amemiya - oracle).abs() / amemiya.max(1e-300);
        worst = worst.max(rel);
        ensure!(
            rel <= ORACLE_TOL || amemiya == oracle,
            "instance {instance} ({phi:?}): {amemiya} vs {oracle}"
        );
    }
    Ok(format!(
        "50 instances ({jumps} with a jump), max relative gap {worst:.1e}"
    ))
}

fn holder_and_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let table = Tabulated::sample(
        &(0..=30).map(|i| i as f64 * 0.2).collect::<Vec<_>>(),
        |t| t * t * t,
        Tail::Linear,
    )
    .unwrap();
    let families = [
        YoungFunction::power(1.0).unwrap(),
        YoungFunction::power(1.7).unwrap(),
        YoungFunction::power(3.0).unwrap(),
        YoungFunction::scaled_power(0.4, 2.2).unwrap(),
        YoungFunction::linear_jump(1.3).unwrap(),
        YoungFunction::piecewise(vec![0.5, 2.0], vec![0.2, 1.0, 3.0], false).unwrap(),
        YoungFunction::Tabulated(table),
    ];
    let mut violations = 0;
    for k in 0..10_000 {
        let m = rng.random_range(1..=6);
        let space = random_space(&mut rng, m);
        let ctx = OrliczContext::new(families[k % families.len()].clone(), space.clone()).unwrap();
        let dual = ctx.swapped();
        let (xi, eta) = (random_values(&mut rng, m, 4.0), random_values(&mut rng, m, 4.0));
        let pairing: f64 = space
            .weights()
            .iter()
            .zip(xi.iter().zip(&eta))
            .map(|(w, (a, b))| w * a * b)
            .sum();
        let (x, y) = (RandomVariable::new(xi), RandomVariable::new(eta));
        let lux = ctx.luxemburg_norm(&x).map_err(|e| e.to_string())?;
        let orl = ctx.orlicz_norm(&x).map_err(|e| e.to_string())?;
        let dual_orl = dual.orlicz_norm(&y).map_err(|e| e.to_string())?;
        let bound = lux * dual_orl;
        if pairing.abs() > bound * (1.0 + HOLDER_TOL) + HOLDER_TOL * f64::MIN_POSITIVE {
            violations += 1;
        }
        if lux > orl * (1.0 + HOLDER_TOL) || orl > 2.0 * lux * (1.0 + HOLDER_TOL) {
            violations += 1;
        }
    }
    ensure!(violations == 0, "{violations} violations");
    Ok("10000 pairs, 0 violations".into())
}

fn duality_isometry() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut count = 0;
    for phi_p in [1.5, 2.0, 3.0] {
        for fibers in ["l1", "l2", "linf", "mixed"] {
            for (m, n) in [(2, 2), (3, 2), (4, 3)] {
                let space = random_space(&mut rng, m);
                let exps: Vec<LpExponent> = (0..m)
                    .map(|i| match fibers {
                        "l1" => LpExponent::ONE,
                        "l2" => LpExponent::TWO,
                        "linf" => LpExponent::INFINITY,
                        _ => [
                            LpExponent::ONE,
                            LpExponent::TWO,
                            LpExponent::INFINITY,
                            LpExponent::new(3.0).unwrap(),
                        ][i % 4],
                    })
                    .collect();
                let ctx = OrliczContext::new(YoungFunction::power(phi_p).unwrap(), space.clone()).unwrap();
                let mctx = ModuleOrliczContext::new(ctx, RnModule::new(space, n, exps).unwrap()).unwrap();
                let f = RandomFunctional::new(random_field(&mut rng, m, n));
                for flavor in [NormFlavor::Luxemburg, NormFlavor::Orlicz] {
                    let r =
                        isometry_check(&f, &mctx, flavor, AscentBudget::default(), 11).map_err(|e| e.to_string())?;
                    let gap = (r.lhs - r.rhs).abs() / r.rhs.max(1.0);
                    worst = worst.max(gap);
                    count += 1;
                    ensure!(
                        gap <= ISOMETRY_TOL,
                        "Power({phi_p}), {fibers}, (m, n) = ({m}, {n}), {flavor:?}: lhs {} rhs {}",
                        r.lhs,
                        r.rhs
                    );
                }
            }
        }
    }
    Ok(format!(
        "{count} checks (36 scenarios x 2 flavors), max scaled gap {worst:.1e}"
    ))
}

fn surjectivity_round_trip() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut rec, mut span, mut xg) = (0.0f64, 0.0f64, 0.0f64);
    for instance in 0..100 {
        let (m, n) = (rng.random_range(1..=6), rng.random_range(1..=3));
        let space = random_space(&mut rng, m);
        let exps: Vec<LpExponent> = (0..m).map(|_| random_exponent(&mut rng)).collect();
        let ctx = OrliczContext::new(finite_families(&mut rng), space.clone()).unwrap();
        let module = RnModule::new(space, n, exps).unwrap();
        let mctx = ModuleOrliczContext::new(ctx, module.clone()).unwrap();
        let f = RandomFunctional::new(random_field(&mut rng, m, n));
        let big_f = embed(&f, &mctx).map_err(|e| e.to_string())?;
        let rep = represent(&|x| big_f.evaluate(x).unwrap(), &mctx, instance).map_err(|e| e.to_string())?;
        for (a, b) in rep
            .functional
            .vectors()
            .iter()
            .flatten()
            .zip(f.vectors().iter().flatten())
        {
            rec = rec.max((a - b).abs());
        }
        let again = embed(&rep.functional, &mctx).map_err(|e| e.to_string())?;
        for atom in 0..m {
            for j in 0..n {
                let mut v = vec![vec![0.0; n]; m];
                v[atom][j] = 1.0;
                let x = ModuleElement::new(v).restrict(&EventClass::singleton(atom));
                let (a, b) = (again.evaluate(&x).unwrap(), big_f.evaluate(&x).unwrap());
                span = span.max((a - b).abs());
            }
        }
        let dual = module.dual_random_norm(&f).unwrap();
        for (a, b) in rep.x_g.values().iter().zip(dual.values()) {
            xg = xg.max((a - b).abs());
        }
        ensure!(
            rec <= REPRESENT_TOL * 1e-3,
            "instance {instance}: recovered f differs by {rec}"
        );
        ensure!(
            span <= REPRESENT_TOL,
            "instance {instance}: re-embedding differs by {span}"
        );
        ensure!(
            xg <= XG_TOL,
            "instance {instance}: X_g differs from the dual norm by {xg}"
        );
    }
    Ok(format!(
        "100 instances, recovery {rec:.1e}, spanning set {span:.1e}, X_g {xg:.1e}"
    ))
}

fn density_and_completeness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut largest_n = 0;
    for instance in 0..100 {
        let (m, n) = (rng.random_range(1..=6), rng.random_range(1..=3));
        let space = random_space(&mut rng, m);
        let exps: Vec<LpExponent> = (0..m).map(|_| random_exponent(&mut rng)).collect();
        let ctx = OrliczContext::new(finite_families(&mut rng), space.clone()).unwrap();
        let mctx = ModuleOrliczContext::new(ctx, RnModule::new(space, n, exps).unwrap()).unwrap();
        let x = ModuleElement::new((0..m).map(|_| random_values(&mut rng, n, 20.0)).collect());
        let report = mctx.density_check(&x, 1e-9).map_err(|e| e.to_string())?;
        ensure!(
            report.exact_distance == 0.0,
            "instance {instance}: distance {}",
            report.exact_distance
        );
        largest_n = largest_n.max(report.n_exact);

        if instance % 5 == 0 {
            let y = ModuleElement::new(random_field(&mut rng, m, n));
            let seq: Vec<ModuleElement> = (1..=60)
                .map(|k| {
                    let w = 0.5f64.powi(k);
                    x.lin_comb(1.0 - w, &y, w).unwrap()
                })
                .collect();
            let c = mctx
                .cauchy_limit_check(&seq, Some(&x), 1e-6)
                .map_err(|e| e.to_string())?;
            ensure!(c.converges, "instance {instance}: sequence does not reach its limit");
            ensure!(
                c.prob_bound_holds,
                "instance {instance}: probability distance exceeds its bound"
            );
            let last = *c.prob_distances.last().unwrap();
            ensure!(
                last <= c.jensen_constant * 1e-6,
                "instance {instance}: probability distance {last}"
            );
        }
    }
    Ok(format!(
        "100 truncations exact by level {largest_n}; 20 Cauchy sequences converge in both metrics"
    ))
}

fn quadrant(
    phi: f64,
    fiber: LpExponent,
    budget: usize,
) -> Result<orlicz_core::convexity::StrictConvexityHarness, String> {
    let space = uniform(3);
    let ctx = OrliczContext::new(YoungFunction::power(phi).unwrap(), space.clone()).unwrap();
    let mctx = ModuleOrliczContext::new(ctx, RnModule::uniform(space, 2, fiber).unwrap()).unwrap();
    strict_convexity_harness(&mctx, NormFlavor::Luxemburg, budget, 12).map_err(|e| e.to_string())
}

fn strict_convexity_quadrants() -> Result<String, String> {
    let limit = Duration::from_secs(60);
    let mut times = Vec::new();

    let start = Instant::now();
    let h = quadrant(2.0, LpExponent::TWO, 100_000)?;
    times.push(start.elapsed());
    ensure!(
        !h.composite.is_falsified() && h.composite.search_budget == 100_000,
        "(l2, Power(2)) falsified"
    );
    ensure!(h.composite_strict && h.consistent, "(l2, Power(2)) inconsistent");

    let start = Instant::now();
    let h = quadrant(2.0, LpExponent::ONE, 100_000)?;
    times.push(start.elapsed());
    ensure!(
        h.lifts.iter().any(|l| l.route == LiftRoute::Fiber && l.revalidated),
        "(l1, Power(2)): no revalidated fiber lift"
    );
    ensure!(!h.composite_strict && h.consistent, "(l1, Power(2)) inconsistent");

    let start = Instant::now();
    let h = quadrant(1.0, LpExponent::TWO, 100_000)?;
    times.push(start.elapsed());
    ensure!(
        h.lifts.iter().any(|l| l.route == LiftRoute::Scalar && l.revalidated),
        "(l2, Power(1)): no revalidated scalar lift"
    );
    ensure!(!h.composite_strict && h.consistent, "(l2, Power(1)) inconsistent");

    ensure!(times.iter().all(|t| *t < limit), "a quadrant exceeded 60 s: {times:?}");
    Ok(format!(
        "quadrant times {:?}",
        times
            .iter()
            .map(|t| format!("{:.2}s", t.as_secs_f64()))
            .collect::<Vec<_>>()
    ))
}

fn moduli() -> Result<String, String> {
    let l2 = FiberSpace {
        p: LpExponent::TWO,
        n: 2,
    };
    let mut worst = 0.0f64;
    for eps in [0.2, 1.0, 2.0] {
        let est = modulus_of_convexity(&l2, eps, 1_000_000, 13).map_err(|e| e.to_string())?;
        let exact = 1.0 - (1.0 - eps * eps / 4.0).sqrt();
        worst = worst.max((est.estimate - exact).abs());
        ensure!(
            (est.estimate - exact).abs() <= MODULUS_TOL,
            "l2 at ε = {eps}: {} vs {exact}",
            est.estimate
        );
    }
    let l1 = FiberSpace {
        p: LpExponent::ONE,
        n: 2,
    };
    let est = modulus_of_convexity(&l1, 0.5, 1_000_000, 13).map_err(|e| e.to_string())?;
    ensure!(est.estimate <= VANISHING_TOL, "l1 at ε = 0.5: {}", est.estimate);

    let mut contradictions = 0;
    let space = uniform(3);
    let mixed = vec![LpExponent::TWO, LpExponent::ONE, LpExponent::new(3.0).unwrap()];
    let cases = [
        (2.0, vec![LpExponent::TWO; 3]),
        (2.0, vec![LpExponent::ONE; 3]),
        (1.0, vec![LpExponent::TWO; 3]),
        (3.0, mixed),
    ];
    for (phi, exps) in cases {
        let ctx = OrliczContext::new(YoungFunction::power(phi).unwrap(), space.clone()).unwrap();
        let mctx = ModuleOrliczContext::new(ctx, RnModule::new(space.clone(), 2, exps).unwrap()).unwrap();
        for flavor in [NormFlavor::Luxemburg, NormFlavor::Orlicz] {
            let h = uniform_convexity_harness(&mctx, flavor, 1_000, 14).map_err(|e| e.to_string())?;
            contradictions += h.contradictions.len();
        }
    }
    ensure!(contradictions == 0, "{contradictions} contradicting instances");
    Ok(format!(
        "l2 max error {worst:.1e}, l1 estimate {:.1e}, 8 harness runs without contradiction",
        est.estimate
    ))
}

fn determinism() -> Result<String, String> {
    let dir = std::env::temp_dir().join(format!("orlicz-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let scenario = dir.join("s.json");
    std::fs::write(
        &scenario,
        r#"{
  "space": {"weights": [0.2, 0.3, 0.5]},
  "phi": {"form": "scaled_power", "c": 0.5, "p": 3},
  "module": {"fiber_dim": 2, "fiber_p": [1, 2, "inf"]},
  "variables": {"xi": [1.0, -2.0, 0.5]},
  "elements": {"x": [[3.0, 4.0], [0.0, 1.0], [1.0, 1.0]]},
  "functionals": {"f": [[1.0, 0.0], [0.5, -0.5], [2.0, 1.0]]},
  "seed": 21,
  "budgets": {"falsify": 2000, "modulus": 200}
}"#,
    )
    .map_err(|e| e.to_string())?;
    let commands: [&[&str]; 8] = [
        &["norm", "--which", "orlicz"],
        &["dual-norm"],
        &["duality-check", "--flavor", "orlicz"],
        &["represent", "--roundtrip"],
        &["convexity", "falsify", "--target", "scalar"],
        &["convexity", "modulus", "--epsilon", "0.7"],
        &["harness", "theorem54"],
        &["harness", "theorem57"],
    ];
    for (i, cmd) in commands.iter().enumerate() {
        let mut bodies = Vec::new();
        for k in 0..2 {
            let out = dir.join(format!("r{i}_{k}.json"));
            let mut argv = vec!["orlicz"];
            argv.extend_from_slice(cmd);
            argv.extend(["--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()]);
            let code = orlicz_cli::run(argv, &mut std::io::sink(), &mut std::io::sink());
            ensure!(code != 2, "{cmd:?} rejected its input");
            bodies.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure!(bodies[0] == bodies[1], "{cmd:?} produced different reports");
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!(
        "{} commands, reports byte-identical across runs",
        commands.len()
    ))
}

fn main() {
    let criteria: [(u8, &str, Duration, Check); 11] = [
        (
            1,
            "conjugation closed forms",
            Duration::from_secs(1),
            conjugation_closed_forms,
        ),
        (2, "biconjugation", Duration::from_secs(5), biconjugation),
        (3, "norm identities", Duration::from_secs(10), norm_identities),
        (4, "oracle agreement", Duration::from_secs(60), oracle_agreement),
        (
            5,
            "Hölder and norm equivalence",
            Duration::from_secs(30),
            holder_and_equivalence,
        ),
        (6, "duality isometry", Duration::from_secs(300), duality_isometry),
        (
            7,
            "surjectivity round trip",
            Duration::from_secs(30),
            surjectivity_round_trip,
        ),
        (
            8,
            "density and completeness",
            Duration::from_secs(10),
            density_and_completeness,
        ),
        (
            9,
            "strict convexity quadrants",
            Duration::from_secs(180),
            strict_convexity_quadrants,
        ),
        (10, "moduli of convexity", Duration::from_secs(300), moduli),
        (11, "determinism", Duration::from_secs(300), determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; exceeded {:.0?}", limit)),
            other => other,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {id:>2} {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
