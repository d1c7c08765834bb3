use std::collections::BTreeMap;

use orlicz_core::convexity::{
    modulus_of_convexity, monotonicity_check, random_strict_convexity_check, strict_convexity_falsifier,
    strict_convexity_harness, uniform_convexity_harness, FiberSpace, ModuleSpace, NormedSpace, ScalarSpace,
    UniformConvexityHarness, VANISHING_MODULUS,
};
use orlicz_core::duality::{dual_side_norm, embed, isometry_check, represent as represent_functional};
use orlicz_core::{EventClass, ModuleElement, NormFlavor, YoungFunction};
use serde_json::json;

use crate::{CliError, Common, Family, Outcome, Session, Status, Table, Target, YoungArgs};

fn need(value: Option<f64>, flag: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Input(format!("this family needs {flag}")))
}

fn young_from(args: &YoungArgs, session: &Session) -> Result<YoungFunction, CliError> {
    Ok(match args.family {
        Some(Family::Power) => YoungFunction::power(need(args.p, "--p")?)?,
        Some(Family::ScaledPower) => YoungFunction::scaled_power(need(args.c, "--c")?, need(args.p, "--p")?)?,
        Some(Family::LinearJump) => YoungFunction::linear_jump(need(args.t0, "--t0")?)?,
        None => session.scenario()?.ctx.phi().clone(),
    })
}

/// Parses `start:end:step`.
fn grid(range: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Input(format!("--table expects start:end:step, got `{range}`"));
    let parts: Vec<f64> = range
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [a, b, h] = parts[..] else { return Err(bad()) };
    if !(a >= 0.0 && b >= a && h > 0.0 && b.is_finite()) {
        return Err(bad());
    }
    let count = ((b - a) / h + 1e-9).floor() as usize;
    if count > 1_000_000 {
        return Err(CliError::Input("--table grid has more than a million points".into()));
    }
    Ok((0..=count).map(|i| a + i as f64 * h).collect())
}

fn describe(phi: &YoungFunction) -> String {
    serde_json::to_string(phi).unwrap_or_default()
}

fn at(phi: &YoungFunction, t: f64) -> f64 {
    phi.evaluate(t).unwrap_or(f64::NAN)
}

fn outcome(status: Status, summary: Vec<String>, result: serde_json::Value) -> Outcome {
    Outcome {
        status,
        summary,
        tolerances: BTreeMap::new(),
        result,
        table: None,
    }
}

pub(crate) fn young_conjugate(args: &YoungArgs, session: &Session) -> Result<Outcome, CliError> {
    let phi = young_from(args, session)?;
    let psi = phi.conjugate()?;
    let mut summary = vec![format!("phi = {}", describe(&phi)), format!("psi = {}", describe(&psi))];
    let table = match &args.table {
        Some(range) => {
            let rows: Vec<Vec<f64>> = grid(range)?.into_iter().map(|s| vec![s, at(&psi, s)]).collect();
            summary.extend(rows.iter().map(|r| format!("psi({}) = {}", r[0], r[1])));
            Some(Table {
                header: vec!["s".into(), "psi".into()],
                rows,
            })
        }
        None => None,
    };
    let mut out = outcome(Status::Pass, summary, json!({ "phi": phi, "psi": psi, "table": table }));
    out.table = table;
    Ok(out)
}

pub(crate) fn young_validate(args: &YoungArgs, session: &Session) -> Result<Outcome, CliError> {
    let phi = young_from(args, session)?;
    let report = phi.validate();
    let delta2 = phi.is_delta2();
    let mut summary = vec![
        format!("phi = {}", describe(&phi)),
        format!("valid: {}", report.valid),
        format!("delta2 ({}): {:?}", delta2.variant, delta2.verdict),
    ];
    summary.extend(report.violations.iter().map(|v| format!("{:?}: {}", v.axiom, v.detail)));
    let status = if report.valid { Status::Pass } else { Status::Fail };
    Ok(outcome(
        status,
        summary,
        json!({ "phi": phi, "axioms": report, "delta2": delta2 }),
    ))
}

pub(crate) fn young_table(args: &YoungArgs, session: &Session) -> Result<Outcome, CliError> {
    let phi = young_from(args, session)?;
    let psi = phi.conjugate()?;
    let range = args
        .table
        .as_deref()
        .ok_or_else(|| CliError::Input("young table needs --table start:end:step".into()))?;
    let rows: Vec<Vec<f64>> = grid(range)?
        .into_iter()
        .map(|t| vec![t, at(&phi, t), at(&psi, t)])
        .collect();
    let summary = rows
        .iter()
        .map(|r| format!("{:>8}  phi = {:<14} psi = {}", r[0], r[1], r[2]))
        .collect();
    let table = Table {
        header: vec!["t".into(), "phi".into(), "psi".into()],
        rows,
    };
    let mut out = outcome(Status::Pass, summary, json!({ "phi": phi, "psi": psi, "table": table }));
    out.table = Some(table);
    Ok(out)
}

fn selected<'a, T>(
    map: &'a BTreeMap<String, T>,
    name: Option<&str>,
    kind: &str,
) -> Result<Vec<(&'a String, &'a T)>, CliError> {
    let picked: Vec<_> = map
        .iter()
        .filter(|(k, _)| name.is_none_or(|n| n == k.as_str()))
        .collect();
    if picked.is_empty() {
        return Err(CliError::Input(match name {
            Some(n) => format!("no {kind} named `{n}` in the scenario"),
            None => format!("the scenario has no {kind}"),
        }));
    }
    Ok(picked)
}

pub(crate) fn norm(
    common: &Common,
    session: &Session,
    flavor: NormFlavor,
    target: Target,
) -> Result<Outcome, CliError> {
    let scenario = session.scenario()?;
    let name = common.name.as_deref();
    let mut norms = BTreeMap::new();
    match target {
        Target::Scalar => {
            for (k, xi) in selected(&scenario.variables, name, "variables")? {
                norms.insert(k.clone(), scenario.ctx.norm(xi, flavor)?);
            }
        }
        Target::Module => {
            let mctx = scenario.module_ctx()?;
            for (k, x) in selected(&scenario.elements, name, "elements")? {
                norms.insert(k.clone(), mctx.module_norm(x, flavor)?);
            }
        }
        Target::Fiber => return Err(CliError::Input("norm --target takes scalar or module".into())),
    }
    let summary = norms.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    Ok(outcome(
        Status::Pass,
        summary,
        json!({ "flavor": flavor, "norms": norms }),
    ))
}

pub(crate) fn dual_norm(common: &Common, session: &Session) -> Result<Outcome, CliError> {
    let scenario = session.scenario()?;
    let mctx = scenario.module_ctx()?;
    let module = mctx.module();
    let tol = common.tol.unwrap_or(1e-12);
    let mut entries = BTreeMap::new();
    let mut summary = Vec::new();
    let mut ok = true;
    for (k, f) in selected(&scenario.functionals, common.name.as_deref(), "functionals")? {
        let dual = module.dual_random_norm(f)?;
        let oracle = if module.fiber_dim() <= orlicz_core::module::ORACLE_MAX_FIBER_DIM {
            let o = module.dual_norm_oracle(f, session.budgets.samples, session.seed)?;
            ok &= o
                .values()
                .iter()
                .zip(dual.values())
                .all(|(a, b)| *a <= b * (1.0 + tol) + tol);
            Some(o)
        } else {
            None
        };
        let lux = dual_side_norm(f, mctx, NormFlavor::Luxemburg)?;
        let orl = dual_side_norm(f, mctx, NormFlavor::Orlicz)?;
        summary.push(format!("{k}: ‖f‖* = {:?}", dual.values()));
        summary.push(format!("{k}: operator norm (luxemburg) = {lux}, (orlicz) = {orl}"));
        entries.insert(
            k.clone(),
            json!({ "dual_random_norm": dual, "oracle": oracle, "operator_norm": { "luxemburg": lux, "orlicz": orl } }),
        );
    }
    let mut out = outcome(Status::all([ok]), summary, json!({ "functionals": entries }));
    out.tolerances.insert("oracle_upper", tol);
    Ok(out)
}

pub(crate) fn duality_check(common: &Common, session: &Session, flavor: NormFlavor) -> Result<Outcome, CliError> {
    let scenario = session.scenario()?;
    let mctx = scenario.module_ctx()?;
    let tol = common.tol.unwrap_or(1e-4);
    let mut entries = BTreeMap::new();
    let mut summary = Vec::new();
    let mut checks = Vec::new();
    for (k, f) in selected(&scenario.functionals, common.name.as_deref(), "functionals")? {
        let mut report = isometry_check(f, mctx, flavor, session.budgets.ascent(), session.seed)?;
        report.pass = (report.lhs - report.rhs).abs() <= tol * report.rhs.max(1.0);
        checks.push(report.pass);
        summary.push(format!(
            "{k}: lhs = {}, rhs = {}, pass = {}",
            report.lhs, report.rhs, report.pass
        ));
        entries.insert(k.clone(), report);
    }
    let mut out = outcome(
        Status::all(checks),
        summary,
        json!({ "flavor": flavor, "functionals": entries }),
    );
    out.tolerances.insert("isometry_relative", tol);
    Ok(out)
}

fn max_gap(a: impl IntoIterator<Item = f64>, b: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(crate) fn represent(common: &Common, session: &Session, roundtrip: bool) -> Result<Outcome, CliError> {
    let scenario = session.scenario()?;
    let mctx = scenario.module_ctx()?;
    let module = mctx.module();
    let tol = common.tol.unwrap_or(1e-9);
    let xg_tol = 1e-12;
    let (m, n) = (module.atom_count(), module.fiber_dim());
    let mut entries = BTreeMap::new();
    let mut summary = Vec::new();
    let mut checks = Vec::new();
    for (k, f) in selected(&scenario.functionals, common.name.as_deref(), "functionals")? {
        let embedded = embed(f, mctx)?;
        let rep = represent_functional(&|x| embedded.evaluate(x).unwrap_or(f64::NAN), mctx, session.seed)?;
        let recovery = max_gap(
            rep.functional.vectors().iter().flatten().copied(),
            f.vectors().iter().flatten().copied(),
        );
        let xg = max_gap(rep.x_g.values().iter().copied(), rep.dual_norm.values().iter().copied());
        let mut ok = recovery <= tol && xg <= xg_tol;
        let span = if roundtrip {
            let again = embed(&rep.functional, mctx)?;
            let mut gap = 0.0f64;
            for atom in 0..m {
                for j in 0..n {
                    let mut vectors = vec![vec![0.0; n]; m];
                    vectors[atom][j] = 1.0;
                    let x = ModuleElement::new(vectors).restrict(&EventClass::singleton(atom));
                    gap = gap.max((again.evaluate(&x)? - embedded.evaluate(&x)?).abs());
                }
            }
            ok &= gap <= tol;
            Some(gap)
        } else {
            None
        };
        checks.push(ok);
        summary.push(format!(
            "{k}: recovery error = {recovery}, X_g error = {xg}, pass = {ok}"
        ));
        if let Some(gap) = span {
            summary.push(format!("{k}: round-trip error on the spanning set = {gap}"));
        }
        entries.insert(
            k.clone(),
            json!({ "representation": rep, "recovery_error": recovery, "x_g_error": xg, "roundtrip_error": span, "pass": ok }),
        );
    }
    let mut out = outcome(Status::all(checks), summary, json!({ "functionals": entries }));
    out.tolerances.insert("recovery", tol);
    out.tolerances.insert("x_g", xg_tol);
    Ok(out)
}

fn verdict_line(label: &str, falsified: bool, budget: usize) -> String {
    if falsified {
        format!("{label}: falsified")
    } else {
        format!("{label}: no counterexample in {budget} random pairs")
    }
}

pub(crate) fn convexity_report(_common: &Common, session: &Session) -> Result<Outcome, CliError> {
    let scenario = session.scenario()?;
    let mctx = scenario.module_ctx()?;
    let atoms = random_strict_convexity_check(mctx.module(), session.budgets.falsify, session.seed);
    let mut summary: Vec<String> = atoms
        .iter()
        .map(|a| {
            verdict_line(
                &format!("atom {} (l_{}, strict by formula: {})", a.atom, a.p, a.analytic_strict),
                a.verdict.is_falsified(),
                a.verdict.search_budget,
            )
        })
        .collect();
    let mut monotone = BTreeMap::new();
    for flavor in [NormFlavor::Luxemburg, NormFlavor::Orlicz] {
        let report = monotonicity_check(&scenario.ctx, flavor, session.budgets.samples, session.seed)?;
        summary.push(format!(
            "monotonicity ({flavor:?}): min margin {}, strict {}",
            report.min_margin, report.strict
        ));
        monotone.insert(format!("{flavor:?}").to_lowercase(), report);
    }
    let status = if monotone.values().any(|r| !r.strict) {
        Status::Fail
    } else if atoms.iter().any(|a| a.verdict.is_falsified()) {
        Status::Falsified
    } else {
        Status::Pass
    };
    let mut out = outcome(status, summary, json!({ "atoms": atoms, "monotonicity": monotone }));
    out.tolerances.insert("monotonicity_margin", 1e-12);
    add_counterexample_tolerances(&mut out);
    Ok(out)
}

fn add_counterexample_tolerances(out: &mut Outcome) {
    use orlicz_core::convexity::{DISTINCT_TOL, MIDPOINT_TOL, MIN_SEPARATION, UNIT_TOL};
    out.tolerances.insert("unit_norm", UNIT_TOL);
    out.tolerances.insert("midpoint", MIDPOINT_TOL);
    out.tolerances.insert("distinct", DISTINCT_TOL);
    out.tolerances.insert("min_separation", MIN_SEPARATION);
}

fn default_target(session: &Session) -> Result<Target, CliError> {
    Ok(if session.scenario()?.mctx.is_some() {
        Target::Module
    } else {
        Target::Scalar
    })
}

pub(crate) fn convexity_falsify(
    _common: &Common,
    session: &Session,
    target: Option<Target>,
    flavor: NormFlavor,
) -> Result<Outcome, CliError> {
    let scenario = session.scenario()?;
    let (budget, seed) = (session.budgets.falsify, session.seed);
    let (falsified, summary, result) = match target.map_or_else(|| default_target(session), Ok)? {
        Target::Scalar => {
            let space = ScalarSpace {
                ctx: scenario.ctx.clone(),
                flavor,
            };
            let v = strict_convexity_falsifier(&space, budget, seed);
            (
                v.is_falsified(),
                vec![verdict_line(&space.label(), v.is_falsified(), v.search_budget)],
                json!(v),
            )
        }
        Target::Module => {
            let space = ModuleSpace {
                mctx: scenario.module_ctx()?.clone(),
                flavor,
            };
            let v = strict_convexity_falsifier(&space, budget, seed);
            (
                v.is_falsified(),
                vec![verdict_line(&space.label(), v.is_falsified(), v.search_budget)],
                json!(v),
            )
        }
        Target::Fiber => {
            let atoms = random_strict_convexity_check(scenario.module_ctx()?.module(), budget, seed);
            let lines = atoms
                .iter()
                .map(|a| {
                    verdict_line(
                        &format!("atom {} (l_{})", a.atom, a.p),
                        a.verdict.is_falsified(),
                        a.verdict.search_budget,
                    )
                })
                .collect();
            (atoms.iter().any(|a| a.verdict.is_falsified()), lines, json!(atoms))
        }
    };
    let status = if falsified { Status::Falsified } else { Status::Pass };
    let mut out = outcome(status, summary, result);
    add_counterexample_tolerances(&mut out);
    Ok(out)
}

pub(crate) fn convexity_modulus(
    _common: &Common,
    session: &Session,
    epsilon: f64,
    target: Option<Target>,
    flavor: NormFlavor,
    atom: usize,
) -> Result<Outcome, CliError> {
    let scenario = session.scenario()?;
    let (budget, seed) = (session.budgets.modulus, session.seed);
    let space: Box<dyn NormedSpace> = match target.map_or_else(|| default_target(session), Ok)? {
        Target::Scalar => Box::new(ScalarSpace {
            ctx: scenario.ctx.clone(),
            flavor,
        }),
        Target::Module => Box::new(ModuleSpace {
            mctx: scenario.module_ctx()?.clone(),
            flavor,
        }),
        Target::Fiber => {
            let module = scenario.module_ctx()?.module();
            let p = *module
                .fiber_p()
                .get(atom)
                .ok_or_else(|| CliError::Input(format!("atom {atom} out of range")))?;
            Box::new(FiberSpace {
                p,
                n: module.fiber_dim(),
            })
        }
    };
    let estimate = modulus_of_convexity(space.as_ref(), epsilon, budget, seed)?;
    let summary = vec![format!("{}: δ({epsilon}) ≤ {}", estimate.space, estimate.estimate)];
    let mut out = outcome(Status::Pass, summary, json!(estimate));
    out.tolerances.insert("unit_norm", orlicz_core::convexity::UNIT_TOL);
    Ok(out)
}

pub(crate) fn harness_strict(session: &Session, flavor: NormFlavor) -> Result<Outcome, CliError> {
    let mctx = session.scenario()?.module_ctx()?;
    let h = strict_convexity_harness(mctx, flavor, session.budgets.falsify, session.seed)?;
    let mut summary = vec![verdict_line("scalar", !h.scalar_strict, h.scalar.search_budget)];
    for a in &h.fibers {
        summary.push(verdict_line(
            &format!("fiber {} (l_{})", a.atom, a.p),
            a.verdict.is_falsified(),
            a.verdict.search_budget,
        ));
    }
    summary.push(verdict_line(
        "composite (direct search)",
        h.composite.is_falsified(),
        h.composite.search_budget,
    ));
    for lift in &h.lifts {
        let origin = match lift.atom {
            Some(atom) => format!("fiber pair at atom {atom}"),
            None => "scalar pair".to_string(),
        };
        summary.push(format!("lifted {origin}: revalidated = {}", lift.revalidated));
    }
    summary.push(format!("composite strictly convex by search: {}", h.composite_strict));
    summary.push(format!("consistent: {}", h.consistent));
    let status = Status::all([h.consistent, h.lifts.iter().all(|l| l.revalidated)]);
    let mut out = outcome(status, summary, json!(h));
    add_counterexample_tolerances(&mut out);
    Ok(out)
}

fn modulus_table(h: &UniformConvexityHarness) -> Table {
    Table {
        header: ["epsilon", "scalar", "fiber_min", "composite_direct", "composite"]
            .map(String::from)
            .to_vec(),
        rows: h
            .rows
            .iter()
            .map(|r| {
                let fiber_min = r.fibers.iter().copied().fold(f64::INFINITY, f64::min);
                vec![r.epsilon, r.scalar, fiber_min, r.composite_direct, r.composite]
            })
            .collect(),
    }
}

fn table_lines(table: &Table) -> Vec<String> {
    let mut lines = vec![table.header.join("  ")];
    lines.extend(
        table
            .rows
            .iter()
            .map(|r| r.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join("  ")),
    );
    lines
}

pub(crate) fn harness_uniform(session: &Session, flavor: NormFlavor) -> Result<Outcome, CliError> {
    let mctx = session.scenario()?.module_ctx()?;
    let h = uniform_convexity_harness(mctx, flavor, session.budgets.modulus, session.seed)?;
    let table = modulus_table(&h);
    let mut summary = table_lines(&table);
    summary.extend(h.contradictions.iter().cloned());
    summary.push(format!("contradictions: {}", h.contradictions.len()));
    let mut out = outcome(Status::all([h.contradictions.is_empty()]), summary, json!(h));
    out.tolerances.insert("vanishing_modulus", VANISHING_MODULUS);
    out.table = Some(table);
    Ok(out)
}

pub(crate) fn harness_converse(session: &Session, flavor: NormFlavor) -> Result<Outcome, CliError> {
    let mctx = session.scenario()?.module_ctx()?;
    let h = uniform_convexity_harness(mctx, flavor, session.budgets.modulus, session.seed)?;
    let table = modulus_table(&h);
    let mut summary = table_lines(&table);
    summary.push("evidence only: the table is not checked against either direction".into());
    let mut out = outcome(Status::Pass, summary, json!({ "flavor": flavor, "rows": h.rows }));
    out.tolerances.insert("vanishing_modulus", VANISHING_MODULUS);
    out.table = Some(table);
    Ok(out)
}
