//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the verdicts are printed even when the run passes.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dlseries::charsheaf::{little_groups, parse_fraction, SheafParam};
use dlseries::endoscopy::{b_set, endoscopic_datum, fixed_omega, stable_parameters};
use dlseries::lattice::IntMatrix;
use dlseries::oracle::{self, MatrixFamily, MatrixGroupSpec};
use dlseries::root_datum::{BasedAutomorphism, Family, FrobeniusTwist, Isogeny, RootDatum};
use dlseries::series::{
    disconnected_geometric_report, disconnected_rational_report, geometric_report, rational_partition, DisconnectedInput,
};
use dlseries::sweep::{connected_center_sweep, run_sweep, SweepCheck, SweepGrid};
use dlseries::weyl::{ActingGroup, ComponentAction, WeylGroup, DEFAULT_CAP};
use dlseries::Exec;

type Outcome = Result<String, String>;

fn param(v: &[&str]) -> SheafParam {
    SheafParam::from_rationals(&v.iter().map(|s| parse_fraction(s).unwrap()).collect::<Vec<_>>())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn named(f: Family, r: usize, i: Isogeny) -> RootDatum {
    RootDatum::named(f, r, i).unwrap()
}

fn sl2_flagship() -> Outcome {
    let d = named(Family::A, 1, Isogeny::SimplyConnected);
    let w = WeylGroup::generate(&d, DEFAULT_CAP).map_err(|e| e.to_string())?;
    let eps = FrobeniusTwist::split(&d, 3).unwrap();
    let l = param(&["1/2"]);
    let e = endoscopic_datum(&w, &eps, &l).map_err(|e| e.to_string())?;
    let b = b_set(&w, &e).map_err(|e| e.to_string())?;
    ensure(e.little.phi_l.is_empty(), || "Φ_L ≠ ∅".into())?;
    ensure(e.little.w_l0.group.len() == 1, || "W_L° nontrivial".into())?;
    ensure(e.little.omega.len() == 2, || format!("|Ω_L| = {}", e.little.omega.len()))?;
    ensure(b.len() == 2, || format!("|𝔅_L| = {}", b.len()))?;
    ensure(b.orbits.len() == 2, || format!("{} orbits", b.orbits.len()))?;
    let fixed = fixed_omega(&w, &e).map_err(|e| e.to_string())?;
    ensure(fixed.len() == 2, || format!("|Ω_L^ε| = {}", fixed.len()))?;
    let series = rational_partition(&w, &eps, &l).map_err(|e| e.to_string())?;
    let sigmas: Vec<Vec<Vec<i64>>> = series.iter().map(|s| s.sigma.clone()).collect();
    ensure(sigmas == vec![vec![vec![1]], vec![vec![-1]]], || format!("forms {sigmas:?}"))?;

    let spec = MatrixGroupSpec {
        family: MatrixFamily::Pgl,
        n: 2,
        q: 3,
    };
    let c = oracle::census(spec, Exec::default()).map_err(|e| e.to_string())?;
    ensure(c.classes.len() == 4, || format!("PGL₂(𝔽₃) has {} classes", c.classes.len()))?;
    let order_two: Vec<_> = c.bundles.iter().filter(|b| b.order == 2).collect();
    ensure(order_two.len() == 1 && order_two[0].classes.len() == 2, || {
        "order-2 classes do not form one bundle of two".into()
    })?;
    Ok("Ω_L = ℤ/2, 2 rational series, σ = ±1; PGL₂(𝔽₃): 4 classes, order-2 bundle of 2".into())
}

fn census_equality() -> Outcome {
    let cases = [
        (named(Family::A, 1, Isogeny::SimplyConnected), 3, MatrixFamily::Pgl, 2),
        (RootDatum::gl(2).unwrap(), 2, MatrixFamily::Gl, 2),
        (RootDatum::gl(2).unwrap(), 3, MatrixFamily::Gl, 2),
        (named(Family::A, 1, Isogeny::SimplyConnected), 5, MatrixFamily::Pgl, 2),
        (RootDatum::gl(3).unwrap(), 2, MatrixFamily::Gl, 3),
    ];
    let mut lines = Vec::new();
    for (d, q, family, n) in cases {
        let eps = FrobeniusTwist::split(&d, q).unwrap();
        let spec = MatrixGroupSpec { family, n, q };
        let r = oracle::compare(&d, &eps, 12, spec, Exec::default()).map_err(|e| format!("{spec}: {e}"))?;
        ensure(r.matched, || format!("{spec}: {:?}", r.mismatches))?;
        ensure(r.census_excluded == 0, || format!("{spec}: {} classes beyond the bound", r.census_excluded))?;
        lines.push(format!("{spec} {}={}", r.predicted_total, r.census_total));
    }
    Ok(lines.join(", "))
}

fn connected_center() -> Outcome {
    let entries = connected_center_sweep(12, Exec::default()).map_err(|e| e.to_string())?;
    let mut total = 0;
    for e in &entries {
        ensure(e.violations.is_empty(), || format!("{}: {:?}", e.label, &e.violations[..e.violations.len().min(3)]))?;
        total += e.params_checked + e.extensions_checked;
    }
    Ok(format!("Ω_L = 1 for {total} parameters over {} data", entries.len()))
}

fn sweep_check(report: &dlseries::sweep::SweepReport, check: SweepCheck) -> Outcome {
    let n = report.cases.len();
    ensure(n >= 1000, || format!("only {n} sweep cases"))?;
    if let Some((c, f)) = report.failures().find(|(_, f)| f.0 == check) {
        return Err(format!("{} τ={} q={} ℓ={:?}: {}", c.datum, c.tau, c.q, c.param, f.1));
    }
    Ok(format!("{} / {n} cases", report.passed[&check]))
}

fn a2_flip_inputs(iso: Isogeny, q: u64) -> Vec<DisconnectedInput> {
    let d = named(Family::A, 2, iso);
    let flip = BasedAutomorphism::from_simple_permutation(&d, &[1, 0]).unwrap();
    [BasedAutomorphism::identity(&d), flip.clone()]
        .into_iter()
        .map(|tau| {
            let eps = FrobeniusTwist::new(q, tau).unwrap();
            DisconnectedInput::new(d.clone(), ComponentAction::order_two(&d, flip.clone()).unwrap(), eps).unwrap()
        })
        .collect()
}

fn disconnected() -> Outcome {
    // (a) trivial π₀ reproduces the connected pipeline
    let mut degenerate = 0;
    for (f, r) in [(Family::A, 1), (Family::A, 2), (Family::B, 2), (Family::G, 2)] {
        for iso in [Isogeny::SimplyConnected, Isogeny::Adjoint] {
            let d = named(f, r, iso);
            let w = WeylGroup::generate(&d, DEFAULT_CAP).unwrap();
            for q in [2, 3, 4, 5] {
                let eps = FrobeniusTwist::split(&d, q).unwrap();
                let input = DisconnectedInput::connected_only(d.clone(), eps.clone()).unwrap();
                let ext = input.group(DEFAULT_CAP).unwrap();
                for l in stable_parameters(&w, &eps, 8, Exec::default()).representatives {
                    let mut a = disconnected_geometric_report(&input, &ext, &l).map_err(|e| format!("{l}: {e}"))?;
                    ensure(a.disconnected.take().is_some_and(|x| x.pi0_order == 1), || "π₀ data missing".into())?;
                    let b = geometric_report(&w, &eps, &l).map_err(|e| e.to_string())?;
                    ensure(a == b, || format!("{d:?} q={q} ℓ={l}: geometric reports differ"))?;
                    let e = endoscopic_datum(&w, &eps, &l).map_err(|e| e.to_string())?;
                    if e.frame.w_s == 0 {
                        let mut ra = disconnected_rational_report(&input, &ext, &l).map_err(|e| e.to_string())?;
                        ra.disconnected = None;
                        let rb = &rational_partition(&w, &eps, &l).map_err(|e| e.to_string())?[0];
                        ensure(ra == *rb, || format!("q={q} ℓ={l}: β = 1 reports differ"))?;
                    }
                    degenerate += 1;
                }
            }
        }
    }

    // (b) torus ⋊ swap against the finite-group oracle
    let t = RootDatum::torus(2);
    let swap = BasedAutomorphism::from_matrix(&t, IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]], 2)).unwrap();
    let mut torus_lines = Vec::new();
    for (q, chi) in [(3, "1/2"), (5, "1/2"), (5, "1/4")] {
        let eps = FrobeniusTwist::split(&t, q).unwrap();
        let input = DisconnectedInput::new(t.clone(), ComponentAction::order_two(&t, swap.clone()).unwrap(), eps).unwrap();
        let params = [param(&[chi, "0"]), param(&[chi, chi]), SheafParam::zero(2)];
        let checks = oracle::finite_group_series_check(&input, &params).map_err(|e| e.to_string())?;
        for c in &checks {
            ensure(c.matched, || {
                format!("q={q} ℓ={}: oracle {} vs predicted {}", c.param, c.oracle_irreducibles, c.predicted_irreducibles)
            })?;
        }
        let counts: Vec<usize> = checks.iter().map(|c| c.oracle_irreducibles).collect();
        torus_lines.push(format!("q={q} χ={chi} {counts:?}"));
    }

    // (c) π₀(G)_{W°ℓ} ≅ Ω_L/Ω_L° in the A₂-flip family
    let (mut flip_cases, mut nontrivial) = (0, 0);
    for iso in [Isogeny::SimplyConnected, Isogeny::Adjoint] {
        for q in [2, 3, 4, 5, 7] {
            for input in a2_flip_inputs(iso, q) {
                let ext = input.group(DEFAULT_CAP).unwrap();
                let w0 = WeylGroup::generate(&input.connected, DEFAULT_CAP).unwrap();
                for l in stable_parameters(&w0, &input.eps, 12, Exec::default()).representatives {
                    let r = disconnected_geometric_report(&input, &ext, &l).map_err(|e| format!("ℓ={l}: {e}"))?;
                    let dd = r.disconnected.as_ref().unwrap();
                    let omega_c = little_groups(&w0, &l).map_err(|e| e.to_string())?.omega.len();
                    let image: BTreeSet<usize> = r.omega.iter().map(|&o| ext.component(o)).collect();
                    ensure(
                        dd.omega_connected.len() == omega_c
                            && r.omega.len() == omega_c * dd.pi0_stabilizer.len()
                            && image.into_iter().collect::<Vec<_>>() == dd.pi0_stabilizer,
                        || format!("{iso} q={q} ℓ={l}"),
                    )?;
                    flip_cases += 1;
                    nontrivial += usize::from(dd.pi0_stabilizer.len() > 1);
                }
            }
        }
    }
    Ok(format!(
        "(a) {degenerate} degenerate cases; (b) {}; (c) {flip_cases} A₂-flip cases, {nontrivial} with nontrivial π₀ stabilizer",
        torus_lines.join(", ")
    ))
}

type Verdict = (usize, &'static str, Outcome, Duration, Duration);

fn timed(results: &mut Vec<Verdict>, n: usize, name: &'static str, limit: Duration, f: fn() -> Outcome) {
    let t = Instant::now();
    let r = f();
    results.push((n, name, r, t.elapsed(), limit));
}

fn main() -> ExitCode {
    let mut results: Vec<Verdict> = Vec::new();
    timed(&mut results, 1, "SL₂ flagship", Duration::from_secs(1), sl2_flagship);
    timed(&mut results, 2, "census equality", Duration::from_secs(120), census_equality);
    timed(&mut results, 3, "connected-center law", Duration::from_secs(60), connected_center);

    let t = Instant::now();
    let sweep = run_sweep(&SweepGrid::default(), Exec::default());
    let sweep_time = t.elapsed();
    let sweep_criteria = [
        (4, "coinvariants identity", SweepCheck::Coinvariants),
        (5, "Steinberg isomorphism", SweepCheck::Steinberg),
        (6, "minimal representatives and forms", SweepCheck::MinimalRepresentatives),
        (7, "β = 1 identity", SweepCheck::BetaOne),
    ];
    for (n, name, check) in sweep_criteria {
        let r = match &sweep {
            Ok(report) => sweep_check(report, check),
            Err(e) => Err(e.to_string()),
        };
        results.push((n, name, r, sweep_time, Duration::from_secs(300)));
    }
    timed(&mut results, 8, "disconnected checks", Duration::from_secs(60), disconnected);

    let mut all = true;
    for (n, name, r, took, limit) in &results {
        let (ok, detail) = match r {
            Ok(d) if took <= limit => (true, d.clone()),
            Ok(d) => (false, format!("{d}; over the {limit:?} budget")),
            Err(e) => (false, e.clone()),
        };
        all &= ok;
        println!(
            "criterion {n} {}: {name} [{:.2?}] {detail}",
            if ok { "PASS" } else { "FAIL" },
            took
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
