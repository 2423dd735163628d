//! One function per subcommand. Each returns a JSON report, summary lines
//! for the terminal and, when an identity failed, its name.

use serde::Serialize;
use serde_json::{json, Value};

use dlseries::endoscopy::{
    b_set, coinvariants, endoscopic_datum, extend_to_embedding, fixed_omega, rational_form, steinberg_component_group,
};
use dlseries::oracle::{census, compare};
use dlseries::root_datum::RootDatum;
use dlseries::series::{
    disconnected_rational_report, disconnected_series_data, geometric_report, predicted_irreducibles, rational_partition,
    DisconnectedInput,
};
use dlseries::sweep::{connected_center_sweep, run_sweep};
use dlseries::weyl::{weyl_order, ActingGroup, WeylGroup};
use dlseries::Exec;

use crate::config::JobConfig;
use crate::error::CliResult;

/// Groups up to this order are written out with elements and table.
const TABLE_LIMIT: usize = 2048;

pub struct Outcome {
    pub report: Value,
    pub summary: Vec<String>,
    /// `(identity, detail)` of the first failed identity.
    pub violation: Option<(String, String)>,
}

impl Outcome {
    fn ok(report: impl Serialize, summary: Vec<String>) -> Self {
        Outcome {
            report: to_value(report),
            summary,
            violation: None,
        }
    }
}

fn to_value(x: impl Serialize) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

/// Generators, and for small groups the element matrices and the
/// multiplication table.
fn group_json<G: ActingGroup + ?Sized>(g: &G, generators: &[usize]) -> Value {
    let n = g.order();
    if n > TABLE_LIMIT {
        return json!({ "order": n, "generators": generators });
    }
    let elements: Vec<Vec<Vec<i64>>> = (0..n).map(|a| g.matrix(a).to_rows()).collect();
    let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| g.mul(a, b)).collect()).collect();
    json!({ "order": n, "generators": generators, "elements": elements, "table": table })
}

pub fn datum(cfg: &JobConfig) -> CliResult<Outcome> {
    let d = cfg.datum()?;
    let violations = d.validate();
    let (torsion, free_rank) = d.fundamental_group();
    let order = weyl_order(&d, u128::MAX);
    let report = json!({
        "datum": d,
        "validation": violations,
        "semisimple_rank": d.semisimple_rank(),
        "weyl_order": order.map(|o| o.to_string()),
        "fundamental_group": { "torsion": torsion, "free_rank": free_rank },
        "connected_center": d.has_connected_center(),
    });
    let summary = vec![format!(
        "rank {}, {} roots, |W| = {}, {}",
        d.rank(),
        d.num_roots(),
        order.map_or("?".into(), |o| o.to_string()),
        if violations.is_empty() { "valid" } else { "INVALID" }
    )];
    let violation = violations.first().map(|v| ("root datum axioms".to_string(), v.message.clone()));
    Ok(Outcome {
        report,
        summary,
        violation,
    })
}

pub fn endoscopy(cfg: &JobConfig) -> CliResult<Outcome> {
    let d = cfg.datum()?;
    let eps = cfg.twist(&d)?;
    let l = cfg.param(&d, eps.p)?;
    let w = WeylGroup::generate(&d, cfg.weyl_cap())?;
    let dual_w = WeylGroup::generate(&d.dual(), cfg.weyl_cap())?;
    let e = endoscopic_datum(&w, &eps, &l)?;
    let b = b_set(&w, &e)?;
    let forms = (0..b.len()).map(|beta| rational_form(&w, &e, &b, beta)).collect::<dlseries::Result<Vec<_>>>()?;
    let co = coinvariants(&w, &e, &b)?;
    let fixed = fixed_omega(&w, &e)?;
    let steinberg = steinberg_component_group(&w, &dual_w, &l, &e.little)?;
    let summary = vec![
        format!("Φ_L: {} roots, |W_L°| = {}, |Ω_L| = {}", e.little.phi_l.len(), e.little.w_l0.group.len(), e.little.omega.len()),
        format!("|𝔅_L| = {}, Ad_ε-orbits = {}, |(Ω_L)_Fr| = {}", b.len(), b.orbits.len(), co.classes.len()),
        format!("|Ω_L^ε| = {}", fixed.len()),
    ];
    let report = json!({
        "weyl_group": group_json(&w, w.simple_reflections()),
        "param": e.param,
        "frame": { "w_s": e.frame.w_s, "q": eps.q, "tau": eps.tau.matrix() },
        "phi_l": e.little.phi_l,
        "phi_l_positive": e.little.phi_l_positive,
        "h_datum": e.h_datum,
        "w_l": e.little.w_l.elements,
        "w_l0": { "elements": e.little.w_l0.group.elements, "simple_roots": e.little.w_l0.simple },
        "omega": e.little.omega.elements,
        "b_set": b,
        "forms": forms,
        "coinvariants": co,
        "omega_fixed": fixed,
        "component_group": steinberg,
    });
    Ok(Outcome::ok(report, summary))
}

fn disconnected_input(cfg: &JobConfig, d: &RootDatum) -> CliResult<Option<DisconnectedInput>> {
    let eps = cfg.twist(d)?;
    Ok(match cfg.components(d)? {
        Some(c) => Some(DisconnectedInput::new(d.clone(), c, eps)?),
        None => None,
    })
}

pub fn series_geometric(cfg: &JobConfig) -> CliResult<Outcome> {
    let d = cfg.datum()?;
    let eps = cfg.twist(&d)?;
    let l = cfg.param(&d, eps.p)?;
    if let Some(input) = disconnected_input(cfg, &d)? {
        let ext = input.group(cfg.weyl_cap())?;
        let (report, b) = disconnected_series_data(&input, &ext, &l)?;
        let predicted = if d.num_roots() == 0 {
            Some(predicted_irreducibles(&ext, &report, &b)?)
        } else {
            None
        };
        let dd = report.disconnected.as_ref().expect("disconnected data");
        let mut summary = vec![format!(
            "|𝔅_L°| = {}, Ω_L-orbits = {}, |Ω_L| = {}, |Ω_L°| = {}, π₀ stabilizer {:?}",
            b.len(),
            b.orbits.len(),
            report.omega.len(),
            dd.omega_connected.len(),
            dd.pi0_stabilizer
        )];
        if let Some(n) = predicted {
            summary.push(format!("predicted irreducibles: {n}"));
        }
        let generators: Vec<usize> = (0..ext.order()).filter(|&a| ext.length(a) == 1 || ext.pair(a).0 == 0).collect();
        return Ok(Outcome::ok(
            json!({ "group": group_json(&ext, &generators), "series": report, "predicted_irreducibles": predicted }),
            summary,
        ));
    }
    let w = WeylGroup::generate(&d, cfg.weyl_cap())?;
    let report = geometric_report(&w, &eps, &l)?;
    let summary = vec![format!(
        "orbit size {}, |Ω_L| = {}, |𝔅_L| = {}, rational series = {}",
        report.orbit_size,
        report.omega.len(),
        report.min_reps.len(),
        report.orbits.len()
    )];
    Ok(Outcome::ok(
        json!({ "group": group_json(&w, w.simple_reflections()), "series": report }),
        summary,
    ))
}

pub fn series_rational(cfg: &JobConfig) -> CliResult<Outcome> {
    let d = cfg.datum()?;
    let eps = cfg.twist(&d)?;
    let l = cfg.param(&d, eps.p)?;
    if let Some(input) = disconnected_input(cfg, &d)? {
        let ext = input.group(cfg.weyl_cap())?;
        let r = disconnected_rational_report(&input, &ext, &l)?;
        let summary = vec![format!(
            "β = 1: |Ω_{{L,1}}| = {}, π₀ image {:?}",
            r.omega_beta.len(),
            r.disconnected.as_ref().map(|x| &x.pi0_image)
        )];
        return Ok(Outcome::ok(json!({ "series": [r] }), summary));
    }
    let w = WeylGroup::generate(&d, cfg.weyl_cap())?;
    let series = rational_partition(&w, &eps, &l)?;
    let fixed = series[0].omega_fixed.as_ref().map_or(0, Vec::len);
    let summary = vec![format!("{} rational series, |Ω_L^ε| = {fixed}", series.len())];
    Ok(Outcome::ok(
        json!({ "group": group_json(&w, w.simple_reflections()), "series": series }),
        summary,
    ))
}

pub fn embed(cfg: &JobConfig) -> CliResult<Outcome> {
    let d = cfg.datum()?;
    let emb = d.regular_embedding()?;
    let mut summary = vec![format!(
        "X_c of rank {}, connected center: {}",
        emb.big.rank(),
        emb.big.has_connected_center()
    )];
    let extension = match (&cfg.param, cfg.q) {
        (Some(_), Some(_)) => {
            let eps = cfg.twist(&d)?;
            let l = cfg.param(&d, eps.p)?;
            let big_w = WeylGroup::generate(&emb.big, cfg.weyl_cap())?;
            let ext = extend_to_embedding(&d, &emb, &big_w, &l, eps.p)?;
            summary.push(format!("ℓ_c = {}, |Ω_{{L_c}}| = {}", ext.param_c, ext.omega_c_order));
            Some(ext)
        }
        _ => None,
    };
    Ok(Outcome::ok(json!({ "embedding": emb, "extension": extension }), summary))
}

pub fn census_cmd(cfg: &JobConfig, exec: Exec) -> CliResult<Outcome> {
    let spec = cfg.census_spec()?;
    let c = census(spec, exec)?;
    let summary = vec![format!(
        "{spec}: {} semisimple elements, {} rational classes, {} geometric bundles",
        c.semisimple_elements,
        c.classes.len(),
        c.bundles.len()
    )];
    Ok(Outcome::ok(c, summary))
}

pub fn compare_cmd(cfg: &JobConfig, exec: Exec) -> CliResult<Outcome> {
    let d = cfg.datum()?;
    let eps = cfg.twist(&d)?;
    let r = compare(&d, &eps, cfg.bound(), cfg.census_spec()?, exec)?;
    let mut summary = vec![format!(
        "{}: {} = {}",
        if r.matched { "match" } else { "mismatch" },
        r.predicted_total,
        r.census_total
    )];
    summary.extend(r.mismatches.iter().cloned());
    let violation = (!r.matched).then(|| {
        (
            "rational series count = rational class count".to_string(),
            format!("{} predicted, {} in the census", r.predicted_total, r.census_total),
        )
    });
    Ok(Outcome {
        report: to_value(&r),
        summary,
        violation,
    })
}

pub fn sweep_cmd(cfg: &JobConfig, exec: Exec) -> CliResult<Outcome> {
    let grid = cfg.sweep_grid()?;
    let report = run_sweep(&grid, exec)?;
    let center = connected_center_sweep(grid.denominator_bound, exec)?;
    let mut summary: Vec<String> = report
        .passed
        .iter()
        .map(|(check, n)| format!("{check}: {n} / {} cases", report.cases.len()))
        .collect();
    let center_bad: usize = center.iter().map(|e| e.violations.len()).sum();
    summary.push(format!("connected-center: {} data, {center_bad} violations", center.len()));
    let violation = report
        .failures()
        .next()
        .map(|(c, (check, detail))| {
            (
                check.identity().to_string(),
                format!("{} τ={} q={} ℓ={:?}: {detail}", c.datum, c.tau, c.q, c.param),
            )
        })
        .or_else(|| {
            center
                .iter()
                .find_map(|e| e.violations.first().map(|v| ("Ω_L = 1 (connected center)".to_string(), format!("{}: {v}", e.label))))
        });
    Ok(Outcome {
        report: json!({ "grid": grid, "sweep": report, "connected_center": center }),
        summary,
        violation,
    })
}
