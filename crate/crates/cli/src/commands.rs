//! One function per experiment; each returns its table and a JSON summary.

use anyhow::Result;
use drspec::experiments::maximal::{dispersion_span, dyadic_time_grid, maximal_ratios, MaximalGrids};
use drspec::experiments::oscillatory::{
    evaluate_pair, fitted_bound, oscillatory_substitution_check, random_pairs, OscillatoryRow,
};
use drspec::experiments::sharpness::{ratios_at, sharpness_sweep, spread, strictly_increasing};
use drspec::h3::{abel_identity_defects, norm_comparability, sobolev_bridge_ratio, EuclideanR3};
use drspec::quadrature::QuadratureGrid;
use drspec::spherical::evaluate_radii;
use drspec::transform::{calibration_grids, PropagatorSpec, RadialProfile, Resolution, SphericalTransform};
use drspec::SpaceParams;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    EvolveConfig, Experiment, H3CheckConfig, MaximalConfig, OscillatoryConfig, PairSource, PhiConfig, RoundtripConfig,
    SharpnessConfig,
};
use crate::table::ResultTable;

pub fn execute(experiment: &Experiment) -> Result<(ResultTable, Value)> {
    let (mut table, summary) = match experiment {
        Experiment::Phi(c) => phi(c)?,
        Experiment::Roundtrip(c) => roundtrip(c)?,
        Experiment::Evolve(c) => evolve(c)?,
        Experiment::MaximalSweep(c) => maximal_sweep(c)?,
        Experiment::Oscillatory(c) => oscillatory(c)?,
        Experiment::Sharpness(c) => sharpness(c)?,
        Experiment::H3Check(c) => h3_check(c)?,
    };
    table.sort();
    Ok((table, summary))
}

fn phi(c: &PhiConfig) -> Result<(ResultTable, Value)> {
    let lambdas = c.lambda_grid.points();
    let radii = c.s_grid.points();
    let rows = lambdas
        .par_iter()
        .map(|&l| evaluate_radii(&c.space, l, &radii, c.backend, c.r0))
        .collect::<drspec::Result<Vec<_>>>()?;
    let mut table = ResultTable::new(
        "phi",
        &["lambda", "s", "value", "backend", "residual_estimate"],
        &["lambda", "s"],
    );
    let mut max_abs = 0.0f64;
    for e in rows.into_iter().flatten() {
        max_abs = max_abs.max(e.value.abs());
        table.push(vec![
            e.lambda.into(),
            e.s.into(),
            e.value.into(),
            e.backend.name().into(),
            e.residual_estimate.into(),
        ]);
    }
    Ok((table, json!({ "max_abs_value": max_abs })))
}

fn roundtrip(c: &RoundtripConfig) -> Result<(ResultTable, Value)> {
    let t = SphericalTransform::calibrate(c.space)?;
    let (radii, lambdas) = calibration_grids(&c.space)?;
    let f = RadialProfile::from_fn(radii.clone(), |s| c.profile.value(s))?;
    let back = t.inverse(&t.forward(&f, &lambdas)?, &radii)?;
    let diff = RadialProfile::new(
        radii.clone(),
        f.values().iter().zip(back.values()).map(|(a, b)| a - b).collect(),
    )?;
    let defect = diff.l2_norm(&c.space)? / f.l2_norm(&c.space)?;
    let mut table = ResultTable::new("roundtrip", &["s", "f", "roundtrip", "abs_err"], &["s"]);
    for ((&s, a), b) in radii.nodes().iter().zip(f.values()).zip(back.values()) {
        table.push(vec![s.into(), a.re.into(), b.re.into(), (a - b).norm().into()]);
    }
    Ok((
        table,
        json!({ "constant": t.constant()?, "relative_l2_defect": defect }),
    ))
}

fn evolve(c: &EvolveConfig) -> Result<(ResultTable, Value)> {
    let t = SphericalTransform::calibrate(c.space)?;
    let radii = c.s_grid.points();
    let mut times = c.t_grid.points();
    if !times.contains(&0.0) {
        times.insert(0, 0.0);
    }
    let s_max = radii.iter().cloned().fold(0.0, f64::max);
    let t_max = times.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let fhat = c
        .fhat
        .profile(&c.space, &Resolution::new(s_max, t_max).with_propagator(c.propagator))?;
    let evo = t.evolve(&fhat, &times, c.propagator, &radii)?;
    let zero = times.iter().position(|&x| x == 0.0).expect("inserted above");
    let mut table = ResultTable::new("evolve", &["s", "t", "re_u", "im_u", "abs_err_vs_f0"], &["s", "t"]);
    for (i, &s) in radii.iter().enumerate() {
        let f0 = evo.get(i, zero);
        for (j, &time) in times.iter().enumerate() {
            let u = evo.get(i, j);
            table.push(vec![
                s.into(),
                time.into(),
                u.re.into(),
                u.im.into(),
                (u - f0).norm().into(),
            ]);
        }
    }
    Ok((
        table,
        json!({ "constant": t.constant()?, "lambda_max": fhat.lambda_max(), "spectral_nodes": fhat.lambdas().len() }),
    ))
}

fn maximal_sweep(c: &MaximalConfig) -> Result<(ResultTable, Value)> {
    let t = SphericalTransform::calibrate(c.space)?;
    let spec = PropagatorSpec::default();
    let fhat = c.fhat.profile(
        &c.space,
        &Resolution::new(c.r, c.space.time_window()).with_propagator(spec),
    )?;
    let grids = MaximalGrids::for_profile(&t, &fhat, c.r, spec)?;
    let reports = maximal_ratios(&t, &fhat, &c.alphas, &grids, spec)?;
    let mut table = ResultTable::new(
        "maximal-sweep",
        &["alpha", "R", "l1_norm_maximal", "sobolev_norm", "ratio", "t_grid_size"],
        &["alpha"],
    );
    for r in &reports {
        table.push(vec![
            r.alpha.into(),
            r.r.into(),
            r.l1_norm_maximal.into(),
            r.sobolev_norm.into(),
            r.ratio.into(),
            r.t_grid_size.into(),
        ]);
    }
    Ok((
        table,
        json!({ "radii": grids.radii.nodes(), "argmax_t": reports[0].argmax_t }),
    ))
}

fn oscillatory(c: &OscillatoryConfig) -> Result<(ResultTable, Value)> {
    let pairs = match &c.pairs {
        Some(PairSource::Inline(p)) => p.clone(),
        Some(PairSource::File(path)) => crate::config::read_pairs(path)?,
        None => random_pairs(&c.space, c.draws, c.s_max, c.seed),
    };
    let bn = c.space.bn_constant(c.r0)?;
    let evaluated = pairs
        .par_iter()
        .map(|p| {
            let row = evaluate_pair(&c.space, p, bn, c.tolerance)?;
            let defect = oscillatory_substitution_check(&c.space, p, bn, c.tolerance)?;
            Ok((row, defect))
        })
        .collect::<drspec::Result<Vec<(OscillatoryRow, f64)>>>()?;
    let rows: Vec<OscillatoryRow> = evaluated.iter().map(|e| e.0).collect();
    let max_defect = evaluated.iter().map(|e| e.1).fold(0.0, f64::max);
    let mut table = ResultTable::new(
        "oscillatory",
        &[
            "s",
            "s_prime",
            "t_s",
            "t_s_prime",
            "re_integral",
            "im_integral",
            "abs_integral",
            "scaled_bound",
        ],
        &["s", "s_prime", "t_s", "t_s_prime"],
    );
    for r in &rows {
        table.push(vec![
            r.s.into(),
            r.s_prime.into(),
            r.t_s.into(),
            r.t_s_prime.into(),
            r.re_integral.into(),
            r.im_integral.into(),
            r.abs_integral.into(),
            r.scaled_bound.into(),
        ]);
    }
    Ok((
        table,
        json!({ "bn": bn, "fitted_bound": fitted_bound(&rows), "max_substitution_defect": max_defect }),
    ))
}

fn sharpness(c: &SharpnessConfig) -> Result<(ResultTable, Value)> {
    let t = SphericalTransform::calibrate(SpaceParams::h3())?;
    let rows = sharpness_sweep(&t, &c.alphas, &c.n, c.r)?;
    let mut table = ResultTable::new(
        "sharpness",
        &["alpha", "N", "ratio", "l1_norm_maximal", "sobolev_norm", "t_grid_size"],
        &["alpha", "N"],
    );
    for r in &rows {
        table.push(vec![
            r.alpha.into(),
            r.n.into(),
            r.ratio.into(),
            r.l1_norm_maximal.into(),
            r.sobolev_norm.into(),
            r.t_grid_size.into(),
        ]);
    }
    let trends: Vec<Value> = c
        .alphas
        .iter()
        .map(|&a| {
            let r = ratios_at(&rows, a);
            json!({ "alpha": a, "strictly_increasing": strictly_increasing(&r), "max_over_min": spread(&r) })
        })
        .collect();
    Ok((table, json!({ "trends": trends })))
}

fn h3_check(c: &H3CheckConfig) -> Result<(ResultTable, Value)> {
    let h = SphericalTransform::calibrate(SpaceParams::h3())?;
    let e = EuclideanR3::calibrate()?;
    let radii = c.s_grid.points();
    let s_max = radii.iter().cloned().fold(0.0, f64::max);
    let t_max = c.t.iter().cloned().fold(0.0, f64::max).max(1.0);
    let fhat = c.fhat.profile(h.params(), &Resolution::new(s_max.max(1.0), t_max))?;
    let defects = abel_identity_defects(&h, &e, &fhat, &c.t, &radii)?;
    let mut table = ResultTable::new(
        "h3-check",
        &[
            "s",
            "t",
            "re_hyperbolic",
            "im_hyperbolic",
            "re_euclidean",
            "im_euclidean",
            "defect",
        ],
        &["s", "t"],
    );
    for d in &defects {
        table.push(vec![
            d.s.into(),
            d.t.into(),
            d.hyperbolic.re.into(),
            d.hyperbolic.im.into(),
            d.euclidean.re.into(),
            d.euclidean.im.into(),
            d.defect.into(),
        ]);
    }
    let bridge = [0.1, 0.25, 0.5]
        .iter()
        .map(|&b| Ok(json!({ "beta": b, "ratio": sobolev_bridge_ratio(&h, &e, &fhat, b)? })))
        .collect::<Result<Vec<Value>>>()?;
    let ball = s_max.max(1.0);
    let comparison = {
        let ball_radii = QuadratureGrid::gauss_uniform(0.0, ball, (ball / 8.0).min(0.25))?;
        let times = dyadic_time_grid(1.0, dispersion_span(&h, &fhat, PropagatorSpec::default()))?;
        norm_comparability(&h, &e, &fhat, &ball_radii, &times)?
    };
    Ok((
        table,
        json!({
            "max_defect": defects.iter().map(|d| d.defect).fold(0.0, f64::max),
            "sobolev_bridge": bridge,
            "norm_comparability": comparison,
            "norm_comparability_within": comparison.within(),
        }),
    ))
}
