use cqed_gates::addressing::power_for_shift;
use cqed_gates::fiber::CouplingProfile;
use cqed_gates::scenario::Scenario;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};
use crate::gate_cmd::{metric_cells, metric_header};
use crate::metrics::{evaluate, GateMetrics};
use crate::output::{cell, comment_block, num, render_csv, Output};

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub coords: Vec<f64>,
    /// Addressing-laser power for the detuning axis, if there is one.
    pub laser_power_mw: Option<f64>,
    pub metrics: GateMetrics,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axes: Vec<(String, Vec<f64>)>,
    /// Row-major: the last axis varies fastest.
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Point at grid position `index` (one entry per axis).
    pub fn at(&self, index: &[usize]) -> &SweepPoint {
        let flat = index
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, (_, values))| acc * values.len() + i);
        &self.points[flat]
    }
}

fn is_detuning_axis(field: &str) -> bool {
    field.ends_with("delta_2pi_mhz")
}

/// Evaluates every grid point of the scenario's `[sweep]` section.
pub fn run_grid(base: &Scenario) -> Result<SweepResult> {
    let sweep = base
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Usage("scenario has no [sweep] section".into()))?;
    if sweep.axes.is_empty() || sweep.axes.len() > 2 {
        return Err(CliError::Usage(format!(
            "a sweep needs one or two axes, got {}",
            sweep.axes.len()
        )));
    }
    let axes: Vec<(String, Vec<f64>)> = sweep
        .axes
        .iter()
        .map(|a| Ok((a.field.clone(), a.grid()?)))
        .collect::<Result<_>>()?;

    let mut coords: Vec<Vec<f64>> = vec![vec![]];
    for (_, values) in &axes {
        coords = coords
            .into_iter()
            .flat_map(|c| values.iter().map(move |&v| [c.clone(), vec![v]].concat()))
            .collect();
    }
    let scenarios: Vec<Scenario> = coords
        .iter()
        .map(|c| {
            let mut s = base.clone();
            s.sweep = None;
            for ((field, _), &v) in axes.iter().zip(c) {
                s = s.with_field(field, v)?;
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;

    let fiber_swept = axes.iter().any(|(f, _)| f.starts_with("fiber."));
    let shared: Option<CouplingProfile> =
        if !fiber_swept && scenarios.iter().any(Scenario::needs_fiber) {
            Some(base.fiber.coupling_profile()?)
        } else {
            None
        };
    let detuning_axis = axes.iter().position(|(f, _)| is_detuning_axis(f));

    let points = scenarios
        .par_iter()
        .zip(coords.par_iter())
        .map(|(s, c)| {
            let own = if fiber_swept && s.needs_fiber() { Some(s.fiber.coupling_profile()?) } else { None };
            let metrics = evaluate(s, own.as_ref().or(shared.as_ref()))?;
            let laser_power_mw = detuning_axis
                .map(|k| power_for_shift(&s.beam, c[k].abs()))
                .transpose()?;
            Ok(SweepPoint { coords: c.clone(), laser_power_mw, metrics })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { axes, points })
}

type Getter = fn(&GateMetrics) -> Option<f64>;

const SUMMARY_METRICS: [(&str, Getter); 5] = [
    ("f_avg", |m| Some(m.f_avg)),
    ("f_e", |m| Some(m.f_e)),
    ("f_superposition", |m| Some(m.f_superposition)),
    ("f_analytic", |m| m.f_analytic),
    ("p_s", |m| Some(m.p_s)),
];

fn location(r: &SweepResult, p: &SweepPoint, value: f64) -> Value {
    let coords: Map<String, Value> =
        r.axes.iter().zip(&p.coords).map(|((f, _), &v)| (f.clone(), num(v))).collect();
    json!({ "at": coords, "value": num(value) })
}

/// argmax/argmin of each fidelity and success metric; ties go to the first
/// point in row order.
pub fn summary(r: &SweepResult) -> Value {
    let mut metrics = Map::new();
    for (name, get) in SUMMARY_METRICS {
        let vals: Vec<(usize, f64)> = r
            .points
            .iter()
            .enumerate()
            .filter_map(|(i, p)| get(&p.metrics).filter(|v| v.is_finite()).map(|v| (i, v)))
            .collect();
        if vals.is_empty() {
            continue;
        }
        let max = vals.iter().fold(vals[0], |b, &x| if x.1 > b.1 { x } else { b });
        let min = vals.iter().fold(vals[0], |b, &x| if x.1 < b.1 { x } else { b });
        metrics.insert(
            name.into(),
            json!({
                "argmax": location(r, &r.points[max.0], max.1),
                "argmin": location(r, &r.points[min.0], min.1),
            }),
        );
    }
    let axes: Vec<Value> = r
        .axes
        .iter()
        .map(|(f, v)| json!({ "field": f, "values": v.iter().map(|&x| num(x)).collect::<Vec<_>>() }))
        .collect();
    json!({ "points": r.points.len(), "axes": axes, "metrics": metrics })
}

pub fn run(name: &str, base: &Scenario) -> Result<Output> {
    let r = run_grid(base)?;
    let mut header: Vec<String> = r.axes.iter().map(|(f, _)| f.clone()).collect();
    let with_power = r.points.first().is_some_and(|p| p.laser_power_mw.is_some());
    if with_power {
        header.push("laser_power_mw".into());
    }
    header.extend(metric_header());
    let rows: Vec<Vec<String>> = r
        .points
        .iter()
        .map(|p| {
            let mut row: Vec<String> = p.coords.iter().map(|&v| cell(v)).collect();
            if let Some(pw) = p.laser_power_mw {
                row.push(cell(pw));
            }
            row.extend(metric_cells(&p.metrics));
            row
        })
        .collect();
    let csv = render_csv(&comment_block(&format!("sweep {name}"), &base.to_toml_string()), &header, &rows)?;
    let mut json = summary(&r);
    json.as_object_mut()
        .expect("summary is an object")
        .insert("scenario".into(), json!(base.to_toml_string()));
    Ok(Output { stem: "sweep", csv, json, text: None })
}
