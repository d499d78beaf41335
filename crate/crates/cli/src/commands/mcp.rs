use enlab_core::mcp::ratio_to_f64;
use enlab_core::rng::substream;
use enlab_core::McpNeuron;
use rand::Rng;
use serde_json::{json, Value};

use super::{joined, num, units, Ctx};
use crate::config::parse_reals;
use crate::error::{CliError, CliResult};
use crate::output::{Report, Table};

/// Rows above this are refused by `entropy-sweep`.
const MAX_SWEEP_ROWS: usize = 1 << 20;
const ARGMAX_TOL: f64 = 1e-12;

fn neurons(ctx: &Ctx) -> CliResult<Vec<McpNeuron>> {
    let cfg = &ctx.config;
    let mut out = Vec::new();
    if let Some(text) = cfg.str("weights") {
        let weights: Vec<Vec<f64>> = text
            .split(';')
            .map(|w| parse_reals("weights", w))
            .collect::<CliResult<_>>()?;
        let thresholds = parse_reals(
            "threshold",
            cfg.str("threshold")
                .unwrap_or("0")
                .replace(';', ",")
                .as_str(),
        )?;
        if thresholds.len() != 1 && thresholds.len() != weights.len() {
            return Err(CliError::Validation(format!(
                "config key `threshold`: expected 1 or {} values, got {}",
                weights.len(),
                thresholds.len()
            )));
        }
        for (k, w) in weights.into_iter().enumerate() {
            let q = thresholds[if thresholds.len() == 1 { 0 } else { k }];
            out.push(McpNeuron::new(w, q)?);
        }
    }
    let random: usize = cfg.or("random_neurons", 0)?;
    if random > 0 {
        let max_inputs: usize = cfg.or("max_inputs", 8)?;
        if max_inputs == 0 {
            return Err(CliError::Validation(
                "config key `max_inputs` must be positive".into(),
            ));
        }
        let mut rng = substream(ctx.seed, "cli.mcp");
        for _ in 0..random {
            let n = rng.random_range(1..=max_inputs);
            let w = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let q = rng.random_range(-1.0..1.0);
            out.push(McpNeuron::new(w, q)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Validation(
            "no neurons: set `weights` or `random_neurons`".into(),
        ));
    }
    Ok(out)
}

/// Exhaustive census and entropies of each configured neuron.
pub fn mcp_census(ctx: &Ctx) -> CliResult<Report> {
    ctx.config.allow(&[
        "weights",
        "threshold",
        "random_neurons",
        "max_inputs",
        "units",
    ])?;
    let consts = units(&ctx.config)?;
    let mut table = Table::new(&[
        "neuron",
        "n",
        "weights",
        "threshold",
        "omega_act",
        "omega_nonact",
        "p_act",
        "p_act_value",
        "h_bits",
        "s_act",
        "s_nonact",
    ]);
    for (k, neuron) in neurons(ctx)?.iter().enumerate() {
        let c = neuron.microstate_census()?;
        let e = neuron.entropy_report(consts)?;
        table.push(vec![
            json!(k),
            json!(c.n),
            joined(neuron.weights()),
            num(neuron.threshold()),
            json!(c.omega_act),
            json!(c.omega_nonact),
            json!(c.p_act.to_string()),
            num(ratio_to_f64(c.p_act)),
            num(e.h_bits),
            e.s_act.map_or(Value::Null, num),
            e.s_nonact.map_or(Value::Null, num),
        ]);
    }
    let mut report = Report {
        table,
        ..Report::default()
    };
    report.summary.insert("k_b".into(), num(consts.k_b));
    Ok(report)
}

/// All weight vectors over a grid; rows at the entropy maximum are flagged.
pub fn entropy_sweep(ctx: &Ctx) -> CliResult<Report> {
    let cfg = &ctx.config;
    cfg.allow(&["inputs", "grid", "threshold"])?;
    let n: usize = cfg.or("inputs", 2)?;
    let grid = cfg.reals("grid")?.unwrap_or_else(|| vec![-1.0, 0.0, 1.0]);
    let q: f64 = cfg.or("threshold", 0.0)?;
    if grid.is_empty() || n == 0 {
        return Err(CliError::Validation("empty weight grid".into()));
    }
    let rows = u32::try_from(n)
        .ok()
        .and_then(|n| grid.len().checked_pow(n))
        .filter(|&r| r <= MAX_SWEEP_ROWS)
        .ok_or_else(|| {
            CliError::Capacity(format!(
                "{}^{n} grid points exceed the sweep limit of {MAX_SWEEP_ROWS}",
                grid.len()
            ))
        })?;

    let mut points = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut rest = r;
        let mut w = vec![0.0; n];
        for slot in w.iter_mut().rev() {
            *slot = grid[rest % grid.len()];
            rest /= grid.len();
        }
        let neuron = McpNeuron::new(w, q)?;
        let c = neuron.microstate_census()?;
        let h = neuron
            .entropy_report(enlab_core::PhysicalConstants::natural())?
            .h_bits;
        points.push((neuron, c.p_act, h));
    }
    let h_max = points.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    let mut table = Table::new(&["row", "weights", "p_act", "p_act_value", "h_bits", "is_max"]);
    let mut argmax = 0usize;
    for (r, (neuron, p, h)) in points.iter().enumerate() {
        let is_max = h_max - h <= ARGMAX_TOL;
        argmax += usize::from(is_max);
        table.push(vec![
            json!(r),
            joined(neuron.weights()),
            json!(p.to_string()),
            num(ratio_to_f64(*p)),
            num(*h),
            json!(is_max),
        ]);
    }
    let mut report = Report {
        table,
        ..Report::default()
    };
    report.summary.insert("h_max".into(), num(h_max));
    report.summary.insert("argmax_rows".into(), json!(argmax));
    Ok(report)
}
