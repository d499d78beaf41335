//! Pairwise comparison, segmentation, run compression and scale demotion.

use super::{
    OrderedStructure, ReducedLink, ReducedNode, ReducedStructure, ReductionError, RelationLabel,
    Scale, Segmentation, Sign, SignificanceStats,
};

/// Differences with magnitude at or below this count as constancy.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// `u_next − u_i`: positive means the parameter increased.
pub fn compare(u_i: f64, u_next: f64) -> Result<f64, ReductionError> {
    for v in [u_i, u_next] {
        if !v.is_finite() {
            return Err(ReductionError::NotFinite(v));
        }
    }
    Ok(u_next - u_i)
}

pub fn gradient_sign(delta: f64, zero_tol: f64) -> Sign {
    if delta > zero_tol {
        Sign::Pos
    } else if delta < -zero_tol {
        Sign::Neg
    } else {
        Sign::Zero
    }
}

fn require_pairs(s: &OrderedStructure) -> Result<(), ReductionError> {
    if s.len() < 2 {
        return Err(ReductionError::TooShort {
            needed: 2,
            got: s.len(),
        });
    }
    Ok(())
}

/// Gradient sign of every consecutive pair.
pub fn relation_vector(
    s: &OrderedStructure,
    parameter: &str,
    zero_tol: f64,
) -> Result<Vec<Sign>, ReductionError> {
    let values = s.values(parameter)?;
    require_pairs(s)?;
    values
        .windows(2)
        .map(|w| Ok(gradient_sign(compare(w[0], w[1])?, zero_tol)))
        .collect()
}

/// Index `j` with `Tr_j ≤ value < Tr_{j+1}`. Cyclic segmentations reduce the
/// value modulo the period first, and values below the first threshold wrap
/// into the last segment.
pub fn segment_index(value: f64, seg: &Segmentation) -> Result<usize, ReductionError> {
    if !value.is_finite() {
        return Err(ReductionError::NotFinite(value));
    }
    let t = &seg.thresholds;
    let v = match (seg.cyclic, seg.period) {
        (true, Some(p)) => value.rem_euclid(p),
        _ => value,
    };
    match t.iter().rposition(|&tr| tr <= v) {
        Some(j) => Ok(j),
        None if seg.cyclic => Ok(t.len() - 1),
        None => Err(ReductionError::BelowSegments(value)),
    }
}

/// Compresses every maximal run of consecutive pairs that share a gradient
/// sign and destination segment into a single link between the run's two
/// endpoints. A run's last element is the next run's first.
pub fn sp_reduce(
    s: &OrderedStructure,
    parameter: &str,
    seg: Option<&Segmentation>,
    zero_tol: f64,
) -> Result<ReducedStructure, ReductionError> {
    let values = s.values(parameter)?;
    require_pairs(s)?;
    if let Some(seg) = seg {
        seg.validate()?;
    }
    let scale = s.scale_of(parameter).expect("parameter checked above");
    let segments: Vec<usize> = match seg {
        Some(seg) => s
            .measured_values(parameter)?
            .into_iter()
            .map(|v| segment_index(v, seg))
            .collect::<Result<_, _>>()?,
        None => vec![0; values.len()],
    };
    let labels: Vec<RelationLabel> = values
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            Ok(RelationLabel {
                sign: gradient_sign(compare(w[0], w[1])?, zero_tol),
                segment: segments[i + 1],
            })
        })
        .collect::<Result<_, ReductionError>>()?;

    let mut critical = vec![0];
    for i in 1..labels.len() {
        if labels[i] != labels[i - 1] {
            critical.push(i);
        }
    }
    critical.push(values.len() - 1);

    let node_scale = scale.weakest(Scale::Ordinal);
    let link_scale = scale.link_scale().weakest(Scale::Ordinal);
    let nodes = critical
        .iter()
        .map(|&i| ReducedNode {
            source_index: i,
            value: segments[i] as i64,
            scale: node_scale,
            stats: SignificanceStats::certain(),
        })
        .collect();
    let links = critical
        .windows(2)
        .enumerate()
        .map(|(k, w)| ReducedLink {
            from: k,
            to: k + 1,
            label: labels[w[0]],
            scale: link_scale,
            stats: SignificanceStats::certain(),
        })
        .collect();
    Ok(ReducedStructure {
        parameter: parameter.to_string(),
        nodes,
        links,
    })
}

/// Demotes every parameter to `target`, one scale step at a time:
/// ratio to interval subtracts the first element's value, interval to
/// ordinal keeps the sign, ordinal to nominal keeps presence (nonzero → 1).
pub fn param_reduce(
    s: &OrderedStructure,
    target: Scale,
) -> Result<OrderedStructure, ReductionError> {
    for name in s.parameter_names() {
        let current = s.scale_of(name).expect("name taken from the structure");
        if !target.is_weaker_than(current) {
            return Err(ReductionError::NotWeaker {
                param: name.to_string(),
                current,
                target,
            });
        }
    }
    let mut out = s.clone();
    let names: Vec<String> = s.parameter_names().into_iter().map(String::from).collect();
    for name in names {
        while let Some(scale) = out.scale_of(&name).filter(|&sc| sc != target) {
            demote_step(&mut out, &name, scale);
        }
    }
    Ok(out)
}

/// Demotes only the ratio-scale parameters, to interval.
pub(crate) fn demote_ratio(s: &OrderedStructure) -> OrderedStructure {
    let mut out = s.clone();
    let ratio: Vec<String> = s
        .parameter_names()
        .into_iter()
        .filter(|n| s.scale_of(n) == Some(Scale::Ratio))
        .map(String::from)
        .collect();
    for name in ratio {
        demote_step(&mut out, &name, Scale::Ratio);
    }
    out
}

fn demote_step(s: &mut OrderedStructure, name: &str, from: Scale) {
    let origin = s.elements()[0].params[name].value;
    for e in s.elements_mut() {
        let p = e.params.get_mut(name).expect("homogeneous structure");
        p.value = match from {
            Scale::Ratio => p.value - origin,
            Scale::Interval => f64::from(i8::from(gradient_sign(p.value, DEFAULT_ZERO_TOL))),
            Scale::Ordinal => f64::from(u8::from(p.value != 0.0)),
            Scale::Nominal => unreachable!("nominal has no weaker scale"),
        };
        p.scale = from.demoted().expect("non-nominal scale");
    }
}
