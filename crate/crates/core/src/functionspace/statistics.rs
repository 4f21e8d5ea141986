use crate::error::{invalid_argument, Result};
use crate::field::{Array, Element, Field, FieldData};
use crate::parallel::Comm;

/// Reduction of one level of a field over all owned rows of all ranks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Statistics {
    pub min: f64,
    pub max: f64,
    pub sum: f64,
    pub mean: f64,
    /// Exact sum for integer fields.
    pub int_sum: Option<i128>,
    pub count: usize,
}

/// Per-level partial sums of one rank: (min, max, float sum, integer sum, count).
type Partial = Vec<(f64, f64, f64, i128, usize)>;

fn partials<T: Element>(
    a: &Array<T>,
    rows: &[usize],
    has_levels: bool,
    exact: impl Fn(T) -> i128,
) -> Result<Partial> {
    let shape = a.shape();
    let strides = a.strides().to_vec();
    let (nlev, nvar, slev, svar) = match (shape.len(), has_levels) {
        (1, _) => (1, 1, 0, 0),
        (2, true) => (shape[1], 1, strides[1], 0),
        (2, false) => (1, shape[1], 0, strides[1]),
        _ => (shape[1], shape[2], strides[1], strides[2]),
    };
    a.host_view_read_only()?.with(|buf| {
        (0..nlev)
            .map(|l| {
                let mut acc = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0i128, 0usize);
                for &r in rows {
                    for v in 0..nvar {
                        let x = buf[r * strides[0] + l * slev + v * svar];
                        let f = x.to_f64();
                        acc.0 = acc.0.min(f);
                        acc.1 = acc.1.max(f);
                        acc.2 += f;
                        acc.3 += exact(x);
                        acc.4 += 1;
                    }
                }
                acc
            })
            .collect()
    })
}

pub(crate) fn compute(field: &Field, rows: &[usize], comm: &Comm) -> Result<Vec<Statistics>> {
    if field.shape().len() > 3 {
        return Err(invalid_argument("statistics need fields of rank at most 3"));
    }
    // a rank-2 field is levels unless it was created with variables only
    let lev = field.levels().is_some() || field.variables().is_none();
    let (local, integer) = match field.data() {
        FieldData::Int32(a) => (partials(a, rows, lev, i128::from)?, true),
        FieldData::Int64(a) => (partials(a, rows, lev, i128::from)?, true),
        FieldData::Real32(a) => (partials(a, rows, lev, |_| 0)?, false),
        FieldData::Real64(a) => (partials(a, rows, lev, |_| 0)?, false),
    };
    let all = comm.all_gather(local);
    let nlev = all[0].len();
    let stats: Vec<Statistics> = (0..nlev)
        .map(|l| {
            let mut s = Statistics {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
                sum: 0.0,
                mean: 0.0,
                int_sum: integer.then_some(0),
                count: 0,
            };
            for rank in &all {
                let (mn, mx, sum, isum, n) = rank[l];
                s.min = s.min.min(mn);
                s.max = s.max.max(mx);
                s.sum += sum;
                s.int_sum = s.int_sum.map(|t| t + isum);
                s.count += n;
            }
            if let Some(t) = s.int_sum {
                s.sum = t as f64;
            }
            s.mean = s.sum / s.count as f64;
            s
        })
        .collect();
    if stats.iter().any(|s| s.count == 0) {
        return Err(invalid_argument(format!(
            "field `{}` has no owned values",
            field.name()
        )));
    }
    Ok(stats)
}
