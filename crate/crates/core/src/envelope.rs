//! Semicontinuous envelopes and half-relaxed limits of grid functions.
//!
//! On a fixed grid the shrinking neighbourhoods of the continuum definitions
//! are realised by the node together with its axis neighbours.

use crate::error::{invalid, Result};
use crate::grid::{Grid, GridFn};

fn ring_fold(grid: &Grid, values: &[f64], idx: usize, init: f64, pick: fn(f64, f64) -> f64) -> f64 {
    let mut acc = pick(init, values[idx]);
    for axis in 0..grid.dim() {
        for step in [-1, 1] {
            if let Some(j) = grid.shift(idx, axis, step) {
                acc = pick(acc, values[j]);
            }
        }
    }
    acc
}

fn fmax(a: f64, b: f64) -> f64 {
    if b > a {
        b
    } else {
        a
    }
}

fn fmin(a: f64, b: f64) -> f64 {
    if b < a {
        b
    } else {
        a
    }
}

/// Upper envelope: max over the node and its axis neighbours.
pub fn usc_envelope(u: &GridFn) -> GridFn {
    let g = u.grid();
    let vals = (0..g.len())
        .map(|i| ring_fold(g, u.values(), i, f64::NEG_INFINITY, fmax))
        .collect();
    u.with_values(vals).expect("max of admissible values is admissible")
}

/// Lower envelope: min over the node and its axis neighbours.
pub fn lsc_envelope(u: &GridFn) -> GridFn {
    let g = u.grid();
    let vals = (0..g.len())
        .map(|i| ring_fold(g, u.values(), i, f64::INFINITY, fmin))
        .collect();
    u.with_values(vals).expect("min of admissible values is admissible")
}

fn check_sequence(seq: &[GridFn]) -> Result<()> {
    let Some(first) = seq.first() else {
        return invalid("relaxed limit of an empty sequence");
    };
    if seq.iter().any(|u| !u.grid().same_shape(first.grid())) {
        return invalid("relaxed limit needs all members on one grid");
    }
    Ok(())
}

/// Half-relaxed upper limit of a sequence of grid functions.
///
/// For each tail start `j` the value is the max of `u_n(y)` over `n >= j` and
/// `y` in the window of member `n`; the result is the minimum over `j`. The
/// window cannot shrink below the one-ring neighbourhood on a fixed grid, so
/// every member uses that ring and the limit is attained on the last tail.
pub fn relaxed_limsup(seq: &[GridFn]) -> Result<GridFn> {
    check_sequence(seq)?;
    let enveloped: Vec<GridFn> = seq.iter().map(usc_envelope).collect();
    let len = seq[0].len();
    let mut tail = vec![f64::NEG_INFINITY; len];
    let mut out = vec![f64::INFINITY; len];
    for u in enveloped.iter().rev() {
        for i in 0..len {
            tail[i] = fmax(tail[i], u.get(i));
            out[i] = fmin(out[i], tail[i]);
        }
    }
    seq[seq.len() - 1].with_values(out)
}

/// Order dual of [`relaxed_limsup`].
pub fn relaxed_liminf(seq: &[GridFn]) -> Result<GridFn> {
    check_sequence(seq)?;
    let enveloped: Vec<GridFn> = seq.iter().map(lsc_envelope).collect();
    let len = seq[0].len();
    let mut tail = vec![f64::INFINITY; len];
    let mut out = vec![f64::NEG_INFINITY; len];
    for u in enveloped.iter().rev() {
        for i in 0..len {
            tail[i] = fmin(tail[i], u.get(i));
            out[i] = fmax(out[i], tail[i]);
        }
    }
    seq[seq.len() - 1].with_values(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn line(n: usize) -> Arc<Grid> {
        Arc::new(Grid::cube(1, -1.0, 1.0, n).unwrap())
    }

    #[test]
    fn sign_jump() {
        let g = line(11);
        let u = GridFn::from_fn(g, |x| {
            if x[0] > 0.0 {
                1.0
            } else if x[0] < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert_eq!(usc_envelope(&u).get(5), 1.0);
        assert_eq!(lsc_envelope(&u).get(5), -1.0);
    }

    #[test]
    fn constant_is_fixed() {
        let u = GridFn::constant(line(7), 2.5).unwrap();
        assert_eq!(usc_envelope(&u), u);
        assert_eq!(lsc_envelope(&u), u);
        assert_eq!(relaxed_limsup(&[u.clone(), u.clone()]).unwrap(), usc_envelope(&u));
    }

    #[test]
    fn spike_is_flattened_from_below() {
        let g = line(9);
        let mut v = vec![0.0; 9];
        v[4] = 1.0;
        let u = GridFn::new(g, v).unwrap();
        let l = lsc_envelope(&u);
        assert!(l.leq(&u));
        assert_eq!(lsc_envelope(&l), l);
        assert_eq!(l.max(), 0.0);
    }

    #[test]
    fn empty_sequence_is_error() {
        assert!(relaxed_limsup(&[]).is_err());
        assert!(relaxed_liminf(&[]).is_err());
    }

    #[test]
    fn vanishing_oscillation() {
        let g = line(201);
        let seq: Vec<GridFn> = (1..=40)
            .map(|n| GridFn::from_fn(g.clone(), |x| (n as f64 * x[0]).sin() / n as f64).unwrap())
            .collect();
        let hi = relaxed_limsup(&seq).unwrap();
        let lo = relaxed_liminf(&seq).unwrap();
        assert!(hi.sup_norm() <= 1.0 / 40.0 + 1e-12);
        assert!(lo.sup_norm() <= 1.0 / 40.0 + 1e-12);
        assert!(lo.leq(&hi));
    }
}
