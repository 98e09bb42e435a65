//! Revised simplex for 0/1 packing programs `max 1·x` s.t. `A x <= 1`, `x >= 0`.
//!
//! Column `j` lists the rows where `A` has a one. The slack basis is feasible
//! from the start, so no phase 1 is needed. The basis inverse is kept as a
//! dense exact matrix with one row per vertex; pricing only touches the `k`
//! entries of each column.

use num_traits::{One, Signed, Zero};

use crate::numeric::Rational;

pub(crate) struct PackingSolution {
    pub x: Vec<Rational>,
    pub value: Rational,
    /// Optimal dual, one entry per row: a minimum fractional cover.
    pub duals: Vec<Rational>,
}

pub(crate) fn solve_packing(rows: usize, columns: &[Vec<usize>]) -> PackingSolution {
    let ncols = columns.len();
    let mut binv: Vec<Vec<Rational>> = (0..rows)
        .map(|i| {
            let mut r = vec![Rational::zero(); rows];
            r[i] = Rational::one();
            r
        })
        .collect();
    // Variables 0..ncols are structural, ncols + i is the slack of row i.
    let mut basis: Vec<usize> = (0..rows).map(|i| ncols + i).collect();
    let mut xb: Vec<Rational> = vec![Rational::one(); rows];

    loop {
        let y = duals(&binv, &basis, ncols);
        let entering = columns
            .iter()
            .position(|col| {
                let load: Rational = col.iter().map(|&i| &y[i]).sum();
                load < Rational::one()
            })
            .or_else(|| (0..rows).find(|&i| y[i].is_negative()).map(|i| ncols + i));
        let Some(j) = entering else {
            let mut x = vec![Rational::zero(); ncols];
            for (r, &b) in basis.iter().enumerate() {
                if b < ncols {
                    x[b] = xb[r].clone();
                }
            }
            let value = x.iter().sum();
            return PackingSolution { x, value, duals: y };
        };

        let alpha: Vec<Rational> = if j < ncols {
            binv.iter()
                .map(|row| columns[j].iter().map(|&i| &row[i]).sum())
                .collect()
        } else {
            binv.iter().map(|row| row[j - ncols].clone()).collect()
        };

        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..rows {
            if !alpha[r].is_positive() {
                continue;
            }
            let ratio = &xb[r] / &alpha[r];
            let better = match &leave {
                None => true,
                Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        // Every column is bounded by the packing rows, so a leaving row always exists.
        let (r, _) = leave.expect("packing program is bounded");

        let p = alpha[r].clone();
        for v in binv[r].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        xb[r] /= &p;
        let pivot_row = std::mem::take(&mut binv[r]);
        let nz: Vec<usize> = (0..rows).filter(|&c| !pivot_row[c].is_zero()).collect();
        let xr = xb[r].clone();
        for s in 0..rows {
            if s == r || alpha[s].is_zero() {
                continue;
            }
            for &c in &nz {
                let d = &alpha[s] * &pivot_row[c];
                binv[s][c] -= d;
            }
            let d = &alpha[s] * &xr;
            xb[s] -= d;
        }
        binv[r] = pivot_row;
        basis[r] = j;
    }
}

/// `y = c_B B^{-1}` where `c_B` is 1 on structural basics and 0 on slacks.
fn duals(binv: &[Vec<Rational>], basis: &[usize], ncols: usize) -> Vec<Rational> {
    let rows = binv.len();
    let mut y = vec![Rational::zero(); rows];
    for (r, &b) in basis.iter().enumerate() {
        if b < ncols {
            for (i, v) in binv[r].iter().enumerate() {
                if !v.is_zero() {
                    y[i] += v;
                }
            }
        }
    }
    debug_assert_eq!(y.len(), rows);
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational;

    #[test]
    fn triangle_of_pairs() {
        // Edges {0,1}, {1,2}, {0,2}: optimum 3/2 with x = 1/2 each.
        let cols = vec![vec![0, 1], vec![1, 2], vec![0, 2]];
        let s = solve_packing(3, &cols);
        assert_eq!(s.value, rational(3, 2));
        assert!(s.x.iter().all(|v| *v == rational(1, 2)));
        let dual: Rational = s.duals.iter().sum();
        assert_eq!(dual, s.value);
    }

    #[test]
    fn empty_program() {
        let s = solve_packing(4, &[]);
        assert!(s.value.is_zero());
        assert!(s.duals.iter().all(Zero::is_zero));
    }
}
