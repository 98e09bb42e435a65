//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Solves `maximize c·x` subject to rows `a·x (<= | >= | =) b` and `x >= 0`.
//! Intended for small and medium programs; every pivot touches the full tableau.

use num_traits::{One, Signed, Zero};

use crate::numeric::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    /// Maximized.
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Column {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs; the last entry holds minus the objective value.
    obj: Vec<Rational>,
    basis: Vec<usize>,
    kinds: Vec<Column>,
    pivots: u64,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rational {
        self.rows[r].last().unwrap()
    }

    fn width(&self) -> usize {
        self.kinds.len()
    }

    fn pivot(&mut self, r: usize, col: usize) {
        self.pivots += 1;
        let p = self.rows[r][col].clone();
        if !p.is_one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x /= &p;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..pivot_row.len())
            .filter(|&j| !pivot_row[j].is_zero())
            .collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for &j in &nz {
                row[j] -= &f * &pivot_row[j];
            }
        }
        if !self.obj[col].is_zero() {
            let f = self.obj[col].clone();
            for &j in &nz {
                self.obj[j] -= &f * &pivot_row[j];
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = col;
    }

    /// Runs Bland's rule until optimal; `false` signals unboundedness.
    fn optimize(&mut self, allowed: &dyn Fn(usize) -> bool) -> bool {
        loop {
            let entering = (0..self.width()).find(|&j| allowed(j) && self.obj[j].is_positive());
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }

    fn set_objective(&mut self, costs: &[Rational]) {
        let w = self.width();
        let mut obj = vec![Rational::zero(); w + 1];
        obj[..costs.len()].clone_from_slice(costs);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = obj[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (o, a) in obj.iter_mut().zip(&self.rows[r]) {
                if !a.is_zero() {
                    *o -= &cb * a;
                }
            }
        }
        self.obj = obj;
    }
}

/// Solves the program exactly. Ties in both pricing and the ratio test go to
/// the lowest index, so the result is deterministic.
pub fn solve(lp: &LinearProgram) -> LpOutcome {
    solve_counting(lp).0
}

/// As [`solve`], also returning the number of pivots performed.
pub fn solve_counting(lp: &LinearProgram) -> (LpOutcome, u64) {
    let n = lp.num_vars;
    let m = lp.constraints.len();

    let mut kinds = vec![Column::Structural; n];
    let mut layout = Vec::with_capacity(m);
    for c in &lp.constraints {
        let flip = c.rhs.is_negative();
        let rel = match (c.relation, flip) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => r,
        };
        let (slack, art) = match rel {
            Relation::Le => {
                kinds.push(Column::Slack);
                (Some((kinds.len() - 1, Rational::one())), None)
            }
            Relation::Ge => {
                kinds.push(Column::Slack);
                let s = kinds.len() - 1;
                kinds.push(Column::Artificial);
                (Some((s, -Rational::one())), Some(kinds.len() - 1))
            }
            Relation::Eq => {
                kinds.push(Column::Artificial);
                (None, Some(kinds.len() - 1))
            }
        };
        layout.push((flip, slack, art));
    }
    let width = kinds.len();

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (c, (flip, slack, art)) in lp.constraints.iter().zip(&layout) {
        let mut row = vec![Rational::zero(); width + 1];
        let sign = if *flip {
            -Rational::one()
        } else {
            Rational::one()
        };
        for (j, a) in &c.coeffs {
            row[*j] += a * &sign;
        }
        row[width] = &c.rhs * &sign;
        if let Some((s, v)) = slack {
            row[*s] = v.clone();
        }
        if let Some(a) = art {
            row[*a] = Rational::one();
            basis.push(*a);
        } else {
            basis.push(slack.as_ref().unwrap().0);
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        obj: Vec::new(),
        basis,
        kinds,
        pivots: 0,
    };

    // Phase 1: maximize -(sum of artificials).
    if t.kinds.contains(&Column::Artificial) {
        let costs: Vec<Rational> = t
            .kinds
            .iter()
            .map(|k| {
                if *k == Column::Artificial {
                    -Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        t.set_objective(&costs);
        t.optimize(&|_| true);
        let value = -t.obj[width].clone();
        if value.is_negative() {
            return (LpOutcome::Infeasible, t.pivots);
        }
        // Drive zero-level artificials out of the basis, dropping redundant rows.
        let mut r = 0;
        while r < t.rows.len() {
            if t.kinds[t.basis[r]] == Column::Artificial {
                let col = (0..width)
                    .find(|&j| t.kinds[j] != Column::Artificial && !t.rows[r][j].is_zero());
                match col {
                    Some(j) => t.pivot(r, j),
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    // Phase 2.
    let mut costs = vec![Rational::zero(); width];
    costs[..n].clone_from_slice(&lp.objective);
    t.set_objective(&costs);
    let kinds = t.kinds.clone();
    if !t.optimize(&|j| kinds[j] != Column::Artificial) {
        return (LpOutcome::Unbounded, t.pivots);
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(r).clone();
        }
    }
    let value = -t.obj[width].clone();
    (LpOutcome::Optimal { value, x }, t.pivots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational;

    fn c(coeffs: &[(usize, i64)], relation: Relation, rhs: i64) -> Constraint {
        Constraint {
            coeffs: coeffs.iter().map(|&(j, a)| (j, rational(a, 1))).collect(),
            relation,
            rhs: rational(rhs, 1),
        }
    }

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![rational(3, 1), rational(5, 1)],
            constraints: vec![
                c(&[(0, 1)], Relation::Le, 4),
                c(&[(1, 2)], Relation::Le, 12),
                c(&[(0, 3), (1, 2)], Relation::Le, 18),
            ],
        };
        assert_eq!(
            solve(&lp),
            LpOutcome::Optimal {
                value: rational(36, 1),
                x: vec![rational(2, 1), rational(6, 1)]
            }
        );
    }

    #[test]
    fn phase_one_min_cover_triangle() {
        // min x+y+z s.t. pairwise sums >= 1 -> 3/2
        let lp = LinearProgram {
            num_vars: 3,
            objective: vec![rational(-1, 1); 3],
            constraints: vec![
                c(&[(0, 1), (1, 1)], Relation::Ge, 1),
                c(&[(1, 1), (2, 1)], Relation::Ge, 1),
                c(&[(0, 1), (2, 1)], Relation::Ge, 1),
            ],
        };
        match solve(&lp) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, rational(-3, 2));
                assert!(x.iter().all(|v| *v == rational(1, 2)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_unbounded_equality() {
        let inf = LinearProgram {
            num_vars: 1,
            objective: vec![rational(1, 1)],
            constraints: vec![c(&[(0, 1)], Relation::Le, 1), c(&[(0, 1)], Relation::Ge, 2)],
        };
        assert_eq!(solve(&inf), LpOutcome::Infeasible);
        let unb = LinearProgram {
            num_vars: 2,
            objective: vec![rational(1, 1), rational(0, 1)],
            constraints: vec![c(&[(0, 1), (1, -1)], Relation::Le, 1)],
        };
        assert_eq!(solve(&unb), LpOutcome::Unbounded);
        // x + y = 2 twice (redundant), max x - y -> 2
        let eq = LinearProgram {
            num_vars: 2,
            objective: vec![rational(1, 1), rational(-1, 1)],
            constraints: vec![
                c(&[(0, 1), (1, 1)], Relation::Eq, 2),
                c(&[(0, 2), (1, 2)], Relation::Eq, 4),
                c(&[(0, -1)], Relation::Ge, -5),
            ],
        };
        match solve(&eq) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rational(2, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example cycles under the largest-coefficient rule.
        let r = |a, b| rational(a, b);
        let lp = LinearProgram {
            num_vars: 4,
            objective: vec![r(3, 4), r(-150, 1), r(1, 50), r(-6, 1)],
            constraints: vec![
                Constraint {
                    coeffs: vec![(0, r(1, 4)), (1, r(-60, 1)), (2, r(-1, 25)), (3, r(9, 1))],
                    relation: Relation::Le,
                    rhs: r(0, 1),
                },
                Constraint {
                    coeffs: vec![(0, r(1, 2)), (1, r(-90, 1)), (2, r(-1, 50)), (3, r(3, 1))],
                    relation: Relation::Le,
                    rhs: r(0, 1),
                },
                Constraint {
                    coeffs: vec![(2, r(1, 1))],
                    relation: Relation::Le,
                    rhs: r(1, 1),
                },
            ],
        };
        match solve(&lp) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(1, 20)),
            other => panic!("{other:?}"),
        }
    }
}
