//! Dense two-phase simplex: largest-coefficient pricing with a fallback to
//! Bland's rule on degenerate runs, and a two-pass ratio test.
//!
//! Problems are `maximize c^T x` subject to linear rows and `x >= 0`. Free
//! variables must be split by the caller. Ties in the ratio test go to the
//! lowest basic variable index, entering columns are the lowest index with a
//! improving reduced cost, so the method cannot cycle.

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 200_000;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    rel: Relation,
    rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
    feasibility_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    /// Phase one could not drive the artificial sum below tolerance.
    Infeasible { residual: f64 },
    Unbounded,
    /// Pivot budget exhausted.
    Stalled,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        LinearProgram { objective, rows: Vec::new(), feasibility_tol: 1e-9 }
    }

    /// Largest artificial sum, relative to the largest right-hand side, that
    /// phase one accepts as feasible.
    pub fn feasibility_tolerance(mut self, tol: f64) -> Self {
        self.feasibility_tol = tol;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.objective.len(), "row width");
        self.rows.push(Row { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective, self.feasibility_tol)
    }
}

struct Tableau {
    /// rows x (cols + 1); last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_orig: usize,
    n_cols: usize,
    first_art: usize,
    rhs_scale: f64,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.objective.len();
        let rows: Vec<Row> = lp
            .rows
            .iter()
            .map(|r| {
                if r.rhs < 0.0 {
                    let rel = match r.rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    Row { coeffs: r.coeffs.iter().map(|c| -c).collect(), rel, rhs: -r.rhs }
                } else {
                    r.clone()
                }
            })
            .collect();
        let n_slack = rows.iter().filter(|r| r.rel != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.rel != Relation::Le).count();
        let first_art = n + n_slack;
        let n_cols = first_art + n_art;
        let m = rows.len();
        let mut t = vec![vec![0.0; n_cols + 1]; m];
        let mut basis = vec![0; m];
        let (mut s, mut a) = (n, first_art);
        let mut rhs_scale: f64 = 1.0;
        for (i, r) in rows.iter().enumerate() {
            t[i][..n].copy_from_slice(&r.coeffs);
            t[i][n_cols] = r.rhs;
            rhs_scale = rhs_scale.max(r.rhs.abs());
            match r.rel {
                Relation::Le => {
                    t[i][s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    t[i][s] = -1.0;
                    s += 1;
                    t[i][a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
                Relation::Eq => {
                    t[i][a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
            }
        }
        Tableau { t, basis, n_orig: n, n_cols, first_art, rhs_scale }
    }

    fn pivot(&mut self, obj: &mut [f64], row: usize, col: usize) {
        let w = self.n_cols + 1;
        let p = self.t[row][col];
        for j in 0..w {
            self.t[row][j] /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for j in 0..w {
                    r[j] -= f * pivot_row[j];
                }
                r[col] = 0.0;
            }
        }
        let f = obj[col];
        if f != 0.0 {
            for j in 0..w {
                obj[j] -= f * pivot_row[j];
            }
            obj[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Pivots on reduced costs `obj` (entering when negative).
    /// Columns at index >= `limit` never enter.
    fn iterate(&mut self, obj: &mut [f64], limit: usize, budget: &mut usize) -> Result<(), LpOutcome> {
        let mut degenerate = 0;
        loop {
            let entering = if degenerate < DEGENERATE_RUN {
                // Most negative reduced cost, lowest index on ties.
                (0..limit).filter(|&j| obj[j] < -COST_EPS).fold(None, |best: Option<usize>, j| match best {
                    Some(b) if obj[b] <= obj[j] => Some(b),
                    _ => Some(j),
                })
            } else {
                (0..limit).find(|&j| obj[j] < -COST_EPS)
            };
            let Some(col) = entering else { return Ok(()) };
            let rhs = self.n_cols;
            // Two-pass ratio test: bound the step with slightly relaxed
            // right-hand sides, then take the largest pivot within that bound.
            let mut bound = f64::INFINITY;
            for r in &self.t {
                let a = r[col];
                if a > PIVOT_EPS {
                    bound = bound.min((r[rhs].max(0.0) + FEAS_EPS) / a);
                }
            }
            if bound == f64::INFINITY {
                return Err(LpOutcome::Unbounded);
            }
            let mut best: Option<(usize, f64)> = None;
            for (i, r) in self.t.iter().enumerate() {
                let a = r[col];
                if a > PIVOT_EPS && r[rhs].max(0.0) / a <= bound {
                    best = match best {
                        Some((bi, ba)) if ba > a || (ba == a && self.basis[bi] < self.basis[i]) => Some((bi, ba)),
                        _ => Some((i, a)),
                    };
                }
            }
            let Some((row, _)) = best else { return Err(LpOutcome::Unbounded) };
            if *budget == 0 {
                return Err(LpOutcome::Stalled);
            }
            *budget -= 1;
            if self.t[row][self.n_cols] / self.t[row][col] > FEAS_EPS {
                degenerate = 0;
            } else {
                degenerate += 1;
            }
            self.pivot(obj, row, col);
        }
    }

    fn run(mut self, objective: &[f64], feasibility_tol: f64) -> LpOutcome {
        let w = self.n_cols + 1;
        let mut budget = MAX_PIVOTS;
        // Phase one: maximize -sum(artificials).
        let mut obj = vec![0.0; w];
        for (i, &b) in self.basis.iter().enumerate() {
            if b >= self.first_art {
                for j in 0..w {
                    obj[j] -= self.t[i][j];
                }
            }
        }
        for j in self.first_art..self.n_cols {
            obj[j] = 0.0;
        }
        if let Err(e) = self.iterate(&mut obj, self.n_cols, &mut budget) {
            return match e {
                LpOutcome::Unbounded => LpOutcome::Stalled,
                other => other,
            };
        }
        let residual = -obj[self.n_cols];
        if residual.abs() > feasibility_tol * self.rhs_scale {
            return LpOutcome::Infeasible { residual: residual.abs() };
        }
        // Drive remaining artificials out of the basis.
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] >= self.first_art {
                let col = (0..self.first_art).find(|&j| self.t[i][j].abs() > 1e-9);
                match col {
                    Some(j) => {
                        let mut dummy = vec![0.0; w];
                        self.pivot(&mut dummy, i, j);
                        i += 1;
                    }
                    None => {
                        self.t.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        // Phase two.
        let mut obj = vec![0.0; w];
        for j in 0..self.n_orig {
            obj[j] = -objective[j];
        }
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = if b < self.n_orig { objective[b] } else { 0.0 };
            if cb != 0.0 {
                for j in 0..w {
                    obj[j] += cb * self.t[i][j];
                }
            }
        }
        for &b in &self.basis {
            obj[b] = 0.0;
        }
        if let Err(e) = self.iterate(&mut obj, self.first_art, &mut budget) {
            return e;
        }
        let mut x = vec![0.0; self.n_orig];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_orig {
                x[b] = self.t[i][self.n_cols].max(0.0);
            }
        }
        let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.constrain(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.constrain(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.constrain(vec![3.0, 2.0], Relation::Le, 18.0);
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert!((value - 36.0).abs() < 1e-9);
                assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn equalities_and_infeasibility() {
        let mut lp = LinearProgram::maximize(vec![0.0, 0.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.constrain(vec![1.0, -1.0], Relation::Eq, 0.0);
        assert!(matches!(lp.solve(), LpOutcome::Optimal { .. }));
        lp.constrain(vec![1.0, 0.0], Relation::Ge, 0.75);
        assert!(matches!(lp.solve(), LpOutcome::Infeasible { .. }));
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.constrain(vec![-1.0, 1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 2.0);
        lp.constrain(vec![2.0, 2.0], Relation::Eq, 4.0);
        lp.constrain(vec![1.0, 0.0], Relation::Le, 1.5);
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert!((value - 2.0).abs() < 1e-9),
            o => panic!("{o:?}"),
        }
    }
}
