//! Dense two-phase tableau simplex over the rationals, Bland's rule.

use num::{One, Signed, Zero};

use super::{Rational as Q, Row};

pub(super) enum Result {
    Optimal(Vec<Q>),
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Le,
    Ge,
    Eq,
}

struct Tableau {
    t: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        if !p.is_one() {
            for v in self.t[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
            self.rhs[r] /= &p;
        }
        let nz: Vec<usize> = (0..self.cols).filter(|k| !self.t[r][*k].is_zero()).collect();
        let prow: Vec<Q> = nz.iter().map(|k| self.t[r][*k].clone()).collect();
        let prhs = self.rhs[r].clone();
        for i in 0..self.t.len() {
            if i == r || self.t[i][c].is_zero() {
                continue;
            }
            let f = self.t[i][c].clone();
            for (k, v) in nz.iter().zip(&prow) {
                let e = &mut self.t[i][*k];
                *e -= &f * v;
            }
            self.rhs[i] -= &f * &prhs;
        }
        self.basis[r] = c;
    }

    /// Maximize `cost` over columns allowed by `enter_ok`; false if unbounded.
    fn optimize(&mut self, cost: &[Q], enter_ok: &dyn Fn(usize) -> bool) -> bool {
        loop {
            // reduced costs d_j = c_j - sum_i c_B(i) t_ij
            let mut basic = vec![false; self.cols];
            for &b in &self.basis {
                basic[b] = true;
            }
            let mut entering = None;
            for j in 0..self.cols {
                if !enter_ok(j) || basic[j] {
                    continue;
                }
                let mut d = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() && !self.t[i][j].is_zero() {
                        d -= &cost[b] * &self.t[i][j];
                    }
                }
                if d.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

type Constraint = (Vec<(usize, Q)>, Kind, Q);

/// Maximize `objective` subject to `rows` and `lower <= x <= upper`.
pub(super) fn solve(lower: &[Q], upper: &[Q], rows: &[Row], objective: &[Q]) -> Result {
    let n = lower.len();
    // shift x = y + lower, y in [0, upper - lower]
    let mut cons: Vec<Constraint> = Vec::new();
    for r in rows {
        let shift = r
            .coeffs
            .iter()
            .fold(Q::zero(), |acc, (j, a)| acc + a * &lower[*j]);
        match (&r.lo, &r.hi) {
            (Some(l), Some(h)) if l == h => cons.push((r.coeffs.clone(), Kind::Eq, h - &shift)),
            (lo, hi) => {
                if let Some(h) = hi {
                    cons.push((r.coeffs.clone(), Kind::Le, h - &shift));
                }
                if let Some(l) = lo {
                    cons.push((r.coeffs.clone(), Kind::Ge, l - &shift));
                }
            }
        }
    }
    for j in 0..n {
        cons.push((vec![(j, Q::one())], Kind::Le, &upper[j] - &lower[j]));
    }
    let m = cons.len();
    let slacks: Vec<Option<usize>> = {
        let mut next = n;
        cons.iter()
            .map(|c| {
                if c.1 == Kind::Eq {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    };
    let n_slack = slacks.iter().flatten().count();
    let art0 = n + n_slack;
    let mut arts = 0;
    let mut t = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_rows = Vec::new();
    for (i, (coeffs, kind, b)) in cons.iter().enumerate() {
        let neg = b.is_negative();
        let sign = if neg { -Q::one() } else { Q::one() };
        let mut row = vec![Q::zero(); art0];
        for (j, a) in coeffs {
            row[*j] += a * &sign;
        }
        let mut slack_sign = Q::zero();
        if let Some(s) = slacks[i] {
            slack_sign = if *kind == Kind::Le { sign.clone() } else { -sign.clone() };
            row[s] = slack_sign.clone();
        }
        rhs.push(b * &sign);
        if slack_sign.is_one() {
            basis.push(slacks[i].unwrap());
        } else {
            basis.push(usize::MAX);
            art_rows.push(i);
            arts += 1;
        }
        t.push(row);
    }
    let cols = art0 + arts;
    for row in t.iter_mut() {
        row.resize(cols, Q::zero());
    }
    for (k, &i) in art_rows.iter().enumerate() {
        t[i][art0 + k] = Q::one();
        basis[i] = art0 + k;
    }
    let mut tab = Tableau { t, rhs, basis, cols };

    if arts > 0 {
        let mut cost = vec![Q::zero(); cols];
        for c in cost.iter_mut().skip(art0) {
            *c = -Q::one();
        }
        tab.optimize(&cost, &|_| true);
        let infeas = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .any(|(b, v)| *b >= art0 && !v.is_zero());
        if infeas {
            return Result::Infeasible;
        }
        // drive zero-level artificials out of the basis
        let mut i = 0;
        while i < tab.t.len() {
            if tab.basis[i] >= art0 {
                match (0..art0).find(|j| !tab.t[i][*j].is_zero()) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.t.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }
    let mut cost = vec![Q::zero(); cols];
    cost[..n].clone_from_slice(objective);
    if !tab.optimize(&cost, &|j| j < art0) {
        return Result::Unbounded;
    }
    let mut x: Vec<Q> = lower.to_vec();
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = &lower[b] + &tab.rhs[i];
        }
    }
    Result::Optimal(x)
}
