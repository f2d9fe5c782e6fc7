//! Exact presolve. Every reduction keeps the projection of the feasible set
//! onto the surviving variables (and the objective optimum) unchanged, and
//! records enough to rebuild eliminated variables afterwards.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::{Signed, Zero};

use super::{Lp, Rational as Q, Row};

#[derive(Clone, Debug)]
struct PRow {
    c: BTreeMap<usize, Q>,
    lo: Option<Q>,
    hi: Option<Q>,
}

impl PRow {
    fn is_eq(&self) -> bool {
        matches!((&self.lo, &self.hi), (Some(l), Some(h)) if l == h)
    }

    fn eval_rest(&self, skip: usize, x: &[Q]) -> Q {
        self.c
            .iter()
            .filter(|(j, _)| **j != skip)
            .fold(Q::zero(), |acc, (j, a)| acc + a * &x[*j])
    }
}

#[derive(Debug)]
enum Elim {
    Fixed(usize, Q),
    /// a * x_var + sum rest = rhs
    Subst {
        var: usize,
        a: Q,
        rest: Vec<(usize, Q)>,
        rhs: Q,
    },
    /// x_var takes the largest lower bound implied by its rows
    Fm {
        var: usize,
        rows: Vec<PRow>,
        lo: Q,
    },
}

pub(super) struct Reduced {
    n: usize,
    pub core_vars: Vec<usize>,
    pub core_lower: Vec<Q>,
    pub core_upper: Vec<Q>,
    pub core_rows: Vec<Row>,
    pub core_objective: Vec<Q>,
    stack: Vec<Elim>,
}

impl Reduced {
    pub fn postsolve(&self, core_x: &[Q]) -> Vec<Q> {
        let mut x = vec![Q::zero(); self.n];
        for (k, &j) in self.core_vars.iter().enumerate() {
            x[j] = core_x[k].clone();
        }
        for e in self.stack.iter().rev() {
            match e {
                Elim::Fixed(j, v) => x[*j] = v.clone(),
                Elim::Subst { var, a, rest, rhs } => {
                    let s = rest.iter().fold(Q::zero(), |acc, (j, c)| acc + c * &x[*j]);
                    x[*var] = (rhs - s) / a;
                }
                Elim::Fm { var, rows, lo, .. } => {
                    let mut best = lo.clone();
                    for r in rows {
                        let a = &r.c[var];
                        let e = r.eval_rest(*var, &x);
                        let side = if a.is_positive() { &r.lo } else { &r.hi };
                        if let Some(s) = side {
                            let b = (s - &e) / a;
                            if b > best {
                                best = b;
                            }
                        }
                    }
                    x[*var] = best;
                }
            }
        }
        x
    }
}

struct Infeasible;

type Step = Result<bool, Infeasible>;

const SUBST_COST: usize = 8;
const FM_PRODUCT: usize = 64;

struct Work {
    lo: Vec<Q>,
    hi: Vec<Q>,
    active: Vec<bool>,
    rows: Vec<Option<PRow>>,
    cols: Vec<BTreeSet<usize>>,
    obj: BTreeMap<usize, Q>,
    stack: Vec<Elim>,
    tighten_budget: usize,
}

impl Work {
    fn add_row(&mut self, r: PRow) -> usize {
        let id = self.rows.len();
        for j in r.c.keys() {
            self.cols[*j].insert(id);
        }
        self.rows.push(Some(r));
        id
    }

    fn remove_row(&mut self, id: usize) -> PRow {
        let r = self.rows[id].take().expect("live row");
        for j in r.c.keys() {
            self.cols[*j].remove(&id);
        }
        r
    }

    fn activity(&self, r: &PRow) -> (Q, Q) {
        let mut mn = Q::zero();
        let mut mx = Q::zero();
        for (j, a) in &r.c {
            if a.is_positive() {
                mn += a * &self.lo[*j];
                mx += a * &self.hi[*j];
            } else {
                mn += a * &self.hi[*j];
                mx += a * &self.lo[*j];
            }
        }
        (mn, mx)
    }

    fn fix_var(&mut self, j: usize, v: Q) {
        let ids: Vec<usize> = self.cols[j].iter().copied().collect();
        for id in ids {
            let r = self.rows[id].as_mut().expect("live row");
            let a = r.c.remove(&j).expect("column entry");
            let d = &a * &v;
            if let Some(l) = r.lo.as_mut() {
                *l -= &d;
            }
            if let Some(h) = r.hi.as_mut() {
                *h -= &d;
            }
        }
        self.cols[j].clear();
        self.obj.remove(&j);
        self.lo[j] = v.clone();
        self.hi[j] = v.clone();
        self.active[j] = false;
        self.stack.push(Elim::Fixed(j, v));
    }

    fn tighten(&mut self, j: usize, lo: Option<Q>, hi: Option<Q>) -> Step {
        let mut changed = false;
        if let Some(l) = lo {
            if l > self.lo[j] {
                self.lo[j] = l;
                changed = true;
            }
        }
        if let Some(h) = hi {
            if h < self.hi[j] {
                self.hi[j] = h;
                changed = true;
            }
        }
        if self.lo[j] > self.hi[j] {
            return Err(Infeasible);
        }
        Ok(changed)
    }

    /// Fixings, empty and singleton rows, activity-based redundancy,
    /// forcing rows and bound propagation.
    fn simple_pass(&mut self) -> Step {
        let mut changed = false;
        for j in 0..self.lo.len() {
            if !self.active[j] {
                continue;
            }
            if self.lo[j] == self.hi[j] {
                let v = self.lo[j].clone();
                self.fix_var(j, v);
                changed = true;
            } else if self.cols[j].is_empty() {
                let v = match self.obj.get(&j) {
                    Some(c) if c.is_positive() => self.hi[j].clone(),
                    _ => self.lo[j].clone(),
                };
                self.fix_var(j, v);
                changed = true;
            }
        }
        for id in 0..self.rows.len() {
            let Some(r) = self.rows[id].as_ref() else {
                continue;
            };
            if r.c.is_empty() {
                let ok = r.lo.as_ref().is_none_or(|l| !l.is_positive())
                    && r.hi.as_ref().is_none_or(|h| !h.is_negative());
                if !ok {
                    return Err(Infeasible);
                }
                self.remove_row(id);
                changed = true;
                continue;
            }
            if r.c.len() == 1 {
                let (j, a) = r.c.iter().next().map(|(j, a)| (*j, a.clone())).unwrap();
                let lo = r.lo.as_ref().map(|l| l / &a);
                let hi = r.hi.as_ref().map(|h| h / &a);
                let (lo, hi) = if a.is_positive() { (lo, hi) } else { (hi, lo) };
                self.remove_row(id);
                self.tighten(j, lo, hi)?;
                changed = true;
                continue;
            }
            let (mn, mx) = self.activity(r);
            let r = self.rows[id].as_mut().unwrap();
            if let Some(l) = &r.lo {
                if &mx < l {
                    return Err(Infeasible);
                }
                if &mn >= l {
                    r.lo = None;
                    changed = true;
                }
            }
            if let Some(h) = &r.hi {
                if &mn > h {
                    return Err(Infeasible);
                }
                if &mx <= h {
                    r.hi = None;
                    changed = true;
                }
            }
            if r.lo.is_none() && r.hi.is_none() {
                self.remove_row(id);
                changed = true;
                continue;
            }
            let force_max = r.lo.as_ref() == Some(&mx);
            let force_min = r.hi.as_ref() == Some(&mn);
            if force_max || force_min {
                let row = self.remove_row(id);
                for (j, a) in &row.c {
                    let at_hi = a.is_positive() == force_max;
                    let v = if at_hi { self.hi[*j].clone() } else { self.lo[*j].clone() };
                    self.lo[*j] = v.clone();
                    self.hi[*j] = v;
                }
                changed = true;
                continue;
            }
            if self.tighten_budget == 0 {
                continue;
            }
            let r = self.rows[id].clone().unwrap();
            for (j, a) in &r.c {
                let (lj, hj) = (self.lo[*j].clone(), self.hi[*j].clone());
                let (min_j, max_j) = if a.is_positive() {
                    (a * &lj, a * &hj)
                } else {
                    (a * &hj, a * &lj)
                };
                let mut new_lo = None;
                let mut new_hi = None;
                if let Some(h) = &r.hi {
                    let cap = (h - &mn + &min_j) / a;
                    if a.is_positive() {
                        new_hi = Some(cap);
                    } else {
                        new_lo = Some(cap);
                    }
                }
                if let Some(l) = &r.lo {
                    let cap = (l - &mx + &max_j) / a;
                    if a.is_positive() {
                        new_lo = new_lo.or(Some(cap));
                    } else {
                        new_hi = new_hi.or(Some(cap));
                    }
                }
                if self.tighten(*j, new_lo, new_hi)? {
                    changed = true;
                    self.tighten_budget = self.tighten_budget.saturating_sub(1);
                    if self.tighten_budget == 0 {
                        break;
                    }
                }
            }
        }
        Ok(changed)
    }

    /// Merge rows that are positive multiples of each other.
    fn duplicate_pass(&mut self) -> Step {
        let mut seen: HashMap<Vec<(usize, Q)>, usize> = HashMap::new();
        let mut changed = false;
        for id in 0..self.rows.len() {
            let Some(r) = self.rows[id].as_ref() else {
                continue;
            };
            let lead = r.c.values().next().unwrap().abs();
            let key: Vec<(usize, Q)> = r.c.iter().map(|(j, a)| (*j, a / &lead)).collect();
            let lo = r.lo.as_ref().map(|l| l / &lead);
            let hi = r.hi.as_ref().map(|h| h / &lead);
            match seen.get(&key) {
                None => {
                    let r = self.rows[id].as_mut().unwrap();
                    r.c = key.iter().cloned().collect();
                    r.lo = lo;
                    r.hi = hi;
                    seen.insert(key, id);
                }
                Some(&keep) => {
                    self.remove_row(id);
                    let k = self.rows[keep].as_mut().unwrap();
                    if let Some(l) = lo {
                        if k.lo.as_ref().is_none_or(|x| &l > x) {
                            k.lo = Some(l);
                        }
                    }
                    if let Some(h) = hi {
                        if k.hi.as_ref().is_none_or(|x| &h < x) {
                            k.hi = Some(h);
                        }
                    }
                    if let (Some(l), Some(h)) = (&k.lo, &k.hi) {
                        if l > h {
                            return Err(Infeasible);
                        }
                    }
                    changed = true;
                }
            }
        }
        Ok(changed)
    }

    /// Eliminate a variable through an equality row when fill-in is small.
    fn substitution_pass(&mut self) -> Step {
        let mut changed = false;
        for id in 0..self.rows.len() {
            let Some(r) = self.rows[id].as_ref() else {
                continue;
            };
            if !r.is_eq() || r.c.len() < 2 {
                continue;
            }
            let len = r.c.len();
            let pick = r
                .c
                .iter()
                .map(|(j, a)| {
                    let cost = (len - 1) * (self.cols[*j].len() - 1);
                    let unit = a.abs() == Q::from_integer(1.into());
                    (cost, !unit, *j)
                })
                .min();
            let Some((cost, _, j)) = pick else { continue };
            if cost > SUBST_COST {
                continue;
            }
            let row = self.remove_row(id);
            let a = row.c[&j].clone();
            let rhs = row.lo.clone().unwrap();
            let rest: Vec<(usize, Q)> = row
                .c
                .iter()
                .filter(|(k, _)| **k != j)
                .map(|(k, c)| (*k, c.clone()))
                .collect();
            // x_j = (rhs - rest) / a
            let others: Vec<usize> = self.cols[j].iter().copied().collect();
            for oid in others {
                let mut o = self.remove_row(oid);
                let c = o.c.remove(&j).unwrap();
                let f = &c / &a;
                for (k, ck) in &rest {
                    let e = o.c.entry(*k).or_insert_with(Q::zero);
                    *e -= &f * ck;
                    if e.is_zero() {
                        o.c.remove(k);
                    }
                }
                let shift = &f * &rhs;
                if let Some(l) = o.lo.as_mut() {
                    *l -= &shift;
                }
                if let Some(h) = o.hi.as_mut() {
                    *h -= &shift;
                }
                self.add_row(o);
            }
            if let Some(c) = self.obj.remove(&j) {
                let f = &c / &a;
                for (k, ck) in &rest {
                    let e = self.obj.entry(*k).or_insert_with(Q::zero);
                    *e -= &f * ck;
                    if e.is_zero() {
                        self.obj.remove(k);
                    }
                }
            }
            // bounds of x_j become a row on rest
            let (lj, hj) = (self.lo[j].clone(), self.hi[j].clone());
            let (blo, bhi) = if a.is_positive() {
                (&rhs - &a * &hj, &rhs - &a * &lj)
            } else {
                (&rhs - &a * &lj, &rhs - &a * &hj)
            };
            self.add_row(PRow {
                c: rest.iter().cloned().collect(),
                lo: Some(blo),
                hi: Some(bhi),
            });
            self.active[j] = false;
            self.stack.push(Elim::Subst {
                var: j,
                a,
                rest,
                rhs,
            });
            changed = true;
        }
        Ok(changed)
    }

    /// Fourier-Motzkin elimination of variables outside the objective, taken
    /// only when it does not increase the row count.
    fn fm_pass(&mut self) -> Step {
        let mut changed = false;
        for j in 0..self.lo.len() {
            if !self.active[j] || self.obj.contains_key(&j) || self.cols[j].is_empty() {
                continue;
            }
            let ids: Vec<usize> = self.cols[j].iter().copied().collect();
            if ids.len() > 16 || ids.iter().any(|id| self.rows[*id].as_ref().unwrap().is_eq()) {
                continue;
            }
            // candidates: (const, coeffs, source row)
            let mut lower: Vec<(Q, BTreeMap<usize, Q>, Option<usize>)> =
                vec![(self.lo[j].clone(), BTreeMap::new(), None)];
            let mut upper = vec![(self.hi[j].clone(), BTreeMap::new(), None)];
            for &id in &ids {
                let r = self.rows[id].as_ref().unwrap();
                let a = &r.c[&j];
                let coeffs: BTreeMap<usize, Q> = r
                    .c
                    .iter()
                    .filter(|(k, _)| **k != j)
                    .map(|(k, c)| (*k, -(c / a)))
                    .collect();
                for (side, is_lo) in [(&r.lo, true), (&r.hi, false)] {
                    if let Some(s) = side {
                        let cand = (s / a, coeffs.clone(), Some(id));
                        if is_lo == a.is_positive() {
                            lower.push(cand);
                        } else {
                            upper.push(cand);
                        }
                    }
                }
            }
            if lower.len() * upper.len() > FM_PRODUCT {
                continue;
            }
            let mut fresh = Vec::new();
            for l in &lower {
                for u in &upper {
                    if l.2 == u.2 {
                        continue;
                    }
                    let mut c = l.1.clone();
                    for (k, v) in &u.1 {
                        let e = c.entry(*k).or_insert_with(Q::zero);
                        *e -= v;
                        if e.is_zero() {
                            c.remove(k);
                        }
                    }
                    let rhs = &u.0 - &l.0;
                    if c.is_empty() {
                        if rhs.is_negative() {
                            return Err(Infeasible);
                        }
                        continue;
                    }
                    let row = PRow {
                        c,
                        lo: None,
                        hi: Some(rhs),
                    };
                    let (_, mx) = self.activity(&row);
                    if &mx > row.hi.as_ref().unwrap() {
                        fresh.push(row);
                    }
                }
            }
            if fresh.len() > ids.len() {
                continue;
            }
            let old: Vec<PRow> = ids.iter().map(|id| self.remove_row(*id)).collect();
            for r in fresh {
                self.add_row(r);
            }
            self.active[j] = false;
            self.stack.push(Elim::Fm {
                var: j,
                rows: old,
                lo: self.lo[j].clone(),
            });
            changed = true;
        }
        Ok(changed)
    }
}

pub(super) fn presolve(lp: &Lp, objective: &[(usize, Q)]) -> Option<Reduced> {
    let n = lp.num_vars();
    let mut w = Work {
        lo: lp.lower.clone(),
        hi: lp.upper.clone(),
        active: vec![true; n],
        rows: vec![],
        cols: vec![BTreeSet::new(); n],
        obj: BTreeMap::new(),
        stack: vec![],
        tighten_budget: 4 * n + 64,
    };
    for (j, a) in objective {
        let e = w.obj.entry(*j).or_insert_with(Q::zero);
        *e += a;
        if e.is_zero() {
            w.obj.remove(j);
        }
    }
    for r in &lp.rows {
        let mut c = BTreeMap::new();
        for (j, a) in &r.coeffs {
            let e = c.entry(*j).or_insert_with(Q::zero);
            *e += a;
        }
        c.retain(|_, a: &mut Q| !a.is_zero());
        w.add_row(PRow {
            c,
            lo: r.lo.clone(),
            hi: r.hi.clone(),
        });
    }
    let run = |w: &mut Work| -> Result<(), Infeasible> {
        loop {
            if w.simple_pass()? {
                continue;
            }
            if w.duplicate_pass()? {
                continue;
            }
            if w.substitution_pass()? {
                continue;
            }
            if w.fm_pass()? {
                continue;
            }
            return Ok(());
        }
    };
    run(&mut w).ok()?;

    let core_vars: Vec<usize> = (0..n).filter(|j| w.active[*j]).collect();
    let mut pos = vec![usize::MAX; n];
    for (k, j) in core_vars.iter().enumerate() {
        pos[*j] = k;
    }
    let core_rows = w
        .rows
        .iter()
        .flatten()
        .map(|r| Row {
            coeffs: r.c.iter().map(|(j, a)| (pos[*j], a.clone())).collect(),
            lo: r.lo.clone(),
            hi: r.hi.clone(),
        })
        .collect();
    let mut core_objective = vec![Q::zero(); core_vars.len()];
    for (j, a) in &w.obj {
        core_objective[pos[*j]] = a.clone();
    }
    Some(Reduced {
        n,
        core_lower: core_vars.iter().map(|j| w.lo[*j].clone()).collect(),
        core_upper: core_vars.iter().map(|j| w.hi[*j].clone()).collect(),
        core_vars,
        core_rows,
        core_objective,
        stack: w.stack,
    })
}
