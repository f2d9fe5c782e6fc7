//! Exact rational linear programming over bounded variables.
//!
//! Problems are reduced by an exact presolve (fixings, bound propagation,
//! equality substitution, Fourier-Motzkin elimination of small columns) and the
//! remaining core is solved by a dense two-phase tableau simplex with Bland's
//! rule. Every witness is checked against the original problem before it is
//! returned.

mod presolve;
mod simplex;

use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parse "3/4", "-2", "0.125" or "1e-3" exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, dec) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && dec.is_empty() {
        return None;
    }
    if !int.chars().chain(dec.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{dec}").parse().ok()?;
    let shift = exp - dec.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(digits);
    if shift >= 0 {
        r *= Rational::from_integer(num::pow(ten, shift as usize));
    } else {
        r /= Rational::from_integer(num::pow(ten, (-shift) as usize));
    }
    Some(if neg { -r } else { r })
}

pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// `lo <= sum coeffs * x <= hi`, either side optional.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, Rational)>,
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

impl Row {
    pub fn eq(coeffs: Vec<(usize, Rational)>, rhs: Rational) -> Row {
        Row {
            coeffs,
            lo: Some(rhs.clone()),
            hi: Some(rhs),
        }
    }

    pub fn le(coeffs: Vec<(usize, Rational)>, rhs: Rational) -> Row {
        Row {
            coeffs,
            lo: None,
            hi: Some(rhs),
        }
    }

    pub fn value(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j])
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let v = self.value(x);
        self.lo.as_ref().is_none_or(|l| &v >= l) && self.hi.as_ref().is_none_or(|h| &v <= h)
    }
}

/// Linear program with finitely bounded variables.
#[derive(Clone, Debug, Default)]
pub struct Lp {
    pub lower: Vec<Rational>,
    pub upper: Vec<Rational>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Feasible,
    Infeasible,
    Optimal,
    Unbounded,
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LpStatus::Feasible => "feasible",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Optimal => "optimal",
            LpStatus::Unbounded => "unbounded",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub optimum: Option<Rational>,
    pub witness: Option<Vec<Rational>>,
}

impl LpOutcome {
    pub fn infeasible() -> LpOutcome {
        LpOutcome {
            status: LpStatus::Infeasible,
            optimum: None,
            witness: None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.status, LpStatus::Feasible | LpStatus::Optimal)
    }
}

/// Size of the problem handed to the simplex after presolve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CoreSize {
    pub vars: usize,
    pub rows: usize,
}

impl Lp {
    pub fn new(n: usize, lower: Rational, upper: Rational) -> Lp {
        Lp {
            lower: vec![lower; n],
            upper: vec![upper; n],
            rows: vec![],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn fix(&mut self, j: usize, v: Rational) {
        self.lower[j] = v.clone();
        self.upper[j] = v;
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    /// Exact membership test.
    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| v >= l && v <= u)
            && self.rows.iter().all(|r| r.holds(x))
    }

    /// Feasibility with a witness.
    pub fn feasible(&self) -> LpOutcome {
        self.run(&[]).0
    }

    /// Maximize `objective` (sparse coefficients).
    pub fn maximize(&self, objective: &[(usize, Rational)]) -> LpOutcome {
        let mut out = self.run(objective).0;
        if out.status == LpStatus::Feasible {
            out.status = LpStatus::Optimal;
        }
        if out.status == LpStatus::Optimal && out.optimum.is_none() {
            out.optimum = Some(Rational::zero());
        }
        out
    }

    pub fn minimize(&self, objective: &[(usize, Rational)]) -> LpOutcome {
        let neg: Vec<(usize, Rational)> = objective.iter().map(|(j, a)| (*j, -a)).collect();
        let mut out = self.maximize(&neg);
        out.optimum = out.optimum.map(|v| -v);
        out
    }

    /// Solve and also report the presolved core size.
    pub fn run(&self, objective: &[(usize, Rational)]) -> (LpOutcome, CoreSize) {
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if l > u {
                return (LpOutcome::infeasible(), CoreSize::default());
            }
        }
        let reduced = match presolve::presolve(self, objective) {
            None => return (LpOutcome::infeasible(), CoreSize::default()),
            Some(r) => r,
        };
        let size = CoreSize {
            vars: reduced.core_vars.len(),
            rows: reduced.core_rows.len(),
        };
        let core = simplex::solve(
            &reduced.core_lower,
            &reduced.core_upper,
            &reduced.core_rows,
            &reduced.core_objective,
        );
        let core_x = match core {
            simplex::Result::Infeasible => return (LpOutcome::infeasible(), size),
            simplex::Result::Unbounded => {
                return (
                    LpOutcome {
                        status: LpStatus::Unbounded,
                        optimum: None,
                        witness: None,
                    },
                    size,
                )
            }
            simplex::Result::Optimal(x) => x,
        };
        let x = reduced.postsolve(&core_x);
        assert!(
            self.contains(&x),
            "postsolved witness violates the original constraints"
        );
        let optimum = if objective.is_empty() {
            None
        } else {
            Some(
                objective
                    .iter()
                    .fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j]),
            )
        };
        let status = if objective.is_empty() {
            LpStatus::Feasible
        } else {
            LpStatus::Optimal
        };
        (
            LpOutcome {
                status,
                optimum,
                witness: Some(x),
            },
            size,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(c: &[(usize, i64)]) -> Vec<(usize, Rational)> {
        c.iter().map(|(j, a)| (*j, q(*a))).collect()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_rational("3/4"), Some(frac(3, 4)));
        assert_eq!(parse_rational("0.125"), Some(frac(1, 8)));
        assert_eq!(parse_rational("-2"), Some(q(-2)));
        assert_eq!(parse_rational("1e-3"), Some(frac(1, 1000)));
        assert_eq!(parse_rational(".5"), Some(frac(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(fmt_rational(&frac(-6, 8)), "-3/4");
        assert_eq!(fmt_rational(&q(5)), "5");
    }

    #[test]
    fn triple_with_pin() {
        let mut lp = Lp::new(3, q(0), q(1));
        lp.push(Row::eq(row(&[(0, 1), (1, 1), (2, 1)]), q(1)));
        lp.fix(2, q(1));
        let out = lp.feasible();
        assert_eq!(out.status, LpStatus::Feasible);
        assert_eq!(out.witness.unwrap(), vec![q(0), q(0), q(1)]);
        let out = lp.maximize(&row(&[(0, 1)]));
        assert_eq!(out.optimum, Some(q(0)));
    }

    #[test]
    fn textbook_optimum() {
        // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
        let mut lp = Lp::new(2, q(0), q(10));
        lp.push(Row::le(row(&[(0, 1), (1, 1)]), q(4)));
        lp.push(Row::le(row(&[(0, 1), (1, 3)]), q(6)));
        lp.push(Row::le(row(&[(0, 1)]), q(3)));
        let out = lp.maximize(&row(&[(0, 3), (1, 2)]));
        assert_eq!(out.optimum, Some(q(11)));
        let out = lp.minimize(&row(&[(0, 1), (1, -1)]));
        assert_eq!(out.optimum, Some(q(-2)));
    }

    #[test]
    fn infeasible_system() {
        let mut lp = Lp::new(2, q(0), q(1));
        lp.push(Row::eq(row(&[(0, 1), (1, 1)]), q(1)));
        lp.push(Row {
            coeffs: row(&[(0, 2), (1, 3)]),
            lo: Some(q(4)),
            hi: None,
        });
        assert_eq!(lp.feasible().status, LpStatus::Infeasible);
    }

    #[test]
    fn fractional_vertex() {
        // max x + y with 2x + y <= 1, x + 2y <= 1: optimum 2/3
        let mut lp = Lp::new(2, q(0), q(1));
        lp.push(Row::le(row(&[(0, 2), (1, 1)]), q(1)));
        lp.push(Row::le(row(&[(0, 1), (1, 2)]), q(1)));
        let out = lp.maximize(&row(&[(0, 1), (1, 1)]));
        assert_eq!(out.optimum, Some(frac(2, 3)));
    }
}
