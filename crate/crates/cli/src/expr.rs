//! Pins (`name=value`) and linear objectives (`b - a`, `2*x + 1/2*y`) over
//! ray names. A name is either a report name or `#index`.

use ksforge::lp::{parse_rational, Rational};
use ksforge::GadgetReport;
use ksforge::OrthoGraph;

use crate::CliError;

pub fn resolve(g: &OrthoGraph, rep: Option<&GadgetReport>, name: &str) -> Result<usize, CliError> {
    let name = name.trim();
    if let Some(i) = name.strip_prefix('#') {
        let i: usize = i
            .parse()
            .map_err(|_| CliError::Input(format!("bad ray index '{name}'")))?;
        if i >= g.len() {
            return Err(CliError::Input(format!("ray index {i} out of range")));
        }
        return Ok(i);
    }
    rep.and_then(|r| r.index_of(name))
        .ok_or_else(|| CliError::Input(format!("unknown ray name '{name}'")))
}

pub fn parse_pin(
    g: &OrthoGraph,
    rep: Option<&GadgetReport>,
    s: &str,
) -> Result<(usize, Rational), CliError> {
    let (name, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Input(format!("pin '{s}' is not of the form name=value")))?;
    let v = parse_rational(v).ok_or_else(|| CliError::Input(format!("bad pin value in '{s}'")))?;
    Ok((resolve(g, rep, name)?, v))
}

/// Signed terms; coefficients are integers, decimals or fractions.
pub fn parse_objective(
    g: &OrthoGraph,
    rep: Option<&GadgetReport>,
    s: &str,
) -> Result<Vec<(usize, Rational)>, CliError> {
    let bad = || CliError::Input(format!("cannot parse objective '{s}'"));
    let mut terms = Vec::new();
    let mut cur = String::new();
    let mut sign = 1;
    let mut flush = |cur: &mut String, sign: i32| -> Result<(), CliError> {
        let t = cur.trim();
        if t.is_empty() {
            return Err(bad());
        }
        let (c, name) = match t.split_once('*') {
            Some((c, n)) => (parse_rational(c).ok_or_else(bad)?, n),
            None => (Rational::from_integer(1.into()), t),
        };
        let c = if sign < 0 { -c } else { c };
        terms.push((resolve(g, rep, name)?, c));
        cur.clear();
        Ok(())
    };
    for ch in s.chars() {
        match ch {
            '+' | '-' if cur.trim().is_empty() => {
                if ch == '-' {
                    sign = -sign;
                }
            }
            '+' | '-' => {
                flush(&mut cur, sign)?;
                sign = if ch == '-' { -1 } else { 1 };
            }
            _ => cur.push(ch),
        }
    }
    flush(&mut cur, sign)?;
    // merge repeated rays
    terms.sort_by_key(|(i, _)| *i);
    let mut out: Vec<(usize, Rational)> = Vec::new();
    for (i, c) in terms {
        match out.last_mut() {
            Some((j, d)) if *j == i => *d += c,
            _ => out.push((i, c)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ksforge::lp::{frac, q};
    use ksforge::Forge;

    #[test]
    fn objectives() {
        let g = Forge::default().frame_basis();
        let rep = g.report();
        let (a, b) = (g.named("e1").unwrap(), g.named("b12").unwrap());
        let o = parse_objective(&g, rep, "b12-e1").unwrap();
        let mut want = vec![(a, q(-1)), (b, q(1))];
        want.sort_by_key(|t| t.0);
        assert_eq!(o, want);
        let o = parse_objective(&g, rep, "-1/2*e1 + e1").unwrap();
        assert_eq!(o, vec![(a, frac(1, 2))]);
        assert_eq!(parse_objective(&g, rep, "#0").unwrap(), vec![(0, q(1))]);
        assert!(parse_objective(&g, rep, "e1 +").is_err());
        assert!(parse_objective(&g, rep, "nope").is_err());
        assert_eq!(parse_pin(&g, rep, "b12=0").unwrap(), (b, q(0)));
        assert!(parse_pin(&g, rep, "b12").is_err());
    }
}
