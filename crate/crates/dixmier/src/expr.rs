//! Inline elements: `a + a^-1`, `2*b - 0.5i*#3`, `i*x`. Terms are scalar
//! multiples of `λ(g)`; `g` is a word, label, index or `#i`.

use dixmier_core::algebra::AlgebraElement;
use dixmier_core::crossed::CrossedElement;
use dixmier_core::linalg::C64;

use crate::description::{resolve, Built, ElementRef};
use crate::error::{Error, Result};

fn coefficient(s: &str) -> Option<C64> {
    let s = s.trim();
    match s {
        "i" => return Some(C64::new(0.0, 1.0)),
        "-i" => return Some(C64::new(0.0, -1.0)),
        _ => {}
    }
    if let Some(im) = s.strip_suffix('i') {
        return im.trim().parse::<f64>().ok().map(|v| C64::new(0.0, v));
    }
    s.parse::<f64>().ok().map(|v| C64::new(v, 0.0))
}

/// Splits at top-level `+`/`-`, keeping the sign with each term. A `-`
/// directly after `^` belongs to an exponent.
fn split_terms(s: &str) -> Vec<(f64, String)> {
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut cur = String::new();
    let mut prev = ' ';
    for ch in s.chars() {
        if (ch == '+' || ch == '-')
            && prev != '^'
            && !cur.trim().is_empty()
            && !cur.trim_end().ends_with('*')
        {
            out.push((sign, cur.trim().to_owned()));
            cur.clear();
            sign = if ch == '-' { -1.0 } else { 1.0 };
        } else if (ch == '+' || ch == '-') && cur.trim().is_empty() {
            if ch == '-' {
                sign = -sign;
            }
        } else {
            cur.push(ch);
        }
        if !ch.is_whitespace() {
            prev = ch;
        }
    }
    if !cur.trim().is_empty() {
        out.push((sign, cur.trim().to_owned()));
    }
    out
}

pub fn parse_expression(built: &Built, s: &str) -> Result<CrossedElement> {
    let sys = &built.system;
    let mut acc = CrossedElement::zero(sys);
    let terms = split_terms(s);
    if terms.is_empty() {
        return Err(Error::Usage(format!("empty element expression {s:?}")));
    }
    for (sign, t) in terms {
        let (coef, atom) = match t.split_once('*') {
            Some((c, a)) => (
                coefficient(c)
                    .ok_or_else(|| Error::Usage(format!("bad coefficient {c:?} in {s:?}")))?,
                a.trim(),
            ),
            None => (C64::new(1.0, 0.0), t.as_str()),
        };
        let coef = coef * sign;
        let x = if let Some(named) = built.elements.get(atom) {
            named.scale(coef)
        } else {
            let r = match atom.parse::<usize>() {
                Ok(i) if sys.group().as_finite().is_some() => ElementRef::Index(i),
                _ => ElementRef::Name(atom.to_owned()),
            };
            let g = resolve(sys.group(), &r).map_err(Error::Usage)?;
            CrossedElement::from_terms(sys, [(g, AlgebraElement::scalar(sys.algebra(), coef))])?
        };
        acc = acc.add(&x)?;
    }
    Ok(acc)
}

/// A named element of the description, or an inline expression.
pub fn element(built: &Built, s: &str) -> Result<CrossedElement> {
    match built.elements.get(s.trim()) {
        Some(x) => Ok(x.clone()),
        None => parse_expression(built, s),
    }
}
