//! Text report for the closure of a set of generators.

use std::fmt::Write as _;

use wnd_core::algebra::{close_algebra, parse_polynomial, structure_constants, AlgebraError, LadderPolynomial, LieBasis};

pub const MAX_CLOSURE_DIM: usize = 64;

/// Parses the generators, embedding them all into the largest mode count used.
pub fn parse_generators(texts: &[String]) -> Result<Vec<LadderPolynomial>, AlgebraError> {
    let parsed = texts.iter().map(|t| parse_polynomial(t)).collect::<Result<Vec<_>, _>>()?;
    let modes = parsed.iter().map(LadderPolynomial::modes).max().unwrap_or(1);
    Ok(parsed.into_iter().map(|p| p.embed(modes)).collect())
}

pub fn closure(texts: &[String], max_dim: usize) -> Result<LieBasis, AlgebraError> {
    close_algebra(&parse_generators(texts)?, max_dim)
}

/// One line per basis element, then the nonzero structure constants
/// `c[j][k][l] = re,im` with `[H_j, H_k] = Σ_l c[j][k][l] H_l`.
pub fn closure_report(basis: &LieBasis) -> Result<String, AlgebraError> {
    let sc = structure_constants(basis)?;
    let mut out = String::new();
    let _ = writeln!(out, "dimension {}", basis.dim());
    let _ = writeln!(out, "modes {}", basis.modes());
    for (j, e) in basis.elements().iter().enumerate() {
        let flag = if basis.is_central(j) { "central" } else { "-" };
        let _ = writeln!(out, "H[{j}] = {e} ; {flag}");
    }
    for (j, k, l, c) in sc.nonzero() {
        let _ = writeln!(out, "c[{j}][{k}][{l}] = {:.16e},{:.16e}", c.re + 0.0, c.im + 0.0);
    }
    let _ = writeln!(out, "jacobi residual {:.3e}", sc.jacobi_residual());
    Ok(out)
}
