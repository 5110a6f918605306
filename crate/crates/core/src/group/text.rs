//! Line-oriented text form of a group element.
//!
//! ```text
//! pinwheel <beta> <theta>
//! block <j> <l> <eps> <theta>
//! tail <d>
//! <d rows of d numbers>
//! ```
//!
//! Reals are written with 17 significant digits so the text round-trips.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{GammaFactor, GroupElement, PinwheelFactor, SymmetryGroup};
use crate::error::{Error, Result};

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what}")))
}

impl GroupElement {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(p) = self.pinwheel {
            writeln!(out, "pinwheel {} {}", p.beta, real(p.theta)).unwrap();
        }
        for (blk, f) in self.layout.blocks.iter().zip(&self.blocks) {
            writeln!(out, "block {} {} {} {}", blk.j, blk.ell, f.eps, real(f.theta)).unwrap();
        }
        let d = self.tail.nrows();
        writeln!(out, "tail {d}").unwrap();
        for r in 0..d {
            let row: Vec<String> = (0..d).map(|c| real(self.tail[(r, c)])).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }
}

impl SymmetryGroup {
    /// Parses the text form of an element of this group.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement> {
        let layout = self.layout();
        let mut g = self.identity();
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut block_idx = 0;
        while let Some(line) = lines.next() {
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("pinwheel") => {
                    if layout.pinwheel.is_none() {
                        return Err(Error::Parse("pinwheel given for alpha = 0".into()));
                    }
                    let beta: u32 = parse(tok.next(), "beta")?;
                    let theta: f64 = parse(tok.next(), "theta")?;
                    if beta >= 1 << (layout.alpha + 1) {
                        return Err(Error::Parse(format!("beta = {beta} is not canonical")));
                    }
                    g.pinwheel = Some(PinwheelFactor { beta, theta });
                }
                Some("block") => {
                    let blk = layout
                        .blocks
                        .get(block_idx)
                        .ok_or_else(|| Error::Parse("too many block lines".into()))?;
                    let j: usize = parse(tok.next(), "j")?;
                    let ell: usize = parse(tok.next(), "l")?;
                    if (j, ell) != (blk.j, blk.ell) {
                        return Err(Error::Parse(format!(
                            "expected block ({}, {}), found ({j}, {ell})",
                            blk.j, blk.ell
                        )));
                    }
                    let eps: u32 = parse(tok.next(), "eps")?;
                    let theta: f64 = parse(tok.next(), "theta")?;
                    if eps >= blk.eps_classes() {
                        return Err(Error::Parse(format!("eps = {eps} is not canonical for j = {j}")));
                    }
                    g.blocks[block_idx] = GammaFactor { eps, theta };
                    block_idx += 1;
                }
                Some("tail") => {
                    let d: usize = parse(tok.next(), "tail dimension")?;
                    if d != layout.tail_dim() {
                        return Err(Error::DimensionMismatch { expected: layout.tail_dim(), actual: d });
                    }
                    let mut q = DMatrix::zeros(d, d);
                    for r in 0..d {
                        let row = lines.next().ok_or_else(|| Error::Parse("missing tail row".into()))?;
                        let vals: Vec<f64> = row
                            .split_whitespace()
                            .map(|v| v.parse().map_err(|_| Error::Parse(format!("bad tail entry `{v}`"))))
                            .collect::<Result<_>>()?;
                        if vals.len() != d {
                            return Err(Error::Parse(format!("tail row {r} has {} entries", vals.len())));
                        }
                        for (c, v) in vals.into_iter().enumerate() {
                            q[(r, c)] = v;
                        }
                    }
                    let pin = g.pinwheel;
                    let blocks = g.blocks.clone();
                    g = self.tail_element(q)?;
                    g.pinwheel = pin;
                    g.blocks = blocks;
                }
                Some(other) => return Err(Error::Parse(format!("unknown record `{other}`"))),
                None => {}
            }
        }
        if block_idx != 0 && block_idx != layout.blocks.len() {
            return Err(Error::Parse(format!("expected {} block lines, found {block_idx}", layout.blocks.len())));
        }
        Ok(g)
    }
}
