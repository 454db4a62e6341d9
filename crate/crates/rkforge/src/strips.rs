//! Strip labels `(L, R, u)` and their bijection with strip-local covers.
//!
//! Walking a strip's internal cycle, a triangle whose external vertex is
//! touched contributes its two external bonds to a closed path and an
//! untouched one contributes its internal bond. Dimers occupy every second
//! edge of that path; `u` selects which half.

use crate::coverings::{left_pattern, right_pattern, u_bit, DimerCover};
use crate::error::{Result, RkError};
use crate::lattice::{Lattice, Side};
use crate::mask::Mask;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Boundary data of one strip.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StripLabel {
    pub l: Vec<bool>,
    pub r: Vec<bool>,
    pub u: bool,
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(RkError::Parse(format!("bad bit {c:?} in {s:?}"))),
        })
        .collect()
}

impl fmt::Display for StripLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L={} R={} u={}", bits(&self.l), bits(&self.r), self.u as u8)
    }
}

impl FromStr for StripLabel {
    type Err = RkError;
    fn from_str(s: &str) -> Result<Self> {
        let mut l = None;
        let mut r = None;
        let mut u = None;
        for tok in s.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| RkError::Parse(format!("bad token {tok:?}")))?;
            match k {
                "L" => l = Some(parse_bits(v)?),
                "R" => r = Some(parse_bits(v)?),
                "u" => {
                    u = Some(match v {
                        "0" => false,
                        "1" => true,
                        _ => return Err(RkError::Parse(format!("bad u {v:?}"))),
                    })
                }
                _ => return Err(RkError::Parse(format!("unknown key {k:?}"))),
            }
        }
        match (l, r, u) {
            (Some(l), Some(r), Some(u)) => Ok(StripLabel { l, r, u }),
            _ => Err(RkError::Parse(format!("incomplete strip label {s:?}"))),
        }
    }
}

impl StripLabel {
    pub fn new(l: Vec<bool>, r: Vec<bool>, u: bool) -> Self {
        StripLabel { l, r, u }
    }
    pub fn weight_l(&self) -> usize {
        self.l.iter().filter(|&&b| b).count()
    }
    pub fn weight_r(&self) -> usize {
        self.r.iter().filter(|&&b| b).count()
    }
}

/// Touch bit of each cycle triangle's external vertex under a label.
fn cycle_bits(lat: &Lattice, m: usize, label: &StripLabel) -> Vec<bool> {
    let lv = lat.left_vertices(m);
    let rv = lat.right_vertices(m);
    lat.strip_cycle(m)
        .iter()
        .map(|t| match t.side {
            Side::Left => label.l[lv.iter().position(|&v| v == t.ext).expect("left vertex")],
            Side::Right => label.r[rv.iter().position(|&v| v == t.ext).expect("right vertex")],
        })
        .collect()
}

/// Strip-local occupation of strip `m` for a label.
pub fn encode(lat: &Lattice, m: usize, label: &StripLabel) -> Result<Mask> {
    let n = lat.n();
    if label.l.len() != n || label.r.len() != n {
        return Err(RkError::LengthMismatch {
            left: label.l.len(),
            right: label.r.len(),
        });
    }
    if label.weight_l() % 2 != label.weight_r() % 2 {
        return Err(RkError::ParityMismatch {
            l: label.weight_l(),
            r: label.weight_r(),
        });
    }
    let mut path = Vec::with_capacity(4 * n);
    for (t, b) in lat.strip_cycle(m).iter().zip(cycle_bits(lat, m, label)) {
        if b {
            path.push(t.bonds[0]);
            path.push(t.bonds[1]);
        } else {
            path.push(t.bonds[2]);
        }
    }
    let start = if label.u { 0 } else { 1 };
    Ok(Mask::from_bits(
        lat.num_bonds(),
        path.into_iter().skip(start).step_by(2),
    ))
}

/// Label of strip `m` in a cover. Fails if the strip's internal vertices are
/// not each covered exactly once by strip bonds.
pub fn decode(lat: &Lattice, cover: &DimerCover, m: usize) -> Result<StripLabel> {
    let range = lat.strip_bonds(m);
    for t in lat.strip_cycle(m) {
        let c = lat.incidence()[t.upper]
            .iter()
            .filter(|&&b| range.contains(&b) && cover.mask.get(b))
            .count();
        if c != 1 {
            return Err(RkError::InvalidStrip {
                reason: format!("internal vertex {} of strip {m} touched {c} times", t.upper),
            });
        }
    }
    let label = StripLabel {
        l: left_pattern(lat, &cover.mask, m),
        r: right_pattern(lat, &cover.mask, m),
        u: u_bit(lat, &cover.mask, m),
    };
    let own = Mask::from_bits(lat.num_bonds(), range.filter(|&b| cover.mask.get(b)));
    if encode(lat, m, &label)? != own {
        return Err(RkError::InvalidStrip {
            reason: format!("strip {m} occupation is not an alternating cover"),
        });
    }
    Ok(label)
}

/// Labels of every strip.
pub fn decode_all(lat: &Lattice, cover: &DimerCover) -> Result<Vec<StripLabel>> {
    (0..lat.m()).map(|m| decode(lat, cover, m)).collect()
}

/// Neighbouring strips connect when the right edge of one is the complement
/// of the left edge of the next.
pub fn check_connection(left: &StripLabel, right: &StripLabel) -> Result<bool> {
    if left.r.len() != right.l.len() {
        return Err(RkError::LengthMismatch {
            left: left.r.len(),
            right: right.l.len(),
        });
    }
    Ok(left.r.iter().zip(&right.l).all(|(a, b)| a != b))
}

/// Cover assembled from one label per strip.
pub fn assemble(lat: &Lattice, labels: &[StripLabel]) -> Result<DimerCover> {
    if labels.len() != lat.m() {
        return Err(RkError::InvalidStrip {
            reason: format!("expected {} labels, got {}", lat.m(), labels.len()),
        });
    }
    let mut mask = Mask::zeros(lat.num_bonds());
    for (m, lab) in labels.iter().enumerate() {
        if m > 0 && !check_connection(&labels[m - 1], lab)? {
            return Err(RkError::InvalidStrip {
                reason: format!("strips {} and {m} do not connect", m - 1),
            });
        }
        mask.or_assign(&encode(lat, m, lab)?);
    }
    if lat.is_torus() && lat.wrapped_complement(&labels[lat.m() - 1].r) != labels[0].l {
        return Err(RkError::InvalidStrip {
            reason: "last and first strips do not connect".into(),
        });
    }
    Ok(DimerCover::new(mask))
}

/// All labels of width `n` with matching edge parities, in order.
pub fn all_labels(n: usize) -> Vec<StripLabel> {
    let pat = |x: usize| (0..n).map(|j| x >> j & 1 == 1).collect::<Vec<bool>>();
    let mut out = Vec::new();
    for a in 0..1usize << n {
        for b in 0..1usize << n {
            if a.count_ones() % 2 != b.count_ones() % 2 {
                continue;
            }
            for u in [false, true] {
                out.push(StripLabel::new(pat(a), pat(b), u));
            }
        }
    }
    out
}
