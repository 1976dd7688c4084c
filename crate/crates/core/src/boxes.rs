//! Non-signaling correlation boxes `p(a, b | x, y)`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, DEFAULT_TOLERANCES};
use crate::locality::{joint_distribution, LocalInstrument};
use crate::partitions::ProductPartition;

/// A conditional distribution table with `x`, `y` inputs and `a`, `b`
/// outputs, indexed as `table[x][y][a][b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsBox {
    inputs: (usize, usize),
    outputs: (usize, usize),
    table: Vec<Vec<Vec<Vec<f64>>>>,
}

impl NsBox {
    /// Validates shape, non-negativity and per-input normalization at the
    /// default probability tolerance. Entries within tolerance of zero are clamped.
    pub fn new(table: Vec<Vec<Vec<Vec<f64>>>>) -> Result<Self> {
        let tol = DEFAULT_TOLERANCES.probability;
        let nx = table.len();
        let ny = table.first().map_or(0, Vec::len);
        let na = table.first().and_then(|t| t.first()).map_or(0, Vec::len);
        let nb = table
            .first()
            .and_then(|t| t.first())
            .and_then(|t| t.first())
            .map_or(0, Vec::len);
        if nx == 0 || ny == 0 || na == 0 || nb == 0 {
            return Err(Error::InvalidBox {
                reason: "every axis needs at least one entry".into(),
            });
        }
        let mut table = table;
        for (x, tx) in table.iter_mut().enumerate() {
            if tx.len() != ny {
                return Err(Error::InvalidBox {
                    reason: format!("input x={x} has {} y-entries, expected {ny}", tx.len()),
                });
            }
            for (y, txy) in tx.iter_mut().enumerate() {
                if txy.len() != na || txy.iter().any(|r| r.len() != nb) {
                    return Err(Error::InvalidBox {
                        reason: format!("outcome table for (x={x}, y={y}) is not {na}x{nb}"),
                    });
                }
                let mut sum = 0.0;
                for (a, row) in txy.iter_mut().enumerate() {
                    for (b, p) in row.iter_mut().enumerate() {
                        if !p.is_finite() || *p < -tol || *p > 1.0 + tol {
                            return Err(Error::InvalidBox {
                                reason: format!("p({a},{b}|{x},{y}) = {p} is not a probability"),
                            });
                        }
                        *p = p.clamp(0.0, 1.0);
                        sum += *p;
                    }
                }
                if (sum - 1.0).abs() > tol {
                    return Err(Error::InvalidBox {
                        reason: format!("outcomes for (x={x}, y={y}) sum to {sum}"),
                    });
                }
            }
        }
        Ok(Self {
            inputs: (nx, ny),
            outputs: (na, nb),
            table,
        })
    }

    pub fn inputs(&self) -> (usize, usize) {
        self.inputs
    }

    pub fn outputs(&self) -> (usize, usize) {
        self.outputs
    }

    pub fn table(&self) -> &[Vec<Vec<Vec<f64>>>] {
        &self.table
    }

    pub fn p(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.table[x][y][a][b]
    }

    /// `sum_b p(a, b | x, y)`.
    pub fn alice_marginal(&self, a: usize, x: usize, y: usize) -> f64 {
        self.table[x][y][a].iter().sum()
    }

    /// `sum_a p(a, b | x, y)`.
    pub fn bob_marginal(&self, b: usize, x: usize, y: usize) -> f64 {
        self.table[x][y].iter().map(|row| row[b]).sum()
    }

    /// CHSH needs two inputs and two outputs on each side.
    fn require_binary(&self) -> Result<()> {
        if self.inputs != (2, 2) || self.outputs != (2, 2) {
            return Err(Error::WrongArity {
                x: self.inputs.0,
                y: self.inputs.1,
                a: self.outputs.0,
                b: self.outputs.1,
            });
        }
        Ok(())
    }

    /// Correlator `E(x, y) = sum_{a,b} (-1)^{a+b} p(a, b | x, y)` for binary outputs.
    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        let mut e = 0.0;
        for (a, row) in self.table[x][y].iter().enumerate() {
            for (b, p) in row.iter().enumerate() {
                e += if (a + b) % 2 == 0 { *p } else { -*p };
            }
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxReport {
    /// Largest change of Alice's marginal over `y` and Bob's marginal over `x`.
    pub max_deviation: f64,
    pub alice_deviation: f64,
    pub bob_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn check_box_nosignaling(bx: &NsBox, tol: f64) -> BoxReport {
    let (nx, ny) = bx.inputs();
    let (na, nb) = bx.outputs();
    let mut alice_deviation = 0.0f64;
    for x in 0..nx {
        for a in 0..na {
            let first = bx.alice_marginal(a, x, 0);
            for y in 1..ny {
                alice_deviation = alice_deviation.max((bx.alice_marginal(a, x, y) - first).abs());
            }
        }
    }
    let mut bob_deviation = 0.0f64;
    for y in 0..ny {
        for b in 0..nb {
            let first = bx.bob_marginal(b, 0, y);
            for x in 1..nx {
                bob_deviation = bob_deviation.max((bx.bob_marginal(b, x, y) - first).abs());
            }
        }
    }
    let max_deviation = alice_deviation.max(bob_deviation);
    BoxReport {
        max_deviation,
        alice_deviation,
        bob_deviation,
        tol,
        pass: max_deviation <= tol,
    }
}

/// `E(0,0) + E(0,1) + E(1,0) - E(1,1)`.
pub fn chsh_value(bx: &NsBox) -> Result<f64> {
    bx.require_binary()?;
    Ok(bx.correlator(0, 0) + bx.correlator(0, 1) + bx.correlator(1, 0) - bx.correlator(1, 1))
}

/// `p(a, b | x, y) = 1/2` when `a xor b = x and y`, else 0.
pub fn pr_box() -> NsBox {
    let table = (0..2)
        .map(|x| {
            (0..2)
                .map(|y| {
                    (0..2)
                        .map(|a| {
                            (0..2)
                                .map(|b| if (a ^ b) == (x & y) { 0.5 } else { 0.0 })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    NsBox::new(table).expect("the PR box is a valid table")
}

/// Deterministic local box `p(a, b | x, y) = [a = f(x)] [b = g(y)]`.
pub fn deterministic_box(f: &[usize], g: &[usize], outputs: (usize, usize)) -> Result<NsBox> {
    let table = f
        .iter()
        .map(|&fx| {
            g.iter()
                .map(|&gy| {
                    (0..outputs.0)
                        .map(|a| {
                            (0..outputs.1)
                                .map(|b| if a == fx && b == gy { 1.0 } else { 0.0 })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    NsBox::new(table)
}

/// The box realized by measuring `rho` with Alice's instrument `x` and Bob's
/// instrument `y`. All instruments must be binary and projective.
pub fn box_from_quantum(
    rho: &DensityMatrix,
    instrs_a: &[LocalInstrument],
    instrs_b: &[LocalInstrument],
    pp: &ProductPartition,
) -> Result<NsBox> {
    if instrs_a.is_empty() || instrs_b.is_empty() {
        return Err(Error::EmptyInstrument);
    }
    if instrs_a
        .iter()
        .chain(instrs_b)
        .any(|e| !e.is_projective() || e.outcome_count() != 2)
    {
        return Err(Error::NotBinaryProjective);
    }
    let table = instrs_a
        .iter()
        .map(|ea| {
            instrs_b
                .iter()
                .map(|eb| joint_distribution(rho, ea, eb, pp).map(|j| j.probabilities))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    NsBox::new(table)
}

/// Tsirelson's bound `2 sqrt2`.
pub const TSIRELSON_BOUND: f64 = 4.0 * FRAC_1_SQRT_2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::matrix::C64;
    use crate::hilbert::{pure_state, Projector};
    use crate::partitions::Sector;

    fn bell_phi_plus() -> DensityMatrix {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        pure_state(&[h, z, z, h], false).unwrap()
    }

    fn angle_instrument(sector: Sector, theta: f64) -> LocalInstrument {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let up = Projector::onto_vector(&[C64::new(c, 0.0), C64::new(s, 0.0)]).unwrap();
        let down = Projector::onto_vector(&[C64::new(-s, 0.0), C64::new(c, 0.0)]).unwrap();
        LocalInstrument::projective(sector, vec![up, down]).unwrap()
    }

    #[test]
    fn pr_box_is_nonsignaling_with_chsh_four() {
        let pr = pr_box();
        let r = check_box_nosignaling(&pr, 1e-12);
        assert_eq!(r.max_deviation, 0.0);
        assert!(r.pass);
        assert_eq!(chsh_value(&pr).unwrap(), 4.0);
    }

    #[test]
    fn planted_violation_is_reported_exactly() {
        let mut t = pr_box().table().to_vec();
        t[0][0][0][0] += 0.1;
        t[0][0][1][1] -= 0.1;
        let bx = NsBox::new(t).unwrap();
        let r = check_box_nosignaling(&bx, 1e-12);
        assert!(!r.pass);
        assert!(
            (r.max_deviation - 0.1).abs() <= 1e-12,
            "{}",
            r.max_deviation
        );
    }

    #[test]
    fn deterministic_boxes_stay_within_two() {
        for bits in 0..16usize {
            let f = [bits & 1, (bits >> 1) & 1];
            let g = [(bits >> 2) & 1, (bits >> 3) & 1];
            let bx = deterministic_box(&f, &g, (2, 2)).unwrap();
            assert!(check_box_nosignaling(&bx, 0.0).pass);
            assert!(chsh_value(&bx).unwrap().abs() <= 2.0);
        }
    }

    #[test]
    fn optimal_quantum_box_reaches_tsirelson() {
        let pp = ProductPartition::bipartite(2, 2).unwrap();
        let a = [
            angle_instrument(Sector::A, 0.0),
            angle_instrument(Sector::A, std::f64::consts::FRAC_PI_2),
        ];
        let b = [
            angle_instrument(Sector::B, std::f64::consts::FRAC_PI_4),
            angle_instrument(Sector::B, -std::f64::consts::FRAC_PI_4),
        ];
        let bx = box_from_quantum(&bell_phi_plus(), &a, &b, &pp).unwrap();
        assert!(check_box_nosignaling(&bx, 1e-12).pass);
        assert!((chsh_value(&bx).unwrap() - TSIRELSON_BOUND).abs() <= 1e-10);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(NsBox::new(vec![]), Err(Error::InvalidBox { .. })));
        let mut t = pr_box().table().to_vec();
        t[1][0][0][0] = 0.7;
        assert!(matches!(NsBox::new(t), Err(Error::InvalidBox { .. })));
        let ragged = vec![vec![vec![vec![1.0]]], vec![vec![vec![0.5, 0.5]]]];
        assert!(matches!(NsBox::new(ragged), Err(Error::InvalidBox { .. })));
    }

    #[test]
    fn chsh_needs_binary_box() {
        let bx = deterministic_box(&[0, 1, 2], &[0, 0], (3, 2)).unwrap();
        assert_eq!(
            chsh_value(&bx).unwrap_err(),
            Error::WrongArity {
                x: 3,
                y: 2,
                a: 3,
                b: 2
            }
        );
    }

    #[test]
    fn kraus_instruments_rejected() {
        let pp = ProductPartition::bipartite(2, 2).unwrap();
        let half =
            crate::hilbert::ComplexMatrix::from_real_diagonal(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let k = LocalInstrument::kraus(Sector::A, vec![half.clone(), half]).unwrap();
        let b = [angle_instrument(Sector::B, 0.0)];
        assert_eq!(
            box_from_quantum(&bell_phi_plus(), &[k], &b, &pp).unwrap_err(),
            Error::NotBinaryProjective
        );
    }
}
