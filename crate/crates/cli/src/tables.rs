//! Size and power grids with their published rates.

use spiked_core::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub d2: f64,
    pub c: f64,
    pub n: usize,
}

pub const SIZE_D2: [f64; 4] = [5.0, 10.0, 50.0, 100.0];
pub const SIZE_N: [usize; 2] = [200, 500];
pub const POWER_D2: [f64; 2] = [10.0, 100.0];
pub const POWER_N: [usize; 3] = [100, 200, 500];
pub const RATIOS: [f64; 3] = [0.1, 1.0, 2.0];

/// Published type I error rates, indexed `[n][d²][c]`.
const SIZE: [[[f64; 3]; 4]; 2] = [
    [[0.0530, 0.0480, 0.0510], [0.0550, 0.0460, 0.0500], [0.0520, 0.0585, 0.0570], [0.0530, 0.0545, 0.0480]],
    [[0.0530, 0.0520, 0.0410], [0.0520, 0.0510, 0.0490], [0.0540, 0.0450, 0.0520], [0.0525, 0.0505, 0.0490]],
];

/// Published power, indexed `[d²][c][n]`.
const POWER: [[[f64; 3]; 3]; 2] = [
    [[0.8610, 0.9060, 0.9390], [0.8450, 0.9020, 0.9300], [0.8310, 0.9050, 0.9310]],
    [[0.8780, 0.9120, 0.9390], [0.8600, 0.8930, 0.9400], [0.8550, 0.8910, 0.9300]],
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Table {
    Size,
    Power,
}

impl Table {
    /// Grid cells in a fixed order; a cell's position offsets its seed.
    pub fn cells(self) -> Vec<Cell> {
        let mut out = Vec::new();
        match self {
            Table::Size => {
                for &n in &SIZE_N {
                    for &d2 in &SIZE_D2 {
                        for &c in &RATIOS {
                            out.push(Cell { d2, c, n });
                        }
                    }
                }
            }
            Table::Power => {
                for &d2 in &POWER_D2 {
                    for &c in &RATIOS {
                        for &n in &POWER_N {
                            out.push(Cell { d2, c, n });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn position(self, cell: &Cell) -> Option<usize> {
        self.cells().iter().position(|g| g == cell)
    }

    pub fn published(self, cell: &Cell) -> Option<f64> {
        let ci = RATIOS.iter().position(|&c| c == cell.c)?;
        match self {
            Table::Size => {
                let ni = SIZE_N.iter().position(|&n| n == cell.n)?;
                let di = SIZE_D2.iter().position(|&d| d == cell.d2)?;
                Some(SIZE[ni][di][ci])
            }
            Table::Power => {
                let di = POWER_D2.iter().position(|&d| d == cell.d2)?;
                let ni = POWER_N.iter().position(|&n| n == cell.n)?;
                Some(POWER[di][ci][ni])
            }
        }
    }
}

/// Parses `d=5,c=0.1,n=200` (keys in any order; `d2` is accepted for `d`).
pub fn parse_cell(text: &str) -> Result<Cell> {
    let (mut d2, mut c, mut n) = (None, None, None);
    for part in text.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--cell entry `{part}` must look like key=value")))?;
        let bad = || Error::Config(format!("--cell: bad value `{value}` for `{key}`"));
        match key.trim() {
            "d" | "d2" => d2 = Some(value.trim().parse::<f64>().map_err(|_| bad())?),
            "c" => c = Some(value.trim().parse::<f64>().map_err(|_| bad())?),
            "n" => n = Some(value.trim().parse::<usize>().map_err(|_| bad())?),
            other => return Err(Error::Config(format!("--cell: unknown key `{other}` (expected d, c, n)"))),
        }
    }
    match (d2, c, n) {
        (Some(d2), Some(c), Some(n)) => Ok(Cell { d2, c, n }),
        _ => Err(Error::Config(format!("--cell `{text}` needs d, c and n"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_parsing() {
        assert_eq!(parse_cell("d=5,c=0.1,n=200").unwrap(), Cell { d2: 5.0, c: 0.1, n: 200 });
        assert_eq!(parse_cell("n=500, d2=10 ,c=1").unwrap(), Cell { d2: 10.0, c: 1.0, n: 500 });
        assert!(parse_cell("d=5,c=0.1").is_err());
        assert!(parse_cell("d=5,c=0.1,n=2.5").is_err());
        assert!(parse_cell("d=5,k=0.1,n=200").is_err());
    }

    #[test]
    fn published_lookup() {
        let cell = Cell { d2: 50.0, c: 1.0, n: 200 };
        assert_eq!(Table::Size.published(&cell), Some(0.0585));
        assert_eq!(Table::Power.published(&Cell { d2: 100.0, c: 0.1, n: 100 }), Some(0.8780));
        assert_eq!(Table::Power.published(&Cell { d2: 10.0, c: 1.0, n: 500 }), Some(0.9300));
        assert_eq!(Table::Size.published(&Cell { d2: 7.0, c: 1.0, n: 200 }), None);
        assert_eq!(Table::Size.cells().len(), 24);
        assert_eq!(Table::Power.cells().len(), 18);
    }
}
