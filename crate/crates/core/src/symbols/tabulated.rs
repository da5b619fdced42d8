use num_complex::Complex64;
use serde_json::json;

use super::{check_dim, Symbol, SymbolDescriptor};
use crate::error::{Error, Result};
use crate::quadrature::{Integral, QuadratureSpec};
use crate::spectral::{Field, Side, SpectralGrid};

/// Symbol sampled on a frequency lattice, piecewise constant in time.
///
/// `tables[0]` applies before `breaks[0]`, `tables[i]` on `[breaks[i-1], breaks[i])`.
/// Evaluation is only defined at lattice frequencies of the table grid.
#[derive(Debug, Clone)]
pub struct TabulatedSymbol {
    grid: SpectralGrid,
    breaks: Vec<f64>,
    tables: Vec<Field>,
}

impl TabulatedSymbol {
    pub fn new(breaks: Vec<f64>, tables: Vec<Field>) -> Result<Self> {
        let first = tables
            .first()
            .ok_or_else(|| Error::InvalidArgument("tabulated symbol needs at least one table".into()))?;
        let grid = *first.grid();
        if tables.len() != breaks.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} breaks need {} tables, got {}",
                breaks.len(),
                breaks.len() + 1,
                tables.len()
            )));
        }
        if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("breakpoints must be finite and strictly increasing".into()));
        }
        for t in &tables {
            t.expect_side(Side::Frequency)?;
            first.expect_same_grid(t)?;
        }
        Ok(Self { grid, breaks, tables })
    }

    /// Time-independent table.
    pub fn constant(table: Field) -> Result<Self> {
        Self::new(Vec::new(), vec![table])
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    fn lattice_index(&self, xi: &[f64]) -> Result<usize> {
        let dxi = self.grid.dxi();
        let mut offsets = [0i64; 3];
        for (a, &x) in xi.iter().enumerate() {
            let o = (x / dxi).round();
            if (x - o * dxi).abs() > 1e-9 * dxi.max(x.abs()) {
                return Err(Error::InvalidArgument(format!("xi = {xi:?} is not a lattice frequency")));
            }
            offsets[a] = o as i64;
        }
        self.grid
            .index_of_offsets(&offsets[..xi.len()])
            .ok_or_else(|| Error::InvalidArgument(format!("xi = {xi:?} lies outside the table")))
    }

    fn pieces(&self, s: f64, t: f64) -> impl Iterator<Item = (f64, &Field)> + '_ {
        let n = self.tables.len();
        (0..n).filter_map(move |i| {
            let lo = if i == 0 { f64::NEG_INFINITY } else { self.breaks[i - 1] };
            let hi = if i == n - 1 { f64::INFINITY } else { self.breaks[i] };
            let a = s.max(lo);
            let b = t.min(hi);
            (b > a).then(|| (b - a, &self.tables[i]))
        })
    }
}

impl Symbol for TabulatedSymbol {
    fn dim(&self) -> Option<usize> {
        Some(self.grid.dim())
    }

    fn eval(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        check_dim(self.dim(), xi)?;
        let k = self.lattice_index(xi)?;
        Ok(self.tables[self.breaks.partition_point(|&b| b <= t)].values()[k])
    }

    fn integral(&self, s: f64, t: f64, xi: &[f64], _quad: &QuadratureSpec) -> Result<Integral> {
        check_dim(self.dim(), xi)?;
        if t < s {
            let i = self.integral(t, s, xi, _quad)?;
            return Ok(Integral::exact(-i.value));
        }
        let k = self.lattice_index(xi)?;
        Ok(Integral::exact(
            self.pieces(s, t).map(|(len, f)| f.values()[k] * len).sum::<Complex64>(),
        ))
    }

    fn descriptor(&self) -> SymbolDescriptor {
        SymbolDescriptor::new(
            "tabulated",
            json!({ "grid": self.grid, "breaks": self.breaks, "tables": self.tables.len() }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, sample};
    use std::f64::consts::PI;

    #[test]
    fn lookup_and_exact_integral() {
        let g = make_grid(1, 8, 2.0 * PI).unwrap();
        let heat = sample(&g, Side::Frequency, |xi| Complex64::new(-xi[0] * xi[0], 0.0)).unwrap();
        let back = heat.scale(Complex64::new(-1.0, 0.0)).unwrap();
        let sym = TabulatedSymbol::new(vec![0.5], vec![heat, back]).unwrap();
        assert_eq!(sym.eval(0.1, &[2.0]).unwrap(), Complex64::new(-4.0, 0.0));
        assert_eq!(sym.eval(0.7, &[2.0]).unwrap(), Complex64::new(4.0, 0.0));
        let q = QuadratureSpec::default();
        assert_eq!(sym.integral(0.0, 1.0, &[3.0], &q).unwrap().value, Complex64::new(0.0, 0.0));
        assert_eq!(sym.integral(0.0, 0.25, &[-4.0], &q).unwrap().value, Complex64::new(-4.0, 0.0));
    }

    #[test]
    fn off_lattice_is_rejected() {
        let g = make_grid(1, 8, 2.0 * PI).unwrap();
        let sym = TabulatedSymbol::constant(Field::zeros(g, Side::Frequency)).unwrap();
        assert!(sym.eval(0.0, &[0.5]).is_err());
        assert!(sym.eval(0.0, &[4.0]).is_err());
        assert!(sym.eval(0.0, &[-4.0]).is_ok());
    }

    #[test]
    fn tables_must_match() {
        let g = make_grid(1, 8, 1.0).unwrap();
        let h = make_grid(1, 16, 1.0).unwrap();
        let r = TabulatedSymbol::new(vec![0.5], vec![Field::zeros(g, Side::Frequency), Field::zeros(h, Side::Frequency)]);
        assert!(matches!(r, Err(Error::GridMismatch)));
        assert!(TabulatedSymbol::constant(Field::zeros(g, Side::Physical)).is_err());
    }
}
