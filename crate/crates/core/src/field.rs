//! Complex-valued fields on regular grids, with CSV export.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Which representation the grid axes live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Momentum,
    Position,
}

impl Basis {
    pub fn name(&self) -> &'static str {
        match self {
            Basis::Momentum => "momentum",
            Basis::Position => "position",
        }
    }
}

/// One uniformly spaced, strictly increasing grid axis.
#[derive(Debug, Clone)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub step: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, min: f64, step: f64, n: usize) -> Result<Self> {
        if !(step > 0.0) || n == 0 || !min.is_finite() {
            return Err(CoreError::Invalid(format!(
                "axis must be strictly monotone: min={min}, step={step}, n={n}"
            )));
        }
        Ok(Axis {
            name: name.into(),
            min,
            step,
            n,
        })
    }

    /// Axis spanning [lo, hi] inclusive with n nodes.
    pub fn spanning(name: impl Into<String>, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(CoreError::Invalid(format!(
                "axis span invalid: [{lo}, {hi}] with n={n}"
            )));
        }
        Axis::new(name, lo, (hi - lo) / (n - 1) as f64, n)
    }

    pub fn at(&self, i: usize) -> f64 {
        self.min + self.step * i as f64
    }

    pub fn max(&self) -> f64 {
        self.at(self.n - 1)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.at(i))
    }
}

/// A complex amplitude sampled on the product of its axes (row-major,
/// last axis fastest). Immutable after construction.
#[derive(Debug, Clone)]
pub struct AmplitudeField {
    axes: Vec<Axis>,
    values: Vec<Complex64>,
    basis: Basis,
    /// Evolution time t₁ the field refers to, in s.
    time: f64,
}

impl AmplitudeField {
    pub fn new(axes: Vec<Axis>, values: Vec<Complex64>, basis: Basis, time: f64) -> Result<Self> {
        let expect: usize = axes.iter().map(|a| a.n).product();
        if axes.is_empty() || values.len() != expect {
            return Err(CoreError::Invalid(format!(
                "value count {} does not match grid size {}",
                values.len(),
                expect
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(CoreError::Invalid("non-finite field value".into()));
        }
        Ok(AmplitudeField {
            axes,
            values,
            basis,
            time,
        })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat index → per-axis indices.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (k, ax) in self.axes.iter().enumerate().rev() {
            idx[k] = flat % ax.n;
            flat /= ax.n;
        }
        idx
    }

    /// Per-axis indices → flat index.
    pub fn ravel(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (ax, &i) in self.axes.iter().zip(idx) {
            flat = flat * ax.n + i;
        }
        flat
    }

    pub fn value_at(&self, idx: &[usize]) -> Complex64 {
        self.values[self.ravel(idx)]
    }

    /// Coordinates of a flat node.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, ax)| ax.at(i))
            .collect()
    }

    /// CSV rows `axis1,...,axisN,re,im`, floats with 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let mut header: Vec<String> = (1..=self.axes.len()).map(|k| format!("axis{k}")).collect();
        header.push("re".into());
        header.push("im".into());
        writeln!(w, "{}", header.join(","))?;
        for (flat, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.coords(flat).iter().map(|x| fmt_g17(*x)).collect();
            row.push(fmt_g17(v.re));
            row.push(fmt_g17(v.im));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Sidecar metadata block: axis names, ranges, basis and time.
    pub fn write_meta<W: Write>(&self, w: &mut W, extra: &[(String, String)]) -> io::Result<()> {
        writeln!(w, "basis = {}", self.basis.name())?;
        writeln!(w, "time_s = {}", fmt_g17(self.time))?;
        writeln!(w, "axes = {}", self.axes.len())?;
        for (k, ax) in self.axes.iter().enumerate() {
            writeln!(
                w,
                "axis{} = {} min={} step={} n={}",
                k + 1,
                ax.name,
                fmt_g17(ax.min),
                fmt_g17(ax.step),
                ax.n
            )?;
        }
        for (k, v) in extra {
            writeln!(w, "{k} = {v}")?;
        }
        Ok(())
    }

    /// Squared l² norm of the raw samples (no quadrature weights).
    pub fn sample_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// 17-significant-digit float formatting used for every CSV the crate emits.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_field() -> AmplitudeField {
        let axes = vec![
            Axis::spanning("pz", 0.0, 1.0, 3).unwrap(),
            Axis::spanning("q", -1.0, 1.0, 2).unwrap(),
        ];
        let values: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        AmplitudeField::new(axes, values, Basis::Momentum, 1.0e-16).unwrap()
    }

    #[test]
    fn ravel_roundtrip() {
        let f = small_field();
        for flat in 0..f.len() {
            assert_eq!(f.ravel(&f.unravel(flat)), flat);
        }
        assert_eq!(f.unravel(5), vec![2, 1]);
    }

    #[test]
    fn csv_header_and_precision() {
        let f = small_field();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "axis1,axis2,re,im");
        let first = lines.next().unwrap();
        assert!(first.contains("0.0000000000000000e0"));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn rejects_mismatched_values() {
        let axes = vec![Axis::spanning("x", 0.0, 1.0, 4).unwrap()];
        let bad = AmplitudeField::new(axes, vec![Complex64::new(0.0, 0.0); 3], Basis::Position, 0.0);
        assert!(bad.is_err());
    }

    #[test]
    fn rejects_non_monotone_axis() {
        assert!(Axis::new("x", 0.0, 0.0, 4).is_err());
        assert!(Axis::spanning("x", 1.0, 0.0, 4).is_err());
    }
}
