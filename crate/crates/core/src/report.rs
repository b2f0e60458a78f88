//! Plot-ready grids: binned mean volume over two features and a Gaussian
//! kernel density of the same pairs.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::format_value;

/// Equal-width bins spanning the finite values; the top edge is inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    pub edges: Vec<f64>,
}

impl Bins {
    pub fn fit(values: &[f64], n: usize) -> Result<Bins> {
        if n == 0 {
            return Err(Error::invalid("bin count must be positive"));
        }
        let (lo, hi) = finite_range(values).ok_or_else(|| Error::invalid("no finite values to bin"))?;
        let (lo, hi) = if lo == hi { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        let w = (hi - lo) / n as f64;
        let mut edges: Vec<f64> = (0..n).map(|i| lo + w * i as f64).collect();
        edges.push(hi);
        Ok(Bins { edges })
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, v: f64) -> Option<usize> {
        let (lo, hi) = (self.edges[0], *self.edges.last()?);
        if !(v >= lo && v <= hi) {
            return None;
        }
        let i = self.edges.partition_point(|e| *e <= v);
        Some(i.saturating_sub(1).min(self.len() - 1))
    }
}

fn finite_range(values: &[f64]) -> Option<(f64, f64)> {
    values
        .iter()
        .filter(|v| v.is_finite())
        .fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((a, b)) => Some((a.min(v), b.max(v))),
        })
}

/// Mean of `z` per (x-bin, y-bin). Cells are indexed `[ix][iy]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub x_name: String,
    pub y_name: String,
    pub x_bins: Bins,
    pub y_bins: Bins,
    pub count: Vec<Vec<usize>>,
    pub sum: Vec<Vec<f64>>,
}

impl Heatmap {
    pub fn mean(&self, ix: usize, iy: usize) -> Option<f64> {
        let n = self.count[ix][iy];
        (n > 0).then(|| self.sum[ix][iy] / n as f64)
    }

    /// Mean of `z` per x-bin, pooled over y.
    pub fn x_marginal_means(&self) -> Vec<Option<f64>> {
        (0..self.x_bins.len())
            .map(|ix| {
                let n: usize = self.count[ix].iter().sum();
                (n > 0).then(|| self.sum[ix].iter().sum::<f64>() / n as f64)
            })
            .collect()
    }

    /// Mean of `z` per y-bin, pooled over x.
    pub fn y_marginal_means(&self) -> Vec<Option<f64>> {
        (0..self.y_bins.len())
            .map(|iy| {
                let n: usize = self.count.iter().map(|c| c[iy]).sum();
                (n > 0).then(|| self.sum.iter().map(|s| s[iy]).sum::<f64>() / n as f64)
            })
            .collect()
    }

    /// `<x>_low,<x>_high,<y>_low,<y>_high,count,mean_volume`; empty cells leave the mean blank.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            format!("{}_low", self.x_name),
            format!("{}_high", self.x_name),
            format!("{}_low", self.y_name),
            format!("{}_high", self.y_name),
            "count".into(),
            "mean_volume".into(),
        ])?;
        for ix in 0..self.x_bins.len() {
            for iy in 0..self.y_bins.len() {
                w.write_record([
                    self.x_bins.edges[ix].to_string(),
                    self.x_bins.edges[ix + 1].to_string(),
                    self.y_bins.edges[iy].to_string(),
                    self.y_bins.edges[iy + 1].to_string(),
                    self.count[ix][iy].to_string(),
                    format_value(self.mean(ix, iy).unwrap_or(f64::NAN)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Bins `(x, y)` pairs and averages `z` in each cell. Rows with a
/// non-finite value are skipped.
pub fn binned_mean(
    (x_name, x): (&str, &[f64]),
    (y_name, y): (&str, &[f64]),
    z: &[f64],
    n_x: usize,
    n_y: usize,
) -> Result<Heatmap> {
    if x.len() != y.len() || x.len() != z.len() {
        return Err(Error::invalid("binned series differ in length"));
    }
    let keep: Vec<usize> = (0..x.len())
        .filter(|&i| x[i].is_finite() && y[i].is_finite() && z[i].is_finite())
        .collect();
    let xs: Vec<f64> = keep.iter().map(|&i| x[i]).collect();
    let ys: Vec<f64> = keep.iter().map(|&i| y[i]).collect();
    let x_bins = Bins::fit(&xs, n_x)?;
    let y_bins = Bins::fit(&ys, n_y)?;
    let mut count = vec![vec![0usize; n_y]; n_x];
    let mut sum = vec![vec![0.0; n_y]; n_x];
    for &i in &keep {
        let ix = x_bins.index(x[i]).expect("within fitted range");
        let iy = y_bins.index(y[i]).expect("within fitted range");
        count[ix][iy] += 1;
        sum[ix][iy] += z[i];
    }
    Ok(Heatmap {
        x_name: x_name.to_string(),
        y_name: y_name.to_string(),
        x_bins,
        y_bins,
        count,
        sum,
    })
}

/// Density of `(x, y)` evaluated on a regular grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub x_name: String,
    pub y_name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Indexed `[ix][iy]`.
    pub density: Vec<Vec<f64>>,
    pub bandwidth_x: f64,
    pub bandwidth_y: f64,
    pub bandwidth_rule: String,
}

impl DensityGrid {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([self.x_name.as_str(), self.y_name.as_str(), "density"])?;
        for (ix, xv) in self.x.iter().enumerate() {
            for (iy, yv) in self.y.iter().enumerate() {
                w.write_record([xv.to_string(), yv.to_string(), self.density[ix][iy].to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Scott's rule for two dimensions: `σ · n^(−1/6)` per axis.
pub fn scott_bandwidth(values: &[f64]) -> f64 {
    std_dev(values) * (values.len() as f64).powf(-1.0 / 6.0)
}

/// Product Gaussian kernel density with Scott's-rule bandwidths, on an
/// `n_x × n_y` grid spanning the data range.
pub fn gaussian_kde(
    (x_name, x): (&str, &[f64]),
    (y_name, y): (&str, &[f64]),
    n_x: usize,
    n_y: usize,
) -> Result<DensityGrid> {
    if x.len() != y.len() {
        return Err(Error::invalid("density series differ in length"));
    }
    if n_x < 2 || n_y < 2 {
        return Err(Error::invalid("density grid needs at least two points per axis"));
    }
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .collect();
    if pairs.len() < 2 {
        return Err(Error::invalid("density needs at least two finite pairs"));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let hx = scott_bandwidth(&xs);
    let hy = scott_bandwidth(&ys);
    if !(hx > 0.0 && hy > 0.0) {
        return Err(Error::invalid("density undefined for a constant series"));
    }
    let axis = |v: &[f64], n: usize| {
        let (lo, hi) = finite_range(v).expect("non-empty");
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect::<Vec<f64>>()
    };
    let gx = axis(&xs, n_x);
    let gy = axis(&ys, n_y);
    let norm = 1.0 / (pairs.len() as f64 * 2.0 * std::f64::consts::PI * hx * hy);
    let density = gx
        .par_iter()
        .map(|&a| {
            gy.iter()
                .map(|&b| {
                    norm * pairs
                        .iter()
                        .map(|&(px, py)| {
                            let u = (a - px) / hx;
                            let v = (b - py) / hy;
                            (-0.5 * (u * u + v * v)).exp()
                        })
                        .sum::<f64>()
                })
                .collect()
        })
        .collect();
    Ok(DensityGrid {
        x_name: x_name.to_string(),
        y_name: y_name.to_string(),
        x: gx,
        y: gy,
        density,
        bandwidth_x: hx,
        bandwidth_y: hy,
        bandwidth_rule: "scott: sigma * n^(-1/6) per axis".into(),
    })
}
