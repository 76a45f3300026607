//! Per-year indicator series, least-squares trends and correlation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{observe_series, EvidenceSource, ObservationKind, ObserveOptions, SourceError};
use crate::indicators::{novelty, relevance, NormalizationMode};
use crate::pattern::SearchPattern;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two points, got {0}")]
    TooShort(usize),
    #[error("zero variance: statistic undefined")]
    ZeroVariance,
}

fn check(xs: &[f64], ys: &[f64]) -> Result<(), StatError> {
    if xs.len() != ys.len() {
        return Err(StatError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(StatError::TooShort(xs.len()));
    }
    Ok(())
}

fn centered_moments(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    (mx, my, sxx, syy, sxy)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatError> {
    check(xs, ys)?;
    let (_, _, sxx, syy, sxy) = centered_moments(xs, ys);
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

impl LinearFit {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit, StatError> {
    check(xs, ys)?;
    let (mx, my, sxx, _, sxy) = centered_moments(xs, ys);
    if sxx == 0.0 {
        return Err(StatError::ZeroVariance);
    }
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub years: Vec<i32>,
    /// `None` marks a year whose marker-only query found nothing.
    pub nv_values: Vec<Option<f64>>,
    pub rl_values: Vec<Option<f64>>,
    pub nv_fit: Option<LinearFit>,
    pub rl_fit: Option<LinearFit>,
    pub pearson_r: Option<f64>,
}

fn present(years: &[i32], values: &[Option<f64>]) -> (Vec<f64>, Vec<f64>) {
    years
        .iter()
        .zip(values)
        .filter_map(|(&y, v)| v.map(|v| (y as f64, v)))
        .unzip()
}

impl TrendSeries {
    pub fn from_values(years: Vec<i32>, nv_values: Vec<Option<f64>>, rl_values: Vec<Option<f64>>) -> Self {
        assert!(years.len() == nv_values.len() && years.len() == rl_values.len());
        let (x, y) = present(&years, &nv_values);
        let nv_fit = linear_fit(&x, &y).ok();
        let (x, y) = present(&years, &rl_values);
        let rl_fit = linear_fit(&x, &y).ok();
        let (nv, rl): (Vec<f64>, Vec<f64>) = nv_values
            .iter()
            .zip(&rl_values)
            .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
            .unzip();
        let pearson_r = pearson(&nv, &rl).ok();
        TrendSeries {
            years,
            nv_values,
            rl_values,
            nv_fit,
            rl_fit,
            pearson_r,
        }
    }

    /// `year,nv,rl`; missing values are empty fields.
    pub fn to_csv(&self) -> String {
        let cell = |v: &Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from("year,nv,rl\n");
        for ((year, nv), rl) in self.years.iter().zip(&self.nv_values).zip(&self.rl_values) {
            out.push_str(&format!("{year},{},{}\n", cell(nv), cell(rl)));
        }
        out
    }
}

/// Nv and Rl for every year in `from..=to`, each computed on the documents
/// of that year only.
pub fn compute_trend(
    source: &dyn EvidenceSource,
    pattern: &SearchPattern,
    from: i32,
    to: i32,
    mode: NormalizationMode,
    options: ObserveOptions<'_>,
) -> Result<TrendSeries, SourceError> {
    let years: Vec<i32> = (from..=to).collect();
    let mut nv_values = Vec::with_capacity(years.len());
    let mut rl_values = Vec::with_capacity(years.len());
    for &year in &years {
        let hits = observe_series(source, pattern, ObservationKind::Hits, Some(year), options)?;
        nv_values.push(novelty(&hits, mode).ok());
        let interest =
            observe_series(source, pattern, ObservationKind::Interest, Some(year), options)?;
        rl_values.push(relevance(&interest, mode).ok());
    }
    Ok(TrendSeries::from_values(years, nv_values, rl_values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pearson_examples() {
        let xs = [1.0, 2.0, 3.0, 4.5];
        assert_abs_diff_eq!(pearson(&xs, &xs).unwrap(), 1.0, epsilon = 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert_abs_diff_eq!(pearson(&xs, &neg).unwrap(), -1.0, epsilon = 1e-12);
        // cov = 1, var x = var y = 2 (sums of squares) -> 1 / 2
        assert_abs_diff_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(pearson(&[1.0, 2.0], &[3.0, 3.0]), Err(StatError::ZeroVariance));
        assert_eq!(pearson(&[1.0], &[1.0]), Err(StatError::TooShort(1)));
        assert_eq!(pearson(&[1.0, 2.0], &[1.0]), Err(StatError::LengthMismatch(2, 1)));
    }

    #[test]
    fn fit_examples() {
        let fit = linear_fit(&[2000.0, 2001.0, 2002.0], &[1.0, 3.0, 5.0]).unwrap();
        assert_abs_diff_eq!(fit.slope, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.at(2001.0), 3.0, epsilon = 1e-9);
        let flat = linear_fit(&[1.0, 2.0, 3.0], &[0.4, 0.4, 0.4]).unwrap();
        assert_eq!(flat.slope, 0.0);
    }

    #[test]
    fn constant_series_has_no_correlation() {
        let t = TrendSeries::from_values(
            vec![2000, 2001, 2002],
            vec![Some(0.5); 3],
            vec![Some(0.1), Some(0.2), Some(0.3)],
        );
        assert_eq!(t.nv_fit.unwrap().slope, 0.0);
        assert_eq!(t.pearson_r, None);
    }

    #[test]
    fn missing_years_are_skipped() {
        let t = TrendSeries::from_values(
            vec![2000, 2001, 2002],
            vec![Some(0.1), None, Some(0.3)],
            vec![Some(0.2), None, Some(0.6)],
        );
        assert_abs_diff_eq!(t.nv_fit.unwrap().slope, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(t.pearson_r.unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(t.to_csv(), "year,nv,rl\n2000,0.1,0.2\n2001,,\n2002,0.3,0.6\n");
    }
}
