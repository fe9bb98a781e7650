use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{NormKind, StudyKind};
use crate::error::Result;
use crate::mosco::fmt_csv;

/// Relative part of the floor added to the measured self-distance.
pub const FLOOR_REL: f64 = 1e-10;
/// Errors within this multiple of the floor count as converged.
pub const FLOOR_BAND: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    DecreasingToFloor,
    Stagnant,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::DecreasingToFloor => "decreasing_to_floor",
            Verdict::Stagnant => "stagnant",
        }
    }
}

/// Least-squares slope of `log(error)` against `log(param)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// `None` when fewer than three points lie above the floor or the
    /// parameters do not vary.
    pub rate: Option<f64>,
    pub r2: Option<f64>,
    pub points: usize,
}

impl RateFit {
    pub fn undefined(points: usize) -> Self {
        RateFit {
            rate: None,
            r2: None,
            points,
        }
    }
}

/// Fits `error ≈ C param^rate` over the points with `error > floor`.
pub fn fit_rate(params: &[f64], errors: &[f64], floor: f64) -> RateFit {
    let pts: Vec<(f64, f64)> = params
        .iter()
        .zip(errors)
        .filter(|(p, e)| **p > 0.0 && **e > floor && e.is_finite())
        .map(|(p, e)| (p.ln(), e.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return RateFit::undefined(n);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-300 {
        return RateFit::undefined(n);
    }
    let rate = sxy / sxx;
    let r2 = if syy <= 1e-300 { 1.0 } else { sxy * sxy / (sxx * syy) };
    RateFit {
        rate: Some(rate),
        r2: Some(r2),
        points: n,
    }
}

/// Decreasing-to-floor when every error above the band `3 floor` is
/// followed by a strictly smaller one and the series ends at most half its
/// first value or inside the band; stagnant otherwise.
pub fn verdict(errors: &[f64], floor: f64) -> Verdict {
    let band = FLOOR_BAND * floor;
    if errors.iter().all(|&e| e <= band) {
        return Verdict::DecreasingToFloor;
    }
    let monotone = errors.windows(2).all(|w| w[0] <= band || w[1] < w[0]);
    let (first, last) = (errors[0], errors[errors.len() - 1]);
    if monotone && (last <= band || last <= 0.5 * first) {
        Verdict::DecreasingToFloor
    } else {
        Verdict::Stagnant
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub norm: NormKind,
    pub errors: Vec<f64>,
    pub rate: RateFit,
    pub verdict: Verdict,
}

impl NormSeries {
    pub fn new(norm: NormKind, params: &[f64], errors: Vec<f64>, floor: f64) -> Self {
        NormSeries {
            norm,
            rate: fit_rate(params, &errors, floor),
            verdict: verdict(&errors, floor),
            errors,
        }
    }

    /// Whether the series is strictly decreasing until it enters the band.
    pub fn strictly_decreasing_to_band(&self, floor: f64) -> bool {
        let band = FLOOR_BAND * floor;
        self.errors.windows(2).all(|w| w[0] <= band || w[1] < w[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub kind: StudyKind,
    pub params: Vec<f64>,
    pub err_l2h1: Vec<f64>,
    pub err_cl2: Vec<f64>,
    pub err_grad: Vec<f64>,
    pub err_l2l2: Vec<f64>,
    /// Self-distance of the limit run plus `FLOOR_REL (1 + ‖u‖)`.
    pub floor: f64,
    /// Requested norms with their rates and verdicts.
    pub series: Vec<NormSeries>,
    pub verdict: Verdict,
    /// Extra per-member series (handle flux, boundedness, defects, ...).
    pub diagnostics: BTreeMap<String, Vec<f64>>,
}

impl ConvergenceReport {
    pub(crate) fn assemble(
        kind: StudyKind,
        params: Vec<f64>,
        norms: &[NormKind],
        errors: [Vec<f64>; 4],
        floor: f64,
        diagnostics: BTreeMap<String, Vec<f64>>,
    ) -> Self {
        let [err_l2h1, err_cl2, err_grad, err_l2l2] = errors;
        let series: Vec<NormSeries> = norms
            .iter()
            .map(|&nk| {
                let e = match nk {
                    NormKind::L2H1 => &err_l2h1,
                    NormKind::CL2 => &err_cl2,
                    NormKind::Grad => &err_grad,
                    NormKind::L2L2 => &err_l2l2,
                };
                NormSeries::new(nk, &params, e.clone(), floor)
            })
            .collect();
        let verdict = if series.iter().all(|s| s.verdict == Verdict::DecreasingToFloor) {
            Verdict::DecreasingToFloor
        } else {
            Verdict::Stagnant
        };
        ConvergenceReport {
            kind,
            params,
            err_l2h1,
            err_cl2,
            err_grad,
            err_l2l2,
            floor,
            series,
            verdict,
            diagnostics,
        }
    }

    pub fn series(&self, norm: NormKind) -> Option<&NormSeries> {
        self.series.iter().find(|s| s.norm == norm)
    }

    pub fn errors(&self, norm: NormKind) -> &[f64] {
        match norm {
            NormKind::L2H1 => &self.err_l2h1,
            NormKind::CL2 => &self.err_cl2,
            NormKind::Grad => &self.err_grad,
            NormKind::L2L2 => &self.err_l2l2,
        }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// CSV with header `n,param,err_L2H1,err_CL2,err_grad,floor,verdict`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "n,param,err_L2H1,err_CL2,err_grad,floor,verdict")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                i + 1,
                fmt_csv(self.params[i]),
                fmt_csv(self.err_l2h1[i]),
                fmt_csv(self.err_cl2[i]),
                fmt_csv(self.err_grad[i]),
                fmt_csv(self.floor),
                self.verdict.as_str()
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        assert_eq!(verdict(&[1.0, 0.5, 0.25], 1e-12), Verdict::DecreasingToFloor);
        assert_eq!(verdict(&[1.0, 0.9, 0.8], 1e-12), Verdict::Stagnant);
        assert_eq!(verdict(&[1.0, 0.5, 0.6, 0.1], 1e-12), Verdict::Stagnant);
        assert_eq!(verdict(&[1e-3, 1e-12, 2e-12], 1e-12), Verdict::DecreasingToFloor);
        assert_eq!(verdict(&[0.0, 0.0], 1e-10), Verdict::DecreasingToFloor);
    }

    #[test]
    fn rate_needs_three_points() {
        let r = fit_rate(&[0.5, 0.25, 0.125], &[1.0, 1e-20, 1e-20], 1e-10);
        assert_eq!(r.rate, None);
        assert_eq!(r.points, 1);
    }
}
