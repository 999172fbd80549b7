//! CSV renderings of experiment results. Headers are fixed, lines end in LF,
//! and floats use the shortest representation that round-trips.

use std::fmt::Write;

use super::{AccuracyTrial, ExpectedLog, KappaRow, SlopeResult, TailCurve};

pub const TAIL_HEADER: &str = "t,empirical,bound,trials,near_singular";
pub const EXPLOG_HEADER: &str = "n,mean_logplus,bound,trials,base";
pub const STAIL_HEADER: &str = "t,empirical,bound,trials";
pub const SLOPE_HEADER: &str = "n,mean_log2,trials";
pub const KAPPA_HEADER: &str = "n,mean_kappa_root,mean_log2_kappa,trials";
pub const ACCURACY_HEADER: &str = "trial,observed,predictor,ratio";

fn render<const K: usize>(header: &str, rows: impl IntoIterator<Item = [String; K]>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // writes into a Vec cannot fail
    w.write_record(header.split(',')).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    let bytes = w.into_inner().expect("in-memory csv");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

pub fn tail(curve: &TailCurve) -> String {
    render(
        TAIL_HEADER,
        (0..curve.t_grid.len()).map(|i| {
            [
                curve.t_grid[i].to_string(),
                curve.empirical[i].to_string(),
                curve.bound[i].to_string(),
                curve.trials.to_string(),
                curve.near_singular.to_string(),
            ]
        }),
    )
}

pub fn stail(curve: &TailCurve) -> String {
    render(
        STAIL_HEADER,
        (0..curve.t_grid.len()).map(|i| {
            [
                curve.t_grid[i].to_string(),
                curve.empirical[i].to_string(),
                curve.bound[i].to_string(),
                curve.trials.to_string(),
            ]
        }),
    )
}

pub fn explog(rows: &[ExpectedLog]) -> String {
    render(
        EXPLOG_HEADER,
        rows.iter().map(|r| {
            [
                r.n.to_string(),
                r.mean_logplus.to_string(),
                r.bound.to_string(),
                r.trials.to_string(),
                r.base.to_string(),
            ]
        }),
    )
}

pub fn slope(result: &SlopeResult) -> String {
    let mut out = render(
        SLOPE_HEADER,
        result.rows.iter().map(|r| {
            [
                r.n.to_string(),
                r.mean_log2.to_string(),
                result.trials.to_string(),
            ]
        }),
    );
    let fit = &result.fit;
    let _ = writeln!(
        out,
        "# slope={} intercept={} rms={}",
        fit.slope, fit.intercept, fit.residual_rms
    );
    out
}

pub fn kappa(rows: &[KappaRow]) -> String {
    render(
        KAPPA_HEADER,
        rows.iter().map(|r| {
            [
                r.n.to_string(),
                r.mean_kappa_root.to_string(),
                r.mean_log2_kappa.to_string(),
                r.trials.to_string(),
            ]
        }),
    )
}

pub fn accuracy(trials: &[AccuracyTrial]) -> String {
    render(
        ACCURACY_HEADER,
        trials.iter().map(|t| {
            [
                t.trial.to_string(),
                t.observed.to_string(),
                t.predictor.to_string(),
                t.ratio.to_string(),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{RegressionFit, SizeMean, SlopeTarget};

    #[test]
    fn tail_rows() {
        let c = TailCurve {
            t_grid: vec![1e5, 1e6],
            empirical: vec![0.01, 0.0],
            bound: vec![0.03025, 0.003025],
            trials: 100,
            near_singular: 0,
        };
        assert_eq!(
            tail(&c),
            "t,empirical,bound,trials,near_singular\n100000,0.01,0.03025,100,0\n1000000,0,0.003025,100,0\n"
        );
        assert!(stail(&c).starts_with("t,empirical,bound,trials\n100000,0.01,0.03025,100\n"));
    }

    #[test]
    fn slope_comment_line() {
        let r = SlopeResult {
            target: SlopeTarget::InvComp,
            fit: RegressionFit {
                slope: 1.0,
                intercept: 1.0,
                residual_rms: 0.0,
                points: vec![(0.0, 1.0), (1.0, 2.0)],
            },
            rows: vec![
                SizeMean {
                    n: 1,
                    mean_log2: 1.0,
                    used: 3,
                    excluded: 0,
                },
                SizeMean {
                    n: 2,
                    mean_log2: 2.0,
                    used: 3,
                    excluded: 0,
                },
            ],
            trials: 3,
        };
        assert_eq!(
            slope(&r),
            "n,mean_log2,trials\n1,1,3\n2,2,3\n# slope=1 intercept=1 rms=0\n"
        );
    }
}
