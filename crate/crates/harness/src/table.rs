//! CSV output. Reals are written with 17 significant digits so they parse
//! back to the same double; missing values are empty fields.

use std::fmt::Write;

pub const ERRORS_HEADER: &str = "scheme,delta,T,functional,estimate,ci99,eps_a,eps_r,eps_hat,samples,failed_paths,seed";
pub const SERIES_HEADER: &str = "scheme,delta,t,mean_functional,ci99";

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

/// One `(scheme, Δ)` cell. `estimate` is `E φ(X̄_T)` in the weak and trace
/// modes and `ε̂` in strong mode; `ci99` is its half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub scheme: String,
    pub delta: f64,
    pub horizon: f64,
    pub functional: String,
    pub estimate: Option<f64>,
    pub ci99: Option<f64>,
    pub eps_a: Option<f64>,
    pub eps_r: Option<f64>,
    pub eps_hat: Option<f64>,
    pub samples: u64,
    pub failed_paths: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(ERRORS_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.scheme,
                real(r.delta),
                real(r.horizon),
                r.functional,
                opt(r.estimate),
                opt(r.ci99),
                opt(r.eps_a),
                opt(r.eps_r),
                opt(r.eps_hat),
                r.samples,
                r.failed_paths,
                r.seed
            )
            .unwrap();
        }
        out
    }

    pub fn find(&self, scheme: &str, delta: f64) -> Option<&ErrorRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.delta == delta)
    }
}

/// One observation time of one run; `delta` is empty for the exact-law
/// reference rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub scheme: String,
    pub delta: Option<f64>,
    pub t: f64,
    pub mean: f64,
    pub ci99: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeriesTable {
    pub rows: Vec<SeriesRow>,
}

impl SeriesTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SERIES_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.scheme, opt(r.delta), real(r.t), real(r.mean), real(r.ci99)).unwrap();
        }
        out
    }
}
