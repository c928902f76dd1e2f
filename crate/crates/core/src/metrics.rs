//! Cost accounting: sweep counts, synchronisation events and Laplacian
//! evaluations per fine control volume, collected per time step.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelKind {
    /// Fine grid and intermediate (red-black) levels.
    Fine,
    /// The serially relaxed coarsest level.
    Coarse,
}

pub const CSV_HEADER: &str = "step,I_f,I_c,NCC_f,NCC_c,NCC_t,N_Lap,restrictions,prolongations,residual_final";

/// Counters for one time step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepMetrics {
    pub step: usize,
    pub i_f: usize,
    pub i_c: usize,
    pub ncc_f: usize,
    pub ncc_c: usize,
    pub n_lap: f64,
    pub restrictions: usize,
    pub prolongations: usize,
    pub residual_final: f64,
}

impl StepMetrics {
    pub fn ncc_t(&self) -> usize {
        self.ncc_f + self.ncc_c
    }

    pub fn i_t(&self) -> usize {
        self.i_f + self.i_c
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:e}",
            self.step,
            self.i_f,
            self.i_c,
            self.ncc_f,
            self.ncc_c,
            self.ncc_t(),
            self.n_lap,
            self.restrictions,
            self.prolongations,
            self.residual_final
        )
    }
}

/// Per-run metrics sink: an open row for the current step plus the closed rows.
#[derive(Debug, Clone, Default)]
pub struct RunMetrics {
    current: StepMetrics,
    rows: Vec<StepMetrics>,
}

impl RunMetrics {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts one relaxation sweep over `cells` cells of a level.
    ///
    /// Fine-kind sweeps are red-black (2 synchronisations), coarse sweeps serial (1).
    /// `N_Lap` grows by the swept fraction of the fine grid, weighted by stencil
    /// width relative to the five-point stencil.
    pub fn record_sweep(&mut self, kind: LevelKind, stencil_points: usize, cells: usize, fine_cells_total: usize) {
        let c = &mut self.current;
        match kind {
            LevelKind::Fine => {
                c.i_f += 1;
                c.ncc_f += 2;
            }
            LevelKind::Coarse => {
                c.i_c += 1;
                c.ncc_c += 1;
            }
        }
        c.n_lap += (cells as f64 / fine_cells_total as f64) * (stencil_points as f64 / 5.0);
    }

    pub fn record_restriction(&mut self) {
        self.current.restrictions += 1;
    }

    pub fn record_prolongation(&mut self) {
        self.current.prolongations += 1;
    }

    pub fn set_residual(&mut self, residual: f64) {
        self.current.residual_final = residual;
    }

    /// The open row.
    pub fn current(&self) -> &StepMetrics {
        &self.current
    }

    /// Closes the current step and opens the next one.
    pub fn close_timestep(&mut self) -> StepMetrics {
        let mut row = self.current;
        row.step = self.rows.len();
        self.rows.push(row);
        self.current = StepMetrics {
            step: self.rows.len(),
            ..StepMetrics::default()
        };
        row
    }

    pub fn rows(&self) -> &[StepMetrics] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Mean counters over rows `window` (clamped to the recorded range).
    pub fn summary(&self, window: std::ops::Range<usize>) -> MetricsSummary {
        let end = window.end.min(self.rows.len());
        let start = window.start.min(end);
        MetricsSummary::from_rows(&self.rows[start..end])
    }
}

/// Per-step means over a window of rows.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MetricsSummary {
    pub steps: usize,
    pub i_f: f64,
    pub i_c: f64,
    pub ncc_f: f64,
    pub ncc_c: f64,
    pub ncc_t: f64,
    pub n_lap: f64,
    pub restrictions: f64,
    pub prolongations: f64,
    pub max_residual_final: f64,
}

impl MetricsSummary {
    pub fn from_rows(rows: &[StepMetrics]) -> Self {
        let n = rows.len();
        if n == 0 {
            return MetricsSummary::default();
        }
        let mean = |f: &dyn Fn(&StepMetrics) -> f64| rows.iter().map(f).sum::<f64>() / n as f64;
        MetricsSummary {
            steps: n,
            i_f: mean(&|r| r.i_f as f64),
            i_c: mean(&|r| r.i_c as f64),
            ncc_f: mean(&|r| r.ncc_f as f64),
            ncc_c: mean(&|r| r.ncc_c as f64),
            ncc_t: mean(&|r| r.ncc_t() as f64),
            n_lap: mean(&|r| r.n_lap),
            restrictions: mean(&|r| r.restrictions as f64),
            prolongations: mean(&|r| r.prolongations as f64),
            max_residual_final: rows.iter().map(|r| r.residual_final).fold(0.0, f64::max),
        }
    }

    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "mean_I_f = {}", self.i_f);
        let _ = writeln!(s, "mean_I_c = {}", self.i_c);
        let _ = writeln!(s, "mean_NCC_f = {}", self.ncc_f);
        let _ = writeln!(s, "mean_NCC_c = {}", self.ncc_c);
        let _ = writeln!(s, "mean_NCC_t = {}", self.ncc_t);
        let _ = writeln!(s, "mean_N_Lap = {}", self.n_lap);
        let _ = writeln!(s, "mean_restrictions = {}", self.restrictions);
        let _ = writeln!(s, "mean_prolongations = {}", self.prolongations);
        let _ = writeln!(s, "max_residual_final = {:e}", self.max_residual_final);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fine_sweep_counts_one_laplacian() {
        let mut m = RunMetrics::new();
        m.record_sweep(LevelKind::Fine, 5, 1000, 1000);
        assert_eq!(m.current().n_lap, 1.0);
        assert_eq!(m.current().ncc_f, 2);
    }

    #[test]
    fn coarse_nine_point_sweep_weight() {
        let mut m = RunMetrics::new();
        // tile 16: one coarse cell per 256 fine cells
        m.record_sweep(LevelKind::Coarse, 9, 4, 1024);
        assert!((m.current().n_lap - 0.00703125).abs() < 1e-15);
        assert_eq!(m.current().ncc_c, 1);
    }

    #[test]
    fn ncc_total() {
        let mut m = RunMetrics::new();
        for _ in 0..10 {
            m.record_sweep(LevelKind::Fine, 5, 64, 64);
        }
        for _ in 0..8 {
            m.record_sweep(LevelKind::Coarse, 9, 4, 64);
        }
        let row = m.close_timestep();
        assert_eq!(row.ncc_t(), 28);
        assert_eq!((row.i_f, row.i_c), (10, 8));
    }

    #[test]
    fn zero_step_and_csv_layout() {
        let mut m = RunMetrics::new();
        let row = m.close_timestep();
        assert_eq!(row.csv_row(), "0,0,0,0,0,0,0,0,0,0e0");
        for _ in 0..999 {
            m.record_sweep(LevelKind::Fine, 5, 4, 4);
            m.close_timestep();
        }
        let csv = m.to_csv();
        assert_eq!(csv.lines().count(), 1001);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(m.rows()[5].step, 5);
    }

    #[test]
    fn summary_means_match_offline_recomputation() {
        let mut m = RunMetrics::new();
        for s in 0..20 {
            for _ in 0..s % 7 {
                m.record_sweep(LevelKind::Fine, 5, 16, 16);
            }
            for _ in 0..s % 3 {
                m.record_sweep(LevelKind::Coarse, 9, 1, 16);
            }
            m.close_timestep();
        }
        let sum = m.summary(5..20);
        let csv = m.to_csv();
        let rows: Vec<Vec<f64>> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        let window = &rows[5..20];
        let mean = |c: usize| window.iter().map(|r| r[c]).sum::<f64>() / 15.0;
        assert!((sum.ncc_t - mean(5)).abs() < 1e-12);
        assert!((sum.n_lap - mean(6)).abs() < 1e-12);
        assert!((sum.i_f - mean(1)).abs() < 1e-12);
    }
}
