//! Pipeline benchmark harness: warm-up plus averaged timed runs per thread
//! count, with per-stage shares and speedups relative to the 1-thread row.

use std::time::Instant;

use anyhow::Result;
use surfacenets::extract::ExtractOptions;
use surfacenets::{
    extract_with_stats, smooth, triangulate, LabeledVolume, SelectedLabelSet, SmoothingParams,
    TriangulationStrategy,
};

pub const CSV_HEADER: &str = "threads,repeats,pass1_s,pass2_s,pass3_s,pass4_s,extract_s,\
smooth_s,triangulate_s,total_s,pass1_pct,pass2_pct,pass3_pct,pass4_pct,smooth_pct,\
triangulate_pct,points,triangles,speedup";

#[derive(Debug, Clone, Copy, Default)]
struct StageTimes {
    pass_s: [f64; 4],
    smooth_s: f64,
    triangulate_s: f64,
}

impl StageTimes {
    fn add(&mut self, other: &StageTimes) {
        for p in 0..4 {
            self.pass_s[p] += other.pass_s[p];
        }
        self.smooth_s += other.smooth_s;
        self.triangulate_s += other.triangulate_s;
    }

    fn scale(&mut self, by: f64) {
        for p in 0..4 {
            self.pass_s[p] *= by;
        }
        self.smooth_s *= by;
        self.triangulate_s *= by;
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub threads: usize,
    pub repeats: u32,
    pub pass_s: [f64; 4],
    pub smooth_s: f64,
    pub triangulate_s: f64,
    pub points: u64,
    pub triangles: u64,
    /// 1-thread total over this row's total; None without a 1-thread row.
    pub speedup: Option<f64>,
}

impl BenchRow {
    pub fn extract_s(&self) -> f64 {
        self.pass_s.iter().sum()
    }

    pub fn total_s(&self) -> f64 {
        self.extract_s() + self.smooth_s + self.triangulate_s
    }

    /// Stage shares of total time, in percent: pass1..4, smooth,
    /// triangulate. Sums to 100 up to rounding.
    pub fn percentages(&self) -> [f64; 6] {
        let total = self.total_s();
        let share = |s: f64| if total > 0.0 { 100.0 * s / total } else { 0.0 };
        [
            share(self.pass_s[0]),
            share(self.pass_s[1]),
            share(self.pass_s[2]),
            share(self.pass_s[3]),
            share(self.smooth_s),
            share(self.triangulate_s),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let pct = r.percentages();
            let speedup = r.speedup.map_or(String::new(), |s| format!("{s:.3}"));
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},\
                 {:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{},{},{}\n",
                r.threads,
                r.repeats,
                r.pass_s[0],
                r.pass_s[1],
                r.pass_s[2],
                r.pass_s[3],
                r.extract_s(),
                r.smooth_s,
                r.triangulate_s,
                r.total_s(),
                pct[0],
                pct[1],
                pct[2],
                pct[3],
                pct[4],
                pct[5],
                r.points,
                r.triangles,
                speedup,
            ));
        }
        out
    }
}

fn run_once(
    vol: &LabeledVolume,
    set: &SelectedLabelSet,
    threads: usize,
    trim: bool,
    params: &SmoothingParams,
    strategy: TriangulationStrategy,
) -> Result<(StageTimes, u64, u64)> {
    let opts = ExtractOptions { threads, trim };
    let (mesh, stats) = extract_with_stats(vol, set, &opts)?;
    let points = mesh.num_points() as u64;

    let t = Instant::now();
    let smoothed = smooth(mesh, params, threads);
    let smooth_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let tri = triangulate(&smoothed, strategy, threads);
    let triangulate_s = t.elapsed().as_secs_f64();

    let times = StageTimes {
        pass_s: [
            stats.passes[0].seconds,
            stats.passes[1].seconds,
            stats.passes[2].seconds,
            stats.passes[3].seconds,
        ],
        smooth_s,
        triangulate_s,
    };
    Ok((times, points, tri.triangles.len() as u64))
}

/// One warm-up run, then `repeat` timed runs per thread count; stage times
/// are arithmetic means over the timed runs.
pub fn run_benchmark(
    vol: &LabeledVolume,
    set: &SelectedLabelSet,
    threads_list: &[usize],
    repeat: u32,
    trim: bool,
    params: &SmoothingParams,
    strategy: TriangulationStrategy,
) -> Result<BenchReport> {
    let mut rows = Vec::new();
    for &threads in threads_list {
        run_once(vol, set, threads, trim, params, strategy)?;
        let mut acc = StageTimes::default();
        let mut points = 0;
        let mut triangles = 0;
        for _ in 0..repeat.max(1) {
            let (times, p, t) = run_once(vol, set, threads, trim, params, strategy)?;
            acc.add(&times);
            points = p;
            triangles = t;
        }
        acc.scale(1.0 / f64::from(repeat.max(1)));
        rows.push(BenchRow {
            threads,
            repeats: repeat.max(1),
            pass_s: acc.pass_s,
            smooth_s: acc.smooth_s,
            triangulate_s: acc.triangulate_s,
            points,
            triangles,
            speedup: None,
        });
    }

    let baseline = rows
        .iter()
        .find(|r| r.threads == 1)
        .map(|r| r.total_s());
    if let Some(base) = baseline {
        for r in &mut rows {
            r.speedup = Some(base / r.total_s());
        }
    }
    Ok(BenchReport { rows })
}
