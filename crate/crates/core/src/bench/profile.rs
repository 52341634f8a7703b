//! Performance profiles and their SVG rendering.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::Error;

use super::{Metric, MetricsTable};

/// Staircase `τ ↦ ρ_s(τ)` of one solver: `steps` holds every distinct finite
/// ratio with the fraction of problems solved within it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileCurve {
    pub solver: String,
    pub steps: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// `ρ_s(τ)`.
    pub fn rho(&self, tau: f64) -> f64 {
        self.steps
            .iter()
            .take_while(|(r, _)| *r <= tau)
            .last()
            .map_or(0.0, |(_, f)| *f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSet {
    pub metric: String,
    pub solvers: Vec<String>,
    /// Problems that entered the profile (at least one defined value).
    pub problems: Vec<usize>,
    /// `r_{p,s}` for every profiled problem; `+∞` when undefined.
    pub ratios: Vec<Vec<f64>>,
    pub curves: Vec<ProfileCurve>,
}

/// Profile of `values` (`problems × solvers`, `None` when undefined).
///
/// `r = (t + shift)/(min + shift)`. When the shifted minimum is zero a solver
/// gets `r = 1` if its shifted value is zero too and `+∞` otherwise. Problems
/// without any defined value are left out.
pub fn performance_profile(
    metric: &str,
    solvers: &[String],
    values: &[Vec<Option<f64>>],
    shift: f64,
) -> Result<ProfileSet, Error> {
    let mut problems = Vec::new();
    let mut ratios = Vec::new();
    for (p, row) in values.iter().enumerate() {
        if row.len() != solvers.len() {
            return Err(Error::Experiment(format!(
                "problem {p} has {} values for {} solvers",
                row.len(),
                solvers.len()
            )));
        }
        let defined = |v: &Option<f64>| v.filter(|t| t.is_finite() && *t >= 0.0);
        let Some(best) = row.iter().filter_map(defined).reduce(f64::min) else {
            continue;
        };
        let base = best + shift;
        let r = row
            .iter()
            .map(|v| match defined(v) {
                None => f64::INFINITY,
                Some(t) if base == 0.0 => {
                    if t + shift == 0.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                }
                Some(t) => (t + shift) / base,
            })
            .collect();
        problems.push(p);
        ratios.push(r);
    }
    if problems.is_empty() {
        return Err(Error::Experiment(format!("metric `{metric}` is undefined on every problem")));
    }
    let n = problems.len() as f64;
    let curves = solvers
        .iter()
        .enumerate()
        .map(|(s, name)| {
            let mut rs: Vec<f64> = ratios.iter().map(|row: &Vec<f64>| row[s]).filter(|r| r.is_finite()).collect();
            rs.sort_by(f64::total_cmp);
            let mut steps: Vec<(f64, f64)> = Vec::new();
            for (i, r) in rs.iter().enumerate() {
                let frac = (i + 1) as f64 / n;
                match steps.last_mut() {
                    Some(last) if last.0 == *r => last.1 = frac,
                    _ => steps.push((*r, frac)),
                }
            }
            ProfileCurve {
                solver: name.clone(),
                steps,
            }
        })
        .collect();
    Ok(ProfileSet {
        metric: metric.to_string(),
        solvers: solvers.to_vec(),
        problems,
        ratios,
        curves,
    })
}

/// Profile of one table metric. Nonconvergence counts are shifted by one so
/// that zero counts stay comparable.
pub fn profile_from_table(table: &MetricsTable, metric: Metric) -> Result<ProfileSet, Error> {
    let solvers: Vec<String> = table.algorithms.iter().map(|a| a.to_string()).collect();
    let shift = if metric == Metric::Nonconv { 1.0 } else { 0.0 };
    performance_profile(metric.as_str(), &solvers, &table.values(metric), shift)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];
const DASHES: [&str; 4] = ["", "6 3", "2 2", "8 3 2 3"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Staircase plot with a `log₂ τ` axis and one legend entry per solver. The
/// output depends only on the profile.
pub fn render_svg(profile: &ProfileSet) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const L: f64 = 60.0;
    const R: f64 = 20.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;
    let tau_max = profile
        .curves
        .iter()
        .flat_map(|c| c.steps.iter().map(|(r, _)| *r))
        .fold(1.0_f64, f64::max);
    let x_max = tau_max.log2().ceil().max(1.0);
    let px = |tau: f64| L + tau.log2() / x_max * (W - L - R);
    let py = |rho: f64| H - B - rho * (H - T - B);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(&profile.metric)
    );
    // Axes and grid.
    let _ = writeln!(
        s,
        r#"<path d="M{L:.2} {:.2} V{:.2} H{:.2}" stroke="black" fill="none"/>"#,
        T,
        H - B,
        W - R
    );
    let n_ticks = x_max as usize;
    let step = n_ticks.div_ceil(10).max(1);
    for k in (0..=n_ticks).step_by(step) {
        let x = px(2f64.powi(k as i32));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            T,
            H - B,
            H - B + 16.0,
            2f64.powi(k as i32)
        );
    }
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r##"<line x1="{L:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"##,
            W - R,
            L - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">τ (log₂ scale)</text>"#,
        (L + W - R) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">ρ(τ)</text>"#,
        (T + H - B) / 2.0,
        (T + H - B) / 2.0
    );

    for (i, c) in profile.curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = DASHES[i % DASHES.len()];
        let mut d = format!("M{:.2} {:.2}", px(1.0), py(c.rho(1.0)));
        for &(r, f) in c.steps.iter().filter(|(r, _)| *r > 1.0) {
            let _ = write!(d, " H{:.2} V{:.2}", px(r), py(f));
        }
        let _ = write!(d, " H{:.2}", px(2f64.powf(x_max)));
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let _ = writeln!(s, r#"<path d="{d}" stroke="{color}" stroke-width="2" fill="none"{dash_attr}/>"#);
        let ly = T + 14.0 + 18.0 * i as f64;
        let lx = W - R - 110.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"{dash_attr}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            ly,
            lx + 28.0,
            ly,
            lx + 34.0,
            ly + 4.0,
            escape(&c.solver)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(path: &Path, profile: &ProfileSet) -> Result<(), Error> {
    if profile.curves.is_empty() {
        return Err(Error::Experiment("empty profile, nothing to plot".into()));
    }
    std::fs::write(path, render_svg(profile)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    #[test]
    fn single_problem_ratios() {
        let p = performance_profile("m", &names(3), &[vec![Some(2.0), Some(4.0), Some(8.0)]], 0.0).unwrap();
        assert_eq!(p.ratios, vec![vec![1.0, 2.0, 4.0]]);
        assert_eq!(p.curves[0].rho(1.0), 1.0);
        assert_eq!(p.curves[1].rho(1.99), 0.0);
        assert_eq!(p.curves[1].rho(2.0), 1.0);
    }

    #[test]
    fn undefined_values_plateau() {
        let v = vec![vec![Some(1.0), Some(1.0)], vec![None, Some(3.0)]];
        let p = performance_profile("m", &names(2), &v, 0.0).unwrap();
        assert_eq!(p.curves[0].rho(1e9), 0.5);
        assert_eq!(p.curves[1].rho(1.0), 1.0);
    }

    #[test]
    fn zero_minimum_and_shift() {
        let v = vec![vec![Some(0.0), Some(2.0)]];
        let p = performance_profile("m", &names(2), &v, 0.0).unwrap();
        assert_eq!(p.ratios[0], vec![1.0, f64::INFINITY]);
        let p = performance_profile("nonconv", &names(2), &v, 1.0).unwrap();
        assert_eq!(p.ratios[0], vec![1.0, 3.0]);
    }

    #[test]
    fn all_undefined_is_an_error() {
        assert!(performance_profile("m", &names(2), &[vec![None, None]], 0.0).is_err());
        // A problem without values is dropped, the rest still profile.
        let p = performance_profile("m", &names(1), &[vec![None], vec![Some(1.0)]], 0.0).unwrap();
        assert_eq!(p.problems, vec![1]);
    }

    #[test]
    fn svg_is_deterministic() {
        let v = vec![vec![Some(1.0), Some(2.0)], vec![Some(5.0), Some(1.0)]];
        let p = performance_profile("iterations", &names(2), &v, 0.0).unwrap();
        let a = render_svg(&p);
        assert_eq!(a, render_svg(&p));
        assert_eq!(a.matches("stroke-width=\"2\" fill=\"none\"").count(), 2);
        assert!(a.starts_with("<svg"));
    }
}
