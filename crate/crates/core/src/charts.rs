//! Local automorphisms `pi^{-1} o ftilde o pi` on small charts, analytic
//! continuation of their root branches along loops, and loops whose
//! monodromy shows that a non-extendible `ftilde` has no global lift.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ball::BallAutomorphism;
use crate::domain::PseudoEllipsoid;
use crate::error::{Error, Locus, Result};
use crate::json;
use crate::lift::check_extendible;
use crate::matrix::{norm, ComplexMatrix, ONE, ZERO};
use crate::poly;

/// Distance below which a loop point counts as lying on a branch locus.
pub const LOCUS_TOL: f64 = 1e-8;
pub const DEFAULT_STEPS: usize = 256;
pub const MAX_STEPS: usize = 1 << 16;
/// Vertices of the circular witness loops.
const LOOP_VERTICES: usize = 128;

/// `f = pi^{-1} o ftilde o pi` near `base`, with a chosen branch of every
/// tail root.
#[derive(Debug, Clone)]
pub struct LocalAutomorphismChart {
    domain: PseudoEllipsoid,
    ftilde: BallAutomorphism,
    base: Vec<Complex64>,
    radius: f64,
    /// Root values at `base`, by tail position.
    branch_state: Vec<Complex64>,
}

/// Homogeneous image `M (pi(z), 1)`.
fn homogeneous_image(domain: &PseudoEllipsoid, ftilde: &BallAutomorphism, z: &[Complex64]) -> Vec<Complex64> {
    let mut h = domain.covering_map(z);
    h.push(ONE);
    ftilde.matrix().mul_vec(&h)
}

/// `ftilde(pi(z))` in affine coordinates.
fn image(domain: &PseudoEllipsoid, ftilde: &BallAutomorphism, z: &[Complex64]) -> Result<Vec<Complex64>> {
    let h = homogeneous_image(domain, ftilde, z);
    let last = h[domain.n()];
    if last.norm() < 1e-14 {
        return Err(Error::NumericalDegeneracy("image denominator vanishes".into()));
    }
    Ok(h[..domain.n()].iter().map(|w| w / last).collect())
}

/// First locus that `z` lies on, as (locus, coordinate).
fn locus_at(domain: &PseudoEllipsoid, w: &[Complex64], z: &[Complex64]) -> Option<(Locus, usize)> {
    for i in domain.tail_indices() {
        if z[i].norm() <= LOCUS_TOL {
            return Some((Locus::CoveringBranch, i));
        }
    }
    for i in domain.tail_indices() {
        if w[i].norm() <= LOCUS_TOL {
            return Some((Locus::ImageBranch, i));
        }
    }
    None
}

fn principal_root(w: Complex64, p: u32) -> Complex64 {
    Complex64::from_polar(w.norm().powf(1.0 / p as f64), w.arg() / p as f64)
}

/// The `p`-th root of `w` closest to `prev`.
fn nearest_root(w: Complex64, p: u32, prev: Complex64) -> Complex64 {
    let r0 = principal_root(w, p);
    (0..p)
        .map(|k| r0 * Complex64::from_polar(1.0, TAU * k as f64 / p as f64))
        .min_by(|a, b| (a - prev).norm().total_cmp(&(b - prev).norm()))
        .expect("p >= 1")
}

pub fn make_chart(
    domain: &PseudoEllipsoid,
    ftilde: &BallAutomorphism,
    base: &[Complex64],
    radius: f64,
) -> Result<LocalAutomorphismChart> {
    let n = domain.n();
    if ftilde.n() != n || base.len() != n {
        return Err(Error::invalid("dimension mismatch between domain, automorphism and base"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("chart radius must be positive"));
    }
    if base.iter().any(|z| !z.is_finite()) || domain.rho(base) > 1e-12 {
        return Err(Error::invalid("chart base must lie in the closed domain"));
    }
    for i in domain.tail_indices() {
        let b = base[i].norm();
        if b <= LOCUS_TOL || b <= radius {
            return Err(Error::ChartInvalid {
                locus: Locus::CoveringBranch,
                index: i + 1,
                detail: format!("|z_{}| = {b:.3e} within radius {radius:.3e}", i + 1),
            });
        }
    }

    // Each numerator sum_l M_il pi(z)_l + M_in moves by at most
    // r sum_l |M_il| q_l (|base_l| + r)^{q_l - 1} over the chart ball.
    let h = homogeneous_image(domain, ftilde, base);
    let m = ftilde.matrix();
    for i in domain.tail_indices() {
        let bound: f64 = (0..n)
            .map(|l| {
                let q = domain.exponent_of(l);
                m[(i, l)].norm() * q as f64 * (base[l].norm() + radius).powi(q as i32 - 1)
            })
            .sum::<f64>()
            * radius;
        let value = h[i].norm();
        if value <= bound || value <= LOCUS_TOL * h[n].norm() {
            return Err(Error::ChartInvalid {
                locus: Locus::ImageBranch,
                index: i + 1,
                detail: format!("numerator {value:.3e} not above its variation bound {bound:.3e}"),
            });
        }
    }

    let w = image(domain, ftilde, base)?;
    let branch_state = domain
        .tail_indices()
        .map(|i| principal_root(w[i], domain.exponent_of(i)))
        .collect();
    Ok(LocalAutomorphismChart {
        domain: domain.clone(),
        ftilde: ftilde.clone(),
        base: base.to_vec(),
        radius,
        branch_state,
    })
}

/// Branch tracking state along a path.
struct Track {
    roots: Vec<Complex64>,
    images: Vec<Complex64>,
    accumulated: Vec<f64>,
}

impl LocalAutomorphismChart {
    pub fn domain(&self) -> &PseudoEllipsoid {
        &self.domain
    }

    pub fn ftilde(&self) -> &BallAutomorphism {
        &self.ftilde
    }

    pub fn base(&self) -> &[Complex64] {
        &self.base
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn branch_state(&self) -> &[Complex64] {
        &self.branch_state
    }

    /// Continues the base branches along the polyline `path`, which must
    /// start at the base.
    fn track(&self, path: &[Vec<Complex64>]) -> Result<Track> {
        let head = self.domain.head();
        let w0 = image(&self.domain, &self.ftilde, &self.base)?;
        let mut state = Track {
            roots: self.branch_state.clone(),
            images: w0[head..].to_vec(),
            accumulated: vec![0.0; self.domain.k()],
        };
        for (step, z) in path.iter().enumerate().skip(1) {
            let w = image(&self.domain, &self.ftilde, z)?;
            if let Some((locus, index)) = locus_at(&self.domain, &w, z) {
                return Err(Error::LocusHit {
                    locus,
                    index: index + 1,
                    point: step,
                });
            }
            for (j, i) in self.domain.tail_indices().enumerate() {
                let jump = (w[i] / state.images[j]).arg();
                if jump.abs() >= FRAC_PI_2 {
                    return Err(Error::Resolution { step, jump });
                }
                state.accumulated[j] += jump;
                state.roots[j] = nearest_root(w[i], self.domain.exponent_of(i), state.roots[j]);
                state.images[j] = w[i];
            }
        }
        Ok(state)
    }

    /// `f(z)` on the branch continued along the segment from the base.
    pub fn eval_local(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.domain.n() {
            return Err(Error::invalid("point has the wrong dimension"));
        }
        let offset: Vec<Complex64> = z.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        if norm(&offset) >= self.radius {
            return Err(Error::invalid("point outside the chart ball"));
        }
        if self.domain.rho(z) > 1e-12 {
            return Err(Error::invalid("point outside the closed domain"));
        }
        let mut segments = 16;
        loop {
            let path: Vec<Vec<Complex64>> = (0..=segments)
                .map(|s| {
                    let t = s as f64 / segments as f64;
                    self.base.iter().zip(&offset).map(|(b, d)| b + d * t).collect()
                })
                .collect();
            match self.track(&path) {
                Ok(track) => {
                    let w = image(&self.domain, &self.ftilde, z)?;
                    let mut out = w[..self.domain.head()].to_vec();
                    out.extend(track.roots);
                    return Ok(out);
                }
                Err(Error::Resolution { .. }) if segments < MAX_STEPS => segments *= 2,
                Err(e) => return Err(e),
            }
        }
    }
}

/// Monodromy of one tail root around a closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonodromyResult {
    /// 0-based coordinate index of the tail root.
    #[serde(skip)]
    pub tail_index: usize,
    #[serde(serialize_with = "json::ser_complex")]
    pub factor: Complex64,
    pub winding: i64,
}

impl MonodromyResult {
    pub fn is_trivial(&self) -> bool {
        (self.factor - ONE).norm() < 1e-6
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "tail_index": self.tail_index + 1,
            "factor": json::pair(self.factor),
            "winding": self.winding,
        })
    }
}

/// `steps + 1` points evenly spaced in arclength along the closed polyline.
fn resample(polyline: &[Vec<Complex64>], steps: usize) -> Vec<Vec<Complex64>> {
    let seg_len: Vec<f64> = polyline
        .windows(2)
        .map(|w| norm(&w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect::<Vec<_>>()))
        .collect();
    let total: f64 = seg_len.iter().sum();
    let mut out = Vec::with_capacity(steps + 1);
    let mut seg = 0;
    let mut start = 0.0;
    for s in 0..steps {
        let target = total * s as f64 / steps as f64;
        while seg + 1 < seg_len.len() && start + seg_len[seg] <= target {
            start += seg_len[seg];
            seg += 1;
        }
        let t = if seg_len[seg] > 0.0 { ((target - start) / seg_len[seg]).clamp(0.0, 1.0) } else { 0.0 };
        out.push(polyline[seg].iter().zip(&polyline[seg + 1]).map(|(a, b)| a + (b - a) * t).collect());
    }
    out.push(polyline[0].clone());
    out
}

/// Continues every tail root once around `polyline`, discretized into
/// `steps` segments of equal arclength.
pub fn continue_along_loop(
    chart: &LocalAutomorphismChart,
    polyline: &[Vec<Complex64>],
    steps: usize,
) -> Result<Vec<MonodromyResult>> {
    let n = chart.domain.n();
    if steps == 0 {
        return Err(Error::invalid("steps must be at least 1"));
    }
    if polyline.len() < 2 || polyline.iter().any(|z| z.len() != n) {
        return Err(Error::invalid("loop needs at least two points of the right dimension"));
    }
    let first = &polyline[0];
    let last = &polyline[polyline.len() - 1];
    let gap = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if gap(first, &chart.base) > 1e-12 || gap(last, &chart.base) > 1e-12 {
        return Err(Error::invalid("loop must start and end at the chart base"));
    }
    if let Some(i) = polyline.iter().position(|z| chart.domain.rho(z) > 1e-12) {
        return Err(Error::invalid(format!("loop vertex {i} lies outside the closed domain")));
    }

    let path = resample(polyline, steps);
    let track = chart.track(&path)?;
    Ok(chart
        .domain
        .tail_indices()
        .enumerate()
        .map(|(j, i)| MonodromyResult {
            tail_index: i,
            factor: track.roots[j] / chart.branch_state[j],
            winding: (track.accumulated[j] / TAU).round() as i64,
        })
        .collect())
}

/// [`continue_along_loop`] starting at `initial` steps and doubling on
/// resolution errors up to `cap`. Returns the results and the steps used.
pub fn continue_with_refinement(
    chart: &LocalAutomorphismChart,
    polyline: &[Vec<Complex64>],
    initial: usize,
    cap: usize,
) -> Result<(Vec<MonodromyResult>, usize)> {
    let mut steps = initial.clamp(1, cap.max(1));
    loop {
        match continue_along_loop(chart, polyline, steps) {
            Ok(r) => return Ok((r, steps)),
            Err(Error::Resolution { .. }) if steps < cap => steps = (steps * 2).min(cap),
            Err(e) => return Err(e),
        }
    }
}

/// Closed `vertices`-gon around `center` in coordinate `coord`, starting
/// at angle 0 and running counterclockwise.
pub fn circle_loop(center: &[Complex64], coord: usize, radius: f64, vertices: usize) -> Vec<Vec<Complex64>> {
    (0..=vertices)
        .map(|v| {
            let mut z = center.to_vec();
            z[coord] += Complex64::from_polar(radius, TAU * (v % vertices) as f64 / vertices as f64);
            z
        })
        .collect()
}

/// Search limits for [`non_extendibility_witness_with`].
#[derive(Debug, Clone)]
pub struct WitnessConfig {
    pub initial_steps: usize,
    pub max_steps: usize,
    /// Random anchor points tried after the structured ones.
    pub random_anchors: usize,
    pub seed: u64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        Self {
            initial_steps: DEFAULT_STEPS,
            max_steps: MAX_STEPS,
            random_anchors: 64,
            seed: 0,
        }
    }
}

/// A loop in the domain along which some tail root of
/// `pi^{-1} o ftilde o pi` does not return to itself.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub chart: LocalAutomorphismChart,
    /// Point where the encircled radicand vanishes.
    pub center: Vec<Complex64>,
    /// 0-based coordinate varied along the loop.
    pub coordinate: usize,
    pub loop_points: Vec<Vec<Complex64>>,
    pub steps: usize,
    pub monodromy: MonodromyResult,
    pub all: Vec<MonodromyResult>,
}

impl WitnessReport {
    pub fn to_json(&self) -> serde_json::Value {
        let pairs = |v: &[Complex64]| v.iter().map(|z| json::pair(*z)).collect::<Vec<_>>();
        serde_json::json!({
            "tail_index": self.monodromy.tail_index + 1,
            "factor": json::pair(self.monodromy.factor),
            "winding": self.monodromy.winding,
            "coordinate": self.coordinate + 1,
            "center": pairs(&self.center),
            "chart": {
                "base": pairs(&self.chart.base),
                "radius": self.chart.radius,
                "branch_state": pairs(&self.chart.branch_state),
            },
            "steps": self.steps,
            "loop": self.loop_points.iter().map(|z| pairs(z)).collect::<Vec<_>>(),
            "monodromy": self.all.iter().map(|m| m.to_json()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone)]
pub enum WitnessOutcome {
    /// `ftilde` extends; there is nothing to witness.
    None,
    Found(Box<WitnessReport>),
    Inconclusive(String),
}

pub fn non_extendibility_witness(domain: &PseudoEllipsoid, ftilde: &BallAutomorphism) -> Result<WitnessOutcome> {
    non_extendibility_witness_with(domain, ftilde, &WitnessConfig::default())
}

/// Points of the domain through which candidate complex lines are drawn.
fn anchors(domain: &PseudoEllipsoid, m: &ComplexMatrix, cfg: &WitnessConfig) -> Vec<Vec<Complex64>> {
    let n = domain.n();
    let generic = |i: usize| Complex64::from_polar(0.3, 0.7 + 0.9 * i as f64);
    let mut out = Vec::new();
    out.push((0..n).map(|i| if i < domain.head() { ZERO } else { generic(i) }).collect::<Vec<_>>());

    // Lifts of the point of {M_i . (u, 1) = 0} closest to the origin.
    for i in domain.tail_indices() {
        let a = &m.row(i)[..n];
        let a2: f64 = a.iter().map(|x| x.norm_sqr()).sum();
        if a2 == 0.0 {
            continue;
        }
        let b = m[(i, n)];
        let z: Vec<Complex64> = (0..n)
            .map(|l| {
                let u = -b * a[l].conj() / a2;
                let q = domain.exponent_of(l);
                if q == 1 {
                    u
                } else if u.norm() < 1e-6 {
                    generic(l) * 0.2
                } else {
                    principal_root(u, q)
                }
            })
            .collect();
        out.push(z);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_anchors {
        out.push(domain.interior_point_with(&mut rng));
    }
    out.retain(|z| domain.rho(z) < 0.0);
    out
}

/// Distinct roots with multiplicities, in a deterministic order: closest to
/// `near` first, ties broken toward larger imaginary part.
fn clustered_roots(coeffs: &[Complex64], near: Complex64) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for r in poly::roots(coeffs) {
        match clusters.iter_mut().find(|(c, _)| (c - r).norm() < 1e-7) {
            Some(c) => c.1 += 1,
            None => clusters.push((r, 1)),
        }
    }
    let key = |z: &Complex64| ((z - near).norm() * 1e9).round() as i64;
    clusters.sort_by(|a, b| key(&a.0).cmp(&key(&b.0)).then(b.0.im.total_cmp(&a.0.im)).then(b.0.re.total_cmp(&a.0.re)));
    clusters
}

enum Attempt {
    Found(Box<WitnessReport>),
    Unresolved,
    Failed,
}

/// Searches for a loop with nontrivial monodromy when `ftilde` is rejected
/// by [`check_extendible`].
///
/// Along a complex line through an anchor point in coordinate `m`, the
/// numerator of tail image `i` is `M_im x^{q_m} + C`. A zero of order `mu`
/// that avoids the other loci is circled by a small loop, and the `p_i`-th
/// root picks up `exp(2 pi i mu / p_i)`.
pub fn non_extendibility_witness_with(
    domain: &PseudoEllipsoid,
    ftilde: &BallAutomorphism,
    cfg: &WitnessConfig,
) -> Result<WitnessOutcome> {
    if cfg.max_steps == 0 || cfg.initial_steps == 0 {
        return Err(Error::invalid("step counts must be at least 1"));
    }
    if check_extendible(domain, ftilde)?.extendible {
        return Ok(WitnessOutcome::None);
    }
    let n = domain.n();
    let m = ftilde.matrix();
    let mut unresolved = false;
    for anchor in anchors(domain, m, cfg) {
        let pi_a = domain.covering_map(&anchor);
        for i in domain.tail_indices() {
            let p = domain.exponent_of(i);
            for coord in 0..n {
                let lead = m[(i, coord)];
                if lead.norm() < 1e-12 {
                    continue;
                }
                let q = domain.exponent_of(coord) as usize;
                let rest: Complex64 = (0..n).filter(|&l| l != coord).map(|l| m[(i, l)] * pi_a[l]).sum::<Complex64>() + m[(i, n)];
                let mut coeffs = vec![ZERO; q + 1];
                coeffs[0] = rest;
                coeffs[q] = lead;
                let roots = clustered_roots(&coeffs, anchor[coord]);
                for (idx, &(x0, mult)) in roots.iter().enumerate() {
                    if mult % p as usize == 0 {
                        continue;
                    }
                    let mut center = anchor.clone();
                    center[coord] = x0;
                    match try_loop(domain, ftilde, cfg, &center, coord, i, &roots, idx) {
                        Attempt::Found(r) => return Ok(WitnessOutcome::Found(r)),
                        Attempt::Unresolved => unresolved = true,
                        Attempt::Failed => {}
                    }
                }
            }
        }
    }
    Ok(WitnessOutcome::Inconclusive(if unresolved {
        format!("loops could not be resolved within {} steps", cfg.max_steps)
    } else {
        "no admissible loop found".into()
    }))
}

#[allow(clippy::too_many_arguments)]
fn try_loop(
    domain: &PseudoEllipsoid,
    ftilde: &BallAutomorphism,
    cfg: &WitnessConfig,
    center: &[Complex64],
    coord: usize,
    tail: usize,
    roots: &[(Complex64, usize)],
    idx: usize,
) -> Attempt {
    if domain.rho(center) >= -1e-9 {
        return Attempt::Failed;
    }
    let x0 = roots[idx].0;
    let is_tail = coord >= domain.head();
    if domain.tail_indices().any(|l| l != coord && center[l].norm() < 1e-6) {
        return Attempt::Failed;
    }
    let mut radius: f64 = 0.1;
    for (k, &(other, _)) in roots.iter().enumerate() {
        if k != idx {
            radius = radius.min(0.5 * (other - x0).norm());
        }
    }
    if is_tail && x0.norm() > 1e-9 {
        radius = radius.min(0.25 * x0.norm());
    }
    let mut unresolved = false;
    for _ in 0..12 {
        let polyline = circle_loop(center, coord, radius, LOOP_VERTICES);
        if polyline.iter().all(|z| domain.rho(z) < 0.0) {
            let mut chart_radius = 0.25 * radius;
            let chart = loop {
                match make_chart(domain, ftilde, &polyline[0], chart_radius) {
                    Ok(c) => break Some(c),
                    Err(Error::ChartInvalid { .. }) if chart_radius > 1e-6 => chart_radius *= 0.5,
                    Err(_) => break None,
                }
            };
            if let Some(chart) = chart {
                match continue_with_refinement(&chart, &polyline, cfg.initial_steps, cfg.max_steps) {
                    Ok((all, steps)) => {
                        if let Some(mono) = all.iter().find(|r| r.tail_index == tail && !r.is_trivial()) {
                            return Attempt::Found(Box::new(WitnessReport {
                                chart,
                                center: center.to_vec(),
                                coordinate: coord,
                                loop_points: polyline,
                                steps,
                                monodromy: *mono,
                                all,
                            }));
                        }
                    }
                    Err(Error::Resolution { .. }) => unresolved = true,
                    Err(_) => {}
                }
            }
        }
        radius *= 0.5;
    }
    if unresolved {
        Attempt::Unresolved
    } else {
        Attempt::Failed
    }
}

/// Expected factor for a zero of order `mult` of the radicand of a `p`-th root.
pub fn expected_factor(mult: i64, p: u32) -> Complex64 {
    Complex64::from_polar(1.0, TAU * mult as f64 / p as f64)
}
