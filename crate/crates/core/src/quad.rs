//! Adaptive Gauss-Kronrod quadrature on intervals and on the real line.
//!
//! The engine keeps every panel in a max-heap keyed by its error estimate and
//! bisects the worst one until the global tolerance is met. Panels may live in
//! transformed variables:
//!
//! * near an integrable power singularity `|x - s|^(κ-1)` the substitution
//!   `x = s ± u^(1/κ)` makes the integrand bounded;
//! * algebraically decaying tails are folded onto `(0, 1]` by `x = L v^(-k)`;
//! * oscillating algebraic tails `g(x) cos(ωx)` are summed cycle by cycle and
//!   accelerated with Wynn's epsilon algorithm.
//!
//! Integrands receive a [`Node`] rather than a bare abscissa so that the
//! distance to a singular point is available without cancellation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Relative level below which a stretched-exponential envelope is treated as zero.
const ENVELOPE_FLOOR: f64 = 1e-17;

/// Tolerances and budget for one integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of live panels before giving up.
    pub max_segments: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 0.0, max_segments: 50_000 }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Integration abscissa.
///
/// `x` is the point itself. Inside a singular neighbourhood `anchor` is the
/// singular point and `offset = x - anchor` is known exactly; elsewhere
/// `anchor == x` and `offset == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub anchor: f64,
    pub offset: f64,
}

impl Node {
    pub fn plain(x: f64) -> Self {
        Self { x, anchor: x, offset: 0.0 }
    }

    /// |x - s|, exact when `s` is the anchor of this node.
    pub fn dist(&self, s: f64) -> f64 {
        if self.offset != 0.0 && self.anchor == s {
            self.offset.abs()
        } else {
            (self.x - s).abs()
        }
    }
}

/// Decay model of an integrand on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Envelope {
    /// |f(x)| ≲ exp(-rate |x|^power).
    Stretched { rate: f64, power: f64 },
    /// |f(x)| ≲ (scale / |x|)^power for |x| beyond `scale`; requires power > 1.
    Algebraic { scale: f64, power: f64 },
    /// f is negligible for |x| > reach.
    Compact { reach: f64 },
}

impl Envelope {
    /// Gaussian envelope exp(-(x/scale)^2).
    pub fn gaussian(scale: f64) -> Self {
        Envelope::Stretched { rate: 1.0 / (scale * scale), power: 2.0 }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Envelope::Stretched { rate, power } if rate > 0.0 && power > 0.0 && rate.is_finite() => Ok(()),
            Envelope::Algebraic { scale, power } if scale > 0.0 && power > 1.0 && scale.is_finite() => Ok(()),
            Envelope::Compact { reach } if reach > 0.0 && reach.is_finite() => Ok(()),
            e => domain("quad", format!("invalid envelope {e:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Interval(f64, f64),
    Line(Envelope),
}

/// An integration problem: domain, singular points and hints.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    domain: Domain,
    singular: Vec<f64>,
    kappa: f64,
    breaks: Vec<f64>,
    oscillation: f64,
    panels: usize,
}

impl Problem {
    pub fn interval(a: f64, b: f64) -> Self {
        Self::new(Domain::Interval(a, b))
    }

    pub fn line(envelope: Envelope) -> Self {
        Self::new(Domain::Line(envelope))
    }

    fn new(domain: Domain) -> Self {
        Self { domain, singular: Vec::new(), kappa: 1.0, breaks: Vec::new(), oscillation: 0.0, panels: 0 }
    }

    /// Declare singularities `|x - s|^(kappa - 1)` at `points`, with kappa in (0, 1).
    pub fn singular(mut self, points: &[f64], kappa: f64) -> Self {
        self.singular = points.to_vec();
        self.kappa = kappa;
        self
    }

    /// Extra breakpoints where the integrand has a kink or a sharp feature.
    pub fn breaks(mut self, points: &[f64]) -> Self {
        self.breaks.extend_from_slice(points);
        self
    }

    /// Declare the integrand as g(x) cos(omega x) with g smooth and monotone in the tails.
    pub fn oscillating(mut self, omega: f64) -> Self {
        self.oscillation = omega.abs();
        self
    }

    /// Minimum number of initial panels on each regular piece.
    pub fn panels(mut self, n: usize) -> Self {
        self.panels = n;
        self
    }

    pub fn integrate<F: Fn(Node) -> f64>(&self, f: F, opts: &QuadOptions) -> Result<QuadratureResult> {
        let pieces = self.pieces()?;
        let core = adapt(&f, &pieces.panels, opts)?;
        let mut total = core;
        for &(start, dir) in &pieces.fourier_tails {
            let tail = fourier_tail(&f, start, dir, self.oscillation, opts, total.value)?;
            total.value += tail.value;
            total.error_estimate += tail.error_estimate;
            total.evaluations += tail.evaluations;
        }
        Ok(total)
    }

    fn pieces(&self) -> Result<Pieces> {
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return domain("quad", format!("singular exponent must lie in (0, 1], got {}", self.kappa));
        }
        let mut sing: Vec<f64> = self.singular.clone();
        if sing.iter().any(|s| !s.is_finite()) {
            return domain("quad", "singular points must be finite");
        }
        sing.sort_by(f64::total_cmp);
        if sing.windows(2).any(|w| w[0] == w[1]) {
            return domain("quad", "coincident singular points");
        }

        let (lo, hi, tails) = match self.domain {
            Domain::Interval(a, b) => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return domain("quad", format!("invalid interval [{a}, {b}]"));
                }
                sing.retain(|&s| s >= a && s <= b);
                (a, b, None)
            }
            Domain::Line(env) => {
                env.validate()?;
                let (reach, algebraic) = match env {
                    Envelope::Stretched { rate, power } => {
                        let reach = ((1.0 / ENVELOPE_FLOOR).ln() / rate).powf(1.0 / power);
                        // singular points deep inside the negligible tail are dropped
                        sing.retain(|&s| s.abs() - 1.0 < reach);
                        (reach, None)
                    }
                    Envelope::Algebraic { scale, power } => (8.0 * scale, Some(power)),
                    Envelope::Compact { reach } => {
                        sing.retain(|&s| s.abs() - 1.0 < reach);
                        (reach, None)
                    }
                };
                let far = sing.iter().chain(&self.breaks).fold(0.0_f64, |m, s| m.max(s.abs()));
                let l = reach.max(far + 2.0);
                (-l, l, algebraic.map(|p| (l, p)))
            }
        };

        let mut panels = Vec::new();
        let n = sing.len();
        let mut cursor = lo;
        let span = hi - lo;
        let base = self.panels.max(1);
        let regular = |from: f64, to: f64, panels: &mut Vec<Seed>| {
            if to <= from {
                return;
            }
            let len = to - from;
            let by_len = (8.0 * len / span).ceil() as usize;
            let by_osc = (len * self.oscillation / std::f64::consts::PI).ceil() as usize;
            let count = base.max(by_len).max(by_osc).max(1);
            let mut pts: Vec<f64> = self.breaks.iter().copied().filter(|&p| p > from && p < to).collect();
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let mut edges = vec![from];
            edges.extend(pts);
            edges.push(to);
            for w in edges.windows(2) {
                let sub = ((count as f64) * (w[1] - w[0]) / len).ceil().max(1.0) as usize;
                let h = (w[1] - w[0]) / sub as f64;
                for i in 0..sub {
                    let a = w[0] + i as f64 * h;
                    let b = if i + 1 == sub { w[1] } else { a + h };
                    panels.push(Seed { map: Map::Identity, a, b });
                }
            }
        };
        for i in 0..n {
            let s = sing[i];
            let left_gap = if i == 0 { s - lo } else { 0.5 * (s - sing[i - 1]) };
            let right_gap = if i + 1 == n { hi - s } else { 0.5 * (sing[i + 1] - s) };
            let r_left = left_gap.min(1.0);
            let r_right = right_gap.min(1.0);
            regular(cursor, s - r_left, &mut panels);
            let q = 1.0 / self.kappa;
            for (dir, r) in [(-1.0, r_left), (1.0, r_right)] {
                if r > 0.0 {
                    let umax = r.powf(self.kappa);
                    let map = Map::Singular { anchor: s, dir, q };
                    panels.push(Seed { map, a: 0.0, b: 0.5 * umax });
                    panels.push(Seed { map, a: 0.5 * umax, b: umax });
                }
            }
            cursor = s + r_right;
        }
        regular(cursor, hi, &mut panels);

        let mut fourier_tails = Vec::new();
        if let Some((l, power)) = tails {
            if self.oscillation > 0.0 {
                fourier_tails.push((l, 1.0));
                fourier_tails.push((l, -1.0));
            } else {
                let k = 2.0 / (power - 1.0);
                for dir in [1.0, -1.0] {
                    let map = Map::Tail { l, dir, k };
                    panels.push(Seed { map, a: 0.0, b: 0.5 });
                    panels.push(Seed { map, a: 0.5, b: 1.0 });
                }
            }
        }
        Ok(Pieces { panels, fourier_tails })
    }
}

struct Pieces {
    panels: Vec<Seed>,
    fourier_tails: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Map {
    Identity,
    /// x = anchor + dir·u^q
    Singular {
        anchor: f64,
        dir: f64,
        q: f64,
    },
    /// x = dir·l·v^(-k)
    Tail {
        l: f64,
        dir: f64,
        k: f64,
    },
}

impl Map {
    #[inline]
    fn apply(&self, t: f64) -> (Node, f64) {
        match *self {
            Map::Identity => (Node::plain(t), 1.0),
            Map::Singular { anchor, dir, q } => {
                let h = t.powf(q);
                let offset = dir * h;
                (Node { x: anchor + offset, anchor, offset }, q * h / t)
            }
            Map::Tail { l, dir, k } => {
                let x = l * t.powf(-k);
                (Node::plain(dir * x), k * x / t)
            }
        }
    }

    fn rank(&self) -> (u8, f64, f64) {
        match *self {
            Map::Identity => (0, 0.0, 0.0),
            Map::Singular { anchor, dir, .. } => (1, anchor, dir),
            Map::Tail { dir, .. } => (2, dir, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Seed {
    map: Map,
    a: f64,
    b: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    seed: Seed,
    value: f64,
    err: f64,
    /// Error is at the rounding floor; bisecting further cannot help.
    settled: bool,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.seed.a.total_cmp(&self.seed.a))
    }
}

fn kronrod<F: Fn(Node) -> f64>(f: &F, seed: Seed) -> Result<Segment> {
    let Seed { map, a, b } = seed;
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let eval = |t: f64| -> Result<f64> {
        let (node, w) = map.apply(t);
        let y = f(node);
        if !y.is_finite() {
            return Err(Error::NonFinite { at: node.x });
        }
        Ok(if y == 0.0 { 0.0 } else { y * w })
    };
    let fc = eval(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = hw * XGK[j];
        let f1 = eval(c - dx)?;
        let f2 = eval(c + dx)?;
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * hw;
    let raw = ((kron - gauss) * hw).abs();
    let floor = 50.0 * f64::EPSILON * abs_sum * hw;
    Ok(Segment { seed, value, err: raw.max(floor), settled: raw <= floor })
}

fn adapt<F: Fn(Node) -> f64>(f: &F, seeds: &[Seed], opts: &QuadOptions) -> Result<QuadratureResult> {
    let mut heap = BinaryHeap::with_capacity(seeds.len() * 4);
    let mut done: Vec<Segment> = Vec::new();
    let mut evaluations = 0;
    for &s in seeds {
        heap.push(kronrod(f, s)?);
        evaluations += 15;
    }
    let target = |value: f64| opts.abs_tol.max(opts.rel_tol * value.abs());
    let totals = |heap: &BinaryHeap<Segment>, done: &[Segment]| {
        heap.iter().chain(done).fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.err))
    };
    let (mut value, mut err) = totals(&heap, &done);
    let mut iter = 0usize;
    loop {
        if err <= target(value) {
            // refresh the running sums before trusting them
            (value, err) = totals(&heap, &done);
            if err <= target(value) {
                break;
            }
        }
        let Some(worst) = heap.pop() else { break };
        let Seed { map, a, b } = worst.seed;
        let mid = 0.5 * (a + b);
        if worst.settled || mid <= a || mid >= b {
            done.push(worst);
            continue;
        }
        if heap.len() + done.len() + 2 > opts.max_segments {
            heap.push(worst);
            let (value, error_estimate) = totals(&heap, &done);
            return Err(Error::Quadrature { value, error_estimate, evaluations });
        }
        let left = kronrod(f, Seed { map, a, b: mid })?;
        let right = kronrod(f, Seed { map, a: mid, b })?;
        evaluations += 30;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        iter += 1;
        if iter % 256 == 0 {
            (value, err) = totals(&heap, &done);
        }
    }
    let mut all: Vec<Segment> = heap.into_vec();
    all.extend(done);
    all.sort_by(|x, y| {
        let (ra, rb) = (x.seed.map.rank(), y.seed.map.rank());
        ra.0.cmp(&rb.0).then(ra.1.total_cmp(&rb.1)).then(ra.2.total_cmp(&rb.2)).then(x.seed.a.total_cmp(&y.seed.a))
    });
    let values: Vec<f64> = all.iter().map(|s| s.value).collect();
    let errors: Vec<f64> = all.iter().map(|s| s.err).collect();
    let value = pairwise_sum(&values);
    let error_estimate = pairwise_sum(&errors);
    // only rounding-limited panels may stop short of the target
    if error_estimate > target(value) && all.iter().any(|s| !s.settled) {
        return Err(Error::Quadrature { value, error_estimate, evaluations });
    }
    Ok(QuadratureResult { value, error_estimate, evaluations })
}

/// ∫ from `start` to ±∞ (by `dir`) of an integrand g(x)cos(ωx), one half-period at a time.
fn fourier_tail<F: Fn(Node) -> f64>(
    f: &F,
    start: f64,
    dir: f64,
    omega: f64,
    opts: &QuadOptions,
    scale: f64,
) -> Result<QuadratureResult> {
    const MAX_TERMS: usize = 200;
    let step = std::f64::consts::PI / omega;
    let cycle_opts = QuadOptions { abs_tol: opts.abs_tol.max(1e-3 * opts.rel_tol * scale.abs()), ..*opts };
    let mut sums: Vec<f64> = Vec::new();
    let mut partial = 0.0;
    let mut evaluations = 0;
    let mut last = f64::NAN;
    let mut round_err = 0.0;
    for i in 0..MAX_TERMS {
        let a = start + i as f64 * step;
        let piece =
            adapt(&|n: Node| f(Node::plain(dir * n.x)), &[Seed { map: Map::Identity, a, b: a + step }], &cycle_opts)?;
        evaluations += piece.evaluations;
        round_err += piece.error_estimate;
        partial += piece.value;
        sums.push(partial);
        if sums.len() >= 3 {
            let est = wynn_epsilon(&sums);
            let change = (est - last).abs();
            let tol = opts.abs_tol.max(opts.rel_tol * (scale + est).abs());
            if change <= tol || piece.value.abs() <= 1e-3 * tol {
                return Ok(QuadratureResult { value: est, error_estimate: change + round_err, evaluations });
            }
            last = est;
        }
    }
    Err(Error::Quadrature {
        value: if last.is_nan() { partial } else { last },
        error_estimate: f64::INFINITY,
        evaluations,
    })
}

/// Last even-column entry of Wynn's epsilon table for the given partial sums.
fn wynn_epsilon(sums: &[f64]) -> f64 {
    let n = sums.len();
    // prev = column k-1, cur = column k
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = sums.to_vec();
    let mut best = *sums.last().unwrap();
    let mut k = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            if d == 0.0 {
                // the sequence has converged exactly at this level
                return if k % 2 == 0 { cur[j + 1] } else { best };
            }
            next.push(prev[j + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        k += 1;
        if k % 2 == 0 {
            best = *cur.last().unwrap();
        }
    }
    best
}

/// Pairwise (cascade) summation in the given order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// ∫_a^b f starting from `panels` equal panels.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    Problem::interval(a, b).panels(panels).integrate(|n: Node| f(n.x), opts)
}

/// ∫_a^b f.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadratureResult> {
    integrate_panels(f, a, b, 1, opts)
}

/// ∫_ℝ f for an integrand damped like exp(-(x/damping_scale)^2).
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, tol: f64, damping_scale: f64) -> Result<QuadratureResult> {
    if !(tol > 0.0) || !(damping_scale > 0.0) {
        return domain("integrate_line", "tolerance and damping scale must be positive");
    }
    Problem::line(Envelope::gaussian(damping_scale)).integrate(|n: Node| f(n.x), &QuadOptions::with_rel_tol(tol))
}

/// ∫ over `domain` of an integrand with `|x - s|^(kappa - 1)` singularities at `points`.
pub fn integrate_singular<F: Fn(Node) -> f64>(
    f: F,
    domain: Domain,
    points: &[f64],
    kappa: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    let problem = match domain {
        Domain::Interval(a, b) => Problem::interval(a, b),
        Domain::Line(env) => Problem::line(env),
    };
    problem.singular(points, kappa).integrate(f, &QuadOptions::with_rel_tol(tol))
}
