//! Globally adaptive Gauss–Kronrod (7/15) quadrature over a set of seeded
//! panels, with symmetric truncation of infinite ranges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod 15-point nodes (positive half, descending) and weights; Gauss 7-point
// weights for the odd-indexed nodes.
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    abs_value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // larger error first; ties broken by position for determinism
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = kronrod.abs();
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let abs_value = abs_k * half.abs();
    let raw = ((kronrod - gauss) * half).abs();
    // QUADPACK-style error rescaling: (200 |K − G|)^1.5 is a realistic bound
    // once the rule has resolved the integrand.
    let error = if abs_value > 0.0 && raw > 0.0 {
        let scaled = abs_value * (200.0 * raw / abs_value).powf(1.5).min(1.0);
        scaled.max(50.0 * f64::EPSILON * abs_value)
    } else {
        raw
    };
    Panel {
        a,
        b,
        value,
        abs_value,
        error,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    /// ∫|f| estimate, used as the scale for the absolute error floor.
    pub abs_value: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Relative tolerance on the result.
    pub rel_tol: f64,
    /// Absolute floor, as a fraction of ∫|f|, used when the signed integral
    /// nearly cancels.
    pub cancellation_floor: f64,
    pub max_panels: usize,
    /// Hard upper limit on |ω| for infinite-range integrals. Needed when the
    /// integrand tail is not integrable.
    pub cutoff: Option<f64>,
}

impl QuadOptions {
    pub fn new(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            cancellation_floor: 1e-3,
            max_panels: 4000,
            cutoff: None,
        }
    }

    fn target(&self, value: f64, abs_value: f64) -> f64 {
        self.rel_tol * value.abs().max(self.cancellation_floor * abs_value)
    }
}

/// Integrate `f` over the finite interval [a, b] with interior breakpoints.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, breakpoints: &[f64], opts: &QuadOptions) -> Result<QuadResult> {
    if breakpoints.len() < 2 {
        return Err(Error::Computation("integration needs at least two breakpoints".into()));
    }
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            heap.push(gauss_kronrod(f, w[0], w[1]));
        }
    }
    let totals = |heap: &BinaryHeap<Panel>| {
        let v: CompensatedSum = heap.iter().map(|p| p.value).collect();
        let e: CompensatedSum = heap.iter().map(|p| p.error).collect();
        let a: CompensatedSum = heap.iter().map(|p| p.abs_value).collect();
        (v.value(), e.value(), a.value())
    };
    loop {
        let (value, error, abs_value) = totals(&heap);
        if error <= opts.target(value, abs_value) {
            return Ok(QuadResult {
                value,
                error,
                abs_value,
                panels: heap.len(),
            });
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::NonConvergence {
                estimate: value,
                error_bound: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval can no longer be split in floating point
            return Err(Error::NonConvergence {
                estimate: value,
                error_bound: error,
            });
        }
        heap.push(gauss_kronrod(f, worst.a, mid));
        heap.push(gauss_kronrod(f, mid, worst.b));
    }
}

/// Integrate over the whole real line by symmetric truncation at ±Ω.
///
/// Starts from `[−omega_start, omega_start]` (breakpoints inside are kept),
/// then adds shells [Ω, 2Ω] on both sides, doubling Ω, until a shell
/// contributes less than `rel_tol/10` of the running total. With a cutoff
/// the shells stop at ±cutoff whether or not they have converged.
pub fn integrate_real_line<F: Fn(f64) -> f64>(
    f: &F,
    structure: &[f64],
    omega_start: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let omega_start = opts.cutoff.map_or(omega_start, |c| omega_start.min(c));
    let mut bps: Vec<f64> = structure
        .iter()
        .copied()
        .filter(|x| x.abs() < omega_start)
        .chain([-omega_start, omega_start])
        .collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let core = integrate(f, &bps, opts)?;
    let mut value = CompensatedSum::default();
    value.add(core.value);
    let mut error = core.error;
    let mut abs_value = core.abs_value;
    let mut panels = core.panels;
    let mut omega = omega_start;
    for _ in 0..64 {
        let outer = opts.cutoff.map_or(2.0 * omega, |c| c.min(2.0 * omega));
        if outer <= omega {
            return Ok(QuadResult {
                value: value.value(),
                error,
                abs_value,
                panels,
            });
        }
        let left = integrate(f, &[-outer, -omega], opts)?;
        let right = integrate(f, &[omega, outer], opts)?;
        let shell = left.value + right.value;
        value.add(left.value);
        value.add(right.value);
        error += left.error + right.error;
        abs_value += left.abs_value + right.abs_value;
        panels += left.panels + right.panels;
        omega = outer;
        let total = value.value();
        if shell.abs() <= 0.1 * opts.target(total, abs_value) {
            // the next shell of a tail decaying at least like 1/ω² is no
            // larger than this one; book it as error
            error += shell.abs();
            return Ok(QuadResult {
                value: total,
                error,
                abs_value,
                panels,
            });
        }
    }
    Err(Error::NonConvergence {
        estimate: value.value(),
        error_bound: error,
    })
}
