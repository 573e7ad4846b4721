//! Adaptive Gauss-Kronrod quadrature on finite and semi-infinite intervals.
//!
//! The integrator keeps a list of subintervals and repeatedly bisects the one
//! with the largest error estimate until the summed estimate drops below
//! `max(abs_tol, rel_tol * |I|)`. Two Kronrod extensions are available so that
//! results can be cross-checked between orders.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Gauss-Kronrod pair used on each subinterval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rule {
    /// 7-point Gauss embedded in a 15-point Kronrod rule.
    #[default]
    Gk15,
    /// 10-point Gauss embedded in a 21-point Kronrod rule.
    Gk21,
}

const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const GK15_KRONROD: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const GK15_GAUSS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const GK21_NODES: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const GK21_KRONROD: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7, 9).
const GK21_GAUSS: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

impl Rule {
    fn tables(self) -> (&'static [f64], &'static [f64], &'static [f64]) {
        match self {
            Rule::Gk15 => (&GK15_NODES, &GK15_KRONROD, &GK15_GAUSS),
            Rule::Gk21 => (&GK21_NODES, &GK21_KRONROD, &GK21_GAUSS),
        }
    }

    /// Applies the rule once on `[a, b]`, returning the Kronrod estimate and
    /// `|Kronrod - Gauss|` as the error estimate.
    fn apply<F: Fn(f64) -> f64>(self, f: &F, a: f64, b: f64) -> (f64, f64) {
        let (nodes, wk, wg) = self.tables();
        let centre = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let last = nodes.len() - 1;
        // The centre node is a Gauss node only when the Gauss rule has odd order.
        let centre_is_gauss = last % 2 == 1;

        let fc = f(centre);
        let mut kronrod = wk[last] * fc;
        let mut gauss = if centre_is_gauss {
            wg[wg.len() - 1] * fc
        } else {
            0.0
        };
        for j in 0..last {
            let dx = half * nodes[j];
            let pair = f(centre - dx) + f(centre + dx);
            kronrod += wk[j] * pair;
            if j % 2 == 1 {
                gauss += wg[j / 2] * pair;
            }
        }
        (kronrod * half, ((kronrod - gauss) * half).abs())
    }
}

/// Tolerances and limits for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    pub rule: Rule,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_intervals: 4000,
            rule: Rule::Gk15,
        }
    }
}

impl QuadOptions {
    pub fn with_abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rule = rule;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration bounds must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, opts)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }

    let (value, error) = opts.rule.apply(&f, a, b);
    check_finite(value, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;

    while total_err > opts.target(total) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                value: total,
                error: total_err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            return Err(Error::Quadrature {
                value: total,
                error: total_err,
                intervals: heap.len(),
            });
        }
        let (lv, le) = opts.rule.apply(&f, worst.a, mid);
        let (rv, re) = opts.rule.apply(&f, mid, worst.b);
        check_finite(lv + rv, worst.a, worst.b)?;
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });

        // Re-sum occasionally so that cancellation in the running totals
        // cannot stall the stopping test.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }

    let total: f64 = heap.iter().map(|s| s.value).sum();
    let total_err: f64 = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult {
        value: total,
        error: total_err,
        intervals: heap.len(),
    })
}

/// Integrates `f` over `[a, ∞)`.
///
/// The interval `[a, a + initial_width]` is integrated first, then successive
/// chunks of doubling width are appended until a chunk contributes less than
/// a tenth of the absolute tolerance. A tail that keeps contributing after 64
/// doublings is reported as [`Error::NonFinite`].
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    initial_width: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !(initial_width.is_finite() && initial_width > 0.0) {
        return Err(Error::Domain(format!(
            "initial width must be positive, got {initial_width}"
        )));
    }
    let mut acc = integrate(&f, a, a + initial_width, opts)?;
    let mut lo = a + initial_width;
    let mut width = initial_width;
    for _ in 0..64 {
        let chunk = integrate(&f, lo, lo + width, opts)?;
        acc.value += chunk.value;
        acc.error += chunk.error;
        acc.intervals += chunk.intervals;
        let negligible = opts.target(acc.value) * 0.1;
        if chunk.value.abs() <= negligible && f(lo + width).abs() * width <= negligible {
            return Ok(acc);
        }
        lo += width;
        width *= 2.0;
        if !lo.is_finite() {
            break;
        }
    }
    Err(Error::NonFinite(format!(
        "integral over [{a}, ∞) does not converge: partial value {:e}",
        acc.value
    )))
}

fn check_finite(value: f64, a: f64, b: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!(
            "integrand is not finite on [{a}, {b}]"
        )))
    }
}
