//! Globally adaptive Gauss–Kronrod (10/21) quadrature of vector-valued integrands.

#![allow(clippy::excessive_precision)]

use rayon::prelude::*;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
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

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
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

/// Panels refined per round. Fixed so results do not depend on the worker count.
const BATCH: usize = 16;

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

/// Result of [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
    pub evaluations: usize,
    pub panels: usize,
}

fn gk21<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let dim = fc.len();
    let mut kron: Vec<f64> = fc.iter().map(|v| v * WGK[10]).collect();
    let mut gauss = vec![0.0; dim];
    let mut res_abs: Vec<f64> = fc.iter().map(|v| v.abs() * WGK[10]).collect();
    let mut samples = Vec::with_capacity(10);
    for (k, &x) in XGK[..10].iter().enumerate() {
        let lo = f(center - half * x)?;
        let hi = f(center + half * x)?;
        for c in 0..dim {
            let s = lo[c] + hi[c];
            kron[c] += WGK[k] * s;
            res_abs[c] += WGK[k] * (lo[c].abs() + hi[c].abs());
            if k % 2 == 1 {
                gauss[c] += WG[k / 2] * s;
            }
        }
        samples.push((lo, hi));
    }
    let mut error = vec![0.0; dim];
    for c in 0..dim {
        let mean = 0.5 * kron[c];
        let mut res_asc = WGK[10] * (fc[c] - mean).abs();
        for (k, (lo, hi)) in samples.iter().enumerate() {
            res_asc += WGK[k] * ((lo[c] - mean).abs() + (hi[c] - mean).abs());
        }
        let res_asc = res_asc * half.abs();
        let mut err = ((kron[c] - gauss[c]) * half).abs();
        if res_asc != 0.0 && err != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        let floor = 50.0 * f64::EPSILON * res_abs[c] * half.abs();
        error[c] = err.max(floor);
        kron[c] *= half;
    }
    Ok(Panel {
        a,
        b,
        value: kron,
        error,
    })
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from one panel per
/// break interval and bisecting the worst panels until every component meets
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F>(f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64, max_evals: usize) -> Result<Integral>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    if breaks.len() < 2 {
        return Err(Error::Numerical("quadrature needs at least two break points".into()));
    }
    let intervals: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
    let mut panels: Vec<Panel> = intervals
        .par_iter()
        .map(|&(a, b)| gk21(&f, a, b))
        .collect::<Result<_>>()?;
    let mut evaluations = 21 * panels.len();
    let dim = panels[0].value.len();
    loop {
        let value: Vec<f64> = (0..dim)
            .map(|c| compensated_sum(panels.iter().map(|p| p.value[c])))
            .collect();
        let error: Vec<f64> = (0..dim)
            .map(|c| compensated_sum(panels.iter().map(|p| p.error[c])))
            .collect();
        let target: Vec<f64> = value.iter().map(|v| abs_tol.max(rel_tol * v.abs())).collect();
        if error.iter().zip(&target).all(|(e, t)| e <= t) {
            return Ok(Integral {
                value,
                error,
                evaluations,
                panels: panels.len(),
            });
        }
        if evaluations >= max_evals {
            return Err(Error::Numerical(format!(
                "quadrature did not converge within {max_evals} evaluations \
                 ({} panels, error estimates {:?}, targets {:?})",
                panels.len(),
                error,
                target
            )));
        }
        let score = |p: &Panel| -> f64 {
            (0..dim)
                .map(|c| p.error[c] / target[c])
                .fold(0.0, f64::max)
        };
        let mut order: Vec<usize> = (0..panels.len())
            .filter(|&i| {
                let p = &panels[i];
                let mid = 0.5 * (p.a + p.b);
                mid > p.a && mid < p.b
            })
            .collect();
        if order.is_empty() {
            return Err(Error::Numerical(
                "quadrature panels reached machine resolution without converging".into(),
            ));
        }
        order.sort_by(|&i, &j| score(&panels[j]).total_cmp(&score(&panels[i])).then(i.cmp(&j)));
        order.truncate(BATCH);
        let halves: Vec<(f64, f64)> = order
            .iter()
            .flat_map(|&i| {
                let p = &panels[i];
                let mid = 0.5 * (p.a + p.b);
                [(p.a, mid), (mid, p.b)]
            })
            .collect();
        let children: Vec<Panel> = halves
            .par_iter()
            .map(|&(a, b)| gk21(&f, a, b))
            .collect::<Result<_>>()?;
        evaluations += 21 * children.len();
        let mut split = vec![false; panels.len()];
        for &i in &order {
            split[i] = true;
        }
        let mut next = Vec::with_capacity(panels.len() + order.len());
        let mut children = children.into_iter();
        let mut replacement = std::collections::BTreeMap::new();
        for &i in &order {
            let left = children.next().expect("two children per split panel");
            let right = children.next().expect("two children per split panel");
            replacement.insert(i, (left, right));
        }
        for (i, p) in panels.into_iter().enumerate() {
            if split[i] {
                let (l, r) = replacement.remove(&i).expect("replacement recorded");
                next.push(l);
                next.push(r);
            } else {
                next.push(p);
            }
        }
        panels = next;
    }
}
