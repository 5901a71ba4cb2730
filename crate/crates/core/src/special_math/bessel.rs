use crate::error::{Error, Result};

/// Above this argument `bessel_k1` returns exactly zero.
///
/// `K1(700) ~ 4.7e-306`; a few units further the value leaves the normal
/// f64 range. Callers that need the tail should use [`ln_bessel_k1`] or
/// [`bessel_k1_scaled`], which have no cutoff.
pub const K1_UNDERFLOW_CUTOFF: f64 = 700.0;

#[cfg(test)]
const SERIES_SPLIT: f64 = 2.0;
/// Below this argument K1 comes from its power series, above from Chebyshev fits.
pub(crate) const K1_SERIES_SPLIT: f64 = 1.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// Chebyshev coefficients of sqrt(x) e^x K0(x) on x >= 2 in t = 4/x - 1.
// The leading coefficient is already halved, so the sum is plain sum c_j T_j(t).
#[cfg(test)]
const K0E_CHEB: [f64; 26] = [
    1.220_151_541_032_977_7,
    -3.144_810_131_196_450e-2,
    1.569_883_885_730_053_4e-3,
    -1.284_954_958_162_780_3e-4,
    1.394_981_371_887_649_9e-5,
    -1.831_755_522_719_119_5e-6,
    2.766_813_639_445_015e-7,
    -4.660_489_897_687_948e-8,
    8.574_034_017_414_226e-9,
    -1.697_534_509_389_061_5e-9,
    3.577_397_281_400_328_4e-10,
    -7.957_489_244_477_397e-11,
    1.855_949_114_954_926_6e-11,
    -4.514_597_883_374_519e-12,
    1.140_340_588_207_344_2e-12,
    -2.980_096_923_148_178_4e-13,
    8.032_890_775_068_374e-14,
    -2.227_513_326_746_296_4e-14,
    6.340_076_476_276_646e-15,
    -1.848_593_377_920_907_2e-15,
    5.512_055_999_404_333e-16,
    -1.678_231_125_754_900_6e-16,
    5.210_391_777_643_554e-17,
    -1.647_580_593_984_263_3e-17,
    5.300_433_771_177_336e-18,
    -1.733_171_200_582_100e-18,
];

/// Same normalization, `sqrt(x) e^x K1(x)` on `[1, 2]` in `t = 4/x - 3`.
const K1E_CHEB_LOW: [f64; 16] = [
    1.550394290374205,
    0.08723684211490432,
    -0.0015357370088355982,
    6.120056369724835e-05,
    -3.308066564613384e-06,
    2.1248480214854267e-07,
    -1.5304896081055518e-08,
    1.1978194022020395e-09,
    -9.990776165909227e-11,
    8.767058132595274e-12,
    -8.020620770947939e-13,
    7.599020328586573e-14,
    -7.418123596476666e-15,
    7.431764548389543e-16,
    -7.616816063701545e-17,
    7.965593260653105e-18,
];

/// `sqrt(x) e^x K1(x)` on `[2, 8]` in `t = (16/x - 5)/3`.
const K1E_CHEB_MID: [f64; 18] = [
    1.3872156703486942,
    0.07571989953199368,
    -0.0014410515564754062,
    6.650116955125748e-05,
    -4.369984709520141e-06,
    3.5402774997630525e-07,
    -3.311163779293292e-08,
    3.4459775819010535e-09,
    -3.898932347475427e-10,
    4.720819750465836e-11,
    -6.047835662875356e-12,
    8.128494874865875e-13,
    -1.138694574714789e-13,
    1.654035840846228e-14,
    -2.4809025677068848e-15,
    3.8292378907024097e-16,
    -6.064734104001242e-17,
    9.832425623264862e-18,
];

/// `sqrt(x) e^x K1(x)` on `[8, inf)` in `t = 16/x - 1`.
const K1E_CHEB_TAIL: [f64; 14] = [
    1.281896541718695,
    0.02832887813049721,
    -0.00024753706739052506,
    5.771972451607249e-06,
    -2.0689392195365484e-07,
    9.739983441381804e-09,
    -5.585336140380625e-10,
    3.7329966340461855e-11,
    -2.8250519610232256e-12,
    2.372019002484144e-13,
    -2.176677387991754e-14,
    2.1579141616160325e-15,
    -2.290196930718269e-16,
    2.582885729823275e-17,
];

#[inline]
fn clenshaw(t: f64, coeffs: &[f64]) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + coeffs[0]
}

/// Power series pieces for the order-zero and `I` companions.
/// Returns `(I0, I1, S0, S1)` where
/// `S0 = sum_{k>=1} H_k y^k / (k!)^2` and
/// `S1 = sum_{k>=0} (psi(k+1) + psi(k+2)) y^k / (k! (k+1)!)`, `y = x^2 / 4`.
#[cfg(test)]
fn small_series(x: f64) -> (f64, f64, f64, f64) {
    let y = 0.25 * x * x;
    let mut i0 = 1.0;
    let mut i1 = 1.0;
    let mut s0 = 0.0;
    // psi(1) + psi(2) = 1 - 2 gamma
    let mut s1 = 1.0 - 2.0 * EULER_GAMMA;
    // t0 = y^k/(k!)^2, t1 = y^k/(k!(k+1)!)
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    let mut harmonic = 0.0;
    let mut psi_k1 = -EULER_GAMMA; // psi(k+1)
    for k in 1..60 {
        let kf = k as f64;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        psi_k1 += 1.0 / kf;
        let psi_k2 = psi_k1 + 1.0 / (kf + 1.0);
        i0 += t0;
        i1 += t1;
        s0 += harmonic * t0;
        s1 += (psi_k1 + psi_k2) * t1;
        if t0 < 1e-18 * i0 && t1 < 1e-18 * i1 {
            break;
        }
    }
    (i0, 0.5 * x * i1, s0, s1)
}

fn k1_small(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut i1 = 1.0;
    let mut s1 = 1.0 - 2.0 * EULER_GAMMA;
    let mut t1 = 1.0;
    let mut psi_k1 = -EULER_GAMMA;
    for k in 1..40 {
        let kf = k as f64;
        t1 *= y / (kf * (kf + 1.0));
        psi_k1 += 1.0 / kf;
        i1 += t1;
        s1 += (2.0 * psi_k1 + 1.0 / (kf + 1.0)) * t1;
        if t1 < 1e-18 * i1 {
            break;
        }
    }
    1.0 / x + (0.5 * x).ln() * 0.5 * x * i1 - 0.25 * x * s1
}

/// `sqrt(x) e^x K1(x)` for `x >= 1`, where it lies in `[1.25, 1.64]`.
#[inline]
pub(crate) fn k1_large_scaled(x: f64) -> f64 {
    if x < 2.0 {
        clenshaw(4.0 / x - 3.0, &K1E_CHEB_LOW)
    } else if x < 8.0 {
        clenshaw((16.0 / x - 5.0) / 3.0, &K1E_CHEB_MID)
    } else {
        clenshaw(16.0 / x - 1.0, &K1E_CHEB_TAIL)
    }
}

/// `e^x K1(x)` for `x > 0`, no range restriction.
fn k1e_unchecked(x: f64) -> f64 {
    if x < K1_SERIES_SPLIT {
        k1_small(x) * x.exp()
    } else {
        k1_large_scaled(x) / x.sqrt()
    }
}

/// Modified Bessel function of the second kind, order one.
///
/// Relative accuracy is better than 1e-13 on `[1e-6, 700]`. Returns `0.0`
/// for `x > 700` (see [`K1_UNDERFLOW_CUTOFF`]).
pub fn bessel_k1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("bessel_k1 requires x > 0, got {x}")));
    }
    if x > K1_UNDERFLOW_CUTOFF {
        return Ok(0.0);
    }
    if x < K1_SERIES_SPLIT {
        Ok(k1_small(x))
    } else {
        Ok(k1_large_scaled(x) / x.sqrt() * (-x).exp())
    }
}

/// Exponentially scaled `e^x K1(x)`.
pub fn bessel_k1_scaled(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("bessel_k1_scaled requires x > 0, got {x}")));
    }
    Ok(k1e_unchecked(x))
}

/// `ln K1(x)`, finite for every positive finite `x`.
#[inline]
pub fn ln_bessel_k1(x: f64) -> f64 {
    if x < K1_SERIES_SPLIT {
        k1_small(x).ln()
    } else {
        k1_large_scaled(x).ln() - 0.5 * x.ln() - x
    }
}

#[cfg(test)]
pub(crate) fn bessel_k0(x: f64) -> f64 {
    if x < SERIES_SPLIT {
        let (i0, _, s0, _) = small_series(x);
        -((0.5 * x).ln() + EULER_GAMMA) * i0 + s0
    } else {
        clenshaw(4.0 / x - 1.0, &K0E_CHEB) / x.sqrt() * (-x).exp()
    }
}

#[cfg(test)]
pub(crate) fn bessel_i0(x: f64) -> f64 {
    series_i(x, 0)
}

#[cfg(test)]
pub(crate) fn bessel_i1(x: f64) -> f64 {
    series_i(x, 1)
}

// Direct power series; fine for the moderate arguments the tests use.
#[cfg(test)]
fn series_i(x: f64, order: u32) -> f64 {
    let y = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    for k in 1..500 {
        let kf = k as f64;
        term *= y / (kf * (kf + order as f64));
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}
