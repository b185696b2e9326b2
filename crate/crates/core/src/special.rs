//! Special functions: error function, Hermite polynomials, log-factorials.
//!
//! `erf`/`erfc` follow the classic FreeBSD rational-approximation scheme
//! (the same one libm and Go use), giving near machine precision across
//! the whole range. The only deviation is the argument split before the
//! `exp(-x*x)` factor, which is done arithmetically instead of with bit
//! masks so the code stays generic over the scalar type.

use crate::float::Real;
use crate::logspace::LogNum;

const ERX: f64 = 8.450_629_115_104_675_29e-1;
const EFX: f64 = 1.283_791_670_955_125_86e-1;

const PP: [f64; 5] = [
    1.283_791_670_955_125_59e-1,
    -3.250_421_072_470_015_0e-1,
    -2.848_174_957_559_851_05e-2,
    -5.770_270_296_489_441_6e-3,
    -2.376_301_665_665_016_26e-5,
];
const QQ: [f64; 5] = [
    3.979_172_239_591_553_53e-1,
    6.502_224_998_876_729_44e-2,
    5.081_306_281_875_765_63e-3,
    1.324_947_380_043_216_45e-4,
    -3.960_228_278_775_368_12e-6,
];
const PA: [f64; 7] = [
    -2.362_118_560_752_659_44e-3,
    4.148_561_186_837_483_32e-1,
    -3.722_078_760_357_013_24e-1,
    3.183_466_199_011_617_54e-1,
    -1.108_946_942_823_966_77e-1,
    3.547_830_432_561_823_59e-2,
    -2.166_375_594_868_790_84e-3,
];
const QA: [f64; 6] = [
    1.064_208_804_008_442_28e-1,
    5.403_979_177_021_710_49e-1,
    7.182_865_441_419_626_63e-2,
    1.261_712_198_087_616_42e-1,
    1.363_708_391_202_905_07e-2,
    1.198_449_984_679_910_74e-2,
];
const RA: [f64; 8] = [
    -9.864_944_034_847_148_23e-3,
    -6.938_583_267_847_208_33e-1,
    -1.055_862_622_532_329_1e1,
    -6.237_533_245_032_600_6e1,
    -1.623_966_694_625_734_7e2,
    -1.846_050_929_067_110_36e2,
    -8.128_743_550_630_659_34e1,
    -9.814_329_344_169_145_49,
];
const SA: [f64; 8] = [
    1.965_127_166_743_925_71e1,
    1.376_577_541_435_190_43e2,
    4.345_658_774_752_292_29e2,
    6.453_872_717_332_678_8e2,
    4.290_081_400_275_678_33e2,
    1.086_350_055_417_794_35e2,
    6.570_249_770_319_281_7,
    -6.042_441_521_485_809_87e-2,
];
const RB: [f64; 7] = [
    -9.864_942_924_700_099_29e-3,
    -7.992_832_376_805_230_07e-1,
    -1.775_795_491_775_475_2e1,
    -1.606_363_848_558_219_16e2,
    -6.375_664_433_683_896_28e2,
    -1.025_095_131_611_077_25e3,
    -4.835_191_916_086_513_97e2,
];
const SB: [f64; 7] = [
    3.033_806_074_348_245_83e1,
    3.257_925_129_965_739_19e2,
    1.536_729_586_084_436_96e3,
    3.199_858_219_508_595_54e3,
    2.553_050_406_433_164_43e3,
    4.745_285_412_069_553_67e2,
    -2.244_095_244_658_581_83e1,
];

fn poly<T: Real>(coeffs: &[f64], z: T) -> T {
    let mut acc = T::zero();
    for &c in coeffs.iter().rev() {
        acc = acc * z + T::of(c);
    }
    acc
}

/// Drop low mantissa bits of `x` so `z * z` is exact; used to stabilize
/// `exp(-x^2)` in the asymptotic branch.
fn split_high<T: Real>(x: T) -> T {
    let scale = T::of((1u64 << 26) as f64);
    (x * scale).trunc() / scale
}

/// Shared asymptotic factor `exp(-x^2 - 0.5625 + R/S)` for 1.25 <= |x|.
fn erf_asymptotic_r<T: Real>(ax: T) -> T {
    let s = T::one() / (ax * ax);
    let (r, sden) = if ax < T::of(1.0 / 0.35) {
        (poly(&RA, s), T::one() + s * poly(&SA, s))
    } else {
        (poly(&RB, s), T::one() + s * poly(&SB, s))
    };
    let z = split_high(ax);
    ((-z * z - T::of(0.5625)).exp()) * (((z - ax) * (z + ax) + r / sden).exp())
}

/// Error function.
pub fn erf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x.is_infinite() {
        return if x > T::zero() { T::one() } else { -T::one() };
    }
    let ax = x.abs();
    if ax < T::of(3.725_290_298_461_914e-9) {
        return x + T::of(EFX) * x;
    }
    if ax < T::of(0.84375) {
        let z = x * x;
        let r = poly(&PP, z);
        let s = T::one() + z * poly(&QQ, z);
        return x + x * (r / s);
    }
    let sign = if x > T::zero() { T::one() } else { -T::one() };
    if ax < T::of(1.25) {
        let s = ax - T::one();
        let p = poly(&PA, s);
        let q = T::one() + s * poly(&QA, s);
        return sign * (T::of(ERX) + p / q);
    }
    if ax >= T::of(6.0) {
        return sign;
    }
    sign * (T::one() - erf_asymptotic_r(ax) / ax)
}

/// Complementary error function, accurate in the far tail (x up to ~27
/// in double precision before underflow).
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x.is_infinite() {
        return if x > T::zero() { T::zero() } else { T::of(2.0) };
    }
    let ax = x.abs();
    if ax < T::of(0.84375) {
        if ax < T::of(1.38e-17) {
            return T::one() - x;
        }
        let z = x * x;
        let r = poly(&PP, z);
        let s = T::one() + z * poly(&QQ, z);
        let y = r / s;
        return if x < T::of(0.25) {
            T::one() - (x + x * y)
        } else {
            T::of(0.5) - (x * y + (x - T::of(0.5)))
        };
    }
    if ax < T::of(1.25) {
        let s = ax - T::one();
        let p = poly(&PA, s);
        let q = T::one() + s * poly(&QA, s);
        return if x > T::zero() {
            T::one() - T::of(ERX) - p / q
        } else {
            T::one() + T::of(ERX) + p / q
        };
    }
    if ax < T::of(28.0) {
        if x < T::of(-6.0) {
            return T::of(2.0);
        }
        let r = erf_asymptotic_r(ax);
        return if x > T::zero() { r / ax } else { T::of(2.0) - r / ax };
    }
    if x > T::zero() {
        T::zero()
    } else {
        T::of(2.0)
    }
}

/// ln(erfc(x)) for x >= 0 without underflow, via the asymptotic factor
/// `erfc(x) = exp(-z^2 - 0.5625) exp((z-x)(z+x) + R/S) / x` with the split
/// argument z.
pub fn ln_erfc<T: Real>(x: T) -> T {
    if x < T::of(1.25) {
        return erfc(x).ln();
    }
    let s = T::one() / (x * x);
    let (r, sden) = if x < T::of(1.0 / 0.35) {
        (poly(&RA, s), T::one() + s * poly(&SA, s))
    } else {
        (poly(&RB, s), T::one() + s * poly(&SB, s))
    };
    let z = split_high(x);
    (-z * z - T::of(0.5625)) + (z - x) * (z + x) + r / sden - x.ln()
}

/// Physicists' Hermite polynomial `H_k(x)` by the three-term recurrence.
pub fn hermite_h<T: Real>(k: usize, x: T) -> T {
    let mut h0 = T::one();
    if k == 0 {
        return h0;
    }
    let two = T::of(2.0);
    let mut h1 = two * x;
    for j in 1..k {
        let next = two * x * h1 - two * T::of(j as f64) * h0;
        h0 = h1;
        h1 = next;
    }
    h1
}

/// `H_k(x)` in signed log space; needed for orders where the plain value
/// overflows long before the Gaussian damping is applied.
pub fn hermite_h_log<T: Real>(k: usize, x: T) -> LogNum<T> {
    let mut h0 = LogNum::one();
    if k == 0 {
        return h0;
    }
    let two = LogNum::from_real(T::of(2.0));
    let lx = LogNum::from_real(x);
    let mut h1 = two.mul(lx);
    for j in 1..k {
        let next = two.mul(lx).mul(h1).sub(two.mul(LogNum::from_real(T::of(j as f64))).mul(h0));
        h0 = h1;
        h1 = next;
    }
    h1
}

/// ln(k!) table; exact summation of logs is plenty accurate here.
pub fn ln_factorial<T: Real>(k: usize) -> T {
    let mut acc = T::zero();
    for j in 2..=k {
        acc += T::of(j as f64).ln();
    }
    acc
}

/// ln(binomial(n, k)).
pub fn ln_binomial<T: Real>(n: usize, k: usize) -> T {
    ln_factorial::<T>(n) - ln_factorial::<T>(k) - ln_factorial::<T>(n - k)
}
