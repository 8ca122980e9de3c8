use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use padic_gauge::models::hyperelliptic::frobenius_matrix as curve_matrix;
use padic_gauge::models::AffineModel;
use padic_gauge::padic::{PadicApprox, PrecisionPolicy};
use padic_gauge::semilinear::{kernel_dim, newton_slopes, FrobeniusMatrix, KernelOperator, TwistParams};
use padic_gauge::series::TruncatedSeries;
use padic_gauge::syntomic::{build_syntomic, syn_cohomology, FractionalTwist, UnitRootCoefficient};
use padic_gauge::witt::WittElement;

fn bench_series_mul(c: &mut Criterion) {
    let p = 5u64;
    let mut group = c.benchmark_group("series_mul");
    for d in [100i64, 300] {
        let policy = PrecisionPolicy::new(10, d);
        let mut a = TruncatedSeries::zero(p, policy);
        let mut b = TruncatedSeries::zero(p, policy);
        for n in 0..=d {
            a.set(n, PadicApprox::new(p, n + 1, 10));
            b.set(n, PadicApprox::new(p, 2 * n + 1, 10));
        }
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |bench, _| {
            bench.iter(|| a.mul(&b).unwrap())
        });
    }
    group.finish();
}

fn bench_curve_frobenius(c: &mut Criterion) {
    let mut group = c.benchmark_group("curve_frobenius");
    group.sample_size(20);
    for p in [5u64, 7] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |bench, &p| {
            bench.iter(|| curve_matrix(p, &[1, 1, 0, 1], 6).unwrap())
        });
    }
    group.finish();
}

fn bench_kernel_dim(c: &mut Criterion) {
    let p = 5u64;
    let m = FrobeniusMatrix::from_ints(
        p,
        6,
        12,
        &[
            1, 2, 0, 5, 0, 1, 0, 1, 5, 0, 2, 0, 1, 0, 1, 1, 0, 5, 0, 5, 0, 1, 2, 0, 2, 0, 1, 0,
            1, 1, 0, 1, 0, 5, 0, 1,
        ],
    );
    c.bench_function("kernel_dim_f_minus_one_twist", |bench| {
        bench.iter(|| {
            kernel_dim(&m, KernelOperator::FMinusOneOnTwist(TwistParams::new(1, 3)), 8).unwrap()
        })
    });
    c.bench_function("newton_slopes_dim6", |bench| {
        bench.iter(|| newton_slopes(&m).unwrap())
    });
}

fn bench_syntomic_certificate(c: &mut Criterion) {
    let model = AffineModel::affine_line(5, PrecisionPolicy::new(8, 300));
    let mut group = c.benchmark_group("syn_cohomology");
    group.sample_size(20);
    for (r, s) in [(3i64, 1u32), (1, 2)] {
        let cx = build_syntomic(
            &model,
            &UnitRootCoefficient::trivial(),
            FractionalTwist::new(r, s),
            10,
        )
        .unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("r{r}s{s}")),
            &(),
            |bench, _| bench.iter(|| syn_cohomology(&cx, 0, 8).unwrap()),
        );
    }
    group.finish();
}

fn bench_witt_mul(c: &mut Criterion) {
    let p = 3u64;
    let a = WittElement::from_polys(
        p,
        50,
        (0..3)
            .map(|k| {
                padic_gauge::fp::FpPoly::from_coeffs(
                    p,
                    &(0..=50).map(|j| ((j + k) % 3) as i64).collect::<Vec<_>>(),
                )
            })
            .collect(),
    )
    .unwrap();
    c.bench_function("witt_mul_n3", |bench| bench.iter(|| a.mul(&a).unwrap()));
}

criterion_group!(
    benches,
    bench_series_mul,
    bench_curve_frobenius,
    bench_kernel_dim,
    bench_syntomic_certificate,
    bench_witt_mul
);
criterion_main!(benches);
