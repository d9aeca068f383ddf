use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lorentz_verify::conformal::{certify, sample_points};
use lorentz_verify::fields::FieldModel;
use lorentz_verify::hypersurface::immersion::{sample_params, ExprImmersion, Immersion};
use lorentz_verify::hypersurface::support::support_identities_check;
use lorentz_verify::models::builtin_space;
use lorentz_verify::par::{self, Mode};
use std::hint::black_box;

fn modes(c: &mut Criterion) {
    par::init_from_env();
    let ds = builtin_space("de-sitter-grw", 2).unwrap();
    let v = FieldModel::canonical(&ds).unwrap();
    let pts = sample_points(&ds, 0, 64);
    let imm = ExprImmersion::grw_slice(1.0, &ds.as_grw().unwrap().fiber);
    let params = sample_params(&imm.axes(), 0, 16);

    let mut group = c.benchmark_group("parallel_vs_sequential");
    group.sample_size(10);
    for (label, mode) in [("parallel", Mode::Parallel), ("sequential", Mode::Sequential)] {
        par::set_mode(mode);
        group.bench_function(BenchmarkId::new("certify_64", label), |b| {
            b.iter(|| certify(&ds, &v, black_box(&pts), 1e-8).unwrap())
        });
        group.bench_function(BenchmarkId::new("support_identities_16", label), |b| {
            b.iter(|| support_identities_check::<_, _, _, FieldModel>(&ds, &imm, &v, None, black_box(&params), 1e-5).unwrap())
        });
    }
    par::set_mode(Mode::Parallel);
    group.finish();
}

criterion_group!(benches, modes);
criterion_main!(benches);
