use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use optosqueeze::operating_point::direct_operating_point;
use optosqueeze::params::hz_to_rad_s;
use optosqueeze::sweep::{
    calibrate_baseline, coupling_family_spectra, linear_grid, phase_grid, r_family_minima, stability_map,
    CalibrationBox, MapAxis,
};
use optosqueeze::{derive_photon_stats, Execution, Numerics, SystemParams, TempConvention};

const MODES: [(&str, Execution); 2] = [("serial", Execution::Serial), ("parallel", Execution::Parallel)];

fn figure_params() -> SystemParams {
    let wm = hz_to_rad_s(10.1e6);
    SystemParams::direct(wm, hz_to_rad_s(150.0), 1.1 * wm, hz_to_rad_s(260.0), 0.25 * wm, 0.75 * wm, 0.037)
}

fn r_family(c: &mut Criterion) {
    let p = figure_params();
    let op = direct_operating_point(0.25 * p.omega_m, 0.75 * p.omega_m, &p).unwrap();
    let phis = phase_grid(720);
    let rs = [0.3, 0.6, 1.0, 1.5, 2.0];
    let mut group = c.benchmark_group("r_family");
    for (name, exec) in MODES {
        let numerics = Numerics {
            execution: exec,
            ..Numerics::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| r_family_minima(&rs, &phis, &op, &p, &numerics, TempConvention::default()).unwrap())
        });
    }
    group.finish();
}

fn stability(c: &mut Criterion) {
    let p = figure_params();
    let wm = p.omega_m;
    let gs = linear_grid(0.0, 0.6 * wm, 64);
    let ds = linear_grid(-1.5 * wm, 1.5 * wm, 64);
    let mut group = c.benchmark_group("stability_map_64x64");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| stability_map(MapAxis::Coupling, &gs, MapAxis::Detuning, &ds, &p, exec).unwrap())
        });
    }
    group.finish();
}

fn spectra(c: &mut Criterion) {
    let p = figure_params();
    let wm = p.omega_m;
    let gs = linear_grid(0.05 * wm, 0.35 * wm, 16);
    let omegas = linear_grid(0.0, 2.0 * wm, 20_000);
    let sq = derive_photon_stats(1.0, 0.8 * std::f64::consts::PI).unwrap();
    let mut group = c.benchmark_group("coupling_family_spectra");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| coupling_family_spectra(&gs, &omegas, &p, &sq, exec).unwrap())
        });
    }
    group.finish();
}

fn calibration(c: &mut Criterion) {
    let p = figure_params();
    let bx = CalibrationBox::scaled(p.omega_m, (0.5, 2.0), (0.25, 1.5), (0.05, 0.35));
    let mut group = c.benchmark_group("calibration");
    group.sample_size(10);
    for (name, exec) in MODES {
        let numerics = Numerics {
            execution: exec,
            ..Numerics::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| calibrate_baseline(1e-3, &bx, &p, &numerics, TempConvention::default(), 0.1).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, r_family, stability, spectra, calibration);
criterion_main!(benches);
