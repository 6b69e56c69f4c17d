use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qtors_core::curve::{twist, CurveModel};
use qtors_core::filters::is_els;
use qtors_core::granville::{euler_product, omega};
use qtors_core::jacobian::group::group_structure;
use qtors_core::jacobian::Jacobian;
use qtors_core::lseries::{EllipticCurve, LSeries};
use qtors_core::mwsieve::local_curve_image;
use qtors_core::jacobian::global::find_degree3_divisor;
use qtors_core::search::scan_twists;

fn cantor(c: &mut Criterion) {
    let t = twist(&CurveModel::x1_13(), 17).unwrap();
    let jac = Jacobian::new(&t, 10007, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = jac.random_element(&mut rng);
    let b = jac.random_element(&mut rng);
    c.bench_function("cantor_add_p10007", |bn| bn.iter(|| jac.add(black_box(&a), black_box(&b))));
    c.bench_function("scalar_mul_p10007", |bn| bn.iter(|| jac.mul_u(black_box(&a), 1_000_003)));
}

fn groups(c: &mut Criterion) {
    let t = twist(&CurveModel::x1_13(), 673).unwrap();
    c.bench_function("zeta_p211", |bn| bn.iter(|| t.zeta_data(black_box(211)).unwrap()));
    c.bench_function("group_structure_p211", |bn| bn.iter(|| group_structure(&t, black_box(211), 1).unwrap()));
    let base = find_degree3_divisor(&t, 8).unwrap().unwrap();
    c.bench_function("local_image_p211_n19", |bn| bn.iter(|| local_curve_image(&t, 211, &base, 19).unwrap()));
}

fn search(c: &mut Criterion) {
    let m = CurveModel::x1_16();
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    g.bench_function("scan_h300_b10000", |bn| bn.iter(|| scan_twists(&m, black_box(300), 10_000).unwrap()));
    g.finish();
    let t = twist(&CurveModel::x1_18(), 2841).unwrap();
    c.bench_function("els_x1_18_2841", |bn| bn.iter(|| is_els(black_box(&t)).unwrap()));
}

fn analytic(c: &mut Criterion) {
    let ls = LSeries::new(EllipticCurve::by_label("X1_11").unwrap(), 200_000).unwrap();
    c.bench_function("l_value_x1_11_d5", |bn| bn.iter(|| ls.twisted_l_value(black_box(5), None).unwrap()));
    let f = CurveModel::x1_13().f.clone();
    c.bench_function("omega_9991", |bn| bn.iter(|| omega(&f, black_box(9991))));
    let mut g = c.benchmark_group("euler");
    g.sample_size(10);
    g.bench_function("euler_product_1e5", |bn| bn.iter(|| euler_product(&f, black_box(100_000), 8)));
    g.finish();
}

criterion_group!(benches, cantor, groups, search, analytic);
criterion_main!(benches);
